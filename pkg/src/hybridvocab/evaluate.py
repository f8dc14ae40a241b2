"""Coverage of a static vocabulary over a corpus.

Two per-document checks:

* impacted: the reference output uses a token removed by tolerance filtering
  (this is what ``tau`` bounds on the profiling corpus);
* uncovered: some reference output token is missing from the instance's
  active set, whatever the reason.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

from .errors import IntegrityError
from .selector import select
from .static import StaticTaskVocab, exact_tau
from .tokens import Document


@dataclass(frozen=True)
class CoverageReport:
    M: int
    impacted: int
    uncovered: int
    tau: float
    impacted_docs: tuple[int, ...] = ()
    uncovered_docs: tuple[int, ...] = ()

    @property
    def impacted_fraction(self) -> float:
        return self.impacted / self.M if self.M else 0.0

    @property
    def uncovered_fraction(self) -> float:
        return self.uncovered / self.M if self.M else 0.0

    @property
    def within_tolerance(self) -> bool:
        return Fraction(self.impacted) <= exact_tau(self.tau) * self.M

    def to_json(self) -> dict:
        return {
            "M": self.M,
            "tau": self.tau,
            "impacted": self.impacted,
            "impacted_fraction": self.impacted_fraction,
            "uncovered": self.uncovered,
            "uncovered_fraction": self.uncovered_fraction,
            "within_tolerance": self.within_tolerance,
            "impacted_docs": list(self.impacted_docs),
            "uncovered_docs": list(self.uncovered_docs),
        }


def coverage(docs: Iterable[Document], sv: StaticTaskVocab, full_size: int,
             profiling: bool = False) -> CoverageReport:
    """Count impacted and uncovered documents.

    With ``profiling=True`` the corpus is the one ``sv`` was built from and
    the tolerance bound is enforced.
    """
    pruned = sv.pruned.members
    impacted, uncovered = [], []
    m = 0
    for doc in docs:
        doc.validate(full_size)
        m += 1
        out = set(doc.output_ids)
        if out & pruned:
            impacted.append(doc.doc_index)
        active = set(select(doc.input_ids, sv, full_size).active_ids)
        if not out <= active:
            uncovered.append(doc.doc_index)
    rep = CoverageReport(m, len(impacted), len(uncovered), sv.tau, tuple(impacted), tuple(uncovered))
    if profiling and not rep.within_tolerance:
        raise IntegrityError(
            f"{rep.impacted} of {m} profiling documents impacted, above tau={sv.tau}"
        )
    return rep
