"""Offline construction of the static task vocabulary.

Three stages run on the profiled output vocabulary:

1. input-aware filtering drops tokens that inputs already supply,
2. language filtering keeps tokens whose Unicode block is allowed,
3. tolerance filtering prunes the rarest tokens while their cumulative
   document frequency stays within ``tau * M``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Real
from pathlib import Path
from typing import Mapping

from .errors import ConfigError, DataError, IntegrityError, ParseError
from .profiler import ProfiledCorpus
from .tokens import TokenId, TokenSet
from .unicode_script import resolve_blocks

INPUT_FILTER_MODES = ("corpus", "per_example")

# provenance labels: the stage that removed a candidate, or why it was kept
REMOVED_INPUT = "input_aware"
REMOVED_LANGUAGE = "language"
REMOVED_TOLERANCE = "tolerance"
KEPT = "kept"
KEPT_ALWAYS = "always_keep"


def exact_tau(tau) -> Fraction:
    """Tolerance as an exact rational, reading floats by their shortest repr.

    ``0.3`` is taken as 3/10, not as the binary double just below it, so that
    ``tau * M`` thresholds land where a user writing decimals expects.
    """
    if isinstance(tau, bool) or not isinstance(tau, (Real, str)):
        raise ConfigError(f"tau must be a number, got {tau!r}")
    try:
        t = Fraction(repr(tau)) if isinstance(tau, float) else Fraction(tau)
    except (ValueError, ZeroDivisionError):
        raise ConfigError(f"tau must be a number, got {tau!r}") from None
    if not 0 <= t <= 1:
        raise ConfigError(f"tau must lie in [0, 1], got {tau}")
    return t


@dataclass(frozen=True)
class FilterConfig:
    tau: float = 0.01
    allowed_blocks: frozenset[str] | None = None  # None: every block allowed
    keep_byte_fragments: bool = True
    always_keep: frozenset[TokenId] = frozenset()
    input_filter: str = "corpus"

    def __post_init__(self):
        exact_tau(self.tau)
        if self.allowed_blocks is not None:
            object.__setattr__(self, "allowed_blocks", resolve_blocks(self.allowed_blocks))
        object.__setattr__(self, "always_keep", frozenset(self.always_keep))
        if self.input_filter not in INPUT_FILTER_MODES:
            raise ConfigError(f"input_filter must be one of {INPUT_FILTER_MODES}, got {self.input_filter!r}")


@dataclass(frozen=True)
class StaticTaskVocab:
    members: TokenSet
    stage_sizes: tuple[int, int, int, int]
    pruned_df_sum: int
    tau: float
    M: int
    allowed_blocks: frozenset[str] | None = None
    provenance: Mapping[TokenId, str] = field(default_factory=dict)
    input_filter: str = "corpus"

    @property
    def vocab_size(self):
        return self.members.vocab_size

    @property
    def pruned(self) -> TokenSet:
        """Tokens removed by tolerance filtering."""
        return TokenSet(
            frozenset(t for t, why in self.provenance.items() if why == REMOVED_TOLERANCE),
            self.vocab_size,
        )

    def to_json(self) -> dict:
        return {
            "tau": self.tau,
            "allowed_blocks": sorted(self.allowed_blocks) if self.allowed_blocks is not None else None,
            "input_filter": self.input_filter,
            "vocab_size": self.vocab_size,
            "M": self.M,
            "members": self.members.sorted(),
            "stage_sizes": list(self.stage_sizes),
            "pruned_df_sum": self.pruned_df_sum,
            "provenance": {str(t): self.provenance[t] for t in sorted(self.provenance)},
        }

    @classmethod
    def from_json(cls, data: dict, path="<static>") -> StaticTaskVocab:
        try:
            blocks = data.get("allowed_blocks")
            sv = cls(
                members=TokenSet(frozenset(map(int, data["members"])), data.get("vocab_size")),
                stage_sizes=tuple(int(x) for x in data["stage_sizes"]),
                pruned_df_sum=int(data["pruned_df_sum"]),
                tau=data["tau"],
                M=int(data.get("M", 0)),
                allowed_blocks=frozenset(blocks) if blocks is not None else None,
                provenance={int(k): str(v) for k, v in data.get("provenance", {}).items()},
                input_filter=data.get("input_filter", "corpus"),
            )
        except (KeyError, TypeError, ValueError) as e:
            raise ParseError(f"malformed static vocabulary: {e!r}", path) from None
        if len(sv.stage_sizes) != 4:
            raise ParseError("stage_sizes must have four entries", path)
        return sv


def input_aware_filter(candidates: TokenSet, input_union: TokenSet, always_keep=frozenset()) -> TokenSet:
    drop = input_union.members - frozenset(always_keep)
    return candidates - TokenSet(drop, input_union.vocab_size)


def language_filter(candidates: TokenSet, cfg: FilterConfig, tokenizer=None) -> TokenSet:
    if cfg.allowed_blocks is None:
        return candidates
    if tokenizer is None:
        raise ConfigError("language filtering with allowed_blocks needs a tokenizer")

    def keep(t):
        if t in cfg.always_keep:
            return True
        cls = tokenizer.classify_script(t)
        if cls.kind == "neutral":
            return True
        if cls.kind == "byte_fragment":
            return cfg.keep_byte_fragments
        return cls.block in cfg.allowed_blocks

    return TokenSet(frozenset(t for t in candidates.members if keep(t)), candidates.vocab_size)


def tolerance_filter(candidates: TokenSet, df: Mapping[TokenId, int], M: int, tau,
                     always_keep=frozenset()) -> tuple[TokenSet, int]:
    """Prune the longest ascending-df prefix whose df sum stays within tau*M.

    Order is (df, token id); ``always_keep`` tokens are never pruned.
    """
    if M < 1:
        raise DataError("tolerance filtering needs M >= 1 documents")
    t = exact_tau(tau)
    budget_num, budget_den = t.numerator * M, t.denominator  # tau*M as a fraction
    order = sorted((df.get(v, 0), v) for v in candidates.members if v not in always_keep)
    cum = 0
    cut = 0
    for freq, _ in order:
        if (cum + freq) * budget_den > budget_num:
            break
        cum += freq
        cut += 1
    pruned = frozenset(v for _, v in order[:cut])
    return TokenSet(candidates.members - pruned, candidates.vocab_size), cum


def build_static(p: ProfiledCorpus, cfg: FilterConfig, tokenizer=None) -> StaticTaskVocab:
    if p.M < 1:
        raise DataError("cannot build a static vocabulary from an empty profile")
    n = p.vocab_size
    keep = cfg.always_keep
    bad = [t for t in keep if not 0 <= t < n]
    if bad:
        raise ConfigError(f"always_keep ids {sorted(bad)} out of range for vocabulary of size {n}")

    v0 = TokenSet(frozenset(p.output_union) | keep, n)
    if cfg.input_filter == "corpus":
        v1 = input_aware_filter(v0, p.input_set, keep)
    else:
        v1 = v0 & TokenSet(frozenset(p.novel_output_union) | keep, n)
    v2 = language_filter(v1, cfg, tokenizer)
    members, pruned_sum = tolerance_filter(v2, p.df, p.M, cfg.tau, keep)

    if not (members.issubset(v2) and v2.issubset(v1) and v1.issubset(v0)):
        raise IntegrityError("stage outputs are not nested")
    if pruned_sum * exact_tau(cfg.tau).denominator > exact_tau(cfg.tau).numerator * p.M:
        raise IntegrityError("tolerance guarantee violated")

    provenance = {}
    for t in v0.members:
        if t in keep:
            provenance[t] = KEPT_ALWAYS
        elif t not in v1:
            provenance[t] = REMOVED_INPUT
        elif t not in v2:
            provenance[t] = REMOVED_LANGUAGE
        elif t not in members:
            provenance[t] = REMOVED_TOLERANCE
        else:
            provenance[t] = KEPT
    return StaticTaskVocab(
        members=members,
        stage_sizes=(len(v0), len(v1), len(v2), len(members)),
        pruned_df_sum=pruned_sum,
        tau=cfg.tau,
        M=p.M,
        allowed_blocks=cfg.allowed_blocks,
        provenance=provenance,
        input_filter=cfg.input_filter,
    )


def save_static(sv: StaticTaskVocab, path) -> None:
    Path(path).write_text(json.dumps(sv.to_json(), indent=1) + "\n", encoding="utf-8")


def load_static(path) -> StaticTaskVocab:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise ParseError(e.msg, f"{path}:{e.lineno}:{e.colno}") from None
    return StaticTaskVocab.from_json(data, str(path))
