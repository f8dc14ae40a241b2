"""Per-instance dynamic selection: active set = input tokens plus static vocabulary."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from decimal import Decimal
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import DataError, ParseError
from .static import StaticTaskVocab
from .tokens import TokenId


@dataclass(frozen=True)
class SelectionPlan:
    active_ids: tuple[TokenId, ...]
    n_static: int
    n_dynamic: int
    full_vocab_size: int

    def __post_init__(self):
        ids = tuple(self.active_ids)
        object.__setattr__(self, "active_ids", ids)
        if any(a >= b for a, b in zip(ids, ids[1:])):
            raise DataError("active_ids must be strictly increasing")
        if ids and not (0 <= ids[0] and ids[-1] < self.full_vocab_size):
            raise DataError(f"active ids out of range for vocabulary of size {self.full_vocab_size}")
        object.__setattr__(self, "_g2l", {g: i for i, g in enumerate(ids)})

    @property
    def local_to_global(self) -> tuple[TokenId, ...]:
        return self.active_ids

    @property
    def global_to_local(self) -> dict[TokenId, int]:
        return dict(self._g2l)

    def local_of(self, token_id: TokenId) -> int:
        return self._g2l[token_id]

    def __len__(self):
        return len(self.active_ids)

    def to_json(self) -> dict:
        return {
            "active_ids": list(self.active_ids),
            "n_static": self.n_static,
            "n_dynamic": self.n_dynamic,
            "full_vocab_size": self.full_vocab_size,
        }

    @classmethod
    def from_json(cls, data: dict, path="<plan>") -> SelectionPlan:
        try:
            return cls(tuple(map(int, data["active_ids"])), int(data["n_static"]),
                       int(data["n_dynamic"]), int(data["full_vocab_size"]))
        except (KeyError, TypeError, ValueError) as e:
            raise ParseError(f"malformed plan: {e!r}", path) from None


def select(input_ids: Sequence[TokenId], static_vocab: StaticTaskVocab, full_size: int) -> SelectionPlan:
    bad = [t for t in input_ids if not 0 <= t < full_size]
    if bad:
        raise DataError(f"input ids {sorted(set(bad))[:5]} out of range for vocabulary of size {full_size}")
    static = static_vocab.members.members
    dynamic = set(input_ids) - static
    return SelectionPlan(tuple(sorted(static | dynamic)), len(static), len(dynamic), full_size)


def identity_plan(full_size: int) -> SelectionPlan:
    return SelectionPlan(tuple(range(full_size)), 0, full_size, full_size)


def union_plans(plans: Sequence[SelectionPlan], static_vocab: StaticTaskVocab) -> SelectionPlan:
    """One plan covering every instance of a micro-batch."""
    if not plans:
        raise DataError("cannot merge an empty batch of plans")
    full = plans[0].full_vocab_size
    if any(p.full_vocab_size != full for p in plans):
        raise DataError("plans over different vocabularies")
    ids = set().union(*(p.active_ids for p in plans))
    static = static_vocab.members.members
    return SelectionPlan(tuple(sorted(ids | static)), len(static), len(ids - static), full)


def remap_out(plan: SelectionPlan, local_id: int) -> TokenId:
    if not 0 <= local_id < len(plan.active_ids):
        raise DataError(f"local index {local_id} out of range for a plan of {len(plan.active_ids)} rows")
    return plan.active_ids[local_id]


def _half_up(x: Fraction, places: int) -> Decimal:
    """Round a non-negative fraction half-up to ``places`` decimals, exactly."""
    scaled = x * 10**places
    whole = math.floor(scaled + Fraction(1, 2))
    return Decimal(whole).scaleb(-places)


def format_vocab_line(n_static: int, mean_dynamic, full_size: int) -> str:
    """Render ``"<static> + [<dynamic>] (<percent>%)"``; the static part is dropped when empty."""
    mean_dynamic = Fraction(mean_dynamic)
    pct = _half_up(100 * (n_static + mean_dynamic) / full_size, 2)
    dyn = int(_half_up(mean_dynamic, 0))
    body = f"[{dyn:,}]" if n_static == 0 else f"{n_static:,} + [{dyn:,}]"
    return f"{body} ({pct}%)"


@dataclass(frozen=True)
class BatchReport:
    n_plans: int
    n_static: int
    mean_dynamic: Fraction
    full_vocab_size: int
    active_min: int
    active_max: int
    active_p50: float
    active_p90: float
    active_p99: float

    @property
    def line(self) -> str:
        return format_vocab_line(self.n_static, self.mean_dynamic, self.full_vocab_size)

    def to_json(self) -> dict:
        d = dict(self.__dict__)
        d["mean_dynamic"] = float(self.mean_dynamic)
        d["line"] = self.line
        return d


def batch_stats(plans: Iterable[SelectionPlan]) -> BatchReport:
    plans = list(plans)
    if not plans:
        raise DataError("batch_stats needs at least one plan")
    n_static = {p.n_static for p in plans}
    full = {p.full_vocab_size for p in plans}
    if len(n_static) != 1 or len(full) != 1:
        raise DataError("plans in one report must share the static vocabulary and full vocabulary size")
    sizes = np.array([len(p) for p in plans])
    return BatchReport(
        n_plans=len(plans),
        n_static=n_static.pop(),
        mean_dynamic=Fraction(sum(p.n_dynamic for p in plans), len(plans)),
        full_vocab_size=full.pop(),
        active_min=int(sizes.min()),
        active_max=int(sizes.max()),
        active_p50=float(np.percentile(sizes, 50)),
        active_p90=float(np.percentile(sizes, 90)),
        active_p99=float(np.percentile(sizes, 99)),
    )


def save_plan(plan: SelectionPlan, path) -> None:
    Path(path).write_text(json.dumps(plan.to_json()) + "\n", encoding="utf-8")


def load_plan(path) -> SelectionPlan:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise ParseError(e.msg, f"{path}:{e.lineno}:{e.colno}") from None
    return SelectionPlan.from_json(data, str(path))
