"""Reduced LM head: row gather, reproducible logits, greedy decode, memory accounting.

Weight file layout (little-endian)::

    offset 0   4 bytes   magic b"VTLH"
    offset 4   uint64    number of rows |V|
    offset 12  uint32    hidden size d
    offset 16  uint32    dtype code: 2 = float16, 4 = float32
    offset 20  |V|*d*dtype bytes, row-major
"""
from __future__ import annotations

import struct
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np

from .errors import DataError, IntegrityError, ParseError
from .selector import SelectionPlan, remap_out
from .tokens import TokenId

MAGIC = b"VTLH"
_HEADER = struct.Struct("<4sQII")
_DTYPES = {2: np.dtype("<f2"), 4: np.dtype("<f4")}


@dataclass(frozen=True, eq=False)
class HeadMatrix:
    weights: np.ndarray  # (rows, d)

    def __post_init__(self):
        w = np.asarray(self.weights)
        if w.ndim != 2:
            raise DataError(f"head weights must be 2-D, got shape {w.shape}")
        if w.dtype.itemsize not in _DTYPES or w.dtype.kind != "f":
            raise DataError(f"unsupported head dtype {w.dtype}; use float16 or float32")
        w = w.astype(_DTYPES[w.dtype.itemsize], copy=False)
        w.flags.writeable = False
        object.__setattr__(self, "weights", w)

    @property
    def rows(self) -> int:
        return self.weights.shape[0]

    @property
    def d(self) -> int:
        return self.weights.shape[1]

    @property
    def dtype_bytes(self) -> int:
        return self.weights.dtype.itemsize

    @property
    def nbytes(self) -> int:
        return self.rows * self.d * self.dtype_bytes

    @classmethod
    def random(cls, rows: int, d: int, seed: int = 0, dtype_bytes: int = 4) -> HeadMatrix:
        rng = np.random.default_rng(seed)
        return cls(rng.standard_normal((rows, d), dtype=np.float32).astype(_DTYPES[dtype_bytes]))


def gather(head: HeadMatrix, plan: SelectionPlan) -> HeadMatrix:
    if plan.full_vocab_size != head.rows:
        raise DataError(f"plan is over {plan.full_vocab_size} tokens but the head has {head.rows} rows")
    idx = np.asarray(plan.active_ids, dtype=np.int64)
    return HeadMatrix(head.weights[idx] if len(idx) else head.weights[:0])


def logits(head: HeadMatrix, hidden) -> np.ndarray:
    """Row-wise dot products accumulated in ascending feature order (float32).

    Each row's result depends only on that row, so logits of a gathered
    sub-head are bitwise equal to the corresponding full-head logits.
    """
    h = np.asarray(hidden, dtype=np.float32)
    if h.shape != (head.d,):
        raise DataError(f"hidden vector has shape {h.shape}, expected ({head.d},)")
    cols = np.asfortranarray(head.weights, dtype=np.float32)
    acc = np.zeros(head.rows, dtype=np.float32)
    for j in range(head.d):
        acc += cols[:, j] * h[j]
    return acc


def greedy_step(subhead: HeadMatrix, hidden, plan: SelectionPlan) -> TokenId:
    if subhead.rows == 0:
        raise DataError("greedy step over an empty sub-head")
    if subhead.rows != len(plan):
        raise DataError(f"sub-head has {subhead.rows} rows but the plan selects {len(plan)}")
    # np.argmax returns the first maximum, i.e. the lowest local index
    return remap_out(plan, int(np.argmax(logits(subhead, hidden))))


@dataclass(frozen=True)
class MemoryReport:
    full_head_bytes: int
    sub_head_bytes: int
    embedding_bytes_gpu: int
    embedding_bytes_host: int

    @property
    def full_embedding_bytes(self) -> int:
        return self.embedding_bytes_host + self.embedding_bytes_gpu

    @property
    def saved_fraction(self) -> Fraction:
        """Share of vocabulary-related device memory (LM head + embedding) saved."""
        total = self.full_head_bytes + self.full_embedding_bytes
        if total == 0:
            return Fraction(0)
        return 1 - Fraction(self.sub_head_bytes + self.embedding_bytes_gpu, total)

    def to_json(self) -> dict:
        d = dict(self.__dict__)
        d["saved_fraction"] = float(self.saved_fraction)
        return d


def memory_report(full_size: int, d: int, dtype_bytes: int, plan) -> MemoryReport:
    n = len(plan) if isinstance(plan, SelectionPlan) else int(plan)
    row = d * dtype_bytes
    return MemoryReport(
        full_head_bytes=full_size * row,
        sub_head_bytes=n * row,
        embedding_bytes_gpu=0,
        embedding_bytes_host=full_size * row,
    )


def save_head(head: HeadMatrix, path) -> None:
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, head.rows, head.d, head.dtype_bytes))
        fh.write(np.ascontiguousarray(head.weights).tobytes())


def load_head(path) -> HeadMatrix:
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise ParseError("file too short for a head header", str(path))
    magic, rows, d, code = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise ParseError(f"bad magic {magic!r}", f"{path}:0")
    if code not in _DTYPES:
        raise ParseError(f"unknown dtype code {code}", f"{path}:16")
    expected = rows * d * code
    if len(raw) - _HEADER.size != expected:
        raise IntegrityError(f"{path}: payload is {len(raw) - _HEADER.size} bytes, header implies {expected}")
    w = np.frombuffer(raw, dtype=_DTYPES[code], offset=_HEADER.size).reshape(rows, d)
    return HeadMatrix(w.copy())
