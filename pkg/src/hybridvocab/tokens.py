"""Shared token-level domain types: records, vocabulary tables, documents, token sets."""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import reduce
from typing import Iterable, Sequence

from .errors import DataError, IntegrityError

# Token ids are plain ints in [0, vocab size).
TokenId = int


@dataclass(frozen=True)
class TokenRecord:
    id: TokenId
    surface: bytes
    display: str | None = None
    is_special: bool = False

    def __post_init__(self):
        if self.id < 0:
            raise IntegrityError(f"negative token id {self.id}")
        if not self.surface and not self.is_special:
            raise IntegrityError(f"token {self.id} has an empty surface")


@dataclass(frozen=True)
class VocabularyTable:
    records: tuple[TokenRecord, ...]
    byte_level: bool = False

    def __post_init__(self):
        object.__setattr__(self, "records", tuple(self.records))
        seen = {}
        for i, rec in enumerate(self.records):
            if rec.id != i:
                raise IntegrityError(f"record at position {i} has id {rec.id}; ids must be 0..size-1")
            if rec.is_special:
                continue
            if rec.surface in seen:
                raise IntegrityError(
                    f"tokens {seen[rec.surface]} and {i} share surface {rec.surface!r}"
                )
            seen[rec.surface] = i

    @property
    def size(self) -> int:
        return len(self.records)

    def __len__(self):
        return len(self.records)

    def __getitem__(self, token_id: TokenId) -> TokenRecord:
        if not 0 <= token_id < len(self.records):
            raise DataError(f"token id {token_id} out of range for vocabulary of size {self.size}")
        return self.records[token_id]

    @property
    def special_ids(self) -> frozenset[TokenId]:
        return frozenset(r.id for r in self.records if r.is_special)


@dataclass(frozen=True)
class Document:
    input_ids: tuple[TokenId, ...]
    output_ids: tuple[TokenId, ...]
    doc_index: int = 0

    def __post_init__(self):
        object.__setattr__(self, "input_ids", tuple(self.input_ids))
        object.__setattr__(self, "output_ids", tuple(self.output_ids))

    def validate(self, vocab_size: int) -> None:
        for tid in (*self.input_ids, *self.output_ids):
            if not 0 <= tid < vocab_size:
                raise DataError(
                    f"document {self.doc_index}: token id {tid} out of range "
                    f"for vocabulary of size {vocab_size}"
                )


@dataclass(frozen=True)
class TokenSet:
    """An exact set of token ids drawn from a vocabulary of ``vocab_size`` tokens.

    ``vocab_size`` may be ``None`` for sets not yet tied to a vocabulary; such
    sets combine with any other set.
    """

    members: frozenset[TokenId] = field(default_factory=frozenset)
    vocab_size: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "members", frozenset(self.members))
        if self.vocab_size is not None:
            bad = [m for m in self.members if not 0 <= m < self.vocab_size]
            if bad:
                raise DataError(f"ids {sorted(bad)[:5]} out of range for vocabulary of size {self.vocab_size}")

    def __contains__(self, token_id):
        return token_id in self.members

    def __iter__(self):
        return iter(sorted(self.members))

    def __len__(self):
        return len(self.members)

    def sorted(self) -> list[TokenId]:
        return sorted(self.members)

    def _check(self, other: TokenSet) -> int | None:
        if self.vocab_size is None:
            return other.vocab_size
        if other.vocab_size is not None and other.vocab_size != self.vocab_size:
            raise DataError(
                f"token sets over different vocabularies ({self.vocab_size} vs {other.vocab_size})"
            )
        return self.vocab_size

    def union(self, other: TokenSet) -> TokenSet:
        return TokenSet(self.members | other.members, self._check(other))

    def difference(self, other: TokenSet) -> TokenSet:
        return TokenSet(self.members - other.members, self._check(other))

    def intersection(self, other: TokenSet) -> TokenSet:
        return TokenSet(self.members & other.members, self._check(other))

    __or__ = union
    __sub__ = difference
    __and__ = intersection

    def issubset(self, other: TokenSet) -> bool:
        return self.members <= other.members


def token_set_from_ids(ids: Iterable[TokenId], vocab_size: int | None = None) -> TokenSet:
    return TokenSet(frozenset(ids), vocab_size)


def set_union(a: TokenSet, b: TokenSet) -> TokenSet:
    return a.union(b)


def set_difference(a: TokenSet, b: TokenSet) -> TokenSet:
    return a.difference(b)


def set_intersection(a: TokenSet, b: TokenSet) -> TokenSet:
    return a.intersection(b)


def union_all(sets: Sequence[TokenSet] | Iterable[TokenSet], vocab_size: int | None = None) -> TokenSet:
    return reduce(set_union, sets, TokenSet(frozenset(), vocab_size))
