"""Corpus profiling: document frequencies, input/output unions, lexical overlap.

Profiling is a single streaming pass. Per-document statistics are kept in
doc_index order; everything else is O(|V|).
"""
from __future__ import annotations

import json
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Iterator

from .errors import DataError, ParseError
from .tokens import Document, TokenId, TokenSet, token_set_from_ids


@dataclass(frozen=True)
class DocStats:
    doc_index: int
    input_size: int  # distinct input tokens
    output_len: int
    copied: int  # output occurrences whose id is in the input set
    copied_types: int  # distinct output ids found in the input set
    output_types: int

    @property
    def overlap(self) -> float | None:
        return self.copied / self.output_len if self.output_len else None

    @property
    def type_overlap(self) -> float | None:
        return self.copied_types / self.output_types if self.output_types else None


@dataclass
class ProfiledCorpus:
    vocab_size: int
    M: int = 0
    df: Counter = field(default_factory=Counter)
    input_union: set = field(default_factory=set)
    output_union: set = field(default_factory=set)
    # union over documents of O_i \ I_i; used by the per-example input filter
    novel_output_union: set = field(default_factory=set)
    per_doc: list[DocStats] = field(default_factory=list)

    def add(self, doc: Document) -> None:
        doc.validate(self.vocab_size)
        inp = set(doc.input_ids)
        out = set(doc.output_ids)
        self.M += 1
        self.df.update(out)
        self.input_union |= inp
        self.output_union |= out
        self.novel_output_union |= out - inp
        self.per_doc.append(DocStats(
            doc_index=doc.doc_index,
            input_size=len(inp),
            output_len=len(doc.output_ids),
            copied=sum(1 for t in doc.output_ids if t in inp),
            copied_types=len(out & inp),
            output_types=len(out),
        ))

    def merge(self, other: ProfiledCorpus) -> ProfiledCorpus:
        if other.vocab_size != self.vocab_size:
            raise DataError("cannot merge profiles over different vocabularies")
        return ProfiledCorpus(
            vocab_size=self.vocab_size,
            M=self.M + other.M,
            df=self.df + other.df,
            input_union=self.input_union | other.input_union,
            output_union=self.output_union | other.output_union,
            novel_output_union=self.novel_output_union | other.novel_output_union,
            per_doc=sorted(self.per_doc + other.per_doc, key=lambda s: s.doc_index),
        )

    @property
    def input_set(self) -> TokenSet:
        return TokenSet(frozenset(self.input_union), self.vocab_size)

    @property
    def output_set(self) -> TokenSet:
        return TokenSet(frozenset(self.output_union), self.vocab_size)

    @property
    def novel_output_set(self) -> TokenSet:
        return TokenSet(frozenset(self.novel_output_union), self.vocab_size)

    @property
    def per_doc_input_sizes(self) -> list[int]:
        return [s.input_size for s in self.per_doc]

    @property
    def per_doc_overlap(self) -> list[float]:
        """Occurrence-level overlap per document; documents with empty outputs are skipped."""
        return [s.overlap for s in self.per_doc if s.output_len]

    def to_json(self) -> dict:
        return {
            "M": self.M,
            "vocab_size": self.vocab_size,
            "df": {str(k): self.df[k] for k in sorted(self.df)},
            "input_union": sorted(self.input_union),
            "output_union": sorted(self.output_union),
            "novel_output_union": sorted(self.novel_output_union),
            "per_doc": [
                [s.doc_index, s.input_size, s.output_len, s.copied, s.copied_types, s.output_types]
                for s in self.per_doc
            ],
            "stats": locality_report(self).to_json() if self.M else {},
        }

    @classmethod
    def from_json(cls, data: dict, path="<profile>") -> ProfiledCorpus:
        try:
            return cls(
                vocab_size=int(data["vocab_size"]),
                M=int(data["M"]),
                df=Counter({int(k): int(v) for k, v in data["df"].items()}),
                input_union=set(map(int, data["input_union"])),
                output_union=set(map(int, data["output_union"])),
                novel_output_union=set(map(int, data.get("novel_output_union", data["output_union"]))),
                per_doc=[DocStats(*map(int, row)) for row in data.get("per_doc", [])],
            )
        except (KeyError, TypeError, ValueError) as e:
            raise ParseError(f"malformed profile: {e!r}", path) from None


def profile(docs: Iterable[Document], vocab_size: int) -> ProfiledCorpus:
    p = ProfiledCorpus(vocab_size)
    for doc in docs:
        p.add(doc)
    return p


def profile_sharded(docs: Iterable[Document], vocab_size: int, shards: int = 4) -> ProfiledCorpus:
    """Profile with documents dealt round-robin across worker shards, then merged."""
    docs = list(docs)
    parts = [docs[i::shards] for i in range(shards)]
    with ThreadPoolExecutor(max_workers=shards) as ex:
        partials = list(ex.map(lambda part: profile(part, vocab_size), parts))
    result = ProfiledCorpus(vocab_size)
    for part in partials:
        result = result.merge(part)
    return result


def overlap_ratio(doc: Document) -> float:
    if not doc.output_ids:
        raise DataError(f"document {doc.doc_index}: empty output, overlap ratio undefined")
    inp = token_set_from_ids(doc.input_ids)
    return sum(1 for t in doc.output_ids if t in inp) / len(doc.output_ids)


@dataclass(frozen=True)
class OverlapStats:
    M: int
    mean_overlap: float
    mean_type_overlap: float
    mean_input_size: float
    union_input_size: int
    union_output_size: int
    locality_ratio: float

    def to_json(self) -> dict:
        return dict(self.__dict__)


def locality_report(p: ProfiledCorpus) -> OverlapStats:
    if p.M == 0:
        raise DataError("empty corpus: locality statistics need at least one document")
    ov = [s.overlap for s in p.per_doc if s.output_len]
    tov = [s.type_overlap for s in p.per_doc if s.output_types]
    mean_in = Fraction(sum(s.input_size for s in p.per_doc), p.M)
    union = len(p.input_union)
    ratio = Fraction(union) / mean_in if mean_in else Fraction(1)
    return OverlapStats(
        M=p.M,
        # exact means so the result does not depend on document order
        mean_overlap=float(sum(map(Fraction, ov)) / len(ov)) if ov else 0.0,
        mean_type_overlap=float(sum(map(Fraction, tov)) / len(tov)) if tov else 0.0,
        mean_input_size=float(mean_in),
        union_input_size=union,
        union_output_size=len(p.output_union),
        locality_ratio=float(ratio),
    )


def iter_jsonl_documents(path, tokenizer=None) -> Iterator[Document]:
    """Read a corpus JSONL file of text pairs or pre-tokenized id pairs.

    Text records need ``tokenizer``; mixing the two record kinds is rejected.
    """
    kind = None
    index = 0
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            loc = f"{path}:{lineno}"
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as e:
                raise ParseError(e.msg, f"{loc}:{e.colno}") from None
            if not isinstance(rec, dict):
                raise ParseError("each line must be a JSON object", loc)
            if "input_ids" in rec or "output_ids" in rec:
                this = "ids"
            elif "input" in rec or "output" in rec:
                this = "text"
            else:
                raise ParseError("record needs input/output or input_ids/output_ids", loc)
            if kind is None:
                kind = this
            elif kind != this:
                raise ParseError("mixed text and pre-tokenized records in one corpus", loc)
            if this == "ids":
                ids_in, ids_out = rec.get("input_ids", []), rec.get("output_ids", [])
                if not all(isinstance(x, int) and not isinstance(x, bool) for x in (*ids_in, *ids_out)):
                    raise ParseError("ids must be integers", loc)
                yield Document(ids_in, ids_out, index)
            else:
                if tokenizer is None:
                    raise ParseError("text corpus requires a tokenizer", loc)
                text_in, text_out = rec.get("input", ""), rec.get("output", "")
                if not isinstance(text_in, str) or not isinstance(text_out, str):
                    raise ParseError("input/output must be strings", loc)
                yield Document(tokenizer.encode(text_in, index), tokenizer.encode(text_out, index), index)
            index += 1


def load_profile(path) -> ProfiledCorpus:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise ParseError(e.msg, f"{path}:{e.lineno}:{e.colno}") from None
    return ProfiledCorpus.from_json(data, str(path))
