"""BPE tokenizer: JSON loading, encoding, decoding and per-token script classes.

File format::

    {"vocab": {"<token>": id, ...},
     "merges": ["left right", ...],      # rank = position
     "byte_level": true,
     "special_tokens": ["<|endoftext|>"]}

When ``byte_level`` is set, token strings are written in the printable
byte-to-unicode alphabet used by byte-level BPE (space -> "Ġ", etc.).
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Sequence

from .errors import EncodingError, IntegrityError, ParseError
from .tokens import TokenId, TokenRecord, VocabularyTable
from .unicode_script import ScriptClass, classify_bytes


@lru_cache(maxsize=None)
def bytes_to_unicode() -> dict[int, str]:
    """The 256-entry byte -> printable codepoint bijection of byte-level BPE."""
    bs = (
        list(range(ord("!"), ord("~") + 1))
        + list(range(ord("¡"), ord("¬") + 1))
        + list(range(ord("®"), ord("ÿ") + 1))
    )
    cs = bs[:]
    n = 0
    for b in range(256):
        if b not in bs:
            bs.append(b)
            cs.append(256 + n)
            n += 1
    return dict(zip(bs, map(chr, cs)))


@lru_cache(maxsize=None)
def unicode_to_bytes() -> dict[str, int]:
    return {c: b for b, c in bytes_to_unicode().items()}


@dataclass(frozen=True)
class MergeRule:
    left: str
    right: str
    rank: int


class Tokenizer:
    def __init__(self, vocab: dict[str, int], merges: Sequence[tuple[str, str]], byte_level=False,
                 special_tokens: Sequence[str] = ()):
        self.byte_level = bool(byte_level)
        self.vocab = dict(vocab)
        ids = sorted(self.vocab.values())
        if ids != list(range(len(ids))):
            raise IntegrityError("vocab ids must be exactly 0..size-1 with no gaps or duplicates")
        self.id_to_token = [None] * len(ids)
        for tok, i in self.vocab.items():
            self.id_to_token[i] = tok

        missing_special = [s for s in special_tokens if s not in self.vocab]
        if missing_special:
            raise IntegrityError(f"special tokens not in vocab: {missing_special}")
        self.special_tokens = frozenset(self.vocab[s] for s in special_tokens)

        self.merges = []
        self.ranks = {}
        for rank, (left, right) in enumerate(merges):
            rule = f"merge #{rank} {left!r} {right!r}"
            for part in (left, right, left + right):
                if part not in self.vocab:
                    raise IntegrityError(f"{rule}: token {part!r} not in vocab")
            if (left, right) in self.ranks:
                raise IntegrityError(f"{rule}: duplicate merge")
            self.ranks[(left, right)] = rank
            self.merges.append(MergeRule(left, right, rank))

        records = []
        decoder = unicode_to_bytes()
        for i, tok in enumerate(self.id_to_token):
            special = i in self.special_tokens
            if self.byte_level and not special:
                try:
                    surface = bytes(decoder[c] for c in tok)
                except KeyError as e:
                    raise IntegrityError(
                        f"token {i} {tok!r} contains {e.args[0]!r}, outside the byte-level alphabet"
                    ) from None
            else:
                surface = tok.encode("utf-8")
            try:
                display = surface.decode("utf-8")
            except UnicodeDecodeError:
                display = None
            records.append(TokenRecord(i, surface, display, special))
        self.table = VocabularyTable(tuple(records), self.byte_level)

    @property
    def size(self) -> int:
        return self.table.size

    def token_to_id(self, token: str) -> TokenId:
        return self.vocab[token]

    def _symbols(self, text: str, doc_index=None) -> list[str]:
        if self.byte_level:
            enc = bytes_to_unicode()
            symbols = [enc[b] for b in text.encode("utf-8")]
        else:
            symbols = list(text)
        missing = [s for s in dict.fromkeys(symbols)
                   if s not in self.vocab or self.vocab[s] in self.special_tokens]
        if missing:
            if self.byte_level:
                missing = [bytes([unicode_to_bytes()[s]]).decode("latin-1") for s in missing]
            raise EncodingError(missing, doc_index)
        return symbols

    def _bpe(self, symbols: list[str], trace: list | None = None) -> list[str]:
        ranks = self.ranks
        while len(symbols) > 1:
            best = min(
                (ranks.get(pair, float("inf")), i)
                for i, pair in enumerate(zip(symbols, symbols[1:]))
            )
            rank = best[0]
            if rank == float("inf"):
                break
            left, right = self.merges[rank].left, self.merges[rank].right
            out = []
            i = 0
            while i < len(symbols):
                if i + 1 < len(symbols) and symbols[i] == left and symbols[i + 1] == right:
                    out.append(left + right)
                    if trace is not None:
                        trace.append(rank)
                    i += 2
                else:
                    out.append(symbols[i])
                    i += 1
            symbols = out
        return symbols

    def encode(self, text: str, doc_index=None) -> list[TokenId]:
        if not text:
            return []
        return [self.vocab[s] for s in self._bpe(self._symbols(text, doc_index))]

    def decode(self, ids: Sequence[TokenId]) -> str:
        data = b"".join(self.table[i].surface for i in ids)
        return data.decode("utf-8", errors="replace")

    def classify_script(self, token_id: TokenId) -> ScriptClass:
        return classify_bytes(self.table[token_id].surface)

    def to_json(self) -> dict:
        return {
            "vocab": self.vocab,
            "merges": [f"{m.left} {m.right}" for m in self.merges],
            "byte_level": self.byte_level,
            "special_tokens": [self.id_to_token[i] for i in sorted(self.special_tokens)],
        }

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_json(), ensure_ascii=False, indent=1), encoding="utf-8")


def _parse_merge(item, rank, path):
    if isinstance(item, (list, tuple)) and len(item) == 2 and all(isinstance(x, str) for x in item):
        return tuple(item)
    if isinstance(item, str):
        parts = item.split(" ")
        if len(parts) == 2 and all(parts):
            return parts[0], parts[1]
    raise ParseError(f"merge #{rank} {item!r} is not of the form 'left right'", f"{path}:merges[{rank}]")


def tokenizer_from_json(data: dict, path="<tokenizer>") -> Tokenizer:
    if not isinstance(data, dict):
        raise ParseError("top level must be a JSON object", path)
    vocab = data.get("vocab")
    if not isinstance(vocab, dict) or not all(
        isinstance(k, str) and isinstance(v, int) and not isinstance(v, bool) for k, v in vocab.items()
    ):
        raise ParseError("'vocab' must map strings to integer ids", f"{path}:vocab")
    merges = data.get("merges", [])
    if not isinstance(merges, list):
        raise ParseError("'merges' must be an array", f"{path}:merges")
    specials = data.get("special_tokens", [])
    if not isinstance(specials, list) or not all(isinstance(s, str) for s in specials):
        raise ParseError("'special_tokens' must be an array of strings", f"{path}:special_tokens")
    pairs = [_parse_merge(m, r, path) for r, m in enumerate(merges)]
    return Tokenizer(vocab, pairs, bool(data.get("byte_level", False)), specials)


def load_tokenizer(path) -> Tokenizer:
    text = Path(path).read_text(encoding="utf-8")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(e.msg, f"{path}:{e.lineno}:{e.colno}") from None
    return tokenizer_from_json(data, str(path))


def byte_level_tokenizer(merges: Sequence[tuple[str | bytes, str | bytes]] = (), special_tokens: Sequence[str] = ()) -> Tokenizer:
    """A byte-level tokenizer over the 256 byte symbols plus merged tokens.

    Merge operands are given as text or raw bytes and mapped into the byte alphabet.
    """
    enc = bytes_to_unicode()

    def m(s):
        raw = s if isinstance(s, bytes) else s.encode("utf-8")
        return "".join(enc[b] for b in raw)

    vocab = {enc[b]: b for b in range(256)}
    pairs = []
    for left, right in merges:
        pair = (m(left), m(right))
        pairs.append(pair)
        vocab.setdefault(pair[0] + pair[1], len(vocab))
    for s in special_tokens:
        vocab.setdefault(s, len(vocab))
    return Tokenizer(vocab, pairs, True, special_tokens)
