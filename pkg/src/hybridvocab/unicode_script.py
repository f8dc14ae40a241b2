"""Unicode block lookup and script classification of token surfaces."""
from __future__ import annotations

import bisect
import re
import unicodedata
from collections import Counter
from dataclasses import dataclass

from ._blocks import BLOCK_NAMES, BLOCK_STARTS, UNICODE_VERSION
from .errors import ConfigError

NO_BLOCK = "No_Block"

__all__ = [
    "ALL_BLOCKS",
    "BYTE_FRAGMENT",
    "NEUTRAL",
    "ScriptClass",
    "UNICODE_VERSION",
    "block_of",
    "classify_bytes",
    "resolve_blocks",
]

ALL_BLOCKS = tuple(dict.fromkeys(n for n in BLOCK_NAMES if n != NO_BLOCK)) + (NO_BLOCK,)


def _loose(name: str) -> str:
    # UAX44-LM3: ignore case, whitespace, underscores and hyphens
    return re.sub(r"[\s_\-]", "", name).lower()


_LOOSE_NAMES = {_loose(n): n for n in ALL_BLOCKS}


def block_of(char: str) -> str:
    i = bisect.bisect_right(BLOCK_STARTS, ord(char)) - 1
    return BLOCK_NAMES[i]


def resolve_blocks(names) -> frozenset[str]:
    """Map user-supplied block names to canonical ones (loose matching)."""
    out = set()
    unknown = []
    for name in names:
        canon = _LOOSE_NAMES.get(_loose(name))
        if canon is None:
            unknown.append(name)
        else:
            out.add(canon)
    if unknown:
        raise ConfigError(
            f"unknown Unicode block name(s) {unknown}; valid names are: " + ", ".join(ALL_BLOCKS)
        )
    return frozenset(out)


@dataclass(frozen=True)
class ScriptClass:
    kind: str  # "neutral" | "block" | "byte_fragment"
    block: str | None = None

    def __str__(self):
        if self.kind == "block":
            return f"Block({self.block})"
        return {"neutral": "AllowedNeutral", "byte_fragment": "ByteFragment"}[self.kind]


NEUTRAL = ScriptClass("neutral")
BYTE_FRAGMENT = ScriptClass("byte_fragment")


def Block(name: str) -> ScriptClass:
    return ScriptClass("block", name)


def _is_alphabetic(char: str) -> bool:
    # letters and combining marks carry script; everything else is neutral
    return unicodedata.category(char)[0] in "LM"


def classify_text(text: str) -> ScriptClass:
    counts = Counter(block_of(c) for c in text if _is_alphabetic(c))
    if not counts:
        return NEUTRAL
    ranked = counts.most_common()
    if len(ranked) > 1 and ranked[0][1] == ranked[1][1]:
        return BYTE_FRAGMENT
    return Block(ranked[0][0])


def classify_bytes(surface: bytes) -> ScriptClass:
    try:
        text = surface.decode("utf-8")
    except UnicodeDecodeError:
        return BYTE_FRAGMENT
    return classify_text(text)
