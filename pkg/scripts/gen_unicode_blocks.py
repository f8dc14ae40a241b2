"""Regenerate ``src/hybridvocab/_blocks.py`` from the UCD Blocks table.

The table shipped with fontTools is itself generated from ``Blocks.txt``;
we only use it at build time so the package carries no runtime dependency.

    python scripts/gen_unicode_blocks.py
"""
import inspect
import re
from pathlib import Path

from fontTools.unicodedata import Blocks

OUT = Path(__file__).resolve().parents[1] / "src" / "hybridvocab" / "_blocks.py"


def main():
    src = inspect.getsource(Blocks)
    m = re.search(r"# Blocks-([\d.]+)\.txt", src)
    version = m.group(1) if m else "unknown"
    lines = [
        "# Generated by scripts/gen_unicode_blocks.py -- do not edit.",
        f"# Source: Unicode Character Database Blocks-{version}.txt",
        "",
        f'UNICODE_VERSION = "{version}"',
        "",
        "# Sorted block start codepoints; BLOCK_NAMES[i] covers",
        "# [BLOCK_STARTS[i], BLOCK_STARTS[i + 1]).",
        "BLOCK_STARTS = (",
    ]
    lines += [f"    0x{start:04X}," for start in Blocks.RANGES]
    lines += [")", "", "BLOCK_NAMES = ("]
    lines += [f"    {name!r}," for name in Blocks.VALUES]
    lines += [")", ""]
    OUT.write_text("\n".join(lines), encoding="utf-8")
    print(f"wrote {OUT} ({len(Blocks.RANGES)} ranges, Unicode {version})")


if __name__ == "__main__":
    main()
