"""Write tests/fixtures/byte_level_tokenizer.json (hand-picked merges, no training)."""
from pathlib import Path

from hybridvocab.tokenizer import byte_level_tokenizer

MERGES = [
    ("t", "h"), ("th", "e"), (" ", "the"), ("i", "n"), ("a", "n"), ("an", "d"), (" ", "a"), ("e", "r"),
    ("o", "n"), ("r", "e"), (" ", "s"), ("e", "n"), ("in", "g"), (" ", "t"), ("o", "u"), ("e", "s"),
    (" ", "w"), ("a", "t"), (" ", "c"), ("i", "s"), (" ", "is"), ("o", "r"), (" ", "o"), (" ", "b"),
    (" ", "f"), (" ", "m"), ("e", "d"),
    # 中 and 文 assembled from their UTF-8 bytes
    (b"\xe4", b"\xb8"), (b"\xe4\xb8", b"\xad"), (b"\xe6", b"\x96"), (b"\xe6\x96", b"\x87"), ("中", "文"),
    (b"\xc3", b"\xa9"), (b"\xf0", b"\x9f"), ("\n", "\n"), (" ", " "),
]

if __name__ == "__main__":
    out = Path(__file__).resolve().parents[1] / "tests" / "fixtures" / "byte_level_tokenizer.json"
    tok = byte_level_tokenizer(MERGES, special_tokens=["<|endoftext|>", "<pad>"])
    tok.save(out)
    print(f"wrote {out} ({tok.size} tokens)")
