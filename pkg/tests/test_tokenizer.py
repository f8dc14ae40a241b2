import json
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hybridvocab.errors import EncodingError, IntegrityError, ParseError
from hybridvocab.tokenizer import (
    byte_level_tokenizer,
    bytes_to_unicode,
    load_tokenizer,
    tokenizer_from_json,
)
from hybridvocab.unicode_script import BYTE_FRAGMENT, NEUTRAL, Block, classify_text, resolve_blocks

TRAINED_MERGES = [("t", "h"), ("th", "e"), (" ", "the"), ("i", "n"), ("a", "n"), ("an", "d"),
                  (b"\xe4", b"\xb8"), (b"\xe4\xb8", b"\xad"), (b"\xe6", b"\x96"), (b"\xe6\x96", b"\x87"),
                  ("中", "文"), ("e", "r"), ("o", "n"), (" ", "a")]


@pytest.fixture(scope="module")
def bl_tok():
    return byte_level_tokenizer(TRAINED_MERGES, special_tokens=["<|endoftext|>"])


def test_load_fixture(toy_tokenizer):
    assert toy_tokenizer.size == 8
    assert [m.rank for m in toy_tokenizer.merges] == [0, 1]
    assert not toy_tokenizer.byte_level


def test_encode_examples(toy_tokenizer):
    t = toy_tokenizer
    assert t.encode("") == []
    assert t.encode("ab") == [t.token_to_id("ab")]
    assert t.encode("aca") == [0, 2, 0]
    assert t.decode([0, 1]) == "ab"
    assert t.decode([]) == ""


def test_empty_merges_gives_single_symbols():
    t = tokenizer_from_json({"vocab": {"a": 0, "b": 1, "ab": 2}, "merges": []})
    assert t.encode("abab") == [0, 1, 0, 1]


def test_unrepresentable_character(toy_tokenizer):
    with pytest.raises(EncodingError, match="'z'"):
        toy_tokenizer.encode("azb")


def test_merge_integrity_error(tmp_path):
    bad = {"vocab": {"x": 0, "y": 1}, "merges": ["x y"]}
    with pytest.raises(IntegrityError, match="merge #0 'x' 'y'"):
        tokenizer_from_json(bad)


def test_malformed_json_reports_location(tmp_path):
    p = tmp_path / "t.json"
    p.write_text('{"vocab": {"a": 0,,}')
    with pytest.raises(ParseError) as ei:
        load_tokenizer(p)
    assert f"{p}:1:" in str(ei.value)


def test_id_gap_rejected():
    with pytest.raises(IntegrityError):
        tokenizer_from_json({"vocab": {"a": 0, "b": 2}, "merges": []})


def test_save_load_roundtrip(bl_tok, tmp_path):
    p = tmp_path / "bl.json"
    bl_tok.save(p)
    again = load_tokenizer(p)
    s = "the band and the 中文 writer"
    assert again.encode(s) == bl_tok.encode(s)
    assert again.special_tokens == bl_tok.special_tokens


def test_byte_map_is_bijection():
    m = bytes_to_unicode()
    assert sorted(m) == list(range(256))
    assert len(set(m.values())) == 256
    assert all(c.isprintable() and not c.isspace() for c in m.values())


def test_byte_level_merges_apply(bl_tok):
    ids = bl_tok.encode(" the")
    assert len(ids) == 1
    assert bl_tok.table[ids[0]].surface == b" the"


@settings(max_examples=300)
@given(st.text(max_size=40))
def test_roundtrip(bl_tok, s):
    assert bl_tok.decode(bl_tok.encode(s)) == s


@given(st.text(alphabet="thean dier中文", max_size=30))
def test_encode_deterministic(bl_tok, s):
    assert bl_tok.encode(s) == bl_tok.encode(s)


@given(st.text(alphabet="thean dieron中文", max_size=30))
def test_merge_ranks_applied_in_order(bl_tok, s):
    # merges built only from earlier tokens: applied ranks never go backwards
    trace = []
    bl_tok._bpe(bl_tok._symbols(s), trace)
    assert trace == sorted(trace)


def _brute_bpe(symbols, merges):
    # oracle: repeatedly apply the lowest-rank merge present, leftmost first
    ranks = {m: r for r, m in enumerate(merges)}
    symbols = list(symbols)
    while True:
        present = [ranks[p] for p in zip(symbols, symbols[1:]) if p in ranks]
        if not present:
            return symbols
        left, right = merges[min(present)]
        i = 0
        while i < len(symbols) - 1:
            if symbols[i] == left and symbols[i + 1] == right:
                symbols[i:i + 2] = [left + right]
            i += 1


@given(st.text(alphabet="thean dieron", max_size=30))
def test_bpe_matches_brute_force(bl_tok, s):
    merges = [(m.left, m.right) for m in bl_tok.merges]
    sym = bl_tok._symbols(s)
    assert bl_tok._bpe(sym) == _brute_bpe(sym, merges)


def _id_of(tok, text):
    ids = tok.encode(text)
    assert len(ids) == 1, ids
    return ids[0]


def test_classify_script(bl_tok):
    assert bl_tok.classify_script(_id_of(bl_tok, " the")) == Block("Basic Latin")
    assert bl_tok.classify_script(_id_of(bl_tok, "中文")) == Block("CJK Unified Ideographs")
    assert bl_tok.classify_script(_id_of(bl_tok, " ")) == NEUTRAL
    assert bl_tok.classify_script(_id_of(bl_tok, "7")) == NEUTRAL
    # 0x80 is a UTF-8 continuation byte on its own
    assert bl_tok.classify_script(0x80) == BYTE_FRAGMENT
    # lead byte of 中
    assert bl_tok.classify_script("中".encode()[0]) == BYTE_FRAGMENT


def test_classify_text_mixing_rule():
    assert classify_text("中") == Block("CJK Unified Ideographs")
    assert classify_text("ab中") == Block("Basic Latin")
    assert classify_text("a中") == BYTE_FRAGMENT
    assert classify_text("!? 42") == NEUTRAL
    assert classify_text("é") == Block("Latin-1 Supplement")
    assert classify_text("Ж") == Block("Cyrillic")


def test_special_tokens_decode_literally(bl_tok):
    eot = bl_tok.token_to_id("<|endoftext|>")
    assert bl_tok.table[eot].is_special
    assert bl_tok.decode([*bl_tok.encode("hi"), eot]) == "hi<|endoftext|>"


def test_resolve_blocks_loose_matching():
    assert resolve_blocks(["basic_latin", "CJK unified ideographs"]) == {
        "Basic Latin", "CJK Unified Ideographs"}
    from hybridvocab.errors import ConfigError
    with pytest.raises(ConfigError, match="Basic Latin"):
        resolve_blocks(["Klingon"])


def test_random_strings_roundtrip_seeded(bl_tok):
    rng = random.Random(7)
    for _ in range(200):
        s = "".join(chr(rng.choice([rng.randint(32, 126), rng.randint(0x80, 0xD7FF),
                                     rng.randint(0xE000, 0x10FFFF)])) for _ in range(rng.randint(0, 12)))
        assert bl_tok.decode(bl_tok.encode(s)) == s


def test_tokenizer_json_format_fields(bl_tok):
    data = json.loads(json.dumps(bl_tok.to_json()))
    assert set(data) == {"vocab", "merges", "byte_level", "special_tokens"}
    assert data["byte_level"] is True
