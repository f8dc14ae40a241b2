import random
from decimal import Decimal

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import D, E, random_corpus
from hybridvocab.errors import ConfigError, DataError
from hybridvocab.profiler import profile
from hybridvocab.static import (
    KEPT,
    REMOVED_INPUT,
    REMOVED_TOLERANCE,
    FilterConfig,
    StaticTaskVocab,
    build_static,
    input_aware_filter,
    language_filter,
    tolerance_filter,
)
from hybridvocab.tokenizer import byte_level_tokenizer
from hybridvocab.tokens import Document, TokenSet
from hybridvocab.unicode_script import ALL_BLOCKS

TAU_GRID = [0, 0.01, 0.02, 0.05, 0.1, 0.5, 1]


def ts(*xs, n=8):
    return TokenSet(frozenset(xs), n)


def brute_tolerance(candidates, df, m, tau, keep=frozenset()):
    """Oracle: try every ascending-by-(df, id) prefix, keep the longest within tau*M."""
    order = sorted((v for v in candidates if v not in keep), key=lambda v: (df.get(v, 0), v))
    budget = Decimal(repr(float(tau))) * m
    best = 0
    for k in range(len(order) + 1):
        if sum(df.get(v, 0) for v in order[:k]) <= budget:
            best = k
    pruned = set(order[:best])
    return set(candidates) - pruned, sum(df.get(v, 0) for v in pruned)


def impacted_docs(docs, pruned):
    return sum(1 for d in docs if set(d.output_ids) & set(pruned))


# -- examples -----------------------------------------------------------------

def test_input_aware_examples(fixture_docs):
    p = profile(fixture_docs, 8)
    assert input_aware_filter(p.output_set, p.input_set).sorted() == [D, E]
    assert input_aware_filter(ts(1, 2), ts()).sorted() == [1, 2]
    assert input_aware_filter(ts(1, 2), ts(1, 2, 3)).sorted() == []


def test_tolerance_examples():
    df = {D: 1, E: 1}
    assert tolerance_filter(ts(D, E), df, 3, 0.01) == (ts(D, E), 0)
    assert tolerance_filter(ts(D, E), df, 3, 0.4) == (ts(E), 1)
    assert tolerance_filter(ts(D, E), df, 3, 0) == (ts(D, E), 0)
    with pytest.raises(DataError):
        tolerance_filter(ts(D), df, 0, 0.1)


def test_tolerance_respects_always_keep():
    kept, s = tolerance_filter(ts(1, 2, 3), {1: 1, 2: 1, 3: 5}, 10, 1.0, always_keep=frozenset({1}))
    assert kept == ts(1) and s == 6


def test_tolerance_decimal_reading_of_tau():
    # 0.3 * 10 is 3 in decimal but 2.9999999999999996 in binary floating point
    kept, s = tolerance_filter(ts(1, 2, 3), {1: 1, 2: 2, 3: 4}, 10, 0.3)
    assert kept == ts(3) and s == 3


def test_tau_out_of_range():
    with pytest.raises(ConfigError):
        FilterConfig(tau=1.5)
    with pytest.raises(ConfigError):
        FilterConfig(tau=-0.1)


def test_build_static_fixture(fixture_docs, golden):
    p = profile(fixture_docs, 8)
    for tau, want in golden["static"].items():
        sv = build_static(p, FilterConfig(tau=float(tau)))
        assert sv.members.sorted() == want["members"], tau
        assert list(sv.stage_sizes) == want["stage_sizes"], tau
        assert sv.pruned_df_sum == want["pruned_df_sum"], tau


def test_provenance(fixture_docs):
    sv = build_static(profile(fixture_docs, 8), FilterConfig(tau=0.4))
    assert sv.provenance == {1: REMOVED_INPUT, 2: REMOVED_INPUT, D: REMOVED_TOLERANCE, E: KEPT}
    assert sv.pruned.sorted() == [D]


def test_extraction_corpus_keeps_only_always_keep():
    docs = [Document([1, 2, 3, 4], [2, 3], 0), Document([4, 5, 6], [6, 4, 4], 1)]
    sv = build_static(profile(docs, 10), FilterConfig(tau=0.01, always_keep=frozenset({0})))
    assert sv.members.sorted() == [0]


def test_static_json_roundtrip(fixture_docs):
    sv = build_static(profile(fixture_docs, 8), FilterConfig(tau=0.4))
    again = StaticTaskVocab.from_json(sv.to_json())
    assert again == sv


def test_per_example_input_filter(fixture_docs):
    # O_i \ I_i: d1 -> {c}, d2 -> {d}, d3 -> {c, e}
    sv = build_static(profile(fixture_docs, 8), FilterConfig(tau=0.01, input_filter="per_example"))
    assert sv.members.sorted() == [2, D, E]


# -- language filter ------------------------------------------------------------

@pytest.fixture(scope="module")
def mixed_tok():
    return byte_level_tokenizer([(b"\xe4", b"\xb8"), (b"\xe4\xb8", b"\xad"), ("h", "i")])


def _one(tok, s):
    (t,) = tok.encode(s)
    return t


def test_language_filter(mixed_tok):
    zh, hi, bang, frag = _one(mixed_tok, "中"), _one(mixed_tok, "hi"), _one(mixed_tok, "!"), 0x80
    cands = TokenSet(frozenset({zh, hi, bang, frag}), mixed_tok.size)
    latin = FilterConfig(allowed_blocks=frozenset({"Basic Latin"}))
    assert language_filter(cands, latin, mixed_tok).members == {hi, bang, frag}
    no_frag = FilterConfig(allowed_blocks=frozenset({"Basic Latin"}), keep_byte_fragments=False)
    assert language_filter(cands, no_frag, mixed_tok).members == {hi, bang}
    keep_zh = FilterConfig(allowed_blocks=frozenset({"Basic Latin"}), always_keep=frozenset({zh}))
    assert zh in language_filter(cands, keep_zh, mixed_tok)
    everything = FilterConfig(allowed_blocks=frozenset(ALL_BLOCKS))
    assert language_filter(cands, everything, mixed_tok) == cands


def test_unknown_block_is_config_error():
    with pytest.raises(ConfigError, match="valid names"):
        FilterConfig(allowed_blocks=frozenset({"Elvish"}))


def test_language_filter_without_tokenizer():
    with pytest.raises(ConfigError):
        language_filter(ts(1), FilterConfig(allowed_blocks=frozenset({"Basic Latin"})), None)


# -- properties -----------------------------------------------------------------

@settings(max_examples=200, deadline=None)
@given(st.randoms(use_true_random=False), st.floats(0, 1))
def test_tolerance_matches_oracle(rnd, tau):
    n = rnd.randint(1, 60)
    m = rnd.randint(1, 50)
    df = {v: rnd.randint(0, m) for v in range(n)}
    cands = TokenSet(frozenset(v for v in range(n) if rnd.random() < 0.7), n)
    kept, s = tolerance_filter(cands, df, m, tau)
    want_kept, want_sum = brute_tolerance(cands.members, df, m, tau)
    assert kept.members == want_kept and s == want_sum


@pytest.mark.parametrize("seed", range(30))
def test_guarantee_and_monotonicity(seed):
    rng = random.Random(seed)
    n, docs = random_corpus(rng)
    p = profile(docs, n)
    prev = None
    for tau in TAU_GRID:
        sv = build_static(p, FilterConfig(tau=tau))
        v, v1, v2, t = sv.stage_sizes
        assert v >= v1 >= v2 >= t
        hit = impacted_docs(docs, sv.pruned.members)
        assert hit <= sv.pruned_df_sum <= Decimal(repr(float(tau))) * p.M
        if tau == 0:
            assert t == v2
        if prev is not None:
            assert sv.members.issubset(prev.members)
        prev = sv


def test_determinism():
    n, docs = random_corpus(random.Random(11))
    a = build_static(profile(docs, n), FilterConfig(tau=0.05))
    b = build_static(profile(list(docs), n), FilterConfig(tau=0.05))
    assert a.to_json() == b.to_json()
