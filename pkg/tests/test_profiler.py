import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import FIXTURES, random_corpus
from hybridvocab.errors import DataError, ParseError
from hybridvocab.profiler import (
    ProfiledCorpus,
    iter_jsonl_documents,
    locality_report,
    overlap_ratio,
    profile,
    profile_sharded,
)
from hybridvocab.tokens import Document


def test_fixture_profile(fixture_docs, golden):
    p = profile(fixture_docs, 8)
    assert p.M == golden["M"]
    assert {str(k): v for k, v in p.df.items()} == golden["df"]
    assert sorted(p.input_union) == golden["input_union"]
    assert sorted(p.output_union) == golden["output_union"]
    assert p.per_doc_input_sizes == [2, 2, 1]


def test_empty_stream():
    p = profile([], 8)
    assert p.M == 0 and not p.df and not p.input_union and not p.output_union
    with pytest.raises(DataError):
        locality_report(p)


def test_df_counts_documents_not_occurrences():
    p = profile([Document([0], [2, 2, 2], 0)], 4)
    assert p.df[2] == 1


def test_out_of_range_names_document():
    with pytest.raises(DataError, match="document 5"):
        profile([Document([0], [9], 5)], 4)


def test_overlap_ratio_examples(fixture_docs):
    assert overlap_ratio(fixture_docs[0]) == 0.5
    assert overlap_ratio(Document([1, 2, 3], [3, 1, 1], 0)) == 1.0
    assert overlap_ratio(Document([1], [2, 3], 0)) == 0.0
    with pytest.raises(DataError):
        overlap_ratio(Document([1], [], 0))


def test_overlap_counts_occurrences():
    doc = Document([1], [1, 1, 1, 2], 0)
    assert overlap_ratio(doc) == 0.75
    p = profile([doc], 4)
    assert p.per_doc[0].type_overlap == 0.5


def test_locality_report_fixture(fixture_docs):
    s = locality_report(profile(fixture_docs, 8))
    assert s.mean_input_size == pytest.approx(5 / 3, rel=0, abs=1e-15)
    assert s.union_input_size == 3
    assert s.locality_ratio == pytest.approx(1.8, abs=1e-15)


def test_locality_single_and_identical_docs():
    one = profile([Document([1, 1, 2], [3], 0)], 4)
    assert locality_report(one).locality_ratio == 1.0
    same = profile([Document([1, 2], [3], i) for i in range(5)], 4)
    assert locality_report(same).locality_ratio == 1.0


def _brute_df(docs, v):
    return len([d for d in docs if v in d.output_ids])


@pytest.mark.parametrize("seed", range(20))
def test_df_matches_brute_force(seed):
    rng = random.Random(seed)
    n, docs = random_corpus(rng, max_docs=200)
    p = profile(docs, n)
    for v in range(n):
        assert p.df.get(v, 0) == _brute_df(docs, v)
    expected_union = set()
    for d in docs:
        expected_union = expected_union | set(d.input_ids)
    assert p.input_union == expected_union
    assert all(0 < p.df[v] <= p.M for v in p.output_union)
    assert all(0 <= r <= 1 for r in p.per_doc_overlap)
    assert all(s <= len(d.input_ids) for s, d in zip(p.per_doc_input_sizes, docs))
    assert locality_report(p).locality_ratio >= 1 or not any(p.per_doc_input_sizes)


@pytest.mark.parametrize("seed", range(10))
@pytest.mark.parametrize("shards", [1, 2, 3, 7])
def test_sharded_profile_identical(seed, shards):
    n, docs = random_corpus(random.Random(seed))
    single = profile(docs, n)
    assert profile_sharded(docs, n, shards).to_json() == single.to_json()


@given(st.randoms(use_true_random=False))
def test_mean_overlap_permutation_invariant(rnd):
    n, docs = random_corpus(rnd, max_docs=20)
    shuffled = docs[:]
    rnd.shuffle(shuffled)
    a = locality_report(profile(docs, n))
    b = locality_report(profile(shuffled, n))
    assert a.mean_overlap == b.mean_overlap
    assert a.locality_ratio == b.locality_ratio


def test_merge_is_commutative_and_associative():
    n, docs = random_corpus(random.Random(3), max_docs=30)
    parts = [profile(docs[i::3], n) for i in range(3)]
    x, y, z = parts
    assert x.merge(y).to_json() == y.merge(x).to_json()
    assert x.merge(y).merge(z).to_json() == x.merge(y.merge(z)).to_json()


def test_json_roundtrip(fixture_docs):
    p = profile(fixture_docs, 8)
    again = ProfiledCorpus.from_json(p.to_json())
    assert again.to_json() == p.to_json()


def test_text_and_ids_corpora_agree(toy_tokenizer):
    a = profile(iter_jsonl_documents(FIXTURES / "corpus_ids.jsonl"), 8)
    b = profile(iter_jsonl_documents(FIXTURES / "corpus_text.jsonl", toy_tokenizer), 8)
    assert a.to_json() == b.to_json()


def test_mixed_corpus_rejected(tmp_path):
    p = tmp_path / "mixed.jsonl"
    p.write_text('{"input_ids": [0], "output_ids": [1]}\n{"input": "a", "output": "b"}\n')
    with pytest.raises(ParseError, match="mixed"):
        list(iter_jsonl_documents(p))


def test_bad_jsonl_line_location(tmp_path):
    p = tmp_path / "bad.jsonl"
    p.write_text('{"input_ids": [0], "output_ids": [1]}\n{oops\n')
    with pytest.raises(ParseError, match=":2:"):
        list(iter_jsonl_documents(p))
