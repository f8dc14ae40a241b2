import json
import random
from pathlib import Path

import pytest

from hybridvocab.profiler import iter_jsonl_documents
from hybridvocab.tokenizer import load_tokenizer
from hybridvocab.tokens import Document

HERE = Path(__file__).parent
FIXTURES = HERE / "fixtures"
GOLDEN = HERE / "golden"

A, B, C, D, E = range(5)


@pytest.fixture
def toy_tokenizer():
    return load_tokenizer(FIXTURES / "toy_tokenizer.json")


@pytest.fixture
def fixture_docs():
    return list(iter_jsonl_documents(FIXTURES / "corpus_ids.jsonl"))


@pytest.fixture
def golden():
    return json.loads((GOLDEN / "fixture.json").read_text())


def random_corpus(rng: random.Random, max_docs=50, max_vocab=64, p_in=0.3, p_out=0.2):
    """Random pre-tokenized corpus; outputs lean on inputs so all filter stages see work."""
    n = rng.randint(2, max_vocab)
    m = rng.randint(1, max_docs)
    docs = []
    for i in range(m):
        inp = [t for t in range(n) if rng.random() < p_in]
        out = [t for t in range(n) if rng.random() < p_out]
        out += rng.sample(inp, k=min(len(inp), rng.randint(0, 3)))
        rng.shuffle(out)
        docs.append(Document(inp, out, i))
    return n, docs


# one PASS/FAIL line per acceptance criterion, printed after the run
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
