"""Shared fixtures: the two bank statement templates and their test document."""

import os
from typing import Iterable, Tuple

import pytest

from cm2.config import ClassifierConfig, Config
from cm2.ingest import KeywordSpec
from cm2.model import Coord, Document, Page, WordBox
from cm2.registry import build_matrix

PAGE_WIDTH = 2480
PAGE_HEIGHT = 3500

# (text, top, left, width)
STATEMENT_A_WORDS = [
    ("Account", 254, 1231, 120), ("No.", 254, 1362, 40), ("123456789", 254, 1440, 180),
    ("Account", 261, 1231, 120), ("Holder", 261, 1362, 90), ("John", 261, 1480, 70), ("Smith", 261, 1560, 90),
    ("Account", 269, 1231, 120), ("Type", 269, 1362, 70), ("Savings", 269, 1460, 110),
]

STATEMENT_B_WORDS = [
    ("Account", 100, 359, 120), ("Name", 100, 490, 70), ("Jane", 100, 590, 70), ("Doe", 100, 670, 50),
    ("Account", 1123, 231, 120), ("No.", 1123, 362, 40), ("987654", 1123, 440, 110),
]

TEST_WORDS = [
    ("Account", 101, 360, 120), ("Name", 101, 491, 70), ("Mary", 101, 590, 70), ("Major", 101, 670, 80),
    ("Account", 1120, 230, 120), ("No.", 1120, 361, 40), ("555000111", 1120, 440, 160),
]

KEYWORDS_A_CSV = b"Account No.,123456789\nAccount Holder,John Smith\nAccount Type,Savings\n"
KEYWORDS_B_CSV = b"Account No.,987654\nAccount Name,Jane Doe\n"

GOLDEN_REGISTRY = (
    "#cm2-registry v1\n"
    "Statement A,account no.,254,1231\n"
    "Statement A,account holder,261,1231\n"
    "Statement A,account type,269,1231\n"
    "Statement B,account no.,1123,231\n"
    "Statement B,account name,100,359\n"
)


def make_doc(doc_id: str, words: Iterable[Tuple[str, int, int, int]],
             width: int = PAGE_WIDTH, height: int = PAGE_HEIGHT) -> Document:
    """Single-page document from (text, top, left, width) tuples."""
    boxes = tuple(WordBox(text=t, coord=Coord(top, left), width=w, height=28) for t, top, left, w in words)
    return Document(id=doc_id, pages=(Page(index=1, width=width, height=height, words=boxes),))


@pytest.fixture(autouse=True)
def clean_env(monkeypatch):
    """Keep CM2_* variables from the environment (or a loaded .env) out of tests."""
    for name in Config.ENV_KEYS:
        monkeypatch.delenv(name, raising=False)
    yield
    for name in Config.ENV_KEYS:
        os.environ.pop(name, None)


@pytest.fixture
def cfg():
    return ClassifierConfig()


@pytest.fixture
def statement_a():
    return make_doc("statement-a", STATEMENT_A_WORDS)


@pytest.fixture
def statement_b():
    return make_doc("statement-b", STATEMENT_B_WORDS)


@pytest.fixture
def test_doc():
    return make_doc("test-doc", TEST_WORDS)


@pytest.fixture
def keywords_a():
    return [
        KeywordSpec("Statement A", "account no.", "123456789"),
        KeywordSpec("Statement A", "account holder", "John Smith"),
        KeywordSpec("Statement A", "account type", "Savings"),
    ]


@pytest.fixture
def keywords_b():
    return [
        KeywordSpec("Statement B", "account no.", "987654"),
        KeywordSpec("Statement B", "account name", "Jane Doe"),
    ]


@pytest.fixture
def golden_matrix(statement_a, statement_b, keywords_a, keywords_b, cfg):
    return build_matrix([(statement_a, keywords_a), (statement_b, keywords_b)], cfg)
