"""Tests for the core domain types."""

import pytest
from hypothesis import given, strategies as st

from cm2.errors import InputError
from cm2.model import INT32_MAX, Coord, Document, Page, WordBox, manhattan, normalize_text

from tests.conftest import make_doc

coords = st.builds(Coord, st.integers(0, 10_000), st.integers(0, 10_000))


class TestNormalizeText:
    """Test keyword and word normalization."""

    def test_case_and_whitespace(self):
        assert normalize_text("  Account \t No.\n") == "account no."

    def test_punctuation_is_kept(self):
        assert normalize_text("Account No.") != normalize_text("Account No")

    def test_composed_and_decomposed_forms_match(self):
        assert normalize_text("Café") == normalize_text("Café") == "café"

    def test_casefold(self):
        assert normalize_text("STRASSE") == normalize_text("straße")

    @given(st.text(alphabet=st.sampled_from(list("AaZz\u00c0\u00e0\u00df\u1e9e\u0130\u0131\u00e9 .,-") + ["\u0301", "\u0308", "\t", "\n"])))
    def test_idempotent(self, raw):
        once = normalize_text(raw)
        assert normalize_text(once) == once


class TestCoord:
    """Test coordinates and the Manhattan distance."""

    def test_golden_distances(self):
        assert manhattan(Coord(1123, 231), Coord(1120, 230)) == 4
        assert manhattan(Coord(100, 359), Coord(101, 360)) == 2

    def test_rejects_negative(self):
        with pytest.raises(InputError):
            Coord(-1, 0)

    def test_rejects_out_of_range(self):
        Coord(INT32_MAX, 0)
        with pytest.raises(InputError):
            Coord(INT32_MAX + 1, 0)

    def test_rejects_non_integers(self):
        with pytest.raises(InputError):
            Coord(1.5, 2)
        with pytest.raises(InputError):
            Coord(True, 2)

    def test_reading_order(self):
        assert sorted([Coord(5, 1), Coord(1, 9), Coord(1, 2)]) == [Coord(1, 2), Coord(1, 9), Coord(5, 1)]

    @given(coords, coords)
    def test_symmetric(self, a, b):
        assert manhattan(a, b) == manhattan(b, a) >= 0

    @given(coords, coords)
    def test_zero_iff_equal(self, a, b):
        assert (manhattan(a, b) == 0) == (a == b)

    @given(coords, coords, coords)
    def test_triangle_inequality(self, a, b, c):
        assert manhattan(a, c) <= manhattan(a, b) + manhattan(b, c)

    @given(st.integers(1, 5000), st.integers(1, 5000), st.data())
    def test_bounded_by_page_size(self, width, height, data):
        in_page = st.builds(Coord, st.integers(0, height), st.integers(0, width))
        assert manhattan(data.draw(in_page), data.draw(in_page)) <= width + height


class TestDocument:
    """Test words, pages and documents."""

    def test_word_norm_and_right_edge(self):
        word = WordBox("No.", Coord(10, 100), width=40, height=28)
        assert word.norm == "no."
        assert word.right == 140

    def test_word_rejects_negative_size(self):
        with pytest.raises(InputError):
            WordBox("x", Coord(0, 0), width=-1)

    def test_word_outside_page(self):
        with pytest.raises(InputError):
            Page(1, 100, 100, (WordBox("x", Coord(101, 0)),))

    def test_word_on_page_edge_is_inside(self):
        page = Page(1, 100, 100, (WordBox("x", Coord(100, 100)),))
        assert len(page.words) == 1

    def test_token_index(self):
        doc = make_doc("d", [("Account", 0, 0, 10), ("No.", 0, 20, 10), ("ACCOUNT", 50, 0, 10)])
        assert doc.page(1).token_index == {"account": (0, 2), "no.": (1,)}

    def test_pages_must_be_consecutive(self):
        with pytest.raises(InputError):
            Document("d", (Page(2, 10, 10),))
        with pytest.raises(InputError):
            Document("d", ())

    def test_page_lookup(self, test_doc):
        assert test_doc.page(1).index == 1
        assert test_doc.word_count == 7
        with pytest.raises(InputError):
            test_doc.page(2)

    def test_equality_ignores_cached_index(self):
        a = make_doc("d", [("Account", 0, 0, 10)])
        b = make_doc("d", [("Account", 0, 0, 10)])
        a.page(1).token_index
        assert a == b
