"""Domain types shared by every cm2 module.

Coordinates are integer pixels at source resolution, origin in the top-left
corner of the page. ``top`` grows downwards and ``left`` grows rightwards;
no DPI rescaling is ever applied.
"""

import unicodedata
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, Tuple

from .errors import InputError

INT32_MAX = 2**31 - 1


def normalize_text(raw: str) -> str:
    """Canonical form used for every keyword/word comparison.

    NFC composition, case folding, trimmed and with internal whitespace runs
    collapsed to one space. Punctuation is kept ("Account No." keeps its dot).
    """
    folded = unicodedata.normalize("NFD", raw).casefold()
    return " ".join(unicodedata.normalize("NFC", folded).split())


@dataclass(frozen=True, order=True)
class Coord:
    """Top-left position of a token: ``top`` is the vertical offset, ``left`` the horizontal one."""
    top: int
    left: int

    def __post_init__(self):
        for name in ("top", "left"):
            value = getattr(self, name)
            if not isinstance(value, int) or isinstance(value, bool):
                raise InputError(f"Coord.{name} must be an integer, got {value!r}")
            if not 0 <= value <= INT32_MAX:
                raise InputError(f"Coord.{name} out of range: {value}")


def manhattan(a: Coord, b: Coord) -> int:
    """|a.top - b.top| + |a.left - b.left|."""
    return abs(a.top - b.top) + abs(a.left - b.left)


@dataclass(frozen=True)
class WordBox:
    """One OCR word and its position on the page."""
    text: str
    coord: Coord
    width: int = 0
    height: int = 0
    norm: str = field(init=False, compare=False)

    def __post_init__(self):
        if self.width < 0 or self.height < 0:
            raise InputError(
                f"WordBox dimensions must be non-negative: width={self.width}, height={self.height}"
            )
        object.__setattr__(self, "norm", normalize_text(self.text))

    @property
    def right(self) -> int:
        return self.coord.left + self.width


@dataclass(frozen=True)
class Page:
    """A page of words in file order."""
    index: int
    width: int
    height: int
    words: Tuple[WordBox, ...] = ()

    def __post_init__(self):
        if self.index < 1:
            raise InputError(f"Page index must be >= 1, got {self.index}")
        if self.width <= 0 or self.height <= 0:
            raise InputError(f"Page {self.index} must have positive dimensions: {self.width}x{self.height}")
        object.__setattr__(self, "words", tuple(self.words))
        for word in self.words:
            if not self.contains(word.coord):
                raise InputError(f"Word {word.text!r} at {word.coord} lies outside page {self.index}")

    def contains(self, coord: Coord) -> bool:
        return coord.top <= self.height and coord.left <= self.width

    @cached_property
    def token_index(self) -> Dict[str, Tuple[int, ...]]:
        """Positions in ``words`` of every normalized token."""
        index: Dict[str, list] = {}
        for position, word in enumerate(self.words):
            index.setdefault(word.norm, []).append(position)
        return {norm: tuple(positions) for norm, positions in index.items()}


@dataclass(frozen=True)
class Document:
    """A parsed OCR document: an id plus its pages."""
    id: str
    pages: Tuple[Page, ...]

    def __post_init__(self):
        object.__setattr__(self, "pages", tuple(self.pages))
        if not self.pages:
            raise InputError(f"Document {self.id!r} has no pages")
        for expected, page in enumerate(self.pages, start=1):
            if page.index != expected:
                raise InputError(
                    f"Document {self.id!r}: page indices must be consecutive from 1, "
                    f"found {page.index} at position {expected}"
                )

    def page(self, index: int) -> Page:
        """Return the 1-based page ``index``."""
        if not 1 <= index <= len(self.pages):
            raise InputError(f"Document {self.id!r} has {len(self.pages)} page(s), no page {index}")
        return self.pages[index - 1]

    @property
    def word_count(self) -> int:
        return sum(len(page.words) for page in self.pages)
