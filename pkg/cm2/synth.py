"""Seeded synthetic corpus of structured documents.

Each template places a handful of label keywords (followed by a value, like
``Account No. 061234-12345678``) on a 2480 x 3500 page. The template itself is
the single training sample of its class; test instances shift every keyword
by up to ``jitter`` pixels per axis, drop keywords at random and scatter
distractor words. The same keyword never sits closer than ``min_separation``
(Manhattan) to its position in any other template.

Layout on disk::

    <out>/<class_id>/template.xml
    <out>/<class_id>/keywords.csv
    <out>/<class_id>/test_001.xml ...
    <out>/manifest.csv            (file,true_class)
"""

import csv
import io
import logging
import random
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, NamedTuple, Sequence, Tuple, Union

from .errors import GenerationError, InputError
from .evaluate import LabeledDoc
from .ingest import (
    KeywordSpec,
    load_document,
    load_keywords,
    write_hocr,
    write_keywords_csv,
    write_words_xml,
)
from .model import Coord, Document, Page, WordBox, manhattan

logger = logging.getLogger(__name__)

# No keyword occurs inside another, and no token that starts a keyword appears
# later in any keyword, so adjacent blocks can never form a spurious match.
KEYWORD_POOL = (
    "account no.", "account name", "account holder", "account type", "account summary",
    "bsb", "branch", "iban", "page",
    "statement period", "statement no.", "opening balance", "closing balance", "closing date",
    "total credits", "total debits", "customer id", "interest rate", "credit limit",
    "available funds", "due date", "minimum payment", "transaction details", "sort code",
    "swift code", "issue date", "overdraft limit", "reference no.", "card number", "tax invoice",
)

DISTRACTOR_VOCABULARY = (
    "deposit", "withdrawal", "transfer", "fee", "atm", "pos", "visa", "salary", "rent",
    "groceries", "fuel", "dividend", "refund", "cash", "cheque", "online", "mobile", "wire",
    "direct", "debit", "pty", "ltd", "street", "road", "sydney", "melbourne", "london",
    "thank", "you", "banking", "with", "us", "enquiries", "call", "visit", "www", "bank",
)

CHAR_WIDTH = 20
WORD_HEIGHT = 28
WORD_SPACE = 12
VALUE_GAP = 24
ROW_SPACING = 60
MAX_ATTEMPTS = 5000

MANIFEST = "manifest.csv"
TEMPLATE_FILE = "template.xml"
KEYWORDS_FILE = "keywords.csv"
_SAFE_NAME = re.compile(r"[A-Za-z0-9_.-]+")


@dataclass(frozen=True)
class SynthSpec:
    """Generation parameters. Identical specs give byte-identical corpora."""
    n_templates: int = 53
    instances_per_template: int = 10
    keywords_per_template: Tuple[int, int] = (3, 6)
    page_width: int = 2480
    page_height: int = 3500
    jitter: int = 20
    drop_prob: float = 0.1
    distractor_words: int = 40
    min_separation: int = 500
    seed: int = 42
    keyword_distractors: bool = False

    def __post_init__(self):
        lo, hi = self.keywords_per_template
        if self.n_templates < 1 or self.instances_per_template < 1:
            raise InputError("n_templates and instances_per_template must be >= 1")
        if not 1 <= lo <= hi <= len(KEYWORD_POOL):
            raise InputError(f"keywords_per_template must satisfy 1 <= lo <= hi <= {len(KEYWORD_POOL)}")
        if self.page_width <= 0 or self.page_height <= 0:
            raise InputError("page dimensions must be positive")
        if self.jitter < 0 or self.distractor_words < 0:
            raise InputError("jitter and distractor_words must be non-negative")
        if not 0.0 <= self.drop_prob <= 1.0:
            raise InputError(f"drop_prob must be a probability, got {self.drop_prob}")
        if self.min_separation < 1:
            raise InputError("min_separation must be >= 1")
        if not -2**63 <= self.seed < 2**64:
            raise InputError("seed must fit in 64 bits")


class Corpus(NamedTuple):
    templates: List[Tuple[Document, List[KeywordSpec]]]
    test_set: List[LabeledDoc]


@dataclass(frozen=True)
class _Slot:
    keyword: str
    coord: Coord
    value: str


def _word_width(text: str) -> int:
    return max(1, len(text)) * CHAR_WIDTH


def _block_width(keyword: str, value: str) -> int:
    tokens = keyword.split(" ")
    return (sum(_word_width(t) for t in tokens) + WORD_SPACE * (len(tokens) - 1)
            + VALUE_GAP + _word_width(value))


def _block(keyword: str, value: str, at: Coord) -> List[WordBox]:
    """Words of ``keyword`` followed by its value, left to right on one line."""
    words = []
    left = at.left
    for token in keyword.split(" "):
        words.append(WordBox(text=token.capitalize(),
                             coord=Coord(at.top, left), width=_word_width(token), height=WORD_HEIGHT))
        left += _word_width(token) + WORD_SPACE
    left += VALUE_GAP - WORD_SPACE
    words.append(WordBox(text=value, coord=Coord(at.top, left), width=_word_width(value), height=WORD_HEIGHT))
    return words


def _random_value(rng: random.Random) -> str:
    return f"{rng.randrange(10**6):06d}-{rng.randrange(10**8):08d}"


class _Generator:
    def __init__(self, spec: SynthSpec):
        self.spec = spec
        self.rng = random.Random(spec.seed)
        self.margin = spec.jitter + 10
        self.placed: Dict[str, List[Coord]] = {}
        vocabulary = list(DISTRACTOR_VOCABULARY)
        if spec.keyword_distractors:
            vocabulary += sorted({t for kw in KEYWORD_POOL for t in kw.split(" ")})
        self.vocabulary = vocabulary

    def _place(self, class_id: str, keyword: str, value: str, layout: List[_Slot]) -> Coord:
        spec = self.spec
        max_left = spec.page_width - self.margin - _block_width(keyword, value)
        max_top = spec.page_height - self.margin - WORD_HEIGHT
        if max_left < self.margin or max_top < self.margin:
            raise GenerationError(f"page {spec.page_width}x{spec.page_height} is too small for {keyword!r}")

        others = self.placed.get(keyword, [])
        for _ in range(MAX_ATTEMPTS):
            coord = Coord(self.rng.randint(self.margin, max_top), self.rng.randint(self.margin, max_left))
            if any(manhattan(coord, other) < spec.min_separation for other in others):
                continue
            if any(abs(coord.top - slot.coord.top) < ROW_SPACING for slot in layout):
                continue
            return coord
        raise GenerationError(
            f"cannot place {keyword!r} for {class_id} with min_separation={spec.min_separation} "
            f"after {MAX_ATTEMPTS} attempts"
        )

    def _distractors(self) -> List[List[WordBox]]:
        spec = self.spec
        blocks = []
        for _ in range(spec.distractor_words):
            if self.rng.random() < 0.3:
                text = f"{self.rng.randrange(100000) / 100:,.2f}"
            else:
                text = self.rng.choice(self.vocabulary)
            width = _word_width(text)
            top = self.rng.randint(0, spec.page_height - WORD_HEIGHT)
            left = self.rng.randint(0, max(0, spec.page_width - width))
            blocks.append([WordBox(text=text, coord=Coord(top, left), width=width, height=WORD_HEIGHT)])
        return blocks

    def _document(self, doc_id: str, blocks: List[List[WordBox]]) -> Document:
        ordered = sorted(enumerate(blocks), key=lambda item: (item[1][0].coord, item[0]))
        words = tuple(word for _, block in ordered for word in block)
        page = Page(index=1, width=self.spec.page_width, height=self.spec.page_height, words=words)
        return Document(id=doc_id, pages=(page,))

    def template(self, number: int) -> Tuple[Document, List[KeywordSpec], List[_Slot]]:
        class_id = f"template_{number:03d}"
        lo, hi = self.spec.keywords_per_template
        keywords = self.rng.sample(KEYWORD_POOL, self.rng.randint(lo, hi))

        layout: List[_Slot] = []
        for keyword in keywords:
            value = _random_value(self.rng)
            coord = self._place(class_id, keyword, value, layout)
            layout.append(_Slot(keyword, coord, value))
        for slot in layout:
            self.placed.setdefault(slot.keyword, []).append(slot.coord)

        blocks = [_block(slot.keyword, slot.value, slot.coord) for slot in layout] + self._distractors()
        specs = [KeywordSpec(class_id=class_id, keyword=slot.keyword, value=slot.value) for slot in layout]
        return self._document(f"{class_id}/template", blocks), specs, layout

    def instance(self, class_id: str, number: int, layout: Sequence[_Slot]) -> Document:
        spec = self.spec
        kept = [slot for slot in layout if self.rng.random() >= spec.drop_prob]
        if not kept:
            kept = [self.rng.choice(list(layout))]

        blocks = []
        for slot in kept:
            shift_top = self.rng.randint(-spec.jitter, spec.jitter)
            shift_left = self.rng.randint(-spec.jitter, spec.jitter)
            at = Coord(slot.coord.top + shift_top, slot.coord.left + shift_left)
            blocks.append(_block(slot.keyword, _random_value(self.rng), at))
        blocks += self._distractors()
        return self._document(f"{class_id}/test_{number:03d}", blocks)


def gen_corpus(spec: SynthSpec) -> Corpus:
    """Generate templates (one per class) and labelled test instances."""
    generator = _Generator(spec)
    templates = []
    layouts = []
    for number in range(1, spec.n_templates + 1):
        doc, specs, layout = generator.template(number)
        templates.append((doc, specs))
        layouts.append((specs[0].class_id, layout))

    test_set = []
    for class_id, layout in layouts:
        for number in range(1, spec.instances_per_template + 1):
            test_set.append(LabeledDoc(generator.instance(class_id, number, layout), class_id))

    logger.info(
        f"Generated corpus (seed {spec.seed}): {len(templates)} template(s), "
        f"{sum(len(s) for _, s in templates)} keyword(s), {len(test_set)} test document(s)"
    )
    return Corpus(templates, test_set)


def _checked_name(class_id: str) -> str:
    if not _SAFE_NAME.fullmatch(class_id) or class_id in (".", ".."):
        raise InputError(f"class id {class_id!r} cannot be used as a directory name")
    return class_id


def write_corpus(corpus: Corpus, out_dir: Union[str, Path], with_hocr: bool = False) -> List[Path]:
    """Write ``corpus`` under ``out_dir``; returns the files written."""
    out_dir = Path(out_dir)
    written: List[Path] = []

    def emit(path: Path, data: bytes):
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(data)
        written.append(path)

    for doc, specs in corpus.templates:
        class_dir = out_dir / _checked_name(specs[0].class_id)
        emit(class_dir / TEMPLATE_FILE, write_words_xml(doc))
        emit(class_dir / KEYWORDS_FILE, write_keywords_csv(specs))

    counters: Dict[str, int] = {}
    manifest = io.StringIO()
    writer = csv.writer(manifest, lineterminator="\n")
    writer.writerow(["file", "true_class"])
    for labeled in corpus.test_set:
        class_id = _checked_name(labeled.true_class)
        counters[class_id] = counters.get(class_id, 0) + 1
        name = f"test_{counters[class_id]:03d}"
        emit(out_dir / class_id / f"{name}.xml", write_words_xml(labeled.doc))
        if with_hocr:
            emit(out_dir / class_id / f"{name}.hocr", write_hocr(labeled.doc))
        writer.writerow([f"{class_id}/{name}.xml", class_id])
    emit(out_dir / MANIFEST, manifest.getvalue().encode("utf-8"))

    logger.info(f"Wrote {len(written)} file(s) to {out_dir}")
    return written


def load_corpus(corpus_dir: Union[str, Path]) -> Corpus:
    """Read a corpus written by :func:`write_corpus`."""
    corpus_dir = Path(corpus_dir)
    manifest_path = corpus_dir / MANIFEST
    if not manifest_path.exists():
        raise InputError(f"{corpus_dir} has no {MANIFEST}")

    templates = []
    for class_dir in sorted(p for p in corpus_dir.iterdir() if (p / TEMPLATE_FILE).exists()):
        doc = load_document(class_dir / TEMPLATE_FILE, fmt="xml")
        specs = load_keywords(class_dir / KEYWORDS_FILE, class_dir.name)
        templates.append((doc, specs))

    test_set = []
    with open(manifest_path, newline="", encoding="utf-8") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header != ["file", "true_class"]:
            raise InputError(f"{manifest_path}: expected header 'file,true_class'")
        for record in reader:
            if not record:
                continue
            if len(record) != 2 or not record[1]:
                raise InputError(f"{manifest_path}, line {reader.line_num}: expected file,true_class")
            test_set.append(LabeledDoc(load_document(corpus_dir / record[0]), record[1]))

    logger.info(f"Loaded corpus {corpus_dir}: {len(templates)} template(s), {len(test_set)} test document(s)")
    return Corpus(templates, test_set)
