"""Coordinate matrix construction and the on-disk template registry.

The registry file is UTF-8 CSV with LF line endings::

    #cm2-registry v1
    Statement A,account no.,254,1231
    Statement B,account name,100,359
"""

import csv
import io
import logging
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import BinaryIO, Dict, List, Optional, Sequence, Tuple, Union

from . import metrics
from .config import ClassifierConfig
from .errors import InputError, RegistryError, TrainingError
from .ingest import KeywordSpec
from .model import Coord, Document, WordBox, normalize_text

logger = logging.getLogger(__name__)

REGISTRY_HEADER = "#cm2-registry v1"
_HEADER_PREFIX = "#cm2-registry"
_INT_RE = re.compile(r"[0-9]+")


@dataclass(frozen=True)
class MatrixRow:
    """One ⟨class, keyword, top, left⟩ row of the coordinate matrix."""
    class_id: str
    keyword: str
    coord: Coord

    def __post_init__(self):
        if not self.class_id:
            raise InputError("MatrixRow class_id must be non-empty")
        if not self.keyword or normalize_text(self.keyword) != self.keyword:
            raise InputError(f"MatrixRow keyword must be non-empty and normalized, got {self.keyword!r}")


@dataclass(frozen=True)
class CoordinateMatrix:
    """The trained model: rows grouped by class, classes in insertion order."""
    rows: Tuple[MatrixRow, ...] = ()
    class_order: Tuple[str, ...] = field(init=False)
    counts: Dict[str, int] = field(init=False, compare=False, hash=False)

    def __post_init__(self):
        rows = tuple(self.rows)
        object.__setattr__(self, "rows", rows)

        order: List[str] = []
        counts: Dict[str, int] = {}
        seen = set()
        for row in rows:
            if row.class_id not in counts:
                order.append(row.class_id)
                counts[row.class_id] = 0
            elif order[-1] != row.class_id:
                raise InputError(f"rows of class {row.class_id!r} are not contiguous")
            key = (row.class_id, row.keyword)
            if key in seen:
                raise InputError(f"duplicate keyword {row.keyword!r} for class {row.class_id!r}")
            seen.add(key)
            counts[row.class_id] += 1

        object.__setattr__(self, "class_order", tuple(order))
        object.__setattr__(self, "counts", counts)

    @property
    def n_classes(self) -> int:
        return len(self.class_order)

    @property
    def total_keywords(self) -> int:
        """M, the number of rows across all classes."""
        return len(self.rows)

    def __len__(self) -> int:
        return len(self.rows)

    def __contains__(self, class_id: object) -> bool:
        return class_id in self.counts

    def rows_for(self, class_id: str) -> Tuple[MatrixRow, ...]:
        return tuple(row for row in self.rows if row.class_id == class_id)

    def class_spans(self) -> List[Tuple[str, int, int]]:
        """(class_id, start, end) slices into ``rows`` in class order."""
        spans = []
        start = 0
        for class_id in self.class_order:
            end = start + self.counts[class_id]
            spans.append((class_id, start, end))
            start = end
        return spans

    def extend(self, other: "CoordinateMatrix") -> "CoordinateMatrix":
        """Append the classes of ``other``; a class present in both is an error."""
        clash = [c for c in other.class_order if c in self.counts]
        if clash:
            raise InputError(f"class {clash[0]!r} is already registered")
        return CoordinateMatrix(rows=self.rows + other.rows)


def _adjacent(prev: WordBox, cur: WordBox, cfg: ClassifierConfig) -> bool:
    """Same visual line, left-to-right, within the horizontal gap tolerance."""
    return (
        abs(cur.coord.top - prev.coord.top) <= cfg.line_tolerance
        and cur.coord.left > prev.coord.left
        and cur.coord.left - prev.right <= cfg.gap_tolerance
    )


def find_keyword_occurrences(doc: Document, keyword: str, cfg: ClassifierConfig) -> List[Coord]:
    """Start coordinates of every occurrence of ``keyword`` on the configured page.

    An occurrence is a run of consecutive words whose normalized texts equal
    the keyword's tokens, each pair adjacent on one line. Results are sorted
    by (top, left).
    """
    if not keyword or normalize_text(keyword) != keyword:
        raise InputError(f"keyword must be non-empty and normalized, got {keyword!r}")
    page = doc.page(cfg.page_index)
    tokens = keyword.split(" ")
    words = page.words

    found = []
    for start in page.token_index.get(tokens[0], ()):
        if start + len(tokens) > len(words):
            continue
        for offset in range(1, len(tokens)):
            prev, cur = words[start + offset - 1], words[start + offset]
            if cur.norm != tokens[offset] or not _adjacent(prev, cur, cfg):
                break
        else:
            found.append(words[start].coord)
    return sorted(found)


def get_coordinates(doc: Document, keyword: str, cfg: ClassifierConfig) -> Optional[Coord]:
    """First occurrence of ``keyword`` in reading order, or None."""
    occurrences = find_keyword_occurrences(doc, keyword, cfg)
    if not occurrences:
        return None
    if len(occurrences) > 1:
        logger.warning(
            f"Keyword {keyword!r} occurs {len(occurrences)} times in {doc.id!r}; "
            f"using the first in reading order at {occurrences[0]}"
        )
    return occurrences[0]


def build_matrix(samples: Sequence[Tuple[Document, Sequence[KeywordSpec]]],
                 cfg: ClassifierConfig) -> CoordinateMatrix:
    """Build the coordinate matrix from one training sample per class."""
    if not samples:
        raise InputError("no training samples given")

    rows: List[MatrixRow] = []
    classes = set()
    for doc, specs in samples:
        if not specs:
            raise InputError(f"training sample {doc.id!r} has an empty keyword list")
        class_ids = {spec.class_id for spec in specs}
        if len(class_ids) != 1:
            raise InputError(f"keywords of sample {doc.id!r} belong to several classes: {sorted(class_ids)}")
        class_id = specs[0].class_id
        if class_id in classes:
            raise InputError(f"duplicate class {class_id!r} in training samples")
        classes.add(class_id)

        for spec in specs:
            coord = get_coordinates(doc, spec.keyword, cfg)
            if coord is None:
                raise TrainingError(class_id, spec.keyword)
            logger.debug(f"{class_id}: {spec.keyword!r} at {coord}")
            rows.append(MatrixRow(class_id=class_id, keyword=spec.keyword, coord=coord))

    try:
        matrix = CoordinateMatrix(rows=tuple(rows))
    except InputError as e:
        raise InputError(f"invalid training keywords: {e}") from e
    metrics.registry_rows.set(len(matrix))
    logger.info(f"Built coordinate matrix: {matrix.n_classes} class(es), {len(matrix)} keyword(s)")
    return matrix


def save_registry(matrix: CoordinateMatrix, sink: BinaryIO) -> None:
    """Write ``matrix`` in the v1 registry format."""
    buffer = io.StringIO()
    buffer.write(REGISTRY_HEADER + "\n")
    writer = csv.writer(buffer, lineterminator="\n")
    for row in matrix.rows:
        writer.writerow([row.class_id, row.keyword, row.coord.top, row.coord.left])
    sink.write(buffer.getvalue().encode("utf-8"))


def _parse_rows(reader) -> List[MatrixRow]:
    rows = []
    for record in reader:
        line = reader.line_num
        if not record:
            continue
        if len(record) != 4:
            raise RegistryError(f"expected 4 fields (class_id,keyword,top,left), found {len(record)}", line)
        class_id, keyword, top, left = record
        if not (_INT_RE.fullmatch(top) and _INT_RE.fullmatch(left)):
            raise RegistryError(f"coordinates must be non-negative integers, got {top!r},{left!r}", line)
        try:
            rows.append(MatrixRow(class_id=class_id, keyword=keyword, coord=Coord(int(top), int(left))))
        except InputError as e:
            raise RegistryError(str(e), line) from e
    return rows


def load_registry(source: BinaryIO) -> CoordinateMatrix:
    """Read a registry written by :func:`save_registry`."""
    data = source.read()
    if not data:
        raise RegistryError("empty registry stream: missing format header")
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as e:
        raise RegistryError(f"registry is not valid UTF-8: {e}") from e

    reader = csv.reader(io.StringIO(text, newline=""))
    try:
        header = next(reader, None)
        if header != [REGISTRY_HEADER]:
            found = ",".join(header or [])
            if found.startswith(_HEADER_PREFIX):
                raise RegistryError(f"unknown registry format version {found!r}", 1)
            raise RegistryError(f"missing {REGISTRY_HEADER!r} header", 1)
        rows = _parse_rows(reader)
    except csv.Error as e:
        raise RegistryError(f"malformed record: {e}", reader.line_num) from e

    try:
        matrix = CoordinateMatrix(rows=tuple(rows))
    except InputError as e:
        raise RegistryError(str(e)) from e
    metrics.registry_rows.set(len(matrix))
    return matrix


def save_registry_file(matrix: CoordinateMatrix, path: Union[str, Path]) -> None:
    """Atomically replace ``path`` with ``matrix``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    temp_path = path.with_suffix(path.suffix + '.tmp')
    try:
        with open(temp_path, 'wb') as f:
            save_registry(matrix, f)
        temp_path.replace(path)
    except Exception:
        if temp_path.exists():
            temp_path.unlink()
        raise
    logger.info(f"Saved registry to {path}: {matrix.n_classes} class(es), {len(matrix)} row(s)")


def load_registry_file(path: Union[str, Path]) -> CoordinateMatrix:
    with open(path, 'rb') as f:
        matrix = load_registry(f)
    logger.info(f"Loaded registry {path}: {matrix.n_classes} class(es), {len(matrix)} row(s)")
    return matrix
