"""Readers and writers for word-position XML, hOCR and keyword CSV files.

Canonical word XML::

    <document id="STR">
      <page index="1" width="INT" height="INT">
        <word top="INT" left="INT" width="INT" height="INT">TEXT</word>
      </page>
    </document>

hOCR input only needs ``ocr_page`` and ``ocrx_word`` elements whose ``title``
carries ``bbox x0 y0 x1 y1``. Word coordinates are taken as written (top=y0,
left=x0); the page size is the extent of the ``ocr_page`` bbox.
"""

import csv
import io
import re
import codecs
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Union

from lxml import etree, html

from .errors import (
    BoundsError,
    DuplicateKeywordError,
    FormatError,
    InputError,
    ParseError,
    SchemaError,
    ValidationError,
)
from .model import INT32_MAX, Coord, Document, Page, WordBox, normalize_text

logger = logging.getLogger(__name__)

XHTML_NS = "http://www.w3.org/1999/xhtml"
_INT_RE = re.compile(r"[0-9]+")
_BBOX_RE = re.compile(r"\bbbox\s+(\S+)\s+(\S+)\s+(\S+)\s+(\S+?)(?:;|\s|$)")
_HOCR_SUFFIXES = {".hocr", ".html", ".htm", ".xhtml"}


@dataclass(frozen=True)
class KeywordSpec:
    """A keyword of one class together with its value from the training CSV."""
    class_id: str
    keyword: str
    value: str = ""

    def __post_init__(self):
        if not self.keyword or normalize_text(self.keyword) != self.keyword:
            raise InputError(f"Keyword must be non-empty and normalized, got {self.keyword!r}")


def _strip_bom(data: bytes) -> bytes:
    if data.startswith(codecs.BOM_UTF8):
        return data[len(codecs.BOM_UTF8):]
    return data


def _xml_parser() -> etree.XMLParser:
    return etree.XMLParser(resolve_entities=False, no_network=True, huge_tree=True)


def _parse_xml_bytes(data: bytes) -> etree._Element:
    try:
        return etree.fromstring(_strip_bom(data), parser=_xml_parser())
    except etree.XMLSyntaxError as e:
        line, column = e.position if e.position else (e.lineno, None)
        raise ParseError(f"Malformed XML: {e.msg}", line=line, column=column) from e


def _int_attr(element: etree._Element, name: str) -> int:
    raw = element.get(name)
    if raw is None:
        raise SchemaError(f"<{element.tag}> is missing required attribute {name!r}", line=element.sourceline)
    if not _INT_RE.fullmatch(raw):
        raise SchemaError(
            f"<{element.tag}> attribute {name}={raw!r} is not a non-negative integer",
            line=element.sourceline,
        )
    value = int(raw)
    if value > INT32_MAX:
        raise SchemaError(
            f"<{element.tag}> attribute {name}={raw} exceeds the 32-bit coordinate range",
            line=element.sourceline,
        )
    return value


def _make_word(text: str, top: int, left: int, width: int, height: int,
               page_index: int, page_width: int, page_height: int, line: Optional[int]) -> WordBox:
    if not (0 <= top <= page_height and 0 <= left <= page_width):
        raise BoundsError(
            f"word {text!r} at top={top} left={left} lies outside page {page_index} "
            f"({page_width}x{page_height})",
            line=line,
        )
    return WordBox(text=text, coord=Coord(top, left), width=width, height=height)


def parse_words_xml(data: bytes, doc_id: Optional[str] = None) -> Document:
    """Parse canonical word XML into a Document, preserving file order."""
    root = _parse_xml_bytes(data)
    if root.tag != "document":
        raise SchemaError(f"expected root element <document>, found <{root.tag}>", line=root.sourceline)
    xml_id = root.get("id")
    if xml_id is None:
        raise SchemaError("<document> is missing required attribute 'id'", line=root.sourceline)

    pages = []
    for page_el in root:
        if not isinstance(page_el.tag, str):
            continue  # comments, processing instructions
        if page_el.tag != "page":
            raise SchemaError(f"unexpected element <{page_el.tag}> in <document>", line=page_el.sourceline)
        index = _int_attr(page_el, "index")
        width = _int_attr(page_el, "width")
        height = _int_attr(page_el, "height")
        if width == 0 or height == 0:
            raise SchemaError(f"page {index} must have positive width and height", line=page_el.sourceline)

        words = []
        for word_el in page_el:
            if not isinstance(word_el.tag, str):
                continue
            if word_el.tag != "word":
                raise SchemaError(f"unexpected element <{word_el.tag}> in <page>", line=word_el.sourceline)
            words.append(_make_word(
                word_el.text or "",
                _int_attr(word_el, "top"),
                _int_attr(word_el, "left"),
                _int_attr(word_el, "width"),
                _int_attr(word_el, "height"),
                index, width, height, word_el.sourceline,
            ))
        pages.append(Page(index=index, width=width, height=height, words=tuple(words)))

    if not pages:
        raise SchemaError("<document> contains no <page>", line=root.sourceline)
    try:
        document = Document(id=doc_id if doc_id is not None else xml_id, pages=tuple(pages))
    except InputError as e:
        raise SchemaError(str(e)) from e

    logger.debug(f"Parsed {document.id}: {len(pages)} page(s), {document.word_count} word(s)")
    return document


def _has_class(element: etree._Element, name: str) -> bool:
    return name in (element.get("class") or "").split()


def _bbox(element: etree._Element, what: str):
    title = element.get("title") or ""
    match = _BBOX_RE.search(title)
    if not match:
        raise SchemaError(f"{what} has no bbox in its title", line=element.sourceline)
    try:
        fields = tuple(int(field) for field in match.groups())
    except ValueError as e:
        raise ParseError(f"{what} has a non-integer bbox: {match.group(0).strip()!r}",
                         line=element.sourceline) from e
    if any(abs(field) > INT32_MAX for field in fields):
        raise SchemaError(f"{what} bbox exceeds the 32-bit coordinate range", line=element.sourceline)
    return fields


def _parse_hocr_tree(data: bytes) -> etree._Element:
    data = _strip_bom(data)
    try:
        return etree.fromstring(data, parser=_xml_parser())
    except etree.XMLSyntaxError:
        logger.debug("hOCR input is not well-formed XHTML, falling back to the HTML parser")
    try:
        return html.fromstring(data)
    except (etree.ParserError, ValueError) as e:
        raise ParseError(f"Malformed hOCR: {e}") from e


def parse_hocr(data: bytes, doc_id: str) -> Document:
    """Parse an hOCR (XHTML or HTML) document into a Document."""
    root = _parse_hocr_tree(data)

    pages = []
    page_elements = [el for el in root.iter() if isinstance(el.tag, str) and _has_class(el, "ocr_page")]
    for index, page_el in enumerate(page_elements, start=1):
        x0, y0, x1, y1 = _bbox(page_el, f"ocr_page {index}")
        width, height = x1 - x0, y1 - y0
        if width <= 0 or height <= 0:
            raise SchemaError(f"ocr_page {index} has an empty bbox", line=page_el.sourceline)

        words = []
        for word_el in page_el.iter():
            if not isinstance(word_el.tag, str) or not _has_class(word_el, "ocrx_word"):
                continue
            wx0, wy0, wx1, wy1 = _bbox(word_el, "ocrx_word")
            if wx1 < wx0 or wy1 < wy0 or wx0 < 0 or wy0 < 0:
                raise SchemaError(f"ocrx_word has an inverted bbox {wx0} {wy0} {wx1} {wy1}",
                                  line=word_el.sourceline)
            text = "".join(word_el.itertext())
            words.append(_make_word(text, wy0, wx0, wx1 - wx0, wy1 - wy0,
                                    index, width, height, word_el.sourceline))
        pages.append(Page(index=index, width=width, height=height, words=tuple(words)))

    if not pages:
        raise SchemaError("hOCR document contains no ocr_page element")
    return Document(id=doc_id, pages=tuple(pages))


def parse_keywords_csv(data: bytes, class_id: str) -> List[KeywordSpec]:
    """Parse a header-less ``keyword,value`` CSV into normalized KeywordSpecs."""
    try:
        text = _strip_bom(data).decode("utf-8")
    except UnicodeDecodeError as e:
        raise FormatError(f"keyword file is not valid UTF-8: {e}") from e

    specs: List[KeywordSpec] = []
    seen = {}
    reader = csv.reader(io.StringIO(text, newline=""))
    record = 0
    try:
        for row in reader:
            if not row:
                continue
            record += 1
            if len(row) != 2:
                raise FormatError(f"expected 2 fields (keyword,value), found {len(row)}", record=record)
            keyword = normalize_text(row[0])
            if not keyword:
                raise ValidationError("keyword is empty after normalization", record=record)
            if keyword in seen:
                raise DuplicateKeywordError(
                    f"keyword {keyword!r} duplicates record {seen[keyword]}", record=record
                )
            seen[keyword] = record
            specs.append(KeywordSpec(class_id=class_id, keyword=keyword, value=row[1]))
    except csv.Error as e:
        raise FormatError(f"malformed CSV: {e}", record=record + 1) from e

    logger.debug(f"Parsed {len(specs)} keyword(s) for class {class_id!r}")
    return specs


def write_words_xml(document: Document) -> bytes:
    """Serialize a Document in the canonical word XML format."""
    root = etree.Element("document", {"id": document.id})
    for page in document.pages:
        page_el = etree.SubElement(root, "page", {
            "index": str(page.index),
            "width": str(page.width),
            "height": str(page.height),
        })
        for word in page.words:
            word_el = etree.SubElement(page_el, "word", {
                "top": str(word.coord.top),
                "left": str(word.coord.left),
                "width": str(word.width),
                "height": str(word.height),
            })
            word_el.text = word.text
    return etree.tostring(root, encoding="UTF-8", xml_declaration=True) + b"\n"


def _xhtml(tag: str) -> str:
    return f"{{{XHTML_NS}}}{tag}"


def write_hocr(document: Document) -> bytes:
    """Serialize a Document as minimal hOCR XHTML."""
    root = etree.Element(_xhtml("html"), nsmap={None: XHTML_NS})
    head = etree.SubElement(root, _xhtml("head"))
    etree.SubElement(head, _xhtml("title")).text = document.id
    etree.SubElement(head, _xhtml("meta"), {"name": "ocr-system", "content": "cm2"})
    etree.SubElement(head, _xhtml("meta"), {"name": "ocr-capabilities", "content": "ocr_page ocrx_word"})
    body = etree.SubElement(root, _xhtml("body"))
    for page in document.pages:
        page_el = etree.SubElement(body, _xhtml("div"), {
            "class": "ocr_page",
            "id": f"page_{page.index}",
            "title": f"bbox 0 0 {page.width} {page.height}; ppageno {page.index - 1}",
        })
        for number, word in enumerate(page.words, start=1):
            span = etree.SubElement(page_el, _xhtml("span"), {
                "class": "ocrx_word",
                "id": f"word_{page.index}_{number}",
                "title": f"bbox {word.coord.left} {word.coord.top} {word.right} {word.coord.top + word.height}",
            })
            span.text = word.text
    return etree.tostring(root, encoding="UTF-8", xml_declaration=True) + b"\n"


def write_keywords_csv(specs: List[KeywordSpec]) -> bytes:
    """Serialize KeywordSpecs as header-less ``keyword,value`` CSV."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    for spec in specs:
        writer.writerow([spec.keyword, spec.value])
    return buffer.getvalue().encode("utf-8")


def load_document(path: Union[str, Path], fmt: str = "auto", doc_id: Optional[str] = None) -> Document:
    """Read a document from disk; ``fmt`` is ``auto``, ``xml`` or ``hocr``."""
    path = Path(path)
    if fmt == "auto":
        fmt = "hocr" if path.suffix.lower() in _HOCR_SUFFIXES else "xml"
    data = path.read_bytes()
    if fmt == "hocr":
        return parse_hocr(data, doc_id or path.stem)
    if fmt == "xml":
        return parse_words_xml(data, doc_id)
    raise InputError(f"Unknown document format {fmt!r} (expected auto, xml or hocr)")


def load_keywords(path: Union[str, Path], class_id: str) -> List[KeywordSpec]:
    return parse_keywords_csv(Path(path).read_bytes(), class_id)
