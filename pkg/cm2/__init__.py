"""cm2 - one-shot document layout classification with coordinate matrices."""

__version__ = "1.0.0"
__author__ = "cm2 developers"
__description__ = "Classify structured documents by where their keywords sit on the page"

from .config import ClassifierConfig, Config
from .errors import CM2Error
from .model import Coord, Document, Page, WordBox, manhattan, normalize_text
from .ingest import KeywordSpec, load_document, load_keywords, parse_hocr, parse_keywords_csv, parse_words_xml
from .registry import CoordinateMatrix, MatrixRow, build_matrix, get_coordinates, load_registry, save_registry
from .classifier import REJECTED, ClassificationResult, classify, explain
from .evaluate import EvalReport, LabeledDoc, evaluate, penalty_sweep
from .synth import SynthSpec, gen_corpus

__all__ = [
    "ClassifierConfig",
    "Config",
    "CM2Error",
    "Coord",
    "Document",
    "Page",
    "WordBox",
    "manhattan",
    "normalize_text",
    "KeywordSpec",
    "load_document",
    "load_keywords",
    "parse_hocr",
    "parse_keywords_csv",
    "parse_words_xml",
    "CoordinateMatrix",
    "MatrixRow",
    "build_matrix",
    "get_coordinates",
    "load_registry",
    "save_registry",
    "REJECTED",
    "ClassificationResult",
    "classify",
    "explain",
    "EvalReport",
    "LabeledDoc",
    "evaluate",
    "penalty_sweep",
    "SynthSpec",
    "gen_corpus",
]
