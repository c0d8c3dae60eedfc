from .main import SessionConfig, build_parser, main
from .parser import ParseError, evaluate, parse, parse_element
from .serialize import FormatError, deserialize, serialize

__all__ = [
    "FormatError",
    "ParseError",
    "SessionConfig",
    "build_parser",
    "deserialize",
    "evaluate",
    "main",
    "parse",
    "parse_element",
    "serialize",
]
