"""Concrete syntax and canonical encoding."""

from .codec import decode, encode, register, to_json
from .errors import ParseError
from .syntax import SymbolTable, parse_phrase, print_phrase

__all__ = [
    "ParseError",
    "SymbolTable",
    "decode",
    "encode",
    "parse_phrase",
    "print_phrase",
    "register",
    "to_json",
]
