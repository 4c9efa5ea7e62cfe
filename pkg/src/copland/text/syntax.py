"""Concrete ASCII syntax for Copland phrases.

::

    phrase := seq { ("-<" splits ">-" | "~<" splits ">~") seq }
    seq    := factor [ "->" seq ]
    factor := "CPY" | "SIG" | "HSH"
            | NAME "(" NAT "," NAT { "," STRING } ")"
            | "@" NAT "[" phrase "]"
            | "(" phrase ")"
    splits := sp "," sp        sp := "+" | "-"

``->`` is right-associative and binds tighter than the branch operators,
which associate to the left. ``-<`` builds a sequential branch and ``~<``
a parallel one; ``+`` passes all evidence to that side, ``-`` none.
An ASP is written ``name(place, target, args...)``. ``#`` starts a comment.
"""

from __future__ import annotations

import json
import re

from ..core import Asp, At, BPar, BSeq, Cpy, Hsh, LSeq, Phrase, Sig, Sp, SplitSpec
from .errors import ParseError

KEYWORDS = {"CPY": Cpy(), "SIG": Sig(), "HSH": Hsh()}
_NAME = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_NAT = re.compile(r"[0-9]+")
_DEFAULT_NAME = re.compile(r"asp([0-9]+)")
_BRANCHES = {"-<": (">-", BSeq), "~<": (">~", BPar)}
_SP = {"+": Sp.ALL, "-": Sp.NONE}


class SymbolTable:
    """Bidirectional ASP name <-> asp_id map.

    Unknown names are interned on first use. A name of the form ``aspN``
    maps to id ``N`` when that id is free, and ids without a registered
    name print as ``aspN``, so a fresh table round-trips any phrase.
    """

    def __init__(self, names: dict[str, int] | None = None):
        self.by_name: dict[str, int] = {}
        self.by_id: dict[int, str] = {}
        for name, asp_id in (names or {}).items():
            self.bind(name, asp_id)

    def bind(self, name: str, asp_id: int) -> None:
        if not _NAME.fullmatch(name) or name in KEYWORDS:
            raise ValueError(f"invalid ASP name {name!r}")
        if self.by_name.get(name, asp_id) != asp_id or self.by_id.get(asp_id, name) != name:
            raise ValueError(f"conflicting binding {name}={asp_id}")
        self.by_name[name] = asp_id
        self.by_id[asp_id] = name

    def intern(self, name: str) -> int:
        if name in self.by_name:
            return self.by_name[name]
        m = _DEFAULT_NAME.fullmatch(name)
        if m and int(m.group(1)) not in self.by_id:
            asp_id = int(m.group(1))
        else:
            asp_id = next(i for i in range(len(self.by_id) + 1) if i not in self.by_id)
        self.bind(name, asp_id)
        return asp_id

    def name_of(self, asp_id: int) -> str:
        name = self.by_id.get(asp_id)
        if name is None:
            name = f"asp{asp_id}"
            while name in self.by_name:
                name += "_"
            self.bind(name, asp_id)
        return name

    def as_dict(self) -> dict[str, int]:
        return dict(sorted(self.by_name.items(), key=lambda kv: kv[1]))

    def __repr__(self):
        return f"SymbolTable({self.as_dict()!r})"


class _Parser:
    def __init__(self, src: str, symbols: SymbolTable):
        self.src = src
        self.i = 0
        self.symbols = symbols

    # -- scanning

    def position(self, i: int | None = None) -> tuple[int, int]:
        i = self.i if i is None else i
        line = self.src.count("\n", 0, i) + 1
        col = i - (self.src.rfind("\n", 0, i) + 1) + 1
        return line, col

    def skip(self) -> None:
        while self.i < len(self.src):
            c = self.src[self.i]
            if c.isspace():
                self.i += 1
            elif c == "#":
                nl = self.src.find("\n", self.i)
                self.i = len(self.src) if nl < 0 else nl
            else:
                break

    def peek(self, s: str) -> bool:
        self.skip()
        return self.src.startswith(s, self.i)

    def fail(self, expected: str):
        self.skip()
        if self.i >= len(self.src):
            found = "end of input"
        else:
            m = _NAME.match(self.src, self.i) or _NAT.match(self.src, self.i)
            found = repr(m.group(0) if m else self.src[self.i])
        raise ParseError(self.position(), expected, found)

    def expect(self, s: str) -> None:
        if not self.peek(s):
            self.fail(repr(s))
        self.i += len(s)

    def token(self, pattern: re.Pattern, what: str) -> str:
        self.skip()
        m = pattern.match(self.src, self.i)
        if not m:
            self.fail(what)
        self.i = m.end()
        return m.group(0)

    def string(self) -> str:
        self.skip()
        if not self.peek('"'):
            self.fail("string")
        start = self.i
        try:
            value, end = json.JSONDecoder().raw_decode(self.src, self.i)
        except json.JSONDecodeError:
            raise ParseError(self.position(start), "string", "malformed string") from None
        self.i = end
        return value

    # -- grammar

    def phrase(self) -> Phrase:
        left = self.seq()
        while True:
            opener = next((op for op in _BRANCHES if self.peek(op)), None)
            if opener is None:
                return left
            closer, cls = _BRANCHES[opener]
            self.i += 2
            split = self.splits()
            self.expect(closer)
            left = cls(split, left, self.seq())

    def seq(self) -> Phrase:
        left = self.factor()
        if self.peek("->"):
            self.i += 2
            return LSeq(left, self.seq())
        return left

    def splits(self) -> SplitSpec:
        def sp():
            self.skip()
            c = self.src[self.i : self.i + 1]
            if c not in _SP:
                self.fail("'+' or '-'")
            self.i += 1
            return _SP[c]

        left = sp()
        self.expect(",")
        return SplitSpec(left, sp())

    def factor(self) -> Phrase:
        self.skip()
        if self.peek("@"):
            self.i += 1
            q = int(self.token(_NAT, "place number"))
            self.expect("[")
            body = self.phrase()
            self.expect("]")
            return At(q, body)
        if self.peek("("):
            self.i += 1
            inner = self.phrase()
            self.expect(")")
            return inner
        m = _NAME.match(self.src, self.i)
        if not m:
            self.fail("term")
        name = m.group(0)
        self.i = m.end()
        if name in KEYWORDS:
            return KEYWORDS[name]
        self.expect("(")
        place = int(self.token(_NAT, "place number"))
        self.expect(",")
        target = int(self.token(_NAT, "target number"))
        args = []
        while self.peek(","):
            self.i += 1
            args.append(self.string())
        self.expect(")")
        return Asp(self.symbols.intern(name), tuple(args), place, target)


def parse_phrase(src: str, symbols: SymbolTable | None = None) -> Phrase:
    """Parse concrete syntax into a phrase, interning ASP names into ``symbols``."""
    p = _Parser(src, symbols if symbols is not None else SymbolTable())
    t = p.phrase()
    p.skip()
    if p.i != len(src):
        p.fail("end of input")
    return t


def print_phrase(t: Phrase, symbols: SymbolTable | None = None) -> str:
    """Fully parenthesized concrete syntax; parses back to ``t``."""
    symbols = symbols if symbols is not None else SymbolTable()

    def sp(s: SplitSpec) -> str:
        return ",".join("+" if x is Sp.ALL else "-" for x in s)

    def go(t: Phrase) -> str:
        match t:
            case Cpy():
                return "CPY"
            case Sig():
                return "SIG"
            case Hsh():
                return "HSH"
            case Asp(asp_id, args, place, target):
                parts = [str(place), str(target)] + [json.dumps(a) for a in args]
                return f"{symbols.name_of(asp_id)}({', '.join(parts)})"
            case At(q, body):
                return f"@{q}[{go(body)}]"
            case LSeq(l, r):
                return f"({go(l)} -> {go(r)})"
            case BSeq(s, l, r):
                return f"({go(l)} -<{sp(s)}>- {go(r)})"
            case BPar(s, l, r):
                return f"({go(l)} ~<{sp(s)}>~ {go(r)})"
        raise TypeError(f"not a phrase: {t!r}")

    return go(t)
