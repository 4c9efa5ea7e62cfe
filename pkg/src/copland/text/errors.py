from __future__ import annotations


class ParseError(ValueError):
    """Malformed phrase text or canonical encoding.

    ``position`` is a 1-based ``(line, column)`` pair.
    """

    def __init__(self, position: tuple[int, int], expected: str, found: str):
        self.position = position
        self.expected = expected
        self.found = found
        line, col = position
        super().__init__(f"{line}:{col}: expected {expected}, found {found}")
