"""Character sets for word sampling, rendering, and the recognizer loss."""

from __future__ import annotations

import string
from dataclasses import dataclass

LETTERS = string.ascii_lowercase + string.ascii_uppercase        # 52 classes
LETTERS_DIGITS = LETTERS + string.digits                          # 62 classes

#: Characters the bundled rasterizer accepts (labels default to LETTERS only).
RENDERABLE = LETTERS_DIGITS


@dataclass(frozen=True)
class Charset:
    """Ordered string of permitted characters.

    The order defines the class index used by the recognizer loss.
    """

    chars: str = LETTERS

    def __post_init__(self) -> None:
        if not self.chars:
            raise ValueError("charset must be non-empty")
        if len(set(self.chars)) != len(self.chars):
            raise ValueError("charset contains duplicate characters")

    def __len__(self) -> int:
        return len(self.chars)

    def __contains__(self, ch: str) -> bool:
        return ch in self.chars

    def index(self, ch: str) -> int:
        return self.chars.index(ch)

    def indices(self, word: str) -> list[int]:
        """Map a word to class indices; raises ValueError on foreign chars."""
        try:
            return [self.chars.index(c) for c in word]
        except ValueError:
            bad = [c for c in word if c not in self.chars]
            raise ValueError(f"characters {bad!r} not in charset") from None

    def valid_word(self, word: str) -> bool:
        return bool(word) and all(c in self.chars for c in word)


def default_charset() -> Charset:
    """52-class charset: lowercase then uppercase Latin letters."""
    return Charset(LETTERS)


def letters_digits_charset() -> Charset:
    """62-class charset: letters extended with digits."""
    return Charset(LETTERS_DIGITS)
