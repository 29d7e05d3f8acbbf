"""Code-size counters: non-whitespace characters and identifier occurrences."""
from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from pathlib import PurePath

from .errors import LexError


class Language(enum.Enum):
    PATTERN = "pattern"  # Java-hosted pattern files
    CPP = "cpp"

    @classmethod
    def for_path(cls, path) -> "Language":
        suffix = PurePath(path).suffix.lower()
        if suffix in (".pat", ".java"):
            return cls.PATTERN
        if suffix in (".cpp", ".cc", ".cxx", ".hpp", ".hh", ".h", ".c"):
            return cls.CPP
        raise ValueError(f"cannot tell the language of {path!r} from its suffix")


_RESERVED_FILES = {Language.PATTERN: "java_reserved.txt", Language.CPP: "cpp_reserved.txt"}


@lru_cache(maxsize=None)
def reserved_words(language: Language) -> frozenset[str]:
    text = resources.files("peephole_forge").joinpath("data").joinpath(_RESERVED_FILES[language]).read_text(
        encoding="utf-8"
    )
    return frozenset(
        line.strip() for line in text.splitlines() if line.strip() and not line.startswith("#")
    )


@dataclass(frozen=True)
class ComplexityCount:
    characters: int
    identifiers: int


def count_characters(text: str) -> int:
    return sum(1 for ch in text if not ch.isspace())


_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<comment>//[^\n]*|/\*.*?\*/)
  | (?P<string>"(?:[^"\\\n]|\\.)*"|'(?:[^'\\\n]|\\.)*')
  | (?P<annot>@\s*(?:[^\W\d]|\$)(?:\w|\$)*)
  | (?P<number>\.?\d(?:[\w.]|[eEpP][+-])*)
  | (?P<ident>(?:[^\W\d]|\$)(?:\w|\$)*)
  | (?P<punct>[-+*/%=<>!&|^~?:;,.(){}\[\]#\\])
    """,
    re.VERBOSE | re.DOTALL,
)


def identifier_tokens(text: str) -> list[str]:
    """Identifier-shaped tokens in order, including reserved words.

    Annotation markers such as ``@Pattern``, numbers, strings, comments
    and punctuation are dropped.
    """
    out = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            line = text.count("\n", 0, pos) + 1
            raise LexError(f"line {line}: cannot lex {text[pos:pos + 10]!r}")
        if m.lastgroup == "ident":
            out.append(m.group())
        pos = m.end()
    return out


def count_identifiers(text: str, language: Language) -> int:
    """Identifier occurrences, not distinct names, minus reserved words."""
    reserved = reserved_words(language)
    return sum(1 for tok in identifier_tokens(text) if tok not in reserved)


def measure(text: str, language: Language) -> ComplexityCount:
    return ComplexityCount(count_characters(text), count_identifiers(text, language))
