"""Shared text normalization and tokenization.

The lexicon, the matcher, and the maskers must agree on what a token is;
they all route through this module. Evaluation tokenization lives in
:mod:`plsum.metrics` because its rules (semicolon and punctuation removal)
belong to scoring, not matching.
"""

import re

_ALNUM_RUN = re.compile(r"[A-Za-z0-9]+")
_NONSPACE_RUN = re.compile(r"\S+")


def tokenize_with_offsets(text: str, *, strip_punct: bool = True) -> list[tuple[str, int, int]]:
    """Split ``text`` into (token, start, end) triples.

    With ``strip_punct`` tokens are alphanumeric runs; otherwise whitespace-
    delimited chunks. Offsets index the original string.
    """
    pattern = _ALNUM_RUN if strip_punct else _NONSPACE_RUN
    return [(m.group(), m.start(), m.end()) for m in pattern.finditer(text)]


def word_tokens(text: str) -> list[str]:
    """Alphanumeric-run tokens without offsets (the masker's token unit)."""
    return _ALNUM_RUN.findall(text)
