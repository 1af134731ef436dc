"""Text normalization helpers used by matching, linking, and validation."""

from __future__ import annotations

import re

_WORD_RE = re.compile(r"\w+")


def normalize(s: str) -> str:
    """Case-fold, collapse whitespace runs to single spaces, and trim."""
    return " ".join(s.casefold().split())


def tokens(s: str) -> list[str]:
    return _WORD_RE.findall(s.casefold())


def word_spans(s: str) -> list[tuple[int, int]]:
    """Character spans of word-character runs, in order."""
    return [(m.start(), m.end()) for m in _WORD_RE.finditer(s)]


def _normalize_with_map(s: str) -> tuple[str, list[tuple[int, int]]]:
    """Normalize s, keeping for each output char its source span in s."""
    chars: list[str] = []
    spans: list[tuple[int, int]] = []
    ws_start: int | None = None
    for i, ch in enumerate(s):
        if ch.isspace():
            if chars and ws_start is None:
                ws_start = i
            continue
        if ws_start is not None:
            chars.append(" ")
            spans.append((ws_start, i))
            ws_start = None
        for folded in ch.casefold():
            chars.append(folded)
            spans.append((i, i + 1))
    return "".join(chars), spans


def normalized_find(text: str, needle: str) -> tuple[int, int] | None:
    """Locate needle in text under normalization, returning original offsets.

    Returns (start, end) such that normalize(text[start:end]) == normalize(needle),
    or None when there is no such span.
    """
    target = normalize(needle)
    if not target:
        return None
    ntext, spans = _normalize_with_map(text)
    pos = 0
    while True:
        j = ntext.find(target, pos)
        if j < 0:
            return None
        start = spans[j][0]
        end = spans[j + len(target) - 1][1]
        # A case-fold expansion (one source char, several folded chars) can let
        # the normalized match end mid-character; reject those and keep looking.
        if normalize(text[start:end]) == target:
            return start, end
        pos = j + 1
