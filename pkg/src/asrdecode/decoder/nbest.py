"""N-best entries and their TSV serialization."""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence, TextIO

BASE_COLUMNS = ["utt_id", "am_score", "lm_score_raw", "char_len", "transcript"]
SCORE_COLUMN = "score"
RESCORE_COLUMN = "rescore_score"


class NBestFormatError(ValueError):
    pass


def char_length(words: Sequence[str]) -> int:
    """Characters in the space-joined transcript."""
    return sum(len(w) for w in words) + max(len(words) - 1, 0)


@dataclass(frozen=True)
class NBestEntry:
    utt_id: str
    transcript: tuple[str, ...]
    am_score: float
    lm_score_raw: float
    score: float
    char_len: int = field(default=-1)
    finished: bool = True
    rescore_score: float | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "transcript", tuple(self.transcript))
        expected = char_length(self.transcript)
        if self.char_len == -1:
            object.__setattr__(self, "char_len", expected)
        elif self.char_len != expected:
            raise NBestFormatError(
                f"char_len {self.char_len} does not match transcript {self.text!r} ({expected})"
            )

    @property
    def text(self) -> str:
        return " ".join(self.transcript)


def ranking_key(score: float, transcript: Sequence[str]) -> tuple:
    """Sort key: higher score first, then lexicographically smaller transcript."""
    return (-score, tuple(transcript))


def _fmt(x: float) -> str:
    return repr(float(x))


def dump_nbest(entries: Iterable[NBestEntry], sink: TextIO | None = None) -> str:
    entries = list(entries)
    with_rescore = any(e.rescore_score is not None for e in entries)
    cols = BASE_COLUMNS + [SCORE_COLUMN] + ([RESCORE_COLUMN] if with_rescore else [])
    out = io.StringIO()
    out.write("\t".join(cols) + "\n")
    for e in entries:
        row = [e.utt_id, _fmt(e.am_score), _fmt(e.lm_score_raw), str(e.char_len), e.text, _fmt(e.score)]
        if with_rescore:
            row.append(_fmt(e.rescore_score if e.rescore_score is not None else e.score))
        out.write("\t".join(row) + "\n")
    text = out.getvalue()
    if sink is not None:
        sink.write(text)
    return text


def _parse_float(text: str, lineno: int, name: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise NBestFormatError(f"line {lineno}: {name} is not a number: {text!r}") from None
    if not math.isfinite(value):
        raise NBestFormatError(f"line {lineno}: {name} is not finite: {text!r}")
    return value


def load_nbest(source: TextIO | str) -> list[NBestEntry]:
    if isinstance(source, str):
        source = io.StringIO(source)
    lines = source.read().split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise NBestFormatError("missing header")
    header = lines[0].split("\t")
    if header[:5] != BASE_COLUMNS:
        raise NBestFormatError(f"unexpected header {lines[0]!r}")
    extra = header[5:]
    if extra not in ([], [SCORE_COLUMN], [SCORE_COLUMN, RESCORE_COLUMN]):
        raise NBestFormatError(f"unexpected extra columns {extra}")
    entries = []
    for lineno, line in enumerate(lines[1:], start=2):
        parts = line.split("\t")
        if len(parts) != len(header):
            raise NBestFormatError(f"line {lineno}: expected {len(header)} fields, got {len(parts)}")
        utt, am, lm, clen, text = parts[:5]
        if not utt:
            raise NBestFormatError(f"line {lineno}: empty utt_id")
        am_v = _parse_float(am, lineno, "am_score")
        lm_v = _parse_float(lm, lineno, "lm_score_raw")
        try:
            clen_v = int(clen)
        except ValueError:
            raise NBestFormatError(f"line {lineno}: char_len is not an integer") from None
        score = _parse_float(parts[5], lineno, "score") if extra else am_v
        rescore = _parse_float(parts[6], lineno, "rescore_score") if len(extra) == 2 else None
        words = tuple(text.split(" ")) if text else ()
        try:
            entries.append(NBestEntry(utt, words, am_v, lm_v, score, clen_v, rescore_score=rescore))
        except NBestFormatError as exc:
            raise NBestFormatError(f"line {lineno}: {exc}") from None
    return entries


def group_by_utterance(entries: Iterable[NBestEntry]) -> dict[str, list[NBestEntry]]:
    """Entries per utterance, preserving file order (rank 0 first)."""
    groups: dict[str, list[NBestEntry]] = {}
    for e in entries:
        groups.setdefault(e.utt_id, []).append(e)
    return groups
