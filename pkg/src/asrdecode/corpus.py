"""Removing books that overlap held-out audio from an LM training corpus.

Three stages: shared book ids, identical normalized titles, then fuzzy title
matches that go to a manual verdict file instead of being removed outright.
"""

from __future__ import annotations

import io
import unicodedata
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence, TextIO


class CorpusError(ValueError):
    pass


def normalize_title(raw: str) -> list[str]:
    text = unicodedata.normalize("NFC", raw).lower()
    words = ("".join(ch for ch in tok if ch.isalnum()) for tok in text.split())
    return [w for w in words if w]


@dataclass(frozen=True)
class TitleRecord:
    book_id: str
    raw_title: str
    normalized: tuple[str, ...] = field(default=())

    def __post_init__(self) -> None:
        if not self.normalized:
            object.__setattr__(self, "normalized", tuple(normalize_title(self.raw_title)))

    @property
    def empty(self) -> bool:
        return not self.normalized


@dataclass(frozen=True)
class FuzzyMatchParams:
    len_ratio: float = 0.75
    dist_ratio: float = 0.3

    def __post_init__(self) -> None:
        if self.len_ratio < 0 or self.dist_ratio < 0:
            raise ValueError("fuzzy match ratios must be >= 0")


def word_levenshtein(a: Sequence[str], b: Sequence[str], cutoff: int | None = None) -> int:
    """Unit-cost edit distance over words.

    With ``cutoff``, returns ``cutoff + 1`` as soon as the distance is known
    to exceed it.
    """
    if len(a) < len(b):
        a, b = b, a
    if not b:
        return len(a)
    prev = list(range(len(b) + 1))
    for i, wa in enumerate(a, start=1):
        cur = [i]
        for j, wb in enumerate(b, start=1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (wa != wb)))
        if cutoff is not None and min(cur) > cutoff:
            return cutoff + 1
        prev = cur
    return prev[-1]


@dataclass(frozen=True, order=True)
class FuzzyPair:
    ratio: float
    left_id: str
    right_id: str
    distance: int
    left_title: tuple[str, ...] = field(compare=False)
    right_title: tuple[str, ...] = field(compare=False)

    @property
    def key(self) -> tuple[str, str]:
        return (self.left_id, self.right_id)


def is_fuzzy_match(s1: Sequence[str], s2: Sequence[str], p: FuzzyMatchParams) -> int | None:
    """Distance if the pair passes both length and distance tests (and is nonzero)."""
    lo, hi = sorted((len(s1), len(s2)))
    if not hi - lo < p.len_ratio * lo:
        return None
    limit = p.dist_ratio * hi
    d = word_levenshtein(s1, s2, cutoff=int(limit))
    if d == 0 or d > limit:
        return None
    return d


def fuzzy_candidates(
    left: Iterable[TitleRecord], right: Iterable[TitleRecord], p: FuzzyMatchParams = FuzzyMatchParams()
) -> list[FuzzyPair]:
    """Cross pairs with nonzero but small word distance, by ascending distance ratio."""
    right_by_len: dict[int, list[TitleRecord]] = {}
    for r in right:
        right_by_len.setdefault(len(r.normalized), []).append(r)
    pairs = []
    for l in left:
        n = len(l.normalized)
        for m, group in right_by_len.items():
            lo, hi = min(n, m), max(n, m)
            if not hi - lo < p.len_ratio * lo:
                continue
            for r in group:
                d = is_fuzzy_match(l.normalized, r.normalized, p)
                if d is not None:
                    pairs.append(FuzzyPair(d / hi, l.book_id, r.book_id, d, l.normalized, r.normalized))
    pairs.sort()
    return pairs


@dataclass
class FilterResult:
    kept: list[str]
    removed: dict[str, str]  # book id -> stage that removed it
    pending: list[FuzzyPair]


def read_titles(source: TextIO | str) -> list[TitleRecord]:
    """Title list TSV: ``id<TAB>raw title``."""
    if isinstance(source, str):
        source = io.StringIO(source)
    records = []
    for lineno, line in enumerate(source, start=1):
        line = line.rstrip("\n")
        if not line.strip():
            continue
        book_id, sep, title = line.partition("\t")
        if not sep or not book_id:
            raise CorpusError(f"line {lineno}: expected 'id<TAB>title'")
        records.append(TitleRecord(book_id, title))
    return records


def read_verdicts(source: TextIO | str) -> dict[tuple[str, str], str]:
    """Verdict TSV: ``left_id<TAB>right_id<TAB>remove|keep``."""
    if isinstance(source, str):
        source = io.StringIO(source)
    verdicts: dict[tuple[str, str], str] = {}
    for lineno, line in enumerate(source, start=1):
        line = line.rstrip("\n")
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) != 3 or parts[2] not in ("remove", "keep"):
            raise CorpusError(f"line {lineno}: expected 'left_id<TAB>right_id<TAB>remove|keep'")
        verdicts[(parts[0], parts[1])] = parts[2]
    return verdicts


def filter_corpus(
    corpus_books: Iterable[TitleRecord],
    held_out: Iterable[TitleRecord],
    p: FuzzyMatchParams = FuzzyMatchParams(),
    verdicts: Mapping[tuple[str, str], str] | None = None,
) -> FilterResult:
    """Drop corpus books overlapping ``held_out``.

    Books with an empty normalized title never match at the title stages.
    A fuzzy pair is removed only by an explicit ``remove`` verdict; pairs
    without a verdict are reported as pending and the book is kept.
    """
    corpus_books = list(corpus_books)
    held_out = list(held_out)
    held_ids = {r.book_id for r in held_out}
    held_titles = {r.normalized for r in held_out if not r.empty}

    removed: dict[str, str] = {}
    remaining: list[TitleRecord] = []
    for book in corpus_books:
        if book.book_id in held_ids:
            removed[book.book_id] = "id"
        elif not book.empty and book.normalized in held_titles:
            removed[book.book_id] = "exact-title"
        else:
            remaining.append(book)

    candidates = fuzzy_candidates(remaining, [r for r in held_out if not r.empty], p)
    verdicts = dict(verdicts or {})
    known = {c.key for c in candidates}
    unknown = sorted(set(verdicts) - known)
    if unknown:
        raise CorpusError(f"verdict for unknown pair {unknown[0][0]}\t{unknown[0][1]}")
    pending = []
    for c in candidates:
        verdict = verdicts.get(c.key)
        if verdict == "remove":
            removed.setdefault(c.left_id, "fuzzy-verdict")
        elif verdict is None:
            pending.append(c)
    pending = [c for c in pending if c.left_id not in removed]
    kept = sorted({b.book_id for b in remaining} - set(removed))
    return FilterResult(kept, removed, pending)


def write_pending(pairs: Iterable[FuzzyPair], sink: TextIO) -> None:
    sink.write("left_id\tright_id\tdistance\tratio\tleft_title\tright_title\n")
    for c in pairs:
        sink.write(
            f"{c.left_id}\t{c.right_id}\t{c.distance}\t{c.ratio:.6f}\t"
            f"{' '.join(c.left_title)}\t{' '.join(c.right_title)}\n"
        )
