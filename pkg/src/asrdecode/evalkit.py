"""WER, transcript shuffling, silence-gap segmentation, and the
original-vs-shuffled perplexity probe."""

from __future__ import annotations

import io
import math
import random
import statistics
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Sequence, TextIO

from .lm import NGramModel, perplexity

SPLIT_GAP_S = 0.130
MAX_SEGMENT_WORDS = 6


@dataclass(frozen=True)
class WerBreakdown:
    substitutions: int
    deletions: int
    insertions: int
    ref_len: int

    @property
    def errors(self) -> int:
        return self.substitutions + self.deletions + self.insertions

    @property
    def wer(self) -> float:
        """Error rate; ``inf`` for an empty reference with a nonempty hypothesis."""
        if self.ref_len == 0:
            return 0.0 if self.errors == 0 else math.inf

        return self.errors / self.ref_len

    def __add__(self, other: "WerBreakdown") -> "WerBreakdown":
        return WerBreakdown(
            self.substitutions + other.substitutions,
            self.deletions + other.deletions,
            self.insertions + other.insertions,
            self.ref_len + other.ref_len,
        )


def wer(reference: Sequence[str], hypothesis: Sequence[str]) -> WerBreakdown:
    """Minimum-edit alignment; on ties the backtrace prefers substitutions."""
    n, m = len(reference), len(hypothesis)
    d = [[0] * (m + 1) for _ in range(n + 1)]
    for i in range(n + 1):
        d[i][0] = i
    for j in range(m + 1):
        d[0][j] = j
    for i in range(1, n + 1):
        ri = reference[i - 1]
        row, prev = d[i], d[i - 1]
        for j in range(1, m + 1):
            row[j] = min(prev[j - 1] + (ri != hypothesis[j - 1]), prev[j] + 1, row[j - 1] + 1)
    s = dl = ins = 0
    i, j = n, m
    while i > 0 or j > 0:
        if i > 0 and j > 0 and d[i][j] == d[i - 1][j - 1] + (reference[i - 1] != hypothesis[j - 1]):
            s += reference[i - 1] != hypothesis[j - 1]
            i, j = i - 1, j - 1
        elif i > 0 and d[i][j] == d[i - 1][j] + 1:
            dl += 1
            i -= 1
        else:
            ins += 1
            j -= 1
    return WerBreakdown(s, dl, ins, n)


def corpus_wer(pairs: Iterable[tuple[Sequence[str], Sequence[str]]]) -> WerBreakdown:
    total = WerBreakdown(0, 0, 0, 0)
    for ref, hyp in pairs:
        total = total + wer(ref, hyp)
    return total


def shuffle_transcript(words: Sequence[str], seed: int) -> list[str]:
    out = list(words)
    random.Random(seed).shuffle(out)
    return out


@dataclass(frozen=True)
class AlignmentSegment:
    word: str
    start: float
    duration: float

    def __post_init__(self) -> None:
        if self.start < 0 or self.duration <= 0:
            raise ValueError(f"bad alignment for {self.word!r}: start={self.start}, duration={self.duration}")

    @property
    def end(self) -> float:
        return self.start + self.duration


@dataclass(frozen=True)
class SegmentationResult:
    accepted: bool
    segments: list[list[AlignmentSegment]]
    split_times: list[float]
    order: list[int]  # shuffled segment order; empty when rejected
    reason: str = ""

    @property
    def shuffled_words(self) -> list[str]:
        return [seg.word for i in self.order for seg in self.segments[i]]


def validate_alignment(words: Sequence[AlignmentSegment]) -> None:
    for a, b in zip(words, words[1:]):
        if b.start < a.start or round(b.start - a.end, 9) < 0:
            raise ValueError(f"alignment segments overlap or are unsorted at {b.word!r}")


def segment_shuffle(
    utterance: Sequence[AlignmentSegment],
    min_gap: float = SPLIT_GAP_S,
    max_words_per_segment: int = MAX_SEGMENT_WORDS,
    seed: int = 0,
) -> SegmentationResult:
    """Split at silences longer than ``min_gap`` (cut at the gap midpoint),
    reject utterances with one segment or an oversized segment, then shuffle."""
    validate_alignment(utterance)
    if not utterance:
        return SegmentationResult(False, [], [], [], "empty")
    segments: list[list[AlignmentSegment]] = [[utterance[0]]]
    splits: list[float] = []
    for prev, cur in zip(utterance, utterance[1:]):
        # Rounded to microseconds so a 130 ms gap written in seconds doesn't split.
        gap = round(cur.start - prev.end, 6)
        if gap > min_gap:
            splits.append(prev.end + (cur.start - prev.end) / 2.0)
            segments.append([cur])
        else:
            segments[-1].append(cur)
    if len(segments) == 1:
        return SegmentationResult(False, segments, splits, [], "single-segment")
    if any(len(s) > max_words_per_segment for s in segments):
        return SegmentationResult(False, segments, splits, [], "segment-too-long")
    order = list(range(len(segments)))
    random.Random(seed).shuffle(order)
    return SegmentationResult(True, segments, splits, order)


def segment_histogram(results: Iterable[SegmentationResult]) -> dict[int, int]:
    """Segment word-count histogram over accepted utterances."""
    hist: Counter = Counter()
    for r in results:
        if r.accepted:
            hist.update(len(s) for s in r.segments)
    return dict(sorted(hist.items()))


def read_alignments(source: TextIO | str) -> dict[str, list[AlignmentSegment]]:
    """Alignment TSV: ``utt_id<TAB>word<TAB>start_s<TAB>duration_s``."""
    if isinstance(source, str):
        source = io.StringIO(source)
    out: dict[str, list[AlignmentSegment]] = {}
    for lineno, line in enumerate(source, start=1):
        line = line.rstrip("\n")
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) != 4:
            raise ValueError(f"line {lineno}: expected utt_id, word, start_s, duration_s")
        try:
            seg = AlignmentSegment(parts[1], float(parts[2]), float(parts[3]))
        except ValueError as exc:
            raise ValueError(f"line {lineno}: {exc}") from None
        out.setdefault(parts[0], []).append(seg)
    return out


@dataclass(frozen=True)
class ProbeResult:
    ppl_original: float
    ppl_shuffled: float
    original_log10: list[float]
    shuffled_log10: list[float]
    shuffled: list[list[str]]


def shuffle_corpus(corpus: Sequence[Sequence[str]], seed: int) -> list[list[str]]:
    # One derived seed per sentence keeps each shuffle independent of corpus order.
    return [shuffle_transcript(s, seed * 1_000_003 + i) for i, s in enumerate(corpus)]


def perplexity_probe(lm: NGramModel, corpus: Sequence[Sequence[str]], seed: int = 0) -> ProbeResult:
    corpus = [list(s) for s in corpus]
    shuffled = shuffle_corpus(corpus, seed)
    return ProbeResult(
        perplexity(lm, corpus),
        perplexity(lm, shuffled),
        [lm.score_sentence(s)[0] for s in corpus],
        [lm.score_sentence(s)[0] for s in shuffled],
        shuffled,
    )


def probe_trials(lm: NGramModel, corpus: Sequence[Sequence[str]], seed: int, trials: int) -> dict[str, float]:
    """Original perplexity plus mean/std of shuffled perplexity over ``trials`` shuffles."""
    results = [perplexity_probe(lm, corpus, seed + k) for k in range(trials)]
    shuffled = [r.ppl_shuffled for r in results]
    return {
        "ppl_original": results[0].ppl_original,
        "ppl_shuffled_mean": statistics.fmean(shuffled),
        "ppl_shuffled_std": statistics.pstdev(shuffled) if trials > 1 else 0.0,
    }
