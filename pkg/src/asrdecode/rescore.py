"""Second-pass N-best reordering with two external LM scores and a length bonus."""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, replace
from typing import Iterable, Mapping, Sequence, TextIO, Union

from .decoder.nbest import NBestEntry, ranking_key
from .lm import NGramModel

LN10 = math.log(10.0)


class RescoreError(ValueError):
    pass


@dataclass(frozen=True)
class RescoreWeights:
    lm1: float = 0.0
    lm2: float = 0.0
    length: float = 0.0

    def __post_init__(self) -> None:
        if not all(math.isfinite(x) for x in (self.lm1, self.lm2, self.length)):
            raise ValueError("rescoring weights must be finite")


@dataclass(frozen=True)
class ScoredNBest:
    entry: NBestEntry
    lm1_log: float
    lm2_log: float

    def score(self, w: RescoreWeights) -> float:
        e = self.entry
        return e.am_score + w.lm1 * self.lm1_log + w.lm2 * self.lm2_log + w.length * e.char_len


# (utt_id, rank) -> natural-log probability
ExternalScores = Mapping[tuple[str, int], float]
ScoreSource = Union[NGramModel, ExternalScores, None]


def read_external_scores(source: TextIO | str) -> dict[tuple[str, int], float]:
    """Parse ``utt_id<TAB>rank<TAB>log_prob`` lines (rank is 0-based)."""
    if isinstance(source, str):
        source = io.StringIO(source)
    scores: dict[tuple[str, int], float] = {}
    for lineno, line in enumerate(source, start=1):
        line = line.rstrip("\n")
        if not line.strip():
            continue
        parts = line.split("\t")
        if lineno == 1 and parts[:2] == ["utt_id", "rank"]:
            continue
        if len(parts) != 3:
            raise RescoreError(f"line {lineno}: expected utt_id, rank, log_prob")
        try:
            key = (parts[0], int(parts[1]))
            value = float(parts[2])
        except ValueError:
            raise RescoreError(f"line {lineno}: malformed rank or log_prob") from None
        if not math.isfinite(value):
            raise RescoreError(f"line {lineno}: log_prob is not finite")
        if key in scores:
            raise RescoreError(f"line {lineno}: duplicate score for {key}")
        scores[key] = value
    return scores


def _ranks(entries: Sequence[NBestEntry]) -> list[int]:
    seen: dict[str, int] = {}
    ranks = []
    for e in entries:
        r = seen.get(e.utt_id, 0)
        ranks.append(r)
        seen[e.utt_id] = r + 1
    return ranks


def _lookup(source: ScoreSource, entry: NBestEntry, rank: int) -> float:
    if source is None:
        return 0.0
    if isinstance(source, NGramModel):
        return LN10 * source.score_sentence(entry.transcript, add_sentence_markers=True)[0]
    try:
        return source[(entry.utt_id, rank)]
    except KeyError:
        raise RescoreError(f"missing external score for (utt_id={entry.utt_id!r}, rank={rank})") from None


def attach_scores(entries: Sequence[NBestEntry], lm1: ScoreSource, lm2: ScoreSource) -> list[ScoredNBest]:
    """Score every entry with both sources; n-gram sources are converted to natural log.

    External sources are keyed by (utt_id, rank) where rank is the entry's
    0-based position within its utterance in ``entries``.
    """
    return [
        ScoredNBest(e, _lookup(lm1, e, r), _lookup(lm2, e, r))
        for e, r in zip(entries, _ranks(entries))
    ]


def rescore(entries: Iterable[ScoredNBest], w: RescoreWeights) -> list[NBestEntry]:
    by_utt: dict[str, list[tuple[float, NBestEntry]]] = {}
    for s in entries:
        by_utt.setdefault(s.entry.utt_id, []).append((s.score(w), s.entry))
    out: list[NBestEntry] = []
    for utt in by_utt:
        ranked = sorted(by_utt[utt], key=lambda se: ranking_key(se[0], se[1].transcript))
        out.extend(replace(e, rescore_score=score) for score, e in ranked)
    return out


def best_per_utterance(entries: Iterable[NBestEntry]) -> dict[str, NBestEntry]:
    best: dict[str, NBestEntry] = {}
    for e in entries:
        best.setdefault(e.utt_id, e)
    return best
