"""Manifests, batch decoding, pseudo-labeling, and speech-interval chunking."""

from __future__ import annotations

import io
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence, TextIO

from .decoder import DecodeOptions, Mode, NBestEntry, decode_ctc, decode_s2s, greedy_ctc
from .emissions import load_emissions, load_replay
from .evalkit import WerBreakdown, corpus_wer
from .lexicon import WORD_BOUNDARY, LexiconTrie, TokenInventory, join_word_pieces
from .lm import NGramModel

log = logging.getLogger(__name__)

MAX_CHUNK_S = 36.0


class ManifestError(ValueError):
    pass


@dataclass(frozen=True)
class ManifestRow:
    utt_id: str
    path: str
    reference: str | None = None
    duration: float | None = None
    source: str | None = None


def read_manifest(source: TextIO | str) -> list[ManifestRow]:
    """``utt_id<TAB>path[<TAB>reference[<TAB>duration[<TAB>source]]]`` lines."""
    if isinstance(source, str):
        source = io.StringIO(source)
    rows: list[ManifestRow] = []
    seen: set[str] = set()
    for lineno, line in enumerate(source, start=1):
        line = line.rstrip("\n")
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) < 2 or len(parts) > 5 or not parts[0] or not parts[1]:
            raise ManifestError(f"line {lineno}: expected utt_id, path[, reference[, duration[, source]]]")
        utt = parts[0]
        if utt in seen:
            raise ManifestError(f"line {lineno}: duplicate utt_id {utt!r}")
        seen.add(utt)
        ref = parts[2] if len(parts) > 2 and parts[2] != "" else None
        dur = None
        if len(parts) > 3 and parts[3] != "":
            try:
                dur = float(parts[3])
            except ValueError:
                raise ManifestError(f"line {lineno}: bad duration {parts[3]!r}") from None
        src = parts[4] if len(parts) > 4 and parts[4] != "" else None
        rows.append(ManifestRow(utt, parts[1], ref, dur, src))
    return rows


def write_manifest(rows: Iterable[ManifestRow], sink: TextIO) -> None:
    for r in rows:
        fields_ = [r.utt_id, r.path, r.reference or "", "" if r.duration is None else repr(r.duration)]
        if r.source is not None:
            fields_.append(r.source)
        while len(fields_) > 2 and fields_[-1] == "":
            fields_.pop()
        sink.write("\t".join(fields_) + "\n")


def merge_manifests(named: Sequence[tuple[str, Sequence[ManifestRow]]]) -> list[ManifestRow]:
    """Concatenate manifests, tagging each row with its source name."""
    out: list[ManifestRow] = []
    seen: set[str] = set()
    for name, rows in named:
        for r in rows:
            if r.utt_id in seen:
                raise ManifestError(f"duplicate utt_id {r.utt_id!r} across manifests")
            seen.add(r.utt_id)
            out.append(ManifestRow(r.utt_id, r.path, r.reference, r.duration, name))
    return out


@dataclass
class Decoder:
    """Read-only decoding resources shared by every utterance."""

    inventory: TokenInventory
    opts: DecodeOptions
    trie: LexiconTrie | None = None
    lm: NGramModel | None = None
    root: Path = field(default_factory=Path)
    boundary: str = WORD_BOUNDARY

    def decode_file(self, utt_id: str, path: str, opts: DecodeOptions | None = None) -> list[NBestEntry]:
        opts = opts or self.opts
        full = self.root / path
        if opts.mode is Mode.GREEDY:
            ids = greedy_ctc(load_emissions(full), self.inventory)
            words = tuple(join_word_pieces(self.inventory.decode(ids), self.boundary))
            return [NBestEntry(utt_id, words, 0.0, 0.0, 0.0)]
        if opts.mode in (Mode.LEXICON_CTC, Mode.ZEROLM_CTC):
            if self.trie is None:
                raise ManifestError("lexicon decoding needs a lexicon")
            return decode_ctc(load_emissions(full), self.trie, self.lm, opts, self.inventory, utt_id)
        scorer = load_replay(full, len(self.inventory))
        return decode_s2s(scorer, self.lm, opts, self.inventory, utt_id, self.boundary)


@dataclass
class BatchResult:
    nbest: dict[str, list[NBestEntry]]
    errors: dict[str, str]


_WORKER: Decoder | None = None


def _init_worker(decoder: Decoder) -> None:
    global _WORKER
    _WORKER = decoder


def _decode_row(row: ManifestRow, opts: DecodeOptions | None) -> tuple[str, list[NBestEntry] | None, str | None]:
    try:
        return row.utt_id, _WORKER.decode_file(row.utt_id, row.path, opts), None
    except Exception as exc:  # noqa: BLE001 - reported per utterance
        return row.utt_id, None, f"{type(exc).__name__}: {exc}"


def decode_manifest(
    decoder: Decoder, rows: Sequence[ManifestRow], workers: int = 1, opts: DecodeOptions | None = None
) -> BatchResult:
    """Decode every row; per-row failures are collected, not raised."""
    if workers <= 1:
        _init_worker(decoder)
        outcomes = [_decode_row(r, opts) for r in rows]
    else:
        with ProcessPoolExecutor(max_workers=workers, initializer=_init_worker, initargs=(decoder,)) as pool:
            outcomes = list(pool.map(_decode_row, rows, [opts] * len(rows), chunksize=max(1, len(rows) // (4 * workers))))
    nbest, errors = {}, {}
    for utt, entries, err in sorted(outcomes, key=lambda o: o[0]):
        if err is not None:
            log.warning("utterance %s failed: %s", utt, err)
            errors[utt] = err
        else:
            nbest[utt] = entries
    return BatchResult(nbest, errors)


def pseudo_label(decoder: Decoder, rows: Sequence[ManifestRow], workers: int = 1) -> BatchResult:
    return decode_manifest(decoder, rows, workers)


def write_labels(result: BatchResult, sink: TextIO) -> None:
    for utt in sorted(result.nbest):
        sink.write(f"{utt}\t{result.nbest[utt][0].text}\n")


def read_labels(source: TextIO | str) -> dict[str, list[str]]:
    """``utt_id<TAB>transcript`` lines."""
    if isinstance(source, str):
        source = io.StringIO(source)
    labels = {}
    for lineno, line in enumerate(source, start=1):
        line = line.rstrip("\n")
        if not line:
            continue
        utt, sep, text = line.partition("\t")
        if not sep:
            raise ManifestError(f"line {lineno}: expected 'utt_id<TAB>transcript'")
        labels[utt] = text.split()
    return labels


def manifest_wer(rows: Sequence[ManifestRow], hyps: dict[str, list[str]]) -> WerBreakdown:
    """Corpus WER over rows that carry a reference; missing hypotheses count as empty."""
    return corpus_wer(
        (r.reference.split(), hyps.get(r.utt_id, [])) for r in rows if r.reference is not None
    )


# ---------------------------------------------------------------------------
# Chunking
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Chunk:
    start: float
    end: float
    pieces: tuple[tuple[float, float], ...]

    @property
    def span(self) -> float:
        return self.end - self.start


def chunk_intervals(intervals: Sequence[tuple[float, float]], max_chunk: float = MAX_CHUNK_S) -> list[Chunk]:
    """Greedily pack consecutive speech intervals into chunks spanning at most
    ``max_chunk`` seconds; an over-long interval is cut at ``max_chunk`` steps."""
    if max_chunk <= 0:
        raise ValueError("max_chunk must be > 0")
    prev_end = -math.inf
    pieces: list[tuple[float, float]] = []
    for start, end in intervals:
        if end < start:
            raise ValueError(f"interval ({start}, {end}) ends before it starts")
        if start < prev_end:
            raise ValueError("intervals must be sorted and non-overlapping")
        prev_end = end
        while end - start > max_chunk:
            cut = start + max_chunk
            # rounding can leave cut - start a hair above the limit
            while cut - start > max_chunk:
                cut = math.nextafter(cut, -math.inf)
            pieces.append((start, cut))
            start = cut
        pieces.append((start, end))

    chunks: list[Chunk] = []
    current: list[tuple[float, float]] = []
    for piece in pieces:
        if current and piece[1] - current[0][0] > max_chunk:
            chunks.append(Chunk(current[0][0], current[-1][1], tuple(current)))
            current = []
        current.append(piece)
    if current:
        chunks.append(Chunk(current[0][0], current[-1][1], tuple(current)))
    return chunks


def read_intervals(source: TextIO | str) -> list[tuple[float, float]]:
    if isinstance(source, str):
        source = io.StringIO(source)
    out = []
    for lineno, line in enumerate(source, start=1):
        parts = line.split()
        if not parts:
            continue
        if len(parts) != 2:
            raise ValueError(f"line {lineno}: expected 'start end'")
        out.append((float(parts[0]), float(parts[1])))
    return out
