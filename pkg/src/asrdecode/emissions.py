"""Emission matrices (EMAT binary/text formats), synthetic emissions, and
autoregressive next-token scorers for Seq2Seq decoding."""

from __future__ import annotations

import io
from dataclasses import dataclass
from pathlib import Path
from typing import BinaryIO, Protocol, Sequence, TextIO

import numpy as np

from .lexicon import TokenInventory

MAGIC = b"EMAT1\n"
NORM_TOL = 1e-3


class EmissionError(ValueError):
    pass


def _logsumexp_rows(values: np.ndarray) -> np.ndarray:
    m = values.max(axis=1, keepdims=True)
    return (m + np.log(np.exp(values - m).sum(axis=1, keepdims=True)))[:, 0]


@dataclass(frozen=True)
class EmissionMatrix:
    """T x V natural-log scores, float32, row-major."""

    values: np.ndarray
    normalized: bool = True

    def __post_init__(self) -> None:
        v = np.ascontiguousarray(self.values, dtype="<f4")
        if v.ndim != 2:
            raise EmissionError(f"emissions must be 2-D, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise EmissionError("emissions contain NaN or infinite values")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        if self.normalized and v.shape[0]:
            dev = np.abs(_logsumexp_rows(v.astype(np.float64)))
            bad = np.flatnonzero(dev > NORM_TOL)
            if bad.size:
                raise EmissionError(
                    f"row {bad[0]} is not normalized (|logsumexp| = {dev[bad[0]]:.4g})"
                )

    @property
    def frames(self) -> int:
        return self.values.shape[0]

    @property
    def vocab(self) -> int:
        return self.values.shape[1]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, EmissionMatrix):
            return NotImplemented
        return (
            self.normalized == other.normalized
            and self.values.shape == other.values.shape
            and self.values.tobytes() == other.values.tobytes()
        )


def write_emissions(m: EmissionMatrix, sink: BinaryIO | None = None) -> bytes:
    header = f"{m.frames} {m.vocab} {int(m.normalized)}\n".encode("ascii")
    data = MAGIC + header + m.values.astype("<f4").tobytes(order="C")
    if sink is not None:
        sink.write(data)
    return data


def read_emissions(source: BinaryIO | bytes) -> EmissionMatrix:
    data = source if isinstance(source, (bytes, bytearray)) else source.read()
    if not data.startswith(MAGIC):
        raise EmissionError("bad magic: not an EMAT1 stream")
    end = data.find(b"\n", len(MAGIC))
    if end < 0:
        raise EmissionError("missing header line")
    try:
        t, v, norm = (int(x) for x in data[len(MAGIC):end].decode("ascii").split())
    except ValueError:
        raise EmissionError("malformed header line") from None
    if t < 0 or v < 1 or norm not in (0, 1):
        raise EmissionError("header values out of range")
    payload = data[end + 1:]
    need = t * v * 4
    if len(payload) < need:
        raise EmissionError(f"truncated payload: expected {need} bytes, got {len(payload)}")
    if len(payload) > need:
        raise EmissionError(f"trailing bytes after payload ({len(payload) - need})")
    values = np.frombuffer(payload, dtype="<f4").reshape(t, v)
    if np.isnan(values).any():
        raise EmissionError("payload contains NaN")
    return EmissionMatrix(values, normalized=bool(norm))


def write_emissions_text(m: EmissionMatrix, sink: TextIO | None = None) -> str:
    out = io.StringIO()
    out.write(f"{m.frames} {m.vocab} {int(m.normalized)}\n")
    for row in m.values:
        out.write(" ".join(repr(float(x)) for x in row) + "\n")
    text = out.getvalue()
    if sink is not None:
        sink.write(text)
    return text


def read_emissions_text(source: TextIO | str) -> EmissionMatrix:
    if isinstance(source, str):
        source = io.StringIO(source)
    lines = [ln for ln in source.read().splitlines() if ln.strip()]
    if not lines:
        raise EmissionError("empty emission text")
    try:
        t, v, norm = (int(x) for x in lines[0].split())
        rows = [[float(x) for x in ln.split()] for ln in lines[1:]]
    except ValueError:
        raise EmissionError("malformed emission text") from None
    if len(rows) != t or any(len(r) != v for r in rows):
        raise EmissionError(f"expected {t} rows of {v} values")
    return EmissionMatrix(np.array(rows, dtype=np.float64).reshape(t, v), normalized=bool(norm))


def load_emissions(path: str | Path) -> EmissionMatrix:
    """Read either format; the text twin is recognised by its ``.txt`` suffix."""
    path = Path(path)
    if path.name.endswith(".txt"):
        return read_emissions_text(path.read_text(encoding="utf-8"))
    return read_emissions(path.read_bytes())


def save_emissions(m: EmissionMatrix, path: str | Path) -> None:
    path = Path(path)
    if path.name.endswith(".txt"):
        path.write_text(write_emissions_text(m), encoding="utf-8")
    else:
        path.write_bytes(write_emissions(m))


def synth_emissions(
    transcript: Sequence[int],
    inventory: TokenInventory,
    noise: float = 0.0,
    frames_per_token: int = 3,
    seed: int = 0,
) -> EmissionMatrix:
    """Peaky CTC-style emissions whose frame argmax spells ``transcript``.

    Each token takes the first ``frames_per_token - 1`` frames of its slot and
    the slot ends in blank, so repeated tokens stay separable.  ``noise``
    shrinks the target margin and adds Gaussian jitter to every logit.
    """
    if inventory.blank is None:
        raise EmissionError("inventory has no blank token")
    if not 0.0 <= noise < 1.0:
        raise EmissionError("noise must be in [0, 1)")
    if frames_per_token < 2:
        raise EmissionError("frames_per_token must be >= 2")
    V = len(inventory)
    blank = inventory.blank
    targets: list[int] = []
    for tok in transcript:
        if not 0 <= tok < V or tok == blank:
            raise EmissionError(f"transcript token {tok} not a label in the inventory")
        targets.extend([tok] * (frames_per_token - 1) + [blank])
    if not targets:
        targets = [blank] * frames_per_token

    rng = np.random.default_rng(seed)
    T = len(targets)
    margin = (1.0 - noise) * (np.log(V) + 6.0)
    logits = rng.standard_normal((T, V)) * (3.0 * noise)
    logits[np.arange(T), targets] += margin
    logits -= _logsumexp_rows(logits)[:, None]
    return EmissionMatrix(logits)


class SeqScorer(Protocol):
    """Next-token log-distribution given a prefix (the begin symbol is implicit)."""

    vocab_size: int

    def log_probs(self, prefix: tuple[int, ...]) -> np.ndarray: ...


class ReplayScorer:
    """Scripted :class:`SeqScorer` backed by a table of prefix -> distribution.

    File format, one record per line: ``id id id|v1 v2 ... vV`` with an empty
    prefix for the first step.  Unlisted prefixes get a uniform distribution.
    """

    def __init__(self, vocab_size: int, table: dict[tuple[int, ...], np.ndarray] | None = None):
        self.vocab_size = vocab_size
        self.table: dict[tuple[int, ...], np.ndarray] = {}
        self._uniform = np.full(vocab_size, -np.log(vocab_size))
        self._uniform.setflags(write=False)
        for prefix, row in (table or {}).items():
            self.set(prefix, row)

    def set(self, prefix: Sequence[int], row: Sequence[float]) -> None:
        arr = np.asarray(row, dtype=np.float64).copy()
        if arr.shape != (self.vocab_size,):
            raise EmissionError(f"row for prefix {tuple(prefix)} has length {arr.size}, expected {self.vocab_size}")
        if not np.all(np.isfinite(arr)):
            raise EmissionError(f"row for prefix {tuple(prefix)} has non-finite values")
        lse = float(_logsumexp_rows(arr[None, :])[0])
        if abs(lse) > NORM_TOL:
            raise EmissionError(f"row for prefix {tuple(prefix)} is not normalized")
        arr.setflags(write=False)
        self.table[tuple(prefix)] = arr

    def log_probs(self, prefix: tuple[int, ...]) -> np.ndarray:
        return self.table.get(tuple(prefix), self._uniform)

    @classmethod
    def read(cls, source: TextIO | str, vocab_size: int | None = None) -> "ReplayScorer":
        if isinstance(source, str):
            source = io.StringIO(source)
        records = []
        for lineno, line in enumerate(source, start=1):
            if not line.strip():
                continue
            prefix_text, sep, values = line.rstrip("\n").partition("|")
            if not sep:
                raise EmissionError(f"line {lineno}: missing '|'")
            try:
                prefix = tuple(int(x) for x in prefix_text.split())
                row = [float(x) for x in values.split()]
            except ValueError:
                raise EmissionError(f"line {lineno}: non-numeric field") from None
            records.append((prefix, row))
        if vocab_size is None:
            if not records:
                raise EmissionError("cannot infer vocabulary size from an empty replay file")
            vocab_size = len(records[0][1])
        scorer = cls(vocab_size)
        for prefix, row in records:
            scorer.set(prefix, row)
        return scorer

    def write(self, sink: TextIO | None = None) -> str:
        text = "".join(
            f"{' '.join(map(str, prefix))}|{' '.join(repr(float(x)) for x in row)}\n"
            for prefix, row in sorted(self.table.items())
        )
        if sink is not None:
            sink.write(text)
        return text


def load_replay(path: str | Path, vocab_size: int | None = None) -> ReplayScorer:
    with open(path, encoding="utf-8") as f:
        return ReplayScorer.read(f, vocab_size)
