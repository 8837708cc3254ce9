"""Random and grid search over decoding / rescoring hyperparameters."""

from __future__ import annotations

import io
import itertools
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Mapping, Sequence, TextIO, Union

import numpy as np


class SearchSpaceError(ValueError):
    pass


@dataclass(frozen=True)
class Fixed:
    value: Any


@dataclass(frozen=True)
class Choice:
    values: tuple

    def __post_init__(self) -> None:
        if not self.values:
            raise SearchSpaceError("choice set must be nonempty")


@dataclass(frozen=True)
class Range:
    lo: float
    hi: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.lo) and math.isfinite(self.hi)) or self.lo > self.hi:
            raise SearchSpaceError(f"bad interval [{self.lo}, {self.hi}]")


@dataclass(frozen=True)
class Grid:
    lo: float
    hi: float
    step: float

    def __post_init__(self) -> None:
        if self.step <= 0:
            raise SearchSpaceError("grid step must be > 0")
        if self.lo > self.hi:
            raise SearchSpaceError(f"bad grid axis [{self.lo}, {self.hi}]")

    def points(self) -> list[float]:
        n = int(math.floor((self.hi - self.lo) / self.step + 1e-9)) + 1
        return [round(self.lo + i * self.step, 10) for i in range(n)]


Param = Union[Fixed, Choice, Range, Grid]


@dataclass(frozen=True)
class SearchSpace:
    params: Mapping[str, Param]
    trials: int | None = None
    description: str = ""

    @property
    def is_grid(self) -> bool:
        return any(isinstance(p, Grid) for p in self.params.values())

    @property
    def is_discrete(self) -> bool:
        return all(isinstance(p, (Fixed, Choice)) for p in self.params.values())

    def contains(self, values: Mapping[str, Any]) -> bool:
        for name, p in self.params.items():
            v = values[name]
            if isinstance(p, Fixed) and v != p.value:
                return False
            if isinstance(p, Choice) and v not in p.values:
                return False
            if isinstance(p, Range) and not p.lo <= v <= p.hi:
                return False
            if isinstance(p, Grid) and v not in p.points():
                return False
        return True


@dataclass
class TrialResult:
    index: int
    params: dict[str, Any]
    wer_by_split: dict[str, float] = field(default_factory=dict)
    wall_time: float = 0.0
    error: str | None = None

    @property
    def wer(self) -> float:
        if self.error is not None or not self.wer_by_split:
            return math.inf
        return math.fsum(self.wer_by_split.values()) / len(self.wer_by_split)


Objective = Callable[[dict[str, Any]], Union[float, Mapping[str, float]]]


def sample(space: SearchSpace, rng: np.random.Generator) -> dict[str, Any]:
    out: dict[str, Any] = {}
    for name in sorted(space.params):
        p = space.params[name]
        if isinstance(p, Fixed):
            out[name] = p.value
        elif isinstance(p, Choice):
            out[name] = p.values[int(rng.integers(len(p.values)))]
        elif isinstance(p, Range):
            out[name] = float(rng.uniform(p.lo, p.hi)) if p.hi > p.lo else p.lo
        else:
            pts = p.points()
            out[name] = pts[int(rng.integers(len(pts)))]
    return out


def trial_rng(seed: int, index: int) -> np.random.Generator:
    """Per-trial generator derived from (master seed, trial counter)."""
    return np.random.default_rng([seed, index])


def _enumerate(space: SearchSpace) -> list[dict[str, Any]]:
    names = sorted(space.params)
    axes = []
    for name in names:
        p = space.params[name]
        if isinstance(p, Fixed):
            axes.append([p.value])
        elif isinstance(p, Choice):
            axes.append(list(p.values))
        elif isinstance(p, Grid):
            axes.append(p.points())
        else:
            raise SearchSpaceError(f"parameter {name!r} is continuous; cannot enumerate")
    return [dict(zip(names, combo)) for combo in itertools.product(*axes)]


def _run_one(objective: Objective, index: int, params: dict[str, Any]) -> TrialResult:
    t0 = time.perf_counter()
    try:
        value = objective(dict(params))
        by_split = {"all": float(value)} if isinstance(value, (int, float)) else {k: float(v) for k, v in value.items()}
        if any(math.isnan(v) or v < 0 for v in by_split.values()):
            raise ValueError(f"objective returned invalid WER {by_split}")
        return TrialResult(index, params, by_split, time.perf_counter() - t0)
    except Exception as exc:  # noqa: BLE001 - recorded per trial
        return TrialResult(index, params, {}, time.perf_counter() - t0, f"{type(exc).__name__}: {exc}")


def _evaluate(objective: Objective, plans: list[dict[str, Any]], workers: int) -> list[TrialResult]:
    if workers <= 1:
        results = [_run_one(objective, i, p) for i, p in enumerate(plans)]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_run_one, objective, i, p) for i, p in enumerate(plans)]
            results = [f.result() for f in futures]
    # Stable sort keeps insertion order among ties.
    return sorted(results, key=lambda r: r.wer)


def plan_random(space: SearchSpace, trials: int, seed: int, without_replacement: bool = False) -> list[dict[str, Any]]:
    if trials < 1:
        raise SearchSpaceError("trials must be >= 1")
    if without_replacement:
        points = _enumerate(space)
        order = np.random.default_rng(seed).permutation(len(points))
        return [points[int(i)] for i in order[:trials]]
    return [sample(space, trial_rng(seed, i)) for i in range(trials)]


def random_search(
    space: SearchSpace,
    trials: int,
    seed: int,
    objective: Objective,
    workers: int = 1,
    without_replacement: bool = False,
) -> list[TrialResult]:
    """Uniform random search; results sorted best (lowest WER) first.

    ``without_replacement`` (discrete spaces only) visits distinct points in
    a seeded random order, capped at the space size.
    """
    return _evaluate(objective, plan_random(space, trials, seed, without_replacement), workers)


def plan_grid(axes: Mapping[str, Union[Grid, tuple[float, float, float]]]) -> list[dict[str, Any]]:
    params = {k: (v if isinstance(v, Grid) else Grid(*v)) for k, v in axes.items()}
    return _enumerate(SearchSpace(params))


def grid_search(
    axes: Mapping[str, Union[Grid, tuple[float, float, float]]],
    objective: Objective,
    workers: int = 1,
) -> list[TrialResult]:
    """Full Cartesian product of inclusive (lo, hi, step) axes."""
    return _evaluate(objective, plan_grid(axes), workers)


def plan(space: SearchSpace, trials: int | None = None, seed: int = 0) -> list[dict[str, Any]]:
    if space.is_grid:
        return _enumerate(space)
    return plan_random(space, trials or space.trials or 128, seed)


# ---------------------------------------------------------------------------
# Built-in catalog
# ---------------------------------------------------------------------------

def _decode_space(beam, token_beam, lm_weight, threshold, word_insertion=None, eos_penalty=None, note=""):
    def p(v):
        if isinstance(v, tuple):
            return Choice(v)
        if isinstance(v, list):
            return Range(*v)
        return Fixed(v)

    params: dict[str, Param] = {
        "beam": p(beam),
        "token_beam": p(token_beam),
        "lm_weight": p(lm_weight),
        "beam_threshold": p(threshold),
    }
    if word_insertion is not None:
        params["word_insertion"] = p(word_insertion)
    if eos_penalty is not None:
        params["eos_penalty"] = p(eos_penalty)
    return SearchSpace(params, trials=128, description=note)


def builtin_spaces() -> dict[str, SearchSpace]:
    """Named search spaces: tuple = choice set, list = closed interval, scalar = fixed."""
    return {
        # n-gram LM, LibriSpeech acoustic models
        "ctc-ngram": _decode_space(500, 100, [0.0, 3.0], 100, word_insertion=[-3.0, 3.0]),
        "s2s-ngram": _decode_space((50, 100), (10, 50), [0.0, 2.0], (10, 50), eos_penalty=[-10.0, 0.0]),
        # n-gram LM, LibriVox acoustic models
        "librivox-ctc-ngram": _decode_space(500, 100, [0.0, 1.5], 100, word_insertion=[-3.0, 3.0]),
        "librivox-s2s-ngram": _decode_space((20, 50, 100), (3, 5, 10), [0.0, 1.0], (5, 10, 50), eos_penalty=[-10.0, 0.0]),
        # GCNN LM rows (the ranges apply to any LM plugged into the decoder)
        "ctc-gcnn": _decode_space(250, 100, [0.0, 3.0], 20, word_insertion=[-3.0, 3.0]),
        "s2s-gcnn": _decode_space(50, (10, 18), [0.0, 2.0], (10, 15), eos_penalty=[-10.0, 0.0]),
        "librivox-ctc-gcnn": _decode_space(250, 100, [0.0, 1.5], 20, word_insertion=[-3.0, 3.0]),
        "librivox-s2s-gcnn": _decode_space((20, 50, 100), (3, 5, 10), [0.0, 0.8], (5, 10, 50), eos_penalty=[-10.0, 0.0]),
        "rescore-ctc-grid": SearchSpace(
            {"lm1": Grid(0.0, 1.0, 0.1), "lm2": Grid(-0.3, 0.3, 0.1), "length": Grid(0.0, 1.0, 0.1)}
        ),
        "rescore-s2s-random": SearchSpace(
            {"lm1": Range(0.0, 2.5), "lm2": Range(-1.0, 1.0), "length": Range(-3.0, 3.0)}, trials=1000
        ),
    }


# Optimal LM-weight ranges reported for full-scale models, kept for reference
# only: (LM, train data, criterion, dev split) -> (lo, hi).
REPORTED_OPTIMAL_LM_WEIGHT = {
    ("ngram", "librispeech", "ctc", "clean"): (0.8, 1.4),
    ("ngram", "librispeech", "ctc", "other"): (1.1, 1.9),
    ("ngram", "librispeech", "s2s", "clean"): (0.6, 1.1),
    ("ngram", "librispeech", "s2s", "other"): (0.6, 1.2),
    ("ngram", "librivox", "ctc", "clean"): (0.2, 0.4),
    ("ngram", "librivox", "ctc", "other"): (0.5, 0.7),
    ("ngram", "librivox", "s2s", "clean"): (0.0, 0.2),
    ("ngram", "librivox", "s2s", "other"): (0.1, 0.5),
    ("gcnn", "librispeech", "ctc", "clean"): (0.4, 0.8),
    ("gcnn", "librispeech", "ctc", "other"): (0.5, 1.1),
    ("gcnn", "librispeech", "s2s", "clean"): (0.2, 0.5),
    ("gcnn", "librispeech", "s2s", "other"): (0.3, 0.7),
    ("gcnn", "librivox", "ctc", "clean"): (0.2, 0.5),
    ("gcnn", "librivox", "ctc", "other"): (0.3, 0.6),
    ("gcnn", "librivox", "s2s", "clean"): (0.0, 0.4),
    ("gcnn", "librivox", "s2s", "other"): (0.2, 0.4),
}

# Beam settings used when dumping candidates for rescoring.
RESCORE_DUMP_SETTINGS = {
    ("ngram", "ctc"): {"beam": 2500, "token_beam": 1500, "beam_threshold": 5000},
    ("ngram", "s2s"): {"beam": 250, "token_beam": 150, "beam_threshold": 150},
    ("gcnn", "ctc"): {"beam": 250, "token_beam": 100, "beam_threshold": 20},
    ("gcnn", "s2s"): {"beam": 250, "token_beam": 100, "beam_threshold": 100},
}


# ---------------------------------------------------------------------------
# Text formats
# ---------------------------------------------------------------------------

def _num(text: str) -> float | int:
    try:
        return int(text)
    except ValueError:
        return float(text)


def read_space(source: TextIO | str) -> SearchSpace:
    """One parameter per line: ``name fixed v``, ``name choice v1,v2``,
    ``name range lo hi`` or ``name grid lo hi step``; ``trials N`` sets a default."""
    if isinstance(source, str):
        source = io.StringIO(source)
    params: dict[str, Param] = {}
    trials = None
    for lineno, line in enumerate(source, start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        try:
            if parts[0] == "trials" and len(parts) == 2:
                trials = int(parts[1])
                continue
            name, kind, args = parts[0], parts[1], parts[2:]
            if kind == "fixed" and len(args) == 1:
                params[name] = Fixed(_num(args[0]))
            elif kind == "choice" and len(args) == 1:
                params[name] = Choice(tuple(_num(x) for x in args[0].split(",")))
            elif kind == "range" and len(args) == 2:
                params[name] = Range(float(args[0]), float(args[1]))
            elif kind == "grid" and len(args) == 3:
                params[name] = Grid(float(args[0]), float(args[1]), float(args[2]))
            else:
                raise SearchSpaceError(f"unrecognised parameter spec {line!r}")
        except (IndexError, ValueError) as exc:
            raise SearchSpaceError(f"line {lineno}: {exc}") from None
    if not params:
        raise SearchSpaceError("search space is empty")
    return SearchSpace(params, trials=trials)


def write_results(results: Sequence[TrialResult], sink: TextIO) -> None:
    names = sorted({k for r in results for k in r.params})
    splits = sorted({k for r in results for k in r.wer_by_split})
    sink.write("\t".join(["trial", "wer", *names, *(f"wer_{s}" for s in splits), "error"]) + "\n")
    for r in results:
        row = [str(r.index), repr(r.wer)]
        row += [repr(r.params.get(n, "")) if isinstance(r.params.get(n), float) else str(r.params.get(n, "")) for n in names]
        row += [repr(r.wer_by_split.get(s, math.inf)) for s in splits]
        row.append(r.error or "")
        sink.write("\t".join(row) + "\n")
