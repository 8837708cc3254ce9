import io
import itertools
import math

import pytest

from asrdecode.tune import (
    Choice,
    Fixed,
    Grid,
    Range,
    SearchSpace,
    SearchSpaceError,
    builtin_spaces,
    grid_search,
    plan,
    random_search,
    read_space,
    write_results,
)


def bowl(params):
    return (params["x"] - 1.3) ** 2 + abs(params.get("y", 0) - 2)


def flaky(params):
    if params["x"] > 2:
        raise RuntimeError("diverged")
    return params["x"]


def ks_uniform(samples, lo, hi):
    xs = sorted((s - lo) / (hi - lo) for s in samples)
    n = len(xs)
    return max(max((i + 1) / n - x, x - i / n) for i, x in enumerate(xs))


def test_fixed_space_repeats():
    space = SearchSpace({"x": Fixed(0.5), "y": Fixed(3)})
    results = random_search(space, 5, seed=0, objective=bowl)
    assert len(results) == 5
    assert all(r.params == {"x": 0.5, "y": 3} for r in results)


def test_seeded_determinism():
    space = SearchSpace({"x": Range(0, 3), "y": Choice((1, 2, 3))})
    a = random_search(space, 20, seed=11, objective=bowl)
    b = random_search(space, 20, seed=11, objective=bowl)
    assert [(r.index, r.params, r.wer) for r in a] == [(r.index, r.params, r.wer) for r in b]
    c = random_search(space, 20, seed=12, objective=bowl)
    assert [r.params for r in a] != [r.params for r in c]


def test_lm_weight_samples_are_uniform():
    space = builtin_spaces()["ctc-ngram"]
    samples = [p["lm_weight"] for p in plan(space, 128, seed=0)]
    assert all(0.0 <= s <= 3.0 for s in samples)
    assert ks_uniform(samples, 0.0, 3.0) < 0.15


def test_results_sorted_with_stable_ties():
    space = SearchSpace({"x": Choice((1.3, 0.0, 1.3, 2.6))})
    results = random_search(space, 12, seed=3, objective=bowl)
    wers = [r.wer for r in results]
    assert wers == sorted(wers)
    for a, b in zip(results, results[1:]):
        if a.wer == b.wer:
            assert a.index < b.index


def test_objective_failure_is_recorded():
    results = random_search(SearchSpace({"x": Range(0, 4)}), 30, seed=0, objective=flaky)
    failed = [r for r in results if r.error]
    assert failed and all(r.wer == math.inf and "diverged" in r.error for r in failed)
    assert results[0].error is None


def test_parallel_matches_serial():
    space = SearchSpace({"x": Range(0, 3), "y": Choice((1, 2))})
    serial = random_search(space, 16, seed=5, objective=bowl)
    parallel = random_search(space, 16, seed=5, objective=bowl, workers=2)
    assert [(r.index, r.params, r.wer) for r in serial] == [(r.index, r.params, r.wer) for r in parallel]


def test_rescoring_grid_size():
    axes = {"lm1": (0.0, 1.0, 0.1), "lm2": (-0.3, 0.3, 0.1), "length": (0.0, 1.0, 0.1)}
    results = grid_search(axes, lambda p: 0.0)
    assert len(results) == 847
    assert {r.params["lm2"] for r in results} == {-0.3, -0.2, -0.1, 0.0, 0.1, 0.2, 0.3}


def test_degenerate_axis():
    assert len(grid_search({"x": (0, 0, 0.1)}, bowl)) == 1
    with pytest.raises(SearchSpaceError):
        Grid(0, 1, 0)


def test_grid_argmax_matches_brute_force():
    axes = {"x": (0.0, 2.0, 0.25), "y": (1.0, 3.0, 0.5)}
    best = grid_search(axes, bowl)[0]
    xs = [i * 0.25 for i in range(9)]
    ys = [1.0 + i * 0.5 for i in range(5)]
    want = min(itertools.product(xs, ys), key=lambda p: bowl({"x": p[0], "y": p[1]}))
    assert (best.params["x"], best.params["y"]) == want


def test_without_replacement_finds_global_optimum():
    space = SearchSpace({"x": Choice((0.0, 0.5, 1.0, 1.5, 2.0)), "y": Choice((1, 2, 3))})
    results = random_search(space, 15, seed=9, objective=bowl, without_replacement=True)
    assert len({tuple(sorted(r.params.items())) for r in results}) == 15
    assert results[0].params == {"x": 1.5, "y": 2}


def test_sampled_params_inside_space():
    for name, space in builtin_spaces().items():
        for p in plan(space, 50, seed=1):
            assert space.contains(p), name


def test_catalog_values():
    cat = builtin_spaces()
    ctc = cat["ctc-ngram"].params
    assert ctc["beam"] == Fixed(500) and ctc["token_beam"] == Fixed(100)
    assert ctc["lm_weight"] == Range(0.0, 3.0) and ctc["word_insertion"] == Range(-3.0, 3.0)
    assert ctc["beam_threshold"] == Fixed(100)
    s2s = cat["s2s-ngram"].params
    assert s2s["beam"] == Choice((50, 100)) and s2s["token_beam"] == Choice((10, 50))
    assert s2s["lm_weight"] == Range(0.0, 2.0) and s2s["eos_penalty"] == Range(-10.0, 0.0)
    assert cat["librivox-s2s-gcnn"].params["lm_weight"] == Range(0.0, 0.8)
    assert cat["s2s-gcnn"].params["token_beam"] == Choice((10, 18))
    assert cat["rescore-s2s-random"].trials == 1000
    assert cat["rescore-s2s-random"].params["length"] == Range(-3.0, 3.0)


def test_read_space_and_results():
    space = read_space("trials 4\nbeam fixed 50\ntoken_beam choice 10,50\nlm_weight range 0 2\n")
    assert space.trials == 4 and space.params["token_beam"] == Choice((10, 50))
    with pytest.raises(SearchSpaceError):
        read_space("x between 0 1\n")
    with pytest.raises(SearchSpaceError):
        Range(2, 1)
    buf = io.StringIO()
    write_results(random_search(space, 4, 0, lambda p: p["lm_weight"]), buf)
    lines = buf.getvalue().splitlines()
    assert lines[0].split("\t")[:2] == ["trial", "wer"] and len(lines) == 5
