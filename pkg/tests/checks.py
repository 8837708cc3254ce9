"""Randomized experiment drivers shared by the unit and acceptance tests."""

from __future__ import annotations

import math
import random

from asrdecode.decoder import DecodeOptions, EmptyResult, decode_ctc, decode_s2s
from conftest import ctc_instance, s2s_instance, spellings_of
from oracles import best_of, ctc_exhaustive, s2s_exhaustive

UNPRUNED = dict(beam=10**6, token_beam=1000, beam_threshold=math.inf)
BEAMS = [1, 2, 4, 8, 16, 32, 64, 128, 256]


def _agrees(got, scored, tol):
    want_words, want_score = best_of(scored)
    if not math.isclose(got.score, want_score, rel_tol=0.0, abs_tol=tol):
        return False
    if got.transcript == want_words:
        return True
    # A different transcript is only acceptable on an exact-score tie.
    other = scored.get(got.transcript)
    return other is not None and math.isclose(other[0], want_score, rel_tol=0.0, abs_tol=tol)


def ctc_oracle_mismatches(instances: int = 100, tol: float = 1e-6, seed0: int = 0) -> list[int]:
    bad = []
    for seed in range(seed0, seed0 + instances):
        em, inv, lex, trie, lm = ctc_instance(seed)
        r = random.Random(seed)
        alpha, beta = r.uniform(0.0, 2.0), r.uniform(-2.0, 2.0)
        scored = ctc_exhaustive(em.values, inv.blank, spellings_of(lex), lm, alpha, beta)
        opts = DecodeOptions(lm_weight=alpha, word_insertion=beta, blank_threshold=1.0, **UNPRUNED)
        try:
            got = decode_ctc(em, trie, lm, opts, inv)[0]
        except EmptyResult:
            if scored:
                bad.append(seed)
            continue
        if not scored or not got.finished or not _agrees(got, scored, tol):
            bad.append(seed)
    return bad


def s2s_oracle_mismatches(instances: int = 100, tol: float = 1e-6, seed0: int = 0) -> list[int]:
    bad = []
    for seed in range(seed0, seed0 + instances):
        r = random.Random(seed)
        depth = r.randint(1, 4)
        scorer, inv, lm = s2s_instance(seed, branching=3, depth=depth)
        alpha, gamma = r.uniform(0.0, 2.0), r.uniform(-5.0, 0.0)
        scored = s2s_exhaustive(scorer, inv, depth + 1, lm, alpha, gamma)
        opts = DecodeOptions(mode="lexfree_s2s", lm_weight=alpha, eos_penalty=gamma,
                             max_output_len=depth + 1, **UNPRUNED)
        got = decode_s2s(scorer, lm, opts, inv)[0]
        if not got.finished or not _agrees(got, scored, tol):
            bad.append(seed)
    return bad


def _ctc_top(seed: int, beam: int) -> float:
    em, inv, lex, trie, lm = ctc_instance(seed)
    r = random.Random(seed)
    opts = DecodeOptions(beam=beam, token_beam=1000, beam_threshold=math.inf, blank_threshold=1.0,
                         lm_weight=r.uniform(0.0, 2.0), word_insertion=r.uniform(-2.0, 2.0))
    try:
        return decode_ctc(em, trie, lm, opts, inv)[0].score
    except EmptyResult:
        return -math.inf


def _s2s_top(seed: int, beam: int) -> float:
    scorer, inv, lm = s2s_instance(seed, branching=3, depth=4)
    r = random.Random(seed)
    opts = DecodeOptions(mode="lexfree_s2s", beam=beam, token_beam=1000, beam_threshold=math.inf,
                         lm_weight=r.uniform(0.0, 2.0), eos_penalty=r.uniform(-5.0, 0.0), max_output_len=5)
    return decode_s2s(scorer, lm, opts, inv)[0].score


def beam_monotonicity_violations(instances: int = 50, beams=BEAMS) -> dict[str, list[tuple[int, int]]]:
    """(seed, beam) pairs where widening the beam lowered the top combined score."""
    out: dict[str, list[tuple[int, int]]] = {"ctc": [], "s2s": []}
    for name, top in (("ctc", _ctc_top), ("s2s", _s2s_top)):
        for seed in range(instances):
            prev = -math.inf
            for beam in beams:
                score = top(seed, beam)
                if score < prev - 1e-9:
                    out[name].append((seed, beam))
                prev = max(prev, score)
    return out


class PerfWorkload:
    """Lexicon CTC decode at production scale: V=10000 tokens, a 200k-word
    lexicon, a 3-gram LM over its 5000 most common words, beam 500."""

    V = 10_000
    WORDS = 200_000
    FRAMES = 1000

    def __init__(self, seed: int = 0):
        from asrdecode.lexicon import Lexicon, TokenInventory, build_trie
        from asrdecode.lm import train

        r = random.Random(seed)
        self.inventory = TokenInventory(["<blank>"] + [f"p{i}" for i in range(1, self.V)])
        lex = Lexicon(self.inventory)
        seen: set[tuple[int, ...]] = set()
        self.spelling: dict[str, tuple[int, ...]] = {}
        while len(self.spelling) < self.WORDS:
            sp = tuple(r.randrange(1, self.V) for _ in range(r.randint(2, 6)))
            if sp not in seen:
                seen.add(sp)
                word = f"w{len(self.spelling)}"
                lex.add(word, sp)
                self.spelling[word] = sp
        self.trie = build_trie(lex)
        self.common = list(self.spelling)[:5000]
        self.lm = train([[r.choice(self.common) for _ in range(r.randint(3, 15))] for _ in range(3000)], 3)
        self.opts = DecodeOptions(beam=500, token_beam=100, beam_threshold=100.0, lm_weight=0.5, word_insertion=0.5)
        self._rng = r

    def utterance(self, frames: int = FRAMES, noise: float = 0.3, seed: int = 1):
        """Emissions of exactly ``frames`` frames and the words they spell."""
        import numpy as np

        from asrdecode.emissions import EmissionMatrix, synth_emissions

        r = random.Random(seed)
        words, ids = [], []
        while 3 * len(ids) < frames:
            w = r.choice(self.common)
            words.append(w)
            ids.extend(self.spelling[w])
        em = synth_emissions(ids, self.inventory, noise=noise, seed=seed)
        values = em.values[:frames]
        if len(values) < frames:
            values = np.vstack([values, np.repeat(values[-1:], frames - len(values), axis=0)])
        return EmissionMatrix(values), words
