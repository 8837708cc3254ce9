from __future__ import annotations

import math
import random
import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from asrdecode.emissions import EmissionMatrix, ReplayScorer
from asrdecode.lexicon import Lexicon, TokenInventory, build_trie
from asrdecode.lm import load_arpa, train

TOY_ARPA = """\\data\\
ngram 1=3
ngram 2=1

\\1-grams:
-0.5\ta\t-0.3
-0.4\tb
-0.6\tc

\\2-grams:
-0.2\ta b

\\end\\
"""


@pytest.fixture
def toy_lm():
    return load_arpa(TOY_ARPA)


def random_log_rows(rng: np.random.Generator, rows: int, V: int, scale: float = 2.0) -> np.ndarray:
    logits = rng.normal(size=(rows, V)) * scale
    logits -= np.log(np.exp(logits).sum(axis=1, keepdims=True))
    return logits


def ctc_instance(seed: int, max_T: int = 6, max_V: int = 4, max_words: int = 5):
    """Random (emissions, inventory, lexicon, trie, word LM) for oracle tests."""
    r = random.Random(seed)
    rng = np.random.default_rng(seed)
    V = r.randint(2, max_V)
    T = r.randint(1, max_T)
    inv = TokenInventory(["<blank>"] + [f"t{i}" for i in range(1, V)])
    labels = list(range(1, V))
    lex = Lexicon(inv)
    names = [f"w{i}" for i in range(r.randint(1, max_words))]
    for name in names:
        for _ in range(20):
            sp = tuple(r.choice(labels) for _ in range(r.randint(1, 3)))
            if sp not in lex.entries.get(name, []):
                lex.add(name, sp)
                break
    # occasional homophone / second spelling
    if r.random() < 0.3 and len(names) > 1:
        sp = lex.entries[names[0]][0]
        if sp not in lex.entries[names[1]]:
            lex.add(names[1], sp)
    corpus = [[r.choice(names) for _ in range(r.randint(1, 4))] for _ in range(8)]
    lm = train(corpus, 2)
    values = random_log_rows(rng, T, V, scale=r.choice([1.0, 2.0, 3.0]))
    return EmissionMatrix(values), inv, lex, build_trie(lex), lm


def spellings_of(lex: Lexicon):
    return [(w, sp) for w, sp in lex.pairs()]


def s2s_instance(seed: int, branching: int = 3, depth: int = 4, with_lm: bool = True):
    """Replay scorer over ``branching`` tokens (EOS included) with every
    prefix up to ``depth`` scripted, plus a word-piece LM."""
    r = random.Random(seed)
    rng = np.random.default_rng(seed)
    pieces = ["_a", "b", "_c", "d", "_e"][: branching - 1]
    inv = TokenInventory(pieces + ["<eos>"], blank=None)
    V = len(inv)
    scorer = ReplayScorer(V)
    labels = [k for k in range(V) if k != inv.eos]

    def fill(prefix):
        scorer.set(prefix, random_log_rows(rng, 1, V, scale=r.choice([1.0, 2.0]))[0])
        if len(prefix) < depth:
            for k in labels:
                fill(prefix + (k,))

    fill(())
    lm = None
    if with_lm:
        corpus = [[r.choice(pieces) for _ in range(r.randint(1, 4))] for _ in range(6)]
        lm = train(corpus, 2, unit="wordpiece")
    return scorer, inv, lm


def close(a: float, b: float, tol: float = 1e-6) -> bool:
    return math.isclose(a, b, rel_tol=0.0, abs_tol=tol)


def pytest_terminal_summary(terminalreporter):
    from report import LINES

    if LINES:
        terminalreporter.section("acceptance criteria")
        for n in sorted(LINES):
            terminalreporter.write_line(LINES[n])
