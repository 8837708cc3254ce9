import itertools
import math
import random
from collections import Counter

import pytest

from asrdecode.corpus import word_levenshtein
from asrdecode.evalkit import (
    AlignmentSegment,
    corpus_wer,
    perplexity_probe,
    probe_trials,
    read_alignments,
    segment_histogram,
    segment_shuffle,
    shuffle_transcript,
    wer,
)
from asrdecode.lm import train

WORDS = "a b c d e f".split()


def utterance(gaps, dur=0.3):
    segs, t = [], 0.0
    for i in range(len(gaps) + 1):
        segs.append(AlignmentSegment(f"w{i}", round(t, 6), dur))
        if i < len(gaps):
            t += dur + gaps[i]
    return segs


def markov_corpus(seed: int, sentences: int = 200):
    """Sentences from a sparse first-order chain, so word order matters."""
    r = random.Random(seed)
    vocab = [f"v{i}" for i in range(15)]
    nexts = {w: r.sample(vocab, 2) for w in vocab}
    out = []
    for _ in range(sentences):
        w = r.choice(vocab)
        s = [w]
        for _ in range(r.randint(4, 10)):
            w = r.choice(nexts[w])
            s.append(w)
        out.append(s)
    return out


def test_wer_examples():
    assert wer("a b c".split(), "a b c".split()).wer == 0.0
    b = wer("a b c".split(), "a x c".split())
    assert (b.substitutions, b.deletions, b.insertions) == (1, 0, 0)
    assert b.wer == pytest.approx(1 / 3)
    assert wer([], []).wer == 0.0
    assert wer([], ["a"]).wer == math.inf


def test_wer_prefers_substitution():
    b = wer(["a"], ["b"])
    assert (b.substitutions, b.deletions, b.insertions) == (1, 0, 0)


def test_wer_cost_is_levenshtein():
    r = random.Random(0)
    for _ in range(500):
        ref = [r.choice(WORDS) for _ in range(r.randint(0, 8))]
        hyp = [r.choice(WORDS) for _ in range(r.randint(0, 8))]
        b = wer(ref, hyp)
        assert b.errors == word_levenshtein(ref, hyp)
        assert len(ref) - b.deletions + b.insertions == len(hyp)


def test_corpus_wer_sums():
    total = corpus_wer([("a b".split(), "a".split()), ("c".split(), "c d".split())])
    assert (total.deletions, total.insertions, total.ref_len) == (1, 1, 3)


def test_shuffle_basics():
    assert shuffle_transcript(["x"], 5) == ["x"]
    s = "the cat sat on a mat".split()
    assert shuffle_transcript(s, 3) == shuffle_transcript(s, 3)
    assert sorted(shuffle_transcript(s, 3)) == sorted(s)


def test_shuffle_uniform_over_permutations():
    counts = Counter(tuple(shuffle_transcript(["a", "b", "c"], seed)) for seed in range(10_000))
    assert set(counts) == set(itertools.permutations("abc"))
    for c in counts.values():
        assert abs(c / 10_000 - 1 / 6) < 0.02
    chi2 = sum((c - 10_000 / 6) ** 2 / (10_000 / 6) for c in counts.values())
    assert chi2 < 20.5  # 5 dof, p = 0.001


def test_segment_gap_example():
    res = segment_shuffle(utterance([0.14, 0.05, 0.20]), seed=1)
    assert res.accepted
    assert [len(s) for s in res.segments] == [1, 2, 1]
    assert res.split_times == [pytest.approx(0.3 + 0.07), pytest.approx(0.3 * 3 + 0.14 + 0.05 + 0.10)]
    assert sorted(res.order) == [0, 1, 2]


def test_segment_boundary_gap_does_not_split():
    res = segment_shuffle(utterance([0.13, 0.13]))
    assert not res.accepted and res.reason == "single-segment"


def test_segment_rejects_long_segment():
    assert segment_shuffle(utterance([0.0] * 6)).reason == "single-segment"
    res = segment_shuffle(utterance([0.0] * 6 + [0.5]))
    assert not res.accepted and res.reason == "segment-too-long"


def test_segment_preserves_words_and_histogram():
    r = random.Random(2)
    results = []
    for seed in range(200):
        gaps = [r.choice([0.0, 0.05, 0.2, 0.4]) for _ in range(r.randint(0, 12))]
        utt = utterance(gaps)
        res = segment_shuffle(utt, seed=seed)
        results.append(res)
        if res.accepted:
            assert sorted(res.shuffled_words) == sorted(s.word for s in utt)
            assert all(len(s) <= 6 for s in res.segments)
    hist = segment_histogram(results)
    kept_words = sum(len(s) for r in results if r.accepted for s in r.segments)
    assert sum(k * v for k, v in hist.items()) == kept_words


def test_alignment_validation():
    with pytest.raises(ValueError):
        AlignmentSegment("x", 0.0, 0.0)
    with pytest.raises(ValueError):
        segment_shuffle([AlignmentSegment("a", 0.0, 0.5), AlignmentSegment("b", 0.2, 0.5)])
    parsed = read_alignments("u1\ta\t0.0\t0.3\nu1\tb\t0.5\t0.2\n")
    assert [s.word for s in parsed["u1"]] == ["a", "b"]


def test_probe_unigram_order_invariant():
    corpus = markov_corpus(1, 50)
    lm = train(corpus, 1)
    for seed in range(5):
        res = perplexity_probe(lm, corpus, seed)
        assert res.ppl_original == res.ppl_shuffled


def test_probe_original_untouched_by_seed():
    corpus = markov_corpus(2, 50)
    lm = train(corpus, 3)
    assert perplexity_probe(lm, corpus, 0).ppl_original == perplexity_probe(lm, corpus, 9).ppl_original


def test_probe_trigram_prefers_original():
    wins = 0
    for seed in range(20):
        corpus = markov_corpus(seed)
        lm = train(corpus, 3)
        res = perplexity_probe(lm, corpus, seed)
        wins += res.ppl_shuffled > res.ppl_original
    assert wins >= 19


def test_probe_trials_summary():
    corpus = markov_corpus(3, 60)
    summary = probe_trials(train(corpus, 3), corpus, seed=0, trials=5)
    assert summary["ppl_shuffled_mean"] > summary["ppl_original"]
    assert summary["ppl_shuffled_std"] >= 0
