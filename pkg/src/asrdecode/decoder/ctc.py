"""Greedy and lexicon-constrained beam-search decoding of CTC emissions."""

from __future__ import annotations

import heapq
import math
from operator import itemgetter
from typing import NamedTuple, Sequence

import numpy as np

from ..emissions import EmissionMatrix
from ..lexicon import LexiconTrie, TokenInventory, TrieNode
from ..lm import LmState, NGramModel
from .nbest import NBestEntry, ranking_key
from .options import DecodeOptions, MergeRule, Mode

LN10 = math.log(10.0)
_SCORE = itemgetter(0)


class DecodeError(ValueError):
    pass


class EmptyResult(DecodeError):
    """No hypothesis survived (e.g. no lexicon word fits the emissions)."""


def greedy_ctc(emissions: EmissionMatrix, inventory: TokenInventory) -> list[int]:
    if emissions.vocab != len(inventory):
        raise DecodeError(f"emission width {emissions.vocab} != inventory size {len(inventory)}")
    if inventory.blank is None:
        raise DecodeError("inventory has no blank token")
    best = emissions.values.argmax(axis=1).tolist()
    out = []
    prev = None
    for tok in best:
        if tok != prev and tok != inventory.blank:
            out.append(tok)
        prev = tok
    return out


def _logadd(a: float, b: float) -> float:
    if a < b:
        a, b = b, a
    return a + math.log1p(math.exp(b - a))


class CtcHyp(NamedTuple):
    """One beam entry.  ``words`` indexes the decoder's interned word history.

    The decoder keeps hypotheses as plain lists in this field order.
    """

    score: float
    am: float
    lm: float
    nwords: int
    lm_state: LmState
    node: TrieNode
    last: int
    words: int


class _WordHistory:
    """Interns word sequences as integers so hypothesis keys hash cheaply."""

    def __init__(self) -> None:
        self._ids: dict[tuple[int, str], int] = {}
        self.parent = [-1]
        self.word: list[str | None] = [None]

    def extend(self, hist: int, word: str) -> int:
        key = (hist, word)
        idx = self._ids.get(key)
        if idx is None:
            idx = len(self.parent)
            self._ids[key] = idx
            self.parent.append(hist)
            self.word.append(word)
        return idx

    def words(self, hist: int) -> tuple[str, ...]:
        out = []
        while hist > 0:
            out.append(self.word[hist])
            hist = self.parent[hist]
        return tuple(reversed(out))


def _absorb(cand: dict, key: tuple[int, int, int], entry: list, logadd: bool) -> None:
    """Merge ``entry`` into ``cand`` under ``key`` (trie node, last token, word history).

    Entries sharing a key share LM score and word count, so logadd on the
    acoustic part is logadd on the combined score.
    """
    cur = cand.get(key)
    if cur is None:
        cand[key] = entry
    elif logadd:
        am = _logadd(cur[1], entry[1])
        cur[0] += am - cur[1]
        cur[1] = am
    elif entry[0] > cur[0]:
        cur[0], cur[1] = entry[0], entry[1]


def merge_hyps(candidates: Sequence[CtcHyp], rule: MergeRule) -> list[CtcHyp]:
    cand: dict = {}
    logadd = MergeRule(rule) is MergeRule.LOGADD
    for h in candidates:
        _absorb(cand, (h.node.id, h.last, h.words), list(h), logadd)
    return [CtcHyp(*e) for e in cand.values()]


def prune(hyps: list, beam: int, threshold: float) -> list:
    """Threshold against the best score, then keep the top ``beam``."""
    if not hyps:
        return hyps
    floor = max(hyps, key=_SCORE)[0] - threshold
    kept = [h for h in hyps if h[0] >= floor]
    if len(kept) > beam:
        kept = heapq.nlargest(beam, kept, key=_SCORE)
    return kept


def decode_ctc(
    emissions: EmissionMatrix,
    trie: LexiconTrie,
    lm: NGramModel | None,
    opts: DecodeOptions,
    inventory: TokenInventory,
    utt_id: str = "",
) -> list[NBestEntry]:
    """Lexicon-constrained beam search with n-gram shallow fusion.

    Word LM scores and the insertion bonus apply when a trie node completes a
    word; nothing is scored for partial spellings.  Returns up to
    ``opts.nbest`` distinct transcripts, best first.
    """
    if opts.mode not in (Mode.LEXICON_CTC, Mode.ZEROLM_CTC):
        raise DecodeError(f"decode_ctc does not handle mode {opts.mode.value}")
    if emissions.vocab != len(inventory):
        raise DecodeError(f"emission width {emissions.vocab} != inventory size {len(inventory)}")
    if inventory.blank is None:
        raise DecodeError("inventory has no blank token")
    if lm is None and opts.mode is Mode.LEXICON_CTC:
        raise DecodeError("lexicon_ctc decoding needs a language model")
    if lm is not None and lm.unit != "word":
        raise DecodeError(f"lexicon decoding needs a word-level LM, got {lm.unit!r}")

    blank = inventory.blank
    alpha = opts.effective_lm_weight * LN10
    beta = opts.word_insertion
    logadd = opts.merge_rule is MergeRule.LOGADD
    log_blank_gate = math.log(opts.blank_threshold) if opts.blank_threshold < 1.0 else math.inf
    V = emissions.vocab
    token_beam = min(opts.token_beam, V)
    root = trie.root
    root_id = root.id
    history = _WordHistory()

    lm_cache: dict[tuple[tuple[int, ...], str], tuple[float, LmState]] = {}

    def lm_step(state: LmState, word: str) -> tuple[float, LmState]:
        key = (state.context, word)
        hit = lm_cache.get(key)
        if hit is None:
            hit = lm.score_token(state, lm.index(word))
            lm_cache[key] = hit
        return hit

    start_state = lm.begin_state() if lm is not None else LmState()
    # [score, am, lm_raw, nwords, lm_state, node, last, words], as in CtcHyp
    hyps: list[list] = [[0.0, 0.0, 0.0, 0, start_state, root, -1, 0]]

    for t in range(emissions.frames):
        row_arr = emissions.values[t].astype(np.float64)
        row = row_arr.tolist()
        blank_lp = row[blank]
        only_blank = blank_lp > log_blank_gate
        allowed: set[int] | None = None
        if not only_blank and token_beam < V:
            allowed = set(np.argpartition(-row_arr, token_beam - 1)[:token_beam].tolist())

        cand: dict[tuple[int, int, int], list] = {}
        get = cand.get

        for score, am, lm_raw, nwords, state, node, last, words in hyps:
            nid = node.id
            # blank and repeated-token extensions stay on the same node
            key = (nid, blank, words)
            cur = get(key)
            if cur is None:
                cand[key] = [score + blank_lp, am + blank_lp, lm_raw, nwords, state, node, blank, words]
            elif logadd:
                new_am = _logadd(cur[1], am + blank_lp)
                cur[0] += new_am - cur[1]
                cur[1] = new_am
            elif score + blank_lp > cur[0]:
                cur[0], cur[1] = score + blank_lp, am + blank_lp
            if only_blank:
                continue
            if last >= 0 and last != blank:
                lp = row[last]
                _absorb(cand, (nid, last, words), [score + lp, am + lp, lm_raw, nwords, state, node, last, words], logadd)
            children = node.children
            if allowed is None:
                toks = children
            elif len(children) <= token_beam:
                toks = children.keys() & allowed
            else:
                toks = [tok for tok in allowed if tok in children]
            for tok in toks:
                if tok == last:
                    continue
                child = children[tok]
                lp = row[tok]
                c_am = am + lp
                c_score = score + lp
                if child.children:
                    key = (child.id, tok, words)
                    cur = get(key)
                    if cur is None:
                        cand[key] = [c_score, c_am, lm_raw, nwords, state, child, tok, words]
                    else:
                        _absorb(cand, key, [c_score, c_am, lm_raw, nwords, state, child, tok, words], logadd)
                for word in child.words:
                    if lm is not None:
                        wlp, nstate = lm_step(state, word)
                    else:
                        wlp, nstate = 0.0, state
                    w_id = history.extend(words, word)
                    _absorb(cand, (root_id, tok, w_id),
                            [c_score + alpha * wlp + beta, c_am, lm_raw + wlp, nwords + 1, nstate, root, tok, w_id],
                            logadd)

        hyps = prune(list(cand.values()), opts.beam, opts.beam_threshold)

    hyps = [CtcHyp(*h) for h in hyps]
    finals = [h for h in hyps if h.node is root]
    complete = bool(finals)
    if not complete:
        # Fallback only: drop pending partial words when nothing ended on a boundary.
        finals = hyps
    if not finals:
        raise EmptyResult("no hypothesis survived decoding")

    grouped: dict[int, tuple[float, float, float]] = {}
    for h in finals:
        lm_raw, score = h.lm, h.score
        if opts.lm_end_transition and lm is not None:
            elp, _ = lm.score_token(h.lm_state, lm.eos_id)
            lm_raw += elp
            score += alpha * elp
        cur = grouped.get(h.words)
        if cur is None:
            grouped[h.words] = (h.am, lm_raw, score)
        elif logadd:
            am = _logadd(cur[0], h.am)
            grouped[h.words] = (am, lm_raw, cur[2] + (am - cur[0]))
        elif score > cur[2]:
            grouped[h.words] = (h.am, lm_raw, score)

    ranked = sorted(
        ((history.words(w), am, lm_raw, score) for w, (am, lm_raw, score) in grouped.items()),
        key=lambda r: ranking_key(r[3], r[0]),
    )
    return [
        NBestEntry(utt_id, words, am, lm_raw, score, finished=complete)
        for words, am, lm_raw, score in ranked[: opts.nbest]
    ]
