"""Lexicon-free, step-synchronous beam search over an autoregressive scorer."""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

import numpy as np

from ..emissions import NORM_TOL, SeqScorer
from ..lexicon import WORD_BOUNDARY, TokenInventory, join_word_pieces
from ..lm import LmState, NGramModel
from .ctc import LN10, DecodeError, EmptyResult
from .nbest import NBestEntry, ranking_key
from .options import DecodeOptions, Mode


@dataclass(slots=True)
class S2sHyp:
    tokens: tuple[int, ...]
    am: float
    lm: float
    lm_state: LmState
    score: float
    finished: bool = False


def _checked_row(scorer: SeqScorer, prefix: tuple[int, ...], V: int) -> list[float]:
    row = np.asarray(scorer.log_probs(prefix), dtype=np.float64)
    if row.shape != (V,):
        raise DecodeError(f"scorer returned {row.shape} for prefix {prefix}, expected ({V},)")
    if np.isnan(row).any() or np.isposinf(row).any():
        raise DecodeError(f"scorer returned non-finite values for prefix {prefix}")
    m = row.max()
    lse = m + math.log(float(np.exp(row - m).sum()))
    if abs(lse) > NORM_TOL:
        raise DecodeError(f"scorer row for prefix {prefix} is not normalized (logsumexp={lse:.4g})")
    return row.tolist()


def decode_s2s(
    scorer: SeqScorer,
    lm: NGramModel | None,
    opts: DecodeOptions,
    inventory: TokenInventory,
    utt_id: str = "",
    boundary: str = WORD_BOUNDARY,
) -> list[NBestEntry]:
    """Beam search with word-piece LM fusion and an end-of-sentence penalty.

    Emitting EOS adds ``eos_penalty`` (unscaled) and, when enabled, the LM
    end-of-sentence transition.  Word pieces are glued into words on output.
    """
    if opts.mode not in (Mode.LEXFREE_S2S, Mode.ZEROLM_S2S):
        raise DecodeError(f"decode_s2s does not handle mode {opts.mode.value}")
    if inventory.eos is None:
        raise DecodeError("inventory has no EOS token")
    V = len(inventory)
    if scorer.vocab_size != V:
        raise DecodeError(f"scorer vocabulary {scorer.vocab_size} != inventory size {V}")
    if lm is None and opts.mode is Mode.LEXFREE_S2S:
        raise DecodeError("lexfree_s2s decoding needs a language model")
    if lm is not None and lm.unit != "wordpiece":
        raise DecodeError(f"lexicon-free decoding needs a word-piece LM, got {lm.unit!r}")

    eos = inventory.eos
    alpha = opts.effective_lm_weight * LN10
    gamma = opts.eos_penalty
    token_beam = min(opts.token_beam, V)
    lm_ids = [lm.index(tok) for tok in inventory.tokens] if lm is not None else None
    lm_cache: dict[tuple[tuple[int, ...], int], tuple[float, LmState]] = {}

    def lm_step(state: LmState, lm_id: int) -> tuple[float, LmState]:
        key = (state.context, lm_id)
        hit = lm_cache.get(key)
        if hit is None:
            hit = lm.score_token(state, lm_id)
            lm_cache[key] = hit
        return hit

    start = lm.begin_state() if lm is not None else LmState()
    live = [S2sHyp((), 0.0, 0.0, start, 0.0)]
    finished: list[S2sHyp] = []
    # Future steps can only add <= max(gamma, 0) when LM terms are non-positive.
    can_stop_early = alpha >= 0.0
    upper_gain = max(gamma, 0.0)

    for _ in range(opts.max_output_len):
        if not live:
            break
        candidates: list[S2sHyp] = []
        for h in live:
            row = _checked_row(scorer, h.tokens, V)
            if token_beam < V:
                top = sorted(range(V), key=lambda k: (-row[k], k))[:token_beam]
            else:
                top = range(V)
            for tok in top:
                lp = row[tok]
                if lp == -math.inf:
                    continue
                if tok == eos:
                    lm_raw, score = h.lm, h.score + lp + gamma
                    if lm is not None and opts.lm_end_transition:
                        elp, _ = lm_step(h.lm_state, lm.eos_id)
                        lm_raw += elp
                        score += alpha * elp
                    candidates.append(S2sHyp(h.tokens, h.am + lp, lm_raw, h.lm_state, score, True))
                else:
                    if lm is not None:
                        wlp, nstate = lm_step(h.lm_state, lm_ids[tok])
                    else:
                        wlp, nstate = 0.0, h.lm_state
                    candidates.append(
                        S2sHyp(h.tokens + (tok,), h.am + lp, h.lm + wlp, nstate, h.score + lp + alpha * wlp)
                    )
        if not candidates:
            live = []
            break
        floor = max(c.score for c in candidates) - opts.beam_threshold
        candidates = [c for c in candidates if c.score >= floor]
        if len(candidates) > opts.beam:
            candidates = heapq.nlargest(opts.beam, candidates, key=lambda c: c.score)
        live = []
        for c in candidates:
            (finished if c.finished else live).append(c)
        if can_stop_early and live and len(finished) >= opts.nbest:
            worst_kept = heapq.nlargest(opts.nbest, (f.score for f in finished))[-1]
            if max(h.score for h in live) + upper_gain < worst_kept:
                live = []
                break

    complete = bool(finished)
    pool = finished if complete else live
    if not pool:
        raise EmptyResult("no hypothesis survived decoding")

    best: dict[tuple[str, ...], S2sHyp] = {}
    for h in pool:
        words = tuple(join_word_pieces(inventory.decode(h.tokens), boundary))
        cur = best.get(words)
        if cur is None or ranking_key(h.score, h.tokens) < ranking_key(cur.score, cur.tokens):
            best[words] = h
    ranked = sorted(best.items(), key=lambda kv: ranking_key(kv[1].score, kv[0]))
    return [
        NBestEntry(utt_id, words, h.am, h.lm, h.score, finished=complete)
        for words, h in ranked[: opts.nbest]
    ]
