"""Backoff n-gram language models: ARPA I/O, incremental scoring, training.

Probabilities are kept in log10 throughout, as in the ARPA format.  The
decoder converts to natural log where it fuses LM and acoustic scores.
"""

from __future__ import annotations

import io
import math
import re
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Sequence, TextIO

BOS = "<s>"
EOS = "</s>"
UNK = "<unk>"

DEFAULT_OOV_FLOOR = -10.0
DISCOUNT = 0.75
# log10 probability written for the sentence-begin unigram (never predicted).
BOS_LOG10 = -99.0


class ArpaError(ValueError):
    """Malformed ARPA input."""


class NoScorableEvents(ValueError):
    """Perplexity requested over a corpus with no in-vocabulary events."""


@dataclass(frozen=True)
class LmState:
    context: tuple[int, ...] = ()


@dataclass(frozen=True)
class NGramEntry:
    log10_prob: float
    log10_backoff: float = 0.0


@dataclass
class NGramModel:
    """An immutable-by-convention backoff model.

    ``entries[k - 1]`` maps k-gram id tuples to :class:`NGramEntry`.
    """

    max_order: int
    vocabulary: list[str]
    entries: list[dict[tuple[int, ...], NGramEntry]]
    unit: str = "word"
    oov_floor: float = DEFAULT_OOV_FLOOR
    _index: dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if self.max_order < 1:
            raise ValueError("max_order must be >= 1")
        for marker in (BOS, EOS, UNK):
            if marker not in self.vocabulary:
                self.vocabulary.append(marker)
        self._index = {w: i for i, w in enumerate(self.vocabulary)}
        if len(self._index) != len(self.vocabulary):
            raise ValueError("duplicate vocabulary entries")
        self.bos_id = self._index[BOS]
        self.eos_id = self._index[EOS]
        self.unk_id = self._index[UNK]

    # -- vocabulary -------------------------------------------------------

    def index(self, word: str) -> int:
        """Vocabulary id of ``word``; unknown words map to ``<unk>``."""
        return self._index.get(word, self.unk_id)

    def is_oov(self, word: str) -> bool:
        return word not in self._index or self._index[word] == self.unk_id

    def __contains__(self, word: str) -> bool:
        return word in self._index

    def ngrams(self) -> dict[tuple[str, ...], NGramEntry]:
        """All entries keyed by word tuples (independent of id assignment)."""
        return {
            tuple(self.vocabulary[i] for i in key): entry
            for table in self.entries
            for key, entry in table.items()
        }

    @property
    def counts(self) -> list[int]:
        return [len(e) for e in self.entries]

    # -- scoring ----------------------------------------------------------

    def _minimize(self, context: tuple[int, ...]) -> tuple[int, ...]:
        # A context with no entry has no extensions and no backoff weight
        # (ARPA prefix closure), so dropping its oldest word is exact.
        limit = self.max_order - 1
        if len(context) > limit:
            context = context[len(context) - limit:] if limit else ()
        while context and context not in self.entries[len(context) - 1]:
            context = context[1:]
        return context

    def score_token(self, state: LmState, token: int) -> tuple[float, LmState]:
        """log10 P(token | state) via the backoff recursion, plus the next state."""
        context = state.context
        backoff = 0.0
        while True:
            entry = self.entries[len(context)].get(context + (token,))
            if entry is not None:
                logp = backoff + entry.log10_prob
                break
            if not context:
                logp = backoff + self.oov_floor
                break
            ctx_entry = self.entries[len(context) - 1].get(context)
            if ctx_entry is not None:
                backoff += ctx_entry.log10_backoff
            context = context[1:]
        return logp, LmState(self._minimize(state.context + (token,)))

    def begin_state(self, with_bos: bool = True) -> LmState:
        return LmState(self._minimize((self.bos_id,))) if with_bos else LmState()

    def score_sentence(
        self, tokens: Sequence[str], add_sentence_markers: bool = True
    ) -> tuple[float, int]:
        """Total log10 probability of ``tokens`` and the number of OOV tokens."""
        total, oov, _ = self._sentence_events(tokens, add_sentence_markers)
        return math.fsum(lp for lp, _ in total), oov

    def _sentence_events(
        self, tokens: Sequence[str], add_sentence_markers: bool
    ) -> tuple[list[tuple[float, bool]], int, LmState]:
        state = self.begin_state(add_sentence_markers)
        events = []
        oov = 0
        for word in tokens:
            unknown = self.is_oov(word)
            oov += unknown
            logp, state = self.score_token(state, self.index(word))
            events.append((logp, unknown))
        if add_sentence_markers:
            logp, state = self.score_token(state, self.eos_id)
            events.append((logp, False))
        return events, oov, state


def perplexity(
    model: NGramModel,
    corpus: Iterable[Sequence[str]],
    add_sentence_markers: bool = True,
) -> float:
    """Corpus perplexity with unknown-word events left out of both sums."""
    known: list[float] = []
    for sentence in corpus:
        events, _, _ = model._sentence_events(sentence, add_sentence_markers)
        known.extend(lp for lp, unknown in events if not unknown)
    if not known:
        raise NoScorableEvents("corpus has no scorable (in-vocabulary) events")
    return 10.0 ** (-math.fsum(known) / len(known))


def sentence_log10(model: NGramModel, sentence: Sequence[str], add_sentence_markers: bool = True) -> float:
    return model.score_sentence(sentence, add_sentence_markers)[0]


# ---------------------------------------------------------------------------
# ARPA I/O
# ---------------------------------------------------------------------------

_COUNT_RE = re.compile(r"^ngram\s+(\d+)\s*=\s*(\d+)$")
_SECTION_RE = re.compile(r"^\\(\d+)-grams:$")


def load_arpa(source: TextIO | str, unit: str = "word", oov_floor: float = DEFAULT_OOV_FLOOR) -> NGramModel:
    """Parse ARPA text.  ``source`` is a text stream or the text itself."""
    if isinstance(source, str):
        source = io.StringIO(source)
    lines = (ln.strip() for ln in source)
    lineno = 0

    def next_line() -> str | None:
        nonlocal lineno
        for ln in lines:
            lineno += 1
            if ln:
                return ln
        return None

    line = next_line()
    while line is not None and line != "\\data\\":
        line = next_line()
    if line is None:
        raise ArpaError("missing \\data\\ header")

    declared: dict[int, int] = {}
    line = next_line()
    while line is not None and line.startswith("ngram"):
        m = _COUNT_RE.match(line)
        if not m:
            raise ArpaError(f"line {lineno}: malformed count line {line!r}")
        order, count = int(m.group(1)), int(m.group(2))
        if order in declared or order < 1:
            raise ArpaError(f"line {lineno}: bad order {order}")
        declared[order] = count
        line = next_line()
    if not declared:
        raise ArpaError("header declares no n-gram counts")
    max_order = max(declared)
    if sorted(declared) != list(range(1, max_order + 1)):
        raise ArpaError("header orders are not contiguous from 1")

    vocabulary: list[str] = []
    vocab_index: dict[str, int] = {}
    raw: list[list[tuple[tuple[str, ...], float, float]]] = [[] for _ in range(max_order)]
    seen_orders: set[int] = set()

    while line is not None and line != "\\end\\":
        m = _SECTION_RE.match(line)
        if not m:
            raise ArpaError(f"line {lineno}: expected section header, got {line!r}")
        order = int(m.group(1))
        if order > max_order or order < 1:
            raise ArpaError(f"line {lineno}: {order}-gram section exceeds declared max order {max_order}")
        if order in seen_orders:
            raise ArpaError(f"line {lineno}: duplicate {order}-gram section")
        seen_orders.add(order)
        line = next_line()
        while line is not None and not line.startswith("\\"):
            parts = line.split()
            if len(parts) == order + 1:
                backoff = 0.0
            elif len(parts) == order + 2:
                if order == max_order:
                    raise ArpaError(f"line {lineno}: backoff on highest-order n-gram")
                try:
                    backoff = float(parts[-1])
                except ValueError:
                    raise ArpaError(f"line {lineno}: non-numeric backoff {parts[-1]!r}") from None
            else:
                raise ArpaError(f"line {lineno}: expected {order}-gram entry, got {line!r}")
            try:
                prob = float(parts[0])
            except ValueError:
                raise ArpaError(f"line {lineno}: non-numeric probability {parts[0]!r}") from None
            if not math.isfinite(prob) or not math.isfinite(backoff):
                raise ArpaError(f"line {lineno}: non-finite value")
            words = tuple(parts[1:order + 1])
            if order == 1 and words[0] not in vocab_index:
                vocab_index[words[0]] = len(vocabulary)
                vocabulary.append(words[0])
            raw[order - 1].append((words, prob, backoff))
            line = next_line()
    if line is None:
        raise ArpaError("missing \\end\\ marker")

    model = NGramModel(max_order, vocabulary, [{} for _ in range(max_order)], unit=unit, oov_floor=oov_floor)
    for order in range(1, max_order + 1):
        if len(raw[order - 1]) != declared[order]:
            raise ArpaError(
                f"{order}-gram count mismatch: header declares {declared[order]}, "
                f"found {len(raw[order - 1])}"
            )
        table = model.entries[order - 1]
        for words, prob, backoff in raw[order - 1]:
            if order > 1 and any(w not in vocab_index for w in words):
                raise ArpaError(f"{order}-gram {' '.join(words)!r} uses a word with no unigram")
            key = tuple(model.index(w) for w in words)
            if key in table:
                raise ArpaError(f"duplicate {order}-gram {' '.join(words)!r}")
            if order > 1 and key[:-1] not in model.entries[order - 2]:
                raise ArpaError(f"{order}-gram {' '.join(words)!r} has no prefix entry")
            table[key] = NGramEntry(prob, backoff)
    return model


def save_arpa(model: NGramModel, sink: TextIO | None = None) -> str:
    """Write ARPA text; returns it and also writes to ``sink`` if given."""
    out = io.StringIO()
    out.write("\n\\data\\\n")
    for order, table in enumerate(model.entries, start=1):
        out.write(f"ngram {order}={len(table)}\n")
    for order, table in enumerate(model.entries, start=1):
        out.write(f"\n\\{order}-grams:\n")
        has_backoff = order < model.max_order
        for key in sorted(table, key=lambda k: [model.vocabulary[i] for i in k]):
            entry = table[key]
            words = " ".join(model.vocabulary[i] for i in key)
            if has_backoff:
                out.write(f"{entry.log10_prob!r}\t{words}\t{entry.log10_backoff!r}\n")
            else:
                out.write(f"{entry.log10_prob!r}\t{words}\n")
    out.write("\n\\end\\\n")
    text = out.getvalue()
    if sink is not None:
        sink.write(text)
    return text


# ---------------------------------------------------------------------------
# Training
# ---------------------------------------------------------------------------


def train(
    corpus: Iterable[Sequence[str]],
    max_order: int,
    prune_thresholds: Sequence[int] | None = None,
    unit: str = "word",
    discount: float = DISCOUNT,
) -> NGramModel:
    """Estimate an interpolated absolute-discounting backoff model.

    ``prune_thresholds[k - 1]`` drops k-grams whose raw count is at or below
    it.  Pruned unigrams are folded into ``<unk>``; a k-gram whose prefix was
    pruned is dropped too, which keeps the result prefix-closed.
    """
    if max_order < 1:
        raise ValueError("max_order must be >= 1")
    thresholds = list(prune_thresholds) if prune_thresholds is not None else [0] * max_order
    if len(thresholds) != max_order:
        raise ValueError(f"expected {max_order} prune thresholds, got {len(thresholds)}")
    if not 0.0 < discount < 1.0:
        raise ValueError("discount must be in (0, 1)")

    sentences = [list(s) for s in corpus]
    if not sentences:
        raise ValueError("empty training corpus")

    word_counts = Counter(w for s in sentences for w in s)
    for marker in (BOS, EOS):
        word_counts.pop(marker, None)
    kept_words = {w for w, c in word_counts.items() if c > thresholds[0] and w != UNK}

    vocabulary = [BOS, EOS, UNK] + sorted(kept_words)
    model = NGramModel(max_order, vocabulary, [{} for _ in range(max_order)], unit=unit)
    ids = [[model.bos_id] + [model.index(w) for w in s] + [model.eos_id] for s in sentences]

    counts: list[Counter] = [Counter() for _ in range(max_order)]
    for sent in ids:
        for i in range(1, len(sent)):
            for order in range(1, max_order + 1):
                if i - order + 1 < 0:
                    break
                counts[order - 1][tuple(sent[i - order + 1:i + 1])] += 1

    # Unigrams: discount observed counts, spread the freed mass uniformly
    # over every predictable word (everything but <s>).
    uni = counts[0]
    total = sum(uni.values())
    predictable = [i for i in range(len(vocabulary)) if i != model.bos_id]
    seen_mass = sum(c - discount for c in uni.values())
    floor = (1.0 - seen_mass / total) / len(predictable)
    probs: list[dict[tuple[int, ...], float]] = [{} for _ in range(max_order)]
    for i in predictable:
        c = uni.get((i,), 0)
        probs[0][(i,)] = (max(c - discount, 0.0) / total) + floor
    table = model.entries[0]
    for i in predictable:
        table[(i,)] = NGramEntry(math.log10(probs[0][(i,)]))
    table[(model.bos_id,)] = NGramEntry(BOS_LOG10)

    for order in range(2, max_order + 1):
        by_context: dict[tuple[int, ...], list[tuple[int, int]]] = defaultdict(list)
        context_totals: Counter = Counter()
        for gram, c in counts[order - 1].items():
            context_totals[gram[:-1]] += c
            if c > thresholds[order - 1] and gram[:-1] in model.entries[order - 2]:
                by_context[gram[:-1]].append((gram[-1], c))
        table = model.entries[order - 1]
        for context, followers in by_context.items():
            ctotal = context_totals[context]
            gamma = 1.0 - sum(c - discount for _, c in followers) / ctotal
            for word, c in followers:
                lower, _ = model.score_token(LmState(context[1:]), word)
                p = (c - discount) / ctotal + gamma * 10.0 ** lower
                table[context + (word,)] = NGramEntry(math.log10(p))
            parent = model.entries[order - 2]
            parent[context] = NGramEntry(parent[context].log10_prob, math.log10(gamma))
    return model


def uniform_model(words: Sequence[str], unit: str = "word") -> NGramModel:
    """Unigram model assigning every listed word the same probability."""
    logp = -math.log10(len(words))
    model = NGramModel(1, list(words), [{}], unit=unit)
    for w in words:
        model.entries[0][(model.index(w),)] = NGramEntry(logp)
    return model
