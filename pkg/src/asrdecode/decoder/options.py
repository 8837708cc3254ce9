from __future__ import annotations

import math
from dataclasses import dataclass, fields, replace
from enum import Enum


class Mode(str, Enum):
    LEXICON_CTC = "lexicon_ctc"
    LEXFREE_S2S = "lexfree_s2s"
    ZEROLM_CTC = "zerolm_ctc"
    ZEROLM_S2S = "zerolm_s2s"
    GREEDY = "greedy"

    @property
    def is_ctc(self) -> bool:
        return self in (Mode.LEXICON_CTC, Mode.ZEROLM_CTC, Mode.GREEDY)

    @property
    def zero_lm(self) -> bool:
        return self in (Mode.ZEROLM_CTC, Mode.ZEROLM_S2S)


class MergeRule(str, Enum):
    LOGADD = "logadd"
    MAX = "max"


@dataclass(frozen=True)
class DecodeOptions:
    beam: int = 500
    token_beam: int = 100
    beam_threshold: float = 100.0  # natural-log score gap
    lm_weight: float = 0.0
    word_insertion: float = 0.0
    eos_penalty: float = 0.0
    blank_threshold: float = 0.95
    mode: Mode = Mode.LEXICON_CTC
    max_output_len: int = 512
    nbest: int = 1
    merge_rule: MergeRule = MergeRule.LOGADD
    lm_end_transition: bool = True

    def __post_init__(self) -> None:
        object.__setattr__(self, "mode", Mode(self.mode))
        object.__setattr__(self, "merge_rule", MergeRule(self.merge_rule))
        if self.beam < 1 or self.token_beam < 1:
            raise ValueError("beam and token_beam must be >= 1")
        if not 0.0 < self.blank_threshold <= 1.0:
            raise ValueError("blank_threshold must be in (0, 1]")
        if self.nbest < 1 or self.nbest > self.beam:
            raise ValueError("nbest must be in [1, beam]")
        if self.max_output_len < 1:
            raise ValueError("max_output_len must be >= 1")
        if math.isnan(self.beam_threshold):
            raise ValueError("beam_threshold must not be NaN")

    @property
    def effective_lm_weight(self) -> float:
        return 0.0 if self.mode.zero_lm else self.lm_weight

    def with_params(self, **params) -> "DecodeOptions":
        known = {f.name for f in fields(self)}
        unknown = set(params) - known
        if unknown:
            raise ValueError(f"unknown decode parameters: {sorted(unknown)}")
        cast = {}
        for name, value in params.items():
            if name in ("beam", "token_beam", "nbest", "max_output_len"):
                value = int(value)
            cast[name] = value
        return replace(self, **cast)
