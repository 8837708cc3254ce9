from .ctc import DecodeError, EmptyResult, decode_ctc, greedy_ctc, merge_hyps, prune
from .nbest import NBestEntry, NBestFormatError, char_length, dump_nbest, group_by_utterance, load_nbest
from .options import DecodeOptions, MergeRule, Mode
from .s2s import decode_s2s

__all__ = [
    "DecodeError",
    "DecodeOptions",
    "EmptyResult",
    "MergeRule",
    "Mode",
    "NBestEntry",
    "NBestFormatError",
    "char_length",
    "decode_ctc",
    "decode_s2s",
    "dump_nbest",
    "greedy_ctc",
    "group_by_utterance",
    "load_nbest",
    "merge_hyps",
    "prune",
]
