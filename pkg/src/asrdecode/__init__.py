"""Decoding and self-training utilities for end-to-end speech recognition:
n-gram LMs, CTC / Seq2Seq beam search with shallow fusion, N-best rescoring,
hyperparameter search, corpus overlap filtering, and pseudo-labeling."""

__version__ = "0.1.0"
