"""Command-line entry point: ``asrdecode <subcommand> ...``.

Exit codes: 0 success, 1 partial failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import Sequence

from . import corpus, evalkit, lm as lmmod, pipeline, rescore as rescoremod, tune
from .decoder import DecodeOptions, MergeRule, Mode, dump_nbest, load_nbest
from .emissions import save_emissions, synth_emissions
from .lexicon import BLANK, EOS_TOKEN, WORD_BOUNDARY, TokenInventory, build_trie, parse_lexicon

log = logging.getLogger("asrdecode")

EXIT_OK, EXIT_PARTIAL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# helpers
# ---------------------------------------------------------------------------


def _path(args: argparse.Namespace, p: str | None) -> Path | None:
    if p is None:
        return None
    path = Path(p)
    return path if path.is_absolute() or p == "-" else Path(args.root) / path


def _read_text(args, p: str) -> str:
    if p == "-":
        return sys.stdin.read()
    path = _path(args, p)
    if not path.exists():
        raise UsageError(f"missing input file: {p}")
    return path.read_text(encoding="utf-8")


def _write_text(args, p: str | None, text: str) -> None:
    if p is None or p == "-":
        sys.stdout.write(text)
    else:
        out = _path(args, p)
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(text, encoding="utf-8")


def _sentences(text: str) -> list[list[str]]:
    """Corpus lines; a leading ``utt_id<TAB>`` is stripped when present."""
    out = []
    for line in text.splitlines():
        if "\t" in line:
            line = line.split("\t", 1)[1]
        words = line.split()
        if words:
            out.append(words)
    return out


def _load_lm(args, p: str | None, unit: str) -> lmmod.NGramModel | None:
    if p is None:
        return None
    return lmmod.load_arpa(_read_text(args, p), unit=unit)


def _inventory(args) -> TokenInventory:
    return TokenInventory(_read_text(args, args.tokens).splitlines(), blank=args.blank, eos=args.eos)


def _decode_options(args) -> DecodeOptions:
    return DecodeOptions(
        beam=args.beam,
        token_beam=args.token_beam,
        beam_threshold=args.beam_threshold,
        lm_weight=args.lm_weight,
        word_insertion=args.word_insertion,
        eos_penalty=args.eos_penalty,
        blank_threshold=args.blank_threshold,
        mode=Mode(args.mode),
        max_output_len=args.max_output_len,
        nbest=args.nbest,
        merge_rule=MergeRule(args.merge_rule),
        lm_end_transition=not args.no_lm_end,
    )


def _decoder(args) -> pipeline.Decoder:
    inv = _inventory(args)
    opts = _decode_options(args)
    trie = None
    if args.lexicon:
        trie = build_trie(parse_lexicon(_read_text(args, args.lexicon), inv))
    unit = "word" if opts.mode.is_ctc else "wordpiece"
    return pipeline.Decoder(inv, opts, trie, _load_lm(args, args.lm, unit), Path(args.root), args.word_boundary)


def _manifest(args, p: str) -> list[pipeline.ManifestRow]:
    return pipeline.read_manifest(_read_text(args, p))


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_lm_train(args) -> int:
    sentences = _sentences(_read_text(args, args.corpus))
    if args.prune:
        thresholds = [int(x) for x in args.prune.split(",")]
    else:
        thresholds = [0] * args.order
    model = lmmod.train(sentences, args.order, thresholds, unit=args.unit)
    _write_text(args, args.output, lmmod.save_arpa(model))
    log.info("trained %d-gram model, counts %s", args.order, model.counts)
    return EXIT_OK


def cmd_lm_perplexity(args) -> int:
    model = _load_lm(args, args.lm, args.unit)
    sentences = _sentences(_read_text(args, args.corpus))
    ppl = lmmod.perplexity(model, sentences, add_sentence_markers=not args.no_markers)
    oov = sum(model.score_sentence(s, False)[1] for s in sentences)
    print(f"perplexity\t{ppl:.4f}\nsentences\t{len(sentences)}\noov\t{oov}")
    return EXIT_OK


def cmd_decode(args) -> int:
    decoder = _decoder(args)
    rows = _manifest(args, args.manifest)
    result = pipeline.decode_manifest(decoder, rows, args.workers)
    entries = [e for utt in sorted(result.nbest) for e in result.nbest[utt]]
    _write_text(args, args.output, dump_nbest(entries))
    for utt, err in result.errors.items():
        print(f"{utt}\t{err}", file=sys.stderr)
    return EXIT_PARTIAL if result.errors else EXIT_OK


def cmd_pseudo_label(args) -> int:
    decoder = _decoder(args)
    rows = _manifest(args, args.manifest)
    result = pipeline.pseudo_label(decoder, rows, args.workers)
    out = _LinesBuffer()
    pipeline.write_labels(result, out)
    _write_text(args, args.output, out.text())
    if args.errors:
        _write_text(args, args.errors, "".join(f"{u}\t{e}\n" for u, e in result.errors.items()))
    labeled = {u: list(es[0].transcript) for u, es in result.nbest.items()}
    if any(r.reference is not None for r in rows):
        b = pipeline.manifest_wer(rows, labeled)
        print(f"labeled {len(result.nbest)}/{len(rows)}; WER vs reference {100 * b.wer:.2f}", file=sys.stderr)
    else:
        print(f"labeled {len(result.nbest)}/{len(rows)}", file=sys.stderr)
    return EXIT_PARTIAL if result.errors else EXIT_OK


class _LinesBuffer:
    def __init__(self) -> None:
        self.parts: list[str] = []

    def write(self, s: str) -> None:
        self.parts.append(s)

    def text(self) -> str:
        return "".join(self.parts)


def _score_source(args, model_path: str | None, scores_path: str | None):
    if model_path and scores_path:
        raise UsageError("give either an ARPA model or a score file per LM, not both")
    if model_path:
        return _load_lm(args, model_path, "word")
    if scores_path:
        return rescoremod.read_external_scores(_read_text(args, scores_path))
    return None


def cmd_rescore(args) -> int:
    entries = load_nbest(_read_text(args, args.nbest))
    scored = rescoremod.attach_scores(
        entries,
        _score_source(args, args.lm1, args.lm1_scores),
        _score_source(args, args.lm2, args.lm2_scores),
    )
    w = rescoremod.RescoreWeights(args.lm1_weight, args.lm2_weight, args.length_weight)
    _write_text(args, args.output, dump_nbest(rescoremod.rescore(scored, w)))
    return EXIT_OK


def _resolve_space(args) -> tune.SearchSpace:
    catalog = tune.builtin_spaces()
    if args.space in catalog:
        return catalog[args.space]
    path = _path(args, args.space)
    if path is None or not path.exists():
        raise UsageError(f"unknown search space {args.space!r} (builtin: {', '.join(sorted(catalog))})")
    return tune.read_space(path.read_text(encoding="utf-8"))


class DecodeObjective:
    """Corpus WER of a manifest decoded with trial parameters."""

    def __init__(self, decoder: pipeline.Decoder, rows: Sequence[pipeline.ManifestRow]):
        self.decoder = decoder
        self.rows = [r for r in rows if r.reference is not None]
        if not self.rows:
            raise UsageError("tuning manifest has no reference transcripts")

    def __call__(self, params: dict) -> float | dict[str, float]:
        opts = self.decoder.opts.with_params(**params)
        result = pipeline.decode_manifest(self.decoder, self.rows, 1, opts)
        if result.errors:
            raise RuntimeError(f"{len(result.errors)} utterances failed")
        hyps = {u: list(es[0].transcript) for u, es in result.nbest.items()}
        sources = sorted({r.source or "" for r in self.rows})
        if len(sources) < 2:
            return pipeline.manifest_wer(self.rows, hyps).wer
        # merged manifests are scored per source; the trial WER is their mean
        return {
            src or "untagged": pipeline.manifest_wer([r for r in self.rows if (r.source or "") == src], hyps).wer
            for src in sources
        }


class RescoreObjective:
    """Corpus WER of the rescored top-1 against references."""

    def __init__(self, scored, references: dict[str, list[str]]):
        self.scored = scored
        self.references = references

    def __call__(self, params: dict) -> float:
        w = rescoremod.RescoreWeights(params["lm1"], params["lm2"], params["length"])
        top = rescoremod.best_per_utterance(rescoremod.rescore(self.scored, w))
        pairs = ((ref, list(top[u].transcript) if u in top else []) for u, ref in self.references.items())
        return evalkit.corpus_wer(pairs).wer


def cmd_tune(args) -> int:
    space = _resolve_space(args)
    plans = tune.plan(space, args.trials, args.seed)
    if args.dry_run:
        print(f"{len(plans)} planned evaluations")
        return EXIT_OK
    if args.nbest_file:
        entries = load_nbest(_read_text(args, args.nbest_file))
        scored = rescoremod.attach_scores(
            entries,
            _score_source(args, args.lm1, args.lm1_scores),
            _score_source(args, args.lm2, args.lm2_scores),
        )
        if not args.references:
            raise UsageError("rescoring search needs --references")
        objective = RescoreObjective(scored, pipeline.read_labels(_read_text(args, args.references)))
    else:
        if not args.manifest or not args.tokens:
            raise UsageError("decoding search needs --manifest and --tokens (or --nbest-file for rescoring)")
        objective = DecodeObjective(_decoder(args), _manifest(args, args.manifest))
    if space.is_grid:
        results = tune.grid_search(space.params, objective, args.workers)
    else:
        results = tune.random_search(space, args.trials or space.trials or 128, args.seed, objective, args.workers)
    out = _LinesBuffer()
    tune.write_results(results, out)
    _write_text(args, args.output, out.text())
    failed = sum(r.error is not None for r in results)
    return EXIT_PARTIAL if failed == len(results) else EXIT_OK


def cmd_corpus_filter(args) -> int:
    books = corpus.read_titles(_read_text(args, args.corpus_titles))
    held = corpus.read_titles(_read_text(args, args.held_out_titles))
    verdicts = corpus.read_verdicts(_read_text(args, args.verdicts)) if args.verdicts else None
    params = corpus.FuzzyMatchParams(args.len_ratio, args.dist_ratio)
    result = corpus.filter_corpus(books, held, params, verdicts)
    out_dir = _path(args, args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "kept.txt").write_text("".join(f"{b}\n" for b in result.kept), encoding="utf-8")
    (out_dir / "removed.tsv").write_text(
        "".join(f"{b}\t{stage}\n" for b, stage in sorted(result.removed.items())), encoding="utf-8"
    )
    with open(out_dir / "pending.tsv", "w", encoding="utf-8") as f:
        corpus.write_pending(result.pending, f)
    print(f"kept {len(result.kept)}\tremoved {len(result.removed)}\tpending {len(result.pending)}")
    return EXIT_OK


def _paired_transcripts(ref_text: str, hyp_text: str) -> list[tuple[list[str], list[str]]]:
    ref_lines = [ln for ln in ref_text.splitlines() if ln.strip()]
    hyp_lines = [ln for ln in hyp_text.splitlines() if ln.strip()]
    if all("\t" in ln for ln in ref_lines + hyp_lines) and ref_lines:
        refs = pipeline.read_labels("\n".join(ref_lines))
        hyps = pipeline.read_labels("\n".join(hyp_lines))
        return [(refs[u], hyps.get(u, [])) for u in sorted(refs)]
    if len(ref_lines) != len(hyp_lines):
        raise UsageError(f"reference has {len(ref_lines)} lines, hypothesis {len(hyp_lines)}")
    return [(r.split(), h.split()) for r, h in zip(ref_lines, hyp_lines)]


def cmd_wer(args) -> int:
    b = evalkit.corpus_wer(_paired_transcripts(_read_text(args, args.reference), _read_text(args, args.hypothesis)))
    print(f"{100 * b.wer:.2f}")
    print(f"S={b.substitutions} D={b.deletions} I={b.insertions} N={b.ref_len}")
    return EXIT_OK


def cmd_shuffle(args) -> int:
    if args.alignments:
        utts = evalkit.read_alignments(_read_text(args, args.input))
        results = {}
        lines = []
        for i, utt in enumerate(sorted(utts)):
            r = evalkit.segment_shuffle(utts[utt], args.min_gap, args.max_segment_words, args.seed * 1_000_003 + i)
            results[utt] = r
            if r.accepted:
                lines.append(f"{utt}\t{' '.join(r.shuffled_words)}\n")
        _write_text(args, args.output, "".join(lines))
        hist = evalkit.segment_histogram(results.values())
        kept = sum(r.accepted for r in results.values())
        print(f"kept {kept}/{len(results)}", file=sys.stderr)
        for n, c in hist.items():
            print(f"segment_words={n}\t{c}", file=sys.stderr)
        return EXIT_OK
    lines = []
    for i, line in enumerate(_read_text(args, args.input).splitlines()):
        utt, sep, text = line.partition("\t")
        if not sep:
            utt, text = "", line
        shuffled = " ".join(evalkit.shuffle_transcript(text.split(), args.seed * 1_000_003 + i))
        lines.append(f"{utt}\t{shuffled}\n" if sep else shuffled + "\n")
    _write_text(args, args.output, "".join(lines))
    return EXIT_OK


def cmd_probe(args) -> int:
    model = _load_lm(args, args.lm, args.unit)
    sentences = _sentences(_read_text(args, args.corpus))
    rows = ["trial\tppl_original\tppl_shuffled"]
    for k in range(args.trials):
        r = evalkit.perplexity_probe(model, sentences, args.seed + k)
        rows.append(f"{k}\t{r.ppl_original:.6f}\t{r.ppl_shuffled:.6f}")
    if args.per_sentence:
        r = evalkit.perplexity_probe(model, sentences, args.seed)
        rows.append("sentence\tlog10_original\tlog10_shuffled")
        rows += [f"{i}\t{a!r}\t{b!r}" for i, (a, b) in enumerate(zip(r.original_log10, r.shuffled_log10))]
    _write_text(args, args.output, "\n".join(rows) + "\n")
    return EXIT_OK


def cmd_chunk(args) -> int:
    chunks = pipeline.chunk_intervals(pipeline.read_intervals(_read_text(args, args.intervals)), args.max_chunk)
    _write_text(args, args.output, "".join(f"{c.start!r}\t{c.end!r}\t{len(c.pieces)}\n" for c in chunks))
    return EXIT_OK


def cmd_merge(args) -> int:
    named = []
    for spec in args.manifests:
        name, sep, p = spec.partition("=")
        if not sep:
            name, p = Path(spec).stem, spec
        named.append((name, _manifest(args, p)))
    out = _LinesBuffer()
    pipeline.write_manifest(pipeline.merge_manifests(named), out)
    _write_text(args, args.output, out.text())
    return EXIT_OK


def cmd_synth(args) -> int:
    inv = _inventory(args)
    rows = []
    out_dir = _path(args, args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    lexicon = parse_lexicon(_read_text(args, args.lexicon), inv) if args.lexicon else None
    for i, line in enumerate(_read_text(args, args.transcripts).splitlines()):
        if not line.strip():
            continue
        utt, _, text = line.partition("\t")
        words = text.split()
        if lexicon is not None:
            ids = [t for w in words for t in lexicon.entries[w][0]]
        else:
            ids = inv.encode(words)
        m = synth_emissions(ids, inv, args.noise, args.frames_per_token, args.seed * 1_000_003 + i)
        name = f"{utt}.emat"
        save_emissions(m, out_dir / name)
        rows.append(pipeline.ManifestRow(utt, str(Path(args.out_dir) / name), " ".join(words)))
    out = _LinesBuffer()
    pipeline.write_manifest(rows, out)
    _write_text(args, args.output, out.text())
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--root", default=".", help="base directory for relative paths")
    p.add_argument("--config", help="key=value preset file supplying flag defaults")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("-o", "--output", help="output file (default stdout)")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def _decode_flags(p: argparse.ArgumentParser, tokens_required: bool = True) -> None:
    d = DecodeOptions()
    p.add_argument("--tokens", required=tokens_required, help="token inventory, one token per line")
    p.add_argument("--lexicon", help="lexicon file (word TAB tokens)")
    p.add_argument("--lm", help="ARPA language model")
    p.add_argument("--blank", default=BLANK)
    p.add_argument("--eos", default=EOS_TOKEN)
    p.add_argument("--word-boundary", default=WORD_BOUNDARY)
    p.add_argument("--mode", default=d.mode.value, choices=[m.value for m in Mode])
    p.add_argument("--beam", type=int, default=d.beam)
    p.add_argument("--token-beam", type=int, default=d.token_beam)
    p.add_argument("--beam-threshold", type=float, default=d.beam_threshold)
    p.add_argument("--lm-weight", type=float, default=d.lm_weight)
    p.add_argument("--word-insertion", type=float, default=d.word_insertion)
    p.add_argument("--eos-penalty", type=float, default=d.eos_penalty)
    p.add_argument("--blank-threshold", type=float, default=d.blank_threshold)
    p.add_argument("--max-output-len", type=int, default=d.max_output_len)
    p.add_argument("--nbest", type=int, default=d.nbest)
    p.add_argument("--merge-rule", default=d.merge_rule.value, choices=[m.value for m in MergeRule])
    p.add_argument("--no-lm-end", action="store_true", help="skip the LM end-of-sentence transition")


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(prog="asrdecode", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("lm-train", parents=[common], help="train a backoff n-gram LM")
    p.add_argument("--corpus", required=True)
    p.add_argument("--order", type=int, default=4)
    p.add_argument("--prune", help="comma-separated per-order count thresholds, e.g. 0,0,0,0,1,2")
    p.add_argument("--unit", default="word", choices=["word", "wordpiece"])
    p.set_defaults(func=cmd_lm_train)

    p = sub.add_parser("lm-perplexity", parents=[common], help="OOV-excluded corpus perplexity")
    p.add_argument("--lm", required=True)
    p.add_argument("--corpus", required=True)
    p.add_argument("--unit", default="word", choices=["word", "wordpiece"])
    p.add_argument("--no-markers", action="store_true")
    p.set_defaults(func=cmd_lm_perplexity)

    p = sub.add_parser("decode", parents=[common], help="beam-search decode a manifest to an N-best TSV")
    p.add_argument("--manifest", required=True)
    _decode_flags(p)
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("pseudo-label", parents=[common], help="write top-1 transcripts for a manifest")
    p.add_argument("--manifest", required=True)
    p.add_argument("--errors", help="error report TSV")
    _decode_flags(p)
    p.set_defaults(func=cmd_pseudo_label)

    p = sub.add_parser("rescore", parents=[common], help="reorder an N-best TSV")
    p.add_argument("--nbest", required=True)
    for k in ("lm1", "lm2"):
        p.add_argument(f"--{k}", help="ARPA model scored in-process")
        p.add_argument(f"--{k}-scores", help="external score TSV: utt_id, rank, log_prob")
        p.add_argument(f"--{k}-weight", type=float, default=0.0)
    p.add_argument("--length-weight", type=float, default=0.0)
    p.set_defaults(func=cmd_rescore)

    p = sub.add_parser("tune", parents=[common], help="random/grid hyperparameter search")
    p.add_argument("--space", required=True, help="builtin space name or space file")
    p.add_argument("--trials", type=int)
    p.add_argument("--dry-run", action="store_true")
    p.add_argument("--manifest")
    p.add_argument("--nbest-file", help="N-best TSV to tune rescoring weights on")
    p.add_argument("--references")
    for k in ("lm1", "lm2"):
        p.add_argument(f"--{k}")
        p.add_argument(f"--{k}-scores")
    _decode_flags(p, tokens_required=False)
    p.set_defaults(func=cmd_tune)

    p = sub.add_parser("corpus-filter", parents=[common], help="remove books overlapping held-out titles")
    p.add_argument("--corpus-titles", required=True)
    p.add_argument("--held-out-titles", required=True)
    p.add_argument("--verdicts")
    p.add_argument("--len-ratio", type=float, default=0.75)
    p.add_argument("--dist-ratio", type=float, default=0.3)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_corpus_filter)

    p = sub.add_parser("wer", parents=[common], help="word error rate of hypothesis vs reference")
    p.add_argument("reference")
    p.add_argument("hypothesis")
    p.set_defaults(func=cmd_wer)

    p = sub.add_parser("shuffle", parents=[common], help="shuffle transcripts or alignment segments")
    p.add_argument("input")
    p.add_argument("--alignments", action="store_true", help="input is an alignment TSV")
    p.add_argument("--min-gap", type=float, default=evalkit.SPLIT_GAP_S)
    p.add_argument("--max-segment-words", type=int, default=evalkit.MAX_SEGMENT_WORDS)
    p.set_defaults(func=cmd_shuffle)

    p = sub.add_parser("probe", parents=[common], help="original vs shuffled perplexity")
    p.add_argument("--lm", required=True)
    p.add_argument("--corpus", required=True)
    p.add_argument("--unit", default="word", choices=["word", "wordpiece"])
    p.add_argument("--trials", type=int, default=1)
    p.add_argument("--per-sentence", action="store_true")
    p.set_defaults(func=cmd_probe)

    p = sub.add_parser("chunk", parents=[common], help="pack speech intervals into bounded chunks")
    p.add_argument("intervals")
    p.add_argument("--max-chunk", type=float, default=pipeline.MAX_CHUNK_S)
    p.set_defaults(func=cmd_chunk)

    p = sub.add_parser("merge", parents=[common], help="concatenate manifests, tagging the source")
    p.add_argument("manifests", nargs="+", help="NAME=PATH or PATH")
    p.set_defaults(func=cmd_merge)

    p = sub.add_parser("synth", parents=[common], help="synthesize emissions for transcripts")
    p.add_argument("transcripts", help="utt_id TAB transcript lines")
    p.add_argument("--tokens", required=True)
    p.add_argument("--lexicon", help="spell words with the first lexicon spelling")
    p.add_argument("--blank", default=BLANK)
    p.add_argument("--eos", default=EOS_TOKEN)
    p.add_argument("--noise", type=float, default=0.0)
    p.add_argument("--frames-per-token", type=int, default=3)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_synth)
    return parser


def _read_config(path: Path) -> dict[str, str]:
    values = {}
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise UsageError(f"{path}:{lineno}: expected key=value")
        values[key.strip().replace("-", "_")] = value.strip()
    return values


def _apply_config(parser: argparse.ArgumentParser, argv: list[str]) -> list[str]:
    """Turn ``--config`` presets into explicit flags placed before user flags."""
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    pre.add_argument("--root", default=".")
    known, _ = pre.parse_known_args(argv)
    if not known.config or not argv:
        return argv
    cfg_path = Path(known.config)
    if not cfg_path.is_absolute():
        cfg_path = Path(known.root) / cfg_path
    if not cfg_path.exists():
        raise UsageError(f"missing config file: {known.config}")
    extra = []
    for key, value in _read_config(cfg_path).items():
        flag = "--" + key.replace("_", "-")
        if value.lower() in ("true", "yes") :
            extra.append(flag)
        elif value.lower() in ("false", "no"):
            continue
        else:
            extra += [flag, value]
    return [argv[0], *extra, *argv[1:]]


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        argv = _apply_config(parser, argv)
    except UsageError as exc:
        print(f"asrdecode: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"asrdecode: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, OSError, KeyError) as exc:
        print(f"asrdecode: {args.command} failed: {exc}", file=sys.stderr)
        return EXIT_PARTIAL


if __name__ == "__main__":
    sys.exit(main())
