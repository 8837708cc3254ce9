import subprocess
import sys

import pytest

import workspace
from asrdecode.cli import EXIT_OK, EXIT_PARTIAL, EXIT_USAGE, main
from workspace import DECODE, capture


@pytest.fixture(scope="module")
def ws(tmp_path_factory):
    root = workspace.build(tmp_path_factory.mktemp("cli"))
    workspace.run(root, "synth", "transcripts.tsv", "--tokens", "tokens.txt", "--lexicon", "lexicon.txt",
                  "--noise", "0.5", "--seed", "1", "--out-dir", "noisy", "-o", "noisy.tsv")
    return root


@pytest.mark.parametrize("name", sorted(workspace.COMMANDS))
def test_subcommand_is_deterministic(ws, name):
    first = workspace.snapshot(ws, name)
    assert first[0] == EXIT_OK, first[2]
    assert first[1] or first[3]
    assert workspace.snapshot(ws, name) == first


def test_zerolm_mode_equals_zero_weights(ws):
    common = ["decode", *DECODE[:-2], "--manifest", "noisy.tsv", "--nbest", "5"]
    zero = capture(ws, [*common, "--mode", "zerolm_ctc"])
    weighted = capture(ws, [*common, "--mode", "lexicon_ctc", "--lm-weight", "0", "--word-insertion", "0"])
    assert zero[0] == weighted[0] == EXIT_OK
    assert zero[1] == weighted[1]


def test_zerolm_without_lm_keeps_transcripts_and_am_scores(ws):
    def columns(text):
        return [(f[0], f[1], f[4]) for f in (ln.split("\t") for ln in text.splitlines()[1:])]

    args = ["decode", "--tokens", "tokens.txt", "--lexicon", "lexicon.txt", "--manifest", "noisy.tsv", "--nbest", "5"]
    bare = capture(ws, [*args, "--mode", "zerolm_ctc"])
    with_lm = capture(ws, [*args, "--lm", "lm.arpa", "--mode", "zerolm_ctc"])
    assert columns(bare[1]) == columns(with_lm[1])


def test_wer_of_identical_files(ws):
    code, out, _ = capture(ws, ["wer", "transcripts.tsv", "transcripts.tsv"])
    assert code == EXIT_OK
    assert out.splitlines()[0] == "0.00"


def test_wer_plain_lines_length_mismatch(ws):
    (ws / "r.txt").write_text("a b\nc\n")
    (ws / "h.txt").write_text("a b\n")
    assert capture(ws, ["wer", "r.txt", "h.txt"])[0] == EXIT_USAGE


def test_rescore_grid_dry_run(ws):
    code, out, _ = capture(ws, ["tune", "--space", "rescore-ctc-grid", "--dry-run"])
    assert code == EXIT_OK
    assert out.split()[0] == "847"


def test_tune_on_nbest(ws):
    code, _, err = capture(ws, ["tune", "--space", "rescore-s2s-random", "--trials", "5", "--nbest-file",
                                "nbest.tsv", "--lm1", "lm.arpa", "--references", "transcripts.tsv",
                                "-o", "rt.tsv"])
    assert code == EXIT_OK, err
    lines = (ws / "rt.tsv").read_text().splitlines()
    assert len(lines) == 6


def test_tune_reports_wer_per_merged_source(ws):
    rows = (ws / "manifest.tsv").read_text().splitlines()
    (ws / "dev_a.tsv").write_text("\n".join(rows[:6]) + "\n")
    (ws / "dev_b.tsv").write_text("\n".join(rows[6:]) + "\n")
    workspace.run(ws, "merge", "clean=dev_a.tsv", "other=dev_b.tsv", "-o", "dev.tsv")
    code, _, err = capture(ws, ["tune", "--space", "space.txt", *DECODE, "--manifest", "dev.tsv", "-o", "split.tsv"])
    assert code == EXIT_OK, err
    header, *lines = (ws / "split.tsv").read_text().splitlines()
    assert "wer_clean" in header.split("\t") and "wer_other" in header.split("\t")
    assert len(lines) == 3


def test_pseudo_label_wer_reported(ws):
    code, _, err = capture(ws, ["pseudo-label", *DECODE, "--manifest", "manifest.tsv", "-o", "pl.tsv"])
    assert code == EXIT_OK
    assert "WER vs reference 0.00" in err
    assert workspace.run(ws, "lm-train", "--corpus", "pl.tsv", "--order", "3", "-o", "pl.arpa") == 0


def test_partial_failure_exit_code(ws):
    manifest = (ws / "manifest.tsv").read_text() + "ghost\tnowhere.emat\n"
    (ws / "partial.tsv").write_text(manifest)
    code, out, err = capture(ws, ["decode", *DECODE, "--manifest", "partial.tsv"])
    assert code == EXIT_PARTIAL
    assert "ghost" in err
    assert "utt000" in out


@pytest.mark.parametrize(
    "argv",
    [
        [],
        ["nope"],
        ["decode", "--manifest", "manifest.tsv"],
        ["lm-train", "--corpus", "missing.txt"],
        ["decode", *DECODE, "--manifest", "manifest.tsv", "--beam", "zero"],
        ["tune", "--space", "no-such-space", "--dry-run"],
        ["lm-train", "--corpus", "corpus.txt", "--config", "missing.cfg"],
    ],
    ids=["empty", "unknown", "missing-flag", "missing-file", "bad-number", "bad-space", "bad-config"],
)
def test_usage_errors(ws, argv):
    argv = argv if not argv else [argv[0], "--root", str(ws), *argv[1:]]
    assert main(argv) == EXIT_USAGE


def test_config_presets(ws):
    (ws / "preset.cfg").write_text("# preset\norder = 1\nunit = word\n")
    workspace.run(ws, "lm-train", "--corpus", "corpus.txt", "--config", "preset.cfg", "-o", "c1.arpa")
    workspace.run(ws, "lm-train", "--corpus", "corpus.txt", "--order", "1", "-o", "c2.arpa")
    assert (ws / "c1.arpa").read_bytes() == (ws / "c2.arpa").read_bytes()
    workspace.run(ws, "lm-train", "--corpus", "corpus.txt", "--config", "preset.cfg", "--order", "2",
                  "-o", "c3.arpa")
    assert "ngram 2=" in (ws / "c3.arpa").read_text()


def test_help_exits_zero():
    assert main(["--help"]) == EXIT_OK


def test_module_entry_point(ws):
    proc = subprocess.run([sys.executable, "-m", "asrdecode", "chunk", "--root", str(ws), "intervals.txt"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0, proc.stderr
    assert all(float(b) - float(a) <= 36.0 for a, b, _ in (ln.split("\t") for ln in proc.stdout.splitlines()))
