"""Tests for the command-line front end."""

import pytest

from cscollect.cli import main
from cscollect.harness import SEED_ENV_VAR


@pytest.fixture(autouse=True)
def _clean_env(monkeypatch, tmp_path):
    """Isolate every test from the caller's seed env and cwd."""
    monkeypatch.delenv(SEED_ENV_VAR, raising=False)
    monkeypatch.chdir(tmp_path)


_SWEEP_ARGS = ["sweep", "--N", "64", "--M", "16,32", "--trials", "2",
               "--kinds", "sparse_gaussian,dense_gaussian",
               "--signal-sparsity", "3", "--density", "0.2"]


class TestSweepCommand:
    def test_writes_csv_and_figure(self, tmp_path):
        """Default run drops the CSV and a PNG with the same stem."""
        rc = main(_SWEEP_ARGS + ["--out", "s.csv"])
        assert rc == 0
        lines = (tmp_path / "s.csv").read_text().splitlines()
        assert lines[0] == "kind,M,trial,relative_error,solver,seed"
        assert len(lines) == 1 + 2 * 2 * 2
        assert (tmp_path / "s.png").exists()

    def test_no_fig_skips_png(self, tmp_path):
        """--no-fig leaves only the CSV behind."""
        rc = main(_SWEEP_ARGS + ["--out", "s.csv", "--no-fig"])
        assert rc == 0
        assert (tmp_path / "s.csv").exists()
        assert not (tmp_path / "s.png").exists()

    def test_rerun_is_byte_identical(self, tmp_path):
        """Identical flags and seed reproduce the CSV exactly."""
        main(_SWEEP_ARGS + ["--out", "a.csv", "--no-fig", "--seed", "5"])
        main(_SWEEP_ARGS + ["--out", "b.csv", "--no-fig", "--seed", "5"])
        assert (tmp_path / "a.csv").read_bytes() == \
            (tmp_path / "b.csv").read_bytes()

    def test_config_file_with_flag_override(self, tmp_path):
        """Flags beat file entries; the file supplies the rest."""
        cfg = tmp_path / "exp.cfg"
        cfg.write_text("N = 64\nM = 16\ntrials = 2\nsignal_sparsity = 3\n"
                       "density = 0.2\nkinds = sparse_gaussian\n")
        rc = main(["sweep", "--config", str(cfg), "--M", "32",
                   "--out", "c.csv", "--no-fig"])
        assert rc == 0
        lines = (tmp_path / "c.csv").read_text().splitlines()
        assert all(",32," in line for line in lines[1:])

    def test_missing_dimension_exits_2(self, capsys):
        """No N anywhere is a usage error naming the key."""
        rc = main(["sweep", "--M", "16", "--no-fig"])
        assert rc == 2
        assert "'N'" in capsys.readouterr().err

    def test_env_seed_used_and_flag_wins(self, tmp_path, monkeypatch):
        """Env seed changes output; an explicit flag overrides it."""
        main(_SWEEP_ARGS + ["--out", "base.csv", "--no-fig", "--seed", "0"])
        monkeypatch.setenv(SEED_ENV_VAR, "9")
        main(_SWEEP_ARGS + ["--out", "env.csv", "--no-fig"])
        main(_SWEEP_ARGS + ["--out", "flag.csv", "--no-fig", "--seed", "0"])
        base = (tmp_path / "base.csv").read_bytes()
        assert (tmp_path / "env.csv").read_bytes() != base
        assert (tmp_path / "flag.csv").read_bytes() == base


class TestPacketSweepCommand:
    def test_defaults_to_block_length_16(self, tmp_path):
        """Without --L the packet sweep runs at L=16 and narrows kinds."""
        args = ["packet-sweep", "--N", "64", "--M", "32", "--trials", "2",
                "--signal-sparsity", "3", "--density", "0.2", "--no-fig"]
        main(args + ["--out", "p.csv"])
        main(args + ["--L", "16", "--out", "q.csv"])
        assert (tmp_path / "p.csv").read_bytes() == \
            (tmp_path / "q.csv").read_bytes()
        kinds = {line.split(",")[0]
                 for line in (tmp_path / "p.csv").read_text().splitlines()[1:]}
        assert kinds == {"sparse_gaussian", "partial_basis"}


class TestCanonicalCommand:
    def test_rows_and_medians(self, tmp_path, capsys):
        """Two kinds times trials rows, medians reported on stdout."""
        rc = main(["canonical", "--trials", "3", "--out", "c.csv",
                   "--no-fig"])
        assert rc == 0
        lines = (tmp_path / "c.csv").read_text().splitlines()
        assert len(lines) == 1 + 2 * 3
        out = capsys.readouterr().out
        assert "sparse_gaussian median" in out
        assert "partial_basis median" in out

    def test_figure_rendered(self, tmp_path):
        """The bar figure lands next to the CSV."""
        main(["canonical", "--trials", "2", "--out", "c.csv"])
        assert (tmp_path / "c.png").exists()


class TestBenchCommand:
    def test_rows_cover_grid(self, tmp_path):
        """Three default kinds per size with the versioned header."""
        rc = main(["bench", "--N-values", "64,128", "--trials", "1",
                   "--out", "b.csv", "--no-fig"])
        assert rc == 0
        lines = (tmp_path / "b.csv").read_text().splitlines()
        assert lines[0] == "kind,N,mean_ns,bytes"
        assert len(lines) == 1 + 3 * 2


class TestRipCommand:
    def test_exhaustive_report(self, tmp_path):
        """One certificate row per drawn matrix."""
        rc = main(["rip", "--check", "exhaustive", "--trials", "2",
                   "--out", "r.csv", "--no-fig"])
        assert rc == 0
        lines = (tmp_path / "r.csv").read_text().splitlines()
        assert lines[0] == "op,params,empirical,bound,verdict"
        assert len(lines) == 3
        assert all(line.startswith("exhaustive,") for line in lines[1:])

    def test_lemma2_report_and_figure(self, tmp_path):
        """Certificate rows and the paired-bar figure render."""
        rc = main(["rip", "--check", "lemma2", "--trials", "2",
                   "--out", "r.csv"])
        assert rc == 0
        assert (tmp_path / "r.png").exists()

    def test_subsample_reports_success_rate(self, tmp_path, capsys):
        """The subsample study prints its success rate."""
        rc = main(["rip", "--check", "subsample", "--trials", "3",
                   "--mu", "0.75", "--delta", "0.9", "--out", "r.csv",
                   "--no-fig"])
        assert rc == 0
        assert "success rate" in capsys.readouterr().out
        assert len((tmp_path / "r.csv").read_text().splitlines()) == 4

    def test_bad_density_exits_2(self, capsys):
        """Parameter validation surfaces as exit code 2."""
        rc = main(["rip", "--check", "lemma2", "--density", "2.0",
                   "--no-fig"])
        assert rc == 2
        assert "error:" in capsys.readouterr().err


class TestConcentrationCommand:
    def test_lemma3_single_row(self, tmp_path, capsys):
        """One report row with tail, bound, and verdict."""
        rc = main(["concentration", "--lemma", "3", "--trials", "500",
                   "--out", "k.csv", "--no-fig"])
        assert rc == 0
        lines = (tmp_path / "k.csv").read_text().splitlines()
        assert len(lines) == 2
        assert lines[1].startswith("lemma3,")
        assert "bound" in capsys.readouterr().out

    def test_lemma4_runs(self, tmp_path):
        """The overlap-tail variant writes its row too."""
        rc = main(["concentration", "--lemma", "4", "--n", "500",
                   "--trials", "500", "--out", "k.csv", "--no-fig"])
        assert rc == 0
        assert (tmp_path / "k.csv").read_text().splitlines()[1].startswith(
            "lemma4,")
