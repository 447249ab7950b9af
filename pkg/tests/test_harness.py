"""Tests for experiment configuration and sweep orchestration."""

import numpy as np
import pytest

from cscollect.errors import ConfigError
from cscollect.harness import (
    BENCH_CSV_HEADER,
    SWEEP_CSV_HEADER,
    ExperimentConfig,
    bench_csv_lines,
    expand_m_values,
    load_config_signal,
    mean_errors,
    parse_config,
    run_canonical_sparse_experiment,
    run_construction_benchmark,
    run_packet_experiment,
    run_recovery_sweep,
    run_single_trial,
    serialize_config,
    sweep_csv_lines,
    write_sweep_csv,
)
from cscollect.projections import ProjectionKind
from cscollect.recovery import SolverKind
from cscollect.signals import BasisKind


def _tiny_cfg(**kw):
    base = dict(n=64, m_values=(16, 32), trials=2,
                kinds=(ProjectionKind.SPARSE_GAUSSIAN,
                       ProjectionKind.DENSE_GAUSSIAN),
                density=0.2, signal_sparsity=3)
    base.update(kw)
    return ExperimentConfig(**base)


class TestConfigValidation:
    def test_defaults(self):
        """A bare N gets the documented defaults."""
        cfg = ExperimentConfig(n=1024)
        assert cfg.density == 0.1
        assert cfg.variance == 1.0
        assert cfg.packet_length == 1
        assert cfg.solver is SolverKind.OMP
        assert cfg.basis is BasisKind.DCT
        assert cfg.m_values == tuple(range(64, 385, 32))
        assert len(cfg.m_values) == 11
        assert cfg.effective_source_count == 1024

    def test_errors_name_their_key(self):
        """Each constraint violation carries the offending key."""
        m16 = dict(m_values=(16,))
        cases = [
            (dict(n=0), "N"),
            (dict(n=64, m_values=(128,)), "M"),
            (dict(n=64, m_values=()), "M"),
            (dict(n=64, m_values=(48,), packet_length=48), "L"),
            (dict(n=64, m_values=(24,), packet_length=16), "M"),
            (dict(n=64, trials=0, **m16), "trials"),
            (dict(n=64, density=0.0, **m16), "density"),
            (dict(n=64, density=1.5, **m16), "density"),
            (dict(n=64, variance=-1.0, **m16), "variance"),
            (dict(n=64, kinds=(), **m16), "kinds"),
            (dict(n=64, signal_kind="csv", **m16), "signal_path"),
            (dict(n=64, signal_kind="nope", **m16), "signal"),
            (dict(n=64, signal_sparsity=64, **m16), "signal_sparsity"),
            (dict(n=64, signal_range=(1.0, 1.0), **m16), "signal_range"),
            (dict(n=64, master_seed=-1, **m16), "seed"),
        ]
        for kwargs, key in cases:
            with pytest.raises(ConfigError) as exc:
                ExperimentConfig(**kwargs)
            assert exc.value.key == key, f"{kwargs} should blame {key}"

    def test_m_multiple_of_packet_ok(self):
        """M values aligned to the packet length validate."""
        cfg = ExperimentConfig(n=64, m_values=(16, 48), packet_length=16)
        assert cfg.m_values == (16, 48)


class TestExpandM:
    def test_range_syntax(self):
        """start:stop:step expands inclusively."""
        assert expand_m_values("64:384:32") == tuple(range(64, 385, 32))
        assert len(expand_m_values("64:384:32")) == 11

    def test_list_and_scalar(self):
        """Comma lists and single values parse."""
        assert expand_m_values("64,96") == (64, 96)
        assert expand_m_values("48") == (48,)

    def test_bad_specs(self):
        """Malformed specifications blame the M key."""
        for text in ("64:384", "a:b:c", "64;96", ""):
            with pytest.raises(ConfigError) as exc:
                expand_m_values(text)
            assert exc.value.key == "M"


class TestParseConfig:
    def test_empty_file_requires_n(self, tmp_path):
        """With no N anywhere the parse fails naming N."""
        p = tmp_path / "empty.cfg"
        p.write_text("")
        with pytest.raises(ConfigError) as exc:
            parse_config(str(p), env={})
        assert exc.value.key == "N"

    def test_file_values_and_comments(self, tmp_path):
        """Key = value lines with comments and blanks parse."""
        p = tmp_path / "a.cfg"
        p.write_text("# comment\n\nN = 128\ndensity = 0.25\nM = 32,64\n")
        cfg = parse_config(str(p), env={})
        assert cfg.n == 128
        assert cfg.density == 0.25
        assert cfg.m_values == (32, 64)

    def test_unknown_key_rejected(self, tmp_path):
        """An unrecognized key is an error naming itself."""
        p = tmp_path / "a.cfg"
        p.write_text("N = 64\nbogus = 1\n")
        with pytest.raises(ConfigError) as exc:
            parse_config(str(p), env={})
        assert exc.value.key == "bogus"

    def test_flag_overrides_file(self, tmp_path):
        """CLI overrides beat file entries."""
        p = tmp_path / "a.cfg"
        p.write_text("N = 64\nM = 16\ntrials = 5\n")
        cfg = parse_config(str(p), overrides={"trials": "2"}, env={})
        assert cfg.trials == 2

    def test_seed_precedence(self, tmp_path):
        """Seed resolves flag over environment over file."""
        p = tmp_path / "a.cfg"
        p.write_text("N = 64\nM = 16\nseed = 1\n")
        assert parse_config(str(p), env={}).master_seed == 1
        assert parse_config(str(p),
                            env={"CSCOLLECT_SEED": "2"}).master_seed == 2
        assert parse_config(str(p), overrides={"seed": "3"},
                            env={"CSCOLLECT_SEED": "2"}).master_seed == 3

    def test_round_trip(self, tmp_path):
        """serialize_config output parses back to an equal config."""
        cfg = _tiny_cfg(packet_length=16, m_values=(16, 32),
                        residual_tol=1e-7, master_seed=9,
                        signal_range=(-2.0, 0.5))
        p = tmp_path / "rt.cfg"
        p.write_text(serialize_config(cfg))
        assert parse_config(str(p), env={}) == cfg

    def test_density_round_trips(self, tmp_path):
        """The documented density example survives a round trip."""
        cfg = ExperimentConfig(n=64, density=0.1, m_values=(16,))
        p = tmp_path / "rt.cfg"
        p.write_text(serialize_config(cfg))
        assert parse_config(str(p), env={}).density == 0.1


class TestSweep:
    def test_row_count_and_order(self):
        """The sweep emits kinds x M x trials rows sorted canonically."""
        cfg = _tiny_cfg()
        rows = run_recovery_sweep(cfg)
        assert len(rows) == 2 * 2 * 2
        keys = [(r.matrix_kind, r.m, r.trial_index) for r in rows]
        assert keys == sorted(keys)

    def test_lossless_full_rate_is_exact(self):
        """M = N with a dense kind recovers the signal to solver precision."""
        cfg = ExperimentConfig(n=32, m_values=(32,), trials=2,
                               kinds=(ProjectionKind.DENSE_GAUSSIAN,),
                               signal_sparsity=3)
        rows = run_recovery_sweep(cfg)
        for r in rows:
            assert r.relative_error < 1e-6

    def test_rows_replay_in_isolation(self):
        """Any (kind, M, trial) cell reproduces its sweep row exactly."""
        cfg = _tiny_cfg()
        rows = run_recovery_sweep(cfg)
        probe = rows[3]
        kind = ProjectionKind(probe.matrix_kind)
        replayed = run_single_trial(cfg, kind, probe.m, probe.trial_index)
        assert replayed == probe  # wall time excluded from equality

    def test_rerun_is_byte_identical(self, tmp_path):
        """Same config and seed produce the same CSV bytes."""
        cfg = _tiny_cfg()
        p1 = tmp_path / "a.csv"
        p2 = tmp_path / "b.csv"
        write_sweep_csv(run_recovery_sweep(cfg), str(p1))
        write_sweep_csv(run_recovery_sweep(cfg), str(p2))
        assert p1.read_bytes() == p2.read_bytes()

    def test_seed_changes_rows(self):
        """A different master seed draws different matrices."""
        a = run_recovery_sweep(_tiny_cfg())
        b = run_recovery_sweep(_tiny_cfg(master_seed=1))
        assert any(x.relative_error != y.relative_error
                   for x, y in zip(a, b))

    def test_csv_schema(self):
        """Header is the fixed v1 schema and floats round-trip."""
        assert SWEEP_CSV_HEADER == "kind,M,trial,relative_error,solver,seed"
        cfg = _tiny_cfg(trials=1, m_values=(16,))
        lines = sweep_csv_lines(run_recovery_sweep(cfg))
        assert lines[0] == SWEEP_CSV_HEADER
        fields = lines[1].split(",")
        assert fields[0] in ("dense_gaussian", "sparse_gaussian")
        assert float(fields[3]) >= 0.0
        assert fields[4] == "omp"

    def test_mean_errors_aggregates(self):
        """Per-cell means average the raw rows."""
        cfg = _tiny_cfg()
        rows = run_recovery_sweep(cfg)
        means = mean_errors(rows)
        key = ("sparse_gaussian", 16)
        manual = np.mean([r.relative_error for r in rows
                          if r.matrix_kind == "sparse_gaussian" and r.m == 16])
        np.testing.assert_allclose(means[key], manual, atol=1e-15)


class TestPacketExperiment:
    def test_narrows_to_packet_kinds(self):
        """Only the sparse-Gaussian and partial-basis kinds run."""
        cfg = ExperimentConfig(n=64, m_values=(32,), trials=1,
                               packet_length=16, density=0.3,
                               signal_sparsity=3)
        rows = run_packet_experiment(cfg)
        assert {r.matrix_kind for r in rows} == {"sparse_gaussian",
                                                "partial_basis"}

    def test_unit_packets_match_plain_sweep(self):
        """With L=1 the packet experiment reproduces plain sweep rows."""
        cfg = ExperimentConfig(n=64, m_values=(16,), trials=2, density=0.2,
                               kinds=(ProjectionKind.SPARSE_GAUSSIAN,
                                      ProjectionKind.PARTIAL_BASIS),
                               signal_sparsity=3)
        assert run_packet_experiment(cfg) == run_recovery_sweep(cfg)

    def test_no_applicable_kind_rejected(self):
        """A kinds list without either comparison kind is refused."""
        cfg = _tiny_cfg(kinds=(ProjectionKind.DENSE_GAUSSIAN,))
        with pytest.raises(ConfigError) as exc:
            run_packet_experiment(cfg)
        assert exc.value.key == "kinds"


class TestCanonicalExperiment:
    def test_pair_comes_back_with_errors(self):
        """Both pipeline results carry filled-in relative errors."""
        sg, pb = run_canonical_sparse_experiment(64, 4, 32, seed=0)
        assert sg.relative_error is not None
        assert pb.relative_error is not None
        assert sg.relative_error >= 0.0

    def test_easy_regime_separates_kinds(self):
        """Random mixing succeeds where plain sample selection fails, in the
        majority of seeds."""
        split = 0
        for seed in range(20):
            sg, pb = run_canonical_sparse_experiment(64, 4, 32, seed=seed)
            if (sg.relative_error < 1e-4
                    and pb.relative_error > 10.0 * max(sg.relative_error,
                                                       1e-12)):
                split += 1
        assert split > 10

    def test_zero_sparsity_rejected(self):
        """K = 0 violates the synthesis precondition."""
        with pytest.raises(ValueError, match="1 <= K"):
            run_canonical_sparse_experiment(64, 0, 32)

    def test_oversized_m_rejected(self):
        """M beyond N is refused."""
        with pytest.raises(ValueError, match="M <= N"):
            run_canonical_sparse_experiment(64, 4, 65)


class TestBenchmark:
    def test_rows_cover_kinds_and_sizes(self):
        """One row per (kind, N) with populated fields."""
        rows = run_construction_benchmark([64, 128], density=0.1, trials=3)
        assert len(rows) == 3 * 2
        for r in rows:
            assert r.duration_ns > 0
            assert r.storage_bytes > 0

    def test_single_trial_smoke(self):
        """A single trial still produces complete rows."""
        rows = run_construction_benchmark([64], trials=1)
        assert len(rows) == 3

    def test_sparse_beats_dense_storage(self):
        """At density 0.1 sparse storage undercuts dense for all sizes."""
        rows = run_construction_benchmark([64, 256], density=0.1, trials=1)
        by = {(r.kind, r.n): r for r in rows}
        for n in (64, 256):
            sparse = by[("sparse_gaussian", n)].storage_bytes
            dense = by[("dense_gaussian", n)].storage_bytes
            assert sparse < dense

    def test_csv_lines(self):
        """Bench CSV keeps the fixed header and integer fields."""
        rows = run_construction_benchmark([64], trials=1)
        lines = bench_csv_lines(rows)
        assert lines[0] == BENCH_CSV_HEADER == "kind,N,mean_ns,bytes"
        fields = lines[1].split(",")
        assert fields[1] == "64"
        assert int(fields[2]) > 0


class TestConfigSignal:
    def test_synthetic_signal_is_fixed_per_config(self):
        """The same config always loads the same signal."""
        cfg = _tiny_cfg()
        a = load_config_signal(cfg)
        b = load_config_signal(cfg)
        np.testing.assert_array_equal(a.samples, b.samples)

    def test_csv_signal_source(self, tmp_path):
        """A csv signal source loads through the trace reader."""
        p = tmp_path / "sig.csv"
        p.write_text("".join(f"{0.1 * i}\n" for i in range(80)))
        cfg = ExperimentConfig(n=64, signal_kind="csv", signal_path=str(p),
                               m_values=(16,), trials=1,
                               kinds=(ProjectionKind.DENSE_GAUSSIAN,))
        sig = load_config_signal(cfg)
        assert sig.length == 64
        np.testing.assert_allclose(sig.samples[1], 0.1, atol=1e-12)
