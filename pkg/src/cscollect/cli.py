"""Command-line front end.

Subcommands: sweep, packet-sweep, canonical, bench, rip, concentration.
Every report path writes a UTF-8 CSV with a header row and, unless
--no-fig is given, a PNG figure next to it (same stem).  The master seed
resolves as: --seed flag, then the CSCOLLECT_SEED environment variable,
then the config file, then 0.  Non-sweep subcommands read only the seed
from a config file; their remaining parameters are flags.
"""

import argparse
import os
import sys
from collections import Counter
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np

from .harness import (
    SEED_ENV_VAR,
    SweepRow,
    mean_errors,
    parse_config,
    read_config_entries,
    run_canonical_sparse_experiment,
    run_construction_benchmark,
    run_packet_experiment,
    run_recovery_sweep,
    write_bench_csv,
    write_sweep_csv,
)
from .projections import ProjectionKind, analysis_variance, build_sparse_gaussian
from .recovery import SolverKind
from .rip import (
    certificate_csv_row,
    certify_rip_lemma2,
    concentration_csv_row,
    concentration_lemma3,
    concentration_lemma4,
    report_csv_header,
    subsampled_rip_study,
    verify_rip_exhaustive,
)
from .seeding import derived_seed

_SWEEP_FLAGS = (
    ("--N", "N", "signal dimension"),
    ("--Ms", "Ms", "source-coded sample count, defaults to N"),
    ("--M", "M", "received-count sweep: start:stop:step or a comma list"),
    ("--L", "L", "packet length in samples"),
    ("--kinds", "kinds", "comma list of projection kinds"),
    ("--density", "density", "sparse Gaussian density"),
    ("--variance", "variance", "nonzero value variance"),
    ("--layout", "layout", "sparse support layout"),
    ("--basis", "basis", "sparsifying basis"),
    ("--solver", "solver", "recovery solver: omp or bp"),
    ("--signal", "signal", "signal source: synthetic or csv"),
    ("--signal-path", "signal_path", "CSV trace path"),
    ("--signal-column", "signal_column", "CSV value column"),
    ("--signal-offset", "signal_offset", "CSV rows to skip"),
    ("--signal-sparsity", "signal_sparsity", "synthetic sparsity K"),
    ("--signal-range", "signal_range", "synthetic magnitude range lo:hi"),
)


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", metavar="PATH",
                        help="flat key = value config file")
    parser.add_argument("--seed", metavar="U64",
                        help="master seed (overrides env and file)")
    parser.add_argument("--out", metavar="PATH",
                        help="output CSV path")
    parser.add_argument("--no-fig", action="store_true",
                        help="skip the PNG figure")


def _resolve_seed(flag_value: Optional[str], config_path: Optional[str],
                  env=None) -> int:
    env = os.environ if env is None else env
    if flag_value is not None:
        return int(flag_value)
    if SEED_ENV_VAR in env:
        return int(env[SEED_ENV_VAR])
    if config_path:
        entries = read_config_entries(config_path)
        if "seed" in entries:
            return int(entries["seed"])
    return 0


def _figure_path(out: str) -> str:
    return str(Path(out).with_suffix(".png"))


def _write_report(path: str, lines: Sequence[str]) -> None:
    text = "\n".join([report_csv_header(), *lines]) + "\n"
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def _sweep_overrides(args) -> Dict[str, str]:
    overrides = {}
    for _, key, _help in _SWEEP_FLAGS:
        value = getattr(args, key.replace("-", "_"), None)
        if value is not None:
            overrides[key] = value
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.trials is not None:
        overrides["trials"] = args.trials
    if args.out is not None:
        overrides["out"] = args.out
    return overrides


def _run_sweep_family(args, packet: bool) -> int:
    overrides = _sweep_overrides(args)
    if packet and "L" not in overrides:
        file_entries = (read_config_entries(args.config) if args.config
                        else {})
        if "L" not in file_entries:
            overrides["L"] = "16"
    cfg = parse_config(args.config, overrides)
    rows = run_packet_experiment(cfg) if packet else run_recovery_sweep(cfg)
    write_sweep_csv(rows, cfg.out)
    print(f"wrote {cfg.out} ({len(rows)} rows)")
    if not args.no_fig:
        from .plots import save_sweep_figure
        fig = _figure_path(cfg.out)
        title = (f"Block-loss recovery, L={cfg.packet_length}" if packet
                 else "Recovery error vs received samples")
        save_sweep_figure(rows, fig, title=title)
        print(f"wrote {fig}")
    return 0


def _cmd_sweep(args) -> int:
    return _run_sweep_family(args, packet=False)


def _cmd_packet_sweep(args) -> int:
    return _run_sweep_family(args, packet=True)


def _cmd_canonical(args) -> int:
    seed = _resolve_seed(args.seed, args.config)
    solver = SolverKind(args.solver)
    rows: List[SweepRow] = []
    for trial in range(args.trials):
        run_seed = int(derived_seed(seed, "canonical", trial))
        sg, pb = run_canonical_sparse_experiment(
            args.N, args.K, args.M, seed=run_seed, density=args.density,
            solver=solver)
        for kind, result in ((ProjectionKind.SPARSE_GAUSSIAN, sg),
                             (ProjectionKind.PARTIAL_BASIS, pb)):
            rows.append(SweepRow(matrix_kind=kind.value, m=args.M,
                                 trial_index=trial,
                                 relative_error=result.relative_error,
                                 solver=solver.value, seed=run_seed))
    out = args.out or "canonical.csv"
    write_sweep_csv(rows, out)
    print(f"wrote {out} ({len(rows)} rows)")
    for kind in ("sparse_gaussian", "partial_basis"):
        med = float(np.median([r.relative_error for r in rows
                               if r.matrix_kind == kind]))
        print(f"{kind} median relative error {med!r}")
    if not args.no_fig:
        from .plots import save_canonical_figure
        fig = _figure_path(out)
        save_canonical_figure(
            rows, fig,
            title=f"Canonical-sparse recovery, N={args.N} K={args.K} "
                  f"M={args.M}")
        print(f"wrote {fig}")
    return 0


def _cmd_bench(args) -> int:
    seed = _resolve_seed(args.seed, args.config)
    n_values = [int(part) for part in args.N_values.split(",")]
    kinds = None
    if args.kinds is not None:
        kinds = tuple(ProjectionKind(part) for part in args.kinds.split(","))
    rows = run_construction_benchmark(
        n_values, density=args.density, trials=args.trials, seed=seed,
        **({"kinds": kinds} if kinds is not None else {}))
    out = args.out or "bench.csv"
    write_bench_csv(rows, out)
    print(f"wrote {out} ({len(rows)} rows)")
    if not args.no_fig:
        from .plots import save_bench_figure
        fig = _figure_path(out)
        save_bench_figure(rows, fig)
        print(f"wrote {fig}")
    return 0


def _cmd_rip(args) -> int:
    seed = _resolve_seed(args.seed, args.config)
    variance = analysis_variance(args.density, args.rows)
    base = (f"rows={args.rows};cols={args.cols};density={args.density!r};"
            f"order={args.order};delta={args.delta!r}")
    lines: List[str] = []
    entries = []
    if args.check == "subsample":
        phi = build_sparse_gaussian(
            args.rows, args.cols, args.density,
            seed=int(derived_seed(seed, "rip", "matrix")), variance=variance)
        study = subsampled_rip_study(phi, args.mu, args.order, args.delta,
                                     trials=args.trials, seed=seed)
        for i, cert in enumerate(study.certificates):
            params = f"{base};mu={args.mu!r};trial={i}"
            lines.append(certificate_csv_row("subsample", params, cert))
            entries.append((f"subsample {i}", cert.observed_delta,
                            args.delta, cert.verdict.value))
        print(f"success rate {float(study.success_rate)!r} "
              f"over {args.trials} subsamples")
    else:
        split = None
        if args.split is not None:
            dd, _, do = args.split.partition(":")
            split = (float(dd), float(do))
        for trial in range(args.trials):
            phi = build_sparse_gaussian(
                args.rows, args.cols, args.density,
                seed=int(derived_seed(seed, "rip", trial)),
                variance=variance)
            if args.check == "lemma2":
                cert = certify_rip_lemma2(phi, args.order, args.delta,
                                          split=split)
            else:
                cert = verify_rip_exhaustive(phi, args.order, args.delta,
                                             guard=args.guard)
            lines.append(certificate_csv_row(args.check,
                                             f"{base};trial={trial}", cert))
            entries.append((f"trial {trial}", cert.observed_delta,
                            args.delta, cert.verdict.value))
    out = args.out or "rip.csv"
    _write_report(out, lines)
    print(f"wrote {out} ({len(lines)} rows)")
    counts = Counter(e[3] for e in entries)
    for verdict in sorted(counts):
        print(f"{verdict}: {counts[verdict]}")
    if not args.no_fig:
        from .plots import save_report_figure
        fig = _figure_path(out)
        save_report_figure(entries, fig,
                           title=f"Observed deviation vs delta budget "
                                 f"({args.check})")
        print(f"wrote {fig}")
    return 0


def _cmd_concentration(args) -> int:
    seed = _resolve_seed(args.seed, args.config)
    if args.lemma == 3:
        report = concentration_lemma3(args.n, args.k, args.threshold,
                                      trials=args.trials, seed=seed)
        name = "delta_d"
    else:
        report = concentration_lemma4(args.n, args.k, args.threshold,
                                      trials=args.trials, seed=seed)
        name = "t"
    op = f"lemma{args.lemma}"
    params = (f"n={args.n};k={args.k!r};{name}={args.threshold!r};"
              f"trials={args.trials};seed={seed}")
    line = concentration_csv_row(op, params, report)
    out = args.out or "concentration.csv"
    _write_report(out, [line])
    verdict = "violation" if report.violation else "ok"
    print(f"wrote {out} (1 row)")
    print(f"tail {float(report.empirical_tail)!r} "
          f"bound {float(report.theoretical_bound)!r} {verdict}")
    if not args.no_fig:
        from .plots import save_report_figure
        fig = _figure_path(out)
        label = f"{op} n={args.n} k={args.k!r} {name}={args.threshold!r}"
        save_report_figure(
            [(label, report.empirical_tail, report.theoretical_bound,
              verdict)],
            fig, title="Empirical tail vs printed bound")
        print(f"wrote {fig}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cscollect",
        description="Compressive data collection experiments: recovery "
                    "sweeps, matrix benchmarks, and isometry checks.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_sweep = sub.add_parser("sweep", help="recovery error vs M sweep")
    p_packet = sub.add_parser("packet-sweep",
                              help="block-loss sweep (default L=16)")
    for p in (p_sweep, p_packet):
        _add_common(p)
        p.add_argument("--trials", metavar="INT",
                       help="trials per (kind, M) cell")
        for flag, key, help_text in _SWEEP_FLAGS:
            p.add_argument(flag, dest=key.replace("-", "_"), metavar="V",
                           help=help_text)
    p_sweep.set_defaults(func=_cmd_sweep)
    p_packet.set_defaults(func=_cmd_packet_sweep)

    p_canon = sub.add_parser("canonical",
                             help="canonical-sparse signal comparison")
    _add_common(p_canon)
    p_canon.add_argument("--trials", type=int, default=20, metavar="INT",
                         help="number of seeded runs")
    p_canon.add_argument("--N", type=int, default=64)
    p_canon.add_argument("--K", type=int, default=4)
    p_canon.add_argument("--M", type=int, default=32)
    p_canon.add_argument("--density", type=float, default=0.2)
    p_canon.add_argument("--solver", default="bp", choices=["omp", "bp"])
    p_canon.set_defaults(func=_cmd_canonical)

    p_bench = sub.add_parser("bench", help="construction time and storage")
    _add_common(p_bench)
    p_bench.add_argument("--trials", type=int, default=5, metavar="INT",
                         help="timed builds per cell (median reported)")
    p_bench.add_argument("--N-values", dest="N_values",
                         default="64,128,256,512,1024", metavar="LIST",
                         help="comma list of matrix sizes")
    p_bench.add_argument("--density", type=float, default=0.1)
    p_bench.add_argument("--kinds", metavar="LIST",
                         help="comma list of projection kinds")
    p_bench.set_defaults(func=_cmd_bench)

    p_rip = sub.add_parser("rip", help="isometry certificates for sparse "
                                       "Gaussian matrices")
    _add_common(p_rip)
    p_rip.add_argument("--check", required=True,
                       choices=["lemma2", "exhaustive", "subsample"])
    p_rip.add_argument("--trials", type=int, default=10, metavar="INT",
                       help="matrices to draw, or subsample draws")
    p_rip.add_argument("--rows", type=int, default=64)
    p_rip.add_argument("--cols", type=int, default=128)
    p_rip.add_argument("--order", type=int, default=2,
                       help="sparsity order K")
    p_rip.add_argument("--delta", type=float, default=0.6)
    p_rip.add_argument("--density", type=float, default=0.1)
    p_rip.add_argument("--split", metavar="DD:DO",
                       help="lemma2 budget split delta_d:delta_o")
    p_rip.add_argument("--mu", type=float, default=0.5,
                       help="row-keep fraction for subsample")
    p_rip.add_argument("--guard", type=int, default=1_000_000,
                       help="max support subsets for exhaustive")
    p_rip.set_defaults(func=_cmd_rip)

    p_conc = sub.add_parser("concentration",
                            help="empirical tail vs printed bound")
    _add_common(p_conc)
    p_conc.add_argument("--lemma", type=int, required=True, choices=[3, 4])
    p_conc.add_argument("--trials", type=int, default=10000, metavar="INT")
    p_conc.add_argument("--n", type=int, default=1000)
    p_conc.add_argument("--k", type=float, default=0.1)
    p_conc.add_argument("--threshold", type=float, default=0.3,
                        help="deviation threshold (delta_d or t)")
    p_conc.set_defaults(func=_cmd_concentration)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
