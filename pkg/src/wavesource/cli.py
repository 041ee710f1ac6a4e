"""Command-line entry points: forward, invert, sweep, check.

Every command takes --config (defaulting to the bundled scenario); forward
and sweep parallelize with --threads (0 = one worker per CPU).  Containers
and CSV outputs are deterministic for a fixed config and seed, apart from
the runtime_s column.
"""

import argparse
import os
import sys
from dataclasses import replace

from .config import config_digest, load_config
from .errors import ConfigError, InputError
from .forward import forward_sweep
from .inversion import reconstruct_field, synthesize_f
from .persist import (
    read_boundary,
    write_boundary,
    write_line_chart,
    write_reconstruction,
    write_sweep_csv,
)
from .spectral import temporal_fourier
from .stability import fit_verify_bound, run_sweep, sweep_summary
from .verification import format_report, run_checks

__all__ = ["main"]


def _load_or_compute(cfg, data_path, threads):
    if data_path:
        ds = read_boundary(data_path)
        if ds.sphere.radius != cfg.sphere_radius:
            raise InputError(
                f"dataset sphere radius {ds.sphere.radius} does not match the "
                f"configured {cfg.sphere_radius}"
            )
        return ds
    return forward_sweep(
        cfg.model(), cfg.profile(), cfg.sphere(), cfg.ball(), cfg.tgrid(),
        threads=threads,
    )


def cmd_forward(args) -> int:
    cfg = load_config(args.config)
    ds = forward_sweep(
        cfg.model(), cfg.profile(), cfg.sphere(), cfg.ball(), cfg.tgrid(),
        threads=args.threads,
    )
    ds.provenance["config_digest"] = config_digest(cfg.raw)
    write_boundary(ds, args.out)
    print(
        f"wrote {args.out}: {ds.sphere.n_nodes} nodes x {ds.tgrid.n_steps + 1} "
        f"samples, horizon {ds.tgrid.horizon:g}"
    )
    return 0


def cmd_invert(args) -> int:
    cfg = load_config(args.config)
    ds = _load_or_compute(cfg, args.data, args.threads)
    sd = temporal_fourier(ds, cfg.fgrid())
    field = reconstruct_field(sd, cfg.wgrid(), cfg.profile(), c0=cfg.c0)
    res = synthesize_f(field, cfg.ball(), truth=cfg.model())
    write_reconstruction(res, args.out)
    print(
        f"wrote {args.out}: K={res.band_limit:g}, "
        f"rel L2 error {res.rel_l2_error:.4e}, "
        f"imag residual {res.imag_residual:.2e}, "
        f"hermitian residual {field.provenance['hermitian_residual_before']:.2e}, "
        f"{field.provenance['excluded_points']} excluded grid points"
    )
    return 0


def cmd_sweep(args) -> int:
    cfg = load_config(args.config)
    stab = cfg.stability()
    if args.seed:
        stab = replace(stab, seeds=tuple(s + args.seed for s in stab.seeds))
    ds = _load_or_compute(cfg, args.data, args.threads)
    model, profile = cfg.model(), cfg.profile()
    records = run_sweep(
        ds, model, profile, stab, cfg.fgrid(), cfg.ball(), threads=args.threads
    )

    os.makedirs(args.out, exist_ok=True)
    csv_path = os.path.join(args.out, "sweep.csv")
    svg_path = os.path.join(args.out, "sweep.svg")
    write_sweep_csv(records, csv_path)

    summary = sweep_summary(records)
    series = []
    for level in sorted({row["sigma_rel"] for row in summary}):
        pts = [(row["T"], row["median_e_rec"]) for row in summary
               if row["sigma_rel"] == level]
        series.append(
            (f"noise {level:g}", [p[0] for p in pts], [p[1] for p in pts])
        )
    if series:
        write_line_chart(
            svg_path, series,
            title="reconstruction error vs observation time",
            xlabel="observation time T", ylabel="median rel L2 error",
        )

    failed = [r for r in records if r.error is not None]
    for r in failed:
        print(
            f"cell T={r.T:g} sigma={r.sigma_rel:g} seed={r.seed} failed: {r.error}",
            file=sys.stderr,
        )
    for row in summary:
        print(
            f"T={row['T']:<4g} noise={row['sigma_rel']:<7g} "
            f"median e_rec={row['median_e_rec']:.4e}  (n={row['n']})"
        )
    try:
        verdict = fit_verify_bound(records)
        status = "holds" if verdict["passed"] else "VIOLATED"
        print(
            f"error bound {status}: C_fit={verdict['c_fit']:.3e}, "
            f"max holdout ratio {verdict['max_holdout_ratio']:.3e}"
        )
    except InputError as exc:
        print(f"error bound not assessed: {exc}", file=sys.stderr)
    print(f"wrote {csv_path} and {svg_path}")
    return 1 if len(failed) == len(records) else 0


def cmd_check(args) -> int:
    cfg = load_config(args.config)
    results = run_checks(cfg)
    print(format_report(results))
    return 0 if all(r.passed for r in results) else 1


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="wavesource",
        description="forward wave simulation, source reconstruction, and "
                    "stability sweeps on a configured scenario",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, out_default=None, needs_out=False):
        p.add_argument("--config", help="YAML run configuration "
                                        "(bundled default when omitted)")
        p.add_argument("--threads", type=int, default=0,
                       help="worker threads, 0 = auto (default)")
        if needs_out:
            p.add_argument("--out", required=out_default is None,
                           default=out_default, help="output path")

    p = sub.add_parser("forward", help="solve the forward problem, write a "
                                       "boundary dataset container")
    add_common(p, needs_out=True)
    p.set_defaults(fn=cmd_forward)

    p = sub.add_parser("invert", help="reconstruct the source from a boundary "
                                      "dataset, write a reconstruction container")
    add_common(p, needs_out=True)
    p.add_argument("--data", help="boundary dataset container "
                                  "(computed in-process when omitted)")
    p.set_defaults(fn=cmd_invert)

    p = sub.add_parser("sweep", help="run the (T, noise, seed) stability sweep, "
                                     "write CSV and SVG")
    add_common(p, out_default="sweep_out", needs_out=True)
    p.add_argument("--data", help="boundary dataset container "
                                  "(computed in-process when omitted)")
    p.add_argument("--seed", type=int, default=0,
                   help="offset added to every configured noise seed")
    p.set_defaults(fn=cmd_sweep)

    p = sub.add_parser("check", help="run the consistency check battery")
    add_common(p)
    p.set_defaults(fn=cmd_check)

    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (ConfigError, InputError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
