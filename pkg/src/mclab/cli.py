"""Command-line interface: experiment execution and CSV emission.

Every output file starts with a single ``# meta: {...}`` line carrying the
resolved parameters and seed, followed by a header row and data rows. Floats
are written with 9 significant digits; reruns of the same command are
byte-identical.
"""

from __future__ import annotations

import argparse
import json
import os
import secrets
import sys

import numpy as np

from . import __version__
from .channels import (
    avg_gate_fidelity,
    channel_params,
    classical_steady_n,
    coherent_channel,
    commutator_superop,
    decompose_error_channel,
    error_channel,
    incoherent_channel,
    infer_noise_amplitude,
    measurement_channel,
    measurement_feedback_channel,
)
from .ensemble import fluctuation_histogram, sweep_grid

SCHEMA_VERSION = 1

COLUMNS = {
    "adaptive-sweep": [
        "pm", "theta", "gamma", "L", "steady_n", "steady_fluct_scaled", "discarded", "runs",
    ],
    "adaptive-dynamics": ["pm", "theta", "gamma", "L", "t", "n_bar", "fluct_scaled"],
    "u1-sweep": [
        "pm", "theta", "gamma", "L", "fluct_scaled", "purity",
        "scripts", "noise_reps", "discarded_replays", "dropped_scripts",
    ],
    "u1-hist": ["pm", "theta", "gamma", "L", "bin_left", "bin_right", "mass"],
    "classical-compare": [
        "pm", "theta", "gamma", "L", "runs", "steady_n_sim", "steady_n_classical",
    ],
    "analytics": ["theta", "gamma", "pm", "fidelity", "phi", "eta", "nu", "nu_prime", "xi"],
    "superops": ["channel", "row", "col", "re", "im"],
    "benchmark-noise": ["nbar", "pm", "gamma", "theta_hat", "fidelity_hat"],
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse with exit code 1 on usage errors (2 is reserved for runtime)."""

    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(1)


def parse_grid(text: str) -> list[float]:
    """A single value or an endpoint-inclusive ``start:stop:step`` grid."""
    parts = text.split(":")
    try:
        if len(parts) == 1:
            return [float(text)]
        if len(parts) != 3:
            raise ValueError
        start, stop, step = (float(p) for p in parts)
    except ValueError:
        raise UsageError(f"invalid grid {text!r}: expected VALUE or START:STOP:STEP")
    if step <= 0:
        raise UsageError(f"grid step must be positive, got {step}")
    if stop < start - 1e-12:
        raise UsageError(f"grid stop {stop} below start {start}")
    values = []
    k = 0
    while (v := start + k * step) <= stop + 1e-12:
        values.append(stop if abs(v - stop) <= 1e-12 else v)
        k += 1
    return values


def _fmt(value) -> str:
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".9g")
    return str(value)


def write_csv(path: str, meta: dict, header: list[str], rows: list[tuple]) -> None:
    lines = ["# meta: " + json.dumps(meta, sort_keys=True)]
    lines.append(",".join(header))
    lines.extend(",".join(_fmt(v) for v in row) for row in rows)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("\n".join(lines) + "\n")


def _resolve_seed(text: str) -> int:
    if text == "random":
        seed = secrets.randbits(62)
        print(f"seed: {seed}")
        return seed
    try:
        return int(text)
    except ValueError:
        raise UsageError(f"--seed expects an integer or 'random', got {text!r}")


def _resolve_workers(value: int | None) -> int:
    if value is not None:
        return value
    env = os.environ.get("MCL_WORKERS")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise UsageError(f"MCL_WORKERS must be an integer, got {env!r}")
    return os.cpu_count() or 1


def _meta(args, subcommand: str, seed: int, **extra) -> dict:
    meta = {
        "tool": "mcl",
        "version": __version__,
        "schema": SCHEMA_VERSION,
        "subcommand": subcommand,
        "seed": seed,
    }
    meta.update(extra)
    return meta


def _check_counts(**counts) -> None:
    for name, value in counts.items():
        if value < 2:
            raise UsageError(f"--{name} must be >= 2, got {value}")


def cmd_adaptive_sweep(args) -> None:
    seed = _resolve_seed(args.seed)
    workers = _resolve_workers(args.workers)
    pm, theta = parse_grid(args.pm), parse_grid(args.theta)
    _check_counts(runs=args.runs)
    rows = sweep_grid(
        "adaptive", args.L, pm, theta, {"runs": args.runs}, seed,
        gamma=args.gamma, depth=args.T, workers=workers,
    )
    out = [
        (r["pm"], r["theta"], r["gamma"], r["L"], r["steady_n"],
         r["steady_fluct_scaled"], r["discarded"], r["runs"])
        for r in rows
    ]
    meta = _meta(args, "adaptive-sweep", seed, L=args.L, pm=pm, theta=theta,
                 gamma=args.gamma, T=args.T, runs=args.runs, workers=workers)
    write_csv(args.out, meta, COLUMNS["adaptive-sweep"], out)
    print(f"wrote {args.out} ({len(out)} rows)")


def cmd_adaptive_dynamics(args) -> None:
    seed = _resolve_seed(args.seed)
    workers = _resolve_workers(args.workers)
    pm, theta = parse_grid(args.pm), parse_grid(args.theta)
    _check_counts(runs=args.runs)
    rows = sweep_grid(
        "adaptive", args.L, pm, theta, {"runs": args.runs}, seed,
        gamma=args.gamma, depth=args.T, workers=workers,
    )
    quarter = args.L / 4.0
    out = []
    for r in rows:
        res = r["_result"]
        for t in range(len(res.n_bar)):
            out.append(
                (r["pm"], r["theta"], r["gamma"], r["L"], t,
                 float(res.n_bar[t]), float(res.fluct[t]) / quarter)
            )
    meta = _meta(args, "adaptive-dynamics", seed, L=args.L, pm=pm, theta=theta,
                 gamma=args.gamma, T=args.T, runs=args.runs, workers=workers)
    write_csv(args.out, meta, COLUMNS["adaptive-dynamics"], out)
    print(f"wrote {args.out} ({len(out)} rows)")


def cmd_u1_sweep(args) -> None:
    seed = _resolve_seed(args.seed)
    workers = _resolve_workers(args.workers)
    pm, theta = parse_grid(args.pm), parse_grid(args.theta)
    _check_counts(scripts=args.scripts, **{"noise-reps": args.noise_reps})
    rows = sweep_grid(
        "u1", args.L, pm, theta, {"scripts": args.scripts, "noise": args.noise_reps},
        seed, gamma=args.gamma, depth=args.T, workers=workers,
    )
    out = [
        (r["pm"], r["theta"], r["gamma"], r["L"], r["fluct_scaled"], r["purity"],
         r["scripts"], r["noise_reps"], r["discarded_replays"], r["dropped_scripts"])
        for r in rows
    ]
    meta = _meta(args, "u1-sweep", seed, L=args.L, pm=pm, theta=theta,
                 gamma=args.gamma, T=args.T, scripts=args.scripts,
                 noise_reps=args.noise_reps, workers=workers)
    write_csv(args.out, meta, COLUMNS["u1-sweep"], out)
    print(f"wrote {args.out} ({len(out)} rows)")


def cmd_u1_hist(args) -> None:
    seed = _resolve_seed(args.seed)
    workers = _resolve_workers(args.workers)
    pm, theta = parse_grid(args.pm), parse_grid(args.theta)
    _check_counts(scripts=args.scripts, **{"noise-reps": args.noise_reps})
    rows = sweep_grid(
        "u1", args.L, pm, theta, {"scripts": args.scripts, "noise": args.noise_reps},
        seed, gamma=args.gamma, depth=args.T, workers=workers,
    )
    out = []
    for r in rows:
        edges, mass = fluctuation_histogram(r["_result"].script_flucts, n_bins=args.bins)
        for k in range(len(mass)):
            out.append(
                (r["pm"], r["theta"], r["gamma"], r["L"],
                 float(edges[k]), float(edges[k + 1]), float(mass[k]))
            )
    meta = _meta(args, "u1-hist", seed, L=args.L, pm=pm, theta=theta,
                 gamma=args.gamma, T=args.T, scripts=args.scripts,
                 noise_reps=args.noise_reps, bins=args.bins, workers=workers)
    write_csv(args.out, meta, COLUMNS["u1-hist"], out)
    print(f"wrote {args.out} ({len(out)} rows)")


def cmd_classical_compare(args) -> None:
    seed = _resolve_seed(args.seed)
    workers = _resolve_workers(args.workers)
    pm, theta = parse_grid(args.pm), parse_grid(args.theta)
    _check_counts(runs=args.runs)
    rows = sweep_grid(
        "adaptive", args.L, pm, theta, {"runs": args.runs}, seed,
        gamma=args.gamma, depth=args.T, workers=workers,
    )
    out = [
        (r["pm"], r["theta"], r["gamma"], r["L"], r["runs"], r["steady_n"],
         classical_steady_n(r["pm"], r["theta"], r["gamma"]))
        for r in rows
    ]
    meta = _meta(args, "classical-compare", seed, L=args.L, pm=pm, theta=theta,
                 gamma=args.gamma, T=args.T, runs=args.runs, workers=workers)
    write_csv(args.out, meta, COLUMNS["classical-compare"], out)
    print(f"wrote {args.out} ({len(out)} rows)")


def _superop_rows(theta: float, p_m: float) -> list[tuple]:
    theta_max = np.pi * theta
    phi, eta = decompose_error_channel(theta_max)
    named = [("error", error_channel(theta_max))]
    for axis in ("x", "y", "z"):
        named.append((f"coherent_{axis}", coherent_channel(axis, phi)))
        named.append((f"incoherent_{axis}", incoherent_channel(axis, eta)))
        named.append((f"commutator_{axis}", commutator_superop(axis)))
    named.append(("measurement", measurement_channel(p_m)))
    named.append(("measurement_feedback", measurement_feedback_channel(p_m)))
    rows = []
    for name, mat in named:
        for i in range(4):
            for j in range(4):
                rows.append((name, i, j, float(mat[i, j].real), float(mat[i, j].imag)))
    return rows


def cmd_analytics(args) -> None:
    theta, gamma = parse_grid(args.theta), parse_grid(args.gamma)
    out = []
    for t in theta:
        for g in gamma:
            p = channel_params(t, g, p_m=args.pm)
            out.append(
                (t, g, args.pm, avg_gate_fidelity(t, g), p.phi, p.eta,
                 p.nu, p.nu_prime, p.xi)
            )
    meta = _meta(args, "analytics", 0, theta=theta, gamma=gamma, pm=args.pm)
    write_csv(args.out, meta, COLUMNS["analytics"], out)
    print(f"wrote {args.out} ({len(out)} rows)")
    if args.superops_out:
        sup_meta = _meta(args, "superops", 0, theta=theta[0], pm=args.pm)
        write_csv(args.superops_out, sup_meta, COLUMNS["superops"],
                  _superop_rows(theta[0], args.pm))
        print(f"wrote {args.superops_out}")


def cmd_benchmark_noise(args) -> None:
    try:
        theta_hat, fidelity = infer_noise_amplitude(args.nbar, args.pm, args.gamma)
    except ValueError as exc:
        raise UsageError(str(exc))
    meta = _meta(args, "benchmark-noise", 0, nbar=args.nbar, pm=args.pm, gamma=args.gamma)
    write_csv(args.out, meta, COLUMNS["benchmark-noise"],
              [(args.nbar, args.pm, args.gamma, theta_hat, fidelity)])
    print(
        f"inferred noise amplitude {theta_hat:.9g} "
        f"(average gate fidelity {fidelity:.9g}); wrote {args.out}"
    )


def _add_common(p: argparse.ArgumentParser, u1: bool = False, sim: bool = True) -> None:
    if sim:
        p.add_argument("--L", type=int, default=12, help="qubit count")
        p.add_argument("--pm", default="0.5", help="measurement rate (value or grid)")
        p.add_argument("--theta", default="0.5", help="noise amplitude (value or grid)")
        p.add_argument("--gamma", type=float, default=0.5, help="noise rate")
        p.add_argument("--T", type=int, default=None, help="circuit depth (layers)")
        p.add_argument("--seed", default="1", help="master seed (integer or 'random')")
        p.add_argument("--workers", type=int, default=None,
                       help="worker processes (default: MCL_WORKERS or CPU count)")
        if u1:
            p.add_argument("--scripts", type=int, default=200,
                           help="outcome-record realizations")
            p.add_argument("--noise-reps", type=int, default=100, dest="noise_reps",
                           help="noise realizations per script")
        else:
            p.add_argument("--runs", type=int, default=1000, help="trajectories")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="mcl", description=__doc__)
    parser.add_argument("--version", action="version", version=f"mcl {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)

    p = sub.add_parser("adaptive-sweep", help="steady-state order parameter and "
                       "fluctuations over a (pm, theta) grid")
    _add_common(p)
    p.add_argument("--out", default="adaptive_sweep.csv")
    p.set_defaults(handler=cmd_adaptive_sweep)

    p = sub.add_parser("adaptive-dynamics", help="order-parameter time series")
    _add_common(p)
    p.add_argument("--out", default="adaptive_dynamics.csv")
    p.set_defaults(handler=cmd_adaptive_dynamics)

    p = sub.add_parser("u1-sweep", help="charge fluctuations and purity of the "
                       "charge-conserving model over a (pm, theta) grid")
    _add_common(p, u1=True)
    p.add_argument("--out", default="u1_sweep.csv")
    p.set_defaults(handler=cmd_u1_sweep)

    p = sub.add_parser("u1-hist", help="per-realization charge-fluctuation histograms")
    _add_common(p, u1=True)
    p.add_argument("--bins", type=int, default=20)
    p.add_argument("--out", default="u1_hist.csv")
    p.set_defaults(handler=cmd_u1_hist)

    p = sub.add_parser("classical-compare", help="simulated steady state vs the "
                       "closed-form population model")
    _add_common(p)
    p.add_argument("--out", default="classical_compare.csv")
    p.set_defaults(handler=cmd_classical_compare)

    p = sub.add_parser("analytics", help="fidelity table, channel decomposition, "
                       "and superoperator dumps")
    p.add_argument("--theta", default="0:1:0.1")
    p.add_argument("--gamma", default="0.5")
    p.add_argument("--pm", type=float, default=0.0,
                   help="measurement rate entering the leakage parameter xi")
    p.add_argument("--out", default="analytics.csv")
    p.add_argument("--superops-out", default=None,
                   help="also dump channel matrices (first theta, given pm)")
    p.set_defaults(handler=cmd_analytics)

    p = sub.add_parser("benchmark-noise", help="invert a measured steady-state "
                       "order parameter into a noise amplitude and gate fidelity")
    p.add_argument("--nbar", type=float, required=True)
    p.add_argument("--pm", type=float, required=True)
    p.add_argument("--gamma", type=float, default=0.5)
    p.add_argument("--out", default="benchmark_noise.csv")
    p.set_defaults(handler=cmd_benchmark_noise)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.handler(args)
    except UsageError as exc:
        print(f"mcl: error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - runtime failures exit 2 with a message
        print(f"mcl: runtime error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
