"""Command-line driver: every experiment as a reproducible subcommand.

Structured results go to JSON (deterministic bytes for a fixed config and
seed; wall-clock data lives in a separate ``<out>.meta.json`` sidecar so the
main artifact stays byte-stable), scan tables go to CSV.  Exit codes: 0 on
success, 2 for configuration/usage errors, 3 for numeric failures.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import math
import sys
import time
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .errors import ConfigurationError, DomainError, NumericError
from .families import (
    admissibility_integral,
    eval_gradient,
    eval_zonal,
    gamma_tv,
    localization_scan,
    make_family,
)
from .frames import (
    band_dimension,
    frame_bounds_eig,
    frame_bounds_mc,
    make_scales,
    random_band_function,
    reconstruct,
    semiframe_bounds,
)
from .kernel import KernelSpec, kernel_closed, kernel_localization_scan, kernel_series
from .parallel import resolve_threads
from .special import Dimension
from .sphere import (
    build_phase_grid,
    density_check,
    read_grid,
    sample_uniform,
    write_grid,
)

__all__ = ["main", "run", "validate_config", "build_parser"]


# ---------------------------------------------------------------------------
# argument plumbing


def _ints(text: str):
    return [int(v) for v in text.split(",") if v]


def _floats(text: str):
    return [float(v) for v in text.split(",") if v]


def _parse_scales(spec: str):
    """Scale-sequence spec: geometric:b0,q,J or explicit:v1,v2,..."""
    kind, _, rest = spec.partition(":")
    try:
        if kind == "geometric":
            b0, q, J = rest.split(",")
            return make_scales("geometric", b0=float(b0), q=float(q), J=int(J))
        if kind == "explicit":
            return make_scales("explicit", scales=_floats(rest))
    except ConfigurationError:
        raise
    except ValueError as exc:
        raise ConfigurationError(f"bad scale spec {spec!r}: {exc}") from None
    raise ConfigurationError(f"unknown scale kind {kind!r} (geometric | explicit)")


def _read_config_tokens(path: str) -> list:
    """Flat `key = value` config lines as argv tokens (flags override them)."""
    tokens = []
    for raw in Path(path).read_text().splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigurationError(f"bad config line {raw!r}: expected key = value")
        key = key.strip().replace("_", "-")
        value = value.strip()
        if value.lower() in ("true", "yes"):
            tokens.append(f"--{key}")
        else:
            tokens.extend([f"--{key}", value])
    return tokens


def validate_config(args: argparse.Namespace) -> argparse.Namespace:
    """Cross-field constraints, raised with the offending field named."""
    checks = [
        ("n", lambda v: v >= 2, "n must be >= 2 (n = 1 is degenerate)"),
        ("m", lambda v: v >= 1, "m must be >= 1"),
        ("r", lambda v: v >= 1, "r must be >= 1"),
        ("q", lambda v: 0.0 < v < 1.0, "q must lie in (0, 1)"),
        ("eps_tilde", lambda v: v < 0.5, "eps-tilde must be < 1/2"),
        ("omega", lambda v: v > 0, "omega must be positive"),
        ("epsilon", lambda v: v > 0, "epsilon must be positive"),
        ("h", lambda v: v > 0, "h must be positive"),
        ("a_min", lambda v: v > 0, "a-min must be positive"),
        ("tol", lambda v: v > 0, "tol must be positive"),
        ("band", lambda v: v >= 1, "band must be >= 1"),
        ("trials", lambda v: v >= 1, "trials must be >= 1"),
    ]
    for name, ok, message in checks:
        value = getattr(args, name, None)
        if value is not None and not ok(value):
            raise ConfigurationError(f"{message} (got {value})")
    return args


def _effective_config(args: argparse.Namespace) -> dict:
    skip = ("func", "config")
    out = {}
    for key, value in sorted(vars(args).items()):
        if key in skip:
            continue
        if isinstance(value, Path):
            value = str(value)
        out[key] = value
    return out


def _emit(args, payload: dict, runtime: float) -> None:
    doc = {"version": __version__, "config": _effective_config(args)}
    doc.update(payload)
    text = json.dumps(doc, indent=2) + "\n"
    if args.output:
        Path(args.output).write_text(text)
        meta = {
            "timestamp": datetime.now(timezone.utc).isoformat(),
            "runtime_seconds": runtime,
        }
        Path(str(args.output) + ".meta.json").write_text(json.dumps(meta, indent=2) + "\n")
    else:
        sys.stdout.write(text)


def _write_csv(path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(float(v)) if isinstance(v, float) else v for v in row])


def _make_family_from(args):
    dim = Dimension(args.n)
    return make_family(
        args.family,
        dim,
        m=getattr(args, "m", None),
        nu=getattr(args, "nu", None),
        r=getattr(args, "r", None),
    )


def _load_grid(args):
    grid = read_grid(args.grid)
    if getattr(args, "n", None) is not None and args.n != grid.dim.n:
        raise ConfigurationError(
            f"grid is on S^{grid.dim.n} but n={args.n} was requested"
        )
    return grid


# ---------------------------------------------------------------------------
# subcommands


def _cmd_eval(args):
    family = _make_family_from(args)
    thetas = args.theta
    rows = []
    for theta in thetas:
        fn = eval_gradient if args.gradient else eval_zonal
        val = fn(family, args.a, theta, args.tol, a_min=args.a_min)
        rows.append({"theta": theta, "value": val.value, "terms": val.terms})
    return {"family": family.label, "a": args.a, "gradient": args.gradient, "values": rows}


def _cmd_admissibility(args):
    family = _make_family_from(args)
    numeric = admissibility_integral(family, rtol=args.rtol)
    closed = family.i_gamma
    tv = gamma_tv(family)
    return {
        "family": family.label,
        "i_gamma_closed": closed,
        "i_gamma_numeric": numeric,
        "rel_deviation": abs(numeric - closed) / closed,
        "frame_constant": family.frame_constant,
        "gamma_tv": tv.value,
        "gamma_tv_converged": tv.converged,
        "zero_mean": family.zero_mean,
    }


def _cmd_semiframe(args):
    family = _make_family_from(args)
    if args.scales is not None:
        seq = _parse_scales(args.scales)
    else:
        seq = make_scales("geometric", b0=args.b0, q=args.q, J=args.J)
    result = semiframe_bounds(family, seq, (args.lmin, args.lmax))
    if args.profile:
        _write_csv(args.profile, ["l", "S"], zip(result.ls.tolist(), result.profile))
    return {
        "family": family.label,
        "scales": {"kind": seq.kind, "J": len(seq), "b0": float(seq.scales[0])},
        "l_range": [args.lmin, args.lmax],
        "A": result.A,
        "B": result.B,
        "ratio": result.B / result.A,
    }


def _cmd_localization(args):
    family = _make_family_from(args)
    if args.a_grid is None:
        args.a_grid = args.theta_grid  # coupled grids by default
    a_grid = np.geomspace(args.a_grid[0], args.a_grid[1], int(args.a_grid[2]))
    theta_grid = np.geomspace(args.theta_grid[0], args.theta_grid[1], int(args.theta_grid[2]))
    report = localization_scan(
        family,
        args.exponent,
        a_grid,
        theta_grid,
        gradient=args.gradient,
        tol=args.tol,
        refine=not args.no_refine,
        collect_table=bool(args.table),
        threads=resolve_threads(args.threads),
    )
    if args.table:
        _write_csv(args.table, ["a", "theta", "value", "scaled_value"], report.table)
    return {
        "family": family.label,
        "exponent": args.exponent,
        "gradient": args.gradient,
        "sup": report.sup,
        "arg_a": report.arg_a,
        "arg_theta": report.arg_theta,
        "sup_coarse": report.sup_coarse,
        "stability": report.stability,
        "grid_shape": list(report.grid_shape),
    }


def _cmd_kernel_check(args):
    dim = Dimension(args.n)
    spec = KernelSpec(dim, args.m)
    rng = np.random.default_rng(args.seed)
    worst = 0.0
    for _ in range(args.draws):
        a, b = rng.uniform(0.3, 1.5, 2)
        x, y = sample_uniform(dim, 2, rng)
        closed = kernel_closed(spec, a, x, b, y, args.tol)
        series = kernel_series(spec, a, x, b, y, args.tol)
        denom = max(abs(closed), abs(series), 1e-300)
        worst = max(worst, abs(closed - series) / denom)
    scan = kernel_localization_scan(
        spec,
        omega=args.omega,
        epsilon=args.epsilon,
        eps_tilde=args.eps_tilde,
        b0=args.b0,
        scale_count=args.scale_count,
        angle_count=args.angle_count,
        threads=resolve_threads(args.threads),
    )
    return {
        "n": args.n,
        "m": args.m,
        "identity": {"draws": args.draws, "max_rel_error": worst},
        "scan": [
            {
                "region": row.region,
                "quantity": row.quantity,
                "d_hat": row.d_hat,
                "stability": row.stability,
                "params": row.params,
            }
            for row in scan
        ],
    }


def _cmd_grid_build(args):
    dim = Dimension(args.n)
    seq = _parse_scales(args.scales)
    k = args.k[0] if len(args.k) == 1 else args.k
    grid = build_phase_grid(
        dim,
        seq,
        k,
        placement=args.placement,
        seed=args.seed,
        jitter_fraction=args.jitter_fraction,
        declared_xi=args.declared_xi,
        measure_profile=args.measure_profile,
    )
    write_grid(grid, args.output)
    meta = {
        "timestamp": datetime.now(timezone.utc).isoformat(),
        "version": __version__,
        "config": _effective_config(args),
        "points": len(grid),
        "delta": grid.delta,
        "xi": grid.xi,
    }
    Path(str(args.output) + ".meta.json").write_text(json.dumps(meta, indent=2) + "\n")
    sys.stdout.write(
        f"wrote {args.output}: {len(grid)} points, delta={grid.delta:.6g}, "
        f"xi={grid.xi:.6g}\n"
    )
    return None


def _cmd_grid_density(args):
    grid = read_grid(args.grid)
    report = density_check(
        grid,
        args.rho,
        h=args.h,
        probes=args.probes,
        seed=args.seed,
        resolution=args.resolution,
    )
    return {
        "grid": str(args.grid),
        "covering_radius": report.covering_radius,
        "rho": report.rho,
        "passed": report.passed,
        "probes": report.probes,
        "h": report.h,
        "worst_b": report.worst_b,
        "worst_direction": [float(v) for v in report.worst_direction],
    }


def _cmd_frame_audit(args):
    grid = _load_grid(args)
    if getattr(args, "n", None) is None:
        args.n = grid.dim.n
    family = _make_family_from(args)
    if args.method == "mc":
        report = frame_bounds_mc(
            family,
            grid,
            args.band,
            args.trials,
            args.seed,
            l_min=args.lmin,
            centers_per_trial=args.centers_per_trial,
        )
    else:
        centers = args.centers
        if centers is None:
            centers = band_dimension(grid.dim, args.band, args.lmin or 1) + 20
        report = frame_bounds_eig(
            family, grid, args.band, centers, l_min=args.lmin, seed=args.seed
        )
    payload = dataclasses.asdict(report)
    payload.pop("runtime")
    payload["ratio"] = report.B_hat / report.A_hat if report.A_hat > 0 else math.inf
    return payload


def _cmd_reconstruct(args):
    grid = _load_grid(args)
    if getattr(args, "n", None) is None:
        args.n = grid.dim.n
    family = _make_family_from(args)
    lm = args.lmin if args.lmin is not None else 1
    centers = args.centers
    if centers is None:
        centers = band_dimension(grid.dim, args.band, lm) + 20
    rng = np.random.default_rng(np.random.SeedSequence((int(args.seed), 1)))
    target = random_band_function(grid.dim, args.band, centers, rng, lm)
    result, report = reconstruct(
        family,
        grid,
        args.band,
        target,
        tol=args.tol,
        max_iterations=args.max_iterations,
    )
    return {
        "family": family.label,
        "band": args.band,
        "l_min": lm,
        "centers": centers,
        "target_norm": math.sqrt(target.norm_sq),
        "rel_error": report.rel_error,
        "residual": report.residual,
        "iterations": report.iterations,
        "iteration_bound": report.iteration_bound,
        "A_hat": report.A_hat,
        "B_hat": report.B_hat,
        "converged": report.converged,
    }


# ---------------------------------------------------------------------------
# parser


def _add_common(sp, *, family=True, output=True):
    sp.add_argument("--config", help="flat key = value config file (flags override)")
    sp.add_argument("--threads", type=int, default=None, help="worker cap (or SPHFRAMES_THREADS)")
    if family:
        sp.add_argument(
            "--family",
            default="poisson",
            choices=[
                "poisson",
                "poisson_fractional",
                "abel_poisson",
                "gauss_weierstrass",
                "mexican_needlet",
            ],
        )
        sp.add_argument("--m", type=int, default=2, help="integer order (poisson)")
        sp.add_argument("--nu", type=float, default=None, help="fractional order")
        sp.add_argument("--r", type=int, default=None, help="needlet order")
        sp.add_argument("--n", type=int, default=2, help="sphere dimension S^n")
    if output:
        sp.add_argument("-o", "--output", default=None, help="JSON output path (default stdout)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sphframes",
        description="Spherical wavelet frames: evaluation, localization scans, "
        "phase-space grids, and frame audits.",
    )
    parser.add_argument("--version", action="version", version=f"sphframes {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    sp = sub.add_parser("eval", help="evaluate a wavelet (or its gradient) at a scale")
    _add_common(sp)
    sp.add_argument("--a", type=float, required=True, help="scale")
    sp.add_argument("--theta", type=_floats, required=True, help="angle(s), comma separated")
    sp.add_argument("--gradient", action="store_true")
    sp.add_argument("--tol", type=float, default=1e-12)
    sp.add_argument("--a-min", type=float, default=1e-3)
    sp.set_defaults(func=_cmd_eval)

    sp = sub.add_parser("admissibility", help="admissibility integral and normalization")
    _add_common(sp)
    sp.add_argument("--rtol", type=float, default=1e-10)
    sp.set_defaults(func=_cmd_admissibility)

    sp = sub.add_parser("semiframe", help="scale-discretized frame profile S(l)")
    _add_common(sp)
    sp.add_argument("--b0", type=float, default=20.0)
    sp.add_argument("--q", type=float, default=0.99)
    sp.add_argument("--J", type=int, default=2000)
    sp.add_argument("--scales", default=None, help="geometric:b0,q,J or explicit:...")
    sp.add_argument("--lmin", type=int, default=1)
    sp.add_argument("--lmax", type=int, default=200)
    sp.add_argument("--profile", default=None, help="CSV path for the S(l) profile")
    sp.set_defaults(func=_cmd_semiframe)

    sp = sub.add_parser("localization", help="scaled-sup localization scan")
    _add_common(sp)
    sp.add_argument("--exponent", type=float, required=True)
    sp.add_argument("--gradient", action="store_true")
    sp.add_argument("--a-grid", type=_floats, default=None, help="min,max,count (geometric)")
    sp.add_argument("--theta-grid", type=_floats, default=[0.01, 314.159, 96])
    sp.add_argument("--tol", type=float, default=1e-9)
    sp.add_argument("--no-refine", action="store_true")
    sp.add_argument("--table", default=None, help="CSV path for the scan table")
    sp.set_defaults(func=_cmd_localization)

    sp = sub.add_parser("kernel-check", help="kernel identity draws + localization scan")
    _add_common(sp)
    sp.add_argument("--draws", type=int, default=20)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--tol", type=float, default=1e-14)
    sp.add_argument("--omega", type=float, default=1.0)
    sp.add_argument("--epsilon", type=float, default=0.25)
    sp.add_argument("--eps-tilde", type=float, default=0.25)
    sp.add_argument("--b0", type=float, default=1.0)
    sp.add_argument("--scale-count", type=int, default=16)
    sp.add_argument("--angle-count", type=int, default=48)
    sp.set_defaults(func=_cmd_kernel_check)

    sp = sub.add_parser("grid-build", help="build a phase-space grid file")
    _add_common(sp, family=False, output=False)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--k", type=_ints, required=True, help="partition level(s)")
    sp.add_argument("--scales", required=True, help="geometric:b0,q,J or explicit:...")
    sp.add_argument("--placement", default="center", choices=["center", "random", "jitter"])
    sp.add_argument("--jitter-fraction", type=float, default=0.5)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--declared-xi", type=float, default=None)
    sp.add_argument("--measure-profile", default="default", choices=["fast", "default"])
    sp.add_argument("-o", "--output", required=True, help="grid JSON path")
    sp.set_defaults(func=_cmd_grid_build)

    sp = sub.add_parser("grid-density", help="hyperbolic covering-radius audit")
    _add_common(sp, family=False)
    sp.add_argument("--grid", required=True)
    sp.add_argument("--rho", type=float, required=True)
    sp.add_argument("--h", type=float, default=1.0)
    sp.add_argument("--probes", type=int, default=64)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--resolution", type=int, default=48)
    sp.set_defaults(func=_cmd_grid_density)

    sp = sub.add_parser("frame-audit", help="frame bounds on a grid (mc or eig)")
    _add_common(sp)
    sp.add_argument("--grid", required=True)
    sp.add_argument("--method", default="eig", choices=["mc", "eig"])
    sp.add_argument("--band", type=int, required=True, help="band limit L")
    sp.add_argument("--lmin", type=int, default=None)
    sp.add_argument("--trials", type=int, default=50)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--centers", type=int, default=None, help="eig: kernel centers")
    sp.add_argument("--centers-per-trial", type=int, default=32)
    sp.set_defaults(func=_cmd_frame_audit)

    sp = sub.add_parser("reconstruct", help="frame-algorithm recovery of a random target")
    _add_common(sp)
    sp.add_argument("--grid", required=True)
    sp.add_argument("--band", type=int, required=True)
    sp.add_argument("--lmin", type=int, default=None)
    sp.add_argument("--centers", type=int, default=None)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--tol", type=float, default=1e-6)
    sp.add_argument("--max-iterations", type=int, default=None)
    sp.set_defaults(func=_cmd_reconstruct)

    return parser


def _inject_config(argv):
    """Expand --config file tokens so explicit flags take precedence."""
    if "--config" not in argv:
        return argv
    idx = argv.index("--config")
    if idx + 1 >= len(argv):
        raise ConfigurationError("--config needs a file path")
    tokens = _read_config_tokens(argv[idx + 1])
    rest = argv[:idx] + argv[idx + 2 :]
    if not rest:
        raise ConfigurationError("--config cannot replace the subcommand")
    return [rest[0]] + tokens + rest[1:]


def run(argv) -> int:
    argv = _inject_config(list(argv))
    parser = build_parser()
    args = parser.parse_args(argv)
    validate_config(args)
    t0 = time.perf_counter()
    payload = args.func(args)
    if payload is not None:
        _emit(args, payload, time.perf_counter() - t0)
    return 0


def main(argv=None) -> int:
    if argv is None:
        argv = sys.argv[1:]
    try:
        return run(argv)
    except (ConfigurationError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericError as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
