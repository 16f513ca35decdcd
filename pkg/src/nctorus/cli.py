"""Command-line front end.

Exit codes: 0 success / verification passed, 1 verification failed,
2 malformed input or infeasible construction.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import algebra, builders, verifier
from .builders import BuilderError, ProjectionSpec
from .verifier import VerifyConfig

EXIT_OK, EXIT_FAIL, EXIT_ERROR = 0, 1, 2


class CliError(Exception):
    pass


def _read_json(path) -> dict:
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise CliError(f"cannot read {path}: {exc}") from exc


def _write_json(path, obj) -> None:
    Path(path).write_text(json.dumps(obj, indent=2) + "\n", encoding="utf-8")


def load_spec(path) -> ProjectionSpec:
    try:
        return ProjectionSpec.from_json(_read_json(path))
    except (KeyError, TypeError, ValueError) as exc:
        raise CliError(f"malformed spec {path}: {exc}") from exc


def load_element(path) -> algebra.TorusElement:
    try:
        return algebra.from_json(_read_json(path))
    except (KeyError, TypeError, ValueError) as exc:
        raise CliError(f"malformed element {path}: {exc}") from exc


def _config(args) -> VerifyConfig:
    cfg = VerifyConfig(seed=args.seed)
    if getattr(args, "tol", None) is not None:
        cfg = replace(cfg, tol=args.tol)
    if getattr(args, "samples", None) is not None:
        cfg = replace(cfg, samples=args.samples)
    if getattr(args, "oracle_trials", None) is not None:
        cfg = replace(cfg, oracle_trials=args.oracle_trials)
    return cfg


def _summary(p: algebra.TorusElement) -> dict:
    tr = algebra.trace(p)
    try:
        k0 = verifier.k0_class(p.theta, tr)
        label = [k0.m, k0.n]
    except (verifier.NoClassFound, verifier.AmbiguousClass):
        label = None
    return {"theta": p.theta, "trace": tr, "order": algebra.order(p), "k0": label}


# -- commands -----------------------------------------------------------------


def cmd_build(args) -> int:
    spec = load_spec(args.spec)
    element = builders.build(spec)
    payload = algebra.to_json(element)
    payload["spec"] = spec.to_json()
    out = Path(args.out) if args.out else Path(args.spec).with_suffix(".element.json")
    _write_json(out, payload)
    # summarise the element as written so a reload reproduces it bitwise
    summary = _summary(load_element(out))
    summary["element"] = str(out)
    print(json.dumps(summary))
    return EXIT_OK


def cmd_verify(args) -> int:
    element = load_element(args.element)
    report = verifier.verify(element, _config(args))
    data = report.to_json()
    if args.out:
        _write_json(args.out, data)
    print(json.dumps({k: data[k] for k in data if k != "config"}))
    return EXIT_OK if report.pass_ else EXIT_FAIL


def plot_columns(element: algebra.TorusElement, resolution: int) -> dict:
    """Sampled columns (x, p_k(x)) for every nonzero band k >= 0."""
    cols = {}
    for k, f in sorted(element.coeffs.items()):
        if k < 0:
            continue
        x = np.unique(np.concatenate([np.arange(resolution) / resolution, f.breakpoints]))
        cols[k] = (x, f(x))
    return cols


def cmd_plot(args) -> int:
    if args.resolution < 64:
        raise CliError("resolution must be at least 64")
    raw = Path(args.element).read_bytes() if Path(args.element).exists() else b""
    element = load_element(args.element)
    out = Path(args.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
        meta = {
            "theta": element.theta,
            "element_sha256": hashlib.sha256(raw).hexdigest(),
            "resolution": args.resolution,
            "bands": {},
        }
        for k, (x, y) in plot_columns(element, args.resolution).items():
            path = out / f"p{k}.csv"
            with path.open("w", encoding="utf-8") as fh:
                fh.write("x,value\n")
                for xi, yi in zip(x, y):
                    fh.write(f"{xi:.17g},{yi:.17g}\n")
            meta["bands"][str(k)] = {
                "file": path.name,
                "breakpoints": element.coeffs[k].breakpoints.tolist(),
            }
        _write_json(out / "plot_meta.json", meta)
    except OSError as exc:
        raise CliError(f"cannot write plot data: {exc}") from exc
    print(json.dumps({"out": str(out), "bands": sorted(int(k) for k in meta["bands"])}))
    return EXIT_OK


def cmd_homotopy(args) -> int:
    spec = load_spec(args.spec)
    cfg = _config(args)
    rows = []
    worst = 0.0
    ok = True
    for t, p in builders.homotopy_path(spec, args.steps):
        rep = verifier.verify(p, cfg)
        res = max(rep.residual_selfadjoint, rep.residual_idempotent_in_band, rep.residual_idempotent_overflow,
                  rep.residual_eqK, rep.residual_eq0)
        worst = max(worst, res)
        ok = ok and rep.pass_
        rows.append({"t": t, "pass": rep.pass_, "max_residual": res, "trace": rep.trace})
        print(f"t={t:.4f}  pass={rep.pass_}  residual={res:.3e}  trace={rep.trace:.12f}")
    result = {"steps": rows, "max_residual": worst, "pass": ok}
    if args.out:
        _write_json(args.out, result)
    print(json.dumps({"max_residual": worst, "pass": ok}))
    return EXIT_OK if ok else EXIT_FAIL


def k0_sweep(theta: float, m_max: int) -> list:
    """Power-Rieffel projections for M = 1..m_max with their traces and labels."""
    if m_max < 1:
        raise CliError("m-max must be at least 1")
    rows = []
    for M in range(1, m_max + 1):
        p = builders.power_rieffel(theta, M, builders.default_eps(theta, M))
        frac = (M * theta) % 1.0
        rows.append({
            "M": M,
            "frac": frac,
            "trace": algebra.trace(p),
            "label": [-int(np.floor(M * theta)), M],
        })
    return rows


def cmd_k0_sweep(args) -> int:
    if not 0.0 < args.theta < 1.0:
        raise CliError("theta must lie in (0, 1)")
    rows = k0_sweep(args.theta, args.m_max)
    print(f"{'M':>4}  {'frac(M theta)':>16}  {'trace':>16}  K0")
    for r in rows:
        print(f"{r['M']:>4}  {r['frac']:>16.10f}  {r['trace']:>16.10f}  ({r['label'][0]}, {r['label'][1]})")
    traces = sorted(r["trace"] for r in rows)
    gaps = np.diff(traces)
    distinct = len(traces) < 2 or float(np.min(gaps)) > 1e-9
    print(json.dumps({"distinct": distinct, "min_gap": float(np.min(gaps)) if len(gaps) else None}))
    return EXIT_OK if distinct else EXIT_FAIL


# -- entry point ----------------------------------------------------------------


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nctorus", description="Projections in the noncommutative 2-torus")
    parser.add_argument("--seed", type=int, default=0, help="seed for the oracle test-function phases")
    sub = parser.add_subparsers(dest="command", required=True)

    def seeded(p):
        p.add_argument("--seed", type=int, default=argparse.SUPPRESS)
        return p

    p = seeded(sub.add_parser("build", help="build an element from a projection spec"))
    p.add_argument("spec")
    p.add_argument("--out", "-o")
    p.set_defaults(func=cmd_build)

    p = seeded(sub.add_parser("verify", help="verify an element file"))
    p.add_argument("element")
    p.add_argument("--tol", type=float)
    p.add_argument("--samples", type=int)
    p.add_argument("--oracle-trials", type=int)
    p.add_argument("--out", "-o")
    p.set_defaults(func=cmd_verify)

    p = seeded(sub.add_parser("plot", help="write CSV columns for every band"))
    p.add_argument("element")
    p.add_argument("--resolution", type=int, default=1024)
    p.add_argument("--out", "-o", default="plot")
    p.set_defaults(func=cmd_plot)

    p = seeded(sub.add_parser("homotopy", help="verify a bump-deformation sweep"))
    p.add_argument("spec")
    p.add_argument("--steps", type=int, default=11)
    p.add_argument("--tol", type=float)
    p.add_argument("--samples", type=int)
    p.add_argument("--oracle-trials", type=int)
    p.add_argument("--out", "-o")
    p.set_defaults(func=cmd_homotopy)

    p = seeded(sub.add_parser("k0-sweep", help="Power-Rieffel traces for M = 1..m-max"))
    p.add_argument("--theta", type=float, required=True)
    p.add_argument("--m-max", type=int, default=10)
    p.set_defaults(func=cmd_k0_sweep)
    return parser


def main(argv=None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (CliError, BuilderError, ValueError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
