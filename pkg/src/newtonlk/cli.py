"""Command-line front end.

Subcommands::

    newtonlk identity-suite --n-max 8 --trials 100 --seed 42
    newtonlk verify-example --family umbilic_sphere_cap --n 2 --tau 0.5 --k 0
    newtonlk fit --csv samples.csv --k 0 --c 1

Every command prints (or writes with ``--out``) one JSON document with the
keys ``schema_version``, ``config_echo``, ``predicted``, ``fitted``,
``residuals``, ``identities`` and ``classification``; sections that do not
apply are ``null``.  Exit codes: 0 all checks passed, 1 some check failed,
2 usage or configuration error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from typing import Optional

import numpy as np

from . import catalog, symfun, verify
from .chart import AmbientSpace
from .errors import NewtonLkError, SchemaError

SCHEMA_VERSION = 1
EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3

TOL_IDENTITY = 1e-12
TOL_POSITION = 1e-5
TOL_RMS = 1e-5
TOL_SELFADJOINT = 1e-6
TOL_ON_MANIFOLD = 1e-8


class UsageError(Exception):
    pass


# -- JSON ----------------------------------------------------------------------

def _plain(obj):
    """Convert numpy values to JSON-ready Python values (non-finite -> None)."""
    if isinstance(obj, dict):
        return {str(key): _plain(val) for key, val in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(val) for val in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        val = float(obj)
        return val + 0.0 if math.isfinite(val) else None
    return obj


def render_report(report: dict) -> str:
    return json.dumps(_plain(report), indent=2, allow_nan=False) + "\n"


def _report(config_echo, predicted=None, fitted=None, residuals=None, identities=None, classification=None) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "config_echo": config_echo,
        "predicted": predicted,
        "fitted": fitted,
        "residuals": residuals,
        "identities": identities,
        "classification": classification,
    }


def _emit(report: dict, out: Optional[str]) -> None:
    text = render_report(report)
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)


# -- CSV -----------------------------------------------------------------------

def csv_header(n: int) -> list[str]:
    return (
        [f"u_{i + 1}" for i in range(n)]
        + [f"x_{i}" for i in range(n + 2)]
        + [f"Lkx_{i}" for i in range(n + 2)]
    )


def write_samples_csv(path: str, samples: verify.SampleSet) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(csv_header(samples.n))
        for u, x, lkx in zip(samples.u, samples.x, samples.lkx):
            writer.writerow([repr(float(v)) for v in np.concatenate([u, x, lkx])])


def read_samples_csv(path: str, k: int, c: int) -> verify.SampleSet:
    """Load a sample CSV; raises :class:`SchemaError` with row/column context."""
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise SchemaError(f"{path}: empty file (no header)")
    header = [h.strip() for h in rows[0]]
    n = sum(1 for h in header if h.startswith("u_"))
    if n < 1 or header != csv_header(n):
        raise SchemaError(
            f"{path}: header must be u_1..u_n, x_0..x_(n+1), Lkx_0..Lkx_(n+1); got {len(header)} columns "
            f"starting {header[:3]}"
        )
    body = [(i, r) for i, r in enumerate(rows[1:], start=2) if any(cell.strip() for cell in r)]
    if not body:
        raise SchemaError(f"{path}: no sample rows after the header")
    data = np.empty((len(body), len(header)))
    for j, (line, row) in enumerate(body):
        if len(row) != len(header):
            raise SchemaError(
                f"{path}: row {line} has {len(row)} columns, expected {len(header)} for n={n} (mixed n?)"
            )
        for col, cell in enumerate(row):
            try:
                data[j, col] = float(cell)
            except ValueError:
                raise SchemaError(f"{path}: row {line}, column {header[col]}: not a number: {cell!r}") from None
            if not math.isfinite(data[j, col]):
                raise SchemaError(f"{path}: row {line}, column {header[col]}: non-finite value")
    u, x, lkx = data[:, :n], data[:, n : 2 * n + 2], data[:, 2 * n + 2 :]
    space = AmbientSpace(c, n)
    for j, (line, _) in enumerate(body):
        if space.constraint_defect(x[j]) > TOL_ON_MANIFOLD:
            raise SchemaError(f"{path}: row {line}: x is not on the c={c} model space")
    if len(body) < 2:
        raise SchemaError(f"{path}: need at least 2 sample rows, got {len(body)}")
    if not 0 <= k <= n - 1:
        raise UsageError(f"k={k} outside [0, {n - 1}] for n={n}")
    return verify.SampleSet(k, c, u, x, lkx)


# -- report sections -------------------------------------------------------------

def _fit_section(fit: verify.AffineFit) -> dict:
    return {
        "A": fit.A,
        "b": fit.b,
        "constrained_selfadjoint": fit.constrained,
        "rank_info": fit.rank_info,
        "rcond": fit.tolerance,
        "gauge_dimension": int(fit.gauge.shape[1]) if fit.gauge.size else 0,
    }


def _classification_section(rep: verify.ClassificationReport, expected: Optional[str] = None) -> dict:
    out = {
        "verdict": rep.verdict,
        "also_matches": list(rep.also_matches),
        "reason": rep.reason,
        "evidence": rep.evidence,
        "thresholds": rep.thresholds,
    }
    if expected is not None:
        out["expected"] = expected
    return out


def expected_verdict(fam: catalog.ExampleFamily, k: int) -> str:
    """Verdict the classification should reach for a catalog family."""
    if fam.kind == "riemannian_product":
        return "isoparametric_product"
    if fam.kind == "zero_Hk1":
        return "zero_Hk1_const_Hk"
    if abs(catalog.predicted_Hk(fam, k + 1)) <= 1e-12:
        return "zero_Hk1_const_Hk"
    return "totally_umbilical"


def identity_suite(n_max: int, trials: int, seed: int) -> dict:
    """Worst residual of every algebraic identity over random symmetric matrices."""
    if n_max < 2:
        raise UsageError(f"--n-max must be at least 2, got {n_max}")
    if trials < 1:
        raise UsageError(f"--trials must be positive, got {trials}")
    rng = np.random.default_rng(seed)
    per_dim = {}
    for n in range(2, n_max + 1):
        worst = dict.fromkeys(symfun.IDENTITY_NAMES, 0.0)
        for _ in range(trials):
            M = rng.normal(size=(n, n))
            for key, val in symfun.identity_residuals(0.5 * (M + M.T)).items():
                worst[key] = max(worst[key], val)
        per_dim[str(n)] = worst
    overall = {key: max(d[key] for d in per_dim.values()) for key in symfun.IDENTITY_NAMES}
    return {"max_residual": overall, "per_dimension": per_dim, "tolerance": TOL_IDENTITY}


# -- commands --------------------------------------------------------------------

def cmd_identity_suite(args) -> int:
    ident = identity_suite(args.n_max, args.trials, args.seed)
    echo = {"command": "identity-suite", "n_max": args.n_max, "trials": args.trials, "seed": args.seed}
    ok = all(v <= TOL_IDENTITY for v in ident["max_residual"].values())
    ident["passed"] = ok
    _emit(_report(echo, identities=ident), args.out)
    return EXIT_OK if ok else EXIT_FAIL


def family_config(args) -> dict:
    cfg = {"kind": args.family, "n": args.n}
    if args.c is not None:
        cfg["c"] = args.c
    for key in ("tau", "r", "m", "realization"):
        val = getattr(args, key)
        if val is not None:
            cfg[key] = val
    if args.axis is not None:
        if args.family != "umbilic_hyperbolic":
            raise UsageError("--axis applies only to umbilic_hyperbolic")
        cfg["axis_type"] = args.axis
    elif args.family == "umbilic_hyperbolic":
        cfg["axis_type"] = "spacelike"
    if args.family == "zero_Hk1" and cfg.get("realization") == "product":
        cfg["k"] = args.k
    return cfg


def run_verify_example(fam: catalog.ExampleFamily, k: int, samples: int, seed: int, constrain: bool, tol_class: float):
    """Sample, fit, compare and classify one family; returns (report pieces, passed, samples)."""
    if k not in fam.admissible_orders():
        raise UsageError(f"k={k} is not admissible for {fam.label}")
    if samples < 2:
        raise UsageError(f"--samples must be at least 2, got {samples}")
    rng = np.random.default_rng(seed)
    us = fam.chart.sample(rng, samples)
    sset = verify.sample_chart(fam.chart, k, us)
    fit = verify.fit_affine(sset, constrain_selfadjoint=constrain)
    pred = catalog.predicted_affine(fam, k)
    cmp = verify.compare_affine(fit, pred.A, pred.b)
    frames = verify.frames_at(fam.chart, us)
    structural = verify.structural_checks(sset, fit, fam.chart, frames)
    lam, qdef = verify.quadratic_shape_check(frames, fam.c)
    rep = verify.classify(sset, fit, frames, tol_class=tol_class)
    expected = expected_verdict(fam, k)

    identities = dict.fromkeys(symfun.IDENTITY_NAMES, 0.0)
    for fr in frames:
        for key, val in symfun.identity_residuals(fr.S_on).items():
            identities[key] = max(identities[key], val)

    residuals = {
        "dual_path_position_max": float(np.max(sset.position_discrepancy)),
        "affine_max_entry_error": cmp.max_entry_error,
        "affine_max_entry_error_raw": cmp.raw_max_entry_error,
        "affine_tolerance": cmp.tolerance,
        "rms_residual": fit.rms_residual,
        "selfadjoint_defect": fit.selfadjoint_defect,
        "structural": structural,
        "quadratic": {"lambda": lam, "defect": qdef},
    }
    checks = {
        "dual_path": residuals["dual_path_position_max"] <= TOL_POSITION,
        "affine_recovery": cmp.ok,
        "rms": fit.rms_residual <= TOL_RMS,
        "selfadjoint": fit.selfadjoint_defect <= TOL_SELFADJOINT,
        "verdict": rep.verdict == expected or expected in rep.also_matches,
    }
    residuals["checks"] = checks
    predicted = {"A": pred.A, "b": pred.b, "Hk": catalog.predicted_Hk(fam, k), "Hk1": catalog.predicted_Hk(fam, k + 1)}
    fitted = _fit_section(fit)
    fitted["aligned_A"] = cmp.aligned_A
    fitted["aligned_b"] = cmp.aligned_b
    pieces = {
        "predicted": predicted,
        "fitted": fitted,
        "residuals": residuals,
        "identities": identities,
        "classification": _classification_section(rep, expected),
    }
    return pieces, all(checks.values()), sset


def cmd_verify_example(args) -> int:
    try:
        fam = catalog.family_from_config(family_config(args))
    except NewtonLkError as exc:
        raise UsageError(str(exc)) from None
    pieces, ok, sset = run_verify_example(fam, args.k, args.samples, args.seed, args.constrain_selfadjoint, args.tol_class)
    echo = {
        "command": "verify-example",
        "family": fam.to_config(),
        "k": args.k,
        "samples": args.samples,
        "seed": args.seed,
        "tol_class": args.tol_class,
        "constrain_selfadjoint": args.constrain_selfadjoint,
    }
    if args.csv is not None:
        write_samples_csv(args.csv, sset)
    _emit(_report(echo, **pieces), args.out)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_fit(args) -> int:
    if args.csv is None:
        raise UsageError("fit needs --csv")
    if args.c not in (1, -1):
        raise UsageError("fit needs --c 1 or --c -1")
    sset = read_samples_csv(args.csv, args.k, args.c)
    fit = verify.fit_affine(sset, constrain_selfadjoint=args.constrain_selfadjoint)
    rep = verify.classify(sset, fit, tol_class=args.tol_class)
    echo = {
        "command": "fit",
        "csv": args.csv,
        "k": args.k,
        "c": args.c,
        "n": sset.n,
        "samples": len(sset),
        "tol_class": args.tol_class,
        "constrain_selfadjoint": args.constrain_selfadjoint,
    }
    residuals = {"rms_residual": fit.rms_residual, "selfadjoint_defect": fit.selfadjoint_defect}
    _emit(_report(echo, fitted=_fit_section(fit), residuals=residuals, classification=_classification_section(rep)), args.out)
    return EXIT_FAIL if rep.verdict == "no_match" else EXIT_OK


# -- argument parsing -------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="newtonlk", description="Checks for L_k x = Ax + b on hypersurfaces of space forms.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("identity-suite", help="algebraic identities on random symmetric matrices")
    p.add_argument("--n-max", type=int, default=8)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_identity_suite)

    p = sub.add_parser("verify-example", help="sample a catalog family, fit (A, b) and classify")
    p.add_argument("--family", required=True, choices=catalog.KINDS)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, default=0)
    p.add_argument("--c", type=int, choices=(1, -1))
    p.add_argument("--tau", type=float)
    p.add_argument("--r", type=float)
    p.add_argument("--m", type=int)
    p.add_argument("--axis", choices=tuple(catalog.AXIS_TYPES), help="axis type of umbilic_hyperbolic")
    p.add_argument("--realization", choices=("geodesic", "product"), help="zero_Hk1 realization")
    p.add_argument("--samples", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol-class", type=float, default=verify.TOL_CLASS)
    p.add_argument("--constrain-selfadjoint", action="store_true")
    p.add_argument("--out")
    p.add_argument("--csv", help="also write the samples to this CSV file")
    p.set_defaults(func=cmd_verify_example)

    p = sub.add_parser("fit", help="fit (A, b) to samples read from a CSV file and classify")
    p.add_argument("--csv", required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--c", type=int, required=True, choices=(1, -1))
    p.add_argument("--tol-class", type=float, default=verify.TOL_CLASS)
    p.add_argument("--constrain-selfadjoint", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=cmd_fit)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if isinstance(exc.code, int) else EXIT_USAGE
    try:
        return args.func(args)
    except (UsageError, NewtonLkError) as exc:
        print(f"newtonlk: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"newtonlk: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
