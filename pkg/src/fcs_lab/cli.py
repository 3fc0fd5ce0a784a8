"""Command-line interface: ``fcs-lab {validate,measure,sweep,maximize,demo}``.

Exit codes: 0 success, 1 domain failure (validation, degenerate fixed point, bad
sweep spec), 2 input/parse failure.  Angles are in radians (pi/8 = 0.39269908...).
"""
from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from . import fcs
from .errors import FCSError
from .families import (
    C12_EX2_MAX,
    C_AB_EX3_MAX,
    FAMILIES,
    FamilyParams,
    ex2_optimum,
    ex3_optimum,
    make_triple,
    oracle_concurrence,
)
from .matcore import TOL_PSD, DensityMatrix
from .sweep import (
    GridAxis,
    MEASURES,
    SweepSpec,
    evaluate_measures,
    maximize,
    run_sweep,
    write_table,
)


class ConfigError(Exception):
    """Malformed or unreadable triple configuration (exit code 2)."""


# --- config (de)serialization -------------------------------------------------


def encode_matrix(m) -> list:
    m = np.asarray(m, dtype=complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


def _decode_matrix(obj, b: int, what: str) -> np.ndarray:
    try:
        arr = np.asarray(obj, dtype=float)
    except (TypeError, ValueError):
        raise ConfigError(f"{what}: entries must be [re, im] number pairs") from None
    if arr.shape != (b, b, 2):
        raise ConfigError(f"{what}: expected shape ({b}, {b}, [re, im]), got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ConfigError(f"{what}: non-finite entry")
    return arr[..., 0] + 1j * arr[..., 1]


_CONFIG_KEYS = {"bond_dim", "kraus", "rho", "tolerances"}
_TOL_KEYS = {"tol_cond", "tol_fix", "tol_psd"}


def parse_config(text: str) -> tuple[fcs.KrausTriple, dict]:
    """Parse the JSON triple schema; returns the triple and the tolerance overrides."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    extra = set(data) - _CONFIG_KEYS
    if extra:
        raise ConfigError(f"unknown config keys {sorted(extra)}")
    b = data.get("bond_dim")
    if not isinstance(b, int) or isinstance(b, bool) or b < 1:
        raise ConfigError("bond_dim must be a positive integer")
    kraus = data.get("kraus")
    if not isinstance(kraus, list) or len(kraus) != 2:
        raise ConfigError("kraus must be a list of exactly 2 matrices")
    mats = [_decode_matrix(k, b, f"kraus[{i}]") for i, k in enumerate(kraus)]
    tols = data.get("tolerances") or {}
    if not isinstance(tols, dict) or set(tols) - _TOL_KEYS:
        raise ConfigError(f"tolerances may only contain {sorted(_TOL_KEYS)}")
    for k, v in tols.items():
        if not isinstance(v, (int, float)) or isinstance(v, bool) or not v > 0 or not math.isfinite(v):
            raise ConfigError(f"tolerance {k} must be a positive number")
    rho = None
    if data.get("rho") is not None:
        rho = _decode_matrix(data["rho"], b, "rho")
    try:
        rho_dm = DensityMatrix(rho) if rho is not None else None
    except FCSError as exc:
        raise ConfigError(f"rho: {exc}") from None
    triple = fcs.KrausTriple(
        tuple(mats),
        rho_dm,
        tol_cond=float(tols.get("tol_cond", fcs.TOL_COND)),
        tol_fix=float(tols.get("tol_fix", fcs.TOL_FIX)),
    )
    return triple, {k: float(v) for k, v in tols.items()}


def dump_config(triple: fcs.KrausTriple, tolerances: dict | None = None) -> str:
    data = {"bond_dim": triple.bond_dim, "kraus": [encode_matrix(v) for v in triple.kraus]}
    if triple.invariant is not None:
        data["rho"] = encode_matrix(triple.invariant.mat)
    if tolerances:
        data["tolerances"] = dict(tolerances)
    return json.dumps(data, indent=1) + "\n"


def load_config(path: str) -> tuple[fcs.KrausTriple, dict]:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from None
    return parse_config(text)


# --- shared argument handling -------------------------------------------------


def _add_source_args(p: argparse.ArgumentParser, config_positional: bool = False) -> None:
    if config_positional:
        p.add_argument("config", nargs="?", help="triple config JSON")
    else:
        p.add_argument("--config", help="triple config JSON")
    p.add_argument("--family", choices=FAMILIES)
    p.add_argument("--phi", type=float, default=0.0, help="angle in radians")
    p.add_argument("--a", type=float, default=0.0)
    p.add_argument("--tol-cond", type=float)
    p.add_argument("--tol-fix", type=float)
    p.add_argument("--tol-psd", type=float)


def _resolve_triple(args) -> tuple[fcs.KrausTriple, FamilyParams | None, dict]:
    if (args.config is None) == (args.family is None):
        raise ConfigError("give exactly one of a config file or --family")
    if args.config is not None:
        triple, tols = load_config(args.config)
        params = None
    else:
        params = FamilyParams(args.family, args.phi, args.a)
        triple = make_triple(params)
        tols = {}
    for key in ("tol_cond", "tol_fix", "tol_psd"):
        val = getattr(args, key, None)
        if val is not None:
            tols[key] = val
    triple = fcs.KrausTriple(
        triple.kraus,
        triple.invariant,
        triple.unique,
        tols.get("tol_cond", triple.tol_cond),
        tols.get("tol_fix", triple.tol_fix),
        dict(triple.meta),
    )
    return triple, params, tols


def _emit(obj) -> None:
    sys.stdout.write(json.dumps(_clean(obj), indent=1, sort_keys=True, allow_nan=False) + "\n")


def _clean(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_clean(v) for v in obj]
    return obj


# --- commands -----------------------------------------------------------------


def cmd_validate(args) -> int:
    triple, params, tols = _resolve_triple(args)
    report = {"unitality": None, "invariance": None, "unit_multiplicity": None, "ok": False, "reason": None}
    rep = fcs.validate(triple)
    report["unitality"] = rep.unitality
    report["invariance"] = rep.invariance
    spec = fcs.transfer_spectrum(triple)
    report["unit_multiplicity"] = spec.unit_multiplicity
    report["spectral_radius"] = spec.spectral_radius
    reason = None
    if rep.unitality > triple.tol_cond:
        reason = "NotUnital"
    elif spec.unit_multiplicity != 1:
        reason = "DegenerateFixedPoint"
    else:
        try:
            rho = triple.invariant or fcs.fixed_point(triple, tol_psd=tols.get("tol_psd", TOL_PSD))
            report["invariance"] = float(np.linalg.norm(fcs.dual_apply(triple, rho.mat) - rho.mat))
            if report["invariance"] > triple.tol_cond:
                reason = "NotInvariant"
        except FCSError as exc:
            reason = exc.reason
    report["ok"] = reason is None
    report["reason"] = reason
    report["tol_cond"] = triple.tol_cond
    report["tol_fix"] = triple.tol_fix
    if args.json:
        _emit(report)
    else:
        inv = "n/a" if report["invariance"] is None else f"{report['invariance']:.3e}"
        print(f"unitality residual : {report['unitality']:.3e}")
        print(f"invariance residual: {inv}")
        print(f"unit multiplicity  : {report['unit_multiplicity']}")
        print("status             : " + ("ok" if reason is None else f"FAIL ({reason})"))
    return 0 if reason is None else 1


def _split_measures(values) -> list[str]:
    out = []
    for v in values or []:
        out.extend(tok for tok in v.split(",") if tok)
    return out


def cmd_measure(args) -> int:
    triple, params, tols = _resolve_triple(args)
    if args.export_config:
        with open(args.export_config, "w", encoding="utf-8") as fh:
            fh.write(dump_config(triple, tols))
    if args.solve_fixed_point or triple.invariant is None:
        triple = triple.with_invariant(fcs.fixed_point(triple, tol_psd=tols.get("tol_psd", TOL_PSD)))
    sites = fcs.SiteSet.parse(args.sites) if args.sites else None
    measures = _split_measures(args.measure) or ["c_ab"]
    values = evaluate_measures(triple, measures, sites, params)
    out = {
        "measures": values,
        "params": {"family": params.family, "phi": params.phi, "a": params.a} if params else {"config": args.config},
        "sites": list(sites.sites) if sites else None,
        "tolerances": {"tol_cond": triple.tol_cond, "tol_fix": triple.tol_fix, "tol_psd": tols.get("tol_psd", TOL_PSD)},
    }
    if args.dump_state:
        state = fcs.reduced_state(triple, sites) if sites else fcs.rho_ab(triple)
        out["state"] = {"dims": list(state.dims), "matrix": encode_matrix(state.mat)}
    _emit(out)
    return 0


def _parse_base(args) -> dict:
    base = {}
    if args.phi is not None:
        base["phi"] = args.phi
    if args.a is not None:
        base["a"] = args.a
    return base


def cmd_sweep(args) -> int:
    measures = _split_measures(args.measures) or ["c12", "c_ab"]
    if args.config:
        triple, _, _ = load_config(args.config)
        spec = SweepSpec(None, [], measures, triple=triple)
    else:
        if not args.family:
            raise ConfigError("sweep needs --family or --config")
        spec = SweepSpec(args.family, [GridAxis.parse(g) for g in args.grid or []], measures, base=_parse_base(args),
                         solve_fixed_point=args.solve_fixed_point)
    if args.sites:
        spec.sites = fcs.SiteSet.parse(args.sites)
    rows = run_sweep(spec, args.workers)
    if args.out:
        write_table(rows, measures, args.out)
    failed = sum(1 for r in rows if r["error"])
    print(f"sweep {spec.family or 'config'}: {len(rows)} rows, {failed} failed" + (f" -> {args.out}" if args.out else ""))
    return 0


def _parse_bounds(items) -> dict:
    out = {}
    for item in items or []:
        try:
            name, lo, hi = item.split(":")
            out[name] = (float(lo), float(hi))
        except ValueError:
            raise ConfigError(f"bad bounds {item!r}; expected name:lo:hi") from None
    return out


def cmd_maximize(args) -> int:
    sites = fcs.SiteSet.parse(args.sites) if args.sites else None
    res = maximize(
        args.family,
        args.objective,
        bounds=_parse_bounds(args.bounds),
        base=_parse_base(args),
        sites=sites,
        grid_points=args.grid_points,
        rounds=args.rounds,
        tol=args.tol,
        workers=args.workers,
    )
    out = res.as_dict()
    out["objective"] = args.objective
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(json.dumps(out, indent=1, sort_keys=True) + "\n")
    _emit(out)
    print(f"maximize {args.family} {args.objective}: {res.value:.10f} at phi={res.best.phi:.10f} a={res.best.a:.10f}",
          file=sys.stderr)
    return 0


def demo_checks(tol: float = 1e-9) -> list[dict]:
    """Computed-versus-closed-form comparisons at the distinguished parameter points."""
    rows = []

    def add(label, computed, expected):
        err = abs(computed - expected)
        rows.append({"check": label, "computed": computed, "expected": expected, "error": err, "pass": err <= tol})

    phi = math.pi / 8
    p1 = FamilyParams("ex1", phi)
    t1 = make_triple(p1)
    m1 = evaluate_measures(t1, ["c_ab", "c13"])
    add("ex1 phi=pi/8 c_ab", m1["c_ab"], oracle_concurrence(p1, "c_ab"))
    add("ex1 phi=pi/8 c13", m1["c13"], 0.0)
    fp = fcs.fixed_point(fcs.KrausTriple(t1.kraus))
    add("ex1 phi=pi/8 fixed point", float(np.max(np.abs(fp.mat - t1.invariant.mat))), 0.0)
    p1b = FamilyParams("ex1", math.pi / 4)
    add("ex1 phi=pi/4 c_ab", evaluate_measures(make_triple(p1b), ["c_ab"])["c_ab"], 0.0)

    p2 = ex2_optimum()
    t2 = make_triple(p2)
    m2 = evaluate_measures(t2, ["c12", "c_ab"])
    add("ex2 optimum c12", m2["c12"], C12_EX2_MAX)
    add("ex2 optimum c_ab", m2["c_ab"], oracle_concurrence(p2, "c_ab"))
    fp2 = fcs.fixed_point(fcs.KrausTriple(t2.kraus))
    add("ex2 optimum fixed point", float(np.max(np.abs(fp2.mat - t2.invariant.mat))), 0.0)

    p3 = ex3_optimum()
    t3 = make_triple(p3)
    add("ex3 optimum c_ab", evaluate_measures(t3, ["c_ab"])["c_ab"], C_AB_EX3_MAX)
    fp3 = fcs.fixed_point(fcs.KrausTriple(t3.kraus))
    add("ex3 optimum fixed point", float(np.max(np.abs(fp3.mat - np.diag([0.75, 0.25])))), 0.0)
    return rows


def cmd_demo(args) -> int:
    rows = demo_checks(args.tol)
    ok = all(r["pass"] for r in rows)
    if args.json:
        _emit({"ok": ok, "tol": args.tol, "checks": rows})
    else:
        width = max(len(r["check"]) for r in rows)
        print(f"{'check':<{width}}  {'computed':>20}  {'expected':>20}  {'error':>9}  result")
        for r in rows:
            print(f"{r['check']:<{width}}  {r['computed']:>20.15f}  {r['expected']:>20.15f}  {r['error']:>9.2e}  "
                  + ("pass" if r["pass"] else "FAIL"))
        print("all checks passed" if ok else "some checks FAILED")
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fcs-lab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check unitality, invariance and fixed-point uniqueness")
    _add_source_args(p, config_positional=True)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("measure", help="evaluate measures on one triple")
    _add_source_args(p)
    p.add_argument("--sites", help="comma-separated 1-based sites, e.g. 1,3")
    p.add_argument("--measure", action="append", help=f"one of {', '.join(MEASURES)} (repeatable or comma list)")
    p.add_argument("--dump-state", action="store_true", help="include the reduced density matrix")
    p.add_argument("--export-config", metavar="PATH", help="write the triple as a config file")
    p.add_argument("--solve-fixed-point", action="store_true")
    p.set_defaults(func=cmd_measure)

    p = sub.add_parser("sweep", help="evaluate measures over a parameter grid")
    p.add_argument("--family", choices=FAMILIES)
    p.add_argument("--config")
    p.add_argument("--grid", action="append", help="name:lo:hi:points (repeatable)")
    p.add_argument("--measures", action="append")
    p.add_argument("--phi", type=float, help="fixed phi when not swept")
    p.add_argument("--a", type=float, help="fixed a when not swept")
    p.add_argument("--sites")
    p.add_argument("--out", help="output path (.csv or .json)")
    p.add_argument("--workers", type=int)
    p.add_argument("--solve-fixed-point", action="store_true")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("maximize", help="maximize a measure over family parameters")
    p.add_argument("--family", choices=FAMILIES, required=True)
    p.add_argument("--objective", required=True, choices=MEASURES)
    p.add_argument("--bounds", action="append", help="name:lo:hi (repeatable); lo == hi fixes a parameter")
    p.add_argument("--phi", type=float)
    p.add_argument("--a", type=float)
    p.add_argument("--sites")
    p.add_argument("--grid-points", type=int, default=64)
    p.add_argument("--rounds", type=int, default=5)
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--workers", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_maximize)

    p = sub.add_parser("demo", help="compare computed values with the closed forms")
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_demo)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        _emit({"error": "ConfigError", "message": str(exc)})
        return 2
    except FCSError as exc:
        _emit({"error": exc.reason, "message": str(exc)})
        return 1
    except ValueError as exc:
        _emit({"error": "ValueError", "message": str(exc)})
        return 2


if __name__ == "__main__":
    sys.exit(main())
