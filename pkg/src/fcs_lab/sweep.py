"""Measure pipelines, parameter sweeps and derivative-free maximization."""
from __future__ import annotations

import csv
import io
import itertools
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from . import entanglement as ent
from .errors import BadSpec, FCSError, NonFinite
from .families import MONOGAMY_NN_BOUND, FamilyParams, make_triple
from .fcs import KrausTriple, SiteSet, as_site_set, reduced_state, rho_ab

MAX_GRID = 10**6
HIERARCHY_SLACK = 1e-10
INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0

# measures on fixed supports
_FIXED = {
    "c_ab": lambda t, _: ent.concurrence(rho_ab(t)),
    "eof_ab": lambda t, _: ent.eof_two_qubit(rho_ab(t)),
    "neg_ab": lambda t, _: ent.negativity(rho_ab(t), 1),
    "c12": lambda t, _: ent.concurrence(reduced_state(t, (1, 2))),
    "c13": lambda t, _: ent.concurrence(reduced_state(t, (1, 3))),
    "eof12": lambda t, _: ent.eof_two_qubit(reduced_state(t, (1, 2))),
    "neg12": lambda t, _: ent.negativity(reduced_state(t, (1, 2)), 1),
}


def _pair(sites: SiteSet | None) -> SiteSet:
    if sites is None:
        raise BadSpec("this measure needs a site set (--sites)")
    return sites


def _two_sites(t, sites):
    sites = _pair(sites)
    if len(sites) != 2:
        raise BadSpec(f"concurrence needs exactly two sites, got {sites}")
    return reduced_state(t, sites)


# measures on the user-supplied site set; block cuts separate the first site from the rest
_ON_SITES = {
    "concurrence": lambda t, s: ent.concurrence(_two_sites(t, s)),
    "eof": lambda t, s: ent.eof_two_qubit(_two_sites(t, s)),
    "separable": lambda t, s: float(ent.two_qubit_separable(_two_sites(t, s))),
    "negativity": lambda t, s: ent.negativity(reduced_state(t, _pair(s)), 0),
    "min_pt": lambda t, s: ent.min_pt_eigenvalue(reduced_state(t, _pair(s)), 0),
    "entropy": lambda t, s: ent.von_neumann_entropy(reduced_state(t, _pair(s))),
}

MEASURES = tuple(_FIXED) + tuple(_ON_SITES) + ("alpha",)


def check_measures(names: Iterable[str]) -> list[str]:
    names = list(names)
    if not names:
        raise BadSpec("at least one measure is required")
    unknown = [m for m in names if m not in MEASURES]
    if unknown:
        raise BadSpec(f"unknown measure(s) {unknown}; known: {', '.join(MEASURES)}")
    return names


def evaluate_measures(
    triple: KrausTriple,
    names: Sequence[str],
    sites: SiteSet | None = None,
    params: FamilyParams | None = None,
) -> dict[str, float]:
    """Evaluate named measures on one triple. ``alpha`` is ``sin(2 phi)`` and needs ``params``."""
    out = {}
    for name in check_measures(names):
        if name == "alpha":
            if params is None:
                raise BadSpec("alpha is only defined for family parameters")
            out[name] = math.sin(2.0 * params.phi)
        elif name in _FIXED:
            out[name] = float(_FIXED[name](triple, sites))
        else:
            out[name] = float(_ON_SITES[name](triple, sites))
    return out


def family_triple(p: FamilyParams, solve_fixed_point: bool = False) -> KrausTriple:
    t = make_triple(p)
    if solve_fixed_point:
        t = KrausTriple(t.kraus, None, t.unique, t.tol_cond, t.tol_fix, dict(t.meta))
    return t


@dataclass
class GridAxis:
    name: str
    lo: float
    hi: float
    points: int

    @classmethod
    def parse(cls, text: str) -> "GridAxis":
        """``name:lo:hi:points``, e.g. ``phi:0:6.2832:101``."""
        try:
            name, lo, hi, pts = text.split(":")
            return cls(name, float(lo), float(hi), int(pts))
        except ValueError:
            raise BadSpec(f"bad grid axis {text!r}; expected name:lo:hi:points") from None

    def values(self) -> np.ndarray:
        return np.linspace(self.lo, self.hi, self.points)


@dataclass
class SweepSpec:
    family: str | None = None
    grid: list[GridAxis] = field(default_factory=list)
    measures: list[str] = field(default_factory=lambda: ["c12", "c_ab"])
    sites: SiteSet | None = None
    base: dict[str, float] = field(default_factory=dict)
    triple: KrausTriple | None = None
    solve_fixed_point: bool = False

    def check(self) -> None:
        if (self.family is None) == (self.triple is None):
            raise BadSpec("give exactly one of family or triple")
        check_measures(self.measures)
        if self.triple is not None:
            if self.grid:
                raise BadSpec("a fixed triple has no parameters to sweep")
            if "alpha" in self.measures:
                raise BadSpec("alpha is only defined for family sweeps")
            return
        FamilyParams(self.family, **self.base)
        names = [ax.name for ax in self.grid]
        if len(set(names)) != len(names):
            raise BadSpec(f"duplicate grid axes {names}")
        total = 1
        for ax in self.grid:
            if ax.name not in ("phi", "a"):
                raise BadSpec(f"unknown grid parameter {ax.name!r}")
            if ax.points < 2:
                raise BadSpec(f"axis {ax.name} needs at least 2 points, got {ax.points}")
            if not (math.isfinite(ax.lo) and math.isfinite(ax.hi)):
                raise BadSpec(f"axis {ax.name} bounds must be finite")
            total *= ax.points
        if total > MAX_GRID:
            raise BadSpec(f"grid has {total} points, cap is {MAX_GRID}")

    def points(self) -> list[FamilyParams]:
        base = FamilyParams(self.family, **self.base)
        axes = [ax.values() for ax in self.grid]
        names = [ax.name for ax in self.grid]
        return [base.replace(**dict(zip(names, combo))) for combo in itertools.product(*axes)]


def worker_count(workers: int | None = None) -> int:
    if workers is not None:
        return max(1, int(workers))
    env = os.environ.get("FCS_LAB_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return os.cpu_count() or 1


def _ordered_map(fn: Callable, items: Sequence, workers: int | None) -> list:
    n = worker_count(workers)
    if n == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))


def _row(spec: SweepSpec, p: FamilyParams | None) -> dict:
    row = {"family": p.family if p else "config", "phi": p.phi if p else math.nan, "a": p.a if p else math.nan}
    try:
        triple = spec.triple if p is None else family_triple(p, spec.solve_fixed_point)
        row.update(evaluate_measures(triple, spec.measures, spec.sites, p))
        row["error"] = ""
    except FCSError as exc:
        row.update({m: math.nan for m in spec.measures})
        row["error"] = exc.reason
    return row


def run_sweep(spec: SweepSpec, workers: int | None = None) -> list[dict]:
    """One row per grid point in lexicographic grid order; failures become NaN rows."""
    spec.check()
    points = [None] if spec.triple is not None else spec.points()
    return _ordered_map(lambda p: _row(spec, p), points, workers)


def _fmt(x) -> str:
    if isinstance(x, str):
        return x
    return format(float(x), ".17g")


def to_csv(rows: Sequence[dict], measures: Sequence[str]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["family", "phi", "a", *measures, "error"])
    for r in rows:
        phi = "" if r["family"] == "config" else _fmt(r["phi"])
        a = "" if r["family"] == "config" else _fmt(r["a"])
        w.writerow([r["family"], phi, a, *(_fmt(r[m]) for m in measures), r["error"]])
    return buf.getvalue()


def _json_num(x):
    return None if isinstance(x, float) and not math.isfinite(x) else x


def to_json(rows: Sequence[dict], measures: Sequence[str]) -> str:
    cols = ["family", "phi", "a", *measures, "error"]
    data = [{c: _json_num(r[c]) for c in cols} for r in rows]
    return json.dumps({"columns": cols, "rows": data}, indent=1, sort_keys=False) + "\n"


def write_table(rows: Sequence[dict], measures: Sequence[str], path: str) -> None:
    text = to_json(rows, measures) if path.endswith(".json") else to_csv(rows, measures)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


# --- maximization -------------------------------------------------------------


@dataclass
class OptResult:
    best: FamilyParams
    value: float
    evaluations: int
    converged: bool

    def as_dict(self) -> dict:
        return {
            "family": self.best.family,
            "phi": self.best.phi,
            "a": self.best.a,
            "value": self.value,
            "evaluations": self.evaluations,
            "converged": self.converged,
        }


DEFAULT_BOUNDS = {"phi": (0.0, 2.0 * math.pi), "a": (0.0, 1.0)}


def _golden_max(f, lo, hi, x0, f0, tol):
    """Golden-section search on [lo, hi]; returns the best of x0 and all probes."""
    best_x, best_f = x0, f0
    a, b = lo, hi
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    for x, fx in ((c, fc), (d, fd)):
        if fx > best_f:
            best_x, best_f = x, fx
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = f(c)
            x, fx = c, fc
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = f(d)
            x, fx = d, fd
        if fx > best_f:
            best_x, best_f = x, fx
    return best_x, best_f, b - a


def maximize(
    family: str,
    objective: str,
    bounds: dict[str, tuple[float, float]] | None = None,
    base: dict[str, float] | None = None,
    sites: SiteSet | None = None,
    grid_points: int = 64,
    rounds: int = 5,
    tol: float = 1e-8,
    workers: int | None = None,
) -> OptResult:
    """Coarse grid scan, then cyclic golden-section refinement of each free parameter.

    Parameters with zero-width bounds are held fixed.  Grid ties go to the
    lexicographically smallest ``(phi, a)``.
    """
    check_measures([objective])
    start = FamilyParams(family, **(base or {}))
    bounds = {k: bounds[k] for k in start.free_params if k in bounds} if bounds else {}
    for k in start.free_params:
        bounds.setdefault(k, DEFAULT_BOUNDS[k])
    for k, (lo, hi) in bounds.items():
        if hi < lo:
            raise BadSpec(f"empty bounds for {k}: {lo} > {hi}")
    free = [k for k in start.free_params if bounds[k][1] > bounds[k][0]]
    fixed = {k: bounds[k][0] for k in start.free_params if k not in free}
    start = start.replace(**fixed)

    evaluations = 0

    def f(p: FamilyParams) -> float:
        val = evaluate_measures(make_triple(p), [objective], sites, p)[objective]
        if not math.isfinite(val):
            raise NonFinite(f"objective {objective} is {val} at phi={p.phi}, a={p.a}")
        return val

    axes = [np.linspace(*bounds[k], grid_points) for k in free]
    points = [start.replace(**dict(zip(free, combo))) for combo in itertools.product(*axes)]
    values = _ordered_map(f, points, workers)
    evaluations += len(points)
    best_i = int(np.argmax(values))  # first maximum = lexicographically smallest
    best, best_val = points[best_i], float(values[best_i])
    if not free:
        return OptResult(best, best_val, evaluations, True)

    steps = {k: (bounds[k][1] - bounds[k][0]) / (grid_points - 1) for k in free}
    widths = {k: math.inf for k in free}
    for _ in range(rounds):
        for k in free:
            lo = max(bounds[k][0], getattr(best, k) - steps[k])
            hi = min(bounds[k][1], getattr(best, k) + steps[k])
            count = [0]

            def g(x, k=k):
                count[0] += 1
                return f(best.replace(**{k: x}))

            x, val, widths[k] = _golden_max(g, lo, hi, getattr(best, k), best_val, tol)
            evaluations += count[0]
            if val > best_val:
                best, best_val = best.replace(**{k: x}), val
    converged = all(w < tol for w in widths.values())
    return OptResult(best, best_val, evaluations, converged)


# --- audits -------------------------------------------------------------------


def hierarchy_audit(
    family: str,
    grid: Sequence[GridAxis],
    p_max: int,
    base: dict[str, float] | None = None,
    slack: float = HIERARCHY_SLACK,
    rho_ab_fn: Callable = rho_ab,
    workers: int | None = None,
) -> list[dict]:
    """Points where concurrence(sites {1, p}) exceeds concurrence(rho_ab) + slack."""
    if not 2 <= p_max <= 7:
        raise BadSpec(f"p_max must lie in 2..7, got {p_max}")
    spec = SweepSpec(family, list(grid), ["c_ab"], base=dict(base or {}))
    spec.check()

    def audit(p: FamilyParams) -> list[dict]:
        t = make_triple(p)
        c_ab = ent.concurrence(rho_ab_fn(t))
        bad = []
        for q in range(2, p_max + 1):
            c1q = ent.concurrence(reduced_state(t, (1, q)))
            if c1q > c_ab + slack:
                bad.append({"phi": p.phi, "a": p.a, "p": q, "c_1p": c1q, "c_ab": c_ab})
        return bad

    return [v for chunk in _ordered_map(audit, spec.points(), workers) for v in chunk]


def monogamy_audit(
    family: str,
    grid: Sequence[GridAxis],
    base: dict[str, float] | None = None,
    tol: float = 1e-9,
    workers: int | None = None,
) -> list[dict]:
    """Monogamy bookkeeping for one spin and its neighbours.

    Checks ``2 C12^2 <= 1`` (left and right neighbour), ``C12^2 + C13^2 <= 1`` and
    ``C12 <= 1/sqrt(2)``.
    """
    spec = SweepSpec(family, list(grid), ["c12", "c13"], base=dict(base or {}))
    rows = run_sweep(spec, workers)
    bad = []
    for r in rows:
        c12, c13 = r["c12"], r["c13"]
        if 2 * c12**2 > 1 + tol or c12**2 + c13**2 > 1 + tol or c12 > MONOGAMY_NN_BOUND + tol:
            bad.append(r)
    return bad
