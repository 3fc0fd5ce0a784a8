"""Translation-invariant finitely correlated states built from two Kraus matrices.

A state of the infinite spin-1/2 chain is fixed by two ``b x b`` matrices
``v_1, v_2`` with ``v_1 v_1^+ + v_2 v_2^+ = 1`` and an auxiliary density matrix
``rho`` that is invariant under the dual map ``x -> sum_j v_j^+ x v_j``.  Local
states follow from

    <s_1..s_n| rho_[1,n] |t_1..t_n> = Tr(v_s^+ rho v_t),  v_t = v_{t_1} ... v_{t_n}

with site 1 the leftmost tensor factor.  Kraus index 1 (``kraus[0]``) maps to the
computational basis vector ``e_1``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    BadDims,
    DegenerateFixedPoint,
    DimensionMismatch,
    NotPSD,
    TooLarge,
)
from .matcore import TOL_PSD, DensityMatrix, as_matrix, herm_eigen, partial_trace

TOL_COND = 1e-9
TOL_FIX = 1e-9
MAX_SITES = 10


@dataclass(frozen=True)
class KrausTriple:
    """Kraus pair ``(v_1, v_2)`` plus an optional invariant auxiliary state.

    ``unique`` is ``False`` when the caller already knows the transfer operator
    has a degenerate unit eigenvalue (e.g. special points of a family); the
    attached ``invariant`` is then still a valid, but not the only, fixed point.
    """

    kraus: tuple[np.ndarray, np.ndarray]
    invariant: DensityMatrix | None = None
    unique: bool | None = None
    tol_cond: float = TOL_COND
    tol_fix: float = TOL_FIX
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if len(self.kraus) != 2:
            raise DimensionMismatch(f"expected exactly 2 Kraus matrices, got {len(self.kraus)}")
        mats = []
        for v in self.kraus:
            try:
                m = as_matrix(v)
            except BadDims as exc:
                raise DimensionMismatch(str(exc)) from None
            mats.append(m)
        b = mats[0].shape[0]
        if any(m.shape != (b, b) for m in mats):
            raise DimensionMismatch(f"Kraus matrices must both be square {b}x{b}: {[m.shape for m in mats]}")
        for m in mats:
            m.setflags(write=False)
        object.__setattr__(self, "kraus", tuple(mats))
        if self.invariant is not None:
            inv = self.invariant
            if not isinstance(inv, DensityMatrix):
                inv = DensityMatrix(inv)
            if inv.mat.shape != (b, b):
                raise DimensionMismatch(f"invariant state has shape {inv.mat.shape}, bond dimension is {b}")
            object.__setattr__(self, "invariant", inv)

    @property
    def bond_dim(self) -> int:
        return self.kraus[0].shape[0]

    def with_invariant(self, rho) -> "KrausTriple":
        return KrausTriple(self.kraus, rho, self.unique, self.tol_cond, self.tol_fix, dict(self.meta))


@dataclass(frozen=True)
class SiteSet:
    """Strictly increasing, 1-based chain sites."""

    sites: tuple[int, ...]

    def __post_init__(self):
        sites = tuple(int(s) for s in self.sites)
        if not sites:
            raise BadDims("site set must be nonempty")
        if sites[0] < 1:
            raise BadDims(f"sites are 1-based, got {sites[0]}")
        if any(b <= a for a, b in zip(sites, sites[1:])):
            raise BadDims(f"sites must be strictly increasing: {sites}")
        object.__setattr__(self, "sites", sites)

    @classmethod
    def parse(cls, text: str) -> "SiteSet":
        return cls(tuple(int(tok) for tok in text.split(",") if tok.strip()))

    def __len__(self):
        return len(self.sites)

    def __iter__(self):
        return iter(self.sites)

    @property
    def span(self) -> int:
        return self.sites[-1] - self.sites[0] + 1

    def __str__(self):
        return ",".join(map(str, self.sites))


def as_site_set(sites) -> SiteSet:
    if isinstance(sites, SiteSet):
        return sites
    if isinstance(sites, str):
        return SiteSet.parse(sites)
    return SiteSet(tuple(sites))


@dataclass(frozen=True)
class TransferSpectrum:
    eigenvalues: np.ndarray
    unit_multiplicity: int

    @property
    def spectral_radius(self) -> float:
        return float(np.max(np.abs(self.eigenvalues)))


@dataclass(frozen=True)
class ValidationReport:
    unitality: float
    invariance: float | None
    tol: float

    @property
    def ok(self) -> bool:
        return self.unitality <= self.tol and (self.invariance is None or self.invariance <= self.tol)

    def as_dict(self) -> dict:
        return {"unitality": self.unitality, "invariance": self.invariance, "tol_cond": self.tol, "ok": self.ok}


def validate(triple: KrausTriple, tol: float | None = None) -> ValidationReport:
    """Unitality and (if an invariant is attached) invariance residuals, Frobenius norm."""
    tol = triple.tol_cond if tol is None else tol
    b = triple.bond_dim
    unit = sum(v @ v.conj().T for v in triple.kraus) - np.eye(b)
    inv = None
    if triple.invariant is not None:
        rho = triple.invariant.mat
        inv = float(np.linalg.norm(dual_apply(triple, rho) - rho))
    return ValidationReport(float(np.linalg.norm(unit)), inv, tol)


def dual_apply(triple: KrausTriple, x) -> np.ndarray:
    """``sum_j v_j^+ x v_j``."""
    x = as_matrix(x)
    b = triple.bond_dim
    if x.shape != (b, b):
        raise DimensionMismatch(f"operand has shape {x.shape}, bond dimension is {b}")
    return sum(v.conj().T @ x @ v for v in triple.kraus)


def transfer_matrix(triple: KrausTriple) -> np.ndarray:
    """Matrix of the dual map acting on column-stacked ``vec(x)``."""
    return sum(np.kron(v.T, v.conj().T) for v in triple.kraus)


def transfer_spectrum(triple: KrausTriple, tol_fix: float | None = None) -> TransferSpectrum:
    tol_fix = triple.tol_fix if tol_fix is None else tol_fix
    ev = np.linalg.eigvals(transfer_matrix(triple))
    ev = ev[np.lexsort((np.angle(ev), -np.abs(ev)))]
    mult = int(np.sum(np.abs(ev - 1.0) <= tol_fix))
    return TransferSpectrum(ev, mult)


def fixed_point(triple: KrausTriple, tol_fix: float | None = None, tol_psd: float = TOL_PSD) -> DensityMatrix:
    """Unique invariant density matrix of the dual map.

    Raises
    ------
    DegenerateFixedPoint
        If the unit eigenvalue is not simple.
    NotPSD
        If the unit eigenvector is not (a multiple of) a positive matrix.
    """
    spec = transfer_spectrum(triple, tol_fix)
    if spec.unit_multiplicity != 1:
        raise DegenerateFixedPoint(f"unit eigenvalue multiplicity {spec.unit_multiplicity}")
    b = triple.bond_dim
    t = transfer_matrix(triple)
    # (T - 1) vec(x) = 0 together with Tr x = 1; the trace row pins the scale
    lhs = np.vstack([t - np.eye(b * b), np.eye(b).reshape(1, -1, order="F")])
    rhs = np.zeros(b * b + 1, dtype=np.complex128)
    rhs[-1] = 1.0
    sol, *_ = np.linalg.lstsq(lhs, rhs, rcond=None)
    x = sol.reshape(b, b, order="F")
    x = 0.5 * (x + x.conj().T)
    x = x / np.trace(x).real
    w, _ = herm_eigen(x)
    if w[0] < -tol_psd:
        raise NotPSD(f"fixed point has eigenvalue {w[0]:.3e}")
    return DensityMatrix(x)


def invariant_state(triple: KrausTriple) -> DensityMatrix:
    """Attached invariant if present, otherwise the computed fixed point."""
    if triple.invariant is not None:
        return triple.invariant
    return fixed_point(triple)


def rho_ab(triple: KrausTriple) -> DensityMatrix:
    """One spin together with the auxiliary system: blocks ``v_s^+ rho v_t``."""
    rho = invariant_state(triple).mat
    v = triple.kraus
    mat = np.block([[v[s].conj().T @ rho @ v[t] for t in range(2)] for s in range(2)])
    return DensityMatrix(mat, (2, triple.bond_dim))


def _string_products(triple: KrausTriple, n: int) -> np.ndarray:
    # products v_{t_1} ... v_{t_n} indexed with t_1 most significant
    v = np.stack(triple.kraus)
    prods = v
    for _ in range(n - 1):
        prods = np.einsum("tab,xbc->txac", prods, v).reshape(-1, *v.shape[1:])
    return prods


def local_state(triple: KrausTriple, n: int) -> DensityMatrix:
    """Density matrix of ``n`` adjacent sites from explicit Kraus strings."""
    if not 1 <= n <= MAX_SITES:
        raise TooLarge(f"n={n} outside 1..{MAX_SITES}")
    rho = invariant_state(triple).mat
    p = _string_products(triple, n)
    q = np.einsum("cd,tdb->tcb", rho, p)
    mat = p.reshape(p.shape[0], -1).conj() @ q.reshape(q.shape[0], -1).T
    return DensityMatrix(mat, (2,) * n)


def _apply_gap(blocks: np.ndarray, triple: KrausTriple, gap: int) -> np.ndarray:
    if gap == 0:
        return blocks
    b = triple.bond_dim
    t = np.linalg.matrix_power(transfer_matrix(triple), gap)
    d = blocks.shape[0]
    # column-stack each b x b block, act with T^gap, unstack
    vec = blocks.transpose(0, 1, 3, 2).reshape(d, d, b * b)
    vec = vec @ t.T
    return vec.reshape(d, d, b, b).transpose(0, 1, 3, 2)


def reduced_state(triple: KrausTriple, sites) -> DensityMatrix:
    """Reduced state on an arbitrary set of chain sites.

    The set is shifted so its first site is 1 (translation invariance).  Kept
    sites insert ``v_x^+ . v_y`` around every block; a run of ``g`` skipped sites
    applies the dual map ``g`` times, so the span is not limited by memory.
    """
    sites = as_site_set(sites)
    if len(sites) > MAX_SITES:
        raise TooLarge(f"{len(sites)} sites exceeds the cap of {MAX_SITES}")
    b = triple.bond_dim
    v = np.stack(triple.kraus)
    vh = v.conj().transpose(0, 2, 1)
    blocks = invariant_state(triple).mat.reshape(1, 1, b, b)
    prev = None
    for s in sites:
        if prev is not None:
            blocks = _apply_gap(blocks, triple, s - prev - 1)
        d = blocks.shape[0]
        blocks = np.einsum("xab,stbc,ycd->sxtyad", vh, blocks, v).reshape(2 * d, 2 * d, b, b)
        prev = s
    mat = np.trace(blocks, axis1=2, axis2=3)
    return DensityMatrix(mat, (2,) * len(sites))


def compatibility_check(triple: KrausTriple, n: int) -> tuple[float, float]:
    """Residuals of tracing the last / first site of ``rho_[1,n+1]`` against ``rho_[1,n]``."""
    if not 1 <= n or n + 1 > MAX_SITES:
        raise TooLarge(f"n+1={n + 1} outside 2..{MAX_SITES}")
    big = local_state(triple, n + 1)
    small = local_state(triple, n).mat
    last = partial_trace(big, range(n)).mat
    first = partial_trace(big, range(1, n + 1)).mat
    return float(np.linalg.norm(last - small)), float(np.linalg.norm(first - small))
