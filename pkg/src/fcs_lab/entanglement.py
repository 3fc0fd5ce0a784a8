"""Entanglement measures for two qubits and qubit-versus-block cuts."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import BadDims
from .matcore import TOL_PSD, DensityMatrix, clamp_spectrum, herm_eigen, partial_transpose, sqrt_psd

SIGMA_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]])
YY = np.kron(SIGMA_Y, SIGMA_Y)


@dataclass
class MeasureReport:
    entries: dict[str, float] = field(default_factory=dict)
    params: dict[str, float] = field(default_factory=dict)
    tolerances: dict[str, float] = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {"measures": dict(self.entries), "params": dict(self.params), "tolerances": dict(self.tolerances)}


def _two_qubit(rho) -> DensityMatrix:
    if not isinstance(rho, DensityMatrix):
        rho = DensityMatrix(rho, (2, 2))
    if rho.dims != (2, 2):
        raise BadDims(f"expected a two-qubit state, got dims {rho.dims}")
    return rho


def spin_flip(rho) -> np.ndarray:
    rho = _two_qubit(rho)
    return YY @ rho.mat.conj() @ YY


def concurrence_lambdas(rho, tol_psd: float = TOL_PSD) -> np.ndarray:
    """Square roots of the eigenvalues of ``rho @ spin_flip(rho)``, decreasing.

    They equal the singular values of ``conj(sqrt(rho)) @ YY @ sqrt(rho)``; those are
    read off the Hermitian dilation ``[[0, M], [M^+, 0]]`` so that no square root
    of a near-zero eigenvalue is ever taken.
    """
    rho = _two_qubit(rho)
    root = sqrt_psd(rho.mat, tol_psd)
    m = root.conj() @ YY @ root
    z = np.zeros_like(m)
    w, _ = herm_eigen(np.block([[z, m], [m.conj().T, z]]))
    return np.abs(w[::-1][:4])


def concurrence(rho, tol_psd: float = TOL_PSD) -> float:
    lam = concurrence_lambdas(rho, tol_psd)
    return float(min(1.0, max(0.0, lam[0] - lam[1] - lam[2] - lam[3])))


def binary_entropy(p: float) -> float:
    if p <= 0.0 or p >= 1.0:
        return 0.0
    return -p * math.log2(p) - (1.0 - p) * math.log2(1.0 - p)


def eof_from_concurrence(c: float) -> float:
    c = min(max(c, 0.0), 1.0)
    return binary_entropy(0.5 * (1.0 + math.sqrt(1.0 - c * c)))


def eof_two_qubit(rho, tol_psd: float = TOL_PSD) -> float:
    """Entanglement of formation in bits."""
    return eof_from_concurrence(concurrence(rho, tol_psd))


def min_pt_eigenvalue(rho: DensityMatrix, factor: int = 1) -> float:
    """Smallest eigenvalue of the partial transpose on ``factor`` (0-based)."""
    w, _ = herm_eigen(partial_transpose(rho, factor))
    return float(w[0])


def negativity(rho: DensityMatrix, factor: int = 1) -> float:
    w, _ = herm_eigen(partial_transpose(rho, factor))
    return float(-np.sum(w[w < 0.0]))


def two_qubit_separable(rho, tol_psd: float = TOL_PSD) -> bool:
    """PPT verdict, which decides separability exactly for two qubits."""
    rho = _two_qubit(rho)
    return min_pt_eigenvalue(rho, 1) >= -tol_psd


def von_neumann_entropy(rho: DensityMatrix, tol_psd: float = TOL_PSD) -> float:
    w = rho.eigenvalues(tol_psd) if isinstance(rho, DensityMatrix) else clamp_spectrum(herm_eigen(rho)[0], tol_psd)
    w = w[w > 0.0]
    return float(max(0.0, -np.sum(w * np.log2(w))))
