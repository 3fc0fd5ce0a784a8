"""Dense complex linear algebra for small matrices.

Matrices are plain ``numpy.ndarray`` objects of dtype ``complex128``.  Multi-party
operators are row-major with factor 0 as the leftmost (most significant) tensor
factor, so ``kron(a, b)[i*db + k, j*db + l] == a[i, j] * b[k, l]``.

The Hermitian eigensolver is a cyclic Jacobi method compiled with numba.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import reduce
from typing import Iterable, Sequence

import numpy as np
from numba import njit

from .errors import BadIndex, BadDims, NotHermitian, NotPSD

TOL_HERM = 1e-10
TOL_TRACE = 1e-10
TOL_PSD = 1e-10
JACOBI_TOL = 1e-12
JACOBI_MAX_SWEEPS = 100


def as_matrix(a) -> np.ndarray:
    m = np.asarray(a, dtype=np.complex128)
    if m.ndim != 2:
        raise BadDims(f"expected a 2-d array, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    return m


def hermiticity_residual(h: np.ndarray) -> float:
    return float(np.linalg.norm(h - h.conj().T))


@dataclass(frozen=True)
class DensityMatrix:
    """Unit-trace Hermitian matrix on a tensor product of ``dims`` factors.

    Positivity is not checked on construction (that needs a full
    eigendecomposition); use :meth:`min_eigenvalue` or :meth:`eigenvalues`.
    """

    mat: np.ndarray
    dims: tuple[int, ...] = field(default=())

    def __post_init__(self):
        mat = as_matrix(self.mat)
        dims = tuple(int(d) for d in self.dims) if self.dims else (mat.shape[0],)
        if mat.shape[0] != mat.shape[1]:
            raise BadDims(f"density matrix must be square, got {mat.shape}")
        if int(np.prod(dims)) != mat.shape[0] or any(d < 1 for d in dims):
            raise BadDims(f"dims {dims} do not factor size {mat.shape[0]}")
        scale = max(1.0, float(np.linalg.norm(mat)))
        if hermiticity_residual(mat) > TOL_HERM * scale:
            raise NotHermitian(f"hermiticity residual {hermiticity_residual(mat):.3e}")
        tr = np.trace(mat)
        if abs(tr - 1.0) > TOL_TRACE:
            raise BadDims(f"trace {tr:.12g} differs from 1")
        mat = 0.5 * (mat + mat.conj().T)
        mat.setflags(write=False)
        object.__setattr__(self, "mat", mat)
        object.__setattr__(self, "dims", dims)

    @property
    def shape(self):
        return self.mat.shape

    def eigenvalues(self, tol_psd: float = TOL_PSD) -> np.ndarray:
        """Ascending eigenvalues with in-band negatives clamped to zero."""
        w, _ = herm_eigen(self.mat)
        return clamp_spectrum(w, tol_psd)

    def min_eigenvalue(self) -> float:
        return float(herm_eigen(self.mat)[0][0])


def clamp_spectrum(w: np.ndarray, tol_psd: float = TOL_PSD) -> np.ndarray:
    if w.size and w[0] < -tol_psd:
        raise NotPSD(f"eigenvalue {w[0]:.3e} below -{tol_psd:g}")
    return np.where(w < 0.0, 0.0, w)


def kron(*mats) -> np.ndarray:
    """Kronecker product of one or more matrices, leftmost factor most significant."""
    if not mats:
        raise ValueError("kron needs at least one factor")
    return reduce(np.kron, (as_matrix(m) for m in mats))


@njit(cache=True, nogil=True)
def _jacobi_kernel(a, v, target, max_sweeps):
    n = a.shape[0]
    for sweep in range(max_sweeps):
        off = 0.0
        for i in range(n):
            for j in range(n):
                if i != j:
                    off += a[i, j].real ** 2 + a[i, j].imag ** 2
        if np.sqrt(off) <= target:
            return sweep
        for p in range(n - 1):
            for q in range(p + 1, n):
                b = a[p, q]
                absb = abs(b)
                if absb == 0.0:
                    continue
                theta = 0.5 * np.arctan2(2.0 * absb, a[q, q].real - a[p, p].real)
                c = np.cos(theta)
                s = np.sin(theta)
                phase = b.conjugate() / absb
                u11 = c + 0j
                u12 = s + 0j
                u21 = -s * phase
                u22 = c * phase
                for k in range(n):
                    xp = a[k, p]
                    xq = a[k, q]
                    a[k, p] = xp * u11 + xq * u21
                    a[k, q] = xp * u12 + xq * u22
                for k in range(n):
                    xp = a[p, k]
                    xq = a[q, k]
                    a[p, k] = u11.conjugate() * xp + u21.conjugate() * xq
                    a[q, k] = u12.conjugate() * xp + u22.conjugate() * xq
                a[p, q] = 0.0
                a[q, p] = 0.0
                a[p, p] = a[p, p].real
                a[q, q] = a[q, q].real
                for k in range(n):
                    xp = v[k, p]
                    xq = v[k, q]
                    v[k, p] = xp * u11 + xq * u21
                    v[k, q] = xp * u12 + xq * u22
    return max_sweeps


def herm_eigen(h, tol: float = JACOBI_TOL, max_sweeps: int = JACOBI_MAX_SWEEPS):
    """Eigendecomposition of a Hermitian matrix by cyclic Jacobi rotations.

    Each rotation first removes the phase of the pivot ``h[p, q]`` and then
    applies the real symmetric Jacobi rotation to the resulting 2x2 block.

    Parameters
    ----------
    h : array_like
        Square Hermitian matrix.
    tol : float
        Stop once the off-diagonal Frobenius norm is below ``tol * ||h||_F``.
    max_sweeps : int
        Hard cap on full sweeps.

    Returns
    -------
    w : ndarray
        Real eigenvalues in ascending order.
    v : ndarray
        Unitary matrix whose columns are the matching eigenvectors.
    """
    a = as_matrix(h)
    n = a.shape[0]
    if a.shape != (n, n):
        raise BadDims(f"expected a square matrix, got {a.shape}")
    norm = float(np.linalg.norm(a))
    if hermiticity_residual(a) > TOL_HERM * max(1.0, norm):
        raise NotHermitian(f"hermiticity residual {hermiticity_residual(a):.3e}")
    a = np.ascontiguousarray(0.5 * (a + a.conj().T))
    v = np.eye(n, dtype=np.complex128)
    if n > 1 and norm > 0.0:
        _jacobi_kernel(a, v, tol * norm, max_sweeps)
    w = np.real(np.diag(a)).copy()
    order = np.argsort(w, kind="stable")
    return w[order], v[:, order]


def sqrt_psd(h, tol_psd: float = TOL_PSD) -> np.ndarray:
    """Principal square root of a positive semidefinite Hermitian matrix."""
    w, v = herm_eigen(h)
    w = clamp_spectrum(w, tol_psd)
    return (v * np.sqrt(w)) @ v.conj().T


def _check_factors(dims: Sequence[int], idx: Iterable[int]) -> list[int]:
    out = []
    for k in idx:
        if isinstance(k, bool) or not isinstance(k, (int, np.integer)):
            raise BadIndex(f"factor index {k!r} is not an integer")
        if not 0 <= k < len(dims):
            raise BadIndex(f"factor index {k} out of range for dims {tuple(dims)}")
        out.append(int(k))
    return out


def partial_trace(rho: DensityMatrix, keep: Iterable[int]) -> DensityMatrix:
    """Trace out every factor not listed in ``keep`` (0-based factor indices).

    The kept factors stay in their original order regardless of the order of
    ``keep``.
    """
    dims = rho.dims
    keep = sorted(set(_check_factors(dims, keep)))
    if not keep:
        raise BadIndex("keep must name at least one factor")
    n = len(dims)
    t = rho.mat.reshape(dims + dims)
    traced = [k for k in range(n) if k not in keep]
    # einsum subscripts: ket legs 0..n-1, bra legs n..2n-1; traced bra legs reuse ket labels
    ket = list(range(n))
    bra = [k if k in traced else n + k for k in range(n)]
    out = keep + [n + k for k in keep]
    kept_dims = tuple(dims[k] for k in keep)
    d = int(np.prod(kept_dims))
    mat = np.einsum(t, ket + bra, out).reshape(d, d)
    return DensityMatrix(mat, kept_dims)


def partial_transpose(rho: DensityMatrix, factor: int) -> np.ndarray:
    """Transpose the chosen tensor factor only (0-based)."""
    dims = rho.dims
    (k,) = _check_factors(dims, [factor])
    n = len(dims)
    t = rho.mat.reshape(dims + dims)
    axes = list(range(2 * n))
    axes[k], axes[n + k] = axes[n + k], axes[k]
    d = rho.mat.shape[0]
    return np.ascontiguousarray(t.transpose(axes)).reshape(d, d)


def pure_state(psi, dims: Sequence[int] | None = None) -> DensityMatrix:
    psi = np.asarray(psi, dtype=np.complex128).ravel()
    psi = psi / np.linalg.norm(psi)
    return DensityMatrix(np.outer(psi, psi.conj()), tuple(dims) if dims else ())
