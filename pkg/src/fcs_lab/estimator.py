"""scikit-learn compatible wrappers.

``FCSState`` fits one chain state (family parameters or explicit Kraus
matrices) and transforms site sets into reduced density matrices.
``MeasureTransformer`` maps rows of ``(phi, a)`` to measure values, so sweeps
can be expressed as ordinary pipelines and grid searches.
"""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .entanglement import MeasureReport
from .errors import BadParams, FCSError
from .families import FamilyParams, make_triple
from .fcs import (
    TOL_COND,
    TOL_FIX,
    KrausTriple,
    as_site_set,
    fixed_point,
    reduced_state,
    rho_ab,
    transfer_spectrum,
    validate,
)
from .sweep import check_measures, evaluate_measures


def check_site_sets(X) -> list:
    """Accept one site set or a sequence of them; return a list of ``SiteSet``."""
    if isinstance(X, str) or (len(X) and np.isscalar(X[0])):
        return [as_site_set(X)]
    return [as_site_set(s) for s in X]


class FCSState(BaseEstimator):
    """Translation-invariant chain state defined by a Kraus pair.

    Parameters
    ----------
    family : {"ex1", "ex2", "ex3"} or None
        Built-in family; ignored when ``kraus`` is given.
    phi, a : float
        Family parameters (radians, and ``0 <= a <= 1``).
    kraus : array_like of shape (2, b, b), optional
        Explicit Kraus matrices.
    rho : array_like of shape (b, b), optional
        Invariant state to attach instead of solving for it.
    solve_fixed_point : bool
        Discard any attached invariant and solve the transfer operator.
    """

    def __init__(
        self,
        family="ex1",
        phi=0.0,
        a=0.0,
        kraus=None,
        rho=None,
        solve_fixed_point=False,
        tol_cond=TOL_COND,
        tol_fix=TOL_FIX,
    ):
        self.family = family
        self.phi = phi
        self.a = a
        self.kraus = kraus
        self.rho = rho
        self.solve_fixed_point = solve_fixed_point
        self.tol_cond = tol_cond
        self.tol_fix = tol_fix

    def _triple(self) -> KrausTriple:
        if self.kraus is not None:
            return KrausTriple(tuple(np.asarray(self.kraus, dtype=complex)), self.rho,
                               tol_cond=self.tol_cond, tol_fix=self.tol_fix)
        if self.family is None:
            raise BadParams("either family or kraus must be given")
        t = make_triple(FamilyParams(self.family, float(self.phi), float(self.a)))
        return KrausTriple(t.kraus, t.invariant, t.unique, self.tol_cond, self.tol_fix, t.meta)

    def fit(self, X=None, y=None):
        triple = self._triple()
        self.validation_ = validate(triple)
        if not self.validation_.ok:
            raise BadParams(f"triple fails validation: {self.validation_.as_dict()}")
        self.spectrum_ = transfer_spectrum(triple)
        self.unique_ = self.spectrum_.unit_multiplicity == 1
        if self.solve_fixed_point or triple.invariant is None:
            triple = triple.with_invariant(fixed_point(triple))
        self.triple_ = triple
        self.invariant_ = triple.invariant
        return self

    def transform(self, X):
        """Reduced density matrices, one per site set in ``X``."""
        check_is_fitted(self, "triple_")
        return [reduced_state(self.triple_, s) for s in check_site_sets(X)]

    def rho_ab(self):
        check_is_fitted(self, "triple_")
        return rho_ab(self.triple_)

    def measure(self, measures, sites=None) -> MeasureReport:
        check_is_fitted(self, "triple_")
        sites = as_site_set(sites) if sites is not None else None
        params = None
        if self.kraus is None:
            params = FamilyParams(self.family, float(self.phi), float(self.a))
        values = evaluate_measures(self.triple_, measures, sites, params)
        p = {"phi": float(self.phi), "a": float(self.a)} if params else {}
        return MeasureReport(values, p, {"tol_cond": self.tol_cond, "tol_fix": self.tol_fix})


class MeasureTransformer(TransformerMixin, BaseEstimator):
    """Map rows ``[phi, a]`` (or ``[phi]``) to the requested measures of a family.

    Points that fail (e.g. a degenerate fixed point) give NaN.
    """

    def __init__(self, family="ex2", measures=("c12", "c_ab"), sites=None, solve_fixed_point=False):
        self.family = family
        self.measures = measures
        self.sites = sites
        self.solve_fixed_point = solve_fixed_point

    def fit(self, X, y=None):
        X = check_array(X, dtype=float, ensure_all_finite=True)
        if X.shape[1] not in (1, 2):
            raise ValueError(f"expected 1 or 2 columns (phi[, a]), got {X.shape[1]}")
        FamilyParams(self.family)
        self.measures_ = check_measures(self.measures)
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X):
        check_is_fitted(self, "measures_")
        X = check_array(X, dtype=float, ensure_all_finite=True)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"X has {X.shape[1]} columns, fitted with {self.n_features_in_}")
        sites = as_site_set(self.sites) if self.sites is not None else None
        out = np.full((X.shape[0], len(self.measures_)), np.nan)
        for i, row in enumerate(X):
            p = FamilyParams(self.family, row[0], row[1] if len(row) > 1 else 0.0)
            try:
                t = make_triple(p)
                if self.solve_fixed_point:
                    t = t.with_invariant(fixed_point(t))
                vals = evaluate_measures(t, self.measures_, sites, p)
            except FCSError:
                continue
            out[i] = [vals[m] for m in self.measures_]
        return out

    def get_feature_names_out(self, input_features=None):
        return np.asarray(self.measures_, dtype=object)


__all__ = ["FCSState", "MeasureTransformer", "check_site_sets"]
