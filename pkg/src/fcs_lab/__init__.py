"""Finitely correlated states of spin-1/2 chains and their entanglement."""
from .entanglement import (
    MeasureReport,
    concurrence,
    eof_two_qubit,
    min_pt_eigenvalue,
    negativity,
    spin_flip,
    two_qubit_separable,
    von_neumann_entropy,
)
from .estimator import FCSState, MeasureTransformer
from .families import FamilyParams, make_triple, oracle_concurrence
from .fcs import (
    KrausTriple,
    SiteSet,
    TransferSpectrum,
    compatibility_check,
    dual_apply,
    fixed_point,
    local_state,
    reduced_state,
    rho_ab,
    transfer_spectrum,
    validate,
)
from .matcore import DensityMatrix, herm_eigen, kron, partial_trace, partial_transpose, sqrt_psd
from .sweep import GridAxis, OptResult, SweepSpec, hierarchy_audit, maximize, run_sweep

__version__ = "0.1.0"
