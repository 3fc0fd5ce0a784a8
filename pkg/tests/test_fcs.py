import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fcs_lab.errors import DegenerateFixedPoint, DimensionMismatch, TooLarge
from fcs_lab.families import FamilyParams, make_triple
from fcs_lab.fcs import (
    KrausTriple,
    SiteSet,
    compatibility_check,
    dual_apply,
    fixed_point,
    local_state,
    reduced_state,
    rho_ab,
    transfer_spectrum,
    validate,
)
from fcs_lab.matcore import kron, partial_trace

from conftest import ex1_omegas, ex1_rho_ab_closed, ex1_rho12_closed, ex3_rho_ab_closed, random_unitary

A_EX2 = math.sqrt(2) - 1


def brute_transfer(kraus):
    """Dual map as a matrix, assembled column by column from basis matrices."""
    b = kraus[0].shape[0]
    cols = []
    for j in range(b):
        for i in range(b):  # column-major basis order
            e = np.zeros((b, b), dtype=complex)
            e[i, j] = 1.0
            out = sum(v.conj().T @ e @ v for v in kraus)
            cols.append(out.reshape(-1, order="F"))
    return np.array(cols).T


def brute_unit_multiplicity(kraus, tol=1e-9):
    ev = np.linalg.eigvals(brute_transfer(kraus))
    return int(np.sum(np.abs(ev - 1) <= tol))


def ex1(phi):
    return make_triple(FamilyParams("ex1", phi))


def test_validate_ex1():
    rep = validate(ex1(math.pi / 8))
    assert rep.unitality <= 1e-12 and rep.invariance <= 1e-12 and rep.ok


def test_validate_broken_unitality():
    rep = validate(KrausTriple((np.eye(3), np.eye(3))))
    assert rep.unitality == pytest.approx(math.sqrt(3), abs=1e-14)
    assert not rep.ok


def test_validate_ex2_closed_form_invariant():
    rep = validate(make_triple(FamilyParams("ex2", math.pi / 5, A_EX2)))
    assert rep.unitality <= 1e-10 and rep.invariance <= 1e-10


def test_kraus_shape_errors():
    with pytest.raises(DimensionMismatch):
        KrausTriple((np.eye(2), np.eye(3)))
    with pytest.raises(DimensionMismatch):
        KrausTriple((np.ones((2, 3)), np.ones((2, 3))))
    with pytest.raises(DimensionMismatch):
        KrausTriple((np.eye(2),))
    with pytest.raises(DimensionMismatch):
        dual_apply(ex1(0.3), np.eye(3))


def test_dual_apply_fixes_invariants():
    t = ex1(math.pi / 8)
    assert np.linalg.norm(dual_apply(t, t.invariant.mat) - t.invariant.mat) <= 1e-12
    t3 = make_triple(FamilyParams("ex3", math.pi / 2, 1 / math.sqrt(3)))
    assert np.linalg.norm(dual_apply(t3, t3.invariant.mat) - t3.invariant.mat) <= 1e-12


def test_dual_apply_trace_preserving(rng):
    t = make_triple(FamilyParams("ex2", 1.1, 0.3))
    assert np.trace(dual_apply(t, np.eye(2))) == pytest.approx(2.0, abs=1e-12)
    x = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    assert np.trace(dual_apply(t, x)) == pytest.approx(np.trace(x), abs=1e-12)


@pytest.mark.parametrize("phi, expected", [(0.0, 2), (math.pi / 8, 1)])
def test_transfer_spectrum_ex1_multiplicity(phi, expected):
    kraus = ex1(phi).kraus
    assert brute_unit_multiplicity(kraus) == expected
    assert transfer_spectrum(ex1(phi)).unit_multiplicity == expected


def test_transfer_matrix_matches_brute_force(rng):
    from fcs_lab.fcs import transfer_matrix

    t = make_triple(FamilyParams("ex2", 0.7, 0.4))
    np.testing.assert_allclose(transfer_matrix(t), brute_transfer(t.kraus), atol=1e-15)


def test_transfer_spectrum_identity_channel():
    b = 3
    t = KrausTriple((np.exp(0.3j) * np.eye(b) / math.sqrt(2), np.eye(b) / math.sqrt(2)))
    spec = transfer_spectrum(t)
    assert spec.unit_multiplicity == b * b
    assert spec.spectral_radius == pytest.approx(1.0, abs=1e-12)


def test_transfer_spectrum_sorted_by_modulus():
    ev = transfer_spectrum(make_triple(FamilyParams("ex2", 0.9, 0.2))).eigenvalues
    assert np.all(np.diff(np.abs(ev)) <= 1e-15)


def test_fixed_point_ex1():
    c, s = math.cos(math.pi / 8), math.sin(math.pi / 8)
    fp = fixed_point(KrausTriple(ex1(math.pi / 8).kraus))
    np.testing.assert_allclose(fp.mat, 0.5 * np.array([[1, 2 * c * s], [2 * c * s, 1]]), atol=1e-12)


def test_fixed_point_degenerate_ex1():
    with pytest.raises(DegenerateFixedPoint):
        fixed_point(KrausTriple(ex1(0.0).kraus))


def test_fixed_point_ex3():
    t = make_triple(FamilyParams("ex3", math.pi / 2, 1 / math.sqrt(3)))
    fp = fixed_point(KrausTriple(t.kraus))
    np.testing.assert_allclose(fp.mat, np.diag([0.75, 0.25]), atol=1e-12)
    assert np.linalg.norm(dual_apply(t, fp.mat) - fp.mat) <= 1e-10


def test_fixed_point_random_bond_dim_3(rng):
    # isometry columns give a unital Kraus pair
    u = random_unitary(rng, 6)[:, :3]
    v1, v2 = u[:3].conj().T, u[3:].conj().T
    t = KrausTriple((v1, v2))
    assert validate(t).unitality <= 1e-12
    fp = fixed_point(t)
    assert np.linalg.norm(dual_apply(t, fp.mat) - fp.mat) <= 1e-10
    assert fp.min_eigenvalue() >= -1e-10


def test_rho_ab_ex1_closed_form():
    np.testing.assert_allclose(rho_ab(ex1(math.pi / 8)).mat, ex1_rho_ab_closed(math.pi / 8), atol=1e-15)


def test_rho_ab_ex3_closed_form():
    a, phi = 1 / math.sqrt(3), math.pi / 2
    r = rho_ab(make_triple(FamilyParams("ex3", phi, a)))
    np.testing.assert_allclose(r.mat, ex3_rho_ab_closed(a, phi), atol=1e-15)


@pytest.mark.parametrize("fam, phi, a", [("ex1", 0.4, 0.0), ("ex2", 2.0, 0.6), ("ex3", 5.0, 0.3)])
def test_rho_ab_marginals(fam, phi, a):
    t = make_triple(FamilyParams(fam, phi, a))
    r = rho_ab(t)
    assert np.trace(r.mat) == pytest.approx(1.0, abs=1e-14)
    np.testing.assert_allclose(partial_trace(r, [1]).mat, t.invariant.mat, atol=1e-12)
    np.testing.assert_allclose(partial_trace(r, [0]).mat, local_state(t, 1).mat, atol=1e-12)
    np.testing.assert_allclose(partial_trace(r, [0]).mat, reduced_state(t, [1]).mat, atol=1e-12)
    assert r.min_eigenvalue() >= -1e-12


def test_local_state_ex1_three_sites():
    phi = math.pi / 8
    o = ex1_omegas(phi)
    expected = np.zeros((8, 8))
    for i, j in itertools.product(range(2), repeat=2):
        e = np.zeros((2, 2))
        e[i, j] = 1.0
        expected += 0.5 * kron(o[2 * i + j], e, o[2 * i + j]).real
    np.testing.assert_allclose(local_state(ex1(phi), 3).mat, expected, atol=1e-15)


def test_local_state_ex1_two_sites():
    np.testing.assert_allclose(local_state(ex1(math.pi / 8), 2).mat, ex1_rho12_closed(math.pi / 8), atol=1e-15)


def test_local_state_two_site_entries_follow_R_tensor():
    t = make_triple(FamilyParams("ex2", 0.8, 0.35))
    v = t.kraus
    rho = t.invariant.mat
    loc = local_state(t, 2).mat
    for i, j, l, m in itertools.product(range(2), repeat=4):
        r = np.trace(v[i].conj().T @ v[j].conj().T @ rho @ v[l] @ v[m])
        # R_{ijlm} sits at row (j, i), column (l, m)
        assert loc[2 * j + i, 2 * l + m] == pytest.approx(r, abs=1e-15)


@pytest.mark.parametrize("a, phi", [(0.0, 0.3), (A_EX2, math.pi / 5), (0.9, 4.0), (0.5, 1.0)])
def test_local_state_ex2_zero_pattern(a, phi):
    m = local_state(make_triple(FamilyParams("ex2", phi, a)), 2).mat
    assert np.abs(m[3, :]).max() <= 1e-14 and np.abs(m[:, 3]).max() <= 1e-14
    assert m[1, 1] == pytest.approx(m[2, 2], abs=1e-14)
    assert m[0, 1] == pytest.approx(m[0, 2], abs=1e-14)


def test_local_state_cap():
    with pytest.raises(TooLarge):
        local_state(ex1(0.3), 11)
    with pytest.raises(TooLarge):
        local_state(ex1(0.3), 0)


def test_reduced_state_ex1_sites_1_3():
    phi = math.pi / 8
    o11, _, _, o22 = ex1_omegas(phi)
    r = reduced_state(ex1(phi), SiteSet((1, 3)))
    np.testing.assert_allclose(r.mat, 0.5 * kron(o11, o11) + 0.5 * kron(o22, o22), atol=1e-15)


def test_reduced_state_single_site():
    t = make_triple(FamilyParams("ex3", 1.0, 0.4))
    np.testing.assert_allclose(reduced_state(t, [7]).mat, local_state(t, 1).mat, atol=1e-15)


def test_reduced_state_ex2_sites_1_5():
    t = make_triple(FamilyParams("ex2", math.pi / 5, A_EX2))
    brute = partial_trace(local_state(t, 5), [0, 4])
    assert np.abs(reduced_state(t, "1,5").mat - brute.mat).max() <= 1e-12


def test_reduced_state_translation_and_long_gap():
    t = make_triple(FamilyParams("ex2", 0.7, 0.3))
    np.testing.assert_allclose(reduced_state(t, [4, 6]).mat, reduced_state(t, [1, 3]).mat, atol=1e-14)
    far = reduced_state(t, [1, 2000])
    # distant sites decorrelate: product of one-site marginals
    one = local_state(t, 1).mat
    np.testing.assert_allclose(far.mat, kron(one, one), atol=1e-12)


def test_reduced_state_cap():
    with pytest.raises(TooLarge):
        reduced_state(ex1(0.3), range(1, 12))


def test_site_set_validation():
    with pytest.raises(ValueError):
        SiteSet(())
    with pytest.raises(ValueError):
        SiteSet((0, 2))
    with pytest.raises(ValueError):
        SiteSet((3, 2))
    s = SiteSet.parse("1,3,10")
    assert s.sites == (1, 3, 10) and s.span == 10 and str(s) == "1,3,10"


@pytest.mark.parametrize("fam, phi, a, n", [("ex1", math.pi / 8, 0.0, 3), ("ex3", math.pi / 2, 1 / math.sqrt(3), 4),
                                            ("ex2", 1.3, 0.2, 1)])
def test_compatibility_check(fam, phi, a, n):
    last, first = compatibility_check(make_triple(FamilyParams(fam, phi, a)), n)
    assert last <= 1e-11 and first <= 1e-11


def test_compatibility_check_n1_is_marginal_consistency():
    t = make_triple(FamilyParams("ex2", 1.3, 0.2))
    r = rho_ab(t)
    pair = local_state(t, 2)
    np.testing.assert_allclose(partial_trace(pair, [0]).mat, partial_trace(r, [0]).mat, atol=1e-14)


@settings(max_examples=25, deadline=None)
@given(
    fam=st.sampled_from(["ex1", "ex2", "ex3"]),
    phi=st.floats(0.0, 2 * math.pi),
    a=st.floats(0.0, 0.999),
    n=st.integers(1, 6),
)
def test_local_state_psd_unit_trace(fam, phi, a, n):
    t = make_triple(FamilyParams(fam, phi, a))
    loc = local_state(t, n)
    assert abs(np.trace(loc.mat) - 1) <= 1e-12
    assert loc.min_eigenvalue() >= -1e-10
    assert transfer_spectrum(t).spectral_radius <= 1 + 1e-9
