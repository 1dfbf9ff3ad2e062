import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from helpers import crandn, hermitian_with_spectrum, j_instance, scaled, subordinated_pair
from kreinpert.decomp import (
    block_diagonalize,
    build_w,
    commutation_identities,
    commutation_identities_j,
    enclosure_radius,
    oblique_projections,
    operator_angle,
    operator_angle_direct,
    selfadjoint_form,
)
from kreinpert.errors import NotContractive, NotJSymmetric, SingularW
from kreinpert.linalg import eigvals, eigvalsh, match_spectra, spectral_norm
from kreinpert.riccati import BlockOperator, solve_fixed_point


def gap_instance(rng, n0=2, n1=3, v=0.4, general=False):
    a0 = hermitian_with_spectrum(rng, [-0.3, 0.2])[:n0, :n0] if n0 == 2 else np.zeros((1, 1))
    s0 = eigvalsh(a0)
    s1 = np.concatenate([[s0[0] - 1.0], s0[-1] + 1.0 + rng.uniform(0, 1, n1 - 1)])
    a1 = hermitian_with_spectrum(rng, s1)
    if general:
        return BlockOperator(a0, a1, scaled(rng, (n0, n1), v), scaled(rng, (n1, n0), v * 0.8))
    return j_instance(rng, a0, a1, v)


def test_w_trivial():
    w, wi = build_w(np.zeros((2, 3)), np.zeros((3, 2)))
    assert np.array_equal(w, np.eye(5)) and np.array_equal(wi, np.eye(5))


def test_w_scalar():
    _, wi = build_w([[0.5]], [[0.5]])
    assert wi[0, 0] == pytest.approx(4.0 / 3.0)
    with pytest.raises(SingularW):
        build_w([[1.0]], [[1.0]])


def test_w_inverse_is_inverse(rng):
    k = scaled(rng, (3, 2), 0.7)
    kp = scaled(rng, (2, 3), 0.9)
    w, wi = build_w(k, kp)
    assert np.linalg.norm(w @ wi - np.eye(5)) < 1e-12


def test_projections_trivial():
    q0, q1 = oblique_projections(np.zeros((2, 2)), np.zeros((2, 2)))
    assert np.array_equal(q0, np.diag([1.0, 1.0, 0.0, 0.0]))
    assert np.array_equal(q1, np.diag([0.0, 0.0, 1.0, 1.0]))


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n0=st.integers(1, 4), n1=st.integers(1, 4))
def test_projection_algebra(seed, n0, n1):
    rng = np.random.default_rng(seed)
    k = scaled(rng, (n1, n0), rng.uniform(0, 0.95))
    kp = scaled(rng, (n0, n1), rng.uniform(0, 0.95))
    q0, q1 = oblique_projections(k, kp)
    n = n0 + n1
    assert np.linalg.norm(q0 @ q0 - q0) < 1e-10
    assert np.linalg.norm(q1 @ q1 - q1) < 1e-10
    assert np.linalg.norm(q0 + q1 - np.eye(n)) < 1e-10
    assert np.linalg.norm(q0 @ q1) < 1e-10 and np.linalg.norm(q1 @ q0) < 1e-10
    graph = np.vstack([np.eye(n0), k])
    assert np.linalg.norm(q0 @ graph - graph) < 1e-11


def test_angle_examples():
    assert np.all(operator_angle(np.zeros((2, 3))) == 0.0)
    assert operator_angle([[1.0]])[0] == pytest.approx(math.pi / 4)
    t = operator_angle([[0.5]])[0]
    assert t == pytest.approx(math.atan(0.5), abs=1e-15)
    assert abs(t - operator_angle_direct([[0.5]])[0]) < 1e-12


def test_angle_padding():
    k = np.array([[1.0, 0.0, 0.0]])  # n1 = 1, n0 = 3
    th = operator_angle(k)
    assert th.shape == (3,) and th[0] == pytest.approx(math.pi / 4) and np.all(th[1:] == 0)
    assert np.allclose(operator_angle_direct(k), th, atol=1e-12)


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n0=st.integers(1, 5), n1=st.integers(1, 5), norm=st.floats(0.0, 10.0))
def test_angle_formulas_agree(seed, n0, n1, norm):
    rng = np.random.default_rng(seed)
    k = crandn(rng, n1, n0)
    k *= norm / np.linalg.norm(k, 2)
    assert np.max(np.abs(operator_angle(k) - operator_angle_direct(k))) <= 1e-10


def test_scalar_diagonalization():
    op = BlockOperator([[-0.5]], [[0.5]], [[0.4]], [[-0.4]])
    dz = block_diagonalize(op, 1.0)
    assert dz.Z0[0, 0] == pytest.approx(-0.3, abs=1e-10)
    assert dz.Z1[0, 0] == pytest.approx(0.3, abs=1e-10)
    assert math.tan(dz.theta0[0]) == pytest.approx(spectral_norm(dz.K), abs=1e-12)
    r0, r1 = commutation_identities(op, dz.K, dz.Kp)
    assert r0 < 1e-12 and r1 < 1e-12


def test_zero_coupling():
    op = BlockOperator(np.diag([-1.0, -2.0]), [[1.0]], np.zeros((2, 1)), np.zeros((1, 2)))
    dz = block_diagonalize(op, 2.0)
    assert np.allclose(dz.Z0, op.A0) and np.allclose(dz.Z1, op.A1)
    assert np.allclose(dz.W, np.eye(3))
    assert commutation_identities(op, dz.K, dz.Kp) == (0.0, 0.0)


@pytest.mark.parametrize("general", [False, True])
def test_gap_instance_structure(rng, general):
    op = gap_instance(rng, general=general)
    dz = block_diagonalize(op, 1.0)
    lnorm = spectral_norm(op.L)
    z = np.block([[dz.Z0, np.zeros((2, 3))], [np.zeros((3, 2)), dz.Z1]])
    assert spectral_norm(op.L - dz.W @ z @ dz.W_inv) <= 1e-9 * lnorm
    assert spectral_norm((np.eye(5) - dz.Q0) @ op.L @ dz.Q0) <= 1e-9 * lnorm
    ok, worst = match_spectra(eigvals(op.L), np.concatenate([eigvals(dz.Z0), eigvals(dz.Z1)]), 1e-8 * (1 + lnorm))
    assert ok, worst
    assert max(commutation_identities(op, dz.K, dz.Kp)) <= 1e-9
    assert dz.enclosure_r < spectral_norm(op.V)
    for z_j, a_j in ((dz.Z0, op.A0), (dz.Z1, op.A1)):
        dist = np.abs(eigvals(z_j)[:, None] - eigvalsh(a_j)[None, :]).min(axis=1)
        assert np.all(dist <= dz.enclosure_r + 1e-9)


def test_enclosure_radius_below_v():
    assert enclosure_radius(0.4, 0.4, 1.0) == pytest.approx(0.2)
    assert enclosure_radius(0.49, 0.49, 1.0) < 0.49


def test_selfadjoint_form_scalar():
    op = BlockOperator.j_selfadjoint([[-0.5]], [[0.5]], [[0.4]])
    k = solve_fixed_point(op, 1.0).K
    form = selfadjoint_form(op, k)
    assert form.Lambda0[0, 0] == pytest.approx(-0.3, abs=1e-12)
    assert form.gamma == pytest.approx(0.6, abs=1e-12)


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n0=st.integers(1, 4), n1=st.integers(1, 4), frac=st.floats(0.0, 0.95))
def test_selfadjoint_form_random(seed, n0, n1, frac):
    rng = np.random.default_rng(seed)
    a0, a1 = subordinated_pair(rng, n0, n1)
    op = j_instance(rng, a0, a1, 0.5 * frac)
    k = solve_fixed_point(op, 1.0).K
    form = selfadjoint_form(op, k)
    lnorm = spectral_norm(op.L)
    lam = np.block([[form.Lambda0, np.zeros((n0, n1))], [np.zeros((n1, n0)), form.Lambda1]])
    assert spectral_norm(op.L - form.T @ lam @ form.T_inv) <= 1e-9 * lnorm
    assert spectral_norm(form.Lambda0 - form.Lambda0.conj().T) <= 1e-9
    assert spectral_norm(form.Lambda1 - form.Lambda1.conj().T) <= 1e-9
    assert max(commutation_identities_j(op, k)) <= 1e-9
    assert np.linalg.norm(form.T @ form.T_inv - np.eye(n0 + n1)) < 1e-10


def test_selfadjoint_form_errors():
    op = BlockOperator([[-0.5]], [[0.5]], [[0.4]], [[0.4]])
    with pytest.raises(NotJSymmetric):
        selfadjoint_form(op, [[0.5]])
    op = BlockOperator.j_selfadjoint([[-0.5]], [[0.5]], [[0.4]])
    with pytest.raises(NotContractive):
        selfadjoint_form(op, [[1.0]])
