"""Graph subspaces, block diagonalization and the self-adjoint similarity.

Given the solution ``K`` of the Riccati equation and ``K'`` of its dual,
the graphs ``G(K) = {x0 + K x0}`` and ``G(K') = {K' x1 + x1}`` are
invariant for ``L`` and

    L = W diag(Z0, Z1) W^{-1},    W = [[I, K'], [K, I]],

with ``Z0 = A0 + B K`` and ``Z1 = A1 + C K'``.  In the J-self-adjoint case
``K' = K^H`` and a rescaled ``W`` makes the diagonal blocks Hermitian.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from kreinpert.errors import (
    AssertionFailure,
    NotContractive,
    NotJSymmetric,
    SimilarityResidual,
    SingularW,
)
from kreinpert.linalg import (
    as_cmatrix,
    eigvals,
    eigvalsh,
    hermitian_defect,
    match_spectra,
    psd_inv_sqrt,
    psd_sqrt,
    singular_values,
    spectral_norm,
)
from kreinpert.riccati import BlockOperator, solve_dual, solve_fixed_point

SINGULAR_W_TOL = 1e-10
RECONSTRUCTION_RTOL = 1e-9
ENCLOSURE_RTOL = 1e-8


@dataclass(frozen=True)
class Diagonalization:
    K: np.ndarray
    Kp: np.ndarray
    W: np.ndarray
    W_inv: np.ndarray
    Z0: np.ndarray
    Z1: np.ndarray
    Q0: np.ndarray
    Q1: np.ndarray
    theta0: np.ndarray
    theta1: np.ndarray
    reconstruction_residual: float = 0.0
    enclosure_r: float = 0.0
    enclosure_excess: float = 0.0


@dataclass(frozen=True)
class SelfAdjointForm:
    T: np.ndarray
    T_inv: np.ndarray
    Lambda0: np.ndarray
    Lambda1: np.ndarray
    gamma: float
    reconstruction_residual: float = 0.0
    hermitian_defect: float = 0.0


def _pair(k, kp):
    k = as_cmatrix(k, "K")
    kp = as_cmatrix(kp, "Kp")
    if kp.shape != (k.shape[1], k.shape[0]):
        raise ValueError(f"Kp must have shape {(k.shape[1], k.shape[0])}, got {kp.shape}")
    return k, kp


def _inverse_of_gap(m, name):
    smin = singular_values(m)[-1]
    if smin <= SINGULAR_W_TOL:
        raise SingularW(f"{name} is singular (smallest singular value {smin:.3e})")
    return np.linalg.inv(m)


def build_w(k, kp) -> tuple[np.ndarray, np.ndarray]:
    """``W = [[I, K'], [K, I]]`` and its inverse from the closed block formula."""
    k, kp = _pair(k, kp)
    n1, n0 = k.shape
    i0 = np.eye(n0, dtype=np.complex128)
    i1 = np.eye(n1, dtype=np.complex128)
    m0 = _inverse_of_gap(i0 - kp @ k, "I - K'K")
    m1 = _inverse_of_gap(i1 - k @ kp, "I - KK'")
    w = np.block([[i0, kp], [k, i1]])
    w_inv = np.block([[m0, -m0 @ kp], [-m1 @ k, m1]])
    direct = np.linalg.inv(w)
    gap = spectral_norm(w_inv - direct)
    if gap > 1e-8 * max(1.0, spectral_norm(direct)) ** 2:
        raise SimilarityResidual(f"closed-form W^-1 differs from direct inverse by {gap:.3e}")
    return w, w_inv


def oblique_projections(k, kp) -> tuple[np.ndarray, np.ndarray]:
    """Projections onto ``G(K)`` along ``G(K')`` and onto ``G(K')`` along ``G(K)``."""
    k, kp = _pair(k, kp)
    n1, n0 = k.shape
    i0 = np.eye(n0, dtype=np.complex128)
    i1 = np.eye(n1, dtype=np.complex128)
    m0 = _inverse_of_gap(i0 - kp @ k, "I - K'K")
    m1 = _inverse_of_gap(i1 - k @ kp, "I - KK'")
    q0 = np.vstack([i0, k]) @ m0 @ np.hstack([i0, -kp])
    q1 = np.vstack([kp, i1]) @ m1 @ np.hstack([-k, i1])
    return q0, q1


def _pad(values, n):
    out = np.zeros(n)
    out[: len(values)] = values
    return out


def operator_angle(k) -> np.ndarray:
    """Angles of ``G(K)`` relative to the first component: ``arctan`` of the
    singular values of ``K``.

    ``K`` is ``n1 x n0``; the result has ``n0`` entries in descending order,
    those beyond ``min(n0, n1)`` being the structural zeros.
    """
    k = as_cmatrix(k, "K")
    return _pad(np.arctan(singular_values(k)), k.shape[1])


def operator_angle_direct(k) -> np.ndarray:
    """Same angles from ``arcsin sqrt(I - P_M P_N |_M)``.

    ``P_M`` projects onto the first component and ``P_N`` onto ``G(K)``;
    the latter comes from a QR factorization of ``[I; K]``.  With the
    orthonormal basis ``Q = [Q_top; Q_bot]`` the compression
    ``I - Q_top Q_top^H`` is unitarily similar to ``Q_bot^H Q_bot``, so the
    sines are the singular values of ``Q_bot``.
    """
    k = as_cmatrix(k, "K")
    n1, n0 = k.shape
    q, _ = np.linalg.qr(np.vstack([np.eye(n0, dtype=np.complex128), k]))
    sines = np.clip(singular_values(q[n0:, :]), 0.0, 1.0)
    return _pad(np.arcsin(sines), n0)


def enclosure_radius(norm_b: float, norm_c: float, delta: float) -> float:
    """``r = ||B|| ||C|| / (delta/2 + sqrt(delta^2/4 - ||B|| ||C||))``."""
    bc = norm_b * norm_c
    return bc / (0.5 * delta + math.sqrt(max(0.25 * delta * delta - bc, 0.0)))


def _max_distance(points, targets):
    points = np.asarray(points, dtype=np.complex128)
    targets = np.asarray(targets, dtype=np.complex128)
    return float(np.max(np.min(np.abs(points[:, None] - targets[None, :]), axis=1)))


def block_diagonalize(op: BlockOperator, delta: float, tol: float | None = None) -> Diagonalization:
    """Solve both Riccati equations and split ``L`` along the two graphs."""
    sol = solve_fixed_point(op, delta, tol)
    dual = solve_dual(op, delta, tol, check_adjoint=False)
    k, kp = sol.K, dual.K
    if not sol.norm * dual.norm < 1.0:
        raise AssertionFailure(
            "kk_product", f"||K|| ||K'|| = {sol.norm * dual.norm:.6g} is not below 1",
            {"norm_K": sol.norm, "norm_Kp": dual.norm},
        )
    w, w_inv = build_w(k, kp)
    q0, q1 = oblique_projections(k, kp)
    z0 = op.A0 + op.B @ k
    z1 = op.A1 + op.C @ kp

    lmat = op.L
    lnorm = spectral_norm(lmat)
    zero01 = np.zeros((op.n0, op.n1), dtype=np.complex128)
    z = np.block([[z0, zero01], [zero01.T, z1]])
    recon = spectral_norm(lmat - w @ z @ w_inv)
    if recon > RECONSTRUCTION_RTOL * lnorm + 1e-14:
        raise SimilarityResidual(f"||L - W Z W^-1|| = {recon:.3e} (||L|| = {lnorm:.3e})")

    r = enclosure_radius(spectral_norm(op.B), spectral_norm(op.C), delta)
    excess = max(
        _max_distance(eigvals(z0), eigvalsh(op.A0)) - r,
        _max_distance(eigvals(z1), eigvalsh(op.A1)) - r,
    )
    if excess > ENCLOSURE_RTOL * max(1.0, lnorm):
        raise AssertionFailure(
            "enclosure", f"spectrum of Z leaves the r-neighbourhood by {excess:.3e}",
            {"r": r, "excess": excess},
        )
    return Diagonalization(
        k, kp, w, w_inv, z0, z1, q0, q1,
        operator_angle(k), operator_angle(kp), recon, r, excess,
    )


def selfadjoint_form(op: BlockOperator, k) -> SelfAdjointForm:
    """Similarity ``L = T diag(Lambda0, Lambda1) T^{-1}`` with Hermitian blocks."""
    if not op.is_j_selfadjoint():
        raise NotJSymmetric(f"C + B^H has norm {op.j_defect():.3e}")
    k = as_cmatrix(k, "K")
    nk = spectral_norm(k)
    if not nk < 1.0:
        raise NotContractive(f"||K|| = {nk:.6g} is not below 1")
    kh = k.conj().T
    i0 = np.eye(op.n0, dtype=np.complex128)
    i1 = np.eye(op.n1, dtype=np.complex128)
    p0 = i0 - kh @ k
    p1 = i1 - k @ kh
    s0, s0i = psd_sqrt(p0), psd_inv_sqrt(p0)
    s1, s1i = psd_sqrt(p1), psd_inv_sqrt(p1)

    t = np.block([[s0i, kh @ s1i], [k @ s0i, s1i]])
    t_inv = np.block([[s0i, -s0i @ kh], [-s1i @ k, s1i]])
    lam0 = s0 @ (op.A0 + op.B @ k) @ s0i
    lam1 = s1 @ (op.A1 - op.B.conj().T @ kh) @ s1i

    lmat = op.L
    lnorm = spectral_norm(lmat)
    zero01 = np.zeros((op.n0, op.n1), dtype=np.complex128)
    lam = np.block([[lam0, zero01], [zero01.T, lam1]])
    recon = spectral_norm(lmat - t @ lam @ t_inv)
    hdef = max(hermitian_defect(lam0), hermitian_defect(lam1))
    if hdef > RECONSTRUCTION_RTOL * max(1.0, lnorm):
        raise AssertionFailure(
            "lambda_hermitian", f"Lambda blocks are not Hermitian (defect {hdef:.3e})",
            {"defect": hdef},
        )
    tol = ENCLOSURE_RTOL * (1.0 + lnorm)
    for name, lam_j, z_j in (("Lambda0", lam0, op.A0 + op.B @ k),
                             ("Lambda1", lam1, op.A1 - op.B.conj().T @ kh)):
        ok, worst = match_spectra(eigvalsh(0.5 * (lam_j + lam_j.conj().T)), eigvals(z_j), tol)
        if not ok:
            raise AssertionFailure(
                "lambda_spectrum", f"spec({name}) differs from spec(Z) by {worst:.3e}",
                {"worst": worst},
            )
    gamma = (1.0 - nk * nk) / (1.0 + nk * nk)
    return SelfAdjointForm(t, t_inv, lam0, lam1, gamma, recon, hdef)


def commutation_identities(op: BlockOperator, k, kp) -> tuple[float, float]:
    """Residuals of ``(I-K'K)(A0+BK) = (A0-K'C)(I-K'K)`` and
    ``(I-KK')(A1+CK') = (A1-KB)(I-KK')``."""
    k, kp = _pair(k, kp)
    g0 = np.eye(op.n0) - kp @ k
    g1 = np.eye(op.n1) - k @ kp
    r0 = spectral_norm(g0 @ (op.A0 + op.B @ k) - (op.A0 - kp @ op.C) @ g0)
    r1 = spectral_norm(g1 @ (op.A1 + op.C @ kp) - (op.A1 - k @ op.B) @ g1)
    return r0, r1


def commutation_identities_j(op: BlockOperator, k) -> tuple[float, float]:
    """J-case identities with ``K' = K^H`` written through ``B`` only."""
    k = as_cmatrix(k, "K")
    kh = k.conj().T
    bh = op.B.conj().T
    g0 = np.eye(op.n0) - kh @ k
    g1 = np.eye(op.n1) - k @ kh
    r0 = spectral_norm(g0 @ (op.A0 + op.B @ k) - (op.A0 + kh @ bh) @ g0)
    r1 = spectral_norm(g1 @ (op.A1 - bh @ kh) - (op.A1 - k @ op.B) @ g1)
    return r0, r1
