"""Krein-space structure and the end-to-end reality/angle pipeline.

For ``J = diag(I, -I)`` and an off-diagonal ``V`` with ``V^H = J V J``
(that is ``C = -B^H``) the operator ``L = A + V`` has real spectrum and is
similar to a self-adjoint operator once ``||V|| < delta/2``.  The pipeline
in :func:`verify_tpi` checks every quantitative consequence of that
statement on a concrete matrix.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from kreinpert.decomp import operator_angle, selfadjoint_form
from kreinpert.errors import (
    AssertionFailure,
    ContourConflict,
    NoConvergence,
    NotJSymmetric,
    RankDeficient,
)
from kreinpert.linalg import (
    as_cmatrix,
    default_tol,
    eigvalsh,
    fro_norm,
    general_eig,
    psd_inv_sqrt,
    singular_values,
    spectral_norm,
)
from kreinpert.riccati import BlockOperator, solve_fixed_point
from kreinpert.sylvester import GENERIC, guarantee

REALITY_RTOL = 1e-8
ENCLOSURE_RTOL = 1e-8
ANGLE_SLACK = 1e-8


@dataclass(frozen=True)
class Involution:
    """``J = diag(I_{n0}, -I_{n1})``."""

    n0: int
    n1: int

    def __post_init__(self):
        if self.n0 < 0 or self.n1 < 0:
            raise ValueError("block sizes must be non-negative")

    @property
    def J(self) -> np.ndarray:
        return np.diag(np.concatenate([np.ones(self.n0), -np.ones(self.n1)])).astype(np.complex128)

    @property
    def signature(self) -> np.ndarray:
        return np.concatenate([np.ones(self.n0), -np.ones(self.n1)])


@dataclass(frozen=True)
class JCheck:
    ok: bool
    defect: float
    offdiag_defect: float


@dataclass(frozen=True)
class GramReport:
    gram: np.ndarray
    verdict: str
    gamma: float
    pencil_eigenvalues: np.ndarray


@dataclass(frozen=True)
class RealityVerdict:
    spectrum_real: bool
    max_imag: float
    diagonalizable: bool
    condition: float
    min_gap: float
    eigenvalues: np.ndarray


@dataclass(frozen=True)
class KreinReport:
    disposition: str
    d: float
    delta: float
    v_norm: float
    hypothesis_ok: bool
    spectrum_real: bool
    max_imag: float
    enclosure_r: float
    theta_bound: float
    theta0_max: float
    theta1_max: float
    gamma: float
    diagonalizable: bool
    condition: float
    enclosure_excess: float = math.nan
    eigenvalues: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.complex128))
    failures: tuple = ()

    @property
    def passed(self) -> bool:
        return not self.failures


def involution_for(op: BlockOperator) -> Involution:
    return Involution(op.n0, op.n1)


def check_j_selfadjoint(v, j: Involution, tol: float = 1e-12) -> JCheck:
    """``||V^H - J V J||`` and the anticommutation defect ``||V J + J V||``."""
    v = as_cmatrix(v, "V")
    if v.shape != (j.n0 + j.n1,) * 2:
        raise ValueError(f"V must be {(j.n0 + j.n1,) * 2}, got {v.shape}")
    s = j.signature
    jvj = s[:, None] * v * s[None, :]
    defect = spectral_norm(v.conj().T - jvj)
    offdiag = spectral_norm(v * s[None, :] + s[:, None] * v)
    return JCheck(defect <= tol * max(1.0, spectral_norm(v)), defect, offdiag)


def krein_gram(j: Involution, basis, tol: float = 1e-12) -> GramReport:
    """Gram matrix ``G_ik = [b_k, b_i] = b_i^H J b_k`` of the basis columns.

    The verdict comes from the pencil ``(G, E)`` with ``E`` the Euclidean
    Gram matrix; ``gamma`` is the smallest ``|[x,x]| / ||x||^2`` over the
    span when it is definite and 0 otherwise.
    """
    basis = as_cmatrix(basis, "basis")
    sv = singular_values(basis)
    if sv.size == 0 or sv[-1] <= 1e-12 * max(sv[0], 1e-300):
        raise RankDeficient("basis columns are linearly dependent")
    s = j.signature
    gram = basis.conj().T @ (s[:, None] * basis)
    euclid = basis.conj().T @ basis
    root = psd_inv_sqrt(euclid)
    pencil = eigvalsh(root @ gram @ root)
    if pencil[0] > tol:
        verdict, gamma = "positive", float(pencil[0])
    elif pencil[-1] < -tol:
        verdict, gamma = "negative", float(-pencil[-1])
    else:
        verdict, gamma = "indefinite", 0.0
    return GramReport(gram, verdict, gamma, pencil)


def cross_gram(j: Involution, basis_x, basis_y) -> np.ndarray:
    """``[x_k, y_i] = y_i^H J x_k`` for all pairs of columns."""
    s = j.signature
    return as_cmatrix(basis_y).conj().T @ (s[:, None] * as_cmatrix(basis_x))


def graph_basis(k) -> np.ndarray:
    """Columns ``[I; K]`` spanning ``G(K)``."""
    k = as_cmatrix(k, "K")
    return np.vstack([np.eye(k.shape[1], dtype=np.complex128), k])


def dual_graph_basis(kp) -> np.ndarray:
    """Columns ``[K'; I]`` spanning ``G(K')``."""
    kp = as_cmatrix(kp, "Kp")
    return np.vstack([kp, np.eye(kp.shape[1], dtype=np.complex128)])


def _contour_circles(points, rho):
    circles = [[complex(p)] for p in points]
    while True:
        geom = []
        for pts in circles:
            arr = np.asarray(pts)
            c = complex(0.5 * (arr.real.min() + arr.real.max()),
                        0.5 * (arr.imag.min() + arr.imag.max()))
            geom.append((c, float(np.max(np.abs(arr - c))) + rho))
        merged = False
        for a in range(len(circles)):
            for b in range(a + 1, len(circles)):
                if abs(geom[a][0] - geom[b][0]) <= geom[a][1] + geom[b][1]:
                    circles[a] = circles[a] + circles[b]
                    del circles[b]
                    merged = True
                    break
            if merged:
                break
        if not merged:
            return geom


def _resolvent_sum(lmat, center, radius, thetas):
    n = lmat.shape[0]
    phase = np.exp(1j * thetas)
    z = center + radius * phase
    shifted = z[:, None, None] * np.eye(n)[None, :, :] - lmat[None, :, :]
    res = np.linalg.inv(shifted)
    return np.tensordot(phase, res, axes=(0, 0)) * radius


def riesz_projection(lmat, enclose, rho: float, exclude=None, nodes: int = 128,
                     max_nodes: int = 1 << 15, tol: float | None = None) -> np.ndarray:
    """Spectral projection ``(2 pi i)^{-1} \\oint (z - L)^{-1} dz``.

    The contour is a union of circles of margin ``rho`` around the points
    ``enclose`` (overlapping circles are merged).  Points of ``exclude``
    must stay outside every circle.  Trapezoidal rule with node doubling.
    """
    lmat = as_cmatrix(lmat, "L")
    tol = default_tol() if tol is None else tol
    if not rho > 0.0:
        raise ValueError("rho must be positive")
    circles = _contour_circles(np.asarray(enclose, dtype=np.complex128).ravel(), rho)
    if exclude is not None:
        ex = np.asarray(exclude, dtype=np.complex128).ravel()
        for c, r in circles:
            if ex.size and np.min(np.abs(ex - c)) <= r:
                raise ContourConflict("an excluded eigenvalue lies inside the contour")

    def total(n, offset):
        th = 2.0 * np.pi * (np.arange(n) + offset) / n
        return sum(_resolvent_sum(lmat, c, r, th) for c, r in circles)

    n = int(nodes)
    acc = total(n, 0.0)
    proj = acc / n
    while True:
        if 2 * n > max_nodes:
            raise NoConvergence(f"Riesz quadrature unresolved at {n} nodes")
        acc = acc + total(n, 0.5)
        n *= 2
        new = acc / n
        change = fro_norm(new - proj)
        proj = new
        if change <= tol * max(1.0, fro_norm(proj)):
            return proj


def reality_and_diagonalizability(lmat) -> RealityVerdict:
    """Reality of the spectrum and an eigenvector-conditioning verdict."""
    lmat = as_cmatrix(lmat, "L")
    ge = general_eig(lmat)
    lam = ge.eigenvalues
    max_imag = float(np.max(np.abs(lam.imag), initial=0.0))
    real = max_imag <= REALITY_RTOL * max(1.0, spectral_norm(lmat))
    if lam.size > 1:
        diffs = np.abs(lam[:, None] - lam[None, :])
        min_gap = float(np.min(diffs[~np.eye(lam.size, dtype=bool)]))
    else:
        min_gap = math.inf
    return RealityVerdict(real, max_imag, ge.diagonalizable, ge.condition, min_gap, lam)


def tpi_angle_bound(v_norm: float, delta: float) -> float:
    """``tanh(artanh(2 ||V|| / delta) / 2)``, finite only below ``delta/2``."""
    ratio = 2.0 * v_norm / delta
    if ratio >= 1.0:
        return math.inf
    return math.tanh(0.5 * math.atanh(ratio))


def verify_tpi(op: BlockOperator, delta: float | None = None, disposition: str | None = None,
               angle_slack: float = ANGLE_SLACK, tol: float | None = None,
               raise_on_failure: bool = True) -> KreinReport:
    """Run every check implied by the off-diagonal J-self-adjoint theory.

    ``delta`` defaults to the disposition value (``d`` or ``2d/pi``);
    passing ``disposition='generic'`` forces the weaker ``2d/pi``.  Checks
    are asserted only when ``||V|| < delta/2``; outside that regime the
    report is diagnostic.  Broken guarantees raise :class:`AssertionFailure`
    unless ``raise_on_failure`` is false, in which case they are listed in
    ``failures``.
    """
    if not op.is_j_selfadjoint():
        raise NotJSymmetric(f"C + B^H has norm {op.j_defect():.3e}")
    g = guarantee(op.A0, op.A1)
    kind = g.disposition if disposition is None else disposition
    if delta is None:
        delta = 2.0 * g.d / math.pi if kind == GENERIC else g.d
    v_norm = spectral_norm(op.B)
    hyp = v_norm < 0.5 * delta

    lmat = op.L
    lnorm = spectral_norm(lmat)
    rv = reality_and_diagonalizability(lmat)
    lam = rv.eigenvalues
    bound = tpi_angle_bound(v_norm, delta)
    r = v_norm * bound if hyp else math.nan
    failures = []
    theta0 = theta1 = gamma = excess = math.nan

    if hyp:
        sol = solve_fixed_point(op, delta, tol)
        k = sol.K
        form = selfadjoint_form(op, k)
        gamma = form.gamma
        theta0 = float(operator_angle(k)[0])
        theta1 = float(operator_angle(k.conj().T)[0])

        if rv.max_imag > REALITY_RTOL * max(1.0, lnorm):
            failures.append(("spectrum_real", f"max |Im lambda| = {rv.max_imag:.3e}"))

        s0 = eigvalsh(op.A0)
        s1 = eigvalsh(op.A1)
        d0 = np.min(np.abs(lam[:, None] - s0[None, :]), axis=1)
        d1 = np.min(np.abs(lam[:, None] - s1[None, :]), axis=1)
        slack = ENCLOSURE_RTOL * max(1.0, lnorm)
        if np.any(np.abs(d0 - d1) <= slack):
            failures.append(("ambiguous_component", "an eigenvalue is equidistant from both parts"))
        nearest = np.minimum(d0, d1)
        excess = float(np.max(nearest - r))
        if excess > slack:
            failures.append(("enclosure", f"eigenvalue outside the r-neighbourhood by {excess:.3e}"))
        if int(np.sum(d0 < d1)) != op.n0:
            failures.append(("component_count", f"{int(np.sum(d0 < d1))} eigenvalues near spec(A0), expected {op.n0}"))
        for name, th in (("theta0", theta0), ("theta1", theta1)):
            if math.tan(th) > bound + angle_slack:
                failures.append((name, f"tan {name} = {math.tan(th):.12g} exceeds {bound:.12g}"))

    report = KreinReport(
        kind, g.d, float(delta), v_norm, hyp, rv.spectrum_real, rv.max_imag,
        r, bound, theta0, theta1, gamma, rv.diagonalizable, rv.condition,
        excess, lam, tuple(name for name, _ in failures),
    )
    if failures and raise_on_failure:
        name, msg = failures[0]
        raise AssertionFailure(name, msg, {"report": report})
    return report
