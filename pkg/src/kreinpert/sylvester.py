"""Sylvester equation ``X A0 - A1 X = Y``.

Three independent routes are provided:

* :func:`solve_kron` - direct solve of the vectorized ``n0*n1`` system,
* :func:`solve_contour` - trapezoidal rule for the resolvent contour integral,
* :func:`solve_semigroup` - Gauss-Legendre panels for the exponential integral,

plus the disposition-based bound ``||S^{-1}|| <= 1/delta`` for Hermitian
entries (:func:`guarantee`).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from kreinpert.errors import (
    ContourConflict,
    HypothesisViolated,
    NoConvergence,
    SingularOperator,
    TouchingSpectra,
)
from kreinpert.linalg import (
    as_cmatrix,
    default_tol,
    eigvals,
    eigvalsh,
    fro_norm,
    is_hermitian,
    matrix_exp,
    spectral_norm,
)

SHARED_EIG_RTOL = 1e-10

GENERIC = "generic"
SUBORDINATED = "subordinated"
ANNULAR_GAP = "annular_gap"


@dataclass(frozen=True)
class SylvesterProblem:
    A0: np.ndarray
    A1: np.ndarray
    Y: np.ndarray

    def __post_init__(self):
        a0 = as_cmatrix(self.A0, "A0")
        a1 = as_cmatrix(self.A1, "A1")
        y = as_cmatrix(self.Y, "Y")
        if a0.shape[0] != a0.shape[1] or a1.shape[0] != a1.shape[1]:
            raise ValueError("A0 and A1 must be square")
        if y.shape != (a1.shape[0], a0.shape[0]):
            raise ValueError(
                f"Y must have shape {(a1.shape[0], a0.shape[0])}, got {y.shape}"
            )
        object.__setattr__(self, "A0", a0)
        object.__setattr__(self, "A1", a1)
        object.__setattr__(self, "Y", y)


@dataclass(frozen=True)
class SylvesterSolution:
    X: np.ndarray
    method: str
    residual: float
    quadrature_nodes: int = 0
    norm_bound: float | None = None
    bound_ok: bool | None = None
    guaranteed: bool | None = None


@dataclass(frozen=True)
class DispositionGuarantee:
    disposition: str
    d: float
    delta: float


def sylvester_residual(x, a0, a1, y) -> float:
    return spectral_norm(x @ a0 - a1 @ x - y)


def sylvester_matrix(a0, a1) -> np.ndarray:
    """Matrix of ``X -> X A0 - A1 X`` acting on column-major ``vec(X)``."""
    a0 = as_cmatrix(a0, "A0")
    a1 = as_cmatrix(a1, "A1")
    n0, n1 = a0.shape[0], a1.shape[0]
    return np.kron(a0.T, np.eye(n1)) - np.kron(np.eye(n0), a1)


def spectrum(a) -> np.ndarray:
    """Eigenvalues, using the Hermitian solver when it applies."""
    if is_hermitian(a):
        return eigvalsh(a).astype(np.complex128)
    return eigvals(a)


def spectral_distance(s0, s1) -> float:
    s0 = np.asarray(s0, dtype=np.complex128).ravel()
    s1 = np.asarray(s1, dtype=np.complex128).ravel()
    if s0.size == 0 or s1.size == 0:
        return float("inf")
    return float(np.min(np.abs(s0[:, None] - s1[None, :])))


class SylvesterOperator:
    """LU-factorized Sylvester operator, reusable across right-hand sides."""

    def __init__(self, a0, a1):
        self.a0 = as_cmatrix(a0, "A0")
        self.a1 = as_cmatrix(a1, "A1")
        self.n0 = self.a0.shape[0]
        self.n1 = self.a1.shape[0]
        self.d = spectral_distance(spectrum(self.a0), spectrum(self.a1))
        scale = 1.0 + spectral_norm(self.a0) + spectral_norm(self.a1)
        if self.d <= SHARED_EIG_RTOL * scale:
            raise SingularOperator(
                f"spectra of A0 and A1 are {self.d:.3e} apart (shared eigenvalue)"
            )
        self._lu = scipy.linalg.lu_factor(sylvester_matrix(self.a0, self.a1))

    def apply(self, x):
        return x @ self.a0 - self.a1 @ x

    def solve(self, y):
        y = np.asarray(y, dtype=np.complex128)
        vec = scipy.linalg.lu_solve(self._lu, y.reshape(-1, order="F"))
        return vec.reshape((self.n1, self.n0), order="F")


def solve_kron(p: SylvesterProblem) -> SylvesterSolution:
    """Exact solve of the vectorized system (the brute-force oracle)."""
    op = SylvesterOperator(p.A0, p.A1)
    x = op.solve(p.Y)
    return SylvesterSolution(x, "kron", sylvester_residual(x, p.A0, p.A1, p.Y), 0)


def _separating_circle(inside, outside, d):
    re, im = inside.real, inside.imag
    center = complex(0.5 * (re.min() + re.max()), 0.5 * (im.min() + im.max()))
    radius = float(np.max(np.abs(inside - center))) + 0.5 * d
    clearance = float(np.min(np.abs(outside - center))) - radius
    return center, radius, clearance


def contour_circle(a0, a1):
    """Circle for the contour solver and the sign of its contribution.

    The preferred circle encloses spec(A1); if spec(A0) gets in the way,
    a circle around spec(A0) is used instead (the integral over it carries
    the opposite sign).  Raises :class:`ContourConflict` if neither works.
    """
    s0 = spectrum(a0)
    s1 = spectrum(a1)
    d = spectral_distance(s0, s1)
    for inside, outside, sign in ((s1, s0, -1.0), (s0, s1, 1.0)):
        center, radius, clearance = _separating_circle(inside, outside, d)
        if clearance >= 0.25 * d:
            return center, radius, sign, d
    raise ContourConflict("no single circle separates spec(A0) from spec(A1)")


def _circle_sum(a0, a1, y, center, radius, thetas):
    n0, n1 = a0.shape[0], a1.shape[0]
    phase = np.exp(1j * thetas)
    z = center + radius * phase
    m1 = a1[None, :, :] - z[:, None, None] * np.eye(n1)[None, :, :]
    m0t = a0.T[None, :, :] - z[:, None, None] * np.eye(n0)[None, :, :]
    left = np.linalg.solve(m1, np.broadcast_to(y, (len(z),) + y.shape))
    # (A1 - z)^{-1} Y (A0 - z)^{-1} = [ (A0 - z)^{-T} [(A1 - z)^{-1} Y]^T ]^T
    full = np.swapaxes(np.linalg.solve(m0t, np.swapaxes(left, 1, 2)), 1, 2)
    return np.tensordot(phase, full, axes=(0, 0))


def solve_contour(p: SylvesterProblem, nodes: int = 64, max_nodes: int = 4096,
                  tol: float | None = None) -> SylvesterSolution:
    """Trapezoidal evaluation of the resolvent integral on a circle.

    ``nodes`` is doubled (reusing earlier nodes) until two successive
    estimates agree to ``tol`` relative.
    """
    tol = default_tol() if tol is None else tol
    s0, s1 = spectrum(p.A0), spectrum(p.A1)
    scale = 1.0 + spectral_norm(p.A0) + spectral_norm(p.A1)
    if spectral_distance(s0, s1) <= SHARED_EIG_RTOL * scale:
        raise SingularOperator("spectra of A0 and A1 intersect")
    if fro_norm(p.Y) == 0.0:
        x = np.zeros_like(p.Y)
        return SylvesterSolution(x, "contour", 0.0, 0)
    center, radius, sign, _ = contour_circle(p.A0, p.A1)

    n = int(nodes)
    thetas = 2.0 * np.pi * np.arange(n) / n
    acc = _circle_sum(p.A0, p.A1, p.Y, center, radius, thetas)
    x = sign * radius * acc / n
    while True:
        if 2 * n > max_nodes:
            raise NoConvergence(f"contour quadrature unresolved at {n} nodes")
        odd = 2.0 * np.pi * (np.arange(n) + 0.5) / n
        acc = acc + _circle_sum(p.A0, p.A1, p.Y, center, radius, odd)
        n *= 2
        x_new = sign * radius * acc / n
        change = fro_norm(x_new - x)
        x = x_new
        if change <= tol * max(1.0, fro_norm(x)):
            break
    return SylvesterSolution(x, "contour", sylvester_residual(x, p.A0, p.A1, p.Y), n)


def _hermitian_part(a):
    return 0.5 * (a + a.conj().T)


def dissipativity_margins(a0, a1):
    """Largest real part of the numerical range of A0 and smallest of A1."""
    return float(eigvalsh(_hermitian_part(a0))[-1]), float(eigvalsh(_hermitian_part(a1))[0])


def _semigroup_sum(a0, a1, y, t_end, panels, nodes, weights):
    h = t_end / panels
    local = 0.5 * h * (1.0 + nodes)
    left = [matrix_exp(-a1 * tau) for tau in local]
    right = [matrix_exp(a0 * tau) for tau in local]
    step0 = matrix_exp(a0 * h)
    step1 = matrix_exp(-a1 * h)
    p0 = np.eye(a0.shape[0], dtype=np.complex128)
    p1 = np.eye(a1.shape[0], dtype=np.complex128)
    total = np.zeros_like(y)
    for _ in range(panels):
        core = p1 @ y @ p0
        for w, lft, rgt in zip(weights, left, right):
            total += w * (lft @ core @ rgt)
        p0 = p0 @ step0
        p1 = step1 @ p1
    return -0.5 * h * total


def solve_semigroup(p: SylvesterProblem, delta: float, tol: float | None = None,
                    order: int = 32, max_panels: int = 4096) -> SylvesterSolution:
    """``X = -int_0^inf exp(-A1 t) Y exp(A0 t) dt`` by composite Gauss-Legendre.

    Requires ``A0 + delta/2`` and ``-A1 + delta/2`` to be dissipative
    (numerical ranges checked through the Hermitian parts).  The result
    carries ``norm_bound = ||Y||/delta`` and whether it was met.
    ``guaranteed`` is true only for Hermitian entries.
    """
    tol = default_tol() if tol is None else tol
    if not delta > 0.0:
        raise ValueError("delta must be positive")
    hmax0, hmin1 = dissipativity_margins(p.A0, p.A1)
    slack = 1e-10 * (1.0 + spectral_norm(p.A0) + spectral_norm(p.A1))
    if hmax0 > -0.5 * delta + slack or hmin1 < 0.5 * delta - slack:
        raise HypothesisViolated(
            f"need Re W(A0) <= {-0.5 * delta:g} <= {0.5 * delta:g} <= Re W(A1); "
            f"got max Re W(A0) = {hmax0:.6g}, min Re W(A1) = {hmin1:.6g}"
        )
    hermitian = is_hermitian(p.A0) and is_hermitian(p.A1)
    ynorm = spectral_norm(p.Y)
    bound = ynorm / delta
    if ynorm == 0.0:
        x = np.zeros_like(p.Y)
        return SylvesterSolution(x, "semigroup", 0.0, 0, bound, True, hermitian)

    t_end = (2.0 / delta) * np.log((1.0 + ynorm) / tol)
    nodes, weights = np.polynomial.legendre.leggauss(order)
    rate = spectral_norm(p.A0) + spectral_norm(p.A1)
    panels = max(4, int(np.ceil(t_end * rate / 8.0)))
    x = _semigroup_sum(p.A0, p.A1, p.Y, t_end, panels, nodes, weights)
    while True:
        if 2 * panels > max_panels:
            raise NoConvergence(f"semigroup quadrature unresolved at {panels} panels")
        panels *= 2
        x_new = _semigroup_sum(p.A0, p.A1, p.Y, t_end, panels, nodes, weights)
        change = fro_norm(x_new - x)
        x = x_new
        if change <= tol * max(1.0, fro_norm(x)):
            break
    xnorm = spectral_norm(x)
    ok = xnorm <= bound * (1.0 + 1e-12) + 1e-14
    return SylvesterSolution(
        x, "semigroup", sylvester_residual(x, p.A0, p.A1, p.Y),
        panels * order, bound, ok, hermitian,
    )


def sylvester_eigenvalues(a0, a1) -> np.ndarray:
    """All pairwise differences ``lambda0_j - lambda1_i`` (n1*n0 values)."""
    s0 = spectrum(as_cmatrix(a0, "A0"))
    s1 = spectrum(as_cmatrix(a1, "A1"))
    return (s0[None, :] - s1[:, None]).reshape(-1)


def classify_disposition(s0, s1) -> str:
    """Mutual position of two real spectra: subordinated, gap, or generic."""
    s0 = np.sort(np.asarray(s0, dtype=float).ravel())
    s1 = np.sort(np.asarray(s1, dtype=float).ravel())
    if s0[-1] < s1[0] or s0[0] > s1[-1]:
        return SUBORDINATED
    s1_in_hull0 = np.any((s1 >= s0[0]) & (s1 <= s0[-1]))
    s0_in_hull1 = np.any((s0 >= s1[0]) & (s0 <= s1[-1]))
    if not s1_in_hull0 or not s0_in_hull1:
        return ANNULAR_GAP
    return GENERIC


def guarantee(a0, a1) -> DispositionGuarantee:
    """Distance ``d`` and the admissible ``delta`` with ``||S^{-1}|| <= 1/delta``.

    Accepts Hermitian matrices or 1-D arrays of their (real) spectra.
    ``delta = d`` for subordinated or gap dispositions, ``2d/pi`` otherwise.
    """
    s0 = _real_spectrum(a0, "A0")
    s1 = _real_spectrum(a1, "A1")
    d = float(np.min(np.abs(s0[:, None] - s1[None, :])))
    scale = 1.0 + max(np.max(np.abs(s0)), np.max(np.abs(s1)))
    if d <= SHARED_EIG_RTOL * scale:
        raise TouchingSpectra(f"spectral distance {d:.3e} is not positive")
    kind = classify_disposition(s0, s1)
    delta = 2.0 * d / np.pi if kind == GENERIC else d
    return DispositionGuarantee(kind, d, float(delta))


def _real_spectrum(a, name):
    arr = np.asarray(a)
    if arr.ndim == 1:
        if np.iscomplexobj(arr) and np.max(np.abs(arr.imag), initial=0.0) > 0.0:
            raise ValueError(f"{name} spectrum must be real")
        return np.asarray(arr.real, dtype=float)
    return eigvalsh(as_cmatrix(arr, name))
