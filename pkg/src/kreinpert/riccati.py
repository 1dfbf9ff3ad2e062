"""Operator Riccati equation ``K A0 - A1 K + K B K = C``.

The solver iterates ``K -> S^{-1}(C - K B K)`` from ``K = 0``, where
``S(X) = X A0 - A1 X``.  Under ``sqrt(||B|| ||C||) < delta/2`` with
``||S^{-1}|| <= 1/delta`` the map is a contraction on the ball of radius
``delta / (2 ||B||)`` and the limit obeys the a priori bound
:func:`norm_bound`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from kreinpert.errors import AssertionFailure, HypothesisViolated, NoConvergence, NonHermitian
from kreinpert.linalg import (
    as_cmatrix,
    default_tol,
    eigvalsh,
    hermitian_defect,
    is_hermitian,
    spectral_norm,
)
from kreinpert.sylvester import SylvesterOperator

BOUND_SLACK = 1e-9


@dataclass(frozen=True)
class BlockOperator:
    """``L = [[A0, B], [C, A1]]`` with Hermitian diagonal entries."""

    A0: np.ndarray
    A1: np.ndarray
    B: np.ndarray
    C: np.ndarray

    def __post_init__(self):
        a0 = as_cmatrix(self.A0, "A0")
        a1 = as_cmatrix(self.A1, "A1")
        b = as_cmatrix(self.B, "B")
        c = as_cmatrix(self.C, "C")
        n0, n1 = a0.shape[0], a1.shape[0]
        if a0.shape != (n0, n0) or a1.shape != (n1, n1):
            raise ValueError("A0 and A1 must be square")
        if b.shape != (n0, n1):
            raise ValueError(f"B must be {n0}x{n1}, got {b.shape}")
        if c.shape != (n1, n0):
            raise ValueError(f"C must be {n1}x{n0}, got {c.shape}")
        for name, a in (("A0", a0), ("A1", a1)):
            if not is_hermitian(a):
                raise NonHermitian(f"{name} is not Hermitian (defect {hermitian_defect(a):.3e})")
        object.__setattr__(self, "A0", 0.5 * (a0 + a0.conj().T))
        object.__setattr__(self, "A1", 0.5 * (a1 + a1.conj().T))
        object.__setattr__(self, "B", b)
        object.__setattr__(self, "C", c)

    @property
    def n0(self) -> int:
        return self.A0.shape[0]

    @property
    def n1(self) -> int:
        return self.A1.shape[0]

    @property
    def L(self) -> np.ndarray:
        return np.block([[self.A0, self.B], [self.C, self.A1]])

    @property
    def A(self) -> np.ndarray:
        z01 = np.zeros((self.n0, self.n1), dtype=np.complex128)
        return np.block([[self.A0, z01], [z01.T, self.A1]])

    @property
    def V(self) -> np.ndarray:
        return np.block([
            [np.zeros((self.n0, self.n0), dtype=np.complex128), self.B],
            [self.C, np.zeros((self.n1, self.n1), dtype=np.complex128)],
        ])

    def j_defect(self) -> float:
        return spectral_norm(self.C + self.B.conj().T)

    def is_j_selfadjoint(self, tol: float = 1e-12) -> bool:
        return self.j_defect() <= tol * max(1.0, spectral_norm(self.B))

    def swapped(self) -> "BlockOperator":
        """The operator whose Riccati equation is the dual one."""
        return BlockOperator(self.A1, self.A0, self.C, self.B)

    @classmethod
    def j_selfadjoint(cls, a0, a1, b) -> "BlockOperator":
        b = as_cmatrix(b, "B")
        return cls(a0, a1, b, -b.conj().T)


@dataclass(frozen=True)
class RiccatiSolution:
    K: np.ndarray
    iterations: int
    residual: float
    norm: float
    ball_radius: float
    bound_estl: float
    delta: float = 0.0
    step_norms: tuple = field(default=(), repr=False)
    adjoint_defect: float | None = None


def riccati_residual(k, op: BlockOperator) -> float:
    """Spectral norm of ``K A0 - A1 K + K B K - C``."""
    k = np.asarray(k, dtype=np.complex128)
    return spectral_norm(k @ op.A0 - op.A1 @ k + k @ op.B @ k - op.C)


def _check_hypothesis(nb, nc, delta):
    if not delta > 0.0:
        raise ValueError("delta must be positive")
    if math.sqrt(nb * nc) >= 0.5 * delta:
        raise HypothesisViolated(
            f"sqrt(||B|| ||C||) = {math.sqrt(nb * nc):.6g} is not below delta/2 = {0.5 * delta:.6g}"
        )


def norm_bound(norm_b: float, norm_c: float, delta: float) -> float:
    """A priori bound ``||C|| / (delta/2 + sqrt(delta^2/4 - ||B|| ||C||))``."""
    _check_hypothesis(norm_b, norm_c, delta)
    return norm_c / (0.5 * delta + math.sqrt(0.25 * delta * delta - norm_b * norm_c))


def norm_bound_hyperbolic(norm_b: float, norm_c: float, delta: float) -> float:
    """Same bound written as ``sqrt(||C||/||B||) tanh(artanh(2 sqrt(||B|| ||C||)/delta)/2)``."""
    _check_hypothesis(norm_b, norm_c, delta)
    if norm_b == 0.0:
        return norm_c / delta
    if norm_c == 0.0:
        return 0.0
    return math.sqrt(norm_c / norm_b) * math.tanh(
        0.5 * math.atanh(2.0 * math.sqrt(norm_b * norm_c) / delta)
    )


def contraction_window(norm_b: float, norm_c: float, delta: float) -> tuple[float, float]:
    """Radii ``[lower, upper)`` of balls on which the fixed-point map contracts."""
    lower = norm_bound(norm_b, norm_c, delta)
    if not norm_b > 0.0:
        raise HypothesisViolated("the window needs ||B|| > 0")
    return lower, delta / (2.0 * norm_b)


@dataclass(frozen=True)
class ScalarRoots:
    """Roots of ``b k^2 - d k + c = 0``; iterates as ``(k1, k2)``."""

    k1: float
    k2: float
    boundary: bool = False

    def __iter__(self):
        return iter((self.k1, self.k2))


def scalar_closed_form(d: float, b: float, c: float) -> ScalarRoots:
    """Both solutions of the scalar equation ``k(-d/2) - (d/2)k + b k^2 = c``.

    Only ``k1`` lies in the contraction ball ``|k| < d/(2b)``.
    """
    if not d > 0.0 or b < 0.0 or c < 0.0:
        raise ValueError("need d > 0 and b, c >= 0")
    disc = 0.25 * d * d - b * c
    scale = 0.25 * d * d
    if disc < -1e-15 * scale:
        raise HypothesisViolated(f"sqrt(bc) = {math.sqrt(b * c):.6g} exceeds d/2 = {0.5 * d:.6g}")
    if abs(disc) <= 1e-15 * scale:
        root = 2.0 * c / d
        return ScalarRoots(root, root, True)
    s = math.sqrt(disc)
    k1 = c / (0.5 * d + s)
    k2 = (0.5 * d + s) / b if b > 0.0 else math.inf
    return ScalarRoots(k1, k2, False)


def _spectral_gap(op):
    s0 = eigvalsh(op.A0)
    s1 = eigvalsh(op.A1)
    return float(np.min(np.abs(s0[:, None] - s1[None, :])))


def solve_fixed_point(op: BlockOperator, delta: float, tol: float | None = None,
                      max_iter: int = 10_000, k0=None) -> RiccatiSolution:
    """Contraction iteration for the distinguished small solution."""
    tol = default_tol() if tol is None else tol
    nb = spectral_norm(op.B)
    nc = spectral_norm(op.C)
    _check_hypothesis(nb, nc, delta)
    gap = _spectral_gap(op)
    if delta > gap * (1.0 + 1e-10):
        raise HypothesisViolated(f"delta = {delta:.6g} exceeds the spectral distance {gap:.6g}")

    sylv = SylvesterOperator(op.A0, op.A1)
    ball = delta / (2.0 * nb) if nb > 0.0 else math.inf
    bound = norm_bound(nb, nc, delta)
    res_scale = max(1.0, spectral_norm(op.A0) + spectral_norm(op.A1) + nb + nc)

    k = np.zeros((op.n1, op.n0), dtype=np.complex128) if k0 is None else as_cmatrix(k0, "k0").copy()
    steps = []
    for it in range(1, max_iter + 1):
        k_new = sylv.solve(op.C - k @ op.B @ k)
        step = spectral_norm(k_new - k)
        steps.append(step)
        k_scale = max(1.0, spectral_norm(k))
        k = k_new
        if step <= tol * k_scale:
            res = riccati_residual(k, op)
            if res <= 10.0 * tol * res_scale:
                break
    else:
        raise NoConvergence(f"Riccati iteration did not converge in {max_iter} steps")

    norm = spectral_norm(k)
    if norm > bound + BOUND_SLACK * max(1.0, bound):
        raise AssertionFailure(
            "estl_bound", f"||K|| = {norm:.12g} exceeds the a priori bound {bound:.12g}",
            {"norm": norm, "bound": bound},
        )
    if not norm < ball:
        raise AssertionFailure(
            "ball", f"||K|| = {norm:.12g} is not inside the ball of radius {ball:.12g}",
            {"norm": norm, "ball_radius": ball},
        )
    return RiccatiSolution(k, it, res, norm, ball, bound, float(delta), tuple(steps))


def solve_dual(op: BlockOperator, delta: float, tol: float | None = None,
               max_iter: int = 10_000, k0=None, check_adjoint: bool = True) -> RiccatiSolution:
    """Solve ``K' A1 - A0 K' + K' C K' = B``.

    For J-self-adjoint input the result is compared with ``K^H`` of the
    primal solution and the defect is stored in ``adjoint_defect``.
    """
    sol = solve_fixed_point(op.swapped(), delta, tol, max_iter, k0)
    if not (check_adjoint and op.is_j_selfadjoint()):
        return sol
    primal = solve_fixed_point(op, delta, tol, max_iter)
    defect = spectral_norm(sol.K - primal.K.conj().T)
    if defect > BOUND_SLACK * max(1.0, primal.norm):
        raise AssertionFailure(
            "dual_adjoint", f"K' differs from K^H by {defect:.3e}", {"defect": defect},
        )
    return RiccatiSolution(
        sol.K, sol.iterations, sol.residual, sol.norm, sol.ball_radius,
        sol.bound_estl, sol.delta, sol.step_norms, defect,
    )
