"""Truncated harmonic oscillator with a PT-symmetric perturbation.

The unperturbed operator is diagonal in the Hermite-function basis with
eigenvalues ``n + 1/2``.  Ordering even states first splits it as
``diag(A0, A1)`` with spectra ``{1/2, 5/2, ...}`` and ``{3/2, 7/2, ...}``
at distance exactly 1, and parity becomes ``J = diag(I, -I)``.  A purely
imaginary odd potential ``i b(x)`` couples only the two parity blocks and
is J-self-adjoint.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from kreinpert.errors import HypothesisViolated, QuadratureUnstable
from kreinpert.krein import Involution, KreinReport, verify_tpi
from kreinpert.linalg import fro_norm
from kreinpert.riccati import BlockOperator
from kreinpert.sylvester import GENERIC

TRUNCATION_SLACK = 1e-6
QUAD_RTOL = 1e-13
MAX_QUAD_POINTS = 320


@dataclass(frozen=True)
class OscillatorModel:
    N: int
    A: np.ndarray
    parity_perm: np.ndarray
    J: Involution

    @property
    def n0(self) -> int:
        return self.J.n0

    @property
    def n1(self) -> int:
        return self.J.n1

    @property
    def A0(self) -> np.ndarray:
        return self.A[: self.n0, : self.n0]

    @property
    def A1(self) -> np.ndarray:
        return self.A[self.n0:, self.n0:]


def build_model(n: int) -> OscillatorModel:
    """Parity-ordered diagonal oscillator on ``h_0, ..., h_{n-1}``."""
    if n < 2:
        raise ValueError("N must be at least 2")
    perm = np.concatenate([np.arange(0, n, 2), np.arange(1, n, 2)])
    a = np.diag(perm + 0.5).astype(np.complex128)
    return OscillatorModel(n, a, perm, Involution(len(range(0, n, 2)), len(range(1, n, 2))))


@dataclass(frozen=True)
class PTPotential:
    """``V(x) = beta * (a(x) + i b(x))`` with ``a`` even and ``b`` odd.

    ``None`` stands for the zero function.
    """

    a: Optional[Callable] = None
    b: Optional[Callable] = None
    beta: float = 1.0

    def __post_init__(self):
        x = np.linspace(-6.0, 6.0, 121)
        for name, f, sign in (("a", self.a, 1.0), ("b", self.b, -1.0)):
            if f is None:
                continue
            fx, fm = np.asarray(f(x), dtype=float), np.asarray(f(-x), dtype=float)
            scale = max(1.0, float(np.max(np.abs(fx))))
            if np.max(np.abs(fm - sign * fx)) > 1e-12 * scale:
                kind = "even" if sign > 0 else "odd"
                raise ValueError(f"{name} must be {kind}")

    @property
    def off_diagonal(self) -> bool:
        return self.a is None

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        re = np.zeros_like(x) if self.a is None else np.asarray(self.a(x), dtype=float)
        im = np.zeros_like(x) if self.b is None else np.asarray(self.b(x), dtype=float)
        return self.beta * (re + 1j * im)


def xgauss(beta: float) -> PTPotential:
    """``i beta x exp(-x^2/2)``; ``sup |b| = beta / sqrt(e)``."""
    return PTPotential(None, lambda x: x * np.exp(-0.5 * x * x), beta)


def hermite_functions(n: int, x) -> np.ndarray:
    """Rows ``h_0(x), ..., h_{n-1}(x)`` by the normalized three-term recurrence."""
    return hermite_functions_scaled(n, x) * np.exp(-0.5 * np.asarray(x, dtype=float) ** 2)


def hermite_functions_scaled(n: int, x) -> np.ndarray:
    """``h_m(x) exp(x^2/2)``, the Gauss-Hermite weight-compensated functions."""
    x = np.asarray(x, dtype=float)
    h = np.empty((n, x.size))
    h[0] = math.pi ** -0.25
    if n > 1:
        h[1] = math.sqrt(2.0) * x * h[0]
    for m in range(1, n - 1):
        h[m + 1] = math.sqrt(2.0 / (m + 1)) * x * h[m] - math.sqrt(m / (m + 1)) * h[m - 1]
    return h


def _quadrature(n, pot, q):
    x, w = np.polynomial.hermite.hermgauss(q)
    if not np.all(w > 0.0) or not np.all(np.isfinite(w)):
        raise QuadratureUnstable(f"Gauss-Hermite weights underflow at {q} points")
    h = hermite_functions_scaled(n, x)
    return (h * (w * pot(x))) @ h.T


def potential_matrix(model: OscillatorModel, pot: PTPotential, quad_points: int | None = None) -> np.ndarray:
    """Matrix of multiplication by ``V`` in the parity-ordered basis.

    With ``quad_points`` unset the rule starts at ``N + 20`` points and is
    doubled until the entries settle to ``1e-13`` relative.
    """
    n = model.N
    if quad_points is not None:
        v = _quadrature(n, pot, int(quad_points))
    else:
        q = n + 20
        v = _quadrature(n, pot, q)
        while True:
            if q >= MAX_QUAD_POINTS:
                raise QuadratureUnstable("quadrature did not settle before the weights underflow")
            q = min(2 * q, MAX_QUAD_POINTS)
            v_new = _quadrature(n, pot, q)
            change = fro_norm(v_new - v)
            v = v_new
            if change <= QUAD_RTOL * max(1.0, fro_norm(v)):
                break
    p = model.parity_perm
    return v[np.ix_(p, p)]


def block_operator(model: OscillatorModel, v) -> BlockOperator:
    n0 = model.n0
    return BlockOperator(model.A0, model.A1, v[:n0, n0:], v[n0:, :n0])


def run_case(model: OscillatorModel, pot: PTPotential, sink=None,
             quad_points: int | None = None) -> KreinReport:
    """Generic-disposition pipeline (``delta = 2/pi``) on the truncated model.

    Assertions apply for ``||V|| < 1/pi`` with the truncation slack on the
    angle bound; larger couplings are reported without assertion.  ``sink``
    is called with the report when given.
    """
    if not pot.off_diagonal:
        raise HypothesisViolated("the pipeline needs a purely off-diagonal potential (a = 0)")
    v = potential_matrix(model, pot, quad_points)
    report = verify_tpi(block_operator(model, v), disposition=GENERIC,
                        angle_slack=TRUNCATION_SLACK)
    if sink is not None:
        sink(report)
    return report
