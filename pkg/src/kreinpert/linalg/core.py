"""Dense complex linear algebra built on the kernels in :mod:`._kernels`."""
from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from kreinpert.errors import NoConvergence, NonFinite, NonHermitian, NotPositive
from kreinpert.linalg import _kernels as kern

HERMITIAN_RTOL = 1e-10
CLUSTER_RTOL = 1e-7
DEFECT_RATIO = 1e-6
CONDITION_LIMIT = 1e8


def default_tol() -> float:
    """Base tolerance; ``KREINPERT_TOL`` overrides the 1e-12 default."""
    raw = os.environ.get("KREINPERT_TOL")
    if raw:
        try:
            value = float(raw)
        except ValueError:
            value = 0.0
        if value > 0.0:
            return value
    return 1e-12


def as_cmatrix(x, name: str = "matrix") -> np.ndarray:
    """Coerce ``x`` into a finite, C-contiguous complex128 2-D array."""
    m = np.array(x, dtype=np.complex128, copy=True)
    if m.ndim == 0:
        m = m.reshape(1, 1)
    elif m.ndim == 1:
        m = m.reshape(1, -1)
    elif m.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise NonFinite(f"{name} contains NaN or Inf")
    return np.ascontiguousarray(m)


def fro_norm(m) -> float:
    m = np.asarray(m)
    return float(np.sqrt(np.sum(m.real ** 2 + m.imag ** 2)))


def _require_square(m, name):
    if m.shape[0] != m.shape[1]:
        raise ValueError(f"{name} must be square, got shape {m.shape}")


def hermitian_defect(m) -> float:
    m = np.asarray(m)
    return fro_norm(m - m.conj().T)


def is_hermitian(m, rtol: float = HERMITIAN_RTOL) -> bool:
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        return False
    return hermitian_defect(m) <= rtol * max(1.0, fro_norm(m))


@dataclass(frozen=True)
class HermitianEig:
    eigenvalues: np.ndarray
    vectors: np.ndarray


@dataclass(frozen=True)
class GeneralEig:
    eigenvalues: np.ndarray
    vectors: np.ndarray
    condition: float
    residuals: np.ndarray
    defective: bool

    @property
    def diagonalizable(self) -> bool:
        return (not self.defective) and self.condition <= CONDITION_LIMIT


def hermitian_eig(m, max_iter: int = 60) -> HermitianEig:
    """Eigen-decomposition of a Hermitian matrix.

    Householder tridiagonalization followed by implicit QL.  Inputs whose
    Hermitian defect is within ``1e-10 * ||M||`` are symmetrized first.
    """
    m = as_cmatrix(m)
    _require_square(m, "matrix")
    n = m.shape[0]
    if n == 0:
        return HermitianEig(np.zeros(0), np.zeros((0, 0), dtype=np.complex128))
    if not is_hermitian(m):
        raise NonHermitian(
            f"Hermitian defect {hermitian_defect(m):.3e} exceeds "
            f"{HERMITIAN_RTOL:g} * ||M||"
        )
    m = np.ascontiguousarray(0.5 * (m + m.conj().T))
    d, e, z = kern.householder_tridiagonal(m)
    status = kern.tridiagonal_ql(d, e, z, max_iter)
    if status != 0:
        raise NoConvergence("tridiagonal QL exceeded the iteration cap")
    order = np.argsort(d, kind="stable")
    return HermitianEig(d[order].copy(), np.ascontiguousarray(z[:, order]))


def eigvalsh(m) -> np.ndarray:
    return hermitian_eig(m).eigenvalues


def singular_values(m) -> np.ndarray:
    """Singular values (descending) from the Hermitian dilation.

    The dilation ``[[0, M], [M^H, 0]]`` has eigenvalues ``+-s_i`` plus
    structural zeros, so small singular values keep absolute accuracy.
    """
    m = as_cmatrix(m)
    r, c = m.shape
    p = min(r, c)
    if p == 0:
        return np.zeros(0)
    dil = np.zeros((r + c, r + c), dtype=np.complex128)
    dil[:r, r:] = m
    dil[r:, :r] = m.conj().T
    w = hermitian_eig(dil).eigenvalues
    s = w[::-1][:p]
    return np.maximum(s, 0.0)


def spectral_norm(m) -> float:
    """Largest singular value via the top eigenvalue of the smaller Gram matrix."""
    m = as_cmatrix(m)
    r, c = m.shape
    if r == 0 or c == 0:
        return 0.0
    gram = m.conj().T @ m if c <= r else m @ m.conj().T
    top = hermitian_eig(gram).eigenvalues[-1]
    return float(np.sqrt(max(top, 0.0)))


def condition_number(m) -> float:
    s = singular_values(m)
    if s.size == 0:
        return 1.0
    if s[-1] <= 0.0:
        return float("inf")
    return float(s[0] / s[-1])


def _start_vector(n):
    rng = np.random.default_rng(0x5EED)
    v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return np.ascontiguousarray(v / np.linalg.norm(v))


def _clusters(values, radius):
    """Connected components of eigenvalues closer than ``radius``."""
    n = len(values)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if abs(values[i] - values[j]) <= radius:
                parent[find(i)] = find(j)
    groups = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    return [g for g in groups.values() if len(g) > 1]


def general_eig(m, max_iter: int = 100) -> GeneralEig:
    """Eigenvalues and unit right eigenvectors of a square complex matrix.

    Hessenberg reduction plus shifted QR gives the eigenvalues; each vector
    comes from inverse iteration on the original matrix.  Inside a cluster
    of (numerically) repeated eigenvalues the iteration is re-run with the
    already accepted vectors projected out.  If that cannot produce an
    independent eigenvector the cluster is flagged defective and the
    eigenvector matrix is left (near) singular.
    """
    m = as_cmatrix(m)
    _require_square(m, "matrix")
    n = m.shape[0]
    if n == 0:
        empty = np.zeros((0, 0), dtype=np.complex128)
        return GeneralEig(np.zeros(0, dtype=np.complex128), empty, 1.0, np.zeros(0), False)
    h = kern.householder_hessenberg(m)
    w, status = kern.hessenberg_qr_eigenvalues(h, max_iter)
    if status != 0:
        raise NoConvergence("Hessenberg QR exceeded the iteration cap")
    order = np.lexsort((w.imag, w.real))
    w = w[order]

    scale = max(1.0, fro_norm(m))
    tiny = kern.EPS * scale
    start = _start_vector(n)
    no_basis = np.zeros((n, 0), dtype=np.complex128)
    vecs = np.zeros((n, n), dtype=np.complex128)
    res = np.zeros(n)
    for i in range(n):
        vecs[:, i], res[i] = kern.inverse_iteration(m, w[i], start, no_basis, 3, tiny)

    defective = False
    accept = 1e3 * kern.EPS * scale
    for group in _clusters(w, CLUSTER_RTOL * scale):
        block = vecs[:, group]
        s = singular_values(block)
        if s[-1] > DEFECT_RATIO * s[0]:
            continue
        basis = vecs[:, [group[0]]].copy()
        for i in group[1:]:
            x, r = kern.inverse_iteration(m, w[i], start, np.ascontiguousarray(basis), 3, tiny)
            if r <= accept:
                vecs[:, i], res[i] = x, r
                basis = np.column_stack([basis, x])
            else:
                defective = True
    return GeneralEig(w, vecs, condition_number(vecs), res, defective)


def eigvals(m) -> np.ndarray:
    m = as_cmatrix(m)
    _require_square(m, "matrix")
    if m.shape[0] == 0:
        return np.zeros(0, dtype=np.complex128)
    w, status = kern.hessenberg_qr_eigenvalues(kern.householder_hessenberg(m), 100)
    if status != 0:
        raise NoConvergence("Hessenberg QR exceeded the iteration cap")
    return w[np.lexsort((w.imag, w.real))]


_PADE = {
    3: (120.0, 60.0, 12.0, 1.0),
    5: (30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0),
    7: (17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0),
    9: (17643225600.0, 8821612800.0, 2075673600.0, 302702400.0, 30270240.0,
        2162160.0, 110880.0, 3960.0, 90.0, 1.0),
    13: (64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
         1187353796428800.0, 129060195264000.0, 10559470521600.0,
         670442572800.0, 33522128640.0, 1323241920.0, 40840800.0, 960960.0,
         16380.0, 182.0, 1.0),
}
_THETA = ((3, 1.495585217958292e-2), (5, 2.539398330063230e-1),
          (7, 9.504178996162932e-1), (9, 2.097847961257068e0))
_THETA13 = 5.371920351148152e0


def _pade_uv(a, m):
    b = _PADE[m]
    n = a.shape[0]
    eye = np.eye(n, dtype=np.complex128)
    a2 = a @ a
    if m < 13:
        u = b[1] * eye
        v = b[0] * eye
        power = eye
        for k in range(1, m // 2 + 1):
            power = power @ a2
            u = u + b[2 * k + 1] * power
            v = v + b[2 * k] * power
        return a @ u, v
    a4 = a2 @ a2
    a6 = a4 @ a2
    u = a @ (a6 @ (b[13] * a6 + b[11] * a4 + b[9] * a2)
             + b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * eye)
    v = (a6 @ (b[12] * a6 + b[10] * a4 + b[8] * a2)
         + b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * eye)
    return u, v


def matrix_exp(m, method: str = "auto") -> np.ndarray:
    """Matrix exponential.

    ``method="pade"`` forces scaling and squaring with the degree 3..13 Padé
    table, ``"eig"`` uses the spectral decomposition (Hermitian input
    only); ``"auto"`` picks ``eig`` for Hermitian input.
    """
    m = as_cmatrix(m)
    _require_square(m, "matrix")
    n = m.shape[0]
    if n == 0:
        return m.copy()
    use_eig = method == "eig" or (method == "auto" and is_hermitian(m, 1e-14))
    if use_eig:
        he = hermitian_eig(m)
        return (he.vectors * np.exp(he.eigenvalues)) @ he.vectors.conj().T
    norm1 = float(np.max(np.sum(np.abs(m), axis=0)))
    for deg, theta in _THETA:
        if norm1 <= theta:
            u, v = _pade_uv(m, deg)
            return np.linalg.solve(v - u, v + u)
    s = max(0, int(np.ceil(np.log2(norm1 / _THETA13)))) if norm1 > _THETA13 else 0
    a = m / (2.0 ** s)
    u, v = _pade_uv(a, 13)
    r = np.linalg.solve(v - u, v + u)
    for _ in range(s):
        r = r @ r
    return r


def psd_sqrt(m, tol: float | None = None) -> np.ndarray:
    """Principal square root of a Hermitian positive semidefinite matrix."""
    tol = default_tol() if tol is None else tol
    he = hermitian_eig(m)
    scale = max(1.0, float(np.max(np.abs(he.eigenvalues), initial=0.0)))
    if he.eigenvalues.size and he.eigenvalues[0] < -1e3 * tol * scale:
        raise NotPositive(f"smallest eigenvalue {he.eigenvalues[0]:.3e} is negative")
    root = np.sqrt(np.clip(he.eigenvalues, 0.0, None))
    return (he.vectors * root) @ he.vectors.conj().T


def psd_inv_sqrt(m, threshold: float | None = None) -> np.ndarray:
    """Inverse principal square root; needs a strictly positive spectrum."""
    he = hermitian_eig(m)
    scale = max(1.0, float(np.max(np.abs(he.eigenvalues), initial=0.0)))
    threshold = default_tol() * scale if threshold is None else threshold
    if he.eigenvalues.size and he.eigenvalues[0] <= threshold:
        raise NotPositive(
            f"smallest eigenvalue {he.eigenvalues[0]:.3e} is not above {threshold:.1e}"
        )
    root = 1.0 / np.sqrt(he.eigenvalues)
    return (he.vectors * root) @ he.vectors.conj().T


def match_spectra(a, b, tol: float) -> tuple[bool, float]:
    """Greedy nearest-neighbour matching of two eigenvalue multisets.

    Returns ``(matched, worst_distance)``; ``matched`` is false when the
    sizes differ or some pair is farther apart than ``tol``.
    """
    a = list(np.asarray(a, dtype=np.complex128).ravel())
    b = list(np.asarray(b, dtype=np.complex128).ravel())
    if len(a) != len(b):
        return False, float("inf")
    worst = 0.0
    remaining = b
    for z in sorted(a, key=lambda v: (v.real, v.imag)):
        dists = [abs(z - y) for y in remaining]
        k = int(np.argmin(dists))
        worst = max(worst, dists[k])
        remaining.pop(k)
    return worst <= tol, worst
