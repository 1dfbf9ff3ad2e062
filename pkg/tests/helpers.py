"""Shared random-instance builders for the test suite."""
import numpy as np

from kreinpert.riccati import BlockOperator


def crandn(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def random_hermitian(rng, n, scale=1.0):
    a = crandn(rng, n, n)
    return scale * 0.5 * (a + a.conj().T)


def random_unitary(rng, n):
    q, r = np.linalg.qr(crandn(rng, n, n))
    return q * (np.diag(r) / np.abs(np.diag(r)))


def hermitian_with_spectrum(rng, values):
    u = random_unitary(rng, len(values))
    return (u * np.asarray(values, dtype=float)) @ u.conj().T


def scaled(rng, shape, norm):
    m = crandn(rng, *shape)
    return m * (norm / np.linalg.norm(m, 2))


def subordinated_pair(rng, n0, n1, d=1.0, rotate=True):
    """Hermitian A0 <= -d/2 < d/2 <= A1 with spectral distance exactly d."""
    s0 = -0.5 * d - np.concatenate([[0.0], rng.uniform(0, 2 * d, n0 - 1)])
    s1 = 0.5 * d + np.concatenate([[0.0], rng.uniform(0, 2 * d, n1 - 1)])
    if rotate:
        return hermitian_with_spectrum(rng, s0), hermitian_with_spectrum(rng, s1)
    return np.diag(s0).astype(complex), np.diag(s1).astype(complex)


def j_instance(rng, a0, a1, v_norm):
    b = scaled(rng, (a0.shape[0], a1.shape[0]), v_norm)
    return BlockOperator.j_selfadjoint(a0, a1, b)
