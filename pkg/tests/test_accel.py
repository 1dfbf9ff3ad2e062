"""The compiled kernels and their pure-numpy fallback must agree."""
import os
import subprocess
import sys

import numpy as np
import pytest

from helpers import crandn, random_hermitian
from kreinpert import _accel
from kreinpert._accel import python_impl
from kreinpert.linalg import _kernels as kern


def test_python_impl_of_plain_function_is_identity():
    def f(x):
        return x

    assert python_impl(f) is f


def test_disable_flag_selects_fallback():
    env = dict(os.environ, KREINPERT_DISABLE_NUMBA="1")
    out = subprocess.run(
        [sys.executable, "-c", "from kreinpert import _accel; print(_accel.USE_NUMBA)"],
        env=env, capture_output=True, text=True, check=True,
    )
    assert out.stdout.strip() == "False"


@pytest.mark.skipif(not _accel.USE_NUMBA, reason="numba disabled")
def test_kernels_are_compiled():
    assert hasattr(kern.hessenberg_qr_eigenvalues, "py_func")


@pytest.mark.parametrize("n", [1, 2, 7, 20])
def test_tridiagonal_paths_agree(rng, n):
    a = np.ascontiguousarray(random_hermitian(rng, n))
    for impl in (kern.householder_tridiagonal, python_impl(kern.householder_tridiagonal)):
        d, e, z = impl(a)
        t = np.diag(d) + np.diag(e[:-1], 1) + np.diag(e[:-1], -1)
        assert np.linalg.norm(z @ t @ z.conj().T - a) < 1e-12 * max(1.0, np.linalg.norm(a))
    d1, e1, _ = kern.householder_tridiagonal(a)
    d2, e2, _ = python_impl(kern.householder_tridiagonal)(a)
    assert np.allclose(d1, d2, atol=1e-12) and np.allclose(e1, e2, atol=1e-12)


@pytest.mark.parametrize("n", [2, 6, 15])
def test_ql_paths_agree(rng, n):
    a = np.ascontiguousarray(random_hermitian(rng, n))
    d, e, z = kern.householder_tridiagonal(a)
    results = []
    for impl in (kern.tridiagonal_ql, python_impl(kern.tridiagonal_ql)):
        dd, ee, zz = d.copy(), e.copy(), z.copy()
        assert impl(dd, ee, zz, 60) == 0
        results.append(np.sort(dd))
    assert np.allclose(results[0], results[1], atol=1e-12)
    assert np.allclose(results[0], np.linalg.eigvalsh(a), atol=1e-12)


@pytest.mark.parametrize("n", [2, 5, 12])
def test_hessenberg_qr_paths_agree(rng, n):
    m = np.ascontiguousarray(crandn(rng, n, n))
    out = []
    for hess, qr in ((kern.householder_hessenberg, kern.hessenberg_qr_eigenvalues),
                     (python_impl(kern.householder_hessenberg),
                      python_impl(kern.hessenberg_qr_eigenvalues))):
        h = hess(m)
        assert np.allclose(np.tril(h, -2), 0.0)
        w, status = qr(h, 100)
        assert status == 0
        out.append(w[np.lexsort((w.imag, w.real))])
    assert np.allclose(out[0], out[1], atol=1e-10)


def test_inverse_iteration_paths_agree(rng):
    m = np.ascontiguousarray(crandn(rng, 6, 6))
    lam = np.linalg.eigvals(m)[0]
    start = np.ones(6, dtype=np.complex128) / np.sqrt(6)
    basis = np.zeros((6, 0), dtype=np.complex128)
    x1, r1 = kern.inverse_iteration(m, lam, start, basis, 3, 1e-15)
    x2, r2 = python_impl(kern.inverse_iteration)(m, lam, start, basis, 3, 1e-15)
    assert r1 < 1e-10 and r2 < 1e-10
    assert abs(abs(np.vdot(x1, x2)) - 1.0) < 1e-10


def test_inverse_iteration_start_inside_basis():
    # the start vector spans the basis: both paths must still return a unit vector
    m = np.eye(3, dtype=np.complex128)
    start = np.array([1.0, 0.0, 0.0], dtype=np.complex128)
    basis = np.ascontiguousarray(start.reshape(3, 1))
    for impl in (kern.inverse_iteration, python_impl(kern.inverse_iteration)):
        x, r = impl(m, 1.0 + 0j, start, basis, 3, 1e-16)
        assert np.linalg.norm(x) == pytest.approx(1.0)
        assert abs(x[0]) < 1e-12
