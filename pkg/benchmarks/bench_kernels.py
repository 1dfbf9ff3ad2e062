"""Compiled kernels versus their pure-numpy bodies.

Usage::

    python benchmarks/bench_kernels.py --sizes 8 16 32 --repeat 5

Each eigen kernel is timed twice on the same input: once as compiled by
numba and once through ``python_impl`` (the function body run by CPython,
which is what ``KREINPERT_DISABLE_NUMBA=1`` selects).  Compile time is
excluded by a warm-up call.  The outputs of both paths are compared too.
"""
import argparse
import time

import numpy as np

from kreinpert._accel import USE_NUMBA, python_impl
from kreinpert.linalg import _kernels as kern


def _best(func, args, repeat):
    best = float("inf")
    for _ in range(repeat):
        work = [a.copy() if isinstance(a, np.ndarray) else a for a in args]
        t0 = time.perf_counter()
        out = func(*work)
        best = min(best, time.perf_counter() - t0)
    # in-place kernels return a status code; compare their first argument
    return best, (work[0] if np.isscalar(out) else out)


def _cases(n, rng):
    a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    herm = np.ascontiguousarray(0.5 * (a + a.conj().T))
    d, e, z = python_impl(kern.householder_tridiagonal)(herm)
    h = python_impl(kern.householder_hessenberg)(a)
    lam = np.linalg.eigvals(a)[0]
    start = np.ones(n, dtype=np.complex128) / np.sqrt(n)
    basis = np.zeros((n, 0), dtype=np.complex128)
    return [
        ("householder_tridiagonal", kern.householder_tridiagonal, (herm,)),
        ("tridiagonal_ql", kern.tridiagonal_ql, (d, e, z, 60)),
        ("householder_hessenberg", kern.householder_hessenberg, (a,)),
        ("hessenberg_qr_eigenvalues", kern.hessenberg_qr_eigenvalues, (h, 100)),
        ("inverse_iteration", kern.inverse_iteration, (a, lam, start, basis, 3, 1e-14)),
    ]


def _first_array(out):
    return out[0] if isinstance(out, tuple) else out


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", type=int, nargs="+", default=[8, 16, 32])
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)

    if not USE_NUMBA:
        print("numba disabled: both columns run the same Python code")
    rng = np.random.default_rng(args.seed)
    print(f"{'kernel':<28}{'n':>5}{'numba [s]':>13}{'numpy [s]':>13}{'speedup':>10}{'max diff':>11}")
    for n in args.sizes:
        for name, func, kargs in _cases(n, rng):
            _best(func, kargs, 1)  # compile
            t_jit, out_jit = _best(func, kargs, args.repeat)
            t_py, out_py = _best(python_impl(func), kargs, args.repeat)
            a, b = _first_array(out_jit), _first_array(out_py)
            diff = float(np.max(np.abs(np.asarray(a) - np.asarray(b)), initial=0.0))
            print(f"{name:<28}{n:>5}{t_jit:>13.2e}{t_py:>13.2e}{t_py / t_jit:>10.1f}{diff:>11.1e}")


if __name__ == "__main__":
    main()
