"""Dense complex eigenvalue kernels.

Everything here runs on C-contiguous ``complex128`` arrays and is compiled
with numba unless acceleration is disabled (see :mod:`kreinpert._accel`).
The code sticks to the numpy subset numba understands so the fallback path
is the same source executed by CPython.
"""
import numpy as np

from kreinpert._accel import njit

EPS = 2.220446049250313e-16


@njit
def _unit(z, r):
    """``z / r`` for real ``r > 0``, componentwise so subnormal ``r`` is safe."""
    if r == 0.0:
        return 1.0 + 0.0j
    return complex(z.real / r, z.imag / r)


@njit
def householder_tridiagonal(a):
    """Reduce a Hermitian matrix to real symmetric tridiagonal form.

    Returns ``(d, e, z)`` with ``a = z @ T @ z^H`` where ``T`` has diagonal
    ``d`` and sub/super diagonal ``e[:-1]`` (real, non-negative).
    ``e[n-1]`` is zero padding.
    """
    n = a.shape[0]
    a = a.copy()
    q = np.eye(n, dtype=np.complex128)
    for k in range(n - 2):
        x = a[k + 1:, k].copy()
        xnorm = np.sqrt(np.sum(x.real ** 2 + x.imag ** 2))
        if xnorm == 0.0:
            continue
        ax0 = abs(x[0])
        phase = _unit(x[0], ax0)
        alpha = -phase * xnorm
        v = x
        v[0] = v[0] - alpha
        vnorm = np.sqrt(np.sum(v.real ** 2 + v.imag ** 2))
        if vnorm == 0.0:
            continue
        v = v / vnorm
        vc = np.conj(v)

        rows = np.ascontiguousarray(a[k + 1:, :])
        w = np.dot(vc, rows)
        a[k + 1:, :] = rows - 2.0 * np.outer(v, w)

        cols = np.ascontiguousarray(a[:, k + 1:])
        u = np.dot(cols, v)
        a[:, k + 1:] = cols - 2.0 * np.outer(u, vc)

        qcols = np.ascontiguousarray(q[:, k + 1:])
        u = np.dot(qcols, v)
        q[:, k + 1:] = qcols - 2.0 * np.outer(u, vc)

    d = np.empty(n)
    e = np.zeros(n)
    phases = np.ones(n, dtype=np.complex128)
    for j in range(n):
        d[j] = a[j, j].real
    for j in range(n - 1):
        t = a[j + 1, j]
        at = abs(t)
        e[j] = at
        if at > 0.0:
            phases[j + 1] = phases[j] * _unit(t, at)
        else:
            phases[j + 1] = phases[j]
    z = q * phases[np.newaxis, :]
    return d, e, z


@njit
def tridiagonal_ql(d, e, z, max_iter):
    """Implicit QL with Wilkinson-type shifts on a real tridiagonal matrix.

    ``d`` and ``e`` are overwritten (``d`` with eigenvalues); the plane
    rotations are accumulated into the columns of ``z``.  Returns 0 on
    success and 1 when an eigenvalue needed more than ``max_iter`` sweeps.
    """
    n = d.shape[0]
    for l in range(n):
        it = 0
        while True:
            m = l
            while m < n - 1:
                dd = abs(d[m]) + abs(d[m + 1])
                if abs(e[m]) <= EPS * dd:
                    break
                m += 1
            if m == l:
                break
            it += 1
            if it > max_iter:
                return 1
            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = np.hypot(g, 1.0)
            sgn = r if g >= 0.0 else -r
            g = d[m] - d[l] + e[l] / (g + sgn)
            s = 1.0
            c = 1.0
            p = 0.0
            i = m - 1
            early = False
            while i >= l:
                f = s * e[i]
                b = c * e[i]
                r = np.hypot(f, g)
                e[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    e[m] = 0.0
                    early = True
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
                zi = z[:, i].copy()
                zi1 = z[:, i + 1].copy()
                z[:, i + 1] = s * zi + c * zi1
                z[:, i] = c * zi - s * zi1
                i -= 1
            if early:
                continue
            d[l] -= p
            e[l] = g
            e[m] = 0.0
    return 0


@njit
def householder_hessenberg(a):
    """Unitary similarity reduction to upper Hessenberg form (no vectors)."""
    n = a.shape[0]
    h = a.copy()
    for k in range(n - 2):
        x = h[k + 1:, k].copy()
        xnorm = np.sqrt(np.sum(x.real ** 2 + x.imag ** 2))
        if xnorm == 0.0:
            continue
        ax0 = abs(x[0])
        phase = _unit(x[0], ax0)
        alpha = -phase * xnorm
        v = x
        v[0] = v[0] - alpha
        vnorm = np.sqrt(np.sum(v.real ** 2 + v.imag ** 2))
        if vnorm == 0.0:
            continue
        v = v / vnorm
        vc = np.conj(v)

        rows = np.ascontiguousarray(h[k + 1:, :])
        w = np.dot(vc, rows)
        h[k + 1:, :] = rows - 2.0 * np.outer(v, w)

        cols = np.ascontiguousarray(h[:, k + 1:])
        u = np.dot(cols, v)
        h[:, k + 1:] = cols - 2.0 * np.outer(u, vc)

        h[k + 2:, k] = 0.0
    return h


@njit
def hessenberg_qr_eigenvalues(h, max_iter):
    """Eigenvalues of an upper Hessenberg matrix by shifted complex QR.

    Single Wilkinson shift, explicit Givens sweep over the active window,
    deflation from the bottom and exceptional shifts every tenth sweep.
    Returns ``(eigenvalues, status)``; status 1 signals non-convergence.
    """
    n = h.shape[0]
    h = h.copy()
    w = np.zeros(n, dtype=np.complex128)
    hnorm = np.sqrt(np.sum(h.real ** 2 + h.imag ** 2))
    floor = EPS * hnorm
    cs = np.zeros(n, dtype=np.complex128)
    sn = np.zeros(n, dtype=np.complex128)
    hi = n - 1
    its = 0
    while hi >= 0:
        if hi == 0:
            w[0] = h[0, 0]
            hi -= 1
            continue
        lo = hi
        while lo > 0:
            sub = abs(h[lo, lo - 1])
            tst = abs(h[lo, lo]) + abs(h[lo - 1, lo - 1])
            if sub <= EPS * tst or sub <= floor:
                h[lo, lo - 1] = 0.0
                break
            lo -= 1
        if lo == hi:
            w[hi] = h[hi, hi]
            hi -= 1
            its = 0
            continue
        its += 1
        if its > max_iter:
            return w, 1

        if its % 10 == 0:
            mu = h[hi, hi] + 1.5 * abs(h[hi, hi - 1])
        else:
            a11 = h[hi - 1, hi - 1]
            a12 = h[hi - 1, hi]
            a21 = h[hi, hi - 1]
            a22 = h[hi, hi]
            half = 0.5 * (a11 - a22)
            disc = np.sqrt(half * half + a12 * a21)
            mid = 0.5 * (a11 + a22)
            mu1 = mid + disc
            mu2 = mid - disc
            mu = mu1 if abs(mu1 - a22) <= abs(mu2 - a22) else mu2

        for k in range(lo, hi + 1):
            h[k, k] -= mu
        for k in range(lo, hi):
            x = h[k, k]
            y = h[k + 1, k]
            r = np.sqrt(abs(x) ** 2 + abs(y) ** 2)
            if r == 0.0:
                c = 1.0 + 0.0j
                s = 0.0 + 0.0j
            else:
                c = _unit(x, r)
                s = _unit(y, r)
            cs[k] = c
            sn[k] = s
            cc = np.conj(c)
            sc = np.conj(s)
            for j in range(k, hi + 1):
                t1 = h[k, j]
                t2 = h[k + 1, j]
                h[k, j] = cc * t1 + sc * t2
                h[k + 1, j] = -s * t1 + c * t2
        for k in range(lo, hi):
            c = cs[k]
            s = sn[k]
            cc = np.conj(c)
            sc = np.conj(s)
            top = k + 2 if k + 2 <= hi else hi
            for i in range(lo, top + 1):
                t1 = h[i, k]
                t2 = h[i, k + 1]
                h[i, k] = t1 * c + t2 * s
                h[i, k + 1] = -t1 * sc + t2 * cc
        for k in range(lo, hi + 1):
            h[k, k] += mu
    return w, 0


@njit
def lu_factor_perturbed(a, tiny):
    """LU with partial pivoting; pivots below ``tiny`` are replaced by ``tiny``.

    The replacement keeps inverse iteration alive when the shift is an
    eigenvalue to working precision.
    """
    n = a.shape[0]
    lu = a.copy()
    piv = np.arange(n)
    for k in range(n):
        p = k
        best = abs(lu[k, k])
        for i in range(k + 1, n):
            v = abs(lu[i, k])
            if v > best:
                best = v
                p = i
        if p != k:
            tmp = lu[k, :].copy()
            lu[k, :] = lu[p, :]
            lu[p, :] = tmp
            t = piv[k]
            piv[k] = piv[p]
            piv[p] = t
        if abs(lu[k, k]) < tiny:
            lu[k, k] = tiny
        inv = 1.0 / lu[k, k]
        for i in range(k + 1, n):
            f = lu[i, k] * inv
            lu[i, k] = f
            if f != 0.0:
                lu[i, k + 1:] -= f * lu[k, k + 1:]
    return lu, piv


@njit
def lu_solve_vec(lu, piv, b):
    n = lu.shape[0]
    x = np.empty(n, dtype=np.complex128)
    for i in range(n):
        x[i] = b[piv[i]]
    for i in range(n):
        acc = x[i]
        for j in range(i):
            acc -= lu[i, j] * x[j]
        x[i] = acc
    for i in range(n - 1, -1, -1):
        acc = x[i]
        for j in range(i + 1, n):
            acc -= lu[i, j] * x[j]
        x[i] = acc / lu[i, i]
    return x


@njit
def inverse_iteration(m, lam, start, basis, n_iter, tiny):
    """Unit eigenvector estimate for eigenvalue ``lam`` of ``m``.

    Columns of ``basis`` (orthonormal, possibly zero columns) are projected
    out after every solve; this separates vectors inside an eigenvalue
    cluster.  Returns ``(vector, residual_norm)``.
    """
    n = m.shape[0]
    shifted = m.copy()
    for i in range(n):
        shifted[i, i] -= lam
    lu, piv = lu_factor_perturbed(shifted, tiny)
    k = basis.shape[1]
    x = start.copy()
    for j in range(k):
        col = basis[:, j]
        x = x - np.sum(np.conj(col) * x) * col
    if np.sqrt(np.sum(x.real ** 2 + x.imag ** 2)) < 1e-3:
        # start (nearly) inside span(basis): use the unit vector that
        # keeps the largest component after projection
        best = -1.0
        for i in range(n):
            e = np.zeros(n, dtype=np.complex128)
            e[i] = 1.0
            for j in range(k):
                col = basis[:, j]
                e = e - np.sum(np.conj(col) * e) * col
            en = np.sqrt(np.sum(e.real ** 2 + e.imag ** 2))
            if en > best:
                best = en
                x = e
    for _ in range(n_iter):
        for j in range(k):
            col = basis[:, j]
            x = x - np.sum(np.conj(col) * x) * col
        nrm = np.sqrt(np.sum(x.real ** 2 + x.imag ** 2))
        if nrm == 0.0:
            break
        x = x / nrm
        x = lu_solve_vec(lu, piv, x)
    for j in range(k):
        col = basis[:, j]
        x = x - np.sum(np.conj(col) * x) * col
    nrm = np.sqrt(np.sum(x.real ** 2 + x.imag ** 2))
    if nrm > 0.0:
        x = x / nrm
    r = np.dot(m, x) - lam * x
    res = np.sqrt(np.sum(r.real ** 2 + r.imag ** 2))
    return x, res
