"""Hot numeric kernels.

Each kernel exists in two flavours: a numba-compiled loop and a pure-numpy
equivalent. ``bootstrap_stats`` and ``jacobi_eigen`` dispatch on the backend
selected in :mod:`nvfuse._accel`. Sums are accumulated sequentially on both
paths (``cumsum`` on the numpy side) so the two backends agree bit for bit.
"""

import math

import numpy as np

from . import _accel
from ._accel import njit

# statistic kind codes shared with stats.StatisticDescriptor
MEAN = 0
MEDIAN = 1
EMPIRICAL_QUANTILE = 2
NORMAL_QUANTILE = 3


# --- inverse normal CDF (Wichura, AS 241 / PPND16) -------------------------

_A = (3.3871328727963666080e0, 1.3314166789178437745e2, 1.9715909503065514427e3,
      1.3731693765509461125e4, 4.5921953931549871457e4, 6.7265770927008700853e4,
      3.3430575583588128105e4, 2.5090809287301226727e3)
_B = (1.0, 4.2313330701600911252e1, 6.8718700749205790830e2, 5.3941960214247511077e3,
      2.1213794301586595867e4, 3.9307895800092710610e4, 2.8729085735721942674e4,
      5.2264952788528545610e3)
_C = (1.42343711074968357734e0, 4.63033784615654529590e0, 5.76949722146069140550e0,
      3.64784832476320460504e0, 1.27045825245236838258e0, 2.41780725177450611770e-1,
      2.27238449892691845833e-2, 7.74545014278341407640e-4)
_D = (1.0, 2.05319162663775882187e0, 1.67638483018380384940e0, 6.89767334985100004550e-1,
      1.48103976427480074590e-1, 1.51986665636164571966e-2, 5.47593808499534494600e-4,
      1.05075007164441684324e-9)
_E = (6.65790464350110377720e0, 5.46378491116411436990e0, 1.78482653991729133580e0,
      2.96560571828504891230e-1, 2.65321895265761230930e-2, 1.24266094738807843860e-3,
      2.71155556874348757815e-5, 2.01033439929228813265e-7)
_F = (1.0, 5.99832206555887937690e-1, 1.36929880922735805310e-1, 1.48753612908506148525e-2,
      7.86869131145613259100e-4, 1.84631831751005468180e-5, 1.42151175831644588870e-7,
      2.04426310338993978564e-15)

A_COEF = np.array(_A)
B_COEF = np.array(_B)
C_COEF = np.array(_C)
D_COEF = np.array(_D)
E_COEF = np.array(_E)
F_COEF = np.array(_F)


@njit(cache=True)
def _horner(coef, x):
    acc = coef[7]
    for i in range(6, -1, -1):
        acc = acc * x + coef[i]
    return acc


@njit(cache=True)
def ppnd16(p):
    """Standard normal quantile, |error| ~ 1e-16 on (0, 1). Caller validates p."""
    q = p - 0.5
    if abs(q) <= 0.425:
        r = 0.180625 - q * q
        return q * _horner(A_COEF, r) / _horner(B_COEF, r)
    r = p if q < 0.0 else 1.0 - p
    r = math.sqrt(-math.log(r))
    if r <= 5.0:
        r -= 1.6
        val = _horner(C_COEF, r) / _horner(D_COEF, r)
    else:
        r -= 5.0
        val = _horner(E_COEF, r) / _horner(F_COEF, r)
    return -val if q < 0.0 else val


# --- order statistics ------------------------------------------------------

@njit(cache=True)
def _interp_sorted(xs, level):
    # rank h = (n-1)*level on a 0-based index
    n = xs.shape[0]
    h = (n - 1) * level
    i = int(math.floor(h))
    if i >= n - 1:
        return xs[n - 1]
    frac = h - i
    return xs[i] + frac * (xs[i + 1] - xs[i])


@njit(cache=True)
def _select(buf, k):
    """Move the k-th smallest value to buf[k] (in place, Hoare partitioning)."""
    lo, hi = 0, buf.shape[0] - 1
    while lo < hi:
        mid = (lo + hi) // 2
        # median of three as pivot
        a, b, c = buf[lo], buf[mid], buf[hi]
        if a < b:
            pivot = b if b < c else (c if a < c else a)
        else:
            pivot = a if a < c else (c if b < c else b)
        i, j = lo, hi
        while i <= j:
            while buf[i] < pivot:
                i += 1
            while buf[j] > pivot:
                j -= 1
            if i <= j:
                buf[i], buf[j] = buf[j], buf[i]
                i += 1
                j -= 1
        if k <= j:
            hi = j
        elif k >= i:
            lo = i
        else:
            break
    return buf[k]


@njit(cache=True)
def _select_interp(buf, level):
    # same value as _interp_sorted on the sorted buffer, from two order
    # statistics instead of a full sort; buf is scratch and gets reordered
    n = buf.shape[0]
    h = (n - 1) * level
    i = int(math.floor(h))
    if i >= n - 1:
        return buf.max()
    lo = _select(buf, i)
    hi = buf[i + 1]
    for t in range(i + 2, n):
        if buf[t] < hi:
            hi = buf[t]
    frac = h - i
    return lo + frac * (hi - lo)


def interp_sorted_rows(xs, level):
    """Row-wise version of the order-statistic interpolation (numpy path)."""
    n = xs.shape[1]
    h = (n - 1) * level
    i = int(math.floor(h))
    if i >= n - 1:
        return xs[:, n - 1].copy()
    frac = h - i
    return xs[:, i] + frac * (xs[:, i + 1] - xs[:, i])


# --- bootstrap statistic evaluation ---------------------------------------

@njit(cache=True)
def _one_stat(buf, kind, level, z):
    n = buf.shape[0]
    if kind == MEDIAN or kind == EMPIRICAL_QUANTILE:
        return _select_interp(buf, 0.5 if kind == MEDIAN else level)
    s = 0.0
    for i in range(n):
        s += buf[i]
    mean = s / n
    if kind == MEAN:
        return mean
    ss = 0.0
    for i in range(n):
        d = buf[i] - mean
        ss += d * d
    if n < 2 or ss <= 0.0:
        return np.nan
    return mean + math.sqrt(ss / (n - 1)) * z


@njit(cache=True)
def _stats_rows(data, idx, kinds, cols, levels, zs, out):
    nrep, m = idx.shape
    k = kinds.shape[0]
    buf = np.empty(m)
    for b in range(nrep):
        for j in range(k):
            c = cols[j]
            for i in range(m):
                buf[i] = data[idx[b, i], c]
            out[b, j] = _one_stat(buf, kinds[j], levels[j], zs[j])


if _accel.HAVE_NUMBA:
    import numba

    @numba.njit(parallel=True, cache=True)
    def _stats_parallel(data, idx, kinds, cols, levels, zs, out):
        nrep, m = idx.shape
        k = kinds.shape[0]
        for b in numba.prange(nrep):
            buf = np.empty(m)
            for j in range(k):
                c = cols[j]
                for i in range(m):
                    buf[i] = data[idx[b, i], c]
                out[b, j] = _one_stat(buf, kinds[j], levels[j], zs[j])


def bootstrap_stats_numba(data, idx, kinds, cols, levels, zs):
    """Evaluate k statistics on each resample; rows of ``idx`` are resamples.

    Each replicate writes only its own output row, so the result does not
    depend on the number of worker threads.
    """
    out = np.empty((idx.shape[0], kinds.shape[0]))
    _stats_parallel(np.ascontiguousarray(data, dtype=np.float64),
                    np.ascontiguousarray(idx, dtype=np.int64),
                    kinds, cols, levels, zs, out)
    return out


def bootstrap_stats_numpy(data, idx, kinds, cols, levels, zs):
    nrep, m = idx.shape
    out = np.empty((nrep, kinds.shape[0]))
    for j in range(kinds.shape[0]):
        g = data[:, cols[j]][idx]
        kind = kinds[j]
        if kind == MEDIAN or kind == EMPIRICAL_QUANTILE:
            g.sort(axis=1)
            out[:, j] = interp_sorted_rows(g, 0.5 if kind == MEDIAN else levels[j])
            continue
        mean = np.cumsum(g, axis=1)[:, -1] / m
        if kind == MEAN:
            out[:, j] = mean
            continue
        dev = g - mean[:, None]
        ss = np.cumsum(dev * dev, axis=1)[:, -1]
        with np.errstate(invalid="ignore", divide="ignore"):
            val = mean + np.sqrt(ss / (m - 1)) * zs[j]
        val[(ss <= 0.0) | (m < 2)] = np.nan
        out[:, j] = val
    return out


def bootstrap_stats(data, idx, kinds, cols, levels, zs):
    kinds = np.asarray(kinds, dtype=np.int64)
    cols = np.asarray(cols, dtype=np.int64)
    levels = np.asarray(levels, dtype=np.float64)
    zs = np.asarray(zs, dtype=np.float64)
    idx = np.atleast_2d(np.asarray(idx, dtype=np.int64))
    if _accel.USE_NUMBA:
        return bootstrap_stats_numba(data, idx, kinds, cols, levels, zs)
    return bootstrap_stats_numpy(np.asarray(data, dtype=np.float64), idx, kinds, cols, levels, zs)


# --- cyclic Jacobi eigensolver --------------------------------------------

def _jacobi_py(a, tol, max_sweeps):
    m = a.shape[0]
    a = a.copy()
    v = np.eye(m)
    fro = 0.0
    for i in range(m):
        for j in range(m):
            fro += a[i, j] * a[i, j]
    fro = math.sqrt(fro)
    sweeps = 0
    while sweeps < max_sweeps:
        off = 0.0
        for i in range(m):
            for j in range(m):
                if i != j:
                    off += a[i, j] * a[i, j]
        if math.sqrt(off) <= tol * fro:
            break
        for p in range(m - 1):
            for q in range(p + 1, m):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = 1.0 / (abs(theta) + math.sqrt(theta * theta + 1.0))
                if theta < 0.0:
                    t = -t
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                for k in range(m):
                    akp = a[k, p]
                    akq = a[k, q]
                    a[k, p] = c * akp - s * akq
                    a[k, q] = s * akp + c * akq
                for k in range(m):
                    apk = a[p, k]
                    aqk = a[q, k]
                    a[p, k] = c * apk - s * aqk
                    a[q, k] = s * apk + c * aqk
                a[p, q] = 0.0
                a[q, p] = 0.0
                for k in range(m):
                    vkp = v[k, p]
                    vkq = v[k, q]
                    v[k, p] = c * vkp - s * vkq
                    v[k, q] = s * vkp + c * vkq
        sweeps += 1
    w = np.empty(m)
    for i in range(m):
        w[i] = a[i, i]
    return w, v, sweeps


jacobi_eigen_numpy = _jacobi_py
jacobi_eigen_numba = njit(cache=True)(_jacobi_py)


def jacobi_eigen(a, tol=1e-12, max_sweeps=100):
    """Unsorted eigenpairs of a symmetric matrix by cyclic Jacobi rotations.

    Returns ``(eigenvalues, eigenvectors_as_columns, sweeps_used)``.
    """
    a = np.ascontiguousarray(a, dtype=np.float64)
    if _accel.USE_NUMBA:
        return jacobi_eigen_numba(a, tol, max_sweeps)
    return jacobi_eigen_numpy(a, tol, max_sweeps)
