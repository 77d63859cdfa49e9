"""Compiled inner loops for distribution iteration.

All kernels take the transpose of P in CSR form, so that row ``j`` lists
the incoming probabilities ``p_ij`` of state ``j`` and one step is
``y_j = sum_i x_i p_ij``. Sums use Neumaier compensation.
"""
import numpy as np
from numba import njit


@njit(cache=True)
def _step(indptr, indices, data, x, y):
    n = x.shape[0]
    for j in range(n):
        s = 0.0
        comp = 0.0
        for k in range(indptr[j], indptr[j + 1]):
            term = x[indices[k]] * data[k]
            t = s + term
            if abs(s) >= abs(term):
                comp += (s - t) + term
            else:
                comp += (term - t) + s
            s = t
        y[j] = s + comp


@njit(cache=True)
def _tv_uniform(x):
    n = x.shape[0]
    u = 1.0 / n
    s = 0.0
    comp = 0.0
    for i in range(n):
        term = abs(x[i] - u)
        t = s + term
        if s >= term:
            comp += (s - t) + term
        else:
            comp += (term - t) + s
        s = t
    return 0.5 * (s + comp)


@njit(cache=True)
def evolve_kernel(indptr, indices, data, x0, steps):
    x = x0.copy()
    y = np.empty_like(x)
    for _ in range(steps):
        _step(indptr, indices, data, x, y)
        x, y = y, x
    return x


@njit(cache=True)
def profile_kernel(indptr, indices, data, start, k_max, eps):
    """TV distance to uniform from a point mass, for k = 0..k_max.

    With ``eps >= 0`` iteration stops at the first k with d(k) <= eps; the
    returned array is then truncated to length k + 1.
    """
    n = indptr.shape[0] - 1
    x = np.zeros(n)
    x[start] = 1.0
    y = np.empty(n)
    out = np.empty(k_max + 1)
    out[0] = _tv_uniform(x)
    if eps >= 0.0 and out[0] <= eps:
        return out[:1]
    for k in range(1, k_max + 1):
        _step(indptr, indices, data, x, y)
        x, y = y, x
        out[k] = _tv_uniform(x)
        if eps >= 0.0 and out[k] <= eps:
            return out[: k + 1]
    return out


@njit(cache=True)
def first_hit_kernel(indptr, indices, data, start, eps, k_from, k_max):
    """First k >= k_from with d(k) <= eps, or -1 if none up to k_max.

    Distances before ``k_from`` are not evaluated.
    """
    n = indptr.shape[0] - 1
    x = np.zeros(n)
    x[start] = 1.0
    y = np.empty(n)
    k = 0
    while k < k_from:
        _step(indptr, indices, data, x, y)
        x, y = y, x
        k += 1
    while k <= k_max:
        if _tv_uniform(x) <= eps:
            return k
        _step(indptr, indices, data, x, y)
        x, y = y, x
        k += 1
    return -1
