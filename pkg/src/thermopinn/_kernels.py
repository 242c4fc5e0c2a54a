"""JIT-compiled elementwise kernels for the jet engine.

Jets travel through the network as flat (6n, width) float64 arrays: six
row blocks of n points each, ordered value, d/dx, d/dy, d2/dx2, d2/dxdy,
d2/dy2. The kernels below apply the tanh chain rule and its adjoint over
that layout in a single fused pass; loop order is fixed, so results are
deterministic.
"""

import math

import numpy as np
from numba import njit


@njit(cache=True)
def tanh_jet_forward(s, out, t, n):
    """Compose tanh with incoming jets: s, out are (6n, w); t (n, w) caches tanh."""
    w = s.shape[1]
    for i in range(n):
        for j in range(w):
            v = math.tanh(s[i, j])
            d1 = 1.0 - v * v
            d2 = -2.0 * v * d1
            s1 = s[n + i, j]
            s2 = s[2 * n + i, j]
            t[i, j] = v
            out[i, j] = v
            out[n + i, j] = d1 * s1
            out[2 * n + i, j] = d1 * s2
            out[3 * n + i, j] = d2 * s1 * s1 + d1 * s[3 * n + i, j]
            out[4 * n + i, j] = d2 * s1 * s2 + d1 * s[4 * n + i, j]
            out[5 * n + i, j] = d2 * s2 * s2 + d1 * s[5 * n + i, j]


@njit(cache=True)
def tanh_jet_backward(s, t, obar, sbar, n):
    """Adjoint of tanh_jet_forward: map output-jet adjoints to pre-activation ones."""
    w = s.shape[1]
    for i in range(n):
        for j in range(w):
            v = t[i, j]
            d1 = 1.0 - v * v
            d2 = -2.0 * v * d1
            d3 = -2.0 * d1 * d1 - 2.0 * v * d2
            s1 = s[n + i, j]
            s2 = s[2 * n + i, j]
            o0 = obar[i, j]
            o1 = obar[n + i, j]
            o2 = obar[2 * n + i, j]
            o3 = obar[3 * n + i, j]
            o4 = obar[4 * n + i, j]
            o5 = obar[5 * n + i, j]
            sbar[i, j] = (
                o0 * d1
                + o1 * d2 * s1
                + o2 * d2 * s2
                + o3 * (d3 * s1 * s1 + d2 * s[3 * n + i, j])
                + o4 * (d3 * s1 * s2 + d2 * s[4 * n + i, j])
                + o5 * (d3 * s2 * s2 + d2 * s[5 * n + i, j])
            )
            sbar[n + i, j] = o1 * d1 + 2.0 * o3 * d2 * s1 + o4 * d2 * s2
            sbar[2 * n + i, j] = o2 * d1 + o4 * d2 * s1 + 2.0 * o5 * d2 * s2
            sbar[3 * n + i, j] = o3 * d1
            sbar[4 * n + i, j] = o4 * d1
            sbar[5 * n + i, j] = o5 * d1


@njit(cache=True)
def all_finite(a):
    for v in a.flat:
        if not np.isfinite(v):
            return False
    return True
