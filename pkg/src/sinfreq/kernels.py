"""Inner loops of the estimator.

Every kernel exists twice: a vectorised numpy version (``*_np``) and a loop
version compiled with numba (``*_nb``). The public names bound at the bottom
of the module point at one or the other according to ``_accel.USE_NUMBA``.

All kernels work on a symmetric stencil of ``2P+1`` nodes ``x_p = p*T``,
``p = -P..P``, ordered by increasing ``p``.
"""

import numpy as np

from ._accel import USE_NUMBA, njit

__all__ = [
    "cardinal",
    "cost_terms_1d",
    "cost_terms_2d",
    "decompose",
    "USE_NUMBA",
]


def decompose(t, T):
    """Split ``t`` into ``n*T + u`` with ``n = floor(t/T + 1/2)``."""
    n = int(np.floor(t / T + 0.5))
    return n, t - n * T


# --------------------------------------------------------------------------
# numpy versions
# --------------------------------------------------------------------------


def _cardinal_np(w, T, u, eta):
    P = (w.shape[0] - 1) // 2
    x = np.arange(-P, P + 1) * T
    i = min(max(int(np.floor(u / T + 0.5)) + P, 0), 2 * P)
    d = u - x[i]
    if abs(d) < eta:
        d = 0.0
    # Cardinal functions written relative to the nearest node i:
    #   a_i = w_i / D,  a_j = d * e_j / D,  D = w_i + d * sum_{j != i} e_j,
    # with e_j = w_j / (u - x_j). No term blows up as d -> 0, and d = 0
    # gives the barycentric differentiation-matrix rows exactly.
    r = (x[i] - x) + d
    r[i] = 1.0
    e0 = w / r
    e0[i] = 0.0
    e1 = -e0 / r
    e2 = -2.0 * e1 / r
    S0 = e0.sum()
    S1 = e1.sum()
    S2 = e2.sum()
    D0 = w[i] + d * S0
    D1 = S0 + d * S1
    D2 = 2.0 * S1 + d * S2
    n0 = d * e0
    n1 = e0 + d * e1
    n2 = 2.0 * e1 + d * e2
    n0[i] = w[i]
    n1[i] = 0.0
    n2[i] = 0.0
    a0 = n0 / D0
    a1 = (n1 - a0 * D1) / D0
    a2 = (n2 - 2.0 * a1 * D1 - a0 * D2) / D0
    return a0, a1, a2


def _cost_terms_1d_np(c, w, T, f, eta):
    K = c.shape[0]
    P = (w.shape[0] - 1) // 2
    n, u = decompose(f, T)
    a0, a1, a2 = _cardinal_np(w, T, u, eta)
    s = c[(n + np.arange(-P, P + 1)) % K]
    return a0 @ s, a1 @ s, a2 @ s


def _cost_terms_2d_np(C, w1, w2, T1, T2, f1, f2, eta1, eta2):
    K1, K2 = C.shape
    P1 = (w1.shape[0] - 1) // 2
    P2 = (w2.shape[0] - 1) // 2
    n1, u1 = decompose(f1, T1)
    n2, u2 = decompose(f2, T2)
    a = _cardinal_np(w1, T1, u1, eta1)
    b = _cardinal_np(w2, T2, u2, eta2)
    rows = (n1 + np.arange(-P1, P1 + 1)) % K1
    cols = (n2 + np.arange(-P2, P2 + 1)) % K2
    S = C[np.ix_(rows, cols)]
    R = S @ np.stack(b, axis=1)  # columns: b0, b1, b2
    c = a[0] @ R[:, 0]
    g1 = a[1] @ R[:, 0]
    g2 = a[0] @ R[:, 1]
    h11 = a[2] @ R[:, 0]
    h12 = a[1] @ R[:, 1]
    h22 = a[0] @ R[:, 2]
    return c, g1, g2, h11, h12, h22


# --------------------------------------------------------------------------
# numba versions
# --------------------------------------------------------------------------


@njit(cache=True)
def _cardinal_nb(w, T, u, eta):
    L = w.shape[0]
    P = (L - 1) // 2
    i = min(max(int(np.floor(u / T + 0.5)) + P, 0), L - 1)
    d = u - (i - P) * T
    if abs(d) < eta:
        d = 0.0
    a0 = np.empty(L)
    a1 = np.empty(L)
    a2 = np.empty(L)
    S0 = 0.0
    S1 = 0.0
    S2 = 0.0
    for j in range(L):
        if j == i:
            continue
        r = (i - j) * T + d
        e0 = w[j] / r
        e1 = -e0 / r
        e2 = -2.0 * e1 / r
        a0[j] = d * e0
        a1[j] = e0 + d * e1
        a2[j] = 2.0 * e1 + d * e2
        S0 += e0
        S1 += e1
        S2 += e2
    a0[i] = w[i]
    a1[i] = 0.0
    a2[i] = 0.0
    D0 = w[i] + d * S0
    D1 = S0 + d * S1
    D2 = 2.0 * S1 + d * S2
    for j in range(L):
        v0 = a0[j] / D0
        v1 = (a1[j] - v0 * D1) / D0
        a2[j] = (a2[j] - 2.0 * v1 * D1 - v0 * D2) / D0
        a1[j] = v1
        a0[j] = v0
    return a0, a1, a2


@njit(cache=True)
def _cost_terms_1d_nb(c, w, T, f, eta):
    K = c.shape[0]
    P = (w.shape[0] - 1) // 2
    n = int(np.floor(f / T + 0.5))
    u = f - n * T
    a0, a1, a2 = _cardinal_nb(w, T, u, eta)
    v0 = 0j
    v1 = 0j
    v2 = 0j
    for p in range(2 * P + 1):
        s = c[(n + p - P) % K]
        v0 += a0[p] * s
        v1 += a1[p] * s
        v2 += a2[p] * s
    return v0, v1, v2


@njit(cache=True)
def _cost_terms_2d_nb(C, w1, w2, T1, T2, f1, f2, eta1, eta2):
    K1, K2 = C.shape
    P1 = (w1.shape[0] - 1) // 2
    P2 = (w2.shape[0] - 1) // 2
    n1 = int(np.floor(f1 / T1 + 0.5))
    n2 = int(np.floor(f2 / T2 + 0.5))
    a0, a1, a2 = _cardinal_nb(w1, T1, f1 - n1 * T1, eta1)
    b0, b1, b2 = _cardinal_nb(w2, T2, f2 - n2 * T2, eta2)
    c = 0j
    g1 = 0j
    g2 = 0j
    h11 = 0j
    h12 = 0j
    h22 = 0j
    for p in range(2 * P1 + 1):
        row = (n1 + p - P1) % K1
        r0 = 0j
        r1 = 0j
        r2 = 0j
        for q in range(2 * P2 + 1):
            s = C[row, (n2 + q - P2) % K2]
            r0 += b0[q] * s
            r1 += b1[q] * s
            r2 += b2[q] * s
        c += a0[p] * r0
        g1 += a1[p] * r0
        g2 += a0[p] * r1
        h11 += a2[p] * r0
        h12 += a1[p] * r1
        h22 += a0[p] * r2
    return c, g1, g2, h11, h12, h22


if USE_NUMBA:
    cardinal = _cardinal_nb
    cost_terms_1d = _cost_terms_1d_nb
    cost_terms_2d = _cost_terms_2d_nb
else:
    cardinal = _cardinal_np
    cost_terms_1d = _cost_terms_1d_np
    cost_terms_2d = _cost_terms_2d_np
