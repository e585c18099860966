"""Barycentric interpolation of band-limited signals from 2P+1 samples.

The weights are samples of a windowed Lagrange weight function. Evaluating
that function at the nodes ``t = p*T`` makes the Gamma factors cancel against
the derivative of the node polynomial, which leaves

    w_p = (-1)**(P - p) * g(p*T) / T**(2P)

with ``g`` the unit-peak sinh-type pulse built in :func:`pulse`. The common
``T**(2P)`` factor is dropped and the weights are scaled to unit max modulus;
the interpolant is homogeneous of degree zero in the weights so neither
operation changes it.
"""

from dataclasses import dataclass

import numpy as np

from . import kernels

NODE_TOL = 1e-9  # relative to T


@dataclass(frozen=True)
class BaryKernel:
    """Precomputed barycentric weights for truncation ``P``, period ``T``,
    two-sided bandwidth ``B``."""

    P: int
    T: float
    B: float
    weights: np.ndarray

    @property
    def nodes(self):
        return np.arange(-self.P, self.P + 1) * self.T

    @property
    def eta(self):
        return NODE_TOL * self.T


@dataclass(frozen=True)
class InterpValue:
    value: complex
    d1: complex
    d2: complex


def _log_sinhc(y):
    # log(sinh(pi*y)/(pi*y)) for y >= 0 without overflow.
    x = np.pi * np.asarray(y, dtype=float)
    out = np.zeros_like(x)
    big = x > 1e-3
    xb = x[big]
    out[big] = xb + np.log1p(-np.exp(-2.0 * xb)) - np.log(2.0) - np.log(xb)
    xs = x[~big]
    out[~big] = np.log1p(xs * xs / 6.0)
    return out


def pulse(t_over_T, P, BT):
    """Window ``g`` evaluated at ``t/T`` for ``|t/T| <= P + 1``.

    ``sinc((1-BT)*sqrt((t/T)**2 - (P+1)**2)) / sinc(j*(1-BT)*(P+1))`` with
    the normalised sinc; inside the stencil the root is imaginary so both
    sincs become ``sinh(pi y)/(pi y)``.
    """
    r = np.asarray(t_over_T, dtype=float)
    a = 1.0 - BT
    y = a * np.sqrt(np.maximum((P + 1) ** 2 - r * r, 0.0))
    y0 = a * (P + 1)
    return np.exp(_log_sinhc(y) - _log_sinhc(np.array([y0]))[0])


def make_kernel(P, T, B):
    """Build the barycentric kernel for ``2P+1`` samples with period ``T``
    of a signal with two-sided bandwidth ``B``.

    Raises
    ------
    ValueError
        If ``P < 1``, if an argument is not finite, or if ``B*T >= 1``.
    """
    if int(P) != P or P < 1:
        raise ValueError(f"truncation index P must be a positive integer, got {P!r}")
    P = int(P)
    T = float(T)
    B = float(B)
    if not (np.isfinite(T) and np.isfinite(B)):
        raise ValueError("T and B must be finite")
    if T <= 0 or B < 0:
        raise ValueError(f"need T > 0 and B >= 0, got T={T}, B={B}")
    BT = B * T
    if BT >= 1.0:
        raise ValueError(f"Nyquist condition violated: B*T = {BT} >= 1")
    p = np.arange(-P, P + 1)
    sign = np.where((P - p) % 2 == 0, 1.0, -1.0)
    w = sign * pulse(p, P, BT)
    w = w / np.max(np.abs(w))
    w.setflags(write=False)
    return BaryKernel(P=P, T=T, B=B, weights=w)


def modulo_decompose(t, T):
    """Return ``(n, u)`` with ``t = n*T + u`` and ``n = floor(t/T + 1/2)``."""
    return kernels.decompose(float(t), float(T))


def interpolate(kernel, samples, u):
    """Interpolate the signal at ``n*T + u`` together with its first two
    derivatives.

    ``samples[i]`` holds ``s((n + i - P)*T)``, i.e. the samples are in
    increasing time order around the centre node ``n*T``.
    """
    samples = np.asarray(samples, dtype=complex)
    if samples.shape != (2 * kernel.P + 1,):
        raise ValueError(f"expected {2 * kernel.P + 1} samples, got shape {samples.shape}")
    if abs(u) > kernel.T / 2:
        raise ValueError(f"offset |u| = {abs(u)} exceeds T/2 = {kernel.T / 2}")
    if not np.all(np.isfinite(samples)):
        raise ValueError("samples must be finite")
    a0, a1, a2 = kernels.cardinal(kernel.weights, kernel.T, float(u), kernel.eta)
    return InterpValue(complex(a0 @ samples), complex(a1 @ samples), complex(a2 @ samples))


def error_spectrum(kernel, f_grid, u_grid):
    """Worst-case interpolation error of a pure tone ``exp(j 2 pi f t)`` over
    the offsets in ``u_grid``, for every ``f`` in ``f_grid``."""
    f_grid = np.atleast_1d(np.asarray(f_grid, dtype=float))
    u_grid = np.atleast_1d(np.asarray(u_grid, dtype=float))
    if f_grid.size == 0 or u_grid.size == 0:
        raise ValueError("grids must be non-empty")
    half_b = kernel.B / 2
    if np.any(np.abs(f_grid) > half_b * (1 + 1e-12)):
        raise ValueError(f"f_grid must lie in [-B/2, B/2] = [{-half_b}, {half_b}]")
    if np.any(np.abs(u_grid) > kernel.T / 2 * (1 + 1e-12)):
        raise ValueError("u_grid must lie in [-T/2, T/2]")
    u_grid = np.clip(u_grid, -kernel.T / 2, kernel.T / 2)

    # One cardinal vector per offset, reused for every tone.
    A = np.stack([kernels.cardinal(kernel.weights, kernel.T, u, kernel.eta)[0] for u in u_grid])
    tones = np.exp(2j * np.pi * np.outer(kernel.nodes, f_grid))  # (2P+1, nf)
    approx = A @ tones  # (nu, nf)
    exact = np.exp(2j * np.pi * np.outer(u_grid, f_grid))
    return np.abs(exact - approx).max(axis=0)
