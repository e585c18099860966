"""Maximum-likelihood frequency refinement.

The correlation ``c(f)`` is itself band-limited in ``f``: its "time" support
is the sample index range ``m1 .. m1+M-1`` with ``m1 = -ceil(M/2)``, so a
band centred on zero that holds it has two-sided width ``2*|m1|`` (``M`` for
even ``M``, ``M+1`` for odd ``M``), and its sampling period is the FFT bin
width. The FFT samples
can therefore be fed to the barycentric interpolator, and Newton's method on
the interpolated cost converges to the exact ML estimate from the coarse FFT
peak.

Two Newton objectives are available. ``"log"`` (default) iterates on
``log |c~|**2``, which has the same maximiser and is much closer to a
quadratic across the main lobe; ``"power"`` iterates on ``|c~|**2`` itself.
Both use the same interpolated value and derivatives, backtrack on any step
that lowers the cost, and clamp the iterate to one grid cell around the
coarse peak.
"""

from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Tuple, Union

import math

import numpy as np

from . import kernels
from .dft import coarse_peak, first_index, grid_frequencies, wrap_frequency
from .interp import make_kernel

MAX_HALVINGS = 30
COST_SLACK = 1e-12  # relative; cost changes below this are rounding
OBJECTIVES = ("log", "power")


DEFAULT_P = 8


def correlation_bandwidth(M):
    """Two-sided bandwidth ``2*|m1|`` of ``c(f)`` for ``M`` samples."""
    return -2 * first_index(M)


def auto_truncation(K, M):
    """Default truncation index for a length-``K`` grid of ``M`` samples.

    ``P = 8`` when ``B*T = 2|m1|/K <= 1/2`` (two-fold zero padding). With less
    padding the interpolation error ``exp(-pi (1 - BT) P)`` grows, so ``P`` is
    raised to keep ``(1 - BT) * P`` at the value it has for ``P = 8, BT = 1/2``.
    """
    BT = correlation_bandwidth(M) / K
    if BT <= 0.5:
        return DEFAULT_P
    return max(DEFAULT_P, int(math.ceil(DEFAULT_P * 0.5 / (1.0 - BT) - 1e-9)))


@dataclass(frozen=True)
class NewtonConfig:
    """Newton refinement settings.

    ``P`` is the truncation index for the first (or only) axis and ``P2`` for
    the second; ``P2`` defaults to ``P``, and ``None`` on an axis selects
    :func:`auto_truncation` for that axis. Iterations stop once a Newton step
    is below ``grad_tol * delta_f``; steps are clamped to
    ``step_clamp * delta_f``.
    """

    P: Optional[int] = None
    P2: Optional[int] = None
    max_iters: int = 12
    grad_tol: float = 1e-10
    step_clamp: float = 1.0
    objective: str = "log"

    def __post_init__(self):
        for name in ("P", "P2"):
            v = getattr(self, name)
            if v is not None and (int(v) != v or v < 1):
                raise ValueError(f"{name} must be a positive integer or None, got {v!r}")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if not self.grad_tol > 0:
            raise ValueError("grad_tol must be > 0")
        if not self.step_clamp > 0:
            raise ValueError("step_clamp must be > 0")
        if self.objective not in OBJECTIVES:
            raise ValueError(f"objective must be one of {OBJECTIVES}, got {self.objective!r}")

    def truncation(self, axis, K, M):
        """Truncation index used on ``axis`` (0 or 1) for a ``K``-point grid of
        ``M`` samples."""
        P = self.P if axis == 0 or self.P2 is None else self.P2
        return auto_truncation(K, M) if P is None else int(P)


@dataclass(frozen=True)
class Estimate:
    """Refined frequency (or pair), cost ``|c~|**2`` there, Newton steps taken,
    convergence flag and the coarse FFT peak it started from."""

    freqs: Union[float, Tuple[float, float]]
    cost: float
    iters: int
    converged: bool
    coarse_index: Union[int, Tuple[int, int]]
    coarse_freqs: Union[float, Tuple[float, float]]


@lru_cache(maxsize=64)
def surface_kernel(P, K, M):
    """Kernel for interpolating a length-``K`` correlation grid of ``M`` samples."""
    return make_kernel(P, 1.0 / K, correlation_bandwidth(M))


def interp_cost_1d(surface, kernel, f):
    """Interpolated cost ``|c~|**2`` and its first two derivatives at ``f``.

    The derivatives are returned as ``(2/M) Re(c' conj(c))`` and
    ``(2/M) (Re(c'' conj(c)) + |c'|**2)``, i.e. the true derivatives of
    ``|c~|**2`` divided by ``M``; Newton steps do not depend on that scale.
    """
    c, c1, c2 = kernels.cost_terms_1d(surface.c_samples, kernel.weights, kernel.T, float(f), kernel.eta)
    scale = 2.0 / surface.M
    L = c.real * c.real + c.imag * c.imag
    L1 = scale * (c1 * c.conjugate()).real
    L2 = scale * ((c2 * c.conjugate()).real + c1.real * c1.real + c1.imag * c1.imag)
    return L, L1, L2


def _newton_step_1d(L, L1, L2, M, objective, clamp):
    if objective == "power":
        num, curv = L1, L2
    else:
        # d/df log L = M*L1/L and d2/df2 log L = (M*L2*L - (M*L1)**2) / L**2,
        # both rescaled by L/M
        num, curv = L1 * L, L2 * L - M * L1 * L1
    if not np.isfinite(num) or not np.isfinite(curv):
        return np.nan
    if curv < 0:
        return -num / curv
    # Not concave here (a noisy cost can be locally convex at the grid peak):
    # a Newton step would point downhill, so take a full clamped move uphill.
    return float(np.sign(num)) * clamp


def refine_1d(surface, config=NewtonConfig()):
    """Newton ascent on the interpolated cost, started at the coarse peak.

    ``iters`` counts Newton steps computed, including the final one that
    falls below tolerance. ``converged`` requires that stop and a negative
    second derivative of the cost at the returned frequency.
    """
    K = surface.K
    df = surface.delta_f
    M = surface.M
    kernel = surface_kernel(config.truncation(0, K, M), K, M)
    k0 = coarse_peak(surface)
    f0 = float(grid_frequencies(K)[k0])
    clamp = config.step_clamp * df
    lo, hi = f0 - clamp, f0 + clamp

    f = f0
    L, L1, L2 = interp_cost_1d(surface, kernel, f)
    done = False
    iters = 0
    for iters in range(1, config.max_iters + 1):
        step = _newton_step_1d(L, L1, L2, M, config.objective, clamp)
        if not np.isfinite(step):
            break
        if abs(step) < config.grad_tol * df:
            f = min(max(f + step, lo), hi)
            L, L1, L2 = interp_cost_1d(surface, kernel, f)
            done = True
            break
        step = min(max(step, -clamp), clamp)
        for _ in range(MAX_HALVINGS):
            f_new = min(max(f + step, lo), hi)
            trial = interp_cost_1d(surface, kernel, f_new)
            if trial[0] >= L * (1.0 - COST_SLACK):
                break
            step *= 0.5
        f = f_new
        L, L1, L2 = trial
    return Estimate(
        freqs=wrap_frequency(f),
        cost=float(L),
        iters=iters,
        converged=bool(done and L2 < 0),
        coarse_index=k0,
        coarse_freqs=f0,
    )


def interp_cost_2d(surface, kernels_pair, f1, f2):
    """Interpolated 2-D cost with gradient and Hessian, both divided by ``M*N``."""
    k1, k2 = kernels_pair
    c, g1, g2, h11, h12, h22 = kernels.cost_terms_2d(
        surface.c_samples, k1.weights, k2.weights, k1.T, k2.T, float(f1), float(f2), k1.eta, k2.eta
    )
    scale = 2.0 / (surface.M * surface.N)
    cc = c.conjugate()
    L = (c * cc).real
    grad = scale * np.array([(g1 * cc).real, (g2 * cc).real])
    H = np.empty((2, 2))
    H[0, 0] = scale * ((h11 * cc).real + (g1 * g1.conjugate()).real)
    H[1, 1] = scale * ((h22 * cc).real + (g2 * g2.conjugate()).real)
    H[0, 1] = H[1, 0] = scale * ((h12 * cc).real + (g1 * g2.conjugate()).real)
    return L, grad, H


def surface_kernels_2d(surface, config):
    K1, K2 = surface.c_samples.shape
    return (
        surface_kernel(config.truncation(0, K1, surface.M), K1, surface.M),
        surface_kernel(config.truncation(1, K2, surface.N), K2, surface.N),
    )


def _newton_step_2d(L, g, H, MN, objective, clamps):
    if objective == "log":
        # g and H are divided by MN while L is not
        r = MN / L
        g = r * g
        H = r * H - np.outer(g, g)
    det = H[0, 0] * H[1, 1] - H[0, 1] * H[1, 0]
    scale = abs(H[0, 0] * H[1, 1]) + H[0, 1] * H[0, 1]
    if not np.isfinite(det) or abs(det) <= 1e-300 * scale:
        return None
    if H[0, 0] < 0 and det > 0:
        s1 = -(H[1, 1] * g[0] - H[0, 1] * g[1]) / det
        s2 = -(H[0, 0] * g[1] - H[1, 0] * g[0]) / det
        return s1, s2
    # Not locally concave (far out on the diagonal of the peak the product of
    # two concave lobes is not jointly concave): per-axis Newton steps, or a
    # full clamped move uphill on an axis that is not concave either.
    s1 = -g[0] / H[0, 0] if H[0, 0] < 0 else np.sign(g[0]) * clamps[0]
    s2 = -g[1] / H[1, 1] if H[1, 1] < 0 else np.sign(g[1]) * clamps[1]
    return s1, s2


def refine_2d(surface, config=NewtonConfig()):
    """2-D Newton ascent from the coarse peak with per-axis step clamping.

    A (numerically) singular Hessian stops the iteration and the last iterate
    is returned with ``converged=False``.
    """
    K1, K2 = surface.c_samples.shape
    d1, d2 = surface.delta_f1, surface.delta_f2
    MN = surface.M * surface.N
    kp = surface_kernels_2d(surface, config)
    k0 = coarse_peak(surface)
    f0 = (float(grid_frequencies(K1)[k0[0]]), float(grid_frequencies(K2)[k0[1]]))
    c1, c2 = config.step_clamp * d1, config.step_clamp * d2
    box = (f0[0] - c1, f0[0] + c1, f0[1] - c2, f0[1] + c2)

    def clip(a, b):
        return min(max(a, box[0]), box[1]), min(max(b, box[2]), box[3])

    f1, f2 = f0
    L, g, H = interp_cost_2d(surface, kp, f1, f2)
    done = False
    iters = 0
    for iters in range(1, config.max_iters + 1):
        step = _newton_step_2d(L, g, H, MN, config.objective, (c1, c2))
        if step is None:
            break
        s1, s2 = step
        if max(abs(s1) / d1, abs(s2) / d2) < config.grad_tol:
            f1, f2 = clip(f1 + s1, f2 + s2)
            L, g, H = interp_cost_2d(surface, kp, f1, f2)
            done = True
            break
        s1 = min(max(s1, -c1), c1)
        s2 = min(max(s2, -c2), c2)
        for _ in range(MAX_HALVINGS):
            n1, n2 = clip(f1 + s1, f2 + s2)
            trial = interp_cost_2d(surface, kp, n1, n2)
            if trial[0] >= L * (1.0 - COST_SLACK):
                break
            s1 *= 0.5
            s2 *= 0.5
        f1, f2 = n1, n2
        L, g, H = trial
    negdef = H[0, 0] < 0 and H[0, 0] * H[1, 1] - H[0, 1] * H[1, 0] > 0
    return Estimate(
        freqs=(wrap_frequency(f1), wrap_frequency(f2)),
        cost=float(L),
        iters=iters,
        converged=bool(done and negdef),
        coarse_index=k0,
        coarse_freqs=f0,
    )
