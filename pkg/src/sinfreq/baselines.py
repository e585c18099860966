"""Reference points for the ML estimator: a rank-one subspace estimator and
the Cramer-Rao bound."""

from dataclasses import dataclass

import numpy as np

from .dft import SignalFrame, correlation_surface_1d
from .estimator import Estimate, NewtonConfig, refine_1d


class SvdNotConverged(RuntimeError):
    pass


@dataclass(frozen=True)
class SubspaceVectors:
    u1: np.ndarray
    v1: np.ndarray
    sigma1: float
    iters: int


@dataclass(frozen=True)
class CrbReport:
    var_f1: float
    var_f2: float
    snr_linear: float
    M: int
    N: int


def dominant_svd(Z, tol=1e-10, max_iters=10_000, seed=0):
    """Leading singular triplet of ``Z`` by alternating power iteration.

    Starts from the normalised all-ones vector and alternates
    ``v <- Z^H u / |.|``, ``u <- Z v / |.|``. Stops when ``sigma`` changes by
    less than ``tol*sigma`` between sweeps and ``|Z^H u - sigma v| <= tol*sigma``
    (``Z v = sigma u`` holds exactly after each sweep by construction).
    A start vector with no component along the dominant pair is replaced by a
    seeded random one.

    Raises
    ------
    ValueError
        If ``Z`` is all zero.
    SvdNotConverged
        If ``max_iters`` sweeps do not meet the tolerance.
    """
    Z = np.asarray(Z, dtype=complex)
    if Z.ndim != 2:
        raise ValueError("Z must be a matrix")
    if not np.any(Z):
        raise ValueError("Z is identically zero")
    M, N = Z.shape
    ZH = Z.conj().T
    v = np.full(N, 1.0 / np.sqrt(N), dtype=complex)
    x = Z @ v
    if np.linalg.norm(x) <= 1e-14 * np.linalg.norm(Z):
        rng = np.random.default_rng(seed)
        v = rng.standard_normal(N) + 1j * rng.standard_normal(N)
        v /= np.linalg.norm(v)
        x = Z @ v
    sigma = np.linalg.norm(x)
    u = x / sigma
    resid = np.inf
    for it in range(1, max_iters + 1):
        y = ZH @ u
        v = y / np.linalg.norm(y)
        x = Z @ v
        new_sigma = np.linalg.norm(x)
        u = x / new_sigma
        resid = np.linalg.norm(ZH @ u - new_sigma * v)
        if abs(new_sigma - sigma) <= tol * new_sigma and resid <= tol * new_sigma:
            return SubspaceVectors(u1=u, v1=v, sigma1=float(new_sigma), iters=it)
        sigma = new_sigma
    raise SvdNotConverged(
        f"power iteration did not converge in {max_iters} sweeps "
        f"(residual |Z^H u - sigma v| / sigma = {resid / sigma:.3e}, tol = {tol:.1e})"
    )


def subspace_estimate(frame, config=NewtonConfig(), K1=None, K2=None, svd_tol=1e-10, svd_max_iters=10_000):
    """Estimate ``(f1, f2)`` by running the 1-D ML estimator on the leading
    left and right singular vectors of the data matrix.

    With ``Z = U S V^H`` a rank-one ``Z[m, n] = a(m) b(n)`` has ``v1`` parallel
    to ``conj(b)``, so the second axis is estimated from ``conj(v1)``.
    Returns the per-axis 1-D estimates with ``iters`` summed, ``converged``
    true only if both axes converged, and ``cost`` the sum of the two 1-D
    costs.
    """
    if frame.dims != 2:
        raise ValueError("subspace_estimate needs a 2-D frame")
    sv = dominant_svd(frame.data, tol=svd_tol, max_iters=svd_max_iters)
    e1 = refine_1d(correlation_surface_1d(SignalFrame(sv.u1), K1), config)
    e2 = refine_1d(correlation_surface_1d(SignalFrame(sv.v1.conj()), K2), config)
    return Estimate(
        freqs=(e1.freqs, e2.freqs),
        cost=e1.cost + e2.cost,
        iters=e1.iters + e2.iters,
        converged=e1.converged and e2.converged,
        coarse_index=(e1.coarse_index, e2.coarse_index),
        coarse_freqs=(e1.coarse_freqs, e2.coarse_freqs),
    )


def crb(M, N, snr_linear):
    """Cramer-Rao bound on ``f1`` and ``f2`` (cycles/sample squared) for a
    2-D complex exponential with unknown complex amplitude in circular white
    noise of known variance, ``snr_linear = |a|**2 / sigma**2``.

    For the 1-D problem the bound on ``f1`` alone is ``crb(M, N, snr).var_f1 * N``.
    """
    if M < 2 or N < 2:
        raise ValueError(f"need M >= 2 and N >= 2, got M={M}, N={N}")
    if not snr_linear > 0 or not np.isfinite(snr_linear):
        raise ValueError(f"snr must be positive and finite, got {snr_linear}")
    k = 6.0 / ((2 * np.pi) ** 2 * snr_linear)
    var_f1 = k / (N * M * (M * M - 1))
    var_f2 = k / (M * N * (N * N - 1))
    return CrbReport(var_f1=var_f1, var_f2=var_f2, snr_linear=float(snr_linear), M=int(M), N=int(N))


def crb_1d(M, snr_linear):
    """Cramer-Rao bound on the frequency of a 1-D complex exponential."""
    if M < 2:
        raise ValueError(f"need M >= 2, got M={M}")
    if not snr_linear > 0 or not np.isfinite(snr_linear):
        raise ValueError(f"snr must be positive and finite, got {snr_linear}")
    return 6.0 / ((2 * np.pi) ** 2 * snr_linear * M * (M * M - 1))
