"""Zero-padded DFT samples of the correlation between the data and a probe
exponential, on power-of-two frequency grids."""

from dataclasses import dataclass
from typing import Optional

import numpy as np


MIN_OVERSAMPLING = 1.5
# Tiny frames get extra padding by default: at K=64 the FFT is still free,
# and the interpolated cost of a short frame is then accurate to well below
# 1e-7 in frequency with the default truncation.
MIN_DEFAULT_FFT = 64


class DegenerateInput(ValueError):
    """Raised when a surface carries no information (all zero)."""


def first_index(M):
    """Symmetric start index ``-ceil(M/2)``."""
    return -((M + 1) // 2)


def default_fft_size(M):
    """Smallest power of two that is at least ``1.5*M`` and at least 64.

    For M=500 and M=651 both give 1024 (oversampling 2.048 and 1.573).
    """
    return max(MIN_DEFAULT_FFT, 1 << int(np.ceil(np.log2(MIN_OVERSAMPLING * M))))


def is_power_of_two(K):
    return K >= 1 and (K & (K - 1)) == 0


@dataclass(frozen=True)
class SignalFrame:
    """Complex samples ``data[i]`` taken at instant ``m1 + i`` (and ``n1 + j``
    along the second axis of a 2-D frame)."""

    data: np.ndarray

    def __post_init__(self):
        data = np.asarray(self.data, dtype=complex)
        if data.ndim not in (1, 2):
            raise ValueError(f"frame must be 1-D or 2-D, got ndim={data.ndim}")
        if min(data.shape) < 2:
            raise ValueError(f"each axis needs at least 2 samples, got shape {data.shape}")
        object.__setattr__(self, "data", data)

    @property
    def dims(self):
        return self.data.ndim

    @property
    def M(self):
        return self.data.shape[0]

    @property
    def N(self) -> Optional[int]:
        return self.data.shape[1] if self.data.ndim == 2 else None

    @property
    def m1(self):
        return first_index(self.M)

    @property
    def n1(self):
        return first_index(self.N) if self.N is not None else None


@dataclass(frozen=True)
class CostSurface1D:
    c_samples: np.ndarray
    m1: int
    M: int

    @property
    def K(self):
        return self.c_samples.shape[0]

    @property
    def delta_f(self):
        return 1.0 / self.K


@dataclass(frozen=True)
class CostSurface2D:
    c_samples: np.ndarray
    m1: int
    n1: int
    M: int
    N: int

    @property
    def delta_f1(self):
        return 1.0 / self.c_samples.shape[0]

    @property
    def delta_f2(self):
        return 1.0 / self.c_samples.shape[1]


def grid_frequencies(K):
    """Frequency of each bin of a length-``K`` grid, mapped to ``[-1/2, 1/2[``."""
    k = np.arange(K)
    return np.where(k < K // 2, k, k - K) / K


def wrap_frequency(f):
    """Map ``f`` to ``[-1/2, 1/2[``."""
    g = f - np.floor(f + 0.5)
    return float(g) if np.ndim(g) == 0 else g


def _check_size(K, M, axis=""):
    if not isinstance(K, (int, np.integer)) or not is_power_of_two(int(K)):
        raise ValueError(f"FFT size{axis} must be a power of two, got {K!r}")
    if K < MIN_OVERSAMPLING * M:
        raise ValueError(
            f"FFT size{axis} K={K} is below {MIN_OVERSAMPLING:g}*M={MIN_OVERSAMPLING * M:g}; "
            "the zero padding must oversample the cost function to bracket its peak"
        )
    return int(K)


def _shift_phase(K, first):
    # Undo the 0-based FFT origin: data[i] sits at instant first + i.
    return np.exp(-2j * np.pi * np.arange(K) * first / K)


def correlation_surface_1d(frame, K=None):
    """Sample ``c(f) = sum_m z(m) exp(-j 2 pi f m)`` at ``f = k/K``."""
    if frame.dims != 1:
        raise ValueError("correlation_surface_1d needs a 1-D frame")
    M = frame.M
    K = default_fft_size(M) if K is None else _check_size(K, M)
    c = np.fft.fft(frame.data, K) * _shift_phase(K, frame.m1)
    c.setflags(write=False)
    return CostSurface1D(c_samples=c, m1=frame.m1, M=M)


def correlation_surface_2d(frame, K1=None, K2=None):
    """2-D analogue of :func:`correlation_surface_1d` on a ``K1 x K2`` grid."""
    if frame.dims != 2:
        raise ValueError("correlation_surface_2d needs a 2-D frame")
    M, N = frame.data.shape
    K1 = default_fft_size(M) if K1 is None else _check_size(K1, M, " (axis 1)")
    K2 = default_fft_size(N) if K2 is None else _check_size(K2, N, " (axis 2)")
    c = np.fft.fft2(frame.data, s=(K1, K2))
    c *= _shift_phase(K1, frame.m1)[:, None]
    c *= _shift_phase(K2, frame.n1)[None, :]
    c.setflags(write=False)
    return CostSurface2D(c_samples=c, m1=frame.m1, n1=frame.n1, M=M, N=N)


def coarse_peak(surface):
    """Grid index of the largest ``|c|**2``.

    Exact ties go to the lowest frequency after mapping to ``[-1/2, 1/2[``
    (lexicographically on ``(f1, f2)`` for 2-D surfaces).
    """
    power = np.abs(surface.c_samples) ** 2
    peak = power.max()
    if not peak > 0:
        raise DegenerateInput("correlation surface is identically zero")
    hits = np.argwhere(power == peak)
    if power.ndim == 1:
        K = power.shape[0]
        freqs = grid_frequencies(K)[hits[:, 0]]
        return int(hits[np.argmin(freqs), 0])
    f1 = grid_frequencies(power.shape[0])[hits[:, 0]]
    f2 = grid_frequencies(power.shape[1])[hits[:, 1]]
    best = np.lexsort((f2, f1))[0]
    return int(hits[best, 0]), int(hits[best, 1])


def direct_correlation_1d(data, m1, freqs):
    """Directly summed ``c(f)`` at arbitrary frequencies (O(M) per point)."""
    m = m1 + np.arange(len(data))
    freqs = np.atleast_1d(np.asarray(freqs, dtype=float))
    return np.exp(-2j * np.pi * np.outer(freqs, m)) @ data


def direct_correlation_2d(data, m1, n1, f1, f2):
    """Directly summed ``c(f1, f2)`` on the tensor grid ``f1 x f2``."""
    M, N = data.shape
    E1 = np.exp(-2j * np.pi * np.outer(np.atleast_1d(f1), m1 + np.arange(M)))
    E2 = np.exp(-2j * np.pi * np.outer(n1 + np.arange(N), np.atleast_1d(f2)))
    return E1 @ data @ E2
