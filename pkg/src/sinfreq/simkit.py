"""Test-signal synthesis and Monte-Carlo experiments.

Every trial draws its noise from its own Philox stream keyed by
``(seed, snr_index, trial)``, so results do not depend on which methods run,
on the order trials are executed in, or on the number of worker processes.
"""

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Optional, Tuple

import numpy as np

from . import baselines
from .dft import (
    SignalFrame,
    coarse_peak,
    correlation_surface_1d,
    correlation_surface_2d,
    direct_correlation_1d,
    direct_correlation_2d,
    first_index,
    wrap_frequency,
)
from .estimator import NewtonConfig, interp_cost_1d, interp_cost_2d, refine_1d, refine_2d, surface_kernel

METHODS = ("ml", "subspace")
REFERENCE_FREQS = (0.234452, -0.143254)
_MASK64 = (1 << 64) - 1


def trial_rng(seed, snr_index, trial):
    """Independent generator for one trial of one SNR point."""
    key = np.array([seed & _MASK64, ((snr_index & 0xFFFFFFFF) << 32) | (trial & 0xFFFFFFFF)], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def noise_variance(snr_db):
    """Noise power for a unit-amplitude exponential at ``snr_db``."""
    return 0.0 if math.isinf(snr_db) and snr_db > 0 else 10.0 ** (-snr_db / 10.0)


def synthesize(dims, M, N, f_true, snr_db, rng):
    """Unit-amplitude complex exponential on the symmetric index grid plus
    circular white Gaussian noise of variance ``10**(-snr_db/10)``."""
    if dims == 1:
        m = first_index(M) + np.arange(M)
        f = f_true[0] if isinstance(f_true, (tuple, list)) else f_true
        clean = np.exp(2j * np.pi * f * m)
    elif dims == 2:
        if N is None:
            raise ValueError("2-D synthesis needs N")
        f1, f2 = f_true
        m = first_index(M) + np.arange(M)
        n = first_index(N) + np.arange(N)
        clean = np.exp(2j * np.pi * f1 * m)[:, None] * np.exp(2j * np.pi * f2 * n)[None, :]
    else:
        raise ValueError(f"dims must be 1 or 2, got {dims}")
    var = noise_variance(snr_db)
    if var > 0:
        w = rng.standard_normal((2,) + clean.shape)
        clean = clean + math.sqrt(var / 2.0) * (w[0] + 1j * w[1])
    return SignalFrame(clean)


@dataclass(frozen=True)
class TrialConfig:
    dims: int = 2
    M: int = 64
    N: Optional[int] = 64
    f_true: Tuple[float, ...] = REFERENCE_FREQS
    snr_db_grid: Tuple[float, ...] = (5.0,)
    trials_per_point: int = 500
    rng_seed: int = 0
    newton: NewtonConfig = NewtonConfig()
    methods: Tuple[str, ...] = ("ml",)
    K: Optional[Tuple[int, ...]] = None
    workers: int = 1

    def __post_init__(self):
        if self.dims not in (1, 2):
            raise ValueError("dims must be 1 or 2")
        if self.trials_per_point < 1:
            raise ValueError("trials_per_point must be >= 1")
        f = tuple(float(x) for x in np.atleast_1d(self.f_true))
        if len(f) < self.dims:
            raise ValueError(f"need {self.dims} true frequencies, got {len(f)}")
        f = f[: self.dims]
        if any(not -0.5 <= x < 0.5 for x in f):
            raise ValueError(f"true frequencies must lie in [-1/2, 1/2[, got {f}")
        object.__setattr__(self, "f_true", f)
        object.__setattr__(self, "snr_db_grid", tuple(float(s) for s in self.snr_db_grid))
        bad = set(self.methods) - set(METHODS)
        if bad or not self.methods:
            raise ValueError(f"methods must be a non-empty subset of {METHODS}, got {self.methods}")
        if self.dims == 1 and "subspace" in self.methods:
            raise ValueError("the subspace method needs 2-D data")
        if self.dims == 2 and self.N is None:
            raise ValueError("2-D configs need N")
        if self.dims == 1:
            object.__setattr__(self, "N", None)


@dataclass(frozen=True)
class TrialRecord:
    snr_db: float
    trial: int
    method: str
    estimate: Tuple[float, ...]
    sq_err: Tuple[float, ...]
    iters: int
    converged: bool
    error: Optional[str] = None


@dataclass(frozen=True)
class SummaryRow:
    snr_db: float
    method: str
    rmse_f1: float
    rmse_f2: Optional[float]
    crb_rms_f1: float
    crb_rms_f2: Optional[float]
    mean_iters: float
    failures: int
    trials: int


@dataclass
class TrialReport:
    config: TrialConfig
    records: list = field(default_factory=list)
    rows: list = field(default_factory=list)

    def summary(self, method, snr_db):
        for r in self.rows:
            if r.method == method and r.snr_db == snr_db:
                return r
        raise KeyError((method, snr_db))

    def to_json(self):
        cfg = asdict(self.config)
        return json.dumps(
            {
                "config": cfg,
                "rows": [asdict(r) for r in self.rows],
                "records": [asdict(r) for r in self.records],
            },
            sort_keys=True,
        )


def _run_method(method, frame, config):
    K = config.K
    if config.dims == 1:
        return refine_1d(correlation_surface_1d(frame, None if K is None else K[0]), config.newton)
    K1, K2 = (None, None) if K is None else K
    if method == "ml":
        return refine_2d(correlation_surface_2d(frame, K1, K2), config.newton)
    return baselines.subspace_estimate(frame, config.newton, K1, K2)


def _run_trial(config, snr_index, trial):
    snr = config.snr_db_grid[snr_index]
    frame = synthesize(config.dims, config.M, config.N, config.f_true, snr, trial_rng(config.rng_seed, snr_index, trial))
    out = []
    for method in config.methods:
        try:
            est = _run_method(method, frame, config)
        except Exception as exc:  # recorded, never fatal
            out.append(
                TrialRecord(snr, trial, method, (), (), 0, False, f"{type(exc).__name__}: {exc}")
            )
            continue
        freqs = est.freqs if isinstance(est.freqs, tuple) else (est.freqs,)
        errs = tuple(float(wrap_frequency(a - b)) ** 2 for a, b in zip(freqs, config.f_true))
        out.append(TrialRecord(snr, trial, method, tuple(float(f) for f in freqs), errs, est.iters, est.converged))
    return out


def _run_chunk(args):
    config, jobs = args
    return [rec for s, t in jobs for rec in _run_trial(config, s, t)]


def _crb_rms(config, snr_db):
    snr = 1.0 / noise_variance(snr_db) if noise_variance(snr_db) > 0 else math.inf
    if math.isinf(snr):
        return 0.0, (0.0 if config.dims == 2 else None)
    if config.dims == 1:
        return math.sqrt(baselines.crb_1d(config.M, snr)), None
    c = baselines.crb(config.M, config.N, snr)
    return math.sqrt(c.var_f1), math.sqrt(c.var_f2)


def summarize(config, records):
    rows = []
    for snr in config.snr_db_grid:
        crb1, crb2 = _crb_rms(config, snr)
        for method in config.methods:
            recs = [r for r in records if r.snr_db == snr and r.method == method]
            ok = [r for r in recs if r.converged]
            if ok:
                se = np.array([r.sq_err for r in ok])
                rmse = np.sqrt(se.mean(axis=0))
                mean_iters = float(np.mean([r.iters for r in ok]))
            else:
                rmse = np.full(config.dims, np.nan)
                mean_iters = float("nan")
            rows.append(
                SummaryRow(
                    snr_db=snr,
                    method=method,
                    rmse_f1=float(rmse[0]),
                    rmse_f2=float(rmse[1]) if config.dims == 2 else None,
                    crb_rms_f1=crb1,
                    crb_rms_f2=crb2,
                    mean_iters=mean_iters,
                    failures=len(recs) - len(ok),
                    trials=len(recs),
                )
            )
    return rows


def run_sweep(config):
    """Run every trial of every SNR point and aggregate per (SNR, method).

    RMSE and mean iterations are over converged trials only; the rest are
    counted in ``failures``.
    """
    jobs = [(s, t) for s in range(len(config.snr_db_grid)) for t in range(config.trials_per_point)]
    if config.workers > 1:
        n = config.workers * 4
        chunks = [(config, jobs[i::n]) for i in range(n)]
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            parts = list(pool.map(_run_chunk, chunks))
        records = [rec for part in parts for rec in part]
        order = {m: i for i, m in enumerate(config.methods)}
        records.sort(key=lambda r: (config.snr_db_grid.index(r.snr_db), r.trial, order[r.method]))
    else:
        records = _run_chunk((config, jobs))
    return TrialReport(config=config, records=records, rows=summarize(config, records))


def threshold_snr(report, method, factor=3.0):
    """Lowest SNR of the grid from which on the RMSE of ``method`` stays below
    ``factor`` times the CRB on every axis; ``None`` if it never does."""
    rows = sorted((r for r in report.rows if r.method == method), key=lambda r: r.snr_db)
    found = None
    for r in reversed(rows):
        ratios = [r.rmse_f1 / r.crb_rms_f1]
        if r.rmse_f2 is not None:
            ratios.append(r.rmse_f2 / r.crb_rms_f2)
        if all(np.isfinite(x) and x < factor for x in ratios):
            found = r.snr_db
        else:
            break
    return found


def _probe_offsets(per_axis):
    return -0.5 + np.arange(per_axis) / per_axis


def interp_error_sweep(P_grid, frame=None, seed=0, K=None, M=64, N=64, snr_db=5.0,
                       f_true=REFERENCE_FREQS, probes_per_cell=64, random_cells=32):
    """Relative error of the interpolated cost against the directly summed one.

    For each truncation index ``P`` returns ``(P, log10(eps))`` with ``eps``
    the largest ``|L - L~|`` over a probe set divided by the largest ``L``.
    The probe set covers the 3 (1-D) or 3x3 (2-D) grid cells around the
    coarse peak plus ``random_cells`` random cells, with ``probes_per_cell``
    points in each; it approximates the max over all frequencies.

    If ``frame`` is omitted a 2-D ``M x N`` frame at ``snr_db`` is synthesised
    from ``seed``.
    """
    P_grid = [int(p) for p in P_grid]
    if not P_grid:
        raise ValueError("P_grid must not be empty")
    if frame is None:
        frame = synthesize(2, M, N, f_true, snr_db, trial_rng(seed, 0, 0))
    cell_rng = np.random.default_rng(seed)
    if frame.dims == 1:
        return _eps_1d(P_grid, frame, K, probes_per_cell, random_cells, cell_rng)
    return _eps_2d(P_grid, frame, K, probes_per_cell, random_cells, cell_rng)


def _eps_1d(P_grid, frame, K, probes, random_cells, rng):
    surface = correlation_surface_1d(frame, None if K is None else (K if np.isscalar(K) else K[0]))
    K = surface.K
    k0 = coarse_peak(surface)
    cells = np.concatenate([[k0 - 1, k0, k0 + 1], rng.integers(0, K, random_cells)])
    f = ((cells[:, None] + _probe_offsets(probes)[None, :]) / K).ravel()
    L = np.abs(direct_correlation_1d(frame.data, frame.m1, f)) ** 2
    out = []
    for P in P_grid:
        ker = surface_kernel(P, K, frame.M)
        Lt = np.array([interp_cost_1d(surface, ker, x)[0] for x in f])
        out.append((P, float(np.log10(np.max(np.abs(L - Lt)) / L.max()))))
    return out


def _eps_2d(P_grid, frame, K, probes, random_cells, rng):
    K1, K2 = (None, None) if K is None else ((K, K) if np.isscalar(K) else K)
    surface = correlation_surface_2d(frame, K1, K2)
    K1, K2 = surface.c_samples.shape
    k1, k2 = coarse_peak(surface)
    cells = [(k1 + a, k2 + b) for a in (-1, 0, 1) for b in (-1, 0, 1)]
    cells += list(zip(rng.integers(0, K1, random_cells), rng.integers(0, K2, random_cells)))
    per_axis = max(2, int(round(math.sqrt(probes))))
    off = _probe_offsets(per_axis)
    probes_f = []
    L = []
    for a, b in cells:
        fa = (a + off) / K1
        fb = (b + off) / K2
        L.append((np.abs(direct_correlation_2d(frame.data, frame.m1, frame.n1, fa, fb)) ** 2).ravel())
        probes_f.extend((x, y) for x in fa for y in fb)
    L = np.concatenate(L)
    out = []
    for P in P_grid:
        kp = (surface_kernel(P, K1, frame.M), surface_kernel(P, K2, frame.N))
        Lt = np.array([interp_cost_2d(surface, kp, x, y)[0] for x, y in probes_f])
        out.append((P, float(np.log10(np.max(np.abs(L - Lt)) / L.max()))))
    return out


__all__ = [
    "METHODS",
    "REFERENCE_FREQS",
    "SummaryRow",
    "TrialConfig",
    "TrialRecord",
    "TrialReport",
    "interp_error_sweep",
    "noise_variance",
    "run_sweep",
    "summarize",
    "synthesize",
    "threshold_snr",
    "trial_rng",
]
