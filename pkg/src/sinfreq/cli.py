"""Command-line front end.

Subcommands
-----------
estimate  refine the frequency of a tone in a sample file
bench     Monte-Carlo RMSE sweep against the CRB, written as CSV or JSON
spectrum  worst-case interpolation error of a pure tone versus frequency
eps       interpolation error of the cost function versus truncation index

Exit codes: 0 success, 1 input or usage error, 2 estimate did not converge.
"""

import argparse
import csv
import io
import json
import math
import sys

import numpy as np

from . import __version__
from .baselines import SvdNotConverged, subspace_estimate
from .dft import DegenerateInput, correlation_surface_1d, correlation_surface_2d, default_fft_size
from .estimator import NewtonConfig, refine_1d, refine_2d
from .fileio import SampleFileError, read_samples
from .interp import error_spectrum, make_kernel
from .simkit import REFERENCE_FREQS, TrialConfig, interp_error_sweep, run_sweep

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_NOT_CONVERGED = 2

BENCH_COLUMNS = (
    "snr_db",
    "method",
    "rmse_f1",
    "rmse_f2",
    "crb_rms_f1",
    "crb_rms_f2",
    "mean_iters",
    "failures",
    "trials",
)

# JSON Schema (draft 2020-12) of `sinfreq estimate --json` output.
ESTIMATE_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["dims", "method", "fft_size", "P", "coarse", "freqs", "cost", "iters", "converged"],
    "additionalProperties": False,
    "properties": {
        "dims": {"enum": [1, 2]},
        "method": {"enum": ["ml", "subspace"]},
        "fft_size": {"type": "array", "items": {"type": "integer", "minimum": 1}, "minItems": 1, "maxItems": 2},
        "P": {"type": "array", "items": {"type": "integer", "minimum": 1}, "minItems": 1, "maxItems": 2},
        "coarse": {"type": "array", "items": {"type": "number"}, "minItems": 1, "maxItems": 2},
        "freqs": {"type": "array", "items": {"type": "number"}, "minItems": 1, "maxItems": 2},
        "cost": {"type": "number"},
        "iters": {"type": "integer", "minimum": 0},
        "converged": {"type": "boolean"},
    },
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad usage; 2 is reserved for "not converged".
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _int_list(text, name, max_len=None):
    items = [s for s in text.split(",") if s.strip()]
    if not items:
        raise UsageError(f"{name} needs at least one value")
    try:
        out = [int(s) for s in items]
    except ValueError:
        raise UsageError(f"{name} must be comma-separated integers, got {text!r}")
    if max_len is not None and len(out) > max_len:
        raise UsageError(f"{name} takes at most {max_len} values, got {len(out)}")
    return out


def _float_list(text, name):
    items = [s for s in text.split(",") if s.strip()]
    if not items:
        raise UsageError(f"{name} needs at least one value")
    try:
        return [float(s) for s in items]
    except ValueError:
        raise UsageError(f"{name} must be comma-separated numbers, got {text!r}")


def parse_snr_grid(text):
    """``"5"``, ``"0,5,10"`` or an inclusive range ``"start:stop:step"``."""
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise UsageError(f"SNR range must be start:stop:step, got {text!r}")
        try:
            a, b, step = (float(p) for p in parts)
        except ValueError:
            raise UsageError(f"SNR range must be numeric, got {text!r}")
        if step <= 0 or b < a:
            raise UsageError(f"SNR range needs step > 0 and stop >= start, got {text!r}")
        n = int(math.floor((b - a) / step + 1e-9)) + 1
        return [round(a + i * step, 12) for i in range(n)]
    return _float_list(text, "--snr")


# --------------------------------------------------------------------------
# estimate
# --------------------------------------------------------------------------


def _fmt(x):
    return repr(float(x))


def cmd_estimate(args, out):
    try:
        frame = read_samples(args.input)
    except OSError as exc:
        raise UsageError(f"cannot read {args.input}: {exc.strerror or exc}")
    if args.dims is not None and args.dims != frame.dims:
        raise UsageError(f"--dims {args.dims} does not match the file (dims={frame.dims})")
    K = _int_list(args.fft_size, "--fft-size", 2) if args.fft_size else None
    P = _int_list(args.P, "--P", 2) if args.P else [None]
    if K is not None and frame.dims == 1 and len(K) != 1:
        raise UsageError("a 1-D file takes a single --fft-size")
    if args.max_iters < 1:
        raise UsageError("--max-iters must be at least 1")
    config = NewtonConfig(P=P[0], P2=P[-1] if frame.dims == 2 else None, max_iters=args.max_iters)

    if frame.dims == 1:
        if args.method != "ml":
            raise UsageError("the subspace method needs 2-D data")
        surface = correlation_surface_1d(frame, None if K is None else K[0])
        est = refine_1d(surface, config)
        sizes = [surface.K]
        P_used = [config.truncation(0, surface.K, frame.M)]
        coarse = [est.coarse_freqs]
        freqs = [est.freqs]
    else:
        K1, K2 = (None, None) if K is None else (K[0], K[-1])
        if args.method == "ml":
            surface = correlation_surface_2d(frame, K1, K2)
            sizes = list(surface.c_samples.shape)
            est = refine_2d(surface, config)
        else:
            est = subspace_estimate(frame, config, K1, K2)
            sizes = [
                default_fft_size(frame.M) if K1 is None else K1,
                default_fft_size(frame.N) if K2 is None else K2,
            ]
        P_used = [config.truncation(0, sizes[0], frame.M), config.truncation(1, sizes[1], frame.N)]
        coarse = list(est.coarse_freqs)
        freqs = list(est.freqs)

    result = {
        "dims": frame.dims,
        "method": args.method,
        "fft_size": [int(k) for k in sizes],
        "P": [int(p) for p in P_used],
        "coarse": [float(f) for f in coarse],
        "freqs": [float(f) for f in freqs],
        "cost": float(est.cost),
        "iters": int(est.iters),
        "converged": bool(est.converged),
    }
    if args.json:
        out.write(json.dumps(result) + "\n")
    else:
        out.write("fft_size " + " ".join(str(k) for k in result["fft_size"]) + "\n")
        out.write("coarse " + " ".join(_fmt(f) for f in result["coarse"]) + "\n")
        out.write("freqs " + " ".join(_fmt(f) for f in result["freqs"]) + "\n")
        out.write(f"cost {_fmt(result['cost'])}\n")
        out.write(f"iters {result['iters']}\n")
        out.write(f"converged {'true' if result['converged'] else 'false'}\n")
    return EXIT_OK if est.converged else EXIT_NOT_CONVERGED


# --------------------------------------------------------------------------
# bench
# --------------------------------------------------------------------------


def _csv_value(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def format_bench(rows, fmt):
    if fmt == "json":
        data = [{c: getattr(r, c) for c in BENCH_COLUMNS} for r in rows]
        # NaN is not valid JSON; a point with no converged trial reports null
        for d in data:
            for k, v in d.items():
                if isinstance(v, float) and not math.isfinite(v):
                    d[k] = None
        return json.dumps({"columns": list(BENCH_COLUMNS), "rows": data}, indent=1) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(BENCH_COLUMNS)
    for r in rows:
        w.writerow([_csv_value(getattr(r, c)) for c in BENCH_COLUMNS])
    return buf.getvalue()


def cmd_bench(args, out):
    f_true = tuple(_float_list(args.f, "--f"))
    K = tuple(_int_list(args.fft_size, "--fft-size", 2)) if args.fft_size else None
    if K is not None and args.dims == 2 and len(K) == 1:
        K = (K[0], K[0])
    P = _int_list(args.P, "--P", 2) if args.P else [None]
    methods = tuple(m.strip() for m in args.methods.split(",") if m.strip())
    try:
        config = TrialConfig(
            dims=args.dims,
            M=args.M,
            N=args.N if args.dims == 2 else None,
            f_true=f_true,
            snr_db_grid=tuple(parse_snr_grid(args.snr)),
            trials_per_point=args.trials,
            rng_seed=args.seed,
            newton=NewtonConfig(P=P[0], P2=P[-1]),
            methods=methods,
            K=K,
            workers=args.workers,
        )
    except ValueError as exc:
        raise UsageError(str(exc))
    fmt = args.format
    if fmt is None:
        fmt = "json" if args.out and args.out.endswith(".json") else "csv"
    sink = None
    if args.out:
        # open before the sweep so an unwritable path fails fast
        try:
            sink = open(args.out, "w", encoding="utf-8")
        except OSError as exc:
            raise UsageError(f"cannot write {args.out}: {exc.strerror or exc}")
    try:
        report = run_sweep(config)
        (sink or out).write(format_bench(report.rows, fmt))
    finally:
        if sink is not None:
            sink.close()
    return EXIT_OK


# --------------------------------------------------------------------------
# spectrum / eps
# --------------------------------------------------------------------------


def spectrum_rows(BT, P_list, grid):
    """``(P, f, E(f))`` with ``T = 1``, ``B = BT``, ``f`` on ``grid`` points
    spanning ``[-B/2, B/2]`` and the worst case taken over ``grid`` offsets."""
    f = np.linspace(-BT / 2, BT / 2, grid)
    u = np.linspace(-0.5, 0.5, grid)
    rows = []
    for P in P_list:
        E = error_spectrum(make_kernel(P, 1.0, BT), f, u)
        rows.extend((P, float(a), float(b)) for a, b in zip(f, E))
    return rows


def _write_csv(out, header, rows):
    w = csv.writer(out, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_csv_value(v) for v in r])


def cmd_spectrum(args, out):
    P_list = _int_list(args.P, "--P")
    if not 0 < args.BT < 1:
        raise UsageError(f"--BT must lie in (0, 1), got {args.BT}")
    if args.grid < 2:
        raise UsageError("--grid must be at least 2")
    _write_csv(out, ("P", "f", "E"), spectrum_rows(args.BT, P_list, args.grid))
    return EXIT_OK


def cmd_eps(args, out):
    P_list = _int_list(args.P, "--P")
    K = tuple(_int_list(args.fft_size, "--fft-size", 2)) if args.fft_size else None
    if K is not None and len(K) == 1:
        K = (K[0], K[0])
    rows = interp_error_sweep(P_list, seed=args.seed, K=K, M=args.M, N=args.N, snr_db=args.snr)
    _write_csv(out, ("P", "log10_eps"), rows)
    return EXIT_OK


# --------------------------------------------------------------------------


def build_parser():
    p = _Parser(prog="sinfreq", description="ML frequency estimation of 1-D and 2-D complex tones.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    e = sub.add_parser("estimate", help="estimate the frequency of a tone in a sample file")
    e.add_argument("input", help="sample file ('# sinfreq v1 ...' header, then re,im lines)")
    e.add_argument("--dims", type=int, choices=(1, 2), help="expected dimensionality (checked against the file)")
    e.add_argument("--fft-size", metavar="K[,K2]", help="FFT size per axis (power of two, >= 1.5*M)")
    e.add_argument(
        "--P", metavar="p[,p2]", help="truncation index per axis (default: 8, raised automatically below two-fold padding)"
    )
    e.add_argument("--method", choices=("ml", "subspace"), default="ml")
    e.add_argument("--max-iters", type=int, default=NewtonConfig.max_iters, help="Newton iteration cap (exit code 2 when hit)")
    e.add_argument("--json", action="store_true", help="print one JSON object instead of key/value lines")
    e.set_defaults(func=cmd_estimate)

    b = sub.add_parser("bench", help="Monte-Carlo RMSE versus CRB sweep")
    b.add_argument("--dims", type=int, choices=(1, 2), default=2)
    b.add_argument("--M", type=int, default=64)
    b.add_argument("--N", type=int, default=64)
    b.add_argument("--f", default=",".join(str(x) for x in REFERENCE_FREQS), metavar="f1[,f2]")
    b.add_argument("--snr", default="-30:20:2", help="SNR grid in dB: a list 'a,b,c' or an inclusive range 'start:stop:step'")
    b.add_argument("--trials", type=int, default=500, help="trials per SNR point")
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--methods", default="ml", help="comma-separated subset of ml,subspace")
    b.add_argument("--P", metavar="p[,p2]", help="truncation index per axis (default: automatic, 8 at two-fold padding)")
    b.add_argument("--fft-size", metavar="K[,K2]")
    b.add_argument("--workers", type=int, default=1, help="worker processes (results do not depend on it)")
    b.add_argument("--out", help="output file (default: standard output)")
    b.add_argument("--format", choices=("csv", "json"), help="default: json for a .json --out, else csv")
    b.set_defaults(func=cmd_bench)

    s = sub.add_parser("spectrum", help="tone interpolation error E(f) table")
    s.add_argument("--BT", type=float, default=0.25, help="bandwidth-period product in (0, 1)")
    s.add_argument("--P", default="4,6,8", help="comma-separated truncation indices")
    s.add_argument("--grid", type=int, default=201, help="points on the frequency and offset grids")
    s.set_defaults(func=cmd_spectrum)

    x = sub.add_parser("eps", help="cost-function interpolation error per truncation index")
    x.add_argument("--P", default="2,4,6,8,10,12", help="comma-separated truncation indices")
    x.add_argument("--M", type=int, default=64)
    x.add_argument("--N", type=int, default=64)
    x.add_argument("--snr", type=float, default=5.0, help="SNR of the synthetic frame in dB")
    x.add_argument("--seed", type=int, default=0)
    x.add_argument("--fft-size", metavar="K[,K2]")
    x.set_defaults(func=cmd_eps)
    return p


def main(argv=None, out=None):
    out = sys.stdout if out is None else out
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args, out)
    except SampleFileError as exc:
        print(f"sinfreq: {exc}", file=sys.stderr)
    except SvdNotConverged as exc:
        print(f"sinfreq: {exc}", file=sys.stderr)
        return EXIT_NOT_CONVERGED
    except (UsageError, DegenerateInput, ValueError) as exc:
        print(f"sinfreq: error: {exc}", file=sys.stderr)
    return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
