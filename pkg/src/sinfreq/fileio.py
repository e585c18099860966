"""Plain-text sample files.

Layout::

    # sinfreq v1 dims=2 M=4 N=3
    0.5,-1.25
    ...

One ``re,im`` pair per line, row-major for 2-D frames (the first index ``m``
varies slowest). Sample ``i`` along an axis of length ``M`` sits at instant
``-ceil(M/2) + i``. Values are written with ``repr`` so a write/read round
trip reproduces every float bit for bit. Blank lines are ignored.
"""

import re

import numpy as np

from .dft import SignalFrame

MAGIC = "sinfreq"
VERSION = "v1"
_HEADER = re.compile(r"^#\s*sinfreq\s+v1((?:\s+[A-Za-z]+=\S+)*)\s*$")


class SampleFileError(ValueError):
    """Malformed sample file; the message names the offending line."""

    def __init__(self, message, line=None, path=None):
        where = ""
        if path is not None:
            where += f"{path}:"
        if line is not None:
            where += f"{line}:"
        super().__init__(f"{where} {message}" if where else message)
        self.line = line
        self.path = path


def format_header(frame):
    head = f"# {MAGIC} {VERSION} dims={frame.dims} M={frame.M}"
    if frame.dims == 2:
        head += f" N={frame.N}"
    return head


def dumps(frame):
    """Serialise a :class:`SignalFrame` to the text format."""
    lines = [format_header(frame)]
    for z in frame.data.ravel():
        lines.append(f"{float(z.real)!r},{float(z.imag)!r}")
    return "\n".join(lines) + "\n"


def write_samples(path, frame):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(frame))


def _parse_header(line, path):
    m = _HEADER.match(line.strip())
    if m is None:
        raise SampleFileError(
            f"expected header '# {MAGIC} {VERSION} dims=<d> M=<M> [N=<N>]', got {line.strip()[:60]!r}",
            line=1,
            path=path,
        )
    fields = {}
    for item in m.group(1).split():
        key, _, val = item.partition("=")
        try:
            fields[key] = int(val)
        except ValueError:
            raise SampleFileError(f"header field {key} must be an integer, got {val!r}", line=1, path=path)
    dims = fields.get("dims")
    if dims not in (1, 2):
        raise SampleFileError(f"header needs dims=1 or dims=2, got {dims}", line=1, path=path)
    if "M" not in fields or (dims == 2 and "N" not in fields):
        raise SampleFileError("header is missing M" + (" or N" if dims == 2 else ""), line=1, path=path)
    if dims == 1 and "N" in fields:
        raise SampleFileError("N given for a 1-D file", line=1, path=path)
    shape = (fields["M"],) if dims == 1 else (fields["M"], fields["N"])
    if min(shape) < 2:
        raise SampleFileError(f"each axis needs at least 2 samples, got {shape}", line=1, path=path)
    return shape


def loads(text, path=None):
    """Parse the text format into a :class:`SignalFrame`."""
    lines = text.splitlines()
    if not lines or not lines[0].strip():
        raise SampleFileError("empty file (no header line)", line=1, path=path)
    shape = _parse_header(lines[0], path)
    count = int(np.prod(shape))
    values = np.empty(count, dtype=complex)
    k = 0
    for lineno, raw in enumerate(lines[1:], start=2):
        s = raw.strip()
        if not s:
            continue
        parts = s.split(",")
        if len(parts) != 2:
            raise SampleFileError(f"expected 're,im', got {s[:60]!r}", line=lineno, path=path)
        try:
            re_, im = float(parts[0]), float(parts[1])
        except ValueError:
            raise SampleFileError(f"not a pair of numbers: {s[:60]!r}", line=lineno, path=path)
        if not (np.isfinite(re_) and np.isfinite(im)):
            raise SampleFileError(f"non-finite sample {s[:60]!r}", line=lineno, path=path)
        if k >= count:
            raise SampleFileError(f"more than the {count} samples declared in the header", line=lineno, path=path)
        values[k] = complex(re_, im)
        k += 1
    if k != count:
        raise SampleFileError(f"header declares {count} samples but the file holds {k}", line=len(lines), path=path)
    return SignalFrame(values.reshape(shape))


def read_samples(path):
    with open(path, "r", encoding="utf-8") as fh:
        return loads(fh.read(), path=str(path))
