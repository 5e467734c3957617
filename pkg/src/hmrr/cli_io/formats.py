"""
Canonical on-disk formats.

CSV files are comma separated, ``.`` decimal, LF endings, with a mandatory
header row.  Floats are written with ``repr`` so a read/write round trip is
exact and identical inputs give byte-identical files.
"""

from __future__ import annotations

import json
import math
import os
import tempfile
from typing import Iterable, Sequence

import numpy as np

from ..photostat import CHANNEL_A, CHANNEL_B, G2Histogram, TimestampStream

SPECTRUM_HEADER = ("wavelength_nm", "transmission")
MODES_HEADER = ("lambda_c_nm", "fwhm_nm", "loaded_q", "fsr_nm")
SWEEP_HEADER = ("power_mW", "wavelength_nm")
PLAN_HEADER = ("device_id", "power_mW", "voltage_V", "achieved_nm")
LIFETIME_HEADER = ("detuning_nm", "lifetime_ns")
STREAM_HEADER = ("t_ps", "channel")
HISTOGRAM_HEADER = ("tau_ps", "counts")
FIT_DATA_HEADER = ("x", "y", "weight")


def _file_mode() -> int:
    mask = os.umask(0)
    os.umask(mask)
    return 0o666 & ~mask


_FILE_MODE = _file_mode()
_CHANNEL_NAMES = {CHANNEL_A: "A", CHANNEL_B: "B"}
_CHANNEL_CODES = {"A": CHANNEL_A, "B": CHANNEL_B}


class CsvFormatError(ValueError):
    """A CSV file that does not follow its declared layout."""

    def __init__(self, path, line, message, field=None):
        self.path, self.line, self.field = path, line, field
        where = f"{path}:{line}"
        if field is not None:
            where += f" field {field!r}"
        super().__init__(f"{where}: {message}")


def _fmt(v) -> str:
    if isinstance(v, str):
        if any(ch in v for ch in ',"\n\r'):
            raise ValueError(f"CSV text field may not contain separators: {v!r}")
        return v
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def render_csv(header: Sequence[str], rows: Iterable[Sequence]) -> bytes:
    lines = [",".join(header)]
    lines.extend(",".join(_fmt(v) for v in row) for row in rows)
    return ("\n".join(lines) + "\n").encode("ascii")


def render_json(obj) -> bytes:
    return (json.dumps(obj, indent=2, sort_keys=True, allow_nan=False) + "\n").encode("utf-8")


def atomic_write(path: str, data: bytes) -> str:
    """Write ``data`` to a temp file in the target directory, then rename over ``path``."""
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=".tmp-", dir=directory)
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.chmod(tmp, _FILE_MODE)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


# ---------------------------------------------------------------- readers

def _read_lines(path: str):
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
    except OSError as exc:
        raise CsvFormatError(path, 0, exc.strerror or str(exc)) from None
    try:
        text = raw.decode("ascii")
    except UnicodeDecodeError as exc:
        line = raw[:exc.start].count(b"\n") + 1
        raise CsvFormatError(path, line, "non-ASCII byte") from None
    if "\r" in text:
        line = text[:text.index("\r")].count("\n") + 1
        raise CsvFormatError(path, line, "CR line ending; files must use LF")
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise CsvFormatError(path, 1, "empty file; a header row is required")
    return lines


def _check_header(path, got, expected, optional_tail=0):
    cols = got.split(",")
    n_req = len(expected) - optional_tail
    if not (n_req <= len(cols) <= len(expected)) or tuple(cols) != tuple(expected[:len(cols)]):
        raise CsvFormatError(path, 1, f"header {got!r} does not match expected "
                             f"{','.join(expected[:n_req])!r}"
                             + (f" (optionally followed by {','.join(expected[n_req:])!r})"
                                if optional_tail else ""))
    return cols


def _parse_float(path, line, field, text):
    try:
        v = float(text)
    except ValueError:
        raise CsvFormatError(path, line, f"cannot parse {text!r} as a number", field) from None
    if not math.isfinite(v):
        raise CsvFormatError(path, line, f"non-finite value {text!r}", field)
    return v


def read_numeric_csv(path: str, header: Sequence[str], optional_tail: int = 0) -> np.ndarray:
    """Read an all-numeric CSV into an ``(n_rows, n_cols)`` float array."""
    lines = _read_lines(path)
    cols = _check_header(path, lines[0], header, optional_tail)
    out = np.empty((len(lines) - 1, len(cols)))
    for i, line in enumerate(lines[1:]):
        lineno = i + 2
        parts = line.split(",")
        if len(parts) != len(cols):
            raise CsvFormatError(path, lineno, f"expected {len(cols)} fields, found {len(parts)}")
        for j, (name, text) in enumerate(zip(cols, parts)):
            out[i, j] = _parse_float(path, lineno, name, text)
    return out


def read_fit_data(path: str):
    """``x,y[,weight]`` -> (x, y, weights or None)."""
    arr = read_numeric_csv(path, FIT_DATA_HEADER, optional_tail=1)
    if arr.shape[1] == 3:
        bad = np.flatnonzero(arr[:, 2] < 0)
        if bad.size:
            raise CsvFormatError(path, int(bad[0]) + 2, "weights must be >= 0", "weight")
        return arr[:, 0], arr[:, 1], arr[:, 2]
    return arr[:, 0], arr[:, 1], None


def write_stream(path: str, stream: TimestampStream) -> str:
    body = "".join(f"{t!r},{_CHANNEL_NAMES[c]}\n"
                   for t, c in zip(stream.times.tolist(), stream.channels.tolist()))
    return atomic_write(path, (",".join(STREAM_HEADER) + "\n" + body).encode("ascii"))


def read_stream(path: str, rep_rate_mhz: float) -> TimestampStream:
    lines = _read_lines(path)
    _check_header(path, lines[0], STREAM_HEADER)
    n = len(lines) - 1
    times = np.empty(n)
    chans = np.empty(n, dtype=np.uint8)
    for i, line in enumerate(lines[1:]):
        lineno = i + 2
        parts = line.split(",")
        if len(parts) != 2:
            raise CsvFormatError(path, lineno, f"expected 2 fields, found {len(parts)}")
        times[i] = _parse_float(path, lineno, "t_ps", parts[0])
        code = _CHANNEL_CODES.get(parts[1])
        if code is None:
            raise CsvFormatError(path, lineno, f"channel must be A or B, got {parts[1]!r}", "channel")
        chans[i] = code
    if n > 1:
        back = np.flatnonzero(np.diff(times) < 0)
        if back.size:
            raise CsvFormatError(path, int(back[0]) + 3, "timestamps must be sorted ascending", "t_ps")
    return TimestampStream(times, chans, rep_rate_mhz)


def histogram_sidecar(hist: G2Histogram) -> dict:
    return {
        "normalized": bool(hist.normalized),
        "normalization_constant": hist.normalization_constant,
        "g2_zero": hist.g2_zero,
        "side_peak_areas": list(hist.side_peak_areas),
        "bin_width_ps": hist.bin_width,
        "window_ps": float(hist.bin_edges[-1]),
    }


def render_histogram(hist: G2Histogram) -> bytes:
    counts = hist.counts
    if hist.normalized:
        rows = zip(hist.tau.tolist(), (float(c) for c in counts))
    else:
        rows = zip(hist.tau.tolist(), (int(c) for c in counts))
    return render_csv(HISTOGRAM_HEADER, rows)


def read_histogram(path: str):
    """``tau_ps,counts`` -> (tau, counts)."""
    arr = read_numeric_csv(path, HISTOGRAM_HEADER)
    return arr[:, 0], arr[:, 1]


def load_json(path: str, what: str = "JSON") -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise ValueError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    except OSError as exc:
        raise ValueError(f"{path}: cannot read {what}: {exc.strerror}") from None

