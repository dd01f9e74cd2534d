"""Image and trace file formats.

Two image formats are supported:

* **PGM** (portable graymap), magics ``P5`` (binary) and ``P2`` (ASCII),
  8-bit or 16-bit samples; 16-bit binary samples are big-endian per the PGM
  convention.  Values are normalized to [0, 1] by the header's max value on
  read and quantized to 16 bits on write, so PGM is lossy and meant for
  viewing.
* a **plain-text float format** (first line ``width height``, then one line
  of decimals per row) whose write -> read round-trip is bit-exact; this is
  the default for anything that feeds back into computation.

Traces are CSV with a stable header and optional leading ``# key=value``
comment lines echoing the resolved configuration.
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .grid import as_image
from .solvers import TraceRecord

TRACE_HEADER = [
    "iter",
    "se",
    "objective",
    "lagrangian",
    "min_w",
    "identity_residual",
    "constraint_residual",
    "snr",
    "seconds",
]


class FormatError(ValueError):
    """Malformed or truncated image/trace file."""


# ---------------------------------------------------------------------------
# PGM


def _pgm_tokens(data: bytes):
    """Yield whitespace-separated header tokens, skipping '#' comments."""
    i = 0
    n = len(data)
    while i < n:
        c = data[i : i + 1]
        if c in b" \t\r\n":
            i += 1
        elif c == b"#":
            while i < n and data[i : i + 1] != b"\n":
                i += 1
        else:
            j = i
            while j < n and data[j : j + 1] not in b" \t\r\n":
                j += 1
            yield data[i:j], j
            i = j


def _read_pgm(data: bytes) -> np.ndarray:
    toks = _pgm_tokens(data)
    try:
        magic, _ = next(toks)
        (w_tok, _), (h_tok, _), (maxval_tok, end) = next(toks), next(toks), next(toks)
        width, height, maxval = int(w_tok), int(h_tok), int(maxval_tok)
    except (StopIteration, ValueError) as exc:
        raise FormatError("malformed PGM header") from exc
    if width < 1 or height < 1 or not 0 < maxval < 65536:
        raise FormatError(f"bad PGM dimensions/maxval: {width}x{height}/{maxval}")

    if magic == b"P2":
        try:
            vals = [int(t) for t, _ in toks]
        except ValueError as exc:
            raise FormatError("non-integer sample in ASCII PGM") from exc
        if len(vals) != width * height:
            raise FormatError(
                f"expected {width * height} samples, found {len(vals)}"
            )
        raw = np.array(vals, dtype=np.float64)
    elif magic == b"P5":
        payload = data[end + 1 :]  # single whitespace byte after maxval
        nbytes = 2 if maxval > 255 else 1
        need = width * height * nbytes
        if len(payload) < need:
            raise FormatError("truncated PGM payload")
        buf = np.frombuffer(payload[:need], dtype=np.uint8)
        if nbytes == 2:
            raw = (buf[0::2].astype(np.float64) * 256.0) + buf[1::2]
        else:
            raw = buf.astype(np.float64)
    else:
        raise FormatError(f"unsupported magic {magic!r} (PGM P5/P2 only)")
    if raw.max(initial=0.0) > maxval:
        raise FormatError("sample exceeds declared max value")
    return (raw / maxval).reshape(height, width)


def _write_pgm(path: Path, u: np.ndarray) -> None:
    clipped = np.clip(u, 0.0, 1.0)
    samples = np.rint(clipped * 65535.0).astype(np.uint16)
    h, w = samples.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n65535\n".encode("ascii"))
        fh.write(samples.astype(">u2").tobytes())


# ---------------------------------------------------------------------------
# plain-text float format


def _read_float_text(text: str) -> np.ndarray:
    lines = text.split("\n")
    try:
        w_tok, h_tok = lines[0].split()
        width, height = int(w_tok), int(h_tok)
    except (IndexError, ValueError) as exc:
        raise FormatError("malformed float-image header (want 'width height')") from exc
    if width < 1 or height < 1:
        raise FormatError("non-positive float-image dimensions")
    try:
        vals = np.array(" ".join(lines[1:]).split(), dtype=np.float64)
    except ValueError as exc:
        raise FormatError("non-numeric sample in float image") from exc
    if vals.size != width * height:
        raise FormatError(f"expected {width * height} samples, found {vals.size}")
    return vals.reshape(height, width)


def _write_float_text(path: Path, u: np.ndarray) -> None:
    h, w = u.shape
    with open(path, "w") as fh:
        fh.write(f"{w} {h}\n")
        for row in u:
            fh.write(" ".join(repr(x) for x in row.tolist()))
            fh.write("\n")


def read_image(path) -> np.ndarray:
    """Read a PGM or float-text image; PGM samples land in [0, 1]."""
    path = Path(path)
    try:
        data = path.read_bytes()
    except OSError as exc:
        raise FormatError(f"cannot read {path}: {exc}") from exc
    if data[:2] in (b"P5", b"P2"):
        u = _read_pgm(data)
    else:
        try:
            text = data.decode("ascii")
        except UnicodeDecodeError as exc:
            raise FormatError(f"{path}: neither PGM nor float text") from exc
        u = _read_float_text(text)
    try:
        return as_image(u)
    except ValueError as exc:
        raise FormatError(f"{path}: {exc}") from exc


def write_image(path, u) -> None:
    """Write ``u`` as PGM when the suffix is .pgm, float text otherwise."""
    path = Path(path)
    u = as_image(u)
    if path.suffix.lower() == ".pgm":
        _write_pgm(path, u)
    else:
        _write_float_text(path, u)


# ---------------------------------------------------------------------------
# trace CSV


def _cell(x) -> str:
    return "" if x is None else repr(float(x))


def write_trace(path, trace: list[TraceRecord], header: dict | None = None) -> None:
    """Write trace records as CSV, preceded by '# key=value' comment lines."""
    path = Path(path)
    with open(path, "w", newline="") as fh:
        for key, value in (header or {}).items():
            fh.write(f"# {key}={value}\n")
        writer = csv.writer(fh)
        writer.writerow(TRACE_HEADER)
        for r in trace:
            writer.writerow(
                [
                    r.iter,
                    _cell(r.se),
                    _cell(r.objective),
                    _cell(r.lagrangian),
                    _cell(r.min_w),
                    _cell(r.identity_residual),
                    _cell(r.constraint_residual),
                    _cell(r.snr),
                    _cell(r.seconds),
                ]
            )


def read_trace(path):
    """Read back a trace CSV; returns (records, header_comments)."""
    path = Path(path)
    header: dict[str, str] = {}
    records: list[TraceRecord] = []
    with open(path, newline="") as fh:
        rows = []
        for line in fh:
            if line.startswith("#"):
                key, _, value = line[1:].strip().partition("=")
                header[key.strip()] = value
            else:
                rows.append(line)
        reader = csv.reader(rows)
        head = next(reader, None)
        if head != TRACE_HEADER:
            raise FormatError(f"unexpected trace header: {head}")

        def opt(s):
            return None if s == "" else float(s)

        for row in reader:
            if len(row) != len(TRACE_HEADER):
                raise FormatError(f"bad trace row: {row}")
            records.append(
                TraceRecord(
                    iter=int(row[0]),
                    se=float(row[1]),
                    objective=float(row[2]),
                    lagrangian=float(row[3]),
                    min_w=opt(row[4]),
                    identity_residual=opt(row[5]),
                    constraint_residual=opt(row[6]),
                    snr=opt(row[7]),
                    seconds=float(row[8]),
                )
            )
    return records, header
