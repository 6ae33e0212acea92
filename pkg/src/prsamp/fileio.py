"""Portable text formats.

* signal files: one complex value per line as ``re,im``; an optional
  ``# shape2d rows cols`` comment line marks an image;
* measurement files: one real (or ``re,im`` for linear data) per line;
* matrix files: ``PRSAMP-MAT v1 M N kind`` then M lines of N ``re:im``
  tokens (``0``/``1`` allowed for binary matrices);
* config and record files: ``key=value`` lines with ``#`` comments.

Floats are written with ``repr`` so every finite value round-trips exactly.
"""

import os
import tempfile

import numpy as np

from .model import (
    MATRIX_KINDS,
    BinaryPrior,
    ChannelSpec,
    ComplexSignal,
    GaussianPrior,
    MeasurementMatrix,
    SolverConfig,
    TrialRecord,
)

MATRIX_MAGIC = "PRSAMP-MAT"
MATRIX_VERSION = "v1"


class FileFormatError(ValueError):
    def __init__(self, path, line, message):
        super().__init__(f"{path}:{line}: {message}")
        self.path = path
        self.line = line


def atomic_write_text(path, text):
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(prefix=".prsamp-", dir=directory)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _read_lines(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read().splitlines()
    except OSError as exc:
        raise OSError(f"cannot read {path}: {exc.strerror or exc}") from exc


def _fmt(x):
    return repr(float(x))


def _parse_float(token, path, line):
    try:
        value = float(token)
    except ValueError:
        raise FileFormatError(path, line, f"not a number: {token!r}") from None
    return value


def format_signal(signal):
    lines = []
    if signal.shape2d is not None:
        lines.append(f"# shape2d {signal.shape2d[0]} {signal.shape2d[1]}")
    lines += [f"{_fmt(z.real)},{_fmt(z.imag)}" for z in signal.values]
    return "\n".join(lines) + "\n"


def write_signal(path, signal):
    if not isinstance(signal, ComplexSignal):
        signal = ComplexSignal(signal)
    atomic_write_text(path, format_signal(signal))


def read_signal(path):
    shape2d = None
    values = []
    for k, raw in enumerate(_read_lines(path), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            parts = line[1:].split()
            if parts and parts[0] == "shape2d":
                if len(parts) != 3:
                    raise FileFormatError(path, k, "expected '# shape2d rows cols'")
                shape2d = (int(parts[1]), int(parts[2]))
            continue
        fields = line.split(",")
        if len(fields) != 2:
            raise FileFormatError(path, k, f"expected 're,im', got {line!r}")
        values.append(complex(_parse_float(fields[0], path, k), _parse_float(fields[1], path, k)))
    if not values:
        raise FileFormatError(path, 0, "no values")
    signal = ComplexSignal(np.array(values), shape2d)
    problems = signal.violations()
    if problems:
        raise FileFormatError(path, 0, "; ".join(problems))
    return signal


def write_measurements(path, y):
    y = np.asarray(y)
    if np.iscomplexobj(y):
        text = "".join(f"{_fmt(z.real)},{_fmt(z.imag)}\n" for z in y)
    else:
        text = "".join(f"{_fmt(v)}\n" for v in y)
    atomic_write_text(path, text)


def read_measurements(path, intensity=False):
    """Magnitudes (or complex values for linear data).  ``intensity=True``
    square-roots intensity readings once, on load."""
    values = []
    complex_data = False
    for k, raw in enumerate(_read_lines(path), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split(",")
        if len(fields) == 1:
            values.append(_parse_float(fields[0], path, k))
        elif len(fields) == 2:
            complex_data = True
            values.append(complex(_parse_float(fields[0], path, k),
                                  _parse_float(fields[1], path, k)))
        else:
            raise FileFormatError(path, k, f"expected one value per line, got {line!r}")
        if not complex_data and values[-1] < 0:
            raise FileFormatError(path, k, "measurements must be >= 0")
    if not values:
        raise FileFormatError(path, 0, "no values")
    y = np.array(values, dtype=complex if complex_data else float)
    if intensity:
        if complex_data:
            raise FileFormatError(path, 0, "--intensity needs real measurements")
        y = np.sqrt(y)
    return y


def format_matrix(matrix):
    m, n = matrix.shape
    lines = [f"{MATRIX_MAGIC} {MATRIX_VERSION} {m} {n} {matrix.kind}"]
    compact = matrix.kind == "binary01"
    for row in matrix.entries:
        if compact:
            lines.append(" ".join("1" if z == 1 else "0" for z in row))
        else:
            lines.append(" ".join(f"{_fmt(z.real)}:{_fmt(z.imag)}" for z in row))
    return "\n".join(lines) + "\n"


def write_matrix(path, matrix):
    atomic_write_text(path, format_matrix(matrix))


def _parse_entry(token, path, line):
    if ":" in token:
        re, _, im = token.partition(":")
        return complex(_parse_float(re, path, line), _parse_float(im, path, line))
    if token in ("0", "1"):
        return complex(int(token))
    raise FileFormatError(path, line, f"bad matrix entry {token!r}")


def read_matrix(path):
    lines = _read_lines(path)
    if not lines:
        raise FileFormatError(path, 1, "empty matrix file")
    header = lines[0].split()
    if len(header) != 5 or header[0] != MATRIX_MAGIC or header[1] != MATRIX_VERSION:
        raise FileFormatError(path, 1, f"expected '{MATRIX_MAGIC} {MATRIX_VERSION} M N kind'")
    try:
        m, n = int(header[2]), int(header[3])
    except ValueError:
        raise FileFormatError(path, 1, "M and N must be integers") from None
    kind = header[4]
    if kind not in MATRIX_KINDS:
        raise FileFormatError(path, 1, f"unknown kind {kind!r}")
    rows = [(k, line) for k, line in enumerate(lines[1:], start=2) if line.strip()]
    if len(rows) != m:
        raise FileFormatError(path, len(lines), f"expected {m} rows, found {len(rows)}")
    h = np.empty((m, n), dtype=complex)
    for i, (k, line) in enumerate(rows):
        tokens = line.split()
        if len(tokens) != n:
            raise FileFormatError(path, k, f"expected {n} entries, found {len(tokens)}")
        h[i] = [_parse_entry(t, path, k) for t in tokens]
    matrix = MeasurementMatrix(h, kind)
    problems = matrix.violations()
    if problems:
        raise FileFormatError(path, 0, "; ".join(problems))
    return matrix


def parse_key_values(text, path="<config>"):
    out = {}
    for k, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise FileFormatError(path, k, f"expected key=value, got {raw.strip()!r}")
        out[key.strip()] = value.strip()
    return out


def format_config(config):
    lines = []
    for key, value in config.summary().items():
        if key == "x0" and value == "vector":
            continue
        if isinstance(value, bool):
            value = int(value)
        elif isinstance(value, float):
            value = _fmt(value)
        elif isinstance(value, complex):
            value = f"{_fmt(value.real)}:{_fmt(value.imag)}"
        lines.append(f"{key}={'' if value is None else value}")
    if isinstance(config.x0, str):
        v = complex(config.x0_value)
        lines.append(f"x0_value={_fmt(v.real)}:{_fmt(v.imag)}")
    return "\n".join(lines) + "\n"


_FLOAT_KEYS = ("alpha", "alpha2d", "epsilon", "v0", "xv0", "clamp_vmin")
_INT_KEYS = ("t_max", "restarts", "seed")


def _complex_value(text):
    if ":" in text:
        re, _, im = text.partition(":")
        return complex(float(re), float(im))
    return complex(text)


def config_from_mapping(values, base=None, path="<config>"):
    """Apply string key/values onto ``base`` (default ``SolverConfig()``)."""
    cfg = base if base is not None else SolverConfig()
    changes = {}
    prior = cfg.input_prior
    prior_kind = values.get("prior")
    try:
        for key in _FLOAT_KEYS:
            if key in values:
                changes[key] = float(values[key]) if values[key] != "" else None
        for key in _INT_KEYS:
            if key in values:
                changes[key] = int(values[key])
        if "x0" in values:
            changes["x0"] = values["x0"]
        if "x0_value" in values:
            changes["x0_value"] = _complex_value(values["x0_value"])
        if "damp_output" in values:
            changes["damp_output"] = values["damp_output"].lower() in ("1", "true", "yes")
        if prior_kind == "gaussian" or (prior_kind is None and isinstance(prior, GaussianPrior)
                                        and ("prior_mean" in values or "prior_sigma" in values)):
            old = prior if isinstance(prior, GaussianPrior) else GaussianPrior()
            prior = GaussianPrior(
                _complex_value(values["prior_mean"]) if "prior_mean" in values else old.mean,
                float(values["prior_sigma"]) if "prior_sigma" in values else old.sigma,
            )
        elif prior_kind == "binary" or "rho" in values:
            rho = float(values["rho"]) if "rho" in values else getattr(prior, "rho", 0.5)
            prior = BinaryPrior(rho)
        elif prior_kind is not None:
            raise ValueError(f"unknown prior {prior_kind!r}")
        changes["input_prior"] = prior
        if "channel" in values or "channel_delta" in values:
            delta = values.get("channel_delta", "")
            changes["output_channel"] = ChannelSpec(
                values.get("channel", cfg.output_channel.kind),
                float(delta) if delta != "" else cfg.output_channel.delta,
            )
        known = set(_FLOAT_KEYS + _INT_KEYS) | {
            "x0", "x0_value", "damp_output", "prior", "prior_mean", "prior_sigma", "rho",
            "channel", "channel_delta"}
        unknown = sorted(set(values) - known)
        if unknown:
            raise ValueError(f"unknown config keys: {', '.join(unknown)}")
        return cfg.replace(**changes)
    except ValueError as exc:
        raise FileFormatError(path, 0, str(exc)) from None


def read_config(path, base=None):
    return config_from_mapping(parse_key_values("\n".join(_read_lines(path)), path), base, path)


def write_config(path, config):
    atomic_write_text(path, format_config(config))


def write_record(path, record):
    atomic_write_text(path, record.to_text())


def parse_record(text):
    values = parse_key_values(text, "<record>")

    def opt(key):
        return None if values.get(key, "") == "" else float(values[key])

    config = {k[len("config."):]: v for k, v in values.items() if k.startswith("config.")}
    return TrialRecord(
        config=config,
        converged=values["converged"] == "1",
        iterations_used=int(values["iterations_used"]),
        nr=float(values["nr"]),
        seed=int(values["seed"]),
        wall_time=float(values["wall_time"]),
        nmse=opt("nmse"),
        correlation=opt("correlation"),
    )
