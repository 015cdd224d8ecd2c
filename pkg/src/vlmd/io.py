"""CSV, config-file and run-manifest persistence.

All writes go to a temporary file in the target directory and are renamed
into place, so an interrupted run never leaves a truncated output.
"""

import csv
import hashlib
import io
import json
import os
import tempfile
from dataclasses import asdict, dataclass, field

import numpy as np

from . import __version__
from .exceptions import ConfigError, InvalidInput

MANIFEST_NAME = "manifest.json"


class CsvParseError(InvalidInput):
    def __init__(self, path, line, message):
        self.path, self.line = str(path), line
        super().__init__(f"{path}:{line}: {message}")


def atomic_write_text(path, text):
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _format(value):
    # repr of a float is the shortest string that parses back to the same double
    return repr(float(value))


def write_csv(path, data, header):
    data = np.asarray(data, dtype=float)
    if data.ndim == 1:
        data = data[:, None]
    if data.shape[1] != len(header):
        raise InvalidInput(f"{len(header)} header names for {data.shape[1]} columns")
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in data:
        writer.writerow([_format(v) for v in row])
    atomic_write_text(path, buf.getvalue())


def write_table(path, rows, columns):
    """Rows of mixed values (dicts) as CSV, columns in the given order."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        out = []
        for col in columns:
            v = row.get(col, "")
            if isinstance(v, (float, np.floating)):
                v = _format(v)
            elif isinstance(v, dict):
                v = json.dumps(v, sort_keys=True)
            out.append(v)
        writer.writerow(out)
    atomic_write_text(path, buf.getvalue())


def read_csv(path, allow_nonfinite=False):
    """Read a numeric CSV with a header row. Returns ``(data (T, C), header)``.

    Empty cells and non-numeric tokens raise :class:`CsvParseError` naming the
    offending line.
    """
    try:
        fh = open(path, newline="")
    except OSError as exc:
        raise InvalidInput(f"cannot read {path}: {exc.strerror}") from None
    with fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise CsvParseError(path, 1, "empty file") from None
        header = [h.strip() for h in header]
        if not header or any(h == "" for h in header):
            raise CsvParseError(path, 1, "header has empty column names")
        rows = []
        for row in reader:
            line = reader.line_num
            if not row or all(cell.strip() == "" for cell in row):
                continue
            if len(row) != len(header):
                raise CsvParseError(path, line, f"expected {len(header)} fields, got {len(row)}")
            try:
                values = [float(cell) for cell in row]
            except ValueError:
                bad = next(c for c in row if not _is_float(c))
                raise CsvParseError(path, line, f"not a number: {bad!r}") from None
            if not allow_nonfinite and not all(np.isfinite(values)):
                raise CsvParseError(path, line, "non-finite value")
            rows.append(values)
    if not rows:
        raise CsvParseError(path, 2, "no data rows")
    return np.array(rows, dtype=float), header


def _is_float(text):
    try:
        float(text)
    except ValueError:
        return False
    return True


def _coerce(text):
    low = text.lower()
    if low in ("true", "yes", "on"):
        return True
    if low in ("false", "no", "off"):
        return False
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            pass
    if "," in text:
        return [_coerce(part.strip()) for part in text.split(",") if part.strip()]
    return text


def read_config(path):
    """Parse ``key = value`` lines; ``#`` starts a comment. Values are typed."""
    out = {}
    try:
        with open(path) as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    for n, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{n}: expected key = value")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ConfigError(f"{path}:{n}: empty key")
        out[key.replace("-", "_")] = _coerce(value)
    return out


def write_config(path, values):
    lines = []
    for key in sorted(values):
        v = values[key]
        if isinstance(v, (list, tuple)):
            v = ", ".join(str(x) for x in v)
        lines.append(f"{key} = {v}")
    atomic_write_text(path, "\n".join(lines) + "\n")


def file_sha256(path):
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            digest.update(chunk)
    return digest.hexdigest()


@dataclass
class RunManifest:
    command: str
    config: dict
    input_hash: str = ""
    seed: int = None
    tool_version: str = __version__
    wall_time_s: float = 0.0
    outputs: list = field(default_factory=list)

    def write(self, directory):
        atomic_write_text(os.path.join(directory, MANIFEST_NAME),
                          json.dumps(asdict(self), indent=2, sort_keys=True, default=_jsonable) + "\n")

    @classmethod
    def read(cls, directory):
        with open(os.path.join(directory, MANIFEST_NAME)) as fh:
            return cls(**json.load(fh))


def _jsonable(value):
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    raise TypeError(f"cannot serialize {type(value).__name__}")
