"""Sensor trace data model and file formats.

A trace is one recording session from one device: a shared timestamp
axis in milliseconds plus tri-axial accelerometer (m/s^2) and gyroscope
(rad/s) samples, tagged with device/session identity and capture
conditions.

Two on-disk formats are supported and round-trip losslessly:

* JSON: a single object
  ``{"device_id", "session_id", "audio_mode", "placement", "samples"}``
  where ``samples`` is a list of ``[t_ms, ax, ay, az, gx, gy, gz]`` rows.
* CSV: a ``t_ms,ax,ay,az,gx,gy,gz`` table with the identity fields in a
  ``<name>.meta.json`` sidecar next to the data file.
"""

import csv
import dataclasses
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from sensorprint.errors import TraceParseError, ValidationError

AUDIO_MODES = ("none", "sine20k", "song")
PLACEMENTS = ("desk", "hand")

CSV_HEADER = ("t_ms", "ax", "ay", "az", "gx", "gy", "gz")

_META_FIELDS = ("device_id", "session_id", "audio_mode", "placement")


def _freeze(a):
    a = np.ascontiguousarray(a, dtype=np.float64)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class SensorTrace:
    """One recorded session: timestamps plus accel/gyro sample arrays.

    Construction canonicalizes the sample axis: rows are stably sorted
    by timestamp and duplicate timestamps are dropped keeping the first
    occurrence.  The stored arrays are read-only; transforms produce new
    traces via :meth:`replace`.

    Attributes
    ----------
    t_ms : ndarray of shape (n,)
        Strictly increasing timestamps in milliseconds.
    accel : ndarray of shape (n, 3)
        Accelerometer samples in m/s^2 (x, y, z).
    gyro : ndarray of shape (n, 3)
        Gyroscope samples in rad/s (x, y, z).
    """

    t_ms: np.ndarray
    accel: np.ndarray
    gyro: np.ndarray
    device_id: str
    session_id: str
    audio_mode: str = "none"
    placement: str = "desk"

    def __post_init__(self):
        t = np.asarray(self.t_ms, dtype=np.float64).reshape(-1)
        accel = np.asarray(self.accel, dtype=np.float64)
        gyro = np.asarray(self.gyro, dtype=np.float64)
        if accel.shape != (t.shape[0], 3) or gyro.shape != (t.shape[0], 3):
            raise ValidationError(
                "accel and gyro must have shape (n, 3) matching t_ms; got "
                f"t_ms {t.shape}, accel {accel.shape}, gyro {gyro.shape}"
            )
        if not (np.all(np.isfinite(t)) and np.all(np.isfinite(accel)) and np.all(np.isfinite(gyro))):
            raise ValidationError("trace contains NaN or infinite values")

        # Canonical ordering: stable sort by timestamp, then drop
        # duplicate timestamps keeping the first occurrence.
        order = np.argsort(t, kind="stable")
        t, accel, gyro = t[order], accel[order], gyro[order]
        keep = np.ones(t.shape[0], dtype=bool)
        keep[1:] = t[1:] != t[:-1]
        if not keep.all():
            t, accel, gyro = t[keep], accel[keep], gyro[keep]

        if t.shape[0] < 2:
            raise ValidationError(
                f"trace needs at least 2 distinct timestamps, got {t.shape[0]}"
            )

        for name, value in (("device_id", self.device_id), ("session_id", self.session_id)):
            if not isinstance(value, str) or not value:
                raise ValidationError(f"{name} must be a non-empty string, got {value!r}")
        if self.audio_mode not in AUDIO_MODES:
            raise ValidationError(
                f"audio_mode must be one of {AUDIO_MODES}, got {self.audio_mode!r}"
            )
        if self.placement not in PLACEMENTS:
            raise ValidationError(
                f"placement must be one of {PLACEMENTS}, got {self.placement!r}"
            )

        object.__setattr__(self, "t_ms", _freeze(t))
        object.__setattr__(self, "accel", _freeze(accel))
        object.__setattr__(self, "gyro", _freeze(gyro))

    @classmethod
    def from_samples(cls, samples, *, device_id, session_id,
                     audio_mode="none", placement="desk"):
        """Build a trace from an (n, 7) array of sample rows."""
        samples = np.asarray(samples, dtype=np.float64)
        if samples.ndim != 2 or samples.shape[1] != 7:
            raise ValidationError(
                f"samples must have shape (n, 7), got {samples.shape}"
            )
        return cls(
            t_ms=samples[:, 0],
            accel=samples[:, 1:4],
            gyro=samples[:, 4:7],
            device_id=device_id,
            session_id=session_id,
            audio_mode=audio_mode,
            placement=placement,
        )

    @property
    def n_samples(self):
        return int(self.t_ms.shape[0])

    @property
    def duration_ms(self):
        return float(self.t_ms[-1] - self.t_ms[0])

    @property
    def samples(self):
        """All channels as one (n, 7) array: t_ms, ax..az, gx..gz."""
        return np.column_stack([self.t_ms, self.accel, self.gyro])

    def replace(self, **changes):
        """Return a copy with the given fields replaced (re-validated)."""
        return dataclasses.replace(self, **changes)

    def metadata(self):
        return {
            "device_id": self.device_id,
            "session_id": self.session_id,
            "audio_mode": self.audio_mode,
            "placement": self.placement,
        }


def _parse_metadata(obj, source):
    meta = {}
    for key in _META_FIELDS:
        if key not in obj:
            raise TraceParseError(f"missing required field {key!r}", source=source)
        meta[key] = obj[key]
    return meta


def _build_trace(meta, samples, source):
    try:
        return SensorTrace.from_samples(samples, **meta)
    except TraceParseError:
        raise
    except ValidationError as exc:
        raise TraceParseError(str(exc), source=source) from exc


def read_trace_json(path):
    """Load a trace from a JSON file.

    Raises
    ------
    TraceParseError
        On malformed JSON, missing fields, bad sample rows or any
        violated trace invariant.  The error message includes the file
        and, for syntax errors, the line.
    """
    path = Path(path)
    try:
        with open(path, encoding="utf-8") as fh:
            obj = json.load(fh)
    except json.JSONDecodeError as exc:
        raise TraceParseError(f"invalid JSON: {exc.msg}", source=path, line=exc.lineno) from exc
    except OSError as exc:
        raise TraceParseError(f"cannot read file: {exc.strerror}", source=path) from exc

    if not isinstance(obj, dict):
        raise TraceParseError("top-level JSON value must be an object", source=path)
    meta = _parse_metadata(obj, path)
    samples = obj.get("samples")
    if not isinstance(samples, list):
        raise TraceParseError("missing or non-array 'samples' field", source=path)
    for i, row in enumerate(samples):
        if not isinstance(row, list) or len(row) != 7:
            raise TraceParseError(
                f"sample {i} must be an array of 7 numbers, got {row!r}", source=path
            )
        for v in row:
            if not isinstance(v, (int, float)) or isinstance(v, bool):
                raise TraceParseError(
                    f"sample {i} contains a non-numeric entry {v!r}", source=path
                )
    arr = np.asarray(samples, dtype=np.float64) if samples else np.empty((0, 7))
    return _build_trace(meta, arr.reshape(-1, 7), path)


def write_trace_json(trace, path):
    """Write a trace as canonical JSON (lossless float round-trip)."""
    path = Path(path)
    obj = dict(trace.metadata())
    obj["samples"] = [[float(v) for v in row] for row in trace.samples]
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh)
        fh.write("\n")
    return path


def _meta_sidecar(path):
    path = Path(path)
    return path.with_name(path.stem + ".meta.json")


def read_trace_csv(path):
    """Load a trace from a CSV file plus its ``<name>.meta.json`` sidecar."""
    path = Path(path)
    sidecar = _meta_sidecar(path)
    try:
        with open(sidecar, encoding="utf-8") as fh:
            meta_obj = json.load(fh)
    except FileNotFoundError:
        raise TraceParseError(
            f"missing metadata sidecar {sidecar.name}", source=path
        ) from None
    except json.JSONDecodeError as exc:
        raise TraceParseError(
            f"invalid JSON: {exc.msg}", source=sidecar, line=exc.lineno
        ) from exc
    if not isinstance(meta_obj, dict):
        raise TraceParseError("sidecar must hold a JSON object", source=sidecar)
    meta = _parse_metadata(meta_obj, sidecar)

    rows = []
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header is None or tuple(h.strip() for h in header) != CSV_HEADER:
                raise TraceParseError(
                    f"header must be {','.join(CSV_HEADER)}", source=path, line=1
                )
            for lineno, row in enumerate(reader, start=2):
                if not row:
                    continue
                if len(row) != 7:
                    raise TraceParseError(
                        f"expected 7 columns, got {len(row)}", source=path, line=lineno
                    )
                try:
                    rows.append([float(v) for v in row])
                except ValueError:
                    raise TraceParseError(
                        f"non-numeric value in row: {row!r}", source=path, line=lineno
                    ) from None
    except OSError as exc:
        raise TraceParseError(f"cannot read file: {exc.strerror}", source=path) from exc

    arr = np.asarray(rows, dtype=np.float64) if rows else np.empty((0, 7))
    return _build_trace(meta, arr, path)


def write_trace_csv(trace, path):
    """Write a trace as CSV plus a ``<name>.meta.json`` metadata sidecar."""
    path = Path(path)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_HEADER)
        for row in trace.samples:
            writer.writerow([repr(float(v)) for v in row])
    with open(_meta_sidecar(path), "w", encoding="utf-8") as fh:
        json.dump(trace.metadata(), fh, indent=2)
        fh.write("\n")
    return path


def load_trace(path):
    """Load a trace from ``path``, dispatching on the file extension."""
    path = Path(path)
    suffix = path.suffix.lower()
    if suffix == ".json":
        return read_trace_json(path)
    if suffix == ".csv":
        return read_trace_csv(path)
    raise ValidationError(f"unsupported trace extension {path.suffix!r} (use .json or .csv)")


def save_trace(trace, path):
    """Save a trace to ``path``, dispatching on the file extension."""
    path = Path(path)
    suffix = path.suffix.lower()
    if suffix == ".json":
        return write_trace_json(trace, path)
    if suffix == ".csv":
        return write_trace_csv(trace, path)
    raise ValidationError(f"unsupported trace extension {path.suffix!r} (use .json or .csv)")
