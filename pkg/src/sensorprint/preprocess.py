"""Stream extraction and uniform resampling.

A trace yields four scalar streams: the accelerometer magnitude and the
three gyroscope axes.  Temporal statistics are computed on the raw,
irregularly-sampled stream; spectral analysis requires a uniform grid,
obtained by fitting a natural cubic spline to the raw stream and
evaluating it at a fixed rate (8 kHz by default).
"""

from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline

from sensorprint.errors import ValidationError

STREAMS = ("accel_magnitude", "gyro_x", "gyro_y", "gyro_z")

DEFAULT_RESAMPLE_RATE_HZ = 8000.0


def raw_stream(trace, stream):
    """Return ``(t_ms, values)`` for one of the four scalar streams.

    ``accel_magnitude`` is the Euclidean norm of the three accelerometer
    axes; ``gyro_x``/``gyro_y``/``gyro_z`` are the rotation-rate axes.
    """
    if stream == "accel_magnitude":
        values = np.sqrt(np.sum(trace.accel ** 2, axis=1))
    elif stream == "gyro_x":
        values = trace.gyro[:, 0]
    elif stream == "gyro_y":
        values = trace.gyro[:, 1]
    elif stream == "gyro_z":
        values = trace.gyro[:, 2]
    else:
        raise ValidationError(f"unknown stream {stream!r}, expected one of {STREAMS}")
    return trace.t_ms, np.asarray(values, dtype=np.float64)


@dataclass(frozen=True)
class UniformStream:
    """A stream resampled onto a uniform grid.

    Attributes
    ----------
    values : ndarray of shape (n,)
        Samples at ``t0_ms + 1000 * i / rate_hz`` for ``i = 0..n-1``.
    rate_hz : float
        Sampling rate of the grid.
    t0_ms : float
        Timestamp of the first grid point (anchored at the first raw
        sample).
    """

    values: np.ndarray
    rate_hz: float
    t0_ms: float

    @property
    def n_samples(self):
        return int(self.values.shape[0])

    @property
    def duration_s(self):
        return (self.n_samples - 1) / self.rate_hz


def resample_stream(t_ms, values, rate_hz=DEFAULT_RESAMPLE_RATE_HZ):
    """Resample an irregular stream onto a uniform grid.

    Fits a natural cubic spline (zero second derivative at both ends) to
    ``values`` over ``t_ms`` and evaluates it on a grid anchored at the
    first timestamp.  The grid covers the full span of the input:
    ``n = floor(duration_s * rate_hz) + 1`` points.

    Parameters
    ----------
    t_ms : array of shape (n,)
        Strictly increasing timestamps in milliseconds.
    values : array of shape (n,)
        Stream samples at ``t_ms``.
    rate_hz : float
        Target grid rate in Hz.

    Returns
    -------
    UniformStream
    """
    t_ms = np.asarray(t_ms, dtype=np.float64).reshape(-1)
    values = np.asarray(values, dtype=np.float64).reshape(-1)
    if t_ms.shape != values.shape:
        raise ValidationError(
            f"t_ms and values must have equal length, got {t_ms.shape[0]} and {values.shape[0]}"
        )
    if t_ms.shape[0] < 2:
        raise ValidationError("resampling needs at least 2 samples")
    if not np.all(np.diff(t_ms) > 0):
        raise ValidationError("t_ms must be strictly increasing")
    if rate_hz <= 0 or not np.isfinite(rate_hz):
        raise ValidationError(f"rate_hz must be > 0, got {rate_hz!r}")

    t_s = (t_ms - t_ms[0]) / 1000.0
    duration_s = t_s[-1]
    n_out = int(np.floor(duration_s * rate_hz)) + 1
    grid = np.arange(n_out) / rate_hz

    spline = CubicSpline(t_s, values, bc_type="natural")
    out = spline(grid)
    return UniformStream(values=out, rate_hz=float(rate_hz), t0_ms=float(t_ms[0]))


def uniform_streams(trace, streams=STREAMS, rate_hz=DEFAULT_RESAMPLE_RATE_HZ):
    """Resample each requested stream of a trace; returns a dict."""
    out = {}
    for name in streams:
        t_ms, values = raw_stream(trace, name)
        out[name] = resample_stream(t_ms, values, rate_hz)
    return out
