"""Per-axis affine sensor calibration.

Both sensors follow the measurement model ``measured = O + S * true``
per axis.  Calibration estimates the offset O and gain (scale) S from
controlled procedures and inverts the model:

* Accelerometer: the six-position method.  With the axis aligned along
  and against gravity, ``a+ = O + S*g`` and ``a- = O - S*g``, so
  ``S = (a+ - a-) / (2g)`` and ``O = (a+ + a-) / 2``.
* Gyroscope: one rotation of known angle in each direction per axis.
  The integrated measured angle over a rotation window of duration t is
  ``theta_m = O*t + S*theta``, so two opposite rotations give
  ``O = (theta+ + theta-) / (t1 + t2)`` and
  ``S = (theta+ - theta- - O*(t1 - t2)) / (2*theta)``.

Models serialize to JSON as ``{"sensor", "O", "S"}``.
"""

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from sensorprint.errors import ValidationError

STANDARD_GRAVITY = 9.81

ORIENTATIONS = ("x+", "x-", "y+", "y-", "z+", "z-")

SENSORS = ("accel", "gyro")

ROTATION_RATE_THRESHOLD = 0.05  # rad/s
ROTATION_PAD_MS = 100.0

_AXES = ("x", "y", "z")


@dataclass(frozen=True)
class CalibrationModel:
    """Estimated per-axis offsets and gains for one sensor."""

    sensor: str
    O: np.ndarray
    S: np.ndarray

    def __post_init__(self):
        if self.sensor not in SENSORS:
            raise ValidationError(f"sensor must be one of {SENSORS}, got {self.sensor!r}")
        O = np.asarray(self.O, dtype=np.float64).reshape(-1)
        S = np.asarray(self.S, dtype=np.float64).reshape(-1)
        if O.shape != (3,) or S.shape != (3,):
            raise ValidationError("O and S must each hold 3 per-axis values")
        if not (np.all(np.isfinite(O)) and np.all(np.isfinite(S))):
            raise ValidationError("calibration model contains non-finite values")
        if np.any(S == 0):
            raise ValidationError("calibration gains must be non-zero")
        object.__setattr__(self, "O", O)
        object.__setattr__(self, "S", S)

    def to_dict(self):
        return {"sensor": self.sensor, "O": self.O.tolist(), "S": self.S.tolist()}

    @classmethod
    def from_dict(cls, obj):
        for key in ("sensor", "O", "S"):
            if key not in obj:
                raise ValidationError(f"calibration model is missing {key!r}")
        return cls(sensor=obj["sensor"], O=obj["O"], S=obj["S"])


def save_calibration(model, path):
    path = Path(path)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(model.to_dict(), fh, indent=2)
        fh.write("\n")
    return path


def load_calibration(path):
    path = Path(path)
    try:
        with open(path, encoding="utf-8") as fh:
            obj = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: invalid calibration JSON: {exc.msg}") from exc
    if not isinstance(obj, dict):
        raise ValidationError(f"{path}: calibration file must hold a JSON object")
    return CalibrationModel.from_dict(obj)


def _check_orientations(traces):
    missing = [o for o in ORIENTATIONS if o not in traces]
    if missing:
        raise ValidationError(
            f"calibration needs all six orientations; missing {', '.join(missing)}"
        )


def estimate_accel_calibration(traces, g=STANDARD_GRAVITY):
    """Six-position accelerometer calibration.

    Parameters
    ----------
    traces : mapping
        Orientation key (``x+`` ... ``z-``) to the stationary trace
        recorded with that axis pointing up (+) or down (-).
    g : float
        Gravity magnitude used as the reference, in m/s^2.

    Returns
    -------
    CalibrationModel
    """
    _check_orientations(traces)
    if g <= 0:
        raise ValidationError(f"g must be > 0, got {g}")
    O = np.empty(3)
    S = np.empty(3)
    for i, axis in enumerate(_AXES):
        a_plus = float(np.mean(traces[f"{axis}+"].accel[:, i]))
        a_minus = float(np.mean(traces[f"{axis}-"].accel[:, i]))
        S[i] = (a_plus - a_minus) / (2.0 * g)
        O[i] = (a_plus + a_minus) / 2.0
        if S[i] == 0:
            raise ValidationError(
                f"degenerate accelerometer data on axis {axis}: zero estimated gain"
            )
    return CalibrationModel(sensor="accel", O=O, S=S)


def rotation_window(trace, axis, *, rate_threshold=ROTATION_RATE_THRESHOLD,
                    pad_ms=ROTATION_PAD_MS):
    """Sample range covering the rotation in a single-rotation trace.

    The window spans the samples where the axis rate magnitude exceeds
    ``rate_threshold``, padded by ``pad_ms`` on both sides and clipped
    to the trace.  Returns ``(start, stop)`` sample indices
    (half-open).
    """
    rate = trace.gyro[:, axis]
    above = np.nonzero(np.abs(rate) > rate_threshold)[0]
    if above.size == 0:
        raise ValidationError(
            f"no rotation detected on axis {_AXES[axis]} "
            f"(threshold {rate_threshold} rad/s)"
        )
    t = trace.t_ms
    t_lo = t[above[0]] - pad_ms
    t_hi = t[above[-1]] + pad_ms
    start = int(np.searchsorted(t, t_lo, side="left"))
    stop = int(np.searchsorted(t, t_hi, side="right"))
    if stop - start < 2:
        raise ValidationError("rotation window holds fewer than 2 samples")
    return start, stop


def integrate_rotation(trace, axis, **window_kwargs):
    """Integrated measured angle and duration of a rotation trace.

    Returns ``(theta_measured, duration_s)`` where the angle is the
    trapezoidal integral of the axis rate over the detected rotation
    window and the duration is the window length in seconds.
    """
    start, stop = rotation_window(trace, axis, **window_kwargs)
    t_s = trace.t_ms[start:stop] / 1000.0
    rate = trace.gyro[start:stop, axis]
    theta = float(np.trapezoid(rate, t_s))
    return theta, float(t_s[-1] - t_s[0])


def gyro_model_from_integrals(theta_plus, theta_minus, t_plus, t_minus, angle):
    """Solve the two-rotation system for one axis.

    ``theta_plus``/``theta_minus`` are integrated measured angles of
    the +angle and -angle rotations, over windows of duration
    ``t_plus``/``t_minus`` seconds.  Returns ``(offset, gain)``.
    """
    if angle <= 0:
        raise ValidationError(f"rotation angle must be > 0, got {angle}")
    if t_plus <= 0 or t_minus <= 0:
        raise ValidationError("rotation window durations must be > 0")
    offset = (theta_plus + theta_minus) / (t_plus + t_minus)
    gain = (theta_plus - theta_minus - offset * (t_plus - t_minus)) / (2.0 * angle)
    return offset, gain


def estimate_gyro_calibration(traces, angle, **window_kwargs):
    """Two-rotation gyroscope calibration.

    Parameters
    ----------
    traces : mapping
        Orientation key (``x+`` ... ``z-``) to the trace of a single
        rotation by ``+angle`` (+) or ``-angle`` (-) about that axis.
    angle : float
        Nominal rotation magnitude in radians.

    Returns
    -------
    CalibrationModel
    """
    _check_orientations(traces)
    O = np.empty(3)
    S = np.empty(3)
    for i, axis in enumerate(_AXES):
        theta_p, t_p = integrate_rotation(traces[f"{axis}+"], i, **window_kwargs)
        theta_m, t_m = integrate_rotation(traces[f"{axis}-"], i, **window_kwargs)
        O[i], S[i] = gyro_model_from_integrals(theta_p, theta_m, t_p, t_m, angle)
        if S[i] == 0:
            raise ValidationError(
                f"degenerate gyroscope data on axis {axis}: zero estimated gain"
            )
    return CalibrationModel(sensor="gyro", O=O, S=S)


def apply_calibration(trace, model):
    """Invert the affine sensor model: ``true = (measured - O) / S``.

    Returns a new trace with the corresponding sensor's samples
    replaced; the other sensor is untouched.
    """
    if model.sensor == "accel":
        return trace.replace(accel=(trace.accel - model.O) / model.S)
    return trace.replace(gyro=(trace.gyro - model.O) / model.S)
