"""Obfuscation countermeasures against sensor fingerprinting.

Two composable defenses rewrite a trace before it leaves the device:

* Session affine: at the start of each session, draw one random
  (gain, offset) pair per axis and apply ``v' = gain * v + offset`` to
  every sample.  This shifts the device's calibration fingerprint to a
  random point per session.
* Sample injection: walk the gaps between consecutive samples; with
  probability ``inject_prob`` per gap, insert a fake sample at a random
  time inside the gap whose value is the linear interpolation of the
  raw neighbours distorted by a freshly drawn per-axis (gain, offset)
  pair.

Draws are deterministic given the policy seed and the trace's
device/session identity, so re-running a policy reproduces the exact
output.
"""

import hashlib
from dataclasses import dataclass

import numpy as np

from sensorprint._validation import check_positive, check_probability
from sensorprint.errors import ValidationError

ACCEL_OFFSET_RANGE = (-0.5, 0.5)  # m/s^2
GYRO_OFFSET_RANGE = (-0.1, 0.1)   # rad/s
GAIN_RANGE = (0.95, 1.05)

# Scaled gain intervals are clamped to stay positive so the affine map
# never collapses or mirrors the signal.
MIN_GAIN = 1e-3


@dataclass(frozen=True)
class ObfuscationPolicy:
    """Configuration of the obfuscation transform.

    Parameters
    ----------
    seed : int
        Base seed; combined with the session identity for draws.
    range_scale : float
        Linear scaling of the draw intervals about their midpoints
        (1.0 = the base ranges).
    inject_prob : float
        Per-gap probability of inserting one fake sample.
    """

    seed: int = 0
    range_scale: float = 1.0
    inject_prob: float = 0.0

    def __post_init__(self):
        check_positive(self.range_scale, name="range_scale")
        check_probability(self.inject_prob, name="inject_prob")

    def offset_interval(self, sensor):
        base = ACCEL_OFFSET_RANGE if sensor == "accel" else GYRO_OFFSET_RANGE
        return _scale_interval(base, self.range_scale)

    def gain_interval(self):
        lo, hi = _scale_interval(GAIN_RANGE, self.range_scale)
        return max(lo, MIN_GAIN), max(hi, MIN_GAIN)


def _scale_interval(interval, k):
    lo, hi = interval
    mid = (lo + hi) / 2.0
    half = (hi - lo) / 2.0 * k
    return mid - half, mid + half


def session_rng(policy, trace):
    """Deterministic generator for one trace's obfuscation draws.

    Keyed on the policy seed plus a digest of the device/session
    identity, so distinct sessions draw independently and re-runs are
    reproducible.  The device id is length-prefixed so no two distinct
    (device, session) pairs can share a digest.
    """
    device = trace.device_id.encode("utf-8")
    session = trace.session_id.encode("utf-8")
    key = str(len(device)).encode("ascii") + b":" + device + b":" + session
    digest = hashlib.sha256(key).digest()
    words = [int.from_bytes(digest[i:i + 4], "little") for i in range(0, 16, 4)]
    return np.random.default_rng(np.random.SeedSequence([int(policy.seed), *words]))


def _draw_affine(rng, policy):
    """One (gain, offset) pair per axis, accel x..z then gyro x..z."""
    gains = np.empty(6)
    offsets = np.empty(6)
    for axis in range(6):
        sensor = "accel" if axis < 3 else "gyro"
        gains[axis] = rng.uniform(*policy.gain_interval())
        offsets[axis] = rng.uniform(*policy.offset_interval(sensor))
    return gains, offsets


def _apply_affine(accel, gyro, gains, offsets):
    return accel * gains[:3] + offsets[:3], gyro * gains[3:] + offsets[3:]


def apply_session_affine(trace, policy):
    """Apply only the per-session affine rewrite to a trace."""
    rng = session_rng(policy, trace)
    gains, offsets = _draw_affine(rng, policy)
    accel, gyro = _apply_affine(trace.accel, trace.gyro, gains, offsets)
    return trace.replace(accel=accel, gyro=gyro)


def obfuscate_trace(trace, policy):
    """Apply the full obfuscation transform to a trace.

    The session affine pair is drawn first and applied to every
    original sample; injection then walks the gaps of the original
    timestamp axis.  Fake samples interpolate the outgoing
    (already-transformed) stream, not the raw one -- a fake built from
    raw values would leak the device's unobfuscated magnitudes through
    its dispersion.  With ``inject_prob=0`` the result equals
    :func:`apply_session_affine` exactly.
    """
    rng = session_rng(policy, trace)
    gains, offsets = _draw_affine(rng, policy)
    accel, gyro = _apply_affine(trace.accel, trace.gyro, gains, offsets)

    if policy.inject_prob == 0:
        return trace.replace(accel=accel, gyro=gyro)

    t = trace.t_ms
    outgoing = np.concatenate([accel, gyro], axis=1)  # (n, 6)
    fake_rows = []
    for i in range(t.size - 1):
        if rng.random() >= policy.inject_prob:
            continue
        fake_gains, fake_offsets = _draw_affine(rng, policy)
        t_star = t[i] + rng.random() * (t[i + 1] - t[i])
        frac = (t_star - t[i]) / (t[i + 1] - t[i])
        base = outgoing[i] + frac * (outgoing[i + 1] - outgoing[i])
        fake_rows.append(np.concatenate([[t_star], base * fake_gains + fake_offsets]))

    samples = np.column_stack([t, accel, gyro])
    if fake_rows:
        samples = np.concatenate([samples, np.asarray(fake_rows)], axis=0)
    return trace.from_samples(
        samples,
        device_id=trace.device_id,
        session_id=trace.session_id,
        audio_mode=trace.audio_mode,
        placement=trace.placement,
    )


def obfuscate_traces(traces, policy):
    """Obfuscate a sequence of traces under one policy."""
    if not isinstance(policy, ObfuscationPolicy):
        raise ValidationError("policy must be an ObfuscationPolicy")
    return [obfuscate_trace(t, policy) for t in traces]
