"""Synthetic sensor fleet generation.

Devices are simulated with the same affine error model the calibration
and obfuscation modules assume: every axis of both sensors measures
``O + S * true`` plus stationary AR(1) sensor noise.  Per-device error
parameters are drawn once per fleet and reused for every session, so
the fleet carries a ground-truth fingerprint that classification,
calibration and obfuscation experiments can be scored against.

Device quality is a single latent factor: it drives the noise standard
deviations of both sensors and the AR(1) correlation (noise color)
jointly.  Offsets and gains are drawn independently per axis.
"""

import math
from dataclasses import asdict, dataclass, field, replace

import numpy as np
from scipy.signal import lfilter

from sensorprint.errors import ValidationError
from sensorprint.traces import AUDIO_MODES, PLACEMENTS, SensorTrace
from sensorprint.calibrate import ORIENTATIONS, STANDARD_GRAVITY

_AXES = ("x", "y", "z")


@dataclass(frozen=True)
class FleetConfig:
    """Parameters of a synthetic fleet.

    Ranges are inclusive uniform intervals; degenerate ranges (lo == hi)
    pin the value for every device.
    """

    n_devices: int = 30
    sessions_per_device: int = 10
    duration_s: float = 5.0
    rate_hz: float = 100.0
    seed: int = 0
    placement: str = "desk"
    audio_mode: str = "none"
    timing_jitter_ms: float = 1.0
    accel_offset_range: tuple = (-0.5, 0.5)
    gyro_offset_range: tuple = (-0.1, 0.1)
    gain_range: tuple = (0.95, 1.05)
    accel_sigma_range: tuple = (0.005, 0.05)
    gyro_sigma_range: tuple = (0.0005, 0.005)
    noise_color_range: tuple = (0.1, 0.6)

    def __post_init__(self):
        if self.n_devices < 1:
            raise ValidationError(f"n_devices must be >= 1, got {self.n_devices}")
        if self.sessions_per_device < 1:
            raise ValidationError(
                f"sessions_per_device must be >= 1, got {self.sessions_per_device}"
            )
        if self.duration_s <= 0:
            raise ValidationError(f"duration_s must be > 0, got {self.duration_s}")
        if self.rate_hz <= 0:
            raise ValidationError(f"rate_hz must be > 0, got {self.rate_hz}")
        if self.placement not in PLACEMENTS:
            raise ValidationError(f"placement must be one of {PLACEMENTS}")
        if self.audio_mode not in AUDIO_MODES:
            raise ValidationError(f"audio_mode must be one of {AUDIO_MODES}")
        half_step_ms = 500.0 / self.rate_hz
        if not 0 <= self.timing_jitter_ms < half_step_ms:
            raise ValidationError(
                "timing_jitter_ms must be in [0, half the sample period) "
                f"= [0, {half_step_ms}), got {self.timing_jitter_ms}"
            )
        for name in ("accel_offset_range", "gyro_offset_range", "gain_range",
                     "accel_sigma_range", "gyro_sigma_range", "noise_color_range"):
            lo, hi = getattr(self, name)
            if not (math.isfinite(lo) and math.isfinite(hi) and lo <= hi):
                raise ValidationError(f"{name} must be a finite (lo, hi) with lo <= hi")
        lo, hi = self.noise_color_range
        if lo < 0 or hi >= 1:
            raise ValidationError("noise_color_range must lie in [0, 1)")
        if self.accel_sigma_range[0] < 0 or self.gyro_sigma_range[0] < 0:
            raise ValidationError("noise sigma ranges must be non-negative")

    def to_dict(self):
        d = asdict(self)
        for key, value in d.items():
            if isinstance(value, tuple):
                d[key] = list(value)
        return d

    @classmethod
    def from_dict(cls, obj):
        fields = {f: tuple(v) if isinstance(v, list) else v for f, v in obj.items()}
        try:
            return cls(**fields)
        except TypeError as exc:
            raise ValidationError(f"bad fleet config: {exc}") from exc


@dataclass(frozen=True)
class DeviceProfile:
    """Ground-truth error model of one simulated device."""

    device_id: str
    accel_offset: tuple
    accel_gain: tuple
    gyro_offset: tuple
    gyro_gain: tuple
    accel_sigma: float
    gyro_sigma: float
    noise_color: float

    def to_dict(self):
        d = asdict(self)
        for key in ("accel_offset", "accel_gain", "gyro_offset", "gyro_gain"):
            d[key] = list(d[key])
        return d

    @classmethod
    def from_dict(cls, obj):
        fields = {f: tuple(v) if isinstance(v, list) else v for f, v in obj.items()}
        try:
            return cls(**fields)
        except TypeError as exc:
            raise ValidationError(f"bad device profile: {exc}") from exc


def _lerp(interval, u):
    lo, hi = interval
    return lo + (hi - lo) * u


def sample_fleet(config):
    """Draw the per-device error models of a fleet.

    Devices are drawn sequentially from one generator, so fleets with
    the same seed nest: the first k devices of a larger fleet equal
    the k-device fleet.
    """
    rng = np.random.default_rng(np.random.SeedSequence([config.seed, 0]))
    profiles = []
    for i in range(config.n_devices):
        quality = rng.random()
        accel_offset = rng.uniform(*config.accel_offset_range, 3)
        accel_gain = rng.uniform(*config.gain_range, 3)
        gyro_offset = rng.uniform(*config.gyro_offset_range, 3)
        gyro_gain = rng.uniform(*config.gain_range, 3)
        profiles.append(DeviceProfile(
            device_id=f"dev{i:03d}",
            accel_offset=tuple(float(v) for v in accel_offset),
            accel_gain=tuple(float(v) for v in accel_gain),
            gyro_offset=tuple(float(v) for v in gyro_offset),
            gyro_gain=tuple(float(v) for v in gyro_gain),
            accel_sigma=float(_lerp(config.accel_sigma_range, quality)),
            gyro_sigma=float(_lerp(config.gyro_sigma_range, quality)),
            noise_color=float(_lerp(config.noise_color_range, quality)),
        ))
    return profiles


def _ar1_noise(rng, n, n_channels, sigma, phi):
    """Stationary AR(1) noise: std ``sigma``, lag-1 correlation ``phi``."""
    if sigma == 0:
        return np.zeros((n, n_channels))
    innovation_std = sigma * math.sqrt(1.0 - phi * phi)
    w = rng.standard_normal((n, n_channels)) * innovation_std
    if phi == 0:
        return w
    x0 = rng.standard_normal(n_channels) * sigma
    zi = (phi * x0)[None, :]
    y, _ = lfilter([1.0], [1.0, -phi], w, axis=0, zi=zi)
    return y


def _measure(profile, accel_true, gyro_true, rng):
    """Push true motion through the device's affine error model + noise."""
    n = accel_true.shape[0]
    accel_noise = _ar1_noise(rng, n, 3, profile.accel_sigma, profile.noise_color)
    gyro_noise = _ar1_noise(rng, n, 3, profile.gyro_sigma, profile.noise_color)
    accel = accel_true * np.asarray(profile.accel_gain) + np.asarray(profile.accel_offset)
    gyro = gyro_true * np.asarray(profile.gyro_gain) + np.asarray(profile.gyro_offset)
    return accel + accel_noise, gyro + gyro_noise


def _timestamps(config, rng, n):
    step_ms = 1000.0 / config.rate_hz
    t = np.arange(n) * step_ms
    if config.timing_jitter_ms > 0 and n > 1:
        jitter = rng.uniform(-config.timing_jitter_ms, config.timing_jitter_ms, n - 1)
        t[1:] += jitter
    return t


def _tremor(rng, t_s, amp_range):
    """Sum of three low-frequency sinusoids with random 3-D direction."""
    out = np.zeros((t_s.size, 3))
    for _ in range(3):
        amp = rng.uniform(*amp_range)
        freq = rng.uniform(0.5, 4.0)
        phase = rng.uniform(0.0, 2.0 * math.pi)
        direction = rng.uniform(-1.0, 1.0, 3)
        norm = np.linalg.norm(direction)
        if norm > 0:
            direction /= norm
        out += amp * np.outer(np.sin(2.0 * math.pi * freq * t_s + phase), direction)
    return out


def _device_resonance(config, device_index):
    """Per-device audio-stimulation response (stable across sessions)."""
    rng = np.random.default_rng(np.random.SeedSequence([config.seed, 4, device_index]))
    amp = rng.uniform(0.0, 0.02)
    freq = rng.uniform(20.0, 45.0)
    return amp, freq


def generate_session(profile, config, device_index, session_index):
    """Generate one recording session of a device."""
    rng = np.random.default_rng(
        np.random.SeedSequence([config.seed, 1, device_index, session_index])
    )
    n = int(math.floor(config.duration_s * config.rate_hz)) + 1
    t_ms = _timestamps(config, rng, n)
    t_s = t_ms / 1000.0

    accel_true = np.zeros((n, 3))
    accel_true[:, 2] = STANDARD_GRAVITY
    gyro_true = np.zeros((n, 3))

    if config.placement == "hand":
        accel_true += _tremor(rng, t_s, (0.05, 0.3))
        gyro_true += _tremor(rng, t_s, (0.02, 0.1))

    if config.audio_mode == "sine20k":
        amp, freq = _device_resonance(config, device_index)
        phase = rng.uniform(0.0, 2.0 * math.pi)
        vibration = amp * np.sin(2.0 * math.pi * freq * t_s + phase)
        accel_true += vibration[:, None]
        gyro_true += (vibration / 10.0)[:, None]
    elif config.audio_mode == "song":
        for _ in range(5):
            amp = rng.uniform(0.002, 0.01)
            freq = rng.uniform(2.0, 45.0)
            phase = rng.uniform(0.0, 2.0 * math.pi)
            tone = amp * np.sin(2.0 * math.pi * freq * t_s + phase)
            accel_true += tone[:, None]
            gyro_true += (tone / 10.0)[:, None]

    accel, gyro = _measure(profile, accel_true, gyro_true, rng)
    return SensorTrace(
        t_ms=t_ms, accel=accel, gyro=gyro,
        device_id=profile.device_id,
        session_id=f"s{session_index:02d}",
        audio_mode=config.audio_mode,
        placement=config.placement,
    )


def generate_fleet(config, profiles=None):
    """Generate all sessions of a fleet; returns a flat list of traces."""
    if profiles is None:
        profiles = sample_fleet(config)
    traces = []
    for d, profile in enumerate(profiles):
        for s in range(config.sessions_per_device):
            traces.append(generate_session(profile, config, d, s))
    return traces


def generate_accel_calibration_traces(profile, config, device_index, *,
                                      duration_s=2.0):
    """Six stationary orientation traces for accelerometer calibration.

    Timestamps are uniform (a bench procedure, not a capture in the
    wild).  Returns an orientation -> trace mapping.
    """
    traces = {}
    n = int(math.floor(duration_s * config.rate_hz)) + 1
    step_ms = 1000.0 / config.rate_hz
    t_ms = np.arange(n) * step_ms
    for k, orient in enumerate(ORIENTATIONS):
        rng = np.random.default_rng(
            np.random.SeedSequence([config.seed, 2, device_index, k])
        )
        axis = _AXES.index(orient[0])
        sign = 1.0 if orient[1] == "+" else -1.0
        accel_true = np.zeros((n, 3))
        accel_true[:, axis] = sign * STANDARD_GRAVITY
        gyro_true = np.zeros((n, 3))
        accel, gyro = _measure(profile, accel_true, gyro_true, rng)
        traces[orient] = SensorTrace(
            t_ms=t_ms, accel=accel, gyro=gyro,
            device_id=profile.device_id,
            session_id=f"cal-a-{orient}",
            audio_mode="none", placement=config.placement,
        )
    return traces


def generate_gyro_calibration_traces(profile, config, device_index, *,
                                     angle=math.pi, angle_jitter=0.0,
                                     rotation_s=2.0, margin_s=0.5,
                                     shape="sine"):
    """Six single-rotation traces for gyroscope calibration.

    Each trace holds one rotation of nominally ``angle`` radians about
    one axis (positive or negative direction) between stationary
    margins.  ``angle_jitter`` models an imprecise manual rotation: the
    executed angle is ``angle * (1 + e)`` with ``e ~ N(0, jitter^2)``,
    while the calibration is told the nominal angle.

    ``shape`` selects the rate profile: a half-sine pulse ("sine") or a
    triangular pulse ("triangle", exactly integrable by the trapezoid
    rule when the apex falls on the sample grid).
    """
    if shape not in ("sine", "triangle"):
        raise ValidationError(f"shape must be 'sine' or 'triangle', got {shape!r}")
    if angle <= 0:
        raise ValidationError(f"angle must be > 0, got {angle}")
    duration_s = rotation_s + 2.0 * margin_s
    n = int(math.floor(duration_s * config.rate_hz)) + 1
    step_ms = 1000.0 / config.rate_hz
    t_ms = np.arange(n) * step_ms
    t_s = t_ms / 1000.0

    traces = {}
    for k, orient in enumerate(ORIENTATIONS):
        rng = np.random.default_rng(
            np.random.SeedSequence([config.seed, 3, device_index, k])
        )
        axis = _AXES.index(orient[0])
        sign = 1.0 if orient[1] == "+" else -1.0
        executed = angle
        if angle_jitter > 0:
            executed = angle * (1.0 + rng.normal(0.0, angle_jitter))
        tau = np.clip((t_s - margin_s) / rotation_s, 0.0, 1.0)
        if shape == "sine":
            peak = executed * math.pi / (2.0 * rotation_s)
            pulse = np.sin(math.pi * tau)
        else:
            peak = 2.0 * executed / rotation_s
            pulse = 1.0 - np.abs(2.0 * tau - 1.0)
        inside = (t_s >= margin_s) & (t_s <= margin_s + rotation_s)
        gyro_true = np.zeros((n, 3))
        gyro_true[inside, axis] = sign * peak * pulse[inside]
        accel_true = np.zeros((n, 3))
        accel_true[:, 2] = STANDARD_GRAVITY
        accel, gyro = _measure(profile, accel_true, gyro_true, rng)
        traces[orient] = SensorTrace(
            t_ms=t_ms, accel=accel, gyro=gyro,
            device_id=profile.device_id,
            session_id=f"cal-g-{orient}",
            audio_mode="none", placement=config.placement,
        )
    return traces


def quiet_profile(profile):
    """A noise-free copy of a device profile (for exactness checks)."""
    return replace(profile, accel_sigma=0.0, gyro_sigma=0.0)


def fleet_manifest(config, profiles):
    """JSON-ready ground-truth manifest of a generated fleet."""
    return {
        "config": config.to_dict(),
        "devices": [p.to_dict() for p in profiles],
    }
