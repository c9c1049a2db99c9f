"""Per-stream feature extraction.

Each of the four scalar streams of a trace contributes 25 features: 10
temporal statistics computed on the raw, irregularly-sampled values and
15 spectral descriptors computed on the magnitude spectrum of the
mean-removed, uniformly-resampled stream (frame-based descriptors use
50 ms non-overlapping frames of the resampled stream).

Feature identifiers are ``<stream>.<feature>``, e.g.
``accel_magnitude.centroid``, and the canonical order is all 25 features
of ``accel_magnitude``, then ``gyro_x``, ``gyro_y``, ``gyro_z``.
"""

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from sensorprint._validation import check_array_2d
from sensorprint.errors import TraceParseError, ValidationError
from sensorprint.preprocess import (
    DEFAULT_RESAMPLE_RATE_HZ,
    STREAMS,
    raw_stream,
    resample_stream,
)

TEMPORAL_FEATURES = (
    "mean",
    "std_dev",
    "avg_dev",
    "skewness",
    "kurtosis",
    "rms",
    "max",
    "min",
    "zcr",
    "nonneg_count",
)

SPECTRAL_FEATURES = (
    "centroid",
    "spread",
    "spec_skewness",
    "spec_kurtosis",
    "entropy",
    "flatness",
    "brightness",
    "rolloff",
    "roughness",
    "irregularity",
    "spec_rms",
    "low_energy_rate",
    "flux",
    "attack_time",
    "attack_slope",
)

STREAM_FEATURES = TEMPORAL_FEATURES + SPECTRAL_FEATURES

BRIGHTNESS_CUTOFF_HZ = 1500.0
ROLLOFF_FRACTION = 0.85
FRAME_MS = 50.0
PEAK_MIN_FRACTION = 0.05
ROUGHNESS_MAX_PEAKS = 500


def feature_ids(streams=STREAMS):
    """Canonical feature identifiers for the given streams."""
    return [f"{s}.{f}" for s in streams for f in STREAM_FEATURES]


# ---------------------------------------------------------------------------
# Temporal features (raw irregular stream)
# ---------------------------------------------------------------------------

def temporal_features(values):
    """The 10 temporal statistics of a raw stream, in canonical order.

    Moments are population moments; skewness and kurtosis are the
    standardized third and fourth central moments (kurtosis is not
    excess: a normal distribution scores ~3) and fall back to 0 for a
    constant stream.  The zero-crossing rate counts sign-indicator
    transitions of consecutive samples divided by the stream length.
    """
    x = np.asarray(values, dtype=np.float64).reshape(-1)
    if x.size == 0:
        raise ValidationError("temporal features need at least 1 sample")
    mean = float(np.mean(x))
    centered = x - mean
    var = float(np.mean(centered ** 2))
    std = np.sqrt(var)
    if std > 0:
        skew = float(np.mean(centered ** 3)) / std ** 3
        kurt = float(np.mean(centered ** 4)) / std ** 4
    else:
        skew = 0.0
        kurt = 0.0
    positive = x > 0
    zcr = float(np.sum(np.abs(np.diff(positive.astype(np.float64))))) / x.size
    return {
        "mean": mean,
        "std_dev": float(std),
        "avg_dev": float(np.mean(np.abs(centered))),
        "skewness": skew,
        "kurtosis": kurt,
        "rms": float(np.sqrt(np.mean(x ** 2))),
        "max": float(np.max(x)),
        "min": float(np.min(x)),
        "zcr": zcr,
        "nonneg_count": float(np.count_nonzero(x >= 0)),
    }


# ---------------------------------------------------------------------------
# Spectrum helpers
# ---------------------------------------------------------------------------

def magnitude_spectrum(stream):
    """Magnitude spectrum of the mean-removed uniform stream.

    Returns ``(freqs_hz, mags)`` over the one-sided FFT bins.  The DC
    bin is retained; after mean removal its magnitude is ~0.
    """
    x = stream.values - np.mean(stream.values)
    mags = np.abs(np.fft.rfft(x))
    freqs = np.fft.rfftfreq(x.size, d=1.0 / stream.rate_hz)
    return freqs, mags


def spectral_peaks(mags, min_fraction=PEAK_MIN_FRACTION):
    """Indices of spectral peaks.

    A peak is a strict local maximum (greater than both neighbours;
    endpoints excluded) with amplitude at least ``min_fraction`` of the
    global maximum.
    """
    m = np.asarray(mags, dtype=np.float64)
    if m.size < 3:
        return np.empty(0, dtype=np.intp)
    interior = m[1:-1]
    is_peak = (interior > m[:-2]) & (interior > m[2:])
    idx = np.nonzero(is_peak)[0] + 1
    if idx.size == 0:
        return idx
    return idx[m[idx] >= min_fraction * m.max()]


# ---------------------------------------------------------------------------
# Spectral features on (freqs, mags)
# ---------------------------------------------------------------------------

def spectral_centroid(freqs, mags):
    """Amplitude-weighted mean frequency; 0 for an empty spectrum."""
    total = np.sum(mags)
    if total <= 0:
        return 0.0
    return float(np.sum(freqs * mags) / total)


def spectral_spread(freqs, mags):
    """Amplitude-weighted standard deviation around the centroid."""
    total = np.sum(mags)
    if total <= 0:
        return 0.0
    w = mags / total
    c = np.sum(freqs * w)
    return float(np.sqrt(np.sum((freqs - c) ** 2 * w)))


def _spectral_standardized_moment(freqs, mags, order):
    total = np.sum(mags)
    if total <= 0:
        return 0.0
    w = mags / total
    c = np.sum(freqs * w)
    spread = np.sqrt(np.sum((freqs - c) ** 2 * w))
    if spread == 0:
        return 0.0
    return float(np.sum((freqs - c) ** order * w) / spread ** order)


def spectral_skewness(freqs, mags):
    """Standardized third moment of the spectral distribution."""
    return _spectral_standardized_moment(freqs, mags, 3)


def spectral_kurtosis(freqs, mags):
    """Standardized fourth moment of the spectral distribution."""
    return _spectral_standardized_moment(freqs, mags, 4)


def spectral_entropy(mags):
    """Shannon entropy (bits) of the spectrum normalized to a pmf.

    A point-mass spectrum scores 0; a flat spectrum over N bins scores
    log2(N).  An all-zero spectrum scores 0.
    """
    total = np.sum(mags)
    if total <= 0:
        return 0.0
    w = mags / total
    w = w[w > 0]
    return float(-np.sum(w * np.log2(w)))


def spectral_flatness(mags):
    """Geometric mean over arithmetic mean of the magnitude bins.

    Zero bins are floored at 1e-12 of the maximum so a spectrum with
    isolated nulls keeps a finite geometric mean; an exactly flat
    spectrum scores 1.  An all-zero spectrum is treated as flat (1.0).
    """
    m = np.asarray(mags, dtype=np.float64)
    peak = m.max(initial=0.0)
    if peak <= 0:
        return 1.0
    floored = np.maximum(m, peak * 1e-12)
    return float(np.exp(np.mean(np.log(floored))) / np.mean(floored))


def spectral_brightness(freqs, mags, cutoff_hz=BRIGHTNESS_CUTOFF_HZ):
    """Sum of magnitude at or above the cutoff frequency."""
    return float(np.sum(mags[freqs >= cutoff_hz]))


def spectral_rolloff(freqs, mags, fraction=ROLLOFF_FRACTION):
    """Lowest frequency below which ``fraction`` of total magnitude lies."""
    cum = np.cumsum(mags)
    total = cum[-1] if cum.size else 0.0
    if total <= 0:
        return 0.0
    idx = int(np.searchsorted(cum, fraction * total, side="left"))
    idx = min(idx, mags.size - 1)
    return float(freqs[idx])


def spectral_roughness(freqs, mags, peaks=None, max_peaks=ROUGHNESS_MAX_PEAKS):
    """Mean pairwise dissonance of spectral peaks.

    Uses the Plomp-Levelt dissonance approximation
    ``a1*a2*(exp(-3.5*s*df) - exp(-5.75*s*df))`` with
    ``s = 0.24 / (0.0207*fmin + 18.96)``, averaged over all unordered
    peak pairs.  For dense spectra only the ``max_peaks`` strongest
    peaks enter the pairwise sum, which bounds the quadratic cost.
    """
    if peaks is None:
        peaks = spectral_peaks(mags)
    if peaks.size < 2:
        return 0.0
    if peaks.size > max_peaks:
        strongest = np.argsort(mags[peaks], kind="stable")[::-1][:max_peaks]
        peaks = np.sort(peaks[strongest])
    f = freqs[peaks]
    a = mags[peaks]
    i, j = np.triu_indices(peaks.size, k=1)
    fmin = np.minimum(f[i], f[j])
    df = np.abs(f[j] - f[i])
    s = 0.24 / (0.0207 * fmin + 18.96)
    d = a[i] * a[j] * (np.exp(-3.5 * s * df) - np.exp(-5.75 * s * df))
    return float(np.mean(d))


def spectral_irregularity(mags, peaks=None):
    """Squared amplitude jump between successive peaks over total power.

    ``sum((a_k - a_{k+1})^2) / sum(a_k^2)`` over peaks in frequency
    order, with a zero-amplitude peak appended after the last one.  A
    single peak therefore scores 1; no peaks score 0.
    """
    if peaks is None:
        peaks = spectral_peaks(mags)
    if peaks.size == 0:
        return 0.0
    a = mags[peaks]
    a_ext = np.concatenate([a, [0.0]])
    den = float(np.sum(a ** 2))
    if den == 0:
        return 0.0
    return float(np.sum(np.diff(a_ext) ** 2) / den)


def spectral_rms(mags):
    """Root mean square of the magnitude bins."""
    m = np.asarray(mags, dtype=np.float64)
    if m.size == 0:
        return 0.0
    return float(np.sqrt(np.mean(m ** 2)))


def spectral_attack(freqs, mags, peaks=None):
    """Mean attack time and slope of spectral peaks.

    For each peak, the attack starts at the lowest-magnitude bin
    between the previous peak (or the start of the spectrum) and the
    peak itself; attack time is the frequency distance climbed and
    attack slope the magnitude gained per unit frequency.  Returns the
    pair of means over all peaks, (0, 0) when there are none.
    """
    if peaks is None:
        peaks = spectral_peaks(mags)
    if peaks.size == 0:
        return 0.0, 0.0
    times = np.empty(peaks.size)
    slopes = np.empty(peaks.size)
    prev = 0
    for k, p in enumerate(peaks):
        valley = prev + int(np.argmin(mags[prev:p]))
        rise = freqs[p] - freqs[valley]
        times[k] = rise
        slopes[k] = (mags[p] - mags[valley]) / rise
        prev = p
    return float(np.mean(times)), float(np.mean(slopes))


# ---------------------------------------------------------------------------
# Frame-based features (uniform stream)
# ---------------------------------------------------------------------------

def _frame(values, frame_len):
    n_frames = values.size // frame_len
    return values[: n_frames * frame_len].reshape(n_frames, frame_len)


def low_energy_rate(values, rate_hz, frame_ms=FRAME_MS):
    """Fraction of 50 ms frames whose RMS is below the whole-stream RMS."""
    frame_len = max(int(round(rate_hz * frame_ms / 1000.0)), 1)
    frames = _frame(np.asarray(values, dtype=np.float64), frame_len)
    if frames.shape[0] == 0:
        return 0.0
    frame_rms = np.sqrt(np.mean(frames ** 2, axis=1))
    whole_rms = np.sqrt(np.mean(np.asarray(values, dtype=np.float64) ** 2))
    return float(np.mean(frame_rms < whole_rms))


def spectral_flux(values, rate_hz, frame_ms=FRAME_MS):
    """Mean Euclidean distance between power spectra of adjacent frames.

    The stream is cut into non-overlapping 50 ms frames; each frame's
    one-sided power spectrum is compared with the previous one and the
    distance is normalized by the number of frequency bins.
    """
    frame_len = max(int(round(rate_hz * frame_ms / 1000.0)), 1)
    frames = _frame(np.asarray(values, dtype=np.float64), frame_len)
    if frames.shape[0] < 2:
        return 0.0
    power = np.abs(np.fft.rfft(frames, axis=1)) ** 2
    dists = np.sqrt(np.sum(np.diff(power, axis=0) ** 2, axis=1))
    return float(np.mean(dists) / power.shape[1])


# ---------------------------------------------------------------------------
# Assembly
# ---------------------------------------------------------------------------

def spectral_features(stream):
    """The 15 spectral descriptors of a uniform stream, in canonical order."""
    freqs, mags = magnitude_spectrum(stream)
    peaks = spectral_peaks(mags)
    attack_time, attack_slope = spectral_attack(freqs, mags, peaks)
    return {
        "centroid": spectral_centroid(freqs, mags),
        "spread": spectral_spread(freqs, mags),
        "spec_skewness": spectral_skewness(freqs, mags),
        "spec_kurtosis": spectral_kurtosis(freqs, mags),
        "entropy": spectral_entropy(mags),
        "flatness": spectral_flatness(mags),
        "brightness": spectral_brightness(freqs, mags),
        "rolloff": spectral_rolloff(freqs, mags),
        "roughness": spectral_roughness(freqs, mags, peaks),
        "irregularity": spectral_irregularity(mags, peaks),
        "spec_rms": spectral_rms(mags),
        "low_energy_rate": low_energy_rate(stream.values, stream.rate_hz),
        "flux": spectral_flux(stream.values, stream.rate_hz),
        "attack_time": attack_time,
        "attack_slope": attack_slope,
    }


def extract_feature_vector(trace, streams=STREAMS, rate_hz=DEFAULT_RESAMPLE_RATE_HZ):
    """Extract the canonical feature vector of a trace.

    Returns an array of ``25 * len(streams)`` values ordered to match
    ``feature_ids(streams)``.
    """
    out = np.empty(len(streams) * len(STREAM_FEATURES))
    pos = 0
    for name in streams:
        t_ms, values = raw_stream(trace, name)
        temporal = temporal_features(values)
        stream = resample_stream(t_ms, values, rate_hz)
        spectral = spectral_features(stream)
        for feat in TEMPORAL_FEATURES:
            out[pos] = temporal[feat]
            pos += 1
        for feat in SPECTRAL_FEATURES:
            out[pos] = spectral[feat]
            pos += 1
    return out


class TraceFeaturizer(BaseEstimator, TransformerMixin):
    """Transforms traces into fixed-length feature vectors.

    Parameters
    ----------
    streams : tuple of str
        Which scalar streams to featurize, in order.
    rate_hz : float
        Uniform resampling rate for the spectral features.
    """

    def __init__(self, streams=STREAMS, rate_hz=DEFAULT_RESAMPLE_RATE_HZ):
        self.streams = streams
        self.rate_hz = rate_hz

    def fit(self, X, y=None):
        """Validate parameters; the transform is stateless."""
        for name in self.streams:
            if name not in STREAMS:
                raise ValidationError(f"unknown stream {name!r}, expected one of {STREAMS}")
        if len(set(self.streams)) != len(self.streams):
            raise ValidationError("streams must not repeat")
        self.feature_names_ = feature_ids(self.streams)
        return self

    def transform(self, X):
        """Featurize a sequence of traces into an (n, F) matrix."""
        if not hasattr(self, "feature_names_"):
            self.fit(X)
        traces = list(X)
        if not traces:
            raise ValidationError("no traces to featurize")
        out = np.empty((len(traces), len(self.feature_names_)))
        for i, trace in enumerate(traces):
            out[i] = extract_feature_vector(trace, self.streams, self.rate_hz)
        return out

    def get_feature_names_out(self, input_features=None):
        if not hasattr(self, "feature_names_"):
            self.fit(None)
        return np.asarray(self.feature_names_, dtype=object)


# ---------------------------------------------------------------------------
# Feature table CSV format
# ---------------------------------------------------------------------------

@dataclass
class FeatureTable:
    """A featurized corpus: one row per trace.

    ``ids`` holds ``(device_id, session_id)`` per row, ``names`` the
    feature identifiers (column order) and ``X`` the value matrix.
    """

    ids: list
    names: list
    X: np.ndarray

    def device_labels(self):
        """Integer class labels from device ids (sorted, stable)."""
        devices = sorted({d for d, _ in self.ids})
        index = {d: i for i, d in enumerate(devices)}
        y = np.asarray([index[d] for d, _ in self.ids], dtype=np.intp)
        return y, devices

    def select(self, names):
        """A new table restricted to the given feature columns."""
        missing = [n for n in names if n not in self.names]
        if missing:
            raise ValidationError(f"unknown feature columns: {', '.join(missing)}")
        cols = [self.names.index(n) for n in names]
        return FeatureTable(ids=list(self.ids), names=list(names), X=self.X[:, cols])

    def stream_subset(self, streams):
        """A new table keeping only columns belonging to ``streams``."""
        keep = [n for n in self.names if n.split(".", 1)[0] in streams]
        if not keep:
            raise ValidationError(f"no columns for streams {streams!r}")
        return self.select(keep)


def featurize_traces(traces, streams=STREAMS, rate_hz=DEFAULT_RESAMPLE_RATE_HZ):
    """Featurize traces into a FeatureTable."""
    traces = list(traces)
    featurizer = TraceFeaturizer(streams=streams, rate_hz=rate_hz).fit(traces)
    X = featurizer.transform(traces)
    ids = [(t.device_id, t.session_id) for t in traces]
    return FeatureTable(ids=ids, names=list(featurizer.feature_names_), X=X)


def write_feature_csv(table, path):
    """Write a feature table as CSV: ``device_id,session_id,<features...>``."""
    path = Path(path)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["device_id", "session_id", *table.names])
        for (device_id, session_id), row in zip(table.ids, table.X):
            writer.writerow([device_id, session_id, *(repr(float(v)) for v in row)])
    return path


def read_feature_csv(path):
    """Read a feature table written by :func:`write_feature_csv`."""
    path = Path(path)
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header is None or header[:2] != ["device_id", "session_id"]:
                raise TraceParseError(
                    "feature CSV must start with device_id,session_id columns",
                    source=path, line=1,
                )
            names = header[2:]
            if not names:
                raise TraceParseError("feature CSV has no feature columns", source=path, line=1)
            ids, rows = [], []
            for lineno, row in enumerate(reader, start=2):
                if not row:
                    continue
                if len(row) != len(header):
                    raise TraceParseError(
                        f"expected {len(header)} columns, got {len(row)}",
                        source=path, line=lineno,
                    )
                ids.append((row[0], row[1]))
                try:
                    rows.append([float(v) for v in row[2:]])
                except ValueError:
                    raise TraceParseError(
                        "non-numeric feature value", source=path, line=lineno
                    ) from None
    except OSError as exc:
        raise TraceParseError(f"cannot read file: {exc.strerror}", source=path) from exc
    if not rows:
        raise TraceParseError("feature CSV has no data rows", source=path)
    X = np.asarray(rows, dtype=np.float64)
    check_array_2d(X, name="feature matrix")
    return FeatureTable(ids=ids, names=names, X=X)
