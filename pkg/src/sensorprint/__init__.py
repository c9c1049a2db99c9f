"""Device fingerprinting from motion-sensor streams.

Subpackages implement the full pipeline: trace ingestion, resampling,
feature extraction, feature selection, classification, sensor
calibration, obfuscation countermeasures and synthetic fleet generation.
"""

from sensorprint.errors import TraceParseError, ValidationError
from sensorprint.traces import SensorTrace

__version__ = "0.1.0"

__all__ = [
    "SensorTrace",
    "TraceParseError",
    "ValidationError",
    "__version__",
]
