"""Affine calibration estimation and inversion."""

import json
import math

import numpy as np
import pytest

from sensorprint.calibrate import (
    ORIENTATIONS,
    STANDARD_GRAVITY,
    CalibrationModel,
    apply_calibration,
    estimate_accel_calibration,
    estimate_gyro_calibration,
    gyro_model_from_integrals,
    integrate_rotation,
    load_calibration,
    rotation_window,
    save_calibration,
)
from sensorprint.errors import ValidationError
from sensorprint.synth import (
    FleetConfig,
    generate_accel_calibration_traces,
    generate_gyro_calibration_traces,
    sample_fleet,
    quiet_profile,
)
from sensorprint.traces import SensorTrace


def constant_trace(accel_row, gyro_row=(0.0, 0.0, 0.0), n=20, device_id="d", session_id="s"):
    t = np.arange(n) * 10.0
    return SensorTrace(
        t_ms=t,
        accel=np.tile(accel_row, (n, 1)),
        gyro=np.tile(gyro_row, (n, 1)),
        device_id=device_id,
        session_id=session_id,
    )


class TestCalibrationModel:
    def test_round_trip_json(self, tmp_path):
        model = CalibrationModel(sensor="gyro", O=[0.1, -0.2, 0.3], S=[1.01, 0.99, 1.0])
        path = save_calibration(model, tmp_path / "cal.json")
        back = load_calibration(path)
        assert back.sensor == "gyro"
        np.testing.assert_array_equal(back.O, model.O)
        np.testing.assert_array_equal(back.S, model.S)

    def test_file_is_plain_json(self, tmp_path):
        model = CalibrationModel(sensor="accel", O=[0.0, 0.0, 0.0], S=[1.0, 1.0, 1.0])
        path = save_calibration(model, tmp_path / "cal.json")
        obj = json.loads(path.read_text())
        assert set(obj) == {"sensor", "O", "S"}

    @pytest.mark.parametrize(
        "kwargs,msg",
        [
            ({"sensor": "magnetometer", "O": [0] * 3, "S": [1] * 3}, "sensor"),
            ({"sensor": "accel", "O": [0, 0], "S": [1, 1, 1]}, "3 per-axis"),
            ({"sensor": "accel", "O": [0, 0, np.nan], "S": [1, 1, 1]}, "non-finite"),
            ({"sensor": "accel", "O": [0, 0, 0], "S": [1, 0, 1]}, "non-zero"),
        ],
    )
    def test_validation(self, kwargs, msg):
        with pytest.raises(ValidationError, match=msg):
            CalibrationModel(**kwargs)

    def test_load_missing_key(self, tmp_path):
        path = tmp_path / "cal.json"
        path.write_text('{"sensor": "accel", "O": [0, 0, 0]}')
        with pytest.raises(ValidationError, match="missing 'S'"):
            load_calibration(path)

    def test_load_invalid_json(self, tmp_path):
        path = tmp_path / "cal.json"
        path.write_text("{broken")
        with pytest.raises(ValidationError, match="invalid calibration JSON"):
            load_calibration(path)

    def test_load_non_object(self, tmp_path):
        path = tmp_path / "cal.json"
        path.write_text("[1, 2, 3]")
        with pytest.raises(ValidationError, match="JSON object"):
            load_calibration(path)


class TestAccelCalibration:
    def make_six_position_traces(self, O, S, g=STANDARD_GRAVITY):
        traces = {}
        for axis in range(3):
            for sign, suffix in ((1.0, "+"), (-1.0, "-")):
                accel = np.array(O, dtype=float)
                accel[axis] = O[axis] + S[axis] * sign * g
                key = "xyz"[axis] + suffix
                traces[key] = constant_trace(accel, session_id=f"cal-{key}")
        return traces

    def test_recovers_known_model_exactly(self):
        O = [0.1, -0.2, 0.3]
        S = [1.02, 0.98, 1.05]
        traces = self.make_six_position_traces(O, S)
        model = estimate_accel_calibration(traces)
        np.testing.assert_allclose(model.O, O, atol=1e-12)
        np.testing.assert_allclose(model.S, S, atol=1e-12)
        assert model.sensor == "accel"

    def test_custom_gravity_reference(self):
        O = [0.0, 0.0, 0.0]
        S = [1.1, 0.9, 1.0]
        traces = self.make_six_position_traces(O, S, g=9.80665)
        model = estimate_accel_calibration(traces, g=9.80665)
        np.testing.assert_allclose(model.S, S, atol=1e-12)

    def test_noiseless_synthetic_round_trip(self):
        config = FleetConfig(n_devices=2, seed=11)
        profile = quiet_profile(sample_fleet(config)[0])
        traces = generate_accel_calibration_traces(profile, config, 0)
        model = estimate_accel_calibration(traces)
        np.testing.assert_allclose(model.O, profile.accel_offset, atol=1e-9)
        np.testing.assert_allclose(model.S, profile.accel_gain, atol=1e-9)

    def test_noisy_estimate_close_but_inexact(self):
        config = FleetConfig(n_devices=2, seed=12)
        profile = sample_fleet(config)[0]
        traces = generate_accel_calibration_traces(profile, config, 0)
        model = estimate_accel_calibration(traces)
        np.testing.assert_allclose(model.O, profile.accel_offset, atol=0.05)
        np.testing.assert_allclose(model.S, profile.accel_gain, atol=0.01)
        assert np.any(model.O != np.asarray(profile.accel_offset))

    def test_missing_orientation_rejected(self):
        traces = self.make_six_position_traces([0, 0, 0], [1, 1, 1])
        del traces["y-"]
        with pytest.raises(ValidationError, match="missing y-"):
            estimate_accel_calibration(traces)

    def test_bad_gravity_rejected(self):
        traces = self.make_six_position_traces([0, 0, 0], [1, 1, 1])
        with pytest.raises(ValidationError, match="g must be > 0"):
            estimate_accel_calibration(traces, g=0.0)

    def test_degenerate_data_rejected(self):
        traces = {o: constant_trace([0.0, 0.0, 0.0], session_id=o) for o in ORIENTATIONS}
        with pytest.raises(ValidationError, match="zero estimated gain"):
            estimate_accel_calibration(traces)


class TestRotationWindow:
    def make_rotation_trace(self, pulse_slice, rate=1.0, n=101, axis=2):
        t = np.arange(n) * 10.0
        gyro = np.zeros((n, 3))
        gyro[pulse_slice, axis] = rate
        return SensorTrace(
            t_ms=t, accel=np.zeros((n, 3)), gyro=gyro, device_id="d", session_id="s"
        )

    def test_window_pads_100ms_each_side(self):
        trace = self.make_rotation_trace(slice(30, 51))
        start, stop = rotation_window(trace, 2)
        # pulse spans 300..500 ms; padded to 200..600 ms at a 10 ms step
        assert (start, stop) == (20, 61)

    def test_window_clipped_at_trace_edges(self):
        trace = self.make_rotation_trace(slice(0, 5))
        start, stop = rotation_window(trace, 2)
        assert start == 0
        assert stop == 15

    def test_threshold_excludes_slow_drift(self):
        trace = self.make_rotation_trace(slice(30, 51), rate=0.04)
        with pytest.raises(ValidationError, match="no rotation detected"):
            rotation_window(trace, 2)

    def test_axis_selection(self):
        trace = self.make_rotation_trace(slice(30, 51), axis=0)
        start, stop = rotation_window(trace, 0)
        assert (start, stop) == (20, 61)
        with pytest.raises(ValidationError, match="axis y"):
            rotation_window(trace, 1)


class TestIntegrateRotation:
    def test_trapezoid_of_triangular_pulse(self):
        # rate rises 0 -> 1 -> 0 over 400 ms; trapezoid integrates a
        # piecewise-linear pulse exactly: area = 0.2 rad
        n = 101
        t = np.arange(n) * 10.0
        gyro = np.zeros((n, 3))
        up = np.linspace(0.0, 1.0, 21)
        gyro[30:51, 2] = up
        gyro[50:71, 2] = up[::-1]
        trace = SensorTrace(
            t_ms=t, accel=np.zeros((n, 3)), gyro=gyro, device_id="d", session_id="s"
        )
        theta, duration = integrate_rotation(trace, 2)
        assert theta == pytest.approx(0.2, abs=1e-12)

    def test_duration_is_window_span(self):
        n = 101
        t = np.arange(n) * 10.0
        gyro = np.zeros((n, 3))
        gyro[40:61, 1] = 1.0
        trace = SensorTrace(
            t_ms=t, accel=np.zeros((n, 3)), gyro=gyro, device_id="d", session_id="s"
        )
        _, duration = integrate_rotation(trace, 1)
        # pulse 400..600 ms, padded window 300..700 ms
        assert duration == pytest.approx(0.4, abs=1e-12)


class TestGyroModelFromIntegrals:
    def test_closed_form_recovery(self):
        O, S, angle = 0.01, 1.02, math.pi
        t_plus, t_minus = 2.0, 3.0
        theta_plus = O * t_plus + S * angle
        theta_minus = O * t_minus - S * angle
        O_est, S_est = gyro_model_from_integrals(
            theta_plus, theta_minus, t_plus, t_minus, angle
        )
        assert O_est == pytest.approx(O, abs=1e-12)
        assert S_est == pytest.approx(S, abs=1e-12)

    def test_asymmetric_windows_still_exact(self):
        # the O*(t+ - t-) correction matters when windows differ
        O, S, angle = -0.05, 0.97, math.pi / 2.0
        t_plus, t_minus = 1.5, 4.0
        theta_plus = O * t_plus + S * angle
        theta_minus = O * t_minus - S * angle
        O_est, S_est = gyro_model_from_integrals(
            theta_plus, theta_minus, t_plus, t_minus, angle
        )
        assert O_est == pytest.approx(O, abs=1e-12)
        assert S_est == pytest.approx(S, abs=1e-12)

    def test_zero_offset_symmetric_case(self):
        O_est, S_est = gyro_model_from_integrals(math.pi, -math.pi, 2.0, 2.0, math.pi)
        assert O_est == 0.0
        assert S_est == 1.0

    def test_bad_angle_rejected(self):
        with pytest.raises(ValidationError, match="angle"):
            gyro_model_from_integrals(1.0, -1.0, 2.0, 2.0, 0.0)

    def test_bad_durations_rejected(self):
        with pytest.raises(ValidationError, match="durations"):
            gyro_model_from_integrals(1.0, -1.0, 0.0, 2.0, math.pi)


class TestGyroCalibrationPipeline:
    def test_triangle_profile_noiseless_is_grid_exact(self):
        config = FleetConfig(n_devices=2, seed=21)
        profile = quiet_profile(sample_fleet(config)[0])
        traces = generate_gyro_calibration_traces(
            profile, config, 0, shape="triangle"
        )
        model = estimate_gyro_calibration(traces, angle=math.pi)
        np.testing.assert_allclose(model.O, profile.gyro_offset, atol=1e-9)
        np.testing.assert_allclose(model.S, profile.gyro_gain, atol=1e-9)

    def test_sine_profile_noiseless_within_trapezoid_error(self):
        config = FleetConfig(n_devices=2, seed=22)
        profile = quiet_profile(sample_fleet(config)[0])
        traces = generate_gyro_calibration_traces(profile, config, 0, shape="sine")
        model = estimate_gyro_calibration(traces, angle=math.pi)
        np.testing.assert_allclose(model.O, profile.gyro_offset, atol=1e-3)
        np.testing.assert_allclose(model.S, profile.gyro_gain, atol=1e-3)

    def test_imprecise_rotations_degrade_the_gain(self):
        config = FleetConfig(n_devices=2, seed=23)
        profile = quiet_profile(sample_fleet(config)[0])
        traces = generate_gyro_calibration_traces(
            profile, config, 0, shape="triangle", angle_jitter=0.05
        )
        model = estimate_gyro_calibration(traces, angle=math.pi)
        assert np.max(np.abs(model.S - np.asarray(profile.gyro_gain))) > 1e-4

    def test_missing_orientation_rejected(self):
        config = FleetConfig(n_devices=1, seed=24)
        profile = quiet_profile(sample_fleet(config)[0])
        traces = generate_gyro_calibration_traces(profile, config, 0)
        del traces["z+"]
        with pytest.raises(ValidationError, match="missing z\\+"):
            estimate_gyro_calibration(traces, angle=math.pi)


class TestApplyCalibration:
    def test_inverts_affine_accel_model(self):
        rng = np.random.default_rng(0)
        true = rng.normal(size=(50, 3))
        O = np.array([0.1, -0.2, 0.3])
        S = np.array([1.05, 0.95, 1.02])
        t = np.arange(50) * 10.0
        gyro = rng.normal(size=(50, 3))
        trace = SensorTrace(
            t_ms=t, accel=O + S * true, gyro=gyro, device_id="d", session_id="s"
        )
        model = CalibrationModel(sensor="accel", O=O, S=S)
        restored = apply_calibration(trace, model)
        np.testing.assert_allclose(restored.accel, true, atol=1e-12)
        np.testing.assert_array_equal(restored.gyro, gyro)
        assert restored.device_id == "d"
        assert restored.session_id == "s"

    def test_inverts_affine_gyro_model(self):
        rng = np.random.default_rng(1)
        true = rng.normal(size=(50, 3))
        O = np.array([0.01, 0.02, -0.03])
        S = np.array([0.98, 1.01, 1.03])
        t = np.arange(50) * 10.0
        accel = rng.normal(size=(50, 3))
        trace = SensorTrace(
            t_ms=t, accel=accel, gyro=O + S * true, device_id="d", session_id="s"
        )
        restored = apply_calibration(trace, CalibrationModel(sensor="gyro", O=O, S=S))
        np.testing.assert_allclose(restored.gyro, true, atol=1e-12)
        np.testing.assert_array_equal(restored.accel, accel)

    def test_estimate_then_apply_round_trip(self):
        # full loop: simulate, calibrate, correct a session; the corrected
        # samples must match the true signal when noise is off
        config = FleetConfig(n_devices=1, seed=31)
        profile = quiet_profile(sample_fleet(config)[0])
        cal_traces = generate_accel_calibration_traces(profile, config, 0)
        model = estimate_accel_calibration(cal_traces)
        # a stationary z-up session measures O + S*g on z after correction -> g
        session = cal_traces["z+"]
        corrected = apply_calibration(session, model)
        np.testing.assert_allclose(
            corrected.accel[:, 2], STANDARD_GRAVITY, atol=1e-9
        )
        np.testing.assert_allclose(corrected.accel[:, :2], 0.0, atol=1e-9)
