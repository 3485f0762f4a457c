import numpy as np
import pytest

from egotrack.errors import InvalidDepthError
from egotrack.estimator import (
    FilterBank,
    FilterConfig,
    IngestStatus,
    associate_measurement,
    compensate_ego_motion,
    init_track,
    measurement_covariance,
    predict,
    update,
)
from egotrack.geometry import CameraModel, RigidTransform, SigmaPointSet, rotation_z

CFG = FilterConfig()
CAM = CameraModel()


def base_set(center=(0.0, 0.0, 2.5)):
    c = np.asarray(center, dtype=float)
    pts = np.tile(c, (7, 1))
    offsets = [
        (0.3, 0, 0), (-0.3, 0, 0),
        (0, 0.2, 0), (0, -0.2, 0),
        (0, 0, 0.15), (0, 0, -0.15),
    ]
    for i, off in enumerate(offsets):
        pts[1 + i] += off
    return pts


class TestConfigAndPrimitives:
    def test_config_validation(self):
        with pytest.raises(ValueError):
            FilterConfig(q_pos=0.0)
        with pytest.raises(ValueError):
            FilterConfig(sigma_z=-1.0)

    def test_init_track_prior(self):
        t = init_track(np.array([1.0, 2.0, 3.0]), CFG, stamp=0.5)
        np.testing.assert_array_equal(t.position, [1.0, 2.0, 3.0])
        np.testing.assert_array_equal(t.velocity, np.zeros(3))
        np.testing.assert_array_equal(
            t.covariance, np.diag([1e-2] * 3 + [1e-1] * 3)
        )
        assert t.last_stamp == 0.5

    def test_predict_moves_with_velocity(self):
        t = init_track(np.zeros(3), CFG, 0.0)
        t = type(t)(t.position, np.array([1.0, -2.0, 0.5]), t.covariance, t.last_stamp)
        out = predict(t, 0.02, CFG)
        np.testing.assert_allclose(out.position, [0.02, -0.04, 0.01], atol=1e-15)
        np.testing.assert_array_equal(out.velocity, t.velocity)
        assert out.last_stamp == pytest.approx(0.02)

    def test_predict_covariance_form(self):
        t = init_track(np.zeros(3), CFG, 0.0)
        dt = 0.1
        out = predict(t, dt, CFG)
        a = np.eye(6)
        a[0:3, 3:6] = dt * np.eye(3)
        want = a @ t.covariance @ a.T + np.diag([CFG.q_pos] * 3 + [CFG.q_vel] * 3)
        np.testing.assert_allclose(out.covariance, want, atol=1e-15)

    def test_predict_adds_noise_even_for_zero_dt(self):
        t = init_track(np.zeros(3), CFG, 0.0)
        out = predict(t, 0.0, CFG)
        np.testing.assert_array_equal(out.position, t.position)
        assert out.covariance[0, 0] == pytest.approx(t.covariance[0, 0] + CFG.q_pos)

    def test_predict_rejects_negative_dt(self):
        t = init_track(np.zeros(3), CFG, 0.0)
        with pytest.raises(ValueError):
            predict(t, -0.01, CFG)

    def test_compensation_remaps_state(self):
        t = init_track(np.array([1.0, 0.0, 2.0]), CFG, 0.0)
        t = type(t)(t.position, np.array([0.5, 0.0, 0.0]), t.covariance, 0.0)
        rel = RigidTransform(rotation_z(np.pi / 2.0), np.array([0.0, 0.0, 1.0]))
        out = compensate_ego_motion(t, rel)
        np.testing.assert_allclose(out.position, [0.0, 1.0, 3.0], atol=1e-12)
        np.testing.assert_allclose(out.velocity, [0.0, 0.5, 0.0], atol=1e-12)
        # covariance conjugated blockwise, no inflation
        np.testing.assert_allclose(np.trace(out.covariance), np.trace(t.covariance), atol=1e-12)

    def test_measurement_covariance_depth_scaling(self):
        r1 = measurement_covariance(CAM, 1.0, CFG)
        np.testing.assert_allclose(np.diag(r1), [0.0016, 0.0016, 0.0025], atol=1e-18)
        r2 = measurement_covariance(CAM, 2.0, CFG)
        np.testing.assert_allclose(np.diag(r2), [0.0064, 0.0064, 0.0025], atol=1e-18)
        with pytest.raises(InvalidDepthError):
            measurement_covariance(CAM, 0.0, CFG)

    def test_update_matches_simple_form(self):
        rng = np.random.default_rng(20)
        for _ in range(25):
            m = rng.normal(size=(6, 6))
            p = m @ m.T + 1e-3 * np.eye(6)
            t = init_track(rng.normal(size=3), CFG, 0.0)
            t = type(t)(t.position, rng.normal(size=3), p, 0.0)
            z = t.position + rng.normal(0.0, 0.1, 3)
            r_t = measurement_covariance(CAM, 2.0, CFG)
            out = update(t, z, r_t, CFG)

            h = np.zeros((3, 6))
            h[:, 0:3] = np.eye(3)
            x = np.concatenate([t.position, t.velocity])
            s = h @ p @ h.T + r_t
            k = p @ h.T @ np.linalg.inv(s)
            x2 = x + k @ (z - h @ x)
            p2 = (np.eye(6) - k @ h) @ p
            np.testing.assert_allclose(out.position, x2[0:3], atol=1e-10)
            np.testing.assert_allclose(out.velocity, x2[3:6], atol=1e-10)
            np.testing.assert_allclose(out.covariance, p2, atol=1e-9)
            np.testing.assert_allclose(out.covariance, out.covariance.T, atol=1e-15)

    def test_update_shrinks_covariance(self):
        t = init_track(np.array([0.0, 0.0, 2.0]), CFG, 0.0)
        r_t = measurement_covariance(CAM, 2.0, CFG)
        out = update(t, t.position, r_t, CFG)
        np.testing.assert_array_equal(out.position, t.position)
        assert out.covariance[0, 0] < t.covariance[0, 0]


class TestAssociation:
    def test_recovers_random_pair_swaps(self):
        rng = np.random.default_rng(21)
        for _ in range(100):
            pts = base_set() + rng.normal(0.0, 0.02, (7, 3))
            measured = pts.copy()
            for k in range(3):
                if rng.uniform() < 0.5:
                    i, j = 1 + 2 * k, 2 + 2 * k
                    measured[[i, j]] = measured[[j, i]]
            out = associate_measurement(SigmaPointSet(pts), SigmaPointSet(measured))
            np.testing.assert_array_equal(out.points, pts)

    def test_centroid_never_moves(self):
        rng = np.random.default_rng(22)
        pred = SigmaPointSet(base_set())
        meas = SigmaPointSet(base_set() + rng.normal(0.0, 0.5, (7, 3)))
        out = associate_measurement(pred, meas)
        np.testing.assert_array_equal(out.points[0], meas.points[0])


class TestFilterBank:
    def test_uninitialized_until_first_measurement(self):
        bank = FilterBank(CFG, CAM)
        assert bank.estimate() is None
        assert bank.velocities() is None
        assert bank.step(0.02, RigidTransform.identity()) is None
        bank.ingest(SigmaPointSet(base_set()), 0.0)
        assert bank.estimate() is not None
        np.testing.assert_allclose(bank.estimate().points, base_set(), atol=1e-12)

    def test_future_stamp_rejected(self):
        bank = FilterBank(CFG, CAM)
        with pytest.raises(ValueError):
            bank.ingest(SigmaPointSet(base_set()), 1.0)

    def test_stale_measurement_leaves_state_unchanged(self):
        bank = FilterBank(CFG, CAM, history_depth=3)
        bank.ingest(SigmaPointSet(base_set()), 0.0)
        for _ in range(10):
            bank.step(0.02, RigidTransform.identity())
        before = bank.estimate().points.copy()
        status = bank.ingest(SigmaPointSet(base_set((5.0, 5.0, 5.0))), 0.0)
        assert status is IngestStatus.STALE
        np.testing.assert_array_equal(bank.estimate().points, before)

    def test_delayed_equals_immediate_when_static(self):
        ident = RigidTransform.identity()
        z0 = base_set()
        z1 = base_set((0.05, 0.0, 2.5))

        direct = FilterBank(CFG, CAM)
        direct.ingest(SigmaPointSet(z0), 0.0)
        for _ in range(5):
            direct.step(0.02, ident)
        direct.ingest(SigmaPointSet(z1), direct.stamp)
        for _ in range(5):
            direct.step(0.02, ident)

        delayed = FilterBank(CFG, CAM)
        delayed.ingest(SigmaPointSet(z0), 0.0)
        for _ in range(10):
            delayed.step(0.02, ident)
        delayed.ingest(SigmaPointSet(z1), 0.1)  # five ticks late

        np.testing.assert_allclose(
            delayed.estimate().points, direct.estimate().points, atol=1e-12
        )
        np.testing.assert_allclose(delayed.velocities(), direct.velocities(), atol=1e-12)

    def test_in_place_mode_differs_under_motion(self):
        # ego motion between stamp and arrival makes naive application wrong
        rel = RigidTransform(rotation_z(0.02), np.array([0.01, 0.0, 0.0]))
        banks = {
            mode: FilterBank(CFG, CAM, oosm_mode=mode) for mode in ("replay", "in_place")
        }
        z0 = base_set()
        z1 = base_set((0.1, 0.05, 2.4))
        for bank in banks.values():
            bank.ingest(SigmaPointSet(z0), 0.0)
            for _ in range(10):
                bank.step(0.02, rel)
            bank.ingest(SigmaPointSet(z1), 0.1)
        diff = np.abs(
            banks["replay"].estimate().points - banks["in_place"].estimate().points
        ).max()
        assert diff > 1e-4

    def test_reacquire_after_long_gap(self):
        bank = FilterBank(CFG, CAM, reacquire_window=0.5, reacquire_gate=5.0)
        bank.ingest(SigmaPointSet(base_set()), 0.0)
        for _ in range(60):
            bank.step(0.02, RigidTransform.identity())
        far = base_set((3.0, 0.0, 2.5))
        bank.ingest(SigmaPointSet(far), bank.stamp)
        np.testing.assert_allclose(bank.estimate().points, far, atol=1e-12)
        np.testing.assert_array_equal(bank.velocities(), np.zeros((7, 3)))
        np.testing.assert_allclose(
            bank.tracks[0].covariance, np.diag([1e-2] * 3 + [1e-1] * 3), atol=1e-15
        )

    def test_close_measurement_updates_instead_of_reinit(self):
        bank = FilterBank(CFG, CAM, reacquire_window=0.5, reacquire_gate=5.0)
        bank.ingest(SigmaPointSet(base_set()), 0.0)
        for _ in range(60):
            bank.step(0.02, RigidTransform.identity())
        near = base_set((0.1, 0.0, 2.5))
        bank.ingest(SigmaPointSet(near), bank.stamp)
        # a Kalman update pulls toward but not onto the measurement
        got = bank.estimate().points[0][0]
        assert 0.0 < got < 0.1
        assert np.abs(bank.velocities()).max() > 0.0

    def test_history_depth_validation(self):
        with pytest.raises(ValueError):
            FilterBank(CFG, CAM, history_depth=1)
        with pytest.raises(ValueError):
            FilterBank(CFG, CAM, oosm_mode="bogus")
