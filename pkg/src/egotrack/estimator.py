"""Constant-velocity Kalman filtering of sigma points in the moving camera frame.

Each of the seven points gets its own independent 6D filter (position and
velocity).  Every control step does a constant-velocity predict followed by a
deterministic ego-motion remap into the new camera frame; delayed measurements
are handled by rolling back to a history snapshot and replaying.
"""

from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass

import numpy as np

from .errors import InvalidDepthError, NumericalError
from .geometry import CameraModel, RigidTransform, SigmaPointSet

N_POINTS = 7


@dataclass(frozen=True)
class FilterConfig:
    """Process/measurement noise and initial covariance for every per-point filter."""

    q_pos: float = 1e-6      # m^2 added to position covariance per step
    q_vel: float = 1e-5      # (m/s)^2 added to velocity covariance per step
    sigma_u: float = 20.0    # px
    sigma_v: float = 20.0    # px
    sigma_z: float = 0.05    # m
    p0_pos: float = 1e-2     # m^2
    p0_vel: float = 1e-1     # (m/s)^2

    def __post_init__(self):
        for name in ("q_pos", "q_vel", "sigma_u", "sigma_v", "sigma_z", "p0_pos", "p0_vel"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be positive")


@dataclass(frozen=True)
class TrackState:
    """Posterior of one tracked point: mean (position, velocity) and 6x6 covariance."""

    position: np.ndarray
    velocity: np.ndarray
    covariance: np.ndarray
    last_stamp: float

    def __post_init__(self):
        object.__setattr__(self, "position", np.asarray(self.position, dtype=float).reshape(3))
        object.__setattr__(self, "velocity", np.asarray(self.velocity, dtype=float).reshape(3))
        object.__setattr__(self, "covariance", np.asarray(self.covariance, dtype=float).reshape(6, 6))


def init_track(z: np.ndarray, cfg: FilterConfig, stamp: float) -> TrackState:
    """Fresh track at a measured position: zero velocity, diagonal prior."""
    p0 = np.diag([cfg.p0_pos] * 3 + [cfg.p0_vel] * 3)
    return TrackState(np.asarray(z, dtype=float).reshape(3), np.zeros(3), p0, stamp)


def _process_noise(cfg: FilterConfig) -> np.ndarray:
    return np.diag([cfg.q_pos] * 3 + [cfg.q_vel] * 3)


def predict(track: TrackState, dt: float, cfg: FilterConfig) -> TrackState:
    """Constant-velocity time update; Q is added once per step regardless of dt."""
    if dt < 0.0:
        raise ValueError("dt must be non-negative")
    a = np.eye(6)
    a[0:3, 3:6] = dt * np.eye(3)
    cov = a @ track.covariance @ a.T + _process_noise(cfg)
    return TrackState(
        track.position + dt * track.velocity,
        track.velocity,
        cov,
        track.last_stamp + dt,
    )


def compensate_ego_motion(track: TrackState, t_rel: RigidTransform) -> TrackState:
    """Deterministic remap of the state into the new camera frame.

    Positions take the full rigid map, velocities rotate only, and the
    covariance is conjugated by blockdiag(R, R); no noise is added because the
    ego increment is treated as known.
    """
    r = t_rel.rotation
    f = np.zeros((6, 6))
    f[0:3, 0:3] = r
    f[3:6, 3:6] = r
    return TrackState(
        r @ track.position + t_rel.translation,
        r @ track.velocity,
        f @ track.covariance @ f.T,
        track.last_stamp,
    )


def measurement_covariance(cam: CameraModel, depth_z: float, cfg: FilterConfig) -> np.ndarray:
    """Depth-scaled position measurement covariance.

    Pixel noise maps to metric noise through the pinhole model at the point's
    depth: sigma_X = (Z/fx) sigma_u, sigma_Y = (Z/fy) sigma_v; depth noise is
    constant sigma_z.
    """
    if depth_z <= 0.0:
        raise InvalidDepthError(f"measurement depth must be positive, got {depth_z!r}")
    sx = depth_z / cam.fx * cfg.sigma_u
    sy = depth_z / cam.fy * cfg.sigma_v
    return np.diag([sx * sx, sy * sy, cfg.sigma_z * cfg.sigma_z])


def update(track: TrackState, z: np.ndarray, r_t: np.ndarray, cfg: FilterConfig) -> TrackState:
    """Position-only measurement update in Joseph form.

    Joseph form keeps the covariance symmetric positive semidefinite under
    roundoff, which matters after long replay chains.
    """
    z = np.asarray(z, dtype=float).reshape(3)
    r_t = np.asarray(r_t, dtype=float).reshape(3, 3)
    p = track.covariance
    s = p[0:3, 0:3] + r_t
    try:
        s_inv = np.linalg.inv(s)
    except np.linalg.LinAlgError as exc:
        raise NumericalError("singular innovation covariance") from exc
    k = p[:, 0:3] @ s_inv
    innovation = z - track.position
    mean = np.concatenate([track.position, track.velocity]) + k @ innovation
    i_kh = np.eye(6)
    i_kh[:, 0:3] -= k
    cov = i_kh @ p @ i_kh.T + k @ r_t @ k.T
    cov = 0.5 * (cov + cov.T)
    return TrackState(mean[0:3], mean[3:6], cov, track.last_stamp)


def associate_measurement(predicted: SigmaPointSet, measured: SigmaPointSet) -> SigmaPointSet:
    """Resolve the +/- sign ambiguity of each measured axis pair.

    The centroid maps to the centroid and axes correspond by eigenvalue rank;
    the only freedom is which end of each measured pair is which, chosen to
    minimize the summed squared distance to the prediction.
    """
    out = measured.points.copy()
    for k in range(3):
        i, j = 1 + 2 * k, 2 + 2 * k
        keep = (
            np.sum((measured.points[i] - predicted.points[i]) ** 2)
            + np.sum((measured.points[j] - predicted.points[j]) ** 2)
        )
        swap = (
            np.sum((measured.points[i] - predicted.points[j]) ** 2)
            + np.sum((measured.points[j] - predicted.points[i]) ** 2)
        )
        if swap < keep:
            out[[i, j]] = out[[j, i]]
    return SigmaPointSet(out, measured.frame)


class IngestStatus(enum.Enum):
    APPLIED = "applied"
    STALE = "stale"


@dataclass
class _StepRecord:
    """One history entry: the inputs of the step and the state after it.

    ``measurements`` keeps every raw set accepted at this stamp (arrival
    order) so a later rollback can re-apply them during replay.
    """

    stamp: float
    dt: float
    t_rel: RigidTransform | None
    tracks: list[TrackState] | None
    measurements: list[np.ndarray]


# Stamp comparisons tolerate accumulated float error, far below one tick.
_STAMP_EPS = 1e-9


class FilterBank:
    """Seven independent per-point filters sharing a rollback history.

    The bank starts uninitialized; the first accepted measurement creates the
    tracks at its own stamp and replays forward, so initialization is
    latency-correct like every later update.
    """

    def __init__(
        self,
        cfg: FilterConfig,
        cam: CameraModel,
        start_stamp: float = 0.0,
        history_depth: int = 30,
        oosm_mode: str = "replay",
        reacquire_window: float = 5.0,
        reacquire_gate: float = 5.0,
    ):
        if history_depth < 2:
            raise ValueError("history_depth must be at least 2")
        if oosm_mode not in ("replay", "in_place"):
            raise ValueError(f"unknown oosm_mode {oosm_mode!r}")
        self.cfg = cfg
        self.cam = cam
        self.oosm_mode = oosm_mode
        self.reacquire_window = reacquire_window
        self.reacquire_gate = reacquire_gate
        self.tracks: list[TrackState] | None = None
        self.last_measurement_stamp: float | None = None
        self.history: deque[_StepRecord] = deque(maxlen=history_depth)
        self.history.append(_StepRecord(start_stamp, 0.0, None, None, []))

    @property
    def stamp(self) -> float:
        return self.history[-1].stamp

    def estimate(self) -> SigmaPointSet | None:
        if self.tracks is None:
            return None
        return SigmaPointSet(np.stack([t.position for t in self.tracks]))

    def velocities(self) -> np.ndarray | None:
        if self.tracks is None:
            return None
        return np.stack([t.velocity for t in self.tracks])

    def step(self, dt: float, t_rel: RigidTransform) -> SigmaPointSet | None:
        """Advance one control tick: predict then remap by the ego increment."""
        if dt < 0.0:
            raise ValueError("dt must be non-negative")
        tracks = self.tracks
        if tracks is not None:
            tracks = [
                compensate_ego_motion(predict(t, dt, self.cfg), t_rel) for t in tracks
            ]
            self.tracks = tracks
        self.history.append(_StepRecord(self.stamp + dt, dt, t_rel, tracks, []))
        return self.estimate()

    def _apply_measurement(
        self, tracks: list[TrackState] | None, measured: np.ndarray, stamp: float
    ) -> list[TrackState]:
        """Associate and update all seven tracks at one stamp."""
        if tracks is None:
            return [init_track(measured[j], self.cfg, stamp) for j in range(N_POINTS)]
        predicted = SigmaPointSet(np.stack([t.position for t in tracks]))
        assoc = associate_measurement(predicted, SigmaPointSet(measured)).points
        gap = (
            np.inf
            if self.last_measurement_stamp is None
            else stamp - self.last_measurement_stamp
        )
        reacquiring = gap > self.reacquire_window
        out = []
        for j in range(N_POINTS):
            track = tracks[j]
            depth = max(track.position[2], self.cam.near_z)
            r_t = measurement_covariance(self.cam, depth, self.cfg)
            if reacquiring:
                y = assoc[j] - track.position
                s = track.covariance[0:3, 0:3] + r_t
                d2 = float(y @ np.linalg.solve(s, y))
                if d2 > self.reacquire_gate**2:
                    # Long blind spot and the prediction no longer explains the
                    # measurement: restart this track instead of dragging it.
                    out.append(init_track(assoc[j], self.cfg, stamp))
                    continue
            out.append(update(track, assoc[j], r_t, self.cfg))
        return out

    def _note_measurement(self, meas_stamp: float) -> None:
        if self.last_measurement_stamp is None or meas_stamp > self.last_measurement_stamp:
            self.last_measurement_stamp = meas_stamp

    def ingest(self, measured: SigmaPointSet, meas_stamp: float) -> IngestStatus:
        """Fold in a (possibly delayed) measurement.

        Replay mode rolls back to the newest snapshot at or before the
        measurement stamp, applies the update there, and replays the stored
        (dt, t_rel) steps; the rewritten snapshots keep the measurement so
        later rollbacks see it too.  Measurements older than the history
        horizon are dropped (stale), leaving the state unchanged.
        """
        if meas_stamp > self.stamp + _STAMP_EPS:
            raise ValueError("measurement stamp is in the future")
        z = np.asarray(measured.points, dtype=float).reshape(N_POINTS, 3)

        if self.oosm_mode == "in_place":
            rec = self.history[-1]
            self.tracks = self._apply_measurement(self.tracks, z, rec.stamp)
            rec.tracks = self.tracks
            rec.measurements.append(z)
            self._note_measurement(meas_stamp)
            return IngestStatus.APPLIED

        idx = None
        for i in range(len(self.history) - 1, -1, -1):
            if self.history[i].stamp <= meas_stamp + _STAMP_EPS:
                idx = i
                break
        if idx is None:
            return IngestStatus.STALE

        rec = self.history[idx]
        tracks = self._apply_measurement(rec.tracks, z, rec.stamp)
        rec.tracks = tracks
        rec.measurements.append(z)
        self._note_measurement(meas_stamp)
        for i in range(idx + 1, len(self.history)):
            nxt = self.history[i]
            tracks = [
                compensate_ego_motion(predict(t, nxt.dt, self.cfg), nxt.t_rel)
                for t in tracks
            ]
            for old in nxt.measurements:
                tracks = self._apply_measurement(tracks, old, nxt.stamp)
            nxt.tracks = tracks
        self.tracks = tracks
        return IngestStatus.APPLIED
