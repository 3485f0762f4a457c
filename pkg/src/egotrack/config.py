"""JSON run configuration: defaults, validation, canonical form, and hashing.

Every key has a default matching the reference deployment constants except
``scenario.duration``, which the caller must provide.  Unknown keys are
rejected by full path so typos fail loudly instead of silently using a
default.
"""

from __future__ import annotations

import copy
import hashlib
import json
import math

from .errors import ConfigError
from .estimator import FilterConfig
from .geometry import CameraModel
from .perturbation import RandomizationConfig
from .sim import CameraMotion, ObjectSpec, ScenarioConfig, SensorSpec
from .tasklogic import AscConfig, CriteriaConfig, RewardConfig, TaskGeometry

DEFAULTS: dict = {
    "mode": "deploy",
    "scenario": {
        "seed": 0,
        "duration": None,  # required
        "control_rate": 50.0,
        "obs_rate": 5.0,
        "obs_latency": 0.2,
        "surface_samples": 2048,
        "alpha": 1.0,
        "vo_trans_noise_std": 0.0,
        "vo_rot_noise_std": 0.0,
        "drift_sigma": 0.01,
        "drift_max": 0.10,
        "camera": {
            "fx": 500.0,
            "fy": 500.0,
            "cx": 320.0,
            "cy": 240.0,
            "width": 640,
            "height": 480,
            "near_z": 0.05,
        },
        "camera_motion": {
            "kind": "static",
            "velocity": [0.0, 0.0, 0.0],
            "amplitude": 0.05,
            "frequency": 1.5,
            "pitch_amplitude_deg": 2.0,
            "yaw_rate": 0.5,
        },
        "target": {
            "shape": "sphere",
            "radius": 0.1,
            "height": 0.2,
            "dims": [0.2, 0.15, 0.1],
            "position": [2.5, 0.0, 0.0],
            "rpy": [0.0, 0.0, 0.0],
            "velocity": [0.0, 0.0, 0.0],
        },
        "sensor": {
            "pixel_std_u": 20.0,
            "pixel_std_v": 20.0,
            "depth_std": 0.05,
            "mode": "cloud",
        },
    },
    "filter": {
        "q_pos": 1e-6,
        "q_vel": 1e-5,
        "sigma_u": 20.0,
        "sigma_v": 20.0,
        "sigma_z": 0.05,
        "p0_pos": 1e-2,
        "p0_vel": 1e-1,
    },
    "criteria": {
        "eps_x": 0.05,
        "eps_y": 0.03,
        "eps_yaw": 0.10,
        "eps_pitch": 0.15,
        "delta_x": 0.10,
        "delta_y": 0.10,
        "delta_yaw": 0.20,
        "delta_pitch": 0.20,
    },
    "reward": {
        "sigma_track": 0.04,
        "k_pos": 1.0,
        "w_hint": 0.4,
        "w_opt": 20.0,
        "w_miss": -0.1,
        "w_roll": -2.0,
        "w_ang": -0.1,
        "w_smooth": -0.01,
        "w_limit": -0.1,
        "clip_planar": 0.5,
        "clip_pitch": math.pi / 6.0,
        "opt_velocity": "planar",
    },
    "asc": {
        "s_thresh": 0.15,
        "lambda_asc": 5.0,
        "p_near_start": 0.8,
        "p_near_end": 0.1,
        "p_fail_start": 0.2,
        "p_fail_end": 0.5,
        "window_n": 100,
        "replay_capacity": 1024,
    },
    "randomization": {
        "extrinsic_trans_x": [-0.02, 0.02],
        "extrinsic_trans_y": [-0.005, 0.005],
        "extrinsic_trans_z": [-0.02, 0.02],
        "extrinsic_roll_deg": [-0.5, 0.5],
        "extrinsic_pitch_deg": [-2.0, 2.0],
        "extrinsic_yaw_deg": [-0.5, 0.5],
        "perception_delay_ms": [0.0, 50.0],
        "lin_vel_noise_std": 0.1,
        "ang_vel_noise_std": 0.1,
        "gravity_noise_std": 0.1,
        "sigma_scale_noise_std": 0.1,
        "sigma_rot_noise_std": 0.1,
        "alpha_range": [1.0, 1.5],
        "friction_range": [0.2, 5.0],
        "restitution_range": [0.0, 1.0],
        "added_mass_range": [-1.0, 2.0],
    },
    # null disables per-tick reward/terminal evaluation.
    "task": None,
}

_TASK_DEFAULTS = {
    "p_opt": [0.0, 0.0, 0.0],
    "theta_opt": [0.0, 0.0, 0.0],
    "p_hint": [0.0, 0.0, 0.0],
    "w_pos": [1.0, 1.0, 1.0],
    "w_rot": [1.0, 1.0, 1.0],
    "task_kind": "short_axis",
}


def _merge(defaults, override, path: str) -> dict:
    """Deep merge with unknown-key rejection; scalar leaves replace defaults."""
    out = copy.deepcopy(defaults)
    for key, value in override.items():
        full = f"{path}.{key}" if path else key
        if key not in defaults:
            raise ConfigError(f"unknown config key {full!r}")
        if isinstance(defaults[key], dict) and defaults[key] is not None:
            if not isinstance(value, dict):
                raise ConfigError(f"config key {full!r} must be an object")
            out[key] = _merge(defaults[key], value, full)
        else:
            out[key] = value
    return out


def canonical_config(user: dict) -> dict:
    """Fully-defaulted configuration with every key present."""
    if not isinstance(user, dict):
        raise ConfigError("top-level config must be a JSON object")
    merged = _merge(DEFAULTS, user, "")
    task = user.get("task")
    if task is not None:
        merged["task"] = _merge(_TASK_DEFAULTS, task, "task")
    if merged["scenario"]["duration"] is None:
        raise ConfigError("missing required config key 'scenario.duration'")
    return merged


def config_hash(canonical: dict) -> str:
    """Stable content hash of the canonical form."""
    blob = json.dumps(canonical, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()


def _pairs(value):
    return tuple(float(v) for v in value)


def build_configs(canonical: dict):
    """Instantiate the typed configuration objects from the canonical dict.

    Returns (ScenarioConfig, FilterConfig, CriteriaConfig, RewardConfig,
    AscConfig, TaskGeometry | None).
    """
    sc = canonical["scenario"]
    try:
        camera = CameraModel(**sc["camera"])
        motion = CameraMotion(
            kind=sc["camera_motion"]["kind"],
            velocity=tuple(sc["camera_motion"]["velocity"]),
            amplitude=sc["camera_motion"]["amplitude"],
            frequency=sc["camera_motion"]["frequency"],
            pitch_amplitude_deg=sc["camera_motion"]["pitch_amplitude_deg"],
            yaw_rate=sc["camera_motion"]["yaw_rate"],
        )
        target = ObjectSpec(
            shape=sc["target"]["shape"],
            radius=sc["target"]["radius"],
            height=sc["target"]["height"],
            dims=tuple(sc["target"]["dims"]),
            position=tuple(sc["target"]["position"]),
            rpy=tuple(sc["target"]["rpy"]),
            velocity=tuple(sc["target"]["velocity"]),
        )
        sensor = SensorSpec(**sc["sensor"])
        randomization = None
        if canonical["mode"] == "training":
            r = canonical["randomization"]
            randomization = RandomizationConfig(
                extrinsic_trans_x=_pairs(r["extrinsic_trans_x"]),
                extrinsic_trans_y=_pairs(r["extrinsic_trans_y"]),
                extrinsic_trans_z=_pairs(r["extrinsic_trans_z"]),
                extrinsic_roll_deg=_pairs(r["extrinsic_roll_deg"]),
                extrinsic_pitch_deg=_pairs(r["extrinsic_pitch_deg"]),
                extrinsic_yaw_deg=_pairs(r["extrinsic_yaw_deg"]),
                perception_delay_ms=_pairs(r["perception_delay_ms"]),
                lin_vel_noise_std=r["lin_vel_noise_std"],
                ang_vel_noise_std=r["ang_vel_noise_std"],
                gravity_noise_std=r["gravity_noise_std"],
                sigma_scale_noise_std=r["sigma_scale_noise_std"],
                sigma_rot_noise_std=r["sigma_rot_noise_std"],
                alpha_range=_pairs(r["alpha_range"]),
                friction_range=_pairs(r["friction_range"]),
                restitution_range=_pairs(r["restitution_range"]),
                added_mass_range=_pairs(r["added_mass_range"]),
            )
        scenario = ScenarioConfig(
            seed=int(sc["seed"]),
            duration=float(sc["duration"]),
            control_rate=float(sc["control_rate"]),
            obs_rate=float(sc["obs_rate"]),
            obs_latency=float(sc["obs_latency"]),
            camera=camera,
            camera_motion=motion,
            target=target,
            surface_samples=int(sc["surface_samples"]),
            alpha=float(sc["alpha"]),
            vo_trans_noise_std=float(sc["vo_trans_noise_std"]),
            vo_rot_noise_std=float(sc["vo_rot_noise_std"]),
            sensor=sensor,
            drift_sigma=float(sc["drift_sigma"]),
            drift_max=float(sc["drift_max"]),
            randomization=randomization,
            mode=canonical["mode"],
        )
        filter_cfg = FilterConfig(**canonical["filter"])
        criteria = CriteriaConfig(**canonical["criteria"])
        reward = RewardConfig(**canonical["reward"])
        asc = AscConfig(**canonical["asc"])
        task = None
        if canonical["task"] is not None:
            t = canonical["task"]
            task = TaskGeometry(
                p_opt=t["p_opt"],
                theta_opt=t["theta_opt"],
                p_hint=t["p_hint"],
                w_pos=t["w_pos"],
                w_rot=t["w_rot"],
                task_kind=t["task_kind"],
            )
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    return scenario, filter_cfg, criteria, reward, asc, task


def load_config(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            user = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path!r}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path!r} is not valid JSON: {exc}") from exc
    return canonical_config(user)
