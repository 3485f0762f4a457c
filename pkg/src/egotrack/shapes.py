"""Analytic surface samplers with closed-form outward normals.

All shapes are centered at the object-frame origin and return
(points (N,3), normals (N,3)).
"""

from __future__ import annotations

import numpy as np


def sample_sphere(radius: float, n: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Uniform samples on a sphere via normalized Gaussians."""
    if radius <= 0.0:
        raise ValueError("radius must be positive")
    d = rng.normal(size=(n, 3))
    d /= np.linalg.norm(d, axis=1, keepdims=True)
    return radius * d, d


def sample_box(dims, n: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Area-weighted samples on an axis-aligned box with extents ``dims``."""
    sx, sy, sz = (float(v) for v in dims)
    if min(sx, sy, sz) <= 0.0:
        raise ValueError("box extents must be positive")
    half = np.array([sx, sy, sz]) / 2.0
    # Face order: +x, -x, +y, -y, +z, -z.
    areas = np.array([sy * sz, sy * sz, sx * sz, sx * sz, sx * sy, sx * sy])
    face = rng.choice(6, size=n, p=areas / areas.sum())
    uv = rng.uniform(-1.0, 1.0, size=(n, 2))
    points = np.empty((n, 3))
    normals = np.zeros((n, 3))
    for f in range(6):
        mask = face == f
        axis = f // 2
        sign = 1.0 if f % 2 == 0 else -1.0
        others = [i for i in range(3) if i != axis]
        points[mask, axis] = sign * half[axis]
        points[mask, others[0]] = uv[mask, 0] * half[others[0]]
        points[mask, others[1]] = uv[mask, 1] * half[others[1]]
        normals[mask, axis] = sign
    return points, normals


def sample_cylinder(radius: float, height: float, n: int,
                    rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Area-weighted samples on a z-axis cylinder with two caps."""
    if radius <= 0.0 or height <= 0.0:
        raise ValueError("radius and height must be positive")
    lateral = 2.0 * np.pi * radius * height
    cap = np.pi * radius * radius
    part = rng.choice(3, size=n, p=np.array([lateral, cap, cap]) / (lateral + 2.0 * cap))
    theta = rng.uniform(0.0, 2.0 * np.pi, size=n)
    points = np.empty((n, 3))
    normals = np.zeros((n, 3))
    side = part == 0
    points[side, 0] = radius * np.cos(theta[side])
    points[side, 1] = radius * np.sin(theta[side])
    points[side, 2] = rng.uniform(-height / 2.0, height / 2.0, size=int(side.sum()))
    normals[side, 0] = np.cos(theta[side])
    normals[side, 1] = np.sin(theta[side])
    for idx, sign in ((1, 1.0), (2, -1.0)):
        mask = part == idx
        m = int(mask.sum())
        r = radius * np.sqrt(rng.uniform(0.0, 1.0, size=m))
        points[mask, 0] = r * np.cos(theta[mask])
        points[mask, 1] = r * np.sin(theta[mask])
        points[mask, 2] = sign * height / 2.0
        normals[mask, 2] = sign
    return points, normals


def sample_shape(shape: str, n: int, rng: np.random.Generator, *, radius: float = 0.1,
                 height: float = 0.2, dims=(0.2, 0.15, 0.1)) -> tuple[np.ndarray, np.ndarray]:
    if shape == "sphere":
        return sample_sphere(radius, n, rng)
    if shape == "box":
        return sample_box(dims, n, rng)
    if shape == "cylinder":
        return sample_cylinder(radius, height, n, rng)
    raise ValueError(f"unknown shape {shape!r}")
