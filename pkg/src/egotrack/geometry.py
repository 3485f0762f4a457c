"""Rigid transforms, pinhole projection, visibility, and sigma-point extraction.

Conventions used throughout:
  * camera frame: +Z optical axis into the scene, +X right, +Y down, meters
  * pixel coordinates: u right, v down, origin at the top-left corner
  * rotations are 3x3 orthonormal matrices with determinant +1
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateGeometryError, FrameMismatchError, InvalidDepthError, NumericalError

# Orthonormality tolerance for accepting a rotation matrix.
ROTATION_TOL = 1e-9
# Covariance eigenvalues below this are treated as indefinite rather than roundoff.
EIGENVALUE_FLOOR = -1e-12


def _vec3(x) -> np.ndarray:
    return np.asarray(x, dtype=float).reshape(3)


def rotation_x(angle: float) -> np.ndarray:
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


def rotation_y(angle: float) -> np.ndarray:
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


def rotation_z(angle: float) -> np.ndarray:
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def rotation_rpy(roll: float, pitch: float, yaw: float) -> np.ndarray:
    """Intrinsic roll-pitch-yaw composed as Rz(yaw) @ Ry(pitch) @ Rx(roll)."""
    return rotation_z(yaw) @ rotation_y(pitch) @ rotation_x(roll)


def rotation_about_axis(axis, angle: float) -> np.ndarray:
    """Rodrigues rotation about a (not necessarily unit) axis."""
    a = _vec3(axis)
    n = np.linalg.norm(a)
    if n == 0.0:
        raise DegenerateGeometryError("rotation axis has zero norm")
    a = a / n
    k = np.array([[0.0, -a[2], a[1]], [a[2], 0.0, -a[0]], [-a[1], a[0], 0.0]])
    return np.eye(3) + np.sin(angle) * k + (1.0 - np.cos(angle)) * (k @ k)


@dataclass(frozen=True)
class RigidTransform:
    """SE(3) map taking coordinates in ``from_frame`` to ``to_frame``: p' = R p + t."""

    rotation: np.ndarray
    translation: np.ndarray
    from_frame: str = "camera"
    to_frame: str = "camera"

    def __post_init__(self):
        r = np.asarray(self.rotation, dtype=float).reshape(3, 3)
        t = _vec3(self.translation)
        if np.abs(r.T @ r - np.eye(3)).max() > ROTATION_TOL:
            raise ValueError("rotation matrix is not orthonormal within 1e-9")
        if abs(np.linalg.det(r) - 1.0) > ROTATION_TOL:
            raise ValueError("rotation matrix determinant is not +1 within 1e-9")
        object.__setattr__(self, "rotation", r)
        object.__setattr__(self, "translation", t)

    @staticmethod
    def identity(frame: str = "camera") -> "RigidTransform":
        return RigidTransform(np.eye(3), np.zeros(3), frame, frame)

    def inverse(self) -> "RigidTransform":
        rt = self.rotation.T
        return RigidTransform(rt, -rt @ self.translation, self.to_frame, self.from_frame)

    def compose(self, other: "RigidTransform") -> "RigidTransform":
        """self o other: apply ``other`` first, then ``self``."""
        if other.to_frame != self.from_frame:
            raise FrameMismatchError(
                f"cannot compose {self.from_frame}<-{other.to_frame}: frames differ"
            )
        return RigidTransform(
            self.rotation @ other.rotation,
            self.rotation @ other.translation + self.translation,
            other.from_frame,
            self.to_frame,
        )

    def apply_point(self, p) -> np.ndarray:
        return self.rotation @ _vec3(p) + self.translation

    def apply_points(self, points: np.ndarray) -> np.ndarray:
        pts = np.asarray(points, dtype=float).reshape(-1, 3)
        return pts @ self.rotation.T + self.translation

    def apply_vectors(self, vectors: np.ndarray) -> np.ndarray:
        """Rotate direction vectors (no translation)."""
        return np.asarray(vectors, dtype=float).reshape(-1, 3) @ self.rotation.T


def relative_transform(pose_prev: RigidTransform, pose_curr: RigidTransform) -> RigidTransform:
    """Frame-to-frame motion from two poses that share a parent frame.

    Both arguments map their child frame into the common parent (e.g. camera
    pose in the world).  The result maps the previous child frame into the
    current one, which is the increment an ego-compensated filter consumes.
    """
    if pose_prev.to_frame != pose_curr.to_frame:
        raise FrameMismatchError("poses do not share a parent frame")
    return pose_curr.inverse().compose(pose_prev)


@dataclass(frozen=True)
class CameraModel:
    """Pinhole intrinsics with an image bound and a near plane."""

    fx: float = 500.0
    fy: float = 500.0
    cx: float = 320.0
    cy: float = 240.0
    width: int = 640
    height: int = 480
    near_z: float = 0.05

    def __post_init__(self):
        if min(self.fx, self.fy) <= 0.0:
            raise ValueError("focal lengths must be positive")
        if self.width <= 0 or self.height <= 0:
            raise ValueError("image size must be positive")
        if self.near_z <= 0.0:
            raise ValueError("near plane must be positive")


def project_point(cam: CameraModel, p) -> tuple[np.ndarray, bool]:
    """Project one camera-frame point; returns (pixel, in_fov).

    Points closer than the near plane (including behind the camera) are never
    in the field of view.  For those the pixel is still finite: it is computed
    with the depth clamped to the near plane so callers get a usable direction
    instead of an overflow.
    """
    p = _vec3(p)
    z = p[2] if p[2] >= cam.near_z else cam.near_z
    u = cam.fx * p[0] / z + cam.cx
    v = cam.fy * p[1] / z + cam.cy
    in_fov = (
        p[2] >= cam.near_z
        and 0.0 <= u < cam.width
        and 0.0 <= v < cam.height
    )
    return np.array([u, v]), bool(in_fov)


def project_points(cam: CameraModel, points: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized ``project_point``; returns (pixels (N,2), in_fov (N,))."""
    pts = np.asarray(points, dtype=float).reshape(-1, 3)
    z = np.maximum(pts[:, 2], cam.near_z)
    u = cam.fx * pts[:, 0] / z + cam.cx
    v = cam.fy * pts[:, 1] / z + cam.cy
    in_fov = (
        (pts[:, 2] >= cam.near_z)
        & (u >= 0.0)
        & (u < cam.width)
        & (v >= 0.0)
        & (v < cam.height)
    )
    return np.stack([u, v], axis=1), in_fov


def backproject_pixel(cam: CameraModel, pixel, depth: float) -> np.ndarray:
    """Invert the pinhole model at a given metric depth along the optical axis."""
    if depth < cam.near_z:
        raise InvalidDepthError(f"depth {depth!r} is in front of the near plane {cam.near_z!r}")
    u, v = float(pixel[0]), float(pixel[1])
    return np.array([(u - cam.cx) * depth / cam.fx, (v - cam.cy) * depth / cam.fy, depth])


def backproject_pixels(cam: CameraModel, pixels: np.ndarray, depths: np.ndarray) -> np.ndarray:
    pix = np.asarray(pixels, dtype=float).reshape(-1, 2)
    d = np.asarray(depths, dtype=float).reshape(-1)
    if np.any(d < cam.near_z):
        raise InvalidDepthError("some depths are in front of the near plane")
    x = (pix[:, 0] - cam.cx) * d / cam.fx
    y = (pix[:, 1] - cam.cy) * d / cam.fy
    return np.stack([x, y, d], axis=1)


@dataclass
class SurfacePointCloud:
    """Sampled object surface; ``normals`` is None for sources that lack them."""

    points: np.ndarray
    normals: np.ndarray | None = None
    frame: str = "camera"

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=float).reshape(-1, 3)
        if self.normals is not None:
            self.normals = np.asarray(self.normals, dtype=float).reshape(-1, 3)
            if self.normals.shape[0] != self.points.shape[0]:
                raise ValueError("points and normals must have the same length")
            norms = np.linalg.norm(self.normals, axis=1)
            if np.abs(norms - 1.0).max() > 1e-6:
                raise ValueError("normals must have unit norm within 1e-6")

    def __len__(self) -> int:
        return self.points.shape[0]


def transform_points(cloud: SurfacePointCloud, t: RigidTransform) -> SurfacePointCloud:
    """Map a cloud into another frame; normals rotate, points rotate and translate."""
    if cloud.frame != t.from_frame:
        raise FrameMismatchError(
            f"cloud is in frame {cloud.frame!r} but transform expects {t.from_frame!r}"
        )
    normals = None if cloud.normals is None else cloud.normals @ t.rotation.T
    return SurfacePointCloud(cloud.points @ t.rotation.T + t.translation, normals, t.to_frame)


def compute_visible_set(cloud: SurfacePointCloud, cam: CameraModel) -> np.ndarray:
    """Indices of points that face the camera and land inside the image.

    Back-face test is strict: n . p < 0.  Both tests are evaluated on every
    point, so the returned indices keep the input ordering.
    """
    if cloud.normals is None:
        raise DegenerateGeometryError("visibility culling requires surface normals")
    facing = np.einsum("ij,ij->i", cloud.normals, cloud.points) < 0.0
    _, in_fov = project_points(cam, cloud.points)
    return np.nonzero(facing & in_fov)[0]


def solid_angle_weights(points: np.ndarray, normals: np.ndarray) -> np.ndarray:
    """Per-point weight max(0, -n.p / |p|^3).

    This is the solid-angle density a surface patch subtends at the camera
    origin; points facing away get exactly zero.
    """
    pts = np.asarray(points, dtype=float).reshape(-1, 3)
    nrm = np.asarray(normals, dtype=float).reshape(-1, 3)
    dist = np.linalg.norm(pts, axis=1)
    if np.any(dist == 0.0):
        raise DegenerateGeometryError("point at the camera origin has no solid angle")
    return np.maximum(0.0, -np.einsum("ij,ij->i", nrm, pts) / dist**3)


@dataclass(frozen=True)
class PcaResult:
    """Weighted first and second moments: centroid, eigenvalues (descending),
    and unit eigenvectors stored as matrix columns."""

    centroid: np.ndarray
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def weighted_pca(points: np.ndarray, weights: np.ndarray) -> PcaResult:
    """Weighted centroid and principal axes of a 3D point set.

    Eigenvalues come out sorted descending.  Eigenvector signs are fixed by
    making the largest-magnitude component positive (lowest index on ties) so
    repeated runs and independent implementations agree up to roundoff.
    """
    pts = np.asarray(points, dtype=float).reshape(-1, 3)
    w = np.asarray(weights, dtype=float).reshape(-1)
    if w.shape[0] != pts.shape[0]:
        raise ValueError("points and weights must have the same length")
    total = w.sum()
    if total <= 0.0:
        raise DegenerateGeometryError("total weight must be positive")
    centroid = (w @ pts) / total
    centered = pts - centroid
    cov = (centered * w[:, None]).T @ centered / total
    cov = 0.5 * (cov + cov.T)
    evals, evecs = np.linalg.eigh(cov)
    order = np.argsort(evals)[::-1]
    evals = evals[order]
    evecs = evecs[:, order]
    if evals.min() < EIGENVALUE_FLOOR:
        raise NumericalError(f"covariance eigenvalue {evals.min()!r} below roundoff floor")
    evals = np.maximum(evals, 0.0)
    for k in range(3):
        lead = np.argmax(np.abs(evecs[:, k]))
        if evecs[lead, k] < 0.0:
            evecs[:, k] = -evecs[:, k]
    return PcaResult(centroid, evals, evecs)


@dataclass
class SigmaPointSet:
    """Seven ordered points: centroid first, then +/- pairs per principal axis.

    Index 0 is the centroid; indices (2k-1, 2k) are centroid +/- offset along
    axis k in descending-eigenvalue order.
    """

    points: np.ndarray
    frame: str = "camera"

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=float).reshape(7, 3)

    @property
    def centroid(self) -> np.ndarray:
        return self.points[0]


def extract_sigma_points(pca: PcaResult, alpha: float) -> SigmaPointSet:
    """Place the 7-point summary mu, mu +/- alpha*sqrt(lambda_k)*e_k."""
    if alpha <= 0.0:
        raise ValueError("alpha must be positive")
    evals = np.asarray(pca.eigenvalues, dtype=float).reshape(3)
    if evals.min() < EIGENVALUE_FLOOR:
        raise NumericalError(f"eigenvalue {evals.min()!r} below roundoff floor")
    evals = np.maximum(evals, 0.0)
    pts = np.empty((7, 3))
    pts[0] = pca.centroid
    for k in range(3):
        offset = alpha * np.sqrt(evals[k]) * pca.eigenvectors[:, k]
        pts[1 + 2 * k] = pca.centroid + offset
        pts[2 + 2 * k] = pca.centroid - offset
    return SigmaPointSet(pts)


def sigma_points_from_cloud(
    cloud: SurfacePointCloud,
    cam: CameraModel,
    alpha: float = 1.0,
    weighting: str = "solid_angle",
) -> SigmaPointSet | None:
    """Full pipeline: visibility, weighting, PCA, sigma-point placement.

    Returns None when no point is visible (target-not-visible, not an error).
    Clouds without normals skip back-face culling (the image-space test still
    applies) and always use uniform weights; ``weighting="uniform"`` forces
    uniform weights for a cloud that does have normals.
    """
    if weighting not in ("solid_angle", "uniform"):
        raise ValueError(f"unknown weighting {weighting!r}")
    if cloud.normals is None:
        _, in_fov = project_points(cam, cloud.points)
        visible = np.nonzero(in_fov)[0]
        weighting = "uniform"
    else:
        visible = compute_visible_set(cloud, cam)
    if visible.size == 0:
        return None
    pts = cloud.points[visible]
    if weighting == "solid_angle":
        weights = solid_angle_weights(pts, cloud.normals[visible])
    else:
        weights = np.ones(visible.size)
    pca = weighted_pca(pts, weights)
    out = extract_sigma_points(pca, alpha)
    out.frame = cloud.frame
    return out
