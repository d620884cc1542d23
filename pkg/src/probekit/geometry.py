"""Shared 3D math: vectors, unit quaternions, and the viewpoint pose.

Conventions: vectors are float64 numpy arrays of shape (3,), quaternions are
float64 arrays of shape (4,) ordered [w, x, y, z]. The canonical camera looks
along -Z with +Y up before the orientation quaternion is applied.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np

from .errors import NonFiniteCoordinateError

UNIT_TOLERANCE = 1e-9


def vec3(value) -> np.ndarray:
    """Coerce a length-3 sequence into a float64 vector."""
    a = np.asarray(value, dtype=np.float64)
    if a.shape != (3,):
        raise ValueError(f"expected a 3-vector, got shape {a.shape}")
    return a


def finite_vec3(value) -> np.ndarray:
    a = vec3(value)
    if not np.all(np.isfinite(a)):
        raise NonFiniteCoordinateError(f"non-finite coordinate in {value!r}")
    return a


def norm(v) -> float:
    return float(np.linalg.norm(v))


def normalize(v) -> np.ndarray:
    a = vec3(v)
    n = norm(a)
    if n == 0.0:
        raise ValueError("cannot normalize a zero vector")
    return a / n


def perpendicular(v: np.ndarray) -> np.ndarray:
    """Some unit vector orthogonal to v (deterministic choice)."""
    axis = np.array([1.0, 0.0, 0.0]) if abs(v[0]) <= abs(v[2]) else np.array([0.0, 0.0, 1.0])
    return normalize(np.cross(v, axis))


def quat(value) -> np.ndarray:
    a = np.asarray(value, dtype=np.float64)
    if a.shape != (4,):
        raise ValueError(f"expected a quaternion [w,x,y,z], got shape {a.shape}")
    return a


def quat_identity() -> np.ndarray:
    return np.array([1.0, 0.0, 0.0, 0.0])


def quat_normalize(q) -> np.ndarray:
    a = quat(q)
    n = float(np.linalg.norm(a))
    if n == 0.0:
        raise ValueError("cannot normalize a zero quaternion")
    return a / n


def quat_from_axis_angle(axis, angle: float) -> np.ndarray:
    u = normalize(axis)
    half = 0.5 * angle
    return np.concatenate(([math.cos(half)], math.sin(half) * u))


def quat_rotate(q: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Rotate vector v by unit quaternion q."""
    w, qv = q[0], q[1:]
    t = 2.0 * np.cross(qv, v)
    return v + w * t + np.cross(qv, t)


def angle_between(a: np.ndarray, b: np.ndarray) -> float:
    """Angle in [0, pi] between two nonzero vectors."""
    c = float(np.dot(a, b)) / (norm(a) * norm(b))
    return math.acos(max(-1.0, min(1.0, c)))


def rotate_toward(v: np.ndarray, w: np.ndarray, angle: float, up: np.ndarray) -> np.ndarray:
    """Rotate unit vector v toward w by ``angle`` within their common plane.

    When v and w are (anti)parallel the plane is undefined; the plane spanned
    by v and ``up`` is used instead, falling back to an arbitrary
    perpendicular when v is parallel to up as well.
    """
    axis = np.cross(v, w)
    s = float(np.linalg.norm(axis))
    if s < 1e-12:
        axis = np.cross(v, up)
        s = float(np.linalg.norm(axis))
        if s < 1e-12:
            axis = perpendicular(v)
        else:
            axis = axis / s
    else:
        axis = axis / s
    cos_a, sin_a = math.cos(angle), math.sin(angle)
    return v * cos_a + np.cross(axis, v) * sin_a + axis * float(np.dot(axis, v)) * (1.0 - cos_a)


class ViewMode(str, Enum):
    EGOCENTRIC = "egocentric"
    EXOCENTRIC = "exocentric"


_FORWARD = np.array([0.0, 0.0, -1.0])
_UP = np.array([0.0, 1.0, 0.0])


@dataclass(frozen=True)
class Viewpoint:
    """Camera pose: position, orientation, and ego/exocentric mode."""

    position: np.ndarray = field(default_factory=lambda: np.zeros(3))
    orientation: np.ndarray = field(default_factory=quat_identity)
    mode: ViewMode = ViewMode.EGOCENTRIC

    def __post_init__(self):
        object.__setattr__(self, "position", finite_vec3(self.position))
        q = quat(self.orientation)
        if abs(float(np.linalg.norm(q)) - 1.0) > UNIT_TOLERANCE:
            raise ValueError("viewpoint orientation must be a unit quaternion")
        object.__setattr__(self, "orientation", q)
        object.__setattr__(self, "mode", ViewMode(self.mode))

    def view_direction(self) -> np.ndarray:
        return quat_rotate(self.orientation, _FORWARD)

    def up(self) -> np.ndarray:
        return quat_rotate(self.orientation, _UP)

    def moved_to(self, position) -> "Viewpoint":
        return replace(self, position=finite_vec3(position))
