"""Homogeneous-coordinate primitives and edge/VP consistency measures.

Points and lines live in the projective plane as real 3-vectors. A point
(x, y, w) with |w| above ``EPS_H`` is stored normalized to w = 1; otherwise
it is an ideal point (direction at infinity) stored with unit Euclidean
norm. Lines (a, b, c) are stored with (a, b) unit-normalized so that c is
the signed distance of the line from the origin.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateInput, IdenticalLines

# Ideal-point classification threshold, calibrated for coordinates on the
# order of the 500-px working frame.
EPS_H = 1e-8


@dataclass(frozen=True)
class HPoint:
    """A 2D point in homogeneous coordinates."""

    coords: np.ndarray
    is_ideal: bool = False

    @staticmethod
    def from_array(v) -> "HPoint":
        v = np.asarray(v, dtype=float)
        if v.shape != (3,):
            raise ValueError("homogeneous point needs exactly 3 components")
        norm = np.linalg.norm(v)
        if norm == 0.0 or not np.all(np.isfinite(v)):
            raise DegenerateInput("zero or non-finite homogeneous vector")
        if abs(v[2]) > EPS_H * norm:
            return HPoint(v / v[2], is_ideal=False)
        v = v / norm
        # Deterministic orientation for directions: first nonzero positive.
        lead = v[0] if v[0] != 0.0 else v[1]
        if lead < 0.0:
            v = -v
        return HPoint(v, is_ideal=True)

    @staticmethod
    def from_xy(x: float, y: float) -> "HPoint":
        return HPoint(np.array([float(x), float(y), 1.0]), is_ideal=False)

    @property
    def xy(self) -> np.ndarray:
        if self.is_ideal:
            raise ValueError("ideal point has no finite pixel location")
        return self.coords[:2]

    @property
    def direction(self) -> np.ndarray:
        """Unit direction of an ideal point."""
        if not self.is_ideal:
            raise ValueError("finite point has no direction")
        return self.coords[:2]


@dataclass(frozen=True)
class HLine:
    """A 2D line a*x + b*y + c*w = 0 with unit normal (a, b)."""

    coords: np.ndarray

    @staticmethod
    def from_array(v) -> "HLine":
        v = np.asarray(v, dtype=float)
        if v.shape != (3,):
            raise ValueError("homogeneous line needs exactly 3 components")
        norm = float(np.hypot(v[0], v[1]))
        if norm < EPS_H * max(1.0, abs(v[2])):
            raise DegenerateInput("line has zero normal (a, b)")
        v = v / norm
        # Sign convention: first nonzero of (a, b) positive.
        lead = v[0] if v[0] != 0.0 else v[1]
        if lead < 0.0:
            v = -v
        return HLine(v)

    @staticmethod
    def through(p: np.ndarray, q: np.ndarray) -> "HLine":
        """Line through two finite 2D points."""
        p = np.asarray(p, dtype=float)
        q = np.asarray(q, dtype=float)
        a = p[1] - q[1]
        b = q[0] - p[0]
        c = p[0] * q[1] - q[0] * p[1]
        return HLine.from_array([a, b, c])

    @property
    def normal(self) -> np.ndarray:
        return self.coords[:2]


@dataclass
class Edge:
    """An approximately straight pixel chain with its fitted line.

    ``points`` is an (N, 2) array of sub-pixel coordinates, ``length`` the
    polyline arc length in pixels.
    """

    points: np.ndarray
    fitted_line: HLine
    length: float
    _moments: np.ndarray | None = field(default=None, repr=False, compare=False)

    @staticmethod
    def from_points(points) -> "Edge":
        pts = np.asarray(points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 2:
            raise DegenerateInput("edge needs at least 2 points of shape (N, 2)")
        line = fit_line_tls(pts)
        length = float(np.sum(np.linalg.norm(np.diff(pts, axis=0), axis=1)))
        return Edge(points=pts, fitted_line=line, length=length)

    @property
    def moments(self) -> np.ndarray:
        """(n, cx, cy, sxx, sxy, syy): point count, centroid, centered scatter."""
        if self._moments is None:
            self._moments = edge_moments(self.points)
        return self._moments


def edge_moments(points: np.ndarray) -> np.ndarray:
    pts = np.asarray(points, dtype=float)
    n = pts.shape[0]
    c = pts.mean(axis=0)
    d = pts - c
    sxx = float(np.dot(d[:, 0], d[:, 0]))
    sxy = float(np.dot(d[:, 0], d[:, 1]))
    syy = float(np.dot(d[:, 1], d[:, 1]))
    return np.array([float(n), c[0], c[1], sxx, sxy, syy])


def fit_line_tls(points) -> HLine:
    """Total-least-squares line fit minimizing perpendicular residuals.

    The line normal is the eigenvector of the smallest eigenvalue of the
    2x2 centered scatter matrix, so the fit is rotation invariant and
    handles vertical lines.

    Raises:
        DegenerateInput: if fewer than 2 points or all points coincide.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 2:
        raise DegenerateInput("need at least 2 points of shape (N, 2)")
    c = pts.mean(axis=0)
    d = pts - c
    scatter = d.T @ d
    if np.trace(scatter) <= 0.0:
        raise DegenerateInput("all points coincide")
    evals, evecs = np.linalg.eigh(scatter)
    normal = evecs[:, 0]  # eigenvector of the smallest eigenvalue
    return HLine.from_array([normal[0], normal[1], -float(normal @ c)])


def intersect(l1: HLine, l2: HLine) -> HPoint:
    """Intersection of two lines via the cross product.

    Parallel lines yield an ideal point.

    Raises:
        IdenticalLines: if the cross product is numerically zero.
    """
    v = np.cross(l1.coords, l2.coords)
    scale = max(1.0, abs(l1.coords[2]), abs(l2.coords[2]))
    if np.linalg.norm(v) < 1e-12 * scale:
        raise IdenticalLines("lines are identical up to scale")
    return HPoint.from_array(v)


def point_line_distance(p, l: HLine) -> float:
    """Perpendicular distance from a 2D point to a line."""
    p = np.asarray(p, dtype=float)
    return abs(float(l.coords[0] * p[0] + l.coords[1] * p[1] + l.coords[2]))


def _lambda_min_through(moments: np.ndarray, vx: float, vy: float) -> float:
    """Smallest eigenvalue of sum_p (p - v)(p - v)^T from centered moments.

    Uses det/trace shifted to the centroid to avoid the catastrophic
    cancellation of forming the scatter about a distant v directly.
    """
    n, cx, cy, sxx, sxy, syy = moments
    ux = cx - vx
    uy = cy - vy
    tr = sxx + syy + n * (ux * ux + uy * uy)
    # det(Sc + n*u*u^T) = det(Sc) + n * u^T adj(Sc) u, all terms >= 0.
    det_c = sxx * syy - sxy * sxy
    det = det_c + n * (syy * ux * ux - 2.0 * sxy * ux * uy + sxx * uy * uy)
    det = max(det, 0.0)
    if tr <= 0.0:
        return 0.0
    disc = max(tr * tr - 4.0 * det, 0.0)
    return 2.0 * det / (tr + np.sqrt(disc))


def d_rms(edge: Edge, v: HPoint) -> float:
    """RMS consistency between an edge and a VP hypothesis.

    For a finite v this is the minimum over all lines through v of the RMS
    perpendicular distance from the edge points to the line, available in
    closed form as sqrt(lambda_min(S)/N) with S the scatter of the points
    about v. For an ideal v the pencil of lines through v degenerates to
    the family of lines with v's direction, and the measure becomes the
    standard deviation of the points projected onto the direction's normal.
    """
    m = edge.moments
    n = m[0]
    if v.is_ideal:
        dx, dy = v.direction
        nx, ny = -dy, dx
        var = (m[3] * nx * nx + 2.0 * m[4] * nx * ny + m[5] * ny * ny) / n
        return float(np.sqrt(max(var, 0.0)))
    lam = _lambda_min_through(m, v.coords[0], v.coords[1])
    return float(np.sqrt(max(lam, 0.0) / n))
