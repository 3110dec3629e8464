"""Closed contours and their truncated Fourier-series codec.

A contour is traced as

    x(t) = Lx + sum_n a_n sin(2 pi n t / T) + b_n cos(2 pi n t / T)
    y(t) = Ly + sum_n c_n sin(2 pi n t / T) + d_n cos(2 pi n t / T)

for t = 0..T-1. Note that ``a`` pairs with sine for x, so a circle traced
counter-clockwise from its rightmost point has ``b_1 = c_1 = r``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import DegenerateContour, InsufficientSamples, InvalidDescriptor

DEFAULT_N = 7
DEFAULT_T = 360
DEFAULT_T_OUT = 128

_COINCIDENT = 1e-9
_MIN_AREA = 1e-9


@dataclass(eq=False)
class Contour:
    """Ordered closed polygon; the last vertex connects back to the first."""

    points: np.ndarray
    class_id: int = 0

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 2:
            raise DegenerateContour(f"points must have shape (n, 2), got {pts.shape}")
        if len(pts) < 3:
            raise DegenerateContour(f"contour needs >= 3 vertices, got {len(pts)}")
        self.points = pts
        self.class_id = int(self.class_id)

    def __len__(self):
        return len(self.points)

    def translated(self, v) -> "Contour":
        return Contour(self.points + np.asarray(v, dtype=float), self.class_id)

    def scaled(self, s: float) -> "Contour":
        return Contour(self.points * float(s), self.class_id)

    def bbox(self):
        """(xmin, ymin, xmax, ymax) of the vertex set."""
        lo = self.points.min(axis=0)
        hi = self.points.max(axis=0)
        return float(lo[0]), float(lo[1]), float(hi[0]), float(hi[1])

    @property
    def is_degenerate(self) -> bool:
        return abs(centroid_area(self)[1]) < _MIN_AREA


@dataclass(eq=False)
class FourierDescriptor:
    """Center ``(Lx, Ly)`` plus an ``(N, 4)`` array of ``(a, b, c, d)`` rows."""

    center: np.ndarray
    coeffs: np.ndarray
    period_samples: int = DEFAULT_T

    def __post_init__(self):
        center = np.asarray(self.center, dtype=float).reshape(-1)
        coeffs = np.asarray(self.coeffs, dtype=float)
        if center.shape != (2,):
            raise InvalidDescriptor(f"center must have 2 entries, got {center.shape}")
        if coeffs.ndim != 2 or coeffs.shape[1] != 4 or coeffs.shape[0] < 1:
            raise InvalidDescriptor(f"coeffs must have shape (N>=1, 4), got {coeffs.shape}")
        self.center = center
        self.coeffs = coeffs
        self.period_samples = int(self.period_samples)

    @property
    def n_harmonics(self) -> int:
        return self.coeffs.shape[0]

    @property
    def harmonics(self):
        return [tuple(float(v) for v in row) for row in self.coeffs]

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.center)) and np.all(np.isfinite(self.coeffs)))

    def copy(self) -> "FourierDescriptor":
        return FourierDescriptor(self.center.copy(), self.coeffs.copy(), self.period_samples)

    def with_center(self, center) -> "FourierDescriptor":
        return FourierDescriptor(np.asarray(center, dtype=float), self.coeffs.copy(),
                                 self.period_samples)

    def flat(self) -> np.ndarray:
        """Coefficients flattened harmonic-major: a1 b1 c1 d1 a2 ..."""
        return self.coeffs.reshape(-1).copy()

    def first_amplitude(self) -> float:
        """Mean of the x and y amplitudes of the first harmonic."""
        a, b, c, d = self.coeffs[0]
        return 0.5 * (np.hypot(a, b) + np.hypot(c, d))


@dataclass(frozen=True)
class HarmonicExtents:
    """Full width/height of each harmonic's ellipse, floored away from zero."""

    ex: np.ndarray = field(repr=False)
    ey: np.ndarray = field(repr=False)
    floor: float = 1e-3


def centroid_area(c: Contour):
    """Shoelace signed area (positive when counter-clockwise) and centroid."""
    p = c.points
    q = np.roll(p, -1, axis=0)
    cross = p[:, 0] * q[:, 1] - q[:, 0] * p[:, 1]
    area = 0.5 * cross.sum()
    if abs(area) < 1e-300:
        return p.mean(axis=0), float(area)
    cx = ((p[:, 0] + q[:, 0]) * cross).sum() / (6.0 * area)
    cy = ((p[:, 1] + q[:, 1]) * cross).sum() / (6.0 * area)
    return np.array([cx, cy]), float(area)


def _dedupe(points: np.ndarray) -> np.ndarray:
    # drop vertices coinciding with their successor, closure included
    keep = np.linalg.norm(points - np.roll(points, -1, axis=0), axis=1) > _COINCIDENT
    if not keep.any():
        return points[:1]
    return points[keep]


def _ray_hit(points: np.ndarray, origin: np.ndarray):
    """Farthest hit of the +x ray from ``origin``; returns (edge index, w, x) or None."""
    p = points
    q = np.roll(p, -1, axis=0)
    dy = q[:, 1] - p[:, 1]
    with np.errstate(divide="ignore", invalid="ignore"):
        w = (origin[1] - p[:, 1]) / dy
    x = p[:, 0] + w * (q[:, 0] - p[:, 0])
    ok = (dy != 0) & (w >= -1e-10) & (w <= 1 + 1e-10) & (x >= origin[0])
    if not ok.any():
        return None
    idx = np.flatnonzero(ok)
    best = idx[np.argmax(x[idx])]
    return int(best), float(w[best]), float(x[best])


def canonicalize(c: Contour) -> Contour:
    """Counter-clockwise orientation, starting where the +x centroid ray exits.

    The exit point is inserted as a vertex when it falls inside an edge.
    Idempotent.
    """
    pts = _dedupe(c.points)
    if len(pts) < 3:
        raise DegenerateContour("fewer than 3 distinct vertices")
    center, area = centroid_area(Contour(pts))
    if abs(area) < _MIN_AREA:
        raise DegenerateContour(f"contour area {area:.3g} is degenerate")
    if area < 0:
        pts = pts[::-1].copy()

    hit = _ray_hit(pts, center)
    lo, hi = pts.min(axis=0), pts.max(axis=0)
    tol = _COINCIDENT * max(1.0, float(np.hypot(*(hi - lo))))
    if hit is None:
        # centroid outside a non-convex shape and the ray misses: rightmost vertex
        start = int(np.lexsort((np.abs(pts[:, 1] - center[1]), -pts[:, 0]))[0])
    else:
        i, _, x = hit
        j = (i + 1) % len(pts)
        point = np.array([x, center[1]])
        if np.linalg.norm(pts[i] - point) <= tol:
            start = i
        elif np.linalg.norm(pts[j] - point) <= tol:
            start = j
        else:
            pts = np.insert(pts, i + 1, point, axis=0)
            start = i + 1
    return Contour(np.roll(pts, -start, axis=0), c.class_id)


def _perimeter_params(points: np.ndarray):
    closed = np.vstack([points, points[:1]])
    seg = np.linalg.norm(np.diff(closed, axis=0), axis=1)
    return closed, np.concatenate([[0.0], np.cumsum(seg)])


def resample(c: Contour, T: int) -> np.ndarray:
    """``T`` points spaced uniformly by arc length, starting at vertex 0."""
    if T < 3:
        raise InsufficientSamples(f"T must be >= 3, got {T}")
    if c.is_degenerate:
        raise DegenerateContour("cannot resample a zero-area contour")
    closed, s = _perimeter_params(c.points)
    targets = np.arange(T) * (s[-1] / T)
    return np.column_stack([np.interp(targets, s, closed[:, 0]),
                            np.interp(targets, s, closed[:, 1])])


@lru_cache(maxsize=64)
def _basis(n_harmonics: int, T: int):
    # reduce n*t mod T in integers so large T stays exact
    phase = np.outer(np.arange(1, n_harmonics + 1), np.arange(T)) % T
    theta = 2.0 * np.pi * phase / T
    sin, cos = np.sin(theta), np.cos(theta)
    sin.flags.writeable = False
    cos.flags.writeable = False
    return sin, cos


def efd_encode(c: Contour, N: int = DEFAULT_N, T: int = DEFAULT_T,
               resample_points: bool | None = None) -> FourierDescriptor:
    """Least-squares fit of an ``N``-harmonic series to ``T`` contour samples.

    By default a contour that already has exactly ``T`` vertices is taken as
    its own sampling (this is what makes decode -> encode exact); any other
    contour is resampled uniformly by arc length. ``resample_points`` forces
    either behaviour. The contour is used as given: canonicalize first when
    a shared phase is needed.
    """
    if N < 1:
        raise InvalidDescriptor(f"N must be >= 1, got {N}")
    if T < 2 * N + 1:
        raise InsufficientSamples(f"T={T} < 2N+1={2 * N + 1}")
    if c.is_degenerate:
        raise DegenerateContour("cannot encode a zero-area contour")
    if resample_points is None:
        resample_points = len(c) != T
    pts = resample(c, T) if resample_points else c.points
    if len(pts) != T:
        raise InsufficientSamples(f"contour has {len(pts)} vertices, expected T={T}")

    sin, cos = _basis(N, T)
    x, y = pts[:, 0], pts[:, 1]
    coeffs = (2.0 / T) * np.column_stack([sin @ x, cos @ x, sin @ y, cos @ y])
    return FourierDescriptor(pts.mean(axis=0), coeffs, T)


def evaluate_series(d: FourierDescriptor, t, period: float) -> np.ndarray:
    """Points of the series at parameters ``t`` (any real values) with the given period."""
    t = np.asarray(t, dtype=float)
    n = np.arange(1, d.n_harmonics + 1)
    theta = 2.0 * np.pi * np.outer(t, n) / period
    s, co = np.sin(theta), np.cos(theta)
    a, b, c, dd = d.coeffs.T
    x = d.center[0] + s @ a + co @ b
    y = d.center[1] + s @ c + co @ dd
    return np.column_stack([x, y])


def efd_decode(d: FourierDescriptor, T_out: int = DEFAULT_T_OUT, class_id: int = 0) -> Contour:
    if T_out < 3:
        raise InsufficientSamples(f"T_out must be >= 3, got {T_out}")
    if not d.is_finite():
        raise InvalidDescriptor("descriptor has non-finite values")
    sin, cos = _basis(d.n_harmonics, T_out)
    a, b, c, dd = d.coeffs.T
    x = d.center[0] + a @ sin + b @ cos
    y = d.center[1] + c @ sin + dd @ cos
    return Contour(np.column_stack([x, y]), class_id)


def harmonic_extents(d: FourierDescriptor) -> HarmonicExtents:
    a, b, c, dd = d.coeffs.T
    ex = 2.0 * np.hypot(a, b)
    ey = 2.0 * np.hypot(c, dd)
    floor = 1e-3 * max(1.0, float(ex[0]))
    return HarmonicExtents(np.maximum(ex, floor), np.maximum(ey, floor), floor)


def series_residual(c: Contour, N: int, T: int = DEFAULT_T) -> float:
    """Sum of squared distances between the T arc-length samples and the N-term fit."""
    pts = resample(c, T)
    fit = efd_decode(efd_encode(Contour(pts), N, T, resample_points=False), T)
    return float(((pts - fit.points) ** 2).sum())


def series_area(d: FourierDescriptor) -> float:
    """Signed area enclosed by the continuous series (positive when counter-clockwise)."""
    a, b, c, dd = d.coeffs.T
    n = np.arange(1, d.n_harmonics + 1)
    return float(np.pi * np.sum(n * (b * c - a * dd)))


def shift_phase(d: FourierDescriptor, tau: float) -> FourierDescriptor:
    """Descriptor of the same curve re-parameterized as t -> t + tau (tau in samples)."""
    phi = 2.0 * np.pi * np.arange(1, d.n_harmonics + 1) * tau / d.period_samples
    cs, sn = np.cos(phi), np.sin(phi)
    a, b, c, dd = d.coeffs.T
    coeffs = np.column_stack([a * cs - b * sn, a * sn + b * cs,
                              c * cs - dd * sn, c * sn + dd * cs])
    return FourierDescriptor(d.center.copy(), coeffs, d.period_samples)


def align_phase(d: FourierDescriptor, samples: int = 4096) -> FourierDescriptor:
    """Canonical parameterization of a descriptor without resampling.

    Counter-clockwise traversal, with t = 0 at the point where the +x ray
    from the centroid leaves the curve (located on a ``samples``-gon).
    """
    if series_area(d) < 0:
        coeffs = d.coeffs.copy()
        coeffs[:, [0, 2]] *= -1
        d = FourierDescriptor(d.center.copy(), coeffs, d.period_samples)
    dense = efd_decode(d, samples)
    center, area = centroid_area(dense)
    if abs(area) < _MIN_AREA:
        raise DegenerateContour("cannot align a zero-area descriptor")
    hit = _ray_hit(dense.points, center)
    if hit is None:
        i = int(np.argmax(dense.points[:, 0]))
        w = 0.0
    else:
        i, w, _ = hit
    return shift_phase(d, (i + w) * d.period_samples / samples)


def encode_canonical(c: Contour, N: int = DEFAULT_N, T: int = DEFAULT_T) -> FourierDescriptor:
    """Encode with a shared phase, whatever the input's start vertex or orientation.

    A contour with exactly ``T`` vertices is treated as already sampled and
    encoded vertex-for-vertex; anything else is canonicalized and resampled
    by arc length. Either way the phase is then aligned on the series itself.
    """
    if len(c) == T:
        d = efd_encode(c, N, T, resample_points=False)
    else:
        d = efd_encode(canonicalize(c), N, T)
    return align_phase(d)
