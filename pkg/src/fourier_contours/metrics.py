"""Scalar comparisons between contours."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .efd import Contour, centroid_area, resample
from .errors import DegenerateContour, DegeneratePair, EmptyRegion, UndefinedMetric

POLAR_RAYS = 360
GRID_RESOLUTION = 512
GRID_MARGIN = 0.02
HAUSDORFF_SAMPLES = 1000
_EDGE_SLACK = 1e-10


def _check(c: Contour):
    if c.is_degenerate:
        raise DegenerateContour("zero-area contour")


def box_iou(c1: Contour, c2: Contour) -> float:
    _check(c1)
    _check(c2)
    ax0, ay0, ax1, ay1 = c1.bbox()
    bx0, by0, bx1, by1 = c2.bbox()
    iw = max(0.0, min(ax1, bx1) - max(ax0, bx0))
    ih = max(0.0, min(ay1, by1) - max(ay0, by0))
    inter = iw * ih
    union = (ax1 - ax0) * (ay1 - ay0) + (bx1 - bx0) * (by1 - by0) - inter
    return inter / union


def ray_distances(c: Contour, center, K: int = POLAR_RAYS) -> np.ndarray:
    """Farthest boundary crossing along each of ``K`` evenly spaced rays; 0 on a miss."""
    step = 2.0 * np.pi / K
    theta = 2.0 * np.pi * np.arange(K) / K
    u = np.column_stack([np.cos(theta), np.sin(theta)])
    pts = c.points if isinstance(c, Contour) else np.asarray(c, dtype=float)
    p = pts - np.asarray(center, dtype=float)
    e = np.concatenate([p[1:], p[:1]]) - p

    # candidate rays per edge: its angular span seen from the center, padded
    # by one ray each side; edges through the center get every ray
    phi = np.arctan2(p[:, 1], p[:, 0])
    delta = (np.concatenate([phi[1:], phi[:1]]) - phi + np.pi) % (2.0 * np.pi) - np.pi
    lo = phi + np.minimum(delta, 0.0)
    first = np.ceil(lo / step).astype(int) - 1
    count = np.floor((lo + np.abs(delta)) / step).astype(int) + 2 - first
    full = np.abs(delta) > np.pi - 1e-9
    first[full] = 0
    count[full] = K
    count = np.minimum(count, K)
    edge = np.repeat(np.arange(len(p)), count)
    ray = (np.repeat(first, count) + np.arange(count.sum())
           - np.repeat(np.cumsum(count) - count, count)) % K

    # solve s*u = p + w*e for each (ray, edge) candidate by Cramer's rule
    ux, uy = u[ray, 0], u[ray, 1]
    px, py = p[edge, 0], p[edge, 1]
    ex, ey = e[edge, 0], e[edge, 1]
    denom = ux * ey - uy * ex
    with np.errstate(divide="ignore", invalid="ignore"):
        s = (px * ey - py * ex) / denom
        w = (px * uy - py * ux) / denom
    # slack on w so a ray through a shared vertex cannot slip between its two edges
    hit = (denom != 0) & (w >= -_EDGE_SLACK) & (w <= 1 + _EDGE_SLACK) & (s >= 0)
    out = np.zeros(K)
    np.maximum.at(out, ray[hit], s[hit])
    return out


def polar_iou(c1: Contour, c2: Contour, K: int = POLAR_RAYS) -> float:
    """Ray-based IoU about the midpoint of the two centroids."""
    _check(c1)
    _check(c2)
    return polar_from_centroids(c1.points, centroid_area(c1)[0], c2.points, centroid_area(c2)[0], K)


def polar_from_centroids(p1, g1, p2, g2, K: int = POLAR_RAYS) -> float:
    """Polar IoU of two point arrays whose centroids ``g1``, ``g2`` are already known."""
    center = 0.5 * (np.asarray(g1) + np.asarray(g2))
    d1 = ray_distances(p1, center, K)
    d2 = ray_distances(p2, center, K)
    hi = np.maximum(d1, d2).sum()
    if hi <= 0:
        raise DegeneratePair("no ray crosses either contour")
    return float(np.minimum(d1, d2).sum() / hi)


def combined_iou(c1: Contour, c2: Contour, K: int = POLAR_RAYS) -> float:
    """PolarIoU * BoxIoU. The polar term is skipped when the boxes are disjoint."""
    b = box_iou(c1, c2)
    if b == 0.0:
        return 0.0
    return polar_iou(c1, c2, K) * b


@dataclass(frozen=True)
class GridSpec:
    """Raster grid: ``bounds`` = (xmin, ymin, xmax, ymax); None means fit the inputs."""

    resolution: int = GRID_RESOLUTION
    bounds: tuple | None = None

    def __post_init__(self):
        if self.resolution < 16:
            raise ValueError(f"resolution must be >= 16, got {self.resolution}")

    def fitted(self, *contours: Contour) -> "GridSpec":
        if self.bounds is not None:
            return self
        boxes = np.array([c.bbox() for c in contours])
        x0, y0 = boxes[:, 0].min(), boxes[:, 1].min()
        x1, y1 = boxes[:, 2].max(), boxes[:, 3].max()
        mx, my = GRID_MARGIN * (x1 - x0), GRID_MARGIN * (y1 - y0)
        return GridSpec(self.resolution, (x0 - mx, y0 - my, x1 + mx, y1 + my))

    def layout(self):
        """Cell size and (rows, cols)."""
        x0, y0, x1, y1 = self.bounds
        cell = max(x1 - x0, y1 - y0) / self.resolution
        if cell <= 0:
            raise EmptyRegion("grid bounds have zero extent")
        cols = max(1, int(np.ceil((x1 - x0) / cell - 1e-9)))
        rows = max(1, int(np.ceil((y1 - y0) / cell - 1e-9)))
        return cell, rows, cols


def rasterize(c: Contour, g: GridSpec | None = None) -> np.ndarray:
    """Even-odd fill; a cell is inside when its center is inside the polygon.

    Returns a boolean ``(rows, cols)`` array, row 0 at ``ymin``.
    """
    g = (g or GridSpec()).fitted(c)
    cell, rows, cols = g.layout()
    x0, y0 = g.bounds[0], g.bounds[1]
    p = c.points
    q = np.roll(p, -1, axis=0)
    yc = y0 + (np.arange(rows) + 0.5) * cell

    # half-open crossing rule: an edge covers row centers with ylo <= y < yhi
    ylo = np.minimum(p[:, 1], q[:, 1])
    yhi = np.maximum(p[:, 1], q[:, 1])
    r_start = np.clip(np.ceil((ylo - y0) / cell - 0.5), 0, rows).astype(int)
    r_stop = np.clip(np.ceil((yhi - y0) / cell - 0.5), 0, rows).astype(int)
    flat = yhi > ylo
    counts = np.where(flat, r_stop - r_start, 0)
    counts = np.maximum(counts, 0)
    edge = np.repeat(np.arange(len(p)), counts)
    offsets = np.arange(counts.sum()) - np.repeat(np.cumsum(counts) - counts, counts)
    row = r_start[edge] + offsets
    y = yc[row]
    t = (y - p[edge, 1]) / (q[edge, 1] - p[edge, 1])
    x = p[edge, 0] + t * (q[edge, 0] - p[edge, 0])
    # toggle parity from the first cell whose center lies right of the crossing
    first = np.clip(np.floor((x - x0) / cell - 0.5).astype(int) + 1, 0, cols)
    toggles = np.zeros((rows, cols + 1), dtype=np.uint8)
    np.bitwise_xor.at(toggles, (row, first), 1)
    return np.bitwise_xor.accumulate(toggles[:, :cols], axis=1).view(bool)


def dice(c1: Contour, c2: Contour, g: GridSpec | None = None) -> float:
    g = (g or GridSpec()).fitted(c1, c2)
    a = rasterize(c1, g)
    b = rasterize(c2, g)
    na, nb = int(a.sum()), int(b.sum())
    if na == 0 or nb == 0:
        raise EmptyRegion("contour covers no grid cell")
    return 2.0 * int((a & b).sum()) / (na + nb)


def hausdorff(c1: Contour, c2: Contour, M: int = HAUSDORFF_SAMPLES) -> float:
    """Symmetric Hausdorff distance between boundaries resampled to ``M`` points."""
    p1 = resample(c1, M)
    p2 = resample(c2, M)
    d12 = cKDTree(p2).query(p1)[0].max()
    d21 = cKDTree(p1).query(p2)[0].max()
    return float(max(d12, d21))


def conformity(dice_value: float) -> float:
    if dice_value == 0:
        raise UndefinedMetric("conformity is undefined at DICE = 0")
    return (3.0 * dice_value - 2.0) / dice_value
