"""Fourier anchors: clustering, grid placement, target coding and assignment."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .efd import (DEFAULT_T, FourierDescriptor, canonicalize, centroid_area, efd_decode,
                  efd_encode, harmonic_extents)
from .errors import ContourError, DegenerateClustering, EmptyGroundTruth, ShapeMismatch
from .metrics import polar_from_centroids

NEGATIVE = -1
IGNORE = -2
ASSIGN_DECODE_T = 64


@dataclass(eq=False)
class TargetDelta:
    fourier: np.ndarray  # (N, 4): dFa, dFb, dFc, dFd per harmonic
    loc: np.ndarray  # (2,): dLx, dLy

    def __post_init__(self):
        self.fourier = np.asarray(self.fourier, dtype=float).reshape(-1, 4)
        self.loc = np.asarray(self.loc, dtype=float).reshape(2)

    @classmethod
    def zeros(cls, n_harmonics: int) -> "TargetDelta":
        return cls(np.zeros((n_harmonics, 4)), np.zeros(2))

    def vector(self) -> np.ndarray:
        """Flattened ``[dLx, dLy, dFa1, dFb1, dFc1, dFd1, ...]``."""
        return np.concatenate([self.loc, self.fourier.reshape(-1)])

    def to_dict(self):
        return {"loc": self.loc.tolist(), "fourier": self.fourier.tolist()}


@dataclass(eq=False)
class AnchorSet:
    base_anchors: list
    stride: int = 8
    image_size: tuple = (416, 416)

    def __post_init__(self):
        if len(self.base_anchors) < 1:
            raise ContourError("anchor set needs at least one base anchor")
        if self.stride < 1:
            raise ContourError(f"stride must be >= 1, got {self.stride}")
        n = {a.n_harmonics for a in self.base_anchors}
        if len(n) != 1:
            raise ShapeMismatch(f"base anchors mix harmonic counts {sorted(n)}")
        self.image_size = tuple(int(v) for v in self.image_size)

    @property
    def k(self) -> int:
        return len(self.base_anchors)

    @property
    def n_harmonics(self) -> int:
        return self.base_anchors[0].n_harmonics

    def grid_shape(self):
        """(columns, rows) of the placement grid."""
        w, h = self.image_size
        return math.ceil(w / self.stride), math.ceil(h / self.stride)


@dataclass(eq=False)
class KMeansResult:
    centroids: np.ndarray
    labels: np.ndarray
    inertia_history: list = field(default_factory=list)
    iterations: int = 0


def _sq_dist(x: np.ndarray, centers: np.ndarray) -> np.ndarray:
    return ((x[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)


def kmeans(x: np.ndarray, k: int, seed: int = 0, max_iter: int = 100,
           tol: float = 1e-6) -> KMeansResult:
    """k-means++ seeding followed by Lloyd iterations.

    Stops when no centroid moves by more than ``tol`` or after ``max_iter``
    iterations. An emptied cluster keeps its previous centroid.
    """
    x = np.asarray(x, dtype=float)
    if len(np.unique(x, axis=0)) < k:
        raise DegenerateClustering(f"fewer than k={k} distinct vectors")
    rng = np.random.default_rng(seed)

    centers = [x[rng.integers(len(x))]]
    d2 = _sq_dist(x, np.array(centers)).min(axis=1)
    for _ in range(1, k):
        centers.append(x[rng.choice(len(x), p=d2 / d2.sum())])
        d2 = np.minimum(d2, ((x - centers[-1]) ** 2).sum(axis=1))
    centers = np.array(centers)

    history = []
    labels = np.zeros(len(x), dtype=int)
    it = 0
    for it in range(1, max_iter + 1):
        dist = _sq_dist(x, centers)
        labels = dist.argmin(axis=1)
        history.append(float(dist[np.arange(len(x)), labels].sum()))
        new = centers.copy()
        for j in range(k):
            members = x[labels == j]
            if len(members):
                new[j] = members.mean(axis=0)
        shift = float(np.sqrt(((new - centers) ** 2).sum(axis=1)).max())
        centers = new
        if shift < tol:
            break
    dist = _sq_dist(x, centers)
    labels = dist.argmin(axis=1)
    history.append(float(dist[np.arange(len(x)), labels].sum()))
    return KMeansResult(centers, labels, history, it)


def fit_anchors(descriptors, k: int = 9, seed: int = 0, stride: int = 8,
                image_size=(416, 416)) -> AnchorSet:
    """Cluster the raw 4N coefficient vectors (centers excluded) into ``k`` anchors.

    Anchors are ordered by descending cluster size, ties by ascending first
    coefficient, then by the following coefficients.
    """
    descriptors = list(descriptors)
    if len(descriptors) < k:
        raise DegenerateClustering(f"need >= {k} descriptors, got {len(descriptors)}")
    n = {d.n_harmonics for d in descriptors}
    if len(n) != 1:
        raise ShapeMismatch(f"descriptors mix harmonic counts {sorted(n)}")
    (n_harmonics,) = n
    x = np.stack([d.flat() for d in descriptors])
    result = kmeans(x, k, seed)
    counts = np.bincount(result.labels, minlength=k)
    # remaining coefficients break exact ties so the order never depends on seeding
    keys = tuple(result.centroids[:, i] for i in range(x.shape[1] - 1, -1, -1))
    order = np.lexsort(keys + (-counts,))
    anchors = [FourierDescriptor(np.zeros(2), result.centroids[j].reshape(n_harmonics, 4))
               for j in order]
    return AnchorSet(anchors, stride, image_size)


def tile_anchors(a: AnchorSet):
    """Copies of every base anchor centered on each grid cell.

    Row-major over cells (y outer, x inner), base anchors innermost.
    """
    cols, rows = a.grid_shape()
    placed = []
    for j in range(rows):
        for i in range(cols):
            center = ((i + 0.5) * a.stride, (j + 0.5) * a.stride)
            for base in a.base_anchors:
                placed.append(base.with_center(center))
    return placed


def _check_pair(g: FourierDescriptor, a: FourierDescriptor):
    if g.n_harmonics != a.n_harmonics:
        raise ShapeMismatch(f"harmonic counts differ: {g.n_harmonics} vs {a.n_harmonics}")


def encode_targets(g: FourierDescriptor, a: FourierDescriptor) -> TargetDelta:
    """Offsets of ``g`` from anchor ``a``, scaled by the anchor's harmonic extents."""
    _check_pair(g, a)
    ext = harmonic_extents(a)
    diff = g.coeffs - a.coeffs
    fourier = np.column_stack([diff[:, 0] / ext.ex, diff[:, 1] / ext.ex,
                               diff[:, 2] / ext.ey, diff[:, 3] / ext.ey])
    loc = (g.center - a.center) / np.array([ext.ex[0], ext.ey[0]])
    return TargetDelta(fourier, loc)


def decode_targets(d: TargetDelta, a: FourierDescriptor) -> FourierDescriptor:
    if d.fourier.shape[0] != a.n_harmonics:
        raise ShapeMismatch(f"harmonic counts differ: {d.fourier.shape[0]} vs {a.n_harmonics}")
    ext = harmonic_extents(a)
    scale = np.column_stack([ext.ex, ext.ex, ext.ey, ext.ey])
    coeffs = a.coeffs + d.fourier * scale
    center = a.center + d.loc * np.array([ext.ex[0], ext.ey[0]])
    return FourierDescriptor(center, coeffs, a.period_samples)


@dataclass(frozen=True)
class AssignConfig:
    pos_threshold: float = 0.25
    neg_threshold: float = 0.10
    force_match: bool = True

    def __post_init__(self):
        if not 0 <= self.neg_threshold < self.pos_threshold <= 1:
            raise ContourError("need 0 <= neg_threshold < pos_threshold <= 1")


@dataclass(eq=False)
class AssignmentResult:
    """Per placed anchor: ``labels[i]`` is a GT index (positive), NEGATIVE or IGNORE."""

    labels: np.ndarray
    max_iou: np.ndarray  # best IoU over all GTs
    matched_iou: np.ndarray  # IoU with the assigned GT; equals max_iou except after force-matching
    targets: dict  # anchor index -> TargetDelta, positives only

    @property
    def positives(self) -> np.ndarray:
        return np.flatnonzero(self.labels >= 0)

    @property
    def negatives(self) -> np.ndarray:
        return np.flatnonzero(self.labels == NEGATIVE)

    @property
    def ignored(self) -> np.ndarray:
        return np.flatnonzero(self.labels == IGNORE)

    def to_dict(self):
        return {
            "n_anchors": int(len(self.labels)),
            "n_positive": int(len(self.positives)),
            "n_negative": int(len(self.negatives)),
            "n_ignore": int(len(self.ignored)),
            "positives": [
                {"anchor": int(i), "gt": int(self.labels[i]), "iou": float(self.matched_iou[i]),
                 "target": self.targets[int(i)].to_dict()}
                for i in self.positives
            ],
            "labels": [int(v) for v in self.labels],
        }


def _bboxes(contours) -> np.ndarray:
    return np.array([c.bbox() for c in contours])


def _box_iou_matrix(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    iw = np.clip(np.minimum(a[:, None, 2], b[None, :, 2]) - np.maximum(a[:, None, 0], b[None, :, 0]),
                 0, None)
    ih = np.clip(np.minimum(a[:, None, 3], b[None, :, 3]) - np.maximum(a[:, None, 1], b[None, :, 1]),
                 0, None)
    inter = iw * ih
    area_a = (a[:, 2] - a[:, 0]) * (a[:, 3] - a[:, 1])
    area_b = (b[:, 2] - b[:, 0]) * (b[:, 3] - b[:, 1])
    union = area_a[:, None] + area_b[None, :] - inter
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(union > 0, inter / union, 0.0)


def _polar_chunk(pairs):
    out = []
    for pa, ga, pg, gg in pairs:
        try:
            out.append(polar_from_centroids(pa, ga, pg, gg))
        except ContourError:
            out.append(0.0)
    return out


def iou_matrix(contours, gts, workers: int = 1) -> np.ndarray:
    """Combined IoU for every (contour, gt) pair; degenerate contours score 0."""
    box = _box_iou_matrix(_bboxes(contours), _bboxes(gts))
    degenerate = np.array([c.is_degenerate for c in contours])
    box[degenerate] = 0.0
    box[:, [g.is_degenerate for g in gts]] = 0.0
    rows, cols = np.nonzero(box > 0)
    # centroids once per contour rather than once per pair
    c_cent = {r: centroid_area(contours[r])[0] for r in np.unique(rows)}
    g_cent = {c: centroid_area(gts[c])[0] for c in np.unique(cols)}
    pairs = [(contours[r].points, c_cent[r], gts[c].points, g_cent[c]) for r, c in zip(rows, cols)]
    if workers > 1 and len(pairs) > 1:
        size = math.ceil(len(pairs) / (4 * workers))
        chunks = [pairs[i:i + size] for i in range(0, len(pairs), size)]
        with ProcessPoolExecutor(workers) as pool:
            polar = [v for part in pool.map(_polar_chunk, chunks) for v in part]
    else:
        polar = _polar_chunk(pairs)
    out = np.zeros_like(box)
    out[rows, cols] = box[rows, cols] * np.asarray(polar, dtype=float)
    return out


def assign(placed, gts, cfg: AssignConfig = AssignConfig(), gt_descriptors=None,
           workers: int = 1, decode_T: int = ASSIGN_DECODE_T) -> AssignmentResult:
    """Label placed anchors against GT contours by combined IoU.

    GT descriptors are encoded from the canonicalized contours when not
    supplied. With ``force_match`` every GT left without a positive claims
    its best-overlapping anchor not already positive.
    """
    gts = list(gts)
    if not gts:
        raise EmptyGroundTruth("assignment needs at least one ground-truth contour")
    placed = list(placed)
    if gt_descriptors is None:
        n = placed[0].n_harmonics
        gt_descriptors = [efd_encode(canonicalize(g), n, DEFAULT_T) for g in gts]

    contours = [efd_decode(a, decode_T) for a in placed]
    iou = iou_matrix(contours, gts, workers)
    best_gt = iou.argmax(axis=1)
    best = iou[np.arange(len(placed)), best_gt]

    labels = np.full(len(placed), IGNORE, dtype=int)
    labels[best < cfg.neg_threshold] = NEGATIVE
    pos = best >= cfg.pos_threshold
    labels[pos] = best_gt[pos]

    if cfg.force_match:
        for g in range(len(gts)):
            if np.any(labels == g):
                continue
            free = labels < 0
            col = np.where(free, iou[:, g], -np.inf) if free.any() else iou[:, g]
            labels[int(np.argmax(col))] = g

    matched = best.copy()
    positive = np.flatnonzero(labels >= 0)
    matched[positive] = iou[positive, labels[positive]]
    targets = {int(i): encode_targets(gt_descriptors[labels[i]], placed[i]) for i in positive}
    return AssignmentResult(labels, best, matched, targets)
