"""Proposal merging and refinement geometry: top-n selection, clustering, merging, sample boxes."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .anchors import TargetDelta, decode_targets, encode_targets
from .efd import FourierDescriptor, efd_decode, evaluate_series
from .errors import ContourError, EmptyProposals, ShapeMismatch
from .metrics import combined_iou


@dataclass(eq=False)
class ScoredProposal:
    descriptor: FourierDescriptor
    score: float
    class_id: int = 0

    def __post_init__(self):
        self.score = float(self.score)
        if not (math.isfinite(self.score) and 0.0 <= self.score <= 1.0):
            raise ContourError(f"proposal score must lie in [0, 1], got {self.score}")
        self.class_id = int(self.class_id)


@dataclass(frozen=True)
class RefineConfig:
    top_n: int = 20
    cluster_iou: float = 0.7
    sample_k: int = 16
    box_scale: float = 0.2  # box side as a fraction of the merged contour's larger bbox side
    decode_T: int = 128

    def __post_init__(self):
        if self.top_n < 1:
            raise ContourError("top_n must be >= 1")
        if not 0.0 < self.cluster_iou < 1.0:
            raise ContourError("cluster_iou must lie in (0, 1)")
        if self.sample_k < 3:
            raise ContourError("sample_k must be >= 3")


@dataclass(eq=False)
class MergedContour:
    descriptor: FourierDescriptor
    member_count: int
    mean_member_iou: float


def select_top_n(proposals, cfg: RefineConfig = RefineConfig()):
    """``{class_id: [top_n proposals by descending score]}``; ties keep input order."""
    by_class = {}
    for p in proposals:
        by_class.setdefault(p.class_id, []).append(p)
    # sorted() is stable, so equal scores stay in input order
    return {cls: sorted(items, key=lambda p: -p.score)[:cfg.top_n]
            for cls, items in sorted(by_class.items())}


def _safe_iou(c1, c2) -> float:
    try:
        return combined_iou(c1, c2)
    except ContourError:
        return 0.0


def pairwise_iou(proposals, decode_T: int) -> np.ndarray:
    contours = [efd_decode(p.descriptor, decode_T) for p in proposals]
    n = len(contours)
    iou = np.eye(n)
    for i in range(n):
        for j in range(i + 1, n):
            iou[i, j] = iou[j, i] = _safe_iou(contours[i], contours[j])
    return iou


def cluster_proposals(proposals, cfg: RefineConfig = RefineConfig()):
    """The closely clustered subset: a pivot plus every proposal overlapping it by >= cluster_iou.

    The pivot has the most such neighbours (ties: higher score, then earlier
    index). Without any qualifying pair the best-scoring proposal stands alone.
    Output keeps input order.
    """
    proposals = list(proposals)
    if not proposals:
        raise EmptyProposals("nothing to cluster")
    iou = pairwise_iou(proposals, cfg.decode_T)
    close = iou >= cfg.cluster_iou
    np.fill_diagonal(close, False)
    counts = close.sum(axis=1)
    scores = np.array([p.score for p in proposals])
    if counts.max() == 0:
        best = int(np.lexsort((np.arange(len(proposals)), -scores))[0])
        return [proposals[best]]
    pivot = int(np.lexsort((np.arange(len(proposals)), -scores, -counts))[0])
    members = close[pivot].copy()
    members[pivot] = True
    return [p for p, keep in zip(proposals, members) if keep]


def merge_cluster(c_c, decode_T: int = 128) -> MergedContour:
    """Unweighted mean of centers and coefficients.

    Sums use ``math.fsum`` so the result does not depend on member order.
    """
    c_c = list(c_c)
    if not c_c:
        raise EmptyProposals("nothing to merge")
    descs = [p.descriptor if isinstance(p, ScoredProposal) else p for p in c_c]
    n = {d.n_harmonics for d in descs}
    if len(n) != 1:
        raise ShapeMismatch(f"members mix harmonic counts {sorted(n)}")
    centers = np.stack([d.center for d in descs])
    coeffs = np.stack([d.coeffs for d in descs])
    count = len(descs)
    center = np.array([math.fsum(col) / count for col in centers.T])
    mean = np.array([math.fsum(v) / count for v in coeffs.reshape(count, -1).T])
    merged = FourierDescriptor(center, mean.reshape(coeffs.shape[1:]), descs[0].period_samples)

    m_contour = efd_decode(merged, decode_T)
    ious = [_safe_iou(m_contour, efd_decode(d, decode_T)) for d in descs]
    return MergedContour(merged, count, math.fsum(ious) / count)


def sample_points(m: MergedContour, cfg: RefineConfig = RefineConfig()) -> np.ndarray:
    """``sample_k`` points at t = 0..k-1 of a k-periodic series, then the center."""
    k = cfg.sample_k
    boundary = evaluate_series(m.descriptor, np.arange(k), k)
    return np.vstack([boundary, m.descriptor.center])


def sample_boxes(points, m: MergedContour, cfg: RefineConfig = RefineConfig(),
                 image_size=None) -> np.ndarray:
    """Square ``(x0, y0, x1, y1)`` boxes centered on each point, clipped to the image if given."""
    x0, y0, x1, y1 = efd_decode(m.descriptor, cfg.decode_T).bbox()
    half = 0.5 * cfg.box_scale * max(x1 - x0, y1 - y0)
    pts = np.asarray(points, dtype=float)
    boxes = np.column_stack([pts[:, 0] - half, pts[:, 1] - half,
                             pts[:, 0] + half, pts[:, 1] + half])
    if image_size is not None:
        w, h = image_size
        boxes[:, [0, 2]] = np.clip(boxes[:, [0, 2]], 0, w)
        boxes[:, [1, 3]] = np.clip(boxes[:, [1, 3]], 0, h)
    return boxes


def refine_encode(g: FourierDescriptor, m: MergedContour) -> TargetDelta:
    return encode_targets(g, m.descriptor)


def refine_apply(m: MergedContour, d: TargetDelta) -> FourierDescriptor:
    """One refinement step: the merged contour plays the anchor for ``d``."""
    return decode_targets(d, m.descriptor)


@dataclass(eq=False)
class RefineResult:
    class_id: int
    merged: MergedContour
    cluster: list
    points: np.ndarray
    boxes: np.ndarray


def refine_proposals(proposals, cfg: RefineConfig = RefineConfig(), image_size=None):
    """Per class: top-n, cluster, merge, sample points and boxes."""
    results = []
    for cls, top in select_top_n(proposals, cfg).items():
        c_c = cluster_proposals(top, cfg)
        merged = merge_cluster(c_c, cfg.decode_T)
        pts = sample_points(merged, cfg)
        results.append(RefineResult(cls, merged, c_c, pts,
                                    sample_boxes(pts, merged, cfg, image_size)))
    return results
