"""Synthetic band-limited shapes and noisy proposal sets."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .csr import ScoredProposal
from .efd import Contour, FourierDescriptor, centroid_area, efd_decode
from .errors import ContourError, GenerationFailure
from .metrics import combined_iou

SYNTH_T = 360
MAX_REJECTIONS = 1000


@dataclass(frozen=True)
class SynthConfig:
    count: int
    n_harmonics: int = 7
    base_radius: float = 40.0
    decay_power: float = 2.0  # harmonic i is drawn within +-base_radius / i**decay_power
    image_size: tuple = (416, 416)
    seed: int = 0
    class_id: int = 1

    def __post_init__(self):
        if self.count < 1:
            raise ContourError("count must be >= 1")
        if not 1 <= self.n_harmonics <= 7:
            raise ContourError("n_harmonics must lie in [1, 7]")
        if self.base_radius <= 0:
            raise ContourError("base_radius must be > 0")


@dataclass(frozen=True)
class NoiseConfig:
    coeff_sigma: float = 0.1  # fraction of the first-harmonic amplitude
    center_sigma: float = 0.0  # pixels
    proposals_per_gt: int = 20
    seed: int = 0

    def __post_init__(self):
        if self.coeff_sigma < 0 or self.center_sigma < 0:
            raise ContourError("noise sigmas must be >= 0")
        if self.proposals_per_gt < 1:
            raise ContourError("proposals_per_gt must be >= 1")


def _orient(a, b, c):
    return (b[..., 0] - a[..., 0]) * (c[..., 1] - a[..., 1]) - \
        (b[..., 1] - a[..., 1]) * (c[..., 0] - a[..., 0])


def is_simple(points) -> bool:
    """True when no two non-adjacent edges of the closed polygon cross or touch."""
    p = np.asarray(points, dtype=float)
    n = len(p)
    q = np.roll(p, -1, axis=0)
    lo, hi = np.minimum(p, q), np.maximum(p, q)
    # sweep over x: pair each edge with the later-starting edges its x-range reaches
    order = np.argsort(lo[:, 0], kind="stable")
    xs = lo[order, 0]
    stop = np.searchsorted(xs, hi[order, 0], side="right")
    counts = np.maximum(stop - np.arange(n) - 1, 0)
    first = np.repeat(np.arange(n), counts)
    second = first + 1 + np.arange(counts.sum()) - np.repeat(np.cumsum(counts) - counts, counts)
    i, j = order[first], order[second]
    gap = np.abs(i - j)
    keep = (gap != 1) & (gap != n - 1) & (lo[i, 1] <= hi[j, 1]) & (lo[j, 1] <= hi[i, 1])
    i, j = i[keep], j[keep]
    o1 = _orient(p[i], q[i], p[j])
    o2 = _orient(p[i], q[i], q[j])
    o3 = _orient(p[j], q[j], p[i])
    o4 = _orient(p[j], q[j], q[i])
    return not bool(((o1 * o2 <= 0) & (o3 * o4 <= 0)).any())


def _draw_coeffs(rng, cfg: SynthConfig) -> np.ndarray:
    levels = np.arange(1, cfg.n_harmonics + 1, dtype=float)
    with np.errstate(over="ignore"):
        bounds = cfg.base_radius / levels ** cfg.decay_power
    coeffs = rng.uniform(-1.0, 1.0, (cfg.n_harmonics, 4)) * bounds[:, None]
    floor = 0.5 * cfg.base_radius
    # first harmonic: redraw until both ellipse amplitudes reach half the base radius
    while np.hypot(*coeffs[0, :2]) < floor or np.hypot(*coeffs[0, 2:]) < floor:
        coeffs[0] = rng.uniform(-cfg.base_radius, cfg.base_radius, 4)
    return coeffs


def synth_dataset(cfg: SynthConfig):
    """``cfg.count`` simple, in-bounds, counter-clockwise (contour, descriptor) pairs.

    Each contour is the descriptor decoded at 360 samples, so re-encoding it
    with the same harmonic count recovers the descriptor exactly.
    """
    rng = np.random.default_rng(cfg.seed)
    w, h = cfg.image_size
    out = []
    for item in range(cfg.count):
        for _ in range(MAX_REJECTIONS + 1):
            coeffs = _draw_coeffs(rng, cfg)
            shape = efd_decode(FourierDescriptor(np.zeros(2), coeffs), SYNTH_T)
            lo = shape.points.min(axis=0)
            hi = shape.points.max(axis=0)
            if hi[0] - lo[0] > w or hi[1] - lo[1] > h:
                continue
            area = centroid_area(shape)[1]
            if abs(area) < 1e-6 or not is_simple(shape.points):
                continue
            if area < 0:
                # reverse traversal: t -> -t flips the sine terms
                coeffs[:, [0, 2]] *= -1
            center = np.array([rng.uniform(-lo[0], w - hi[0]), rng.uniform(-lo[1], h - hi[1])])
            desc = FourierDescriptor(center, coeffs, SYNTH_T)
            contour = efd_decode(desc, SYNTH_T, cfg.class_id)
            if contour.points.min() < 0 or np.any(contour.points.max(axis=0) > [w, h]):
                continue
            out.append((contour, desc))
            break
        else:
            raise GenerationFailure(f"item {item}: more than {MAX_REJECTIONS} rejections")
    return out


def simulate_proposals(gt: FourierDescriptor, cfg: NoiseConfig, class_id: int = 0,
                       decode_T: int = 128):
    """Gaussian-perturbed copies of ``gt`` scored by combined IoU against it."""
    rng = np.random.default_rng(cfg.seed)
    sigma = cfg.coeff_sigma * gt.first_amplitude()
    gt_contour = efd_decode(gt, decode_T)
    proposals = []
    for _ in range(cfg.proposals_per_gt):
        coeffs = gt.coeffs + rng.normal(0.0, sigma, gt.coeffs.shape)
        center = gt.center + rng.normal(0.0, cfg.center_sigma, 2)
        desc = FourierDescriptor(center, coeffs, gt.period_samples)
        try:
            score = combined_iou(efd_decode(desc, decode_T), gt_contour)
        except ContourError:
            score = 0.0
        proposals.append(ScoredProposal(desc, score, class_id))
    return proposals
