"""Reference forward arithmetic of the detection losses (no gradients)."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .metrics import combined_iou

SCORE_EPS = 1e-7
IGNORE_LABEL = -1


@dataclass(frozen=True)
class LossConfig:
    alpha: float = 0.25  # BCE weight
    beta: float = 0.75  # focal weight
    focal_gamma: float = 2.0
    focal_alpha: float = 0.25
    smooth_l1_beta: float = 1.0

    def __post_init__(self):
        for name in ("alpha", "beta", "focal_gamma", "focal_alpha", "smooth_l1_beta"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")


@dataclass(frozen=True)
class LossReport:
    l_loc: float
    l_fou: float
    l_con: float
    l_cls: float
    total: float
    no_positives: bool = False


def smooth_l1(pred, target, cfg: LossConfig = LossConfig()) -> float:
    e = np.abs(np.asarray(pred, dtype=float) - np.asarray(target, dtype=float)).reshape(-1)
    if e.size == 0:
        return 0.0
    beta = cfg.smooth_l1_beta
    if beta == 0:
        return float(e.mean())
    loss = np.where(e < beta, 0.5 * e * e / beta, e - 0.5 * beta)
    return float(loss.mean())


def contour_loss(pred, gt) -> float:
    return 1.0 - combined_iou(pred, gt)


def _bce_focal(scores, labels, cfg: LossConfig):
    p = np.clip(np.asarray(scores, dtype=float), SCORE_EPS, 1.0 - SCORE_EPS)
    y = np.asarray(labels, dtype=float)
    p_t = np.where(y > 0.5, p, 1.0 - p)
    alpha_t = np.where(y > 0.5, cfg.focal_alpha, 1.0 - cfg.focal_alpha)
    bce = -np.log(p_t)
    focal = alpha_t * (1.0 - p_t) ** cfg.focal_gamma * bce
    return bce, focal


def cls_loss(scores, labels, cfg: LossConfig = LossConfig()) -> float:
    """alpha * mean BCE + beta * mean focal loss, scores clamped to [1e-7, 1 - 1e-7]."""
    bce, focal = _bce_focal(scores, labels, cfg)
    if bce.size == 0:
        return 0.0
    return float(cfg.alpha * bce.mean() + cfg.beta * focal.mean())


def total_loss(loc_terms, fou_terms, con_pairs, cls_inputs,
               cfg: LossConfig = LossConfig()) -> LossReport:
    """Sum of location, Fourier, contour and classification terms.

    ``loc_terms`` and ``fou_terms`` are ``(pred, target)`` arrays with one row
    per positive sample; ``con_pairs`` is a sequence of ``(pred, gt)``
    contours for the positives; ``cls_inputs`` is ``(scores, labels)`` over
    every sample, label ``-1`` marking ignored samples.
    """
    loc_pred, loc_target = (np.asarray(v, dtype=float) for v in loc_terms)
    fou_pred, fou_target = (np.asarray(v, dtype=float) for v in fou_terms)
    scores, labels = (np.asarray(v, dtype=float).reshape(-1) for v in cls_inputs)

    no_positives = len(loc_pred) == 0
    if no_positives:
        warnings.warn("no positive samples: location, Fourier and contour terms set to 0",
                      RuntimeWarning, stacklevel=2)
        l_loc = l_fou = l_con = 0.0
    else:
        l_loc = smooth_l1(loc_pred, loc_target, cfg)
        l_fou = smooth_l1(fou_pred, fou_target, cfg)
        l_con = float(np.mean([contour_loss(p, g) for p, g in con_pairs])) if len(con_pairs) else 0.0

    keep = labels != IGNORE_LABEL
    l_cls = cls_loss(scores[keep], labels[keep], cfg)
    return LossReport(l_loc, l_fou, l_con, l_cls, l_loc + l_fou + l_con + l_cls, no_positives)
