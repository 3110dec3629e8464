"""Dataset-level metric tables."""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

from .efd import Contour
from .errors import ContourError, PairingError
from .metrics import GridSpec, combined_iou, conformity, dice, hausdorff

METRICS = ("DICE", "IoU", "HD", "Conf")


@dataclass
class MetricsTable:
    """``stats[name] = (mean, population std)``; DICE, IoU and Conf in percent, HD in pixels."""

    stats: dict
    n_items: int
    excluded: list = field(default_factory=list)  # indices of flagged pairs

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["metric", "mean", "std"])
        for name in METRICS:
            mean, std = self.stats[name]
            writer.writerow([name, repr(mean), repr(std)])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "MetricsTable":
        rows = list(csv.reader(io.StringIO(text)))
        if not rows or rows[0] != ["metric", "mean", "std"]:
            raise ValueError("missing metric,mean,std header")
        stats = {name: (float(mean), float(std)) for name, mean, std in rows[1:]}
        return cls(stats, n_items=-1)


def _mean_std(values):
    n = len(values)
    if n == 0:
        return math.nan, math.nan
    mean = math.fsum(values) / n
    return mean, math.sqrt(math.fsum((v - mean) ** 2 for v in values) / n)


def pair_metrics(pred: Contour, gt: Contour, grid: GridSpec = GridSpec()):
    """(DICE, combined IoU, HD, Conf) as fractions/pixels, or None for a degenerate pair."""
    try:
        d = dice(pred, gt, grid)
        return d, combined_iou(pred, gt), hausdorff(pred, gt), conformity(d)
    except ContourError:
        return None


def _pair_job(args):
    pred_pts, gt_pts, grid = args
    try:
        pred, gt = Contour(pred_pts), Contour(gt_pts)
    except ContourError:
        return None
    return pair_metrics(pred, gt, grid)


def evaluate(preds, gts, workers: int = 1, grid: GridSpec = GridSpec()) -> MetricsTable:
    """Mean and population std of per-pair DICE, IoU, HD and Conformity.

    Pairs are matched by index. Degenerate pairs (zero-area contours, empty
    rasters, DICE = 0) are excluded and listed in ``excluded``.
    """
    preds, gts = list(preds), list(gts)
    if len(preds) != len(gts):
        raise PairingError(f"{len(preds)} predictions vs {len(gts)} ground truths")
    jobs = [(p.points, g.points, grid) for p, g in zip(preds, gts)]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(workers) as pool:
            results = list(pool.map(_pair_job, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    else:
        results = [_pair_job(j) for j in jobs]

    kept = [r for r in results if r is not None]
    excluded = [i for i, r in enumerate(results) if r is None]
    scale = (100.0, 100.0, 1.0, 100.0)
    stats = {}
    for k, name in enumerate(METRICS):
        mean, std = _mean_std([r[k] * scale[k] for r in kept])
        stats[name] = (mean, std)
    return MetricsTable(stats, len(kept), excluded)
