"""Fourier contour codec, Fourier anchors, proposal refinement geometry and metrics."""

from .anchors import (AnchorSet, AssignConfig, AssignmentResult, TargetDelta, assign,
                      decode_targets, encode_targets, fit_anchors, tile_anchors)
from .csr import (MergedContour, RefineConfig, ScoredProposal, cluster_proposals, merge_cluster,
                  refine_apply, refine_encode, sample_boxes, sample_points, select_top_n)
from .efd import (Contour, FourierDescriptor, HarmonicExtents, align_phase, canonicalize,
                  centroid_area, efd_decode, efd_encode, encode_canonical, harmonic_extents,
                  resample)
from .evaluation import MetricsTable, evaluate
from .losses import LossConfig, LossReport, cls_loss, contour_loss, smooth_l1, total_loss
from .masks import LabelMask, extract_contours
from .metrics import (GridSpec, box_iou, combined_iou, conformity, dice, hausdorff, polar_iou,
                      rasterize)
from .synth import NoiseConfig, SynthConfig, simulate_proposals, synth_dataset

__version__ = "0.1.0"
