"""Label masks and boundary extraction."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from PIL import Image
from scipy import ndimage
from skimage import measure

from .efd import Contour, canonicalize, centroid_area
from .errors import ContourError, InputFormatError

MIN_COMPONENT_AREA = 4.0


@dataclass(eq=False)
class LabelMask:
    """``values[row, col]`` holds a class id; 0 is background."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values)
        if v.ndim != 2:
            raise ContourError(f"mask must be 2-D, got shape {v.shape}")
        if not np.issubdtype(v.dtype, np.integer):
            if not np.all(v == np.round(v)):
                raise ContourError("mask values must be integer class ids")
            v = v.astype(np.int64)
        if v.size and v.min() < 0:
            raise ContourError("mask values must be non-negative")
        self.values = v

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def height(self) -> int:
        return self.values.shape[0]

    def classes(self):
        return sorted(int(v) for v in np.unique(self.values))


def extract_contours(mask: LabelMask, class_id: int):
    """Outer boundaries of each connected region of ``class_id``, largest first.

    Boundaries follow the 0.5 iso-line of the class indicator (marching
    squares), so a filled pixel block ``[r0:r1, c0:c1]`` traces roughly
    ``x in [c0 - 0.5, c1 - 0.5]``. Holes are ignored.
    """
    indicator = mask.values == class_id
    if not indicator.any():
        return []
    labels, count = ndimage.label(indicator)
    found = []
    for comp in range(1, count + 1):
        # pad so boundaries touching the image edge still close
        comp_mask = np.pad((labels == comp).astype(float), 1)
        best = None
        for rc in measure.find_contours(comp_mask, 0.5):
            if len(rc) < 4:
                continue
            # (row, col) -> (x, y), undo padding, drop repeated closing vertex
            pts = rc[:, ::-1] - 1.0
            if np.allclose(pts[0], pts[-1]):
                pts = pts[:-1]
            area = abs(centroid_area(Contour(pts))[1])
            if best is None or area > best[0]:
                best = (area, pts)
        if best is None or best[0] < MIN_COMPONENT_AREA:
            continue
        found.append((best[0], canonicalize(Contour(best[1], class_id))))
    found.sort(key=lambda item: -item[0])
    return [c for _, c in found]


def read_pgm(path) -> LabelMask:
    try:
        with Image.open(path) as img:
            if img.format != "PPM" or img.mode not in ("L", "I", "I;16", "I;16B"):
                raise InputFormatError(f"expected a grayscale binary PGM, got {img.format}/{img.mode}",
                                       path)
            return LabelMask(np.array(img).astype(np.int64))
    except InputFormatError:
        raise
    except (OSError, SyntaxError, ValueError) as exc:
        raise InputFormatError(f"unreadable PGM: {exc}", path) from exc


def write_pgm(mask: LabelMask, path):
    if mask.values.max(initial=0) > 255:
        raise ContourError("class ids above 255 do not fit an 8-bit PGM")
    Image.fromarray(mask.values.astype(np.uint8), mode="L").save(path, format="PPM")
