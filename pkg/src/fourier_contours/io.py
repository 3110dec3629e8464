"""JSON / JSON Lines readers and writers for contours, descriptors, anchors and proposals.

Contour records:    {"id": str, "class": int, "points": [[x, y], ...]}
Descriptor records: {"center": [x, y], "n": int, "coeffs": [[a, b, c, d], ...]}
                    plus optional "id", "class" and "t" (encoding period).
Anchor file:        {"k": int, "stride": int, "image_size": [W, H], "anchors": [descriptor, ...]}
Proposal records:   {"class": int, "score": float, "descriptor": descriptor}
"""

from __future__ import annotations

import json
import math
import sys
from contextlib import contextmanager

import numpy as np

from .anchors import AnchorSet
from .csr import ScoredProposal
from .efd import Contour, FourierDescriptor
from .errors import ContourError, InputFormatError


def dumps(obj) -> str:
    return json.dumps(obj, separators=(",", ":"), allow_nan=False)


@contextmanager
def _open_in(path):
    if path in (None, "-"):
        yield sys.stdin
    else:
        with open(path, encoding="utf-8") as fh:
            yield fh


@contextmanager
def _open_out(path):
    if path in (None, "-"):
        yield sys.stdout
        sys.stdout.flush()
    else:
        with open(path, "w", encoding="utf-8") as fh:
            yield fh


def _label(path):
    return "<stdin>" if path in (None, "-") else str(path)


def read_records(path):
    """Yield ``(lineno, obj)`` from a JSON Lines file, or from a single JSON object/array."""
    with _open_in(path) as fh:
        text = fh.read()
    stripped = text.lstrip()
    if stripped.startswith("["):
        try:
            items = json.loads(text)
        except json.JSONDecodeError as exc:
            raise InputFormatError(f"invalid JSON: {exc.msg}", _label(path), exc.lineno) from exc
        return [(i + 1, obj) for i, obj in enumerate(items)]
    records = []
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        try:
            records.append((lineno, json.loads(line)))
        except json.JSONDecodeError as exc:
            if not records and lineno == 1:
                # a pretty-printed single object spans several lines
                try:
                    return [(1, json.loads(text))]
                except json.JSONDecodeError:
                    pass
            raise InputFormatError(f"invalid JSON: {exc.msg}", _label(path), lineno) from exc
    return records


def _finite_array(value, shape_tail, what):
    arr = np.asarray(value, dtype=float)
    if arr.ndim != len(shape_tail) + 1 or arr.shape[1:] != shape_tail:
        raise ValueError(f"{what} must be a list of {list(shape_tail)}-shaped entries")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{what} contains non-finite values")
    return arr


def contour_from_dict(obj, default_id=""):
    if not isinstance(obj, dict) or "points" not in obj:
        raise ValueError("contour record needs a 'points' field")
    pts = _finite_array(obj["points"], (2,), "points")
    cls = obj.get("class", 0)
    if not isinstance(cls, int) or isinstance(cls, bool):
        raise ValueError("'class' must be an integer")
    return str(obj.get("id", default_id)), Contour(pts, cls)


def contour_to_dict(cid, c: Contour):
    return {"id": str(cid), "class": int(c.class_id), "points": c.points.tolist()}


def descriptor_from_dict(obj) -> FourierDescriptor:
    if not isinstance(obj, dict) or "center" not in obj or "coeffs" not in obj:
        raise ValueError("descriptor needs 'center' and 'coeffs'")
    center = np.asarray(obj["center"], dtype=float)
    coeffs = _finite_array(obj["coeffs"], (4,), "coeffs")
    if center.shape != (2,) or not np.all(np.isfinite(center)):
        raise ValueError("'center' must be two finite numbers")
    if "n" in obj and obj["n"] != len(coeffs):
        raise ValueError(f"'n'={obj['n']} but {len(coeffs)} coefficient rows")
    return FourierDescriptor(center, coeffs, int(obj.get("t", 360)))


def descriptor_to_dict(d: FourierDescriptor, cid=None, class_id=None):
    out = {}
    if cid is not None:
        out["id"] = str(cid)
    if class_id is not None:
        out["class"] = int(class_id)
    out.update({"center": d.center.tolist(), "n": d.n_harmonics,
                "coeffs": d.coeffs.tolist(), "t": d.period_samples})
    return out


def _parse(path, convert):
    out = []
    for lineno, obj in read_records(path):
        try:
            out.append(convert(lineno, obj))
        except (ValueError, TypeError, ContourError) as exc:
            raise InputFormatError(str(exc), _label(path), lineno) from exc
    return out


def read_contours(path):
    """List of ``(id, Contour)``; ids default to the record's line number."""
    return _parse(path, lambda n, obj: contour_from_dict(obj, default_id=str(n)))


def read_descriptors(path):
    """List of ``(id, class, FourierDescriptor)``."""
    def convert(n, obj):
        d = descriptor_from_dict(obj)
        return str(obj.get("id", n)), int(obj.get("class", 0)), d
    return _parse(path, convert)


def read_proposals(path):
    def convert(_, obj):
        if not isinstance(obj, dict) or "descriptor" not in obj:
            raise ValueError("proposal record needs a 'descriptor'")
        score = float(obj.get("score", math.nan))
        return ScoredProposal(descriptor_from_dict(obj["descriptor"]), score,
                              int(obj.get("class", 0)))
    return _parse(path, convert)


def proposal_to_dict(p: ScoredProposal):
    return {"class": p.class_id, "score": p.score, "descriptor": descriptor_to_dict(p.descriptor)}


def anchors_to_dict(a: AnchorSet):
    return {"k": a.k, "stride": a.stride, "image_size": list(a.image_size),
            "anchors": [descriptor_to_dict(d) for d in a.base_anchors]}


def read_anchors(path) -> AnchorSet:
    records = read_records(path)
    if len(records) != 1 or not isinstance(records[0][1], dict):
        raise InputFormatError("anchor file must hold one JSON object", _label(path), 1)
    obj = records[0][1]
    try:
        anchors = [descriptor_from_dict(d) for d in obj["anchors"]]
        if "k" in obj and obj["k"] != len(anchors):
            raise ValueError(f"'k'={obj['k']} but {len(anchors)} anchors")
        return AnchorSet(anchors, int(obj.get("stride", 8)),
                         tuple(obj.get("image_size", (416, 416))))
    except (KeyError, ValueError, TypeError, ContourError) as exc:
        raise InputFormatError(f"bad anchor file: {exc}", _label(path), 1) from exc


def write_lines(path, objs):
    with _open_out(path) as fh:
        for obj in objs:
            fh.write(dumps(obj))
            fh.write("\n")


def write_json(path, obj):
    with _open_out(path) as fh:
        fh.write(dumps(obj))
        fh.write("\n")
