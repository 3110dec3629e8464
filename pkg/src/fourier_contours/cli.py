"""Command-line entry point.

Exit status: 0 success, 1 invalid values, 2 unreadable or malformed files.
"""

from __future__ import annotations

import argparse
import logging
import sys

from . import io
from .anchors import AssignConfig, assign, fit_anchors, tile_anchors
from .csr import RefineConfig, refine_proposals
from .efd import efd_decode, encode_canonical
from .errors import ContourError
from .evaluation import evaluate
from .masks import extract_contours, read_pgm
from .synth import NoiseConfig, SynthConfig, simulate_proposals, synth_dataset

log = logging.getLogger("fourier_contours")


def cmd_encode(args):
    records = io.read_contours(args.input)
    out = []
    for cid, c in records:
        d = encode_canonical(c, args.n, args.t)
        out.append(io.descriptor_to_dict(d, cid, c.class_id))
    io.write_lines(args.output, out)


def cmd_decode(args):
    out = []
    for cid, cls, d in io.read_descriptors(args.input):
        out.append(io.contour_to_dict(cid, efd_decode(d, args.t_out, cls)))
    io.write_lines(args.output, out)


def cmd_anchors(args):
    descs = [d for _, _, d in io.read_descriptors(args.input)]
    a = fit_anchors(descs, args.k, args.seed, args.stride, tuple(args.image_size))
    io.write_json(args.output, io.anchors_to_dict(a))


def cmd_assign(args):
    anchors = io.read_anchors(args.anchors)
    gts = [c for _, c in io.read_contours(args.gt)]
    cfg = AssignConfig(args.pos, args.neg, not args.no_force_match)
    result = assign(tile_anchors(anchors), gts, cfg, workers=args.workers)
    report = {"pos_threshold": cfg.pos_threshold, "neg_threshold": cfg.neg_threshold,
              "force_match": cfg.force_match, "n_gt": len(gts)}
    report.update(result.to_dict())
    io.write_json(args.output, report)


def cmd_refine(args):
    proposals = io.read_proposals(args.input)
    cfg = RefineConfig(top_n=args.top_n, cluster_iou=args.iou, sample_k=args.k,
                       box_scale=args.box_scale, decode_T=args.decode_t)
    image_size = tuple(args.image_size) if args.image_size else None
    out = []
    for r in refine_proposals(proposals, cfg, image_size):
        out.append({
            "class": r.class_id,
            "merged": io.descriptor_to_dict(r.merged.descriptor),
            "member_count": r.merged.member_count,
            "mean_member_iou": r.merged.mean_member_iou,
            "points": r.points.tolist(),
            "boxes": r.boxes.tolist(),
        })
    io.write_json(args.output, {"results": out})


def cmd_metrics(args):
    preds = [c for _, c in io.read_contours(args.pred)]
    gts = [c for _, c in io.read_contours(args.gt)]
    table = evaluate(preds, gts, workers=args.workers)
    if table.excluded:
        print(f"excluded {len(table.excluded)} degenerate pair(s): {table.excluded}",
              file=sys.stderr)
    with io._open_out(args.output) as fh:
        fh.write(table.to_csv())


def cmd_synth(args):
    cfg = SynthConfig(args.count, args.n_harmonics, args.base_radius, args.decay_power,
                      tuple(args.image_size), args.seed, args.class_id)
    io.write_lines(args.output, (io.contour_to_dict(i, c)
                                 for i, (c, _) in enumerate(synth_dataset(cfg))))


def cmd_simulate(args):
    out = []
    for i, (_, cls, d) in enumerate(io.read_descriptors(args.input)):
        cfg = NoiseConfig(args.sigma, args.center_sigma, args.per_gt, args.seed + i)
        out.extend(io.proposal_to_dict(p) for p in simulate_proposals(d, cfg, cls))
    io.write_lines(args.output, out)


def cmd_extract(args):
    mask = read_pgm(args.input)
    classes = [args.class_id] if args.class_id is not None else [c for c in mask.classes() if c]
    out = []
    for cls in classes:
        for i, c in enumerate(extract_contours(mask, cls)):
            out.append(io.contour_to_dict(f"{cls}-{i}", c))
    io.write_lines(args.output, out)


def build_parser():
    p = argparse.ArgumentParser(prog="fourier-contours",
                                description="Fourier contour codec, anchors, proposal refinement geometry and metrics.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, func, help_, input_=True):
        sp = sub.add_parser(name, help=help_)
        if input_:
            sp.add_argument("input", nargs="?", default="-", help="input file ('-' for stdin)")
        sp.add_argument("-o", "--output", default="-", help="output file ('-' for stdout)")
        sp.set_defaults(func=func)
        return sp

    sp = add("encode", cmd_encode, "contours JSONL -> descriptors JSONL")
    sp.add_argument("--n", type=int, default=7)
    sp.add_argument("--t", type=int, default=360)

    sp = add("decode", cmd_decode, "descriptors -> contours JSONL")
    sp.add_argument("--t-out", type=int, default=128)

    sp = add("anchors", cmd_anchors, "descriptors -> anchor JSON by k-means")
    sp.add_argument("--k", type=int, default=9)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--stride", type=int, default=8)
    sp.add_argument("--image-size", type=int, nargs=2, default=[416, 416], metavar=("W", "H"))

    sp = add("assign", cmd_assign, "anchors + GT contours -> assignment report JSON", input_=False)
    sp.add_argument("anchors")
    sp.add_argument("gt")
    sp.add_argument("--pos", type=float, default=0.25)
    sp.add_argument("--neg", type=float, default=0.10)
    sp.add_argument("--no-force-match", action="store_true")
    sp.add_argument("--workers", type=int, default=1)

    sp = add("refine", cmd_refine, "proposals JSONL -> merged contours + sample boxes JSON")
    sp.add_argument("--top-n", type=int, default=20)
    sp.add_argument("--iou", type=float, default=0.7)
    sp.add_argument("--k", type=int, default=16)
    sp.add_argument("--box-scale", type=float, default=0.2)
    sp.add_argument("--decode-t", type=int, default=128)
    sp.add_argument("--image-size", type=int, nargs=2, default=None, metavar=("W", "H"))

    sp = add("metrics", cmd_metrics, "pred + gt contours -> metric,mean,std CSV", input_=False)
    sp.add_argument("pred")
    sp.add_argument("gt")
    sp.add_argument("--workers", type=int, default=1)

    sp = add("synth", cmd_synth, "random band-limited contours -> JSONL", input_=False)
    sp.add_argument("--count", type=int, required=True)
    sp.add_argument("--seed", type=int, required=True)
    sp.add_argument("--n-harmonics", type=int, default=7)
    sp.add_argument("--base-radius", type=float, default=40.0)
    sp.add_argument("--decay-power", type=float, default=2.0)
    sp.add_argument("--image-size", type=int, nargs=2, default=[416, 416], metavar=("W", "H"))
    sp.add_argument("--class-id", type=int, default=1)

    sp = add("simulate", cmd_simulate, "GT descriptors -> noisy scored proposals JSONL")
    sp.add_argument("--sigma", type=float, default=0.1, help="coefficient noise, fraction of first amplitude")
    sp.add_argument("--center-sigma", type=float, default=0.0)
    sp.add_argument("--per-gt", type=int, default=20)
    sp.add_argument("--seed", type=int, required=True)

    sp = add("extract", cmd_extract, "PGM label mask -> contours JSONL")
    sp.add_argument("--class", dest="class_id", type=int, default=None)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        args.func(args)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ContourError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
