"""Command-line interface wiring the pipeline end to end.

Exit codes: 0 success, 1 validation error, 2 I/O error, 3 numerical
failure.  All output files are written atomically (temp + rename), so a
failing subcommand never leaves partial artifacts behind.
"""

from __future__ import annotations

import argparse
import glob
import json
import os
import sys

import numpy as np

from . import io_formats as iof
from .densify import MapConfig, Reconstruction, densify, nearest_neighbor_densify
from .errors import (
    FormatError,
    NumericalError,
    PcadenseError,
    ValidationError,
)
from .geometry import evaluate_frame, select_samples
from .pca import (
    cumulative_variance_fraction,
    learn_basis,
    truncate_basis,
)
from .preprocess import box_blur, fill_invalid_nearest
from .synth import SceneParams, generate_training_set
from .types import DepthMap, SparseMeasurement, TrainingSet

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_IO = 2
EXIT_NUMERICAL = 3

DEFAULT_THREADS_ENV = "PCADENSE_THREADS"


def _positive_float(value: str) -> float:
    f = float(value)
    if f <= 0:
        raise argparse.ArgumentTypeError(f"must be > 0, got {value}")
    return f


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--verbose", action="store_true", help="log progress to stderr")
    common.add_argument(
        "--threads",
        type=int,
        default=int(os.environ.get(DEFAULT_THREADS_ENV, "0")),
        help="worker hint; output is identical for any value",
    )
    common.add_argument("--seed", type=int, default=0, help="RNG seed")

    parser = argparse.ArgumentParser(
        prog="pcadense",
        description="Sparse-to-dense depth interpolation with a PCA prior.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_parser(name, **kwargs):
        return sub.add_parser(name, parents=[common], **kwargs)

    p = add_parser("synth", help="write a synthetic disparity-map corpus")
    p.add_argument("--params", help="scene parameter file (key = value)")
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--jitter", type=float, default=0.2)
    p.add_argument("--out", required=True, help="output directory")

    p = add_parser("learn", help="preprocess a corpus and learn a basis")
    p.add_argument("--train", required=True, help="directory of .pfm/.csv maps")
    p.add_argument("--out", required=True, help="output basis (.pcab)")
    p.add_argument("--variance", type=float, default=0.90)
    p.add_argument("--max-components", type=int, default=500)
    p.add_argument("--fill-invalid", action="store_true")
    p.add_argument("--blur", type=int, default=0, metavar="KERNEL")

    p = add_parser("info", help="describe a basis file")
    p.add_argument("--basis", required=True)
    p.add_argument("--cumsum-csv", help="write the cumulative-variance curve")

    p = add_parser("densify", help="MAP densification of sparse points")
    p.add_argument("--basis", required=True)
    p.add_argument("--sparse", required=True, help="points CSV (row,col,disparity)")
    p.add_argument("--sigma-z", type=_positive_float, default=2.0)
    p.add_argument("--uncertainty", action="store_true")
    p.add_argument("--covariance", choices=["paper", "scaled"], default="paper")
    p.add_argument("--clamp-negative", action="store_true")
    p.add_argument("--out", required=True, help="dense output (.pfm/.csv)")
    p.add_argument("--uncertainty-out", help="uncertainty image output")

    p = add_parser("baseline", help="nearest-neighbor densification")
    p.add_argument("--sparse", required=True)
    p.add_argument("--width", type=int, required=True)
    p.add_argument("--height", type=int, required=True)
    p.add_argument("--out", required=True)

    p = add_parser("sample", help="select measurement points on a map")
    p.add_argument("--depth", required=True, help="reference map (.pfm/.csv)")
    p.add_argument("--strategy", choices=["random", "grid", "gradient"], required=True)
    p.add_argument("--k", type=int, default=0)
    p.add_argument("--step", type=int, default=0)
    p.add_argument("--out", required=True, help="points CSV")

    p = add_parser("evaluate", help="projection-error report")
    p.add_argument("--recon", required=True)
    p.add_argument("--uncertainty", help="uncertainty image (.pfm/.csv)")
    p.add_argument("--reference", required=True)
    p.add_argument("--camera", required=True)
    p.add_argument("--pose", required=True)
    p.add_argument("--points", help="evaluation points CSV; omit for all pixels")
    p.add_argument("--report", required=True, help="JSON summary output")
    p.add_argument("--per-point", help="per-point CSV output")

    p = add_parser("compare", help="print a paired summary of two reports")
    p.add_argument("--report-a", required=True)
    p.add_argument("--report-b", required=True)

    return parser


def _log(args, message: str) -> None:
    if args.verbose:
        print(message, file=sys.stderr)


def _load_corpus(directory: str) -> list:
    paths = sorted(
        glob.glob(os.path.join(directory, "*.pfm"))
        + glob.glob(os.path.join(directory, "*.csv"))
    )
    if not paths:
        raise ValidationError(f"no .pfm or .csv maps found in {directory}")
    return [(p, iof.read_depth(p)) for p in paths]


def cmd_synth(args) -> int:
    base = iof.read_scene_params(args.params) if args.params else SceneParams()
    if base.seed == 0 and args.seed:
        base = SceneParams(**{**iof.params_to_dict(base), "seed": args.seed})
    training = generate_training_set(args.count, base, jitter=args.jitter, seed=args.seed)
    os.makedirs(args.out, exist_ok=True)
    for i, depth in enumerate(training.maps):
        iof.write_depth_pfm(depth, os.path.join(args.out, f"scene_{i:05d}.pfm"))
    _log(args, f"wrote {args.count} scenes to {args.out}")
    return EXIT_OK


def cmd_learn(args) -> int:
    maps = []
    for path, depth in _load_corpus(args.train):
        if args.fill_invalid:
            depth = fill_invalid_nearest(depth)
        if args.blur:
            depth = box_blur(depth, args.blur)
        if not depth.fully_valid():
            raise ValidationError(
                f"{path} contains invalid pixels; pass --fill-invalid"
            )
        maps.append(depth)
    basis = learn_basis(
        TrainingSet(tuple(maps)),
        max_components=args.max_components,
        min_variance_fraction=args.variance,
    )
    iof.save_basis(basis, args.out)
    _log(args, f"learned {basis.n_components} components from {len(maps)} maps")
    return EXIT_OK


def cmd_info(args) -> int:
    basis = iof.load_basis(args.basis)
    l = basis.n_components
    frac = cumulative_variance_fraction(basis.eigenvalues, basis.total_variance, l)
    print(f"dimensions: {basis.width}x{basis.height} ({basis.size} px)")
    print(f"components: {l}")
    print(f"total variance: {basis.total_variance:.6g}")
    print(f"variance fraction at l={l}: {frac:.6f}")
    if args.cumsum_csv:
        lines = ["k,variance_fraction"]
        for k in range(1, l + 1):
            f = cumulative_variance_fraction(basis.eigenvalues, basis.total_variance, k)
            lines.append(f"{k},{repr(f)}")
        iof.atomic_write(args.cumsum_csv, ("\n".join(lines) + "\n").encode("ascii"))
    return EXIT_OK


def cmd_densify(args) -> int:
    basis = iof.load_basis(args.basis)
    sparse = iof.read_sparse(args.sparse, basis.width, basis.height)
    config = MapConfig(
        sigma_z=args.sigma_z,
        covariance_mode="paper_verbatim" if args.covariance == "paper" else "sigma_scaled",
        compute_uncertainty=bool(args.uncertainty or args.uncertainty_out),
        clamp_negative=args.clamp_negative,
    )
    recon = densify(basis, sparse, config)
    iof.write_depth(recon.dense, args.out)
    if args.uncertainty_out:
        unc = DepthMap.from_vector(recon.uncertainty, basis.width, basis.height)
        iof.write_depth(unc, args.uncertainty_out)
    _log(args, f"densified {len(sparse)} measurements -> {args.out}")
    return EXIT_OK


def cmd_baseline(args) -> int:
    sparse = iof.read_sparse(args.sparse, args.width, args.height)
    iof.write_depth(nearest_neighbor_densify(sparse), args.out)
    return EXIT_OK


def cmd_sample(args) -> int:
    depth = iof.read_depth(args.depth)
    sparse = select_samples(
        depth, args.strategy, k=args.k, step=args.step, seed=args.seed
    )
    iof.write_sparse(sparse, args.out)
    _log(args, f"selected {len(sparse)} points -> {args.out}")
    return EXIT_OK


def cmd_evaluate(args) -> int:
    recon_map = iof.read_depth(args.recon)
    reference = iof.read_depth(args.reference)
    cam = iof.read_camera(args.camera)
    pose = iof.read_pose(args.pose)
    uncertainty = None
    if args.uncertainty:
        uncertainty = iof.read_depth(args.uncertainty).vector
    points = None
    if args.points:
        points = iof.read_sparse(args.points, reference.width, reference.height)
    # variances are unused by the evaluation; a unit placeholder keeps the
    # Reconstruction container valid when loading maps from disk
    recon = Reconstruction(
        dense=recon_map,
        coeffs=np.zeros(1),
        coeff_variances=np.ones(1),
        uncertainty=uncertainty,
    )
    report = evaluate_frame(
        recon,
        reference,
        cam,
        pose,
        eval_points=points,
        bin_by_uncertainty=uncertainty is not None,
    )
    iof.write_report_json(report, args.report)
    if args.per_point:
        iof.write_report_csv(report, args.per_point)
    print(
        f"points: {report.n_points}  discarded: {report.n_discarded}  "
        f"mean d2d: {report.mean_delta2d():.4f} px  "
        f"mean d3d: {report.mean_delta3d():.4f} m"
    )
    return EXIT_OK


def cmd_compare(args) -> int:
    a = iof.read_report_json(args.report_a)
    b = iof.read_report_json(args.report_b)
    name_a = os.path.basename(args.report_a)
    name_b = os.path.basename(args.report_b)
    print(f"{'':>16} {name_a:>16} {name_b:>16}")
    for label, key in (
        ("points", "n_points"),
        ("mean d2d [px]", "mean_delta2d_px"),
        ("mean d3d [m]", "mean_delta3d_m"),
    ):
        va, vb = a.get(key), b.get(key)
        fa = f"{va:.4f}" if isinstance(va, float) else str(va)
        fb = f"{vb:.4f}" if isinstance(vb, float) else str(vb)
        print(f"{label:>16} {fa:>16} {fb:>16}")
    return EXIT_OK


_COMMANDS = {
    "synth": cmd_synth,
    "learn": cmd_learn,
    "info": cmd_info,
    "densify": cmd_densify,
    "baseline": cmd_baseline,
    "sample": cmd_sample,
    "evaluate": cmd_evaluate,
    "compare": cmd_compare,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_VALIDATION if exc.code not in (0, None) else EXIT_OK
    try:
        return _COMMANDS[args.command](args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (FormatError, OSError, json.JSONDecodeError) as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    except PcadenseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
