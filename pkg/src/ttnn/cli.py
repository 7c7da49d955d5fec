"""Command-line front end: ``ttnn {complete,mask,score,sweep,synth}``.

Exit codes: 0 success, 1 usage error, 2 I/O error, 3 solver diagnostic.
"""

from __future__ import annotations

import argparse
import csv
import logging
import sys
from pathlib import Path

import numpy as np

from . import dataio, metrics, solver
from .errors import ImaginaryResidue, SolverDiagnostic, SVDFailure
from .tensor import load_tns, save_tns

EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_SOLVER = 0, 1, 2, 3

log = logging.getLogger("ttnn")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def load_tensor(path) -> np.ndarray:
    """PNG image, directory of PNG frames, or TNS1 file, by path."""
    path = Path(path)
    if path.is_dir():
        return dataio.load_frames(path)
    if path.suffix.lower() == ".png":
        return dataio.load_image(path)
    return load_tns(path)


def save_tensor(t, path) -> None:
    if Path(path).suffix.lower() == ".png":
        dataio.save_image(t, path)
    else:
        save_tns(t, path)


def _need_input(path):
    if path is not None and not Path(path).exists():
        raise FileNotFoundError(f"input not found: {path}")


def _need_output(path):
    if path is not None and not Path(path).resolve().parent.is_dir():
        raise FileNotFoundError(f"output directory does not exist: {Path(path).parent}")


def _input_path(args):
    given = [p for p in (args.image, args.frames, args.tensor) if p is not None]
    if len(given) != 1:
        raise UsageError("give exactly one of --image, --frames, --tensor")
    return given[0]


def _config(args, r=None) -> solver.SolverConfig:
    try:
        return solver.SolverConfig(
            r=args.r if r is None else r,
            mu=args.mu,
            outer_eps=args.outer_eps,
            outer_max=args.outer_max,
            inner_eps=args.inner_eps,
            inner_max=args.inner_max,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _prepare(args):
    """Validate paths, then load the truth tensor and its mask."""
    source = _input_path(args)
    _need_input(source)
    _need_input(args.mask)
    if args.mask is None and args.loss is None:
        raise UsageError("give --mask or --loss")
    truth = load_tensor(source)
    if args.mask is not None:
        mask = dataio.load_mask(args.mask)
        seed = None
    else:
        mode = args.mode or ("pixel" if args.image is not None else "element")
        try:
            mask = dataio.random_mask(truth.shape, args.loss, mode, args.seed)
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
        seed = args.seed
    if mask.dims != truth.shape:
        raise UsageError(f"mask dims {mask.dims} do not match input {truth.shape}")
    if mask.missing_count == 0:
        raise UsageError("mask leaves nothing to recover")
    return truth, mask, seed


def cmd_complete(args) -> int:
    report_path = args.report or str(Path(args.out).with_suffix(".report.txt"))
    _need_output(args.out)
    _need_output(report_path)
    truth, mask, seed = _prepare(args)
    cfg = _config(args)
    if args.method == "ttnn":
        try:
            cfg.check_dims(truth.shape)
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
    report = solver.complete(args.method, mask.apply(truth), mask, cfg)
    sc = metrics.score(report.recovered, truth, mask)
    save_tensor(report.recovered, args.out)
    dataio.save_report(report, sc, report_path, seed=seed)
    print(
        f"{args.method}: psnr={sc.psnr:.4f} mse={sc.mse:.6g} "
        f"outer={report.outer_iterations} inner={report.total_inner_iterations} -> {args.out}"
    )
    return EXIT_OK


def cmd_sweep(args) -> int:
    if args.r_min < 1 or args.r_max < args.r_min or args.r_step < 1:
        raise UsageError("need 1 <= r-min <= r-max and r-step >= 1")
    _need_output(args.csv)
    truth, mask, _ = _prepare(args)
    if args.r_max > min(truth.shape[:2]):
        raise UsageError(f"r-max exceeds min(n1, n2)={min(truth.shape[:2])}")
    cfg = _config(args, r=args.r_min)
    r_values = range(args.r_min, args.r_max + 1, args.r_step)
    rows = solver.sweep_r(truth, mask, cfg, r_values, method=args.method, jobs=args.jobs)
    with open(args.csv, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(("r", "psnr", "outer_iters", "inner_iters"))
        for row in rows:
            writer.writerow((row.r, repr(float(row.score.psnr)),
                             row.report.outer_iterations, row.report.total_inner_iterations))
    best = solver.best_r(rows)
    print(f"best r = {best.r} (psnr={best.score.psnr:.4f}) over {len(rows)} runs -> {args.csv}")
    return EXIT_OK


def cmd_mask(args) -> int:
    if (args.dims is None) == (args.like is None):
        raise UsageError("give exactly one of --dims, --like")
    _need_input(args.like)
    _need_output(args.out)
    dims = tuple(args.dims) if args.dims is not None else load_tensor(args.like).shape
    try:
        mask = dataio.random_mask(dims, args.loss, args.mode, args.seed)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    dataio.save_mask(mask, args.out)
    print(f"mask {dims}: {mask.missing_count} missing of {mask.observed.size} -> {args.out}")
    return EXIT_OK


def cmd_score(args) -> int:
    for p in (args.truth, args.recovered, args.mask):
        _need_input(p)
    truth = load_tensor(args.truth)
    recovered = load_tensor(args.recovered)
    mask = dataio.load_mask(args.mask)
    try:
        sc = metrics.score(recovered, truth, mask)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    psnr = "inf" if np.isinf(sc.psnr) else f"{sc.psnr:.6f}"
    print(f"mse={sc.mse!r} psnr={psnr} missing={sc.missing_count}")
    return EXIT_OK


def cmd_synth(args) -> int:
    dims = tuple(args.dims)
    if min(dims) < 1:
        raise UsageError("dims must be positive")
    if not 1 <= args.rank <= min(dims[:2]):
        raise UsageError(f"rank must lie in 1..{min(dims[:2])}")
    mask_out = args.mask_out or str(Path(args.out).with_suffix(".msk"))
    _need_output(args.out)
    _need_output(mask_out)
    try:
        mask = dataio.random_mask(dims, args.loss, args.mode, args.seed)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    truth = dataio.synthetic_low_rank(dims, args.rank, args.seed)
    save_tns(truth, args.out)
    dataio.save_mask(mask, mask_out)
    print(f"synth {dims} rank {args.rank} seed {args.seed} -> {args.out}, {mask_out}")
    return EXIT_OK


def _add_inputs(p):
    src = p.add_argument_group("input")
    src.add_argument("--image", help="8-bit PNG image")
    src.add_argument("--frames", help="directory of grayscale PNG frames")
    src.add_argument("--tensor", help="TNS1 tensor file")
    src.add_argument("--mask", help="MSK1 mask file (otherwise generated from --loss)")
    src.add_argument("--loss", type=float, help="fraction of entries or pixels to drop")
    src.add_argument("--mode", choices=("element", "pixel"),
                     help="loss mode (default: pixel for images, element otherwise)")
    src.add_argument("--seed", type=int, default=0)


def _add_solver(p):
    s = p.add_argument_group("solver")
    s.add_argument("--method", choices=("ttnn", "tubal"), default="ttnn")
    s.add_argument("--r", type=int, default=1, help="number of truncated singular values")
    s.add_argument("--mu", type=float, default=5e-4)
    s.add_argument("--outer-eps", type=float, default=1e-3)
    s.add_argument("--outer-max", type=int, default=50)
    s.add_argument("--inner-eps", type=float, default=1e-4)
    s.add_argument("--inner-max", type=int, default=200)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ttnn", description="Low-rank tensor completion.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log every outer iteration")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("complete", help="recover missing entries")
    _add_inputs(p)
    _add_solver(p)
    p.add_argument("--out", required=True, help="recovered output (.png or TNS1)")
    p.add_argument("--report", help="report path (default: <out>.report.txt)")
    p.set_defaults(func=cmd_complete)

    p = sub.add_parser("sweep", help="run the solver over a range of r")
    _add_inputs(p)
    _add_solver(p)
    p.add_argument("--r-min", type=int, default=1)
    p.add_argument("--r-max", type=int, default=30)
    p.add_argument("--r-step", type=int, default=1)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--csv", required=True, help="output CSV of r,psnr,outer_iters,inner_iters")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("mask", help="generate a random MSK1 mask")
    p.add_argument("--dims", type=int, nargs=3, metavar=("N1", "N2", "N3"))
    p.add_argument("--like", help="take dims from this image, frame directory or TNS1 file")
    p.add_argument("--loss", type=float, required=True)
    p.add_argument("--mode", choices=("element", "pixel"), default="element")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_mask)

    p = sub.add_parser("score", help="score a recovered tensor against the truth")
    p.add_argument("--truth", required=True)
    p.add_argument("--recovered", required=True)
    p.add_argument("--mask", required=True)
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("synth", help="write a synthetic low-tubal-rank tensor and mask")
    p.add_argument("--dims", type=int, nargs=3, required=True, metavar=("N1", "N2", "N3"))
    p.add_argument("--rank", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--loss", type=float, default=0.3)
    p.add_argument("--mode", choices=("element", "pixel"), default="element")
    p.add_argument("--out", required=True, help="TNS1 output")
    p.add_argument("--mask-out", help="MSK1 output (default: <out>.msk)")
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(name)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"ttnn: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (SolverDiagnostic, SVDFailure, ImaginaryResidue) as exc:
        print(f"ttnn: solver: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (OSError, ValueError) as exc:
        print(f"ttnn: i/o: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
