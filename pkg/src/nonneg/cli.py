"""Command-line front end: ``nonneg {run,sweep,batch,landscape}``.

Exit codes: 0 success, 2 bad flags, 3 dimension mismatch (or unmatched
files under ``--strict``), 4 I/O failure, 1 anything else.
"""

from __future__ import annotations

import argparse
import math
import os
import statistics
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from .device_model import DeviceParams, Theta, residual
from .image_core import load_image, save_image
from .losses import LossVariant
from .optimizer import GridSpec, OptimConfig, Variant, grid_oracle, run
from .report import run_report, write_csv, write_json

EXIT_OK, EXIT_ERROR, EXIT_USAGE, EXIT_SHAPE, EXIT_IO = 0, 1, 2, 3, 4
IMAGE_SUFFIXES = {".png", ".ppm", ".pgm", ".pnm"}
SWEEP_METHODS = (Variant.AFFINE, Variant.HEURISTIC)


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


def _load(path) -> np.ndarray:
    try:
        return load_image(path)
    except (OSError, ValueError) as exc:
        raise CliError(str(exc), EXIT_IO) from exc


def _load_pair(input_path, proposal_path):
    x, y = _load(input_path), _load(proposal_path)
    if x.shape != y.shape:
        raise CliError(
            f"dimension mismatch: input {input_path} is {x.shape}, proposal {proposal_path} is {y.shape}",
            EXIT_SHAPE,
        )
    return x, y


def _mkdir(path: Path) -> Path:
    try:
        path.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise CliError(f"cannot create {path}: {exc}", EXIT_IO) from exc
    return path


def _device(args) -> DeviceParams:
    try:
        return DeviceParams(args.alpha, args.beta)
    except ValueError as exc:
        raise CliError(str(exc), EXIT_USAGE) from exc


def _config(args, variant) -> OptimConfig:
    try:
        return OptimConfig(
            learning_rate=args.lr, max_iters=args.iters, gamma=args.gamma, variant=variant, seed=args.seed
        )
    except ValueError as exc:
        raise CliError(str(exc), EXIT_USAGE) from exc


def execute_run(x, y, input_path, proposal_path, device, config, out_dir: Path,
                trace_every=10, raw_residual=False) -> dict:
    """Run one variant and write images plus ``report.json`` into ``out_dir``."""
    result = run(x, y, device, config)
    r = residual(x, result.target, device)
    scale = 1.0 / device.beta if device.beta > 0 else None
    shown = np.clip(r, 0.0, device.beta) * (scale if scale is not None else 0.0)
    report = run_report(result, input_path, proposal_path, device, config, trace_every, scale)
    _mkdir(out_dir)
    try:
        save_image(result.output, out_dir / "output.png")
        save_image(shown, out_dir / "residual.png")
        save_image(np.clip(result.target, 0.0, 1.0), out_dir / "target.png")
        if raw_residual:
            np.save(out_dir / "residual_raw.npy", r)
        write_json(report, out_dir / "report.json")
    except OSError as exc:
        raise CliError(f"cannot write outputs to {out_dir}: {exc}", EXIT_IO) from exc
    return report


def _trace_every(args):
    return 1 if args.full_trace else args.trace_every


# -- subcommands -------------------------------------------------------------


def cmd_run(args) -> int:
    x, y = _load_pair(args.input, args.proposal)
    device = _device(args)
    execute_run(
        x, y, args.input, args.proposal, device, _config(args, args.variant),
        Path(args.out_dir), _trace_every(args), args.raw_residual,
    )
    return EXIT_OK


def sweep_alphas(args) -> list[float]:
    if args.alphas is not None:
        try:
            alphas = [float(a) for a in args.alphas.split(",") if a.strip()]
        except ValueError as exc:
            raise CliError(f"bad --alphas list: {args.alphas}", EXIT_USAGE) from exc
    else:
        n = args.alpha_steps
        if n < 1:
            raise CliError("--alpha-steps must be at least 1", EXIT_USAGE)
        alphas = [0.0] if n == 1 else [i / (n - 1) for i in range(n)]
    if not alphas or any(not 0.0 <= a <= 1.0 for a in alphas):
        raise CliError("alphas must lie in [0, 1]", EXIT_USAGE)
    return sorted(set(alphas))


def cmd_sweep(args) -> int:
    x, y = _load_pair(args.input, args.proposal)
    out_dir = _mkdir(Path(args.out_dir))
    rows = []
    for alpha in sweep_alphas(args):
        device = DeviceParams(alpha)
        for method in sorted(SWEEP_METHODS, key=lambda m: m.value):
            report = execute_run(
                x, y, args.input, args.proposal, device, _config(args, method),
                out_dir / f"alpha_{alpha!r}" / method.value, _trace_every(args),
            )
            res = report["result"]
            rows.append([
                alpha, method.value, res["n_psnr_db"], res["violation_fraction"],
                res["violation_mean"], res["final_loss"]["total"],
            ])
    write_csv(
        out_dir / "sweep.csv",
        ["alpha", "method", "n_psnr_db", "violation_fraction", "violation_mean", "final_total_loss"],
        rows,
    )
    return EXIT_OK


def _image_names(directory: Path) -> set[str]:
    if not directory.is_dir():
        raise CliError(f"not a directory: {directory}", EXIT_IO)
    return {p.name for p in directory.iterdir() if p.suffix.lower() in IMAGE_SUFFIXES}


def _summary(values):
    if not values:
        return {"mean": None, "median": None}
    return {"mean": math.fsum(values) / len(values), "median": statistics.median(values)}


def aggregate_reports(reports: dict[str, dict[str, dict]], variants, unmatched) -> dict:
    """Order-independent statistics over ``{pair_name: {variant: report}}``."""
    names = sorted(reports)
    out = {"schema_version": 1, "pairs": len(names), "unmatched": sorted(unmatched), "variants": {}}
    for variant in variants:
        per = [reports[n][variant]["result"] for n in names]
        out["variants"][variant] = {
            key: _summary(sorted(r[key] for r in per))
            for key in ("n_psnr_db", "violation_fraction", "violation_mean", "violation_max")
        }
    return out


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("NONNEG_THREADS", "")))
    except ValueError:
        return min(8, os.cpu_count() or 1)


def cmd_batch(args) -> int:
    in_dir, prop_dir = Path(args.input_dir), Path(args.proposal_dir)
    in_names, prop_names = _image_names(in_dir), _image_names(prop_dir)
    matched = sorted(in_names & prop_names)
    unmatched = sorted(in_names ^ prop_names)
    for name in unmatched:
        print(f"unmatched file skipped: {name}", file=sys.stderr)
    if unmatched and args.strict:
        raise CliError(f"unmatched files: {', '.join(unmatched)}", EXIT_SHAPE)
    try:
        variants = [Variant(v.strip()).value for v in args.variants.split(",") if v.strip()]
    except ValueError as exc:
        raise CliError(f"bad --variants: {args.variants}", EXIT_USAGE) from exc
    device = _device(args)
    out_dir = _mkdir(Path(args.out_dir))

    def one(name):
        x, y = _load_pair(in_dir / name, prop_dir / name)
        return name, {
            v: execute_run(
                x, y, in_dir / name, prop_dir / name, device, _config(args, v),
                out_dir / Path(name).stem / v, _trace_every(args),
            )
            for v in variants
        }

    with ThreadPoolExecutor(max_workers=_threads()) as pool:
        reports = dict(pool.map(one, matched))
    write_json(aggregate_reports(reports, variants, unmatched), out_dir / "aggregate.json")
    return EXIT_OK


def cmd_landscape(args) -> int:
    x, y = _load_pair(args.input, args.proposal)
    device = _device(args)
    spec = GridSpec(
        args.theta1_min, args.theta1_max, args.theta1_step,
        args.theta2_min, args.theta2_max, args.theta2_step,
    )
    variant = LossVariant.FULL if args.normalized == "on" else LossVariant.NO_NORM
    try:
        grid = grid_oracle(x, y, device, args.gamma, spec, variant)
    except ValueError as exc:
        raise CliError(str(exc), EXIT_USAGE) from exc
    out_dir = _mkdir(Path(args.out_dir))
    best: Theta = grid.theta
    report = {
        "schema_version": 1,
        "inputs": {
            "input_path": str(args.input),
            "proposal_path": str(args.proposal),
            "alpha": device.alpha,
            "beta": device.beta,
            "gamma": float(args.gamma),
            "normalized": args.normalized == "on",
            "grid": {k: float(v) for k, v in vars(spec).items()},
        },
        "landscape_argmin": {
            "theta1": best.theta1,
            "theta2": best.theta2,
            "sim": grid.breakdown.sim,
            "constr": grid.breakdown.constr,
            "total": grid.breakdown.total,
        },
    }
    try:
        grid.surface.to_csv(out_dir / "landscape.csv")
        write_json(report, out_dir / "report.json")
    except OSError as exc:
        raise CliError(f"cannot write outputs to {out_dir}: {exc}", EXIT_IO) from exc
    return EXIT_OK


# -- parser ------------------------------------------------------------------


def _add_device_flags(p, alpha_required=True):
    p.add_argument("--alpha", type=float, required=alpha_required, help="scene transmittance in [0, 1]")
    p.add_argument("--beta", type=float, default=None, help="display budget (default 1 - alpha)")
    p.add_argument("--gamma", type=float, default=1.0, help="soft constraint weight")


def _add_optim_flags(p):
    p.add_argument("--lr", type=float, default=0.05, help="Adam learning rate")
    p.add_argument("--iters", type=int, default=500, help="maximum Adam updates")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trace-every", type=int, default=10, help="keep every k-th trace entry")
    p.add_argument("--full-trace", action="store_true", help="keep the whole loss trace")
    p.add_argument("--out-dir", default=".", help="output directory")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nonneg", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    variants = [v.value for v in Variant]

    p = sub.add_parser("run", help="optimize one input/proposal pair")
    p.add_argument("--input", required=True)
    p.add_argument("--proposal", required=True)
    _add_device_flags(p)
    p.add_argument("--variant", choices=variants, default="affine")
    p.add_argument("--raw-residual", action="store_true", help="also save the unclamped residual as .npy")
    _add_optim_flags(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="compare optimizer and heuristic across alpha (beta = 1 - alpha)")
    p.add_argument("--input", required=True)
    p.add_argument("--proposal", required=True)
    grid = p.add_mutually_exclusive_group(required=True)
    grid.add_argument("--alphas", help="comma-separated alpha values")
    grid.add_argument("--alpha-steps", type=int, help="N evenly spaced alphas over [0, 1]")
    p.add_argument("--gamma", type=float, default=1.0)
    _add_optim_flags(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("batch", help="run filename-matched pairs from two directories")
    p.add_argument("--input-dir", required=True)
    p.add_argument("--proposal-dir", required=True)
    _add_device_flags(p)
    p.add_argument("--variants", default="affine,heuristic", help="comma-separated variants")
    p.add_argument("--strict", action="store_true", help="fail (exit 3) on unmatched filenames")
    _add_optim_flags(p)
    p.set_defaults(func=cmd_batch)

    p = sub.add_parser("landscape", help="export the loss surface over a theta grid")
    p.add_argument("--input", required=True)
    p.add_argument("--proposal", required=True)
    _add_device_flags(p)
    p.add_argument("--normalized", choices=["on", "off"], default="on")
    defaults = GridSpec()
    for name in vars(defaults):
        p.add_argument(f"--{name.replace('_', '-')}", type=float, default=getattr(defaults, name))
    p.add_argument("--out-dir", default=".")
    p.set_defaults(func=cmd_landscape)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"nonneg: error: {exc}", file=sys.stderr)
        return exc.code
    except FloatingPointError as exc:
        print(f"nonneg: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
