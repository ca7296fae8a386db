"""Command-line benchmark harness: ``tnnr synth``, ``tnnr inpaint``, ``tnnr compare``.

Exit codes: 0 ok, 2 usage or configuration error, 3 solver divergence,
4 file or I/O error. ``TNNR_THREADS`` caps the number of worker processes
used by ``--jobs``.
"""

import argparse
import hashlib
import json
import logging
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .completion import LossModel, synth_instance
from .data import texture_image
from .exceptions import ConfigError, DivergenceError, ShapeError
from .io import read_mask, read_tensor, write_mask, write_tensor
from .metrics import psnr, relative_error, ssim
from .presets import build_weights, parse_mask, parse_penalty, parse_preset
from .solver import SolverConfig, solve

EXIT_OK, EXIT_USAGE, EXIT_DIVERGED, EXIT_IO = 0, 2, 3, 4
COMPARE_COLUMNS = ("sr", "preset", "psnr", "ssim", "rel_error", "iterations",
                   "seconds", "mask_hash", "rank")
BUILTIN_TEXTURE = "builtin:texture"

logger = logging.getLogger("tnnr")


class UsageError(Exception):
    pass


def _json_number(v):
    if isinstance(v, float) and not math.isfinite(v):
        return "inf" if v > 0 else ("-inf" if v < 0 else "nan")
    return v


def _dump(obj):
    if isinstance(obj, dict):
        return {k: _dump(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_dump(v) for v in obj]
    if isinstance(obj, np.generic):
        obj = obj.item()
    return _json_number(obj)


def mask_hash(mask):
    """SHA-256 of the mask bytes in file order."""
    return hashlib.sha256(mask.indicator.astype(np.uint8).tobytes(order="F")).hexdigest()


def _fmt(v):
    return "inf" if v == float("inf") else f"{v:.6f}"


def _worker_cap(requested):
    cap = os.environ.get("TNNR_THREADS")
    jobs = max(int(requested), 1)
    if cap:
        try:
            jobs = min(jobs, max(int(cap), 1))
        except ValueError:
            raise UsageError(f"TNNR_THREADS must be an integer, got {cap!r}")
    return jobs


def _solver_config(args, **overrides):
    params = dict(lam=args.lam, theta1=args.theta1, theta2=args.theta2,
                  epsilon=args.epsilon, lf=args.lf, mu=args.mu,
                  max_iters=args.max_iters, tol_rel_change=args.tol,
                  penalty=parse_penalty(args.penalty), seed=args.seed)
    params.update(overrides)
    return SolverConfig(**params)


def _metrics(x, ref, data_range, trace, seconds):
    return {
        "psnr": psnr(x, ref, peak=data_range),
        "ssim": ssim(x, ref, data_range=data_range),
        "rel_error": relative_error(x, ref),
        "iterations": trace.iterations,
        "seconds": seconds,
    }


def _run_solver(loss, cfg, preset, m_true=None):
    weights = build_weights(preset, loss.dims, loss.initial_guess())
    start = time.perf_counter()
    x, trace = solve(loss, cfg, weights=weights, m_true=m_true)
    return x, trace, time.perf_counter() - start


# synth

def _synth_run(args, index):
    seed = args.seed + index
    m_true, mask = synth_instance(args.n1, args.n2, args.n3, args.rank, args.sr, seed)
    cfg = _solver_config(args, seed=seed, tol_ground_truth=args.tol_truth)
    loss = LossModel.from_full(m_true, mask)
    x, trace, seconds = _run_solver(loss, cfg, args.preset, m_true=m_true)
    data_range = float(m_true.max() - m_true.min())
    report = {
        "command": "synth",
        "run": index,
        "config": {**cfg.echo(), "preset": args.preset, "seed": seed,
                   "n1": args.n1, "n2": args.n2, "n3": args.n3, "rank": args.rank,
                   "sr": args.sr},
        "metrics": _metrics(x, m_true, data_range, trace, seconds),
        "stop_reason": trace.stop_reason,
        "mask_hash": mask_hash(mask),
    }
    return report, trace


def _aggregate(reports):
    out = {}
    for key in ("psnr", "ssim", "rel_error", "iterations", "seconds"):
        vals = np.array([r["metrics"][key] for r in reports], dtype=np.float64)
        out[key] = {"mean": float(np.mean(vals)), "std": float(np.std(vals))}
    return out


def cmd_synth(args):
    jobs = _worker_cap(args.jobs)
    if jobs > 1 and args.runs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_synth_run, [args] * args.runs, range(args.runs)))
    else:
        results = [_synth_run(args, i) for i in range(args.runs)]
    reports = []
    for report, trace in results:
        report["trace_file"] = _persist(args.out, f"run{report['run']:03d}", report, trace)
        reports.append(report)
        m = report["metrics"]
        print(f"run {report['run']} seed {report['config']['seed']}: "
              f"rel_error {m['rel_error']:.6e} psnr {_fmt(m['psnr'])} ssim {m['ssim']:.6f} "
              f"iterations {m['iterations']} stop {report['stop_reason']}")
    summary = {"runs": reports, "aggregate": _aggregate(reports)}
    if len(reports) > 1:
        for key, stats in summary["aggregate"].items():
            if key == "seconds":
                # wall time stays in summary.json; stdout is kept reproducible
                continue
            print(f"{key}: mean {stats['mean']:.6g} std {stats['std']:.6g}")
    if args.out:
        _write_json(Path(args.out) / "summary.json", summary)
    return summary


# inpaint

def _load_input(spec):
    if spec == BUILTIN_TEXTURE:
        return texture_image()
    return read_tensor(spec)


def _load_mask(args, dims):
    if args.mask:
        mask = read_mask(args.mask)
        if mask.dims != tuple(dims):
            raise ShapeError(f"mask dims {mask.dims} do not match input {tuple(dims)}")
        return mask
    return parse_mask(args.mask_kind, dims, args.seed)


def _inpaint(original, mask, cfg, preset):
    """Solve, then keep the observed entries exactly as given."""
    loss = LossModel.from_full(original, mask)
    x, trace, seconds = _run_solver(loss, cfg, preset)
    x = np.where(mask.indicator, original, x)
    return x, trace, seconds


def cmd_inpaint(args):
    original = _load_input(args.input)
    mask = _load_mask(args, original.shape)
    cfg = _solver_config(args)
    x, trace, seconds = _inpaint(original, mask, cfg, args.preset)
    if args.output:
        write_tensor(args.output, x)
    report = {
        "command": "inpaint",
        "input": args.input,
        "config": {**cfg.echo(), "preset": args.preset, "seed": args.seed,
                   "mask": args.mask or args.mask_kind},
        "metrics": _metrics(x, original, 1.0, trace, seconds),
        "stop_reason": trace.stop_reason,
        "mask_hash": mask_hash(mask),
        "output": args.output,
    }
    report["trace_file"] = _persist(args.out, "inpaint", report, trace)
    if args.out and args.save_mask:
        write_mask(Path(args.out) / "mask.msk", mask)
    m = report["metrics"]
    print(f"psnr {_fmt(m['psnr'])} ssim {m['ssim']:.6f} rel_error {m['rel_error']:.6e} "
          f"iterations {m['iterations']} stop {report['stop_reason']}")
    return report


# compare

def _rank(rows):
    order = sorted(range(len(rows)), key=lambda i: (-rows[i]["psnr"], i))
    for pos, i in enumerate(order, start=1):
        rows[i]["rank"] = pos


def cmd_compare(args):
    if not args.presets:
        raise UsageError("preset list is empty")
    for p in args.presets:
        parse_preset(p)
    original = _load_input(args.input)
    cfg = _solver_config(args)
    rows = []
    for sr in args.sr:
        mask = parse_mask(f"uniform:{sr}", original.shape, args.seed)
        digest = mask_hash(mask)
        cell = []
        for preset in args.presets:
            x, trace, seconds = _inpaint(original, mask, cfg, preset)
            m = _metrics(x, original, 1.0, trace, seconds)
            cell.append({"sr": sr, "preset": preset, **m, "mask_hash": digest})
        _rank(cell)
        rows.extend(cell)
    lines = [",".join(COMPARE_COLUMNS)]
    for row in rows:
        seconds = "" if args.no_timing else f"{row['seconds']:.3f}"
        lines.append(",".join([
            f"{row['sr']:g}", row["preset"], _fmt(row["psnr"]), f"{row['ssim']:.6f}",
            f"{row['rel_error']:.6e}", str(row["iterations"]), seconds,
            row["mask_hash"], str(row["rank"]),
        ]))
    text = "\n".join(lines) + "\n"
    if args.csv:
        Path(args.csv).write_text(text)
    sys.stdout.write(text)
    return rows


# plumbing

def _write_json(path, obj):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(_dump(obj), indent=2, sort_keys=True) + "\n")


def _persist(out, stem, report, trace):
    if not out:
        return None
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    trace_path = out / f"{stem}_trace.csv"
    trace.to_csv(trace_path)
    report["trace_file"] = str(trace_path)
    _write_json(out / f"{stem}_report.json", report)
    return str(trace_path)


def _solver_flags(p, max_iters=500, tol=1e-4):
    g = p.add_argument_group("solver")
    g.add_argument("--lambda", dest="lam", type=float, default=5.0)
    g.add_argument("--theta1", type=float, default=0.49)
    g.add_argument("--theta2", type=float, default=0.49)
    g.add_argument("--epsilon", type=float, default=0.01)
    g.add_argument("--lf", type=float, default=2.0)
    g.add_argument("--mu", type=float, default=None,
                   help="step parameter (default: smallest admissible value)")
    g.add_argument("--penalty", default="smooth23",
                   help="identity | power23 | smooth23[:EPS]")
    g.add_argument("--max-iters", type=int, default=max_iters)
    g.add_argument("--tol", type=float, default=tol,
                   help="relative-change stopping tolerance")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", default=None, help="directory for reports and traces")


def build_parser():
    parser = argparse.ArgumentParser(prog="tnnr", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    s = sub.add_parser("synth", help="random low-tubal-rank completion")
    s.add_argument("--n1", type=int, default=50)
    s.add_argument("--n2", type=int, default=50)
    s.add_argument("--n3", type=int, default=50)
    s.add_argument("--rank", type=int, default=5)
    s.add_argument("--sr", type=float, default=0.8)
    s.add_argument("--preset", default="tnnr",
                   help="tnnr | tnn | pstnn:N | ttnn:N | wtnn:EPS | wsp:P,C,EPS")
    s.add_argument("--runs", type=int, default=1)
    s.add_argument("--jobs", type=int, default=1, help="worker processes for --runs")
    s.add_argument("--tol-truth", type=float, default=1e-3,
                   help="stop once ||X - M|| / ||M|| falls below this value")
    _solver_flags(s)
    s.set_defaults(func=cmd_synth)

    i = sub.add_parser("inpaint", help="complete a tensor file")
    i.add_argument("--input", required=True, help=f"TNS3 file or {BUILTIN_TEXTURE}")
    src = i.add_mutually_exclusive_group(required=True)
    src.add_argument("--mask", help="MSK3 file")
    src.add_argument("--mask-kind", help="uniform:SR | rect:I,J,H,W | grid:P,T")
    i.add_argument("--preset", default="tnnr")
    i.add_argument("--output", default=None, help="recovered TNS3 file")
    i.add_argument("--save-mask", action="store_true", help="write mask.msk into --out")
    _solver_flags(i)
    i.set_defaults(func=cmd_inpaint)

    c = sub.add_parser("compare", help="run several presets on one image and mask")
    c.add_argument("--input", default=BUILTIN_TEXTURE)
    c.add_argument("--presets", nargs="+", default=["tnnr", "tnn"])
    c.add_argument("--sr", type=float, nargs="+", default=[0.4, 0.5, 0.6])
    c.add_argument("--csv", default=None, help="also write the table here")
    c.add_argument("--no-timing", action="store_true",
                   help="leave the seconds column empty (byte-stable output)")
    _solver_flags(c)
    c.set_defaults(func=cmd_compare)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if getattr(args, "runs", 1) < 1:
            raise UsageError("--runs must be >= 1")
        args.func(args)
    except (UsageError, ConfigError, ShapeError) as exc:
        print(f"tnnr: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DivergenceError as exc:
        print(f"tnnr: diverged: {exc}", file=sys.stderr)
        if exc.trace is not None and getattr(args, "out", None):
            Path(args.out).mkdir(parents=True, exist_ok=True)
            exc.trace.to_csv(Path(args.out) / "diverged_trace.csv")
        return EXIT_DIVERGED
    except OSError as exc:
        print(f"tnnr: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
