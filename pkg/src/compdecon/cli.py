"""Command line entry point: ``compdecon <subcommand> [--config PATH] [--out DIR] [--seed U64]``.

Exit codes: 0 success, 1 I/O failure, 2 configuration or input error,
3 numerical failure (solver divergence).
"""

import argparse
import csv
import json
import logging
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__, metrics, pipeline, prox
from .cdm import read_cdm, write_cdm, write_pgm
from .config import dump_config, load_config
from .errors import ConfigError, DimensionError, NumericalError, ParameterError, StrategyError
from .linops import build_measurement
from .metrics import MetricReport
from .pipeline import Measurement

log = logging.getLogger("compdecon")

EXIT_OK = 0
EXIT_IO = 1
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3

OPERATOR_FILE = "operator.json"
TRACE_HEADER = ["iter", "objective", "rel_change", "nmse", "seconds"]
SWEEP_HEADER = MetricReport.header() + ["status"]


def _num(value):
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _outdir(cfg):
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _input(args, name, out):
    explicit = getattr(args, name, None)
    return Path(explicit) if explicit else out / f"{name}.cdm"


def _write_phantom(out, data):
    for name in ("trf", "psf", "rf", "mask"):
        write_cdm(out / f"{name}.cdm", getattr(data, name))


def cmd_phantom(cfg, args):
    out = _outdir(cfg)
    data = pipeline.make_phantom_data(cfg)
    _write_phantom(out, data)
    log.info("wrote phantom files to %s", out)


def cmd_compress(cfg, args):
    out = _outdir(cfg)
    rf = read_cdm(_input(args, "rf", out))
    if rf.shape != (cfg.rows, cfg.cols):
        raise DimensionError(f"rf has shape {rf.shape}, config says {(cfg.rows, cfg.cols)}")
    meas = pipeline.compress(cfg, rf)
    write_cdm(out / "y.cdm", meas.y)
    record = meas.record()
    record.update(rows=cfg.rows, cols=cfg.cols, master_seed=cfg.seed)
    (out / OPERATOR_FILE).write_text(json.dumps(record, sort_keys=True, indent=1) + "\n")
    log.info("m = %d measurements of n = %d", meas.operator.m, meas.operator.n)


def _load_measurement(cfg, args, out):
    record_path = Path(args.operator) if getattr(args, "operator", None) else out / OPERATOR_FILE
    try:
        record = json.loads(record_path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed operator record {record_path}: {exc}") from None
    if (record.get("rows"), record.get("cols")) != (cfg.rows, cfg.cols):
        raise ConfigError("operator record grid does not match the config")
    y = read_cdm(_input(args, "y", out)).ravel()
    op = build_measurement(record)
    if y.size != op.m:
        raise DimensionError(f"y has {y.size} entries, operator expects {op.m}")
    snr = record.get("snr_db", cfg.snr_db)
    return Measurement(y, op, math.inf if snr == "inf" else float(snr))


def cmd_reconstruct(cfg, args):
    out = _outdir(cfg)
    meas = _load_measurement(cfg, args, out)
    psf = read_cdm(_input(args, "psf", out))
    truth_path = _input(args, "trf", out)
    truth = read_cdm(truth_path) if truth_path.exists() else None
    result = pipeline.reconstruct(cfg, psf, meas, ground_truth=truth)
    write_cdm(out / "xhat.cdm", result.x)
    with open(out / "trace.csv", "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(TRACE_HEADER)
        for entry in result.trace:
            writer.writerow([_num(v) for v in entry])
    write_pgm(out / "bmode.pgm", metrics.envelope_bmode(result.x, cfg.dynamic_range_db))
    log.info("%d iterations, converged=%s", result.iterations, result.converged)


def _trace_summary(path):
    if not path.exists():
        return None, None
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows:
        return 0, None
    seconds = rows[-1]["seconds"]
    return len(rows), float(seconds) if seconds else None


def _append_row(path, header, row):
    new = not path.exists() or path.stat().st_size == 0
    with open(path, "a", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        if new:
            writer.writerow(header)
        writer.writerow(row)


def cmd_evaluate(cfg, args):
    out = _outdir(cfg)
    trf = read_cdm(_input(args, "trf", out))
    xhat = read_cdm(_input(args, "xhat", out))
    if trf.shape != xhat.shape:
        raise DimensionError(f"trf {trf.shape} and xhat {xhat.shape} differ in size")
    iterations, seconds = _trace_summary(out / "trace.csv")
    report = pipeline.evaluate(cfg, trf, xhat, iterations=iterations, seconds=seconds)
    _append_row(out / "metrics.csv", MetricReport.header(), report.row())
    print(report.to_csv(with_header=True), end="")


def _cell_name(ratio, p):
    return f"xhat_r{ratio!r}_p{p!r}.cdm"


def _sweep_cell(cfg, data, ratio, p):
    """Run one cell; failures become an in-row status instead of raising."""
    try:
        report, xhat = pipeline.run_cell(cfg, data, ratio, p)
    except (NumericalError, ValueError) as exc:
        blank = MetricReport(None, None, None, cs_ratio=ratio, p=p, alpha=cfg.alpha,
                             mu=cfg.mu, beta=cfg.beta)
        return blank, None, f"error: {type(exc).__name__}: {exc}"
    # wall-clock time is left out so reruns are byte-identical
    report.seconds = None
    return report, xhat, "ok"


def cmd_sweep(cfg, args):
    out = _outdir(cfg)
    data = pipeline.make_phantom_data(cfg)
    _write_phantom(out, data)
    cells = [(r, p) for r in cfg.ratios for p in cfg.ps]
    if cfg.workers > 1 and len(cells) > 1:
        with ProcessPoolExecutor(max_workers=min(cfg.workers, len(cells))) as pool:
            futures = [pool.submit(_sweep_cell, cfg, data, r, p) for r, p in cells]
            results = [f.result() for f in futures]
    else:
        results = [_sweep_cell(cfg, data, r, p) for r, p in cells]
    with open(out / "sweep.csv", "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(SWEEP_HEADER)
        for (ratio, p), (report, xhat, status) in zip(cells, results):
            if xhat is not None:
                write_cdm(out / _cell_name(ratio, p), xhat)
            writer.writerow(report.row() + [status])
            log.info("cell ratio=%s p=%s: %s", ratio, p, status)


def cmd_prox_curve(cfg, args):
    out = _outdir(cfg)
    xs = np.linspace(cfg.prox_xmin, cfg.prox_xmax, cfg.prox_points)
    curves = prox.prox_curve(xs, cfg.prox_k, cfg.prox_ps)
    with open(out / "prox_curve.csv", "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["x"] + [f"p={p!r}" for p in cfg.prox_ps])
        for x, row in zip(xs, curves):
            writer.writerow([repr(float(x))] + [repr(float(v)) for v in row])


def cmd_config(cfg, args):
    sys.stdout.write(dump_config(cfg))


COMMANDS = {
    "phantom": (cmd_phantom, "simulate TRF, PSF and RF images"),
    "compress": (cmd_compress, "measure the RF image and add noise"),
    "reconstruct": (cmd_reconstruct, "run the SDMM solver on y.cdm"),
    "evaluate": (cmd_evaluate, "append quality metrics of xhat vs trf"),
    "sweep": (cmd_sweep, "run the CS-ratio x p grid"),
    "prox-curve": (cmd_prox_curve, "tabulate lp proximal operators"),
    "config": (cmd_config, "print the effective configuration"),
}

FILE_OPTIONS = {
    "compress": ["rf"],
    "reconstruct": ["y", "psf", "trf", "operator"],
    "evaluate": ["trf", "xhat"],
}


def _seed(text):
    value = int(text, 0)
    if not 0 <= value < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="key = value configuration file")
    common.add_argument("--out", metavar="DIR", help="output (and default input) directory")
    common.add_argument("--seed", metavar="U64", type=_seed, help="master seed")
    common.add_argument("-v", "--verbose", action="store_true")
    parser = argparse.ArgumentParser(
        prog="compdecon", description="Compressive deconvolution of ultrasound RF images.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_text) in COMMANDS.items():
        p = sub.add_parser(name, parents=[common], help=help_text)
        for opt in FILE_OPTIONS.get(name, []):
            p.add_argument(f"--{opt}", metavar="PATH", help=f"override the {opt} input file")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        cfg = load_config(args.config, seed=args.seed, out=args.out)
        COMMANDS[args.command][0](cfg, args)
    except (ConfigError, ParameterError, DimensionError, StrategyError) as exc:
        print(f"compdecon: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        where = f" at iteration {exc.iteration}" if getattr(exc, "iteration", None) else ""
        print(f"compdecon: numerical failure{where}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"compdecon: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
