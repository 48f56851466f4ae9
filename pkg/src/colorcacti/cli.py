"""Command line: ``simulate``, ``invert``, ``evaluate`` and ``demo``.

Exit codes: 0 success, 1 usage/config error, 2 data error, 3 numerical failure.
"""

import argparse
import logging
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import io
from .config import build_config, dump_config, load_config
from .errors import CactiError, ConfigError, DimensionError, IngestionError
from .forward import MaskStack, NoiseModel, build_mask_stack, forward_measure, gen_mask, horizontal_schedule
from .pipeline import ModelSpec, invert_channel
from .synthetic import moving_color_video, moving_pattern_video
from .video import ColorVideo, demosaic_video, merge_bayer, psnr, rgb_to_bayer, split_bayer
from .vb import HyperParams, InferenceOptions

log = logging.getLogger("colorcacti")

PRESETS = {"tiny": (32, 32, 8), "small": (64, 64, 8), "large": (256, 256, 8)}
BAYER_CHANNELS = ("R", "G1", "G2", "B")


def _mask_stack(cfg, n_x, n_y):
    if cfg.masks:
        arr = io.read_container(cfg.masks)[..., 0]
        if arr.shape[:2] != (n_x, n_y) or arr.shape[2] != cfg.nt:
            raise DimensionError(
                f"{cfg.masks}: mask stack {arr.shape[:3]} does not match sensor {(n_x, n_y)} x nt={cfg.nt}"
            )
        return MaskStack(arr)
    schedule = io.load_schedule(cfg.schedule) if cfg.schedule else horizontal_schedule(cfg.nt)
    if len(schedule) != cfg.nt:
        raise ConfigError(f"schedule: {len(schedule)} shifts given but nt = {cfg.nt}")
    if cfg.mask:
        pattern = io.load_mask(cfg.mask)
    else:
        max_r = max(r for r, _ in schedule)
        max_s = max(s for _, s in schedule)
        pattern = gen_mask(n_x + max_r, n_y + max_s, cfg.density, cfg.seed)
    return build_mask_stack(pattern, schedule, n_x, n_y)


def cmd_simulate(cfg):
    """Measure a video: one coded snapshot per ``nt`` frames, plus ground truth."""
    if not cfg.video:
        raise ConfigError("video: required for simulate")
    cv = io.load_video(cfg.video)
    n_x, n_y, n_frames = cv.shape
    n_meas = n_frames // cfg.nt
    if n_meas == 0:
        raise DimensionError(f"{cfg.video}: {n_frames} frames is fewer than nt = {cfg.nt}")
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)

    masks = _mask_stack(cfg, n_x, n_y)
    io.write_container(out / "masks.cacti", masks.frames)
    if masks.schedule:
        io.save_schedule(out / "schedule.csv", masks.schedule)

    if cfg.color == "bayer":
        sensor = rgb_to_bayer(cv, cfg.pattern)
    else:
        sensor = cv.luminance()

    meas_files, truth_files = [], []
    for m in range(n_meas):
        frames = slice(m * cfg.nt, (m + 1) * cfg.nt)
        noise = NoiseModel(cfg.noise_sigma, seed=cfg.seed + m)
        y = forward_measure(sensor[:, :, frames], masks, noise).data
        meas_files.append(io.write_container(out / f"measurement_{m:03d}.cacti", y).name)
        if cfg.color == "bayer":
            truth = ColorVideo(cv.r[:, :, frames], cv.g[:, :, frames], cv.b[:, :, frames]).stack()
            io.write_container(out / f"truth_mosaic_{m:03d}.cacti", sensor[:, :, frames])
        else:
            truth = sensor[:, :, frames]
        truth_files.append(io.write_container(out / f"truth_{m:03d}.cacti", truth).name)

    run_cfg = {
        "masks": "masks.cacti",
        "measurements": meas_files,
        "truth": truth_files,
        "nt": cfg.nt,
        "color": cfg.color,
        "pattern": cfg.pattern,
        "basis_x": cfg.basis_x,
        "basis_y": cfg.basis_y,
        "basis_t": cfg.basis_t,
        "levels": cfg.levels,
        "taps": cfg.taps,
        "seed": cfg.seed,
        "out": ".",
    }
    dump_config(out / "run.cfg", run_cfg)
    log.info("simulate: %d measurement(s) of %dx%d, nt=%d -> %s", n_meas, n_x, n_y, cfg.nt, out)
    return {"measurements": [out / f for f in meas_files], "truth": [out / f for f in truth_files],
            "config": out / "run.cfg"}


def _inference_options(cfg):
    return InferenceOptions(max_sweeps=cfg.max_sweeps, tol=cfg.tol, tau_update=cfg.tau_update)


def _invert_one(y, masks, spec, cfg):
    shape = masks.shape
    counts = spec.tree(shape).level_counts
    hyper = HyperParams.from_level_counts(counts, a0=cfg.a0, b0=cfg.b0, c0=cfg.c0, d0=cfg.d0)
    return invert_channel(y, masks, spec, _inference_options(cfg), hyper)


def cmd_invert(cfg):
    """Reconstruct every listed measurement; writes frames, baselines and traces."""
    if not cfg.measurements:
        raise ConfigError("measurements: at least one measurement file is required")
    spec = ModelSpec(cfg.basis, cfg.levels, cfg.taps)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    results = []
    for m, path in enumerate(cfg.measurements):
        y = io.read_container(path)[:, :, 0, 0]
        n_x, n_y = y.shape
        masks = _mask_stack(cfg, n_x, n_y)
        if cfg.dump_levels and m == 0:
            shape = masks.shape if cfg.color == "mono" else (n_x // 2, n_y // 2, cfg.nt)
            io.write_level_counts(out / "levels.csv", spec.tree(shape).level_counts)

        if cfg.color == "bayer":
            ys = split_bayer(y, cfg.pattern)
            ms = [MaskStack(f) for f in split_bayer(masks.frames, cfg.pattern)]
            with ThreadPoolExecutor(max_workers=max(1, cfg.workers)) as pool:
                chans = list(pool.map(lambda a: _invert_one(a[0], a[1], spec, cfg), zip(ys, ms)))
            recon = demosaic_video(merge_bayer([c.cube for c in chans], cfg.pattern), cfg.pattern).stack()
            base = demosaic_video(merge_bayer([c.baseline for c in chans], cfg.pattern), cfg.pattern).stack()
            for name, c in zip(BAYER_CHANNELS, chans):
                io.write_trace_csv(out / f"diag_{m:03d}_{name}.csv", c.trace)
            converged = all(c.converged for c in chans)
        else:
            res = _invert_one(y, masks, spec, cfg)
            recon, base = res.cube, res.baseline
            io.write_trace_csv(out / f"diag_{m:03d}.csv", res.trace)
            converged = res.converged
        io.write_container(out / f"recon_{m:03d}.cacti", recon)
        io.write_container(out / f"baseline_{m:03d}.cacti", base)
        video = ColorVideo.from_stack(recon) if recon.ndim == 4 else recon
        io.save_frames(out / f"recon_{m:03d}", video)
        log.info("invert: measurement %d done (converged=%s)", m, converged)
        results.append({"recon": out / f"recon_{m:03d}.cacti", "baseline": out / f"baseline_{m:03d}.cacti"})
    return results


def _load_any(path):
    p = Path(path)
    if not p.exists():
        raise IngestionError(f"no such file or directory: {p}")
    if p.is_dir():
        cv = io.load_video(p)
        return cv.stack()
    arr = io.read_container(p)
    return arr[..., 0] if arr.shape[3] == 1 else arr


def cmd_evaluate(cfg, csv_path=None):
    """PSNR of ``recon`` against the first ``truth`` entry; writes ``frame,psnr_db``."""
    if not cfg.recon or not cfg.truth:
        raise ConfigError("evaluate needs recon and truth")
    a = _load_any(cfg.recon)
    b = _load_any(cfg.truth[0])
    report = psnr(a, b, peak=cfg.peak)
    csv_path = Path(csv_path) if csv_path else Path(cfg.out) / "psnr.csv"
    csv_path.parent.mkdir(parents=True, exist_ok=True)
    io.write_psnr_csv(csv_path, report)
    return report


def cmd_demo(cfg):
    """Synthetic simulate -> invert -> evaluate; returns (recon PSNR, baseline PSNR)."""
    if cfg.preset not in PRESETS:
        raise ConfigError(f"preset: expected one of {sorted(PRESETS)}, got {cfg.preset!r}")
    n_x, n_y, n_t = PRESETS[cfg.preset]
    n_t = cfg.nt if cfg.nt else n_t
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    if cfg.color == "bayer":
        cv = moving_color_video(n_x, n_y, n_t, seed=cfg.seed)
    else:
        cv = ColorVideo.gray(moving_pattern_video(n_x, n_y, n_t, seed=cfg.seed))
    video_path = io.write_container(out / "video.cacti", cv.stack())

    sim_cfg = build_config(vars(cfg) | {"video": str(video_path), "out": str(out / "sim")})
    sim = cmd_simulate(sim_cfg)
    inv_cfg = build_config(
        vars(cfg)
        | {"measurements": [str(p) for p in sim["measurements"]], "masks": str(out / "sim" / "masks.cacti"),
           "out": str(out / "recon")}
    )
    inv = cmd_invert(inv_cfg)
    recon_db, base_db = [], []
    for m, r in enumerate(inv):
        truth = [str(sim["truth"][m])]
        ev = build_config(vars(cfg) | {"recon": str(r["recon"]), "truth": truth, "out": str(out)})
        recon_db.append(cmd_evaluate(ev, out / f"psnr_{m:03d}.csv").mean)
        ev.recon = str(r["baseline"])
        base_db.append(cmd_evaluate(ev, out / f"psnr_baseline_{m:03d}.csv").mean)
    return float(np.mean(recon_db)), float(np.mean(base_db))


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key = value configuration file")
    common.add_argument("--seed", type=int)
    common.add_argument("--nt", type=int)
    common.add_argument("--mask", help="mask pattern (.png or ASCII 0/1)")
    common.add_argument("--masks", help="mask stack container")
    common.add_argument("--schedule", help="shift schedule CSV (k,r,s)")
    common.add_argument("--basis-x", dest="basis_x", choices=("db8", "dct"))
    common.add_argument("--basis-y", dest="basis_y", choices=("db8", "dct"))
    common.add_argument("--basis-t", dest="basis_t", choices=("db8", "dct"))
    common.add_argument("--levels", type=int)
    common.add_argument("--taps", type=int, choices=(8, 16), help="Daubechies filter length")
    common.add_argument("--noise-sigma", dest="noise_sigma", type=float)
    common.add_argument("--color", choices=("mono", "bayer"))
    common.add_argument("--pattern", choices=("RGGB", "BGGR", "GRBG", "GBRG"))
    common.add_argument("--out")
    common.add_argument("--tau-update", dest="tau_update", choices=("verbatim", "mgp"))
    common.add_argument("--max-sweeps", dest="max_sweeps", type=int)
    common.add_argument("--tol", type=float)
    common.add_argument("--trace", action="store_true", default=None, help="log every sweep")
    common.add_argument("--dump-levels", dest="dump_levels", action="store_true", default=None,
                        help="write the tree level histogram as levels.csv")

    parser = _Parser(prog="colorcacti", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sim = sub.add_parser("simulate", parents=[common], help="simulate coded snapshots from a video")
    sim.add_argument("--video")
    sim.add_argument("--density", type=float)
    inv = sub.add_parser("invert", parents=[common], help="reconstruct frames from snapshots")
    inv.add_argument("--measurement", action="append", dest="measurements")
    inv.add_argument("--workers", type=int)
    ev = sub.add_parser("evaluate", parents=[common], help="PSNR of a reconstruction")
    ev.add_argument("recon_path", nargs="?")
    ev.add_argument("truth_path", nargs="?")
    ev.add_argument("--peak", type=float)
    ev.add_argument("--csv", help="output CSV (default <out>/psnr.csv)")
    demo = sub.add_parser("demo", parents=[common], help="synthetic end-to-end run")
    demo.add_argument("--preset", choices=sorted(PRESETS))
    return parser


_NOT_CONFIG = {"command", "config", "csv", "recon_path", "truth_path"}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    overrides = {k: v for k, v in vars(args).items() if k not in _NOT_CONFIG}
    logging.basicConfig(level=logging.INFO, format="%(message)s")
    try:
        file_values = load_config(args.config) if args.config else {}
        if args.command == "evaluate":
            if args.recon_path:
                overrides["recon"] = args.recon_path
            if args.truth_path:
                overrides["truth"] = [args.truth_path]
        cfg = build_config(file_values, overrides)
        if cfg.trace:
            logging.getLogger("colorcacti").setLevel(logging.DEBUG)

        if args.command == "simulate":
            cmd_simulate(cfg)
        elif args.command == "invert":
            cmd_invert(cfg)
        elif args.command == "evaluate":
            report = cmd_evaluate(cfg, args.csv)
            print(f"mean PSNR: {report.mean:.4f} dB")
        elif args.command == "demo":
            rec, base = cmd_demo(cfg)
            print(f"mean PSNR (reconstruction): {rec:.4f} dB")
            print(f"mean PSNR (backprojection): {base:.4f} dB")
    except CactiError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except (TypeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
