"""Command line surface: fit, render, eval, bench, info.

All success output is machine-readable key=value lines; failures print a
single `error=...` line on stderr and exit nonzero.
"""

from __future__ import annotations

import argparse
import sys
import time

from . import __version__


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="lig",
                                description="Fit images as 2D Gaussian clouds")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    fit = sub.add_parser("fit", help="fit an image and write a model file")
    fit.add_argument("image", help="input PNG")
    fit.add_argument("-o", "--output", required=True, help="output model path")
    fit.add_argument("--points", type=int, required=True, help="total Gaussian count")
    fit.add_argument("--ratio", type=float, default=0.125, help="coarse-level allocation ratio")
    fit.add_argument("--down", type=int, default=4, help="coarse-level downsampling factor")
    fit.add_argument("--iters", type=int, default=30000, help="iterations per level")
    fit.add_argument("--lr", type=float, default=0.018, help="Adam learning rate")
    fit.add_argument("--seed", type=int, default=0)
    fit.add_argument("--single-level", action="store_true",
                     help="fit one level with the whole budget (ablation)")
    fit.add_argument("--deterministic", action="store_true",
                     help="accepted for compatibility; fits are always deterministic")

    rnd = sub.add_parser("render", help="reconstruct a model to a PNG")
    rnd.add_argument("model")
    rnd.add_argument("-o", "--output", required=True)

    ev = sub.add_parser("eval", help="PSNR of a model against a reference image")
    ev.add_argument("model")
    ev.add_argument("reference")

    bench = sub.add_parser("bench", help="measure reconstruction throughput")
    bench.add_argument("model")
    bench.add_argument("--repeats", type=int, default=9)

    info = sub.add_parser("info", help="print model header fields")
    info.add_argument("model")
    return p


def _cmd_fit(args) -> int:
    import numpy as np

    from .imageio import load_image
    from .imageops import psnr
    from .modelio import save_model
    from .optim import FitConfig
    from .pipeline import (LogConfig, allocate_points, fit_log,
                           fit_single_level, reconstruct)

    image = load_image(args.image)
    fit_cfg = FitConfig(iters=args.iters, lr=args.lr, seed=args.seed)
    cfg = LogConfig(total_points=args.points, ratio_r=args.ratio,
                    down_factor=args.down, fit=fit_cfg)
    t0 = time.perf_counter()
    if args.single_level:
        model, hists = fit_single_level(image, cfg, return_history=True)
        print(f"n0={args.points}")
        print("n1=0")
    else:
        n0, n1 = allocate_points(args.points, args.ratio)
        model, hists = fit_log(image, cfg, return_history=True)
        print(f"n0={n0}")
        print(f"n1={n1}")
    wall = time.perf_counter() - t0
    for i, hist in enumerate(hists):
        print(f"stage{i}_final_loss={hist[-1]:.8g}")
    recon = reconstruct(model, fit_cfg)
    final_mse = float(np.mean((recon - image) ** 2))
    print(f"final_mse={final_mse:.8g}")
    print(f"psnr_db={psnr(recon, image):.4f}")
    print(f"wall_time_s={wall:.3f}")
    save_model(model, args.output)
    print(f"model={args.output}")
    return 0


def _cmd_render(args) -> int:
    from .imageio import save_image
    from .modelio import load_model
    from .pipeline import reconstruct

    model = load_model(args.model)
    save_image(reconstruct(model), args.output)
    print(f"output={args.output}")
    return 0


def _cmd_eval(args) -> int:
    from .imageio import load_image
    from .imageops import psnr
    from .modelio import load_model
    from .pipeline import reconstruct

    model = load_model(args.model)
    ref = load_image(args.reference)
    recon = reconstruct(model)
    print(f"psnr_db={psnr(recon, ref):.4f}")
    return 0


def _cmd_bench(args) -> int:
    from .modelio import load_model
    from .raster import benchmark_render

    model = load_model(args.model)
    fps = benchmark_render(model, repeats=args.repeats)
    print(f"fps={fps:.4f}")
    return 0


def _cmd_info(args) -> int:
    from .modelio import load_model

    model = load_model(args.model)
    print(f"full_w={model.full_w}")
    print(f"full_h={model.full_h}")
    print(f"channels={model.channels}")
    print(f"levels={len(model.levels)}")
    for i, lvl in enumerate(model.levels):
        print(f"n{i}={lvl.cloud.n}")
        print(f"render_w{i}={lvl.width}")
        print(f"render_h{i}={lvl.height}")
    print(f"res_min={model.res_min!r}")
    print(f"res_max={model.res_max!r}")
    return 0


_COMMANDS = {
    "fit": _cmd_fit,
    "render": _cmd_render,
    "eval": _cmd_eval,
    "bench": _cmd_bench,
    "info": _cmd_info,
}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except Exception as exc:  # every failure becomes one parsable stderr line
        msg = str(exc).replace("\n", " ")
        print(f"error={msg}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
