#!/usr/bin/env python3
"""Degrade one HR image across all three levels and report statistics.

Writes <stem>_S{1,2,3}_k.png next to the chosen output directory and prints
the realized parameters plus PSNR-Y of each LR (upsampled back) against the
HR, giving a quick feel for how harsh each level is.

Usage: python scripts/degradation_sweep.py hr.png out_dir [--seed 0] [--repeats 2]
"""

import argparse
from pathlib import Path

import numpy as np

from degrade_forge import image_io, metrics, space
from degrade_forge.pipeline import resize, run_pipeline


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("hr")
    parser.add_argument("out_dir")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--repeats", type=int, default=2)
    args = parser.parse_args()

    hr = image_io.read_png(args.hr)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    stem = Path(args.hr).stem

    index = 0
    for level in space.Level:
        for k in range(args.repeats):
            rng = np.random.default_rng(args.seed + index)
            index += 1
            params = space.sample_params(level, rng)
            lr, trace = run_pipeline(hr, params)
            name = f"{stem}_{level.value}_{k}.png"
            image_io.write_png(out / name, lr)
            back = resize(lr, 4.0, "bicubic",
                          out_dims=(lr.shape[0] * 4, lr.shape[1] * 4))
            ref = hr[:back.shape[0], :back.shape[1]]
            psnr = metrics.psnr_y(back, ref)
            ops = ", ".join(s.op for s in trace.steps)
            print(f"{name}\tpsnr_y_vs_hr={psnr:.2f}dB")
            print(f"  ops: {ops}")
            print(f"  noise: {params.stage1.noise.kind}@{params.stage1.noise.level:.2f}"
                  f"  jpeg q{params.stage1.jpeg.quality}")


if __name__ == "__main__":
    main()
