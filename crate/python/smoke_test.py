"""Smoke test for the pylocblur extension module.

Build and run:
    cargo build --release -p pylocblur
    cp target/release/libpylocblur.so python/pylocblur.so
    python3 python/smoke_test.py
"""

import json
import math
import os
import sys
import tempfile

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import pylocblur as lb  # noqa: E402


def close(a, b, tol):
    assert abs(a - b) < tol, (a, b)


def pattern(w, h, k):
    data = []
    for y in range(h):
        for x in range(w):
            v = ((x * 3 + y * 5 + k * 11) % 23) / 22.0 * 0.8 + 0.1
            data += [v, 1.0 - v, 0.5 * v + 0.2]
    return lb.SrgbImage(w, h, data)


def disk(side):
    r = side / 2.0
    vals = [
        1.0 if math.hypot(x + 0.5 - r, y + 0.5 - r) < r - 1 else 0.0
        for y in range(side)
        for x in range(side)
    ]
    return lb.AlphaMask(side, side, vals)


def main():
    close(lb.crf_encode(0.5), 0.7297400528407231, 1e-12)
    close(lb.crf_decode(lb.crf_encode(0.3)), 0.3, 1e-12)
    assert lb.derive_seed(0, 0) == 0xE220A8397B1DCDAF

    a = lb.SrgbImage.filled(4, 4, [0.2] * 3)
    b = lb.SrgbImage.filled(4, 4, [0.4] * 3)
    avg = lb.average_frames([a, b])
    close(avg.pixel(0, 0)[0], 0.3192272986299987, 1e-6)

    g = lb.SrgbImage.filled(16, 16, [0.5] * 3)
    p = lb.SrgbImage.filled(16, 16, [0.5 + 16 / 255] * 3)
    assert lb.psnr(g, g) == math.inf
    close(lb.psnr(p, g), 24.0484039555606, 1e-3)
    close(lb.ssim(g, g), 1.0, 1e-9)

    m = lb.AlphaMask(2, 2, [1, 1, 0, 0])
    close(lb.dice_loss([1, 1, 0, 0], m), 0.0, 1e-12)
    close(lb.bce_loss([0.5] * 4, m), math.log(2), 1e-9)
    close(lb.combined_loss(0.01, 0.693147, 0.5), 0.18828675, 1e-12)

    f = lb.MotionField.uniform(8, 8, 2.0, 0.0)
    curve = lb.area_ratio_curve([f])
    assert len(curve.ratios) == 51 and curve.is_non_increasing()
    assert curve.ratio_at(1.9) == 1.0 and curve.ratio_at(2.0) == 0.0

    bg = pattern(96, 72, 0)
    objs = [(pattern(24, 24, k + 1), disk(24)) for k in range(4)]
    blurred, sharp, union, mid, frames = lb.synthesize_sample(bg, objs, 7)
    assert frames in (7, 9, 11, 13)
    assert mid.is_subset_of(union)
    assert (blurred.width, blurred.height) == (96, 72)

    flow = lb.estimate_flow(sharp, sharp, levels=3)
    assert flow.max_norm() < 1e-3

    with tempfile.TemporaryDirectory() as d:
        for sub in ("bg", "obj"):
            os.makedirs(os.path.join(d, sub))
        bg.write(os.path.join(d, "bg", "b0.png"))
        for k, (img, mask) in enumerate(objs):
            img.write(os.path.join(d, "obj", f"o{k}.png"))
            mask.write(os.path.join(d, "obj", f"o{k}.mask.png"))
        cfg = {
            "sample_count": 2,
            "background_dir": os.path.join(d, "bg"),
            "object_dir": os.path.join(d, "obj"),
            "output_dir": os.path.join(d, "ds"),
        }
        assert lb.synth_dataset(json.dumps(cfg)) == 2
        stats = lb.dataset_stats(os.path.join(d, "ds"))
        assert stats.is_non_increasing()
        report = json.loads(lb.evaluate_dirs(os.path.join(d, "ds", "sharp"), os.path.join(d, "ds", "sharp")))
        assert report["aggregate"]["psnr"] == "inf"

    try:
        lb.SrgbImage(2, 2, [0.0] * 3)
    except ValueError:
        pass
    else:
        raise AssertionError("shape error expected")

    print("pylocblur smoke test passed")


if __name__ == "__main__":
    main()
