#!/usr/bin/env python3
"""Rebuild the CIFAR-10 binary batches from the PNG dump shipped by the npm
package `tfjs-cifar10`.

Each PNG is 1024 pixels wide with one image per row (32x32, row-major RGB).
Output records are the standard <1 label byte><1024 R><1024 G><1024 B>.
"""
import argparse
import json
import os

import numpy as np
from PIL import Image


def convert(png_path, labels, out_path):
    px = np.asarray(Image.open(png_path).convert("RGB"), dtype=np.uint8)
    assert px.shape == (len(labels), 1024, 3), px.shape
    planar = px.transpose(0, 2, 1).reshape(len(labels), 3072)
    rec = np.concatenate([np.asarray(labels, dtype=np.uint8)[:, None], planar], axis=1)
    rec.tofile(out_path)
    print(f"{out_path}: {len(labels)} records")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("package_dir")
    ap.add_argument("out_dir")
    args = ap.parse_args()
    os.makedirs(args.out_dir, exist_ok=True)

    with open(os.path.join(args.package_dir, "train_lables.json")) as f:
        train_labels = json.load(f)
    with open(os.path.join(args.package_dir, "test_lables.json")) as f:
        test_labels = json.load(f)

    for i in range(5):
        convert(os.path.join(args.package_dir, f"data_batch_{i + 1}.png"),
                train_labels[i * 10000:(i + 1) * 10000],
                os.path.join(args.out_dir, f"data_batch_{i + 1}.bin"))
    convert(os.path.join(args.package_dir, "test_batch.png"), test_labels,
            os.path.join(args.out_dir, "test_batch.bin"))


if __name__ == "__main__":
    main()
