#!/usr/bin/env python3
"""Convert the per-class JSON dump of Fashion-MNIST (npm package `fashion-mnist`)
into the standard IDX files read by `randpad`.

Each class file holds {"data": [[784 uint8], ...]}. The first 6000 images of
every class go to the training split, the remainder to the test split; both
splits are then shuffled with a fixed seed.
"""
import argparse
import json
import os
import random
import struct


def write_idx(prefix, images, labels):
    with open(prefix + "-images-idx3-ubyte", "wb") as f:
        f.write(struct.pack(">IIII", 0x00000803, len(images), 28, 28))
        for img in images:
            f.write(bytes(img))
    with open(prefix + "-labels-idx1-ubyte", "wb") as f:
        f.write(struct.pack(">II", 0x00000801, len(labels)))
        f.write(bytes(labels))


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("clothes_dir", help="package/src/clothes directory")
    ap.add_argument("out_dir")
    ap.add_argument("--train-per-class", type=int, default=6000)
    ap.add_argument("--seed", type=int, default=20221016)
    args = ap.parse_args()

    train, test = [], []
    for label in range(10):
        with open(os.path.join(args.clothes_dir, f"{label}.json")) as f:
            rows = json.load(f)["data"]
        # the class-0 dump carries two empty rows
        rows = [r for r in rows if len(r) == 784]
        for i, row in enumerate(rows):
            (train if i < args.train_per_class else test).append((row, label))

    rng = random.Random(args.seed)
    rng.shuffle(train)
    rng.shuffle(test)
    os.makedirs(args.out_dir, exist_ok=True)
    for name, split in (("train", train), ("t10k", test)):
        write_idx(os.path.join(args.out_dir, name), [r for r, _ in split], [l for _, l in split])
        print(f"{name}: {len(split)} images")


if __name__ == "__main__":
    main()
