#!/usr/bin/env python3
"""Build the MNIST IDX fixture used by the test suite.

The digits come from the `mnist` npm package (10,000 MNIST digits stored as
JSON, pixels already divided by 255 and rounded to 3 decimals). Rounding to
3 decimals is lossless for byte data, so `round(v * 255)` restores the
original pixel values.

Usage:
    python3 tools/make_mnist_fixture.py [--per-digit 300] [--out tests/data/mnist]
"""
import argparse
import io
import json
import struct
import tarfile
import urllib.request
from pathlib import Path

TARBALL = "https://registry.npmjs.org/mnist/-/mnist-1.1.0.tgz"


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--per-digit", type=int, default=300)
    ap.add_argument("--out", default="tests/data/mnist")
    ap.add_argument("--tarball", help="local copy of the npm tarball")
    args = ap.parse_args()

    if args.tarball:
        blob = Path(args.tarball).read_bytes()
    else:
        with urllib.request.urlopen(TARBALL) as resp:
            blob = resp.read()

    digits = {}
    with tarfile.open(fileobj=io.BytesIO(blob), mode="r:gz") as tar:
        for d in range(10):
            f = tar.extractfile(f"package/src/digits/{d}.json")
            flat = json.load(f)["data"]
            digits[d] = [flat[i:i + 784] for i in range(0, len(flat), 784)]

    # Interleave digits so any prefix of the file is roughly class balanced.
    images, labels = [], []
    for i in range(args.per_digit):
        for d in range(10):
            images.append(bytes(int(round(v * 255)) for v in digits[d][i]))
            labels.append(d)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    n = len(images)
    with open(out / "images-idx3-ubyte", "wb") as f:
        f.write(struct.pack(">IIII", 0x00000803, n, 28, 28))
        for img in images:
            f.write(img)
    with open(out / "labels-idx1-ubyte", "wb") as f:
        f.write(struct.pack(">II", 0x00000801, n))
        f.write(bytes(labels))
    print(f"wrote {n} images to {out}")


if __name__ == "__main__":
    main()
