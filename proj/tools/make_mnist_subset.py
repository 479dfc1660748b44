#!/usr/bin/env python3
"""Build the bundled MNIST-5k subset in IDX format.

Source: the 5,000-image MNIST sample shipped inside the mlxtend wheel
(mlxtend/data/data/mnist_5k.csv.gz, rows = 784 pixels then the label).
Each digit contributes 400 training and 100 test images; selection within a
digit is a fixed NumPy permutation so the output is reproducible.

    pip download --no-deps -d /tmp/whl mlxtend
    python3 tools/make_mnist_subset.py /tmp/whl/mlxtend-*.whl data/mnist-5k
"""
import gzip
import io
import struct
import sys
import zipfile
from pathlib import Path

import numpy as np


def write_idx_images(path, images):
    n, rows, cols = images.shape
    header = struct.pack(">IIII", 0x00000803, n, rows, cols)
    with gzip.GzipFile(path, "wb", mtime=0) as f:
        f.write(header + images.astype(np.uint8).tobytes())


def write_idx_labels(path, labels):
    header = struct.pack(">II", 0x00000801, len(labels))
    with gzip.GzipFile(path, "wb", mtime=0) as f:
        f.write(header + labels.astype(np.uint8).tobytes())


def main():
    wheel, out = Path(sys.argv[1]), Path(sys.argv[2])
    out.mkdir(parents=True, exist_ok=True)
    raw = zipfile.ZipFile(wheel).read("mlxtend/data/data/mnist_5k.csv.gz")
    table = np.loadtxt(io.StringIO(gzip.decompress(raw).decode()), delimiter=",")
    pixels, labels = table[:, :-1].astype(np.uint8), table[:, -1].astype(int)

    rng = np.random.default_rng(20170807)
    train_idx, test_idx = [], []
    for c in range(10):
        idx = rng.permutation(np.flatnonzero(labels == c))
        train_idx.extend(idx[:400])
        test_idx.extend(idx[400:500])
    train_idx = rng.permutation(train_idx)
    test_idx = rng.permutation(test_idx)

    write_idx_images(out / "train-images-idx3-ubyte.gz", pixels[train_idx].reshape(-1, 28, 28))
    write_idx_labels(out / "train-labels-idx1-ubyte.gz", labels[train_idx])
    write_idx_images(out / "t10k-images-idx3-ubyte.gz", pixels[test_idx].reshape(-1, 28, 28))
    write_idx_labels(out / "t10k-labels-idx1-ubyte.gz", labels[test_idx])


if __name__ == "__main__":
    main()
