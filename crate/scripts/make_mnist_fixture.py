"""Build a small zeros/ones MNIST subset in IDX format.

Source: the `mnist` npm package (v1.1.0), whose src/digits/{0,1}.json hold
real MNIST digits as flattened 28x28 arrays scaled to [0, 1] with three
decimals. Intensities are recovered exactly as round(v * 255).

Usage: python3 scripts/make_mnist_fixture.py <path/to/package/src/digits> <out_dir>
"""
import json
import struct
import sys
from pathlib import Path

TRAIN_PER_DIGIT = 34


def load(digits_dir, d):
    raw = json.load(open(Path(digits_dir) / f"{d}.json"))["data"]
    assert len(raw) % 784 == 0
    px = [min(255, max(0, round(v * 255))) for v in raw]
    return [bytes(px[i:i + 784]) for i in range(0, len(px), 784)]


def interleave(a, b):
    out = []
    for i in range(max(len(a), len(b))):
        if i < len(a):
            out.append(a[i])
        if i < len(b):
            out.append(b[i])
    return out


def write(out_dir, stem, items):
    imgs = b"".join(img for img, _ in items)
    labs = bytes(lab for _, lab in items)
    (out_dir / f"{stem}-images-idx3-ubyte").write_bytes(
        struct.pack(">IIII", 0x803, len(items), 28, 28) + imgs)
    (out_dir / f"{stem}-labels-idx1-ubyte").write_bytes(
        struct.pack(">II", 0x801, len(items)) + labs)


def main():
    digits_dir, out_dir = sys.argv[1], Path(sys.argv[2])
    out_dir.mkdir(parents=True, exist_ok=True)
    zeros = [(img, 0) for img in load(digits_dir, 0)]
    ones = [(img, 1) for img in load(digits_dir, 1)]
    train = interleave(zeros[:TRAIN_PER_DIGIT], ones[:TRAIN_PER_DIGIT])
    test = interleave(zeros[TRAIN_PER_DIGIT:], ones[TRAIN_PER_DIGIT:])
    write(out_dir, "train", train)
    write(out_dir, "t10k", test)
    print(f"train={len(train)} test={len(test)}")


if __name__ == "__main__":
    main()
