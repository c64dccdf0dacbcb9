"""Deterministic demo corpora for the bundled examples and tests.

No dataset files can be fetched here, so the digit corpus is built from
scikit-learn's bundled handwritten digits (real 8x8 scans), upsampled to
28x28 and augmented with small shifts and gain jitter until each digit
has enough samples.  Files are written in the standard IDX binary layout
so the loaders exercise the real format.  The breast-mass corpus is
scikit-learn's bundled copy of the same 569-row, 30-feature table,
rewritten in the id,diagnosis,features CSV layout.
"""

import argparse
import os
import struct

import numpy as np
from sklearn.datasets import load_breast_cancer, load_digits

from .datasets import IDX_IMAGES_MAGIC, IDX_LABELS_MAGIC, IMAGE_SIDE

DEFAULT_SEED = 20260815
UPSCALE = 3  # 8x8 -> 24x24, centered in the 28x28 canvas
MAX_SHIFT = 2


def write_idx_images(path, images):
    arr = np.ascontiguousarray(np.stack(images).astype(np.uint8))
    if arr.shape[1:] != (IMAGE_SIDE, IMAGE_SIDE):
        raise ValueError(f"images must be {IMAGE_SIDE}x{IMAGE_SIDE}, got {arr.shape}")
    with open(path, "wb") as fh:
        fh.write(struct.pack(">IIII", IDX_IMAGES_MAGIC, arr.shape[0],
                             IMAGE_SIDE, IMAGE_SIDE))
        fh.write(arr.tobytes())


def write_idx_labels(path, labels):
    arr = np.asarray(labels, dtype=np.uint8)
    with open(path, "wb") as fh:
        fh.write(struct.pack(">II", IDX_LABELS_MAGIC, arr.shape[0]))
        fh.write(arr.tobytes())


def _upsample_28(img_8x8):
    big = np.kron(img_8x8, np.ones((UPSCALE, UPSCALE)))
    canvas = np.zeros((IMAGE_SIDE, IMAGE_SIDE))
    off = (IMAGE_SIDE - big.shape[0]) // 2
    canvas[off : off + big.shape[0], off : off + big.shape[1]] = big
    return canvas


def _shift(img, dy, dx):
    out = np.zeros_like(img)
    src_y = slice(max(0, -dy), IMAGE_SIDE - max(0, dy))
    src_x = slice(max(0, -dx), IMAGE_SIDE - max(0, dx))
    dst_y = slice(max(0, dy), IMAGE_SIDE - max(0, -dy))
    dst_x = slice(max(0, dx), IMAGE_SIDE - max(0, -dx))
    out[dst_y, dst_x] = img[src_y, src_x]
    return out


def make_digit_corpus(digits=(0, 6), per_digit=500, seed=DEFAULT_SEED):
    """Augmented 28x28 images and labels, per_digit of each digit."""
    base = load_digits()
    rng = np.random.default_rng(seed)
    images, labels = [], []
    for digit in digits:
        sources = base.images[base.target == digit]
        if not len(sources):
            raise ValueError(f"no source images for digit {digit}")
        for i in range(per_digit):
            img = _upsample_28(sources[i % len(sources)])
            img = _shift(img, rng.integers(-MAX_SHIFT, MAX_SHIFT + 1),
                         rng.integers(-MAX_SHIFT, MAX_SHIFT + 1))
            gain = rng.uniform(0.85, 1.0)
            # source gray levels are 0..16; stretch to the 0..255 byte range
            images.append(np.clip(np.round(img * (255.0 / 16.0) * gain),
                                  0, 255).astype(np.uint8))
            labels.append(digit)
    order = rng.permutation(len(images))
    return [images[i] for i in order], [labels[i] for i in order]


def write_digit_corpus(out_dir, digits=(0, 6), per_digit=500, seed=DEFAULT_SEED):
    images, labels = make_digit_corpus(digits, per_digit, seed)
    images_path = os.path.join(out_dir, "digits-images-idx3-ubyte")
    labels_path = os.path.join(out_dir, "digits-labels-idx1-ubyte")
    write_idx_images(images_path, images)
    write_idx_labels(labels_path, labels)
    return images_path, labels_path


def write_breast_mass_csv(path):
    data = load_breast_cancer()
    with open(path, "w", encoding="utf-8") as fh:
        for i in range(data.data.shape[0]):
            diagnosis = "M" if data.target[i] == 0 else "B"
            features = ",".join(repr(float(v)) for v in data.data[i])
            fh.write(f"{100001 + i},{diagnosis},{features}\n")
    return path


def main(argv=None):
    parser = argparse.ArgumentParser(
        description="Write the bundled demo datasets (IDX digit images and "
                    "the breast-mass CSV) into a directory."
    )
    parser.add_argument("out_dir", help="target directory (created if missing)")
    parser.add_argument("--per-digit", type=int, default=500)
    parser.add_argument("--seed", type=int, default=DEFAULT_SEED)
    args = parser.parse_args(argv)

    os.makedirs(args.out_dir, exist_ok=True)
    images, labels = write_digit_corpus(args.out_dir, per_digit=args.per_digit,
                                        seed=args.seed)
    csv = write_breast_mass_csv(os.path.join(args.out_dir, "breast-mass.csv"))
    print(f"wrote {images}")
    print(f"wrote {labels}")
    print(f"wrote {csv}")


if __name__ == "__main__":
    main()
