"""Dataset loading and preprocessing.

Two corpora are supported: IDX-format handwritten digit images (28x28 gray
levels, filtered to a two-digit subset and reduced to 7x7 block means) and
the 30-feature breast-mass CSV (id, M/B diagnosis, 30 real-valued features
per row).  Both loaders read local files only.
"""

import gzip
import struct
from dataclasses import dataclass, field

import numpy as np

from .errors import DataFormatError, EmptySelectionError, SplitSizeError
from .validation import as_float_vector

IDX_IMAGES_MAGIC = 0x00000803
IDX_LABELS_MAGIC = 0x00000801
IMAGE_SIDE = 28
GRID_SIDE = 7
BLOCK = IMAGE_SIDE // GRID_SIDE


@dataclass
class RawImage:
    """One 28x28 image with integer gray levels in 0..255."""

    pixels: np.ndarray
    label: int


@dataclass
class Sample:
    """One feature vector with a binary class label."""

    features: np.ndarray
    label: int


@dataclass
class DatasetSplit:
    train: list
    test: list
    seed: int
    provenance: dict = field(default_factory=dict)

    def arrays(self, part):
        """Return (X, y) numpy arrays for 'train' or 'test'."""
        samples = getattr(self, part)
        X = np.stack([s.features for s in samples]) if samples else np.zeros((0, 0))
        y = np.array([s.label for s in samples], dtype=np.int64)
        return X, y


def _open_maybe_gzip(path):
    with open(path, "rb") as fh:
        head = fh.read(2)
    if head == b"\x1f\x8b":
        return gzip.open(path, "rb")
    return open(path, "rb")


def _read_exact(fh, count, path, what):
    data = fh.read(count)
    if len(data) != count:
        raise DataFormatError(
            f"{path}: truncated {what} (wanted {count} bytes, got {len(data)})"
        )
    return data


def load_mnist(images_file, labels_file, digits_filter, max_per_digit=None):
    """Load IDX image/label files, keeping only labels in digits_filter.

    Images come back in file order.  max_per_digit caps how many images of
    each digit are kept (again in file order); None keeps all of them.
    Raises DataFormatError for bad magic numbers, truncated payloads or an
    image/label count mismatch, and EmptySelectionError when the filter
    matches nothing.
    """
    digits_filter = set(int(d) for d in digits_filter)

    with _open_maybe_gzip(labels_file) as fh:
        magic, n_labels = struct.unpack(">II", _read_exact(fh, 8, labels_file, "header"))
        if magic != IDX_LABELS_MAGIC:
            raise DataFormatError(
                f"{labels_file}: bad magic 0x{magic:08x}, expected 0x{IDX_LABELS_MAGIC:08x}"
            )
        labels = np.frombuffer(
            _read_exact(fh, n_labels, labels_file, "label payload"), dtype=np.uint8
        )

    with _open_maybe_gzip(images_file) as fh:
        magic, n_images, n_rows, n_cols = struct.unpack(
            ">IIII", _read_exact(fh, 16, images_file, "header")
        )
        if magic != IDX_IMAGES_MAGIC:
            raise DataFormatError(
                f"{images_file}: bad magic 0x{magic:08x}, expected 0x{IDX_IMAGES_MAGIC:08x}"
            )
        if (n_rows, n_cols) != (IMAGE_SIDE, IMAGE_SIDE):
            raise DataFormatError(
                f"{images_file}: expected {IMAGE_SIDE}x{IMAGE_SIDE} images, "
                f"got {n_rows}x{n_cols}"
            )
        payload = _read_exact(
            fh, n_images * n_rows * n_cols, images_file, "pixel payload"
        )
        pixels = np.frombuffer(payload, dtype=np.uint8).reshape(n_images, n_rows, n_cols)

    if n_images != len(labels):
        raise DataFormatError(
            f"{images_file} holds {n_images} images but {labels_file} holds "
            f"{len(labels)} labels"
        )

    kept = []
    per_digit = {d: 0 for d in digits_filter}
    for img, lab in zip(pixels, labels):
        lab = int(lab)
        if lab not in digits_filter:
            continue
        if max_per_digit is not None and per_digit[lab] >= max_per_digit:
            continue
        per_digit[lab] += 1
        kept.append(RawImage(pixels=img.copy(), label=lab))

    if not kept:
        raise EmptySelectionError(
            f"no images with label in {sorted(digits_filter)} in {images_file}"
        )
    return kept


def downsample_7x7(image, method="block_mean"):
    """Reduce a 28x28 image to a 7x7 float grid in [0, 1].

    block_mean averages each 4x4 block; stride keeps the top-left pixel of
    each block.  Both divide by 255 so full-scale ink maps to 1.0.
    """
    pixels = image.pixels if isinstance(image, RawImage) else np.asarray(image)
    if pixels.shape != (IMAGE_SIDE, IMAGE_SIDE):
        raise DataFormatError(
            f"expected a {IMAGE_SIDE}x{IMAGE_SIDE} image, got shape {pixels.shape}"
        )
    data = pixels.astype(np.float64)
    if method == "block_mean":
        grid = data.reshape(GRID_SIDE, BLOCK, GRID_SIDE, BLOCK).mean(axis=(1, 3))
    elif method == "stride":
        grid = data[::BLOCK, ::BLOCK]
    else:
        raise ValueError(f"unknown downsampling method {method!r}")
    return grid / 255.0


def flatten_column_major(grid):
    """Serialize a 7x7 grid column by column into a 49-vector.

    Entry k holds grid[r, c] with k = c*7 + r, so each column is read
    top to bottom before moving right.
    """
    grid = np.asarray(grid, dtype=np.float64)
    if grid.shape != (GRID_SIDE, GRID_SIDE):
        raise DataFormatError(f"expected a 7x7 grid, got shape {grid.shape}")
    return grid.flatten(order="F")


def unflatten_column_major(vector):
    """Inverse of flatten_column_major."""
    vector = as_float_vector(vector, "vector")
    if vector.shape != (GRID_SIDE * GRID_SIDE,):
        raise DataFormatError(f"expected 49 entries, got {vector.shape[0]}")
    return vector.reshape(GRID_SIDE, GRID_SIDE, order="F")


def image_to_features(image, method="block_mean"):
    """28x28 image -> 49-vector, the standard digit preprocessing path."""
    return flatten_column_major(downsample_7x7(image, method=method))


def load_wdbc(csv_file):
    """Load the breast-mass CSV and min-max scale each feature to [0, 1].

    Row format: id, diagnosis (M or B), then 30 numeric features.  Label 1
    means malignant.  Scaling uses the min/max over the whole file; a
    feature with zero spread cannot be scaled and raises DataFormatError
    naming the column.
    """
    ids = []
    labels = []
    rows = []
    with open(csv_file, "r", encoding="utf-8") as fh:
        for row_index, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != 32:
                raise DataFormatError(
                    f"{csv_file}: row {row_index} has {len(parts)} fields, expected 32"
                )
            diagnosis = parts[1].strip()
            if diagnosis not in ("M", "B"):
                raise DataFormatError(
                    f"{csv_file}: row {row_index} has diagnosis {diagnosis!r}, "
                    "expected 'M' or 'B'"
                )
            try:
                values = [float(v) for v in parts[2:]]
            except ValueError as exc:
                raise DataFormatError(
                    f"{csv_file}: row {row_index} has a non-numeric feature: {exc}"
                ) from None
            ids.append(parts[0].strip())
            labels.append(1 if diagnosis == "M" else 0)
            rows.append(values)

    if not rows:
        raise EmptySelectionError(f"{csv_file}: no data rows")

    X = np.array(rows, dtype=np.float64)
    lo = X.min(axis=0)
    hi = X.max(axis=0)
    degenerate = np.nonzero(hi == lo)[0]
    if degenerate.size:
        raise DataFormatError(
            f"{csv_file}: feature column {int(degenerate[0])} is constant "
            f"({lo[degenerate[0]]}); min-max scaling is undefined"
        )
    X = (X - lo) / (hi - lo)

    return [
        Sample(features=X[i], label=labels[i])
        for i in range(len(rows))
    ]


def split(samples, n_train, n_test, seed):
    """Deterministically shuffle and cut samples into train/test parts.

    The permutation depends only on the seed and the sample count; the
    first n_train shuffled samples train, the next n_test test.  Asking
    for more samples than exist raises SplitSizeError.
    """
    samples = list(samples)
    if n_train + n_test > len(samples):
        raise SplitSizeError(
            f"requested {n_train} train + {n_test} test samples but only "
            f"{len(samples)} are available"
        )
    order = np.random.default_rng(seed).permutation(len(samples))
    shuffled = [samples[i] for i in order]
    return DatasetSplit(
        train=shuffled[:n_train],
        test=shuffled[n_train : n_train + n_test],
        seed=seed,
        provenance={"n_available": len(samples), "n_train": n_train, "n_test": n_test},
    )
