"""Bundled corpus generator: determinism and file structure."""

import numpy as np

from combperceptron import demo_data
from combperceptron.datasets import load_mnist


def test_corpus_is_deterministic(tmp_path):
    a = tmp_path / "a"
    b = tmp_path / "b"
    a.mkdir()
    b.mkdir()
    demo_data.write_digit_corpus(a, per_digit=15, seed=5)
    demo_data.write_digit_corpus(b, per_digit=15, seed=5)
    for name in ("digits-images-idx3-ubyte", "digits-labels-idx1-ubyte"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_corpus_counts_and_shapes(tmp_path):
    demo_data.write_digit_corpus(tmp_path, digits=(0, 6), per_digit=25, seed=1)
    raw = load_mnist(
        tmp_path / "digits-images-idx3-ubyte",
        tmp_path / "digits-labels-idx1-ubyte",
        digits_filter=(0, 6),
    )
    labels = np.array([r.label for r in raw])
    assert (labels == 0).sum() == 25
    assert (labels == 6).sum() == 25
    assert all(r.pixels.shape == (28, 28) for r in raw)
    assert all(r.pixels.dtype == np.uint8 for r in raw)
    # augmented scans still carry ink
    assert all(r.pixels.max() > 0 for r in raw)


def test_breast_mass_csv_layout(tmp_path):
    path = tmp_path / "breast-mass.csv"
    demo_data.write_breast_mass_csv(path)
    lines = path.read_text().strip().split("\n")
    assert len(lines) == 569
    first = lines[0].split(",")
    assert len(first) == 32
    assert first[0] == "100001"
    assert first[1] in ("M", "B")


def test_main_entry(tmp_path, capsys):
    demo_data.main([str(tmp_path), "--per-digit", "10", "--seed", "3"])
    assert (tmp_path / "digits-images-idx3-ubyte").exists()
    assert (tmp_path / "breast-mass.csv").exists()
    out = capsys.readouterr().out
    assert "wrote" in out
