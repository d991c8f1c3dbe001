"""Regenerate the bundled grayscale corpus from scikit-image sample data.

camera, moon and coins ship with scikit-image and carry no copyright
restrictions. Each image is box-downsampled to a desk-scale size and
written as 8-bit binary PGM (P5).
"""
import pathlib

import numpy as np
from skimage import data

ROOT = pathlib.Path(__file__).resolve().parent.parent / "data"


def box_down(img, factor):
    h, w = img.shape
    h -= h % factor
    w -= w % factor
    blocks = img[:h, :w].astype(np.float64).reshape(h // factor, factor, w // factor, factor)
    return np.clip(np.rint(blocks.mean(axis=(1, 3))), 0, 255).astype(np.uint8)


def write_pgm(path, img):
    h, w = img.shape
    with open(path, "wb") as f:
        f.write(b"P5\n%d %d\n255\n" % (w, h))
        f.write(img.tobytes())


def main():
    (ROOT / "corpus").mkdir(parents=True, exist_ok=True)
    (ROOT / "patches").mkdir(parents=True, exist_ok=True)
    write_pgm(ROOT / "corpus" / "camera_256.pgm", box_down(data.camera(), 2))
    write_pgm(ROOT / "corpus" / "moon_256.pgm", box_down(data.moon(), 2))
    write_pgm(ROOT / "corpus" / "coins_256.pgm", data.coins()[:256, :256].copy())
    write_pgm(ROOT / "patches" / "camera_64.pgm", box_down(data.camera(), 8))


if __name__ == "__main__":
    main()
