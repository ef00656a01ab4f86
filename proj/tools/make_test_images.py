#!/usr/bin/env python3
"""Regenerate the 256x256 fixtures under tests/data from scikit-image's bundled samples."""
import pathlib

import numpy as np
from PIL import Image
from skimage import data

OUT = pathlib.Path(__file__).resolve().parent.parent / "tests" / "data"


def half(img):
    h, w = img.shape[:2]
    img = img[: h - h % 2, : w - w % 2].astype(np.float64)
    small = img.reshape(h // 2, 2, w // 2, 2, *img.shape[2:]).mean(axis=(1, 3))
    return np.clip(np.rint(small), 0, 255).astype(np.uint8)


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    Image.fromarray(half(data.camera())).save(OUT / "cameraman256.pgm")
    Image.fromarray(half(data.astronaut())).save(OUT / "astronaut256.ppm")


if __name__ == "__main__":
    main()
