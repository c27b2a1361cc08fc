#!/usr/bin/env python3
"""Writes pHash reference fixtures to tests/data/phash/.

Each fixture is a small PNG (several pixel layouts) plus a quality-90 JPEG
re-encode. expected.json holds imagehash.phash values for every file, which
the unit tests compare against bit for bit.
"""

import json
from pathlib import Path

import imagehash
import numpy as np
from PIL import Image

ROOT = Path(__file__).resolve().parents[2]
OUT = ROOT / "tests" / "data" / "phash"


def blocks(rng, w, h, bx, by):
    pal = rng.integers(0, 256, size=(by, bx, 3), dtype=np.uint8)
    ys = (np.arange(h) * by) // h
    xs = (np.arange(w) * bx) // w
    return pal[ys][:, xs]


def gradient(w, h, angle):
    y, x = np.mgrid[0:h, 0:w].astype(np.float64)
    t = (np.cos(angle) * x / w + np.sin(angle) * y / h)
    r = (np.sin(t * 6.0) * 0.5 + 0.5) * 255
    g = (np.cos(t * 3.0 + x / 17.0) * 0.5 + 0.5) * 255
    b = ((x * y) % 97) / 96.0 * 255
    return np.stack([r, g, b], axis=-1).round().astype(np.uint8)


def blobs(rng, w, h):
    y, x = np.mgrid[0:h, 0:w].astype(np.float64)
    img = np.zeros((h, w, 3))
    for _ in range(6):
        cx, cy = rng.uniform(0, w), rng.uniform(0, h)
        s = rng.uniform(0.1, 0.4) * max(w, h)
        col = rng.uniform(0, 255, size=3)
        img += np.exp(-((x - cx) ** 2 + (y - cy) ** 2) / (2 * s * s))[..., None] * col
    return np.clip(img, 0, 255).round().astype(np.uint8)


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    for old in OUT.iterdir():
        old.unlink()
    rng = np.random.default_rng(1234)
    images = []
    for i, (w, h) in enumerate([(64, 64), (200, 150), (33, 47), (640, 360), (150, 450), (12, 9)]):
        images.append((f"blocks{i}", blocks(rng, w, h, 8, 6)))
    for i, (w, h) in enumerate([(128, 96), (300, 300), (41, 77), (500, 210)]):
        images.append((f"gradient{i}", gradient(w, h, 0.3 + i)))
    for i, (w, h) in enumerate([(256, 256), (180, 120), (90, 300), (400, 380)]):
        images.append((f"blobs{i}", blobs(rng, w, h)))
    for i, (w, h) in enumerate([(96, 96), (160, 200)]):
        images.append((f"noise{i}", rng.integers(0, 256, size=(h, w, 3), dtype=np.uint8)))
    images.append(("flat", np.full((100, 100, 3), 120, dtype=np.uint8)))

    expected = {}
    for name, arr in images:
        im = Image.fromarray(arr, "RGB")
        png = OUT / f"{name}.png"
        im.save(png, optimize=False)
        jpg = OUT / f"{name}.jpg"
        im.save(jpg, quality=90)
        for p in (png, jpg):
            expected[p.name] = str(imagehash.phash(Image.open(p)))

    # Non-RGB layouts: grayscale, palette, RGBA.
    base = blobs(rng, 120, 90)
    variants = {
        "gray.png": Image.fromarray(base, "RGB").convert("L"),
        "palette.png": Image.fromarray(base, "RGB").convert("P", palette=Image.ADAPTIVE, colors=32),
        "rgba.png": Image.fromarray(np.dstack([base, np.full(base.shape[:2], 255, np.uint8)]), "RGBA"),
    }
    for fname, im in variants.items():
        im.save(OUT / fname)
        expected[fname] = str(imagehash.phash(Image.open(OUT / fname)))

    (OUT / "expected.json").write_text(json.dumps(expected, indent=1, sort_keys=True) + "\n")
    print(f"wrote {len(expected)} fixtures")


if __name__ == "__main__":
    main()
