"""Regenerate the bundled test fixtures in src/ssinr/fixtures/.

natural64.png   'coffee' photograph from scikit-image's public-domain sample
                data, centre-cropped to 384x384 and box-averaged down 6x.
gradient64.png  synthetic smooth RGB gradient.
chord.wav       0.5 s A-major chord (55, 69.3, 82.4 Hz) at 8 kHz, PCM16 mono.

Requires scikit-image (only for the natural image).
"""
from pathlib import Path

import numpy as np

from ssinr._imageio import write_image
from ssinr.signals import write_wav

OUT = Path(__file__).resolve().parents[1] / "src" / "ssinr" / "fixtures"


def natural():
    from skimage import data

    img = data.coffee().astype(np.float64)
    h, w = img.shape[:2]
    top, left = (h - 384) // 2, (w - 384) // 2
    img = img[top:top + 384, left:left + 384]
    small = img.reshape(64, 6, 64, 6, 3).mean(axis=(1, 3))
    return np.clip(np.rint(small), 0, 255).astype(np.uint8)


def gradient():
    y, x = np.mgrid[0:64, 0:64] / 63.0
    rgb = np.stack([x, y, 0.5 * (1 - x) + 0.25 * y], axis=-1)
    return np.clip(np.rint(rgb * 255), 0, 255).astype(np.uint8)


def chord(rate=8000, seconds=0.5):
    t = np.arange(int(rate * seconds)) / rate
    sig = sum(0.3 * np.sin(2 * np.pi * f * t) for f in (55.0, 69.30, 82.41))
    return np.rint(sig * 32767).astype(np.int16), rate


if __name__ == "__main__":
    OUT.mkdir(parents=True, exist_ok=True)
    write_image(OUT / "natural64.png", natural())
    write_image(OUT / "gradient64.png", gradient())
    samples, rate = chord()
    write_wav(OUT / "chord.wav", samples, rate)
    print(f"fixtures written to {OUT}")
