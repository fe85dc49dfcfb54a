"""Turn images and audio into (coordinate, value) datasets and back."""
from __future__ import annotations

import wave
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import _imageio
from .errors import ContractViolation, IngestionError

FIXTURES = Path(__file__).parent / "fixtures"
LUMA = np.array([0.299, 0.587, 0.114])
PIXEL_RANGE = (0.0, 255.0)
PCM16_RANGE = (-32768.0, 32767.0)


@dataclass(frozen=True)
class SignalMeta:
    kind: str                       # "image" or "audio"
    height: int = 0
    width: int = 0
    channels: int = 0
    sample_count: int = 0
    sample_rate: int = 0
    source: str = ""

    @property
    def size(self):
        return self.height * self.width if self.kind == "image" else self.sample_count

    def describe(self):
        if self.kind == "image":
            return {"kind": "image", "height": self.height, "width": self.width,
                    "channels": self.channels, "source": self.source}
        return {"kind": "audio", "sample_count": self.sample_count,
                "sample_rate": self.sample_rate, "source": self.source}


@dataclass(frozen=True)
class NormRecord:
    """How raw samples were mapped: ``source_range`` -> ``output_range``."""
    input_range: tuple
    output_range: tuple
    source_range: tuple
    mean: float

    @property
    def output_span(self):
        return self.output_range[1] - self.output_range[0]

    def normalize(self, raw):
        (s0, s1), (o0, o1) = self.source_range, self.output_range
        return o0 + (np.asarray(raw, dtype=np.float64) - s0) * ((o1 - o0) / (s1 - s0))

    def denormalize(self, values):
        (s0, s1), (o0, o1) = self.source_range, self.output_range
        return s0 + (np.asarray(values, dtype=np.float64) - o0) * ((s1 - s0) / (o1 - o0))


@dataclass
class SignalDataset:
    coords: np.ndarray     # N x in_dim
    targets: np.ndarray    # N x out_dim
    meta: SignalMeta
    norm: NormRecord

    def to_unit(self, values):
        """Rescale values in the training range to [0, 1] (for metrics)."""
        o0, o1 = self.norm.output_range
        return (np.asarray(values, dtype=np.float64) - o0) / (o1 - o0)

    def as_image(self, values):
        if self.meta.kind != "image":
            raise ContractViolation("as_image called on a non-image dataset")
        return np.asarray(values).reshape(self.meta.height, self.meta.width, self.meta.channels)

    def shifted_copy(self, shift):
        """Same dataset with ``shift`` subtracted from every target."""
        return SignalDataset(self.coords, self.targets - shift, self.meta, self.norm)


def _axis(n, lo, hi):
    if n == 1:
        return np.array([(lo + hi) / 2.0])
    return np.linspace(lo, hi, n)


def make_grid(height, width, range=(-1.0, 1.0)):
    """Row-major grid of (y, x) pairs, both axes spanning ``range`` inclusive."""
    if int(height) < 1 or int(width) < 1:
        raise ContractViolation(f"grid dimensions must be >= 1, got {height}x{width}")
    lo, hi = range
    ys = _axis(int(height), lo, hi)
    xs = _axis(int(width), lo, hi)
    yy, xx = np.meshgrid(ys, xs, indexing="ij")
    return np.stack([yy.ravel(), xx.ravel()], axis=1)


def center_crop(pixels, size):
    h, w = pixels.shape[:2]
    ch, cw = (size, size) if np.isscalar(size) else size
    if ch > h or cw > w:
        raise ContractViolation(f"cannot crop {h}x{w} image to {ch}x{cw}")
    top, left = (h - ch) // 2, (w - cw) // 2
    return pixels[top:top + ch, left:left + cw]


def resolve_path(path):
    """Return ``path``, falling back to the bundled fixture of the same name."""
    p = Path(path)
    if p.exists():
        return p
    bundled = FIXTURES / p.name
    if bundled.exists():
        return bundled
    raise IngestionError(f"{path}: no such file")


def dataset_from_pixels(pixels, channels=None, output_range=(-1.0, 1.0), input_range=(-1.0, 1.0), source=""):
    pix = np.asarray(pixels)
    if pix.ndim == 2:
        pix = pix[..., None]
    if channels == "gray" and pix.shape[2] == 3:
        pix = pix.astype(np.float64) @ LUMA
        pix = pix[..., None]
    elif channels == "rgb" and pix.shape[2] == 1:
        pix = np.repeat(pix, 3, axis=2)
    elif channels not in (None, "rgb", "gray"):
        raise ContractViolation(f"channels must be 'rgb' or 'gray', got {channels!r}")
    h, w, c = pix.shape
    lo, hi = output_range
    if not hi > lo:
        raise ContractViolation(f"output range must be increasing, got {output_range}")
    norm = NormRecord(tuple(input_range), (float(lo), float(hi)), PIXEL_RANGE, 0.0)
    targets = norm.normalize(pix.reshape(h * w, c))
    norm = NormRecord(norm.input_range, norm.output_range, PIXEL_RANGE, float(targets.mean()))
    meta = SignalMeta("image", height=h, width=w, channels=c, source=str(source))
    return SignalDataset(make_grid(h, w, input_range), targets, meta, norm)


def load_image(path, channels=None, output_range=(-1.0, 1.0), input_range=(-1.0, 1.0), crop=None):
    """Load an 8-bit PNG/PPM/PGM as a coordinate dataset.

    Pixels map linearly from [0, 255] to ``output_range``; coordinates span
    ``input_range``. ``channels='gray'`` converts RGB with Rec.601 luma.
    """
    path = resolve_path(path)
    pix = _imageio.read_image(path)
    if crop:
        pix = center_crop(pix, crop)
    return dataset_from_pixels(pix, channels, output_range, input_range, source=path.name)


def load_audio(path, max_seconds=None, output_range=(-1.0, 1.0), input_range=(-1.0, 1.0)):
    """Load mono 16-bit PCM WAV; samples map from [-32768, 32767] to ``output_range``."""
    path = resolve_path(path)
    try:
        with wave.open(str(path), "rb") as wf:
            nch, width, rate, frames = wf.getnchannels(), wf.getsampwidth(), wf.getframerate(), wf.getnframes()
            if nch != 1:
                raise IngestionError(f"{path.name}: expected mono audio, got {nch} channels")
            if width != 2:
                raise IngestionError(f"{path.name}: expected 16-bit PCM, got {8 * width}-bit samples")
            if max_seconds:
                frames = min(frames, int(round(max_seconds * rate)))
            data = wf.readframes(frames)
    except (wave.Error, EOFError) as exc:
        raise IngestionError(f"{path.name}: not a PCM WAV file ({exc})") from None
    samples = np.frombuffer(data, dtype="<i2").astype(np.float64)
    if samples.size == 0:
        raise IngestionError(f"{path.name}: no audio samples")
    lo, hi = output_range
    norm = NormRecord(tuple(input_range), (float(lo), float(hi)), PCM16_RANGE, 0.0)
    targets = norm.normalize(samples).reshape(-1, 1)
    norm = NormRecord(norm.input_range, norm.output_range, PCM16_RANGE, float(targets.mean()))
    coords = _axis(samples.size, *input_range).reshape(-1, 1)
    meta = SignalMeta("audio", sample_count=samples.size, sample_rate=rate, source=path.name)
    return SignalDataset(coords, targets, meta, norm)


def to_pixels(pred, dataset):
    """Inverse-normalise predictions to clamped 8-bit pixels (H x W x C)."""
    pred = np.asarray(pred, dtype=np.float64)
    if pred.shape != (dataset.meta.size, dataset.meta.channels):
        raise ContractViolation(f"prediction shape {pred.shape} does not match the image")
    pix = np.clip(np.rint(dataset.norm.denormalize(pred)), 0, 255).astype(np.uint8)
    return dataset.as_image(pix)


def export_image(pred, dataset, path):
    """Write predictions as PNG (``.png``) or binary PPM/PGM (anything else)."""
    _imageio.write_image(path, to_pixels(pred, dataset))


def export_audio(pred, dataset, path):
    pred = np.asarray(pred, dtype=np.float64).ravel()
    samples = np.clip(np.rint(dataset.norm.denormalize(pred)), -32768, 32767).astype("<i2")
    with wave.open(str(path), "wb") as wf:
        wf.setnchannels(1)
        wf.setsampwidth(2)
        wf.setframerate(dataset.meta.sample_rate)
        wf.writeframes(samples.tobytes())


def write_wav(path, samples, rate):
    """Write int16 samples as mono PCM16 WAV."""
    with wave.open(str(path), "wb") as wf:
        wf.setnchannels(1)
        wf.setsampwidth(2)
        wf.setframerate(int(rate))
        wf.writeframes(np.asarray(samples, dtype="<i2").tobytes())
