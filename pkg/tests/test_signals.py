import zlib

import numpy as np
import pytest

from ssinr import _imageio
from ssinr.errors import ContractViolation, IngestionError
from ssinr.signals import (
    FIXTURES,
    center_crop,
    dataset_from_pixels,
    export_audio,
    export_image,
    load_audio,
    load_image,
    make_grid,
    to_pixels,
    write_wav,
)


class TestGrid:
    def test_endpoints(self):
        assert make_grid(2, 2).tolist() == [[-1, -1], [-1, 1], [1, -1], [1, 1]]

    def test_singleton_axis(self):
        g = make_grid(3, 1)
        assert g[:, 0].tolist() == [-1, 0, 1]
        assert np.all(g[:, 1] == 0)

    def test_arity(self):
        assert make_grid(256, 256).shape == (65536, 2)

    def test_custom_range(self):
        g = make_grid(3, 3, (0.0, 255.0))
        assert g.min() == 0 and g.max() == 255

    def test_zero_dimension(self):
        with pytest.raises(ContractViolation):
            make_grid(0, 4)


class TestImageNormalisation:
    @pytest.mark.parametrize("value,expect", [(0, -1.0), (255, 1.0), (128, 2 * 128 / 255 - 1)])
    def test_linear_map(self, value, expect):
        ds = dataset_from_pixels(np.full((4, 5), value, dtype=np.uint8))
        assert np.allclose(ds.targets, expect, rtol=0, atol=1e-15)
        assert ds.targets.shape == (20, 1)

    def test_128_value(self):
        ds = dataset_from_pixels(np.full((2, 2), 128, dtype=np.uint8))
        assert ds.targets[0, 0] == pytest.approx(0.00392, abs=1e-5)

    def test_gray_from_rgb(self):
        pix = np.zeros((2, 2, 3), dtype=np.uint8)
        pix[..., 1] = 255
        ds = dataset_from_pixels(pix, channels="gray", output_range=(0.0, 1.0))
        assert ds.targets.shape == (4, 1)
        assert np.allclose(ds.targets, 0.587)

    def test_norm_record_keeps_mean(self):
        ds = load_image("natural64.png")
        assert ds.norm.mean == pytest.approx(ds.targets.mean())
        assert ds.meta.size == 64 * 64 and ds.meta.channels == 3

    def test_crop(self):
        ds = load_image("natural64.png", crop=16)
        assert (ds.meta.height, ds.meta.width) == (16, 16)
        with pytest.raises(ContractViolation):
            center_crop(np.zeros((4, 4)), 8)


class TestImageRoundTrip:
    @pytest.mark.parametrize("name", ["natural64.png", "gradient64.png"])
    def test_png_lossless(self, name, tmp_path):
        ds = load_image(name)
        out = tmp_path / "again.png"
        export_image(ds.targets, ds, out)
        assert np.array_equal(_imageio.read_image(out), _imageio.read_image(FIXTURES / name))

    @pytest.mark.parametrize("suffix", [".ppm", ".pgm"])
    def test_pnm_lossless(self, suffix, tmp_path):
        ds = load_image("natural64.png", channels="rgb" if suffix == ".ppm" else None)
        if suffix == ".pgm":
            ds = dataset_from_pixels(to_pixels(ds.targets, ds)[..., 0])
        out = tmp_path / f"img{suffix}"
        export_image(ds.targets, ds, out)
        again = load_image(out)
        assert np.array_equal(again.targets, ds.targets)

    def test_clamping(self):
        ds = dataset_from_pixels(np.zeros((1, 2), dtype=np.uint8))
        pix = to_pixels(np.array([[1.5], [-1.5]]), ds)
        assert pix.ravel().tolist() == [255, 0]

    def test_pred_shape_checked(self):
        ds = dataset_from_pixels(np.zeros((2, 2), dtype=np.uint8))
        with pytest.raises(ContractViolation):
            to_pixels(np.zeros((3, 1)), ds)


class TestImageErrors:
    def write(self, tmp_path, data, name="bad.png"):
        p = tmp_path / name
        p.write_bytes(data)
        return p

    def png_bytes(self):
        return (FIXTURES / "gradient64.png").read_bytes()

    def test_missing_file(self):
        with pytest.raises(IngestionError, match="no such file"):
            load_image("definitely_missing.png")

    def test_truncated_png(self, tmp_path):
        data = self.png_bytes()
        with pytest.raises(IngestionError, match="truncated"):
            load_image(self.write(tmp_path, data[: len(data) // 2]))

    def test_crc_mismatch(self, tmp_path):
        data = bytearray(self.png_bytes())
        data[40] ^= 0xFF
        with pytest.raises(IngestionError, match="CRC|corrupt"):
            load_image(self.write(tmp_path, bytes(data)))

    def test_sixteen_bit_png(self, tmp_path):
        ihdr = b"IHDR" + (4).to_bytes(4, "big") * 2 + bytes([16, 0, 0, 0, 0])
        chunk = (13).to_bytes(4, "big") + ihdr + zlib.crc32(ihdr).to_bytes(4, "big")
        with pytest.raises(IngestionError, match="bit depth 16"):
            load_image(self.write(tmp_path, _imageio.PNG_SIGNATURE + chunk))

    def test_ascii_pnm(self, tmp_path):
        with pytest.raises(IngestionError, match="P2"):
            load_image(self.write(tmp_path, b"P2\n1 1\n255\n0\n", "x.pgm"))

    def test_pnm_maxval(self, tmp_path):
        with pytest.raises(IngestionError, match="maxval"):
            load_image(self.write(tmp_path, b"P5\n1 1\n65535\n\x00\x00", "x.pgm"))

    def test_truncated_pnm(self, tmp_path):
        with pytest.raises(IngestionError, match="truncated"):
            load_image(self.write(tmp_path, b"P6\n4 4\n255\n\x00\x01", "x.ppm"))

    def test_unknown_format(self, tmp_path):
        with pytest.raises(IngestionError, match="unrecognised"):
            load_image(self.write(tmp_path, b"GIF89a....", "x.gif"))

    def test_palette_png_decodes(self):
        plte = b"PLTE" + bytes([10, 20, 30, 200, 100, 0])
        raw = zlib.compress(bytes([0, 0, 1, 0, 1, 0]))
        ihdr = b"IHDR" + (2).to_bytes(4, "big") + (2).to_bytes(4, "big") + bytes([8, 3, 0, 0, 0])
        parts = [ihdr, plte, b"IDAT" + raw, b"IEND"]
        data = _imageio.PNG_SIGNATURE + b"".join(
            (len(p) - 4).to_bytes(4, "big") + p + zlib.crc32(p).to_bytes(4, "big") for p in parts)
        pix = _imageio.decode_png(data)
        assert pix.shape == (2, 2, 3)
        assert pix[0, 1].tolist() == [200, 100, 0] and pix[1, 1].tolist() == [10, 20, 30]


class TestAudio:
    def test_fixture(self):
        ds = load_audio("chord.wav")
        assert ds.meta.sample_rate == 8000 and ds.meta.sample_count == 4000
        assert ds.coords[0, 0] == -1.0 and ds.coords[-1, 0] == 1.0
        assert np.abs(ds.targets).max() <= 1.0

    def test_arity_and_endpoint(self, tmp_path):
        samples = np.zeros(16000, dtype=np.int16)
        samples[5] = 32767
        write_wav(tmp_path / "a.wav", samples, 16000)
        ds = load_audio(tmp_path / "a.wav")
        assert ds.coords.shape == (16000, 1)
        assert ds.targets[5, 0] == pytest.approx(1.0, abs=1e-12)

    def test_silence(self, tmp_path):
        write_wav(tmp_path / "s.wav", np.zeros(100, dtype=np.int16), 8000)
        ds = load_audio(tmp_path / "s.wav")
        assert np.all(np.abs(ds.targets) <= 2 / 65535)

    def test_max_seconds(self):
        assert load_audio("chord.wav", max_seconds=0.25).meta.sample_count == 2000

    def test_stereo_rejected(self, tmp_path):
        import wave

        with wave.open(str(tmp_path / "st.wav"), "wb") as wf:
            wf.setnchannels(2)
            wf.setsampwidth(2)
            wf.setframerate(8000)
            wf.writeframes(b"\x00" * 40)
        with pytest.raises(IngestionError, match="mono"):
            load_audio(tmp_path / "st.wav")

    def test_not_a_wav(self, tmp_path):
        (tmp_path / "n.wav").write_bytes(b"RIFF....nope")
        with pytest.raises(IngestionError):
            load_audio(tmp_path / "n.wav")

    def test_round_trip(self, tmp_path):
        ds = load_audio("chord.wav")
        export_audio(ds.targets, ds, tmp_path / "r.wav")
        again = load_audio(tmp_path / "r.wav")
        assert np.array_equal(again.targets, ds.targets)
