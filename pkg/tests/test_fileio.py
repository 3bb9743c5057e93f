import numpy as np
import pytest
from PIL import Image

from symtrack.errors import DecodeError
from symtrack.fileio import load_image, quantize, read_pgm, read_png, write_pgm


class TestPgm:
    def test_known_8bit_values(self, tmp_path):
        path = tmp_path / "a.pgm"
        path.write_bytes(b"P5\n2 1\n255\n" + bytes([128, 255]))
        img = read_pgm(path)
        assert img.shape == (1, 2)
        assert img[0, 0] == pytest.approx(128 / 255)
        assert img[0, 1] == 1.0

    def test_known_16bit_values_big_endian(self, tmp_path):
        path = tmp_path / "a.pgm"
        path.write_bytes(b"P5\n2 1\n65535\n" + (65535).to_bytes(2, "big") + (32768).to_bytes(2, "big"))
        img = read_pgm(path)
        assert img[0, 0] == 1.0
        assert img[0, 1] == pytest.approx(32768 / 65535)

    def test_header_comments_allowed(self, tmp_path):
        path = tmp_path / "a.pgm"
        path.write_bytes(b"P5\n# a comment\n2 2\n# another\n255\n" + bytes(4))
        assert read_pgm(path).shape == (2, 2)

    def test_roundtrip_8bit_bit_exact(self, tmp_path, rng):
        img = rng.uniform(0.0, 1.0, (23, 31))
        path = tmp_path / "r.pgm"
        write_pgm(path, img, bits=8)
        assert np.array_equal(read_pgm(path), quantize(img, bits=8))

    def test_roundtrip_16bit_bit_exact(self, tmp_path, rng):
        img = rng.uniform(0.0, 1.0, (9, 14))
        path = tmp_path / "r.pgm"
        write_pgm(path, img, bits=16)
        assert np.array_equal(read_pgm(path), quantize(img, bits=16))

    def test_second_write_identical_bytes(self, tmp_path, rng):
        img = rng.uniform(0.0, 1.0, (8, 8))
        p1, p2 = tmp_path / "a.pgm", tmp_path / "b.pgm"
        write_pgm(p1, img)
        write_pgm(p2, img)
        assert p1.read_bytes() == p2.read_bytes()

    def test_truncated_data_names_byte_offset(self, tmp_path):
        path = tmp_path / "t.pgm"
        path.write_bytes(b"P5\n4 4\n255\n" + bytes(7))
        with pytest.raises(DecodeError, match="byte"):
            read_pgm(path)

    def test_bad_magic(self, tmp_path):
        path = tmp_path / "t.pgm"
        path.write_bytes(b"P6\n1 1\n255\n\x00")
        with pytest.raises(DecodeError, match="byte 0"):
            read_pgm(path)

    def test_bad_maxval(self, tmp_path):
        path = tmp_path / "t.pgm"
        path.write_bytes(b"P5\n1 1\n70000\n\x00\x00")
        with pytest.raises(DecodeError, match="maxval"):
            read_pgm(path)


class TestPng:
    def test_grayscale_png_loads(self, tmp_path):
        path = tmp_path / "g.png"
        data = np.arange(12, dtype=np.uint8).reshape(3, 4) * 20
        Image.fromarray(data, mode="L").save(path)
        img = read_png(path)
        assert img.shape == (3, 4)
        assert img[2, 3] == pytest.approx(220 / 255)

    def test_rgb_png_rejected(self, tmp_path):
        path = tmp_path / "c.png"
        Image.fromarray(np.zeros((4, 4, 3), dtype=np.uint8), mode="RGB").save(path)
        with pytest.raises(DecodeError, match="grayscale"):
            read_png(path)

    def test_16bit_grayscale_png(self, tmp_path):
        path = tmp_path / "g16.png"
        data = np.array([[0, 65535]], dtype=np.uint16)
        Image.fromarray(data, mode="I;16").save(path)
        img = read_png(path)
        assert img[0, 1] == 1.0


class TestLoadImage:
    def test_dispatch_by_magic(self, tmp_path, rng):
        img = rng.uniform(0.0, 1.0, (6, 6))
        pgm = tmp_path / "x.dat"  # extension is irrelevant
        write_pgm(pgm, img)
        assert np.array_equal(load_image(pgm), quantize(img))
        png = tmp_path / "y.dat"
        Image.fromarray((quantize(img) * 255).astype(np.uint8), mode="L").save(png, format="PNG")
        assert load_image(png).shape == (6, 6)

    def test_unsupported_format(self, tmp_path):
        path = tmp_path / "z.bin"
        path.write_bytes(b"GIF89a....")
        with pytest.raises(DecodeError, match="unsupported"):
            load_image(path)
