import numpy as np
import pytest

import feigenjulia as fj
from feigenjulia import render


def test_shade():
    levels = render.shade(np.array([[-1, 0], [3, 10]]), 10)

    assert levels.dtype == np.uint8
    assert levels[0, 0] == 0
    assert levels[0, 1] == 255
    assert 0 < levels[1, 0] < 255
    assert levels[1, 1] == 0


def test_write_ppm(tmp_path):
    pixels = np.arange(6, dtype=np.uint8).reshape(2, 3)

    path = render.write_ppm(pixels, tmp_path / "gray.ppm")

    data = path.read_bytes()
    header = b"P6\n3 2\n255\n"
    assert data.startswith(header)
    assert list(data[len(header) :]) == [v for v in range(6) for _ in range(3)]


def test_render_escape_image(tmp_path, serial_engine):
    path = fj.render.render_escape_image(0.0, tmp_path / "disk.ppm", resolution=16, max_iter=32, engine=serial_engine)

    data = path.read_bytes()
    header = b"P6\n16 16\n255\n"
    assert len(data) == len(header) + 16 * 16 * 3
    pixels = np.frombuffer(data[len(header) :], dtype=np.uint8).reshape(16, 16, 3)
    # corners escape at once, the centre of the unit disk is retained
    assert pixels[0, 0, 0] == 255
    assert pixels[8, 8, 0] == 0


def test_render_png(tmp_path, serial_engine):
    pytest.importorskip("matplotlib")

    path = render.render_escape_image(
        2.0, tmp_path / "segment.png", resolution=16, image_format="png", engine=serial_engine
    )

    assert path.read_bytes()[:4] == b"\x89PNG"


def test_render_rejects_unknown_format(tmp_path):
    with pytest.raises(fj.ConfigError):
        render.render_escape_image(0.0, tmp_path / "x.gif", resolution=8, image_format="gif")


def test_render_reports_unwritable_path(tmp_path, serial_engine):
    with pytest.raises(fj.ConfigError) as excinfo:
        render.render_escape_image(0.0, tmp_path / "missing" / "x.ppm", resolution=8, engine=serial_engine)

    assert excinfo.value.code == fj.ErrorCode.io
