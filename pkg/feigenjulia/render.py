import logging
from pathlib import Path
from typing import Optional, Union

import numpy as np

from . import types
from .engine import Engine
from .oracles import Box, escape_time_grid

logger = logging.getLogger(__name__)


class ExtrasNotInstalledError(ImportError):
    def __init__(
        self,
        msg="""
        You must install the extras for this package to render PNG images.
        Run `pip install "feigenjulia[render]"` to install the extras,
        or render with `image_format = ppm`.
        """,
        *args,
        **kwargs,
    ):
        super().__init__(msg, *args, **kwargs)


def shade(steps: np.ndarray, max_iter: int) -> np.ndarray:
    "Gray levels: retained points black, fast escapes bright"
    levels = np.zeros(steps.shape, dtype=np.uint8)
    escaped = steps >= 0
    scaled = 255.0 * (1.0 - np.log1p(steps[escaped]) / np.log1p(max_iter))
    levels[escaped] = np.clip(scaled, 0, 255).astype(np.uint8)
    return levels


def write_ppm(pixels: np.ndarray, path: Union[str, Path]) -> Path:
    "Binary PPM (P6) from a gray or RGB `uint8` array"
    if pixels.ndim == 2:
        pixels = np.repeat(pixels[:, :, None], 3, axis=2)
    height, width, _ = pixels.shape
    path = Path(path)
    with open(path, "wb") as out:
        out.write(f"P6\n{width} {height}\n255\n".encode("ascii"))
        out.write(np.ascontiguousarray(pixels, dtype=np.uint8).tobytes())
    return path


def write_png(pixels: np.ndarray, path: Union[str, Path]) -> Path:
    try:
        import matplotlib

        matplotlib.use("Agg")
        from matplotlib import pyplot as plt
    except ImportError:
        raise ExtrasNotInstalledError

    path = Path(path)
    plt.imsave(path, pixels, cmap="gray", vmin=0, vmax=255)
    return path


def render_escape_image(
    c: float,
    path: Union[str, Path],
    resolution: int = 512,
    max_iter: int = 256,
    box: Optional[Box] = None,
    image_format: str = "ppm",
    engine: Optional[Engine] = None,
) -> Path:
    """
    Renders the escape-time picture of `x -> c - x^2` over the box
    (default `[-2, 2] x [-2, 2]`) as a square image.
    """

    if image_format not in ("ppm", "png"):
        raise types.ConfigError(f"unknown image format {image_format!r}", types.ErrorCode.config)
    box = box or (-2.0, 2.0, -2.0, 2.0)
    steps = escape_time_grid(c, box, (resolution, resolution), max_iter, engine=engine)
    pixels = shade(steps, max_iter)

    try:
        written = write_png(pixels, path) if image_format == "png" else write_ppm(pixels, path)
    except OSError as exc:
        raise types.ConfigError(f"cannot write {path}: {exc}", types.ErrorCode.io) from exc
    logger.info("rendered c=%g at %dx%d to %s", c, resolution, resolution, written)
    return written
