import numpy as np
import pytest


@pytest.fixture
def pgm_factory(tmp_path):
    """Write an 8-bit grayscale array as a binary PGM and return its path."""

    def make(pixels: np.ndarray, name: str = "img.pgm"):
        arr = np.asarray(pixels, dtype=np.uint8)
        h, w = arr.shape
        path = tmp_path / name
        with open(path, "wb") as fh:
            fh.write(f"P5\n{w} {h}\n255\n".encode())
            fh.write(arr.tobytes())
        return path

    return make
