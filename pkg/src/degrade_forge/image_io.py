"""Lossless PNG boundary I/O: arrays are H x W x 3 floats in [0, 1]."""

from __future__ import annotations

import io
from pathlib import Path

import numpy as np
from PIL import Image as PILImage


def to_uint8(img: np.ndarray) -> np.ndarray:
    return np.clip(np.rint(np.asarray(img, dtype=float) * 255.0), 0, 255).astype(np.uint8)


def from_uint8(raw: np.ndarray) -> np.ndarray:
    return np.asarray(raw, dtype=float) / 255.0


def read_png(path) -> np.ndarray:
    with PILImage.open(path) as im:
        return from_uint8(np.asarray(im.convert("RGB")))


def write_png(path, img: np.ndarray) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    PILImage.fromarray(to_uint8(img)).save(path, format="PNG")


def encode_png_bytes(img: np.ndarray) -> bytes:
    buf = io.BytesIO()
    PILImage.fromarray(to_uint8(img)).save(buf, format="PNG")
    return buf.getvalue()


def decode_png_bytes(data: bytes) -> np.ndarray:
    with PILImage.open(io.BytesIO(data)) as im:
        return from_uint8(np.asarray(im.convert("RGB")))
