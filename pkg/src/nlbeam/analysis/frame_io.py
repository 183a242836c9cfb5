"""Frame, curve, and image persistence.

Frames are stored as raw little-endian float32 grids with a JSON sidecar
(`<name>.json`) carrying shape and geometry; curves as two-column CSV;
images as 8-bit grayscale PNG.
"""

from __future__ import annotations

import csv
import json
import os

import numpy as np

from ..errors import BadConfig
from .geometry import DetectorFrame, DetectorGeometry
from .protocols import Curve


def save_frame(frame: DetectorFrame, path) -> None:
    data = frame.intensities.astype("<f4")
    with open(path, "wb") as fh:
        fh.write(data.tobytes())
    sidecar = {
        "shape": list(frame.geometry.shape),
        "geometry": {
            "pixel_size": frame.geometry.pixel_size,
            "distance": frame.geometry.distance,
            "wavelength": frame.geometry.wavelength,
            "beam_center": list(frame.geometry.beam_center),
        },
        "metadata": frame.metadata,
    }
    with open(str(path) + ".json", "w", encoding="utf-8") as fh:
        json.dump(sidecar, fh, indent=2)
        fh.write("\n")


def load_frame(path) -> DetectorFrame:
    with open(str(path) + ".json", encoding="utf-8") as fh:
        sidecar = json.load(fh)
    shape = tuple(sidecar["shape"])
    g = sidecar["geometry"]
    geometry = DetectorGeometry(
        pixel_size=g["pixel_size"],
        distance=g["distance"],
        wavelength=g["wavelength"],
        beam_center=tuple(g["beam_center"]),
        shape=shape,
    )
    raw = np.fromfile(path, dtype="<f4")
    if raw.size != shape[0] * shape[1]:
        raise BadConfig(f"frame file size does not match sidecar shape {shape}")
    return DetectorFrame(
        intensities=raw.reshape(shape).astype(np.float64),
        geometry=geometry,
        metadata=sidecar.get("metadata", {}),
    )


def save_curve_csv(curve: Curve, path, x_name: str = "q", y_name: str = "intensity") -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([x_name, y_name])
        for x, y in zip(curve.abscissa, curve.ordinate):
            writer.writerow([repr(float(x)), repr(float(y))])


def save_png(image: np.ndarray, path) -> None:
    """8-bit grayscale PNG; float images are min-max scaled first."""
    from PIL import Image

    if image.dtype != np.uint8:
        lo, hi = float(image.min()), float(image.max())
        image = (
            ((image - lo) / (hi - lo) * 255.0).round().astype(np.uint8)
            if hi > lo
            else np.zeros(image.shape, dtype=np.uint8)
        )
    Image.fromarray(image, mode="L").save(path, format="PNG")


def ensure_dir(path) -> str:
    os.makedirs(path, exist_ok=True)
    return path
