"""Reduction protocols: averages, linecuts, remapped images, thumbnails."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .._kernels import bin_mean_kernel
from ..errors import BadConfig, EmptyROI
from .geometry import DetectorFrame, azimuth_map, q_maps

N_BINS = 400
DEFAULT_THICKNESS = 0.05  # 1/Angstrom, from the analyst prompt examples


@dataclass(frozen=True)
class Curve:
    abscissa: np.ndarray  # strictly increasing
    ordinate: np.ndarray
    bin_width: float
    counts: np.ndarray = field(default=None)  # pixels per kept bin
    label: str = ""

    def __post_init__(self):
        if len(self.abscissa) != len(self.ordinate):
            raise BadConfig("abscissa/ordinate length mismatch")
        if len(self.abscissa) > 1 and not np.all(np.diff(self.abscissa) > 0):
            raise BadConfig("abscissa must be strictly increasing")


def _binned_curve(coord, values, lo, hi, n_bins, label) -> Curve:
    """Mean of `values` in n_bins equal bins of `coord` over [lo, hi]."""
    if coord.size == 0:
        raise EmptyROI(f"no pixels selected for {label}")
    width = (hi - lo) / n_bins
    if width <= 0:
        raise EmptyROI(f"degenerate coordinate range for {label}")
    idx = np.clip(((coord - lo) / width).astype(np.int64), 0, n_bins - 1)
    sums, counts = bin_mean_kernel(
        np.ascontiguousarray(values, dtype=np.float64).ravel(), idx.ravel(), n_bins
    )
    keep = counts > 0
    if not np.any(keep):
        raise EmptyROI(f"all bins empty for {label}")
    centers = lo + (np.arange(n_bins) + 0.5) * width
    return Curve(
        abscissa=centers[keep],
        ordinate=sums[keep] / counts[keep],
        bin_width=width,
        counts=counts[keep],
        label=label,
    )


def circular_average(frame: DetectorFrame, n_bins: int = N_BINS) -> Curve:
    q, _, _ = q_maps(frame.geometry)
    return _binned_curve(
        q, frame.intensities, 0.0, float(q.max()), n_bins, "circular_average"
    )


def sector_average(
    frame: DetectorFrame, angle_range: tuple = (-45.0, 45.0), n_bins: int = N_BINS
) -> Curve:
    q, _, _ = q_maps(frame.geometry)
    phi = azimuth_map(frame.geometry)
    mask = (phi >= angle_range[0]) & (phi <= angle_range[1])
    if not np.any(mask):
        raise EmptyROI("no pixels inside the requested sector")
    return _binned_curve(
        q[mask], frame.intensities[mask], 0.0, float(q.max()), n_bins, "sector_average"
    )


def linecut_qr(
    frame: DetectorFrame,
    qz: float,
    thickness: float = DEFAULT_THICKNESS,
    n_bins: int = N_BINS,
) -> Curve:
    _, qr_map, qz_map = q_maps(frame.geometry)
    mask = np.abs(qz_map - qz) <= thickness / 2.0
    if not np.any(mask):
        raise EmptyROI(f"no pixels within {thickness / 2} of qz={qz}")
    sel = qr_map[mask]
    return _binned_curve(
        sel, frame.intensities[mask], float(sel.min()), float(sel.max()),
        n_bins, "linecut_qr",
    )


def linecut_qz(
    frame: DetectorFrame,
    qr: float,
    thickness: float = DEFAULT_THICKNESS,
    n_bins: int = N_BINS,
) -> Curve:
    _, qr_map, qz_map = q_maps(frame.geometry)
    mask = np.abs(qr_map - qr) <= thickness / 2.0
    if not np.any(mask):
        raise EmptyROI(f"no pixels within {thickness / 2} of qr={qr}")
    sel = qz_map[mask]
    return _binned_curve(
        sel, frame.intensities[mask], float(sel.min()), float(sel.max()),
        n_bins, "linecut_qz",
    )


def linecut_angle(
    frame: DetectorFrame,
    q: float,
    thickness: float = DEFAULT_THICKNESS,
    n_bins: int = N_BINS,
) -> Curve:
    q_map_, _, _ = q_maps(frame.geometry)
    mask = np.abs(q_map_ - q) <= thickness / 2.0
    if not np.any(mask):
        raise EmptyROI(f"no pixels within {thickness / 2} of q={q}")
    phi = azimuth_map(frame.geometry)
    return _binned_curve(
        phi[mask], frame.intensities[mask], -180.0, 180.0, n_bins, "linecut_angle"
    )


def _remap(frame: DetectorFrame, x_map, y_map, out_shape=(N_BINS, N_BINS)):
    """Nearest-neighbor scatter of pixel intensities onto a regular grid.

    Returns (image, x_axis, y_axis); unfilled grid cells are 0.  Scatter
    order is row-major over the source frame, so the result is deterministic.
    """
    x_lo, x_hi = float(x_map.min()), float(x_map.max())
    y_lo, y_hi = float(y_map.min()), float(y_map.max())
    nx, ny = out_shape[1], out_shape[0]
    xi = np.clip(((x_map - x_lo) / (x_hi - x_lo) * (nx - 1)).round().astype(np.int64), 0, nx - 1)
    yi = np.clip(((y_map - y_lo) / (y_hi - y_lo) * (ny - 1)).round().astype(np.int64), 0, ny - 1)
    image = np.zeros(out_shape)
    count = np.zeros(out_shape)
    np.add.at(image, ((ny - 1) - yi, xi), frame.intensities)
    np.add.at(count, ((ny - 1) - yi, xi), 1.0)
    with np.errstate(invalid="ignore"):
        image = np.where(count > 0, image / np.maximum(count, 1), 0.0)
    x_axis = np.linspace(x_lo, x_hi, nx)
    y_axis = np.linspace(y_hi, y_lo, ny)  # top row = max q
    return image, x_axis, y_axis


def q_image(frame: DetectorFrame, out_shape=(N_BINS, N_BINS)):
    """Remap onto a regular (q horizontal, q vertical) grid."""
    _, qr_map, qz_map = q_maps(frame.geometry)
    return _remap(frame, qr_map, qz_map, out_shape)


def qr_image(frame: DetectorFrame, out_shape=(N_BINS, N_BINS)):
    """Remap onto a regular (qr, qz) grid.

    Under the flat small-angle approximation used here the in-plane
    component equals the horizontal one, so the mapping matches q_image;
    only the axis labels differ.
    """
    return q_image(frame, out_shape)


def thumbnails(frame: DetectorFrame, max_side: int = 128) -> np.ndarray:
    """Block-averaged 8-bit preview of the frame."""
    data = frame.intensities
    factor = max(1, int(np.ceil(max(data.shape) / max_side)))
    rows = (data.shape[0] // factor) * factor
    cols = (data.shape[1] // factor) * factor
    if rows == 0 or cols == 0:
        raise EmptyROI("frame too small to thumbnail")
    small = data[:rows, :cols].reshape(
        rows // factor, factor, cols // factor, factor
    ).mean(axis=(1, 3))
    lo, hi = float(small.min()), float(small.max())
    if hi > lo:
        small = (small - lo) / (hi - lo)
    else:
        small = np.zeros_like(small)
    return (small * 255.0).round().astype(np.uint8)
