"""Scattering-frame analysis: synthetic frames, reductions, and peak fitting."""

from .geometry import DetectorGeometry, DetectorFrame, pixel_to_q, q_maps, synth_frame
from .protocols import (
    Curve,
    circular_average,
    sector_average,
    linecut_qr,
    linecut_qz,
    linecut_angle,
    q_image,
    qr_image,
    thumbnails,
)
from .fitting import PeakFit, circular_average_q2I_fit
from .dispatch import default_frame, dispatch_protocol
from .frame_io import load_frame, save_frame, save_curve_csv, save_png

__all__ = [
    "DetectorGeometry",
    "DetectorFrame",
    "pixel_to_q",
    "q_maps",
    "synth_frame",
    "Curve",
    "circular_average",
    "sector_average",
    "linecut_qr",
    "linecut_qz",
    "linecut_angle",
    "q_image",
    "qr_image",
    "thumbnails",
    "PeakFit",
    "circular_average_q2I_fit",
    "default_frame",
    "dispatch_protocol",
    "load_frame",
    "save_frame",
    "save_curve_csv",
    "save_png",
]
