"""Protocol dispatch: route a one-line analysis command to its operation."""

from __future__ import annotations

import os

import numpy as np

from ..errors import UnknownProtocol
from .fitting import circular_average_q2I_fit
from .geometry import DetectorFrame, DetectorGeometry, synth_frame
from .protocols import (
    circular_average,
    linecut_angle,
    linecut_qr,
    linecut_qz,
    q_image,
    qr_image,
    sector_average,
    thumbnails,
)

# default cut positions when the analyst omits the argument, taken from the
# example phrases the protocols are trained on
DEFAULTS = {"linecut_qr": 0.1, "linecut_qz": 1.5, "linecut_angle": 0.1}


def default_frame(noise_seed: int | None = None) -> DetectorFrame:
    """Single-ring fixture at q0 = 1.5 with the standard instrument geometry."""
    return synth_frame(
        DetectorGeometry(),
        rings=[(1.5, 1000.0, 0.05)],
        noise_seed=noise_seed,
        background=10.0,
    )


def dispatch_protocol(
    protocol: str,
    arg: float | None = None,
    frame: DetectorFrame | None = None,
    out_dir: str | None = None,
) -> dict:
    """Run one analysis protocol; returns a JSON-friendly result summary.

    When out_dir is given, curves are written as CSV and images as PNG.
    """
    if frame is None:
        frame = default_frame()
    result: dict = {"protocol": protocol}
    artifact = None
    curve = None
    image = None

    if protocol == "thumbnails":
        image = thumbnails(frame)
        artifact = "thumbnail.png"
    elif protocol == "circular_average":
        curve = circular_average(frame)
        artifact = "circular_average.csv"
    elif protocol == "sector_average":
        curve = sector_average(frame)
        artifact = "sector_average.csv"
    elif protocol == "linecut_qr":
        curve = linecut_qr(frame, qz=DEFAULTS["linecut_qr"] if arg is None else arg)
        artifact = "linecut_qr.csv"
    elif protocol == "linecut_qz":
        curve = linecut_qz(frame, qr=DEFAULTS["linecut_qz"] if arg is None else arg)
        artifact = "linecut_qz.csv"
    elif protocol == "linecut_angle":
        curve = linecut_angle(frame, q=DEFAULTS["linecut_angle"] if arg is None else arg)
        artifact = "linecut_angle.csv"
    elif protocol in ("q_image", "qr_image"):
        fn = q_image if protocol == "q_image" else qr_image
        image, x_axis, y_axis = fn(frame)
        result["x_range"] = [float(x_axis[0]), float(x_axis[-1])]
        result["y_range"] = [float(y_axis[0]), float(y_axis[-1])]
        artifact = f"{protocol}.png"
    elif protocol == "circular_average_q2I_fit":
        fit = circular_average_q2I_fit(frame)
        result["fit"] = {
            "q0": fit.q0,
            "amplitude": fit.amplitude,
            "sigma": fit.sigma,
            "background_slope": fit.background_slope,
            "background_intercept": fit.background_intercept,
            "residual_norm": fit.residual_norm,
            "iterations": fit.iterations,
        }
    else:
        raise UnknownProtocol(f"unknown analysis protocol {protocol!r}")

    if curve is not None:
        peak = int(np.argmax(curve.ordinate))
        result.update(
            {
                "n_points": int(len(curve.abscissa)),
                "bin_width": curve.bin_width,
                "peak_x": float(curve.abscissa[peak]),
                "peak_y": float(curve.ordinate[peak]),
            }
        )
    if image is not None:
        result["image_shape"] = list(image.shape)

    if out_dir is not None and artifact is not None:
        from .frame_io import ensure_dir, save_curve_csv, save_png

        path = os.path.join(ensure_dir(out_dir), artifact)
        if curve is not None:
            save_curve_csv(curve, path)
        else:
            save_png(image, path)
        result["artifact"] = path
    return result
