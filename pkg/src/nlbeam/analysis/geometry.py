"""Detector geometry, pixel-to-q mapping, and synthetic frame generation.

Flat small-angle approximation: the scattering angle of a pixel at radial
distance r from the beam center is 2θ = atan(r·pixel_size / distance); the
momentum transfer is q = (4π/λ)·sin(θ).  qr is the horizontal (in-plane)
component and qz the vertical (out-of-plane) component, positive upward.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import BadConfig, RingOutOfRange


@dataclass(frozen=True)
class DetectorGeometry:
    pixel_size: float = 0.172  # mm
    distance: float = 0.26  # m
    wavelength: float = 0.9184  # Angstrom
    beam_center: tuple = (521.0, 490.0)  # (row, col) pixels
    shape: tuple = (1043, 981)  # (rows, cols), 800k-pixel hybrid detector

    def __post_init__(self):
        if min(self.pixel_size, self.distance, self.wavelength) <= 0:
            raise BadConfig("pixel_size, distance, wavelength must be positive")
        r, c = self.beam_center
        if not (0 <= r < self.shape[0] and 0 <= c < self.shape[1]):
            raise BadConfig("beam_center must lie within the frame")


@dataclass(frozen=True)
class DetectorFrame:
    intensities: np.ndarray
    geometry: DetectorGeometry
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.intensities.shape != tuple(self.geometry.shape):
            raise BadConfig("intensity shape does not match geometry")
        if not np.all(np.isfinite(self.intensities)) or np.any(self.intensities < 0):
            raise BadConfig("intensities must be finite and non-negative")


def pixel_to_q(geometry: DetectorGeometry, pixel: tuple) -> tuple:
    """(q, qr, qz) in 1/Angstrom for one (row, col) pixel."""
    row, col = pixel
    dr = row - geometry.beam_center[0]
    dc = col - geometry.beam_center[1]
    r_m = np.hypot(dr, dc) * geometry.pixel_size / 1000.0
    two_theta = np.arctan2(r_m, geometry.distance)
    q = 4.0 * np.pi / geometry.wavelength * np.sin(two_theta / 2.0)
    if r_m == 0:
        return 0.0, 0.0, 0.0
    norm = np.hypot(dr, dc)
    # rows grow downward, so the vertical component flips sign
    return float(q), float(q * dc / norm), float(q * -dr / norm)


def q_maps(geometry: DetectorGeometry):
    """Vectorized (q, qr, qz) arrays over the full frame."""
    rows = np.arange(geometry.shape[0], dtype=np.float64)[:, None]
    cols = np.arange(geometry.shape[1], dtype=np.float64)[None, :]
    dr = rows - geometry.beam_center[0]
    dc = cols - geometry.beam_center[1]
    rad = np.hypot(dr, dc)
    r_m = rad * geometry.pixel_size / 1000.0
    two_theta = np.arctan2(r_m, geometry.distance)
    q = 4.0 * np.pi / geometry.wavelength * np.sin(two_theta / 2.0)
    with np.errstate(invalid="ignore", divide="ignore"):
        qr = np.where(rad > 0, q * dc / rad, 0.0)
        qz = np.where(rad > 0, q * -dr / rad, 0.0)
    return q, qr, qz


def azimuth_map(geometry: DetectorGeometry) -> np.ndarray:
    """Azimuth in degrees: 0 along +qr, 90 along +qz, range (-180, 180]."""
    rows = np.arange(geometry.shape[0], dtype=np.float64)[:, None]
    cols = np.arange(geometry.shape[1], dtype=np.float64)[None, :]
    dr = rows - geometry.beam_center[0]
    dc = cols - geometry.beam_center[1]
    return np.degrees(np.arctan2(-dr, dc))


def synth_frame(
    geometry: DetectorGeometry,
    rings,
    noise_seed: int | None = None,
    background: float = 0.0,
) -> DetectorFrame:
    """Sum of Gaussian rings in |q| plus optional seeded Poisson noise.

    rings: iterable of (q0, amplitude, sigma) in 1/Angstrom.
    """
    q, _, _ = q_maps(geometry)
    q_max = float(q.max())
    intensity = np.full(geometry.shape, float(background))
    ring_list = []
    for q0, amplitude, sigma in rings:
        if not 0.0 <= q0 <= q_max:
            raise RingOutOfRange(
                f"ring q0={q0} outside detector q-range [0, {q_max:.4f}]"
            )
        intensity += amplitude * np.exp(-((q - q0) ** 2) / (2.0 * sigma**2))
        ring_list.append((float(q0), float(amplitude), float(sigma)))
    if noise_seed is not None:
        rng = np.random.default_rng(noise_seed)
        intensity = rng.poisson(intensity).astype(np.float64)
    return DetectorFrame(
        intensities=intensity,
        geometry=geometry,
        metadata={"rings": ring_list, "noise_seed": noise_seed},
    )
