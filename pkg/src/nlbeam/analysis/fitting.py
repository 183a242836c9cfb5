"""Peak fitting of the circular average: Gaussian + linear background on q2I.

Model: f(q) = a·exp(−(q−q0)²/2σ²) + m·q + c, fitted to q²·I(q) by damped
Gauss–Newton least squares with a central-difference Jacobian.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import BadConfig, FitDiverged
from .geometry import DetectorFrame
from .protocols import Curve, circular_average

MAX_ITERATIONS = 200
REL_TOL = 1e-8
MAX_DAMPING_FAILURES = 10


@dataclass(frozen=True)
class PeakFit:
    q0: float
    amplitude: float
    sigma: float
    background_slope: float
    background_intercept: float
    residual_norm: float
    iterations: int

    def __post_init__(self):
        if self.sigma <= 0:
            raise BadConfig("sigma must be positive")


def _model(params: np.ndarray, q: np.ndarray) -> np.ndarray:
    a, q0, sigma, m, c = params
    return a * np.exp(-((q - q0) ** 2) / (2.0 * sigma**2)) + m * q + c


def _residual(params: np.ndarray, q: np.ndarray, y: np.ndarray) -> np.ndarray:
    return _model(params, q) - y


def numeric_jacobian(params: np.ndarray, q: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Central-difference Jacobian of the residual w.r.t. the parameters."""
    jac = np.empty((q.size, params.size))
    for j in range(params.size):
        h = 1e-6 * max(1.0, abs(params[j]))
        up = params.copy()
        dn = params.copy()
        up[j] += h
        dn[j] -= h
        jac[:, j] = (_residual(up, q, y) - _residual(dn, q, y)) / (2.0 * h)
    return jac


def fit_gaussian_linear(q: np.ndarray, y: np.ndarray) -> PeakFit:
    if q.size < 10:
        raise BadConfig("need at least 10 points to fit")
    bin_width = float(np.median(np.diff(q)))
    m0 = (y[-1] - y[0]) / (q[-1] - q[0])
    c0 = float(y[0] - m0 * q[0])
    bg = m0 * q + c0
    peak_idx = int(np.argmax(y - bg))
    params = np.array(
        [max(float((y - bg)[peak_idx]), 1e-12), float(q[peak_idx]), 3.0 * bin_width, float(m0), c0]
    )

    res = _residual(params, q, y)
    res_norm = float(np.linalg.norm(res))
    damping = 1e-3
    iterations = 0
    for iterations in range(1, MAX_ITERATIONS + 1):
        jac = numeric_jacobian(params, q, y)
        jtj = jac.T @ jac
        jtr = jac.T @ res
        accepted = False
        for _ in range(MAX_DAMPING_FAILURES):
            try:
                step = np.linalg.solve(jtj + damping * np.eye(5), -jtr)
            except np.linalg.LinAlgError:
                damping *= 10.0
                continue
            trial = params + step
            trial[2] = abs(trial[2]) or 1e-12  # keep sigma positive
            trial_res = _residual(trial, q, y)
            trial_norm = float(np.linalg.norm(trial_res))
            if trial_norm < res_norm:
                params, res, prev_norm, res_norm = trial, trial_res, res_norm, trial_norm
                damping = max(damping / 10.0, 1e-12)
                accepted = True
                break
            damping *= 10.0
        if not accepted:
            raise FitDiverged(
                f"residual not decreasing after {MAX_DAMPING_FAILURES} damping attempts"
            )
        if prev_norm > 0 and (prev_norm - res_norm) / prev_norm < REL_TOL:
            break

    return PeakFit(
        q0=float(params[1]),
        amplitude=float(params[0]),
        sigma=float(abs(params[2])),
        background_slope=float(params[3]),
        background_intercept=float(params[4]),
        residual_norm=res_norm,
        iterations=iterations,
    )


def circular_average_q2I_fit(frame: DetectorFrame) -> PeakFit:
    curve: Curve = circular_average(frame)
    q = np.asarray(curve.abscissa, dtype=np.float64)
    y = q**2 * np.asarray(curve.ordinate, dtype=np.float64)
    return fit_gaussian_linear(q, y)
