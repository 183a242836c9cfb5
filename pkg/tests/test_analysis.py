"""Analysis engine: geometry oracles, reductions, fitting, dispatch, I/O."""

import math

import numpy as np
import pytest

from nlbeam.analysis import (
    DetectorFrame,
    DetectorGeometry,
    circular_average,
    circular_average_q2I_fit,
    default_frame,
    dispatch_protocol,
    linecut_angle,
    linecut_qr,
    linecut_qz,
    load_frame,
    pixel_to_q,
    q_image,
    q_maps,
    qr_image,
    save_frame,
    sector_average,
    synth_frame,
    thumbnails,
)
from nlbeam.analysis.fitting import _residual, numeric_jacobian
from nlbeam.errors import BadConfig, EmptyROI, RingOutOfRange, UnknownProtocol


@pytest.fixture(scope="module")
def frame():
    return default_frame()


# --- geometry -----------------------------------------------------------


def test_pixel_to_q_closed_form():
    geo = DetectorGeometry()
    # 100 pixels right of center along the horizontal axis
    row, col = geo.beam_center[0], geo.beam_center[1] + 100
    q, qr, qz = pixel_to_q(geo, (row, col))
    r_m = 100 * geo.pixel_size / 1000.0
    expected = 4 * math.pi / geo.wavelength * math.sin(math.atan2(r_m, geo.distance) / 2)
    assert q == pytest.approx(expected, rel=1e-12)
    assert qr == pytest.approx(expected)
    assert qz == pytest.approx(0.0, abs=1e-12)


def test_pixel_to_q_vertical_sign():
    geo = DetectorGeometry()
    q, qr, qz = pixel_to_q(geo, (geo.beam_center[0] - 50, geo.beam_center[1]))
    assert qz > 0  # above the beam center is positive qz
    assert qr == pytest.approx(0.0, abs=1e-12)


def test_q_maps_match_scalar():
    geo = DetectorGeometry(shape=(64, 64), beam_center=(32.0, 32.0))
    q, qr, qz = q_maps(geo)
    for pixel in [(0, 0), (10, 45), (32, 32), (63, 1)]:
        sq, sqr, sqz = pixel_to_q(geo, pixel)
        assert q[pixel] == pytest.approx(sq, abs=1e-12)
        assert qr[pixel] == pytest.approx(sqr, abs=1e-12)
        assert qz[pixel] == pytest.approx(sqz, abs=1e-12)


def test_default_geometry_covers_target_ring():
    q, _, _ = q_maps(DetectorGeometry())
    assert q.max() > 1.5


def test_ring_out_of_range():
    with pytest.raises(RingOutOfRange):
        synth_frame(DetectorGeometry(), rings=[(99.0, 1.0, 0.05)])


def test_synth_frame_seeded_reproducibility():
    geo = DetectorGeometry(shape=(64, 64), beam_center=(32.0, 32.0))
    a = synth_frame(geo, [(0.1, 100.0, 0.01)], noise_seed=42)
    b = synth_frame(geo, [(0.1, 100.0, 0.01)], noise_seed=42)
    c = synth_frame(geo, [(0.1, 100.0, 0.01)], noise_seed=43)
    assert np.array_equal(a.intensities, b.intensities)
    assert not np.array_equal(a.intensities, c.intensities)


def test_frame_validation():
    geo = DetectorGeometry(shape=(8, 8), beam_center=(4.0, 4.0))
    with pytest.raises(BadConfig):
        DetectorFrame(intensities=np.zeros((4, 4)), geometry=geo)
    with pytest.raises(BadConfig):
        DetectorFrame(intensities=np.full((8, 8), -1.0), geometry=geo)


# --- reductions ---------------------------------------------------------


def test_circular_average_peak_location(frame):
    curve = circular_average(frame)
    peak_q = curve.abscissa[np.argmax(curve.ordinate)]
    assert abs(peak_q - 1.5) <= curve.bin_width


def test_circular_average_flat_frame_conserves_intensity():
    geo = DetectorGeometry(shape=(64, 64), beam_center=(32.0, 32.0))
    flat = DetectorFrame(intensities=np.full((64, 64), 7.0), geometry=geo)
    curve = circular_average(flat)
    assert np.allclose(curve.ordinate, 7.0)
    assert int(curve.counts.sum()) == 64 * 64


def test_sector_average_left_right_symmetry(frame):
    right = sector_average(frame, angle_range=(-45.0, 45.0))
    left = sector_average(frame, angle_range=(135.0, 180.0))
    peak_r = right.abscissa[np.argmax(right.ordinate)]
    peak_l = left.abscissa[np.argmax(left.ordinate)]
    assert abs(peak_r - peak_l) <= max(right.bin_width, left.bin_width)


def test_linecuts_find_the_ring(frame):
    qr_cut = linecut_qr(frame, qz=0.0)
    assert abs(abs(qr_cut.abscissa[np.argmax(qr_cut.ordinate)]) - 1.5) < 0.02
    qz_cut = linecut_qz(frame, qr=0.0)
    assert abs(abs(qz_cut.abscissa[np.argmax(qz_cut.ordinate)]) - 1.5) < 0.02


def test_linecut_angle_ring_is_isotropic(frame):
    curve = linecut_angle(frame, q=1.5)
    assert np.ptp(curve.ordinate) / np.mean(curve.ordinate) < 0.05


def test_linecut_empty_roi(frame):
    with pytest.raises(EmptyROI):
        linecut_qr(frame, qz=50.0)


def test_images_and_thumbnails(frame):
    image, x_axis, y_axis = q_image(frame)
    assert image.shape == (400, 400)
    assert y_axis[0] > y_axis[-1]  # top row is maximum vertical q
    ri, rx, ry = qr_image(frame)
    assert np.array_equal(image, ri)

    thumb = thumbnails(frame)
    assert thumb.dtype == np.uint8
    assert max(thumb.shape) <= 128


# --- fitting ------------------------------------------------------------


def test_q2I_fit_recovers_center(frame):
    fit = circular_average_q2I_fit(frame)
    # the q^2 envelope shifts the apparent center by ~2*sigma^2/q0
    expected = 1.5 + 2 * 0.05**2 / 1.5
    assert fit.q0 == pytest.approx(expected, abs=1e-3)
    assert fit.sigma == pytest.approx(0.05, rel=0.05)
    assert fit.amplitude > 0


def test_q2I_fit_matches_reference_optimizer(frame):
    """Independent check against a general-purpose least-squares fitter."""
    from scipy.optimize import curve_fit

    curve = circular_average(frame)
    q = np.asarray(curve.abscissa)
    y = q**2 * np.asarray(curve.ordinate)

    def model(x, a, q0, sigma, m, c):
        return a * np.exp(-((x - q0) ** 2) / (2 * sigma**2)) + m * x + c

    popt, _ = curve_fit(model, q, y, p0=[y.max(), q[np.argmax(y)], 0.01, 0.0, 0.0])
    fit = circular_average_q2I_fit(frame)
    assert fit.q0 == pytest.approx(popt[1], abs=1e-4)


def test_q2I_fit_noise_stability():
    noiseless = circular_average_q2I_fit(default_frame())
    noisy = circular_average_q2I_fit(default_frame(noise_seed=1))
    assert noisy.q0 == pytest.approx(noiseless.q0, abs=5e-3)


def test_jacobian_matches_independent_differences():
    rng = np.random.default_rng(3)
    q = np.linspace(1.0, 2.0, 80)
    y = rng.random(80)
    params = np.array([5.0, 1.5, 0.05, -1.0, 2.0])
    jac = numeric_jacobian(params, q, y)
    # independent forward/backward estimate at a different step size
    h = 1e-7
    for j in range(5):
        up, dn = params.copy(), params.copy()
        up[j] += h
        dn[j] -= h
        col = (_residual(up, q, y) - _residual(dn, q, y)) / (2 * h)
        denom = max(float(np.max(np.abs(col))), 1e-8)
        assert float(np.max(np.abs(jac[:, j] - col))) / denom < 1e-5


# --- dispatch and I/O ---------------------------------------------------


def test_dispatch_protocols(frame, tmp_path):
    result = dispatch_protocol("circular_average", frame=frame, out_dir=str(tmp_path))
    assert abs(result["peak_x"] - 1.5) <= result["bin_width"]
    assert (tmp_path / "circular_average.csv").exists()

    result = dispatch_protocol("linecut_qz", 0.0, frame=frame)
    assert result["n_points"] > 0

    result = dispatch_protocol("q_image", frame=frame, out_dir=str(tmp_path))
    assert result["image_shape"] == [400, 400]
    assert (tmp_path / "q_image.png").exists()

    result = dispatch_protocol("circular_average_q2I_fit", frame=frame)
    assert result["fit"]["q0"] == pytest.approx(1.5033, abs=1e-3)


def test_dispatch_unknown_protocol(frame):
    with pytest.raises(UnknownProtocol):
        dispatch_protocol("transmute_lead", frame=frame)


def test_frame_io_roundtrip(tmp_path):
    geo = DetectorGeometry(shape=(32, 32), beam_center=(16.0, 16.0))
    frame = synth_frame(geo, [(0.05, 10.0, 0.01)], background=1.0)
    path = tmp_path / "frame.raw"
    save_frame(frame, path)
    restored = load_frame(path)
    assert np.allclose(restored.intensities, frame.intensities, atol=1e-6)
    assert restored.geometry == frame.geometry
    # JSON turns the ring tuples into lists; the values must survive exactly
    assert [tuple(r) for r in restored.metadata["rings"]] == [
        tuple(r) for r in frame.metadata["rings"]
    ]
