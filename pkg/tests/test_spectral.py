import numpy as np
import pytest

from lpturb import spectral
from lpturb.core import GridSpec, RealVectorField
from lpturb.generate import random_solenoidal, single_mode
from lpturb.spectral import ShellRangeError


def test_grid_shell_membership():
    g = GridSpec(32, 1.0)
    # |m| = 1 sits in shell 0; |m| = 2 in shell 1; |m| = 3, 4 in shell 2
    assert g.shell[0, 0, 1] == 0
    assert g.shell[0, 0, 2] == 1
    assert g.shell[0, 3, 0] == 2
    assert g.shell[0, 0, 4] == 2
    assert g.shell[0, 0, 0] == -1          # mean mode
    assert g.shell[16, 0, 0] == -2         # Nyquist plane excluded
    # corner modes reach |m| = sqrt(3) * 15, which lands in shell 5
    assert g.max_shell == 5


def test_grid_requires_power_of_two():
    with pytest.raises(ValueError):
        GridSpec(48, 1.0)
    with pytest.raises(ValueError):
        GridSpec(8, 1.0)


def test_transform_roundtrip(random_field_32):
    v_hat = spectral.forward(random_field_32)
    back = spectral.inverse(v_hat)
    assert np.allclose(back.data, random_field_32.data, atol=1e-13)


def test_sinusoid_coefficient_normalization():
    # A*sin(2*pi*z) has Fourier coefficient modulus A/2 under the
    # forward-normalized transform
    g = GridSpec(32, 1.0)
    f = single_mode(g, (0, 0, 1), amplitude=2.0)
    f_hat = spectral.forward(f)
    assert np.isclose(np.abs(f_hat.coefficients).max(), 1.0, atol=1e-12)


def test_parseval_shell_closure(random_field_32):
    v_hat = spectral.forward(random_field_32)
    total = spectral.spectral_l2(v_hat) ** 2
    shells = spectral.shell_energies(v_hat)
    g = v_hat.grid
    mean = g.volume * np.sum(np.abs(spectral.mean_mode(v_hat)) ** 2)
    assert np.isclose(shells.sum() + mean, total, rtol=1e-12)
    # and the L^2 quadrature norm agrees with Parseval
    assert np.isclose(spectral.lp_norm(random_field_32, 2.0) ** 2, total,
                      rtol=1e-12)


def test_projector_idempotent_and_disjoint(random_field_32):
    v_hat = spectral.forward(random_field_32)
    p2 = spectral.shell_project(v_hat, 2, 2)
    p22 = spectral.shell_project(p2, 2, 2)
    assert np.allclose(p2.coefficients, p22.coefficients, atol=1e-15)
    p3 = spectral.shell_project(v_hat, 3, 3)
    cross = spectral.shell_project(p3, 2, 2)
    assert np.max(np.abs(cross.coefficients)) == 0.0


def test_lowpass_highpass_partition(random_field_32):
    v_hat = spectral.forward(random_field_32)
    g = v_hat.grid
    lo = spectral.lowpass(v_hat, 2)
    hi = spectral.highpass(v_hat, 2)
    resolved = v_hat.coefficients * (g.shell >= 0)
    assert np.allclose(lo.coefficients + hi.coefficients, resolved, atol=1e-15)


def test_div_of_curl_is_zero(random_field_32):
    v_hat = spectral.forward(random_field_32)
    w = spectral.curl(v_hat)
    assert spectral.divergence_l2(w) < 1e-12 * spectral.spectral_l2(w)


def test_leray_pythagoras():
    g = GridSpec(32, 1.0)
    rng = np.random.default_rng(0)
    raw = RealVectorField(g, rng.standard_normal((3, 32, 32, 32)))
    v_hat = spectral.forward(raw)
    sol = spectral.leray_project(v_hat)
    grad = v_hat.copy()
    grad.coefficients = grad.coefficients - sol.coefficients
    # the projection also zeroes Nyquist modes, so compare on the kept set
    kept = v_hat.copy()
    kept.coefficients = kept.coefficients * (g.shell != -2)
    grad.coefficients[:, g.shell == -2] = 0.0
    e_parts = spectral.spectral_l2(sol) ** 2 + spectral.spectral_l2(grad) ** 2
    assert np.isclose(spectral.spectral_l2(kept) ** 2, e_parts, rtol=1e-12)
    assert spectral.divergence_l2(sol) < 1e-12 * spectral.spectral_l2(sol)


def test_leray_fixes_solenoidal_fields(random_field_32):
    v_hat = spectral.forward(random_field_32)
    proj = spectral.leray_project(v_hat)
    assert np.allclose(proj.coefficients, v_hat.coefficients, atol=1e-14)


def test_curl_eigenvalue_on_beltrami():
    g = GridSpec(32, 1.0)
    f = single_mode(g, (0, 0, 3), amplitude=1.0, kind="beltrami")
    f_hat = spectral.forward(f)
    w = spectral.curl(f_hat)
    k = 2 * np.pi * 3 / g.L
    assert np.allclose(w.coefficients, k * f_hat.coefficients, atol=1e-10 * k)


def test_laplacian_matches_curl_curl(random_field_32):
    v_hat = spectral.forward(random_field_32)
    cc = spectral.curl(spectral.curl(v_hat))
    lap = v_hat.coefficients * spectral.laplacian_coefficients(v_hat.grid)
    # curl curl = grad div - laplacian = -laplacian on solenoidal fields
    assert np.allclose(cc.coefficients, -lap, atol=1e-8)


def test_dealias_mask_two_thirds():
    g = GridSpec(32, 1.0)
    mask = spectral.dealias_mask(g)
    assert mask[0, 0, 10]            # |m| = 10 <= 32 // 3 is kept
    assert not mask[0, 0, 11]        # |m| = 11 is truncated
    assert mask[0, 0, 0]             # mean mode survives dealiasing


def test_shell_range_error(random_field_32):
    v_hat = spectral.forward(random_field_32)
    with pytest.raises(ShellRangeError):
        spectral.shell_project(v_hat, 0, 99)


def test_integral_quadrature(random_field_32):
    val = spectral.integral(random_field_32.data[0] ** 2, random_field_32.grid)
    ref = np.mean(random_field_32.data[0] ** 2) * random_field_32.grid.volume
    assert np.isclose(val, ref, rtol=1e-14)


def test_fft_workers_env(monkeypatch):
    monkeypatch.setenv("LPTURB_THREADS", "3")
    assert spectral.fft_workers() == 3
    monkeypatch.delenv("LPTURB_THREADS")
    assert spectral.fft_workers() == 1


def test_worker_count_does_not_change_bits(random_field_32, monkeypatch):
    v_hat1 = spectral.forward(random_field_32)
    monkeypatch.setenv("LPTURB_THREADS", "4")
    v_hat2 = spectral.forward(random_field_32)
    assert np.array_equal(v_hat1.coefficients, v_hat2.coefficients)
