import numpy as np
import pytest

from lpturb import diagnostics, spectral
from lpturb.core import GridSpec, Snapshot
from lpturb.generate import random_solenoidal, single_mode


@pytest.fixture(scope="module")
def snap32():
    g = GridSpec(32, 1.0)
    B = random_solenoidal(g, -1.0, [1, 2, 3], seed=1)
    u = random_solenoidal(g, -1.0, [1, 2], seed=2, amplitude=0.5)
    return Snapshot(0.0, {"B": B, "u": u})


def test_shell_norm_series_l2_matches_parseval(snap32):
    series = diagnostics.shell_norm_series([snap32], "B")
    f_hat = spectral.forward(snap32.fields["B"])
    energies = spectral.shell_energies(f_hat)
    for i, q in enumerate(series.shells):
        assert np.isclose(series.l2[0, i], np.sqrt(energies[q]), rtol=1e-12)


def test_shell_norm_series_restrict(snap32):
    series = diagnostics.shell_norm_series([snap32], "B")
    sub = series.restrict([1, 2])
    assert list(sub.shells) == [1, 2]
    assert sub.l2.shape == (1, 2)


def test_elsasser_fields_derived(snap32):
    zp = diagnostics.shell_norm_series([snap32], "Z+")
    u_hat = spectral.forward(snap32.fields["u"])
    b_hat = spectral.forward(snap32.fields["B"])
    total = u_hat.coefficients + b_hat.coefficients
    e = spectral.shell_energies(
        type(u_hat)(u_hat.grid, total))
    for i, q in enumerate(zp.shells):
        assert np.isclose(zp.l2[0, i], np.sqrt(e[q]), rtol=1e-12)


def test_spectrum_table_parseval(snap32):
    table = diagnostics.energy_spectrum([snap32], "B")
    f_hat = spectral.forward(snap32.fields["B"])
    assert np.isclose(table.total_energy,
                      0.5 * spectral.spectral_l2(f_hat) ** 2, rtol=1e-12)
    assert np.isclose(table.e_q.sum() + table.mean_mode_energy,
                      table.total_energy, rtol=1e-10)


def test_dissipation_exact_on_known_field():
    # for A*sin(2*pi*m*z) (single shell), eps_b = mu * k^2 * ||B||_2^2
    g = GridSpec(32, 1.0)
    B = single_mode(g, (0, 0, 2), amplitude=1.0)
    snap = Snapshot(0.0, {"B": B})
    mu = 0.01
    summary = diagnostics.dissipation_rates([snap], nu=0.0, mu=mu)
    k = 2 * np.pi * 2 / g.L
    b_hat = spectral.forward(B)
    expected = mu * k**2 * spectral.spectral_l2(b_hat) ** 2
    assert np.isclose(summary.eps_b, expected, rtol=1e-12)


def test_flux_vanishes_on_single_shell():
    # a field supported in one shell has no cross-shell transfer
    g = GridSpec(32, 1.0)
    B = random_solenoidal(g, 0.0, [2], seed=3)
    snap = Snapshot(0.0, {"B": B})
    pi, stats = diagnostics.magnetic_flux(snap, 4, d_i=0.1)
    assert abs(stats["mean"]) < 1e-14


def test_flux_full_equals_triad_two_shell():
    g = GridSpec(32, 1.0)
    B = random_solenoidal(g, 0.0, [1, 2], seed=4)
    snap = Snapshot(0.0, {"B": B})
    _, full = diagnostics.magnetic_flux(snap, 2, d_i=0.2, form="full")
    _, triad = diagnostics.magnetic_flux(snap, 2, d_i=0.2, form="triad")
    assert np.isclose(full["mean"], triad["mean"],
                      rtol=1e-8, atol=1e-12 * abs(full["mean"]) + 1e-16)


def test_structure_function_sinusoid_oracle():
    # S_2 along z of A*sin(2 pi z / L) polarized along a fixed direction:
    # S_2(ell) = A^2 (1 - cos(2 pi ell / L))
    g = GridSpec(32, 1.0)
    A = 1.3
    B = single_mode(g, (0, 0, 1), amplitude=A)
    snap = Snapshot(0.0, {"B": B})
    ells = [k * g.dx for k in range(1, 17)]
    table = diagnostics.structure_function([snap], "B", [2.0], ells,
                                           direction=2)
    expected = A**2 * (1.0 - np.cos(2 * np.pi * np.asarray(ells) / g.L))
    assert np.allclose(table.column(2.0), expected, atol=1e-12)


def test_structure_function_monte_carlo_close_to_exhaustive(snap32):
    ells = [2 * snap32.grid.dx, 4 * snap32.grid.dx]
    exact = diagnostics.structure_function([snap32], "B", [2.0], ells)
    mc = diagnostics.structure_function([snap32], "B", [2.0], ells,
                                        sampling="monte_carlo",
                                        n_samples=20000, seed=0)
    assert np.allclose(mc.column(2.0), exact.column(2.0), rtol=0.1)


def test_structure_function_rejects_off_grid_ell(snap32):
    with pytest.raises(ValueError):
        diagnostics.structure_function([snap32], "B", [2.0],
                                       [1.37 * snap32.grid.dx])


def test_extreme_dissipation_positive(snap32):
    eps_bar, eps_under = diagnostics.extreme_dissipation(
        [snap32], d_i=0.1, q_range=[1, 2, 3])
    assert eps_bar > 0
    assert np.isfinite(eps_under)


def test_table_csv_roundtrip(tmp_path, snap32):
    path = tmp_path / "spectrum.csv"
    diagnostics.energy_spectrum([snap32], "B").to_csv(path)
    lines = path.read_text().splitlines()
    assert lines[0].startswith("#{")
    import json
    meta = json.loads(lines[0][1:])
    assert meta["columns"][0] == "q"
    assert lines[1] == ",".join(meta["columns"])
    assert len(lines) > 2
