import numpy as np
import pytest

from lpturb import spectral
from lpturb.core import GridSpec
from lpturb.generate import (PacketLaw, intermittent_packets,
                             random_solenoidal, single_mode)
from lpturb.spectral import ShellRangeError


def test_single_mode_sinusoid_exact():
    g = GridSpec(32, 1.0)
    f = single_mode(g, (0, 0, 2), amplitude=1.5)
    z = g.coordinates()[2]
    expected = 1.5 * np.sin(2 * np.pi * 2 * z / g.L)
    # the polarization is perpendicular to m = (0, 0, 2)
    mag = np.sqrt(np.einsum("cijk,cijk->ijk", f.data, f.data))
    assert np.allclose(mag, np.abs(expected), atol=1e-12)
    assert spectral.divergence_l2(spectral.forward(f)) < 1e-12


def test_beltrami_is_curl_eigenfunction():
    g = GridSpec(32, 1.0)
    f = single_mode(g, (1, 2, 2), amplitude=1.0, kind="beltrami")
    f_hat = spectral.forward(f)
    w = spectral.curl(f_hat)
    k = 2 * np.pi * 3 / g.L
    assert np.allclose(w.coefficients, k * f_hat.coefficients, atol=1e-9 * k)


def test_random_solenoidal_slope_and_shells():
    g = GridSpec(64, 1.0)
    shells = [1, 2, 3, 4]
    f = random_solenoidal(g, slope=-2.0, q_range=shells, seed=0)
    f_hat = spectral.forward(f)
    energies = spectral.shell_energies(f_hat)
    assert spectral.divergence_l2(f_hat) < 1e-12
    occupied = np.nonzero(energies > 1e-30)[0]
    assert list(occupied) == shells
    # per-shell energy follows E_q ~ lambda_q^slope: slope of log2(E) vs q
    logs = np.log2(energies[shells])
    fitted = np.polyfit(shells, logs, 1)[0]
    assert abs(fitted - (-2.0)) < 0.15


def test_random_solenoidal_deterministic():
    g = GridSpec(32, 1.0)
    a = random_solenoidal(g, -1.0, [1, 2], seed=9)
    b = random_solenoidal(g, -1.0, [1, 2], seed=9)
    c = random_solenoidal(g, -1.0, [1, 2], seed=10)
    assert np.array_equal(a.data, b.data)
    assert not np.array_equal(a.data, c.data)


@pytest.mark.parametrize("delta", [0.0, 1.0, 2.0, 3.0])
def test_packets_shell_support_and_normalization(delta):
    g = GridSpec(32, 1.0)
    law = PacketLaw(delta=delta, q_range=range(1, 4), seed=4)
    f = intermittent_packets(g, law)
    f_hat = spectral.forward(f)
    assert spectral.divergence_l2(f_hat) < 1e-10 * spectral.spectral_l2(f_hat)
    energies = spectral.shell_energies(f_hat)
    occupied = np.nonzero(energies > 1e-28 * energies.max())[0]
    assert list(occupied) == [1, 2, 3]
    # amplitude rule: each shell piece has unit sup by default
    for q in (1, 2, 3):
        piece = spectral.inverse(spectral.shell_project(f_hat, q, q))
        sup = np.sqrt(np.einsum("cijk,cijk->ijk", piece.data, piece.data)).max()
        assert np.isclose(sup, 1.0, rtol=1e-10)


def test_packets_deterministic():
    g = GridSpec(32, 1.0)
    law = PacketLaw(delta=1.0, q_range=range(1, 4), seed=7)
    a = intermittent_packets(g, law)
    b = intermittent_packets(g, law)
    assert np.array_equal(a.data, b.data)


def test_packets_sup_concentration_scaling():
    # maximally intermittent fields keep a grid-independent sup while their
    # L^2 norm shrinks with shell; space-filling fields keep the ratio flat
    g = GridSpec(64, 1.0)
    for delta, tol in ((0.0, 0.35), (3.0, 0.2)):
        law = PacketLaw(delta=delta, q_range=range(1, 6), seed=2)
        f_hat = spectral.forward(intermittent_packets(g, law))
        ratios = []
        for q in range(1, 6):
            piece = spectral.inverse(spectral.shell_project(f_hat, q, q))
            mag = np.sqrt(np.einsum("cijk,cijk->ijk", piece.data, piece.data))
            l2 = spectral.lp_norm(piece, 2.0)
            ratios.append(np.log2(mag.max() / l2))
        slope = np.polyfit(range(1, 6), ratios, 1)[0]
        # log2(Linf/L2) grows like (3 - delta)/2 per shell
        assert abs(slope - (3.0 - delta) / 2.0) < tol


def test_packet_law_validation():
    with pytest.raises(ValueError):
        PacketLaw(delta=-0.5, q_range=range(1, 3), seed=0)
    with pytest.raises(ValueError):
        PacketLaw(delta=3.5, q_range=range(1, 3), seed=0)
    g = GridSpec(16, 1.0)
    # carrier for the top requested shell must stay below Nyquist
    with pytest.raises(ShellRangeError):
        intermittent_packets(g, PacketLaw(delta=1.0, q_range=range(1, 6), seed=0))


def test_packet_metadata():
    g = GridSpec(32, 1.0)
    law = PacketLaw(delta=2.0, q_range=range(1, 4), seed=3)
    intermittent_packets(g, law)
    assert law.metadata["seed"] == 3
    assert law.metadata["too_few_shells_for_fit"] is True
    assert law.packets_per_shell(2) == max(1, round(2 ** (2 * 2.0)))
