"""Transforms, sharp Littlewood-Paley shell projections, and differential
operators on periodic grids.

All operations are pure: they never mutate their inputs.
"""

from __future__ import annotations

import os

import numpy as np
from scipy import fft as sfft

from .core import GridSpec, RealVectorField, SpectralVectorField


class ShellRangeError(ValueError):
    """Requested shell outside the resolved range."""


def fft_workers() -> int:
    """Worker count for FFT calls, from LPTURB_THREADS (default 1).

    pocketfft splits work across transform batches, so results are
    bit-identical for any worker count.
    """
    try:
        return max(1, int(os.environ.get("LPTURB_THREADS", "1")))
    except ValueError:
        return 1


def forward(field: RealVectorField) -> SpectralVectorField:
    """Real to spectral.  Coefficients carry the 1/n^3 normalization, so a
    single mode A*sin(2*pi*x/L) maps to two conjugate coefficients of
    modulus A/2."""
    c = sfft.rfftn(field.data, axes=(1, 2, 3), norm="forward", workers=fft_workers())
    return SpectralVectorField(field.grid, c)


def inverse(field: SpectralVectorField) -> RealVectorField:
    g = field.grid
    data = sfft.irfftn(field.coefficients, s=(g.n, g.n, g.n), axes=(1, 2, 3),
                       norm="forward", workers=fft_workers())
    return RealVectorField(g, data)


def transform(field):
    """Forward for real input, inverse for spectral input."""
    if isinstance(field, RealVectorField):
        return forward(field)
    if isinstance(field, SpectralVectorField):
        return inverse(field)
    raise TypeError(f"cannot transform {type(field).__name__}")


def _as_spectral(field) -> SpectralVectorField:
    return field if isinstance(field, SpectralVectorField) else forward(field)


def _like(result: SpectralVectorField, template):
    return inverse(result) if isinstance(template, RealVectorField) else result


def lp_norm(field: RealVectorField, p: float) -> float:
    """L^p norm by grid quadrature of the pointwise Euclidean magnitude.

    Exact for p = 2 on band-limited fields (Parseval); p = inf returns the
    grid maximum of |v(x)|.
    """
    if p < 1:
        raise ValueError(f"p must be in [1, inf], got {p}")
    mag = np.sqrt(np.einsum("cijk,cijk->ijk", field.data, field.data))
    if np.isinf(p):
        return float(mag.max())
    return float((np.sum(mag**p) * field.grid.dx**3) ** (1.0 / p))


def spectral_l2(field: SpectralVectorField) -> float:
    """L^2 norm evaluated from coefficients (Parseval)."""
    g = field.grid
    e = np.einsum("ijk,cijk->", g.hermitian_weight, np.abs(field.coefficients) ** 2)
    return float(np.sqrt(g.volume * e))


def shell_project(field, q_lo: int, q_hi: int):
    """Sharp band-pass restriction to shells q_lo..q_hi (inclusive).

    shell_project(v, q, q) is the q-th Littlewood-Paley piece v_q; the mean
    mode is never included.
    """
    if q_lo > q_hi:
        raise ValueError(f"q_lo={q_lo} > q_hi={q_hi}")
    g = field.grid
    if q_hi > g.max_shell or q_lo < 0:
        raise ShellRangeError(
            f"shells [{q_lo}, {q_hi}] outside resolved range [0, {g.max_shell}]"
        )
    spec = _as_spectral(field)
    mask = (g.shell >= q_lo) & (g.shell <= q_hi)
    return _like(SpectralVectorField(g, spec.coefficients * mask), field)


def lowpass(field, q: int):
    """v_{<q}: all shells strictly below q (mean mode excluded)."""
    g = field.grid
    if q <= 0:
        spec = _as_spectral(field)
        return _like(SpectralVectorField(g, np.zeros_like(spec.coefficients)), field)
    return shell_project(field, 0, min(q - 1, g.max_shell))


def highpass(field, q: int):
    """v_{>=q}: all resolved shells at or above q."""
    g = field.grid
    return shell_project(field, q, g.max_shell)


def mean_mode(field) -> np.ndarray:
    """The m = 0 Fourier coefficient (spatial mean), shape (3,)."""
    spec = _as_spectral(field)
    return spec.coefficients[:, 0, 0, 0].real.copy()


def shell_energies(field) -> np.ndarray:
    """Per-shell ||v_q||_{L^2}^2, index q = 0..max_shell.

    Computed directly from coefficients; no per-shell inverse transform.
    """
    g = field.grid
    spec = _as_spectral(field)
    power = g.hermitian_weight * np.einsum(
        "cijk->ijk", np.abs(spec.coefficients) ** 2
    )
    out = np.zeros(g.max_shell + 1)
    sel = g.shell >= 0
    np.add.at(out, g.shell[sel], power[sel])
    return g.volume * out


def differential(field, kind: str):
    """Exact spectral differentiation.

    kind='curl' / 'divergence' act on vector fields; kind='gradient' acts on
    a scalar sample array (n,n,n) paired with a grid keyword.
    """
    if kind == "curl":
        return curl(field)
    if kind == "divergence":
        return divergence(field)
    if kind == "gradient":
        raise TypeError("use gradient(scalar, grid) for scalar input")
    raise ValueError(f"unknown differential kind {kind!r}")


def _ik(grid: GridSpec):
    f = 2j * np.pi / grid.L
    return f * grid.mx, f * grid.my, f * grid.mz


def curl(field):
    g = field.grid
    spec = _as_spectral(field)
    kx, ky, kz = _ik(g)
    cx, cy, cz = spec.coefficients
    out = np.stack(
        [ky * cz - kz * cy, kz * cx - kx * cz, kx * cy - ky * cx]
    )
    return _like(SpectralVectorField(g, out), field)


def divergence(field) -> np.ndarray:
    """Divergence as a real scalar sample array (n,n,n)."""
    g = field.grid
    spec = _as_spectral(field)
    kx, ky, kz = _ik(g)
    d = kx * spec.coefficients[0] + ky * spec.coefficients[1] + kz * spec.coefficients[2]
    return sfft.irfftn(d, s=(g.n, g.n, g.n), norm="forward")


def gradient(scalar: np.ndarray, grid: GridSpec) -> RealVectorField:
    c = sfft.rfftn(scalar, norm="forward")
    kx, ky, kz = _ik(grid)
    out = np.stack([kx * c, ky * c, kz * c])
    return inverse(SpectralVectorField(grid, out))


def laplacian_coefficients(grid: GridSpec) -> np.ndarray:
    """Eigenvalues of the Laplacian per mode: -(2*pi*|m|/L)^2."""
    return -grid.k2_phys


def leray_project(field):
    """Orthogonal projection onto divergence-free fields (absorbs pressure).

    Nyquist planes are zeroed: the one-sided m = -n/2 modes cannot stay both
    real-representable and solenoidal, and they are excluded from analysis
    shells anyway.  The map remains an orthogonal projection.
    """
    g = field.grid
    spec = _as_spectral(field)
    c = spec.coefficients * ~g.nyquist_mask
    m2 = np.maximum(g.m2, 1).astype(float)
    mdotc = (g.mx * c[0] + g.my * c[1] + g.mz * c[2]) / m2
    out = np.stack([c[0] - g.mx * mdotc, c[1] - g.my * mdotc, c[2] - g.mz * mdotc])
    return _like(SpectralVectorField(g, out), field)


def dealias(field: SpectralVectorField) -> SpectralVectorField:
    """2/3-rule truncation: zero every mode with any |m_i| > n/3."""
    g = field.grid
    cut = g.n / 3.0
    mask = (np.abs(g.mx) <= cut) & (np.abs(g.my) <= cut) & (np.abs(g.mz) <= cut)
    return SpectralVectorField(g, field.coefficients * mask)


def dealias_mask(grid: GridSpec) -> np.ndarray:
    cut = grid.n / 3.0
    return (np.abs(grid.mx) <= cut) & (np.abs(grid.my) <= cut) & (np.abs(grid.mz) <= cut)


def divergence_l2(field) -> float:
    """||div v||_{L^2} from coefficients."""
    g = field.grid
    spec = _as_spectral(field)
    kx, ky, kz = _ik(g)
    d = kx * spec.coefficients[0] + ky * spec.coefficients[1] + kz * spec.coefficients[2]
    e = np.sum(g.hermitian_weight * np.abs(d) ** 2)
    return float(np.sqrt(g.volume * e))


def gradient_l2_squared(field) -> float:
    """||grad v||_{L^2}^2 (all components) from coefficients."""
    g = field.grid
    spec = _as_spectral(field)
    e = np.einsum("ijk,cijk->", g.hermitian_weight * g.k2_phys, np.abs(spec.coefficients) ** 2)
    return float(g.volume * e)


def integral(samples: np.ndarray, grid: GridSpec) -> float:
    """Grid quadrature of a scalar sample array over the torus."""
    return float(np.sum(samples) * grid.dx**3)
