"""Periodic cubic grids and vector field containers.

Conventions used throughout the package:

* The domain is the torus [0, L]^3 sampled on an n x n x n grid,
  n a power of two.
* Fourier mode m in Z^3 carries analysis wavenumber |m| / L, so the
  q-th dyadic shell sits at lambda_q = 2^q / L.
* Spectral coefficients follow the "forward" FFT normalization:
  v(x) = sum_m c_m exp(2*pi*i m.x / L), stored on the rfft half grid.
* Derivatives multiply coefficients by i * 2*pi*m / L.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class GridError(ValueError):
    """Invalid grid configuration."""


class GridSpec:
    """Uniform periodic cubic grid: n points per dimension, edge length L."""

    def __init__(self, n: int, L: float = 1.0):
        n = int(n)
        if n < 16 or (n & (n - 1)) != 0:
            raise GridError(f"grid size must be a power of two >= 16, got {n}")
        if not (L > 0):
            raise GridError(f"domain size must be positive, got {L}")
        self.n = n
        self.L = float(L)
        self.nz = n // 2 + 1
        self.dx = self.L / n
        self.volume = self.L**3
        self._build_mode_tables()

    def _build_mode_tables(self):
        n = self.n
        mi = np.rint(np.fft.fftfreq(n) * n).astype(np.int64)
        mz = np.rint(np.fft.rfftfreq(n) * n).astype(np.int64)
        self.mx = mi[:, None, None]
        self.my = mi[None, :, None]
        self.mz = mz[None, None, :]
        self.m2 = (self.mx**2 + self.my**2 + self.mz**2).astype(np.int64)

        # modes touching a Nyquist plane are excluded from analysis shells
        half = n // 2
        self.nyquist_mask = (
            (np.abs(self.mx) == half)
            | (np.abs(self.my) == half)
            | (np.abs(self.mz) == half)
        )

        # shell index: 2^(q-1) < |m| <= 2^q for q >= 1, |m| = 1 -> q = 0
        with np.errstate(divide="ignore"):
            q = np.ceil(0.5 * np.log2(np.maximum(self.m2, 1))).astype(np.int64)
        shell = np.maximum(q, 0)
        shell[self.m2 == 0] = -1
        shell[self.nyquist_mask] = -2
        self.shell = shell
        self.max_shell = int(shell.max())

        # multiplicity of each stored rfft coefficient in the full spectrum
        self.hermitian_weight = np.broadcast_to(
            np.where((self.mz == 0) | (self.mz == half), 1.0, 2.0),
            shell.shape,
        ).copy()

        # number of full-spectrum modes per shell (Bernstein upper constant)
        counts = np.zeros(self.max_shell + 1, dtype=np.int64)
        sel = shell >= 0
        np.add.at(counts, shell[sel], self.hermitian_weight[sel].astype(np.int64))
        self.shell_mode_counts = counts

        self.k2_phys = (2.0 * np.pi / self.L) ** 2 * self.m2.astype(float)

    def lambda_q(self, q) -> np.ndarray | float:
        """Dyadic shell wavenumber lambda_q = 2^q / L."""
        return (2.0 ** np.asarray(q, dtype=float)) / self.L

    def coordinates(self):
        """Physical coordinate arrays, shape (n,) each, open interval [0, L)."""
        x = np.arange(self.n) * self.dx
        return x, x, x

    def meshgrid(self):
        x, y, z = self.coordinates()
        return np.meshgrid(x, y, z, indexing="ij")

    def __eq__(self, other):
        return isinstance(other, GridSpec) and self.n == other.n and self.L == other.L

    def __hash__(self):
        return hash((self.n, self.L))

    def __repr__(self):
        return f"GridSpec(n={self.n}, L={self.L})"


@dataclass
class RealVectorField:
    """3-component real field sampled on a periodic cubic grid.

    data layout: (3, n, n, n), component-major in memory; serialization
    transposes to component-minor (see snapshot_io).
    """

    grid: GridSpec
    data: np.ndarray

    def __post_init__(self):
        expected = (3, self.grid.n, self.grid.n, self.grid.n)
        self.data = np.asarray(self.data, dtype=np.float64)
        if self.data.shape != expected:
            raise ValueError(f"field data must have shape {expected}, got {self.data.shape}")
        if not np.all(np.isfinite(self.data)):
            raise ValueError("field contains non-finite samples")

    def copy(self) -> "RealVectorField":
        return RealVectorField(self.grid, self.data.copy())

    def __add__(self, other):
        self._check(other)
        return RealVectorField(self.grid, self.data + other.data)

    def __sub__(self, other):
        self._check(other)
        return RealVectorField(self.grid, self.data - other.data)

    def __mul__(self, a: float):
        return RealVectorField(self.grid, self.data * a)

    __rmul__ = __mul__

    def _check(self, other):
        if self.grid != other.grid:
            raise ValueError("grid mismatch")


@dataclass
class SpectralVectorField:
    """Fourier coefficients of a RealVectorField on the rfft half grid."""

    grid: GridSpec
    coefficients: np.ndarray

    def __post_init__(self):
        g = self.grid
        expected = (3, g.n, g.n, g.nz)
        self.coefficients = np.asarray(self.coefficients, dtype=np.complex128)
        if self.coefficients.shape != expected:
            raise ValueError(
                f"coefficients must have shape {expected}, got {self.coefficients.shape}"
            )

    def copy(self) -> "SpectralVectorField":
        return SpectralVectorField(self.grid, self.coefficients.copy())


@dataclass
class Snapshot:
    """One time slice of named fields on a common grid."""

    t: float
    fields: dict = field(default_factory=dict)  # tag -> RealVectorField

    @property
    def grid(self) -> GridSpec:
        return next(iter(self.fields.values())).grid
