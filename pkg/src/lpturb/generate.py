"""Seeded, deterministic test-field generators.

Randomness comes from numpy's counter-based Philox generator keyed on
(seed, shell), so per-shell content is reproducible bit-for-bit regardless
of evaluation order.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import fft as sfft

from .core import GridSpec, RealVectorField, SpectralVectorField
from . import spectral

PRNG_VERSION = "numpy-philox-1"


def _rng(seed: int, *key: int) -> np.random.Generator:
    sub = key[0] if key else 0
    return np.random.Generator(np.random.Philox(key=[np.uint64(seed), np.uint64(sub)]))


def _unit_perp(m: np.ndarray) -> np.ndarray:
    """A deterministic unit vector orthogonal to m."""
    m = np.asarray(m, dtype=float)
    axis = np.zeros(3)
    axis[np.argmin(np.abs(m))] = 1.0
    e = np.cross(m, axis)
    return e / np.linalg.norm(e)


def single_mode(grid: GridSpec, m: Sequence[int], amplitude: float = 1.0,
                kind: str = "sinusoid") -> RealVectorField:
    """One solenoidal Fourier mode.

    kind='sinusoid': A*sin(2*pi m.x/L) e with e perpendicular to m.
    kind='beltrami': curl eigenfield with eigenvalue 2*pi*|m|/L.
    """
    m = np.asarray(m, dtype=int)
    if np.all(m == 0) or np.any(np.abs(m) >= grid.n // 2):
        raise spectral.ShellRangeError(f"mode {tuple(m)} not resolved on n={grid.n}")
    X = grid.meshgrid()
    theta = 2.0 * np.pi * (m[0] * X[0] + m[1] * X[1] + m[2] * X[2]) / grid.L
    e1 = _unit_perp(m)
    if kind == "sinusoid":
        data = amplitude * np.sin(theta)[None, :, :, :] * e1[:, None, None, None]
    elif kind == "beltrami":
        mhat = m / np.linalg.norm(m)
        e2 = np.cross(mhat, e1)
        data = amplitude * (
            np.cos(theta)[None] * e1[:, None, None, None]
            - np.sin(theta)[None] * e2[:, None, None, None]
        )
    else:
        raise ValueError(f"unknown mode kind {kind!r}")
    return RealVectorField(grid, data)


def random_solenoidal(grid: GridSpec, slope: float, q_range: Sequence[int],
                      seed: int, amplitude: float = 1.0) -> RealVectorField:
    """Random divergence-free field with prescribed per-shell energies.

    Shell energies are renormalized exactly to
    ||v_q||_{L^2}^2 = amplitude^2 * 2^(q*slope), i.e. proportional to
    (lambda_q L)^slope.
    """
    q_range = sorted(set(int(q) for q in q_range))
    if not q_range:
        raise ValueError("q_range is empty")
    if q_range[0] < 0 or q_range[-1] > grid.max_shell:
        raise spectral.ShellRangeError(
            f"shells {q_range} outside resolved range [0, {grid.max_shell}]"
        )
    coeffs = np.zeros((3, grid.n, grid.n, grid.nz), dtype=np.complex128)
    for q in q_range:
        rng = _rng(seed, q)
        noise = rng.standard_normal((3, grid.n, grid.n, grid.n))
        c = sfft.rfftn(noise, axes=(1, 2, 3), norm="forward")
        mask = grid.shell == q
        c *= mask
        sv = spectral.leray_project(SpectralVectorField(grid, c))
        e = spectral.shell_energies(sv)[q]
        target = amplitude**2 * 2.0 ** (q * slope)
        if e <= 0:
            raise RuntimeError(f"empty shell {q} after projection")
        coeffs += sv.coefficients * np.sqrt(target / e)
    return spectral.inverse(SpectralVectorField(grid, coeffs))


@dataclass
class PacketLaw:
    """Recipe for a multi-scale wave-packet field of prescribed
    intermittency dimension delta.

    Shell q is populated with N_q = round(2^(q*delta)) compact packets of
    width ~ ell_q = L * 2^-q, so active regions fill a volume fraction
    ~ (ell_q/L)^(3-delta).
    """

    delta: float
    q_range: Sequence[int] = (1, 2, 3, 4, 5, 6)
    seed: int = 0
    amplitude_rule: Callable[[float], float] | None = None
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if not (0.0 <= self.delta <= 3.0):
            raise ValueError(f"delta must be in [0, 3], got {self.delta}")
        if len(self.q_range) == 0:
            raise ValueError("q_range is empty")

    def packets_per_shell(self, q: int) -> int:
        return max(1, int(round(2.0 ** (q * self.delta))))


def _carrier_mode(rng: np.random.Generator, q: int) -> np.ndarray:
    """Axis-aligned mode at (or near) the mid-shell radius 3*2^(q-1)/2.

    The axis is seeded-random; the magnitude is 3*2^(q-2) for q >= 2
    (exactly mid-shell), with the small shells using the nearest in-shell
    integer instead.
    """
    mag = 1 if q == 0 else (2 if q == 1 else 3 * 2 ** (q - 2))
    m0 = np.zeros(3, dtype=int)
    m0[rng.integers(0, 3)] = mag
    return m0


def _packet_cells(rng: np.random.Generator, c: int, count: int) -> np.ndarray:
    """Seeded disjoint-preferred cell indices on the c^3 shell lattice.

    Small counts use greedy farthest-point selection (maximal periodic
    separation); larger counts use stratified sampling, one packet per
    block of a ceil(count^(1/3))^3 partition.
    """
    if count <= 64:
        first = rng.integers(0, c, size=3)
        chosen = [first]
        cand = np.stack(
            np.meshgrid(*[np.arange(c)] * 3, indexing="ij"), axis=-1
        ).reshape(-1, 3)
        dmin = np.full(len(cand), np.inf)
        for _ in range(count - 1):
            d = np.abs(cand - chosen[-1])
            d = np.minimum(d, c - d)
            dmin = np.minimum(dmin, (d**2).sum(axis=1))
            # tiny seeded jitter breaks ties reproducibly
            chosen.append(cand[np.argmax(dmin + rng.random(len(cand)) * 1e-9)])
        return np.array(chosen)
    s = int(np.ceil(count ** (1.0 / 3.0)))
    blocks = rng.choice(s**3, size=count, replace=False)
    b = np.stack(np.unravel_index(blocks, (s, s, s)), axis=1)
    lo = (b * c) // s
    hi = ((b + 1) * c) // s
    return lo + (rng.random((count, 3)) * (hi - lo)).astype(int)


def intermittent_packets(grid: GridSpec, law: PacketLaw) -> RealVectorField:
    """Multi-scale packet field realizing intermittency dimension law.delta.

    Per shell: seeded disjoint-preferred packet centers on the ell_q
    lattice, identical Gaussian envelopes of width ell_q/4 modulated by a
    mid-shell carrier wave, sharp band filter to shell q, solenoidal
    projection, then exact L^inf renormalization per shell via
    law.amplitude_rule (default: constant 1).  Identical translated
    packets (one carrier and one phase per shell) keep the L^inf / L^2
    ratio self-similar across shells; a fully occupied lattice degenerates
    to the plane-wave (space-filling) limit and is emitted as such.
    """
    n, L = grid.n, grid.L
    amp_rule = law.amplitude_rule or (lambda lam: 1.0)
    q_range = sorted(set(int(q) for q in law.q_range))
    if q_range[0] < 0 or 3 * 2 ** (q_range[-1] - 2) >= n // 2:
        raise spectral.ShellRangeError(
            f"shells {q_range} not fully resolved on n={n}"
        )
    x = np.arange(n) * grid.dx
    # periodic (minimum-image) displacement from the origin
    dmin = np.minimum(x, L - x)
    total = np.zeros((3, n, n, n))
    too_few_shells = len(q_range) < 6

    for q in q_range:
        rng = _rng(law.seed, q)
        cells_per_dim = 2**q
        count = min(law.packets_per_shell(q), cells_per_dim**3)
        m0 = _carrier_mode(rng, q)
        theta = 2.0 * np.pi * (
            m0[0] * x[:, None, None] + m0[1] * x[None, :, None] + m0[2] * x[None, None, :]
        ) / L
        phase = rng.random() * 2.0 * np.pi
        # random polarization perpendicular to the carrier wave
        e1 = _unit_perp(m0)
        e2 = np.cross(m0 / np.linalg.norm(m0), e1)
        ang = rng.random() * 2.0 * np.pi
        pol = np.cos(ang) * e1 + np.sin(ang) * e2

        if count >= cells_per_dim**3:
            # space-filling limit: envelopes tile the box, field -> carrier
            conv = np.cos(theta + phase)
        else:
            sigma = L * 2.0**-q / 4.0
            env = np.exp(
                -(dmin[:, None, None] ** 2 + dmin[None, :, None] ** 2
                  + dmin[None, None, :] ** 2) / (2.0 * sigma**2)
            )
            centers = _packet_cells(rng, cells_per_dim, count) * (n // cells_per_dim)
            kernel_hat = sfft.fftn(env * np.exp(1j * theta))
            spikes = np.zeros((n, n, n), dtype=np.complex128)
            np.add.at(
                spikes, (centers[:, 0], centers[:, 1], centers[:, 2]),
                np.exp(1j * phase),
            )
            conv = sfft.ifftn(sfft.fftn(spikes) * kernel_hat).real
        raw = conv[None] * pol[:, None, None, None]

        band = spectral.leray_project(
            spectral.shell_project(RealVectorField(grid, raw), q, q)
        )
        linf = spectral.lp_norm(band, np.inf)
        if linf <= 0:
            raise RuntimeError(f"shell {q} packet field vanished after filtering")
        total += band.data * (amp_rule(grid.lambda_q(q)) / linf)

    out = RealVectorField(grid, total)
    law.metadata.update(
        seed=law.seed,
        prng=PRNG_VERSION,
        shells=q_range,
        too_few_shells_for_fit=too_few_shells,
    )
    return out
