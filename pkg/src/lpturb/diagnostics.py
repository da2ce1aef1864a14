"""Measured turbulence quantities: shell norms, spectra, dissipation
rates, shell-flux, extremal dissipation rates, and structure functions.

Averaging convention: <.> denotes the space-time average, i.e. the
arithmetic mean over snapshots of the per-unit-volume spatial mean.
Shell quantities always exclude the mean (m = 0) mode, which is reported
separately where relevant.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .core import GridSpec, RealVectorField, Snapshot
from . import spectral
from .generate import _rng


def _snapshot_list(snapshots):
    snaps = list(snapshots)
    if not snaps:
        raise ValueError("empty snapshot stream")
    g = snaps[0].grid
    for s in snaps:
        if s.grid != g:
            raise ValueError("snapshots on mismatched grids")
    return snaps, g


def _get_field(snap: Snapshot, tag: str) -> RealVectorField:
    if tag in snap.fields:
        return snap.fields[tag]
    # Elsasser combinations derived on the fly from u and B
    if tag in ("Z+", "Z-") and "u" in snap.fields and "B" in snap.fields:
        u, B = snap.fields["u"], snap.fields["B"]
        return u + B if tag == "Z+" else u - B
    raise KeyError(f"snapshot has no field {tag!r} (available: {sorted(snap.fields)})")


def write_table(path, metadata: dict, columns, rows):
    """CSV with a one-line JSON header carrying table metadata."""
    with open(path, "w") as f:
        f.write("#" + json.dumps({"columns": list(columns), **metadata}) + "\n")
        f.write(",".join(columns) + "\n")
        for row in rows:
            cells = []
            for x in row:
                if isinstance(x, (float, np.floating)):
                    cells.append(repr(float(x)))
                elif isinstance(x, np.integer):
                    cells.append(str(int(x)))
                else:
                    cells.append(str(x))
            f.write(",".join(cells) + "\n")


@dataclass
class ShellNormSeries:
    """Per-snapshot, per-shell L^2, L^inf and L^3 norms of one field."""

    tag: str
    grid: GridSpec
    times: np.ndarray          # (nt,)
    shells: np.ndarray         # (nq,)
    l2: np.ndarray             # (nt, nq)
    linf: np.ndarray           # (nt, nq)
    l3: np.ndarray             # (nt, nq)

    def mean(self, which: str) -> np.ndarray:
        """Time-averaged norms, shape (nq,)."""
        return getattr(self, which).mean(axis=0)

    def restrict(self, q_range) -> "ShellNormSeries":
        q_range = np.asarray(sorted(set(int(q) for q in q_range)))
        idx = np.searchsorted(self.shells, q_range)
        if not np.array_equal(self.shells[idx], q_range):
            raise ValueError(f"shells {q_range} not all present in series")
        return ShellNormSeries(self.tag, self.grid, self.times, q_range,
                               self.l2[:, idx], self.linf[:, idx], self.l3[:, idx])

    def to_csv(self, path):
        cols = ["t", "q", "l2", "linf", "l3"]
        rows = [
            (self.times[i], int(q), self.l2[i, j], self.linf[i, j], self.l3[i, j])
            for i in range(len(self.times))
            for j, q in enumerate(self.shells)
        ]
        write_table(path, {"table": "shell_norms", "field": self.tag,
                           "shells": [int(q) for q in self.shells]}, cols, rows)


def shell_norm_series(snapshots, tag: str, q_range=None) -> ShellNormSeries:
    snaps, g = _snapshot_list(snapshots)
    if q_range is None:
        q_range = range(0, g.max_shell + 1)
    qs = np.asarray(sorted(set(int(q) for q in q_range)))
    if qs[0] < 0 or qs[-1] > g.max_shell:
        raise spectral.ShellRangeError(
            f"shells {qs} outside resolved range [0, {g.max_shell}]")
    times, l2, linf, l3 = [], [], [], []
    for snap in snaps:
        v = _get_field(snap, tag)
        spec = spectral.forward(v)
        e_q = spectral.shell_energies(spec)
        row2, rowi, row3 = [], [], []
        for q in qs:
            vq = spectral.shell_project(spec, q, q)
            vq_real = spectral.inverse(vq)
            row2.append(np.sqrt(e_q[q]))
            rowi.append(spectral.lp_norm(vq_real, np.inf))
            row3.append(spectral.lp_norm(vq_real, 3))
        times.append(snap.t)
        l2.append(row2)
        linf.append(rowi)
        l3.append(row3)
    return ShellNormSeries(tag, g, np.asarray(times), qs,
                           np.asarray(l2), np.asarray(linf), np.asarray(l3))


@dataclass
class SpectrumTable:
    """Shell energies and the dyadic energy spectrum E(lambda_q).

    e_q = (1/2) <|v_q|^2> (space-time mean per unit volume);
    E(lambda_q) = <|v_q|^2> / lambda_q, the adopted exact definition.
    """

    tag: str
    grid: GridSpec
    shells: np.ndarray
    lambda_q: np.ndarray
    e_q: np.ndarray
    spectrum: np.ndarray
    mean_mode_energy: float
    total_energy: float
    window: tuple

    def to_csv(self, path):
        cols = ["q", "lambda_q", "e_q", "E"]
        rows = list(zip((int(q) for q in self.shells), self.lambda_q, self.e_q, self.spectrum))
        write_table(path, {"table": "spectrum", "field": self.tag,
                           "window": list(self.window),
                           "mean_mode_energy": self.mean_mode_energy,
                           "total_energy": self.total_energy}, cols, rows)


def energy_spectrum(snapshots, tag: str) -> SpectrumTable:
    snaps, g = _snapshot_list(snapshots)
    qs = np.arange(0, g.max_shell + 1)
    acc = np.zeros(len(qs))
    mean_e = 0.0
    total = 0.0
    for snap in snaps:
        v = _get_field(snap, tag)
        spec = spectral.forward(v)
        acc += spectral.shell_energies(spec) / g.volume
        m0 = spectral.mean_mode(spec)
        mean_e += 0.5 * float(m0 @ m0)
        total += 0.5 * spectral.lp_norm(v, 2) ** 2 / g.volume
    nt = len(snaps)
    acc /= nt
    mean_e /= nt
    total /= nt
    e_q = 0.5 * acc
    closure = abs(e_q.sum() + mean_e - total)
    if closure > 1e-10 * max(total, 1e-300):
        raise AssertionError(f"Parseval shell closure violated: {closure:.3e}")
    lam = g.lambda_q(qs)
    return SpectrumTable(tag, g, qs, lam, e_q, acc / lam, mean_e, total,
                         (snaps[0].t, snaps[-1].t))


@dataclass
class DissipationSummary:
    eps_u: float
    eps_b: float
    eps_bar_b: float | None = None
    eps_under_b: float | None = None
    details: dict = field(default_factory=dict)


def dissipation_rates(snapshots, nu: float, mu: float) -> DissipationSummary:
    """eps_u = nu <||grad u||^2>/|O|, eps_b = mu <||grad B||^2>/|O|."""
    if nu < 0 or mu < 0:
        raise ValueError("nu and mu must be nonnegative")
    snaps, g = _snapshot_list(snapshots)
    gu = gb = 0.0
    nu_count = nb_count = 0
    for snap in snaps:
        if "u" in snap.fields:
            gu += spectral.gradient_l2_squared(snap.fields["u"])
            nu_count += 1
        if "B" in snap.fields:
            gb += spectral.gradient_l2_squared(snap.fields["B"])
            nb_count += 1
    eps_u = nu * gu / (nu_count * g.volume) if nu_count else 0.0
    eps_b = mu * gb / (nb_count * g.volume) if nb_count else 0.0
    return DissipationSummary(eps_u=eps_u, eps_b=eps_b)


def _flux_density_full(B: RealVectorField, q: int, d_i: float) -> np.ndarray:
    """d_i ((curl B_{>=q}) x B) . curl B_{<q}, pointwise."""
    spec = spectral.forward(B)
    j_hi = spectral.inverse(spectral.curl(spectral.highpass(spec, q)))
    j_lo = spectral.inverse(spectral.curl(spectral.lowpass(spec, q)))
    cross = np.cross(j_hi.data, B.data, axis=0)
    return d_i * np.einsum("cijk,cijk->ijk", cross, j_lo.data)


def magnetic_flux(snapshot: Snapshot, q: int, d_i: float, form: str = "full"):
    """Magnetic energy flux below shell q and its density statistics.

    Returns (Pi, stats) where stats has keys mean, mean_abs, max of the
    pointwise flux density pi_{b,q}.
    """
    B = _get_field(snapshot, "B")
    g = B.grid
    if not (0 <= q <= g.max_shell):
        raise spectral.ShellRangeError(f"q={q} outside resolved range [0, {g.max_shell}]")
    if form == "full":
        density = _flux_density_full(B, q, d_i)
    elif form == "triad":
        spec = spectral.forward(B)
        pieces = {}

        def shell_piece(p):
            if p not in pieces:
                pieces[p] = spectral.inverse(spectral.shell_project(spec, p, p))
            return pieces[p]

        density = np.zeros((g.n,) * 3)
        for p3 in range(0, q):
            j3 = spectral.inverse(spectral.curl(spectral.shell_project(spec, p3, p3))).data
            for p1 in range(q, g.max_shell + 1):
                j1 = spectral.inverse(
                    spectral.curl(spectral.shell_project(spec, p1, p1))).data
                for p2 in range(max(q - 1, p1 - 1), min(g.max_shell, p1 + 1) + 1):
                    cross = np.cross(j1, shell_piece(p2).data, axis=0)
                    density += d_i * np.einsum("cijk,cijk->ijk", cross, j3)
    else:
        raise ValueError(f"unknown flux form {form!r}")
    pi_total = spectral.integral(density, g)
    stats = {
        "mean": float(density.mean()),
        "mean_abs": float(np.abs(density).mean()),
        "max": float(np.abs(density).max()),
    }
    return pi_total, stats


@dataclass
class FluxTable:
    shells: np.ndarray
    full: np.ndarray
    triad: np.ndarray
    mean_abs: np.ndarray
    max_abs: np.ndarray

    def to_csv(self, path):
        cols = ["q", "Pi_full", "Pi_triad", "pi_mean_abs", "pi_max"]
        rows = list(zip((int(q) for q in self.shells), self.full, self.triad,
                        self.mean_abs, self.max_abs))
        write_table(path, {"table": "flux"}, cols, rows)


def flux_table(snapshot: Snapshot, q_range, d_i: float) -> FluxTable:
    qs = np.asarray(sorted(set(int(q) for q in q_range)))
    full, triad, mean_abs, max_abs = [], [], [], []
    for q in qs:
        pi_f, stats = magnetic_flux(snapshot, q, d_i, "full")
        pi_t, _ = magnetic_flux(snapshot, q, d_i, "triad")
        full.append(pi_f)
        triad.append(pi_t)
        mean_abs.append(stats["mean_abs"])
        max_abs.append(stats["max"])
    return FluxTable(qs, np.asarray(full), np.asarray(triad),
                     np.asarray(mean_abs), np.asarray(max_abs))


def extreme_dissipation(snapshots, d_i: float, q_range,
                        flux_q_range=None) -> tuple[float, float]:
    """(eps_bar_b, eps_under_b) over the declared shell ranges.

    eps_bar_b = sup_q d_i lambda_q^2 <|B_q|^3>;
    eps_under_b = inf_q <|pi_{b,q}|> with q from flux_q_range (defaults to
    q_range), so forced / dissipation-dominated shells can be excluded.
    """
    snaps, g = _snapshot_list(snapshots)
    qs = sorted(set(int(q) for q in q_range))
    if not qs:
        raise ValueError("empty q_range")
    fqs = sorted(set(int(q) for q in (flux_q_range if flux_q_range is not None else qs)))
    cube_means = np.zeros(len(qs))
    flux_means = np.zeros(len(fqs))
    for snap in snaps:
        B = _get_field(snap, "B")
        spec = spectral.forward(B)
        for i, q in enumerate(qs):
            Bq = spectral.inverse(spectral.shell_project(spec, q, q))
            cube_means[i] += spectral.lp_norm(Bq, 3) ** 3 / g.volume
        for i, q in enumerate(fqs):
            flux_means[i] += np.abs(_flux_density_full(B, q, d_i)).mean()
    cube_means /= len(snaps)
    flux_means /= len(snaps)
    lam = g.lambda_q(np.asarray(qs, dtype=float))
    eps_bar = float(np.max(d_i * lam**2 * cube_means))
    eps_under = float(np.min(flux_means))
    return eps_bar, eps_under


@dataclass
class StructureFunctionTable:
    tag: str
    ells: np.ndarray           # (nl,)
    ps: np.ndarray             # (np,)
    values: np.ndarray         # (nl, np)
    sampling: dict

    def column(self, p) -> np.ndarray:
        j = int(np.argmin(np.abs(self.ps - p)))
        if abs(self.ps[j] - p) > 1e-12:
            raise KeyError(f"p={p} not in table")
        return self.values[:, j]

    def to_csv(self, path):
        cols = ["ell"] + [f"S_{p:g}" for p in self.ps]
        rows = [(self.ells[i], *self.values[i]) for i in range(len(self.ells))]
        write_table(path, {"table": "structure_functions", "field": self.tag,
                           "sampling": self.sampling}, cols, rows)


def structure_function(snapshots, tag: str, p_list, ell_list,
                       sampling: str = "exhaustive", n_samples: int = 100000,
                       seed: int = 0, direction: int | None = None) -> StructureFunctionTable:
    """S_p(l) = <|v(x + l e) - v(x)|^p>.

    direction=None isotropizes over the 3 axis directions; direction=0/1/2
    restricts to a single axis.  exhaustive sampling sweeps every grid
    point exactly; monte_carlo uses seeded random base points (and random
    axes when isotropic).
    """
    snaps, g = _snapshot_list(snapshots)
    ps = np.asarray(sorted(float(p) for p in p_list))
    ells = np.asarray(sorted(float(l) for l in ell_list))
    shifts = ells / g.dx
    if sampling == "exhaustive" and np.any(np.abs(shifts - np.rint(shifts)) > 1e-9):
        raise ValueError("exhaustive sampling needs grid-commensurate ell values")
    shifts = np.rint(shifts).astype(int)
    values = np.zeros((len(ells), len(ps)))
    for snap in snaps:
        v = _get_field(snap, tag).data
        for i, s in enumerate(shifts):
            if sampling == "exhaustive":
                axes = range(3) if direction is None else (direction,)
                for axis in axes:
                    dv = np.roll(v, -s, axis=axis + 1) - v
                    mag = np.sqrt(np.einsum("cijk,cijk->ijk", dv, dv))
                    for j, p in enumerate(ps):
                        values[i, j] += (mag**p).mean() / len(axes)
            elif sampling == "monte_carlo":
                rng = _rng(seed, i)
                idx = rng.integers(0, g.n, size=(n_samples, 3))
                if direction is None:
                    axes = rng.integers(0, 3, size=n_samples)
                else:
                    axes = np.full(n_samples, direction)
                tgt = idx.copy()
                tgt[np.arange(n_samples), axes] = (tgt[np.arange(n_samples), axes] + s) % g.n
                dv = (v[:, tgt[:, 0], tgt[:, 1], tgt[:, 2]]
                      - v[:, idx[:, 0], idx[:, 1], idx[:, 2]])
                mag = np.sqrt(np.einsum("cs,cs->s", dv, dv))
                for j, p in enumerate(ps):
                    values[i, j] += (mag**p).mean()
            else:
                raise ValueError(f"unknown sampling mode {sampling!r}")
    values /= len(snaps)
    return StructureFunctionTable(tag, ells, ps, values,
                                  {"mode": sampling, "n": n_samples, "seed": seed,
                                   "direction": direction})
