"""Closed-form scaling-law evaluators, power-law fitting, and numerical
bound checkers.

All exponents are computed in exact rational arithmetic
(fractions.Fraction); every "~" relation is evaluated with unit prefactor
constant — fitted constants are outputs, never inputs.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, asdict
from enum import Enum
from fractions import Fraction

import numpy as np

from .diagnostics import SpectrumTable, StructureFunctionTable


def _frac(x) -> Fraction:
    """Exact Fraction from int/float/Fraction (floats are binary-exact)."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, np.integer)):
        return Fraction(int(x))
    return Fraction(float(x))


class StructureFamily(Enum):
    MAGNETIC = "magnetic"
    VELOCITY_OR_ELSASSER = "velocity_or_elsasser"


class SpectrumRegime(Enum):
    EMHD_SUB_ION = "emhd-sub-ion"
    HALL_KINETIC = "hall-kinetic"
    HALL_ION_INERTIAL = "hall-ion-inertial"
    HALL_SUB_ION = "hall-sub-ion"
    ELSASSER_PLUS = "elsasser-plus"
    ELSASSER_MINUS = "elsasser-minus"
    PERP_PLUS = "perp-plus"
    PERP_MINUS = "perp-minus"
    PERP_CRITICAL_BALANCE = "perp-critical-balance"
    PERP_ALIGNMENT = "perp-alignment"


class TransitionKind(Enum):
    EMHD_DISSIPATION = "emhd-dissipation"
    HALL_KINETIC_DISSIPATION = "hall-kinetic-dissipation"
    HALL_ION = "hall-ion"
    HALL_MAGNETIC_DISSIPATION = "hall-magnetic-dissipation"
    ELSASSER_PLUS = "elsasser-plus"
    ELSASSER_MINUS = "elsasser-minus"
    PERP_PLUS = "perp-plus"
    PERP_MINUS = "perp-minus"


def _check_delta(delta, lo=0, hi=3, name="delta"):
    d = _frac(delta)
    if not (lo <= d <= hi):
        raise ValueError(f"{name} must be in [{lo}, {hi}], got {delta}")
    return d


def structure_exponent(p, delta, family: StructureFamily) -> Fraction:
    """Structure-function exponent zeta(p, delta), exact.

    MAGNETIC: 2p/3 + (3 - delta)(1 - p/3); zeta(3, .) = 2 for all delta.
    VELOCITY_OR_ELSASSER: p/3 + (3 - delta)(1 - p/3); zeta(3, .) = 1.
    """
    p = _frac(p)
    if p < 0:
        raise ValueError(f"p must be nonnegative, got {p}")
    d = _check_delta(delta)
    lead = Fraction(2, 3) if family == StructureFamily.MAGNETIC else Fraction(1, 3)
    return lead * p + (3 - d) * (1 - p / 3)


def structure_prefactor(p, family: StructureFamily, eps: float,
                        d_i: float = 1.0) -> float:
    """Unit-constant prefactor: (eps / d_i)^(p/3) for MAGNETIC, eps^(p/3)
    otherwise."""
    base = eps / d_i if family == StructureFamily.MAGNETIC else eps
    return float(base) ** (float(p) / 3.0)


_SPECTRUM_RULES = {
    # regime: (required params, exponent fn(params)->Fraction, prefactor fn)
    SpectrumRegime.EMHD_SUB_ION: (
        ("delta_b", "eps_b", "d_i"),
        lambda a: (_check_delta(a["delta_b"], name="delta_b") - 10) / 3,
        lambda a: (a["eps_b"] / a["d_i"]) ** (2.0 / 3.0),
    ),
    SpectrumRegime.HALL_KINETIC: (
        ("delta_u", "eps_u"),
        lambda a: (_check_delta(a["delta_u"], name="delta_u") - 8) / 3,
        lambda a: a["eps_u"] ** (2.0 / 3.0),
    ),
    SpectrumRegime.HALL_ION_INERTIAL: (
        ("delta_u", "delta_b", "eps_u", "eps_b"),
        lambda a: (_check_delta(a["delta_u"], name="delta_u")
                   + 3 * _check_delta(a["delta_b"], name="delta_b")) / 12
        - Fraction(8, 3),
        lambda a: a["eps_b"] ** 0.5 * a["eps_u"] ** (1.0 / 6.0),
    ),
    SpectrumRegime.HALL_SUB_ION: (
        ("delta_b", "eps_b", "d_i"),
        lambda a: (_check_delta(a["delta_b"], name="delta_b") - 10) / 3,
        lambda a: (a["eps_b"] / a["d_i"]) ** (2.0 / 3.0),
    ),
    SpectrumRegime.ELSASSER_PLUS: (
        ("delta_plus", "delta_minus", "eps_plus", "eps_minus"),
        lambda a: (2 * _check_delta(a["delta_minus"], name="delta_minus")
                   - _check_delta(a["delta_plus"], name="delta_plus") - 8) / 3,
        lambda a: (a["eps_plus"] ** 2 / a["eps_minus"]) ** (2.0 / 3.0),
    ),
    SpectrumRegime.ELSASSER_MINUS: (
        ("delta_plus", "delta_minus", "eps_plus", "eps_minus"),
        lambda a: (2 * _check_delta(a["delta_plus"], name="delta_plus")
                   - _check_delta(a["delta_minus"], name="delta_minus") - 8) / 3,
        lambda a: (a["eps_minus"] ** 2 / a["eps_plus"]) ** (2.0 / 3.0),
    ),
    SpectrumRegime.PERP_PLUS: (
        ("delta_perp_plus", "delta_perp_minus", "eps_perp_plus", "eps_perp_minus"),
        lambda a: (2 * _check_delta(a["delta_perp_minus"], 0, 2, "delta_perp_minus")
                   - _check_delta(a["delta_perp_plus"], 0, 2, "delta_perp_plus") - 7) / 3,
        lambda a: (a["eps_perp_plus"] ** 2 / a["eps_perp_minus"]) ** (2.0 / 3.0),
    ),
    SpectrumRegime.PERP_MINUS: (
        ("delta_perp_plus", "delta_perp_minus", "eps_perp_plus", "eps_perp_minus"),
        lambda a: (2 * _check_delta(a["delta_perp_plus"], 0, 2, "delta_perp_plus")
                   - _check_delta(a["delta_perp_minus"], 0, 2, "delta_perp_minus") - 7) / 3,
        lambda a: (a["eps_perp_minus"] ** 2 / a["eps_perp_plus"]) ** (2.0 / 3.0),
    ),
    SpectrumRegime.PERP_CRITICAL_BALANCE: (
        ("eps_perp",),
        lambda a: Fraction(-5, 3),
        lambda a: a["eps_perp"] ** (2.0 / 3.0),
    ),
    SpectrumRegime.PERP_ALIGNMENT: (
        ("eps_perp", "v_A"),
        lambda a: Fraction(-3, 2),
        lambda a: (a["eps_perp"] * a["v_A"]) ** 0.5,
    ),
}


def spectrum_exponent(regime: SpectrumRegime, params: dict) -> Fraction:
    """Exact spectrum exponent; needs only the intermittency dimensions."""
    required, exp_fn, _ = _SPECTRUM_RULES[regime]
    missing = [r for r in required if r.startswith("delta") and r not in params]
    if missing:
        raise KeyError(f"regime {regime.value} missing parameters {missing}")
    return exp_fn(params)


def predict_spectrum(regime: SpectrumRegime, params: dict, k=None):
    """(prefactor, exponent, value) for the regime's spectrum law.

    exponent is an exact Fraction; value = prefactor * k**exponent (None
    when k is None).
    """
    required, exp_fn, pre_fn = _SPECTRUM_RULES[regime]
    missing = [r for r in required if r not in params]
    if missing:
        raise KeyError(f"regime {regime.value} missing parameters {missing}")
    for r in required:
        if not r.startswith("delta") and not (params[r] > 0):
            raise ValueError(f"parameter {r} must be positive, got {params[r]}")
    exponent = exp_fn(params)
    prefactor = float(pre_fn(params))
    value = None if k is None else prefactor * float(k) ** float(exponent)
    return prefactor, exponent, value


def predict_transition(kind: TransitionKind, params: dict):
    """Transition wavenumber (unit prefactor); returns (value, exponent)."""

    def need(*names):
        for nm in names:
            if nm not in params:
                raise KeyError(f"transition {kind.value} missing parameter {nm!r}")
            if not nm.startswith("delta") and not (params[nm] > 0):
                raise ValueError(f"parameter {nm} must be positive")

    if kind == TransitionKind.EMHD_DISSIPATION:
        need("mu", "d_i", "eps_b", "delta_b")
        d = _check_delta(params["delta_b"], name="delta_b")
        if d == 1:
            raise ZeroDivisionError("EMHD dissipation wavenumber is singular at delta_b = 1")
        exponent = 1 / (d - 1)
        base = params["mu"] ** -3 * params["d_i"] ** 2 * params["eps_b"]
    elif kind == TransitionKind.HALL_KINETIC_DISSIPATION:
        need("nu", "eps_u", "delta_u")
        d = _check_delta(params["delta_u"], name="delta_u")
        exponent = 1 / (d + 1)
        base = params["nu"] ** -3 * params["eps_u"]
    elif kind == TransitionKind.HALL_ION:
        need("d_i")
        return 1.0 / params["d_i"], Fraction(-1)
    elif kind == TransitionKind.HALL_MAGNETIC_DISSIPATION:
        need("mu", "eps_u", "eps_b", "delta_u", "delta_b")
        du = _check_delta(params["delta_u"], name="delta_u")
        db = _check_delta(params["delta_b"], name="delta_b")
        exponent = 1 / ((3 * db + du) / 4 + 1)
        base = params["mu"] ** -3 * params["eps_u"] ** -0.5 * params["eps_b"] ** 1.5
    elif kind in (TransitionKind.ELSASSER_PLUS, TransitionKind.ELSASSER_MINUS):
        need("nu", "mu")
        nu, mu = params["nu"], params["mu"]
        if nu == mu:
            raise ZeroDivisionError(f"{kind.value} wavenumber singular at nu = mu")
        if kind == TransitionKind.ELSASSER_PLUS:
            need("eps_plus", "delta_plus")
            d = _check_delta(params["delta_plus"], name="delta_plus")
            base = params["eps_plus"] / ((nu + mu) * (nu - mu) ** 2)
        else:
            need("eps_minus", "delta_minus")
            d = _check_delta(params["delta_minus"], name="delta_minus")
            base = params["eps_minus"] / ((nu - mu) * (nu + mu) ** 2)
        exponent = 1 / (1 + d)
    elif kind in (TransitionKind.PERP_PLUS, TransitionKind.PERP_MINUS):
        need("nu", "mu")
        nu, mu = params["nu"], params["mu"]
        if nu == mu:
            raise ZeroDivisionError(f"{kind.value} wavenumber singular at nu = mu")
        side = "plus" if kind == TransitionKind.PERP_PLUS else "minus"
        need(f"eps_perp_{side}", f"delta_perp_{side}")
        d = _check_delta(params[f"delta_perp_{side}"], 0, 2, f"delta_perp_{side}")
        if side == "plus":
            base = params["eps_perp_plus"] / ((nu + mu) * (nu - mu) ** 2)
        else:
            base = params["eps_perp_minus"] / ((nu - mu) * (nu + mu) ** 2)
        exponent = 1 / (2 + d)
    else:
        raise KeyError(f"unknown transition kind {kind}")
    if base <= 0:
        raise ValueError(f"transition base must be positive, got {base}")
    return float(base) ** float(exponent), exponent


def predict_shell_amplitude(model: str, params: dict, q, field: str = "b") -> float:
    """Phenomenology-consistent shell L^2 amplitude at shell q (unit constant).

    EMHD:  ||B_q||_2 = mu / d_i * lambda_q^((delta_b - 3)/2).
    HALL:  ||u_q||_2 = nu * lambda_q^((delta_u - 1)/2) and
           ||B_q||_2^2 = nu * lambda_q^((delta_u - 1)/2) * ||u_q||_2.
    """
    L = params.get("L", 1.0)
    lam = 2.0 ** np.asarray(q, dtype=float) / L
    model = model.upper()
    if model == "EMHD":
        d = float(_check_delta(params["delta_b"], name="delta_b"))
        return params["mu"] / params["d_i"] * lam ** ((d - 3.0) / 2.0)
    if model in ("HALL", "HALL_MHD"):
        d = float(_check_delta(params["delta_u"], name="delta_u"))
        uq = params["nu"] * lam ** ((d - 1.0) / 2.0)
        if field == "u":
            return uq
        if field == "b":
            return np.sqrt(params["nu"] * lam ** ((d - 1.0) / 2.0) * uq)
        raise ValueError(f"unknown field {field!r}")
    raise ValueError(f"unknown model {model!r}")


@dataclass
class PowerLawFit:
    exponent: float
    prefactor: float
    residual: float
    stderr: float
    n_points: int


def fit_power_law(table, fit_range) -> PowerLawFit:
    """Least-squares log-log fit over the given abscissa range.

    table: SpectrumTable (fits E against lambda_q), StructureFunctionTable
    with one p column (fits S_p against ell), or an (x, y) pair of arrays.
    fit_range: inclusive (lo, hi) on the abscissa.
    """
    if isinstance(table, SpectrumTable):
        x, y = table.lambda_q, table.spectrum
    elif isinstance(table, StructureFunctionTable):
        if len(table.ps) != 1:
            raise ValueError("pass a single-p StructureFunctionTable, or (x, y) arrays")
        x, y = table.ells, table.values[:, 0]
    else:
        x, y = map(np.asarray, table)
    lo, hi = fit_range
    keep = (x >= lo) & (x <= hi)
    x, y = x[keep], y[keep]
    if len(x) < 3:
        raise ValueError(f"need >= 3 points in fit range, have {len(x)}")
    if np.any(y <= 0) or np.any(x <= 0):
        raise ValueError("power-law fit needs strictly positive data")
    lx, ly = np.log(x), np.log(y)
    A = np.vstack([lx, np.ones_like(lx)]).T
    coef, res, *_ = np.linalg.lstsq(A, ly, rcond=None)
    slope, intercept = coef
    n = len(x)
    resid = float(res[0]) if len(res) else 0.0
    if n > 2:
        s2 = resid / (n - 2)
        sxx = np.sum((lx - lx.mean()) ** 2)
        stderr = float(np.sqrt(s2 / sxx)) if sxx > 0 else np.inf
    else:
        stderr = np.inf
    return PowerLawFit(float(slope), float(np.exp(intercept)), resid, stderr, n)


@dataclass
class BoundReport:
    kind: str
    passed: bool
    constants: dict
    thresholds: dict
    details: dict = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, default=float)


def check_spectrum_bounds(spectrum: SpectrumTable, eps_bar: float,
                          eps_under: float, delta_b, d_i: float, L: float,
                          q_range, c_max: float = 100.0,
                          c_min: float = 0.01) -> BoundReport:
    """Two-sided dyadic spectrum bound check.

    Upper: C_up(q) = E(lambda_q) / [(eps_bar/d_i)^(2/3) lambda_q^(-7/3)
    (L lambda_q)^(delta_b/3 - 1)]; PASS needs max C_up <= c_max.
    Lower: sum_p K_{q-p}^(2/3) lambda_p^((10-delta_b)/3) E(lambda_p) with
    kernel K_j = lambda_|j|^(-1/3) = (2^|j|/L)^(-1/3), compared against
    (eps_under/d_i)^(2/3); PASS needs min ratio >= c_min.

    Both constants are invariant under B -> aB (all terms scale as a^2).
    """
    d = float(_check_delta(delta_b, name="delta_b"))
    qs = np.asarray(sorted(set(int(q) for q in q_range)))
    if eps_bar <= 0 and np.any(spectrum.spectrum[qs] > 0):
        raise ValueError("eps_bar vanishes on a nonzero spectrum")
    lam_all = spectrum.lambda_q
    E_all = spectrum.spectrum
    lam = lam_all[qs]
    envelope = (eps_bar / d_i) ** (2.0 / 3.0) * lam ** (-7.0 / 3.0) * (L * lam) ** (d / 3.0 - 1.0)
    c_up = E_all[qs] / envelope
    # kernel-weighted lower sum runs over every resolved shell p
    p_all = np.arange(len(lam_all))
    lower_target = (eps_under / d_i) ** (2.0 / 3.0)
    ratios = []
    for q in qs:
        K = (2.0 ** np.abs(q - p_all) / L) ** (-1.0 / 3.0)
        s = np.sum(K ** (2.0 / 3.0) * lam_all ** ((10.0 - d) / 3.0) * E_all)
        ratios.append(s / lower_target if lower_target > 0 else np.inf)
    ratios = np.asarray(ratios)
    constants = {
        "max_c_up": float(np.max(c_up)),
        "min_lower_ratio": float(np.min(ratios)),
        "c_up_per_shell": {int(q): float(c) for q, c in zip(qs, c_up)},
        "lower_ratio_per_shell": {int(q): float(r) for q, r in zip(qs, ratios)},
    }
    passed = constants["max_c_up"] <= c_max and constants["min_lower_ratio"] >= c_min
    return BoundReport(
        "spectrum_bounds", bool(passed), constants,
        {"c_max": c_max, "c_min": c_min},
        {"delta_b": d, "d_i": d_i, "L": L, "eps_bar": eps_bar, "eps_under": eps_under},
    )


def check_structure_bounds(table: StructureFunctionTable, family: StructureFamily,
                           eps: float, d_i: float, delta, ell_range,
                           p_cap: float = math.inf) -> BoundReport:
    """Minimal admissible structure-function constants C_p over ell_range.

    C_p = max over ell of S_p(ell) / [prefactor * ell^zeta(p, delta)];
    PASS iff every C_p is finite (and <= p_cap when given).  The bound is
    only defined for 2 <= p <= 3; MAGNETIC additionally requires delta >= 1.
    """
    d = _check_delta(delta)
    if family == StructureFamily.MAGNETIC and d < 1:
        raise ValueError(f"magnetic structure bound needs delta >= 1, got {delta}")
    lo, hi = ell_range
    keep = (table.ells >= lo) & (table.ells <= hi)
    if not np.any(keep):
        raise ValueError("no ell values inside ell_range")
    ells = table.ells[keep]
    constants = {}
    for j, p in enumerate(table.ps):
        if not (2.0 <= p <= 3.0):
            raise ValueError(f"bound requires p in [2, 3], table has p={p}")
        zeta = float(structure_exponent(p, d, family))
        pref = structure_prefactor(p, family, eps, d_i)
        vals = table.values[keep, j] / (pref * ells**zeta)
        constants[f"C_{p:g}"] = float(np.max(vals))
    worst = max(constants.values())
    passed = math.isfinite(worst) and worst <= p_cap
    return BoundReport(
        "structure_bounds", bool(passed), constants, {"p_cap": p_cap},
        {"family": family.value, "delta": float(d), "eps": eps, "d_i": d_i,
         "ell_range": [lo, hi]},
    )
