"""Command-line pipelines.

Subcommands: generate, simulate, diagnose, estimate-delta, predict,
check-bounds, report.  Every run writes a JSON manifest with the full
configuration, seeds, and sha256 checksums of all outputs.  Exit codes:
0 success, 2 usage/configuration error, 3 failed bound check.  Parameters
may come from a TOML config file (--config); explicit flags win.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from .core import GridSpec, Snapshot, RealVectorField
from . import spectral, diagnostics, intermittency, phenomenology, snapshot_io
from .generate import (PRNG_VERSION, PacketLaw, intermittent_packets,
                       random_solenoidal, single_mode)
from .phenomenology import (SpectrumRegime, StructureFamily, TransitionKind,
                            check_spectrum_bounds, check_structure_bounds,
                            fit_power_law, predict_spectrum, predict_transition)
from .solver import ForcingSpec, PhysicalParams, SolverConfig, SolverState, run


class UsageError(Exception):
    pass


class BoundCheckFailure(Exception):
    def __init__(self, report):
        super().__init__("bound check failed")
        self.report = report


def _sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _parse_range(text: str) -> list:
    """'1:6' -> [1..6]; '1,3,5' -> [1,3,5]."""
    if ":" in text:
        lo, hi = text.split(":")
        return list(range(int(lo), int(hi) + 1))
    return [int(x) for x in text.split(",")]


def _parse_floats(text: str) -> list:
    return [float(x) for x in text.split(",")]


def _json_default(x):
    if isinstance(x, Fraction):
        return {"numerator": x.numerator, "denominator": x.denominator,
                "value": float(x)}
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating,)):
        return float(x)
    if isinstance(x, np.ndarray):
        return x.tolist()
    raise TypeError(f"not JSON-serializable: {type(x)}")


def _emit_json(obj, path=None):
    text = json.dumps(obj, indent=2, default=_json_default)
    if path:
        Path(path).write_text(text + "\n")
    else:
        print(text)


def _write_manifest(args, subcommand: str, outputs: list, t0: float, extra=None):
    manifest = {
        "tool": "lpturb",
        "version": __version__,
        "prng": PRNG_VERSION,
        "subcommand": subcommand,
        "config": {k: v for k, v in sorted(vars(args).items())
                   if k not in ("func", "config") and v is not None},
        "outputs": {str(p): _sha256(p) for p in outputs if Path(p).exists()},
        "wall_clock_s": round(time.monotonic() - t0, 3),
    }
    if extra:
        manifest.update(extra)
    if args.manifest:
        _emit_json(manifest, args.manifest)
    return manifest


def _load_snapshots(paths) -> list:
    if not paths:
        raise UsageError("no input snapshot files given")
    return [snapshot_io.read_snapshot(p) for p in paths]


# ---------------------------------------------------------------- generate

def cmd_generate(args):
    t0 = time.monotonic()
    g = GridSpec(args.grid, args.box)
    if args.kind == "packets":
        if args.delta is None:
            raise UsageError("--kind packets requires --delta")
        law = PacketLaw(delta=args.delta, q_range=_parse_range(args.shells),
                        seed=args.seed)
        field = intermittent_packets(g, law)
    elif args.kind == "random":
        field = random_solenoidal(g, args.slope, _parse_range(args.shells),
                                  args.seed, args.amplitude)
    elif args.kind == "single-mode":
        m = [int(x) for x in args.mode.split(",")]
        field = single_mode(g, m, args.amplitude, args.mode_kind)
    else:
        raise UsageError(f"unknown field kind {args.kind!r}")
    snapshot_io.write_snapshot(args.output, Snapshot(0.0, {args.field: field}))
    _write_manifest(args, "generate", [args.output], t0)
    return 0


# ---------------------------------------------------------------- simulate

def cmd_simulate(args):
    t0 = time.monotonic()
    params = PhysicalParams(nu=args.nu, mu=args.mu, d_i=args.d_i, L=args.box)
    forcing = None
    if args.forcing_amplitude:
        forcing = ForcingSpec(tuple(_parse_range(args.forcing_shells)),
                              args.forcing_amplitude, args.forcing_seed)
    config = SolverConfig(model=args.model, params=params, dt=args.dt,
                          t_end=args.t_end, forcing=forcing,
                          snapshot_stride=args.snapshot_stride)
    if args.initial:
        snap = snapshot_io.read_snapshot(args.initial)
        state = SolverState(snap.t, snap.fields["B"], snap.fields.get("u"))
    else:
        g = GridSpec(args.grid, args.box)
        B = random_solenoidal(g, args.slope, _parse_range(args.shells),
                              args.seed, args.amplitude)
        u = None
        if config.has_velocity:
            u = random_solenoidal(g, args.slope, _parse_range(args.shells),
                                  args.seed + 1, args.amplitude)
        state = SolverState(0.0, B, u)
    result = run(config, state)
    outdir = Path(args.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    outputs = []
    for i, snap in enumerate(result.snapshots):
        p = outdir / f"snap_{i:05d}.lpt"
        snapshot_io.write_snapshot(p, snap)
        outputs.append(p)
    budget_path = outdir / "budget.csv"
    result.budget_csv(budget_path)
    outputs.append(budget_path)
    _write_manifest(args, "simulate", outputs, t0,
                    {"steps": len(result.budget)})
    return 0


# ---------------------------------------------------------------- diagnose

def cmd_diagnose(args):
    t0 = time.monotonic()
    snaps = _load_snapshots(args.input)
    outputs = []
    if args.spectrum:
        diagnostics.energy_spectrum(snaps, args.field).to_csv(args.spectrum)
        outputs.append(args.spectrum)
    if args.flux:
        qs = _parse_range(args.q_range) if args.q_range else \
            range(1, snaps[0].grid.max_shell + 1)
        diagnostics.flux_table(snaps[-1], qs, args.d_i).to_csv(args.flux)
        outputs.append(args.flux)
    if args.structure:
        g = snaps[0].grid
        ells = (_parse_floats(args.ell_list) if args.ell_list
                else [k * g.dx for k in (1, 2, 4, 8, 16)])
        diagnostics.structure_function(
            snaps, args.field, _parse_floats(args.p_list), ells).to_csv(args.structure)
        outputs.append(args.structure)
    if args.shell_norms:
        qs = _parse_range(args.q_range) if args.q_range else None
        diagnostics.shell_norm_series(snaps, args.field, qs).to_csv(args.shell_norms)
        outputs.append(args.shell_norms)
    if not outputs:
        raise UsageError("diagnose: request at least one output table")
    _write_manifest(args, "diagnose", outputs, t0)
    return 0


# ---------------------------------------------------------------- estimate

def cmd_estimate_delta(args):
    t0 = time.monotonic()
    snaps = _load_snapshots(args.input)
    qs = _parse_range(args.q_range) if args.q_range else None
    series = diagnostics.shell_norm_series(snaps, args.field, qs)
    report = {"field": args.field, "shells": [int(q) for q in series.shells]}
    if args.method in ("sup_form", "both"):
        est = intermittency.estimate_delta_sup(series, C=args.c_constant)
        report["sup_form"] = json.loads(est.to_json())
    if args.method in ("shell_fit", "both"):
        est = intermittency.estimate_delta_fit(series)
        report["shell_fit"] = json.loads(est.to_json())
    _emit_json(report, args.output)
    _write_manifest(args, "estimate-delta", [args.output] if args.output else [], t0)
    return 0


# ---------------------------------------------------------------- predict

def _collect_params(args) -> dict:
    params = {}
    for key in ("nu", "mu", "d_i", "v_A", "eps_b", "eps_u", "eps_plus",
                "eps_minus", "eps_perp", "eps_perp_plus", "eps_perp_minus",
                "delta_b", "delta_u", "delta_plus", "delta_minus",
                "delta_perp_plus", "delta_perp_minus"):
        v = getattr(args, key, None)
        if v is not None:
            params[key] = v
    for item in args.set or []:
        k, _, v = item.partition("=")
        params[k] = float(v)
    return params


def cmd_predict(args):
    t0 = time.monotonic()
    params = _collect_params(args)
    report = {"parameters": params}
    if args.regime:
        regime = SpectrumRegime(args.regime)
        try:
            pre, exp, val = predict_spectrum(regime, params, args.k)
        except KeyError:
            # dissipation rates absent: still report the exact exponent
            exp = phenomenology.spectrum_exponent(regime, params)
            pre, val = None, None
        report["spectrum"] = {"regime": regime.value, "prefactor": pre,
                              "exponent": exp, "k": args.k, "value": val}
    if args.transition:
        kind = TransitionKind(args.transition)
        val, exp = predict_transition(kind, params)
        report["transition"] = {"kind": kind.value, "wavenumber": val,
                                "exponent": exp}
    if args.p is not None:
        fam = StructureFamily(args.family)
        delta_key = "delta_b" if fam == StructureFamily.MAGNETIC else "delta_u"
        exp = phenomenology.structure_exponent(args.p, params[delta_key], fam)
        report["structure"] = {"p": args.p, "family": fam.value, "exponent": exp}
    if len(report) == 1:
        raise UsageError("predict: give --regime, --transition, or --p")
    _emit_json(report, args.output)
    _write_manifest(args, "predict", [args.output] if args.output else [], t0)
    return 0


# ---------------------------------------------------------------- bounds

def cmd_check_bounds(args):
    t0 = time.monotonic()
    snaps = _load_snapshots(args.input)
    g = snaps[0].grid
    qs = _parse_range(args.q_range)
    spectrum = diagnostics.energy_spectrum(snaps, "B")
    series = diagnostics.shell_norm_series(snaps, "B", qs)
    delta_b = (args.delta_b if args.delta_b is not None
               else intermittency.estimate_delta_fit(series).delta)
    flux_qs = _parse_range(args.flux_q_range) if args.flux_q_range else qs
    eps_bar, eps_under = diagnostics.extreme_dissipation(snaps, args.d_i, qs, flux_qs)
    report = check_spectrum_bounds(spectrum, eps_bar, eps_under, delta_b,
                                   args.d_i, g.L, qs,
                                   c_max=args.c_max, c_min=args.c_min)
    doc = json.loads(report.to_json())
    doc["delta_b"] = delta_b
    if args.p_list:
        eps_b = args.eps_b if args.eps_b is not None else eps_bar
        ells = (_parse_floats(args.ell_list) if args.ell_list
                else [k * g.dx for k in (1, 2, 4, 8)])
        table = diagnostics.structure_function(
            snaps, "B", _parse_floats(args.p_list), ells)
        sreport = check_structure_bounds(
            table, StructureFamily.MAGNETIC, eps_b, args.d_i,
            max(delta_b, 1.0), (min(ells), max(ells)))
        doc["structure_bounds"] = json.loads(sreport.to_json())
        if not sreport.passed:
            report.passed = False
    _emit_json(doc, args.output)
    _write_manifest(args, "check-bounds", [args.output] if args.output else [], t0)
    if not report.passed:
        raise BoundCheckFailure(doc)
    return 0


# ---------------------------------------------------------------- report

def cmd_report(args):
    t0 = time.monotonic()
    snaps = _load_snapshots(args.input)
    g = snaps[0].grid
    qs = _parse_range(args.q_range)
    series = diagnostics.shell_norm_series(snaps, "B", qs)
    est_fit = intermittency.estimate_delta_fit(series)
    est_sup = intermittency.estimate_delta_sup(series)
    spectrum = diagnostics.energy_spectrum(snaps, "B")
    lam = g.lambda_q(np.asarray(qs, dtype=float))
    fit = fit_power_law(spectrum, (lam.min(), lam.max()))
    _, predicted, _ = predict_spectrum(
        SpectrumRegime.EMHD_SUB_ION,
        {"delta_b": est_fit.delta, "eps_b": 1.0, "d_i": args.d_i})
    doc = {
        "measured": {"slope": fit.exponent, "stderr": fit.stderr,
                     "prefactor": fit.prefactor, "shells": list(qs)},
        "estimated_delta": {"shell_fit": est_fit.delta, "sup_form": est_sup.delta},
        "predicted": {"regime": "emhd-sub-ion", "exponent": predicted},
        "difference": fit.exponent - float(predicted),
    }
    _emit_json(doc, args.output)
    _write_manifest(args, "report", [args.output] if args.output else [], t0)
    return 0


# ---------------------------------------------------------------- parser

def _add_common(p):
    p.add_argument("--manifest", help="write a JSON run manifest here")
    p.add_argument("--config", help="TOML config file (flags override)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="lpturb",
        description="Dyadic-shell spectral turbulence diagnostics for "
                    "MHD/Hall-MHD/EMHD fields.")
    ap.add_argument("--version", action="version", version=f"lpturb {__version__}")
    sub = ap.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("generate", help="write a seeded test field")
    p.add_argument("--kind", required=True,
                   choices=["packets", "random", "single-mode"])
    p.add_argument("--grid", type=int, default=64)
    p.add_argument("--box", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--delta", type=float)
    p.add_argument("--slope", type=float, default=0.0)
    p.add_argument("--amplitude", type=float, default=1.0)
    p.add_argument("--shells", default="1:5")
    p.add_argument("--mode", default="1,0,0")
    p.add_argument("--mode-kind", default="sinusoid",
                   choices=["sinusoid", "beltrami"])
    p.add_argument("--field", default="B")
    p.add_argument("--output", required=True)
    _add_common(p)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("simulate", help="integrate EMHD/MHD/Hall-MHD")
    p.add_argument("--model", required=True, choices=["emhd", "mhd", "hall_mhd"])
    p.add_argument("--grid", type=int, default=64)
    p.add_argument("--box", type=float, default=1.0)
    p.add_argument("--nu", type=float, default=0.0)
    p.add_argument("--mu", type=float, default=0.0)
    p.add_argument("--d-i", type=float, default=0.0)
    p.add_argument("--dt", type=float, required=True)
    p.add_argument("--t-end", type=float, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--slope", type=float, default=0.0)
    p.add_argument("--shells", default="1:2")
    p.add_argument("--amplitude", type=float, default=1.0)
    p.add_argument("--initial", help="initial snapshot file")
    p.add_argument("--forcing-amplitude", type=float, default=0.0)
    p.add_argument("--forcing-shells", default="1:2")
    p.add_argument("--forcing-seed", type=int, default=0)
    p.add_argument("--snapshot-stride", type=int, default=100)
    p.add_argument("--output-dir", required=True)
    _add_common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("diagnose", help="tables from snapshot files")
    p.add_argument("--input", nargs="+", required=True)
    p.add_argument("--field", default="B")
    p.add_argument("--d-i", type=float, default=1.0)
    p.add_argument("--q-range")
    p.add_argument("--p-list", default="2,3")
    p.add_argument("--ell-list")
    p.add_argument("--spectrum")
    p.add_argument("--flux")
    p.add_argument("--structure")
    p.add_argument("--shell-norms")
    _add_common(p)
    p.set_defaults(func=cmd_diagnose)

    p = sub.add_parser("estimate-delta", help="intermittency dimension")
    p.add_argument("--input", nargs="+", required=True)
    p.add_argument("--field", default="B")
    p.add_argument("--q-range")
    p.add_argument("--method", default="both",
                   choices=["sup_form", "shell_fit", "both"])
    p.add_argument("--c-constant", type=float)
    p.add_argument("--output")
    _add_common(p)
    p.set_defaults(func=cmd_estimate_delta)

    p = sub.add_parser("predict", help="closed-form scaling laws")
    p.add_argument("--regime", choices=[r.value for r in SpectrumRegime])
    p.add_argument("--transition", choices=[t.value for t in TransitionKind])
    p.add_argument("--p", type=float, help="structure-function order")
    p.add_argument("--family", default="magnetic",
                   choices=[f.value for f in StructureFamily])
    p.add_argument("--k", type=float)
    for key in ("nu", "mu", "d-i", "v-A", "eps-b", "eps-u", "eps-plus",
                "eps-minus", "eps-perp", "eps-perp-plus", "eps-perp-minus",
                "delta-b", "delta-u", "delta-plus", "delta-minus",
                "delta-perp-plus", "delta-perp-minus"):
        p.add_argument(f"--{key}", type=float)
    p.add_argument("--set", action="append", metavar="KEY=VALUE")
    p.add_argument("--output")
    _add_common(p)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("check-bounds", help="dyadic spectrum bound check")
    p.add_argument("--input", nargs="+", required=True)
    p.add_argument("--d-i", type=float, required=True)
    p.add_argument("--q-range", required=True)
    p.add_argument("--flux-q-range")
    p.add_argument("--delta-b", type=float, help="override the fitted value")
    p.add_argument("--eps-b", type=float)
    p.add_argument("--c-max", type=float, default=100.0)
    p.add_argument("--c-min", type=float, default=0.01)
    p.add_argument("--p-list", help="also check structure bounds for these p")
    p.add_argument("--ell-list")
    p.add_argument("--output")
    _add_common(p)
    p.set_defaults(func=cmd_check_bounds)

    p = sub.add_parser("report", help="measured vs predicted comparison")
    p.add_argument("--input", nargs="+", required=True)
    p.add_argument("--d-i", type=float, default=1.0)
    p.add_argument("--q-range", required=True)
    p.add_argument("--output")
    _add_common(p)
    p.set_defaults(func=cmd_report)
    return ap


def _apply_config_file(argv, ap):
    """Pre-parse --config and fold TOML values in as parser defaults."""
    if "--config" not in argv:
        return argv
    try:
        import tomllib
    except ModuleNotFoundError:
        import tomli as tomllib
    i = argv.index("--config")
    path = argv[i + 1]
    with open(path, "rb") as f:
        doc = tomllib.load(f)
    sub = argv[0]
    picked = {}
    picked.update(doc.get("common", {}))
    picked.update(doc.get(sub, {}))
    extra = []
    for k, v in picked.items():
        flag = "--" + k.replace("_", "-")
        if flag in argv:
            continue  # explicit flags win
        if isinstance(v, bool):
            if v:
                extra.append(flag)
        elif isinstance(v, list):
            extra.append(flag)
            extra.extend(str(x) for x in v)
        else:
            extra.extend([flag, str(v)])
    return argv[:1] + extra + argv[1:]


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    ap = build_parser()
    try:
        if argv and not argv[0].startswith("-"):
            argv = _apply_config_file(argv, ap)
        try:
            args = ap.parse_args(argv)
        except SystemExit as e:
            # argparse uses exit code 2 for usage errors already
            return int(e.code or 0)
        return args.func(args)
    except BoundCheckFailure as e:
        print(json.dumps({"error": "bound-check-failed",
                          "report": e.report}, default=_json_default),
              file=sys.stderr)
        return 3
    except (UsageError, KeyError) as e:
        print(json.dumps({"error": "usage", "message": str(e)}), file=sys.stderr)
        return 2
    except (ValueError, OSError, RuntimeError) as e:
        print(json.dumps({"error": type(e).__name__, "message": str(e)}),
              file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
