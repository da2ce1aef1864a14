"""Closed-form scaling predictions: structure-function exponents as a
function of the intermittency dimension, spectrum slopes per regime, and
transition wavenumbers.

Run:  python demos/scaling_predictions.py
"""

from fractions import Fraction

from lpturb.phenomenology import (SpectrumRegime, StructureFamily,
                                  TransitionKind, predict_spectrum,
                                  predict_transition, spectrum_exponent,
                                  structure_exponent)

print("magnetic structure exponents zeta(p, delta) (exact rationals)")
print(f"{'p':>6} " + " ".join(f"delta={d:<6}" for d in (0, 1, 2, 3)))
for p in (2, Fraction(5, 2), 3):
    row = [structure_exponent(p, d, StructureFamily.MAGNETIC)
           for d in (0, 1, 2, 3)]
    print(f"{str(p):>6} " + " ".join(f"{str(z):<8}" for z in row))

print("\nspectrum slopes at the self-similar (delta = 3) and maximally")
print("intermittent (delta = 0) endpoints")
for regime, params3, params0 in [
    (SpectrumRegime.EMHD_SUB_ION, {"delta_b": 3}, {"delta_b": 0}),
    (SpectrumRegime.HALL_KINETIC, {"delta_u": 3}, {"delta_u": 0}),
    (SpectrumRegime.ELSASSER_PLUS,
     {"delta_plus": 3, "delta_minus": 3},
     {"delta_plus": 0, "delta_minus": 0}),
]:
    hi = spectrum_exponent(regime, params3)
    lo = spectrum_exponent(regime, params0)
    print(f"  {regime.value:<18} {str(hi):>6} .. {str(lo):>6}")
print(f"  {'perp-alignment':<18} "
      f"{str(spectrum_exponent(SpectrumRegime.PERP_ALIGNMENT, {})):>6}")

print("\nfull prediction with dimensional prefactor")
pre, exp, val = predict_spectrum(SpectrumRegime.EMHD_SUB_ION,
                                 {"delta_b": 3, "eps_b": 1e-2, "d_i": 0.1},
                                 k=100.0)
print(f"  E_b(k=100) = {pre:.4g} * k^({exp}) = {val:.4g}")

print("\ntransition wavenumbers")
val, exp = predict_transition(TransitionKind.HALL_ION, {"d_i": 0.1})
print(f"  ion break:        kappa = {val:.4g}")
val, exp = predict_transition(
    TransitionKind.EMHD_DISSIPATION,
    {"mu": 1e-3, "d_i": 0.1, "eps_b": 1e-2, "delta_b": 3.0})
print(f"  EMHD dissipation: kappa = {val:.4g} (exponent {exp})")
