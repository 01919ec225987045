"""
Harmonic limit: certifying a spectrum we can check by hand
==========================================================

With the quartic coupling switched off the well is purely harmonic and the
energies are the odd integers 1, 3, 5, ...  (m=1/2, omega0^2=4, hbar=1).
The solver does not know this; it runs the same series construction, node
counting and interval certification as in the coupled case, so the output
makes a good end-to-end sanity check: every certified interval must contain
the exact odd integer, with a width of at most 1e-32.
"""

from fractions import Fraction
import math

from anharmonic import PotentialParams, SolverConfig, solve_spectrum
from anharmonic.model import Parity, TrialEnergy
from anharmonic.numerics import with_precision
from anharmonic.series import build_series

params = PotentialParams(m=Fraction(1, 2), omega0_sq=4, lam=0)

print("certifying the first six harmonic levels ...")
levels = solve_spectrum(params, 5, SolverConfig())

for lv in levels:
    exact = 2 * lv.n + 1
    ok = "contains" if lv.contains(exact) else "MISSES"
    print(f"  n={lv.n}:  E = {lv.midpoint().decimal(25)}   "
          f"{ok} {exact}, gap = {lv.E_lo.ctx.render(lv.gap, 2)}")

# The ground-state profile is known in closed form too: its Taylor
# coefficients are (-1)^n / n!.  Build the series at the exact energy E=1
# and compare the first few stored coefficients.
ctx = with_precision(50)
state = build_series(params, TrialEnergy(E=ctx.real(1), parity=Parity.EVEN),
                     40, ctx)

print("\nground-state coefficients against (-1)^n / n!:")
for n in (0, 1, 2, 5, 10, 20):
    got = state.coeffs[n]
    want = ctx.real(Fraction((-1) ** n, math.factorial(n)))
    print(f"  K_{n:<2d} = {got.decimal(20):>27s}   "
          f"matches: {(got - want).trusted_sign() == 0}")
