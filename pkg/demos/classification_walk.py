"""
How a trial energy gets classified
==================================

The certification primitive answers one question: is a trial energy E below
or above eigenvalue number n?  Above is decided by counting nodes (one too
many has entered the region), Below by watching the logarithmic-derivative
ratio fall through the WKB curve into a region it provably cannot leave.
This script walks a handful of energies across the ground state and prints
the verdict with its supporting evidence.
"""

from fractions import Fraction

from anharmonic import BENCHMARK_PARAMS
from anharmonic.classify import LevelTarget, Verdict, classify_energy
from anharmonic.numerics import with_precision

ctx = with_precision(60)
target = LevelTarget(0)
a = Fraction(15, 2)

# E0 = 1.0652855..., so the walk crosses it between the 4th and 5th entry
for E in ("0.90", "1.00", "1.05", "1.06", "1.07", "1.10", "1.30"):
    c = classify_energy(BENCHMARK_PARAMS, target, ctx.real(E), a, 400, ctx)
    line = f"E = {E}:  {c.verdict.value:<13s} nodes={c.node_count}"
    if c.verdict is Verdict.BELOW:
        # the flow entered the sink here; ratio < WKB boundary value
        x = float(c.evidence["sink_x"])
        line += (f"  sink entry at x={x:.3f} "
                 f"(ratio {float(c.evidence['ratio']):.3f} < "
                 f"wkb {float(c.evidence['wkb']):.3f})")
    elif c.verdict is Verdict.ABOVE:
        # an extra node has entered; its pole carries residue -hbar
        line += (f"  entering zero at x={float(c.evidence['entering_zero']):.3f}, "
                 f"residue {float(c.evidence['residue']):+.6f}")
    print(line)

print("\nthe same machinery, one level up (n=1, odd sector):")
for E in ("3.25", "3.31", "3.40"):
    c = classify_energy(BENCHMARK_PARAMS, LevelTarget(1), ctx.real(E), a, 400, ctx)
    print(f"E = {E}:  {c.verdict.value}")
