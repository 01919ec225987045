"""Potential parameters and the semiclassical geometry derived from them.

The Hamiltonian is H = p^2/2m + (1/2) m omega0^2 x^2 + lambda x^4.  Parameters
are stored as exact rationals so that a solver run can raise its working
precision mid-flight without re-rounding its inputs.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction

from .numerics import BigReal, sqrt

__all__ = [
    "PotentialParams",
    "Parity",
    "TrialEnergy",
    "BENCHMARK_PARAMS",
    "potential",
    "turning_point",
    "wkb_curve",
]


def _exact(x, name):
    """Exact rational from int, Fraction, or decimal string."""
    if isinstance(x, bool):
        raise TypeError(f"{name} must be a number")
    if isinstance(x, (int, Fraction)):
        return Fraction(x)
    if isinstance(x, str):
        try:
            return Fraction(x.replace("E", "e"))
        except ZeroDivisionError:
            raise ValueError(f"{name} has a zero denominator: {x!r}") from None
    if isinstance(x, float):
        return Fraction(x)
    raise TypeError(f"{name} must be int, Fraction or decimal string, got {type(x).__name__}")


@dataclass(frozen=True)
class PotentialParams:
    """Constants of the quartic oscillator, kept as exact rationals.

    ``omega0_sq`` may be negative (double well); certified solving then
    requires the explicit experimental flag downstream.  ``lam`` may be 0
    (pure harmonic limit) but not negative, else the spectrum is unbounded.
    """

    m: Fraction
    omega0_sq: Fraction
    lam: Fraction
    hbar: Fraction = Fraction(1)

    def __init__(self, m, omega0_sq, lam, hbar=1):
        object.__setattr__(self, "m", _exact(m, "m"))
        object.__setattr__(self, "omega0_sq", _exact(omega0_sq, "omega0_sq"))
        object.__setattr__(self, "lam", _exact(lam, "lam"))
        object.__setattr__(self, "hbar", _exact(hbar, "hbar"))
        if self.m <= 0:
            raise ValueError("mass must be positive")
        if self.hbar <= 0:
            raise ValueError("hbar must be positive")
        if self.lam < 0:
            raise ValueError("lambda must be non-negative (potential unbounded below)")
        if self.lam == 0 and self.omega0_sq <= 0:
            raise ValueError("lam=0 requires omega0_sq > 0 for a bound spectrum")

    @property
    def is_double_well(self):
        return self.omega0_sq < 0


#: The ten-level benchmark configuration used by the reproduction command.
BENCHMARK_PARAMS = PotentialParams(m=Fraction(1, 2), omega0_sq=4, lam=Fraction(1, 10))


class Parity(enum.Enum):
    EVEN = "even"
    ODD = "odd"

    @classmethod
    def for_level(cls, n):
        return cls.EVEN if n % 2 == 0 else cls.ODD


@dataclass(frozen=True)
class TrialEnergy:
    """A candidate energy with the symmetry sector it is tried in.

    Parity fixes the series boundary data: even means K0=1 (K1 follows from
    the energy), odd means K0=0, K1=1.
    """

    E: BigReal
    parity: Parity


def potential(params, x):
    """V(x) = (1/2) m omega0^2 x^2 + lambda x^4 as a BigReal under x's context."""
    ctx = x.ctx
    x2 = x * x
    half_m_w2 = ctx.real(params.m * params.omega0_sq / 2)
    return half_m_w2 * x2 + ctx.real(params.lam) * x2 * x2


def turning_point(params, E):
    """Positive x_t with V(x_t) = E.

    Solves the quadratic in u = x^2; the lam=0 branch is the harmonic
    closed form (the general formula divides by lam).
    """
    ctx = E.ctx
    if E <= 0:
        raise ValueError("no positive turning point for E <= 0")
    m_w2 = params.m * params.omega0_sq
    if params.lam == 0:
        return sqrt(E * ctx.real(Fraction(2) / m_w2))
    half = ctx.real(m_w2 / 2)
    lam = ctx.real(params.lam)
    disc = sqrt(half * half + 4 * lam * E)
    u = (disc - half) / (2 * lam)
    return sqrt(u)


def wkb_curve(params, E, x):
    """Positive branch sqrt(2m(V(x) - E)) of the zero-slope curve of the
    logarithmic-derivative flow; defined in the classically forbidden region.

    Exactly at the turning point the radicand is zero; tiny negative values
    inside the noise bound are clamped to zero rather than rejected.
    """
    ctx = E.ctx
    rad = 2 * ctx.real(params.m) * (potential(params, x) - E)
    if rad._v < 0:
        if rad.trusted_sign() < 0:
            raise ValueError("x is inside the classically allowed region")
        rad = ctx._wrap(abs(rad._v) * 0, rad.abs_error)
    return sqrt(rad)
