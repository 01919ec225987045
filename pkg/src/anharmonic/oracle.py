"""Independent low-precision checks: variational spectrum and shooting.

These deliberately share no code with the series solver.  The variational
spectrum (harmonic-oscillator basis, float64) seeds brackets and sanity
checks certified intervals at the 1e-8 level; the shooting integrator gives
an unrelated node count and growth direction for spot checks.  Neither is
certified; the series classification never trusts them for verdicts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .model import Parity

__all__ = ["OracleSpectrum", "ShootingReport", "rayleigh_ritz", "shooting_check"]


@dataclass(frozen=True)
class OracleSpectrum:
    """Variational energies, lowest first, with a per-level error estimate
    from comparing against the half-size basis."""

    energies: tuple
    est_error: tuple
    basis_size: int
    omega_ref: float
    method: str = "rayleigh-ritz"

    def __getitem__(self, n):
        return self.energies[n]


@dataclass(frozen=True)
class ShootingReport:
    node_count: int
    final_sign: int
    trusted: bool


def _variational_energies(params, B, omega_ref):
    """Eigenvalues of the Hamiltonian projected on the first B harmonic
    eigenstates of frequency omega_ref, split by parity."""
    hbar = float(params.hbar)
    m = float(params.m)
    w2 = float(params.omega0_sq)
    lam = float(params.lam)

    # dimensionless ladder matrices at a padded size so the quartic block is
    # exact after truncation
    Bp = B + 4
    off = np.sqrt(np.arange(1, Bp))
    X = np.zeros((Bp, Bp))
    X[np.arange(Bp - 1), np.arange(1, Bp)] = off
    X[np.arange(1, Bp), np.arange(Bp - 1)] = off
    X2 = X @ X
    X4 = (X2 @ X2)[:B, :B]
    X2 = X2[:B, :B]

    # -(a_dag - a)^2 has the same diagonal as X2 and the opposite coupling
    P2 = np.diag(np.diag(X2))
    P2 -= X2 - np.diag(np.diag(X2))

    lx2 = hbar / (2.0 * m * omega_ref)  # oscillator length squared
    H = (hbar * omega_ref / 4.0) * P2 + (0.5 * m * w2 * lx2) * X2 + (lam * lx2 * lx2) * X4

    even = np.linalg.eigvalsh(H[0::2, 0::2])
    odd = np.linalg.eigvalsh(H[1::2, 1::2])
    out = np.empty(B)
    out[0::2] = even
    out[1::2] = odd
    return out


@lru_cache(maxsize=32)
def _rr_cached(params, B, omega_ref):
    full = _variational_energies(params, B, omega_ref)
    half = _variational_energies(params, max(10, B // 2), omega_ref)
    k = min(len(full), len(half))
    err = tuple(abs(float(full[i] - half[i])) for i in range(k))
    return OracleSpectrum(
        energies=tuple(float(e) for e in full),
        est_error=err,
        basis_size=B,
        omega_ref=float(omega_ref),
    )


def rayleigh_ritz(params, B=200, omega_ref=None):
    """Variational spectrum in a size-B harmonic basis.

    Each energy is an upper bound on the corresponding level (within float64
    roundoff).  For the reference frequency the well's own omega0 is used;
    a double well has no real omega0, so omega_ref must be given explicitly.
    """
    if B < 20:
        raise ValueError("basis size below 20 gives useless estimates")
    if omega_ref is None:
        if params.omega0_sq <= 0:
            raise ValueError("omega_ref required when omega0_sq <= 0")
        omega_ref = math.sqrt(float(params.omega0_sq))
    if omega_ref <= 0:
        raise ValueError("omega_ref must be positive")
    return _rr_cached(params, int(B), float(omega_ref))


def shooting_check(params, E, parity, a, steps=20000):
    """Fixed-step RK4 shoot of u'' = (2m/hbar^2)(V - E) u from 0 to a.

    Parity sets the initial data (even: u=1, u'=0; odd: u=0, u'=1).  The
    state is renormalized periodically to dodge overflow; only the node
    count and the sign of u at the cutoff survive that.  ``trusted`` is set
    when a half-step rerun reproduces both.
    """
    if a <= 0 or steps < 100:
        raise ValueError("need a positive cutoff and at least 100 steps")

    m = float(params.m)
    hbar = float(params.hbar)
    w2 = float(params.omega0_sq)
    lam = float(params.lam)
    E = float(E)
    two_m_h2 = 2.0 * m / (hbar * hbar)

    def run(nsteps):
        h = float(a) / nsteps
        if parity is Parity.EVEN:
            u, v = 1.0, 0.0
        else:
            u, v = 0.0, 1.0
        x = 0.0
        nodes = 0
        prev_sign = 1 if u > 0 else 0

        def f(x, u, v):
            q = two_m_h2 * ((0.5 * w2 * m * x * x + lam * x ** 4) - E)
            return v, q * u

        for i in range(nsteps):
            k1u, k1v = f(x, u, v)
            k2u, k2v = f(x + h / 2, u + h / 2 * k1u, v + h / 2 * k1v)
            k3u, k3v = f(x + h / 2, u + h / 2 * k2u, v + h / 2 * k2v)
            k4u, k4v = f(x + h, u + h * k3u, v + h * k3v)
            u += h / 6 * (k1u + 2 * k2u + 2 * k3u + k4u)
            v += h / 6 * (k1v + 2 * k2v + 2 * k3v + k4v)
            x += h
            s = 1 if u > 0 else (-1 if u < 0 else 0)
            if s and prev_sign and s != prev_sign:
                nodes += 1
            if s:
                prev_sign = s
            if i % 64 == 63:
                scale = max(abs(u), abs(v))
                if scale > 1e200:
                    u /= scale
                    v /= scale
        return nodes, (1 if u > 0 else (-1 if u < 0 else 0))

    n1, s1 = run(steps)
    n2, s2 = run(2 * steps)
    return ShootingReport(node_count=n2, final_sign=s2,
                          trusted=(n1 == n2 and s1 == s2))
