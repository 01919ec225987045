"""Certified two-sided eigenvalue intervals.

A level is pinned in three phases:

1. Bracket: a variational (or perturbative) seed, padded by 2 percent, gives
   trial energies that are pushed outward until one classifies Below and the
   other Above.
2. Newton: K(a, E) in the energy direction has an exact double root at the
   energy whose wavefunction picks its node up exactly at the cutoff, a
   hair's breadth from the true eigenvalue (doubly exponentially close in
   the cutoff).  Newton iteration with doubled steps converges quadratically
   to that root.  When the evaluation can no longer resolve K(a, E) against
   its noise floor before the step is small enough, the truncation order is
   escalated and the iteration continues.
3. Certify: two dyadic-lattice energies straddling the root at +-0.45 of the
   target gap are classified; Above on the right and Below on the left yield
   the certificate.  Any Indeterminate escalates resources (order x1.5,
   cutoff x1.25, digits x2, round robin) and retries; if Newton itself
   misbehaves the solver falls back to classified bisection of the bracket,
   probing interior points until a verdict sticks.

Every certified endpoint is an exactly representable dyadic rational, so the
energy actually classified is bit-identical to the interval endpoint that is
reported.  All control-flow decisions compare exact rationals; runs are
deterministic for a given configuration.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction

import gmpy2

from .classify import LevelTarget, Verdict, classify_energy
from .model import BENCHMARK_PARAMS, TrialEnergy, PotentialParams
from .numerics import _ECTX, BigReal, significance_of, with_precision
from .oracle import rayleigh_ritz
from .series import build_series, eval_K, eval_dKdE

__all__ = [
    "SolverConfig",
    "CertifiedLevel",
    "Provenance",
    "SolverError",
    "bracket_level",
    "refine_level",
    "solve_spectrum",
]

log = logging.getLogger(__name__)

# interior probe offsets for classified bisection, tried in order when the
# midpoint classifies Indeterminate
_PROBES = (
    Fraction(1, 2), Fraction(7, 20), Fraction(13, 20),
    Fraction(1, 4), Fraction(3, 4),
)


class SolverError(RuntimeError):
    """Certification failed after exhausting the escalation budget."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


def _as_fraction(x, name="value"):
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float):
        return Fraction(x)
    if isinstance(x, str):
        from .model import _exact
        return _exact(x, name)
    if isinstance(x, BigReal):
        q = gmpy2.mpq(x._v)
        return Fraction(int(q.numerator), int(q.denominator))
    raise TypeError(f"cannot interpret {name} {x!r} as an exact rational")


@dataclass(frozen=True)
class SolverConfig:
    """Starting resources and targets; escalation may raise the resources."""

    order: int = 400
    cutoff: object = None          # exact rational, or None for automatic
    digits: int = 100
    target_gap: object = Fraction(1, 10 ** 32)
    max_escalations: int = 8
    newton_max_steps: int = 60
    guard_digits: int = 10
    seed_from_oracle: bool = True
    oracle_basis: int = 200
    experimental_double_well: bool = False

    def __post_init__(self):
        object.__setattr__(self, "target_gap",
                           _as_fraction(self.target_gap, "target_gap"))
        if self.cutoff is not None:
            object.__setattr__(self, "cutoff",
                               _as_fraction(self.cutoff, "cutoff"))
            if self.cutoff <= 0:
                raise ValueError("cutoff must be positive")
        if self.order < 16:
            raise ValueError("truncation order below 16 cannot certify anything")
        if self.digits < 30:
            raise ValueError("need at least 30 working digits")
        if self.target_gap <= 0:
            raise ValueError("target_gap must be positive")
        # the gap must stay well clear of the working precision
        if self.target_gap <= Fraction(1, 10 ** (self.digits - 20)):
            raise ValueError(
                "target_gap must exceed 10^-(digits-20); "
                "raise digits or loosen the gap")
        if self.max_escalations < 0 or self.newton_max_steps < 4:
            raise ValueError("bad escalation or Newton step budget")


@dataclass(frozen=True)
class Provenance:
    """Resources actually spent on one certified level."""

    order: int
    cutoff: str
    digits: int
    target_gap: str
    escalations: int
    classifications: int
    newton_steps: int
    newton_significance: object
    seeded_from_oracle: bool
    log: tuple


@dataclass(frozen=True)
class CertifiedLevel:
    n: int
    E_lo: BigReal
    E_hi: BigReal
    gap: BigReal
    digits_reported: int
    provenance: Provenance
    E_lo_exact: Fraction = field(repr=False, default=None)
    E_hi_exact: Fraction = field(repr=False, default=None)

    def midpoint(self):
        return (self.E_lo + self.E_hi) / 2

    def contains(self, value):
        v = _as_fraction(value)
        return self.E_lo_exact < v < self.E_hi_exact


def _perturbative_seed(params, n):
    """Harmonic level plus the first-order quartic shift; adequate only for
    bracketing when no variational seed is wanted."""
    m = float(params.m)
    hbar = float(params.hbar)
    w0 = math.sqrt(float(params.omega0_sq))
    lx2 = hbar / (2.0 * m * w0)
    return hbar * w0 * (n + 0.5) + float(params.lam) * lx2 * lx2 * 3.0 * (
        2 * n * n + 2 * n + 1)


def _float_turning_point(params, E):
    m = float(params.m)
    w2 = float(params.omega0_sq)
    lam = float(params.lam)
    if lam == 0:
        return math.sqrt(2.0 * E / (m * w2))
    u = (-0.5 * m * w2 + math.sqrt(0.25 * m * m * w2 * w2 + 4.0 * lam * E)) / (2.0 * lam)
    return math.sqrt(u)


def _auto_cutoff(params, n_max, cfg):
    """2.5 x the outer turning point of the highest requested level, rounded
    up to a coarse dyadic; benchmark parameters pin at least 15/2."""
    if cfg.seed_from_oracle:
        spec = rayleigh_ritz(params, max(cfg.oracle_basis, 4 * n_max + 40))
        top = spec.energies[n_max]
    else:
        top = _perturbative_seed(params, n_max)
    a = 2.5 * _float_turning_point(params, top * 1.05)
    if params == BENCHMARK_PARAMS:
        a = max(a, 7.5)
    return Fraction(math.ceil(a * 16), 16)


class _LevelRun:
    """Mutable per-level resource state plus counters and a narrative log."""

    def __init__(self, params, n, cfg, a):
        self.params = params
        self.target = LevelTarget(n)
        self.cfg = cfg
        self.N = cfg.order
        self.a = a
        self.digits = cfg.digits
        self.escalations = 0
        self.classifications = 0
        self.newton_steps = 0
        self._ladder = 0
        self.seeded = False
        self.log = []
        self._ctxs = {}

    @property
    def ctx(self):
        ctx = self._ctxs.get(self.digits)
        if ctx is None:
            ctx = with_precision(self.digits, self.cfg.guard_digits)
            self._ctxs[self.digits] = ctx
        return ctx

    def note(self, msg):
        self.log.append(msg)
        log.debug("level %d: %s", self.target.n, msg)

    def lattice_bits(self):
        # candidates live on a dyadic lattice seven bits below the gap
        return max(8, self.cfg.target_gap.denominator.bit_length()
                   - self.cfg.target_gap.numerator.bit_length() + 8)

    def snap(self, frac):
        k = self.lattice_bits()
        return Fraction(round(frac * (1 << k)), 1 << k)

    def classify(self, e_frac, trace=None):
        self.classifications += 1
        c = classify_energy(
            self.params, self.target, self.ctx.real(e_frac),
            self.ctx.real(self.a), self.N, self.ctx,
            experimental_double_well=self.cfg.experimental_double_well,
            trace=trace)
        self.note(f"classify E={float(e_frac):.18g} at N={self.N}, "
                  f"digits={self.digits}: {c.verdict.value}"
                  + (f" ({c.evidence.get('reason')}; {c.evidence.get('resource')})"
                     if c.verdict is Verdict.INDETERMINATE else ""))
        return c

    def escalate(self, reason, kind=None):
        if self.escalations >= self.cfg.max_escalations:
            self.note(f"escalation budget exhausted ({reason})")
            raise SolverError(
                f"level {self.target.n}: escalation budget exhausted ({reason})",
                diagnostics=self.diagnostics())
        if kind is None:
            kind = ("order", "cutoff", "digits")[self._ladder % 3]
            self._ladder += 1
        self.escalations += 1
        if kind == "order":
            self.N = (self.N * 3 + 1) // 2
        elif kind == "cutoff":
            self.a = self.a * Fraction(5, 4)
        else:
            self.digits = self.digits * 2
        self.note(f"escalate[{self.escalations}] {kind} -> "
                  f"N={self.N} a={float(self.a):.4g} digits={self.digits} "
                  f"({reason})")

    def diagnostics(self):
        return {
            "level": self.target.n,
            "order": self.N,
            "cutoff": str(self.a),
            "digits": self.digits,
            "escalations": self.escalations,
            "classifications": self.classifications,
            "newton_steps": self.newton_steps,
            "log": tuple(self.log),
        }


def _seed(run):
    cfg = run.cfg
    n = run.target.n
    if cfg.seed_from_oracle:
        spec = rayleigh_ritz(run.params, max(cfg.oracle_basis, 4 * n + 40))
        run.seeded = True
        s = spec.energies[n]
    else:
        s = _perturbative_seed(run.params, n)
    return Fraction(round(s * (1 << 20)), 1 << 20)


def _bracket(run):
    """Certified (Below, Above) pair around the seed."""
    s = _seed(run)
    w = max(s * Fraction(1, 50), Fraction(1, 50))
    lo, hi = run.snap(s - w), run.snap(s + w)

    for _ in range(12):
        c = run.classify(lo)
        if c.verdict is Verdict.BELOW:
            break
        if c.verdict is Verdict.ABOVE:
            lo = run.snap(lo - w)
            w = w * 2
        elif c.evidence.get("resource") == "bracket":
            lo = run.snap(lo + w / 2)   # overshot below the previous level
            w = w / 2
        else:
            run.escalate(c.evidence.get("reason", "indeterminate bracket"))
    else:
        raise SolverError(f"level {run.target.n}: no Below bracket endpoint",
                          diagnostics=run.diagnostics())

    for _ in range(12):
        c = run.classify(hi)
        if c.verdict is Verdict.ABOVE:
            break
        if c.verdict is Verdict.BELOW:
            hi = run.snap(hi + w)
            w = w * 2
        else:
            run.escalate(c.evidence.get("reason", "indeterminate bracket"))
    else:
        raise SolverError(f"level {run.target.n}: no Above bracket endpoint",
                          diagnostics=run.diagnostics())

    run.note(f"bracket [{float(lo):.12g}, {float(hi):.12g}]")
    return lo, hi


def _barrier_exponent(params, E, a):
    """2S/hbar with S the WKB barrier integral of sqrt(2m(V-E)) from the
    outer turning point to the cutoff, in double precision.

    exp(-2S/hbar) estimates how far the energy root of K(a, .) sits above
    the true eigenvalue (the node of the would-be eigenfunction must be
    pulled in from infinity to the cutoff).  Only the order of magnitude
    matters, so float arithmetic is fine.
    """
    tp = _float_turning_point(params, E)
    if tp >= a:
        return 0.0
    m = float(params.m)
    w2 = float(params.omega0_sq)
    lam = float(params.lam)

    def f(s):
        # x = tp + s^2 removes the sqrt singularity at the turning point
        x = tp + s * s
        v = 0.5 * m * w2 * x * x + lam * x ** 4
        return 2.0 * s * math.sqrt(max(0.0, 2.0 * m * (v - E)))

    n = 2000
    smax = math.sqrt(a - tp)
    h = smax / n
    tot = f(0.0) + f(smax)
    for i in range(1, n):
        tot += (4 if i % 2 else 2) * f(i * h)
    return 2.0 * (tot * h / 3.0) / float(params.hbar)


def _widen_for_gap(run, lo, hi):
    """Escalate the cutoff until the root of K(a, E) is displaced from the
    eigenvalue by well under the target gap; otherwise both Newton
    candidates would land on the same side of the level."""
    gap = run.cfg.target_gap
    needed = math.log(8.0) + math.log(gap.denominator) - math.log(gap.numerator)
    E_est = float((lo + hi) / 2)
    while _barrier_exponent(run.params, E_est, float(run.a)) < needed:
        run.escalate("cutoff too tight: the K(a,E) root cannot approach the "
                     "eigenvalue to within the target gap", kind="cutoff")


def _newton_root(run, lo, hi):
    """Doubled-step Newton on g(E) = K(a, E) from the Above endpoint.

    Returns (root BigReal, significance) or None to request bisection.
    Iterates are taken as exact evaluation points (the map self-corrects, so
    an iterate carries no meaningful uncertainty); the returned root's error
    is the final step plus its noise.  The reported significance is the
    resolution limit of the double root against the evaluation noise floor,
    |dE|_min ~ 2 sqrt(g * noise)/|g'|, which degrades with the level and is
    independent of where the last step happened to land.
    """
    cfg = run.cfg
    gap = cfg.target_gap
    small = gap / 20
    E = run.ctx.real(hi)
    lo_b, hi_b = run.ctx.real(lo), run.ctx.real(hi)
    prev = None
    growth = 0
    stall_noise = None
    resolved = None   # (g, gp) at the last iterate clear of the noise floor

    for _ in range(cfg.newton_max_steps):
        ctx = run.ctx
        if E.ctx is not ctx:
            # a digits escalation replaced the context; iterates are exact
            # points, so re-wrapping loses nothing
            E = ctx._wrap(gmpy2.mpfr(E._v, ctx._bits), gmpy2.mpfr(0))
            lo_b, hi_b = ctx.real(lo), ctx.real(hi)
        a_b = ctx.real(run.a)
        state = build_series(run.params, TrialEnergy(E=E, parity=run.target.parity),
                             run.N, ctx)
        g, _ = eval_K(state, a_b)
        run.newton_steps += 1
        gp = eval_dKdE(state, a_b)
        if float(gp) == 0.0:
            run.note("newton: flat slope, falling back")
            return None
        step = (g / gp) * 2
        sign = g.trusted_sign()
        if sign < 0:
            # K(a, E) is a square of a real solution; a resolved negative
            # value can only mean the tail noise floor is understated here
            run.escalate("square series evaluated trusted-negative; "
                         "noise floor invalid", kind="order")
            continue
        unresolved = sign == 0
        if not unresolved:
            resolved = (g, gp)
        if abs(float(step)) <= float(small):
            root = E - step
            err = _ECTX.add(abs(step._v),
                            _ECTX.add(step.abs_error,
                                      _ECTX.mul(abs(root._v), ctx._ulp)))
            root = ctx._wrap(root._v, err)
            sig_g, sig_gp = resolved if resolved is not None else (g, gp)
            sig = _resolution_significance(ctx, root, sig_g, sig_gp)
            run.note(f"newton converged: |step|={float(abs(step)):.3e}, "
                     f"significance={sig}")
            return root, sig
        if unresolved:
            # escalating the order cures a truncation-dominated floor; if
            # that did not buy at least a decade, the floor is roundoff and
            # only more digits help
            kind = "order"
            if stall_noise is not None and not _ECTX.mul(g._e, 10) < stall_noise:
                kind = "digits"
            stall_noise = g._e
            run.escalate("newton cannot resolve K(a,E) against noise", kind=kind)
            continue
        E_next = E - step
        if not (lo_b < E_next < hi_b):
            E_next = E - step / 2
            if not (lo_b < E_next < hi_b):
                run.note("newton left the bracket, falling back")
                return None
        if prev is not None and abs(float(step)) >= prev:
            growth += 1
            if growth >= 3:
                run.note("newton stopped contracting, falling back")
                return None
        else:
            growth = 0
        prev = abs(float(step))
        E = run.ctx._wrap(E_next._v, gmpy2.mpfr(0))
    run.note("newton step budget exhausted, falling back")
    return None


def _resolution_significance(ctx, root, g, gp):
    """Significance of the root as limited by the g evaluation noise."""
    gv = max(abs(g._v), g._e)
    if g._e == 0:
        return ctx.digits
    dmin = _ECTX.div(_ECTX.mul(_ECTX.sqrt(_ECTX.mul(gv, g._e)), 2),
                     abs(gp._v))
    return significance_of(ctx._wrap(root._v, dmin))


def _certify_candidates(run, root_frac, lo, hi):
    """Classify root +- 0.45 gap; returns the certified pair or None."""
    gap = run.cfg.target_gap
    for shift in range(4):
        hi_c = run.snap(root_frac + gap * Fraction(45, 100) + shift * gap * Fraction(45, 100))
        lo_c = run.snap(hi_c - gap * Fraction(9, 10))
        if not (lo < lo_c and hi_c < hi):
            return None
        ok_hi = ok_lo = False
        for _ in range(run.cfg.max_escalations + 1):
            c = run.classify(hi_c)
            if c.verdict is Verdict.ABOVE:
                ok_hi = True
                break
            if c.verdict is Verdict.BELOW:
                break   # root estimate was low; shift the window up
            run.escalate(c.evidence.get("reason", "indeterminate candidate"))
        if not ok_hi:
            continue
        for _ in range(run.cfg.max_escalations + 1):
            c = run.classify(lo_c)
            if c.verdict is Verdict.BELOW:
                ok_lo = True
                break
            if c.verdict is Verdict.ABOVE:
                return None   # window straddles nothing; bisection sorts it out
            run.escalate(c.evidence.get("reason", "indeterminate candidate"))
        if ok_lo:
            return lo_c, hi_c
    return None


def _bisect(run, lo, hi):
    """Classified bisection down to the target gap; endpoints stay certified."""
    gap = run.cfg.target_gap
    for _ in range(2000):
        if hi - lo <= gap:
            return lo, hi
        for off in _PROBES:
            mid = run.snap(lo + (hi - lo) * off)
            if not (lo < mid < hi):
                return lo, hi   # lattice exhausted; interval cannot shrink
            c = run.classify(mid)
            if c.verdict is Verdict.BELOW:
                lo = mid
                break
            if c.verdict is Verdict.ABOVE:
                hi = mid
                break
        else:
            run.escalate("all bisection probes indeterminate")
    raise SolverError(f"level {run.target.n}: bisection did not converge",
                      diagnostics=run.diagnostics())


def _digits_from_gap(gap_frac):
    d = 0
    while Fraction(1, 10 ** (d + 1)) >= gap_frac:
        d += 1
    return max(0, d - 1)


def _finish(run, lo, hi, newton_sig):
    # the digit claim rests on the certified gap alone; newton significance
    # is tracked separately in the provenance
    ctx = run.ctx
    gap_frac = hi - lo
    digits = min(_digits_from_gap(gap_frac), ctx.digits)
    prov = Provenance(
        order=run.N,
        cutoff=str(run.a),
        digits=run.digits,
        target_gap=f"{float(run.cfg.target_gap):.2e}",
        escalations=run.escalations,
        classifications=run.classifications,
        newton_steps=run.newton_steps,
        newton_significance=newton_sig,
        seeded_from_oracle=run.seeded,
        log=tuple(run.log),
    )
    return CertifiedLevel(
        n=run.target.n,
        E_lo=ctx.real(lo),
        E_hi=ctx.real(hi),
        gap=ctx.real(gap_frac),
        digits_reported=digits,
        provenance=prov,
        E_lo_exact=lo,
        E_hi_exact=hi,
    )


def _refine(run, lo, hi):
    newton_sig = None
    out = None
    _widen_for_gap(run, lo, hi)
    for attempt in range(2):
        result = _newton_root(run, lo, hi)
        if result is None:
            break
        root, newton_sig = result
        root_frac = run.snap(_as_fraction(root))
        out = _certify_candidates(run, root_frac, lo, hi)
        if out is not None:
            break
        newton_sig = None
        if attempt == 0 and run.escalations < run.cfg.max_escalations:
            # both candidates on one side of the level: the root is still
            # displaced by the barrier leakage; widen once and redo
            run.escalate("newton candidates straddle nothing", kind="cutoff")
            continue
        break
    if out is None:
        run.note("candidate certification failed, bisecting")
        out = _bisect(run, lo, hi)
    return _finish(run, out[0], out[1], newton_sig)


def _resolve_cutoff(params, n_max, cfg):
    if cfg.cutoff is not None:
        return cfg.cutoff
    return _auto_cutoff(params, n_max, cfg)


def bracket_level(params, n, cfg=None):
    """Certified (Below, Above) energies around level n, as exact rationals."""
    cfg = cfg or SolverConfig()
    run = _LevelRun(params, n, cfg, _resolve_cutoff(params, n, cfg))
    return _bracket(run)


def refine_level(params, n, bracket, cfg=None):
    """Shrink a certified bracket for level n to the target gap.

    The bracket endpoints must already classify Below and Above; they are
    trusted, not re-checked.
    """
    cfg = cfg or SolverConfig()
    run = _LevelRun(params, n, cfg, _resolve_cutoff(params, n, cfg))
    lo = run.snap(_as_fraction(bracket[0], "bracket low"))
    hi = run.snap(_as_fraction(bracket[1], "bracket high"))
    if not lo < hi:
        raise ValueError("bracket endpoints out of order")
    return _refine(run, lo, hi)


def solve_spectrum(params, n_max, cfg=None, failures=None):
    """Certified intervals for levels 0..n_max.

    With ``failures`` a list, a level that exhausts its budget is recorded
    there as (n, SolverError) and the remaining levels still run; otherwise
    the first failure raises.
    """
    if not isinstance(params, PotentialParams):
        raise TypeError("params must be a PotentialParams")
    cfg = cfg or SolverConfig()
    if params.is_double_well and not cfg.experimental_double_well:
        raise ValueError(
            "omega0_sq < 0 is a double well; set experimental_double_well")
    if n_max < 0:
        raise ValueError("n_max must be non-negative")
    a = _resolve_cutoff(params, n_max, cfg)
    levels = []
    for n in range(n_max + 1):
        run = _LevelRun(params, n, cfg, a)
        try:
            lo, hi = _bracket(run)
            levels.append(_refine(run, lo, hi))
            log.info("level %d certified: %s escalations, %s classifications",
                     n, run.escalations, run.classifications)
        except SolverError as e:
            if failures is None:
                raise
            log.error("level %d failed: %s", n, e)
            failures.append((n, e))
    return levels
