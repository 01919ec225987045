"""Entire-function power series for the squared-eigenfunction representation.

For a trial energy E the state of the method is a truncated even series
K(x) = sum K_n x^(2n) whose coefficients obey a three-term linear recursion
driven by the potential, together with the energy-derivative series dK_n/dE
(for Newton refinement).  The companion odd series L(x) collapses to
L = -(hbar/2) K'(x) for the level-spacing choice delta = 0, so only K is
stored and every L-dependent quantity is derived from K and its derivatives.

K(x, E) is the square of a real Schrodinger solution for every real E, so it
is non-negative on the real axis and its real zeros are tangencies (double
zeros) at the nodes of the underlying wavefunction.  Zero finding therefore
scans for minima (sign changes of K') and accepts a minimum as a node only
when the evaluated K value drops to the per-point noise floor while the
surrounding profile stays well above it.  The logarithmic-derivative ratio
L/K then has a simple pole with residue -hbar at each node.

Evaluations return both the value and an empirical tail estimate: the
coefficients decay like |K_n| ~ C1 C2^n (n!)^(-2/3) but the constants are not
known a priori, so truncation adequacy is certified per evaluation from the
magnitude of the last retained term against the positive-coefficient
companion sum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import gmpy2

from .model import Parity, potential
from .numerics import _ECTX, BigReal, PrecisionContext

__all__ = [
    "SeriesState",
    "TailEstimate",
    "NearMissError",
    "build_series",
    "eval_K",
    "eval_dKdE",
    "eval_density",
    "eval_ratio",
    "find_zeros",
    "residue_at_zero",
    "riccati_residual",
    "conservation_residual",
    "L_coefficients",
    "dump_coefficients",
]

# Noise-floor multipliers for the node decision bands.
_NODE_ACCEPT = 1000       # minimum at or below 1e3 x floor: a node
_NODE_AMBIGUOUS = 10 ** 6  # between the bands: cannot tell, escalate
_PROFILE_CLEAR = 10 ** 6   # surrounding profile must clear the floor by this
_OPAQUE = 10               # grid values below 10 x floor are untrusted


class NearMissError(ArithmeticError):
    """A minimum of K could not be resolved against the noise floor.

    Raised when a candidate dip sits between the accept and reject bands, or
    when the surrounding profile is itself at the noise floor; the caller
    should escalate resources rather than guess."""

    def __init__(self, x, value, floor):
        self.x = x
        self.value = value
        self.floor = floor
        super().__init__(
            f"unresolved minimum of K near x={float(x):.6g}: "
            f"|K|={float(value):.3e} vs noise floor {float(floor):.3e}"
        )


@dataclass(frozen=True)
class TailEstimate:
    """Empirical truncation report for one series evaluation."""

    order_used: int
    last_term_ratio: BigReal
    trusted_digits: int


class SeriesState:
    """Coefficients K_0..K_{N-1} and dK_n/dE for one (E, parity, N, precision).

    Immutable after construction; evaluation caches derivative-scaled
    coefficient arrays internally.  ``coeffs`` and ``dcoeffs`` are BigReal
    views of the raw working arrays.
    """

    def __init__(self, params, trial, order, delta, ctx, raw, draw, kerr, dkerr):
        self.params = params
        self.trial = trial
        self.order = order
        self.delta = delta
        self.ctx = ctx
        self._raw = raw
        self._draw = draw
        self._rawabs = [abs(c) for c in raw]
        self._drawabs = [abs(c) for c in draw]
        self._kerr = kerr
        self._dkerr = dkerr
        self._E_err = ctx.real(trial.E)._e
        self._cache = {}

    @property
    def N(self):
        return self.order

    @property
    def coeffs(self):
        out = self._cache.get("coeffs")
        if out is None:
            out = [self.ctx._wrap(c, e)
                   for c, e in zip(self._raw, self._kerr)]
            self._cache["coeffs"] = out
        return out

    @property
    def dcoeffs(self):
        out = self._cache.get("dcoeffs")
        if out is None:
            out = [self.ctx._wrap(c, e)
                   for c, e in zip(self._draw, self._dkerr)]
            self._cache["dcoeffs"] = out
        return out

    def _deriv_arrays(self, order):
        """Raw coefficient array of the order-th x-derivative of K (with
        magnitudes, error bounds, and the matching d/dE array when the trial
        energy carries uncertainty), expressed as a polynomial in t = x^2
        (times x for odd derivative orders)."""
        key = ("d", order)
        out = self._cache.get(key)
        if out is not None:
            return out
        mul = self.ctx._mp.mul  # bare mpz*mpfr would round at the global
        want_dE = self._E_err != 0  # default precision and poison the chain
        if order == 0:
            out = (self._raw, self._rawabs, self._kerr,
                   self._draw if want_dE else None)
        elif order == 1:
            # K' = x * sum 2(j+1) K_{j+1} t^j
            fac = [2 * (j + 1) for j in range(self.order - 1)]
        elif order == 2:
            # K'' = sum 2(j+1)(2j+1) K_{j+1} t^j
            fac = [2 * (j + 1) * (2 * j + 1) for j in range(self.order - 1)]
        else:
            raise ValueError("only derivatives up to order 2 are provided")
        if order:
            arr = [mul(self._raw[j + 1], f) for j, f in enumerate(fac)]
            err = [_ECTX.mul(self._kerr[j + 1], f) for j, f in enumerate(fac)]
            darr = ([mul(self._draw[j + 1], f) for j, f in enumerate(fac)]
                    if want_dE else None)
            out = (arr, [abs(c) for c in arr], err, darr)
        self._cache[key] = out
        return out

    def __repr__(self):
        return (
            f"SeriesState(parity={self.trial.parity.value}, N={self.order}, "
            f"E~{float(self.trial.E):.6g}, digits={self.ctx.digits})"
        )


def build_series(params, trial, N, ctx, delta=0):
    """Run the coefficient recursion to order N under ``ctx``.

    The recursion row producing K_{n+2} (multiplied through by (2n+1) so all
    integer factors are exact) is

        (hbar^2/m) (n+2)(n+1)(2n+3)(2n+1) K_{n+2} =
            -(2E + hbar*delta) * 2(n+1)(2n+1) K_{n+1}
            + ((2n+1)^2 m omega0^2 - m delta^2) K_n
            + 4 lambda n (2n+1) K_{n-1}

    with K_{-1} = 0.  Boundary data: even parity K_0 = 1,
    K_1 = -(2m/hbar^2)(E + hbar*delta/2); odd parity K_0 = 0, K_1 = 1.
    dK_n/dE satisfies the row differentiated in E.  Integer combinations are
    formed exactly; each row performs a single division.

    The terms of a row partially cancel, so coefficient errors are amplified
    well beyond one rounding per row; an explicit first-order error bound is
    propagated alongside every coefficient and feeds the evaluation noise
    floors.  The bounds treat the trial energy as a given exact input (its
    direct uncertainty enters evaluations first order through the dK_n/dE
    series instead, which keeps the sign cancellations the coefficient-level
    bound would destroy); delta must be exactly representable.
    """
    if N < 3:
        raise ValueError("need at least 3 coefficients")
    if not isinstance(trial.E, BigReal):
        raise TypeError("trial.E must be a BigReal")
    mp = ctx._mp
    u = ctx._ulp
    E_b = ctx.real(trial.E)
    E = E_b._v
    delta_b = delta if isinstance(delta, BigReal) else ctx.real(delta)
    if delta_b._e != 0:
        raise ValueError("delta must be exactly representable at working "
                         "precision (use a dyadic rational)")
    d = delta_b._v
    mw2 = ctx.real(params.m * params.omega0_sq)._v
    lam4 = ctx.real(4 * params.lam)._v
    m_over_h2 = ctx.real(params.m / (params.hbar * params.hbar))._v
    two_m_over_h2 = ctx.real(2 * params.m / (params.hbar * params.hbar))._v
    hbar = ctx.real(params.hbar)._v

    twoE = mp.add(mp.add(E, E), mp.mul(hbar, d))  # 2E + hbar*delta
    mdd = mp.mul(ctx.real(params.m)._v, mp.mul(d, d))  # m delta^2
    twoE_err = _ECTX.mul(abs(twoE), u)  # representation rounding only
    a_twoE = abs(twoE)
    a_f = abs(m_over_h2)

    K = [None] * N
    dK = [None] * N
    ke = [None] * N
    de = [None] * N
    zero = gmpy2.mpfr(0)
    if trial.parity is Parity.EVEN:
        K[0] = gmpy2.mpfr(1)
        # K_1 = -(2m/hbar^2) (E + hbar*delta/2)
        K[1] = mp.mul(-two_m_over_h2, mp.add(E, mp.div(mp.mul(hbar, d), 2)))
        dK[0] = zero
        dK[1] = -two_m_over_h2
        ke[0] = zero
        ke[1] = _ECTX.mul(abs(K[1]), _ECTX.mul(u, 3))
        de[0] = zero
        de[1] = _ECTX.mul(abs(dK[1]), u)
    else:
        K[0] = zero
        K[1] = gmpy2.mpfr(1)
        dK[0] = zero
        dK[1] = zero
        ke[0] = zero
        ke[1] = zero
        de[0] = zero
        de[1] = zero

    for n in range(N - 2):
        i1 = 2 * (n + 1) * (2 * n + 1)
        i3 = 4 * n * (2 * n + 1) if n >= 1 else 0
        denom = (n + 2) * (n + 1) * (2 * n + 3) * (2 * n + 1)
        c2 = mp.sub(mp.mul(mw2, (2 * n + 1) ** 2), mdd)
        a_c2 = abs(c2)

        t1 = mp.mul(mp.mul(twoE, K[n + 1]), -i1)
        t2 = mp.mul(c2, K[n])
        s = mp.add(t1, t2)
        mag = _ECTX.add(abs(t1), abs(t2))
        # |dt1|: first-order in (twoE, K_{n+1}, dK_{n+1})
        e1 = _ECTX.mul(_ECTX.add(_ECTX.mul(a_twoE, ke[n + 1]),
                                 _ECTX.mul(twoE_err, abs(K[n + 1]))), i1)
        e2 = _ECTX.add(_ECTX.mul(a_c2, ke[n]),
                       _ECTX.mul(abs(t2), _ECTX.mul(u, 2)))
        esum = _ECTX.add(e1, e2)

        dt1 = mp.mul(mp.add(mp.mul(twoE, dK[n + 1]), mp.mul(K[n + 1], 2)), -i1)
        dt2 = mp.mul(c2, dK[n])
        ds = mp.add(dt1, dt2)
        dmag = _ECTX.add(abs(dt1), abs(dt2))
        de1 = _ECTX.mul(
            _ECTX.add(_ECTX.add(_ECTX.mul(a_twoE, de[n + 1]),
                                _ECTX.mul(twoE_err, abs(dK[n + 1]))),
                      _ECTX.mul(ke[n + 1], 2)), i1)
        de2 = _ECTX.add(_ECTX.mul(a_c2, de[n]),
                        _ECTX.mul(abs(dt2), _ECTX.mul(u, 2)))
        desum = _ECTX.add(de1, de2)

        if i3:
            lam_n = mp.mul(lam4, i3 // 4)
            a_l = abs(lam_n)
            t3 = mp.mul(lam_n, K[n - 1])
            s = mp.add(s, t3)
            mag = _ECTX.add(mag, abs(t3))
            esum = _ECTX.add(esum, _ECTX.mul(a_l, ke[n - 1]))
            dt3 = mp.mul(lam_n, dK[n - 1])
            ds = mp.add(ds, dt3)
            dmag = _ECTX.add(dmag, abs(dt3))
            desum = _ECTX.add(desum, _ECTX.mul(a_l, de[n - 1]))

        K[n + 2] = mp.div(mp.mul(s, m_over_h2), denom)
        dK[n + 2] = mp.div(mp.mul(ds, m_over_h2), denom)
        # additions and the scaled division contribute a few roundings on the
        # term magnitudes; the propagated input errors carry the rest
        ke[n + 2] = _ECTX.add(
            _ECTX.div(_ECTX.mul(_ECTX.add(esum, _ECTX.mul(mag, _ECTX.mul(u, 3))), a_f), denom),
            _ECTX.mul(abs(K[n + 2]), _ECTX.mul(u, 2)))
        de[n + 2] = _ECTX.add(
            _ECTX.div(_ECTX.mul(_ECTX.add(desum, _ECTX.mul(dmag, _ECTX.mul(u, 3))), a_f), denom),
            _ECTX.mul(abs(dK[n + 2]), _ECTX.mul(u, 2)))

    return SeriesState(params, trial, N, delta_b, ctx, K, dK, ke, de)


# -- raw evaluation helpers --------------------------------------------------


def _horner(mp, arr, t):
    acc = arr[-1]
    for i in range(len(arr) - 2, -1, -1):
        acc = mp.add(mp.mul(acc, t), arr[i])
    return acc


def _ipow(mp, base, n):
    out = gmpy2.mpfr(1)
    b = base
    while n:
        if n & 1:
            out = mp.mul(out, b)
        n >>= 1
        if n:
            b = mp.mul(b, b)
    return out


def _tail_bound(arrabs, tabs, last):
    """Estimated magnitude of the dropped tail sum_{n>=M} |a_n| t^n.

    The local term growth is fitted on the retained series end and extended
    with the coefficient decay law |a_{n+1}/a_n| ~ C/(n+1)^(2/3); when the
    fitted ratio is near or above 1 the terms keep growing past the
    truncation point and the dominant contribution is the modeled peak,
    which "2 x last term" would badly underestimate.  The fit window
    smooths the term-magnitude oscillations of near-eigenvalue series.
    Returns a value comparable to or larger than the last retained term.
    """
    M = len(arrabs)
    w = min(12, M - 1)
    logt = float(_ECTX.log(tabs)) if tabs > 0 else 0.0
    pts = []
    for j in range(M - w, M):
        if arrabs[j] == 0:
            continue
        pts.append((j, float(_ECTX.log(arrabs[j])) + j * logt))
    if len(pts) < 4:
        return _ECTX.mul(last, 2)
    # least-squares slope of log term magnitude over the window
    nj = len(pts)
    mean_j = sum(j for j, _ in pts) / nj
    mean_l = sum(l for _, l in pts) / nj
    den = sum((j - mean_j) ** 2 for j, _ in pts)
    slope = sum((j - mean_j) * (l - mean_l) for j, l in pts) / den
    ct = math.exp(min(slope, 500.0)) * (M - 1) ** (2.0 / 3.0)  # modeled C*t
    if not (ct > 0.0 and math.isfinite(ct)):
        return _ECTX.mul(last, 2)
    # anchor at the end of the retained range: the fitted prediction guards
    # against an oscillation near-zero in the actual last coefficient
    predicted_last = mean_l + slope * (M - 1 - mean_j)
    actual_last = float(_ECTX.log(last)) if last > 0 else predicted_last
    anchor = max(actual_last, predicted_last)
    total = 0.0
    lp = 0.0
    for i in range(1, 40 * M):
        lr = math.log(ct) - (2.0 / 3.0) * math.log(M - 1 + i)
        lp += lr
        if lp > 500.0:      # model diverges; saturate far above everything
            total = math.exp(500.0)
            break
        if lp < -800.0:     # dropped terms no longer contribute
            break
        term = math.exp(lp)
        total += term
        if lr < -0.69 and term < 1e-3 * total:
            break
    bound = _ECTX.mul(gmpy2.exp(gmpy2.mpfr(anchor, 64)),
                      gmpy2.mpfr(total))
    return _ECTX.add(bound, last)


def _eval_raw(s, arr, arrabs, errarr, dEarr, x_v, xfactor):
    """Evaluate sum arr[j] t^j (times x^xfactor) with companion magnitude,
    last-term magnitude, and a first-order noise bound (propagated
    coefficient errors, roundoff of the Horner chain, the truncation
    estimate from the last retained term, and the trial-energy uncertainty
    routed through the signed d/dE sum)."""
    mp = s.ctx._mp
    t = mp.mul(x_v, x_v)
    tabs = abs(t)
    val = _horner(mp, arr, t)
    comp = _horner(mp, arrabs, tabs)
    cerr = _horner(_ECTX, errarr, tabs)
    last = _ECTX.mul(arrabs[-1], _ipow(_ECTX, tabs, len(arr) - 1))
    trunc = _tail_bound(arrabs, tabs, last)
    if dEarr is not None:
        cerr = _ECTX.add(
            cerr, _ECTX.mul(abs(_horner(mp, dEarr, t)), s._E_err))
    if xfactor:
        xf = _ipow(mp, x_v, xfactor)
        val = mp.mul(val, xf)
        comp = _ECTX.mul(comp, abs(xf))
        cerr = _ECTX.mul(cerr, abs(xf))
        last = _ECTX.mul(last, abs(xf))
        trunc = _ECTX.mul(trunc, abs(xf))
    err = _ECTX.add(
        _ECTX.add(cerr, _ECTX.mul(_ECTX.mul(comp, s.ctx._ulp), 3 * s.order)),
        _ECTX.mul(trunc, 2),
    )
    return val, comp, last, err


def _coerce_x(s, x):
    return x if isinstance(x, BigReal) and x.ctx is s.ctx else s.ctx.real(x)


def _tail_estimate(s, val, comp, last, err):
    if comp == 0:
        ratio = s.ctx.real(0)
        trusted = s.ctx.digits
    else:
        ratio = s.ctx._wrap(
            gmpy2.mpfr(_ECTX.div(last, comp), s.ctx._bits),
            gmpy2.mpfr(0),
        )
        noise = err
        v = abs(val)
        if v == 0 or noise == 0 or v <= noise:
            trusted = 0
        else:
            trusted = max(0, int(gmpy2.floor(_ECTX.log10(_ECTX.div(v, noise)))))
    return TailEstimate(order_used=s.order, last_term_ratio=ratio, trusted_digits=min(trusted, s.ctx.digits + s.ctx.guard_digits))


def eval_K(s, x):
    """Horner evaluation of K at x.

    Returns ``(value, tail)``: the value's error bound includes the
    truncation estimate, and ``tail.trusted_digits`` is 0 rather than raising
    when truncation is insufficient at this x.
    """
    x = _coerce_x(s, x)
    arr, arrabs, errarr, dEarr = s._deriv_arrays(0)
    val, comp, last, err = _eval_raw(s, arr, arrabs, errarr, dEarr, x._v, 0)
    tail = _tail_estimate(s, val, comp, last, err)
    return s.ctx._wrap(val, err), tail


def eval_dKdE(s, x):
    """Horner evaluation of the energy derivative sum dK_n/dE x^(2n).

    The error bound treats the trial energy as exact (the second energy
    derivative is not tracked); callers use this as a slope, where the
    first-order term self-cancels in Newton steps."""
    x = _coerce_x(s, x)
    val, comp, last, err = _eval_raw(
        s, s._draw, s._drawabs, s._dkerr, None, x._v, 0)
    return s.ctx._wrap(val, err)


def _eval_K_deriv(s, x_v, order):
    arr, arrabs, errarr, dEarr = s._deriv_arrays(order)
    return _eval_raw(s, arr, arrabs, errarr, dEarr, x_v, order % 2)


def eval_density(s, x):
    """Unnormalized probability density |K(x)| (valid as a density when E is
    close to an eigenvalue; defined for any E)."""
    val, _ = eval_K(s, x)
    return abs(val)


def _require_delta_zero(s, what):
    if not (s.delta._v == 0):
        raise ValueError(f"{what} requires the delta=0 specialization")


def eval_ratio(s, x):
    """The logarithmic-derivative ratio L/K = -(hbar/2) K'(x)/K(x)."""
    _require_delta_zero(s, "eval_ratio")
    x = _coerce_x(s, x)
    kv, kerr = _eval_with_err(s, x._v, 0)
    if abs(kv) <= _ECTX.mul(kerr, 4):
        raise ZeroDivisionError(
            f"K(x) at x={float(x):.6g} is below the trusted noise floor (pole)"
        )
    dv, derr = _eval_with_err(s, x._v, 1)
    K = s.ctx._wrap(kv, kerr)
    Kp = s.ctx._wrap(dv, derr)
    half_h = s.ctx.real(-Fraction(s.params.hbar, 2))
    return half_h * Kp / K


def _eval_with_err(s, x_v, order):
    val, _, _, err = _eval_K_deriv(s, x_v, order)
    return val, err


# -- zero location -----------------------------------------------------------


def _scan_step(s, a_f):
    """Grid step: a/1000, or a quarter de Broglie half-wavelength at the
    origin if that is smaller (it bounds node spacing)."""
    E_f = float(s.trial.E)
    h = a_f / 1000.0
    if E_f > 0:
        hf = float(s.params.hbar)
        k = math.sqrt(2.0 * float(s.params.m) * E_f) / hf
        h = min(h, math.pi / (4.0 * k))
    return h


def _scan_profile(s, a):
    """Evaluate K on the scan grid over (0, a].

    Companion and last-term magnitudes are monotone in |x|, so the noise
    bound is filled in from a coarse overlay evaluated at or beyond each
    point (a slight overestimate, never an underestimate).
    """
    key = ("scan", float(a))
    cached = s._cache.get(key)
    if cached is not None:
        return cached
    mp = s.ctx._mp
    a_v = a._v
    M = max(64, int(math.ceil(float(a) / _scan_step(s, float(a)))))
    arr, arrabs, errarr, dEarr = s._deriv_arrays(0)
    xs = []
    vals = []
    errs = []
    coarse = 8
    # noise bounds at coarse points, assigned to the preceding fine points
    for i0 in range(1, M + 1, coarse):
        i1 = min(i0 + coarse - 1, M)
        x_hi = mp.div(mp.mul(a_v, i1), M)
        t_hi = mp.mul(x_hi, x_hi)
        comp = _horner(mp, arrabs, t_hi)
        cerr = _horner(_ECTX, errarr, t_hi)
        if dEarr is not None:
            # magnitude companion keeps this bound monotone in x
            cerr = _ECTX.add(
                cerr,
                _ECTX.mul(_horner(mp, s._drawabs, t_hi), s._E_err))
        last = _ECTX.mul(arrabs[-1], _ipow(_ECTX, t_hi, len(arr) - 1))
        trunc = _tail_bound(arrabs, t_hi, last)
        err = _ECTX.add(
            _ECTX.add(cerr, _ECTX.mul(_ECTX.mul(comp, s.ctx._ulp), 3 * s.order)),
            _ECTX.mul(trunc, 2),
        )
        for i in range(i0, i1 + 1):
            x_v = mp.div(mp.mul(a_v, i), M)
            xs.append(x_v)
            vals.append(_horner(mp, arr, mp.mul(x_v, x_v)))
            errs.append(err)
    out = (xs, vals, errs)
    s._cache[key] = out
    return out


def _deriv_sign(s, x_v):
    # sign of K'(x) for x > 0; the leading x factor never flips it
    mp = s.ctx._mp
    arr = s._deriv_arrays(1)[0]
    return gmpy2.sign(_horner(mp, arr, mp.mul(x_v, x_v)))


def _refine_minimum(s, lo, hi, tol):
    """Bisect the sign change of K' inside [lo, hi] to width tol."""
    mp = s.ctx._mp
    if not (_deriv_sign(s, lo) < 0 and _deriv_sign(s, hi) > 0):
        return None
    for _ in range(600):
        if mp.sub(hi, lo) <= tol:
            break
        mid = mp.div(mp.add(lo, hi), 2)
        if _deriv_sign(s, mid) < 0:
            lo = mid
        else:
            hi = mid
    return mp.div(mp.add(lo, hi), 2)


def _zeros_from_profile(s, a, profile):
    """Locate the tangency zeros of K from a scan profile.

    Returns (zeros, diagnostics) where diagnostics notes opaque grid indices
    (value under the noise floor away from any accepted node).  Raises
    NearMissError for a dip that lands between the decision bands.
    """
    mp = s.ctx._mp
    xs, vals, errs = profile
    M = len(xs)
    avals = [abs(v) for v in vals]
    tol = _ECTX.mul(
        gmpy2.mpfr(a._v, 64), _ECTX.exp10(-(s.ctx.digits - 5))
    )
    zeros = []
    for i in range(1, M - 1):
        if not (avals[i] < avals[i - 1] and avals[i] <= avals[i + 1]):
            continue
        lo = xs[i - 1]
        hi = xs[i + 1]
        x_min = _refine_minimum(s, lo, hi, tol)
        if x_min is None:
            # no clean derivative sign change; widen once before judging
            if i >= 2 and i + 2 < M:
                x_min = _refine_minimum(s, xs[i - 2], xs[i + 2], tol)
        if x_min is None:
            # a discrete minimum with no derivative crossing: noise plateau
            floor = errs[i]
            if avals[i] <= _ECTX.mul(floor, _NODE_AMBIGUOUS):
                raise NearMissError(xs[i], avals[i], floor)
            continue
        val, tail = eval_K(s, s.ctx._wrap(x_min, gmpy2.mpfr(0)))
        floor = val.abs_error
        depth = abs(val._v)
        local = max(avals[max(0, i - 3): i + 4])
        if depth <= _ECTX.mul(floor, _NODE_ACCEPT):
            if local <= _ECTX.mul(floor, _PROFILE_CLEAR):
                raise NearMissError(x_min, depth, floor)
            zeros.append(s.ctx._wrap(x_min, gmpy2.mpfr(tol, 64)))
        elif depth <= _ECTX.mul(floor, _NODE_AMBIGUOUS):
            raise NearMissError(x_min, depth, floor)
        # else: a genuine positive minimum (no node here)
    opaque = []
    for i in range(M):
        if avals[i] <= _ECTX.mul(errs[i], _OPAQUE):
            near_node = any(
                abs(float(xs[i]) - float(z)) <= 2.5 * float(a) / M for z in zeros
            )
            if not near_node:
                opaque.append(i)
    return zeros, {"opaque": opaque, "grid": M}


def find_zeros(s, a, ctx=None):
    """All zeros of K in (0, a], ascending, refined to working precision.

    K is a squared solution, so each zero is a tangency; they are found as
    noise-floor minima between derivative sign changes.  Raises
    NearMissError when a dip cannot be resolved against the noise floor.
    """
    _require_delta_zero(s, "find_zeros")
    a = _coerce_x(s, a)
    zeros, _ = _zeros_from_profile(s, a, _scan_profile(s, a))
    return zeros


# -- analytic checks ---------------------------------------------------------


def residue_at_zero(s, x0):
    """Fitted residue of L/K at a zero x0 of K.

    Linear fit of (x - x0)(L/K) at offsets +-eps, +-2eps starting from
    eps = 1e-6 x0; for a simple pole the intercept is the residue
    (expected: -hbar).  When K at the fit offsets sits below the trusted
    noise floor, eps is widened until the samples resolve; the fit bias
    grows only linearly with eps.
    """
    _require_delta_zero(s, "residue_at_zero")
    x0 = _coerce_x(s, x0)
    ctx = s.ctx
    eps = x0 * ctx.real(Fraction(1, 10 ** 6))
    four = ctx.real(4)
    for _ in range(8):
        acc = ctx.real(0)
        try:
            for k in (-2, -1, 1, 2):
                dx = eps * k
                x = x0 + dx
                acc = acc + dx * eval_ratio(s, x)
        except ZeroDivisionError:
            eps = eps * four
            continue
        return acc / 4
    raise ZeroDivisionError(
        f"K near the zero at x={float(x0):.6g} cannot be resolved against "
        "the noise floor at any usable fit offset")


def riccati_residual(s, x):
    """Residual of hbar (L/K)' - (L/K)^2 + 2m(V - E) with (L/K)' from series
    differentiation; zero for the exact flow, noise-floor small numerically."""
    _require_delta_zero(s, "riccati_residual")
    x = _coerce_x(s, x)
    ctx = s.ctx
    kv, kerr = _eval_with_err(s, x._v, 0)
    if abs(kv) <= _ECTX.mul(kerr, 4):
        raise ZeroDivisionError("riccati residual evaluated at a zero of K")
    K = ctx._wrap(kv, kerr)
    d1v, d1err = _eval_with_err(s, x._v, 1)
    d2v, d2err = _eval_with_err(s, x._v, 2)
    Kp = ctx._wrap(d1v, d1err)
    Kpp = ctx._wrap(d2v, d2err)
    hbar = ctx.real(s.params.hbar)
    half_h = hbar / 2
    r1 = Kp / K
    rho = -half_h * r1
    rho_prime = -half_h * (Kpp / K - r1 * r1)
    two_m = ctx.real(2 * s.params.m)
    return hbar * rho_prime - rho * rho + two_m * (potential(s.params, x) - s.trial.E)


def conservation_residual(s, x):
    """The conserved combination L^2 - hbar(L'K - K'L) - 2mK^2(V - E) with
    L = -(hbar/2)K', which the boundary data forces to vanish identically:

        (hbar^2/2) K'' K - (hbar^2/4) K'^2 - 2m K^2 (V - E)

    The returned BigReal's error bound is the per-evaluation noise floor; the
    residual is meaningful only relative to it."""
    _require_delta_zero(s, "conservation_residual")
    x = _coerce_x(s, x)
    ctx = s.ctx
    kv, kerr = _eval_with_err(s, x._v, 0)
    d1v, d1err = _eval_with_err(s, x._v, 1)
    d2v, d2err = _eval_with_err(s, x._v, 2)
    K = ctx._wrap(kv, kerr)
    Kp = ctx._wrap(d1v, d1err)
    Kpp = ctx._wrap(d2v, d2err)
    h2 = ctx.real(s.params.hbar * s.params.hbar)
    two_m = ctx.real(2 * s.params.m)
    return (
        h2 / 2 * Kpp * K
        - h2 / 4 * Kp * Kp
        - two_m * K * K * (potential(s.params, x) - s.trial.E)
    )


def L_coefficients(s):
    """Coefficients L_n of the odd companion series, from
    L_n = -(m delta/(2n+1)) K_n - hbar (n+1) K_{n+1}; length N-1."""
    ctx = s.ctx
    mdelta = ctx.real(s.params.m) * s.delta
    hbar = ctx.real(s.params.hbar)
    K = s.coeffs
    out = []
    for n in range(s.order - 1):
        out.append(-(mdelta / (2 * n + 1)) * K[n] - hbar * (n + 1) * K[n + 1])
    return out


def dump_coefficients(s, stream, sig_digits=None):
    """Write one line per coefficient: ``n TAB K_n TAB dK_n/dE`` as decimal
    strings (for debugging and cross-implementation comparison)."""
    render = s.ctx.render
    for n in range(s.order):
        stream.write(
            f"{n}\t{render(s.coeffs[n], sig_digits)}\t{render(s.dcoeffs[n], sig_digits)}\n"
        )
