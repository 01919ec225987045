"""Arbitrary-precision real arithmetic with running significance estimates.

Every number used by the solver is a :class:`BigReal`: an MPFR value owned by
a :class:`PrecisionContext` together with a first-order absolute error bound.
The error bound is what makes the solver's reported digit counts meaningful:
each arithmetic operation propagates the bounds of its operands and adds the
rounding error of the operation itself, so ``significance_of`` can report how
many leading decimal digits of a result are trustworthy.  Subtraction of
nearly equal values therefore shows up as lost digits automatically (the
absolute bound is unchanged while the value shrinks), which is the dominant
loss mechanism in the eigenvalue refinement loop.

The model is a running estimate, not rigorous interval arithmetic: bounds are
carried to ~20 digits and combined to first order.  That is enough to decide
how many digits to print and when a comparison is inside the noise, which is
all the certification logic asks of it.

Exact zero is a distinguished state (parity-forced zero coefficients must not
poison tracking): it is absorbing-neutral in arithmetic, while
``significance_of`` reports 0 for it, as for any value with no trustworthy
leading digit.
"""

from __future__ import annotations

from fractions import Fraction

import gmpy2

__all__ = [
    "PrecisionContext",
    "BigReal",
    "with_precision",
    "significance_of",
    "sqrt",
]

# Shared low-precision context for error-bound arithmetic.  Bounds are order
# of magnitude estimates; 64 bits is plenty, and the MPFR exponent range means
# bounds like 1e-400 do not underflow the way a float64 would.
_ECTX = gmpy2.context(precision=64)

_LOG2_10 = 3.321928094887362


def _bits_for(digits):
    return int(digits * _LOG2_10) + 4


class PrecisionContext:
    """Working precision for a family of BigReal values.

    ``digits`` is the advertised decimal precision; ``guard_digits`` extra
    digits are carried internally so that ordinary arithmetic chains do not
    eat into the advertised count.  Contexts are immutable and safe to share.
    """

    __slots__ = ("digits", "guard_digits", "_bits", "_mp", "_ulp")

    def __init__(self, digits, guard_digits=10):
        if digits < 1:
            raise ValueError("precision must be at least 1 digit")
        if guard_digits < 0:
            raise ValueError("guard_digits must be non-negative")
        object.__setattr__(self, "digits", int(digits))
        object.__setattr__(self, "guard_digits", int(guard_digits))
        bits = _bits_for(digits + guard_digits)
        object.__setattr__(self, "_bits", bits)
        object.__setattr__(self, "_mp", gmpy2.context(precision=bits))
        # Relative rounding error of one operation at this precision.
        object.__setattr__(self, "_ulp", _ECTX.exp2(1 - bits))

    def __setattr__(self, name, value):
        raise AttributeError("PrecisionContext is immutable")

    def __repr__(self):
        return f"PrecisionContext(digits={self.digits}, guard_digits={self.guard_digits})"

    def __eq__(self, other):
        return (
            isinstance(other, PrecisionContext)
            and self.digits == other.digits
            and self.guard_digits == other.guard_digits
        )

    def __hash__(self):
        return hash((self.digits, self.guard_digits))

    # -- construction -------------------------------------------------------

    def real(self, x):
        """Coerce ``x`` (BigReal, int, Fraction, decimal string, float) to a
        BigReal under this context.

        Integers and floats convert exactly (a float *is* an exact binary
        rational; pass decimal strings when you mean decimal values).
        Strings and Fractions round once to working precision.
        """
        if isinstance(x, BigReal):
            if x.ctx is self:
                return x
            v = self._mp.plus(x._v)  # round to this context's precision
            err = _ECTX.add(x._e, _ECTX.mul(abs(v), self._ulp))
            return BigReal(self, v, err)
        if isinstance(x, bool):
            raise TypeError("bool is not a number here")
        if isinstance(x, int):
            v = gmpy2.mpfr(x, self._bits)
            err = gmpy2.mpfr(0) if v == x else _ECTX.mul(abs(v), self._ulp)
            return BigReal(self, v, err)
        if isinstance(x, float):
            return BigReal(self, gmpy2.mpfr(x, self._bits), gmpy2.mpfr(0))
        if isinstance(x, Fraction):
            if x.denominator == 1:
                return self.real(x.numerator)
            num = gmpy2.mpfr(x.numerator, self._bits + 8)
            den = gmpy2.mpfr(x.denominator, self._bits + 8)
            v = self._mp.div(num, den)
            if gmpy2.mpq(v) == x:  # dyadic lattice points convert exactly
                return BigReal(self, v, gmpy2.mpfr(0))
            return BigReal(self, v, _ECTX.mul(abs(v), self._ulp))
        if isinstance(x, str):
            v = gmpy2.mpfr(x.strip(), self._bits)
            if gmpy2.is_nan(v) or gmpy2.is_infinite(v):
                raise ValueError(f"not a finite decimal number: {x!r}")
            if v == 0:
                return BigReal(self, v, gmpy2.mpfr(0))
            try:
                exact = Fraction(x.strip())
            except ValueError:
                exact = None
            # decimals on the dyadic lattice ("1.5", "0.25") convert exactly
            if exact is not None and gmpy2.mpq(v) == exact:
                return BigReal(self, v, gmpy2.mpfr(0))
            return BigReal(self, v, _ECTX.mul(abs(v), self._ulp))
        raise TypeError(f"cannot make a BigReal from {type(x).__name__}")

    def render(self, v, sig_digits=None):
        """Round-to-nearest decimal string of ``v`` with an explicit digit
        count (default: the context's advertised digits).

        Plain positional form when the exponent is moderate, otherwise
        ``d.ddd...Esnn``.  This is the only supported way to externalize a
        BigReal; binary floats are never written out.
        """
        if sig_digits is None:
            sig_digits = self.digits
        sig_digits = max(1, int(sig_digits))
        x = v._v if isinstance(v, BigReal) else gmpy2.mpfr(v, self._bits)
        if x == 0:
            return "0"
        mant, exp, _ = x.digits(10, sig_digits)
        neg = mant.startswith("-")
        if neg:
            mant = mant[1:]
        # mant has sig_digits digits; value = 0.mant * 10**exp
        if -4 <= exp <= sig_digits + 6:
            if exp <= 0:
                s = "0." + "0" * (-exp) + mant
            elif exp >= len(mant):
                s = mant + "0" * (exp - len(mant))
            else:
                s = mant[:exp] + "." + mant[exp:]
        else:
            e = exp - 1
            s = mant[0] + "." + mant[1:] + f"E{'+' if e >= 0 else '-'}{abs(e)}"
        return ("-" if neg else "") + s

    # -- internal helpers ---------------------------------------------------

    def _round_err(self, v):
        """Rounding error contributed by one operation yielding ``v``."""
        if v == 0:
            return gmpy2.mpfr(0)
        return _ECTX.mul(abs(v), self._ulp)

    def _wrap(self, value, err):
        """Package a raw MPFR value with an explicit absolute error bound."""
        return BigReal(self, value, err)


def with_precision(digits, guard_digits=10):
    """Create a PrecisionContext carrying ``digits`` advertised decimal digits
    (plus guard digits internally)."""
    return PrecisionContext(digits, guard_digits)


class BigReal:
    """Immutable arbitrary-precision real with a tracked absolute error bound.

    Supports +, -, *, /, ** (non-negative int), abs, negation and ordering
    against other BigReals of the same context or exact Python numbers.
    """

    __slots__ = ("ctx", "_v", "_e")

    def __init__(self, ctx, value, err):
        object.__setattr__(self, "ctx", ctx)
        object.__setattr__(self, "_v", value)
        object.__setattr__(self, "_e", err)

    def __setattr__(self, name, value):
        raise AttributeError("BigReal is immutable")

    # -- introspection ------------------------------------------------------

    @property
    def is_exact_zero(self):
        return self._v == 0 and self._e == 0

    @property
    def abs_error(self):
        """The tracked absolute error bound (low-precision MPFR)."""
        return self._e

    def decimal(self, sig_digits=None):
        return self.ctx.render(self, sig_digits)

    def trusted_sign(self, factor=3):
        """-1, 0 or +1; 0 when the value does not clear ``factor`` times its
        own noise bound (comparisons against 0 must not trust noise)."""
        if self.is_exact_zero:
            return 0
        if abs(self._v) <= _ECTX.mul(self._e, gmpy2.mpfr(factor)):
            return 0
        return 1 if self._v > 0 else -1

    def __repr__(self):
        shown = min(self.ctx.digits, 20)
        return f"BigReal({self.ctx.render(self, shown)}, sig={significance_of(self)})"

    def __float__(self):
        return float(self._v)

    def __bool__(self):
        return self._v != 0

    # -- coercion -----------------------------------------------------------

    def _other(self, other):
        if isinstance(other, BigReal):
            if other.ctx is not self.ctx and other.ctx != self.ctx:
                raise ValueError("mixed PrecisionContexts; coerce explicitly")
            return other
        if isinstance(other, (int, Fraction, float)):
            return self.ctx.real(other)
        return None

    # -- arithmetic ---------------------------------------------------------

    def __add__(self, other):
        o = self._other(other)
        if o is None:
            return NotImplemented
        ctx = self.ctx
        v = ctx._mp.add(self._v, o._v)
        err = _ECTX.add(_ECTX.add(self._e, o._e), ctx._round_err(v))
        return BigReal(ctx, v, err)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._other(other)
        if o is None:
            return NotImplemented
        ctx = self.ctx
        v = ctx._mp.sub(self._v, o._v)
        if v == 0 and self._v == o._v and self._e == 0 and o._e == 0:
            return BigReal(ctx, gmpy2.mpfr(0), gmpy2.mpfr(0))
        err = _ECTX.add(_ECTX.add(self._e, o._e), ctx._round_err(v))
        return BigReal(ctx, v, err)

    def __rsub__(self, other):
        o = self._other(other)
        if o is None:
            return NotImplemented
        return o.__sub__(self)

    def __mul__(self, other):
        o = self._other(other)
        if o is None:
            return NotImplemented
        ctx = self.ctx
        v = ctx._mp.mul(self._v, o._v)
        err = _ECTX.add(
            _ECTX.add(_ECTX.mul(abs(self._v), o._e), _ECTX.mul(abs(o._v), self._e)),
            ctx._round_err(v),
        )
        return BigReal(ctx, v, err)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._other(other)
        if o is None:
            return NotImplemented
        if o._v == 0:
            raise ZeroDivisionError("division by (numerical) zero")
        ctx = self.ctx
        v = ctx._mp.div(self._v, o._v)
        oabs = abs(o._v)
        err = _ECTX.add(
            _ECTX.add(
                _ECTX.div(self._e, oabs),
                _ECTX.div(_ECTX.mul(abs(v), o._e), oabs),
            ),
            ctx._round_err(v),
        )
        return BigReal(ctx, v, err)

    def __rtruediv__(self, other):
        o = self._other(other)
        if o is None:
            return NotImplemented
        return o.__truediv__(self)

    def __neg__(self):
        return BigReal(self.ctx, -self._v, self._e)

    def __abs__(self):
        return BigReal(self.ctx, abs(self._v), self._e)

    def __pow__(self, n):
        if not isinstance(n, int) or n < 0:
            return NotImplemented
        ctx = self.ctx
        out = ctx.real(1)
        base = self
        k = n
        while k:
            if k & 1:
                out = out * base
            k >>= 1
            if k:
                base = base * base
        return out

    # -- ordering -----------------------------------------------------------

    def _cmp_value(self, other):
        if isinstance(other, BigReal):
            return other._v
        if isinstance(other, (int, float)):
            return other
        if isinstance(other, Fraction):
            return self.ctx.real(other)._v
        return None

    def __eq__(self, other):
        v = self._cmp_value(other)
        return NotImplemented if v is None else self._v == v

    def __lt__(self, other):
        v = self._cmp_value(other)
        return NotImplemented if v is None else self._v < v

    def __le__(self, other):
        v = self._cmp_value(other)
        return NotImplemented if v is None else self._v <= v

    def __gt__(self, other):
        v = self._cmp_value(other)
        return NotImplemented if v is None else self._v > v

    def __ge__(self, other):
        v = self._cmp_value(other)
        return NotImplemented if v is None else self._v >= v

    __hash__ = None


def sqrt(v):
    """Square root of a non-negative BigReal."""
    if not isinstance(v, BigReal):
        raise TypeError("sqrt expects a BigReal")
    if v._v < 0:
        raise ValueError("sqrt of a negative value")
    ctx = v.ctx
    if v.is_exact_zero:
        return BigReal(ctx, gmpy2.mpfr(0), gmpy2.mpfr(0))
    r = ctx._mp.sqrt(v._v)
    if r == 0:
        return BigReal(ctx, r, v._e)
    # d(sqrt x) = dx / (2 sqrt x)
    err = _ECTX.add(_ECTX.div(v._e, _ECTX.mul(gmpy2.mpfr(2), r)), ctx._round_err(r))
    return BigReal(ctx, r, err)


def significance_of(v):
    """Count of trustworthy leading decimal digits of ``v``, capped at the
    context's advertised precision.  0 means numerically meaningless."""
    if not isinstance(v, BigReal):
        raise TypeError("significance_of expects a BigReal")
    cap = v.ctx.digits
    if v._v == 0:
        # Exact zero is a special state; an inexact zero has no trusted digit.
        return 0
    if v._e == 0:
        return cap
    ratio = _ECTX.div(abs(v._v), v._e)
    if ratio <= 1:
        return 0
    sig = int(gmpy2.floor(_ECTX.log10(ratio)))
    return max(0, min(cap, sig))
