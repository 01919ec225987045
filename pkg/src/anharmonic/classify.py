"""Rigorous Below/Above placement of a trial energy for a target level.

The certificate is one-sided in both directions and never guesses:

* Above: the wavefunction picks up an extra node, so the scan finds more
  zeros of K on (0, a] than the target level allows.  The entering zero
  (the largest one) is validated by its L/K residue before the verdict is
  issued.
* Below: the node count matches the target and the logarithmic-derivative
  flow enters the WKB sink, i.e. at some certified grid point the ratio sits
  strictly inside (-W, W) with W = sqrt(2m(V-E)).  Once inside, the flow
  cannot leave and the solution grows without bound, so E is below the level.
* Indeterminate: anything else, with the limiting resource named so the
  caller knows what to escalate (order, precision, cutoff, bracket).

Every inequality backing a verdict must clear its noise bound by a fixed
factor; values indistinguishable from noise always degrade to Indeterminate
rather than to a verdict.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field

import gmpy2

from .model import Parity, TrialEnergy, potential, turning_point, wkb_curve
from .numerics import BigReal
from .series import (
    NearMissError,
    _scan_profile,
    _zeros_from_profile,
    build_series,
    eval_K,
    eval_ratio,
    residue_at_zero,
)

__all__ = [
    "Verdict",
    "LevelTarget",
    "Classification",
    "classify_energy",
    "sink_entry",
]

log = logging.getLogger(__name__)

# relative tolerance on the residue -hbar at the entering zero
_RESIDUE_TOL = 1e-3


class Verdict(enum.Enum):
    BELOW = "Below"
    ABOVE = "Above"
    INDETERMINATE = "Indeterminate"


@dataclass(frozen=True)
class LevelTarget:
    """Level index n; the parity sector and expected positive-axis node
    count floor(n/2) follow from it."""

    n: int

    def __post_init__(self):
        if not isinstance(self.n, int) or self.n < 0:
            raise ValueError("level index must be a non-negative integer")

    @property
    def parity(self):
        return Parity.for_level(self.n)

    @property
    def positive_nodes(self):
        return self.n // 2


@dataclass(frozen=True)
class Classification:
    verdict: Verdict
    node_count: int
    evidence: dict = field(default_factory=dict)

    def __str__(self):
        return self.verdict.value


def _emit(trace, record):
    log.debug("classify %s", record)
    if trace is None:
        return
    if callable(trace):
        trace(record)
    else:
        trace.append(record)


def _indeterminate(count, reason, resource, trace, base):
    record = dict(base, verdict="Indeterminate", node_count=count,
                  reason=reason, resource=resource)
    _emit(trace, record)
    return Classification(Verdict.INDETERMINATE, count,
                          {"reason": reason, "resource": resource})


def sink_entry(params, state, x_start, a):
    """First scan-grid point x in (x_start, a] where the ratio flow is
    strictly inside the WKB sink, with both inequalities cleared against
    their noise bounds.  Returns (x, ratio, wkb) or None.

    Strict interiority |ratio| < W is used: it is equivalent to the pair
    (ratio below the upper branch, downhill slope), since the slope there is
    (ratio^2 - W^2)/hbar.
    """
    ctx = state.ctx
    a = a if isinstance(a, BigReal) else ctx.real(a)
    M = 1000
    mp = ctx._mp
    i0 = int(float(x_start) / float(a) * M) + 1
    E = state.trial.E
    for i in range(i0, M + 1):
        x = ctx._wrap(mp.div(mp.mul(a._v, i), M), gmpy2.mpfr(0))
        try:
            rho = eval_ratio(state, x)
        except ZeroDivisionError:
            continue
        w = wkb_curve(params, E, x)
        if (w - rho).trusted_sign() > 0 and (w + rho).trusted_sign() > 0:
            return x, rho, w
    return None


def classify_energy(params, target, E, a, N, ctx, *,
                    experimental_double_well=False, trace=None):
    """Classify trial energy E against level ``target`` inside cutoff a.

    Builds the series at order N under ``ctx``, counts certified zeros, and
    applies the node-count / sink-entry rules.  Returns a Classification;
    never raises for resource shortfalls (those become Indeterminate), only
    for domain errors.
    """
    if params.is_double_well and not experimental_double_well:
        raise ValueError(
            "omega0_sq < 0 is a double well, outside the certified domain; "
            "pass experimental_double_well=True to explore without guarantees"
        )
    E = E if isinstance(E, BigReal) else ctx.real(E)
    a = a if isinstance(a, BigReal) else ctx.real(a)
    base = {"E": ctx.render(E), "a": ctx.render(a), "N": N,
            "digits": ctx.digits, "target": target.n}

    if E.trusted_sign() > 0:
        x_t = turning_point(params, E)
    else:
        x_t = ctx.real(0)
    if not (a > x_t):
        raise ValueError("cutoff a must exceed the outer turning point")

    state = build_series(params, TrialEnergy(E=E, parity=target.parity), N, ctx)

    _, tail = eval_K(state, a)
    if not (float(tail.last_term_ratio) < 1e-15):
        return _indeterminate(
            -1, "truncation order inadequate at the cutoff", "order",
            trace, base)

    try:
        profile = _scan_profile(state, a)
        zeros, diag = _zeros_from_profile(state, a, profile)
    except NearMissError as e:
        return _indeterminate(-1, str(e), "precision", trace, base)

    count = len(zeros)
    if diag["opaque"]:
        i = diag["opaque"][0]
        x_bad = float(a) * (i + 1) / diag["grid"]
        return _indeterminate(
            count,
            f"scan opaque to the noise floor near x={x_bad:.4g}",
            "order", trace, base)

    if count > target.positive_nodes:
        entering = zeros[-1]
        try:
            res = residue_at_zero(state, entering)
        except ZeroDivisionError as e:
            return _indeterminate(count, str(e), "digits", trace, base)
        hbar = ctx.real(params.hbar)
        miss = abs(res + hbar) / hbar
        if not (float(miss) < _RESIDUE_TOL):
            return _indeterminate(
                count,
                f"residue at entering zero x={float(entering):.6g} "
                f"is {float(res):.6g}, not -hbar",
                "precision", trace, base)
        record = dict(base, verdict="Above", node_count=count,
                      witness=ctx.render(entering))
        _emit(trace, record)
        return Classification(Verdict.ABOVE, count,
                              {"entering_zero": entering, "residue": res})

    if count == target.positive_nodes:
        h = a / diag["grid"]
        x_start = x_t
        if zeros:
            last = zeros[-1]
            if last > x_start:
                x_start = last
        x_start = x_start + 2 * h
        hit = sink_entry(params, state, x_start, a)
        if hit is not None:
            x_s, rho, w = hit
            record = dict(base, verdict="Below", node_count=count,
                          witness=ctx.render(x_s))
            _emit(trace, record)
            return Classification(Verdict.BELOW, count,
                                  {"sink_x": x_s, "ratio": rho, "wkb": w})
        return _indeterminate(
            count, "flow never certifiably enters the sink before the cutoff",
            "cutoff", trace, base)

    return _indeterminate(
        count,
        f"node count {count} below target {target.positive_nodes}; "
        "energy is outside the useful bracket",
        "bracket", trace, base)
