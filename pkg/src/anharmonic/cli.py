"""Command-line front end.

Subcommands:

* ``solve``            certify one or more levels for given parameters
* ``reproduce-table1`` the benchmark ten-level run with pinned settings
* ``oracle``           the uncertified variational spectrum
* ``density``          two-column |K| profile at a trial energy
* ``check``            fast internal consistency sweep

Results go to stdout; diagnostics go to stderr through ``logging``.  Exit
status: 0 on success, 1 for unusable arguments, 2 when certification (or the
check sweep) fails.  All reals in machine-readable output are decimal
strings, never binary floats.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from dataclasses import dataclass
from fractions import Fraction

from .classify import LevelTarget  # noqa: F401  (re-exported for scripting)
from .model import Parity, PotentialParams, TrialEnergy, turning_point
from .numerics import with_precision
from .oracle import rayleigh_ritz
from .series import build_series, conservation_residual, eval_density, eval_K, riccati_residual
from .solver import SolverConfig, SolverError, bracket_level, refine_level

__all__ = ["RunConfig", "PRESETS", "run", "main", "emit_json"]

log = logging.getLogger(__name__)

PRESETS = {
    "paper": {
        "m": "1/2",
        "omega0_sq": "4",
        "lam": "1/10",
        "hbar": "1",
        "levels": "0..9",
        "digits": 100,
        "order": 400,
        "cutoff": "15/2",
        "gap": "1e-32",
    },
}


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on bad flags; this tool reserves 2 for
    # certification failure, so route usage problems to status 1 instead
    def error(self, message):
        raise _UsageError(message)


@dataclass(frozen=True)
class RunConfig:
    """Everything a subcommand needs, resolved from flags and preset."""

    command: str
    params: PotentialParams
    levels: tuple
    solver: SolverConfig
    fmt: str
    basis: int
    energy: str
    parity: Parity
    points: int


def _parse_levels(text):
    if ".." in text:
        a, b = text.split("..", 1)
        lo, hi = int(a), int(b)
    else:
        lo = hi = int(text)
    if lo < 0 or hi < lo:
        raise _UsageError(f"bad level range {text!r}")
    return lo, hi


def make_parser():
    p = _Parser(prog="anharmonic",
                description="Certified eigenvalues of the quartic "
                            "anharmonic oscillator.")
    p.add_argument("-v", "--verbose", action="count", default=0,
                   help="log more to stderr (repeatable)")
    sub = p.add_subparsers(dest="command", required=True)

    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument("--m", help="particle mass (exact: '1/2', '0.5')")
    shared.add_argument("--omega0-sq", dest="omega0_sq",
                        help="harmonic curvature omega0^2")
    shared.add_argument("--lambda", dest="lam", help="quartic coupling")
    shared.add_argument("--hbar", help="Planck constant")
    shared.add_argument("--preset", choices=sorted(PRESETS),
                        help="named parameter/resource bundle")
    shared.add_argument("--experimental-double-well", action="store_true",
                        help="allow omega0_sq < 0 without certification "
                             "guarantees")

    solve_flags = argparse.ArgumentParser(add_help=False)
    solve_flags.add_argument("--levels", help="level range 'A..B' or single 'N'")
    solve_flags.add_argument("--digits", type=int, help="working decimal digits")
    solve_flags.add_argument("--order", type=int, help="series truncation order")
    solve_flags.add_argument("--cutoff", help="matching cutoff a (exact rational)")
    solve_flags.add_argument("--gap", help="target interval width, e.g. 1e-32")
    solve_flags.add_argument("--format", dest="fmt",
                             choices=("table", "json", "csv"), default="table")
    solve_flags.add_argument("--seed-from-oracle",
                             action=argparse.BooleanOptionalAction, default=True,
                             help="seed brackets from the variational spectrum")

    sub.add_parser("solve", parents=[shared, solve_flags],
                   help="certify eigenvalue intervals")
    sub.add_parser("reproduce-table1", parents=[solve_flags],
                   help="run the benchmark ten-level certification")
    po = sub.add_parser("oracle", parents=[shared],
                        help="print the uncertified variational spectrum")
    po.add_argument("--basis", type=int, default=200)
    po.add_argument("--levels", help="level range (default 0..9)")
    po.add_argument("--format", dest="fmt",
                    choices=("table", "json", "csv"), default="table")
    pd = sub.add_parser("density", parents=[shared],
                        help="two-column x, |K(x)| profile")
    pd.add_argument("--energy", required=True, help="trial energy (decimal)")
    pd.add_argument("--parity", choices=("even", "odd"), default="even")
    pd.add_argument("--points", type=int, default=200)
    pd.add_argument("--order", type=int)
    pd.add_argument("--digits", type=int)
    pd.add_argument("--cutoff", help="profile up to this x")
    sub.add_parser("check", parents=[shared],
                   help="fast internal consistency sweep")
    return p


def _effective(ns, key, fallback):
    v = getattr(ns, key, None)
    if v is not None:
        return v
    preset = getattr(ns, "preset", None)
    if ns.command == "reproduce-table1":
        preset = "paper"
    if preset and key in PRESETS[preset]:
        return PRESETS[preset][key]
    return fallback


def _build_config(ns):
    params = PotentialParams(
        m=_effective(ns, "m", "1"),
        omega0_sq=_effective(ns, "omega0_sq", "1"),
        lam=_effective(ns, "lam", "1/10"),
        hbar=_effective(ns, "hbar", "1"),
    )
    levels = _parse_levels(str(_effective(ns, "levels", "0..0")))
    if ns.command in ("solve", "reproduce-table1"):
        solver = SolverConfig(
            order=int(_effective(ns, "order", 400)),
            cutoff=_effective(ns, "cutoff", None),
            digits=int(_effective(ns, "digits", 100)),
            target_gap=_effective(ns, "gap", Fraction(1, 10 ** 32)),
            seed_from_oracle=getattr(ns, "seed_from_oracle", True),
            experimental_double_well=getattr(
                ns, "experimental_double_well", False),
        )
    else:
        # the other subcommands read their resources straight from the
        # namespace; a joint gap/digits validity check would misfire here
        solver = SolverConfig()
    return RunConfig(
        command=ns.command,
        params=params,
        levels=levels,
        solver=solver,
        fmt=getattr(ns, "fmt", "table"),
        basis=getattr(ns, "basis", 200),
        energy=getattr(ns, "energy", None),
        parity=Parity.ODD if getattr(ns, "parity", "even") == "odd" else Parity.EVEN,
        points=getattr(ns, "points", 200),
    )


def _frac_str(f):
    """Exact decimal string when the rational terminates, else a fraction."""
    f = Fraction(f)
    den = f.denominator
    while den % 2 == 0:
        den //= 2
    while den % 5 == 0:
        den //= 5
    if den != 1:
        return f"{f.numerator}/{f.denominator}"
    # scale to an integer over a power of ten
    k = 0
    g = f
    while g.denominator != 1:
        g *= 10
        k += 1
    s = str(g.numerator)
    if k == 0:
        return s
    neg = s.startswith("-")
    if neg:
        s = s[1:]
    s = s.rjust(k + 1, "0")
    out = s[:-k] + "." + s[-k:]
    return ("-" if neg else "") + out


def emit_json(levels, params, failures=(), render_digits=36):
    """Serialize results with every real as a decimal string.

    The output round-trips: loads followed by dumps reproduces the exact
    bytes, since no binary floats are involved.
    """
    ctx = with_precision(max((l.provenance.digits for l in levels), default=50))
    items = []
    for lv in levels:
        items.append({
            "n": lv.n,
            "E_lo": ctx.render(lv.E_lo, render_digits),
            "E_hi": ctx.render(lv.E_hi, render_digits),
            "gap": ctx.render(lv.gap, 3),
            "digits": lv.digits_reported,
            "certified": True,
            "provenance": {
                "order": lv.provenance.order,
                "cutoff": lv.provenance.cutoff,
                "digits": lv.provenance.digits,
                "target_gap": lv.provenance.target_gap,
                "escalations": lv.provenance.escalations,
                "classifications": lv.provenance.classifications,
                "newton_steps": lv.provenance.newton_steps,
                "newton_significance": lv.provenance.newton_significance,
                "seeded_from_oracle": lv.provenance.seeded_from_oracle,
            },
        })
    for n, err in failures:
        items.append({"n": n, "certified": False, "error": str(err)})
    items.sort(key=lambda d: d["n"])
    obj = {
        "params": {
            "m": _frac_str(params.m),
            "omega0_sq": _frac_str(params.omega0_sq),
            "lambda": _frac_str(params.lam),
            "hbar": _frac_str(params.hbar),
        },
        "levels": items,
    }
    return json.dumps(obj, indent=2)


def _print_table(levels, failures, out, digits=None):
    for lv in levels:
        d = digits or lv.digits_reported
        mid = lv.midpoint()
        print(f"{lv.n:3d}  {lv.E_lo.ctx.render(mid, d):<{d + 8}s} "
              f"gap={lv.E_lo.ctx.render(lv.gap, 2)} "
              f"digits={lv.digits_reported}", file=out)
    for n, err in failures:
        print(f"{n:3d}  FAILED: {err}", file=out)


def _print_csv(levels, failures, out):
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["n", "E_lo", "E_hi", "gap", "digits", "certified"])
    for lv in levels:
        ctx = lv.E_lo.ctx
        w.writerow([lv.n, ctx.render(lv.E_lo, 36), ctx.render(lv.E_hi, 36),
                    ctx.render(lv.gap, 3), lv.digits_reported, "true"])
    for n, err in failures:
        w.writerow([n, "", "", "", "", "false"])


def cmd_solve(rc):
    lo, hi = rc.levels
    levels = []
    failures = []
    for n in range(lo, hi + 1):
        try:
            br = bracket_level(rc.params, n, rc.solver)
            levels.append(refine_level(rc.params, n, br, rc.solver))
        except SolverError as e:
            log.error("level %d failed: %s", n, e)
            failures.append((n, e))
    if rc.fmt == "json":
        print(emit_json(levels, rc.params, failures))
    elif rc.fmt == "csv":
        _print_csv(levels, failures, sys.stdout)
    else:
        _print_table(levels, failures, sys.stdout)
    return 2 if failures else 0


def cmd_reproduce(rc):
    rcode = cmd_solve(rc)
    return rcode


def cmd_oracle(rc, ns):
    spec = rayleigh_ritz(rc.params, rc.basis)
    lo, hi = _parse_levels(str(getattr(ns, "levels", None) or "0..9"))
    hi = min(hi, len(spec.energies) - 1)
    rows = [(n, spec.energies[n],
             spec.est_error[n] if n < len(spec.est_error) else float("nan"))
            for n in range(lo, hi + 1)]
    if rc.fmt == "json":
        obj = {
            "method": spec.method,
            "basis_size": spec.basis_size,
            "certified": False,
            "levels": [{"n": n, "E": f"{e:.15g}", "est_error": f"{err:.3g}"}
                       for n, e, err in rows],
        }
        print(json.dumps(obj, indent=2))
    else:
        print(f"# uncertified variational estimates (basis={spec.basis_size})")
        for n, e, err in rows:
            print(f"{n:3d}  {e:.15g}  (est err {err:.1e})")
    return 0


def cmd_density(rc, ns):
    digits = int(getattr(ns, "digits", None) or 60)
    order = int(getattr(ns, "order", None) or 400)
    ctx = with_precision(digits)
    E = ctx.real(rc.energy)
    if getattr(ns, "cutoff", None):
        from .model import _exact
        a = ctx.real(_exact(ns.cutoff, "cutoff"))
    else:
        a = turning_point(rc.params, E) * 2
    state = build_series(rc.params, TrialEnergy(E=E, parity=rc.parity), order, ctx)
    _, tail = eval_K(state, a)
    if tail.trusted_digits < 6:
        log.warning("profile tail is weak at x=%s; raise --order", float(a))
    for i in range(rc.points + 1):
        x = a * i / rc.points
        d = eval_density(state, x)
        print(f"{ctx.render(x, 12)}\t{ctx.render(d, 12)}")
    return 0


def cmd_check(rc):
    """Internal consistency sweep; prints one ok/FAIL line per check."""
    import random

    rng = random.Random(20260825)
    params = rc.params
    ctx = with_precision(60)
    failures = 0

    def report(name, ok, detail=""):
        nonlocal failures
        line = f"{'ok  ' if ok else 'FAIL'} {name}"
        if detail and not ok:
            line += f"  ({detail})"
        print(line)
        if not ok:
            failures += 1

    # conserved combination and flow residual at random points
    worst = None
    ok = True
    for _ in range(3):
        E = ctx.real(str(round(rng.uniform(0.5, 8.0), 6)))
        par = rng.choice([Parity.EVEN, Parity.ODD])
        st = build_series(params, TrialEnergy(E=E, parity=par), 160, ctx)
        for _ in range(5):
            x = ctx.real(str(round(rng.uniform(0.0, 3.0), 6)))
            w = conservation_residual(st, x)
            if not (abs(float(w)) <= float(w.abs_error) or w.trusted_sign() == 0):
                ok = False
                worst = float(w)
    report("conserved combination below noise floor", ok, f"worst {worst}")

    ok = True
    for _ in range(4):
        E = ctx.real(str(round(rng.uniform(0.5, 6.0), 6)))
        st = build_series(params, TrialEnergy(E=E, parity=Parity.EVEN), 160, ctx)
        x = ctx.real(str(round(rng.uniform(0.4, 2.0), 6)))
        try:
            r = riccati_residual(st, x)
            if not (r.trusted_sign() == 0):
                ok = False
        except ZeroDivisionError:
            pass
    report("flow residual indistinguishable from zero", ok)

    # parity of the stored series
    E = ctx.real("1.25")
    st = build_series(params, TrialEnergy(E=E, parity=Parity.EVEN), 120, ctx)
    va, _ = eval_K(st, ctx.real("0.7"))
    vb, _ = eval_K(st, ctx.real("-0.7"))
    report("profile is even in x", (va - vb).trusted_sign() == 0)

    # variational energies are upper bounds and ordered
    try:
        spec = rayleigh_ritz(params, 80)
        ordered = all(spec.energies[i] < spec.energies[i + 1] for i in range(10))
        report("variational spectrum ordered", ordered)
    except ValueError as e:
        report("variational spectrum ordered", False, str(e))

    return 2 if failures else 0


def run(argv=None):
    parser = make_parser()
    try:
        ns = parser.parse_args(argv)
    except _UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    logging.basicConfig(
        stream=sys.stderr,
        level=(logging.WARNING, logging.INFO, logging.DEBUG)[min(ns.verbose, 2)],
        format="%(levelname)s %(name)s: %(message)s")
    try:
        rc = _build_config(ns)
    except (_UsageError, ValueError, TypeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    try:
        if ns.command == "solve":
            return cmd_solve(rc)
        if ns.command == "reproduce-table1":
            return cmd_reproduce(rc)
        if ns.command == "oracle":
            return cmd_oracle(rc, ns)
        if ns.command == "density":
            return cmd_density(rc, ns)
        if ns.command == "check":
            return cmd_check(rc)
    except SolverError as e:
        print(f"certification failed: {e}", file=sys.stderr)
        return 2
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    raise AssertionError("unreachable")


def main():
    sys.exit(run(argv=None))


if __name__ == "__main__":
    main()
