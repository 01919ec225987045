"""Trial-energy classification: node counting, sink entry, escalation signals."""

from __future__ import annotations

from fractions import Fraction

import pytest

from anharmonic.classify import Classification, LevelTarget, Verdict, classify_energy
from anharmonic.model import BENCHMARK_PARAMS, PotentialParams
from anharmonic.numerics import with_precision

E1_LITERAL = Fraction("3.30687201315291350712812168469")


@pytest.fixture(scope="module")
def ctx():
    return with_precision(100)


def classify(params, n, E, ctx, a=Fraction(15, 2), N=600, **kw):
    return classify_energy(params, LevelTarget(n), ctx.real(E), ctx.real(a), N, ctx, **kw)


class TestTarget:
    def test_parity_and_node_floor(self):
        t = LevelTarget(5)
        assert t.parity.value == "odd"
        assert t.positive_nodes == 2

    def test_rejects_negative_level(self):
        with pytest.raises(ValueError):
            LevelTarget(-1)


class TestVerdicts:
    def test_below_ground_state(self, ctx):
        c = classify(BENCHMARK_PARAMS, 0, 1, ctx)
        assert c.verdict is Verdict.BELOW
        assert c.node_count == 0

    def test_above_ground_state(self, ctx):
        c = classify(BENCHMARK_PARAMS, 0, "1.1", ctx)
        assert c.verdict is Verdict.ABOVE
        assert c.node_count == 1

    def test_straddle_first_excited(self, ctx):
        assert classify(BENCHMARK_PARAMS, 1, "3.2", ctx).verdict is Verdict.BELOW
        assert classify(BENCHMARK_PARAMS, 1, "3.4", ctx).verdict is Verdict.ABOVE

    def test_harmonic_limit(self, ctx):
        p = PotentialParams(m=Fraction(1, 2), omega0_sq=4, lam=0)
        assert classify(p, 0, "0.9", ctx).verdict is Verdict.BELOW
        c = classify(p, 0, "1.1", ctx)
        assert c.verdict is Verdict.ABOVE
        assert c.node_count == 1

    def test_resolves_twenty_digit_offsets(self, ctx):
        eps = Fraction(1, 10 ** 20)
        lo = classify(BENCHMARK_PARAMS, 1, E1_LITERAL - eps, ctx)
        hi = classify(BENCHMARK_PARAMS, 1, E1_LITERAL + eps, ctx)
        assert lo.verdict is Verdict.BELOW
        assert hi.verdict is Verdict.ABOVE

    def test_high_level_straddle(self, ctx):
        assert classify(BENCHMARK_PARAMS, 9, "26.4", ctx).verdict is Verdict.BELOW
        assert classify(BENCHMARK_PARAMS, 9, "26.6", ctx).verdict is Verdict.ABOVE


class TestEvidence:
    def test_above_names_entering_zero_with_residue(self, ctx):
        c = classify(BENCHMARK_PARAMS, 0, "1.1", ctx)
        x = float(c.evidence["entering_zero"])
        assert 1.5 < x < 3.0
        assert abs(float(c.evidence["residue"]) + 1.0) < 1e-3

    def test_below_reports_sink_entry(self, ctx):
        c = classify(BENCHMARK_PARAMS, 0, 1, ctx)
        assert c.verdict is Verdict.BELOW
        entry = float(c.evidence["sink_x"])
        assert 0.0 < entry < 7.5
        # strictly inside the sink: |ratio| < W
        assert abs(float(c.evidence["ratio"])) < float(c.evidence["wkb"])

    def test_trace_collects_structured_rows(self, ctx):
        trace = []
        classify(BENCHMARK_PARAMS, 0, 1, ctx, trace=trace)
        assert len(trace) == 1
        row = trace[0]
        assert row["verdict"] == "Below"
        assert row["N"] == 600
        assert row["target"] == 0

    def test_verdict_is_exclusive(self, ctx):
        for eq in (1, "1.1", "3.2"):
            c = classify(BENCHMARK_PARAMS, 0, eq, ctx)
            assert isinstance(c, Classification)
            assert c.verdict in (Verdict.BELOW, Verdict.ABOVE, Verdict.INDETERMINATE)


class TestResourceShortfalls:
    def test_inadequate_order_is_indeterminate(self, ctx):
        c = classify(BENCHMARK_PARAMS, 2, "5.74795926883356330473350311848",
                     ctx, N=200)
        assert c.verdict is Verdict.INDETERMINATE
        assert c.evidence["resource"] in ("order", "cutoff", "digits")

    def test_never_raises_for_resources(self, ctx):
        # a barely-adequate order still returns a Classification object
        c = classify(BENCHMARK_PARAMS, 0, "1.05", ctx, N=320)
        assert isinstance(c, Classification)

    def test_cutoff_below_turning_point_is_domain_error(self, ctx):
        with pytest.raises(ValueError):
            classify(BENCHMARK_PARAMS, 9, "26.5", ctx, a=Fraction(2))


class TestDoubleWell:
    def test_refused_without_flag(self, ctx):
        p = PotentialParams(m=1, omega0_sq=-2, lam=Fraction(1, 10))
        with pytest.raises(ValueError, match="double well"):
            classify(p, 0, 1, ctx)

    def test_flag_permits_exploration(self, ctx):
        p = PotentialParams(m=1, omega0_sq=-2, lam=Fraction(1, 10))
        c = classify(p, 0, 1, ctx, experimental_double_well=True)
        assert isinstance(c, Classification)
