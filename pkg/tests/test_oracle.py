"""Double-precision estimates: variational spectrum and shooting cross-check."""

from __future__ import annotations

from fractions import Fraction

import pytest

from anharmonic.model import BENCHMARK_PARAMS, Parity, PotentialParams
from anharmonic.oracle import rayleigh_ritz, shooting_check

BENCHMARK_FLOATS = [
    1.0652855095437177, 3.3068720131529135, 5.747959268833563,
    8.352677825785755, 11.098595622633043, 13.969926197742799,
    16.954794686144151, 20.043863604188461, 23.229552179939289,
    26.505554752536617,
]


class TestRayleighRitz:
    def test_harmonic_basis_is_exact_at_lambda_zero(self):
        p = PotentialParams(m=Fraction(1, 2), omega0_sq=4, lam=0)
        spec = rayleigh_ritz(p, B=60)
        for n in range(10):
            assert spec.energies[n] == pytest.approx(2 * n + 1, abs=1e-10)

    def test_benchmark_levels_to_ten_digits(self):
        spec = rayleigh_ritz(BENCHMARK_PARAMS, B=200)
        for n in range(10):
            assert abs(spec.energies[n] - BENCHMARK_FLOATS[n]) < 1e-10

    def test_variational_upper_bound(self):
        # a truncated basis can only overshoot (modulo float roundoff)
        spec = rayleigh_ritz(BENCHMARK_PARAMS, B=40)
        for n in range(10):
            assert spec.energies[n] >= BENCHMARK_FLOATS[n] - 1e-9

    def test_basis_growth_converges(self):
        small = rayleigh_ritz(BENCHMARK_PARAMS, B=100)
        big = rayleigh_ritz(BENCHMARK_PARAMS, B=200)
        for n in range(10):
            assert abs(small.energies[n] - big.energies[n]) < 1e-9

    def test_spectrum_strictly_ordered(self):
        spec = rayleigh_ritz(BENCHMARK_PARAMS, B=200)
        for a, b in zip(spec.energies, spec.energies[1:]):
            assert a < b

    def test_rejects_tiny_basis(self):
        with pytest.raises(ValueError):
            rayleigh_ritz(BENCHMARK_PARAMS, B=10)

    def test_double_well_needs_reference_frequency(self):
        p = PotentialParams(m=1, omega0_sq=-2, lam=Fraction(1, 10))
        with pytest.raises(ValueError):
            rayleigh_ritz(p, B=60)
        spec = rayleigh_ritz(p, B=60, omega_ref=2.0)
        assert spec.energies[0] < spec.energies[1]

    def test_reports_method_metadata(self):
        spec = rayleigh_ritz(BENCHMARK_PARAMS, B=80)
        assert spec.basis_size == 80
        assert spec.est_error[0] >= 0.0


class TestShooting:
    def test_counts_nodes_across_ground_state(self):
        below = shooting_check(BENCHMARK_PARAMS, 1.0, Parity.EVEN, 7.5)
        above = shooting_check(BENCHMARK_PARAMS, 1.1, Parity.EVEN, 7.5)
        assert below.node_count == 0
        assert above.node_count == 1

    def test_divergence_sign_flips_at_level(self):
        below = shooting_check(BENCHMARK_PARAMS, 1.0, Parity.EVEN, 7.5)
        above = shooting_check(BENCHMARK_PARAMS, 1.1, Parity.EVEN, 7.5)
        assert below.trusted and above.trusted
        assert below.final_sign != above.final_sign

    def test_odd_sector(self):
        r = shooting_check(BENCHMARK_PARAMS, 3.4, Parity.ODD, 7.5)
        assert r.node_count == 1
