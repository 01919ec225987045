"""Shared fixtures.

The benchmark spectrum solve is expensive (tens of seconds), so it runs once
per session and every test that needs certified levels shares the result.
"""

from __future__ import annotations

from fractions import Fraction

import pytest

from anharmonic import BENCHMARK_PARAMS, SolverConfig, solve_spectrum
from anharmonic.numerics import with_precision

# 30-digit certified energies of the benchmark well (m=1/2, omega0^2=4,
# lambda=1/10), used as the reproduction target throughout the suite
BENCHMARK_ENERGIES_30 = (
    "1.06528550954371768885709162879",
    "3.30687201315291350712812168469",
    "5.74795926883356330473350311848",
    "8.35267782578575471215525773464",
    "11.0985956226330430110864587493",
    "13.9699261977427993009734339568",
    "16.9547946861441513376926165088",
    "20.0438636041884612336414211074",
    "23.2295521799392890706470874343",
    "26.5055547525366174174695030067",
)


def benchmark_config():
    return SolverConfig(
        order=400,
        cutoff=Fraction(15, 2),
        digits=100,
        target_gap=Fraction(1, 10 ** 32),
    )


@pytest.fixture(scope="session")
def certified_benchmark():
    """All ten certified benchmark levels at the reproduction settings."""
    return solve_spectrum(BENCHMARK_PARAMS, 9, benchmark_config())


@pytest.fixture(scope="session")
def ctx100():
    return with_precision(100)


@pytest.fixture(scope="session")
def ctx30():
    return with_precision(30)
