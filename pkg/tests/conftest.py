from __future__ import annotations

import pytest

from spectral_rec import (
    EXACT,
    CorrelatorTable,
    FreeEnergyTable,
    build_curve,
    parse_expression,
)


def make_airy():
    return build_curve(parse_expression("z^2"), parse_expression("z"), EXACT, name="airy")


def make_curve_b():
    return build_curve(
        parse_expression("1/(1 - z^2)"),
        parse_expression("z/(1 - z^2)"),
        EXACT,
        name="curve-b",
    )


def make_h_model():
    # the unit-quadratic normalization: y dx = z^2 dz
    return build_curve(parse_expression("z^2"), parse_expression("z/2"), EXACT, name="h-model")


@pytest.fixture(scope="session")
def airy():
    return make_airy()


@pytest.fixture(scope="session")
def curve_b():
    return make_curve_b()


@pytest.fixture(scope="session")
def h_model():
    return make_h_model()


@pytest.fixture(scope="session")
def airy_tables(airy):
    table = CorrelatorTable(airy).fill(4)
    ftable = FreeEnergyTable(airy).fill_from(table)
    return table, ftable


@pytest.fixture(scope="session")
def curve_b_tables(curve_b):
    table = CorrelatorTable(curve_b).fill(4)
    ftable = FreeEnergyTable(curve_b).fill_from(table)
    return table, ftable
