from fractions import Fraction

import pytest

from percolab import (FiniteSubgraph, PolynomialInP, SizeError,
                      configuration_table, d_term,
                      enumerate_truncated_expectation, functional_one,
                      functional_volume, functional_volume_sq, genfn_exact,
                      make_radius_indicator, stream, u_term)
from percolab.runner import random_connected_subgraph

EDGE = FiniteSubgraph([0, 1], [(0, 1)])
PATH3 = FiniteSubgraph([0, 1, 2], [(0, 1), (1, 2)])
CYCLE4 = FiniteSubgraph([0, 1, 2, 3], [(0, 1), (1, 2), (2, 3), (3, 0)])


def test_polynomial_basics():
    poly = PolynomialInP([1, 2, 3])
    assert poly.degree == 2
    assert poly(Fraction(1, 2)) == Fraction(11, 4)
    assert poly.derivative().coeffs == (Fraction(2), Fraction(6))
    w = PolynomialInP.from_open_counts([1, 0, 2], 2)
    # 1*(1-p)^2 + 2*p^2
    assert w(Fraction(1, 2)) == Fraction(3, 4)


def test_truncation_never_binds_gives_one():
    poly = enumerate_truncated_expectation(CYCLE4, functional_one, 4, 0)
    assert poly.coeffs == (Fraction(1),)


def test_single_edge_expected_volume():
    poly = enumerate_truncated_expectation(EDGE, functional_volume, 1, 0)
    assert poly.coeffs == (Fraction(1), Fraction(1))  # 1 + p


def test_cycle_expected_volume_second_route():
    # independent route: E|K| = 1 + 2 P(adjacent) + P(opposite) with
    # P(adjacent) = p + p^3 - p^4 and P(opposite) = 2p^2 - p^4 on the 4-cycle
    poly = enumerate_truncated_expectation(CYCLE4, functional_volume, 4, 0)
    direct = PolynomialInP([1, 2, 2, 2, -3])
    assert poly == direct


def test_u_term_zero_for_constant_functional():
    for p in (0.2, 0.5, 0.8):
        assert u_term(CYCLE4, functional_one, 3, p, 0) == 0.0


def test_d_term_zero_when_truncation_cannot_break():
    for p in (0.2, 0.5, 0.8):
        assert d_term(CYCLE4, functional_volume, 4, p, 0) == 0.0


def test_cycle_russo_identity_example():
    table = configuration_table(CYCLE4, 0)
    poly = enumerate_truncated_expectation(CYCLE4, functional_volume, 2, 0,
                                           table)
    lhs = float(poly.derivative()(0.3))
    rhs = (u_term(CYCLE4, functional_volume, 2, 0.3, 0, table)
           - d_term(CYCLE4, functional_volume, 2, 0.3, 0, table))
    assert abs(lhs - rhs) < 1e-9


def test_russo_identity_random_instances():
    rng = stream(42, 0)
    worst = 0.0
    for trial in range(12):
        H = random_connected_subgraph(rng, 10)
        table = configuration_table(H, 0)
        fs = [functional_one, functional_volume, functional_volume_sq,
              make_radius_indicator(int(rng.integers(1, 4)), 0)]
        n = int(rng.integers(1, H.n_edges + 2))
        for F in fs:
            dpoly = enumerate_truncated_expectation(H, F, n, 0,
                                                    table).derivative()
            for p in (0.2, 0.5, 0.8):
                resid = abs(float(dpoly(p))
                            - (u_term(H, F, n, p, 0, table)
                               - d_term(H, F, n, p, 0, table)))
                worst = max(worst, resid)
    assert worst < 1e-9


def test_u_nonnegative_for_increasing_d_for_nonnegative():
    rng = stream(47, 0)
    for trial in range(8):
        H = random_connected_subgraph(rng, 9)
        table = configuration_table(H, 0)
        n = int(rng.integers(1, H.n_edges + 2))
        for p in (0.3, 0.7):
            for F in (functional_volume, functional_volume_sq,
                      make_radius_indicator(2, 0)):
                assert u_term(H, F, n, p, 0, table) >= -1e-15
                assert d_term(H, F, n, p, 0, table) >= -1e-15


def test_size_cap():
    big = FiniteSubgraph(list(range(22)),
                         [(i, i + 1) for i in range(21)])
    with pytest.raises(SizeError):
        configuration_table(big, 0)


def test_genfn_exact_trivial_point():
    # at s = t = 0 with n never binding, genfn(k=1) equals E|K|
    poly = enumerate_truncated_expectation(CYCLE4, functional_volume, 4, 0)
    val = genfn_exact(CYCLE4, 0, 0.3, 4, 1, 0.0, 0.0)
    assert abs(val - float(poly(0.3))) < 1e-12
