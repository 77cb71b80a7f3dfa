import random
from fractions import Fraction
from math import gcd, isqrt, log, sqrt

import numpy as np
import pytest

from smoothdio.diophantine import (
    ApproxParams,
    DecimalAlpha,
    QuadIrr,
    build_target_set,
    cf_convergents,
    connection_bound,
    derive_params,
    dist_nearest,
    floor_surd,
    parse_alpha,
)

random.seed(2002)

GOLDEN = QuadIrr(1, 1, 5, 2)
SQRT2 = QuadIrr(0, 1, 2, 1)


def test_quadirr_canonical():
    a = QuadIrr(2, 2, 5, -4)
    assert (a.p, a.s, a.d, a.r) == (-1, -1, 5, 2)
    with pytest.raises(ValueError):
        QuadIrr(1, 1, 9, 2)  # perfect square
    with pytest.raises(ValueError):
        QuadIrr(1, 0, 5, 2)


def test_parse_alpha():
    g = parse_alpha("quad:1,1,5,2")
    assert (g.p, g.s, g.d, g.r) == (1, 1, 5, 2)
    d = parse_alpha("dec:1.41421356237309504880168872420969808:30")
    assert isinstance(d, DecimalAlpha)
    assert d.prec == 30


def test_floor_surd_exact():
    # floor((A + B sqrt(d))/C) against float evaluation on safe cases
    for _ in range(3000):
        A = random.randint(-10**6, 10**6)
        B = random.randint(-10**4, 10**4)
        d = random.choice([2, 3, 5, 7, 10, 1234])
        C = random.choice([c for c in range(-50, 51) if c != 0])
        got = floor_surd(A, B, d, C)
        val = (A + B * sqrt(d)) / C
        # float check is reliable away from integers
        if abs(val - round(val)) > 1e-6:
            assert got == int(np.floor(val))


def cf_recurrence_oracle(terms):
    hs, ks = [], []
    h_prev, h = 1, terms[0]
    k_prev, k = 0, 1
    hs.append(h)
    ks.append(k)
    for a in terms[1:]:
        h_prev, h = h, a * h + h_prev
        k_prev, k = k, a * k + k_prev
        hs.append(h)
        ks.append(k)
    return list(zip(hs, ks))


def test_golden_convergents():
    convs = cf_convergents(GOLDEN, 5)
    assert [(c.a, c.q) for c in convs] == [(1, 1), (2, 1), (3, 2), (5, 3), (8, 5)]
    # golden ratio: all partial quotients are 1
    assert cf_recurrence_oracle([1, 1, 1, 1, 1]) == [(c.a, c.q) for c in convs]


def test_sqrt2_convergents():
    convs = cf_convergents(SQRT2, 4)
    assert [(c.a, c.q) for c in convs] == [(1, 1), (3, 2), (7, 5), (17, 12)]
    assert cf_recurrence_oracle([1, 2, 2, 2]) == [(c.a, c.q) for c in convs]


@pytest.mark.parametrize("alpha", [GOLDEN, SQRT2, QuadIrr(3, -2, 7, 5), QuadIrr(-4, 3, 13, 6)])
def test_convergent_invariants(alpha):
    convs = cf_convergents(alpha, 14)
    for c in convs:
        assert gcd(c.a, c.q) == 1
        lo, hi = c.error_bounds()
        # the exact slot must certify |alpha - a/q| <= 1/q^2
        assert max(abs(lo), abs(hi)) <= Fraction(1, c.q * c.q)
        # and must actually contain alpha - a/q
        approx = alpha.to_float() - c.a / c.q
        assert float(lo) - 1e-12 <= approx <= float(hi) + 1e-12
    # CF determinant identity
    for c0, c1 in zip(convs, convs[1:]):
        assert abs(c0.a * c1.q - c1.a * c0.q) == 1
    # nested errors: |alpha - a_k/q_k| strictly decreasing
    errs = [abs(c.error_float()) for c in convs]
    assert all(e0 > e1 for e0, e1 in zip(errs, errs[1:]))


def surd_reference(A, B, d, C):
    """(A + B*sqrt(d))/C via a 40-digit integer square root."""
    S = 10**40
    root = Fraction(isqrt(B * B * d * S * S), S)
    return Fraction(A) / C + (root if B > 0 else -root) / C


def test_dist_nearest_examples():
    assert dist_nearest(0, GOLDEN) == 0.0
    # |5*golden - 8| = (5*sqrt(5) - 11)/2
    expect = float(surd_reference(-11, 5, 5, 2))
    assert abs(dist_nearest(5, GOLDEN) - expect) <= 1e-15 * expect
    # |12*sqrt(2) - 17|
    expect = float(-surd_reference(-17, 12, 2, 1))
    assert abs(dist_nearest(12, SQRT2) - expect) <= 1e-15 * expect


def test_dist_nearest_mirror():
    for alpha in (GOLDEN, SQRT2, QuadIrr(3, -2, 7, 5)):
        mirrored = alpha.mirror()
        for _ in range(300):
            n = random.randint(0, 10**9)
            a = dist_nearest(n, alpha)
            b = dist_nearest(n, mirrored)
            assert abs(a - b) <= 1e-14 * max(a, 1e-30)
            assert 0.0 <= a <= 0.5


def test_dist_nearest_decimal():
    d = DecimalAlpha(Fraction("1.41421356237309504880168872420969808"), 30)
    for n in (1, 12, 1000):
        assert abs(dist_nearest(n, d) - dist_nearest(n, SQRT2)) < 1e-12


def test_derive_params_exact_powers():
    p = derive_params(64, Fraction(1, 3))
    assert abs(p.X - 512.0) <= 1e-10 * 512
    assert abs(p.R - 8.0) <= 1e-10 * 8
    assert p.Y == pytest.approx(log(512.0) ** 10.0)


def test_derive_params_qr_identity():
    for _ in range(200):
        q = random.randint(2, 10**9)
        theta = Fraction(random.randint(1, 352), 1000)  # < 6/17 = 0.3529...
        p = derive_params(q, theta)
        assert abs(p.X - q * p.R) <= 1e-12 * p.X
        assert p.R < q


def test_derive_params_theta_range():
    with pytest.raises(ValueError):
        derive_params(100, Fraction(0))
    with pytest.raises(ValueError):
        derive_params(100, Fraction(6, 17))
    with pytest.raises(ValueError):
        derive_params(100, Fraction(1, 2))
    with pytest.raises(ValueError):
        derive_params(1, Fraction(1, 4))


def test_derive_params_near_boundary_exponents():
    # exponents approach 34/23 and 11/23 as theta -> 6/17
    theta = Fraction(6, 17) - Fraction(1, 10**9)
    p = derive_params(10**6, theta)
    assert p.X == pytest.approx(10 ** (6 * 34 / 23), rel=1e-4)
    assert p.R == pytest.approx(10 ** (6 * 11 / 23), rel=1e-4)


def test_build_target_set_q13():
    p = derive_params(13, Fraction(1, 3), Y=float("inf"))
    ns = build_target_set(p, 8)
    assert list(ns[:5]) == [15, 18, 23, 28, 31]
    # exhaustive scan oracle
    expect = [
        n
        for n in range(12, 188)
        if gcd(n, 13) == 1 and 1 <= (8 * n) % 13 <= 3
    ]
    assert list(ns) == expect


def test_build_target_set_vacuous_constraints():
    # Y >= 4X and R >= q: all integers coprime to q in the window
    params = ApproxParams(Fraction(1, 4), 12, 100.0, 50.0, 10**9, 10.0)
    ns = build_target_set(params, 5)
    expect = [n for n in range(25, 401) if gcd(n, 12) == 1]
    assert list(ns) == expect


def test_build_target_set_monotone_in_Y():
    base = derive_params(13, Fraction(1, 3))
    smaller = ApproxParams(base.theta, base.q, base.X, base.R, 5.0, base.C)
    larger = ApproxParams(base.theta, base.q, base.X, base.R, 11.0, base.C)
    s1 = set(build_target_set(smaller, 8).tolist())
    s2 = set(build_target_set(larger, 8).tolist())
    assert s1 <= s2


def test_connection_bound_membership():
    # a/q = 21/13 is a golden-ratio convergent; every target-set member obeys
    # ||n alpha|| <= R/q + 4X/q^2
    conv = next(c for c in cf_convergents(GOLDEN, 8) if c.q == 13)
    assert conv.a == 21
    p = derive_params(13, Fraction(1, 3), Y=float("inf"))
    bound = connection_bound(p)
    for n in build_target_set(p, conv.a):
        assert dist_nearest(int(n), GOLDEN) <= bound


def test_decimal_convergents_certified():
    d = parse_alpha("dec:1.41421356237309504880168872420969808:30")
    convs = cf_convergents(d, 10)
    exact = cf_convergents(SQRT2, 10)
    assert [(c.a, c.q) for c in convs] == [(c.a, c.q) for c in exact]
    for c in convs:
        lo, hi = c.error_bounds()
        assert max(abs(lo), abs(hi)) <= Fraction(1, c.q * c.q)
