import cmath
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from blaschke.circle import (CircleLift, Stability, critical_angles,
                             cocritical_angles, cycles_with_rotation,
                             find_circle_cycle, find_circle_cycles,
                             find_superattracting_alpha, is_adjacent,
                             lift_derivative, lift_eval, rotation_interval,
                             rotation_number, superattracting_residual)
from blaschke.errors import NoSignChange, RegionMismatch
from blaschke.mapcore import MapParams, evaluate, free_critical_points


def unwrap_lift(L, xs):
    """Oracle lift: phase of g(e^{2 pi i x}) unwrapped along a fine grid from x = 0."""
    P = MapParams.from_polar(L.d, L.r, 0.0)
    rot = cmath.exp(4j * math.pi * L.d * L.alpha)
    vals = [rot * evaluate(P, cmath.exp(2j * math.pi * x)) for x in xs]
    ph = np.unwrap(np.angle(vals)) / (2 * math.pi)
    return ph - ph[0] + lift_eval(L, xs[0])


# -- lift -----------------------------------------------------------------------

def test_lift_examples():
    L = CircleLift(1, 3.0, 0.0)
    assert lift_eval(L, 0.0) == 0
    # continuous lift; the logarithm formula gives 3/2, one more than here
    assert lift_eval(L, 0.5) == pytest.approx(0.5, abs=1e-15)
    assert cmath.exp(2j * math.pi * 1.5) == pytest.approx(evaluate(MapParams(1, 3), -1))


@pytest.mark.parametrize("d,r,alpha", [(1, 3.0, 0.0), (2, 2.0, 0.07), (3, 9.0, -0.05), (1, 1.2, 0.1)])
def test_lift_matches_unwrapped_phase(d, r, alpha):
    L = CircleLift(d, r, alpha)
    xs = np.linspace(0, 1, 20001)
    assert np.max(np.abs(unwrap_lift(L, xs) - lift_eval(L, xs))) <= 1e-9


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 4), st.floats(1.01, 12), st.floats(-0.5, 0.5),
       st.floats(-2, 2), st.integers(-5, 5))
def test_degree_one(d, r, alpha, x, k):
    L = CircleLift(d, r, alpha)
    assert lift_eval(L, x + k) == pytest.approx(lift_eval(L, x) + k, abs=1e-11)


def test_lift_projects_to_map():
    for d, r, alpha in [(1, 4.0, 0.0), (2, 2.0, 0.03), (3, 5.0, -0.02)]:
        L = CircleLift(d, r, alpha)
        P = L.params()
        for x in np.linspace(0, 1, 13):
            z = P.unit * cmath.exp(2j * math.pi * x)
            w = P.unit * cmath.exp(2j * math.pi * lift_eval(L, x))
            assert abs(evaluate(P, z) - w) <= 1e-12


def test_lift_derivative_examples():
    assert lift_derivative(CircleLift(1, 4.0, 0.3), 0.0) == pytest.approx(1 / 3, abs=1e-15)
    assert lift_derivative(CircleLift(1, 4.0, 0.0), 0.5) == pytest.approx(7 / 5, abs=1e-15)
    assert abs(lift_derivative(CircleLift(2, 5.0, 0.0), 0.0)) <= 1e-15


def test_lift_derivative_finite_difference():
    rng = np.random.default_rng(0)
    for _ in range(100):
        L = CircleLift(int(rng.integers(1, 4)), rng.uniform(1.05, 8), rng.uniform(-0.1, 0.1))
        x = rng.uniform(0, 1)
        h = 1e-6
        fd = (lift_eval(L, x + h) - lift_eval(L, x - h)) / (2 * h)
        assert fd == pytest.approx(lift_derivative(L, x), abs=1e-6)


# -- critical angles ----------------------------------------------------------

def test_critical_angles_examples():
    xs = critical_angles(CircleLift(1, 2.0, 0.0))
    assert sorted(xs) == pytest.approx([-0.0804306, 0.0804306], abs=1e-7)
    for x in xs:
        assert math.cos(2 * math.pi * x) == pytest.approx(7 / 8, abs=1e-15)
    assert critical_angles(CircleLift(1, 3.0, 0.0)) == [0.0]
    assert critical_angles(CircleLift(2, 6.0, 0.0)) == []


def test_critical_angles_match_plane_critical_points():
    for d, r in [(1, 2.0), (2, 3.0), (3, 1.5)]:
        P = MapParams.from_polar(d, r, 0.0)
        plane = sorted(cmath.phase(c) / (2 * math.pi) for c in free_critical_points(P))
        assert sorted(critical_angles(CircleLift(d, r, 0.0))) == pytest.approx(plane, abs=1e-10)


def test_cocritical_angles():
    L = CircleLift(2, 2.5, 0.01)
    xs = critical_angles(L)
    for xc, xcc in zip(xs, cocritical_angles(L)):
        dv = lift_eval(L, xcc) - lift_eval(L, xc)
        assert abs(dv - round(dv)) <= 1e-12
        assert abs(((xcc - xc + 0.5) % 1) - 0.5) > 1e-3


# -- cycles ---------------------------------------------------------------------

def test_find_circle_cycle_fixed_points():
    L = CircleLift(1, 4.0, 0.0)
    att = find_circle_cycle(L, 0, 1)
    assert [x % 1 for x in att.angles] == pytest.approx([0.0], abs=1e-12)
    assert att.multiplier == pytest.approx(1 / 3, abs=1e-12)
    assert att.stability is Stability.Attracting
    cycs = find_circle_cycles(L, 0, 1)
    rep = [c for c in cycs if c.stability is Stability.Repelling]
    assert len(rep) == 1
    assert rep[0].angles[0] % 1 == pytest.approx(0.5, abs=1e-12)
    assert rep[0].multiplier == pytest.approx(7 / 5, abs=1e-12)


def test_no_cycle_outside_tongue():
    # a diffeomorphism whose rotation number is far from 1/3
    L = CircleLift(2, 6.0, 0.0)
    assert rotation_number(L, 0.0, 4000, 0).value == pytest.approx(0.0, abs=1e-3)
    assert find_circle_cycle(L, 1, 3) is None


def brute_force_fixed(L, n=200_000):
    # sign changes of G(x) - x - p on a very fine grid
    xs = (np.arange(n) + 0.5) / n
    out = {}
    disp = lift_eval(L, xs) - xs
    for p in range(math.floor(disp.min()), math.ceil(disp.max()) + 1):
        f = disp - p
        s = np.sign(f)
        out[p] = int(np.sum(s != np.roll(s, -1)))  # periodic, so wrap around
    return out


def test_fixed_point_count_against_grid():
    for d, r, alpha in [(1, 4.0, 0.0), (2, 2.0, 0.0), (2, 3.0, 0.01), (3, 4.0, -0.03)]:
        L = CircleLift(d, r, alpha)
        for p, count in brute_force_fixed(L).items():
            assert len(find_circle_cycles(L, p, 1)) == count


def test_cycle_multipliers_are_products():
    L = CircleLift(2, 2.0, find_superattracting_alpha(2, 2.0, 1, 2))
    for c in cycles_with_rotation(L, 1, 2):
        prod = np.prod([lift_derivative(L, x) for x in c.angles])
        assert c.multiplier == pytest.approx(prod, abs=1e-10)
        assert c.rotation == Fraction(1, 2)


# -- rotation numbers -----------------------------------------------------------

def test_rotation_number_attracting_fixed_point():
    est = rotation_number(CircleLift(1, 4.0, 0.0), 0.3, 2000, 8)
    assert min(est.value, 1 - est.value) <= est.error_bound
    assert est.rational_lock == Fraction(0, 1)


def test_rotation_number_at_superattracting(alpha_star):
    L = CircleLift(2, 2.0, alpha_star)
    x_plus = critical_angles(L)[0]
    est = rotation_number(L, x_plus, 2000, 8)
    assert est.rational_lock == Fraction(1, 2)


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 3), st.floats(0, 1), st.floats(0, 1), st.floats(-0.2, 0.2))
def test_rotation_number_unique_for_diffeos(d, x0, x1, alpha):
    L = CircleLift(d, 2 * d + 1.5, alpha)
    e0 = rotation_number(L, x0, 1000, 0)
    e1 = rotation_number(L, x1, 1000, 0)
    assert abs(e0.lift_value - e1.lift_value) <= e0.error_bound + e1.error_bound


def test_rotation_interval_examples(alpha_star):
    iv = rotation_interval(CircleLift(2, 6.0, 0.013))
    assert abs(iv.lo.lift_value - iv.hi.lift_value) <= 2e-4
    iv = rotation_interval(CircleLift(2, 2.0, alpha_star))
    assert iv.contains(0.5) or iv.contains(-0.5)
    assert rotation_interval(CircleLift(1, 2.0, 0.0)).contains(0.0)


def test_rotation_interval_contains_orbit_rotations():
    L = CircleLift(2, 2.5, 0.02)
    iv = rotation_interval(L)
    for x0 in np.linspace(0, 1, 7):
        assert iv.contains(rotation_number(L, x0, 2000, 0).lift_value, slack=1e-3)


# -- adjacency and the superattracting parameter -------------------------------

def test_superattracting_alpha(alpha_star):
    assert -1 / 8 < alpha_star <= 1 / 8
    assert superattracting_residual(2, 2.0, alpha_star, 1, 2) <= 1e-12
    L = CircleLift(2, 2.0, alpha_star)
    x_plus = critical_angles(L)[0]
    c = find_circle_cycle(L, 1, 2) or cycles_with_rotation(L, 1, 2)[0]
    assert min(abs(((x - x_plus + 0.5) % 1) - 0.5) for x in c.angles) <= 1e-9
    assert c.stability is Stability.SuperAttracting


def test_superattracting_fixed_point_d1():
    al = find_superattracting_alpha(1, 2.0, 0, 1, bracket=(-0.2, 0.2))
    L = CircleLift(1, 2.0, al)
    xp = critical_angles(L)[0]
    dv = lift_eval(L, xp) - xp
    assert abs(dv - round(dv)) <= 1e-12


def test_superattracting_bad_bracket():
    with pytest.raises(NoSignChange):
        find_superattracting_alpha(2, 2.0, 1, 2, bracket=(0.24, 0.25))


def test_is_adjacent_examples():
    with pytest.raises(RegionMismatch):
        is_adjacent(MapParams.from_polar(1, 4.0, 0.0), 0, 1)
    assert lift_derivative(CircleLift(2, 1.5, 0.0), 0.0) == pytest.approx(-7)
    assert is_adjacent(MapParams.from_polar(2, 1.5, 0.0), 0, 1) is False


def test_adjacent_at_superattracting_1_3():
    # the fixed-point tongue at d = 1 is adjacent at its superattracting parameter
    al = find_superattracting_alpha(1, 2.0, 0, 1, bracket=(-0.2, 0.2))
    assert is_adjacent(MapParams.from_polar(1, 2.0, al), 0, 1) is True


def test_alpha_star_not_adjacent(params_star):
    # the negative critical orbit falls on an attracting fixed point here,
    # so both critical points are not in one cycle basin (see the notes)
    assert is_adjacent(params_star, 1, 2) is False
    L = CircleLift.from_params(params_star)
    fixed = [c for p in range(-2, 3) for c in find_circle_cycles(L, p, 1) if c.non_repelling]
    assert fixed
