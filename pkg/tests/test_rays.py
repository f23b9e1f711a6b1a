import cmath
from fractions import Fraction as F

import pytest

from blaschke.errors import NotAdjacent
from blaschke.mapcore import MapParams, evaluate, involution
from blaschke.rays import (Basin, RayStatus, boettcher_multiplier, boettcher_start,
                           functional_equation_error, sector_angles, trace_ray,
                           trace_rays, verify_biaccessible)

P4 = MapParams(1, 4.0)


def test_multiplier_is_dth_root():
    for d, a in [(1, 4.0), (2, 2 * cmath.exp(0.3j)), (3, 1.7 - 0.4j), (2, 3.0 * cmath.exp(-2.9j))]:
        P = MapParams(d, a)
        lam = boettcher_multiplier(P)
        assert abs(lam ** d - (-1 / a.conjugate()) ** d) <= 1e-12 * abs(lam) ** d


def test_multiplier_leading_term():
    # phi(B(z)) = phi(z)^(d+1) with phi(z) ~ lam z forces B(z) ~ lam^d z^(d+1)
    for d, a in [(1, 4.0), (2, 2.0 + 1j)]:
        P = MapParams(d, a)
        z = 1e5 * cmath.exp(0.7j)
        assert evaluate(P, z) / z ** (d + 1) == pytest.approx(boettcher_multiplier(P) ** d, rel=1e-4)


def test_boettcher_start_examples():
    z = boettcher_start(P4, Basin.Infinity, 0.0, 100.0)
    assert z == pytest.approx(-400.0)
    for s in (0.1, 0.37):
        w = boettcher_start(P4, Basin.Zero, s, 100.0)
        assert w == pytest.approx(involution(boettcher_start(P4, Basin.Infinity, -s, 100.0)))
    with pytest.raises(ValueError):
        boettcher_start(P4, Basin.Infinity, 0.0, 5.0)


def test_ray_zero_lands_on_minus_one():
    ray = trace_ray(P4, Basin.Infinity, F(0), depth=60)
    assert ray.status is RayStatus.Landed
    assert abs(ray.landing + 1) <= 1e-8
    assert max(abs(z.imag) for z in ray.points) <= 1e-9
    assert all(z.real < 0 for z in ray.points)
    ray0 = trace_ray(P4, Basin.Zero, F(0), depth=60)
    assert ray0.status is RayStatus.Landed
    assert abs(ray0.landing + 1) <= 1e-8


def test_ray_samples_decrease_in_potential():
    ray = trace_ray(P4, Basin.Infinity, F(0), depth=30)
    assert all(a > b for a, b in zip(ray.potentials, ray.potentials[1:]))
    assert ray.to_csv().splitlines()[0] == "k,potential,re,im"


def test_functional_equation(params_star):
    rays = trace_rays(params_star, Basin.Infinity, F(5, 8), depth=40)
    assert set(rays) == {F(5, 8), F(7, 8)}
    assert functional_equation_error(params_star, rays) <= 1e-9


def test_rays_mirror_on_real_parameter():
    # on a real parameter the map commutes with z -> conj(z), so the ray of angle
    # t and the ray of -t are mirror images
    rays = trace_rays(P4, Basin.Infinity, F(1, 3), depth=40)
    mirror = trace_rays(P4, Basin.Infinity, F(2, 3), depth=40)
    for z, w in zip(rays[F(1, 3)].points[:200], mirror[F(2, 3)].points[:200]):
        assert abs(z - w.conjugate()) <= 1e-9 * max(1, abs(z))


def test_sector_angles():
    assert sector_angles(2, 1, 2) == [F(5, 8), F(7, 8)]
    assert sector_angles(1, 0, 1) == [F(0)]
    assert sector_angles(1, 1, 2) == [F(1, 3), F(2, 3)]


def test_biaccess_fixed_point_d1():
    rep = verify_biaccessible(P4, 0, 1, depth=60)
    assert rep.verdict
    assert rep.infinity_angles == [F(0)] and rep.zero_angles == [F(0)]
    assert len(rep.cycle_points) == 1 and abs(rep.cycle_points[0] + 1) <= 1e-12
    assert max(rep.gaps) <= 1e-6


def test_biaccess_alpha_star(params_star):
    rep = verify_biaccessible(params_star, 1, 2, depth=80)
    assert rep.verdict
    assert set(rep.infinity_angles) == {F(5, 8), F(7, 8)}
    assert set(rep.zero_angles) == {F(1, 8), F(3, 8)}
    assert max(rep.gaps) <= 1e-5
    # each cycle point is hit by one ray from each side
    got = {(row["infinity"], row["zero"]) for row in rep.pairing}
    assert {i for i, _ in got} == {"5/8", "7/8"}
    assert {z for _, z in got} == {"1/8", "3/8"}
    for z in rep.cycle_points:
        assert abs(abs(z) - 1) <= 1e-12
    assert rep.to_json()["verdict"] is True


def test_biaccess_trivial_disk():
    with pytest.raises(NotAdjacent):
        verify_biaccessible(MapParams(2, 0.5), 1, 2)


def test_biaccess_require_adjacent(params_star):
    with pytest.raises(NotAdjacent):
        verify_biaccessible(params_star, 1, 2, require_adjacent=True)


def test_landing_is_periodic(params_star):
    rays = trace_rays(params_star, Basin.Zero, F(1, 8), depth=80)
    for th, ray in rays.items():
        assert ray.status is RayStatus.Landed
        z = ray.landing
        assert abs(evaluate(params_star, evaluate(params_star, z)) - z) <= 1e-9
