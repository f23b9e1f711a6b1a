"""Böttcher rays in the superattracting basins of 0 and infinity.

Rays are traced by the usual pullback continuation. Every angle in the
forward orbit of the requested angle under m_{d+1} gets a coarse initial
ray from the leading-order Böttcher asymptotics at high potential; each
further level is the preimage of the image ray one level up, obtained with
a damped Newton iteration seeded at the previous sample of the same ray.
Errors in the starting curves contract under pullback, so the deep samples
follow the true rays.

Zero-basin rays use the convention R^0_s = I(R^inf_{-s}); they are traced
from their own starting points near 0, not by mirroring infinity rays.
"""

import cmath
import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional

from .circle import (CircleCycle, CircleLift, Stability, cycles_with_rotation,
                     is_adjacent)
from .errors import Inconclusive, NoRepellingCycle, NotAdjacent, RayBudget
from .mapcore import (MapParams, RegionClass, chordal_distance, classify_region,
                      derivative, evaluate, free_critical_points, involution)
from .rotsets import enumerate_cycles, mn_apply

LANDING_TOL = 1e-8
TAIL = 10
SAMPLES_PER_LEVEL = 16
GAP_TOL = 1e-5
NEWTON_MAX = 50


class Basin(enum.Enum):
    Zero = "Zero"
    Infinity = "Infinity"


class RayStatus(enum.Enum):
    Landed = "Landed"
    BudgetExhausted = "BudgetExhausted"
    BranchLost = "BranchLost"


@dataclass
class BoettcherRay:
    basin: Basin
    angle: Fraction
    points: List[complex]
    potentials: List[float]
    landing: Optional[complex]
    status: RayStatus
    samples_per_level: int = SAMPLES_PER_LEVEL

    def to_csv(self) -> str:
        lines = ["k,potential,re,im"]
        for k, (t, z) in enumerate(zip(self.potentials, self.points)):
            lines.append(f"{k},{t:.17g},{z.real:.17g},{z.imag:.17g}")
        return "\n".join(lines) + "\n"


def boettcher_multiplier(params: MapParams) -> complex:
    """lambda with phi(z) ~ lambda z at infinity, so phi(B(z)) = phi(z)^(d+1).

    lambda is a d-th root of (-1/conj(a))^d. The root is picked so that the
    rays with angles in ((d-1)/d, 1) bound the sector facing the unit circle.
    With a = r e^(2 pi i alpha) and beta the reduced alpha, that root is
    -e^(2 pi i (2 beta - alpha)) / r, turned by a further -1/d of a turn
    when beta > 0. The rotation conjugacy a -> a e^(i pi / d) and the mirror
    conjugacy a -> conj(a) both carry this choice to itself.
    """
    if params.a == 0:
        return 1 + 0j
    d = params.d
    raw = cmath.phase(params.a) / (2 * math.pi)
    beta = params.alpha
    turn = 2 * beta - raw - (1.0 / d if beta > 0 else 0.0)
    return -cmath.exp(2j * math.pi * turn) / params.r


def default_r0(params: MapParams) -> float:
    return (100.0 * max(params.r, 1.0)) ** (params.d + 1)


def boettcher_start(params: MapParams, basin: Basin, angle: float, R0: float) -> complex:
    """Leading-order inverse Böttcher point of modulus R0 and the given angle."""
    if R0 < 10 * max(params.r, 1.0):
        raise ValueError("R0 must be at least 10 max(|a|, 1)")
    if basin is Basin.Zero:
        return involution(boettcher_start(params, Basin.Infinity, -angle, R0))
    mu = boettcher_multiplier(params)
    return R0 * cmath.exp(2j * math.pi * angle) / mu


def _angle_orbit(angle: Fraction, n: int) -> List[Fraction]:
    orbit = [angle]
    while True:
        nxt = mn_apply(n, orbit[-1])
        if nxt in orbit:
            return orbit
        orbit.append(nxt)


def _singular_points(params: MapParams, basin: Basin):
    # the basin's own centre is where the ray starts, not a hazard
    pts = [] if basin is Basin.Zero else [0j]
    if params.a != 0:
        pts += [params.a, params.pole]
        pts += list(free_critical_points(params))
    return pts


def _pull_back(params, target, seed, singular):
    """Solve B(w) = target near seed. Returns (w, ok)."""
    w = seed
    scale = abs(target)
    fw = evaluate(params, w) - target
    for _ in range(NEWTON_MAX):
        dw = derivative(params, w)
        if dw == 0:
            return w, False
        step = fw / dw
        lam = 1.0
        # damping: halve the step until the residual decreases
        for _ in range(40):
            cand = w - lam * step
            fc = evaluate(params, cand) - target
            if abs(fc) < abs(fw) or abs(fc) <= 1e-15 * scale:
                break
            lam *= 0.5
        w, fw = cand, fc
        if abs(lam * step) <= 1e-15 * max(abs(w), 1e-300) or abs(fw) <= 1e-16 * scale:
            break
    local = min((abs(seed - s) for s in singular), default=math.inf)
    ok = abs(w - seed) <= 0.5 * local
    return w, ok


def trace_rays(params: MapParams, basin: Basin, angle, depth: int = 80,
               R0: Optional[float] = None,
               samples_per_level: int = SAMPLES_PER_LEVEL) -> Dict[Fraction, BoettcherRay]:
    """Trace the ray of ``angle`` together with every ray in its forward orbit."""
    angle = Fraction(angle) % 1
    n = params.d + 1
    if R0 is None:
        R0 = default_r0(params)
    t0 = math.log(R0)
    S = samples_per_level
    orbit = _angle_orbit(angle, n)
    image = {th: mn_apply(n, th) for th in orbit}
    singular = _singular_points(params, basin)

    pts: Dict[Fraction, List[complex]] = {}
    pots = [t0 / n ** (s / S) for s in range(S * (depth + 1))]
    for th in orbit:
        pts[th] = [boettcher_start(params, basin, float(th), math.exp(pots[s]))
                   for s in range(S)]

    status = {th: None for th in orbit}
    for level in range(1, depth + 1):
        for s in range(S):
            j = level * S + s
            new = {}
            for th in orbit:
                if status[th] is RayStatus.BranchLost:
                    continue
                target = pts[image[th]][j - S]
                seed = pts[th][j - 1]
                w, ok = _pull_back(params, target, seed, singular)
                if not ok:
                    status[th] = RayStatus.BranchLost
                new[th] = w
            for th, w in new.items():
                pts[th].append(w)
        if all(_tail_diameter(pts[th]) <= LANDING_TOL for th in orbit):
            break

    # angles on the periodic part of the orbit land on periodic points
    period = {}
    start = orbit.index(mn_apply(n, orbit[-1]))
    for th in orbit[start:]:
        period[th] = len(orbit) - start

    rays = {}
    for th in orbit:
        p = pts[th]
        st = status[th]
        if st is None:
            st = (RayStatus.Landed if _tail_diameter(p) <= LANDING_TOL
                  else RayStatus.BudgetExhausted)
        landing = None
        if st is RayStatus.Landed:
            landing = p[-1]
            if th in period:
                landing = _polish_landing(params, landing, period[th])
        rays[th] = BoettcherRay(basin, th, p, pots[:len(p)], landing, st, S)
    return rays


def _polish_landing(params, z, q):
    """Newton on B^q(z) = z from the last ray sample; kept only if the
    correction is within the landing tolerance scale."""
    w = z
    for _ in range(8):
        f, df = w, 1.0 + 0j
        for _ in range(q):
            df = df * derivative(params, f)
            f = evaluate(params, f)
        g, dg = f - w, df - 1.0
        if dg == 0 or not cmath.isfinite(g):
            return z
        w = w - g / dg
    return w if abs(w - z) <= 100 * LANDING_TOL else z


def _tail_diameter(points) -> float:
    if len(points) < TAIL:
        return math.inf
    tail = points[-TAIL:]
    return max(abs(u - v) for u in tail for v in tail)


def trace_ray(params: MapParams, basin: Basin, angle, depth: int = 80,
              R0: Optional[float] = None) -> BoettcherRay:
    angle = Fraction(angle) % 1
    return trace_rays(params, basin, angle, depth, R0)[angle]


def functional_equation_error(params: MapParams, rays: Dict[Fraction, BoettcherRay]) -> float:
    """Largest chordal distance between B(sample) and the image-ray sample
    at the matching potential, over every sample below the starting level."""
    n = params.d + 1
    worst = 0.0
    for th, ray in rays.items():
        img = rays[mn_apply(n, th)]
        S = ray.samples_per_level
        for j in range(S, len(ray.points)):
            if j - S >= len(img.points):
                break
            worst = max(worst, chordal_distance(evaluate(params, ray.points[j]),
                                                img.points[j - S]))
    return worst


@dataclass
class BiAccessReport:
    params: MapParams
    p: int
    q: int
    circle_cycle: CircleCycle
    cycle_points: List[complex]
    infinity_angles: List[Fraction]
    zero_angles: List[Fraction]
    gaps: List[float]
    verdict: bool
    adjacent: Optional[bool] = None
    pairing: List[dict] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "d": self.params.d,
            "a": [self.params.a.real, self.params.a.imag],
            "r": self.params.r,
            "alpha": self.params.alpha,
            "p": self.p,
            "q": self.q,
            "adjacent": self.adjacent,
            "cycle_angles": list(self.circle_cycle.angles),
            "cycle_multiplier": self.circle_cycle.multiplier,
            "cycle_points": [[z.real, z.imag] for z in self.cycle_points],
            "infinity_angles": [f"{t.numerator}/{t.denominator}" for t in self.infinity_angles],
            "zero_angles": [f"{t.numerator}/{t.denominator}" for t in self.zero_angles],
            "gaps": list(self.gaps),
            "pairing": self.pairing,
            "verdict": self.verdict,
        }


def sector_angles(d: int, p: int, q: int) -> List[Fraction]:
    """Points of the m_{d+1} cycles with rotation p/q inside [(d-1)/d, 1)."""
    lo = Fraction(d - 1, d)
    target = Fraction(p, q) % 1
    out = []
    for cyc in enumerate_cycles(d + 1, q):
        if cyc.rotation == target and all(t >= lo for t in cyc.points):
            out += cyc.points
    return sorted(out)


def verify_biaccessible(params: MapParams, p: int, q: int, depth: int = 80,
                        require_adjacent: bool = False) -> BiAccessReport:
    """Numerical check that the repelling p/q circle cycle is bi-accessible.

    The parameter must lie in the p/q tongue with a non-repelling p/q cycle
    on the circle. Adjacency is evaluated and reported; it is enforced only
    with ``require_adjacent``.
    """
    region = classify_region(params)
    if region is RegionClass.TrivialDisk:
        raise NotAdjacent("|a| <= 1 has no tongue structure")
    L = CircleLift.from_params(params)
    cycles = cycles_with_rotation(L, p, q)
    if not any(c.non_repelling for c in cycles):
        raise NotAdjacent(f"no attracting {p}/{q} cycle on the circle")
    adjacent = None
    if region is RegionClass.Endomorphism:
        try:
            adjacent = is_adjacent(params, p, q)
        except Inconclusive:
            if require_adjacent:
                raise
        if require_adjacent and not adjacent:
            raise NotAdjacent("free critical points are not captured by one cycle")
    repelling = [c for c in cycles if c.stability is Stability.Repelling]
    if not repelling:
        raise NoRepellingCycle(f"no repelling {p}/{q} cycle on the circle")

    inf_angles = sector_angles(params.d, p, q)
    zero_angles = sorted((-t) % 1 for t in inf_angles)
    landings = {Basin.Infinity: {}, Basin.Zero: {}}
    for basin, angles in ((Basin.Infinity, inf_angles), (Basin.Zero, zero_angles)):
        for th in angles:
            if th in landings[basin]:
                continue
            for ang, ray in trace_rays(params, basin, th, depth).items():
                if ray.status is not RayStatus.Landed:
                    raise RayBudget(f"{basin.value} ray {ang} status {ray.status.value}")
                landings[basin][ang] = ray.landing

    def pair(cycle_pts):
        gaps, pairing = [], []
        for z in cycle_pts:
            row = {"point": [z.real, z.imag]}
            for basin in (Basin.Infinity, Basin.Zero):
                ang, w = min(landings[basin].items(), key=lambda kv: abs(kv[1] - z))
                gaps.append(abs(w - z))
                row[basin.value.lower()] = f"{ang.numerator}/{ang.denominator}"
            pairing.append(row)
        return gaps, pairing

    # with several repelling p/q cycles, report the one the rays single out
    best = None
    for cyc in repelling:
        pts = cyc.plane_points(params)
        gaps, pairing = pair(pts)
        if best is None or max(gaps) < max(best[2]):
            best = (cyc, pts, gaps, pairing)
    cyc, cycle_pts, gaps, pairing = best
    verdict = all(g <= GAP_TOL for g in gaps)
    return BiAccessReport(params, p, q, cyc, cycle_pts, inf_angles, zero_angles,
                          gaps, verdict, adjacent, pairing)
