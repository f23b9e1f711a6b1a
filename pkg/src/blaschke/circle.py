"""Degree-one circle maps induced by B_a on the unit circle.

For a = r e^(2 pi i alpha) with r > 1, conjugating by the rotation
w -> (a/|a|) w turns B_a on the circle into g(w) = e^(4 pi i d alpha) B_r(w).
Its continuous lift is

    G(x) = x + 2 d alpha - (d / pi) * atan2(sin 2 pi x, r - cos 2 pi x),

which agrees with the principal-branch logarithm formula up to an integer
and satisfies G(0) = 2 d alpha. Angles ``x`` in this module are always in
the rotated frame; the plane point of angle x is ``params.unit * e^(2 pi i x)``.
"""

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional

import numpy as np
from scipy.optimize import brentq

from .errors import Inconclusive, LowerPeriod, NoSignChange, RegionMismatch
from .mapcore import MapParams, RegionClass, classify_region

CYCLE_GRID = 4096
PERIOD_TOL = 1e-10
INDIFFERENT_BAND = 1e-8

BURN_IN = 10_000
CONFIRM_WINDOW = 1_000
PROXIMITY = 1e-8


@dataclass(frozen=True)
class CircleLift:
    d: int
    r: float
    alpha: float

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("d must be >= 1")
        if not self.r > 1.0:
            raise ValueError(f"circle lift needs r > 1, got {self.r}")

    @classmethod
    def from_params(cls, params: MapParams) -> "CircleLift":
        return cls(params.d, params.r, params.alpha)

    def params(self) -> MapParams:
        return MapParams.from_polar(self.d, self.r, self.alpha)

    def __call__(self, x):
        return lift_eval(self, x)

    def iterate(self, x, n: int):
        for _ in range(n):
            x = lift_eval(self, x)
        return x


def lift_eval(L: CircleLift, x):
    """G(x); accepts scalars or numpy arrays."""
    if isinstance(x, (float, int)):
        t = 2 * math.pi * x
        return x + 2 * L.d * L.alpha - (L.d / math.pi) * math.atan2(math.sin(t), L.r - math.cos(t))
    t = 2 * math.pi * np.asarray(x, dtype=float)
    val = (x + 2 * L.d * L.alpha
           - (L.d / math.pi) * np.arctan2(np.sin(t), L.r - np.cos(t)))
    return float(val) if np.ndim(val) == 0 else val


def lift_derivative(L: CircleLift, x):
    t = 2 * math.pi * np.asarray(x, dtype=float)
    r = L.r
    val = L.d + 1 + L.d * (1 - r * r) / (1 - 2 * r * np.cos(t) + r * r)
    return float(val) if np.ndim(val) == 0 else val


def critical_angles(L: CircleLift) -> List[float]:
    """Zeros of G' in (-1/2, 1/2]: two for r < 2d + 1, one at r = 2d + 1."""
    d, r = L.d, L.r
    c = (2 * d + 1 + r * r) / (2 * r * (d + 1))
    if abs(r - (2 * d + 1)) <= 1e-12:
        return [0.0]
    if c > 1.0:
        return []
    x = math.acos(c) / (2 * math.pi)
    return [x, -x]


def cocritical_angles(L: CircleLift):
    """Points x' != x_c on the circle with G(x') = G(x_c), for both critical angles.

    x_+ is a local minimum of G and x_- a local maximum; each critical value is
    attained once more on the adjacent increasing branch.
    """
    xp, xm = critical_angles(L)
    gp, gm = lift_eval(L, xp), lift_eval(L, xm)
    # increasing branch (xp - 1, xm) for the minimum, (xp, xm + 1) for the maximum
    cp = brentq(lambda x: lift_eval(L, x) - gp, xp - 1, xm, xtol=1e-15)
    cm = brentq(lambda x: lift_eval(L, x) - gm, xp, xm + 1, xtol=1e-15)
    return cp % 1.0, cm % 1.0


@dataclass
class RotationEstimate:
    """Rotation number estimate.

    ``value`` is reduced to [0, 1); ``lift_value`` keeps the unreduced lift
    average, which is what interval ordering and symmetry arguments use.
    """

    value: float
    error_bound: float
    rational_lock: Optional[Fraction] = None
    lift_value: float = 0.0
    lock_p: Optional[int] = None  # lift-level numerator of the confirmed orbit


@dataclass
class RotationInterval:
    lo: RotationEstimate
    hi: RotationEstimate

    def contains(self, value: float, slack: float = 0.0) -> bool:
        eps = self.lo.error_bound + self.hi.error_bound + slack
        return self.lo.lift_value - eps <= value <= self.hi.lift_value + eps


class Stability(enum.Enum):
    SuperAttracting = "SuperAttracting"
    Attracting = "Attracting"
    Indifferent = "Indifferent"
    Repelling = "Repelling"


def stability_of(multiplier: float) -> Stability:
    m = abs(multiplier)
    if m <= INDIFFERENT_BAND:
        return Stability.SuperAttracting
    if m < 1 - INDIFFERENT_BAND:
        return Stability.Attracting
    if m <= 1 + INDIFFERENT_BAND:
        return Stability.Indifferent
    return Stability.Repelling


@dataclass
class CircleCycle:
    angles: List[float]
    p: int
    q: int
    multiplier: float
    stability: Stability

    @property
    def non_repelling(self) -> bool:
        return self.stability is not Stability.Repelling

    @property
    def rotation(self) -> Fraction:
        return Fraction(self.p % self.q, self.q)

    def plane_points(self, params: MapParams) -> List[complex]:
        u = params.unit
        return [u * complex(math.cos(2 * math.pi * x), math.sin(2 * math.pi * x))
                for x in self.angles]


def _iterate_array(L: CircleLift, x, n):
    for _ in range(n):
        x = lift_eval(L, x)
    return x


def _displacement(L: CircleLift, x, q):
    return _iterate_array(L, x, q) - x


def _roots_on_grid(f, grid_n, shift=0.0):
    xs = (np.arange(grid_n + 1) + shift) / grid_n
    vals = f(xs)
    roots = []
    for k in range(grid_n):
        v0, v1 = vals[k], vals[k + 1]
        if v0 == 0.0:
            roots.append(float(xs[k]))
        elif v0 * v1 < 0:
            roots.append(brentq(f, xs[k], xs[k + 1], xtol=1e-15, rtol=1e-15))
    return roots


def _true_period(L: CircleLift, x, q):
    y = x
    for k in range(1, q + 1):
        y = lift_eval(L, y)
        dev = y - x
        if abs(dev - round(dev)) <= PERIOD_TOL * 10:
            return k
    return None


def _cycle_from_root(L: CircleLift, x0, p, q) -> CircleCycle:
    orbit = [x0]
    y = x0
    for _ in range(q - 1):
        y = lift_eval(L, y)
        orbit.append(y)
    mult = 1.0
    for y in orbit:
        mult *= lift_derivative(L, y)
    angles = sorted(y % 1.0 for y in orbit)
    return CircleCycle(angles, p, q, mult, stability_of(mult))


def _same_cycle(c1: CircleCycle, c2: CircleCycle, tol=1e-8) -> bool:
    if c1.q != c2.q:
        return False
    for x, y in zip(c1.angles, c2.angles):
        dev = abs(x - y)
        if min(dev, 1 - dev) > tol:
            return False
    return True


def find_circle_cycles(L: CircleLift, p: int, q: int,
                       grid_n: int = CYCLE_GRID) -> List[CircleCycle]:
    """All q-cycles solving G^q(x) = x + p, sorted by |multiplier|.

    Raises LowerPeriod when roots exist but every one of them belongs to an
    orbit of smaller period.
    """
    if q < 1:
        raise ValueError("q must be >= 1")
    f = lambda x: _displacement(L, x, q) - p
    roots = _roots_on_grid(f, grid_n)
    cycles: List[CircleCycle] = []
    lower = []
    for x in roots:
        if abs(f(x)) > PERIOD_TOL:
            continue
        period = _true_period(L, x, q)
        if period is not None and period < q:
            lower.append(period)
            continue
        cyc = _cycle_from_root(L, x, p, q)
        if not any(_same_cycle(cyc, c) for c in cycles):
            cycles.append(cyc)
    if not cycles and lower:
        raise LowerPeriod(f"orbits found have period {min(lower)} < {q}")
    cycles.sort(key=lambda c: abs(c.multiplier))
    return cycles


def find_circle_cycle(L: CircleLift, p: int, q: int,
                      grid_n: int = CYCLE_GRID) -> Optional[CircleCycle]:
    """The q-cycle of G^q(x) = x + p with smallest |multiplier|, or None."""
    cycles = find_circle_cycles(L, p, q, grid_n)
    return cycles[0] if cycles else None


def lift_numerators(L: CircleLift, q: int, grid_n: int = 512) -> range:
    """Integers p for which G^q(x) - x - p can vanish (range of the displacement)."""
    xs = np.arange(grid_n) / grid_n
    disp = _displacement(L, xs, q)
    return range(math.floor(disp.min()) - 1, math.ceil(disp.max()) + 2)


def cycles_with_rotation(L: CircleLift, p: int, q: int,
                         grid_n: int = CYCLE_GRID) -> List[CircleCycle]:
    """Cycles whose rotation number is p/q modulo 1, over every lift offset."""
    out = []
    for pp in lift_numerators(L, q):
        if (pp - p) % q:
            continue
        try:
            out += find_circle_cycles(L, pp, q, grid_n)
        except LowerPeriod:
            pass
    out.sort(key=lambda c: abs(c.multiplier))
    return out


def _fractions_near(est, err, q_max):
    cands = []
    for q in range(1, q_max + 1):
        for p in range(math.floor((est - err) * q), math.ceil((est + err) * q) + 1):
            if math.gcd(p, q) != 1:
                continue
            if abs(p / q - est) <= err:
                cands.append((q, p))
    # simplest fractions first, as in a Stern-Brocot descent
    cands.sort()
    return cands


def confirm_lock(L: CircleLift, p: int, q: int, grid_n: int = 1024) -> bool:
    """True if a genuine q-periodic orbit with G^q(x) = x + p exists."""
    f = lambda x: _displacement(L, x, q) - p
    for x in _roots_on_grid(f, grid_n):
        if abs(f(x)) <= PERIOD_TOL:
            per = _true_period(L, x, q)
            if per == q or q == 1:
                return True
    return False


def _attempt_lock(L, est, err, q_max, grid_n=1024):
    for q, p in _fractions_near(est, err, q_max):
        if confirm_lock(L, p, q, grid_n):
            return Fraction(p % q, q), p
    return None, None


def rotation_number(L: CircleLift, x0: float = 0.0, n_iter: int = 2000,
                    q_max: int = 8) -> RotationEstimate:
    """Average displacement (G^n(x0) - x0) / n with a rational-lock attempt."""
    if n_iter < 100:
        raise ValueError("n_iter must be >= 100")
    x = x0
    for _ in range(n_iter):
        x = lift_eval(L, x)
    est = (x - x0) / n_iter
    err = 2.0 / n_iter
    lock, p = _attempt_lock(L, est, err, q_max) if q_max > 0 else (None, None)
    return RotationEstimate(est % 1.0, err, lock, est, p)


def _monotone_map_rotation(F, n_iter, x0=0.0):
    x = x0
    for _ in range(n_iter):
        x = F(x)
    return (x - x0) / n_iter


class _Envelope:
    """Upper or lower monotone envelope of G sampled on a uniform grid."""

    def __init__(self, L: CircleLift, grid_n: int, upper: bool):
        self.L = L
        self.n = grid_n
        self.upper = upper
        g = lift_eval(L, np.arange(grid_n) / grid_n)
        if upper:
            self.prefix = np.maximum.accumulate(g)
            self.suffix = np.maximum.accumulate(g[::-1])[::-1]
        else:
            self.prefix = np.minimum.accumulate(g)
            self.suffix = np.minimum.accumulate(g[::-1])[::-1]

    def __call__(self, x: float) -> float:
        m = math.floor(x)
        f = x - m
        k = min(int(f * self.n), self.n - 1)
        gx = lift_eval(self.L, f)
        if self.upper:
            # max over grid points in [f - 1, f]
            best = max(gx, self.prefix[k])
            if k + 1 < self.n:
                best = max(best, self.suffix[k + 1] - 1.0)
        else:
            # min over grid points in [f, f + 1]
            best = min(gx, self.prefix[k] + 1.0)
            if k + 1 < self.n:
                best = min(best, self.suffix[k + 1])
        return m + float(best)


def upper_envelope(L: CircleLift, grid_n: int = 1024):
    return _Envelope(L, grid_n, upper=True)


def lower_envelope(L: CircleLift, grid_n: int = 1024):
    return _Envelope(L, grid_n, upper=False)


def rotation_interval(L: CircleLift, grid_n: int = 1024, n_iter: int = 4000,
                      q_max: int = 0) -> RotationInterval:
    """Rotation interval [rho(F_l), rho(F_u)] from the monotone envelopes of G.

    For r >= 2d + 1 the lift is monotone and both envelopes coincide with G,
    giving a degenerate interval.
    """
    if grid_n < 256:
        raise ValueError("grid_n must be >= 256")
    err = 2.0 / n_iter
    if L.r >= 2 * L.d + 1:
        est = rotation_number(L, 0.0, n_iter, q_max)
        return RotationInterval(est, est)
    lo = _monotone_map_rotation(lower_envelope(L, grid_n), n_iter)
    hi = _monotone_map_rotation(upper_envelope(L, grid_n), n_iter)
    out = []
    for v in (lo, hi):
        lock, p = _attempt_lock(L, v, err, q_max) if q_max > 0 else (None, None)
        out.append(RotationEstimate(v % 1.0, err, lock, v, p))
    return RotationInterval(out[0], out[1])


def _circle_dist(x, y):
    dev = (x - y) % 1.0
    return min(dev, 1.0 - dev)


def _dist_to_cycle(x, cyc: CircleCycle):
    return min(_circle_dist(x, y) for y in cyc.angles)


def is_adjacent(params: MapParams, p: int, q: int,
                burn_in: int = BURN_IN, window: int = CONFIRM_WINDOW) -> bool:
    """Both critical orbits of the circle map captured by one non-repelling
    p/q cycle (rotation number taken modulo 1)."""
    if classify_region(params) is not RegionClass.Endomorphism:
        raise RegionMismatch(
            f"adjacency needs 1 < |a| < 2d+1, got |a| = {params.r}")
    L = CircleLift.from_params(params)
    cands = [c for c in cycles_with_rotation(L, p, q) if c.non_repelling]
    if not cands:
        return False
    target = cands[0]

    captured = []
    for xc in critical_angles(L):
        x = L.iterate(xc, burn_in)
        if _dist_to_cycle(x, target) <= PROXIMITY:
            captured.append(True)
            continue
        d0 = _dist_to_cycle(x, target)
        y = L.iterate(x, window)
        d1 = _dist_to_cycle(y, target)
        if d1 <= PROXIMITY:
            captured.append(True)
            continue
        # settled on some other periodic orbit, or drifting away: not captured
        settled = abs(lift_eval(L, L.iterate(y, q - 1)) - y
                      - round(lift_eval(L, L.iterate(y, q - 1)) - y)) <= PROXIMITY
        if settled or d1 >= d0:
            captured.append(False)
            continue
        raise Inconclusive("critical orbit still approaching the cycle")
    return all(captured)


def find_superattracting_alpha(d: int, r: float, p: int, q: int,
                               bracket=None) -> float:
    """alpha in ``bracket`` at which the positive critical angle is q-periodic.

    The residual G^q(x_+) - x_+ - p' is driven to zero for the lift offset
    p' = p (mod q) that changes sign across the bracket; the lift's additive
    normalisation decides which representative that is.
    """
    if not 1 < r <= 2 * d + 1:
        raise ValueError("superattracting locus needs 1 < r <= 2d+1")
    lo_dom, hi_dom = -1.0 / (4 * d), 1.0 / (4 * d)
    lo, hi = bracket if bracket is not None else (lo_dom, hi_dom)
    if lo < lo_dom - 1e-15 or hi > hi_dom + 1e-15 or not lo < hi:
        raise NoSignChange(f"bracket {(lo, hi)} is not inside the fundamental domain")
    xc = critical_angles(CircleLift(d, r, 0.0))[0]

    def disp(alpha):
        return CircleLift(d, r, alpha).iterate(xc, q) - xc

    dlo, dhi = disp(lo), disp(hi)
    offsets = [pp for pp in range(math.floor(min(dlo, dhi)) - q,
                                  math.ceil(max(dlo, dhi)) + q + 1)
               if (pp - p) % q == 0]
    offsets.sort(key=lambda pp: (abs(pp - p), pp))
    for pp in offsets:
        flo, fhi = dlo - pp, dhi - pp
        if flo == 0:
            return lo
        if fhi == 0:
            return hi
        if flo * fhi < 0:
            return brentq(lambda al: disp(al) - pp, lo, hi,
                          xtol=1e-16, rtol=1e-15, maxiter=500)
    raise NoSignChange(
        f"no sign change of G^{q}(x_+) - x_+ - p' (p' = {p} mod {q}) on {(lo, hi)}")


def superattracting_residual(d: int, r: float, alpha: float, p: int, q: int) -> float:
    """|G^q(x_+) - x_+ - p'| minimised over lift offsets p' = p (mod q)."""
    L = CircleLift(d, r, alpha)
    xc = critical_angles(L)[0]
    dev = L.iterate(xc, q) - xc - p
    return abs(dev - q * round(dev / q))
