"""The Blaschke family B_a(z) = z^(d+1) ((z - a) / (1 - conj(a) z))^d on the sphere.

Points of the Riemann sphere are plain Python complex numbers; any
non-finite complex value stands for the point at infinity.
"""

import cmath
import enum
import math
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from .errors import DegenerateParameter, PoleDerivative
from .polyroots import aberth

INFINITY = complex(math.inf, 0.0)

REGION_EPS = 1e-12
ON_CIRCLE_TOL = 1e-8


def is_infinite(z) -> bool:
    return not cmath.isfinite(z)


def sphere_eq(z, w, tol=0.0) -> bool:
    if is_infinite(z) or is_infinite(w):
        return is_infinite(z) and is_infinite(w)
    return abs(z - w) <= tol


def chordal_distance(z, w) -> float:
    """Chordal distance on the Riemann sphere, in [0, 2]."""
    zi, wi = is_infinite(z), is_infinite(w)
    if zi and wi:
        return 0.0
    if zi:
        return 2.0 / math.hypot(1.0, abs(w))
    if wi:
        return 2.0 / math.hypot(1.0, abs(z))
    if abs(z) > 1 and abs(w) > 1:
        # the distance is invariant under z -> 1/z; this avoids overflow
        z, w = 1 / z, 1 / w
    return 2.0 * abs(z - w) / (math.hypot(1.0, abs(z)) * math.hypot(1.0, abs(w)))


def reduce_alpha(alpha: float, d: int) -> float:
    """Reduce alpha modulo 1/(2d) into (-1/(4d), 1/(4d)]."""
    period = 1.0 / (2 * d)
    half = period / 2
    x = alpha - period * math.floor((alpha + half) / period)
    # floor puts x in [-half, half); move the left endpoint to the right
    if x <= -half:
        x += period
    return x


@dataclass(frozen=True)
class MapParams:
    """One member of the family: degree parameter d and complex parameter a.

    The polar view uses a = r * exp(2 pi i alpha); alpha is reported reduced
    to the fundamental domain, where the circle restriction is determined
    modulo the rotation symmetry of the family.
    """

    d: int
    a: complex

    def __post_init__(self):
        if int(self.d) != self.d or self.d < 1:
            raise ValueError(f"d must be an integer >= 1, got {self.d!r}")
        object.__setattr__(self, "d", int(self.d))
        object.__setattr__(self, "a", complex(self.a))

    @classmethod
    def from_polar(cls, d: int, r: float, alpha: float) -> "MapParams":
        if r < 0:
            raise ValueError("r must be nonnegative")
        return cls(d, r * cmath.exp(2j * math.pi * alpha))

    @classmethod
    def from_ct(cls, c: complex, t: float, d: int) -> "MapParams":
        return cls(d, reduce_parameters(c, t, d))

    @property
    def r(self) -> float:
        return abs(self.a)

    @property
    def alpha(self) -> float:
        if self.a == 0:
            return 0.0
        return reduce_alpha(cmath.phase(self.a) / (2 * math.pi), self.d)

    @property
    def unit(self) -> complex:
        """a / |a|; circle angle x of the lift sits at unit * e^(2 pi i x)."""
        if self.a == 0:
            return 1 + 0j
        return self.a / abs(self.a)

    @property
    def pole(self) -> complex:
        if self.a == 0:
            return INFINITY
        return 1.0 / self.a.conjugate()

    @property
    def degree(self) -> int:
        if self.a != 0 and abs(abs(self.a) - 1.0) <= REGION_EPS:
            return self.d + 1
        return 2 * self.d + 1


def reduce_parameters(c: complex, t: float, d: int) -> complex:
    """Parameter a of the t = 0 map conjugate to B_{c,t}: a = c e^(i pi t / d)."""
    if d < 1:
        raise ValueError("d must be >= 1")
    return complex(c) * cmath.exp(1j * math.pi * t / d)


def evaluate_ct(c: complex, t: float, d: int, z: complex) -> complex:
    """B_{c,t}(z) = e^(2 pi i t) z^(d+1) ((z - c) / (1 - conj(c) z))^d."""
    w = evaluate(MapParams(d, c), z)
    if is_infinite(w):
        return INFINITY
    return cmath.exp(2j * math.pi * t) * w


def _raw(d, a, z):
    num = z - a
    den = 1.0 - a.conjugate() * z
    if den == 0:
        return INFINITY
    return z ** (d + 1) * (num / den) ** d


def evaluate(params: MapParams, z: complex) -> complex:
    """B_a(z) on the sphere.

    Far from the unit disk the map is evaluated in the chart w = 1/z, using
    1 / B_a(1/w) = B_conj(a)(w).
    """
    if is_infinite(z):
        return INFINITY
    try:
        return _evaluate(params, z)
    except OverflowError:
        return INFINITY


def _evaluate(params, z):
    d, a = params.d, params.a
    if params.degree == d + 1:
        # |a| = 1: the factor collapses and B_a is the monomial (-a)^d z^(d+1)
        return (-a) ** d * z ** (d + 1)
    if abs(z) > 2.0 * max(abs(a), 1.0):
        inv = _raw(d, a.conjugate(), 1.0 / z)
        if inv == 0:
            return INFINITY
        if is_infinite(inv):
            return 0j
        return 1.0 / inv
    if a != 0 and z == 1.0 / a.conjugate():
        return INFINITY
    return _raw(d, a, z)


def circle_orbit(params: MapParams, z0: complex, n: int):
    """Orbit of a point of the unit circle under B_a.

    The circle is invariant but repelling in the normal direction, so plain
    floating-point iteration leaves it after a dozen steps. Each image is
    measured against the circle and then put back on it. Returns the orbit
    and the largest deviation ||B(z_k)| - 1| seen along the way.
    """
    z = complex(z0) / abs(z0)
    orbit, worst = [z], 0.0
    for _ in range(n):
        w = evaluate(params, z)
        worst = max(worst, abs(abs(w) - 1.0))
        z = w / abs(w)
        orbit.append(z)
    return orbit, worst


def evaluate_array(params: MapParams, z: np.ndarray) -> np.ndarray:
    """Vectorised B_a for finite arrays (no chart switching)."""
    d, a = params.d, params.a
    if params.degree == d + 1:
        return (-a) ** d * z ** (d + 1)
    ratio = (z - a) / (1.0 - a.conjugate() * z)
    out = z.copy()
    for _ in range(d):
        out = out * z
    for _ in range(d):
        out = out * ratio
    return out


def h_poly(params: MapParams, z: complex) -> complex:
    """The quadratic factor of B_a' whose roots are the free critical points."""
    d, a = params.d, params.a
    return (a.conjugate() * (d + 1) * z * z
            - (2 * d + 1 + abs(a) ** 2) * z + a * (d + 1))


def derivative(params: MapParams, z: complex) -> complex:
    """B_a'(z) = -z^d (z - a)^(d-1) h(z) / (1 - conj(a) z)^(d+1)."""
    d, a = params.d, params.a
    if is_infinite(z):
        raise PoleDerivative("derivative at infinity needs the spherical chart")
    den = 1.0 - a.conjugate() * z
    if den == 0:
        raise PoleDerivative(f"z = {z} is the pole 1/conj(a)")
    return -(z ** d) * (z - a) ** (d - 1) * h_poly(params, z) / den ** (d + 1)


def involution(z: complex) -> complex:
    """I(z) = 1 / conj(z), with 0 and infinity exchanged."""
    if is_infinite(z):
        return 0j
    if z == 0:
        return INFINITY
    return 1.0 / z.conjugate()


def free_critical_points(params: MapParams) -> Tuple[complex, complex]:
    d, a = params.d, params.a
    if a == 0:
        raise DegenerateParameter("a = 0 has no free critical points")
    s = abs(a) ** 2
    delta = (s - (2 * d + 1) ** 2) * (s - 1.0)
    root = cmath.sqrt(complex(delta))
    den = 2 * (d + 1) * s
    return a * (2 * d + 1 + s + root) / den, a * (2 * d + 1 + s - root) / den


class RegionClass(enum.Enum):
    TrivialDisk = "TrivialDisk"
    Endomorphism = "Endomorphism"
    HomeoBoundary = "HomeoBoundary"
    Diffeo = "Diffeo"


def classify_region(params: MapParams) -> RegionClass:
    r, top = params.r, 2 * params.d + 1
    if r <= 1.0 + REGION_EPS:
        return RegionClass.TrivialDisk
    if abs(r - top) <= REGION_EPS:
        return RegionClass.HomeoBoundary
    if r < top:
        return RegionClass.Endomorphism
    return RegionClass.Diffeo


@dataclass
class CriticalSet:
    fixed_critical: List[Tuple[complex, int]]
    free: Tuple[complex, complex]
    cocritical: Optional[Tuple[complex, complex]] = None

    @property
    def total_multiplicity(self) -> int:
        return sum(m for _, m in self.fixed_critical) + 2


def critical_set(params: MapParams) -> CriticalSet:
    """All critical points with multiplicity; co-critical points when the
    circle restriction is a non-injective endomorphism."""
    d, a = params.d, params.a
    fixed = [(0j, d), (INFINITY, d)]
    if d >= 2:
        fixed += [(a, d - 1), (params.pole, d - 1)]
    free = free_critical_points(params)
    cocrit = None
    if classify_region(params) is RegionClass.Endomorphism:
        from .circle import CircleLift, cocritical_angles
        lift = CircleLift.from_params(params)
        xp, xm = cocritical_angles(lift)
        u = params.unit
        cocrit = (u * cmath.exp(2j * math.pi * xp), u * cmath.exp(2j * math.pi * xm))
    return CriticalSet(fixed, free, cocrit)


class LocationTag(enum.Enum):
    Zero = "Zero"
    Infinity = "Infinity"
    OnCircle = "OnCircle"
    OffCircle = "OffCircle"


@dataclass
class FixedPointRecord:
    point: complex
    multiplier: complex
    residual: float
    location_tag: LocationTag

    def to_json(self) -> dict:
        pt = None if is_infinite(self.point) else [self.point.real, self.point.imag]
        return {
            "point": pt,
            "multiplier": [self.multiplier.real, self.multiplier.imag],
            "residual": self.residual,
            "location": self.location_tag.value,
        }


def fixed_point_polynomial(params: MapParams) -> np.ndarray:
    """Coefficients of z^d (z - a)^d - (1 - conj(a) z)^d, highest degree first.

    Its roots together with 0 and infinity are the fixed points of B_a.
    """
    d, a = params.d, params.a
    left = np.array([1.0 + 0j])
    for _ in range(d):
        left = np.convolve(left, [1.0, 0.0])
        left = np.convolve(left, [1.0, -a])
    right = np.array([1.0 + 0j])
    for _ in range(d):
        right = np.convolve(right, [-a.conjugate(), 1.0])
    out = left.copy()
    out[-right.size:] -= right
    return out


def fixed_points(params: MapParams) -> List[FixedPointRecord]:
    """All 2d + 2 fixed points of B_a on the sphere, counted with multiplicity."""
    if params.a == 0:
        raise DegenerateParameter("fixed_points requires a != 0")
    records = [
        FixedPointRecord(0j, 0j, 0.0, LocationTag.Zero),
        FixedPointRecord(INFINITY, 0j, 0.0, LocationTag.Infinity),
    ]
    for z in aberth(fixed_point_polynomial(params)):
        z = complex(z)
        res = chordal_distance(evaluate(params, z), z)
        tag = (LocationTag.OnCircle if abs(abs(z) - 1.0) <= ON_CIRCLE_TOL
               else LocationTag.OffCircle)
        records.append(FixedPointRecord(z, derivative(params, z), res, tag))
    return records


class Connectivity(enum.Enum):
    Connected = "Connected"
    ConnectedUnlessHermanRing = "ConnectedUnlessHermanRing"


@dataclass
class ConnectivityReport:
    verdict: Connectivity
    rotation: Optional[object] = None  # RotationEstimate when measured
    notes: List[str] = field(default_factory=list)


def connectivity_verdict(params: MapParams, n_iter: int = 4000,
                         q_max: int = 12) -> ConnectivityReport:
    """Connectivity of the Julia set.

    Herman rings are impossible for |a| <= 2d + 1, so the Julia set is
    connected there. Beyond that the circle rotation number is measured; a
    confirmed rational lock rules out a Herman ring at this parameter.
    """
    if params.r <= 2 * params.d + 1 + REGION_EPS:
        return ConnectivityReport(Connectivity.Connected)
    from .circle import CircleLift, rotation_number
    est = rotation_number(CircleLift.from_params(params), 0.0, n_iter, q_max)
    if est.rational_lock is not None:
        return ConnectivityReport(
            Connectivity.Connected, est,
            [f"rational lock {est.rational_lock} excludes a Herman ring"])
    return ConnectivityReport(Connectivity.ConnectedUnlessHermanRing, est)
