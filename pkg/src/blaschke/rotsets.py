"""Exact combinatorics of the multiplication maps m_n(t) = n t mod 1.

Everything here is integer/rational arithmetic on ``fractions.Fraction``;
no tolerances anywhere.
"""

import math
from functools import lru_cache
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Iterable, List, Sequence, Tuple

from .errors import (BudgetExceeded, IntegralityViolation, LengthTooShort,
                     NoSectorCycle, NotInLambda, NotInvariant, SymbolOutOfRange,
                     UniquenessViolation, VerificationFailure)

MAX_PERIOD = 12


def angle(num, den=1) -> Fraction:
    """Reduced angle num/den mod 1 in [0, 1)."""
    return Fraction(num, den) % 1


def fmt(t: Fraction) -> str:
    return f"{t.numerator}/{t.denominator}"


def mn_apply(n: int, t: Fraction) -> Fraction:
    if n < 2:
        raise ValueError("n must be >= 2")
    return (n * Fraction(t)) % 1


def mn_iterate(n: int, t: Fraction, k: int) -> Fraction:
    return (n ** k * Fraction(t)) % 1


@dataclass(frozen=True)
class MnCycle:
    n: int
    points: Tuple[Fraction, ...]
    p: int
    q: int
    deployment: Tuple[Fraction, ...]

    @property
    def rotation(self) -> Fraction:
        return Fraction(self.p, self.q)

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "points": [fmt(t) for t in self.points],
            "rotation": fmt(self.rotation) if self.q > 1 else f"{self.p}/{self.q}",
            "deployment": [fmt(x) for x in self.deployment],
        }


def _circular_shift(n, pts):
    """Shift s with m_n(pts[i]) = pts[i + s], or None if the order is broken."""
    q = len(pts)
    images = [mn_apply(n, t) for t in pts]
    try:
        s = pts.index(images[0])
    except ValueError:
        return None
    for i in range(q):
        if images[i] != pts[(i + s) % q]:
            return None
    return s


def deployment_vector(n: int, pts: Sequence[Fraction]) -> List[Fraction]:
    q = len(pts)
    counts = [0] * (n - 1)
    for t in pts:
        # t in [u_{i-1}, u_i) with u_i = i/(n-1)
        counts[math.floor(t * (n - 1))] += 1
    return [Fraction(c, q) for c in counts]


def cycle_invariants(n: int, X: Iterable[Fraction]):
    """(is_rotation_set, rotation number, deployment) of an m_n-invariant set."""
    pts = sorted(set(Fraction(t) % 1 for t in X))
    if not pts:
        raise ValueError("empty set")
    if sorted(set(mn_apply(n, t) for t in pts)) != pts:
        raise NotInvariant(f"m_{n} does not map the set onto itself")
    s = _circular_shift(n, pts)
    if s is None:
        return False, None, None
    return True, Fraction(s, len(pts)), deployment_vector(n, pts)


def enumerate_cycles(n: int, q: int) -> List[MnCycle]:
    """All period-q cycles of m_n that preserve circular order, sorted by
    their smallest point.

    Period-q points are exactly k / (n^q - 1); orbits are followed on the
    integer numerators k -> n k mod (n^q - 1).
    """
    if n < 2:
        raise ValueError("n must be >= 2")
    if not 1 <= q <= MAX_PERIOD:
        raise BudgetExceeded(f"q = {q} outside 1..{MAX_PERIOD}")
    return list(_enumerate(n, q))


@lru_cache(maxsize=64)
def _enumerate(n, q):
    N = n ** q - 1
    seen = bytearray(N)
    out = []
    for k in range(N):
        if seen[k]:
            continue
        orbit = [k]
        j = (n * k) % N
        while j != k:
            orbit.append(j)
            j = (n * j) % N
        for j in orbit:
            seen[j] = 1
        if len(orbit) != q:
            continue
        pts = sorted(Fraction(j, N) for j in orbit)
        s = _circular_shift(n, pts)
        if s is None:
            continue
        out.append(MnCycle(n, tuple(pts), s, q, tuple(deployment_vector(n, pts))))
    out.sort(key=lambda c: c.points[0])
    return tuple(out)


def goldberg_realize(n: int, p: int, q: int, delta: Sequence) -> MnCycle:
    """The unique cycle with rotation number p/q and deployment vector delta."""
    delta = [Fraction(x) for x in delta]
    if len(delta) != n - 1:
        raise ValueError(f"deployment needs {n - 1} entries")
    if any(x < 0 for x in delta) or sum(delta) != 1:
        raise ValueError("deployment must lie in the simplex")
    if any((q * x).denominator != 1 for x in delta):
        raise IntegralityViolation(f"q * delta not integral for q = {q}")
    rot = Fraction(p, q)
    matches = [c for c in enumerate_cycles(n, q)
               if c.rotation == rot and list(c.deployment) == delta]
    if len(matches) != 1:
        raise UniquenessViolation(f"{len(matches)} cycles realise {rot}, {delta}")
    return matches[0]


def partition_points(d: int) -> Tuple[Fraction, Fraction]:
    """(a', b'): the interior preimages of (d-1)/d and of 0 in [(d-1)/d, 1)."""
    if d < 1:
        raise ValueError("d must be >= 1")
    return Fraction(d * d + d - 1, d * (d + 1)), Fraction(d, d + 1)


def _pieces(d):
    a1, b1 = partition_points(d)
    lo = Fraction(d - 1, d)
    return lo, b1, a1  # J0 = [lo, b'), J* = [b', a'), J1 = [a', 1)


def _which_piece(d, t):
    lo, b1, a1 = _pieces(d)
    if lo <= t < b1:
        return 0
    if a1 <= t < 1:
        return 1
    return None


def itinerary(d: int, t, length: int) -> List[int]:
    """s_k with m^k(t) in J_{s_k}, k = 1..length (m = m_{d+1})."""
    t = Fraction(t)
    lo, _, _ = _pieces(d)
    if not lo <= t < 1:
        raise ValueError(f"t = {t} outside [(d-1)/d, 1)")
    out = []
    for k in range(1, length + 1):
        t = mn_apply(d + 1, t)
        s = _which_piece(d, t)
        if s is None:
            raise NotInLambda(f"m^{k}(t) = {t} leaves J0 and J1")
        out.append(s)
    return out


def _branch(d, s, t):
    # affine branch of m_{d+1} on J_s, without reduction mod 1
    return (d + 1) * t - (d - 1 if s == 0 else d)


def _branch_inverse(d, s, y):
    return (y + (d - 1 if s == 0 else d)) / (d + 1)


@dataclass
class ItineraryInterval:
    d: int
    p: int
    q: int
    a: Fraction
    b: Fraction
    itinerary: List[int]
    isolated_point: Fraction
    cycle: List[Fraction]

    def to_json(self) -> dict:
        return {
            "d": self.d, "p": self.p, "q": self.q,
            "a": fmt(self.a), "b": fmt(self.b),
            "t1": fmt(self.isolated_point),
            "itinerary": list(self.itinerary),
            "cycle": [fmt(t) for t in self.cycle],
        }


def sector_cycle(d: int, p: int, q: int) -> List[Fraction]:
    lo = Fraction(d - 1, d)
    rot = Fraction(p, q)
    found = [c for c in enumerate_cycles(d + 1, q)
             if c.rotation == rot and all(t >= lo for t in c.points)]
    if not found:
        raise NoSectorCycle(f"no {rot} cycle of m_{d + 1} in [{lo}, 1)")
    if len(found) > 1:
        raise UniquenessViolation(f"{len(found)} sector cycles for {rot}")
    return list(found[0].points)


def gen_interval(d: int, p: int, q: int) -> ItineraryInterval:
    """Interval [a, b] around the first sector-cycle point that covers itself
    under m^q; all three defining properties are checked exactly."""
    if d < 1:
        raise ValueError("d must be >= 1")
    if not (0 < p < q and math.gcd(p, q) == 1):
        raise ValueError("need 0 < p/q < 1 in lowest terms")
    n = d + 1
    X = sector_cycle(d, p, q)
    lo, b1, a1 = _pieces(d)
    in_j0 = [t for t in X if _which_piece(d, t) == 0]
    if not in_j0:
        raise VerificationFailure("sector cycle misses J0")
    t1 = min(in_j0)
    word = [_which_piece(d, t1)] + itinerary(d, t1, q - 1)

    # J_{s1...sq s1}: pull J_{s1} back through the branches s_q, ..., s_1
    left, right = (lo, b1) if word[0] == 0 else (a1, Fraction(1))
    for s in reversed(word):
        left, right = _branch_inverse(d, s, left), _branch_inverse(d, s, right)
    a, b = left, right

    # (1) endpoint images
    if mn_iterate(n, a, q) != lo or mn_iterate(n, b, q + 1) != 0:
        raise VerificationFailure("endpoint images wrong")
    # (2) exactly one cycle point, in the interior
    inside = [t for t in X if a <= t <= b]
    if inside != [t1] or not a < t1 < b:
        raise VerificationFailure("interval does not isolate t1")
    # (3) self-covering under m^q, following the branches without reduction
    ia, ib = a, b
    for s in word:
        ia, ib = _branch(d, s, ia), _branch(d, s, ib)
    if not (ia <= a and b <= ib):
        raise VerificationFailure("[a, b] not covered by its m^q image")
    return ItineraryInterval(d, p, q, a, b, word, t1, list(X))


# -- admissible words ------------------------------------------------------

Symbol = Tuple[int, bool]  # (value, underlined)


@dataclass(frozen=True)
class WordClass:
    admissible: bool
    in_S: bool
    in_S0: bool
    in_S2: bool


def parse_word(text: str) -> List[Symbol]:
    """Parse '0_,2,1' style words: a trailing underscore marks an underline."""
    out = []
    for tok in text.replace(" ", "").split(","):
        if not tok:
            continue
        under = tok.endswith("_")
        out.append((int(tok.rstrip("_")), under))
    return out


def format_word(w: Sequence[Symbol]) -> str:
    return ",".join(f"{v}_" if u else str(v) for v, u in w)


def is_admissible(d: int, w: Sequence[Symbol]) -> bool:
    if not w:
        return False
    if w[-1][1]:
        return False
    for (v, u), (nv, nu) in zip(w, w[1:]):
        if u and not (nv == d and not nu):
            return False
        if not u and nv == d and not nu:
            return False
    return True


def word_classify(d: int, w: Sequence[Symbol]) -> WordClass:
    for v, _ in w:
        if not 0 <= v <= d:
            raise SymbolOutOfRange(f"symbol {v} outside 0..{d}")
    if not is_admissible(d, w):
        return WordClass(False, False, False, False)
    in_s = all((v == d and not u) or (u and v in (0, d)) for v, u in w)
    in_s0 = all((v == d and not u) or (u and v == 0) for v, u in w)
    in_s2 = all(v == d for v, u in w)
    return WordClass(True, in_s, in_s0, in_s2)


def word_shift(d: int, w: Sequence[Symbol]) -> List[Symbol]:
    if len(w) <= 1:
        raise LengthTooShort("cannot shift a word of length <= 1")
    return list(w[1:])


def all_words(d: int, k: int):
    alphabet = [(v, u) for u in (False, True) for v in range(d + 1)]
    return product(alphabet, repeat=k)


def admissible_words(d: int, k: int) -> List[List[Symbol]]:
    return [list(w) for w in all_words(d, k) if is_admissible(d, w)]
