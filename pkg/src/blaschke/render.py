"""Basin classification of the dynamical plane and tongue scans of the
parameter plane, with deterministic PPM / CSV / JSON export."""

import enum
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .circle import (CircleCycle, CircleLift, _attempt_lock, critical_angles,
                     cycles_with_rotation, is_adjacent, rotation_interval)
from .errors import Inconclusive
from .mapcore import MapParams, RegionClass, classify_region, evaluate_array

R_IN = 1e-4
R_OUT = 1e4
CYCLE_RADIUS = 1e-6
CYCLE_Q_MAX = 8

# class codes stored in the raster
UNDECIDED, TO_ZERO, TO_INFINITY, CYCLE_BASE = 0, 1, 2, 3

ZERO_RGB = (30, 30, 160)
INFINITY_RGB = (160, 30, 30)
UNDECIDED_RGB = (0, 0, 0)
CYCLE_PALETTE = [
    (230, 200, 40), (40, 180, 90), (220, 120, 30), (150, 70, 190),
    (40, 190, 200), (210, 80, 150), (130, 200, 60), (240, 240, 240),
]


@dataclass(frozen=True)
class Viewport:
    x_min: float
    x_max: float
    y_min: float
    y_max: float
    width: int
    height: int

    def __post_init__(self):
        if not (self.x_min < self.x_max and self.y_min < self.y_max):
            raise ValueError("degenerate viewport")
        if self.width < 1 or self.height < 1:
            raise ValueError("width and height must be positive")

    def row_points(self, i: int) -> np.ndarray:
        """Pixel centres of row i (row 0 is the y_max side)."""
        dx = (self.x_max - self.x_min) / self.width
        dy = (self.y_max - self.y_min) / self.height
        xs = self.x_min + (np.arange(self.width) + 0.5) * dx
        y = self.y_max - (i + 0.5) * dy
        return xs + 1j * y

    def pixel_center(self, i: int, j: int) -> complex:
        return complex(self.row_points(i)[j])


class BasinKind(enum.Enum):
    ToZero = "ToZero"
    ToInfinity = "ToInfinity"
    ToCircleCycle = "ToCircleCycle"
    Undecided = "Undecided"


@dataclass(frozen=True)
class BasinClass:
    kind: BasinKind
    cycle_id: Optional[int] = None

    @classmethod
    def from_code(cls, code: int) -> "BasinClass":
        if code == TO_ZERO:
            return cls(BasinKind.ToZero)
        if code == TO_INFINITY:
            return cls(BasinKind.ToInfinity)
        if code >= CYCLE_BASE:
            return cls(BasinKind.ToCircleCycle, int(code) - CYCLE_BASE)
        return cls(BasinKind.Undecided)


def cycle_table(params: MapParams, q_max: int = CYCLE_Q_MAX) -> List[CircleCycle]:
    """Non-repelling circle cycles with period <= q_max, in a fixed order."""
    if params.r <= 1.0:
        return []
    L = CircleLift.from_params(params)
    table: List[CircleCycle] = []
    for q in range(1, q_max + 1):
        for p in range(q):
            if q > 1 and math.gcd(p, q) != 1:
                continue
            for cyc in cycles_with_rotation(L, p, q):
                if cyc.non_repelling:
                    table.append(cyc)
    return table


_default_table = cycle_table


def classify_array(params: MapParams, z: np.ndarray, budget: int,
                   r_in: float = R_IN, R_out: float = R_OUT,
                   table: Sequence[CircleCycle] = ()) -> np.ndarray:
    """Class codes for an array of starting points (see BasinClass)."""
    if not 0 < r_in < 1 < R_out:
        raise ValueError("need 0 < r_in < 1 < R_out")
    if budget < 100:
        raise ValueError("budget must be >= 100")
    z = np.array(z, dtype=complex).ravel()
    code = np.zeros(z.size, dtype=np.int16)
    targets = [np.array(c.plane_points(params)) for c in table]
    need = [c.q * c.q for c in table]
    streak = np.zeros((len(table), z.size), dtype=np.int32)
    idx = np.arange(z.size)

    with np.errstate(all="ignore"):
        for step in range(budget + 1):
            if step:
                z = evaluate_array(params, z)
            mod = np.abs(z)
            bad = ~np.isfinite(z)
            esc_inf = bad | (mod > R_out)
            esc_zero = ~esc_inf & (mod < r_in)
            code[idx[esc_inf]] = TO_INFINITY
            code[idx[esc_zero]] = TO_ZERO
            done = esc_inf | esc_zero
            for k, pts in enumerate(targets):
                near = np.min(np.abs(z[:, None] - pts[None, :]), axis=1) <= CYCLE_RADIUS
                s = np.where(near & ~done, streak[k] + 1, 0)
                streak[k] = s
                hit = (s >= need[k]) & ~done
                code[idx[hit]] = CYCLE_BASE + k
                done |= hit
            if done.any():
                keep = ~done
                z, idx = z[keep], idx[keep]
                streak = streak[:, keep]
            if z.size == 0:
                break
    return code


def classify_point(params: MapParams, z: complex, budget: int = 500,
                   r_in: float = R_IN, R_out: float = R_OUT,
                   cycle_table: Optional[Sequence[CircleCycle]] = None) -> BasinClass:
    if cycle_table is None:
        cycle_table = _default_table(params)
    code = classify_array(params, np.array([z]), budget, r_in, R_out, cycle_table)
    return BasinClass.from_code(int(code[0]))


@dataclass
class Raster:
    params: MapParams
    viewport: Viewport
    classes: np.ndarray  # int16 codes, shape (height, width)
    cycles: List[CircleCycle]
    budget: int
    r_in: float = R_IN
    R_out: float = R_OUT

    def counts(self) -> dict:
        vals, cnt = np.unique(self.classes, return_counts=True)
        out = {}
        for v, c in zip(vals, cnt):
            b = BasinClass.from_code(int(v))
            key = b.kind.value if b.cycle_id is None else f"ToCircleCycle[{b.cycle_id}]"
            out[key] = int(c)
        return out

    def rgb(self) -> np.ndarray:
        lut = np.zeros((CYCLE_BASE + max(len(self.cycles), 1), 3), dtype=np.uint8)
        lut[UNDECIDED] = UNDECIDED_RGB
        lut[TO_ZERO] = ZERO_RGB
        lut[TO_INFINITY] = INFINITY_RGB
        for k in range(len(self.cycles)):
            lut[CYCLE_BASE + k] = CYCLE_PALETTE[k % len(CYCLE_PALETTE)]
        return lut[self.classes]

    def to_ppm(self) -> bytes:
        vp = self.viewport
        header = f"P6\n{vp.width} {vp.height}\n255\n".encode("ascii")
        return header + self.rgb().tobytes()


def write_ppm(raster: Raster, path) -> None:
    with open(path, "wb") as fh:
        fh.write(raster.to_ppm())


def _map_rows(fn, n_rows, workers):
    # each row is an independent task writing its own slot
    if workers is None or workers <= 1:
        return [fn(i) for i in range(n_rows)]
    with ThreadPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, range(n_rows)))


def render_dynamical_plane(params: MapParams, vp: Viewport, budget: int = 500,
                           r_in: float = R_IN, R_out: float = R_OUT,
                           workers: int = 1) -> Raster:
    table = cycle_table(params)
    rows = _map_rows(
        lambda i: classify_array(params, vp.row_points(i), budget, r_in, R_out, table),
        vp.height, workers)
    return Raster(params, vp, np.vstack(rows).astype(np.int16), table, budget, r_in, R_out)


# -- parameter plane ---------------------------------------------------------

@dataclass
class ScanCell:
    r: float
    alpha: float
    region: RegionClass
    rho_lo: float
    rho_hi: float
    lock: Optional[Fraction] = None
    adjacent: Optional[str] = None  # "true", "false", "inconclusive" or None

    def row(self) -> dict:
        return {
            "r": self.r,
            "alpha": self.alpha,
            "region": self.region.value,
            "rho_lo": self.rho_lo,
            "rho_hi": self.rho_hi,
            "lock_p": None if self.lock is None else self.lock.numerator,
            "lock_q": None if self.lock is None else self.lock.denominator,
            "adjacent": self.adjacent,
        }


SCAN_FIELDS = ["r", "alpha", "region", "rho_lo", "rho_hi", "lock_p", "lock_q", "adjacent"]


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return f"{v:.17g}"
    return str(v)


@dataclass
class ScanGrid:
    d: int
    r_range: Tuple[float, float]
    alpha_range: Tuple[float, float]
    resolution: Tuple[int, int]
    q_max: int
    cells: List[ScanCell] = field(default_factory=list)

    def cell(self, i: int, j: int) -> ScanCell:
        return self.cells[i * self.resolution[1] + j]

    def to_csv(self) -> str:
        lines = [",".join(SCAN_FIELDS)]
        for c in self.cells:
            row = c.row()
            lines.append(",".join(_fmt(row[k]) for k in SCAN_FIELDS))
        return "\n".join(lines) + "\n"

    def to_json(self) -> str:
        doc = {
            "d": self.d,
            "r_range": list(self.r_range),
            "alpha_range": list(self.alpha_range),
            "resolution": list(self.resolution),
            "q_max": self.q_max,
            "cells": [c.row() for c in self.cells],
        }
        return json.dumps(doc, indent=1)


def _row_rotation(d, r, alphas, x0, n_iter, burn_in=0):
    """Lift averages over n_iter steps after burn_in steps from x0, for
    every alpha of one r row at once."""
    x = np.full(alphas.size, float(x0))
    shift = 2 * d * alphas
    start = x
    for k in range(burn_in + n_iter):
        if k == burn_in:
            start = x.copy()
        t = 2 * math.pi * x
        x = x + shift - (d / math.pi) * np.arctan2(np.sin(t), r - np.cos(t))
    return (x - start) / n_iter


def _pick_lock(L, ests, err, q_max):
    """Lock shared by the critical orbits. If they lock differently, the
    cycle with the stronger per-step contraction |m|^(1/q) wins, then the
    smaller period; both keys commute with the mirror alpha -> -alpha."""
    found = []
    for e in ests:
        lock, _ = _attempt_lock(L, float(e), err, q_max)
        if lock is not None and lock not in found:
            found.append(lock)
    if len(found) <= 1:
        return found[0] if found else None

    def key(f):
        cyc = [c for c in cycles_with_rotation(L, f.numerator, f.denominator)
               if c.non_repelling]
        rate = min((abs(c.multiplier) for c in cyc), default=math.inf) ** (1 / f.denominator)
        return (rate, f.denominator)
    return min(found, key=key)


def _scan_row(d, r, alphas, q_max, n_iter, burn_in):
    region = classify_region(MapParams.from_polar(d, r, 0.0))
    cells = []
    if region is RegionClass.TrivialDisk:
        return [ScanCell(r, float(al), region, math.nan, math.nan) for al in alphas]
    err = 2.0 / n_iter
    if region is RegionClass.Endomorphism:
        # the critical orbits carry the attracting cycles when there are any
        starts = critical_angles(CircleLift(d, r, 0.0))
        ests = [_row_rotation(d, r, alphas, x0, n_iter, burn_in) for x0 in starts]
    else:
        ests = [_row_rotation(d, r, alphas, 0.0, n_iter)]
    for j, al in enumerate(alphas):
        L = CircleLift(d, r, float(al))
        e = [est[j] for est in ests]
        lock = _pick_lock(L, e, err, q_max) if q_max > 0 else None
        lo = hi = float(e[0])
        adjacent = None
        if region is RegionClass.Endomorphism:
            iv = rotation_interval(L)
            lo, hi = iv.lo.lift_value, iv.hi.lift_value
            if lock is not None:
                try:
                    adjacent = "true" if is_adjacent(L.params(), lock.numerator,
                                                     lock.denominator) else "false"
                except Inconclusive:
                    adjacent = "inconclusive"
        cells.append(ScanCell(r, float(al), region, lo, hi, lock, adjacent))
    return cells


def scan_tongues(d: int, r_range, alpha_range, res, q_max: int = 4,
                 n_iter: int = 2000, workers: int = 1,
                 burn_in: int = 1000) -> ScanGrid:
    """Rotation data on a grid of cell centres; rows run over r, columns over alpha."""
    r0, r1 = map(float, r_range)
    a0, a1 = map(float, alpha_range)
    n_r, n_a = int(res[0]), int(res[1])
    if not (r0 < r1 and a0 < a1 and n_r > 0 and n_a > 0):
        raise ValueError("empty scan range")
    half = 1.0 / (4 * d)
    if a0 < -half - 1e-15 or a1 > half + 1e-15:
        raise ValueError(f"alpha range must lie in [-{half}, {half}]")
    rs = r0 + (np.arange(n_r) + 0.5) * (r1 - r0) / n_r
    alphas = a0 + (np.arange(n_a) + 0.5) * (a1 - a0) / n_a
    rows = _map_rows(lambda i: _scan_row(d, float(rs[i]), alphas, q_max, n_iter, burn_in),
                     n_r, workers)
    grid = ScanGrid(d, (r0, r1), (a0, a1), (n_r, n_a), q_max)
    for row in rows:
        grid.cells += row
    return grid
