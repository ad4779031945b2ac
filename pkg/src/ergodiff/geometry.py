"""Metric measure structure: balls, ball averages, refining partitions.

Two geometries are supported. The torus arc metric (max metric in dimension
2, so balls are axis-aligned squares and their integrals factor), and the
partition-induced ultrametric in which the distance between points first
separated at level m is 1/(m + 1/2) and every ball is a partition cell.

Radius-to-level bookkeeping for the ultrametric: an open ball of radius r
with 1/(n+1/2) < r <= 1/(n-1/2) is the level-(n-1) cell of its center, so
radii of the form 1/(n+1/2) resolve to the level-n cell and the lossless
radius grid is exactly {1/(n+1/2)}.

All interval cells are half-open [lo, hi); a point on a boundary belongs to
the cell on its right. Points sharing every cell have distance zero and are
geometrically indistinguishable (the metric is a pseudometric by design).
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass

from .errors import DimensionMismatchError, ZeroMeasureBallError
from .observables import CylinderFunction, Observable, TensorProduct
from .systems import (
    CIRCLE_ROTATION,
    DOUBLING,
    IDENTITY,
    SHIFT_BERNOULLI,
    ShiftPoint,
    SystemSpec,
    apply,
    rotation_offset,
)
from .util import csum, mod1

# -- regions ----------------------------------------------------------------


@dataclass(frozen=True)
class ArcRegion:
    """Finite union of disjoint arcs on the circle, each stored (lo, length)."""

    arcs: tuple[tuple[float, float], ...]

    def measure(self) -> float:
        return math.fsum(length for _, length in self.arcs)

    def pieces(self) -> list[tuple[float, float]]:
        """As linear [a, b) windows inside [0, 1), splitting wraparound arcs."""
        out = []
        for lo, length in self.arcs:
            hi = lo + length
            if length >= 1.0:
                out.append((0.0, 1.0))
            elif hi <= 1.0:
                out.append((lo, hi))
            else:
                out.append((lo, 1.0))
                out.append((0.0, hi - 1.0))
        return out

    def contains(self, x: float) -> bool:
        return any((x - lo) % 1.0 < length or length >= 1.0 for lo, length in self.arcs)


@dataclass(frozen=True)
class RectRegion:
    """Product of two arc unions on the 2-torus (max-metric balls are squares)."""

    x_arcs: tuple[tuple[float, float], ...]
    y_arcs: tuple[tuple[float, float], ...]

    def measure(self) -> float:
        return ArcRegion(self.x_arcs).measure() * ArcRegion(self.y_arcs).measure()

    def contains(self, xy) -> bool:
        return ArcRegion(self.x_arcs).contains(xy[0]) and ArcRegion(self.y_arcs).contains(xy[1])


@dataclass(frozen=True)
class CylinderRegion:
    """Cylinder set of a Bernoulli shift: all points extending `prefix`."""

    prefix: tuple[int, ...]
    weights: tuple[float, ...]

    def measure(self) -> float:
        out = 1.0
        for s in self.prefix:
            out *= self.weights[s]
        return out


Region = ArcRegion | RectRegion | CylinderRegion


def region_integral(f: Observable, region: Region) -> complex:
    if isinstance(region, ArcRegion):
        return csum(f.arc_integral(lo, length) for lo, length in region.arcs)
    if isinstance(region, RectRegion):
        if isinstance(f, TensorProduct):
            ix = csum(f.first.arc_integral(lo, ln) for lo, ln in region.x_arcs)
            iy = csum(f.second.arc_integral(lo, ln) for lo, ln in region.y_arcs)
            return ix * iy
        if hasattr(f, "coeffs") and set(getattr(f, "coeffs")) <= {0}:
            return f.coeffs.get(0, 0j) * region.measure()
        raise DimensionMismatchError(
            "2-torus integration supports tensor-product observables only")
    if isinstance(region, CylinderRegion):
        if not isinstance(f, CylinderFunction):
            raise DimensionMismatchError(
                "cylinder integration needs a cylinder-function observable")
        return region.measure() * f.conditional_mean(region.prefix)
    raise TypeError(f"unknown region {region!r}")


def region_average(f: Observable, region: Region) -> complex:
    m = region.measure()
    if m <= 0.0:
        raise ZeroMeasureBallError("region has zero measure")
    return region_integral(f, region) / m


# -- partition sequences ------------------------------------------------------


class PartitionSequence:
    """Refining chain of countable measurable partitions, level 0 = {X}.

    Subclasses fill in `level_count`, `cell_index`, `cell_region`,
    `n_cells`; refinement (every level-(n+1) cell inside one level-n cell)
    is a construction invariant checked by the test suite.
    """

    level_count: int

    def cell_index(self, level: int, x):
        raise NotImplementedError

    def cell_region(self, level: int, index) -> Region:
        raise NotImplementedError

    def n_cells(self, level: int) -> int:
        raise NotImplementedError

    def cell_of(self, level: int, x) -> Region:
        return self.cell_region(level, self.cell_index(level, x))

    def cell_measure(self, level: int, index) -> float:
        return self.cell_region(level, index).measure()

    def _check_level(self, level: int) -> None:
        if not 0 <= level <= self.level_count:
            raise ValueError(f"level {level} outside materialized range "
                             f"0..{self.level_count}")


class DyadicPartition(PartitionSequence):
    """Level n splits the circle into 2^n equal half-open intervals."""

    def __init__(self, levels: int):
        self.level_count = int(levels)

    def cell_index(self, level: int, x) -> int:
        self._check_level(level)
        return int(mod1(float(x)) * (1 << level))

    def cell_region(self, level: int, index: int) -> ArcRegion:
        self._check_level(level)
        width = 1.0 / (1 << level)
        return ArcRegion(((index * width, width),))

    def n_cells(self, level: int) -> int:
        return 1 << level


class IntervalPartition(PartitionSequence):
    """Generic torus partition sequence given per-level interval cells.

    Levels are lists of cells; a cell is a tuple of (lo, length) arcs. An
    elementary-breakpoint index accelerates cell_of lookups.
    """

    def __init__(self, levels_cells: list[list[tuple[tuple[float, float], ...]]]):
        # levels_cells[0] is level 1; level 0 is implicit.
        self._levels = levels_cells
        self.level_count = len(levels_cells)
        self._lookup = []
        for cells in levels_cells:
            bps = []
            owner = []
            for ci, arcs in enumerate(cells):
                for lo, length in arcs:
                    hi = lo + length
                    if hi <= 1.0 + 1e-15:
                        bps.append((lo, ci))
                    else:
                        bps.append((lo, ci))
                        bps.append((0.0, ci))
            bps.sort()
            self._lookup.append(([b for b, _ in bps], [c for _, c in bps]))

    def cell_index(self, level: int, x) -> int:
        self._check_level(level)
        if level == 0:
            return 0
        xs, owners = self._lookup[level - 1]
        x = mod1(float(x))
        i = bisect_right(xs, x) - 1
        if i < 0:
            i = len(owners) - 1
        return owners[i]

    def cell_region(self, level: int, index: int) -> ArcRegion:
        self._check_level(level)
        if level == 0:
            return ArcRegion(((0.0, 1.0),))
        return ArcRegion(tuple(self._levels[level - 1][index]))

    def n_cells(self, level: int) -> int:
        return 1 if level == 0 else len(self._levels[level - 1])


def orbit_pullback_partition(system: SystemSpec, base_breakpoints,
                             levels: int) -> IntervalPartition:
    """The join of T^{-i} applied to a base interval partition, i < n.

    Cells at level n are itinerary classes: points whose orbit visits the
    same base cell at every step i < n. For the interval maps in the catalog
    each class is a finite union of elementary intervals.
    """
    base = sorted(mod1(float(b)) for b in base_breakpoints)
    if not base:
        raise ValueError("base partition needs at least one breakpoint")

    def base_cell(x: float) -> int:
        i = bisect_right(base, x) - 1
        return i if i >= 0 else len(base) - 1

    levels_cells = []
    for n in range(1, levels + 1):
        bps = set()
        for i in range(n):
            bps.update(_preimage_breakpoints(system, base, i))
        elem = sorted(bps)
        groups: dict[tuple[int, ...], list[tuple[float, float]]] = {}
        for j, lo in enumerate(elem):
            hi = elem[j + 1] if j + 1 < len(elem) else elem[0] + 1.0
            if hi - lo <= 0.0:
                continue
            mid = mod1(lo + (hi - lo) / 2.0)
            itin = []
            pt = mid
            for _ in range(n):
                itin.append(base_cell(pt))
                pt = apply(system, pt, 1)
            groups.setdefault(tuple(itin), []).append((lo, hi - lo))
        levels_cells.append([tuple(v) for _, v in sorted(groups.items())])
    return IntervalPartition(levels_cells)


def _preimage_breakpoints(system: SystemSpec, base: list[float], i: int) -> list[float]:
    if i == 0 or system.kind == IDENTITY:
        return list(base)
    if system.kind == CIRCLE_ROTATION:
        off = rotation_offset(system, i)
        return [mod1(b - off) for b in base]
    if system.kind == DOUBLING:
        scale = 1 << i
        return [(b + m) / scale for b in base for m in range(scale)]
    raise DimensionMismatchError(
        f"orbit-pullback partitions unsupported for {system.kind}")


class CylinderPartition(PartitionSequence):
    """Level n of a Bernoulli shift: cylinders on the first n symbols."""

    def __init__(self, system: SystemSpec, levels: int):
        if system.kind != SHIFT_BERNOULLI:
            raise DimensionMismatchError("cylinder partitions need a shift system")
        self.system = system
        self.level_count = int(levels)

    def cell_index(self, level: int, x: ShiftPoint) -> tuple[int, ...]:
        self._check_level(level)
        return x.prefix(level)

    def cell_region(self, level: int, index) -> CylinderRegion:
        self._check_level(level)
        if len(index) != level:
            raise ValueError("cylinder index length must equal the level")
        return CylinderRegion(tuple(index), self.system.weights)

    def n_cells(self, level: int) -> int:
        return self.system.symbol_count ** level


# -- metrics ------------------------------------------------------------------


@dataclass(frozen=True)
class TorusArc:
    dimension: int = 1


@dataclass(frozen=True)
class PartitionUltrametric:
    partitions: PartitionSequence


MetricSpec = TorusArc | PartitionUltrametric


def distance(metric: MetricSpec, x1, x2) -> float:
    if isinstance(metric, TorusArc):
        if metric.dimension == 1:
            d = abs(float(x1) - float(x2)) % 1.0
            return min(d, 1.0 - d)
        ds = []
        for a, b in zip(x1, x2):
            d = abs(float(a) - float(b)) % 1.0
            ds.append(min(d, 1.0 - d))
        return max(ds)
    parts = metric.partitions
    for level in range(1, parts.level_count + 1):
        if parts.cell_index(level, x1) != parts.cell_index(level, x2):
            return 1.0 / (level + 0.5)
    # Agreement through the materialized horizon: pseudometric distance 0.
    return 0.0


def level_for_radius(r: float, max_level: int) -> int:
    """Cell level of the open r-ball: 1/(n+1/2) < r <= 1/(n-1/2) -> n-1.

    The 1e-9 nudge keeps radii of the exact form 1/(n+1/2) on the deep side
    of their window despite float division noise.
    """
    if r <= 0.0:
        raise ValueError("radius must be positive")
    raw = math.floor(1.0 / r + 0.5 + 1e-9) - 1
    if raw > max_level:
        raise ValueError(f"radius {r} below the resolution of the "
                         f"{max_level}-level partition sequence")
    return max(0, raw)


def radius_for_level(level: int) -> float:
    return 1.0 / (level + 0.5)


def ball(metric: MetricSpec, x, r: float) -> Region:
    if r <= 0.0:
        raise ValueError("radius must be positive")
    if isinstance(metric, TorusArc):
        if r >= 0.5:
            full = ((0.0, 1.0),)
            return ArcRegion(full) if metric.dimension == 1 else RectRegion(full, full)
        if metric.dimension == 1:
            return ArcRegion(((mod1(float(x) - r), 2.0 * r),))
        return RectRegion(((mod1(float(x[0]) - r), 2.0 * r),),
                          ((mod1(float(x[1]) - r), 2.0 * r),))
    parts = metric.partitions
    return parts.cell_of(level_for_radius(r, parts.level_count), x)


def ball_measure(metric: MetricSpec, region: Region) -> float:
    m = region.measure()
    if m <= 0.0:
        raise ZeroMeasureBallError("ball or cell has zero measure")
    return m


def ball_average(metric: MetricSpec, f: Observable, x, r: float) -> complex:
    return region_average(f, ball(metric, x, r))


def conditional_expectation(partitions: PartitionSequence, f: Observable,
                            level: int, x) -> complex:
    """E[f | P^(level)](x): the cell average at x.

    Coincides with the ultrametric ball average at radius 1/(level + 1/2),
    which is the identification the martingale theorem runs on.
    """
    return region_average(f, partitions.cell_of(level, x))
