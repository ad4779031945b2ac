"""Test-function classes with exact pointwise evaluation and exact integration.

All observables are complex-valued; real ones are complex with zero imaginary
part (the eigenfunctions e^{2 pi i m x} force the complex base case). The
one-dimensional classes live on the circle R/Z, and every interval is stored
as (lo, length) with length in (0, 1] so wraparound arcs are first-class.

Each 1-d class supplies ``arc_integral`` in closed form; the adaptive
quadrature in :mod:`ergodiff.quadrature` is used only as the independent
cross-check route (``quadrature_mean``) and for p-norms with no closed form.
"""

from __future__ import annotations

import math
from bisect import bisect_right

import numpy as np

from . import quadrature
from .errors import (
    DimensionMismatchError,
    DivergenceError,
    NotInLpError,
    SingularPointError,
)
from .util import TWO_PI, arc_distance, cis, cis_freq, csum, mod1

# Frequencies with more bits than this contribute < 1e-290 to any arc integral
# (the antiderivative carries a 1/(2 pi m) factor); treat them as zero.
_FREQ_BIT_CUTOFF = 980


class Observable:
    """Base class; concrete kinds override the closed-form hooks."""

    is_symbolic = False

    def __call__(self, x) -> complex:
        raise NotImplementedError

    def values(self, xs: np.ndarray) -> np.ndarray:
        return np.array([self(float(x)) for x in np.asarray(xs).ravel()]).reshape(np.shape(xs))

    def arc_integral(self, lo: float, length: float) -> complex:
        """Integral over the arc [lo, lo+length) of the circle, length in (0, 1]."""
        raise NotImplementedError

    def prefix_integral(self, u: float) -> complex:
        """Integral over [0, u), u in [0, 1]."""
        if u <= 0.0:
            return 0j
        return self.arc_integral(0.0, min(u, 1.0))

    def mean(self) -> complex:
        return self.arc_integral(0.0, 1.0)

    def p_norm(self, p: float) -> float:
        raise NotImplementedError

    def sup_norm(self) -> float:
        raise NotImplementedError

    def translate(self, delta: float) -> "Observable":
        """The observable x -> f(x + delta)."""
        raise NotImplementedError


class FourierPoly(Observable):
    """Finite trigonometric polynomial sum_m c_m e^{2 pi i m x}.

    Frequencies are arbitrary Python integers: pulling back under the doubling
    map multiplies frequencies by 2^j, and those products must stay exact.
    """

    def __init__(self, coeffs):
        self.coeffs = {int(m): complex(c) for m, c in dict(coeffs).items()
                       if complex(c) != 0}

    def __repr__(self):
        return f"FourierPoly({self.coeffs!r})"

    def __call__(self, x) -> complex:
        x = float(x)
        total = 0j
        for m, c in self.coeffs.items():
            if m == 0:
                total += c
            elif abs(m) < (1 << 20):
                total += c * cis(mod1(m * x))
            else:
                total += c * cis_freq(m, x)
        return total

    def values(self, xs: np.ndarray) -> np.ndarray:
        xs = np.asarray(xs, dtype=np.float64)
        if any(abs(m) >= (1 << 20) for m in self.coeffs):
            return super().values(xs)
        total = np.zeros(xs.shape, dtype=np.complex128)
        for m, c in self.coeffs.items():
            total += c * np.exp(2j * np.pi * ((m * xs) % 1.0))
        return total

    def arc_integral(self, lo: float, length: float) -> complex:
        terms = []
        hi = lo + length
        for m, c in self.coeffs.items():
            if m == 0:
                terms.append(c * length)
            elif abs(m).bit_length() > _FREQ_BIT_CUTOFF:
                continue
            else:
                # Exact mod-1 phase reduction keeps full-period integrals at
                # exactly zero even for astronomically large m.
                terms.append(c * (cis_freq(m, hi) - cis_freq(m, lo)) / (2j * math.pi * m))
        return csum(terms)

    def p_norm(self, p: float) -> float:
        if p == 2:
            return math.sqrt(math.fsum(abs(c) ** 2 for c in self.coeffs.values()))
        val = quadrature.integrate(lambda t: abs(self(t)) ** p, 0.0, 1.0, rel_tol=1e-10)
        return val.real ** (1.0 / p)

    def sup_norm(self) -> float:
        if not self.coeffs:
            return 0.0
        if set(self.coeffs) == {0}:
            return abs(self.coeffs[0])
        deg = max(abs(m) for m in self.coeffs)
        n = min(1 << 17, 4096 * max(1, deg))
        grid = np.arange(n) / n
        return float(np.max(np.abs(self.values(grid))))

    def translate(self, delta: float) -> "FourierPoly":
        return FourierPoly({m: c * cis_freq(m, delta) for m, c in self.coeffs.items()})

    def scale_frequency(self, n: int) -> "FourierPoly":
        """The observable x -> f(n x), i.e. frequency m becomes n*m."""
        out: dict[int, complex] = {}
        for m, c in self.coeffs.items():
            out[m * n] = out.get(m * n, 0j) + c
        return FourierPoly(out)

    def __add__(self, other):
        if isinstance(other, FourierPoly):
            out = dict(self.coeffs)
            for m, c in other.coeffs.items():
                out[m] = out.get(m, 0j) + c
            return FourierPoly(out)
        return NotImplemented

    def __sub__(self, other):
        if isinstance(other, FourierPoly):
            return self + (-1.0) * other
        return NotImplemented

    def __mul__(self, scalar):
        if isinstance(scalar, (int, float, complex)):
            return FourierPoly({m: c * scalar for m, c in self.coeffs.items()})
        return NotImplemented

    __rmul__ = __mul__


def constant(c) -> FourierPoly:
    return FourierPoly({0: c})


def harmonic(m: int) -> FourierPoly:
    """e^{2 pi i m x}."""
    return FourierPoly({m: 1.0})


def cosine(m: int, amplitude=1.0) -> FourierPoly:
    return FourierPoly({m: amplitude / 2.0, -m: amplitude / 2.0})


def sine(m: int, amplitude=1.0) -> FourierPoly:
    return FourierPoly({m: amplitude / 2j, -m: -amplitude / 2j})


class PiecewiseConstant(Observable):
    """Step function on the circle; values[i] holds on [bp[i], bp[i+1]) cyclically."""

    def __init__(self, breakpoints, values):
        bps = tuple(float(b) for b in breakpoints)
        if len(bps) != len(values) or not bps:
            raise ValueError("need one value per breakpoint")
        if any(not (0.0 <= b < 1.0) for b in bps) or list(bps) != sorted(set(bps)):
            raise ValueError("breakpoints must be strictly sorted within [0, 1)")
        self.breakpoints = bps
        self.vals = tuple(complex(v) for v in values)

    def __repr__(self):
        return f"PiecewiseConstant({self.breakpoints!r}, {self.vals!r})"

    def _segments(self):
        """Linear [a, b) segments covering [0, 1) with their values."""
        bps, vals = self.breakpoints, self.vals
        segs = []
        if bps[0] > 0.0:
            segs.append((0.0, bps[0], vals[-1]))
        for i in range(len(bps) - 1):
            segs.append((bps[i], bps[i + 1], vals[i]))
        segs.append((bps[-1], 1.0, vals[-1]))
        return segs

    def __call__(self, x) -> complex:
        x = mod1(float(x))
        i = bisect_right(self.breakpoints, x) - 1
        return self.vals[i] if i >= 0 else self.vals[-1]

    def values(self, xs: np.ndarray) -> np.ndarray:
        xs = np.asarray(xs, dtype=np.float64) % 1.0
        idx = np.searchsorted(self.breakpoints, xs, side="right") - 1
        table = np.asarray(self.vals + (self.vals[-1],), dtype=np.complex128)
        return table[idx]

    def arc_integral(self, lo: float, length: float) -> complex:
        total = []
        for a, b in _split_arc(lo, length):
            for s0, s1, v in self._segments():
                ov = min(b, s1) - max(a, s0)
                if ov > 0.0:
                    total.append(v * ov)
        return csum(total)

    def mean(self) -> complex:
        return csum(v * (s1 - s0) for s0, s1, v in self._segments())

    def p_norm(self, p: float) -> float:
        return math.fsum(abs(v) ** p * (s1 - s0) for s0, s1, v in self._segments()) ** (1.0 / p)

    def sup_norm(self) -> float:
        return max(abs(v) for v in self.vals)

    def translate(self, delta: float) -> "PiecewiseConstant":
        pairs = sorted((mod1(b - delta), v) for b, v in zip(self.breakpoints, self.vals))
        merged_bps, merged_vals = [], []
        for b, v in pairs:
            if merged_bps and b - merged_bps[-1] < 1e-15:
                continue
            merged_bps.append(b)
            merged_vals.append(v)
        return PiecewiseConstant(merged_bps, merged_vals)

    def abs(self) -> "PiecewiseConstant":
        return PiecewiseConstant(self.breakpoints, tuple(abs(v) for v in self.vals))

    def __add__(self, other):
        if isinstance(other, IndicatorInterval):
            other = other.as_piecewise()
        if not isinstance(other, PiecewiseConstant):
            return NotImplemented
        bps = sorted(set(self.breakpoints) | set(other.breakpoints))
        return PiecewiseConstant(bps, [self(b) + other(b) for b in bps])

    def __mul__(self, scalar):
        if isinstance(scalar, (int, float, complex)):
            return PiecewiseConstant(self.breakpoints, tuple(v * scalar for v in self.vals))
        return NotImplemented

    __rmul__ = __mul__


class IndicatorInterval(Observable):
    """Indicator of the arc [lo, lo+length); wraparound arcs allowed."""

    def __init__(self, lo: float, hi: float):
        self.lo = mod1(float(lo))
        ln = (float(hi) - float(lo)) % 1.0
        if ln == 0.0:
            if hi == lo:
                raise ValueError("empty indicator interval")
            ln = 1.0  # [x, x+1) is the whole circle
        self.length = ln

    @classmethod
    def from_arc(cls, lo: float, length: float) -> "IndicatorInterval":
        obj = cls.__new__(cls)
        obj.lo = mod1(lo)
        obj.length = float(length)
        return obj

    def __repr__(self):
        return f"IndicatorInterval(lo={self.lo!r}, length={self.length!r})"

    def __call__(self, x) -> complex:
        return complex((float(x) - self.lo) % 1.0 < self.length)

    def values(self, xs: np.ndarray) -> np.ndarray:
        xs = np.asarray(xs, dtype=np.float64)
        return (((xs - self.lo) % 1.0) < self.length).astype(np.complex128)

    def arc_integral(self, lo: float, length: float) -> complex:
        return complex(arc_overlap(self.lo, self.length, lo, length))

    def mean(self) -> complex:
        return complex(self.length)

    def p_norm(self, p: float) -> float:
        return self.length ** (1.0 / p)

    def sup_norm(self) -> float:
        return 1.0

    def translate(self, delta: float) -> "IndicatorInterval":
        return IndicatorInterval.from_arc(mod1(self.lo - delta), self.length)

    def as_piecewise(self) -> PiecewiseConstant:
        hi = self.lo + self.length
        if self.length >= 1.0:
            return PiecewiseConstant((0.0,), (1.0,))
        if hi <= 1.0:
            bps = sorted({0.0, self.lo, mod1(hi)})
            return PiecewiseConstant(bps, [complex(self(b)) for b in bps])
        bps = sorted({0.0, mod1(hi), self.lo})
        return PiecewiseConstant(bps, [complex(self(b)) for b in bps])


class PowerSingularity(Observable):
    """f(x) = d(x, center)^(-a) with the arc metric; a in (0, 1).

    The designated L^p-minus-L^infty stress case: f is in L^p iff a*p < 1.
    """

    def __init__(self, exponent: float, center: float = 0.0):
        if not 0.0 < exponent < 1.0:
            raise ValueError("exponent must lie in (0, 1)")
        self.exponent = float(exponent)
        self.center = mod1(float(center))

    def __repr__(self):
        return f"PowerSingularity(exponent={self.exponent!r}, center={self.center!r})"

    def __call__(self, x) -> complex:
        d = arc_distance(float(x), self.center)
        if d == 0.0:
            raise SingularPointError(x)
        return complex(d ** (-self.exponent))

    def values(self, xs: np.ndarray) -> np.ndarray:
        xs = np.asarray(xs, dtype=np.float64)
        d = np.abs(((xs - self.center + 0.5) % 1.0) - 0.5)
        if np.any(d == 0.0):
            raise SingularPointError(xs)
        return (d ** (-self.exponent)).astype(np.complex128)

    def in_lp(self, p: float) -> bool:
        return self.exponent * p < 1.0

    def arc_integral(self, lo: float, length: float) -> complex:
        p = lo - self.center
        return complex(_triangle_power_prefix(p + length, self.exponent)
                       - _triangle_power_prefix(p, self.exponent))

    def mean(self) -> complex:
        return complex(2.0 * _power_antideriv(0.5, self.exponent))

    def p_norm(self, p: float) -> float:
        if not self.in_lp(p):
            raise NotInLpError(f"d^(-{self.exponent}) is not in L^{p}")
        return (2.0 * _power_antideriv(0.5, self.exponent * p)) ** (1.0 / p)

    def sup_norm(self) -> float:
        return math.inf

    def translate(self, delta: float) -> "PowerSingularity":
        return PowerSingularity(self.exponent, mod1(self.center - delta))


def _power_antideriv(t: float, e: float) -> float:
    """F(t) = integral_0^t s^(-e) ds = t^(1-e)/(1-e); diverges for e >= 1."""
    if e >= 1.0:
        raise DivergenceError(f"integral of s^(-{e}) diverges at 0")
    return t ** (1.0 - e) / (1.0 - e)


def _triangle_power_prefix(t: float, e: float) -> float:
    """integral_0^t tri(u)^(-e) du where tri(u) = dist(u, Z), for any real t."""
    if t < 0.0:
        return -_triangle_power_prefix(-t, e)
    full = math.floor(t)
    frac = t - full
    per = 2.0 * _power_antideriv(0.5, e)
    if frac <= 0.5:
        part = _power_antideriv(frac, e)
    else:
        part = per - _power_antideriv(1.0 - frac, e)
    return full * per + part


class ScaledObservable(Observable):
    """scalar * base, for kinds without their own closed algebra."""

    def __init__(self, base: Observable, scalar):
        self.base = base
        self.scalar = complex(scalar)

    def __call__(self, x):
        return self.scalar * self.base(x)

    def values(self, xs):
        return self.scalar * self.base.values(xs)

    def arc_integral(self, lo, length):
        return self.scalar * self.base.arc_integral(lo, length)

    def p_norm(self, p):
        return abs(self.scalar) * self.base.p_norm(p)

    def sup_norm(self):
        return abs(self.scalar) * self.base.sup_norm()

    def translate(self, delta):
        return ScaledObservable(self.base.translate(delta), self.scalar)


class TensorProduct(Observable):
    """f(x, y) = first(x) * second(y) on the 2-torus."""

    def __init__(self, first: Observable, second: Observable):
        self.first = first
        self.second = second

    def __repr__(self):
        return f"TensorProduct({self.first!r}, {self.second!r})"

    def __call__(self, xy) -> complex:
        x, y = xy
        return self.first(x) * self.second(y)

    def mean(self) -> complex:
        return self.first.mean() * self.second.mean()

    def p_norm(self, p: float) -> float:
        return self.first.p_norm(p) * self.second.p_norm(p)

    def sup_norm(self) -> float:
        return self.first.sup_norm() * self.second.sup_norm()

    def translate_first(self, delta: float) -> "TensorProduct":
        return TensorProduct(self.first.translate(delta), self.second)

    def integrate_axis(self, lo: float, length: float, axis: int) -> Observable:
        """Partial integral over one axis; returns the remaining 1-d factor."""
        if axis == 0:
            return ScaledObservable(self.second, self.first.arc_integral(lo, length))
        if axis == 1:
            return ScaledObservable(self.first, self.second.arc_integral(lo, length))
        raise DimensionMismatchError(f"tensor product has axes 0 and 1, not {axis}")


class CylinderFunction(Observable):
    """Function of the first `depth` symbols of a Bernoulli-shift point.

    The only observable kind evaluable on symbolic points; integrals over
    cylinder sets are finite weighted sums, hence exact.
    """

    is_symbolic = True

    def __init__(self, symbol_count: int, weights, table):
        self.symbol_count = int(symbol_count)
        self.weights = tuple(float(w) for w in weights)
        self.table = {tuple(k): complex(v) for k, v in dict(table).items()}
        depths = {len(k) for k in self.table}
        if len(depths) != 1:
            raise ValueError("all table keys must share one depth")
        self.depth = depths.pop()
        if len(self.table) != self.symbol_count ** self.depth:
            raise ValueError("table must cover every word of the given depth")

    def __call__(self, point) -> complex:
        word = point.prefix(self.depth)
        return self.table[word]

    def word_weight(self, word) -> float:
        out = 1.0
        for s in word:
            out *= self.weights[s]
        return out

    def mean(self) -> complex:
        return csum(v * self.word_weight(w) for w, v in self.table.items())

    def conditional_mean(self, prefix, offset: int = 0) -> complex:
        """E[f(shift^offset omega) | omega starts with prefix]."""
        window = range(offset, offset + self.depth)
        total = []
        for w, v in self.table.items():
            weight = 1.0
            ok = True
            for pos, sym in zip(window, w):
                if pos < len(prefix):
                    if prefix[pos] != sym:
                        ok = False
                        break
                else:
                    weight *= self.weights[sym]
            if ok:
                total.append(v * weight)
        return csum(total)

    def p_norm(self, p: float) -> float:
        return math.fsum(abs(v) ** p * self.word_weight(w)
                         for w, v in self.table.items()) ** (1.0 / p)

    def sup_norm(self) -> float:
        return max(abs(v) for v in self.table.values())


def _split_arc(lo: float, length: float):
    """Arc (lo, length) as one or two linear [a, b) windows inside [0, 1)."""
    lo = mod1(lo)
    if length >= 1.0:
        return ((0.0, 1.0),)
    hi = lo + length
    if hi <= 1.0:
        return ((lo, hi),)
    return ((lo, 1.0), (0.0, hi - 1.0))


def arc_overlap(lo1: float, len1: float, lo2: float, len2: float) -> float:
    """Length of the intersection of two circle arcs."""
    total = 0.0
    for a1, b1 in _split_arc(lo1, len1):
        for a2, b2 in _split_arc(lo2, len2):
            total += max(0.0, min(b1, b2) - max(a1, a2))
    return total


# -- spec-facing operation names ------------------------------------------

def evaluate(f: Observable, x) -> complex:
    """Pointwise evaluation; raises SingularPointError at a singular center."""
    return f(x)


def integrate_interval(f: Observable, lo: float, hi: float, axis: int | None = None):
    """Integral of f over [lo, hi); hi < lo is read as wrapping across 0.

    For TensorProduct observables the axis must be named and the result is
    the partially integrated 1-d factor.
    """
    if isinstance(f, TensorProduct):
        if axis is None:
            raise DimensionMismatchError("tensor product integration needs an axis")
        lo, length = _arc_from_pair(lo, hi)
        return f.integrate_axis(lo, length, axis)
    lo, length = _arc_from_pair(lo, hi)
    return f.arc_integral(lo, length)


def _arc_from_pair(lo: float, hi: float) -> tuple[float, float]:
    if hi > lo:
        return mod1(lo), min(hi - lo, 1.0)
    if hi < lo:
        return mod1(lo), (hi - lo) % 1.0
    return mod1(lo), 0.0


def p_norm(f: Observable, p: float) -> float:
    if p < 1:
        raise ValueError("p-norms need p >= 1")
    return f.p_norm(p)


def mean(f: Observable) -> complex:
    return f.mean()


def quadrature_mean(f: Observable, rel_tol: float = 1e-10) -> complex:
    """Mean via adaptive quadrature: the independent route for closed forms.

    Splits at a PowerSingularity center, integrating the closed-form
    antiderivative on a small symmetric window around it.
    """
    if isinstance(f, TensorProduct):
        return quadrature_mean(f.first, rel_tol) * quadrature_mean(f.second, rel_tol)
    if isinstance(f, CylinderFunction):
        return f.mean()
    if isinstance(f, PowerSingularity):
        w = 1e-4
        inner = 2.0 * _power_antideriv(w, f.exponent)
        c = f.center
        outer = quadrature.integrate(lambda t: f(c + t), w, 0.5, rel_tol=rel_tol) \
            + quadrature.integrate(lambda t: f(c - t), w, 0.5, rel_tol=rel_tol)
        return complex(inner + outer)
    if isinstance(f, PiecewiseConstant):
        parts = [quadrature.integrate(f, s0, s1, rel_tol=rel_tol)
                 for s0, s1, _ in f._segments()]
        return csum(parts)
    if isinstance(f, IndicatorInterval):
        return quadrature_mean(f.as_piecewise(), rel_tol)
    return quadrature.integrate(f, 0.0, 1.0, rel_tol=rel_tol)
