"""Shared numeric helpers: mod-1 arithmetic, exact unit-circle phases, sums."""

from __future__ import annotations

import math
from fractions import Fraction

TWO_PI = 2.0 * math.pi

# Values this close to 1.0 snap to 0.0 so that cell/ball membership decisions
# never straddle the wrap point.
_WRAP_SNAP = 1e-15


def mod1(x: float) -> float:
    """Canonical representative of x mod 1 in [0, 1)."""
    y = x - math.floor(x)
    if y >= 1.0 or 1.0 - y < _WRAP_SNAP:
        return 0.0
    return y


def mod1_frac(x: Fraction) -> Fraction:
    return x - math.floor(x)


def cis(turns: float) -> complex:
    """e^{2 pi i t} with t measured in turns (fractions of a full circle)."""
    return complex(math.cos(TWO_PI * turns), math.sin(TWO_PI * turns))


def cis_freq(freq: int, x: float) -> complex:
    """e^{2 pi i freq x} with the phase reduced mod 1 in exact rational arithmetic.

    Floats are dyadic rationals, so `freq * Fraction(x)` is exact even when the
    product overflows the 53-bit mantissa; reducing before converting back to
    float keeps high-frequency phases meaningful.
    """
    ph = Fraction(x) * freq
    return cis(float(ph - math.floor(ph)))


def csum(values) -> complex:
    """Correctly rounded complex sum (math.fsum per component).

    Order-independent for a fixed multiset of terms, which is what the
    reproducibility contract needs from scalar reductions.
    """
    vs = [complex(v) for v in values]
    return complex(math.fsum(v.real for v in vs), math.fsum(v.imag for v in vs))


def arc_distance(x: float, c: float) -> float:
    """Distance on the circle R/Z between x and c."""
    d = abs(x - c) % 1.0
    return min(d, 1.0 - d)


def binomial_stderr(successes: int, n: int) -> float:
    if n == 0:
        return float("nan")
    p = successes / n
    return math.sqrt(p * (1.0 - p) / n)


def wilson_interval(successes: int, n: int, z: float = 1.959963984540054) -> tuple[float, float]:
    """95% (by default) Wilson score interval for a binomial proportion."""
    if n == 0:
        return (0.0, 1.0)
    p = successes / n
    z2 = z * z
    denom = 1.0 + z2 / n
    center = (p + z2 / (2.0 * n)) / denom
    half = (z / denom) * math.sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n))
    return (max(0.0, center - half), min(1.0, center + half))
