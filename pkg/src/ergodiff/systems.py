"""Concrete measure-preserving systems (X, mu, T) with exact iteration.

The catalog: the identity map, circle rotations, the doubling map, a rotation
crossed with the identity on the 2-torus, and Bernoulli shifts. Each comes
with a known invariant-factor description so conditional expectations onto
the invariant sigma-algebra have closed forms.

Irrationality of a rotation angle cannot be decided from a float, so the spec
carries an explicit ``irrational`` flag set by the experiment author; named
quadratic irrationals are provided as constants evaluated to full precision.
Rational angles may carry an exact Fraction so spectral case splits and
long-iterate phases stay exact.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import DimensionMismatchError, UnsupportedFactorError
from .observables import (
    CylinderFunction,
    FourierPoly,
    Observable,
    PiecewiseConstant,
    TensorProduct,
    constant,
)
from .util import mod1

NAMED_ANGLES = {
    "sqrt2_minus_1": math.sqrt(2.0) - 1.0,
    "golden_fraction": (math.sqrt(5.0) - 1.0) / 2.0,
}

IDENTITY = "identity"
CIRCLE_ROTATION = "circle_rotation"
DOUBLING = "doubling"
PRODUCT_ROTATION_IDENTITY = "product_rotation_identity"
SHIFT_BERNOULLI = "shift_bernoulli"

_WEIGHT_TOL = 1e-12


@dataclass(frozen=True)
class SystemSpec:
    kind: str
    angle: float = 0.0
    angle_exact: Fraction | None = None
    angle_name: str | None = None
    irrational: bool = False
    symbol_count: int = 0
    weights: tuple[float, ...] = ()

    @property
    def dimension(self) -> int:
        """1 for circle systems, 2 for the product, 0 for symbolic shifts."""
        if self.kind == PRODUCT_ROTATION_IDENTITY:
            return 2
        if self.kind == SHIFT_BERNOULLI:
            return 0
        return 1


def identity() -> SystemSpec:
    return SystemSpec(kind=IDENTITY)


def _resolve_angle(angle, irrational):
    """angle may be a float, a named-constant string, or a 'p/q' string."""
    if isinstance(angle, str):
        if angle in NAMED_ANGLES:
            return NAMED_ANGLES[angle], None, angle, True
        if "/" in angle:
            fr = Fraction(angle) % 1
            return float(fr), fr, None, False
        fr = Fraction(angle) % 1
        return float(fr), fr, None, bool(irrational)
    a = float(angle)
    if not 0.0 <= a < 1.0:
        a = mod1(a)
    if irrational:
        return a, None, None, True
    # A float is a dyadic rational; keep it exact for the spectral case splits.
    return a, Fraction(a) % 1, None, False


def circle_rotation(angle, irrational: bool = False) -> SystemSpec:
    a, fr, name, irr = _resolve_angle(angle, irrational)
    return SystemSpec(kind=CIRCLE_ROTATION, angle=a, angle_exact=fr,
                      angle_name=name, irrational=irr)


def doubling_map() -> SystemSpec:
    return SystemSpec(kind=DOUBLING)


def product_rotation_identity(angle, irrational: bool = False) -> SystemSpec:
    a, fr, name, irr = _resolve_angle(angle, irrational)
    return SystemSpec(kind=PRODUCT_ROTATION_IDENTITY, angle=a, angle_exact=fr,
                      angle_name=name, irrational=irr)


def shift_bernoulli(symbol_count: int, weights) -> SystemSpec:
    w = tuple(float(x) for x in weights)
    if len(w) != symbol_count or any(x <= 0 for x in w):
        raise ValueError("need one positive weight per symbol")
    if abs(math.fsum(w) - 1.0) > _WEIGHT_TOL:
        raise ValueError("weights must sum to 1 within 1e-12")
    return SystemSpec(kind=SHIFT_BERNOULLI, symbol_count=symbol_count, weights=w)


class ShiftPoint:
    """Point of a Bernoulli shift: a lazily materialized symbol stream.

    Symbols are drawn on demand from a forked, seeded generator; points built
    from an explicit finite word have no generator and cannot be extended.
    Applying the shift returns a view sharing the underlying stream.
    """

    def __init__(self, system: SystemSpec, seed=None, word=None, _shared=None, _offset=0):
        self.system = system
        if _shared is not None:
            self._shared = _shared
        else:
            symbols = list(word) if word is not None else []
            rng = None if seed is None else np.random.default_rng(seed)
            self._shared = _SymbolStream(symbols, rng, system.weights)
        self.offset = _offset

    def prefix(self, n: int) -> tuple[int, ...]:
        return self._shared.window(self.offset, n)

    @property
    def materialized(self) -> int:
        return max(0, len(self._shared.symbols) - self.offset)

    def can_extend(self) -> bool:
        return self._shared.rng is not None

    def shifted(self, power: int) -> "ShiftPoint":
        return ShiftPoint(self.system, _shared=self._shared, _offset=self.offset + power)

    def __repr__(self):
        shown = self._shared.symbols[self.offset:self.offset + 12]
        return f"ShiftPoint({''.join(map(str, shown))}...)"


class _SymbolStream:
    def __init__(self, symbols, rng, weights):
        self.symbols = symbols
        self.rng = rng
        self.weights = weights
        self._lock = threading.Lock()

    def window(self, start: int, n: int) -> tuple[int, ...]:
        need = start + n
        if need > len(self.symbols):
            if self.rng is None:
                from .errors import InsufficientPrefixError

                raise InsufficientPrefixError(
                    f"point has {len(self.symbols)} symbols, {need} required")
            with self._lock:
                while len(self.symbols) < need:
                    u = self.rng.random()
                    acc = 0.0
                    sym = len(self.weights) - 1
                    for i, w in enumerate(self.weights):
                        acc += w
                        if u < acc:
                            sym = i
                            break
                    self.symbols.append(sym)
        return tuple(self.symbols[start:start + n])


def check_point(system: SystemSpec, x) -> None:
    dim = system.dimension
    if dim == 0:
        if not isinstance(x, ShiftPoint) or x.system.symbol_count != system.symbol_count:
            raise DimensionMismatchError(f"{x!r} is not a point of {system.kind}")
        return
    if dim == 2:
        if not (isinstance(x, tuple) and len(x) == 2):
            raise DimensionMismatchError(f"{x!r} is not a point of the 2-torus")
        return
    if isinstance(x, (tuple, ShiftPoint)):
        raise DimensionMismatchError(f"{x!r} is not a point of the circle")


def rotation_offset(system: SystemSpec, power: int) -> float:
    """power * angle mod 1, exactly for rational angles."""
    if system.angle_exact is not None:
        return float((system.angle_exact * power) % 1)
    return mod1(system.angle * power)


def apply(system: SystemSpec, x, power: int = 1):
    """T^power(x). power >= 0; doubling iterates cost O(power) by design.

    The doubling map uses the single-step recurrence on the current point, so
    orbit positions are reproducible bit for bit under a fixed evaluation
    order (2^j * x mod 1 in one step would shear off the mantissa).
    """
    if power < 0:
        raise ValueError("power must be nonnegative")
    check_point(system, x)
    if power == 0:
        return x
    kind = system.kind
    if kind == IDENTITY:
        return x
    if kind == CIRCLE_ROTATION:
        return mod1(x + rotation_offset(system, power))
    if kind == DOUBLING:
        y = float(x)
        for _ in range(power):
            y = y * 2.0
            if y >= 1.0:
                y -= 1.0
        return y
    if kind == PRODUCT_ROTATION_IDENTITY:
        return (mod1(x[0] + rotation_offset(system, power)), x[1])
    if kind == SHIFT_BERNOULLI:
        return x.shifted(power)
    raise ValueError(f"unknown system kind {kind!r}")


@dataclass(frozen=True)
class ErgodicityCertificate:
    ergodic: bool
    invariant_factor: str
    period: int = 0  # set for the rational-rotation orbit average

    TRIVIAL_CONSTANT = "trivial_constant"
    FULL_FUNCTION = "full_function"
    SECOND_COORDINATE_FIBER = "second_coordinate_fiber"
    # Rational rotations are missing from the spec's three-case enum; the
    # projection there averages over the finite angle orbit.
    PERIODIC_ORBIT_AVERAGE = "periodic_orbit_average"


def ergodicity_certificate(system: SystemSpec) -> ErgodicityCertificate:
    kind = system.kind
    if kind == IDENTITY:
        return ErgodicityCertificate(False, ErgodicityCertificate.FULL_FUNCTION)
    if kind == CIRCLE_ROTATION:
        if system.irrational:
            return ErgodicityCertificate(True, ErgodicityCertificate.TRIVIAL_CONSTANT)
        q = system.angle_exact.denominator if system.angle_exact is not None else 1
        if q == 1:
            return ErgodicityCertificate(False, ErgodicityCertificate.FULL_FUNCTION)
        return ErgodicityCertificate(
            False, ErgodicityCertificate.PERIODIC_ORBIT_AVERAGE, period=q)
    if kind in (DOUBLING, SHIFT_BERNOULLI):
        return ErgodicityCertificate(True, ErgodicityCertificate.TRIVIAL_CONSTANT)
    if kind == PRODUCT_ROTATION_IDENTITY:
        if system.irrational:
            return ErgodicityCertificate(
                False, ErgodicityCertificate.SECOND_COORDINATE_FIBER)
        raise UnsupportedFactorError(
            "product system needs an irrational rotation factor for a closed form")
    raise ValueError(f"unknown system kind {kind!r}")


def invariant_projection(system: SystemSpec, f: Observable) -> Observable:
    """E[f | invariant sigma-algebra], exactly, per the system's certificate.

    Never silently approximates: kinds without a closed form raise.
    """
    cert = ergodicity_certificate(system)
    factor = cert.invariant_factor
    if factor == ErgodicityCertificate.FULL_FUNCTION:
        return f
    if factor == ErgodicityCertificate.TRIVIAL_CONSTANT:
        return constant(f.mean())
    if factor == ErgodicityCertificate.SECOND_COORDINATE_FIBER:
        if isinstance(f, TensorProduct):
            return TensorProduct(constant(f.first.mean()), f.second)
        raise UnsupportedFactorError(
            "fiber projection needs a tensor-product observable")
    if factor == ErgodicityCertificate.PERIODIC_ORBIT_AVERAGE:
        return _orbit_average(f, cert.period)
    raise UnsupportedFactorError(f"no closed form for factor {factor!r}")


def _orbit_average(f: Observable, q: int) -> Observable:
    if q > (1 << 20):
        raise UnsupportedFactorError(
            f"angle denominator {q} too large for a closed-form orbit average; "
            "flag the angle as irrational or supply it as a small 'p/q' string")
    if isinstance(f, FourierPoly):
        return FourierPoly({m: c for m, c in f.coeffs.items() if m % q == 0})
    if isinstance(f, (PiecewiseConstant,)):
        acc = f * (1.0 / q)
        for j in range(1, q):
            acc = acc + f.translate(j / q) * (1.0 / q)
        return acc
    if hasattr(f, "as_piecewise"):
        return _orbit_average(f.as_piecewise(), q)
    raise UnsupportedFactorError(
        f"no closed-form orbit average for {type(f).__name__}")


def random_point(system: SystemSpec, rng: np.random.Generator):
    """One mu-distributed point; shift generators are forked from rng."""
    dim = system.dimension
    if dim == 1:
        return float(rng.random())
    if dim == 2:
        return (float(rng.random()), float(rng.random()))
    return ShiftPoint(system, seed=rng.integers(0, 2**63 - 1))


def sample_points(system: SystemSpec, count: int, seed: int) -> list:
    rng = np.random.default_rng(seed)
    return [random_point(system, rng) for _ in range(count)]


def evaluate_along_orbit(system: SystemSpec, f: Observable, x, powers) -> np.ndarray:
    """f(T^p x) for each p in powers; vectorized for rotations.

    Powers must be sorted nondecreasing for the iterative kinds.
    """
    powers = list(powers)
    if system.kind == CIRCLE_ROTATION and not isinstance(f, CylinderFunction):
        offs = np.array([rotation_offset(system, p) for p in powers])
        return f.values((float(x) + offs) % 1.0)
    if system.kind == IDENTITY:
        return np.full(len(powers), f(x), dtype=np.complex128)
    out = np.empty(len(powers), dtype=np.complex128)
    pt = x
    last = 0
    for i, p in enumerate(powers):
        pt = apply(system, pt, p - last)
        last = p
        out[i] = f(pt)
    return out
