"""Scalar layer: q-points on the unit circle, q-numbers, exact zero tracking.

The q-number [n] = (q^n - q^{-n})/(q - q^{-1}) reduces to sin(n*theta)/sin(theta)
for q = exp(i*theta), so all bracket values are real on the unit circle.  At a
primitive root of unity of odd order m, [n] vanishes exactly iff n = 0 mod m;
that fact is tracked as an integer congruence, never as a float comparison.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import mpmath


class EvenOrderUnsupported(ValueError):
    """Raised for even or too-small root orders (only odd m >= 3 is treated)."""


@dataclass(frozen=True)
class UnityOrder:
    """Order m of the root of unity, restricted to odd m >= 3."""

    m: int

    def __post_init__(self):
        if self.m < 3 or self.m % 2 == 0:
            raise EvenOrderUnsupported(
                f"root order m={self.m} unsupported: the construction requires odd m >= 3"
            )


def _as_order(m) -> UnityOrder:
    return m if isinstance(m, UnityOrder) else UnityOrder(int(m))


@dataclass(frozen=True)
class QPoint:
    """A deformation parameter q on the unit circle.

    kind is either 'root' (q = exp(2*pi*i/m) exactly, m odd) or 'generic'
    (angle incommensurate with pi, checked up to n_max powers).
    """

    value: complex
    kind: str
    m: Optional[int] = None

    @property
    def theta(self) -> float:
        return math.atan2(self.value.imag, self.value.real)

    @property
    def is_root(self) -> bool:
        return self.kind == "root"

    @classmethod
    def root_of_unity(cls, m) -> "QPoint":
        order = _as_order(m)
        return cls(cmath.exp(2j * math.pi / order.m), "root", order.m)

    @classmethod
    def generic(cls, angle: float = 0.37, n_max: int = 64) -> "QPoint":
        q = cmath.exp(1j * angle)
        if abs(abs(q) - 1.0) > 1e-14:
            raise ValueError("generic q must lie on the unit circle")
        for n in range(1, n_max + 1):
            if abs(q ** n - 1.0) < 1e-9:
                raise ValueError(f"angle {angle} is a root of unity at power {n}; not generic")
        return cls(q, "generic")


def q_from_order(m) -> QPoint:
    """Primitive root exp(2*pi*i/m) for odd m >= 3."""
    return QPoint.root_of_unity(_as_order(m))


@dataclass(frozen=True)
class BracketValue:
    """[n] together with its integer argument and an exact-zero flag."""

    n: int
    value: float
    exactly_zero: bool


def q_bracket(n: int, q: QPoint) -> BracketValue:
    """[n] = (q^n - q^{-n})/(q - q^{-1}), with the zero flag set by congruence."""
    zero = n == 0 or (q.is_root and n % q.m == 0)
    if zero:
        return BracketValue(n, 0.0, True)
    theta = q.theta
    return BracketValue(n, math.sin(n * theta) / math.sin(theta), False)


def bracket_periodicity(n: int, m) -> int:
    """Reduced representative of n mod m in [0, m); [n] depends only on it at a root."""
    return n % _as_order(m).m


def epsilon(i: int, j: int) -> int:
    """Sign +1 for i <= j, -1 for i > j."""
    if i < 1 or j < 1:
        raise ValueError("indices are 1-based")
    return 1 if i <= j else -1


def sqrt_signed_product(factors: Sequence[BracketValue]) -> complex:
    """Principal square root of a product of bracket values.

    Any exactly-zero factor forces an exact 0 result, regardless of how the
    remaining floats multiply out.  Negative products give a positive
    imaginary result (principal branch).
    """
    prod = 1.0
    for f in factors:
        if f.exactly_zero:
            return 0j
        prod *= f.value
    if prod >= 0.0:
        return complex(math.sqrt(prod))
    return complex(0.0, math.sqrt(-prod))


# ---------------------------------------------------------------------------
# Branch-coherent square roots of brackets.
#
# Matrix-element formulas multiply many [arg]^{1/2} factors.  Off the classical
# regime some brackets are negative and independent principal roots can spoil
# the sign coherence the algebra relations rely on.  The cure: continue each
# sqrt([n](q)) along a path from real q > 1 (where every bracket is positive)
# to the target point.  Brackets have no zeros at |q| > 1, so the continuation
# is unambiguous.


def _bracket_mp(n: int, logq):
    # [n] = sinh(n*logq)/sinh(logq) for q = exp(logq)
    if n == 0:
        return mpmath.mpf(0)
    return mpmath.sinh(n * logq) / mpmath.sinh(logq)


def _walk_arg(n: int, points) -> tuple:
    """Accumulated continuous argument of [n] along a polyline of log q values.

    Subdivides any segment whose argument step is too large.  Returns the
    endpoint value and its continued argument.
    """
    total = mpmath.mpf(0)
    prev = _bracket_mp(n, points[0])

    def advance(a, b, va, depth):
        # branch safety needs |step| < pi; near-zero endpoints turn by <= pi/2
        nonlocal total
        vb = _bracket_mp(n, b)
        if vb == 0:
            return vb
        step = mpmath.arg(vb / va)
        if abs(step) > 2.6:
            if depth > 40:
                raise RuntimeError("square-root continuation failed to converge")
            mid = (a + b) / 2
            vm = advance(a, mid, va, depth + 1)
            if vm == 0:
                return vm
            return advance(mid, b, vm, depth + 1)
        total += step
        return vb

    for a, b in zip(points, points[1:]):
        prev = advance(a, b, prev, 0)
        if prev == 0:
            break
    return prev, total


def continued_sqrt_brackets(theta, max_n: int, steps: int = 240, rho: float = 0.05,
                            zero_mod: int = 0):
    """Branch-coherent sqrt([n]) for n = 0..max_n at q = exp(i*theta).

    Entry n is the analytic continuation of the positive square root from real
    q = exp(rho) > 1 along two legs: rotate at fixed |q| to arg theta, then
    shrink |q| to 1.  Brackets have no zeros at |q| > 1, so the continuation is
    unambiguous; theta may be an mpmath value.  With zero_mod = m > 0, entries
    with n = 0 mod m are exact zeros (theta is the exact root angle) and are
    not walked.
    """
    theta = theta if isinstance(theta, mpmath.mpf) else mpmath.mpf(theta)
    rho = mpmath.mpf(rho)
    points = [rho + 1j * theta * mpmath.mpf(k) / steps for k in range(steps + 1)]
    points += [rho * (steps - k) / steps + 1j * theta for k in range(1, steps + 1)]
    out = [mpmath.mpc(0)] * (max_n + 1)
    phase = [mpmath.mpc(1)] * (max_n + 1)
    for n in range(1, max_n + 1):
        if zero_mod and n % zero_mod == 0:
            # the bracket vanishes at the endpoint: keep only the continued
            # phase of its root, walked to just before the endpoint (all such
            # brackets share the final approach direction, so phase ratios
            # between them are exact signs)
            _, total_arg = _walk_arg(n, points[:-1])
            phase[n] = mpmath.exp(1j * total_arg / 2)
            continue
        end, total_arg = _walk_arg(n, points)
        if end == 0:
            out[n] = mpmath.mpc(0)
        else:
            out[n] = mpmath.sqrt(abs(end)) * mpmath.exp(1j * total_arg / 2)
    return out, phase


class CoherentRoots:
    """Cached branch-coherent sqrt([n]) table for one q-point.

    sqrt(n) returns the continued root and bracket(n) the bracket value it
    squares to, both as mpmath numbers.  For arguments vanishing at a root of
    unity, zero_sqrt_phase(n) carries the continued phase of the root, used
    when matched zeros cancel between numerator and denominator.
    """

    def __init__(self, theta, max_n: int, steps: int = 240, zero_mod: int = 0):
        self.theta = theta if isinstance(theta, mpmath.mpf) else mpmath.mpf(theta)
        self.max_n = max_n
        self._sqrt, self._zero_phase = continued_sqrt_brackets(
            self.theta, max_n, steps=steps, zero_mod=zero_mod)

    def sqrt(self, n: int):
        if n < 0:
            raise ValueError("bracket arguments under square roots must be >= 0")
        if n > self.max_n:
            raise ValueError(f"argument {n} beyond table size {self.max_n}")
        return self._sqrt[n]

    def zero_sqrt_phase(self, n: int):
        return self._zero_phase[n]

    def bracket(self, n: int):
        sign = 1
        if n < 0:
            n, sign = -n, -1
        if n == 0:
            return mpmath.mpf(0)
        return sign * self._sqrt[n] ** 2
