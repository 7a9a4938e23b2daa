"""Matrix elements of e_l, f_l, k_l in the primitive Gelfand-Zetlin basis.

The lowering coefficient for the j-th term at level l is a ratio of products
of square-rooted q-brackets; the raising coefficient is the same expression on
the target pattern.  At a root of unity individual brackets vanish; the counts
of vanishing factors in numerator (eta) and denominator (eta_prime) decide
whether a term is zero, finite after cancellation, or undefined.  Undefined
elements raise DivergentElement: that is the signal that the module needs the
modified (rotated) basis.

Square roots of brackets are taken in a branch-coherent gauge (continuation
from real q > 1, see qarith.CoherentRoots) so that products of roots satisfy
the same identities as in the classical regime.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import mpmath
import numpy as np

from .gzbasis import (GZPattern, ModuleBasis, TopRow, cartan_exponent,
                      enumerate_basis, validate_pattern)
from .qarith import CoherentRoots, QPoint, UnityOrder, epsilon, q_from_order


class DivergentElement(ArithmeticError):
    """A matrix element with more denominator zeros than numerator zeros."""

    def __init__(self, pattern, j, l, direction="lower"):
        self.pattern, self.j, self.l, self.direction = pattern, j, l, direction
        super().__init__(
            f"undefined matrix element at j={j}, l={l} ({direction}) on {pattern}"
        )


class NotFlat(ValueError):
    pass


# --- factor bookkeeping -----------------------------------------------------

def _p1_args(j: int, l: int, p: GZPattern) -> List[int]:
    return [epsilon(i, j) * (p.p(i, l + 1) - p.p(j, l) + 1) for i in range(1, l + 2)]


def _p2_args(j: int, l: int, p: GZPattern) -> List[int]:
    return [epsilon(j, i) * (p.p(j, l) - p.p(i, l - 1)) for i in range(1, l)]


def _p3_args(j: int, l: int, p: GZPattern) -> List[int]:
    args = []
    for i in range(1, l + 1):
        if i == j:
            continue
        args.append(epsilon(i, j) * (p.p(i, l) - p.p(j, l)))
        args.append(epsilon(i, j) * (p.p(i, l) - p.p(j, l) + 1))
    return args


def _zero_kind(arg: int, q: QPoint) -> Optional[str]:
    if arg == 0:
        return "exact"
    if q.is_root and arg % q.m == 0:
        return "congruence"
    return None


def _product_info(args: List[int], q: QPoint) -> Tuple[float, int]:
    """(product of nonzero bracket values, count of zero factors)."""
    import math
    theta = q.theta
    val, zeros = 1.0, 0
    for a in args:
        if _zero_kind(a, q):
            zeros += 1
        else:
            val *= math.sin(a * theta) / math.sin(theta)
    return val, zeros


@dataclass(frozen=True)
class PFactors:
    """Numerator/denominator factor products with exact zero counts."""

    j: int
    l: int
    p1: Tuple[float, int]
    p2: Tuple[float, int]
    p3: Tuple[float, int]
    p1_args: tuple = field(repr=False, default=())
    p2_args: tuple = field(repr=False, default=())
    p3_args: tuple = field(repr=False, default=())

    @property
    def eta(self) -> int:
        return self.p1[1] + self.p2[1]

    @property
    def eta_prime(self) -> int:
        return self.p3[1]


def p_factors(j: int, l: int, p: GZPattern, q: QPoint) -> PFactors:
    if not 1 <= j <= l <= p.n - 1:
        raise ValueError(f"need 1 <= j <= l <= N-1, got j={j}, l={l}")
    a1, a2, a3 = _p1_args(j, l, p), _p2_args(j, l, p), _p3_args(j, l, p)
    pf = PFactors(
        j, l,
        _product_info(a1, q), _product_info(a2, q), _product_info(a3, q),
        tuple(a1), tuple(a2), tuple(a3),
    )
    assert pf.eta_prime <= l - 1, "denominator zero count exceeded structural bound"
    return pf


@dataclass(frozen=True)
class LadderTerm:
    source: GZPattern
    target: GZPattern
    coefficient: complex


class _Coefficient:
    """One term's factors: sqrt-weight args, linear args, denominator args."""

    def __init__(self, num_sqrt, den_sqrt, linear=()):
        self.num_sqrt = list(num_sqrt)
        self.den_sqrt = list(den_sqrt)
        self.linear = list(linear)

    def zero_units(self, q):
        num = sum(1 for a in self.num_sqrt if _zero_kind(a, q) == "congruence")
        num += sum(2 for a in self.linear if _zero_kind(a, q) == "congruence")
        den = sum(1 for a in self.den_sqrt if _zero_kind(a, q) == "congruence")
        return num, den

    def has_literal_zero(self):
        return any(a == 0 for a in self.num_sqrt + self.linear + self.den_sqrt)

    def has_exact_zero(self, q):
        return any(_zero_kind(a, q) == "exact"
                   for a in self.num_sqrt + self.linear + self.den_sqrt)

    def evaluate(self, roots: CoherentRoots) -> complex:
        """Value with matched congruence zeros cancelled against each other.

        Brackets with argument a = 0 mod m vanish linearly with slope
        proportional to a, so a cancelled pair [a]/[b] tends to a/b times a
        sign fixed by the continued phases of the two roots; both pieces are
        taken from the table so the result is the exact limit.
        """
        val = mpmath.mpc(1)
        for a in self.num_sqrt:
            if a % roots.modulus:
                val *= roots.sqrt(a)
            else:
                val *= roots.zero_sqrt_phase(a) * mpmath.sqrt(a)
        for a in self.linear:
            if a % roots.modulus:
                val *= roots.bracket(a)
            else:
                val *= roots.zero_sqrt_phase(a) ** 2 * a
        for a in self.den_sqrt:
            if a % roots.modulus:
                val /= roots.sqrt(a)
            else:
                val /= roots.zero_sqrt_phase(a) * mpmath.sqrt(a)
        return complex(val)


class _RootCache:
    """CoherentRoots tables keyed by (theta-ish, size), with a congruence modulus."""

    def __init__(self):
        self._tables = {}

    def get(self, q: QPoint, max_n: int) -> CoherentRoots:
        m = q.m if q.is_root else 0
        key = (round(q.theta, 15), q.kind, m)
        tab = self._tables.get(key)
        if tab is None or tab.max_n < max_n:
            with mpmath.workdps(60):
                theta = 2 * mpmath.pi / m if q.is_root else mpmath.mpf(q.theta)
                tab = CoherentRoots(theta, max_n, zero_mod=m)
            tab.modulus = m if m else 10 ** 9  # off-root: nothing is congruent to 0
            self._tables[key] = tab
        return tab


_ROOTS = _RootCache()


def _max_arg(p: GZPattern) -> int:
    flat = p.flatten()
    return max(flat) - min(flat) + 2


def term_factors(p: GZPattern, j: int, l: int, direction: str):
    """(work pattern, target pattern, coefficient factors) for one ladder term.

    The raising coefficient is the lowering expression read on the shifted
    pattern, so 'work' is the source for lower and the target for raise.
    """
    delta = -1 if direction == "lower" else 1
    target = p.shift_entry(j, l, delta)
    work = p if direction == "lower" else target
    coeff = _Coefficient(_p1_args(j, l, work) + _p2_args(j, l, work),
                         _p3_args(j, l, work))
    return work, target, coeff


def ladder_action(p: GZPattern, l: int, direction: str, q: QPoint) -> List[LadderTerm]:
    """Terms of f_l (direction 'lower') or e_l ('raise') applied to one state.

    Terms whose coefficient is exactly zero are omitted.  Raises
    DivergentElement when a denominator zero is unmatched.
    """
    if direction not in ("lower", "raise"):
        raise ValueError("direction must be 'lower' or 'raise'")
    roots = _ROOTS.get(q, _max_arg(p) + 2)
    terms = []
    for j in range(1, l + 1):
        work, target, coeff = term_factors(p, j, l, direction)
        if coeff.has_exact_zero(q):
            assert not validate_pattern(target), \
                "literal zero factor must correspond to an invalid target"
            continue
        assert validate_pattern(target), \
            "invalid target must carry a literal zero factor"
        eta, eta_prime = coeff.zero_units(q)
        if eta > eta_prime:
            continue
        if eta < eta_prime:
            raise DivergentElement(p, j, l, direction)
        terms.append(LadderTerm(p, target, coeff.evaluate(roots)))
    return terms


@dataclass
class GeneratorSet:
    """Sparse generator matrices over a module basis.

    e[l] and f[l] map (target_index, source_index) -> coefficient; k is stored
    as integer exponent vectors (k_l acts diagonally as q^{exponent}).
    """

    basis: ModuleBasis
    e: Dict[int, Dict[Tuple[int, int], complex]]
    f: Dict[int, Dict[Tuple[int, int], complex]]
    k_exponents: Dict[int, tuple]
    q: QPoint
    convention: str
    meta: dict = field(default_factory=dict)

    @property
    def dimension(self) -> int:
        return self.basis.dimension

    @property
    def rank_levels(self) -> range:
        return range(1, self.basis.top.n)

    def _dense(self, entries) -> np.ndarray:
        dim = self.dimension
        if dim > 512:
            raise ValueError("dense conversion limited to dimension <= 512")
        mat = np.zeros((dim, dim), dtype=complex)
        for (r, c), v in entries.items():
            mat[r, c] = v
        return mat

    def e_matrix(self, l: int) -> np.ndarray:
        return self._dense(self.e[l])

    def f_matrix(self, l: int) -> np.ndarray:
        return self._dense(self.f[l])

    def k_matrix(self, l: int) -> np.ndarray:
        qv = self.q.value
        return np.diag([qv ** h for h in self.k_exponents[l]])

    def k_inv_matrix(self, l: int) -> np.ndarray:
        qv = self.q.value
        return np.diag([qv ** (-h) for h in self.k_exponents[l]])


def _k_exponent_table(basis: ModuleBasis) -> Dict[int, tuple]:
    n = basis.top.n
    return {l: tuple(cartan_exponent(p, l) for p in basis) for l in range(1, n)}


def build_generic_rep(top, q: QPoint) -> GeneratorSet:
    """Assemble the symmetric-convention representation at any q on the circle.

    Raises DivergentElement if some matrix element is undefined at this q.
    """
    basis = enumerate_basis(top if isinstance(top, TopRow) else TopRow(tuple(top)))
    n = basis.top.n
    e = {l: {} for l in range(1, n)}
    f = {l: {} for l in range(1, n)}
    for idx, p in enumerate(basis):
        for l in range(1, n):
            for term in ladder_action(p, l, "lower", q):
                f[l][(basis.index_of(term.target), idx)] = term.coefficient
            for term in ladder_action(p, l, "raise", q):
                e[l][(basis.index_of(term.target), idx)] = term.coefficient
    return GeneratorSet(basis, e, f, _k_exponent_table(basis), q, "generic")


# --- the flat sl(3) convention ----------------------------------------------

def _flat_terms(p: GZPattern):
    """Factor lists of the asymmetric flat convention for sl(3).

    Yields (generator, level, target, coefficient-spec).  The e/f asymmetry
    moves one bracket out of each square root; such a factor counts twice in
    the zero bookkeeping.
    """
    p13, p23, p33 = p.row(3)
    p12, p22 = p.row(2)
    p11 = p.p(1, 1)
    yield ("f", 1, p.shift_entry(1, 1, -1),
           _Coefficient([p11 - p22 - 1], []))
    yield ("e", 1, p.shift_entry(1, 1, +1),
           _Coefficient([p11 - p22], [], linear=[p12 - p11]))
    yield ("f", 2, p.shift_entry(1, 2, -1),
           _Coefficient([p13 - p12 + 1, p12 - p23 - 1, p12 - p33 - 1],
                        [p12 - p22 - 1, p12 - p22], linear=[p12 - p11]))
    yield ("f", 2, p.shift_entry(2, 2, -1),
           _Coefficient([p13 - p22 + 1, p23 - p22 + 1, p11 - p22],
                        [p12 - p22 + 1, p12 - p22], linear=[p22 - p33 - 1]))
    yield ("e", 2, p.shift_entry(1, 2, +1),
           _Coefficient([p13 - p12, p12 - p23, p12 - p33],
                        [p12 - p22 + 1, p12 - p22]))
    yield ("e", 2, p.shift_entry(2, 2, +1),
           _Coefficient([p13 - p22, p23 - p22, p11 - p22 - 1],
                        [p12 - p22 - 1, p12 - p22]))


def build_flat_sl3(top, m) -> GeneratorSet:
    """Representation without weight multiplicity at spread m+1, rank 3."""
    top = top if isinstance(top, TopRow) else TopRow(tuple(top))
    order = m if isinstance(m, UnityOrder) else UnityOrder(int(m))
    if top.n != 3:
        raise NotFlat("flat construction implemented for rank 3 only")
    if top.values[0] - top.values[2] != order.m + 1:
        raise NotFlat(
            f"flat construction needs top spread m+1={order.m + 1}, "
            f"got {top.values[0] - top.values[2]}"
        )
    q = q_from_order(order)
    basis = enumerate_basis(top)
    spread = top.values[0] - top.values[2]
    roots = _ROOTS.get(q, spread + 2)
    e = {1: {}, 2: {}}
    f = {1: {}, 2: {}}
    for idx, p in enumerate(basis):
        for gen, l, target, coeff in _flat_terms(p):
            if coeff.has_exact_zero(q):
                assert not validate_pattern(target)
                continue
            assert validate_pattern(target)
            eta, eta_prime = coeff.zero_units(q)
            if eta > eta_prime:
                continue
            if eta < eta_prime:
                raise DivergentElement(p, 0, l, gen)
            value = coeff.evaluate(roots)
            (f if gen == "f" else e)[l][(basis.index_of(target), idx)] = value

    g = GeneratorSet(basis, e, f, _k_exponent_table(basis), q, "flat_sl3")

    # the corner state (top-1, middle; top-1) decouples completely whenever the
    # top two entries differ by 2 (then its f_1 bracket argument is literally 0)
    p13, p23, _ = top.values
    lone = GZPattern((top.values, (p13 - 1, p23), (p13 - 1,)))
    li = basis.index_of(lone)
    touched = any(li in (r, c)
                  for mats in (e, f) for mat in mats.values() for (r, c) in mat)
    if not touched:
        g.meta["decoupled_state"] = lone.as_nested()
    return g
