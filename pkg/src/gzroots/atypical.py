"""Degenerate orbits, basis rotations, and divergence-free atypical modules.

At an odd root of unity some lowering coefficients acquire unmatched
denominator zeros.  States whose level-l rows agree entry-wise mod m share all
Cartan eigenvalues; an orthogonal rotation of such a degenerate orbit can be
chosen so every matrix element stays finite.  The general-rank machinery here
(row types, exchange maps, orbits) identifies the degenerate sets; the rank-3
builder assembles the full rotated representation.

The rank-3 assembly evaluates the rotated generators slightly off the root,
at q = exp(i*theta0*(1-delta)) with tiny delta in high-precision arithmetic,
where the rotation angles are finite and every defining relation holds
identically; the limit of each matrix entry is then read off.  Divergences
that the rotation fails to cancel surface as unbounded entries and are
reported, never silently truncated.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import mpmath
import numpy as np

from .gzbasis import (GZPattern, ModuleBasis, TopRow, cartan_exponent,
                      enumerate_basis, validate_pattern)
from .genrep import (GeneratorSet, NotFlat, _k_exponent_table, build_flat_sl3,
                     p_factors, term_factors)
from .qarith import CoherentRoots, QPoint, UnityOrder, q_bracket, q_from_order


class NotDegenerate(ValueError):
    pass


class FormalAngle(ArithmeticError):
    """Rotation angle with a vanishing defining bracket (exact root of unity)."""


class UnknownCase(LookupError):
    pass


class PreconditionViolated(ValueError):
    pass


class UnresolvedDivergence(ArithmeticError):
    def __init__(self, message, context=None):
        super().__init__(message)
        self.context = context or {}


def _sym_residue(n: int, m: int) -> int:
    """Representative of n mod m in (-m/2, m/2); unique since m is odd."""
    r = n % m
    if r > m // 2:
        r -= m
    return r


# --- row types and exchange maps (any rank) ---------------------------------

@dataclass(frozen=True)
class TypePartition:
    """Consecutive blocks of a row with internal differences = 0 mod m."""

    l: int
    subsets: tuple
    offsets: dict = field(compare=False)
    multiples: tuple = field(compare=False, default=())

    @property
    def is_type_state(self) -> bool:
        """True when all cross-block offsets are nonzero, as a type requires."""
        return all(z != 0 for z in self.offsets.values())


def classify_row_type(row, m) -> TypePartition:
    """Coarsest partition of a strictly decreasing row into mod-m blocks."""
    order = m if isinstance(m, UnityOrder) else UnityOrder(int(m))
    row = tuple(int(v) for v in row)
    if any(a <= b for a, b in zip(row, row[1:])):
        raise ValueError("row must be strictly decreasing")
    blocks = [[1]]
    for i in range(1, len(row)):
        if (row[i - 1] - row[i]) % order.m == 0:
            blocks[-1].append(i + 1)
        else:
            blocks.append([i + 1])
    subsets = tuple(tuple(b) for b in blocks)
    offsets = {}
    for k in range(len(subsets)):
        for s in range(k + 1, len(subsets)):
            diff = row[subsets[k][0] - 1] - row[subsets[s][0] - 1]
            offsets[(k + 1, s + 1)] = diff % order.m
    multiples = tuple(
        (row[i - 1] - row[i]) // order.m
        for b in subsets for i in b[:-1]
    )
    return TypePartition(len(row), subsets, offsets, multiples)


def exchange_map(p: GZPattern, l: int, i: int, j: int, m) -> GZPattern:
    """Swap entries i and j of row l up to multiples of m (sum preserving).

    With zeta the reduced offset of p_il - p_jl, the images are
    p_il - zeta and p_jl + zeta.  The result is not validated; callers filter
    by the interlacing inequalities.
    """
    order = m if isinstance(m, UnityOrder) else UnityOrder(int(m))
    if i == j:
        raise NotDegenerate("exchange needs two distinct positions")
    if not (1 <= i < j <= l):
        raise ValueError("need 1 <= i < j <= l")
    row = list(p.row(l))
    zeta = _sym_residue(row[i - 1] - row[j - 1], order.m)
    if zeta == 0:
        raise NotDegenerate(
            f"positions {i},{j} of row {row} lie in the same mod-{order.m} block")
    row[i - 1] -= zeta
    row[j - 1] += zeta
    return p.replace_row(l, row)


@dataclass(frozen=True)
class DegenerateOrbit:
    level: int
    members: tuple
    partition: TypePartition


def orbit(p: GZPattern, l: int, m) -> DegenerateOrbit:
    """Closure of p's row l under admissible exchanges, filtered to rows that
    still complete to valid patterns inside p."""
    order = m if isinstance(m, UnityOrder) else UnityOrder(int(m))
    base_exponents = tuple(cartan_exponent(p, lv) for lv in range(1, p.n))
    seen = {p.row(l)}
    frontier = [p.row(l)]
    while frontier:
        row = frontier.pop()
        for i in range(1, l + 1):
            for j in range(i + 1, l + 1):
                try:
                    cand = exchange_map(p.replace_row(l, row), l, i, j, order)
                except NotDegenerate:
                    continue
                new_row = cand.row(l)
                if new_row in seen or not validate_pattern(cand):
                    continue
                exps = tuple(cartan_exponent(cand, lv) for lv in range(1, p.n))
                assert exps == base_exponents, "exchange must preserve the weight"
                seen.add(new_row)
                frontier.append(new_row)
    members = tuple(sorted(seen, reverse=True))
    return DegenerateOrbit(l, members, classify_row_type(p.row(l), order))


# --- the rank-3 case analysis -----------------------------------------------

def detect_case_sl3(p: GZPattern, m) -> Optional[str]:
    """Which lowering denominator diverges for this rank-3 state, if any.

    Requires clean numerators (no zero factor in either term); states failing
    that are handled by plain cancellation and raise PreconditionViolated.
    """
    order = m if isinstance(m, UnityOrder) else UnityOrder(int(m))
    if p.n != 3:
        raise ValueError("case analysis is rank-3 only")
    q = q_from_order(order)
    for j in (1, 2):
        pf = p_factors(j, 2, p, q)
        if pf.eta:
            raise PreconditionViolated(
                f"numerator zeros present (eta_{j}2 = {pf.eta}); "
                "plain cancellation applies, not the case analysis")
    d = p.p(1, 2) - p.p(2, 2)
    cases = []
    if d % order.m == 0:
        cases.append("a")
    if (d + 1) % order.m == 0:
        cases.append("b")
    if (d - 1) % order.m == 0 and d - 1 > 0:
        cases.append("c")
    assert len(cases) <= 1, "divergence cases must be mutually exclusive"
    return cases[0] if cases else None


@dataclass(frozen=True)
class BasisRotation:
    matrix: np.ndarray
    orbit: Optional[DegenerateOrbit] = None


def rotation_sl3(case: str, gap: int, q: QPoint) -> BasisRotation:
    """The 2x2 orbit rotation for one divergence case, at the given q.

    'gap' is the row difference p12 - p22 of the state that triggered the
    case.  At a root of unity the defining brackets vanish and the angle is
    only formal: FormalAngle is raised; the finite matrix elements then come
    from the closed forms / the limit construction instead.
    """
    if case == "a":
        num_c, num_s, den = gap - 1, gap + 1, gap
    elif case == "b":
        num_c, num_s, den = gap, gap + 2, gap + 1
    elif case == "c":
        num_c, num_s, den = gap, gap - 2, gap - 1
    else:
        raise UnknownCase(f"no rotation for case {case!r}")
    two = q_bracket(2, q)
    b_den = q_bracket(den, q)
    if two.exactly_zero or b_den.exactly_zero:
        raise FormalAngle(
            f"rotation angle for case {case} is formal: bracket of {den} vanishes")
    cos2 = q_bracket(num_c, q).value / (two.value * b_den.value)
    sin2 = q_bracket(num_s, q).value / (two.value * b_den.value)
    c = complex(np.sqrt(complex(cos2)))
    s = complex(np.sqrt(complex(sin2)))
    mat = np.array([[c, s], [-s, c]], dtype=complex)
    return BasisRotation(mat)


def aggregate_modified_element(ratios) -> complex:
    """Single surviving coefficient sqrt(sum of squared term ratios).

    This is the aggregation that concentrates a degenerate orbit's outflux on
    one modified state; at generic q it equals the rotated first component.
    """
    total = sum(complex(r) ** 2 for r in ratios)
    return complex(np.sqrt(total))


# --- modified states and the rank-3 builder ----------------------------------

@dataclass(frozen=True)
class ModifiedState:
    pattern: GZPattern
    flavor: str = "primitive"  # or "modified"


@dataclass(frozen=True)
class ModifiedTerm:
    source: ModifiedState
    target: ModifiedState
    coefficient: complex


def _scan_divergences(basis: ModuleBasis, qroot: QPoint):
    """All undefined lowering elements, keyed by the upper (work) pattern."""
    found = {}
    for p in basis:
        for direction in ("lower", "raise"):
            for l in range(1, p.n):
                for j in range(1, l + 1):
                    work, target, coeff = term_factors(p, j, l, direction)
                    if coeff.has_exact_zero(qroot):
                        continue
                    eta, eta_prime = coeff.zero_units(qroot)
                    if eta < eta_prime:
                        found[(work.flatten(), j, l)] = (work, j, l)
    return list(found.values())


def _pair_rows(work: GZPattern, j: int, m: int):
    """Rotation pair (u_row, v_row) for a divergent element at 'work', term j.

    u is the member whose row difference is -1 mod m, v the +1 member; the
    intermediate weight is shared at fixed bottom entry.
    """
    p12, p22 = work.row(2)
    d = p12 - p22
    if d % m == 0:
        return (p12 - 1, p22), (p12, p22 - 1)
    if j == 2 and (d + 1) % m == 0:
        return (p12, p22), (p12 + 1, p22 - 1)
    if j == 1 and (d - 1) % m == 0 and d - 1 > 0:
        return (p12 - 1, p22 + 1), (p12, p22)
    return None


@dataclass
class _PairBlock:
    u_idx: int
    v_idx: int
    u_row: tuple
    v_row: tuple
    p11: int
    sigma: int = 1


def _register_pairs(basis: ModuleBasis, order: UnityOrder) -> List[_PairBlock]:
    qroot = q_from_order(order)
    blocks: Dict[tuple, _PairBlock] = {}
    for work, j, l in _scan_divergences(basis, qroot):
        if l != 2:
            raise UnresolvedDivergence(
                f"divergence at level {l}; only level-2 elements are expected",
                {"pattern": work.as_nested(), "j": j, "l": l})
        rows = _pair_rows(work, j, order.m)
        if rows is None:
            raise UnresolvedDivergence(
                "divergent element outside the three residue cases",
                {"pattern": work.as_nested(), "j": j})
        u_row, v_row = rows
        p11 = work.p(1, 1)
        top = work.rows[0]
        u_pat = GZPattern((top, u_row, (p11,)))
        v_pat = GZPattern((top, v_row, (p11,)))
        if not (validate_pattern(u_pat) and validate_pattern(v_pat)):
            raise UnresolvedDivergence(
                "divergence whose rotation partner does not exist",
                {"pattern": work.as_nested(), "j": j,
                 "u": u_pat.as_nested(), "v": v_pat.as_nested()})
        key = (u_row, v_row, p11)
        if key not in blocks:
            blocks[key] = _PairBlock(
                basis.index_of(u_pat), basis.index_of(v_pat), u_row, v_row, p11)
    return sorted(blocks.values(), key=lambda b: (b.u_row, b.v_row, b.p11))


def _primitive_mp(basis: ModuleBasis, table: CoherentRoots):
    """Lowering matrices at the table's q, branch-coherent, no cancellation."""
    dim = basis.dimension
    mats = {l: mpmath.zeros(dim, dim) for l in range(1, basis.top.n)}
    for idx, p in enumerate(basis):
        for l in range(1, basis.top.n):
            for j in range(1, l + 1):
                _, target, coeff = term_factors(p, j, l, "lower")
                if coeff.has_literal_zero():
                    continue
                tidx = basis.index.get(target.flatten())
                assert tidx is not None, "finite term must stay inside the module"
                val = mpmath.mpc(1)
                for a in coeff.num_sqrt:
                    val *= table.sqrt(a)
                for a in coeff.den_sqrt:
                    val /= table.sqrt(a)
                mats[l][tidx, idx] = val
    return mats


def _rotation_mp(dim: int, blocks: List[_PairBlock], table: CoherentRoots):
    """Block rotation: column u of R holds (c, -sigma*s), column v (sigma*s, c)."""
    R = mpmath.eye(dim)
    for blk in blocks:
        d_u = blk.u_row[0] - blk.u_row[1]
        c = table.sqrt(d_u) / (table.sqrt(2) * table.sqrt(d_u + 1))
        s = table.sqrt(d_u + 2) / (table.sqrt(2) * table.sqrt(d_u + 1))
        R[blk.u_idx, blk.u_idx] = c
        R[blk.v_idx, blk.u_idx] = -blk.sigma * s
        R[blk.u_idx, blk.v_idx] = blk.sigma * s
        R[blk.v_idx, blk.v_idx] = c
    return R


def _max_abs(mat) -> float:
    return max((abs(mat[i, j]) for i in range(mat.rows) for j in range(mat.cols)),
               default=0.0)


def _extract(mat, clip=1e-9, bound=1e8) -> dict:
    out = {}
    for i in range(mat.rows):
        for j in range(mat.cols):
            v = mat[i, j]
            a = abs(v)
            if a <= clip:
                continue
            if a > bound:
                raise UnresolvedDivergence(
                    f"entry ({i},{j}) did not converge (|value| = {float(a):.3g})")
            re = float(mpmath.re(v)) if abs(mpmath.re(v)) > clip else 0.0
            im = float(mpmath.im(v)) if abs(mpmath.im(v)) > clip else 0.0
            out[(i, j)] = complex(re, im)
    return out


def build_atypical_sl3(top, m, *, dps: int = 120, delta_exp: int = 30,
                       steps: int = 240) -> GeneratorSet:
    """Divergence-free rank-3 module at an odd root of unity, spread > m.

    Spread m+1 delegates to the flat construction.  Larger spreads rotate
    every registered degenerate pair; the result carries convention
    'modified_sl3' and a build report in meta.
    """
    top = top if isinstance(top, TopRow) else TopRow(tuple(top))
    order = m if isinstance(m, UnityOrder) else UnityOrder(int(m))
    if top.n != 3:
        raise ValueError("atypical builder is rank-3 only")
    spread = top.values[0] - top.values[2]
    if spread <= order.m:
        raise ValueError(
            f"top spread {spread} <= m = {order.m}: no extra singular vectors, "
            "use the generic builder")
    if spread == order.m + 1:
        return build_flat_sl3(top, order)

    basis = enumerate_basis(top)
    blocks = _register_pairs(basis, order)
    qroot = q_from_order(order)
    if not blocks:
        return build_generic_root(top, order)

    if len(blocks) > 14:
        raise UnresolvedDivergence(f"too many degenerate pairs ({len(blocks)})")

    dim = basis.dimension
    chains = _chain_report(basis, blocks)
    with mpmath.workdps(dps):
        delta = mpmath.mpf(10) ** (-delta_exp)
        theta = (2 * mpmath.pi / order.m) * (1 - delta)
        table = CoherentRoots(theta, spread + 2, steps=steps)
        F = _primitive_mp(basis, table)
        bound = 1e8
        chosen = None
        for signs in itertools.product((1, -1), repeat=len(blocks)):
            for blk, s in zip(blocks, signs):
                blk.sigma = s
            R = _rotation_mp(dim, blocks, table)
            Rt = R.T
            rotated = {l: Rt * F[l] * R for l in F}
            if all(_max_abs(mat) < bound for mat in rotated.values()):
                chosen = signs
                break
        if chosen is None:
            raise UnresolvedDivergence(
                "no rotation branch cancels all divergences"
                + (" (divergence chain deeper than one rotation)" if chains else ""),
                {"pairs": [(b.u_row, b.v_row, b.p11) for b in blocks],
                 "deep_chains": chains})
        f = {l: _extract(rotated[l]) for l in rotated}
        e = {l: _extract(rotated[l].T) for l in rotated}

    g = GeneratorSet(basis, e, f, _k_exponent_table(basis), qroot, "modified_sl3")
    g.meta["orbit_pairs"] = [
        {"u": [list(top.values), list(b.u_row), [b.p11]],
         "v": [list(top.values), list(b.v_row), [b.p11]],
         "sigma": b.sigma}
        for b in blocks
    ]
    g.meta["modified_indices"] = sorted(
        {b.u_idx for b in blocks} | {b.v_idx for b in blocks})
    g.meta["rotation_gauge"] = list(chosen)
    g.meta["deep_chains"] = chains
    return g


def build_generic_root(top, m) -> GeneratorSet:
    """Generic-convention build at the exact root (no divergences present)."""
    from .genrep import build_generic_rep
    g = build_generic_rep(top, q_from_order(m))
    return g


def _chain_report(basis: ModuleBasis, blocks: List[_PairBlock]) -> list:
    """Pairs whose one-step extension pair also fully exists (divergence
    chains deeper than one rotation); flagged for inspection."""
    chains = []
    for b in blocks:
        big, small = b.v_row[0], b.u_row[1]
        top = basis.top.values
        ext_u = GZPattern((top, (big - 2, small), (b.p11,)))
        ext_v = GZPattern((top, (big, small - 2), (b.p11,)))
        if validate_pattern(ext_u) and validate_pattern(ext_v):
            chains.append({"pair": [list(b.u_row), list(b.v_row), b.p11]})
    return chains


# --- per-state closed-form access --------------------------------------------

_BUILD_CACHE: Dict[tuple, GeneratorSet] = {}


def _cached_build(top_values: tuple, m: int) -> GeneratorSet:
    key = (tuple(top_values), m)
    if key not in _BUILD_CACHE:
        _BUILD_CACHE[key] = build_atypical_sl3(TopRow(key[0]), UnityOrder(m))
    return _BUILD_CACHE[key]


def modified_ladder_sl3(state: ModifiedState, l: int, direction: str,
                        q: QPoint, m) -> List[ModifiedTerm]:
    """Action of e_l/f_l on a state of the modified rank-3 basis.

    The coefficients are the finite closed-form values of the rotated module
    the state belongs to.  States untouched by any divergence case raise
    UnknownCase; the plain ladder action applies to them.
    """
    order = m if isinstance(m, UnityOrder) else UnityOrder(int(m))
    if q.is_root and q.m != order.m:
        raise ValueError("q and m disagree on the root order")
    p = state.pattern
    g = _cached_build(p.rows[0], order.m)
    basis = g.basis
    idx = basis.index_of(p)
    modified = set(g.meta.get("modified_indices", ()))
    mats = g.f if direction == "lower" else g.e
    if idx not in modified:
        # a primitive source participates only if it feeds a modified target
        touches = any(c == idx and r in modified
                      for mat in mats.values() for (r, c) in mat)
        if not touches:
            raise UnknownCase(
                "state is not part of any divergence case; use ladder_action")
    column = [(r, v) for (r, c), v in mats[l].items() if c == idx]
    out = []
    for r, v in sorted(column):
        flavor = "modified" if r in modified else "primitive"
        out.append(ModifiedTerm(
            ModifiedState(p, state.flavor),
            ModifiedState(basis.states[r], flavor), v))
    return out
