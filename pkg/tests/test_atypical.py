import mpmath
import numpy as np
import pytest

from gzroots.atypical import (FormalAngle, ModifiedState, NotDegenerate,
                              PreconditionViolated, UnknownCase,
                              UnresolvedDivergence, _primitive_mp,
                              aggregate_modified_element, build_atypical_sl3,
                              classify_row_type, detect_case_sl3, exchange_map,
                              modified_ladder_sl3, orbit, rotation_sl3)
from gzroots.genrep import build_generic_rep
from gzroots.gzbasis import GZPattern, cartan_exponent, enumerate_basis
from gzroots.qarith import CoherentRoots, QPoint, q_bracket, q_from_order
from gzroots.verify import (check_defining_relations,
                            check_root_of_unity_constraints,
                            invariant_subspace_scan)

Q3 = q_from_order(3)
Q_GENERIC = QPoint.generic(0.37)


def scaffold(row, n=None):
    """A pattern whose level len(row) equals the given row; other rows are
    fillers (the exchange machinery never validates them)."""
    l = len(row)
    n = n or l + 1
    rows = []
    for length in range(n, 0, -1):
        if length == l:
            rows.append(tuple(row))
        else:
            base = 10 * max(abs(v) for v in row) + 50
            rows.append(tuple(base - 7 * i for i in range(length)))
    return GZPattern(tuple(rows))


class TestClassify:
    def test_single_block(self):
        tp = classify_row_type((5, 2), 3)
        assert tp.subsets == ((1, 2),)
        assert tp.multiples == (1,)
        assert tp.is_type_state

    def test_two_blocks_with_offset(self):
        tp = classify_row_type((4, 2), 3)
        assert tp.subsets == ((1,), (2,))
        assert tp.offsets == {(1, 2): 2}

    def test_long_block_multiples(self):
        tp = classify_row_type((7, 4, 1), 3)
        assert tp.subsets == ((1, 2, 3),)
        assert tp.multiples == (1, 1)

    def test_anomalous_offsets_detected(self):
        # blocks one and three share a residue: not a proper type state
        tp = classify_row_type((11, 8, 1), 5)
        assert not tp.is_type_state


class TestExchange:
    def test_basic_swap(self):
        p = scaffold((5, 1))
        assert exchange_map(p, 2, 1, 2, 3).row(2) == (4, 2)

    def test_identity_disallowed(self):
        with pytest.raises(NotDegenerate):
            exchange_map(scaffold((5, 1)), 2, 1, 1, 3)

    def test_same_block_rejected(self):
        with pytest.raises(NotDegenerate):
            exchange_map(scaffold((5, 2)), 2, 1, 2, 3)

    def test_involution(self):
        p = scaffold((9, 4, 1))
        once = exchange_map(p, 3, 1, 2, 3)
        assert exchange_map(once, 3, 1, 2, 3).row(3) == p.row(3)

    @pytest.mark.parametrize("m", [3, 5])
    def test_composition_law_fuzz(self, m):
        rng = np.random.default_rng(100 + m)
        for _ in range(250):
            l = int(rng.integers(3, 6))
            zeta = int(rng.integers(1, m))
            betas = rng.integers(1, 4, size=l)
            row = [0] * l
            row[l - 1] = int(rng.integers(0, 5))
            for i in range(l - 2, 0, -1):
                row[i] = row[i + 1] + int(betas[i]) * m
            row[0] = row[1] + zeta + int(betas[0]) * m
            p = scaffold(tuple(row))
            mu, nu = sorted(rng.choice(range(2, l + 1), size=2, replace=False))
            via = exchange_map(exchange_map(p, l, 1, int(mu), m),
                               l, int(mu), int(nu), m)
            direct = exchange_map(p, l, 1, int(nu), m)
            assert via.row(l) == direct.row(l)

    @pytest.mark.parametrize("m", [3, 5])
    def test_weight_preserved_fuzz(self, m):
        rng = np.random.default_rng(200 + m)
        for _ in range(250):
            l = int(rng.integers(2, 5))
            row = [0] * l
            row[l - 1] = int(rng.integers(0, 6))
            for i in range(l - 2, -1, -1):
                row[i] = row[i + 1] + int(rng.integers(1, 3 * m))
            p = scaffold(tuple(row))
            for i in range(1, l + 1):
                for j in range(i + 1, l + 1):
                    try:
                        q = exchange_map(p, l, i, j, m)
                    except NotDegenerate:
                        continue
                    for lv in range(1, p.n):
                        assert cartan_exponent(q, lv) == cartan_exponent(p, lv)


class TestOrbit:
    def test_pair_orbit(self):
        p = GZPattern(((6, 2, 0), (5, 1), (3,)))
        orb = orbit(p, 2, 3)
        assert set(orb.members) == {(5, 1), (4, 2)}

    def test_singleton_when_partner_invalid(self):
        p = GZPattern(((5, 2, 0), (5, 1), (2,)))
        # partner (4,2) needs p11 > 2
        assert orbit(p, 2, 3).members == ((5, 1),)

    def test_fully_degenerate_row_is_fixed(self):
        p = GZPattern(((6, 3, 0), (6, 3), (4,)))
        assert orbit(p, 2, 3).members == ((6, 3),)

    def test_size_bounds(self):
        rng = np.random.default_rng(17)
        for _ in range(40):
            vals = sorted({int(v) for v in rng.integers(0, 15, size=3)},
                          reverse=True)
            if len(vals) < 3:
                continue
            basis = enumerate_basis(tuple(vals))
            p = basis.states[int(rng.integers(0, basis.dimension))]
            assert len(orbit(p, 2, 3).members) <= 2


class TestDetectCase:
    def test_case_a(self):
        assert detect_case_sl3(GZPattern(((9, 5, 0), (8, 5), (6,))), 3) == "a"

    def test_case_b(self):
        assert detect_case_sl3(GZPattern(((9, 3, 0), (8, 3), (4,))), 3) == "b"

    def test_case_c(self):
        assert detect_case_sl3(GZPattern(((9, 6, 0), (9, 5), (7,))), 3) == "c"

    def test_residues_outside_all_cases(self):
        # gap 2 at m = 5 leaves every denominator bracket alive
        assert detect_case_sl3(GZPattern(((8, 5, 0), (7, 5), (6,))), 5) is None

    def test_numerator_zero_rejected(self):
        with pytest.raises(PreconditionViolated):
            detect_case_sl3(GZPattern(((5, 2, 0), (4, 1), (3,))), 3)


class TestRotation:
    @pytest.mark.parametrize("case", ["a", "b", "c"])
    @pytest.mark.parametrize("gap", range(2, 21))
    def test_orthogonality(self, case, gap):
        D = rotation_sl3(case, gap, Q_GENERIC).matrix
        assert np.max(np.abs(D.T @ D - np.eye(2))) < 1e-12
        assert np.max(np.abs(D @ D.T - np.eye(2))) < 1e-12

    def test_formal_at_root(self):
        with pytest.raises(FormalAngle):
            rotation_sl3("b", 5, Q3)  # gap+1 = 6 vanishes at m = 3
        with pytest.raises(FormalAngle):
            rotation_sl3("a", 6, Q3)

    def test_aggregation_is_sum_of_squares(self):
        rng = np.random.default_rng(3)
        ratios = rng.normal(size=4) + 1j * rng.normal(size=4)
        agg = aggregate_modified_element(ratios)
        assert agg ** 2 == pytest.approx(sum(r ** 2 for r in ratios))


class TestAtypicalBuild:
    def test_dim15(self):
        g = build_atypical_sl3((5, 2, 0), 3)
        assert g.dimension == 15
        assert g.convention == "modified_sl3"
        assert check_defining_relations(g, 1e-8).passed
        assert check_root_of_unity_constraints(g, 3, 1e-8).passed
        assert invariant_subspace_scan(g, 1e-7) == [15]
        assert "rotation_gauge" in g.meta

    def test_all_entries_finite(self):
        g = build_atypical_sl3((5, 2, 0), 3)
        for mats in (g.e, g.f):
            for mat in mats.values():
                for v in mat.values():
                    assert np.isfinite(v.real) and np.isfinite(v.imag)

    def test_flat_delegation(self):
        g = build_atypical_sl3((4, 2, 0), 3)
        assert g.convention == "flat_sl3"

    def test_small_spread_rejected(self):
        with pytest.raises(ValueError):
            build_atypical_sl3((3, 1, 0), 3)

    def test_no_divergence_reduces_to_generic(self):
        # (7,2,0) at m = 3 resolves every zero by cancellation: the atypical
        # entry point must agree with the plain root build entry for entry
        g = build_atypical_sl3((7, 2, 0), 3)
        h = build_generic_rep((7, 2, 0), Q3)
        for l in (1, 2):
            assert g.e[l].keys() == h.e[l].keys()
            assert all(abs(g.e[l][k] - h.e[l][k]) < 1e-12 for k in g.e[l])
            assert all(abs(g.f[l][k] - h.f[l][k]) < 1e-12 for k in g.f[l])

    def test_cancellation_matches_off_root_limit(self):
        # the exact-root cancellation rule must equal the limit of the
        # uncancelled matrices built slightly off the root
        basis = enumerate_basis((7, 2, 0))
        h = build_generic_rep((7, 2, 0), Q3)
        with mpmath.workdps(80):
            delta = mpmath.mpf(10) ** -25
            theta = (2 * mpmath.pi / 3) * (1 - delta)
            table = CoherentRoots(theta, 9)
            F = _primitive_mp(basis, table)
            for l in (1, 2):
                for (r, c), v in h.f[l].items():
                    assert abs(complex(F[l][r, c]) - v) < 1e-10
                # entries killed by unmatched numerator zeros vanish in the limit
                for r in range(basis.dimension):
                    for c in range(basis.dimension):
                        if (r, c) not in h.f[l]:
                            assert abs(complex(F[l][r, c])) < 1e-10

    def test_deep_chain_reported(self):
        with pytest.raises(UnresolvedDivergence) as exc:
            build_atypical_sl3((6, 3, 0), 3)
        assert exc.value.context.get("deep_chains")

    def test_wider_modules_verify(self):
        for top, m in [((6, 2, 0), 3), ((5, 3, 0), 3)]:
            g = build_atypical_sl3(top, m)
            assert check_defining_relations(g, 1e-8).passed
            assert check_root_of_unity_constraints(g, m, 1e-8).passed


class TestModifiedLadder:
    def test_case_a_emits_rotated_target(self):
        # the clean case-a source state maps onto the modified pair with
        # squared coefficient matching the closed form
        st = ModifiedState(GZPattern(((5, 2, 0), (5, 2), (4,))), "primitive")
        terms = modified_ladder_sl3(st, 2, "lower", Q3, 3)
        assert len(terms) == 1
        t = terms[0]
        assert t.target.flavor == "modified"
        assert t.target.pattern.row(2) == (5, 2 - 1)
        # closed form: [2][p13-p22+1][p23-p22+1][p22-p33-1][p11-p22] over
        # [gap-1][gap+1], arguments reduced mod m
        num = np.prod([q_bracket(a, Q3).value for a in (2, 4, 1, 1, 2)])
        den = np.prod([q_bracket(a, Q3).value for a in (2, 4)])
        assert t.coefficient ** 2 == pytest.approx(num / den, abs=1e-10)

    def test_lowering_chain_collapse(self):
        # at the bottom of the pair tower f_1 lands on a primitive state with
        # squared coefficient [m-1]^2 [m+1]/[2]
        st = ModifiedState(GZPattern(((5, 2, 0), (4, 2), (3,))), "modified")
        terms = modified_ladder_sl3(st, 1, "lower", Q3, 3)
        assert len(terms) == 1
        t = terms[0]
        assert t.target.flavor == "primitive"
        assert t.target.pattern.row(2) == (5, 1) and t.target.pattern.p(1, 1) == 2
        expected = (q_bracket(2, Q3).value ** 2 * q_bracket(4, Q3).value
                    / q_bracket(2, Q3).value)
        assert t.coefficient ** 2 == pytest.approx(expected, abs=1e-10)

    def test_other_collapse_branch(self):
        st = ModifiedState(GZPattern(((5, 2, 0), (5, 1), (3,))), "modified")
        terms = modified_ladder_sl3(st, 1, "lower", Q3, 3)
        assert len(terms) == 1
        # squared coefficient [m-1]/[2] = 1 at m = 3
        assert terms[0].coefficient ** 2 == pytest.approx(1.0, abs=1e-10)

    def test_plain_state_rejected(self):
        st = ModifiedState(GZPattern(((5, 2, 0), (3, 2), (3,))), "primitive")
        with pytest.raises(UnknownCase):
            modified_ladder_sl3(st, 2, "lower", Q3, 3)

    def test_zero_kappa_state_not_a_case(self):
        # p11 - p22 = 0 mod m kills every case coefficient: the state resolves
        # by cancellation instead and is not part of the modified machinery
        st = ModifiedState(GZPattern(((5, 2, 0), (5, 2), (5,))), "primitive")
        with pytest.raises(UnknownCase):
            modified_ladder_sl3(st, 2, "lower", Q3, 3)
