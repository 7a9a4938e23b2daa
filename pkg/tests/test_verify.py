import numpy as np
import pytest

from gzroots.genrep import GeneratorSet, build_flat_sl3, build_generic_rep
from gzroots.gzbasis import enumerate_basis
from gzroots.qarith import QPoint, q_from_order
from gzroots.verify import (OrderMismatch, cartan_matrix,
                            check_defining_relations,
                            check_root_of_unity_constraints,
                            find_singular_vectors, full_report,
                            invariant_closure, invariant_subspace_scan)

Q_GENERIC = QPoint.generic(0.37)


def make_trivial_set(top=(3, 1, 0)):
    """Zero ladder operators with unit k's: satisfies everything trivially."""
    basis = enumerate_basis(top)
    n = basis.top.n
    zero = {l: {} for l in range(1, n)}
    k = {l: tuple(0 for _ in basis) for l in range(1, n)}
    return GeneratorSet(basis, zero, {l: {} for l in range(1, n)}, k,
                        Q_GENERIC, "generic")


class TestCartanMatrix:
    def test_sl4(self):
        a = cartan_matrix(4)
        assert a.tolist() == [[2, -1, 0], [-1, 2, -1], [0, -1, 2]]


class TestRelations:
    def test_generic_module_passes(self):
        g = build_generic_rep((3, 1, 0), Q_GENERIC)
        rep = check_defining_relations(g, 1e-10)
        assert rep.passed and rep.max_residual < 1e-10

    def test_zero_generators_pass_trivially(self):
        rep = check_defining_relations(make_trivial_set(), 1e-12)
        assert rep.passed

    def test_fault_injection_detected(self):
        g = build_generic_rep((3, 1, 0), Q_GENERIC)
        key = next(iter(g.e[1]))
        g.e[1][key] += 1e-3
        assert not check_defining_relations(g, 1e-9).passed

    def test_fault_at_ten_tolerances_detected(self):
        g = build_generic_rep((4, 2, 0), Q_GENERIC)
        tol = 1e-9
        key = next(iter(g.f[2]))
        g.f[2][key] += 10 * tol
        assert not check_defining_relations(g, tol).passed


class TestRootConstraints:
    def test_flat_module(self):
        g = build_flat_sl3((4, 2, 0), 3)
        rep = check_root_of_unity_constraints(g, 3, 1e-9)
        assert rep.passed

    def test_generic_q_rejected(self):
        g = build_generic_rep((3, 1, 0), Q_GENERIC)
        with pytest.raises(OrderMismatch):
            check_root_of_unity_constraints(g, 3)

    def test_k_order_exact_for_trivial_exponents(self):
        g = make_trivial_set()
        g.q = q_from_order(3)
        rep = check_root_of_unity_constraints(g, 3, 1e-12)
        assert rep.residuals["k1_order"] == 0.0


class TestSingularVectors:
    def test_generic_has_only_highest_weight(self):
        g = build_generic_rep((3, 1, 0), Q_GENERIC)
        vecs = find_singular_vectors(g, 1e-7)
        assert len(vecs) == 1

    def test_flat_has_two(self):
        g = build_flat_sl3((4, 2, 0), 3)
        assert len(find_singular_vectors(g, 1e-7)) == 2

    def test_zero_raising_gives_full_basis(self):
        g = make_trivial_set()
        assert len(find_singular_vectors(g, 1e-7)) == g.dimension

    def test_rank_stable_under_tolerance_wiggle(self):
        for g in (build_flat_sl3((4, 2, 0), 3),
                  build_generic_rep((5, 3, 0), Q_GENERIC)):
            for tol in (1e-8, 1e-7, 1e-6):
                assert len(find_singular_vectors(g, tol)) == len(
                    find_singular_vectors(g, 1e-7))
                assert invariant_subspace_scan(g, tol) == \
                    invariant_subspace_scan(g, 1e-7)


class TestClosures:
    def test_flat_seven_plus_one(self):
        g = build_flat_sl3((4, 2, 0), 3)
        assert invariant_subspace_scan(g, 1e-7) == [7, 1]

    def test_closure_span_is_invariant(self):
        g = build_flat_sl3((4, 2, 0), 3)
        hw = [v for v in find_singular_vectors(g, 1e-7)]
        for seed in hw:
            span = invariant_closure(g, seed, 1e-7)
            for l in g.rank_levels:
                image = g.f_matrix(l) @ span.T
                # the image must stay inside the span
                proj = span.conj().T @ (span.conj() @ image).conj()
                resid = np.max(np.abs(image - span.T @ (span.conj() @ image)))
                assert resid < 1e-7

    def test_report_serializable(self):
        g = build_flat_sl3((4, 2, 0), 3)
        d = full_report(g, tol=1e-9).to_dict()
        assert d["passed"] is True
        assert sorted(d["invariant_dims"], reverse=True) == [7, 1]
