"""Numerical verification of a GeneratorSet against the defining relations.

Deliberately construction-agnostic: only the matrices (and q) are consumed,
never pattern metadata, so this is an independent check of whatever a builder
produced.  Dense linear algebra throughout; fine for desk-scale modules.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List

import numpy as np

from .genrep import GeneratorSet
from .qarith import UnityOrder


class OrderMismatch(ValueError):
    pass


def cartan_matrix(n: int) -> np.ndarray:
    """Cartan matrix of sl(n): 2 on the diagonal, -1 on the off-diagonals."""
    a = 2 * np.eye(n - 1, dtype=int)
    for i in range(n - 2):
        a[i, i + 1] = a[i + 1, i] = -1
    return a


@dataclass
class RelationSuite:
    cartan: np.ndarray
    tolerance: float = 1e-9


@dataclass
class VerificationReport:
    residuals: Dict[str, float]
    tolerance: float
    singular_vectors: List[np.ndarray] = field(default_factory=list)
    invariant_dims: List[int] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(r <= self.tolerance for r in self.residuals.values())

    @property
    def max_residual(self) -> float:
        return max(self.residuals.values()) if self.residuals else 0.0

    def to_dict(self) -> dict:
        return {
            "residuals": {k: float(v) for k, v in self.residuals.items()},
            "tolerance": self.tolerance,
            "passed": bool(self.passed),
            "invariant_dims": [int(d) for d in self.invariant_dims],
            "n_singular_vectors": len(self.singular_vectors),
        }


def _norm(mat: np.ndarray) -> float:
    return float(np.max(np.abs(mat))) if mat.size else 0.0


def check_defining_relations(g: GeneratorSet, tol: float = 1e-9) -> VerificationReport:
    """Max-norm residual of every defining relation of the quantum algebra."""
    n = g.basis.top.n
    a = cartan_matrix(n)
    q = g.q.value
    E = {l: g.e_matrix(l) for l in g.rank_levels}
    F = {l: g.f_matrix(l) for l in g.rank_levels}
    K = {l: g.k_matrix(l) for l in g.rank_levels}
    Kinv = {l: g.k_inv_matrix(l) for l in g.rank_levels}
    res: Dict[str, float] = {}
    two = q + 1 / q

    for i in g.rank_levels:
        for j in g.rank_levels:
            aij = a[i - 1, j - 1]
            res[f"k{i}_e{j}"] = _norm(K[i] @ E[j] @ Kinv[i] - q ** aij * E[j])
            res[f"k{i}_f{j}"] = _norm(K[i] @ F[j] @ Kinv[i] - q ** (-aij) * F[j])
            comm = E[i] @ F[j] - F[j] @ E[i]
            if i == j:
                comm = comm - (K[i] - Kinv[i]) / (q - 1 / q)
            res[f"e{i}_f{j}_commutator"] = _norm(comm)
            if abs(i - j) > 1:
                res[f"distant_e{i}_e{j}"] = _norm(E[i] @ E[j] - E[j] @ E[i])
                res[f"distant_f{i}_f{j}"] = _norm(F[i] @ F[j] - F[j] @ F[i])
            if abs(i - j) == 1:
                res[f"serre_e{i}_e{j}"] = _norm(
                    E[i] @ E[i] @ E[j] - two * E[i] @ E[j] @ E[i] + E[j] @ E[i] @ E[i])
                res[f"serre_f{i}_f{j}"] = _norm(
                    F[i] @ F[i] @ F[j] - two * F[i] @ F[j] @ F[i] + F[j] @ F[i] @ F[i])
    return VerificationReport(res, tol)


def check_root_of_unity_constraints(g: GeneratorSet, m, tol: float = 1e-9) -> VerificationReport:
    """Nilpotency e^m = f^m = 0 and k^m = 1 for a build at a root of order m."""
    order = m if isinstance(m, UnityOrder) else UnityOrder(int(m))
    if not (g.q.is_root and g.q.m == order.m):
        raise OrderMismatch(f"generator set was not built at a root of order {order.m}")
    res: Dict[str, float] = {}
    eye = np.eye(g.dimension)
    for l in g.rank_levels:
        res[f"e{l}_nilpotent"] = _norm(np.linalg.matrix_power(g.e_matrix(l), order.m))
        res[f"f{l}_nilpotent"] = _norm(np.linalg.matrix_power(g.f_matrix(l), order.m))
        res[f"k{l}_order"] = _norm(np.linalg.matrix_power(g.k_matrix(l), order.m) - eye)
    return VerificationReport(res, tol)


def find_singular_vectors(g: GeneratorSet, tol: float = 1e-7) -> List[np.ndarray]:
    """Orthonormal basis of the joint kernel of all raising generators."""
    stacked = np.vstack([g.e_matrix(l) for l in g.rank_levels])
    _, s, vh = np.linalg.svd(stacked)
    dim = g.dimension
    rank = int(np.sum(s > tol)) if s.size else 0
    return [vh[i].conj() for i in range(rank, dim)]


def invariant_closure(g: GeneratorSet, seed: np.ndarray, tol: float = 1e-7) -> np.ndarray:
    """Orthonormal rows spanning the smallest invariant subspace containing
    the seed vector (closure under repeated generator application)."""
    gens = [g.e_matrix(l) for l in g.rank_levels]
    gens += [g.f_matrix(l) for l in g.rank_levels]
    gens += [g.k_matrix(l) for l in g.rank_levels]
    span = seed.reshape(1, -1) / np.linalg.norm(seed)
    for _ in range(g.dimension):
        candidates = [span] + [(mat @ span.T).T for mat in gens]
        stacked = np.vstack(candidates)
        _, s, vh = np.linalg.svd(stacked)
        rank = int(np.sum(s > tol))
        new_span = vh[:rank]
        if rank == span.shape[0]:
            return new_span
        span = new_span
    return span


def _closure_dim(g: GeneratorSet, seed: np.ndarray, tol: float) -> int:
    return invariant_closure(g, seed, tol).shape[0]


def invariant_subspace_scan(g: GeneratorSet, tol: float = 1e-7) -> List[int]:
    """Closure dimension for each singular vector (sorted descending)."""
    dims = [_closure_dim(g, v, tol) for v in find_singular_vectors(g, tol)]
    return sorted(dims, reverse=True)


def full_report(g: GeneratorSet, tol: float = 1e-9, rank_tol: float = 1e-7) -> VerificationReport:
    """Defining relations plus singular-vector structure in one report."""
    rep = check_defining_relations(g, tol)
    if g.q.is_root:
        root = check_root_of_unity_constraints(g, UnityOrder(g.q.m), tol)
        rep.residuals.update(root.residuals)
    rep.singular_vectors = find_singular_vectors(g, rank_tol)
    rep.invariant_dims = invariant_subspace_scan(g, rank_tol)
    return rep
