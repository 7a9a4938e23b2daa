"""Explicit Gelfand-Zetlin matrix representations of the quantum algebra
U_q(sl(N)), including flat and atypical modules at odd roots of unity."""

from .qarith import (BracketValue, EvenOrderUnsupported, QPoint, UnityOrder,
                     bracket_periodicity, epsilon, q_bracket, q_from_order,
                     sqrt_signed_product)
from .gzbasis import (EmptyModule, GZPattern, ModuleBasis, TopRow,
                      cartan_exponent, enumerate_basis, generic_dimension,
                      parse_pattern, validate_pattern, weight_table)
from .genrep import (DivergentElement, GeneratorSet, LadderTerm, NotFlat,
                     PFactors, build_flat_sl3, build_generic_rep,
                     ladder_action, p_factors)
from .verify import (OrderMismatch, VerificationReport, cartan_matrix,
                     check_defining_relations, check_root_of_unity_constraints,
                     find_singular_vectors, full_report, invariant_closure,
                     invariant_subspace_scan)
from .atypical import (BasisRotation, DegenerateOrbit, FormalAngle,
                       ModifiedState, ModifiedTerm, NotDegenerate,
                       PreconditionViolated, TypePartition, UnknownCase,
                       UnresolvedDivergence, build_atypical_sl3,
                       classify_row_type, detect_case_sl3, exchange_map,
                       modified_ladder_sl3, orbit, rotation_sl3)

__version__ = "0.1.0"
