"""Bound quiver algebras, gbp-algebras and their simplifications."""

from .algebra import (Admissibility, BoundPathAlgebra, LinComb, Status, canonical_relations,
                      check_admissible, dimension, field_algebra, ideal_membership, ideal_span,
                      ideals_equal, is_relation, nilpotency_bound, quotient_basis)
from .errors import CapExceeded, InconclusiveAdmissibility, QuiverMismatch, ValidationError
from .gbp import (ExpandedPresentation, GbpAlgebra, expand, expanded_quiver, gbp_equivalent,
                  induced_relations, trivial_gbp_gabriel, trivial_gbp_single, validate_gbp)
from .partitions import bell, iter_rgs
from .quiver import (Arrow, Path, Quiver, VertexPartition, compose, enumerate_paths, is_acyclic,
                     quiver_isomorphic, quotient_quiver, reduced_quiver)
from .simplify import (Labelling, RelationClass, SearchReport, build_simplification,
                       canonical_labelling, classify_relation, count_labellings, decompose_path,
                       enumerate_labellings, expansion_matches, is_coherent, is_compatible,
                       loop_simplification, partition_from_gbp, search_simplifications)

__all__ = [name for name in dir() if not name.startswith("_")]
