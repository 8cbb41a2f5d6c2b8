"""Exact computations on integro-derivation (IDD) algebras of polynomials."""

from idd.algebra import (
    AlgebraSpec, Element, OutOfWindow, SpecParseError, StructureTable, build_table, multiply,
    op_coeff, opposite_table, parse_spec,
)
from idd.classify import Classification, Discrepancy, classify, classify_window, enumerate_ideals
from idd.derivations import LinearMap, check_leibniz, infinite_family_check, solve_derivations
from idd.identities import StarTable, check_conservative, check_generalized_associative, check_left_commutative
from idd.linalg import RatMatrix, Subspace

__version__ = "0.1.0"

__all__ = [
    "AlgebraSpec", "Element", "OutOfWindow", "SpecParseError", "StructureTable", "build_table", "multiply",
    "op_coeff", "opposite_table", "parse_spec", "Classification", "Discrepancy", "classify",
    "classify_window", "enumerate_ideals", "LinearMap", "check_leibniz", "infinite_family_check",
    "solve_derivations", "StarTable", "check_conservative", "check_generalized_associative",
    "check_left_commutative", "RatMatrix", "Subspace",
]
