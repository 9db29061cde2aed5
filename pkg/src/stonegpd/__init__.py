"""Finite groupoids of models, equivariant sheaves over them, and duality checks."""
from __future__ import annotations

from .catalog import load, tracked
from .classifier import classifier, classifying_morphism, pullback_sheaf
from .duality import (adequacy_probe, check_triangle_identities, counit_eval, form_category, hom_set,
                      mod_functor, objects_equal, unit)
from .errors import GuardError, VerificationError
from .logic.parser import parse_in_context, parse_theory
from .logical import logical_groupoid
from .models import build_groupoid, check_semantic_decidability, enumerate_models
from .report import Report
from .sheaves import decompose_stable_open, definable_sheaf, stabilize, stabilize_formula
from .stone import BooleanAlgebra, DistributiveLattice, spectrum
from .topology import FiniteTopology

__version__ = "0.1.0"

__all__ = [
    "BooleanAlgebra", "DistributiveLattice", "FiniteTopology", "GuardError", "Report", "VerificationError",
    "adequacy_probe", "build_groupoid", "check_semantic_decidability", "check_triangle_identities",
    "classifier", "classifying_morphism", "counit_eval", "decompose_stable_open", "definable_sheaf",
    "enumerate_models", "form_category", "hom_set", "load", "logical_groupoid", "mod_functor",
    "objects_equal", "parse_in_context", "parse_theory", "pullback_sheaf", "spectrum", "stabilize",
    "stabilize_formula", "tracked", "unit",
]
