"""Classification tables, named equations, exact solutions and transformations."""

import yaml

from .algebras import AlgebraRecord, UnknownAlgebra, all_algebras, get_algebra, register_algebras, verify_algebra
from .cases import (
    ClassificationCase, UnknownCase, all_cases, case, get_case, register_cases, verify_case,
    verify_printed_errata,
)
from .constraints import ConstraintViolation, check_constraint
from .solutions import (
    ExactSolution, NamedEquation, UnknownEquation, UnknownSolution, all_equations,
    all_solutions, get_equation, get_solution, named_equation, register_equations,
    register_solutions, verify_database, verify_solution,
)
from .transforms import (
    DegenerateTransform, EquivalenceTransform, NotInvertible, NotRepresentable,
    PointTransform, apply_differential, apply_equivalence, check_equivalence, check_pullback,
    get_transform, list_named_transforms, map_solution, preimage_records, pull_field, push_field,
    register_transforms, roundtrip,
)

_SECTIONS = ("equations", "cases", "solutions", "transforms", "algebras")
_extra_sections = {}


def register_section(name, loader):
    """Let another module own a catalog-file section (contractions, reductions, ...)."""
    _extra_sections[name] = loader


def load_catalog_file(path):
    """Extend the built-in catalog with a file in the same format.

    Returns the number of records added per section.
    """
    with open(path) as fh:
        data = yaml.safe_load(fh) or {}
    unknown = set(data) - set(_SECTIONS) - set(_extra_sections) - {"preimages"}
    if unknown:
        raise ValueError("unknown catalog sections: %s" % ", ".join(sorted(unknown)))
    register_equations(data.get("equations", ()))
    register_cases(data.get("cases", ()))
    register_solutions(data.get("solutions", ()))
    register_transforms(data.get("transforms", ()))
    register_algebras(data.get("algebras", ()))
    for name, loader in _extra_sections.items():
        loader(data.get(name, ()))
    return {k: len(data.get(k, ())) for k in _SECTIONS + tuple(_extra_sections)}
