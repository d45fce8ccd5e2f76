"""Contractions between equations of the class and their symmetry data."""

from .ansatz import ansatz_pairs, contract_all_ansatzes, contract_ansatz
from .core import (
    ContractionInstance, ContractionSpec, DegenerateRecipe, JetPoint, UnknownContraction,
    all_specs, base_point, check_limit_equation, check_parameter_derivative,
    check_recipe_errata, check_weak_convergence, combine, contract_operator, field_limit,
    get_spec, instantiate, limit_equation, recipe_coefficients, register_specs,
    verify_contraction,
)
from .limits import (
    CertificationError, LimitRule, NoRegisteredLimit, RULES, Series, certified_rules,
    certify_rule, leading_term, limit, series,
)
