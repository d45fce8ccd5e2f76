"""Expression language: parsing, normal form, derivatives, evaluation, zero tests."""

from .calculus import (
    OrderOverflow, depends_on, diff, jet, jet_name, jet_table, replace_nodes, split_jet,
    substitute, substitute_raw, total_diff, with_positive, with_signs,
)
from .expand import expand, normalize, terms_of, together
from .nodes import (
    HALF, KERNELS, MINUS_ONE, ONE, ZERO, Add, Expr, Fn, Mul, Num, Pow, Sym, add, as_expr,
    exp, fn, ln, mul, neg, num, power, sqrt, sym, symbols,
)
from .numeric import (
    ATOL, DEFAULT_DOMAIN, RTOL, AllSingular, Domain, SingularEvaluation, UnboundSymbol,
    ZeroTest, evaluate, is_zero,
)
from .parser import ParseError, parse
from .poly import NotPolynomial, collect_poly, reassemble
from .printer import to_string

__all__ = [
    "Expr", "Num", "Sym", "Add", "Mul", "Pow", "Fn", "KERNELS", "ZERO", "ONE", "MINUS_ONE",
    "HALF", "add", "mul", "power", "fn", "neg", "num", "sym", "symbols", "exp", "ln",
    "sqrt", "as_expr", "parse", "ParseError", "to_string", "expand", "normalize",
    "together", "terms_of", "diff", "total_diff", "substitute", "substitute_raw",
    "jet_table", "jet", "jet_name", "split_jet", "replace_nodes", "with_positive",
    "with_signs", "depends_on", "OrderOverflow", "evaluate", "is_zero", "Domain",
    "DEFAULT_DOMAIN", "ZeroTest", "ATOL", "RTOL", "AllSingular", "SingularEvaluation",
    "UnboundSymbol", "collect_poly", "reassemble", "NotPolynomial",
]
