import numpy as np
import pytest
from hypothesis import given, strategies as st

from dcsym.expr import DEFAULT_DOMAIN, expand, is_zero, parse
from dcsym.lie import (
    AlgebraSpec, VectorField, check_algebra, check_jacobi, check_symmetry, commutator,
    invariance_residual, structure_constants,
)
from dcsym.pde import DCEquation, equation_from_residual
from oracle import lie_residual, numeric_zero, to_sympy

HEAT = DCEquation()
HEAT_ALGEBRA = [
    VectorField.parse("1", "0", "0"),
    VectorField.parse("0", "1", "0"),
    VectorField.parse("0", "0", "u"),
    VectorField.parse("2*t", "x", "0"),
    VectorField.parse("0", "2*t", "-x*u"),
    VectorField.parse("4*t^2", "4*t*x", "-(x^2 + 2*t)*u"),
]


@pytest.mark.parametrize("Q", HEAT_ALGEBRA, ids=lambda Q: str(Q))
def test_heat_symmetries(Q):
    assert check_symmetry(HEAT, Q).passed


def test_non_symmetry_fails_with_witness():
    rep = check_symmetry(HEAT, VectorField.parse("t", "0", "0"))
    assert not rep.passed and rep.witness


@pytest.mark.parametrize("case", [
    ("u_t - u^(1/2)*u_xx - 1/2*u^(-1/2)*u_x^2", ("2*t", "x", "0"), True),
    ("u_t - u^(1/2)*u_xx - 1/2*u^(-1/2)*u_x^2", ("0", "x", "4*u"), True),
    ("u_t - exp(u)*u_xx - exp(u)*u_x^2", ("t", "0", "-1"), True),
    ("u_t - exp(u)*u_xx - exp(u)*u_x^2", ("t", "0", "1"), False),
    ("x^2*u_t - u^(-6/5)*u_xx + 6/5*u^(-11/5)*u_x^2 - x^2*u_x", ("t^2", "2*t*x + x^2", "-5*(t + x)*u"), True),
])
def test_invariance_against_independent_prolongation(case):
    """Characteristic-form residual vs the classical recursive formulas in sympy."""
    text, coeffs, expected = case
    eq = equation_from_residual(parse(text))
    Q = VectorField.parse(*coeffs)
    ours = is_zero(invariance_residual(eq, Q), DEFAULT_DOMAIN.with_(intervals={"u": (0.5, 2.0)})).zero
    L = to_sympy(text)
    ref = lie_residual(L, *(to_sympy(c) for c in coeffs))
    theirs = numeric_zero(ref, ["t", "x", "u", "u_x", "u_xx"], np.random.default_rng(0))
    assert ours == theirs == expected


def test_commutator_of_heat_generators():
    G, Pi = HEAT_ALGEBRA[4], HEAT_ALGEBRA[5]
    br = commutator(HEAT_ALGEBRA[0], Pi)
    assert [expand(c) for c in br.coefficients] == [expand(parse(c)) for c in ("8*t", "4*x", "-2*u")]
    assert commutator(G, G).is_zero_field()


fields = st.tuples(*[st.sampled_from(["0", "1", "t", "x", "u", "x*u", "t^2", "exp(x)"])] * 3).map(
    lambda c: VectorField.parse(*c))


@given(fields, fields)
def test_commutator_antisymmetry(P, Q):
    s = commutator(P, Q) + commutator(Q, P)
    assert s.is_zero_field()


@given(fields, fields, fields)
def test_jacobi_property(P, Q, R):
    assert check_jacobi([P, Q, R]).passed


def test_structure_constants_and_algebra_check():
    basis = [VectorField.parse("1", "0", "0"), VectorField.parse("t", "x/2", "0"),
             VectorField.parse("t^2", "t*x", "0")]
    consts = structure_constants(basis)
    assert consts == {(0, 1, 0): 1, (0, 2, 1): 2, (1, 2, 2): 1}
    spec = AlgebraSpec(basis, {(0, 1, 0): 1, (0, 2, 1): 2, (1, 2, 2): 1}, "sl2 on heat")
    assert check_algebra(spec).passed
    wrong = AlgebraSpec(basis, {(0, 1, 0): 1, (0, 2, 1): 1, (1, 2, 2): 1}, "wrong")
    assert not check_algebra(wrong).passed


def test_antisymmetry_is_enforced_in_spec():
    with pytest.raises(ValueError):
        AlgebraSpec(HEAT_ALGEBRA[:2], {(0, 1, 0): 1, (1, 0, 0): 1})
