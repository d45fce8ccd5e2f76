import numpy as np
import pytest
import sympy as sp

from dcsym.catalog import (
    ConstraintViolation, UnknownCase, all_algebras, all_cases, all_solutions, case, check_constraint,
    check_pullback, get_case, get_equation, get_solution, get_transform, list_named_transforms,
    load_catalog_file, map_solution, named_equation, roundtrip, verify_algebra, verify_case, verify_printed_errata,
    verify_solution,
)
from dcsym.expr import parse, substitute
from dcsym.pde import solution_residual
from oracle import lie_residual, numeric_zero, substitute_solution, to_sympy

CASE_IDS = [c.case_id for c in all_cases()]


@pytest.mark.parametrize("case_id", CASE_IDS)
def test_every_row_passes(case_id):
    rep = verify_case(case_id)
    assert rep.passed, rep.notes


@pytest.mark.parametrize("case_id", CASE_IDS)
def test_parametric_rows_have_two_picks(case_id):
    c = case(case_id)
    if c.params:
        assert len(c.pick_values()) >= 2
        for p in c.pick_values():
            assert c.satisfies(p)


def _concrete(c):
    opaque = {"A", "B", "f", "h", "g"}
    return not c.f_rule and all(not (opaque & set(v.replace("exp", "").split())) and v not in opaque
                                for _, v in c.elements)


CONCRETE = [c.case_id for c in all_cases() if _concrete(c) and c.gauge == "g=1"]


@pytest.mark.parametrize("case_id", CONCRETE)
def test_rows_against_independent_prolongation(case_id):
    """The sympy recursive prolongation agrees on the first stored pick."""
    c = case(case_id)
    eq, basis = c.instantiate(c.pick_values()[0])
    pos = ("x", "u")
    el = {k: to_sympy(getattr(eq, k), pos) for k in ("f", "g", "h", "A", "B")}
    u, x = sp.Symbol("u", positive=True), sp.Symbol("x", positive=True)
    ux = sp.Symbol("u_x")
    gA = el["g"] * el["A"]
    L = (el["f"] * sp.Symbol("u_t") - sp.diff(gA, x) * ux - sp.diff(gA, u) * ux ** 2
         - gA * sp.Symbol("u_xx") - el["h"] * el["B"] * ux)
    plain = {u: sp.Symbol("u"), x: sp.Symbol("x")}
    rng = np.random.default_rng(1)
    for Q in basis:
        coeffs = (to_sympy(k, pos).subs(plain) for k in Q.coefficients)
        r = lie_residual(L.subs(plain), *coeffs)
        assert numeric_zero(r, ["t", "x", "u", "u_x", "u_xx"], rng), (case_id, str(Q))


def test_concrete_rows_are_exercised():
    assert len(CONCRETE) >= 15


@pytest.mark.parametrize("case_id", [c.case_id for c in all_cases() if c.errata])
def test_printed_generators_fail(case_id):
    assert not verify_printed_errata(case_id).passed


def test_unknown_case():
    with pytest.raises(UnknownCase):
        case("9.9")


def test_constraint_rejects_excluded_parameter():
    assert check_constraint("p not in {-3, -2, 0}", {"p": 1})
    assert not check_constraint("p not in {-3, -2, 0}", {"p": -2})
    c = next(c for c in all_cases() if c.constraints)
    bad = {p: 99 for p in c.params}
    with pytest.raises(ConstraintViolation):
        c.instantiate(bad)


# -- exact solutions -------------------------------------------------------------

def _by_equation(name):
    return [s.sol_id for s in all_solutions() if s.equation == name]


def test_solution_counts():
    assert len(_by_equation("fast-diffusion")) == 13
    assert len(_by_equation("exp-fast-diffusion")) == 12
    assert len(_by_equation("reaction-burgers")) == 3
    assert len(_by_equation("gaussian-burgers")) == 3
    assert len(_by_equation("sl2-potential")) >= 9


@pytest.mark.parametrize("sol_id", [s.sol_id for s in all_solutions()])
def test_database_solution(sol_id):
    assert verify_solution(sol_id).passed


@pytest.mark.parametrize("sol_id", [s.sol_id for s in all_solutions() if s.printed is not None])
def test_printed_transcription_fails(sol_id):
    rep = verify_solution(sol_id, printed=True)
    assert not rep.passed and rep.witness


@pytest.mark.parametrize("sol_id", _by_equation("fast-diffusion") + ["sqrt-1"])
def test_solutions_against_sympy(sol_id):
    sol = get_solution(sol_id)
    A = {"fast-diffusion": "u^(-1)", "sqrt-diffusion": "u^(-1/2)"}[sol.equation]
    u, ux = sp.symbols("u u_x")
    L = sp.Symbol("u_t") - sp.diff(to_sympy(A) * ux, u) * ux - to_sympy(A) * sp.Symbol("u_xx")
    rng = np.random.default_rng(3)
    dom = sol.domain()
    for k in range(6):
        pick = {n: sp.Rational(str(rng.choice(v))) for n, v in dict(dom.choices).items()}
        expr = to_sympy(sol.expr).subs({sp.Symbol(n): v for n, v in pick.items()})
        r = substitute_solution(L, expr)
        f = sp.lambdify(sp.symbols("t x"), r, "numpy")
        for t, x in rng.uniform(0.5, 1.5, size=(5, 2)):
            val = complex(f(t, x))
            if np.isfinite(abs(val)):
                assert abs(val) < 1e-7 * (1 + abs(complex(sp.lambdify(sp.symbols("t x"), expr)(t, x))))


# -- transformations ------------------------------------------------------------

POINT = [T.name for T in list_named_transforms() if T.kind == "point"]


@pytest.mark.parametrize("name", POINT)
def test_point_transforms(name):
    T = get_transform(name)
    assert roundtrip(T).passed
    assert check_pullback(T, get_equation(T.source), get_equation(T.target)).passed


def test_printed_variable_burgers_is_not_the_image():
    T = get_transform("burgers-to-variable-burgers")
    src = get_equation("reaction-burgers")
    printed = named_equation("variable-burgers").printed
    assert printed is not None
    assert not check_pullback(T, src, printed).passed


@pytest.mark.parametrize("sol_id", _by_equation("exp-fast-diffusion"))
def test_fast_diffusion_images(sol_id):
    """Pulling each fast-diffusion solution back lands on a solution of the exponential form."""
    T = get_transform("eq3-to-fast-diffusion")
    image = get_solution(sol_id)
    pulled = map_solution(T, get_solution(image.image_of).expr, "pull")
    assert solution_residual(get_equation("exp-fast-diffusion"), pulled, image.domain()).passed


def test_cole_hopf_is_one_way():
    T = get_transform("cole-hopf")
    img = map_solution(T, "1 + x^2")
    assert sp.simplify(to_sympy(img) - 4 * sp.Symbol("x") / (1 + sp.Symbol("x") ** 2)) == 0
    with pytest.raises(ValueError):
        map_solution(T, "1 + x", "push")


# -- algebras and external catalogs ---------------------------------------------

@pytest.mark.parametrize("alg", [a.alg_id for a in all_algebras()])
def test_algebras(alg):
    assert verify_algebra(next(a for a in all_algebras() if a.alg_id == alg)).passed


def test_load_external_catalog(tmp_path):
    path = tmp_path / "extra.yaml"
    path.write_text("""
cases:
- id: "x.heat"
  table: 9
  A: "1"
  B: "0"
  f: "1"
  g: "1"
  h: "0"
  generators:
  - ["1", "0", "0"]
  - ["0", "1", "0"]
  - ["2*t", "x", "0"]
solutions:
- {id: x-fd-1, equation: fast-diffusion, expr: "2*t*x^(-2)"}
""")
    counts = load_catalog_file(path)
    assert counts["cases"] == 1 and counts["solutions"] == 1
    assert verify_case("x.heat").passed
    assert verify_solution("x-fd-1").passed
    bad = tmp_path / "bad.yaml"
    bad.write_text("widgets: []\n")
    with pytest.raises(ValueError):
        load_catalog_file(bad)


@pytest.mark.parametrize("p", ["1", "-1/2"])
def test_gaussian_burgers_is_row_3_10(p):
    eq, _ = get_case("3.10", {"p": p})
    g = get_equation("gaussian-burgers")
    for k in "fghAB":
        assert getattr(eq, k) == substitute(getattr(g, k), {"p": parse(p)})
