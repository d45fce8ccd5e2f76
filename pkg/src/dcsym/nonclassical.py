"""Reduction operators (nonclassical symmetries) of class members with g = 1.

An operator Q = tau d_t + xi d_x + eta d_u is a reduction operator when its
second prolongation annihilates the equation on the joint manifold of the
equation and the invariant surface condition tau u_t + xi u_x = eta.
Operators are normalized to tau = 1 or, when tau vanishes, to xi = 1.
"""

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from importlib import resources

import yaml

from .catalog import register_section, verify_solution
from .catalog.cases import get_case
from .expr import (
    DEFAULT_DOMAIN, ONE, ZERO, Num, Sym, add, as_expr, collect_poly, diff, expand, is_zero,
    mul, parse, power, substitute, total_diff,
)
from .expr.calculus import freeze_functions, jet_table
from .lie import VectorField
from .pde import DCEquation, branch, lhs_residual
from .reduction import get_row, verify_row
from .report import VerificationReport, aggregate, from_zero_test


class DegenerateOperator(ValueError):
    pass


class ExcludedExponent(ValueError):
    pass


class UnknownOperator(KeyError):
    pass


class ComponentMismatch(ValueError):
    pass


OPAQUE = {"xi": ("t", "x", "u"), "eta": ("t", "x", "u")}
GENERIC = DCEquation(f=Sym("f"), h=Sym("h"), A=Sym("A"), B=Sym("B"), gauge="g=1",
                     functions=OPAQUE, name="generic member")
UNKNOWN_FIELD = VectorField(ONE, Sym("xi"), Sym("eta"))

# the determining equations as typeset, by power of u_x; the u_x^1 entry uses
# "+" where the typeset text has no operator between its two lines
PRINTED_TAU1 = {
    3: "xi_uu*A - xi_u*A_u",
    2: "-eta_uu*A^2 - eta_u*A*A_u + 2*xi_xu*A^2 - 2*xi*xi_u*f*A - 2*xi_u*h*A*B"
       " - eta*A*A_uu + eta*A_u^2",
    1: "-2*eta_xu*A^2 - 2*eta_x*A*A_u - xi_t*f*A + 2*eta*xi_u*f*A + xi_xx*A^2"
       " - 2*xi*xi_x*f*A - xi_x*h*A*B + eta*xi*f*A_u + eta*h*A_u*B - xi^2*f_x*A"
       " - xi*h_x*A*B - eta*h*A*B_u",
    0: "eta_t*f*A - A^2*eta_xx - eta_x*h*A*B + 2*xi_x*eta*f*A - eta^2*f*A_u + xi*eta*f_x*A",
}
# the u_x^1 equation read with "-" joining the two lines
PRINTED_TAU1_MINUS = PRINTED_TAU1[1].replace("+ eta*xi*f*A_u", "- eta*xi*f*A_u")
# symbol used to read off the proportionality factor of each component
PIVOT = {3: "xi_uu", 2: "eta_uu", 1: "eta_xu", 0: "eta_t"}

PRINTED_TAU0 = (
    "eta_t*f^2 - 2*eta*eta_xu*f*A - eta^2*eta_uu*f*A - 2*eta^2*eta_u*f*A_u"
    " + eta*eta_u*f_x*A - eta_xx*f*A - 3*eta*eta_x*f*A_u + eta_x*f_x*A - eta_x*f*h*B"
    " - eta^3*f*A_uu + eta^2*f_x*A_u + eta*f_x*h*B - eta*h_x*f*B - eta^2*f*h*B_u"
)

POSITIVE_U = {"u": (0.25, 2.0)}


def nonclassical_domain(d=DEFAULT_DOMAIN):
    return d.with_(intervals=POSITIVE_U)


# -- the conditional invariance criterion -------------------------------------

def normalize(Q):
    """Divide through by tau, or by xi when tau is zero."""
    if Q.tau != ZERO:
        k = power(Q.tau, -1)
        return VectorField(ONE, mul(Q.xi, k), mul(Q.eta, k), Q.dep, Q.label)
    if Q.xi == ZERO:
        raise DegenerateOperator("tau and xi both vanish")
    k = power(Q.xi, -1)
    return VectorField(ZERO, ONE, mul(Q.eta, k), Q.dep, Q.label)


def _prolongation(Q, fz):
    """eta^t, eta^x, eta^xx from the classical recursive formulas."""
    J = lambda s: Sym("u_" + s)
    Dt = lambda e: total_diff(e, "t", jet_table("t", "u", order=4), fz, dependent={"u"})
    Dx = lambda e: total_diff(e, "x", jet_table("x", "u", order=4), fz, dependent={"u"})
    ut, ux = J("t"), J("x")
    eta_t = add(Dt(Q.eta), mul(-1, ut, Dt(Q.tau)), mul(-1, ux, Dt(Q.xi)))
    eta_x = add(Dx(Q.eta), mul(-1, ut, Dx(Q.tau)), mul(-1, ux, Dx(Q.xi)))
    eta_xx = add(Dx(eta_x), mul(-1, J("tx"), Dx(Q.tau)), mul(-1, J("xx"), Dx(Q.xi)))
    return expand(eta_t), expand(eta_x), expand(eta_xx)


def conditional_residual(eq, Q):
    """pr Q (L) on the joint manifold, after normalizing Q.

    For tau = 1 the result is a polynomial in u_x; for tau = 0 it is free of
    every jet of u.
    """
    if eq.gauge == "free" and eq.g != ONE:
        raise ValueError("reduction operators are handled for g = 1 only")
    Q = normalize(Q)
    fz = freeze_functions(dict(eq.functions))
    L = lhs_residual(eq)
    eta_t, eta_x, eta_xx = _prolongation(Q, fz)
    prL = expand(add(
        mul(Q.tau, diff(L, "t", fz)), mul(Q.xi, diff(L, "x", fz)), mul(Q.eta, diff(L, "u", fz)),
        mul(eta_t, diff(L, "u_t", fz)), mul(eta_x, diff(L, "u_x", fz)),
        mul(eta_xx, diff(L, "u_xx", fz))))
    if Q.tau == ONE:
        on_q = {"u_t": add(Q.eta, mul(-1, Q.xi, Sym("u_x")))}
        L1 = expand(substitute(L, on_q))
        a = diff(L1, "u_xx", fz)
        uxx = expand(mul(-1, add(L1, mul(-1, a, Sym("u_xx"))), power(a, -1)))
        out = substitute(substitute(prL, on_q), {"u_xx": uxx})
    else:
        Dx = lambda e: total_diff(e, "x", jet_table("x", "u", order=4), fz, dependent={"u"})
        on_q = {"u_xx": Dx(Q.eta)}
        on_q2 = {"u_x": Q.eta}
        L1 = expand(substitute(substitute(L, on_q), on_q2))
        b = diff(L1, "u_t", fz)
        ut = expand(mul(-1, add(L1, mul(-1, b, Sym("u_t"))), power(b, -1)))
        out = substitute(substitute(substitute(prL, on_q), on_q2), {"u_t": ut})
    out = eq.apply_rules(expand(out))
    left = {n for n in out.free_symbols if n.startswith("u_") and n != "u_x"}
    if left or (Q.tau == ZERO and "u_x" in out.free_symbols):
        raise ComponentMismatch("criterion still contains %s" % ", ".join(sorted(left | {"u_x"})))
    return out


def check_operator(eq, Q, d=DEFAULT_DOMAIN, subject=None, tol=None):
    dom = nonclassical_domain(d)
    r = branch(conditional_residual(eq, Q), dom)
    return from_zero_test(subject or "reduction operator %s" % Q, is_zero(r, dom, tol), tol=tol)


# -- determining equations -----------------------------------------------------

def determining_system_tau1(eq=GENERIC):
    """Components of the criterion for Q = d_t + xi d_x + eta d_u by powers of u_x.

    Returned in the order u_x^3, u_x^2, u_x^1, u_x^0.
    """
    if eq.gauge != "g=1":
        raise ValueError("determining system needs the gauge g = 1")
    fz = dict(eq.functions)
    if "xi" not in fz or "eta" not in fz:
        eq = DCEquation(eq.f, eq.g, eq.h, eq.A, eq.B, eq.gauge, eq.dep, None,
                        {**fz, **OPAQUE}, eq.rules, eq.name)
    coeffs = collect_poly(conditional_residual(eq, UNKNOWN_FIELD), "u_x")
    if set(coeffs) - {0, 1, 2, 3}:
        raise ComponentMismatch("criterion has u_x powers %s" % sorted(coeffs))
    return [coeffs.get(k, ZERO) for k in (3, 2, 1, 0)]


def determining_tau0(eq=GENERIC, eta=None):
    """The single determining equation for Q = d_x + eta d_u."""
    eta = Sym("eta") if eta is None else as_expr(eta)
    fz = dict(eq.functions)
    if "eta" not in fz:
        eq = DCEquation(eq.f, eq.g, eq.h, eq.A, eq.B, eq.gauge, eq.dep, None,
                        {**fz, **OPAQUE}, eq.rules, eq.name)
    return conditional_residual(eq, VectorField(ZERO, ONE, eta))


def _unknown_jet(name):
    return name in ("xi", "eta") or name.startswith(("xi_", "eta_"))


def match_component(derived, printed, pivot, d=DEFAULT_DOMAIN, subject="component", tol=None):
    """derived = k * printed with k read from the pivot coefficient and free of xi, eta."""
    printed = parse(printed) if isinstance(printed, str) else printed
    fz = dict(GENERIC.functions)
    a, b = diff(derived, pivot, fz), diff(printed, pivot, fz)
    if b == ZERO:
        raise ComponentMismatch("printed component has no %s term" % pivot)
    k = expand(mul(a, power(b, -1)))
    if k == ZERO or any(_unknown_jet(n) for n in k.free_symbols):
        return VerificationReport(subject, "fail", float("inf"), 0, None,
                                  "no admissible factor (pivot ratio %s)" % k)
    rep = from_zero_test(subject, is_zero(add(derived, mul(-1, k, printed)), d, tol), tol=tol)
    rep.notes = "factor %s" % k
    return rep


def compare_tau1(d=DEFAULT_DOMAIN, tol=None):
    dom = nonclassical_domain(d)
    comps = dict(zip((3, 2, 1, 0), determining_system_tau1()))
    reports = [match_component(comps[k], PRINTED_TAU1[k], PIVOT[k], dom, "u_x^%d component" % k, tol)
               for k in (3, 2, 1, 0)]
    alt = match_component(comps[1], PRINTED_TAU1_MINUS, PIVOT[1], dom, "", tol)
    return aggregate("determining system, tau = 1", reports,
                     "u_x^1 component read with '-' between its lines: %s (max residual %.3e)"
                     % (alt.status, alt.max_residual))


def compare_tau0(d=DEFAULT_DOMAIN, tol=None):
    dom = nonclassical_domain(d)
    rep = match_component(determining_tau0(), PRINTED_TAU0, "eta_t", dom, "determining equation, tau = 0", tol)
    return rep


def specialize(e, eq):
    """Replace the opaque elements f, h, A, B and their jets by those of eq."""
    fz = dict(eq.functions)
    bind = {}
    for name, var, order in (("f", "x", 1), ("h", "x", 1), ("A", "u", 2), ("B", "u", 1)):
        cur = getattr(eq, name)
        bind[name] = cur
        for k in range(1, order + 1):
            cur = diff(cur, var, fz)
            bind[name + "_" + var * k] = cur
    return expand(substitute(e, bind))


def compare_case(eq, d=DEFAULT_DOMAIN, tol=None, subject="determining system"):
    """Derived tau = 1 system of a concrete equation against the specialized printed one."""
    dom = nonclassical_domain(d)
    comps = dict(zip((3, 2, 1, 0), determining_system_tau1(eq)))
    reports = []
    for k in (3, 2, 1, 0):
        printed = specialize(parse(PRINTED_TAU1[k]), eq)
        sub = "u_x^%d component" % k
        if printed == ZERO or diff(printed, PIVOT[k], dict(GENERIC.functions)) == ZERO:
            zt = is_zero(branch(comps[k], dom), dom, tol)
            reports.append(from_zero_test(sub, zt, "printed component vanishes", tol))
        else:
            reports.append(match_component(comps[k], printed, PIVOT[k], dom, sub, tol))
    return aggregate(subject, reports)


# -- partial integration for power nonlinearities ------------------------------

POWER_FUNCTIONS = {"phi": ("t", "x"), "psi": ("t", "x"), "phi2": ("t", "x"), "psi2": ("t", "x")}


def integrate_xi_eta_power_case(n, m):
    """xi and eta solving the u_x^3 and u_x^2 equations for A = u^n, B = u^m."""
    n, m = Fraction(n), Fraction(m)
    if n in (-1, -2, Fraction(-3, 2)) or m in (-1, -(n + 2)):
        raise ExcludedExponent("n = %s, m = %s is excluded" % (n, m))
    c = lambda q: Num(Fraction(q))
    u = Sym("u")
    xi = add(mul(Sym("phi"), power(u, c(n + 1))), Sym("psi"))
    eta = add(
        mul(Sym("phi2"), power(u, c(-n))),
        mul(Sym("psi2"), u),
        mul(c(1 / (n + 1)), Sym("phi_x"), power(u, c(n + 2))),
        mul(c(-2 * (n + 1) / ((m + 1) * (m + n + 2))), Sym("phi"), Sym("h"), power(u, c(m + 2))),
        mul(c(-2 * (n + 1) / ((n + 2) * (2 * n + 3))), power(Sym("phi"), 2), Sym("f"), power(u, c(n + 3))),
        mul(c(-2 * (n + 1) / (n + 2)), Sym("phi"), Sym("psi"), Sym("f"), power(u, 2)),
    )
    return expand(xi), expand(eta)


def check_power_case(n, m, d=DEFAULT_DOMAIN, tol=None):
    xi, eta = integrate_xi_eta_power_case(n, m)
    u = Sym("u")
    eq = DCEquation(f=Sym("f"), h=Sym("h"), A=power(u, Num(Fraction(n))), B=power(u, Num(Fraction(m))),
                    gauge="g=1", functions=POWER_FUNCTIONS)
    comps = collect_poly(conditional_residual(eq, VectorField(ONE, xi, eta)), "u_x")
    dom = nonclassical_domain(d)
    reports = [from_zero_test("u_x^%d component" % k, is_zero(branch(comps.get(k, ZERO), dom), dom, tol), tol=tol)
               for k in (3, 2)]
    return aggregate("power case n = %s, m = %s" % (n, m), reports)


# -- catalogued operators -------------------------------------------------------

def _field(coeffs):
    return VectorField(*(parse(str(c)) for c in coeffs))


@dataclass(frozen=True)
class ReductionOperator:
    op_id: str
    title: str
    equation: DCEquation
    field: VectorField
    printed: VectorField = None
    choices: tuple = ()
    note: str = ""
    unresolved: str = ""

    def __post_init__(self):
        if self.field.tau == ZERO and self.field.xi == ZERO:
            raise DegenerateOperator("operator %s has tau = xi = 0" % self.op_id)

    @classmethod
    def from_record(cls, rec):
        el = {k: parse(str(rec.get(k, "0" if k == "B" else "1"))) for k in ("f", "h", "A", "B")}
        funcs = {k: tuple(v) for k, v in (rec.get("functions") or {}).items()}
        eq = DCEquation(el["f"], ONE, el["h"], el["A"], el["B"], gauge="g=1",
                        functions=funcs, rules=dict(rec.get("rules") or {}), name=str(rec["id"]))
        return cls(
            op_id=str(rec["id"]),
            title=rec.get("title", ""),
            equation=eq,
            field=_field(rec["operator"]),
            printed=_field(rec["printed"]) if "printed" in rec else None,
            choices=tuple(sorted((k, tuple(str(v) for v in vs)) for k, vs in (rec.get("choices") or {}).items())),
            note=rec.get("note", ""),
            unresolved=rec.get("unresolved", ""),
        )

    def domain(self, d=DEFAULT_DOMAIN):
        return nonclassical_domain(d).with_(choices=dict(self.choices))

    def verify(self, d=DEFAULT_DOMAIN, tol=None):
        dom = self.domain(d)
        rep = check_operator(self.equation, self.field, dom, "operator %s: %s" % (self.op_id, self.field), tol)
        notes = [n for n in (self.note, self.unresolved) if n]
        if self.printed is not None:
            p = check_operator(self.equation, self.printed, dom, "", tol)
            notes.append("printed %s: %s (max residual %.3e)" % (self.printed, p.status, p.max_residual))
        rep.notes = "; ".join(notes)
        return rep


@lru_cache(maxsize=None)
def _builtin_operators():
    data = yaml.safe_load(resources.files("dcsym.catalog").joinpath("nonclassical.yaml").read_text())
    return {str(r["id"]): ReductionOperator.from_record(r) for r in data["nonclassical"]}


_store = {}


def register_operators(records):
    for r in records:
        op = ReductionOperator.from_record(r)
        _store[op.op_id] = op


register_section("nonclassical", register_operators)


def all_operators():
    ops = dict(_builtin_operators())
    ops.update(_store)
    return list(ops.values())


def get_operator(op_id):
    for op in all_operators():
        if op.op_id == str(op_id):
            return op
    raise UnknownOperator("no reduction operator %r" % op_id)


EXAMPLES = ("1", "2", "3", "4")
LITERATURE = ("exp-1", "exp-2", "power-convection")


def verify_example(example_id, d=DEFAULT_DOMAIN, tol=None):
    """The general operator of an example and its concrete instance, if any."""
    example_id = str(example_id)
    if example_id not in EXAMPLES:
        raise UnknownOperator("no example %r" % example_id)
    ops = [get_operator(example_id)]
    ops += [op for op in all_operators() if op.op_id == example_id + "-instance"]
    reports = [op.verify(d, tol) for op in ops]
    if example_id == "1":
        reports.append(example1_reduction(d, tol))
    if example_id == "3":
        reports.append(example3_tau0(d, tol))
    notes = ops[0].title
    if example_id == "2":
        notes += "; equation taken as f u_t = (e^u u_x)_x + h e^u u_x"
    return aggregate("example %s" % example_id, reports, notes)


def verify_literature_operators(d=DEFAULT_DOMAIN, tol=None):
    reports = [get_operator(i).verify(d, tol) for i in LITERATURE]
    reports.append(verify_solution("sqrt-1", d, tol))
    return aggregate("cited reduction operators", reports)


def example1_reduction(d=DEFAULT_DOMAIN, tol=None):
    """The characteristic of the concrete operator gives an ansatz that reduces
    the equation to an ODE whose solutions give the catalogued solution."""
    op = get_operator("1-instance")
    inv = parse("2*u^(1/2) - 12*t*x^(-2)")
    dom = nonclassical_domain(d)
    r = branch(op.field.apply(inv), dom)
    reports = [from_zero_test("invariant of the operator", is_zero(r, dom, tol), tol=tol)]
    reports.append(verify_row(get_row("sqrt-nc"), d, tol))
    return aggregate("reduction by the operator of example 1", reports)


def example3_tau0(d=DEFAULT_DOMAIN, tol=None):
    """Example 3 recovered from the tau = 0 determining equation."""
    eq = DCEquation(f=Sym("f"), h=Sym("h"), A=Sym("A"), B=Sym("A"), gauge="g=1",
                    functions={"phi": ("x",)}, rules={"phi_x": parse("-h*phi")})
    r = determining_tau0(eq, parse("phi/A"))
    dom = nonclassical_domain(d)
    return from_zero_test("tau = 0 equation at eta = phi/A", is_zero(r, dom, tol), tol=tol)


# -- Lie symmetries are reduction operators -------------------------------------

LIE_CASES = ("2.7a", "3.13", "3.14a")


def lie_operators_are_reduction_operators(cases=LIE_CASES, d=DEFAULT_DOMAIN, tol=None):
    """Every Lie symmetry with tau != 0 passes the tau = 1 criterion."""
    reports = []
    for cid in cases:
        eq, basis = get_case(cid, _first_pick(cid))
        for Q in basis:
            if Q.tau == ZERO:
                continue
            reports.append(check_operator(eq, Q, d, "case %s %s" % (cid, Q.label), tol))
    return aggregate("Lie symmetries as reduction operators", reports)


def _first_pick(cid):
    from .catalog.cases import case
    return case(cid).pick_values()[0] or None


def verify_all(d=DEFAULT_DOMAIN, tol=None):
    reports = [compare_tau1(d, tol), compare_tau0(d, tol)]
    reports += [verify_example(e, d, tol) for e in EXAMPLES]
    reports.append(verify_literature_operators(d, tol))
    return reports
