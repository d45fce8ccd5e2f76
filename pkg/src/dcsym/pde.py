"""Members of the class f(x)u_t = (g(x)A(u)u_x)_x + h(x)B(u)u_x.

Arbitrary elements are expressions in x (f, g, h) and in the dependent
variable (A, B).  An element left arbitrary is an opaque symbol such as ``f``
or ``A`` whose derivatives ``f_x``, ``A_u``, ... are independent jet symbols.
Equations outside the class carry an explicit residual instead.
"""

from dataclasses import dataclass
from fractions import Fraction

from .expr import (
    DEFAULT_DOMAIN, ONE, ZERO, Expr, Sym, add, as_expr, diff, expand, is_zero, jet_table,
    mul, power, split_jet, substitute, substitute_raw, with_signs,
)
from .expr.calculus import freeze_functions, jet_name
from .report import from_zero_test

GAUGES = ("g=1", "g=h", "free")


def default_functions(dep="u"):
    return {"f": ("x",), "g": ("x",), "h": ("x",), "A": (dep,), "B": (dep,), "Phi": ("x",)}


@dataclass(frozen=True)
class DCEquation:
    f: Expr = ONE
    g: Expr = ONE
    h: Expr = ONE
    A: Expr = ONE
    B: Expr = ZERO
    gauge: str = "free"
    dep: str = "u"
    residual_form: Expr = None
    functions: tuple = ()
    rules: tuple = ()
    name: str = ""

    def __post_init__(self):
        for k in ("f", "g", "h", "A", "B"):
            object.__setattr__(self, k, expand(as_expr(getattr(self, k))))
        if self.residual_form is not None:
            object.__setattr__(self, "residual_form", expand(as_expr(self.residual_form)))
        funcs = dict(default_functions(self.dep))
        funcs.update(dict(self.functions) if self.functions else {})
        object.__setattr__(self, "functions", freeze_functions(funcs))
        if isinstance(self.rules, dict):
            object.__setattr__(self, "rules", tuple(sorted((k, expand(as_expr(v))) for k, v in self.rules.items())))
        if self.gauge not in GAUGES:
            raise ValueError("unknown gauge tag %r" % self.gauge)
        if self.gauge == "g=1" and self.g != ONE:
            raise ValueError("gauge g=1 requires g = 1")

    @property
    def is_class_member(self):
        return self.residual_form is None

    def jet(self, suffix):
        return Sym(jet_name(self.dep, suffix))

    def dx_table(self):
        return jet_table("x", self.dep, order=5)

    def dt_table(self):
        return jet_table("t", self.dep, order=5)

    def apply_rules(self, e):
        return apply_rules(e, self.rules, self.functions)

    def total_dx(self, e):
        from .expr import total_diff
        return self.apply_rules(total_diff(e, "x", self.dx_table(), self.functions, dependent={self.dep}))

    def total_dt(self, e):
        from .expr import total_diff
        return self.apply_rules(total_diff(e, "t", self.dt_table(), self.functions, dependent={self.dep}))

    def partial(self, e, s):
        return self.apply_rules(diff(e, s, self.functions))

    def rename(self, dep):
        """Same equation with another dependent-variable name."""
        old = self.dep
        ren = {}
        names = set()
        for e in (self.f, self.g, self.h, self.A, self.B, self.residual_form):
            if e is not None:
                names |= e.free_symbols
        for n in names:
            base, suf = split_jet(n)
            if base == old:
                ren[n] = Sym(jet_name(dep, suf))
        funcs = {k: tuple(dep if a == old else a for a in v) for k, v in self.functions}
        sub = lambda e: None if e is None else substitute(e, ren)
        return DCEquation(sub(self.f), sub(self.g), sub(self.h), sub(self.A), sub(self.B),
                          self.gauge, dep, sub(self.residual_form), funcs, self.rules, self.name)


def apply_rules(e, rules, functions):
    """Substitute jet constraints (e.g. f_x -> f*I(x)) including derived orders."""
    if not rules:
        return e
    rules = dict(rules)
    for _ in range(8):
        bind = {}
        for n in e.free_symbols:
            r = _rule_for(n, rules, functions)
            if r is not None:
                bind[n] = r
        if not bind:
            return e
        e = substitute(e, bind)
    return e


def _rule_for(name, rules, functions):
    if name in rules:
        return rules[name]
    base, suf = split_jet(name)
    if not suf:
        return None
    # derive higher orders from a lower-order rule by differentiating it
    for cut in range(len(suf) - 1, 0, -1):
        lower = jet_name(base, suf[:cut])
        if lower in rules:
            r = rules[lower]
            for ch in suf[cut:]:
                r = apply_rules(diff(r, ch, functions), rules, functions)
            rules[name] = r
            return r
    return None


def lhs_residual(eq):
    """f u_t - (g A u_x)_x - h B u_x, expanded over jet coordinates."""
    if eq.residual_form is not None:
        return eq.residual_form
    ut, ux = eq.jet("t"), eq.jet("x")
    flux = eq.total_dx(mul(eq.g, eq.A, ux))
    return eq.apply_rules(expand(add(mul(eq.f, ut), mul(-1, flux), mul(-1, eq.h, eq.B, ux))))


class DegenerateEquation(ValueError):
    pass


def evolution_rhs(eq):
    """Solve the residual (linear in u_t) for u_t."""
    r = lhs_residual(eq)
    ut = eq.jet("t")
    a = diff(r, ut.name)
    if ut.name in a.free_symbols:
        raise DegenerateEquation("residual is not linear in %s" % ut.name)
    if a == ZERO:
        raise DegenerateEquation("f is zero-equivalent")
    rest = expand(add(r, mul(-1, a, ut)))
    return expand(mul(-1, rest, power(a, -1)))


def sol_jets(sol, dep="u", order=2):
    """Partial derivatives of u = sol(t, x) keyed by jet names."""
    sol = as_expr(sol)
    out = {dep: sol}
    cur = {"": sol}
    for _ in range(order):
        nxt = {}
        for suf, e in cur.items():
            for v in ("t", "x"):
                cnt = {"t": suf.count("t") + (v == "t"), "x": suf.count("x") + (v == "x")}
                ns = "t" * cnt["t"] + "x" * cnt["x"]
                if ns not in nxt:
                    nxt[ns] = diff(e, v)
        cur = nxt
        for suf, e in nxt.items():
            out[jet_name(dep, suf)] = e
    return out


def substitute_solution(expr_, sol, dep="u", order=2):
    jets = sol_jets(sol, dep, order)
    return substitute(expr_, jets)


def branch(e, d):
    """Specialize abs/sign of symbols whose sampling interval has one sign."""
    signs = {}
    for n in e.free_symbols:
        lo, hi = d.interval(n)
        if d.choice(n) is not None:
            vals = [float(Fraction(v)) for v in d.choice(n)]
            lo, hi = min(vals), max(vals)
        if lo >= 0:
            signs[n] = 1
        elif hi <= 0:
            signs[n] = -1
    return with_signs(e, signs) if signs else e


def solution_residual(eq, sol, d=DEFAULT_DOMAIN, subject="solution", tol=None):
    """Substitute u = sol(t, x) into the residual and test for zero."""
    r = substitute_solution(lhs_residual(eq), sol, eq.dep)
    r = branch(r, d)
    zt = is_zero(r, d, tol)
    return from_zero_test(subject, zt, tol=tol)


def proportionality_factor(residual, reference, dep="u"):
    """k with residual = k * reference, read off from the u_t coefficients."""
    ut = jet_name(dep, "t")
    a = diff(residual, ut)
    b = diff(reference, ut)
    if b == ZERO:
        raise DegenerateEquation("reference residual has no %s term" % ut)
    return expand(mul(a, power(b, -1)))


def same_equation(eq1, eq2, d=DEFAULT_DOMAIN, subject=None, tol=None):
    """Residuals agree up to a nonzero factor (no jet dependence allowed in it)."""
    if eq1.dep != eq2.dep:
        eq2 = eq2.rename(eq1.dep)
    r1, r2 = lhs_residual(eq1), lhs_residual(eq2)
    k = proportionality_factor(r1, r2, eq1.dep)
    diffr = branch(add(r1, mul(-1, k, r2)), d)
    zt = is_zero(diffr, d, tol)
    rep = from_zero_test(subject or "same equation: %s ~ %s" % (eq1.name or "eq1", eq2.name or "eq2"), zt, tol=tol)
    if k == ZERO:
        rep.status, rep.notes = "fail", "zero proportionality factor"
    else:
        rep.notes = "factor %s" % k
    return rep


def equation_from_residual(residual, dep="u", name="", functions=None):
    return DCEquation(dep=dep, residual_form=as_expr(residual), name=name, functions=functions or {})


__all__ = [
    "DCEquation", "lhs_residual", "evolution_rhs", "solution_residual", "sol_jets",
    "substitute_solution", "apply_rules", "branch", "equation_from_residual",
    "DegenerateEquation", "substitute_raw", "same_equation", "proportionality_factor",
]
