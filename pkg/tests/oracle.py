"""Bridge to sympy, used only as an independent oracle in tests."""

import sympy as sp
from sympy.parsing.sympy_parser import convert_xor, parse_expr, standard_transformations

from dcsym.expr import to_string

_LOCALS = {"ln": sp.log, "arctan": sp.atan, "abs": sp.Abs, "sign": sp.sign, "exp": sp.exp,
           "sin": sp.sin, "cos": sp.cos, "tan": sp.tan, "sqrt": sp.sqrt,
           "sinh": sp.sinh, "cosh": sp.cosh, "tanh": sp.tanh}
_TRANSFORMS = standard_transformations + (convert_xor,)


def to_sympy(e, positive=()):
    """Sympy expression for a dcsym expression (or its printed text)."""
    text = e if isinstance(e, str) else to_string(e)
    names = {}
    for tok in _identifiers(text):
        if tok not in _LOCALS:
            names[tok] = sp.Symbol(tok, positive=True) if tok in positive else sp.Symbol(tok)
    return parse_expr(text, local_dict={**_LOCALS, **names}, transformations=_TRANSFORMS)


def _identifiers(text):
    import re
    return set(re.findall(r"[A-Za-z_][A-Za-z_0-9]*", text))


def sym(name, **kw):
    return sp.Symbol(name, **kw)


def vanishes(expr):
    return sp.simplify(expr) == 0


# -- a second, independent prolongation (classical recursive formulas) ---------

_NEXT = {
    "t": {"u": "u_t", "u_t": "u_tt", "u_x": "u_tx", "u_xx": "u_txx", "u_tx": "u_ttx"},
    "x": {"u": "u_x", "u_x": "u_xx", "u_t": "u_tx", "u_xx": "u_xxx", "u_tx": "u_txx"},
}


def total(e, var):
    S = sp.Symbol
    out = sp.diff(e, S(var))
    for j, nj in _NEXT[var].items():
        out += sp.diff(e, S(j)) * S(nj)
    return out


def prolong(tau, xi, eta):
    S = sp.Symbol
    ut, ux, uxx, utx = S("u_t"), S("u_x"), S("u_xx"), S("u_tx")
    et = total(eta, "t") - ut * total(tau, "t") - ux * total(xi, "t")
    ex = total(eta, "x") - ut * total(tau, "x") - ux * total(xi, "x")
    exx = total(ex, "x") - utx * total(tau, "x") - uxx * total(xi, "x")
    return et, ex, exx


def apply_pr(L, tau, xi, eta):
    S = sp.Symbol
    et, ex, exx = prolong(tau, xi, eta)
    return (tau * sp.diff(L, S("t")) + xi * sp.diff(L, S("x")) + eta * sp.diff(L, S("u"))
            + et * sp.diff(L, S("u_t")) + ex * sp.diff(L, S("u_x")) + exx * sp.diff(L, S("u_xx")))


def lie_residual(L, tau, xi, eta):
    """pr Q L on u_t = solved form of L (and its x-derivative)."""
    S = sp.Symbol
    ut = sp.solve(L, S("u_t"))[0]
    r = apply_pr(L, tau, xi, eta)
    return r.subs({S("u_tx"): total(ut, "x")}).subs({S("u_t"): ut})


def conditional_residual(L, xi, eta):
    """pr Q L for Q = d_t + xi d_x + eta d_u on the joint manifold."""
    S = sp.Symbol
    r = apply_pr(L, sp.Integer(1), xi, eta)
    on_q = {S("u_t"): eta - xi * S("u_x")}
    uxx = sp.solve(L.subs(on_q), S("u_xx"))[0]
    return r.subs(on_q).subs({S("u_xx"): uxx})


def numeric_zero(e, names, rng, count=20, lo=0.5, hi=1.5, tol=1e-9):
    syms = [sp.Symbol(n) for n in names]
    f = sp.lambdify(syms, e, "numpy")
    for _ in range(count):
        vals = rng.uniform(lo, hi, size=len(syms))
        v = complex(f(*vals))
        if abs(v) > tol * (1 + max(abs(float(x)) for x in vals)):
            return False
    return True


def substitute_solution(L, u, dep="u"):
    """L evaluated on u(t, x): jets become sympy derivatives."""
    t, x = sp.Symbol("t"), sp.Symbol("x")
    jets = {dep: u}
    for name, order in (("t", (t,)), ("x", (x,)), ("xx", (x, x)), ("tx", (t, x)), ("xxx", (x, x, x))):
        jets["%s_%s" % (dep, name)] = sp.diff(u, *order)
    return L.subs({sp.Symbol(k): v for k, v in jets.items()}, simultaneous=True)
