"""Point transformations: pullback of equations, images of solutions and fields.

Target coordinates carry the suffix "1" inside a transform: an inverse map is
written in t1, x1 and (for target dependent variable v) v1.  Every transform
here is fiber preserving, i.e. the new t and x do not depend on the dependent
variable, which is what mapping solutions needs.
"""

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from importlib import resources

import numpy as np
import yaml
from scipy.optimize import root

from ..expr import (
    DEFAULT_DOMAIN, ONE, ZERO, Num, Sym, add, as_expr, diff, expand, is_zero, mul, parse,
    power, substitute, total_diff,
)
from ..expr.calculus import jet_name, jet_table, split_jet
from ..expr.numeric import evaluate, eval_terms
from ..lie import VectorField
from ..pde import (
    DCEquation, branch, lhs_residual, proportionality_factor, sol_jets,
)
from ..report import VerificationReport, aggregate, from_zero_test


class NotInvertible(ValueError):
    pass


class DegenerateTransform(ValueError):
    pass


class NotRepresentable(ValueError):
    """The image of an opaque element cannot be written in the new variables."""


def _rename_map(names, dep, new_dep, extra=()):
    out = {}
    for n in names:
        base, suf = split_jet(n)
        if base == dep:
            out[n] = Sym(jet_name(new_dep, suf))
        elif n in extra:
            out[n] = Sym(extra[n])
    return out


@dataclass(frozen=True)
class PointTransform:
    name: str
    forward: tuple
    inverse: tuple = None
    src_dep: str = "u"
    tgt_dep: str = "u"
    source: str = None
    target: str = None
    choices: tuple = ()
    kind: str = "point"
    invert_numerically: bool = False
    note: str = ""

    def __post_init__(self):
        object.__setattr__(self, "forward", tuple(expand(as_expr(e)) for e in self.forward))
        if self.inverse is not None:
            object.__setattr__(self, "inverse", tuple(expand(as_expr(e)) for e in self.inverse))
        if isinstance(self.choices, dict):
            object.__setattr__(self, "choices", tuple(sorted(
                (k, tuple(str(v) for v in vs)) for k, vs in self.choices.items())))
        if self.kind == "point":
            for e in self.forward[:2]:
                if self.src_dep in e.free_symbols:
                    raise ValueError("transform %s is not fiber preserving" % self.name)

    @property
    def new_names(self):
        return ("t1", "x1", self.tgt_dep + "1")

    def domain(self, d=DEFAULT_DOMAIN):
        return d.with_(choices=dict(self.choices)) if self.choices else d

    def forward_map(self):
        return dict(zip(("t", "x", self.src_dep), self.forward))

    def inverse_map(self):
        if self.inverse is None:
            raise NotInvertible("transform %s has no declared inverse" % self.name)
        return dict(zip(("t", "x", self.src_dep), self.inverse))

    # -- numerics ------------------------------------------------------
    def numeric_inverse(self, new_point, guess, params=None):
        """Solve forward(p) = new_point for p with a root finder."""
        names = ("t", "x", self.src_dep)
        params = params or {}

        def F(v):
            pt = dict(zip(names, v), **params)
            return [evaluate(f, pt) - n for f, n in zip(self.forward, new_point)]

        sol = root(F, guess, tol=1e-13)
        if not sol.success:
            raise NotInvertible("numeric inversion failed for %s: %s" % (self.name, sol.message))
        return dict(zip(names, sol.x))

    # -- jets ----------------------------------------------------------
    def target_jets(self, order=2, functions=None):
        """Target jets (named with the "1" suffix) in terms of source jets."""
        T, X, U = self.forward
        dep = self.src_dep
        dt = jet_table("t", dep, order=order + 2)
        dx = jet_table("x", dep, order=order + 2)
        Dt = lambda e: total_diff(e, "t", dt, functions, dependent={dep})
        Dx = lambda e: total_diff(e, "x", dx, functions, dependent={dep})
        Tt, Tx, Xt, Xx = Dt(T), Dx(T), Dt(X), Dx(X)
        det = expand(add(mul(Tt, Xx), mul(-1, Tx, Xt)))
        if det == ZERO:
            raise DegenerateTransform("transform %s has zero Jacobian" % self.name)
        inv = power(det, -1)
        d_new_t = lambda G: expand(mul(inv, add(mul(Xx, Dt(G)), mul(-1, Xt, Dx(G)))))
        d_new_x = lambda G: expand(mul(inv, add(mul(Tt, Dx(G)), mul(-1, Tx, Dt(G)))))
        base = self.new_names[2]
        out = {base: U}
        cur = {"": U}
        for _ in range(order):
            nxt = {}
            for suf, G in cur.items():
                for v, op in (("t", d_new_t), ("x", d_new_x)):
                    ns = "t" * (suf.count("t") + (v == "t")) + "x" * (suf.count("x") + (v == "x"))
                    if ns not in nxt:
                        nxt[ns] = op(G)
            cur = nxt
            for suf, G in nxt.items():
                out[jet_name(base, suf)] = G
        return out

    def pullback(self, residual, functions=None):
        """Express a target-equation residual through the source variables and jets."""
        residual = as_expr(residual)
        ren = _rename_map(residual.free_symbols, self.tgt_dep, self.new_names[2],
                          {"t": "t1", "x": "x1"})
        r = substitute(residual, ren)
        bind = {"t1": self.forward[0], "x1": self.forward[1]}
        bind.update(self.target_jets(2, functions))
        return substitute(r, bind)


def check_pullback(T, src_eq, tgt_eq, d=DEFAULT_DOMAIN, tol=None, subject=None):
    """The target residual, pulled back, is a nonzero multiple of the source residual."""
    L = lhs_residual(src_eq)
    P = T.pullback(lhs_residual(tgt_eq), tgt_eq.functions)
    P = src_eq.apply_rules(tgt_eq.apply_rules(P))
    k = proportionality_factor(P, L, src_eq.dep)
    dom = T.domain(d)
    zt = is_zero(branch(add(P, mul(-1, k, L)), dom), dom, tol)
    rep = from_zero_test(subject or "pullback %s" % T.name, zt, tol=tol)
    if k == ZERO:
        rep.status = "fail"
        rep.notes = "zero factor"
    else:
        rep.notes = "factor %s" % k
    return rep


def roundtrip(T, d=DEFAULT_DOMAIN, tol=1e-9):
    """inverse(forward(p)) = p at sampled points."""
    dom = T.domain(d)
    names = ("t", "x", T.src_dep)
    if T.inverse is not None:
        bind = dict(zip(T.new_names, T.forward))
        reps = []
        for n, inv in zip(names, T.inverse):
            back = substitute(inv, bind)
            zt = is_zero(branch(add(back, mul(-1, Sym(n))), dom), dom, tol)
            reps.append(from_zero_test("%s: %s" % (T.name, n), zt, tol=tol))
        return aggregate("roundtrip %s" % T.name, reps)
    if not T.invert_numerically:
        raise NotInvertible("transform %s has neither inverse nor numeric flag" % T.name)
    syms = set().union(*(e.free_symbols for e in T.forward)) | set(names)
    pts = dom.sample(syms)
    worst = 0.0
    wit = None
    for i in range(dom.samples):
        p = {k: float(v[i]) for k, v in pts.items()}
        params = {k: v for k, v in p.items() if k not in names}
        new = [evaluate(f, p) for f in T.forward]
        guess = [p[n] * 1.05 + 0.01 for n in names]
        back = T.numeric_inverse(new, guess, params)
        err = max(abs(back[n] - p[n]) / (1 + abs(p[n])) for n in names)
        if err > worst:
            worst, wit = err, p
    ok = worst <= tol
    return VerificationReport("roundtrip %s" % T.name, "pass" if ok else "fail", worst,
                              dom.samples, None if ok else wit, "numeric inverse")


def map_solution(T, sol, direction="pull"):
    """Image of a solution.

    pull: sol solves the target equation (in t, x); returns the source solution.
    push: sol solves the source equation; returns the target solution.
    """
    sol = as_expr(sol)
    if T.kind != "point":
        if direction != "pull":
            raise NotInvertible("differential substitution %s maps one way only" % T.name)
        return apply_differential(T, sol)
    if direction == "pull":
        inv_u = T.inverse_map()[T.src_dep]
        s_src = substitute(sol, {"t": T.forward[0], "x": T.forward[1]})
        return substitute(inv_u, {"t1": T.forward[0], "x1": T.forward[1], T.new_names[2]: s_src})
    if direction == "push":
        inv = T.inverse_map()
        it, ix = inv["t"], inv["x"]
        if T.new_names[2] in (it.free_symbols | ix.free_symbols):
            raise NotInvertible("inverse of %s mixes the dependent variable into t, x" % T.name)
        img = substitute(T.forward[2], {T.src_dep: sol})
        img = substitute(img, {"t": it, "x": ix})
        return substitute(img, {"t1": Sym("t"), "x1": Sym("x")})
    raise ValueError("direction must be pull or push")


def push_field(T, Q, functions=None):
    """Pushforward of a vector field on the source space."""
    if Q.dep != T.src_dep:
        raise ValueError("field acts on %s, transform on %s" % (Q.dep, T.src_dep))
    inv = T.inverse_map()
    coeffs = [Q.apply(F, functions) for F in T.forward]
    coeffs = [substitute(c, inv) for c in coeffs]
    ren = {"t1": Sym("t"), "x1": Sym("x"), T.new_names[2]: Sym(T.tgt_dep)}
    return VectorField(*(substitute(c, ren) for c in coeffs), dep=T.tgt_dep, label=Q.label)


def pull_field(T, Q, functions=None):
    """A field on the target space of T written in T's source coordinates.

    T is fiber preserving, so the Jacobian of (t, x, u) -> forward is block
    triangular and the new components follow from a 2x2 solve.
    """
    if Q.dep != T.tgt_dep:
        raise ValueError("field acts on %s, transform targets %s" % (Q.dep, T.tgt_dep))
    Tf, Xf, Uf = T.forward
    dep = T.src_dep
    d = lambda e, v: diff(e, v, functions)
    old = {"t": Tf, "x": Xf, Q.dep: Uf}
    tau, xi, eta = (substitute(c, old) for c in Q.coefficients)
    Tt, Tx, Xt, Xx = d(Tf, "t"), d(Tf, "x"), d(Xf, "t"), d(Xf, "x")
    det = expand(add(mul(Tt, Xx), mul(-1, Tx, Xt)))
    if det == ZERO:
        raise DegenerateTransform("transform %s has zero Jacobian" % T.name)
    inv = power(det, -1)
    a = expand(mul(inv, add(mul(Xx, tau), mul(-1, Tx, xi))))
    b = expand(mul(inv, add(mul(Tt, xi), mul(-1, Xt, tau))))
    Uu = d(Uf, dep)
    if Uu == ZERO:
        raise DegenerateTransform("transform %s does not depend on %s" % (T.name, dep))
    c = expand(mul(power(Uu, -1), add(eta, mul(-1, d(Uf, "t"), a), mul(-1, d(Uf, "x"), b))))
    return VectorField(a, b, c, dep=dep, label=Q.label)


def apply_differential(T, sol):
    """Differential substitution: new dependent variable from the jets of sol."""
    formula = T.forward[2]
    jets = sol_jets(sol, T.src_dep, order=2)
    return substitute(formula, jets)


# -- the extended equivalence group ----------------------------------------

@dataclass(frozen=True)
class EquivalenceTransform:
    """t~ = d1 t + d2, x~ = X(x), u~ = d3 u + d4 with the induced element maps.

    ``X_inv`` is the inverse of X written in x.  ``Phi`` is an antiderivative
    of h/g; when absent it stays opaque with Phi_x = h/g.
    """

    d1: object = 1
    d2: object = 0
    d3: object = 1
    d4: object = 0
    e1: object = 1
    e2: object = 1
    e3: object = 1
    e4: object = 0
    X: object = "x"
    X_inv: object = "x"
    Phi: object = None
    name: str = "equivalence"

    def __post_init__(self):
        for k in ("d1", "d2", "d3", "d4", "e1", "e2", "e3", "e4"):
            object.__setattr__(self, k, Fraction(getattr(self, k)))
        object.__setattr__(self, "X", expand(as_expr(self.X)))
        object.__setattr__(self, "X_inv", expand(as_expr(self.X_inv)))
        if self.Phi is not None:
            object.__setattr__(self, "Phi", expand(as_expr(self.Phi)))
        if self.d1 * self.d3 * self.e1 * self.e2 * self.e3 == 0:
            raise DegenerateTransform("d1*d3*e1*e2*e3 must be nonzero")

    @property
    def moves_x(self):
        return self.X != Sym("x")

    def point_transform(self, dep="u"):
        return PointTransform(
            self.name,
            (add(mul(self.d1, Sym("t")), self.d2), self.X, add(mul(self.d3, Sym(dep)), self.d4)),
            (mul(add(Sym("t1"), -self.d2), Num(1 / self.d1)), substitute(self.X_inv, {"x": Sym("x1")}),
             mul(add(Sym(dep + "1"), -self.d4), Num(1 / self.d3))),
            src_dep=dep, tgt_dep=dep)


_X_OPAQUE = ("f", "g", "h")
_U_OPAQUE = ("A", "B")


def _mentions(e, bases):
    return any(split_jet(n)[0] in bases for n in e.free_symbols)


def apply_equivalence(T, eq, d=DEFAULT_DOMAIN, tol=None):
    """Image of a class member under an element of the extended equivalence group."""
    if not eq.is_class_member:
        raise ValueError("equivalence transformations act on class members only")
    dep = eq.dep
    X_x = diff(T.X, "x")
    pts = d.sample(X_x.free_symbols | {"x"})
    vals = eval_terms(X_x, pts).sum(axis=0) if X_x.free_symbols else np.array([float(X_x.value)])
    if np.any(np.abs(vals) < 1e-12):
        raise DegenerateTransform("X_x vanishes on the domain")
    ratio = expand(mul(eq.h, power(eq.g, -1)))
    rules = dict(eq.rules)
    funcs = dict(eq.functions)
    if T.e4 == 0:
        phi = ONE
    elif T.Phi is not None:
        zt = is_zero(branch(add(diff(T.Phi, "x", eq.functions), mul(-1, ratio)), d), d, tol)
        if not zt:
            raise ValueError("Phi is not an antiderivative of h/g")
        phi = _exp(mul(-T.e4, T.Phi))
    else:
        phi = _exp(mul(-T.e4, Sym("Phi")))
        rules["Phi_x"] = ratio
    f_new = mul(T.e1 * T.d1, phi, eq.f, power(X_x, -1))
    g_new = mul(T.e1 / T.e2, X_x, phi, eq.g)
    h_new = mul(T.e1 / T.e3, phi, eq.h)
    A_new = mul(T.e2, eq.A)
    B_new = mul(T.e3, add(eq.B, mul(T.e4, eq.A)))
    new_x = {}
    if T.moves_x:
        bad = [k for k in (f_new, g_new, h_new) if _mentions(k, _X_OPAQUE)]
        if bad or any(split_jet(k)[0] in _X_OPAQUE for k in rules):
            raise NotRepresentable("opaque functions of x cannot follow a change of x")
        new_x = {"x": T.X_inv}
        if "Phi_x" in rules:
            rules["Phi_x"] = expand(mul(substitute(rules["Phi_x"], new_x), diff(T.X_inv, "x")))
    moves_u = not (T.d3 == 1 and T.d4 == 0)
    new_u = {}
    if moves_u:
        if _mentions(add(A_new, B_new), _U_OPAQUE):
            raise NotRepresentable("opaque functions of u cannot follow a change of u")
        new_u = {dep: mul(add(Sym(dep), -T.d4), Num(1 / T.d3))}
    sub = lambda e: expand(substitute(substitute(e, new_x), new_u))
    els = [sub(e) for e in (f_new, g_new, h_new)] + [sub(A_new), sub(B_new)]
    gauge = "g=1" if els[1] == ONE else ("g=h" if els[1] == els[2] else "free")
    return DCEquation(*els, gauge=gauge, dep=dep, functions=funcs, rules=rules,
                      name="image of %s" % (eq.name or "equation"))


def _exp(e):
    from ..expr import exp
    return exp(e)


def check_equivalence(T, eq, d=DEFAULT_DOMAIN, tol=None):
    """apply_equivalence followed by the pullback test against the original."""
    new = apply_equivalence(T, eq, d, tol)
    return check_pullback(T.point_transform(eq.dep), eq, new, d, tol,
                          "equivalence %s on %s" % (T.name, eq.name or "equation"))


# -- registry ---------------------------------------------------------------

def _from_record(rec):
    tgt = rec.get("tgt_dep", "u")
    src = rec.get("src_dep", "u")
    fwd = rec["forward"]
    forward = (parse(str(fwd["t"])), parse(str(fwd["x"])), parse(str(fwd[tgt])))
    inverse = None
    if "inverse" in rec:
        inv = rec["inverse"]
        inverse = (parse(str(inv["t"])), parse(str(inv["x"])), parse(str(inv[src])))
    return PointTransform(rec["id"], forward, inverse, src, tgt, rec.get("source"), rec.get("target"),
                          {k: v for k, v in (rec.get("choices") or {}).items()},
                          rec.get("kind", "point"), bool(rec.get("invert_numerically", False)),
                          rec.get("note", ""))


@lru_cache(maxsize=None)
def _builtin():
    data = yaml.safe_load(resources.files(__package__).joinpath("transforms.yaml").read_text())
    return tuple(_from_record(r) for r in data["transforms"]), tuple(data.get("preimages", ()))


_extra = {}


def register_transforms(records):
    for r in records:
        T = _from_record(r)
        _extra[T.name] = T


def list_named_transforms():
    out = {T.name: T for T in _builtin()[0]}
    out.update(_extra)
    return list(out.values())


def get_transform(name):
    for T in list_named_transforms():
        if T.name == name:
            return T
    raise KeyError("no transform %r" % name)


def preimage_records():
    """Solutions stored against a transform source, mapped to database entries."""
    return list(_builtin()[1])
