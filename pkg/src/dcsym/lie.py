"""Vector fields, second prolongation, invariance residuals and Lie brackets."""

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations

from .expr import (
    DEFAULT_DOMAIN, ZERO, Expr, Sym, add, as_expr, diff, expand, is_zero, mul, substitute,
    total_diff,
)
from .expr.calculus import freeze_functions, jet_name, jet_table
from .pde import branch, evolution_rhs, lhs_residual
from .report import VerificationReport, aggregate, from_zero_test


@dataclass(frozen=True)
class VectorField:
    tau: Expr
    xi: Expr
    eta: Expr
    dep: str = "u"
    label: str = ""

    def __post_init__(self):
        for k in ("tau", "xi", "eta"):
            object.__setattr__(self, k, expand(as_expr(getattr(self, k))))

    @classmethod
    def parse(cls, tau, xi, eta, dep="u", label=""):
        return cls(as_expr(tau), as_expr(xi), as_expr(eta), dep, label)

    @property
    def coefficients(self):
        return (self.tau, self.xi, self.eta)

    @property
    def variables(self):
        return ("t", "x", self.dep)

    def apply(self, e, functions=None):
        """Q(e) for a function e of (t, x, dep)."""
        return expand(add(*(mul(c, diff(e, v, functions)) for c, v in zip(self.coefficients, self.variables))))

    def __add__(self, other):
        return VectorField(add(self.tau, other.tau), add(self.xi, other.xi), add(self.eta, other.eta), self.dep)

    def scale(self, c):
        c = as_expr(c)
        return VectorField(mul(c, self.tau), mul(c, self.xi), mul(c, self.eta), self.dep, self.label)

    def __sub__(self, other):
        return self + other.scale(-1)

    def substitute(self, bindings):
        return VectorField(substitute(self.tau, bindings), substitute(self.xi, bindings),
                           substitute(self.eta, bindings), self.dep, self.label)

    def is_zero_field(self):
        return all(c == ZERO for c in self.coefficients)

    def __str__(self):
        parts = []
        for c, v in zip(self.coefficients, self.variables):
            if c != ZERO:
                parts.append("(%s)*d_%s" % (c, v))
        return " + ".join(parts) if parts else "0"


def prolong2(Q, functions=None):
    """Prolongation coefficients eta^t, eta^x, eta^xx (characteristic form)."""
    dep = Q.dep
    J = lambda s: Sym(jet_name(dep, s))
    fz = freeze_functions(functions)
    dt = jet_table("t", dep, order=4)
    dx = jet_table("x", dep, order=4)
    W = add(Q.eta, mul(-1, Q.tau, J("t")), mul(-1, Q.xi, J("x")))
    Dt = lambda e: total_diff(e, "t", dt, fz, dependent={dep})
    Dx = lambda e: total_diff(e, "x", dx, fz, dependent={dep})
    DxW = Dx(W)
    eta_t = expand(add(Dt(W), mul(Q.tau, J("tt")), mul(Q.xi, J("tx"))))
    eta_x = expand(add(DxW, mul(Q.tau, J("tx")), mul(Q.xi, J("xx"))))
    eta_xx = expand(add(Dx(DxW), mul(Q.tau, J("txx")), mul(Q.xi, J("xxx"))))
    return {"eta_t": eta_t, "eta_x": eta_x, "eta_xx": eta_xx}


def apply_prolonged(Q, L, functions=None, rules=None):
    """pr^(2) Q applied to an expression in (t, x, u, u_t, u_x, u_xx)."""
    from .pde import apply_rules
    fz = freeze_functions(functions)
    pr = prolong2(Q, fz)
    dep = Q.dep
    pieces = [
        mul(Q.tau, diff(L, "t", fz)),
        mul(Q.xi, diff(L, "x", fz)),
        mul(Q.eta, diff(L, dep, fz)),
        mul(pr["eta_t"], diff(L, jet_name(dep, "t"), fz)),
        mul(pr["eta_x"], diff(L, jet_name(dep, "x"), fz)),
        mul(pr["eta_xx"], diff(L, jet_name(dep, "xx"), fz)),
    ]
    out = expand(add(*pieces))
    return apply_rules(out, rules, fz) if rules else out


def manifold_bindings(eq):
    """u_t, u_tx, u_txx, u_tt expressed through the evolution form."""
    rhs = evolution_rhs(eq)
    J = eq.jet
    rhs_x = eq.total_dx(rhs)
    rhs_xx = eq.total_dx(rhs_x)
    on = {J("t").name: rhs, J("tx").name: rhs_x, J("txx").name: rhs_xx}
    rhs_t = substitute(eq.total_dt(rhs), on)
    on[J("tt").name] = rhs_t
    return on


def invariance_residual(eq, Q):
    """pr Q (L) restricted to the solution manifold of eq."""
    if Q.dep != eq.dep:
        raise ValueError("vector field acts on %s, equation on %s" % (Q.dep, eq.dep))
    L = lhs_residual(eq)
    prL = apply_prolonged(Q, L, eq.functions, eq.rules)
    return eq.apply_rules(substitute(prL, manifold_bindings(eq)))


def check_symmetry(eq, Q, d=DEFAULT_DOMAIN, subject=None, tol=None):
    r = branch(invariance_residual(eq, Q), d)
    zt = is_zero(r, d, tol)
    return from_zero_test(subject or ("symmetry %s" % (Q.label or Q)), zt, tol=tol)


def commutator(Q1, Q2, functions=None):
    """[Q1, Q2] with coefficients Q1(c2) - Q2(c1)."""
    if Q1.dep != Q2.dep:
        raise ValueError("vector fields act on different dependent variables")
    cs = [expand(add(Q1.apply(c2, functions), mul(-1, Q2.apply(c1, functions))))
          for c1, c2 in zip(Q1.coefficients, Q2.coefficients)]
    return VectorField(cs[0], cs[1], cs[2], Q1.dep)


@dataclass
class AlgebraSpec:
    """Basis and expected structure constants: (i, j, k) -> c with [Q_i, Q_j] = sum c Q_k."""

    basis: tuple
    constants: dict
    name: str = ""

    def __post_init__(self):
        self.basis = tuple(self.basis)
        consts = {}
        for (i, j, k), c in self.constants.items():
            consts[(i, j, k)] = as_expr(c)
        for (i, j, k), c in list(consts.items()):
            if (j, i, k) in consts:
                if expand(add(c, consts[(j, i, k)])) != ZERO:
                    raise ValueError("structure constants not antisymmetric at %s" % ((i, j, k),))
            else:
                consts[(j, i, k)] = mul(-1, c)
        self.constants = consts


def _field_zero(F, d, tol):
    tests = [is_zero(c, d, tol) for c in F.coefficients]
    worst = max(t.max_residual for t in tests)
    ok = all(tests)
    wit = next((t.witness for t in tests if not t.zero), None)
    return ok, worst, wit, sum(t.samples for t in tests)


def check_algebra(spec, d=DEFAULT_DOMAIN, tol=None):
    reports = []
    n = len(spec.basis)
    for i, j in combinations(range(n), 2):
        br = commutator(spec.basis[i], spec.basis[j])
        expect = VectorField(ZERO, ZERO, ZERO, br.dep)
        for k in range(n):
            c = spec.constants.get((i, j, k))
            if c is not None:
                expect = expect + spec.basis[k].scale(c)
        ok, worst, wit, ns = _field_zero(br - expect, d, tol)
        reports.append(VerificationReport("[Q%d, Q%d]" % (i + 1, j + 1), "pass" if ok else "fail",
                                          worst, ns, wit, "" if ok else "bracket = %s" % br))
    return aggregate("algebra %s" % spec.name, reports)


def check_jacobi(basis, d=DEFAULT_DOMAIN, tol=None, subject="jacobi"):
    reports = []
    basis = list(basis)
    for i, j, k in combinations(range(len(basis)), 3):
        a, b, c = basis[i], basis[j], basis[k]
        s = (commutator(commutator(a, b), c) + commutator(commutator(b, c), a)
             + commutator(commutator(c, a), b))
        ok, worst, wit, ns = _field_zero(s, d, tol)
        reports.append(VerificationReport("(%d,%d,%d)" % (i + 1, j + 1, k + 1), "pass" if ok else "fail",
                                          worst, ns, wit))
    return aggregate(subject, reports)


def structure_constants(basis, d=DEFAULT_DOMAIN):
    """Solve [Q_i, Q_j] = sum c_k Q_k numerically; returns rationals when exact."""
    import numpy as np
    n = len(basis)
    pts = d.sample(set().union(*(c.free_symbols for Q in basis for c in Q.coefficients)) or {"x"}, 12)
    from .expr.numeric import eval_terms

    def vec(F):
        cols = []
        for c in F.coefficients:
            v = eval_terms(expand(c), pts).sum(axis=0) if c.free_symbols else np.full(12, float(c.value) if hasattr(c, "value") else 0.0)
            cols.append(np.broadcast_to(v, (12,)))
        return np.concatenate(cols)

    M = np.stack([vec(Q) for Q in basis], axis=1)
    out = {}
    for i, j in combinations(range(n), 2):
        b = vec(commutator(basis[i], basis[j]))
        sol, *_ = np.linalg.lstsq(M, b, rcond=None)
        for k, c in enumerate(sol):
            if abs(c) > 1e-9:
                out[(i, j, k)] = Fraction(c).limit_denominator(1000)
    return out
