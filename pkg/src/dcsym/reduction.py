"""Lie ansatzes and reduced ODEs, polynomial antireduction, algebraic reductions.

A reduction row gives the dependent variable as U(t, x, phi) with phi a
function of the similarity variable w = omega(t, x).  Derivatives of phi are
the jet symbols phi_w, phi_ww, phi_www and nothing higher; asking for a fourth
derivative is an error rather than a silent extension of the alphabet.
"""

import itertools
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from importlib import resources

import numpy as np
import yaml

from .catalog import named_equation, register_section
from .catalog.solutions import CONSTANT_CHOICES
from .expr import (
    DEFAULT_DOMAIN, ZERO, Num, ParseError, Sym, add, as_expr, collect_poly, diff, evaluate,
    exp, expand, is_zero, mul, parse, power, split_jet, substitute, with_signs,
)
from .expr.calculus import jet_name
from .expr.numeric import SingularEvaluation
from .pde import branch, lhs_residual, solution_residual
from .report import VerificationReport, aggregate, from_zero_test

OMEGA = "w"
PHI_JETS = ("phi", "phi_w", "phi_ww", "phi_www")


class NotInvariant(ValueError):
    """The substituted residual keeps t or x after dividing out a factor."""


class JetOverflow(ValueError):
    """A derivative beyond the declared jet alphabet was requested."""


class UnknownReduction(KeyError):
    pass


def jet_alphabet(base, var, order=3):
    return tuple(jet_name(base, var * k) for k in range(order + 1))


def total(e, var=OMEGA, jets=PHI_JETS):
    """Total derivative in var with jets[k + 1] the var-derivative of jets[k]."""
    out = diff(e, var)
    for lo, hi in zip(jets, jets[1:]):
        out = add(out, mul(diff(e, lo), Sym(hi)))
    if jets[-1] in e.free_symbols and diff(e, jets[-1]) != ZERO:
        raise JetOverflow("derivative of %s is outside the jet alphabet" % jets[-1])
    return expand(out)


_D = re.compile(r"(?<![A-Za-z0-9_])D\(")
_holder = itertools.count()


def parse_ode(text, var=OMEGA, jets=PHI_JETS):
    """parse() plus D(...) for the total derivative in var."""
    m = _D.search(text)
    if m is None:
        return parse(text)
    depth, i = 1, m.end()
    while depth:
        if i >= len(text):
            raise ParseError("unbalanced D(", m.start())
        depth += {"(": 1, ")": -1}.get(text[i], 0)
        i += 1
    inner = total(parse_ode(text[m.end():i - 1], var, jets), var, jets)
    name = "Dterm%d" % next(_holder)
    outer = parse_ode(text[:m.start()] + name + text[i:], var, jets)
    return expand(substitute(outer, {name: inner}))


def jet_values(f, var=OMEGA, jets=PHI_JETS):
    """Bindings jets[k] -> k-th var-derivative of the expression f."""
    f = as_expr(f)
    out = {}
    for name in jets:
        out[name] = f
        f = diff(f, var)
    return out


# -- reduced equations ------------------------------------------------------

@dataclass(frozen=True)
class ReducedODE:
    residual: object
    var: str = OMEGA
    jets: tuple = PHI_JETS
    params: frozenset = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "residual", expand(as_expr(self.residual)))
        object.__setattr__(self, "params", frozenset(self.params))
        extra = self.residual.free_symbols - set(self.jets) - {self.var} - self.params
        if extra:
            raise ValueError("reduced residual has undeclared symbols %s" % ", ".join(sorted(extra)))

    @property
    def order(self):
        present = [k for k, j in enumerate(self.jets) if j in self.residual.free_symbols]
        return max(present, default=0)

    def __str__(self):
        return "%s = 0" % self.residual


@dataclass(frozen=True)
class AnsatzSpec:
    row_id: str
    equation: str
    subalgebra: str
    form: object
    omega: object = None
    solve: tuple = ()
    anchor: tuple = ()
    unknowns: tuple = ("phi",)
    signed: bool = False
    reduced: str = ""
    printed: str = None
    note: str = ""
    params: tuple = ()
    intervals: tuple = ()
    solutions: tuple = ()
    roots: tuple = ()

    @classmethod
    def from_record(cls, rec):
        opt = lambda k: parse(str(rec[k])) if k in rec else None
        return cls(
            row_id=str(rec["id"]),
            equation=rec["equation"],
            subalgebra=str(rec["subalgebra"]),
            form=parse(str(rec["form"])),
            omega=opt("omega"),
            solve=tuple((k, parse(str(v))) for k, v in (rec.get("solve") or {}).items()),
            anchor=tuple((k, str(v)) for k, v in (rec.get("anchor") or {}).items()),
            unknowns=tuple(rec.get("unknowns", ("phi",))),
            signed=bool(rec.get("signed", False)),
            reduced=str(rec.get("reduced", "")),
            printed=rec.get("printed"),
            note=rec.get("note", ""),
            params=tuple(sorted((k, tuple(str(v) for v in vals)) for k, vals in (rec.get("params") or {}).items())),
            intervals=tuple(sorted((k, tuple(v)) for k, v in (rec.get("intervals") or {}).items())),
            solutions=tuple(str(s) for s in rec.get("solutions", ())),
            roots=tuple(Fraction(str(r)) for r in rec.get("roots", ())),
        )

    @property
    def algebraic(self):
        return self.omega is None

    def branches(self):
        return (1, -1) if self.signed else (None,)

    def jets(self):
        return self.unknowns if self.algebraic else PHI_JETS

    def domain(self, delta=None, base=None):
        base = base or DEFAULT_DOMAIN
        choices = dict(named_equation(self.equation).choices)
        choices.update(dict(self.params))
        intervals = dict(self.intervals)
        if delta is not None:
            intervals["t"] = (0.5, 2.0) if delta > 0 else (-2.0, -0.5)
        d = base.with_(choices=choices, intervals=intervals)
        for name in ("C", "C0", "C1", "C2"):
            if d.choice(name) is None:
                d = d.with_(choices={name: CONSTANT_CHOICES})
        return d

    def on_branch(self, e, delta):
        """Specialize |t| on a sign branch and bind the symbol delta."""
        if e is None or delta is None:
            return e
        return expand(substitute(with_signs(e, {"t": delta}), {"delta": Num(delta)}))

    def expected(self, delta=None, printed=False):
        text = self.printed if printed else self.reduced
        if text is None:
            raise ValueError("row %s has no printed variant" % self.row_id)
        e = parse_ode(text)
        if delta is not None:
            e = expand(substitute(e, {"delta": Num(delta)}))
        return e

    def __str__(self):
        if self.algebraic:
            return "%s = %s" % (named_equation(self.equation).equation.dep, self.form)
        return "%s = %s, w = %s" % (named_equation(self.equation).equation.dep, self.form, self.omega)


def _ansatz_derivative(F, v, a):
    out = diff(F, v)
    if a.algebraic:
        return out
    w_v = diff(a.omega, v)
    if w_v == ZERO:
        return out
    return expand(add(out, mul(w_v, add(total(F), mul(-1, diff(F, OMEGA))))))


def ansatz_jets(dep, names, form, a):
    """Values of the jet symbols among names for the ansatz dep = form."""
    out = {}
    for n in names:
        base, suf = split_jet(n)
        if base != dep:
            continue
        e = form
        for ch in suf:
            e = _ansatz_derivative(e, ch, a)
        out[n] = e
    return out


def _params(eq, a):
    names = set()
    for e in (lhs_residual(eq), a.form, a.omega):
        if e is not None:
            names |= e.free_symbols
    names |= {k for k, _ in a.params}
    return names - {"t", "x", OMEGA} - set(a.jets()) - {eq.dep} - {n for n in names if split_jet(n)[0] == eq.dep}


def reduce(eq, a, delta=None, d=None, tol=None):
    """Reduced equation of eq under the ansatz a (on the t-sign branch delta)."""
    if isinstance(a, str):
        a = get_row(a)
    if eq is None or isinstance(eq, str):
        eq = named_equation(eq or a.equation).equation
    if a.signed and delta is None:
        raise ValueError("row %s needs a branch (delta = +1 or -1)" % a.row_id)
    dom = a.domain(delta, d)
    a_b = AnsatzSpec(**{**a.__dict__, "form": a.on_branch(a.form, delta), "omega": a.on_branch(a.omega, delta)})
    R = lhs_residual(eq)
    R = substitute(R, ansatz_jets(eq.dep, R.free_symbols, a_b.form, a_b))
    if a.solve:
        R = substitute(R, {k: a.on_branch(v, delta) for k, v in a.solve})
    R = branch(expand(R), dom)
    anchor = {k: Num(delta) if v == "delta" else parse(v) for k, v in a.anchor}
    R0 = expand(substitute(R, anchor))
    if {"t", "x"} & R0.free_symbols:
        raise NotInvariant("%s: anchor leaves %s" % (a.row_id, sorted({"t", "x"} & R0.free_symbols)))
    if R0 == ZERO:
        raise NotInvariant("%s: residual vanishes at the anchor" % a.row_id)
    for j in a.jets():
        if j not in R.free_symbols:
            continue
        # R / R0 must not depend on the unknowns: R = k(t, x) R0
        zt = is_zero(add(mul(diff(R, j), R0), mul(-1, R, diff(R0, j))), dom, tol)
        if not zt:
            raise NotInvariant("%s: residual is not a multiple of a t,x-free equation (max %.3g)"
                               % (a.row_id, zt.max_residual))
    params = _params(eq, a) | {"delta"}
    return ReducedODE(R0, OMEGA, a.jets() if not a.algebraic else tuple(a.unknowns), params)


def _points(e1, e2, d, count=16):
    names = e1.free_symbols | e2.free_symbols
    pts = d.sample(names, count)
    for i in range(count):
        p = {k: float(v[i]) for k, v in pts.items()}
        try:
            yield evaluate(e1, p), evaluate(e2, p)
        except (SingularEvaluation, ZeroDivisionError, OverflowError):
            continue


def rational_factor(r, e, d=DEFAULT_DOMAIN, max_den=10 ** 6):
    """Rational c with r = c*e suggested by sampling (None when e vanishes)."""
    for a, b in _points(as_expr(r), as_expr(e), d):
        if abs(b) > 1e-6 * (1 + abs(a)) and np.isfinite(a) and np.isfinite(b):
            return Fraction(a / b).limit_denominator(max_den)
    return None


def proportional(r, e, d=DEFAULT_DOMAIN, subject="proportional", tol=None, jets=()):
    """Report on r = c*e for a nonzero factor c; the factor goes in the notes.

    c is a rational number when sampling finds one; otherwise, when jets are
    given, the ratio of the coefficients of the highest jet is tried, which
    must be free of every jet (a common factor in the independent variable).
    """
    r, e = as_expr(r), as_expr(e)
    c = rational_factor(r, e, d)
    if c not in (None, 0):
        rep = from_zero_test(subject, is_zero(add(r, mul(-Num(c), e)), d, tol), tol=tol)
        if rep.passed or not jets:
            rep.notes = "factor %s" % c
            return rep
    top = [j for j in jets if j in e.free_symbols]
    if top:
        k = expand(mul(diff(r, top[-1]), power(diff(e, top[-1]), -1)))
        if not set(jets) & k.free_symbols:
            rep = from_zero_test(subject, is_zero(add(r, mul(-1, k, e)), d, tol), tol=tol)
            rep.notes = "factor %s" % k
            return rep
    return VerificationReport(subject, "fail", float("inf"), 0, None,
                              "no nonzero factor (sampled ratio %s)" % c)


def jet_coefficients(e, jets):
    """{exponent tuple: coefficient} of e as a polynomial in the given jets."""
    out = {(): as_expr(e)}
    for j in jets:
        nxt = {}
        for key, c in out.items():
            for k, ck in collect_poly(c, j).items():
                nxt[key + (k,)] = ck
        out = nxt
    return {k: v for k, v in out.items() if v != ZERO}


def coefficient_match(r, e, jets, d=DEFAULT_DOMAIN, subject="coefficients", tol=None):
    """Both sides divided by their coefficient of the leading jet monomial,
    then compared monomial by monomial.

    jets are the derivative symbols (phi_w, ...); phi itself may appear in
    coefficients.  Notes say whether every difference was zero symbolically
    ("exact") or needed sampling, and give the divided-out factor r/e.
    """
    cr, ce = jet_coefficients(r, jets), jet_coefficients(e, jets)
    lead = max(ce, key=lambda k: (sum(i * n for i, n in enumerate(k, 1)), k))
    if lead not in cr:
        return VerificationReport(subject, "fail", float("inf"), 0, None,
                                  "derived side has no %s monomial" % (lead,))
    kr, ke = power(cr[lead], -1), power(ce[lead], -1)
    reports, exact = [], True
    # a monomial on one side only must have a coefficient that vanishes on the domain
    for key in sorted(set(cr) | set(ce)):
        diff_ = expand(add(mul(cr.get(key, ZERO), kr), mul(-1, ce.get(key, ZERO), ke)))
        if diff_ == ZERO:
            continue
        exact = False
        reports.append(from_zero_test("monomial %s" % (key,), is_zero(diff_, d, tol), tol=tol))
    rep = aggregate(subject, reports) if reports else VerificationReport(subject, "pass", 0.0, len(ce), None)
    rep.notes = "%s; factor %s" % ("exact" if exact else "sampled", expand(mul(cr[lead], ke)))
    return rep


def verify_reduced(eq, a, expected=None, d=None, tol=None, printed=False):
    """Derived reduced equation against the expected one, on every branch."""
    if isinstance(a, str):
        a = get_row(a)
    reports = []
    for delta in a.branches():
        dom = a.domain(delta, d)
        tag = "" if delta is None else " [t%s0]" % (">" if delta > 0 else "<")
        subject = "reduction %s%s%s" % (a.row_id, " (printed)" if printed else "", tag)
        try:
            r = reduce(eq, a, delta, d, tol)
        except NotInvariant as exc:
            reports.append(VerificationReport(subject, "fail", float("inf"), 0, None, str(exc)))
            continue
        e = a.expected(delta, printed) if expected is None else as_expr(expected)
        reports.append(proportional(r.residual, e, dom, subject, tol, r.jets))
    return aggregate("reduction %s" % a.row_id, reports, "%s under <%s>" % (a, a.subalgebra))


def verify_ode_solution(r, phi, d=DEFAULT_DOMAIN, subject=None, tol=None):
    """Substitute phi(w) into a reduced equation and test for zero."""
    if isinstance(r, ReducedODE):
        var, jets, res = r.var, r.jets, r.residual
    else:
        var, jets, res = OMEGA, PHI_JETS, as_expr(r)
    phi = parse(phi) if isinstance(phi, str) else as_expr(phi)
    e = substitute(res, jet_values(phi, var, jets))
    return from_zero_test(subject or "phi = %s" % phi, is_zero(e, d, tol), tol=tol)


def compose(a, phi, delta=None):
    """The solution u(t, x) from the ansatz a and phi(w)."""
    if isinstance(a, str):
        a = get_row(a)
    phi = parse(phi) if isinstance(phi, str) else as_expr(phi)
    form = a.on_branch(a.form, delta)
    if a.algebraic:
        return form
    return expand(substitute(form, {"phi": substitute(phi, {OMEGA: a.on_branch(a.omega, delta)})}))


def verify_row(a, d=None, tol=None):
    """Reduced equation, listed phi-solutions, and their composed u(t, x)."""
    if isinstance(a, str):
        a = get_row(a)
    eq = named_equation(a.equation).equation
    reports = [verify_reduced(eq, a, d=d, tol=tol)]
    for delta in a.branches():
        dom = a.domain(delta, d)
        if a.solutions:
            r = ReducedODE(a.expected(delta), params=_params(eq, a) | {"delta"}) if not a.algebraic else None
            for s in a.solutions:
                reports.append(verify_ode_solution(r, s, dom, "%s: phi = %s" % (a.row_id, s), tol))
                reports.append(solution_residual(eq, compose(a, s, delta), dom,
                                                 "%s: composed solution from phi = %s" % (a.row_id, s), tol))
        if a.roots:
            reports.append(check_algebraic_reduction(a.expected(delta), a.roots,
                                                     a.unknowns[0], subject="%s roots" % a.row_id))
    return aggregate("row %s" % a.row_id, reports)


# -- algebraic reductions ----------------------------------------------------

def _rational_coeffs(poly, var):
    coeffs = collect_poly(poly, var)
    out = {}
    for k, c in coeffs.items():
        if not isinstance(c, Num):
            raise ValueError("coefficient of %s^%d is not a number: %s" % (var, k, c))
        out[k] = c.value
    return out


def _divisors(n):
    n = abs(n)
    return [k for k in range(1, n + 1) if n % k == 0]


def rational_roots(poly, var="C"):
    """All rational roots of a polynomial with rational coefficients."""
    coeffs = _rational_coeffs(poly, var)
    if not coeffs:
        raise ValueError("zero polynomial")
    low = min(coeffs)
    roots = {Fraction(0)} if low > 0 else set()
    shifted = {k - low: c for k, c in coeffs.items()}
    lcm = np.lcm.reduce([c.denominator for c in shifted.values()])
    ints = {k: int(c * int(lcm)) for k, c in shifted.items()}
    top = max(ints)
    for p in _divisors(ints[0]):
        for q in _divisors(ints[top]):
            for cand in (Fraction(p, q), Fraction(-p, q)):
                if sum(c * cand ** k for k, c in ints.items()) == 0:
                    roots.add(cand)
    return sorted(roots)


def real_roots(poly, var="C", tol=1e-9):
    coeffs = _rational_coeffs(poly, var)
    top = max(coeffs)
    vec = [float(coeffs.get(k, 0)) for k in range(top, -1, -1)]
    r = np.roots(vec) if top > 0 else np.array([])
    return sorted(float(z.real) for z in r if abs(z.imag) <= tol * (1 + abs(z)))


def check_algebraic_reduction(poly, expected_roots, var="C", subject=None):
    """Exact evaluation at the claimed roots; no further rational or real roots."""
    poly = parse(poly) if isinstance(poly, str) else as_expr(poly)
    expected = sorted({Fraction(r) for r in expected_roots})
    subject = subject or "roots of %s" % poly
    problems = []
    for r in expected:
        v = expand(substitute(poly, {var: Num(r)}))
        if v != ZERO:
            problems.append("nonzero at %s: %s" % (r, v))
    found = rational_roots(poly, var)
    extra = [r for r in found if r not in expected]
    if extra:
        problems.append("unlisted rational roots %s" % ", ".join(map(str, extra)))
    reals = real_roots(poly, var)
    unexplained = [z for z in reals if all(abs(z - float(r)) > 1e-6 for r in expected)]
    if unexplained:
        problems.append("unlisted real roots %s" % ", ".join("%.6g" % z for z in unexplained))
    notes = "rational roots {%s}; %d real root(s)" % (", ".join(map(str, found)), len(reals))
    if problems:
        return VerificationReport(subject, "fail", float("inf"), len(expected), None, "; ".join(problems))
    return VerificationReport(subject, "pass", 0.0, len(expected), None, notes)


def algebraic_reduction(ode, ansatz, var="t", base="phi4", unknown="C", anchor=0, d=None, tol=None):
    """Reduce an ODE in the jets of base by an ansatz base = F(var, C).

    Returns the polynomial in C read off at var = anchor, after checking that
    the substituted residual is that polynomial times a function of var.
    """
    res = ode.residual if isinstance(ode, ReducedODE) else as_expr(ode)
    jets = ode.jets if isinstance(ode, ReducedODE) else jet_alphabet(base, var)
    F = parse(ansatz) if isinstance(ansatz, str) else as_expr(ansatz)
    R = expand(substitute(res, jet_values(F, var, jets)))
    R0 = expand(substitute(R, {var: Num(Fraction(anchor))}))
    d = (d or DEFAULT_DOMAIN).with_(choices={unknown: ("-3", "-1/2", "1/3", "2", "5")})
    if R0 == ZERO or var in R0.free_symbols:
        raise NotInvariant("ansatz %s gives a degenerate anchor value" % F)
    zt = is_zero(add(mul(diff(R, unknown), R0), mul(-1, R, diff(R0, unknown))), d.with_(
        intervals={var: (-2.0, 2.0)} if anchor == 0 else {}), tol)
    if not zt:
        raise NotInvariant("ansatz %s is not invariant: residual is not k(%s)*P(%s)" % (F, var, unknown))
    return R0


# -- polynomial antireduction -----------------------------------------------

PINNED = {0: 0, 1: 0, 2: 0, 3: 2}
SYSTEM = (
    "phi4_t - 7*phi5 + 4/3*phi4^2",
    "phi5_t - 18*phi6 + 4/3*phi4*phi5",
    "phi6_t + 5/6*phi5^2 - 2*phi4*phi6",
)
THIRD_ORDER = "63*phi4_ttt + 387*phi4_t^2 + 126*phi4*phi4_tt + 192*phi4^2*phi4_t + 16*phi4^4"
CHARACTERISTIC = "x^3*v_xxx - 12*x^2*v_xx + 60*x*v_x - 120*v + 12*x^3"


def polynomial_form(degree=6, fixed=None, base="phi"):
    """sum_i c_i x^i and its t-derivative; fixed coefficients are constants."""
    fixed = PINNED if fixed is None else fixed
    v, vt = [], []
    for i in range(degree + 1):
        if i in fixed:
            c, ct = as_expr(parse(str(fixed[i])) if isinstance(fixed[i], str) else fixed[i]), ZERO
        else:
            c, ct = Sym("%s%d" % (base, i)), Sym("%s%d_t" % (base, i))
        v.append(mul(c, power(Sym("x"), i)))
        vt.append(mul(ct, power(Sym("x"), i)))
    return expand(add(*v)), expand(add(*vt))


def antireduce_poly(eq="sl2-potential", degree=6, fixed=None):
    """Coefficients of powers of x after substituting a polynomial ansatz.

    Returns {power: coefficient}; powers whose coefficient vanishes
    identically are absent.
    """
    if isinstance(eq, str):
        eq = named_equation(eq).equation
    v, vt = polynomial_form(degree, fixed)
    vx = diff(v, "x")
    jets = {eq.dep: v, jet_name(eq.dep, "t"): vt, jet_name(eq.dep, "x"): vx,
            jet_name(eq.dep, "xx"): diff(vx, "x")}
    R = substitute(lhs_residual(eq), jets)
    return collect_poly(R, "x")


def verify_antireduction(eq="sl2-potential", system=SYSTEM, d=DEFAULT_DOMAIN):
    """The pinned polynomial ansatz gives exactly the listed system."""
    conds = antireduce_poly(eq)
    expected = [parse(s) for s in system]
    used = set()
    reports = []
    for k, c in sorted(conds.items()):
        match = None
        for i, e in enumerate(expected):
            f = rational_factor(c, e, d.with_(jets={"phi4", "phi5", "phi6"}))
            if f and expand(add(c, mul(-Num(f), e))) == ZERO:
                match = (i, f)
                break
        subject = "x^%d coefficient" % k
        if match is None:
            reports.append(VerificationReport(subject, "fail", float("inf"), 0, None, "unmatched: %s" % c))
        else:
            used.add(match[0])
            reports.append(VerificationReport(subject, "pass", 0.0, 1, None,
                                              "%s times equation %d" % (match[1], match[0] + 1)))
    for i, e in enumerate(expected):
        if i not in used:
            reports.append(VerificationReport("system equation %d" % (i + 1), "fail", float("inf"), 0,
                                              None, "no coefficient reproduces %s" % e))
    return aggregate("polynomial antireduction", reports,
                     "nonzero powers %s" % ", ".join(str(k) for k in sorted(conds)))


def _solve_linear(e, name):
    a = diff(e, name)
    if name in a.free_symbols or a == ZERO:
        raise ValueError("%s is not linear in %s" % (e, name))
    return expand(mul(-1, add(e, mul(-1, a, Sym(name))), power(a, -1)))


def eliminate_to_third_order(system=SYSTEM):
    """Eliminate phi5 and phi6 from the system, leaving one ODE for phi4."""
    eqs = [parse(s) if isinstance(s, str) else s for s in system]
    jets = jet_alphabet("phi4", "t")
    p5 = _solve_linear(eqs[0], "phi5")
    p5t = total(p5, "t", jets)
    second = substitute(eqs[1], {"phi5": p5, "phi5_t": p5t})
    p6 = _solve_linear(second, "phi6")
    p6t = total(p6, "t", jets)
    third = substitute(eqs[2], {"phi5": p5, "phi6": p6, "phi6_t": p6t})
    return ReducedODE(third, "t", jets)


def check_third_order(ode=None, reference=THIRD_ORDER):
    """The eliminated equation is an exact rational multiple of the reference."""
    ode = ode or eliminate_to_third_order()
    ref = parse(reference)
    c = rational_factor(ode.residual, ref, DEFAULT_DOMAIN.with_(jets=set(ode.jets)))
    ok = c not in (None, 0) and expand(add(ode.residual, mul(-Num(c), ref))) == ZERO
    return VerificationReport("third-order equation", "pass" if ok else "fail", 0.0 if ok else float("inf"),
                              1, None, "factor %s" % c)


def antireduction_characteristic(v=None):
    """The characteristic of the third-order evolutionary operator on v(t, x)."""
    if v is None:
        v = polynomial_form()[0]
    v = parse(v) if isinstance(v, str) else as_expr(v)
    vals = {"v": v, "v_x": diff(v, "x")}
    vals["v_xx"] = diff(vals["v_x"], "x")
    vals["v_xxx"] = diff(vals["v_xx"], "x")
    return expand(substitute(parse(CHARACTERISTIC), vals))


def verify_antireduction_operator(v=None):
    c = antireduction_characteristic(v)
    ok = c == ZERO
    return VerificationReport("characteristic on %s" % ("the pinned family" if v is None else v),
                              "pass" if ok else "fail", 0.0 if ok else float("inf"), 1, None,
                              "" if ok else "characteristic %s" % c)


def separation_system(eq="reaction-burgers"):
    """v = phi(t) x + psi(t): coefficients of x^1 and x^0."""
    if isinstance(eq, str):
        eq = named_equation(eq).equation
    x = Sym("x")
    v = add(mul(Sym("phi"), x), Sym("psi"))
    jets = {eq.dep: v, jet_name(eq.dep, "t"): add(mul(Sym("phi_t"), x), Sym("psi_t")),
            jet_name(eq.dep, "x"): Sym("phi"), jet_name(eq.dep, "xx"): ZERO}
    return collect_poly(substitute(lhs_residual(eq), jets), "x")


# -- invariance group of the sl(2) equation -----------------------------------

def sl2_group(name, a):
    """Old (t, x) in terms of the new ones and the factor with v_new = factor * v_old."""
    a = as_expr(Fraction(a) if not hasattr(a, "free_symbols") else a)
    t, x = Sym("t"), Sym("x")
    if name == "Pt":
        return add(t, mul(-1, a)), x, Num(1)
    if name == "D":
        k = exp(mul(-1, a))
        return mul(t, k), mul(x, k), exp(mul(3, a))
    if name == "Pi":
        s = add(t, x)
        t_old = mul(t, power(add(1, mul(a, t)), -1))
        x_old = add(mul(s, power(add(1, mul(a, s)), -1)), mul(-1, t_old))
        return t_old, x_old, power(add(1, mul(a, s)), 6)
    raise ValueError("unknown one-parameter group %r" % name)


def transport(sol, name, a):
    """Image of a solution v(t, x) under the one-parameter group at parameter a."""
    sol = parse(sol) if isinstance(sol, str) else as_expr(sol)
    t_old, x_old, k = sl2_group(name, a)
    # left unexpanded: the Pi image of a polynomial has a huge normal form
    return mul(k, substitute(sol, {"t": t_old, "x": x_old}))


# -- registry -----------------------------------------------------------------

_store = {}


@lru_cache(maxsize=None)
def _builtin_rows():
    data = yaml.safe_load(resources.files("dcsym.catalog").joinpath("reductions.yaml").read_text())
    return {r["id"]: AnsatzSpec.from_record(r) for r in data["reductions"]}


def register_rows(records):
    for r in records:
        row = AnsatzSpec.from_record(r)
        named_equation(row.equation)
        _store[row.row_id] = row


register_section("reductions", register_rows)


def all_rows():
    rows = dict(_builtin_rows())
    rows.update(_store)
    return list(rows.values())


def get_row(row_id):
    for r in all_rows():
        if r.row_id == row_id:
            return r
    raise UnknownReduction("no reduction row %r" % row_id)


def find_row(equation, subalgebra):
    key = subalgebra.replace(" ", "")
    for r in all_rows():
        if r.equation == equation and r.subalgebra.replace(" ", "") == key:
            return r
    raise UnknownReduction("no reduction of %s under <%s>" % (equation, subalgebra))
