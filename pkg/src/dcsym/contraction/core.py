"""Contraction specs: limits of rescaled equations and of symmetry operators."""

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from importlib import resources

import numpy as np
import yaml

from ..catalog import case, register_section
from ..catalog.cases import _branch_domains
from ..catalog.transforms import PointTransform, pull_field
from ..expr import (
    DEFAULT_DOMAIN, ZERO, Num, Sym, add, diff, expand, is_zero, mul, parse, power,
    split_jet, substitute,
)
from ..expr.numeric import SingularEvaluation, evaluate, eval_terms
from ..lie import VectorField, check_symmetry, prolong2
from ..pde import DCEquation, evolution_rhs, lhs_residual, proportionality_factor, same_equation
from ..report import VerificationReport, aggregate
from .limits import NoRegisteredLimit, leading_term, limit, series

JET_COORDS = ("t", "x", "u", "u_t", "u_x", "u_xx")


class UnknownContraction(KeyError):
    pass


class DegenerateRecipe(ValueError):
    pass


def _pairs(d):
    return tuple(sorted((str(k), str(v)) for k, v in (d or {}).items()))


@dataclass(frozen=True)
class ContractionSpec:
    spec_id: str
    source: str
    target: str
    parameter: str = "delta"
    at: str = "infinity"
    source_params: tuple = ()
    picks: tuple = ()
    rescale: tuple = (("t", "t"), ("u", "u"), ("x", "x"))
    rescale_inverse: tuple = ()
    elements: tuple = ()
    source_basis: tuple = None
    target_basis: tuple = None
    recipe: tuple = ()
    corollary: tuple = ()
    errata: tuple = ()
    ansatz_equations: tuple = ()
    note: str = ""

    @classmethod
    def from_record(cls, rec):
        basis = lambda b: None if b is None else tuple(tuple(str(c) for c in g) for g in b)
        resc = {"t": "t", "x": "x", "u": "u"}
        resc.update(rec.get("rescale", {}))
        return cls(
            spec_id=str(rec["id"]),
            source=str(rec["source"]),
            target=str(rec["target"]),
            parameter=rec.get("parameter", "delta"),
            at=str(rec.get("at", "infinity")),
            source_params=_pairs(rec.get("source_params")),
            picks=tuple(_pairs(p) for p in rec.get("picks", ())),
            rescale=_pairs(resc),
            rescale_inverse=_pairs(rec.get("rescale_inverse")),
            elements=_pairs(rec.get("elements")),
            source_basis=basis(rec.get("source_basis")),
            target_basis=basis(rec.get("target_basis")),
            recipe=tuple(str(r) for r in rec.get("recipe", ())),
            corollary=_pairs(rec.get("corollary")),
            errata=tuple((int(e["entry"]), str(e["printed"]), e.get("note", "")) for e in rec.get("errata", ())),
            ansatz_equations=tuple(rec.get("ansatz_equations", ())),
            note=rec.get("note", ""),
        )

    def pick_values(self):
        if not self.picks:
            return [{}]
        return [{k: Fraction(v) for k, v in p} for p in self.picks]

    @property
    def finite(self):
        return self.at != "infinity"

    def sequence(self):
        """Default parameter values approaching the limit."""
        if self.finite:
            return tuple(float(Fraction(self.at)) + 10.0 ** -k for k in range(1, 5))
        return (1e2, 1e3, 1e4)

    def small(self, lam):
        return 1.0 / lam if not self.finite else lam - float(Fraction(self.at))


@dataclass
class ContractionInstance:
    """A spec at one pick: rescaled source data in the new variables."""

    spec: ContractionSpec
    pick: dict
    source_eq: DCEquation
    source_basis: tuple
    target_eq: DCEquation
    target_basis: tuple
    transform: PointTransform
    residual: object
    order: Fraction
    limit_residual: object
    limit_eq: DCEquation

    @property
    def tag(self):
        return ", ".join("%s=%s" % kv for kv in sorted(self.pick.items()))

    def normalized(self):
        """Rescaled residual times the power of the small variable that makes it finite."""
        lam = Sym(self.spec.parameter)
        if self.spec.finite:
            s = add(lam, -Fraction(self.spec.at))
            return expand(mul(self.residual, power(s, -self.order)))
        return expand(mul(self.residual, power(lam, self.order)))


def _bind(pick):
    return {k: Num(v) for k, v in pick.items()}


def _expr(text, pick):
    return expand(substitute(parse(text), _bind(pick)))


def _basis(rows, pick, dep="u"):
    return tuple(VectorField(*(_expr(c, pick) for c in g), dep=dep, label="Q%d" % (i + 1))
                 for i, g in enumerate(rows))


def _scale_elements(e, elements):
    if not elements:
        return e
    factors = {}
    for base, image in elements.items():
        k = expand(mul(image, power(Sym(base), -1)))
        if base in k.free_symbols:
            raise ValueError("element map %s -> %s is not a rescaling" % (base, image))
        factors[base] = k
    bind = {}
    for n in e.free_symbols:
        base, _ = split_jet(n)
        if base in factors:
            bind[n] = mul(factors[base], Sym(n))
    return expand(substitute(e, bind)) if bind else e


def instantiate(spec, pick=None):
    """Rescale the source row and extract the leading behaviour of its residual."""
    if isinstance(spec, str):
        spec = get_spec(spec)
    pick = spec.pick_values()[0] if pick is None else {k: Fraction(v) for k, v in pick.items()}
    src_case = case(spec.source)
    tgt_case = case(spec.target)
    src_vals = {k: _expr(v, pick) for k, v in spec.source_params}
    src_eq, src_basis = src_case.instantiate(src_vals)
    if spec.source_basis is not None:
        bind = dict(_bind(pick))
        bind.update(src_vals)
        src_basis = tuple(VectorField(*(expand(substitute(parse(c), bind)) for c in g), label="Q%d" % (i + 1))
                          for i, g in enumerate(spec.source_basis))
    tgt_vals = {k: v for k, v in pick.items() if k in tgt_case.params}
    tgt_eq, tgt_basis = tgt_case.instantiate(tgt_vals)
    if spec.target_basis is not None:
        tgt_basis = _basis(spec.target_basis, pick)
    resc = dict(spec.rescale)
    T = PointTransform("rescale %s" % spec.spec_id, tuple(_expr(resc[v], pick) for v in ("t", "x", "u")))
    elements = {k: _expr(v, pick) for k, v in spec.elements}
    old = _scale_elements(lhs_residual(src_eq), elements)
    R = expand(T.pullback(old, src_eq.functions))
    try:
        order, L0 = leading_term(R, spec.parameter, spec.at)
    except NoRegisteredLimit as exc:
        raise NoRegisteredLimit("%s: %s" % (spec.spec_id, exc))
    rules = {}
    for name, rule in src_eq.rules:
        X = T.forward[1]
        moved = mul(substitute(rule, {"x": X}), diff(X, "x"))
        rules[name] = limit(moved, spec.parameter, spec.at)
    limit_eq = DCEquation(residual_form=L0, rules=rules, functions=dict(src_eq.functions),
                          name="limit of %s" % spec.spec_id)
    return ContractionInstance(spec, pick, src_eq, src_basis, tgt_eq, tgt_basis, T, R, order, L0, limit_eq)


def limit_equation(spec, pick=None):
    """The limit equation of the rescaled family (as a residual-form equation)."""
    return instantiate(spec, pick).limit_eq


def check_limit_equation(spec, d=DEFAULT_DOMAIN, tol=None):
    """Limit equation against the catalog target, at every pick and branch."""
    if isinstance(spec, str):
        spec = get_spec(spec)
    reports = []
    for pick in spec.pick_values():
        inst = instantiate(spec, pick)
        for suffix, dom in _branch_domains(inst.target_eq, inst.target_basis, d):
            subject = "%s equation%s%s" % (spec.spec_id, " {%s}" % inst.tag if inst.tag else "", suffix)
            reports.append(same_equation(inst.limit_eq, inst.target_eq, dom, subject, tol))
    return aggregate("limit equation %s" % spec.spec_id, reports)


# -- weak convergence --------------------------------------------------------

@dataclass
class JetPoint:
    """Values of base coordinates, jets and opaque elements at one point."""

    values: dict

    def __getitem__(self, k):
        return self.values[k]

    def residual(self, e):
        return evaluate(e, self.values)


def base_point(eq, d=DEFAULT_DOMAIN, seed=0, names=()):
    """A point on the manifold of eq: u_t solved from the equation."""
    r = lhs_residual(eq)
    need = (r.free_symbols | set(names) | {"t", "x", "u", "u_x", "u_xx"}) - {"u_t"}
    pts = d.with_(seed=seed).sample(need, 1)
    vals = {k: float(v[0]) for k, v in pts.items()}
    vals["u_t"] = evaluate(evolution_rhs(eq), vals)
    return JetPoint(vals)


def _rates(devs, lams, spec):
    out = []
    for a, b, la, lb in zip(devs, devs[1:], lams, lams[1:]):
        if a <= 0 or b <= 0:
            out.append(float("nan"))
            continue
        out.append(math.log(a / b) / math.log(spec.small(la) / spec.small(lb)))
    return out


def _predicted_order(exprs, spec, point, upto):
    """First exponent beyond 0 whose coefficient is nonzero at the point."""
    best = None
    for e in exprs:
        ser = series(e, spec.parameter, spec.at, upto)
        for k, c in ser.terms:
            if k <= 0:
                continue
            try:
                val = evaluate(c, point)
            except (SingularEvaluation, KeyError):
                continue
            if abs(val) > 1e-12:
                best = k if best is None else min(best, k)
                break
    return best


def check_weak_convergence(spec, point=None, sequence=None, pick=None, target=None,
                           d=DEFAULT_DOMAIN, rate_window=(0.8, 1.2)):
    """Residual and first partials of the rescaled family at a point of the target manifold.

    ``target`` overrides the comparison equation (a deliberately wrong one
    gives a deviation bounded away from zero).
    """
    inst = instantiate(spec, pick) if not isinstance(spec, ContractionInstance) else spec
    spec = inst.spec
    tgt = target if target is not None else inst.target_eq
    N = inst.normalized()
    lam = spec.parameter
    point = point or base_point(tgt, d, names=N.free_symbols - {lam})
    vals = dict(point.values)
    R_tgt = lhs_residual(tgt)
    k_expr = proportionality_factor(inst.limit_residual, R_tgt)
    k = evaluate(k_expr, vals) if k_expr.free_symbols else float(k_expr.value)
    on_manifold = abs(evaluate(R_tgt, vals))
    if on_manifold > 1e-9:
        raise ValueError("base point is not on the target manifold (residual %.3e)" % on_manifold)
    parts = [(None, N, mul(k, R_tgt))] + [(j, diff(N, j), mul(k, diff(R_tgt, j))) for j in JET_COORDS]
    lams = tuple(sequence or spec.sequence())
    devs, jac = [], []
    for lv in lams:
        at = dict(vals, **{lam: lv})
        worst = 0.0
        for _, e, ref in parts:
            try:
                got = evaluate(e, at)
            except SingularEvaluation as exc:
                raise SingularEvaluation("%s at %s=%g: %s" % (spec.spec_id, lam, lv, exc))
            want = evaluate(ref, vals)
            worst = max(worst, abs(got - want) / (1 + abs(want)))
        devs.append(worst)
        jac.append(abs(evaluate(diff(N, "u_xx"), at)))
    jac_limit = abs(evaluate(diff(inst.limit_residual, "u_xx"), vals))
    tag = " {%s}" % inst.tag if inst.tag else ""
    subject = "%s weak convergence%s" % (spec.spec_id, tag)
    if max(devs) <= 1e-12:
        status, notes = "pass", "family is constant along the sequence"
    else:
        rates = _rates(devs, lams, spec)
        order = _predicted_order([p[1] for p in parts], spec, dict(vals), upto=inst.order * 0 + 3)
        lo, hi = rate_window
        ok_rate = order is not None and lo * float(order) <= rates[-1] <= hi * float(order)
        ok_dec = all(b < a for a, b in zip(devs, devs[1:]))
        status = "pass" if ok_rate and ok_dec else "fail"
        notes = "deviations %s; empirical order %s; predicted order %s" % (
            ", ".join("%.3e" % v for v in devs), ", ".join("%.3f" % r for r in rates), order)
    if min(jac + [jac_limit]) < 1e-8:
        status = "fail"
        notes += "; Jacobian in u_xx degenerates"
    rep = VerificationReport(subject, status, max(devs), len(lams), None if status == "pass" else vals, notes)
    rep.details = [VerificationReport("%s=%g" % (lam, lv), "pass", dv, 1) for lv, dv in zip(lams, devs)]
    return rep


# -- operators ---------------------------------------------------------------

def recipe_coefficients(text, n, pick=None):
    """Coefficients of Q1..Qn in a linear recipe."""
    e = _expr(text, pick or {})
    names = ["Q%d" % (i + 1) for i in range(n)]
    extra = {s for s in e.free_symbols if s.startswith("Q") and s not in names}
    if extra:
        raise DegenerateRecipe("recipe refers to unknown operators %s" % ", ".join(sorted(extra)))
    coeffs = [expand(diff(e, q)) for q in names]
    for c in coeffs:
        if any(q in c.free_symbols for q in names):
            raise DegenerateRecipe("recipe %r is not linear in the operators" % text)
    rest = expand(add(e, *(mul(-1, c, Sym(q)) for c, q in zip(coeffs, names))))
    if rest != ZERO:
        raise DegenerateRecipe("recipe %r has a term without an operator" % text)
    return coeffs


def combine(inst, text):
    """The recipe combination as a field in the new variables."""
    pulled = [pull_field(inst.transform, Q, dict(inst.source_eq.functions)) for Q in inst.source_basis]
    coeffs = recipe_coefficients(text, len(pulled), inst.pick)
    if all(c == ZERO for c in coeffs):
        raise DegenerateRecipe("recipe %r is the zero combination" % text)
    F = VectorField(ZERO, ZERO, ZERO)
    for c, Q in zip(coeffs, pulled):
        if c != ZERO:
            F = F + Q.scale(c)
    return F


def field_limit(F, spec):
    cs = []
    for c in F.coefficients:
        try:
            cs.append(limit(c, spec.parameter, spec.at))
        except NoRegisteredLimit as exc:
            raise DegenerateRecipe("operator coefficient %s: %s" % (c, exc))
    return VectorField(*cs, dep=F.dep)


def _field_values(F, pts, pr=None):
    pr = pr or prolong2(F)
    exprs = list(F.coefficients) + [pr["eta_t"], pr["eta_x"], pr["eta_xx"]]
    out = []
    for e in exprs:
        e = expand(e)
        if e.free_symbols:
            out.append(eval_terms(e, pts).sum(axis=0))
        else:
            out.append(np.full(len(next(iter(pts.values()))), float(e.value)))
    return np.array(out)


def contract_operator(spec, index, sequence=None, pick=None, d=DEFAULT_DOMAIN, tol=None,
                      rate_window=(0.8, 1.2), recipe=None):
    """Check one recipe entry: limit, convergence of the prolonged field, invariance."""
    inst = instantiate(spec, pick) if not isinstance(spec, ContractionInstance) else spec
    spec = inst.spec
    text = recipe or spec.recipe[index - 1]
    tag = " {%s}" % inst.tag if inst.tag else ""
    subject = "%s operator %d%s" % (spec.spec_id, index, tag)
    F = combine(inst, text)
    lim = field_limit(F, spec)
    target = inst.target_basis[index - 1]
    reports = []
    dom = d
    zts = [is_zero(add(a, mul(-1, b)), dom, tol) for a, b in zip(lim.coefficients, target.coefficients)]
    worst = max(z.max_residual for z in zts)
    ok = all(zts)
    reports.append(VerificationReport("limit equals target Q%d" % index, "pass" if ok else "fail", worst,
                                      sum(z.samples for z in zts),
                                      next((z.witness for z in zts if not z.zero), None),
                                      "limit %s" % lim))
    # convergence of coefficients and prolongation coefficients
    prF = prolong2(F)
    names = set()
    for e in list(F.coefficients) + list(prF.values()) + list(target.coefficients):
        names |= e.free_symbols
    names.discard(spec.parameter)
    names |= {"t", "x", "u"}
    pts = d.with_(seed=7).sample(names, 5)
    want = _field_values(target, pts)
    lams = tuple(sequence or spec.sequence())
    devs = []
    for lv in lams:
        at = dict(pts, **{spec.parameter: np.full(5, lv)})
        got = _field_values(F, at, prF)
        devs.append(float(np.max(np.abs(got - want) / (1 + np.abs(want)))))
    if max(devs) <= 1e-12:
        conv = VerificationReport("convergence", "pass", max(devs), len(lams), None,
                                  "combination is constant along the sequence")
    else:
        rates = _rates(devs, lams, spec)
        point = {k: float(v[0]) for k, v in pts.items()}
        order = _predicted_order(list(F.coefficients), spec, point, upto=3)
        lo, hi = rate_window
        ok_rate = order is not None and lo * float(order) <= rates[-1] <= hi * float(order)
        conv = VerificationReport(
            "convergence", "pass" if ok_rate and devs[-1] < devs[0] else "fail", max(devs), len(lams), None,
            "deviations %s; empirical order %s; predicted order %s" % (
                ", ".join("%.3e" % v for v in devs), ", ".join("%.3f" % r for r in rates), order))
    reports.append(conv)
    doms = _branch_domains(inst.target_eq, (lim,), d)
    for suffix, dm in doms:
        reports.append(check_symmetry(inst.limit_eq, lim, dm, "limit operator is a symmetry of the limit equation%s" % suffix, tol))
    return aggregate(subject, reports, "recipe %s" % text)


def check_recipe_errata(spec, d=DEFAULT_DOMAIN):
    """Printed recipe entries must fail (their limit diverges or misses the target)."""
    if isinstance(spec, str):
        spec = get_spec(spec)
    reports = []
    for pick in spec.pick_values():
        inst = instantiate(spec, pick)
        for index, printed, note in spec.errata:
            try:
                rep = contract_operator(inst, index, d=d, recipe=printed)
            except DegenerateRecipe as exc:
                rep = VerificationReport("%s printed operator %d {%s}" % (spec.spec_id, index, inst.tag),
                                         "fail", float("inf"), 0, None, str(exc))
            reports.append(rep)
    return aggregate("printed recipes of %s" % spec.spec_id, reports)


def check_parameter_derivative(spec, pick=None, step=1e-4, tol=1e-6, d=DEFAULT_DOMAIN):
    """Finite-difference check of a combination at a finite limit point.

    The ``corollary`` entry names a combination C(lam) of source operators,
    its expected value at lam0 (source operators) and its expected derivative
    in lam at lam0 (target operators T1, T2, ...).
    """
    inst = instantiate(spec, pick) if not isinstance(spec, ContractionInstance) else spec
    spec = inst.spec
    if not spec.finite or not spec.corollary:
        raise ValueError("spec %s has no finite-limit corollary data" % spec.spec_id)
    cor = dict(spec.corollary)
    lam, lam0 = spec.parameter, float(Fraction(spec.at))
    C = combine(inst, cor["combination"])
    V = combine(inst, cor["value"])
    Tsyms = {"T%d" % (i + 1): Q for i, Q in enumerate(inst.target_basis)}
    der_e = _expr(cor["derivative"], inst.pick)
    D = VectorField(ZERO, ZERO, ZERO)
    for name, Q in Tsyms.items():
        c = expand(diff(der_e, name))
        if c != ZERO:
            D = D + Q.scale(c)
    names = set().union(*(c.free_symbols for c in C.coefficients + V.coefficients + D.coefficients))
    names.discard(lam)
    names |= {"t", "x", "u"}
    pts = d.with_(seed=11).sample(names, 8)
    n = 8
    at = lambda v: dict(pts, **{lam: np.full(n, v)})
    val = lambda F, P: np.array([eval_terms(c, P).sum(axis=0) if c.free_symbols else np.full(n, float(c.value))
                                 for c in F.coefficients])
    c_plus, c_minus, c0 = val(C, at(lam0 + step)), val(C, at(lam0 - step)), val(C, at(lam0))
    fd = (c_plus - c_minus) / (2 * step)
    want_d = val(D, at(lam0))
    want_v = val(V, at(lam0))
    dev_d = float(np.max(np.abs(fd - want_d)))
    dev_v = float(np.max(np.abs(c0 - want_v)))
    tag = " {%s}" % inst.tag if inst.tag else ""
    reps = [
        VerificationReport("value at %s=%s equals %s" % (lam, spec.at, cor["value"]),
                           "pass" if dev_v <= tol else "fail", dev_v, n),
        VerificationReport("d/d%s (step %g) equals %s" % (lam, step, cor["derivative"]),
                           "pass" if dev_d <= tol else "fail", dev_d, n),
    ]
    der_field = D
    for suffix, dm in _branch_domains(inst.target_eq, (der_field,), d):
        reps.append(check_symmetry(inst.target_eq, der_field, dm, "derivative is a symmetry of the target%s" % suffix))
    return aggregate("%s parameter derivative of %s%s" % (spec.spec_id, cor["combination"], tag), reps)


def verify_contraction(spec, d=DEFAULT_DOMAIN, tol=None):
    """Equation limit, weak convergence and every recipe entry, at every pick."""
    if isinstance(spec, str):
        spec = get_spec(spec)
    reports = [check_limit_equation(spec, d, tol)]
    for pick in spec.pick_values():
        inst = instantiate(spec, pick)
        reports.append(check_weak_convergence(inst, d=d))
        for i in range(1, len(spec.recipe) + 1):
            reports.append(contract_operator(inst, i, d=d, tol=tol))
        if spec.corollary:
            reports.append(check_parameter_derivative(inst, d=d))
    if spec.errata:
        printed = check_recipe_errata(spec, d)
        ok = printed.status == "fail"
        reports.append(VerificationReport("printed recipe entries fail", "pass" if ok else "fail",
                                          0.0, printed.samples, None, printed.details[0].notes if printed.details else ""))
    return aggregate("contraction %s" % spec.spec_id, reports, spec.note)


# -- registry ----------------------------------------------------------------

_BUILTIN = "contractions.yaml"


@lru_cache(maxsize=None)
def _builtin_specs():
    from .. import catalog
    text = resources.files(catalog.__name__).joinpath(_BUILTIN).read_text()
    return tuple(ContractionSpec.from_record(r) for r in yaml.safe_load(text)["contractions"])


_extra = {}


def register_specs(records):
    for r in records:
        s = ContractionSpec.from_record(r)
        _extra[s.spec_id] = s


register_section("contractions", register_specs)


def all_specs():
    seen = {s.spec_id: s for s in _builtin_specs()}
    seen.update(_extra)
    return list(seen.values())


def get_spec(spec_id):
    for s in all_specs():
        if s.spec_id == spec_id:
            return s
    raise UnknownContraction("no contraction spec %r" % spec_id)
