"""Group classification rows: instantiation and generator verification."""

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from importlib import resources

import yaml

from ..expr import DEFAULT_DOMAIN, Expr, Num, parse, substitute
from ..lie import VectorField, check_symmetry
from ..pde import DCEquation
from ..report import aggregate
from .constraints import ConstraintViolation, check_constraint, enforce


class UnknownCase(KeyError):
    pass


@dataclass(frozen=True)
class ClassificationCase:
    case_id: str
    table: int
    gauge: str
    elements: tuple
    generators: tuple
    params: tuple = ()
    constraints: tuple = ()
    picks: tuple = ()
    f_rule: str = None
    links: tuple = ()
    notes: str = ""
    errata: tuple = ()

    @classmethod
    def from_record(cls, rec):
        gens = tuple(tuple(str(c) for c in g) for g in rec["generators"])
        for g in gens:
            if len(g) != 3:
                raise ValueError("generator of case %s needs tau, xi, eta" % rec["id"])
        return cls(
            case_id=str(rec["id"]),
            table=int(rec["table"]),
            gauge=rec.get("gauge", "g=1"),
            elements=tuple((k, str(rec[k])) for k in ("f", "g", "h", "A", "B")),
            generators=gens,
            params=tuple(rec.get("params", ())),
            constraints=tuple(rec.get("constraints", ())),
            picks=tuple(tuple(sorted((k, str(v)) for k, v in p.items())) for p in rec.get("picks", ())),
            f_rule=rec.get("f_rule"),
            links=tuple(rec.get("links", ())),
            notes=rec.get("notes", ""),
            errata=tuple((int(e["generator"]), tuple(str(c) for c in e["printed"]), e.get("note", ""))
                         for e in rec.get("errata", ())),
        )

    def pick_values(self):
        """The stored generic picks as dicts of rationals (one empty pick if none)."""
        if not self.picks:
            return [{}]
        return [{k: Fraction(v) for k, v in p} for p in self.picks]

    def satisfies(self, values):
        known = {k: v for k, v in values.items() if k in self.params}
        out = []
        for c in self.constraints:
            try:
                out.append(check_constraint(c, known))
            except ConstraintViolation:
                continue  # parameter left symbolic
        return all(out)

    def instantiate(self, values=None):
        """Equation and basis at the given parameter values.

        Values may be rationals or expressions (for instance in a contraction
        parameter); constraints are enforced on the rational ones only.
        """
        values = {k: _param_value(v) for k, v in (values or {}).items()}
        unknown = set(values) - set(self.params)
        if unknown:
            raise ConstraintViolation("case %s has no parameter %s" % (self.case_id, ", ".join(sorted(unknown))))
        bound = {k: v for k, v in values.items() if isinstance(v, Fraction)}
        for c in self.constraints:
            names = {n for n in self.params if n in c}
            if names <= set(bound):
                enforce([c], bound, self.case_id)
        bind = {k: Num(v) if isinstance(v, Fraction) else v for k, v in values.items()}
        el = {k: substitute(parse(v), bind) for k, v in self.elements}
        rules = {}
        if self.f_rule:
            rules["f_x"] = substitute(parse(self.f_rule), bind)
        eq = DCEquation(el["f"], el["g"], el["h"], el["A"], el["B"], gauge=self.gauge,
                        rules=rules, name="case %s" % self.case_id)
        basis = tuple(
            VectorField(*(substitute(parse(c), bind) for c in g), label="Q%d" % (i + 1))
            for i, g in enumerate(self.generators))
        return eq, basis

    def printed_generators(self, values=None):
        """Generators in their printed (uncorrected) form, keyed by 1-based index."""
        bind = {k: Num(Fraction(v)) for k, v in (values or {}).items()}
        return {i: VectorField(*(substitute(parse(c), bind) for c in g), label="Q%d printed" % i)
                for i, g, _ in self.errata}


def _param_value(v):
    if isinstance(v, Expr):
        return v.value if isinstance(v, Num) else v
    try:
        return Fraction(v)
    except (ValueError, TypeError):
        e = parse(str(v))
        return e.value if isinstance(e, Num) else e


_BUILTIN = "cases.yaml"


@lru_cache(maxsize=None)
def _builtin_records():
    text = resources.files(__package__).joinpath(_BUILTIN).read_text()
    return tuple(ClassificationCase.from_record(r) for r in yaml.safe_load(text)["cases"])


_extra = {}


def register_cases(records):
    """Add cases from parsed external records (same schema as the built-in file)."""
    for r in records:
        c = ClassificationCase.from_record(r)
        _extra[c.case_id] = c


def all_cases():
    seen = {c.case_id: c for c in _builtin_records()}
    seen.update(_extra)
    return list(seen.values())


def case(case_id):
    for c in all_cases():
        if c.case_id == case_id:
            return c
    raise UnknownCase("no classification case %r" % case_id)


def get_case(case_id, values=None):
    """Instantiated (equation, generator basis) for a table row."""
    return case(case_id).instantiate(values)


def _branch_domains(eq, basis, d):
    """The default positive branch plus negative branches for abs() arguments."""
    text = " ".join(str(e) for e in (eq.f, eq.g, eq.h, eq.A, eq.B))
    text += " ".join(str(c) for Q in basis for c in Q.coefficients)
    out = [("", d)]
    if "abs(x)" in text:
        out.append((" [x<0]", d.with_(intervals={"x": (-2.0, -0.5)})))
    if "abs(u)" in text:
        out.append((" [u<0]", d.with_(intervals={"u": (-2.0, -0.5)})))
    return out


def verify_case(case_id, values=None, d=DEFAULT_DOMAIN, tol=None, branches=True):
    """Check every generator of the row; with values=None every stored pick is used."""
    c = case(case_id)
    picks = [values] if values is not None else c.pick_values()
    reports = []
    for pick in picks:
        eq, basis = c.instantiate(pick)
        tag = ", ".join("%s=%s" % kv for kv in sorted((pick or {}).items()))
        doms = _branch_domains(eq, basis, d) if branches else [("", d)]
        for Q in basis:
            for suffix, dom in doms:
                subject = "%s %s%s%s" % (case_id, Q.label, " {%s}" % tag if tag else "", suffix)
                reports.append(check_symmetry(eq, Q, dom, subject, tol))
    notes = "%d generators, %d picks" % (len(c.generators), len(picks))
    if c.errata:
        notes += "; corrected generator(s) %s" % ", ".join("Q%d" % i for i, _, _ in c.errata)
    return aggregate("case %s" % case_id, reports, notes)


def verify_printed_errata(case_id, d=DEFAULT_DOMAIN, tol=None):
    """Check the printed forms of corrected generators at every stored pick.

    A printed form that is genuinely wrong fails at some pick; the report lists
    each pick so the caller can see where the misprint matters.
    """
    c = case(case_id)
    reports = []
    for pick in c.pick_values():
        eq, _ = c.instantiate(pick)
        tag = ", ".join("%s=%s" % kv for kv in sorted(pick.items()))
        for i, Q in sorted(c.printed_generators(pick).items()):
            reports.append(check_symmetry(eq, Q, d, "%s Q%d printed {%s}" % (case_id, i, tag), tol))
    return aggregate("printed generators of %s" % case_id, reports)
