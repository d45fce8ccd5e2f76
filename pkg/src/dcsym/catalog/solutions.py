"""Named equations and the exact-solution database."""

from dataclasses import dataclass
from functools import lru_cache
from importlib import resources

import yaml

from ..expr import Domain, parse
from ..pde import DCEquation, equation_from_residual, solution_residual
from ..report import aggregate

CONSTANT_CHOICES = ("-1", "1/2", "2")
_COORDS = {"t", "x"}


class UnknownEquation(KeyError):
    pass


class UnknownSolution(KeyError):
    pass


def _choices(raw):
    return {k: tuple(str(v) for v in vals) for k, vals in (raw or {}).items()}


@dataclass(frozen=True)
class NamedEquation:
    eq_id: str
    equation: DCEquation
    choices: tuple = ()
    printed: DCEquation = None

    @classmethod
    def from_record(cls, rec):
        dep = rec.get("dep", "u")
        if "residual" in rec:
            eq = equation_from_residual(rec["residual"], dep=dep, name=rec["id"])
        else:
            els = {k: str(rec.get(k, d)) for k, d in (("f", "1"), ("g", "1"), ("h", "1"), ("A", "1"), ("B", "0"))}
            gauge = rec.get("gauge", "g=1" if els["g"] == "1" else "free")
            eq = DCEquation(dep=dep, gauge=gauge, name=rec["id"], **{k: parse(v) for k, v in els.items()})
        printed = None
        if "printed_residual" in rec:
            printed = equation_from_residual(rec["printed_residual"], dep=dep, name=rec["id"] + " (printed)")
        return cls(rec["id"], eq, tuple(sorted(_choices(rec.get("choices")).items())), printed)


@dataclass(frozen=True)
class ExactSolution:
    sol_id: str
    equation: str
    expr: object
    constants: tuple = ()
    printed: object = None
    note: str = ""
    image_of: str = None
    image_expr: object = None
    intervals: tuple = ()

    @classmethod
    def from_record(cls, rec):
        opt = lambda k: parse(str(rec[k])) if k in rec else None
        return cls(rec["id"], rec["equation"], parse(str(rec["expr"])),
                   tuple(sorted(_choices(rec.get("constants")).items())), opt("printed"),
                   rec.get("note", ""), rec.get("image_of"), opt("image_expr"),
                   tuple(sorted((k, tuple(v)) for k, v in (rec.get("intervals") or {}).items())))

    def domain(self, base=None):
        """Sampling domain: equation parameters and free constants get finite choices."""
        ne = named_equation(self.equation)
        choices = dict(ne.choices)
        params = {k for k, _ in ne.choices}
        for name in self.expr.free_symbols - _COORDS - params:
            choices.setdefault(name, CONSTANT_CHOICES)
        choices.update(dict(self.constants))
        base = base or Domain()
        return base.with_(choices=choices, intervals=dict(self.intervals))


_store = {"equations": {}, "solutions": {}}


def _resource(name):
    return yaml.safe_load(resources.files(__package__).joinpath(name).read_text())


@lru_cache(maxsize=None)
def _builtin():
    eqs = {r["id"]: NamedEquation.from_record(r) for r in _resource("equations.yaml")["equations"]}
    sols = {r["id"]: ExactSolution.from_record(r) for r in _resource("solutions.yaml")["solutions"]}
    return eqs, sols


def register_equations(records):
    for r in records:
        ne = NamedEquation.from_record(r)
        _store["equations"][ne.eq_id] = ne


def register_solutions(records):
    for r in records:
        s = ExactSolution.from_record(r)
        named_equation(s.equation)
        _store["solutions"][s.sol_id] = s


def named_equation(eq_id):
    eqs = dict(_builtin()[0])
    eqs.update(_store["equations"])
    if eq_id not in eqs:
        raise UnknownEquation("no named equation %r" % eq_id)
    return eqs[eq_id]


def get_equation(eq_id):
    return named_equation(eq_id).equation


def all_equations():
    eqs = dict(_builtin()[0])
    eqs.update(_store["equations"])
    return list(eqs.values())


def all_solutions():
    sols = dict(_builtin()[1])
    sols.update(_store["solutions"])
    return list(sols.values())


def get_solution(sol_id):
    for s in all_solutions():
        if s.sol_id == sol_id:
            return s
    raise UnknownSolution("no solution %r" % sol_id)


def verify_solution(sol, d=None, tol=None, printed=False):
    """solution_residual for a database entry (or its printed transcription)."""
    if isinstance(sol, str):
        sol = get_solution(sol)
    expr = sol.printed if printed else sol.expr
    if expr is None:
        raise ValueError("solution %s has no separate printed form" % sol.sol_id)
    eq = get_equation(sol.equation)
    subject = "%s%s on %s" % (sol.sol_id, " (printed)" if printed else "", sol.equation)
    return solution_residual(eq, expr, sol.domain(d), subject, tol)


def verify_database(d=None, tol=None, ids=None):
    sols = [s for s in all_solutions() if ids is None or s.sol_id in ids]
    reports = [verify_solution(s, d, tol) for s in sols]
    return aggregate("solution database", reports, "%d solutions" % len(reports))
