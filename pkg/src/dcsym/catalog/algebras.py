"""Catalogued Lie algebra realizations: brackets, Jacobi identity, invariance."""

from dataclasses import dataclass
from functools import lru_cache
from importlib import resources

import yaml

from ..expr import DEFAULT_DOMAIN, parse
from ..lie import AlgebraSpec, VectorField, check_algebra, check_jacobi, check_symmetry
from ..report import aggregate
from .solutions import named_equation


class UnknownAlgebra(KeyError):
    pass


@dataclass(frozen=True)
class AlgebraRecord:
    alg_id: str
    equation: str
    basis: tuple
    brackets: tuple

    @classmethod
    def from_record(cls, rec):
        br = []
        for pair, terms in (rec.get("brackets") or {}).items():
            i, j = (int(s) for s in str(pair).split(","))
            for k, c in terms.items():
                br.append(((i, j, int(k)), str(c)))
        return cls(str(rec["id"]), rec["equation"], tuple(tuple(str(c) for c in q) for q in rec["basis"]),
                   tuple(br))

    def fields(self):
        dep = named_equation(self.equation).equation.dep
        return tuple(VectorField(*(parse(c) for c in q), dep=dep, label="Q%d" % (n + 1))
                     for n, q in enumerate(self.basis))

    def spec(self):
        consts = {(i - 1, j - 1, k - 1): parse(c) for (i, j, k), c in self.brackets}
        return AlgebraSpec(self.fields(), consts, self.alg_id)


@lru_cache(maxsize=None)
def _builtin():
    text = resources.files(__package__).joinpath("algebras.yaml").read_text()
    return {str(r["id"]): AlgebraRecord.from_record(r) for r in yaml.safe_load(text)["algebras"]}


_extra = {}


def register_algebras(records):
    for r in records:
        a = AlgebraRecord.from_record(r)
        _extra[a.alg_id] = a


def all_algebras():
    out = dict(_builtin())
    out.update(_extra)
    return list(out.values())


def get_algebra(alg_id):
    for a in all_algebras():
        if a.alg_id == alg_id:
            return a
    raise UnknownAlgebra("no algebra %r" % alg_id)


def verify_algebra(alg, d=DEFAULT_DOMAIN, tol=None):
    """Brackets, Jacobi identity, and invariance of the equation under each operator."""
    if isinstance(alg, str):
        alg = get_algebra(alg)
    ne = named_equation(alg.equation)
    dom = d.with_(choices=dict(ne.choices)) if ne.choices else d
    basis = alg.fields()
    reports = [check_algebra(alg.spec(), dom, tol), check_jacobi(basis, dom, tol)]
    reports += [check_symmetry(ne.equation, Q, dom, "%s %s" % (alg.alg_id, Q.label), tol) for Q in basis]
    return aggregate("algebra %s on %s" % (alg.alg_id, alg.equation), reports)
