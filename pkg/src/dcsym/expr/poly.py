"""Coefficient extraction for expressions polynomial in one symbol."""

from .calculus import depends_on
from .expand import expand
from .nodes import ZERO, Add, Mul, Num, Pow, Sym, add, mul


class NotPolynomial(ValueError):
    pass


def _degree_in(f, s):
    """Degree of a single factor in s, or None when f does not contain s."""
    if s not in f.free_symbols:
        return None
    if isinstance(f, Sym):
        return 1
    if isinstance(f, Pow) and isinstance(f.base, Sym) and f.base.name == s and isinstance(f.exp, Num):
        q = f.exp.value
        if q.denominator == 1 and q >= 0:
            return int(q)
    raise NotPolynomial("non-polynomial dependence on %s: %s" % (s, f))


def collect_poly(e, s):
    """Map degree -> coefficient for e as a polynomial in s."""
    s = s.name if isinstance(s, Sym) else s
    e = expand(e)
    buckets = {}
    terms = e.terms if isinstance(e, Add) else (e,)
    for t in terms:
        if t == ZERO:
            continue
        factors = t.factors if isinstance(t, Mul) else (t,)
        deg = 0
        rest = []
        for f in factors:
            k = _degree_in(f, s)
            if k is None:
                rest.append(f)
            else:
                deg += k
        buckets.setdefault(deg, []).append(mul(*rest) if rest else Num(1))
    out = {}
    for k in sorted(buckets):
        c = add(*buckets[k])
        if c != ZERO:
            out[k] = c
    return out


def reassemble(coeffs, s):
    s = Sym(s) if isinstance(s, str) else s
    return expand(add(*(mul(c, s ** k) for k, c in coeffs.items())))


__all__ = ["collect_poly", "reassemble", "NotPolynomial", "depends_on"]
