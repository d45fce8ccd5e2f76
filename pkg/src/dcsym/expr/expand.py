"""Normal form: distribute products over sums and expand integer powers.

The result is a sum of monomials with rational coefficients over power
products of symbols, kernel applications and non-expandable powers of sums
(negative or fractional exponents).
"""

from functools import lru_cache

from .nodes import (
    ONE, ZERO, Add, Fn, Mul, Num, Pow, Sym, add, fn, mul, power,
)


def _is_poly_pow(e):
    return (isinstance(e, Pow) and isinstance(e.base, Add) and isinstance(e.exp, Num)
            and e.exp.value.denominator == 1 and e.exp.value > 0)


def _needs_expand(e):
    if isinstance(e, Add) or _is_poly_pow(e):
        return True
    if isinstance(e, Mul):
        return any(isinstance(f, Add) or _is_poly_pow(f) for f in e.factors)
    return False


def _terms(e):
    return e.terms if isinstance(e, Add) else (e,)


def _distribute(a_terms, b_terms):
    out = []
    for a in a_terms:
        for b in b_terms:
            m = mul(a, b)
            if _needs_expand(m):
                out.extend(_terms(expand(m)))
            else:
                out.append(m)
    return out


@lru_cache(maxsize=200000)
def expand(e):
    if isinstance(e, (Num, Sym)):
        return e
    if isinstance(e, Fn):
        return fn(e.name, expand(e.arg))
    if isinstance(e, Add):
        return add(*(expand(t) for t in e.terms))
    if isinstance(e, Pow):
        b = expand(e.base)
        x = expand(e.exp)
        if isinstance(b, Add) and isinstance(x, Num) and x.value.denominator == 1 and x.value > 1:
            return _expand_int_power(b, int(x.value))
        p = power(b, x)
        if p != e and _needs_expand(p):
            return expand(p)
        return p
    if isinstance(e, Mul):
        parts = [expand(f) for f in e.factors]
        prod = mul(*parts)
        if not _needs_expand(prod):
            return prod
        if not isinstance(prod, Mul):
            return expand(prod) if prod != e else prod
        plain = []
        sums = []
        for f in prod.factors:
            if isinstance(f, Add):
                sums.append(f.terms)
            elif _is_poly_pow(f):
                sums.append(_terms(_expand_int_power(f.base, int(f.exp.value))))
            else:
                plain.append(f)
        acc = [mul(*plain)] if plain else [ONE]
        for s in sums:
            acc = _distribute(acc, s)
        return add(*acc)
    raise TypeError(type(e))


def _expand_int_power(b, n):
    result = [ONE]
    cur = list(b.terms)
    k = n
    # binary exponentiation on term lists
    while k:
        if k & 1:
            result = _terms(add(*_distribute(result, cur)))
        k >>= 1
        if k:
            cur = _terms(add(*_distribute(cur, cur)))
    return add(*result)


normalize = expand


def together(e):
    """Clear negative integer powers of sums.

    Returns (numerator, factor) where numerator = expand(e * factor) and the
    factor is a product of positive powers of the sums that appeared with
    negative exponents.
    """
    e = expand(e)
    need = {}
    for t in _terms(e):
        fs = t.factors if isinstance(t, Mul) else (t,)
        for f in fs:
            if (isinstance(f, Pow) and isinstance(f.base, Add) and isinstance(f.exp, Num)
                    and f.exp.value < 0 and f.exp.value.denominator == 1):
                k = -f.exp.value
                if need.get(f.base, 0) < k:
                    need[f.base] = k
    if not need:
        return e, ONE
    factor = mul(*(power(b, Num(k)) for b, k in need.items()))
    return expand(mul(e, factor)), factor


def terms_of(e):
    """Top-level monomials of the normal form."""
    e = expand(e)
    if e == ZERO:
        return ()
    return _terms(e)
