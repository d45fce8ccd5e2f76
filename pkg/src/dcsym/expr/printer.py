"""Render expressions in the input grammar so that parse(print(e)) == e."""

from fractions import Fraction

from .nodes import Add, Fn, Mul, Num, Pow, Sym, split_term

# binding strength of the printed form
_ATOM, _POW, _MUL, _ADD = 4, 3, 2, 1


def _num(q):
    if q.denominator == 1:
        return str(q.numerator)
    return "%d/%d" % (q.numerator, q.denominator)


def _wrap(s, inner, outer):
    return "(" + s + ")" if inner < outer else s


def _render(e):
    """Return (text, binding strength)."""
    if isinstance(e, Num):
        q = e.value
        if q < 0:
            return "-" + _num(-q), _ADD
        # a ratio literal is one token, so it binds like an atom
        return _num(q), _ATOM
    if isinstance(e, Sym):
        return e.name, _ATOM
    if isinstance(e, Fn):
        return "%s(%s)" % (e.name, _render(e.arg)[0]), _ATOM
    if isinstance(e, Pow):
        bs, bp = _render(e.base)
        if isinstance(e.base, Num) and e.base.value.denominator != 1:
            bp = _ADD
        ex = e.exp
        if isinstance(ex, Num) and ex.value >= 0 and ex.value.denominator == 1:
            es = _num(ex.value)
        else:
            es = "(" + _render(ex)[0] + ")"
        return _wrap(bs, bp, _ATOM) + "^" + es, _POW
    if isinstance(e, Mul):
        c, body = e.split_coeff()
        parts = []
        factors = body.factors if isinstance(body, Mul) else (body,)
        for f in factors:
            s, p = _render(f)
            parts.append(_wrap(s, p, _POW))
        text = "*".join(parts)
        if c == 1:
            return text, _MUL
        if c == -1:
            return "-" + text, _ADD
        if c < 0:
            return "-" + _num(-c) + "*" + text, _ADD
        return _num(c) + "*" + text, _MUL
    if isinstance(e, Add):
        out = []
        for i, t in enumerate(e.terms):
            c, body = split_term(t)
            if i == 0:
                out.append(_render(t)[0])
                continue
            if c < 0:
                out.append(" - " + _render(_negate(t))[0])
            else:
                out.append(" + " + _render(t)[0])
        return "".join(out), _ADD
    raise TypeError(type(e))


def _negate(t):
    from .nodes import neg
    return neg(t)


def to_string(e):
    return _render(e)[0]


def fraction_str(q):
    return _num(Fraction(q))
