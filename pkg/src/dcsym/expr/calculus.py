"""Partial and total derivatives, substitution, and jet naming.

Jet coordinates follow the underscore-suffix convention: ``u_x``, ``u_tx``,
``f_xx``, ``xi_xu``.  Derivative letters are kept in the declared argument
order of the function (t before x before u), so mixed partials have one name.

Opaque functions (the arbitrary elements f(x), A(u), xi(t,x,u), ...) are
described by a mapping ``base name -> argument letters``.  A symbol whose base
is declared there depends on those arguments; differentiating it appends a
letter to its suffix.
"""

from functools import lru_cache

from .expand import expand
from .nodes import (
    HALF, MINUS_ONE, ONE, ZERO, Add, Fn, Mul, Num, Pow, Sym, add, fn, mul, power,
)


class OrderOverflow(KeyError):
    """A dependent jet was met that the jet table does not extend."""


def split_jet(name):
    """'u_tx' -> ('u', 'tx'); 'u' -> ('u', '')."""
    if "_" in name:
        base, suffix = name.split("_", 1)
        return base, suffix
    return name, ""


def jet_name(base, suffix):
    return base if not suffix else base + "_" + suffix


def freeze_functions(functions):
    """Hashable form of an opaque-function declaration."""
    if not functions:
        return ()
    if isinstance(functions, tuple):
        return functions
    return tuple(sorted((k, tuple(v)) for k, v in functions.items()))


def _opaque_derivative(name, s, functions):
    base, suffix = split_jet(name)
    for fbase, fargs in functions:
        if fbase == base:
            if s not in fargs or any(ch not in fargs for ch in suffix):
                return None
            letters = sorted(suffix + s, key=fargs.index)
            return Sym(jet_name(base, "".join(letters)))
    return None


def depends_on(e, s, functions=()):
    if s in e.free_symbols:
        return True
    if not functions:
        return False
    for name in e.free_symbols:
        if _opaque_derivative(name, s, functions) is not None:
            return True
    return False


@lru_cache(maxsize=200000)
def _d(e, s, functions):
    if isinstance(e, Num):
        return ZERO
    if isinstance(e, Sym):
        if e.name == s:
            return ONE
        if functions:
            d = _opaque_derivative(e.name, s, functions)
            if d is not None:
                return d
        return ZERO
    if not depends_on(e, s, functions):
        return ZERO
    if isinstance(e, Add):
        return add(*(_d(t, s, functions) for t in e.terms))
    if isinstance(e, Mul):
        fs = e.factors
        out = []
        for i, f in enumerate(fs):
            df = _d(f, s, functions)
            if df == ZERO:
                continue
            out.append(mul(*(fs[:i] + (df,) + fs[i + 1:])))
        return add(*out)
    if isinstance(e, Pow):
        b, x = e.base, e.exp
        db = _d(b, s, functions)
        dx = _d(x, s, functions)
        if dx == ZERO:
            return mul(x, power(b, add(x, MINUS_ONE)), db)
        if db == ZERO:
            return mul(e, fn("ln", b), dx)
        return mul(e, add(mul(dx, fn("ln", b)), mul(x, db, power(b, MINUS_ONE))))
    if isinstance(e, Fn):
        a = e.arg
        da = _d(a, s, functions)
        if da == ZERO:
            return ZERO
        n = e.name
        if n == "exp":
            outer = e
        elif n == "ln":
            outer = power(a, MINUS_ONE)
        elif n == "abs":
            outer = fn("sign", a)
        elif n == "sign":
            return ZERO
        elif n == "sin":
            outer = fn("cos", a)
        elif n == "cos":
            outer = mul(MINUS_ONE, fn("sin", a))
        elif n == "tan":
            outer = add(ONE, power(e, Num(2)))
        elif n == "sinh":
            outer = fn("cosh", a)
        elif n == "cosh":
            outer = fn("sinh", a)
        elif n == "arctan":
            outer = power(add(ONE, power(a, Num(2))), MINUS_ONE)
        else:
            raise ValueError("no derivative rule for %s" % n)
        return mul(outer, da)
    raise TypeError(type(e))


def _sname(s):
    return s.name if isinstance(s, Sym) else s


def diff(e, s, functions=None):
    """Partial derivative in normal form.  Jet coordinates are independent."""
    return expand(_d(e, _sname(s), freeze_functions(functions)))


def total_diff(e, indep, jet_table, functions=None, dependent=None):
    """Total derivative D_indep.

    ``jet_table`` maps each dependent jet name to its derivative (a name or an
    Expr).  ``dependent`` lists dependent-variable bases; any of their jets in
    ``e`` without a table entry raises OrderOverflow.  When omitted, the bases
    of the table keys are used.
    """
    indep = _sname(indep)
    fz = freeze_functions(functions)
    table = {(_sname(k)): (Sym(v) if isinstance(v, str) else v) for k, v in jet_table.items()}
    if dependent is None:
        dependent = {split_jet(k)[0] for k in table}
    for name in e.free_symbols:
        if name not in table and split_jet(name)[0] in dependent and not _is_opaque(name, fz):
            raise OrderOverflow(name)
    parts = [_d(e, indep, fz)]
    # opaque functions of a dependent variable (A(u)) are reached through
    # the chain rule over u, so test dependence rather than free symbols
    for name, nxt in table.items():
        if depends_on(e, name, fz):
            parts.append(mul(_d(e, name, fz), nxt))
    return expand(add(*parts))


def _is_opaque(name, functions):
    base = split_jet(name)[0]
    return any(fb == base for fb, _ in functions)


@lru_cache(maxsize=100000)
def _subs(e, bind):
    if isinstance(e, Sym):
        for k, v in bind:
            if k == e.name:
                return v
        return e
    if isinstance(e, Num):
        return e
    names = e.free_symbols
    if not any(k in names for k, _ in bind):
        return e
    if isinstance(e, Add):
        return add(*(_subs(t, bind) for t in e.terms))
    if isinstance(e, Mul):
        return mul(*(_subs(f, bind) for f in e.factors))
    if isinstance(e, Pow):
        return power(_subs(e.base, bind), _subs(e.exp, bind))
    if isinstance(e, Fn):
        return fn(e.name, _subs(e.arg, bind))
    raise TypeError(type(e))


def _bind_tuple(bindings):
    from .nodes import as_expr
    return tuple(sorted((_sname(k), as_expr(v)) for k, v in bindings.items()))


def substitute(e, bindings):
    """Simultaneous substitution followed by normalization."""
    if not bindings:
        return expand(e)
    return expand(_subs(e, _bind_tuple(bindings)))


def substitute_raw(e, bindings):
    """Simultaneous substitution without expanding the result."""
    if not bindings:
        return e
    return _subs(e, _bind_tuple(bindings))


def replace_nodes(e, rule):
    """Bottom-up rewrite: ``rule(node)`` returns a replacement or None."""
    cache = {}

    def go(x):
        if x in cache:
            return cache[x]
        if isinstance(x, (Num, Sym)):
            r = x
        elif isinstance(x, Add):
            r = add(*(go(t) for t in x.terms))
        elif isinstance(x, Mul):
            r = mul(*(go(f) for f in x.factors))
        elif isinstance(x, Pow):
            r = power(go(x.base), go(x.exp))
        else:
            r = fn(x.name, go(x.arg))
        new = rule(r)
        if new is not None:
            r = new
        cache[x] = r
        return r

    return go(e)


def jet_table(var, dep="u", order=4, indep=("t", "x")):
    """Table for D_var: every jet of ``dep`` of order < ``order`` -> next jet."""
    table = {}
    for total in range(order):
        for nt in range(total + 1):
            nx = total - nt
            cnt = {"t": nt, "x": nx}
            suffix = "".join(v * cnt[v] for v in indep)
            cnt[var] += 1
            nxt = "".join(v * cnt[v] for v in indep)
            table[jet_name(dep, suffix)] = jet_name(dep, nxt)
    return table


def jet(dep, suffix):
    return Sym(jet_name(dep, suffix))


def with_positive(e, names):
    """Rewrite using positivity of the named symbols (and of exp, abs).

    abs(s) -> s, sign(s) -> 1, exp(k*ln(s)) -> s^k, ln(s^k) -> k*ln(s),
    (a*b)^r -> a^r*b^r and (a^p)^r -> a^(p*r) for positive a, b.
    """
    names = frozenset(names)

    def positive(x):
        if isinstance(x, Num):
            return x.value > 0
        if isinstance(x, Sym):
            return x.name in names
        if isinstance(x, Fn):
            return x.name in ("exp", "cosh") or (x.name == "abs")
        if isinstance(x, Pow):
            return positive(x.base)
        if isinstance(x, Mul):
            return all(positive(f) for f in x.factors)
        if isinstance(x, Add):
            return all(positive(t) for t in x.terms)
        return False

    def rule(x):
        if isinstance(x, Fn):
            if x.name == "abs" and positive(x.arg):
                return x.arg
            if x.name == "sign" and positive(x.arg):
                return ONE
            if x.name == "ln":
                a = x.arg
                if isinstance(a, Pow) and positive(a.base):
                    return mul(a.exp, fn("ln", a.base))
                if isinstance(a, Mul) and all(positive(f) for f in a.factors):
                    return add(*(fn("ln", f) for f in a.factors))
            if x.name == "exp":
                a = x.arg
                terms = a.terms if isinstance(a, Add) else (a,)
                keep, out = [], []
                for t in terms:
                    c, body = (t.split_coeff() if isinstance(t, Mul) else (1, t))
                    if isinstance(body, Fn) and body.name == "ln" and positive(body.arg):
                        out.append(power(body.arg, Num(c)))
                    else:
                        keep.append(t)
                if out:
                    return mul(fn("exp", add(*keep)), *out)
        if isinstance(x, Pow):
            b = x.base
            if isinstance(b, Pow) and positive(b.base):
                return power(b.base, mul(b.exp, x.exp))
            if isinstance(b, Mul) and all(positive(f) for f in b.factors):
                return mul(*(power(f, x.exp) for f in b.factors))
        return None

    return expand(replace_nodes(expand(e), rule))


def with_signs(e, signs):
    """Specialize abs/sign of bare symbols on a branch: signs maps name -> +1/-1."""
    def rule(x):
        if isinstance(x, Fn) and x.name in ("abs", "sign") and isinstance(x.arg, Sym):
            s = signs.get(x.arg.name)
            if s is None:
                return None
            if x.name == "sign":
                return Num(s)
            return x.arg if s > 0 else mul(MINUS_ONE, x.arg)
        return None

    return expand(replace_nodes(e, rule))


__all__ = [
    "OrderOverflow", "diff", "total_diff", "substitute", "substitute_raw", "jet_table",
    "jet", "jet_name", "split_jet", "replace_nodes", "with_positive", "with_signs",
    "depends_on", "freeze_functions", "HALF",
]
