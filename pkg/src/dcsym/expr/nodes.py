"""Expression nodes and the canonicalizing constructors.

Every node is immutable.  The constructors ``add``, ``mul``, ``power`` and
``fn`` apply the cheap canonical rules (flattening, collecting like terms,
combining powers of equal bases, numeric folding).  Distribution of products
over sums lives in :mod:`dcsym.expr.expand`.
"""

from fractions import Fraction
from math import isqrt

KERNELS = ("exp", "ln", "abs", "sign", "sqrt", "sin", "cos", "tan", "sinh", "cosh", "arctan")

_ODD = {"sin", "tan", "sinh", "arctan"}
_EVEN = {"cos", "cosh"}
_AT_ZERO = {"sin": 0, "cos": 1, "tan": 0, "sinh": 0, "cosh": 1, "arctan": 0, "exp": 1}


class Expr:
    __slots__ = ("_key", "_hash", "_free", "_str")

    def _init(self):
        self._key = None
        self._hash = None
        self._free = None
        self._str = None

    @property
    def key(self):
        if self._key is None:
            self._key = self._make_key()
        return self._key

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self.key)
        return self._hash

    def __eq__(self, other):
        if self is other:
            return True
        if not isinstance(other, Expr):
            if isinstance(other, (int, Fraction)):
                return isinstance(self, Num) and self.value == other
            return NotImplemented
        return hash(self) == hash(other) and self.key == other.key

    def __ne__(self, other):
        r = self.__eq__(other)
        return r if r is NotImplemented else not r

    def __lt__(self, other):
        return self.key < other.key

    @property
    def free_symbols(self):
        if self._free is None:
            self._free = self._make_free()
        return self._free

    def _make_free(self):
        out = set()
        for a in self.args:
            out |= a.free_symbols
        return frozenset(out)

    @property
    def args(self):
        return ()

    def __str__(self):
        if self._str is None:
            from .printer import to_string
            self._str = to_string(self)
        return self._str

    def __repr__(self):
        return "Expr(%s)" % self

    def __add__(self, o):
        return add(self, as_expr(o))

    def __radd__(self, o):
        return add(as_expr(o), self)

    def __sub__(self, o):
        return add(self, neg(as_expr(o)))

    def __rsub__(self, o):
        return add(as_expr(o), neg(self))

    def __mul__(self, o):
        return mul(self, as_expr(o))

    def __rmul__(self, o):
        return mul(as_expr(o), self)

    def __truediv__(self, o):
        return mul(self, power(as_expr(o), MINUS_ONE))

    def __rtruediv__(self, o):
        return mul(as_expr(o), power(self, MINUS_ONE))

    def __pow__(self, o):
        return power(self, as_expr(o))

    def __rpow__(self, o):
        return power(as_expr(o), self)

    def __neg__(self):
        return neg(self)

    def __pos__(self):
        return self


class Num(Expr):
    __slots__ = ("value",)

    def __init__(self, value):
        self._init()
        self.value = Fraction(value)

    def _make_key(self):
        return (0, self.value)

    def _make_free(self):
        return frozenset()


class Sym(Expr):
    __slots__ = ("name",)

    def __init__(self, name):
        self._init()
        self.name = name

    def _make_key(self):
        return (1, self.name)

    def _make_free(self):
        return frozenset((self.name,))


class Fn(Expr):
    __slots__ = ("name", "arg")

    def __init__(self, name, arg):
        self._init()
        self.name = name
        self.arg = arg

    @property
    def args(self):
        return (self.arg,)

    def _make_key(self):
        return (2, self.name, self.arg.key)


class Pow(Expr):
    __slots__ = ("base", "exp")

    def __init__(self, base, exp):
        self._init()
        self.base = base
        self.exp = exp

    @property
    def args(self):
        return (self.base, self.exp)

    def _make_key(self):
        return (3, self.base.key, self.exp.key)


class Mul(Expr):
    """Product; an optional rational coefficient comes first."""

    __slots__ = ("factors",)

    def __init__(self, factors):
        self._init()
        self.factors = factors

    @property
    def args(self):
        return self.factors

    def _make_key(self):
        return (4, tuple(f.key for f in self.factors))

    def split_coeff(self):
        f0 = self.factors[0]
        if isinstance(f0, Num):
            rest = self.factors[1:]
            return f0.value, rest[0] if len(rest) == 1 else Mul(rest)
        return Fraction(1), self


class Add(Expr):
    """Sum; an optional rational constant comes first."""

    __slots__ = ("terms",)

    def __init__(self, terms):
        self._init()
        self.terms = terms

    @property
    def args(self):
        return self.terms

    def _make_key(self):
        return (5, tuple(t.key for t in self.terms))


ZERO = Num(0)
ONE = Num(1)
MINUS_ONE = Num(-1)
HALF = Num(Fraction(1, 2))


def as_expr(x):
    if isinstance(x, Expr):
        return x
    if isinstance(x, (int, Fraction)):
        return Num(x)
    if isinstance(x, float):
        return Num(Fraction(x).limit_denominator(10**12))
    if isinstance(x, str):
        from .parser import parse
        return parse(x)
    raise TypeError("cannot convert %r to Expr" % (x,))


def sym(name):
    return Sym(name)


def symbols(names):
    return tuple(Sym(n) for n in names.replace(",", " ").split())


def num(q):
    return Num(q)


def neg(e):
    return mul(MINUS_ONE, e)


def split_term(e):
    """Split a term into (rational coefficient, body)."""
    if isinstance(e, Num):
        return e.value, ONE
    if isinstance(e, Mul):
        return e.split_coeff()
    return Fraction(1), e


def _scaled(c, body):
    if c == 1:
        return body
    if body is ONE or body == ONE:
        return Num(c)
    if isinstance(body, Mul):
        return Mul((Num(c),) + body.factors)
    return Mul((Num(c), body))


def add(*args):
    const = Fraction(0)
    coeffs = {}
    stack = [a if isinstance(a, Expr) else as_expr(a) for a in args]
    stack.reverse()
    while stack:
        a = stack.pop()
        if isinstance(a, Add):
            stack.extend(reversed(a.terms))
            continue
        if isinstance(a, Num):
            const += a.value
            continue
        c, body = split_term(a)
        if body in coeffs:
            coeffs[body] += c
        else:
            coeffs[body] = c
    terms = [(b, c) for b, c in coeffs.items() if c != 0]
    if not terms:
        return Num(const)
    terms.sort(key=lambda bc: bc[0].key)
    out = [_scaled(c, b) for b, c in terms]
    if const != 0:
        out.insert(0, Num(const))
    if len(out) == 1:
        return out[0]
    return Add(tuple(out))


def _exp_add(a, b):
    if isinstance(a, Num) and isinstance(b, Num):
        return Num(a.value + b.value)
    return add(a, b)


def mul(*args):
    coeff = Fraction(1)
    powers = {}
    exp_args = []
    stack = [a if isinstance(a, Expr) else as_expr(a) for a in args]
    while stack:
        a = stack.pop()
        if isinstance(a, Num):
            coeff *= a.value
            if coeff == 0:
                return ZERO
            continue
        if isinstance(a, Mul):
            stack.extend(a.factors)
            continue
        if isinstance(a, Fn) and a.name == "exp":
            exp_args.append(a.arg)
            continue
        if isinstance(a, Pow):
            b, e = a.base, a.exp
        else:
            b, e = a, ONE
        if b in powers:
            powers[b] = _exp_add(powers[b], e)
        else:
            powers[b] = e
    factors = []
    extra = []
    for b, e in powers.items():
        p = power(b, e) if not (isinstance(e, Num) and e.value == 1) else b
        if isinstance(p, Num):
            coeff *= p.value
            if coeff == 0:
                return ZERO
        elif isinstance(p, Mul):
            extra.append(p)
        elif isinstance(p, Fn) and p.name == "exp":
            exp_args.append(p.arg)
        else:
            factors.append(p)
    if exp_args:
        ex = fn("exp", add(*exp_args))
        if isinstance(ex, Num):
            coeff *= ex.value
        elif isinstance(ex, Fn) and ex.name == "exp":
            factors.append(ex)
        else:
            extra.append(ex)
    if extra:
        # rare: a power split into several factors; fold them in again
        rest = mul(*extra)
        return mul(Num(coeff), rest, *factors) if factors else mul(Num(coeff), rest)
    if not factors:
        return Num(coeff)
    factors.sort(key=lambda f: f.key)
    if coeff != 1:
        factors.insert(0, Num(coeff))
    if len(factors) == 1:
        return factors[0]
    return Mul(tuple(factors))


def _int_root(n, k):
    """Exact k-th root of a non-negative integer, or None."""
    if n < 0:
        return None
    r = round(n ** (1.0 / k)) if n < 2**52 else isqrt(n) if k == 2 else None
    if r is None:
        return None
    for cand in (r - 1, r, r + 1):
        if cand >= 0 and cand**k == n:
            return cand
    return None


def _num_power(q, n):
    """q^n for rational q, n; returns an Expr."""
    if n.denominator == 1:
        if q == 0 and n < 0:
            raise ZeroDivisionError("0 raised to a negative power")
        return Num(q ** int(n))
    if q == 0:
        return ZERO if n > 0 else _raise_zero()
    if q == 1:
        return ONE
    if q < 0:
        return Pow(Num(q), Num(n))
    k = n.denominator
    rn, rd = _int_root(q.numerator, k), _int_root(q.denominator, k)
    if rn is not None and rd is not None:
        return Num(Fraction(rn, rd) ** n.numerator)
    whole = n.numerator // k
    frac = n - whole
    if whole != 0:
        return Mul((Num(q**whole), Pow(Num(q), Num(frac))))
    return Pow(Num(q), Num(n))


def _raise_zero():
    raise ZeroDivisionError("0 raised to a non-positive power")


def _primitive(a):
    """Write an Add as c * P with the first non-constant term of P monic."""
    for t in a.terms:
        if not isinstance(t, Num):
            c, _ = split_term(t)
            break
    else:
        c = Fraction(1)
    if c == 1:
        return c, a
    inv = 1 / c
    return c, Add(tuple(_scaled(split_term(t)[0] * inv, split_term(t)[1]) if not isinstance(t, Num)
                        else Num(t.value * inv) for t in a.terms))


def power(b, e):
    b = as_expr(b)
    e = as_expr(e)
    if isinstance(e, Num):
        n = e.value
        if n == 0:
            return ONE
        if n == 1:
            return b
        if isinstance(b, Num):
            return _num_power(b.value, n)
        if isinstance(b, Pow):
            if n.denominator == 1:
                return power(b.base, mul(b.exp, e))
            if isinstance(b.base, Fn) and b.base.name == "abs":
                return power(b.base, mul(b.exp, e))
            return Pow(b, e)
        if isinstance(b, Mul):
            if n.denominator == 1:
                return mul(*(power(f, e) for f in b.factors))
            c, rest = b.split_coeff()
            if c > 0 and c != 1:
                return mul(_num_power(c, n), power(rest, e))
            return Pow(b, e)
        if isinstance(b, Fn):
            if b.name == "exp":
                return fn("exp", scale(b.arg, n))
            if b.name == "abs" and n.denominator == 1 and n.numerator % 2 == 0:
                return power(b.arg, e)
            if b.name == "sign" and n.denominator == 1:
                return ONE if n.numerator % 2 == 0 else b
            return Pow(b, e)
        if isinstance(b, Add):
            c, p = _primitive(b)
            if c != 1 and (n.denominator == 1 or c > 0):
                return mul(_num_power(c, n), Pow(p, e))
            return Pow(b, e)
        return Pow(b, e)
    if isinstance(b, Num) and b.value == 1:
        return ONE
    if isinstance(b, Fn) and b.name == "exp":
        return fn("exp", mul(b.arg, e))
    return Pow(b, e)


def scale(e, c):
    """Multiply by a rational, distributing over a sum."""
    c = Fraction(c)
    if isinstance(e, Add):
        return add(*(mul(Num(c), t) for t in e.terms))
    return mul(Num(c), e)


def _leading_negative(e):
    if isinstance(e, Num):
        return e.value < 0
    if isinstance(e, Mul):
        f0 = e.factors[0]
        return isinstance(f0, Num) and f0.value < 0
    if isinstance(e, Add):
        for t in e.terms:
            if not isinstance(t, Num):
                return _leading_negative(t)
        return e.terms[0].value < 0
    return False


def fn(name, arg):
    arg = as_expr(arg)
    if name == "sqrt":
        return power(arg, HALF)
    if name not in KERNELS:
        raise ValueError("unknown kernel %r" % name)
    if isinstance(arg, Num):
        v = arg.value
        if v == 0 and name in _AT_ZERO:
            return Num(_AT_ZERO[name])
        if name == "abs":
            return Num(abs(v))
        if name == "sign":
            return Num((v > 0) - (v < 0))
        if name == "ln" and v == 1:
            return ZERO
    if name == "ln":
        if isinstance(arg, Fn) and arg.name == "exp":
            return arg.arg
    elif name == "abs":
        if isinstance(arg, Fn) and arg.name in ("exp", "abs"):
            return arg
        if isinstance(arg, Mul):
            c, rest = arg.split_coeff()
            if c != 1:
                return mul(Num(abs(c)), fn("abs", rest))
        if isinstance(arg, Pow) and isinstance(arg.exp, Num) and arg.exp.value.denominator == 1:
            return power(fn("abs", arg.base), arg.exp)
    elif name == "sign":
        if isinstance(arg, Fn) and arg.name in ("exp", "abs"):
            return ONE
        if isinstance(arg, Mul):
            c, rest = arg.split_coeff()
            if c != 1:
                return mul(Num((c > 0) - (c < 0)), fn("sign", rest))
        if isinstance(arg, Pow) and isinstance(arg.exp, Num) and arg.exp.value.denominator == 1:
            return power(fn("sign", arg.base), arg.exp)
    elif name in _ODD and _leading_negative(arg):
        return neg(fn(name, neg(arg)))
    elif name in _EVEN and _leading_negative(arg):
        return fn(name, neg(arg))
    return Fn(name, arg)


def exp(a):
    return fn("exp", a)


def ln(a):
    return fn("ln", a)


def sqrt(a):
    return power(a, HALF)
