"""One-sided limits of expression families through truncated generalized series.

A family depends on one parameter.  For a limit at infinity the parameter is
replaced by 1/s, for a finite limit lam0 by lam0 + s, and the expression is
expanded in powers s^k (rational k) as s -> 0+.  There is no general limit
engine behind this: each node type is handled by one registered rule (a
binomial series, a compound-interest exponent, log1p, Taylor series of a
kernel, ...), and every rule is certified numerically on a sample family
before the first limit is taken.

A term ln(s) is carried as the symbol ``logtiny`` so that families such as
exp(c ln(delta)) = delta^c can be expanded; it must cancel in every
coefficient that is used.
"""

from dataclasses import dataclass
from fractions import Fraction
from math import factorial

from ..expr import (
    ONE, ZERO, Add, Fn, Mul, Num, Pow, Sym, add, as_expr, diff, evaluate, expand, fn, mul,
    power, substitute,
)

SMALL = "tiny"
LOG_SMALL = "logtiny"
_Z = "zarg"


class NoRegisteredLimit(ValueError):
    """The family is not covered by a registered rule (or the limit diverges)."""


@dataclass(frozen=True)
class Series:
    """Terms {k: c_k} of sum c_k s^k, exact for all k <= upto."""

    terms: tuple
    upto: Fraction

    @classmethod
    def make(cls, terms, upto):
        upto = Fraction(upto)
        clean = {}
        for k, c in terms.items():
            k = Fraction(k)
            if k > upto:
                continue
            c = expand(c)
            if c != ZERO:
                clean[k] = c
        return cls(tuple(sorted(clean.items())), upto)

    @property
    def as_dict(self):
        return dict(self.terms)

    def valuation(self):
        return self.terms[0][0] if self.terms else None

    def lead(self):
        if not self.terms:
            raise NoRegisteredLimit("family vanishes to order %s" % self.upto)
        return self.terms[0]

    def coefficient(self, k):
        return self.as_dict.get(Fraction(k), ZERO)


def _const(e, U):
    return Series.make({0: e}, U)


def _s_add(parts, U):
    out = {}
    for p in parts:
        for k, c in p.terms:
            out[k] = add(out[k], c) if k in out else c
    return Series.make(out, min([U] + [p.upto for p in parts]))


def _s_mul2(a, b, U):
    out = {}
    for ka, ca in a.terms:
        for kb, cb in b.terms:
            k = ka + kb
            if k > U:
                continue
            t = mul(ca, cb)
            out[k] = add(out[k], t) if k in out else t
    va = a.valuation() if a.terms else a.upto
    vb = b.valuation() if b.terms else b.upto
    upto = min(U, a.upto + vb, b.upto + va)
    return Series.make(out, upto)


def _s_scale(a, c, shift=0):
    return Series.make({k + shift: mul(c, v) for k, v in a.terms}, a.upto + shift)


def _unit_part(a):
    """Split a = c s^v (1 + r); returns (c, v, r) with r of positive valuation."""
    v, c = a.lead()
    inv = power(c, -1)
    r = {k - v: mul(inv, x) for k, x in a.terms if k != v}
    return c, v, Series.make(r, a.upto - v)


def _power_sum(r, coeffs, U):
    """sum_m coeffs(m) r^m for r of positive valuation, truncated at U."""
    out = Series.make({0: coeffs(0)}, U)
    if not r.terms:
        return Series.make(out.as_dict, min(U, r.upto))
    vr = r.valuation()
    if vr <= 0:
        raise NoRegisteredLimit("series argument does not vanish")
    term = Series.make({0: ONE}, U)
    m = 0
    while True:
        m += 1
        if m * vr > U:
            break
        term = _s_mul2(term, r, U)
        c = coeffs(m)
        if c != ZERO:
            out = _s_add([out, _s_scale(term, c)], U)
    return Series.make(out.as_dict, min(U, r.upto))


def _binom(n, m):
    out = ONE
    for i in range(m):
        out = mul(out, add(n, -i))
    return mul(out, Num(Fraction(1, factorial(m))))


class _Expander:
    def __init__(self):
        self.cache = {}

    def __call__(self, e, U):
        U = Fraction(U)
        key = (e, U)
        if key not in self.cache:
            self.cache[key] = self._series(e, U)
        return self.cache[key]

    def _series(self, e, U):
        if SMALL not in e.free_symbols and LOG_SMALL not in e.free_symbols:
            return _const(e, U)
        if isinstance(e, Sym):
            return Series.make({1: ONE} if e.name == SMALL else {0: e}, U)
        if isinstance(e, Add):
            return _s_add([self(t, U) for t in e.terms], U)
        if isinstance(e, Mul):
            return self.product([lambda V, f=f: self(f, V) for f in e.factors], U)
        if isinstance(e, Pow):
            if SMALL in e.exp.free_symbols:
                return self.variable_power(e.base, e.exp, U)
            return self.const_power(lambda V: self(e.base, V), e.exp, U)
        if isinstance(e, Fn):
            if e.name == "exp":
                return self.exponential(lambda V: self(e.arg, V), U)
            if e.name == "ln":
                return self.logarithm(lambda V: self(e.arg, V), U)
            if e.name == "abs":
                return self.absolute(lambda V: self(e.arg, V), U)
            if e.name == "sign":
                _, c = self(e.arg, U).lead()
                return _const(fn("sign", c), U)
            return self.kernel(e.name, lambda V: self(e.arg, V), U)
        raise NoRegisteredLimit("no rule for %s" % type(e).__name__)

    # -- rules -----------------------------------------------------------
    def product(self, thunks, U):
        parts = [t(U) for t in thunks]
        vals = [p.valuation() if p.terms else p.upto for p in parts]
        total = sum(vals)
        for i, t in enumerate(thunks):
            need = U - (total - vals[i])
            if need > parts[i].upto:
                parts[i] = t(need)
        out = parts[0]
        rest = total - vals[0]
        for p, v in zip(parts[1:], vals[1:]):
            rest -= v
            out = _s_mul2(out, p, U - rest)
        return out

    def const_power(self, base, n, U):
        """Binomial series of (c s^v (1 + r))^n."""
        b = base(U)
        if not b.terms:
            raise NoRegisteredLimit("power of a vanishing family")
        v = b.valuation()
        if isinstance(n, Num):
            nv = n.value * v
        elif v == 0:
            nv = Fraction(0)
        else:
            raise NoRegisteredLimit("power with symbolic exponent of a family of order %s" % v)
        need = U - nv + v
        if need > b.upto:
            b = base(need)
        c, v, r = _unit_part(b)
        unit = _power_sum(r, lambda m: _binom(n, m), U - nv)
        return _s_scale(unit, power(c, n), nv)

    def variable_power(self, base, exp_, U):
        """b^e with e depending on the parameter: exp(e ln b) (compound interest)."""
        return self.exponential(
            lambda V: self.product([lambda W: self(exp_, W), lambda W: self.logarithm(lambda X: self(base, X), W)], V),
            U)

    def exponential(self, arg, U):
        a = arg(U)
        shift = self._log_shift(a)
        if shift < 0 and a.upto < U - shift:
            a = arg(U - shift)
        rest = {}
        for k, c in a.terms:
            if k == 0:
                c = expand(add(c, mul(-shift, Sym(LOG_SMALL))))
            if k < 0:
                raise NoRegisteredLimit("exponent diverges like s^%s" % k)
            rest[k] = c
        a0 = rest.pop(Fraction(0), ZERO)
        r = Series.make(rest, a.upto)
        unit = _power_sum(r, lambda m: Num(Fraction(1, factorial(m))), U - shift)
        return _s_scale(unit, fn("exp", a0), shift)

    @staticmethod
    def _log_shift(a):
        """Numeric c of a c*ln(s) term at order 0 (exp of it is s^c)."""
        shift = Fraction(0)
        for k, c in a.terms:
            if LOG_SMALL in c.free_symbols:
                lc = diff(c, LOG_SMALL)
                if k != 0 or not isinstance(lc, Num):
                    raise NoRegisteredLimit("logarithmic term %s at order %s" % (c, k))
                shift = lc.value
        return shift

    def logarithm(self, arg, U):
        a = arg(U)
        if not a.terms:
            raise NoRegisteredLimit("logarithm of a vanishing family")
        v = a.valuation()
        if a.upto < U + v:
            a = arg(U + v)
        c, v, r = _unit_part(a)
        log1p = _power_sum(r, lambda m: ZERO if m == 0 else Num(Fraction((-1) ** (m + 1), m)), U)
        head = add(fn("ln", c), mul(Num(v), Sym(LOG_SMALL)))
        return _s_add([log1p, _const(head, U)], U)

    def absolute(self, arg, U):
        a = arg(U)
        _, c = a.lead()
        return _s_scale(a, fn("sign", c))

    def kernel(self, name, arg, U):
        """Taylor series of an analytic kernel about the limit of its argument."""
        a = arg(U)
        d = a.as_dict
        if any(k < 0 for k in d):
            raise NoRegisteredLimit("argument of %s diverges" % name)
        a0 = d.pop(Fraction(0), ZERO)
        r = Series.make(d, a.upto)
        z = Sym(_Z)
        derivs = [fn(name, z)]

        def coeff(m):
            while len(derivs) <= m:
                derivs.append(diff(derivs[-1], _Z))
            return mul(substitute(derivs[m], {_Z: a0}), Num(Fraction(1, factorial(m))))
        return _power_sum(r, coeff, U)


def _small_variable(var, at):
    """Replacement of the family parameter in terms of the small variable."""
    s = Sym(SMALL)
    if at == "infinity":
        return power(s, -1)
    return add(as_expr(at), s)


def series(e, var, at="infinity", upto=2):
    """Generalized series of e as var -> at, in the small variable s."""
    _certify()
    e = expand(substitute(as_expr(e), {var: _small_variable(var, at)}))
    return _Expander()(e, Fraction(upto))


def leading_term(e, var, at="infinity", upto=3):
    """(order k, coefficient c) with e ~ c s^k; c is free of the parameter."""
    ser = series(e, var, at, upto)
    if not ser.terms:
        raise NoRegisteredLimit("family vanishes to order %s" % upto)
    k, c = ser.lead()
    if LOG_SMALL in c.free_symbols:
        raise NoRegisteredLimit("leading coefficient keeps a logarithm of the parameter")
    return k, c


def limit(e, var, at="infinity", upto=1):
    """Finite limit of e as var -> at (a NoRegisteredLimit when it diverges)."""
    ser = series(e, var, at, upto)
    for k, c in ser.terms:
        if k < 0:
            raise NoRegisteredLimit("family diverges like s^%s" % k)
    c = ser.coefficient(0)
    if LOG_SMALL in c.free_symbols:
        raise NoRegisteredLimit("limit keeps a logarithm of the parameter")
    return c


def parameter_value(var, at, s):
    """Numeric parameter value at small-variable value s."""
    return 1.0 / s if at == "infinity" else float(Fraction(str(at))) + s


# -- rule registry ---------------------------------------------------------

@dataclass(frozen=True)
class LimitRule:
    name: str
    family: str
    claimed: str
    at: str = "infinity"
    var: str = "delta"
    sample: tuple = ()


RULES = (
    LimitRule("binomial", "(3*delta + 4)^2/(delta + 1)^2", "9"),
    LimitRule("compound-interest", "(1 + a/delta)^(c*delta + d)", "exp(a*c)",
              sample=(("a", 0.7), ("c", 1.3), ("d", 0.4))),
    LimitRule("compound-interest-abs", "abs(1 + a/delta)^(c*delta)", "exp(a*c)",
              sample=(("a", -0.6), ("c", 2.0))),
    LimitRule("log1p", "delta*ln(abs(1 + a/delta))", "a", sample=(("a", 0.9),)),
    LimitRule("log-scale", "exp(3/2*ln(delta) + a)*delta^(-3/2)", "exp(a)", sample=(("a", 0.3),)),
    LimitRule("rational-exponent", "abs(x)^((3*delta + 4)/(delta + 1))", "abs(x)^3",
              sample=(("x", 1.7),)),
    LimitRule("kernel-taylor", "delta^2*(cos(a/delta) - 1)", "-a^2*(1/2)", sample=(("a", 0.8),)),
    LimitRule("expm1", "(exp(a*s) - 1)/s", "a", at="0", var="s", sample=(("a", -1.2),)),
)

_certified = []


class CertificationError(RuntimeError):
    pass


def certify_rule(rule, steps=(1e2, 1e3, 1e4)):
    """Compare the expanded limit and the stated limit with the family itself."""
    fam = as_expr(rule.family)
    claimed = as_expr(rule.claimed)
    vals = dict(rule.sample)
    e = expand(substitute(fam, {rule.var: _small_variable(rule.var, rule.at)}))
    ser = _Expander()(e, Fraction(1))
    got = ser.coefficient(0)
    if any(k < 0 for k, _ in ser.terms) or expand(add(got, mul(-1, claimed))) != ZERO:
        if abs(evaluate(got, vals) - evaluate(claimed, vals)) > 1e-12:
            raise CertificationError("rule %s expands to %s, not %s" % (rule.name, got, claimed))
    target = evaluate(claimed, vals)
    devs = []
    for k in steps:
        s = 1.0 / k
        lam = parameter_value(rule.var, rule.at, s)
        devs.append(abs(evaluate(fam, dict(vals, **{rule.var: lam})) - target))
    if not max(devs[1:]) < 1e-3 * (1 + abs(target)):
        raise CertificationError("rule %s: family does not approach %s (%s)" % (rule.name, rule.claimed, devs))
    return devs


def _certify():
    if not _certified:
        for r in RULES:
            certify_rule(r)
        _certified.append(True)


def certified_rules():
    _certify()
    return [r.name for r in RULES]
