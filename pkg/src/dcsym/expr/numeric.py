"""Floating evaluation, sampling domains and randomized zero testing."""

import math
import zlib
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .expand import expand
from .nodes import Add, Fn, Mul, Num, Pow, Sym


class UnboundSymbol(KeyError):
    pass


class SingularEvaluation(ArithmeticError):
    pass


class AllSingular(ArithmeticError):
    pass


_NP = {
    "exp": "np.exp", "ln": "np.log", "abs": "np.abs", "sign": "np.sign",
    "sin": "np.sin", "cos": "np.cos", "tan": "np.tan", "sinh": "np.sinh",
    "cosh": "np.cosh", "arctan": "np.arctan",
}


def _float(q):
    return repr(float(Fraction(q)))


class _Compiler:
    def __init__(self):
        self.lines = []
        self.names = {}
        self.syms = set()

    def emit(self, e):
        if e in self.names:
            return self.names[e]
        if isinstance(e, Num):
            return "(" + _float(e.value) + ")"
        if isinstance(e, Sym):
            self.syms.add(e.name)
            return "V[%r]" % e.name
        if isinstance(e, Add):
            code = " + ".join(self.emit(t) for t in e.terms)
        elif isinstance(e, Mul):
            code = " * ".join(self.emit(f) for f in e.factors)
        elif isinstance(e, Pow):
            b = self.emit(e.base)
            if isinstance(e.exp, Num):
                q = e.exp.value
                if q.denominator == 1:
                    n = q.numerator
                    if n == 2:
                        code = "(%s * %s)" % (b, b)
                    elif n == -1:
                        code = "(1.0 / %s)" % b
                    elif n > 0:
                        code = "%s ** %d" % (b, n)
                    else:
                        code = "1.0 / (%s ** %d)" % (b, -n)
                elif q == Fraction(1, 2):
                    code = "np.sqrt(%s)" % b
                else:
                    code = "np.power(%s, %s)" % (b, _float(q))
            else:
                # general exponent: exp(q * ln(base))
                code = "np.exp(%s * np.log(%s))" % (self.emit(e.exp), b)
        elif isinstance(e, Fn):
            code = "%s(%s)" % (_NP[e.name], self.emit(e.arg))
        else:
            raise TypeError(type(e))
        name = "_%d" % len(self.lines)
        self.lines.append("    %s = %s" % (name, code))
        self.names[e] = name
        return name


@lru_cache(maxsize=20000)
def compile_terms(e):
    """Compile the monomials of e into a function V -> list of arrays."""
    terms = e.terms if isinstance(e, Add) else (e,)
    c = _Compiler()
    outs = [c.emit(t) for t in terms]
    src = "def _f(V):\n" + "\n".join(c.lines) + ("\n" if c.lines else "")
    src += "    return [%s]\n" % ", ".join(outs)
    ns = {"np": np}
    exec(compile(src, "<expr>", "exec"), ns)
    return ns["_f"], frozenset(c.syms)


def eval_terms(e, values):
    """Evaluate the monomials of (unexpanded) e on arrays; returns a 2-D array."""
    f, syms = compile_terms(e)
    missing = syms - set(values)
    if missing:
        raise UnboundSymbol(", ".join(sorted(missing)))
    n = None
    for v in values.values():
        n = np.shape(v)[0] if np.ndim(v) else 1
        break
    with np.errstate(all="ignore"):
        cols = f({k: np.asarray(v, dtype=float) for k, v in values.items()})
    size = n if n is not None else 1
    return np.array([np.broadcast_to(np.asarray(c, dtype=float), (size,)) for c in cols])


def evaluate(e, point):
    """Evaluate at one point; raises on unbound symbols or singular values."""
    e = expand(e) if not isinstance(e, (Num, Sym)) else e
    vals = {(k.name if isinstance(k, Sym) else k): np.array([float(v)]) for k, v in point.items()}
    if isinstance(e, Num):
        return float(e.value)
    t = eval_terms(e, vals)
    s = t.sum(axis=0)[0]
    if not np.all(np.isfinite(t)) or not math.isfinite(s):
        raise SingularEvaluation("singular evaluation of %s" % e)
    return float(s)


@dataclass(frozen=True)
class Domain:
    """Sampling intervals per symbol.

    Symbols without an entry use ``default`` (base coordinates and
    parameters) or ``jet_default`` (names with an underscore suffix, and any
    name listed in ``jets``).  An interval that contains 0 has the band
    (-exclusion, exclusion) cut out.  ``choices`` pins a symbol to a finite
    set of values (constants such as C or eps).
    """

    intervals: tuple = ()
    choices: tuple = ()
    default: tuple = (0.5, 2.0)
    jet_default: tuple = (-2.0, 2.0)
    exclusion: float = 0.1
    samples: int = 50
    seed: int = 0
    jets: frozenset = frozenset()

    def __post_init__(self):
        if isinstance(self.intervals, dict):
            object.__setattr__(self, "intervals", tuple(sorted(self.intervals.items())))
        if isinstance(self.choices, dict):
            object.__setattr__(self, "choices",
                               tuple(sorted((k, tuple(v)) for k, v in self.choices.items())))
        object.__setattr__(self, "jets", frozenset(self.jets))
        for name, (lo, hi) in self.intervals + (("<default>", self.default), ("<jet>", self.jet_default)):
            if not lo < hi:
                raise ValueError("empty interval for %s" % name)
            if lo < 0 < hi and not self.exclusion < (hi - lo) / 2:
                raise ValueError("exclusion radius too large for %s" % name)
        if self.samples < 1:
            raise ValueError("sample count must be positive")

    def with_(self, **kw):
        d = {f: getattr(self, f) for f in self.__dataclass_fields__}
        if "intervals" in kw:
            merged = dict(self.intervals)
            merged.update(kw.pop("intervals"))
            d["intervals"] = merged
        if "choices" in kw:
            merged = dict(self.choices)
            merged.update(kw.pop("choices"))
            d["choices"] = merged
        d.update(kw)
        return Domain(**d)

    def interval(self, name):
        for k, v in self.intervals:
            if k == name:
                return v
        if "_" in name or name in self.jets:
            return self.jet_default
        return self.default

    def choice(self, name):
        for k, v in self.choices:
            if k == name:
                return v
        return None

    def sample(self, names, count=None):
        """Deterministic samples; each symbol has its own stream."""
        count = self.samples if count is None else count
        out = {}
        for name in sorted(names):
            rng = np.random.default_rng([self.seed, zlib.crc32(name.encode())])
            ch = self.choice(name)
            if ch is not None:
                vals = np.array([float(Fraction(c)) for c in ch])
                out[name] = vals[rng.integers(0, len(vals), size=count)]
                continue
            lo, hi = self.interval(name)
            x = rng.uniform(lo, hi, size=count)
            r = self.exclusion
            if lo < 0 < hi and r > 0:
                bad = np.abs(x) < r
                while bad.any():
                    x[bad] = rng.uniform(lo, hi, size=int(bad.sum()))
                    bad = np.abs(x) < r
            out[name] = x
        return out

    def signs(self):
        """Branch signs implied by one-signed intervals (for abs/sign)."""
        out = {}
        for k, (lo, hi) in self.intervals:
            if lo >= 0:
                out[k] = 1
            elif hi <= 0:
                out[k] = -1
        return out


DEFAULT_DOMAIN = Domain()

ATOL = 1e-9
RTOL = 1e-9


@dataclass
class ZeroTest:
    zero: bool
    max_residual: float = 0.0
    samples: int = 0
    witness: dict = field(default=None)
    witness_residual: float = 0.0
    exact: bool = False

    def __bool__(self):
        return self.zero


def residual_profile(e, d, expanded=False):
    """Per-point absolute residual and monomial scale of e over d's samples."""
    if not expanded:
        e = expand(e)
    names = e.free_symbols
    pts = d.sample(names)
    if not names:
        pts = {}
    terms = eval_terms(e, pts) if names else np.array([[float(e.value)]] if isinstance(e, Num) else [[np.nan]])
    ok = np.all(np.isfinite(terms), axis=0)
    total = terms.sum(axis=0)
    scale = np.max(np.abs(terms), axis=0) if terms.size else np.zeros(terms.shape[1])
    return pts, total, scale, ok


def is_zero(e, d=DEFAULT_DOMAIN, tol=None):
    """Normal form test backed by randomized evaluation.

    A point passes when |sum| <= atol + rtol * (largest monomial magnitude).
    With atol = rtol = tol this is |sum| / (1 + scale) <= tol, which is the
    reported relative residual.
    """
    tol = ATOL if tol is None else tol
    n = expand(e)
    if isinstance(n, Num):
        r = abs(float(n.value))
        if n.value == 0:
            return ZeroTest(True, 0.0, d.samples, None, 0.0, exact=True)
        return ZeroTest(False, r / (1 + r), 1, {}, r)
    pts, total, scale, ok = residual_profile(n, d, expanded=True)
    if not ok.any():
        raise AllSingular("every sample point is singular for %s" % _short(n))
    rel = np.where(ok, np.abs(total) / (1.0 + scale), 0.0)
    k = int(np.argmax(rel))
    worst = float(rel[k])
    passed = worst <= tol
    witness = None
    wres = 0.0
    if not passed:
        witness = {name: float(v[k]) for name, v in pts.items()}
        wres = float(abs(total[k]))
    return ZeroTest(bool(passed), worst, int(ok.sum()), witness, wres)


def _short(e, n=120):
    s = str(e)
    return s if len(s) <= n else s[:n] + "..."
