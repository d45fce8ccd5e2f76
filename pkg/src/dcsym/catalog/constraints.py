"""Parameter predicates such as "p not in {-3, -2, 0}", evaluated in exact rationals."""

import ast
import operator
from fractions import Fraction


class ConstraintViolation(ValueError):
    pass


_BIN = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
        ast.Div: operator.truediv, ast.Pow: operator.pow}
_CMP = {ast.Eq: operator.eq, ast.NotEq: operator.ne, ast.Lt: operator.lt, ast.LtE: operator.le,
        ast.Gt: operator.gt, ast.GtE: operator.ge}


def _eval(node, env):
    if isinstance(node, ast.Expression):
        return _eval(node.body, env)
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
        return Fraction(node.value)
    if isinstance(node, ast.Name):
        if node.id not in env:
            raise ConstraintViolation("constraint mentions unbound parameter %r" % node.id)
        return env[node.id]
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, ast.USub):
        return -_eval(node.operand, env)
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, ast.Not):
        return not _eval(node.operand, env)
    if isinstance(node, ast.BinOp) and type(node.op) in _BIN:
        return _BIN[type(node.op)](_eval(node.left, env), _eval(node.right, env))
    if isinstance(node, (ast.Tuple, ast.Set, ast.List)):
        vals = [_eval(e, env) for e in node.elts]
        return tuple(vals) if isinstance(node, ast.Tuple) else vals
    if isinstance(node, ast.BoolOp):
        vals = (_eval(v, env) for v in node.values)
        return all(vals) if isinstance(node.op, ast.And) else any(vals)
    if isinstance(node, ast.Compare):
        left = _eval(node.left, env)
        for op, rhs in zip(node.ops, node.comparators):
            right = _eval(rhs, env)
            if isinstance(op, ast.In):
                ok = left in right
            elif isinstance(op, ast.NotIn):
                ok = left not in right
            elif type(op) in _CMP:
                ok = _CMP[type(op)](left, right)
            else:
                raise ValueError("unsupported comparison")
            if not ok:
                return False
            left = right
        return True
    raise ValueError("unsupported constraint syntax: %s" % ast.dump(node))


def check_constraint(text, values):
    """True when the predicate holds; values maps names to rationals."""
    env = {k: Fraction(v) for k, v in values.items()}
    try:
        return bool(_eval(ast.parse(text, mode="eval"), env))
    except ZeroDivisionError:
        return False


def enforce(constraints, values, where=""):
    for c in constraints:
        if not check_constraint(c, values):
            raise ConstraintViolation("%s violates %r%s" % (
                ", ".join("%s=%s" % kv for kv in sorted(values.items())), c,
                " in case %s" % where if where else ""))
