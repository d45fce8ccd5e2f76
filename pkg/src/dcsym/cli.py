"""Command-line entry point: ``dcsym <command> ...`` or ``python -m dcsym``."""

import argparse
import sys

from . import catalog, nonclassical, reduction
from .contraction import all_specs, contract_all_ansatzes, get_spec, verify_contraction
from .expr import DEFAULT_DOMAIN, ParseError, parse, to_string
from .pde import solution_residual
from .report import aggregate, emit

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _domain(args):
    return DEFAULT_DOMAIN.with_(seed=args.seed, samples=args.samples)


def _picks(items):
    out = {}
    for item in items or ():
        if "=" not in item:
            raise UsageError("parameter pick %r is not name=value" % item)
        k, v = item.split("=", 1)
        out[k.strip()] = v.strip()
    return out or None


# -- verify --------------------------------------------------------------------

def cmd_verify(args, d, tol):
    what = args.what
    if what == "case":
        if not args.ids:
            raise UsageError("verify case needs at least one case id")
        if args.printed:
            return [catalog.verify_printed_errata(c, d, tol) for c in args.ids if catalog.case(c).errata]
        return [catalog.verify_case(c, _picks(args.pick), d, tol) for c in args.ids]
    if what == "solutions":
        sols = catalog.all_solutions()
        if args.equation:
            catalog.get_equation(args.equation)
            sols = [s for s in sols if s.equation == args.equation]
        if args.ids:
            sols = [catalog.get_solution(i) for i in args.ids]
        reps = [catalog.verify_solution(s, d, tol, printed=args.printed) for s in sols
                if not args.printed or s.printed is not None]
        return [aggregate("solutions%s" % (" of " + args.equation if args.equation else ""), reps,
                          "%d solutions" % len(reps))]
    if what == "algebra":
        algs = [catalog.get_algebra(a) for a in args.ids] if args.ids else catalog.all_algebras()
        reps = [catalog.verify_algebra(a, d, tol) for a in algs]
        if not args.ids:
            reps.append(_jacobi_all_cases(d, tol))
        return reps
    if what == "all":
        return verify_all(d, tol)
    raise UsageError("unknown verify target %r" % what)


def _jacobi_all_cases(d, tol):
    from .lie import check_jacobi
    reps = []
    for c in catalog.all_cases():
        for pick in c.pick_values():
            _, basis = c.instantiate(pick or None)
            tag = ", ".join("%s=%s" % kv for kv in sorted(pick.items()))
            reps.append(check_jacobi(basis, d, tol, "jacobi %s%s" % (c.case_id, " {%s}" % tag if tag else "")))
    return aggregate("Jacobi identity on catalog bases", reps)


def verify_all(d=DEFAULT_DOMAIN, tol=None):
    """Every case, solution, algebra, transform, contraction, reduction row and
    nonclassical example, each once."""
    reps = [aggregate("classification cases", [catalog.verify_case(c.case_id, None, d, tol)
                                               for c in catalog.all_cases()])]
    reps.append(catalog.verify_database(d, tol))
    reps.append(aggregate("algebras", [catalog.verify_algebra(a, d, tol) for a in catalog.all_algebras()]
                          + [_jacobi_all_cases(d, tol)]))
    reps.append(aggregate("transforms", [transform_report(T, d, tol) for T in catalog.list_named_transforms()]))
    reps.append(aggregate("contractions", [verify_contraction(s, d, tol) for s in all_specs()]
                          + [contract_all_ansatzes(d=d, tol=tol)]))
    reps.append(aggregate("reductions", [reduction.verify_row(r, d, tol) for r in reduction.all_rows()]))
    reps.append(aggregate("nonclassical", nonclassical.verify_all(d, tol)))
    return reps


# -- transform -----------------------------------------------------------------

def transform_report(T, d=DEFAULT_DOMAIN, tol=None):
    """The source equation maps to the target one (point transforms) or the
    stored preimages map onto database solutions (differential ones)."""
    if T.kind == "point":
        src = catalog.named_equation(T.source)
        tgt = catalog.named_equation(T.target).equation
        dom = T.domain(d).with_(choices=dict(src.choices))
        return catalog.check_pullback(T, src.equation, tgt, dom, tol, "pullback %s" % T.name)
    reps = []
    for rec in catalog.preimage_records():
        if rec["transform"] != T.name:
            continue
        image = catalog.map_solution(T, parse(str(rec["expr"])))
        target = catalog.get_solution(rec["image"])
        eq = catalog.named_equation(T.target)
        dom = target.domain(d)
        reps.append(solution_residual(eq.equation, image, dom, "%s(%s) -> %s" % (T.name, rec["expr"], rec["image"]), tol))
    return aggregate("preimages under %s" % T.name, reps)


def cmd_transform(args, d, tol):
    T = catalog.get_transform(args.name)
    if args.action == "apply":
        return [transform_report(T, d, tol)]
    if not args.solution:
        raise UsageError("map-solution needs --solution")
    sol = parse(args.solution)
    image = catalog.map_solution(T, sol, args.direction)
    # a pulled-back point image solves the source; anything pushed solves the target
    eq_name = T.source if T.kind == "point" and args.direction == "pull" else T.target
    ne = catalog.named_equation(eq_name)
    dom = d.with_(choices=dict(ne.choices)) if ne.choices else d
    rep = solution_residual(ne.equation, image, dom, "%s image on %s" % (T.name, eq_name), tol)
    rep.notes = "%s = %s" % (ne.equation.dep, to_string(image))
    return [rep]


# -- reduce, contract, nonclassical ----------------------------------------------

def cmd_reduce(args, d, tol):
    if args.antireduction:
        return [reduction.verify_antireduction(d=d), reduction.check_third_order(),
                reduction.verify_antireduction_operator()]
    if args.row:
        rows = [reduction.get_row(r) for r in args.row]
    elif args.case:
        if args.subalgebra:
            rows = [reduction.find_row(args.case, args.subalgebra)]
        else:
            catalog.named_equation(args.case)
            rows = [r for r in reduction.all_rows() if r.equation == args.case]
    else:
        rows = reduction.all_rows()
    return [reduction.verify_row(r, d, tol) for r in rows]


def cmd_contract(args, d, tol):
    if args.ansatz:
        return [contract_all_ansatzes(args.spec or "power-diffusion->exp-diffusion", d, tol)]
    specs = [get_spec(args.spec)] if args.spec else all_specs()
    return [verify_contraction(s, d, tol) for s in specs]


def cmd_nonclassical(args, d, tol, out):
    if args.derive:
        case = args.case or "tau1"
        if case == "tau0":
            r = nonclassical.determining_tau0()
            out.write("tau = 0: %s = 0\n" % to_string(r))
            return [nonclassical.compare_tau0(d, tol)]
        if case == "tau1":
            comps = nonclassical.determining_system_tau1()
            for k, c in zip((3, 2, 1, 0), comps):
                out.write("u_x^%d: %s = 0\n" % (k, to_string(c)))
            return [nonclassical.compare_tau1(d, tol)]
        eq, _ = catalog.get_case(case, _first_pick(case))
        comps = nonclassical.determining_system_tau1(eq)
        for k, c in zip((3, 2, 1, 0), comps):
            out.write("u_x^%d: %s = 0\n" % (k, to_string(c)))
        return [nonclassical.compare_case(eq, d, tol, "determining system of case %s" % case)]
    if args.example:
        return [nonclassical.verify_example(e, d, tol) for e in args.example]
    if args.operator:
        return [nonclassical.get_operator(o).verify(d, tol) for o in args.operator]
    if args.literature:
        return [nonclassical.verify_literature_operators(d, tol)]
    return nonclassical.verify_all(d, tol)


def _first_pick(case_id):
    return catalog.case(case_id).pick_values()[0] or None


# -- list ------------------------------------------------------------------------

def cmd_list(args, out):
    kind = args.kind
    rows = {
        "cases": lambda: [(c.case_id, "table %d" % c.table) for c in catalog.all_cases()],
        "equations": lambda: [(e.eq_id, "") for e in catalog.all_equations()],
        "solutions": lambda: [(s.sol_id, s.equation) for s in catalog.all_solutions()],
        "transforms": lambda: [(T.name, "%s -> %s" % (T.source, T.target)) for T in catalog.list_named_transforms()],
        "algebras": lambda: [(a.alg_id, a.equation) for a in catalog.all_algebras()],
        "contractions": lambda: [(s.spec_id, "") for s in all_specs()],
        "reductions": lambda: [(r.row_id, "%s <%s>" % (r.equation, r.subalgebra)) for r in reduction.all_rows()],
        "operators": lambda: [(o.op_id, o.title) for o in nonclassical.all_operators()],
    }[kind]()
    for key, desc in rows:
        out.write(("%-28s %s" % (key, desc)).rstrip() + "\n")
    return EXIT_OK


# -- argument parsing ------------------------------------------------------------

def build_parser():
    p = argparse.ArgumentParser(prog="dcsym", description="Symbolic checks for diffusion-convection equations.")
    p.add_argument("--seed", type=int, default=0, help="sampling seed (default 0)")
    p.add_argument("--samples", type=int, default=50, help="sample points per zero test")
    p.add_argument("--tolerance", type=float, default=None, help="relative residual tolerance")
    p.add_argument("--catalog", action="append", default=[], metavar="FILE",
                   help="extra catalog file (repeatable)")
    p.add_argument("--format", choices=("text", "structured"), default="text")
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="check catalog entries")
    v.add_argument("what", choices=("case", "solutions", "algebra", "all"))
    v.add_argument("ids", nargs="*")
    v.add_argument("--pick", action="append", metavar="NAME=VALUE", help="parameter value for a case")
    v.add_argument("--equation", help="restrict solutions to one named equation")
    v.add_argument("--printed", action="store_true", help="check printed transcriptions instead")

    t = sub.add_parser("transform", help="named point and differential transformations")
    t.add_argument("action", choices=("apply", "map-solution"))
    t.add_argument("name")
    t.add_argument("--solution", help="solution expression in t, x")
    t.add_argument("--direction", choices=("pull", "push"), default="pull")

    r = sub.add_parser("reduce", help="Lie and nonclassical reductions")
    r.add_argument("--case", help="named equation")
    r.add_argument("--subalgebra")
    r.add_argument("--row", action="append")
    r.add_argument("--antireduction", action="store_true")

    c = sub.add_parser("contract", help="contractions of equations, operators and ansatzes")
    c.add_argument("--spec")
    c.add_argument("--ansatz", action="store_true")

    n = sub.add_parser("nonclassical", help="reduction operators")
    n.add_argument("--example", action="append")
    n.add_argument("--operator", action="append")
    n.add_argument("--literature", action="store_true")
    n.add_argument("--derive", action="store_true")
    n.add_argument("--case", help="tau1, tau0 or a classification case id (with --derive)")

    ls = sub.add_parser("list", help="list catalog entries")
    ls.add_argument("kind", choices=("cases", "equations", "solutions", "transforms", "algebras",
                                     "contractions", "reductions", "operators"))
    return p


_LOOKUP_ERRORS = (KeyError, ParseError, UsageError, ValueError)


def run(argv=None, out=None):
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        if args.samples < 1:
            raise UsageError("--samples must be positive")
        for path in args.catalog:
            catalog.load_catalog_file(path)
        if args.command == "list":
            return cmd_list(args, out)
        d, tol = _domain(args), args.tolerance
        if args.command == "verify":
            reports = cmd_verify(args, d, tol)
        elif args.command == "transform":
            reports = cmd_transform(args, d, tol)
        elif args.command == "reduce":
            reports = cmd_reduce(args, d, tol)
        elif args.command == "contract":
            reports = cmd_contract(args, d, tol)
        else:
            reports = cmd_nonclassical(args, d, tol, out)
    except OSError as exc:
        sys.stderr.write("dcsym: %s\n" % exc)
        return EXIT_USAGE
    except _LOOKUP_ERRORS as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        sys.stderr.write("dcsym: %s\n" % msg)
        return EXIT_USAGE
    data = emit(reports, args.format)
    try:
        out.write(data.decode())
        out.flush()
    except BrokenPipeError:
        # reader went away (e.g. piped into head); the exit code still stands
        sys.stderr.close()
    return EXIT_FAIL if any(r.status == "fail" for r in reports) else EXIT_OK


def main():
    sys.exit(run())
