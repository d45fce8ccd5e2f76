"""Contractions of ansatzes, similarity variables and reduced equations."""

from ..expr import DEFAULT_DOMAIN, Sym, add, expand, is_zero, mul, parse, substitute
from ..pde import branch
from ..reduction import PHI_JETS, find_row, get_row, proportional, total
from ..report import VerificationReport, aggregate, from_zero_test
from .core import get_spec
from .limits import NoRegisteredLimit, leading_term, limit

DEFAULT_SPEC = "power-diffusion->exp-diffusion"


def _phi_jets(phi_map):
    """Jets of phi when phi itself is replaced by phi_map(phi)."""
    out = {}
    cur = phi_map
    for j in PHI_JETS:
        out[j] = cur
        if j != PHI_JETS[-1]:
            cur = total(cur)
    return out


def ansatz_pairs(spec=DEFAULT_SPEC):
    """(source row, target row) for every source row with a matching subalgebra."""
    if isinstance(spec, str):
        spec = get_spec(spec)
    if len(spec.ansatz_equations) != 2:
        raise ValueError("spec %s does not name ansatz equations" % spec.spec_id)
    from ..reduction import all_rows
    src_eq, tgt_eq = spec.ansatz_equations
    out = []
    for r in all_rows():
        if r.equation == src_eq:
            out.append((r, find_row(tgt_eq, r.subalgebra)))
    return out


def _failed(subject, exc):
    return VerificationReport(subject, "fail", float("inf"), 0, None, str(exc))


def contract_ansatz(source, target=None, spec=DEFAULT_SPEC, d=DEFAULT_DOMAIN, tol=None):
    """Push a reduction row through the rescaling of the dependent variable.

    phi is rescaled like the dependent variable.  The contracted ansatz and
    similarity variable are the limits of the rescaled ones; the contracted
    reduced equation is the leading coefficient of the rescaled residual.
    Each is compared with the target row on every sign branch of t.
    """
    if isinstance(spec, str):
        spec = get_spec(spec)
    src = get_row(source) if isinstance(source, str) else source
    if target is None:
        target = find_row(spec.ansatz_equations[1], src.subalgebra)
    tgt = get_row(target) if isinstance(target, str) else target
    lam = spec.parameter
    fwd = parse(dict(spec.rescale)["u"])
    inv = parse(dict(spec.rescale_inverse)["u"])
    phi_map = substitute(fwd, {"u": Sym("phi")})
    reports = []
    branches = (1, -1) if src.signed or tgt.signed else (None,)
    for delta in branches:
        dom = tgt.domain(delta, d)
        tag = "" if delta is None else " [t%s0]" % (">" if delta > 0 else "<")
        head = "%s -> %s" % (src.row_id, tgt.row_id)

        subject = "%s ansatz%s" % (head, tag)
        U = substitute(src.on_branch(src.form, delta), {"phi": phi_map})
        try:
            lim = limit(expand(substitute(inv, {"u": U})), lam, spec.at)
            diff_ = branch(add(lim, mul(-1, tgt.on_branch(tgt.form, delta))), dom)
            rep = from_zero_test(subject, is_zero(diff_, dom, tol), tol=tol)
            rep.notes = "limit %s" % lim
        except NoRegisteredLimit as exc:
            rep = _failed(subject, exc)
        reports.append(rep)

        subject = "%s similarity variable%s" % (head, tag)
        try:
            lim = limit(src.on_branch(src.omega, delta), lam, spec.at)
            diff_ = branch(add(lim, mul(-1, tgt.on_branch(tgt.omega, delta))), dom)
            reports.append(from_zero_test(subject, is_zero(diff_, dom, tol), tol=tol))
        except NoRegisteredLimit as exc:
            reports.append(_failed(subject, exc))

        subject = "%s reduced equation%s" % (head, tag)
        E = expand(substitute(src.expected(delta), _phi_jets(phi_map)))
        try:
            order, lead = leading_term(E, lam, spec.at)
            rep = proportional(lead, tgt.expected(delta), dom, subject, tol, PHI_JETS)
            rep.notes = "order %s; %s" % (order, rep.notes)
        except NoRegisteredLimit as exc:
            rep = _failed(subject, exc)
        reports.append(rep)
    return aggregate("ansatz contraction %s -> %s" % (src.row_id, tgt.row_id), reports,
                     "<%s> under %s" % (src.subalgebra, spec.spec_id))


def contract_all_ansatzes(spec=DEFAULT_SPEC, d=DEFAULT_DOMAIN, tol=None):
    pairs = ansatz_pairs(spec)
    reports = [contract_ansatz(s, t, spec, d, tol) for s, t in pairs]
    return aggregate("ansatz contractions %s" % (spec if isinstance(spec, str) else spec.spec_id), reports,
                     "%d rows" % len(pairs))
