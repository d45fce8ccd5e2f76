# Reduction operators (nonclassical symmetries)
#
# For Q = d_t + xi d_x + eta d_u the invariance criterion is required only on
# solutions that are also invariant under Q.  With arbitrary elements the
# criterion splits by powers of u_x.

from dcsym.catalog import verify_solution
from dcsym.expr import to_string
from dcsym.nonclassical import (
    check_operator, compare_tau0, compare_tau1, determining_system_tau1, get_operator, verify_example,
)

for k, comp in zip((3, 2, 1, 0), determining_system_tau1()):
    print("u_x^%d:" % k, to_string(comp)[:100], "...")

# Each component agrees with the typeset one up to a factor free of xi, eta.

print(compare_tau1().status, compare_tau1().notes)
print(compare_tau0().status, compare_tau0().notes)

# The square-root example: d_t + 12 x^(-2) u^(1/2) d_u passes for
# u_t = (u^(-1/2) u_x)_x.  Putting the coefficient on d_x instead does not.

op = get_operator("1-instance")
print(check_operator(op.equation, op.field, op.domain()).status)
print(check_operator(op.equation, op.printed, op.domain()).status)

# The invariant 2 u^(1/2) - 12 t/x^2 leads to an ansatz, a linear ODE and the
# solution u = (6t/x^2 + C1 x^3 + C2 x^(-2))^2.

print(verify_example("1").status)
print(verify_solution("sqrt-1").status, verify_solution("sqrt-1", printed=True).status)
