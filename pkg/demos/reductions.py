# Reductions to ordinary differential equations

from dcsym.reduction import (
    algebraic_reduction, antireduce_poly, check_algebraic_reduction, compose, eliminate_to_third_order,
    get_row, rational_roots, reduce, verify_row,
)
from dcsym.expr import parse, to_string

# The sl(2)-invariant equation x^2 v_t = v v_xx - 5/6 v_x^2 + x^2 v_x has the
# scaling D = t d_t + x d_x + 3 v d_v.  Its invariants give v = t^3 phi(x/t).

row = get_row("sl2-D")
print(row)
print(reduce(None, row))

# Each listed phi solves the reduced equation, and composing it back gives a
# solution of the original one.

print(verify_row(row).status)
print(to_string(compose(row, "2*w^3*(w + 1)^3")))

# A polynomial ansatz of degree six with the low coefficients fixed splits the
# equation into a system for phi4, phi5, phi6.

for power, coeff in sorted(antireduce_poly().items()):
    print(power, coeff)

# Eliminating phi5 and phi6 leaves one third-order equation for phi4.

ode = eliminate_to_third_order()
print(ode)

# phi4 = C/t turns it into a quartic in C with four rational roots.

quartic = algebraic_reduction(ode, "C/t", anchor=1)
print(quartic)
print(rational_roots(quartic))
print(check_algebraic_reduction(parse("16*C^4 - 192*C^3 + 639*C^2 - 378*C"), ["0", "3/4", "21/4", "6"]).status)
