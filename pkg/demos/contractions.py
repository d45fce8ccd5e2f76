# Contractions: one row of the classification as a limit of another
#
# u_t = (u^mu u_x)_x + ... becomes an equation with exponential nonlinearity
# when u -> 1 + u/delta and mu = delta, as delta grows.

from dcsym.contraction import (
    check_weak_convergence, contract_all_ansatzes, contract_operator, get_spec, instantiate,
    check_parameter_derivative,
)
from dcsym.pde import lhs_residual

spec = get_spec("3.1->2.1")
inst = instantiate(spec)
print(lhs_residual(inst.source_eq))
print(lhs_residual(inst.limit_eq))

# The rescaled residual and its first partials approach the target residual.
# The empirical order of convergence is compared with the order predicted by
# the series expansion.

rep = check_weak_convergence(inst)
print(rep.status, rep.notes)

# Symmetry operators follow: Q2/delta tends to the dilation of the limit.

print(contract_operator(inst, 2).status)

# A contraction to a finite parameter value: the derivative of a combination
# of source operators at the limit point is a symmetry of the target.

fin = get_spec("2.6b->2.6c")
print(check_parameter_derivative(fin, pick=fin.pick_values()[0]).status)

# Ansatzes contract as well.  Each power-diffusion reduction row tends to the
# exponential-diffusion row of the same subalgebra.

rep = contract_all_ansatzes()
for r in rep.details:
    print(r.subject, r.status)
