# Lie symmetries of diffusion-convection equations
#
# An equation of the class is given by its five elements f, g, h, A, B.
# With nothing set we get the linear heat equation u_t = u_xx.

from dcsym.catalog import get_case, verify_case, verify_printed_errata
from dcsym.lie import VectorField, check_symmetry, commutator
from dcsym.pde import DCEquation, lhs_residual

heat = DCEquation()
print(lhs_residual(heat))

# The Galilei boost 2t d_x - x u d_u is a symmetry; a report carries the
# largest residual seen over the sampled jet points.

boost = VectorField.parse("0", "2*t", "-x*u")
print(check_symmetry(heat, boost))

# A field that is not a symmetry fails with a witness point we can inspect.

bad = check_symmetry(heat, VectorField.parse("t", "0", "0"))
print(bad.status, bad.witness)

# Brackets close on the algebra: [d_t, projective] is four times the
# dilation 2t d_t + x d_x, minus 2u d_u.

proj = VectorField.parse("4*t^2", "4*t*x", "-(x^2 + 2*t)*u")
print(commutator(VectorField.parse("1", "0", "0"), proj))

# Rows of the classification tables are stored with their parameters.
# Each row is checked at every stored pick.

eq, basis = get_case("3.13")
for Q in basis:
    print(Q)
print(verify_case("3.13").status)

# Some generators are stored in corrected form.  The printed form is kept and
# fails, which is how the correction is justified.

print(verify_case("2.7e").notes)
print(verify_printed_errata("2.7e").status)
