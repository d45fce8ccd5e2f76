# Exact solutions and the transformations between them

from dcsym.catalog import (
    get_equation, get_solution, get_transform, map_solution, preimage_records, verify_solution,
)
from dcsym.expr import to_string
from dcsym.pde import solution_residual

# The fast diffusion equation u_t = (u^(-1) u_x)_x has a list of closed-form
# solutions.  Free constants are sampled from a small set of values.

for k in (1, 4, 8):
    sol = get_solution("fd-%d" % k)
    print(sol.sol_id, to_string(sol.expr), verify_solution(sol).status)

# A point transformation carries each of them to an equation with exponential
# coefficients.  Pulling back fd-4 gives a solution there.

T = get_transform("eq3-to-fast-diffusion")
image = map_solution(T, get_solution("fd-4").expr, "pull")
print(to_string(image))
print(solution_residual(get_equation("exp-fast-diffusion"), image, get_solution("efd-3").domain()).status)

# Two stored solutions differ from their printed transcriptions.  Both forms
# are kept; only the corrected one passes.

for sid in ("efd-1", "sl2-7"):
    print(sid, verify_solution(sid).status, verify_solution(sid, printed=True).status)

# The Cole-Hopf substitution v = 2 w_x / w is differential, so it only maps
# solutions one way.

ch = get_transform("cole-hopf")
for rec in preimage_records()[:2]:
    print(rec["image"], to_string(map_solution(ch, rec["expr"])))
