"""Prolong point generators and test the infinitesimal symmetry criterion."""

from liesindy.expr import DepVar, IndepVar, JetSpace, to_string
from liesindy.invariants import builtin_set, truth_equation
from liesindy.liealg import VectorField, check_symmetry_criterion, prolong

# classic textbook case: rotation in the (x, u) plane.  Its second
# prolongation acts on u_x like a curvature transport.
plane = JetSpace(("x",), ("u",), order=2, evolution=False)
rot = VectorField(plane, xi=(-DepVar("u"),), phi=(IndepVar("x"),),
                  name="rotation")
pr2 = prolong(rot, 2)
for (dep, jet), coeff in pr2.coeffs:
    label = dep + ("_" + "".join(jet) if jet else "")
    print(f"phi^{label:5s} = {to_string(coeff)}")

print()

# the catalog ships each system with its point symmetries; check that the
# prolonged generators annihilate the governing equation on its solution set
for system in ("kdv", "ks", "burgers", "nkdv"):
    f = truth_equation(system)
    for v in builtin_set(system).generators:
        rep = check_symmetry_criterion(prolong(v, 4), f)
        status = "symmetry" if rep.symbolic_zero else "NOT a symmetry"
        print(f"{system:8s} {v.name:16s} {status}")

# a non-symmetry for contrast: plain u-scaling does not preserve KdV
from liesindy.expr import ZERO

space = builtin_set("kdv").generators[0].space
scale = VectorField(space, xi=(ZERO, ZERO), phi=(DepVar("u"),),
                    name="u-scaling")
rep = check_symmetry_criterion(prolong(scale, 4), truth_equation("kdv"))
print(f"{'kdv':8s} {'u-scaling':16s} "
      f"{'symmetry' if rep.symbolic_zero else 'NOT a symmetry'}")
