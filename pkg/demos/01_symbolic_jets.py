"""Expression trees on a jet space: parse, differentiate, evaluate."""

import numpy as np

from liesindy.expr import (
    DepVar, IndepVar, JetSpace, evaluate_array, parse, simplify, to_string,
    total_derivative,
)

space = JetSpace(("t", "x"), ("u",), order=4)

f = parse("u_t + u*u_x + u_xxx", space)
print("F          =", to_string(f))

# total x-derivative promotes every jet coordinate one spatial order
print("D_x F      =", to_string(simplify(total_derivative(f, "x"))))

g = parse("exp(-t/t0)*u_t + u*u_x", space)
print("D_t G      =", to_string(simplify(total_derivative(g, "t"))))

# the same trees evaluate on numpy arrays through a name -> array binding
rng = np.random.default_rng(0)
binding = {name: rng.normal(size=5)
           for name in ("t", "x", "u", "u_t", "u_x", "u_xxx")}
vals = evaluate_array(f, binding)
check = binding["u_t"] + binding["u"] * binding["u_x"] + binding["u_xxx"]
print("eval gap   =", np.max(np.abs(vals - check)))

zero = simplify(parse("u*u_x - u_x*u", space))
print("simplified =", to_string(zero))

print("vars       =", to_string(DepVar("u", ("x", "x"))),
      to_string(IndepVar("t")))
