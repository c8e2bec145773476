"""Prolongation and invariance machinery."""

import pytest

from liesindy.expr import (
    Const, DepVar, ExprError, IndepVar, JetSpace, is_zero, parse, simplify,
    to_string,
)
from liesindy.liealg import (
    OrderMismatchError, ProlongationError, SingularSampleError, VectorField,
    apply, apply_pieces, check_invariant, check_symmetry_criterion, prolong,
)

SP = JetSpace()
ZERO, ONE = Const(0.0), Const(1.0)


def P(s):
    return parse(s, SP)


def x_shift():
    return VectorField(SP, xi=(ZERO, ONE), phi=(ZERO,), name="x-shift")


def t_shift():
    return VectorField(SP, xi=(ONE, ZERO), phi=(ZERO,), name="t-shift")


def galilean():
    return VectorField(SP, xi=(ZERO, IndepVar("t")), phi=(ONE,))


# --- construction -----------------------------------------------------------


def test_component_counts_are_checked():
    with pytest.raises(ExprError):
        VectorField(SP, xi=(ONE,), phi=(ZERO,))
    with pytest.raises(ExprError):
        VectorField(SP, xi=(ZERO, ONE), phi=())


def test_components_must_be_point_functions():
    with pytest.raises(ExprError, match="base variables"):
        VectorField(SP, xi=(ZERO, P("u_x")), phi=(ZERO,))
    VectorField(SP, xi=(ZERO, P("u")), phi=(ZERO,))  # order 0 is fine


def test_is_translation():
    assert x_shift().is_translation() == 1
    assert t_shift().is_translation() == 0
    assert galilean().is_translation() is None
    two = VectorField(SP, xi=(ZERO, Const(2.0)), phi=(ZERO,))
    assert two.is_translation() is None


# --- prolongation fixtures ---------------------------------------------------


@pytest.mark.parametrize("v", [x_shift(), t_shift()])
def test_translations_prolong_to_themselves(v):
    pv = prolong(v, 4)
    assert all(is_zero(c) for _, c in pv.coeffs)


def test_galilean_prolongation_coefficients():
    pv = prolong(galilean(), 4)
    assert to_string(pv.coeff("u", ("t",))) == "-u_x"
    for j in [("x",), ("x", "x"), ("x", "x", "x"), ("x", "x", "x", "x")]:
        assert is_zero(pv.coeff("u", j))


def test_exponential_time_shift_prolongation():
    v = VectorField(SP, xi=(P("exp(-t/t0)"), ZERO), phi=(ZERO,))
    pv = prolong(v, 4)
    assert to_string(pv.coeff("u", ("t",))) == "exp(-t/t0)*u_t/t0"
    assert is_zero(pv.coeff("u", ("x",)))


def test_exponential_galilean_prolongation():
    v = VectorField(SP, xi=(ZERO, P("t0*exp(t/t0) - t0")), phi=(ONE,))
    pv = prolong(v, 4)
    assert to_string(pv.coeff("u", ("t",))) == "-exp(t/t0)*u_x"
    assert is_zero(pv.coeff("u", ("x", "x")))


def test_rotation_prolongation_on_the_plane():
    sp = JetSpace(independent=("x",), dependent=("u",), order=2,
                  evolution=False)
    v = VectorField(sp, xi=(-DepVar("u"),), phi=(IndepVar("x"),))
    pv = prolong(v, 2)
    assert to_string(pv.coeff("u", ("x",))) == "1 + u_x^2"
    assert to_string(pv.coeff("u", ("x", "x"))) == "3*u_x*u_xx"


def test_prolongation_order_bounds():
    with pytest.raises(ExprError):
        prolong(x_shift(), 0)
    with pytest.raises(ExprError):
        prolong(x_shift(), 5)


def test_truncation_consistency():
    full = prolong(galilean(), 4)
    for n in (1, 2, 3):
        part = prolong(galilean(), n)
        for (dep, j), c in part.coeffs:
            assert c == full.coeff(dep, j)


def test_evolution_chart_rejects_generators_needing_mixed_derivatives():
    # a space-dependent time shift leaves u_tx in the second-order
    # coefficient, which the u_t-plus-spatials chart cannot represent
    v = VectorField(SP, xi=(IndepVar("x"), ZERO), phi=(ZERO,))
    with pytest.raises(ProlongationError, match="u_tx"):
        prolong(v, 2)


# --- applying the prolonged action -------------------------------------------


def test_apply_annihilates_kdv_for_all_three_generators():
    f = P("u_t + u*u_x + u_xxx")
    for v in (x_shift(), t_shift(), galilean()):
        assert is_zero(apply(prolong(v, 4), f))


def test_apply_picks_up_explicit_coordinate_dependence():
    pv = prolong(t_shift(), 4)
    assert apply(pv, P("t*u")) == simplify(P("u"))
    pv = prolong(x_shift(), 4)
    assert apply(pv, P("x^2")) == simplify(P("2*x"))


def test_apply_is_linear():
    pv = prolong(galilean(), 4)
    f, g = P("u*u_x"), P("u_xx + t")
    lhs = apply(pv, simplify(f + 3 * g))
    rhs = simplify(apply(pv, f) + 3 * apply(pv, g))
    assert lhs == rhs


def test_apply_satisfies_the_product_rule():
    pv = prolong(galilean(), 4)
    for fs, gs in [("u", "u_x"), ("u_t", "u*u_x"), ("x", "u_xx")]:
        f, g = P(fs), P(gs)
        lhs = apply(pv, simplify(f * g))
        rhs = simplify(apply(pv, f) * g + f * apply(pv, g))
        assert lhs == rhs, (fs, gs)


def test_apply_rejects_out_of_order_expressions():
    pv = prolong(galilean(), 2)
    with pytest.raises(OrderMismatchError):
        apply(pv, P("u_xxx"))
    with pytest.raises(OrderMismatchError):
        apply_pieces(pv, P("u_xxxx"))


# --- numeric checks -----------------------------------------------------------


def test_check_invariant_accepts_a_true_invariant():
    pv = prolong(galilean(), 4)
    rep = check_invariant(pv, P("u_t + u*u_x"), samples=200, seed=5)
    assert rep.symbolic_zero and rep.passed
    assert rep.max_abs < 1e-9
    assert rep.samples == 200


def test_check_invariant_rejects_a_non_invariant():
    pv = prolong(galilean(), 4)
    rep = check_invariant(pv, P("u_t"), samples=50, seed=5)
    assert not rep.symbolic_zero
    assert to_string(rep.residual) == "-u_x"
    assert rep.max_abs > 1e-3


def test_check_invariant_is_deterministic():
    sp = JetSpace(independent=("x",), dependent=("u",), order=1,
                  evolution=False)
    v = VectorField(sp, xi=(-DepVar("u"),), phi=(IndepVar("x"),))
    eta = parse("(x*u_x - u)/(u*u_x + x)", sp)
    a = check_invariant(prolong(v, 1), eta, samples=300, seed=11, den_tol=0.1)
    b = check_invariant(prolong(v, 1), eta, samples=300, seed=11, den_tol=0.1)
    assert a.passed and a.max_abs < 1e-9
    assert (a.max_abs, a.resampled) == (b.max_abs, b.resampled)
    c = check_invariant(prolong(v, 1), eta, samples=300, seed=12, den_tol=0.1)
    assert a.max_abs != c.max_abs


def test_singular_sampling_gives_up_loudly():
    pv = prolong(galilean(), 4)
    with pytest.raises(SingularSampleError):
        check_invariant(pv, P("u_t/(u + x)"), samples=5, seed=0,
                        den_tol=10.0, max_resample=3)


def test_symmetry_criterion_on_and_off_manifold():
    f = P("u_t + u*u_x + u_xxx")
    rep = check_symmetry_criterion(prolong(galilean(), 4), f)
    assert rep.symbolic_zero and rep.max_abs_on_data is None
    bad = check_symmetry_criterion(prolong(galilean(), 4), P("u_t + u_xx"))
    assert not bad.symbolic_zero


def test_symmetry_criterion_evaluates_on_supplied_data():
    import numpy as np
    f = P("u_t + u*u_x + u_xxx")
    rng = np.random.default_rng(0)
    data = {n: rng.normal(size=40) for n in SP.coordinate_names()}
    rep = check_symmetry_criterion(prolong(galilean(), 4), f, data=data)
    assert rep.points == 40
    assert rep.max_abs_on_data < 1e-12
