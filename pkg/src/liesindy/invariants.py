"""Joint differential-invariant catalogs for the built-in systems.

Catalog entries ship as data and are verified, not derived: at first load
every invariant is checked against every generator (symbolic annihilation
plus a sampled numeric residual) and the invariant set is checked for
functional independence through the rank of its Jacobian in the jet
coordinates.  A catalog that fails verification is a startup error.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .expr import (
    Const, DepVar, Expr, ExprError, IndepVar, JetSpace, denominators_in,
    dep_vars_in, evaluate_array, is_zero, parse, partial_derivative, simplify,
    to_string,
)
from .liealg import VectorField, check_invariant, prolong, _sample_points

__all__ = [
    "InvariantSet", "VerificationReport", "builtin_set", "builtin_systems",
    "truth_equation", "eliminate_translations", "verify_set", "CatalogError",
]

SYSTEMS = ("kdv", "ks", "burgers", "nkdv", "so2-demo")


class CatalogError(ExprError):
    pass


@dataclass
class InvariantSet:
    """Generators plus a functionally independent set of joint invariants.

    For evolution systems exactly one invariant carries the time derivative;
    it is the designated left-hand side of the discovered equation.  The
    demo set on the plane has no time coordinate and no LHS.
    """

    system: str
    space: JetSpace
    generators: list
    etas: list
    lhs_index: int | None
    params: dict
    den_guard: float = 1e-3

    def __post_init__(self):
        self.etas = [simplify(e) for e in self.etas]
        tname = self.space.time
        if tname is None:
            if self.lhs_index is not None:
                raise CatalogError("no time coordinate, so no LHS to designate")
            return
        carrying = [i for i, e in enumerate(self.etas)
                    if any(tname in dv.index for dv in dep_vars_in(e))]
        if len(carrying) != 1:
            raise CatalogError(
                f"exactly one invariant may contain a time derivative, "
                f"found {len(carrying)}")
        if self.lhs_index != carrying[0]:
            raise CatalogError("lhs_index must point at the u_t-bearing invariant")

    @property
    def lhs(self) -> Expr:
        if self.lhs_index is None:
            raise CatalogError(f"{self.system} has no designated LHS")
        return self.etas[self.lhs_index]

    def rhs_features(self):
        return [e for i, e in enumerate(self.etas) if i != self.lhs_index]

    def prolonged(self, n=None):
        n = self.space.order if n is None else n
        return [prolong(v, n) for v in self.generators]


def _evolution_space():
    return JetSpace(independent=("t", "x"), dependent=("u",), order=4,
                    evolution=True)


def _translation_generators(space):
    zero, one = Const(0.0), Const(1.0)
    return [
        VectorField(space, xi=(zero, one), phi=(zero,), name="x-shift"),
        VectorField(space, xi=(one, zero), phi=(zero,), name="t-shift"),
    ]


def _build(system):
    zero, one = Const(0.0), Const(1.0)
    if system in ("kdv", "ks", "burgers"):
        sp = _evolution_space()
        t = IndepVar("t")
        gens = _translation_generators(sp) + [
            VectorField(sp, xi=(zero, t), phi=(one,), name="galilean")]
        etas = [parse(s, sp) for s in
                ("u_t + u*u_x", "u_x", "u_xx", "u_xxx", "u_xxxx")]
        return InvariantSet(system, sp, gens, etas, lhs_index=0, params={})
    if system == "nkdv":
        sp = _evolution_space()
        gens = [
            VectorField(sp, xi=(zero, one), phi=(zero,), name="x-shift"),
            VectorField(sp, xi=(parse("exp(-t/t0)", sp), zero), phi=(zero,),
                        name="decaying-t-shift"),
            VectorField(sp, xi=(zero, parse("t0*exp(t/t0) - t0", sp)),
                        phi=(one,), name="galilean"),
        ]
        etas = [parse(s, sp) for s in
                ("exp(-t/t0)*u_t + u*u_x", "u_x", "u_xx", "u_xxx", "u_xxxx")]
        return InvariantSet("nkdv", sp, gens, etas, lhs_index=0,
                            params={"t0": 1.0})
    if system == "so2-demo":
        sp = JetSpace(independent=("x",), dependent=("u",), order=1,
                      evolution=False)
        x, u = IndepVar("x"), DepVar("u")
        gens = [VectorField(sp, xi=(-u,), phi=(x,), name="rotation")]
        # the radius invariant is stored squared to stay inside the
        # polynomial-exponential-quotient grammar
        etas = [parse("x^2 + u^2", sp), parse("(x*u_x - u)/(u*u_x + x)", sp)]
        return InvariantSet("so2-demo", sp, gens, etas, lhs_index=None,
                            params={}, den_guard=0.1)
    raise CatalogError(f"unknown system '{system}', expected one of {SYSTEMS}")


_TRUTH = {
    "kdv": "u_t + u*u_x + u_xxx",
    "ks": "u_t + u*u_x + u_xx + u_xxxx",
    "burgers": "u_t + u*u_x - nu*u_xx",
    "nkdv": "exp(-t/t0)*u_t + u*u_x + u_xxx",
}


def builtin_systems():
    return SYSTEMS


def truth_equation(system: str) -> Expr:
    """Governing equation F with F = 0, in jet coordinates."""
    try:
        return parse(_TRUTH[system], _evolution_space())
    except KeyError:
        raise CatalogError(f"no governing equation on file for '{system}'") from None


_cache: dict = {}


def builtin_set(system: str) -> InvariantSet:
    """Catalog entry for a built-in system, verified at first load."""
    key = system.strip().lower()
    if key not in _cache:
        s = _build(key)
        report = verify_set(s, samples=256, seed=20240501)
        if not report.passed:
            raise CatalogError(
                f"catalog verification failed for '{key}': {report.failures}")
        _cache[key] = s
    return _cache[key]


def eliminate_translations(generators, n: int):
    """Drop base coordinates consumed by pure translation generators.

    A generator whose order-n prolongation is exactly d/dx_i lets x_i be
    removed from the working coordinate list without losing any invariant
    information.  Returns (remaining coordinate names, leftover generators).
    """
    space = generators[0].space if generators else _evolution_space()
    removed = set()
    leftover = []
    for v in generators:
        idx = v.is_translation()
        if idx is not None:
            pv = prolong(v, n)
            if all(is_zero(c) for _, c in pv.coeffs):
                removed.add(space.independent[idx])
                continue
        leftover.append(v)
    coords = [c for c in space.coordinate_names() if c not in removed]
    return coords, leftover


@dataclass
class VerificationReport:
    system: str
    pair_reports: dict
    jacobian_ok_fraction: float
    jacobian_min_sv: float
    numeric_max: float
    passed: bool
    failures: list


def verify_set(s: InvariantSet, samples: int = 1000, seed: int = 0,
               numeric_tol: float = 1e-9, sv_tol: float = 1e-8,
               rank_fraction: float = 0.99) -> VerificationReport:
    """Full catalog verification; checks every pair and never short-circuits.

    Invariance: each eta must be annihilated symbolically by each prolonged
    generator, with the piecewise-evaluated numeric residual below
    numeric_tol at sampled jet points.  Independence: the Jacobian of the
    etas with respect to the jet coordinates must have smallest singular
    value above sv_tol on at least rank_fraction of samples.
    """
    failures = []
    pair_reports = {}
    pvs = s.prolonged()
    numeric_max = 0.0
    for gi, pv in enumerate(pvs):
        for ei, eta in enumerate(s.etas):
            rep = check_invariant(pv, eta, samples=samples,
                                  seed=(seed * 7919 + gi * 101 + ei),
                                  den_tol=s.den_guard, params=s.params)
            pair_reports[(gi, ei)] = rep
            numeric_max = max(numeric_max, rep.max_abs)
            gname = pv.base.name or f"generator {gi}"
            if not rep.symbolic_zero:
                failures.append(
                    f"{gname} does not annihilate eta[{ei}] symbolically: "
                    f"{to_string(rep.residual)}")
            if rep.max_abs >= numeric_tol:
                failures.append(
                    f"{gname} on eta[{ei}]: numeric residual {rep.max_abs:.3e}")
    # functional independence via Jacobian rank at sampled points
    coords = s.space.coordinates()
    names = s.space.coordinate_names()
    grads = [[partial_derivative(eta, c) for c in coords] for eta in s.etas]
    dens = []
    for row in grads:
        for g in row:
            dens.extend(denominators_in(g))
    cols, _ = _sample_points(names, dens, samples, seed + 33, (-2.0, 2.0),
                             s.den_guard, 50, s.params)
    jac = np.empty((samples, len(s.etas), len(coords)))
    for i, row in enumerate(grads):
        for j, g in enumerate(row):
            jac[:, i, j] = np.broadcast_to(evaluate_array(g, cols), (samples,))
    sv = np.linalg.svd(jac, compute_uv=False)
    min_sv = sv[:, -1]
    ok_fraction = float(np.mean(min_sv > sv_tol))
    if ok_fraction < rank_fraction:
        failures.append(
            f"Jacobian min singular value > {sv_tol:g} at only "
            f"{100 * ok_fraction:.1f}% of samples")
    return VerificationReport(
        system=s.system, pair_reports=pair_reports,
        jacobian_ok_fraction=ok_fraction,
        jacobian_min_sv=float(min_sv.min()), numeric_max=numeric_max,
        passed=not failures, failures=failures)
