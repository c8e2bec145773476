"""Lie point symmetry generators, prolongation, and invariance checks.

A point generator acts on the base coordinates only; its prolongation extends
the action to derivative coordinates through the standard recursion built on
total derivatives: the coefficient attached to u_J is

    phi_J = D_J(phi - sum_i xi_i u_i) + sum_i xi_i u_{J,i}

All order-(|J|+1) variables introduced by D_J must cancel against the trailing
sum; a surviving out-of-chart variable is an error, not something to drop.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .expr import (
    Add, Const, DepVar, Expr, ExprError, IndepVar, JetSpace,
    denominators_in, dep_vars_in, evaluate_array, is_zero,
    partial_derivative, simplify, to_string, total_derivative, _key,
)

__all__ = [
    "VectorField", "ProlongedVectorField", "prolong", "apply",
    "apply_pieces", "check_invariant", "check_symmetry_criterion",
    "InvarianceReport", "CriterionReport", "ProlongationError",
    "OrderMismatchError", "SingularSampleError",
]


class ProlongationError(ExprError):
    """A prolongation coefficient left the configured jet space."""


class OrderMismatchError(ExprError):
    """An expression references derivatives above the prolongation order."""


class SingularSampleError(ExprError):
    """Could not draw enough non-singular sample points within the retry cap."""


def _base_vars_only(e, space):
    for dv in dep_vars_in(e):
        if dv.order > 0:
            return False
    return True


@dataclass(frozen=True)
class VectorField:
    """Point generator sum_i xi_i d/dx_i + sum_a phi_a d/du_a."""

    space: JetSpace
    xi: tuple
    phi: tuple
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "xi", tuple(simplify(e) for e in self.xi))
        object.__setattr__(self, "phi", tuple(simplify(e) for e in self.phi))
        if len(self.xi) != len(self.space.independent):
            raise ExprError("one xi component per independent variable")
        if len(self.phi) != len(self.space.dependent):
            raise ExprError("one phi component per dependent variable")
        for e in self.xi + self.phi:
            if not _base_vars_only(e, self.space):
                raise ExprError(
                    f"point generator components may depend on base variables "
                    f"only, got {to_string(e)}")

    def is_translation(self):
        """Index of x_i if this is exactly d/dx_i, else None."""
        if any(not is_zero(p) for p in self.phi):
            return None
        hit = None
        for i, e in enumerate(self.xi):
            if is_zero(e):
                continue
            if e == Const(1.0) and hit is None:
                hit = i
            else:
                return None
        return hit


@dataclass(frozen=True)
class ProlongedVectorField:
    base: VectorField
    order: int
    coeffs: tuple  # ((dep_name, multi_index), Expr) pairs, deterministic order

    def coeff(self, dep: str, index: tuple) -> Expr:
        for (d, j), e in self.coeffs:
            if d == dep and j == tuple(sorted(index)):
                return e
        raise KeyError((dep, index))

    @property
    def space(self):
        return self.base.space


def prolong(v: VectorField, n: int) -> ProlongedVectorField:
    """Prolong a point generator to jet order n.

    Raises ProlongationError if any resulting coefficient references a
    variable outside the configured jet space (this happens for generators
    whose prolongation genuinely needs mixed derivatives the evolution chart
    excludes).
    """
    sp = v.space
    if n < 1 or n > sp.order:
        raise ExprError(f"prolongation order {n} outside space order {sp.order}")
    cap = n + 1
    allowed = {dv for dv in _chart_vars(sp, n)}
    coeffs = []
    for alpha, dep in enumerate(sp.dependent):
        q = v.phi[alpha]
        for i, iname in enumerate(sp.independent):
            q = q - v.xi[i] * DepVar(dep, (iname,))
        q = simplify(q)
        dq = {(): q}  # D_J(q) cache, built along sorted-prefix chains
        for J in sp.multi_indices():
            if not J or len(J) > n:
                continue
            parent, last = J[:-1], J[-1]
            dq[J] = total_derivative(dq[parent], last, cap=cap)
            term = dq[J]
            for i, iname in enumerate(sp.independent):
                term = term + v.xi[i] * DepVar(dep, J + (iname,))
            term = simplify(term)
            for dv in sorted(dep_vars_in(term), key=_key):
                if dv not in allowed:
                    raise ProlongationError(
                        f"coefficient for {DepVar(dep, J).display()} references "
                        f"{dv.display()}, outside the order-{n} jet chart")
            coeffs.append(((dep, J), term))
    return ProlongedVectorField(base=v, order=n, coeffs=tuple(coeffs))


def _chart_vars(sp, n):
    out = set()
    for dep in sp.dependent:
        for J in sp.multi_indices():
            if len(J) <= n:
                out.add(DepVar(dep, J))
    return out


def apply_pieces(pv: ProlongedVectorField, e: Expr):
    """The summands of the prolonged action on e, each simplified separately.

    Summing their simplified forms symbolically gives apply(); evaluating
    them separately and summing in floating point probes the same identity
    numerically without benefiting from symbolic cancellation.
    """
    sp = pv.space
    limit = pv.order
    for dv in dep_vars_in(e):
        if dv.order > limit or not sp.contains(dv):
            raise OrderMismatchError(
                f"{dv.display()} exceeds prolongation order {limit}")
    pieces = []
    for i, iname in enumerate(sp.independent):
        p = simplify(pv.base.xi[i] * partial_derivative(e, IndepVar(iname)))
        if not is_zero(p):
            pieces.append(p)
    for alpha, dep in enumerate(sp.dependent):
        p = simplify(pv.base.phi[alpha] * partial_derivative(e, DepVar(dep, ())))
        if not is_zero(p):
            pieces.append(p)
    for (dep, J), coeff in pv.coeffs:
        p = simplify(coeff * partial_derivative(e, DepVar(dep, J)))
        if not is_zero(p):
            pieces.append(p)
    return pieces


def apply(pv: ProlongedVectorField, e: Expr) -> Expr:
    """Directional derivative of e along the prolonged generator."""
    pieces = apply_pieces(pv, e)
    if not pieces:
        return Const(0.0)
    return simplify(Add(tuple(pieces)))


@dataclass(frozen=True)
class InvarianceReport:
    symbolic_zero: bool
    max_abs: float
    samples: int
    resampled: int
    residual: Expr

    @property
    def passed(self):
        return self.symbolic_zero


@dataclass(frozen=True)
class CriterionReport:
    symbolic_zero: bool
    residual: Expr
    max_abs_on_data: float | None
    points: int


def _sample_points(names, dens, samples, seed, box, den_tol, max_resample,
                   params):
    """Per-point seeded uniform draws, redrawn while any guard denominator
    is within den_tol of zero.  Deterministic regardless of batch layout."""
    lo, hi = box
    cols = {n: np.empty(samples) for n in names}
    resampled = 0
    for idx in range(samples):
        rng = np.random.default_rng((int(seed), idx))
        for attempt in range(max_resample + 1):
            draw = rng.uniform(lo, hi, len(names))
            point = dict(zip(names, draw))
            if params:
                point.update(params)
            ok = True
            for d in dens:
                if abs(float(evaluate_array(d, point))) < den_tol:
                    ok = False
                    break
            if ok:
                break
            resampled += 1
        else:
            raise SingularSampleError(
                f"point {idx}: {max_resample} redraws all hit a singular "
                f"denominator")
        for n, val in zip(names, draw):
            cols[n][idx] = val
    if params:
        for k, v in params.items():
            cols[k] = float(v)
    return cols, resampled


def check_invariant(pv: ProlongedVectorField, eta: Expr, samples: int = 1000,
                    seed: int = 0, box=(-2.0, 2.0), den_tol: float = 1e-3,
                    max_resample: int = 50, params=None) -> InvarianceReport:
    """Symbolic and numeric test that eta is annihilated by the generator.

    The numeric path evaluates each summand of the prolonged action
    separately and adds them in floating point, so it measures true residual
    cancellation at random jet points instead of evaluating a pre-cancelled
    zero.
    """
    pieces = apply_pieces(pv, eta)
    residual = simplify(Add(tuple(pieces))) if pieces else Const(0.0)
    names = pv.space.coordinate_names()
    dens = []
    for p in [eta] + pieces:
        dens.extend(denominators_in(p))
    cols, resampled = _sample_points(names, dens, samples, seed, box, den_tol,
                                     max_resample, params)
    total = np.zeros(samples)
    for p in pieces:
        total = total + evaluate_array(p, cols)
    max_abs = float(np.max(np.abs(total))) if samples else 0.0
    return InvarianceReport(symbolic_zero=is_zero(residual), max_abs=max_abs,
                            samples=samples, resampled=resampled,
                            residual=residual)


def check_symmetry_criterion(pv: ProlongedVectorField, f: Expr, data=None,
                             params=None) -> CriterionReport:
    """Infinitesimal symmetry criterion for a candidate equation F = 0.

    Reports whether the prolonged action annihilates F symbolically; when
    `data` provides jet-coordinate arrays (a JetGrid binding or a plain dict)
    the max |residual| over those on-manifold points is reported as well.
    """
    pieces = apply_pieces(pv, f)
    residual = simplify(Add(tuple(pieces))) if pieces else Const(0.0)
    max_abs = None
    points = 0
    if data is not None:
        binding = data.binding() if hasattr(data, "binding") else dict(data)
        if params:
            binding = {**binding, **params}
        sizes = [np.asarray(v).size for v in binding.values()
                 if np.asarray(v).ndim > 0]
        points = max(sizes) if sizes else 1
        total = np.zeros(points)
        for p in pieces:
            total = total + evaluate_array(p, binding)
        max_abs = float(np.max(np.abs(total))) if points else 0.0
    return CriterionReport(symbolic_zero=is_zero(residual), residual=residual,
                           max_abs_on_data=max_abs, points=points)
