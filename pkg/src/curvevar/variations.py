"""Functional values, first/second variations, Euler-Lagrange residuals,
and finite-difference deformation oracles.

The closed-form variation expressions are assembled from curvature scalars
and intrinsic derivatives of the variation field; the oracles recompute
the same quantities on actually-deformed surfaces and difference them, so
every formula is validated against the definition it encodes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .calculus import (
    ScalarField,
    TensorField02,
    bilinear,
    contract,
    curvature_field,
    grad_inner,
    gradient,
    h_squared,
    hessian,
    integrate,
    laplace_beltrami,
    metric_tensor,
    shape_tensor,
)
from .curvature import curvature_scalars, fundamental_forms
from .densities import EnergyDensity
from .errors import ConfigError, NotCriticalError
from .spaceform import Model
from .surface import FdConfig, SurfaceSample, deform_normal


@dataclass
class VariationReport:
    formula_value: float
    oracle_value: float
    abs_error: float
    rel_error: float
    fd_step: float
    convergence_order: float


def _report(formula: float, oracle: float, step: float, order: float) -> VariationReport:
    # relative to the larger of the two values, floored at unit scale so
    # identically-zero variations report their absolute discrepancy
    abs_err = abs(formula - oracle)
    denom = max(abs(formula), abs(oracle), 1.0)
    return VariationReport(
        formula_value=float(formula),
        oracle_value=float(oracle),
        abs_error=float(abs_err),
        rel_error=float(abs_err / denom),
        fd_step=float(step),
        convergence_order=float(order),
    )


def functional_value(s: SurfaceSample, E: EnergyDensity, allow_open: bool = False) -> float:
    """F = integral of E(H, K) dS."""
    cs = curvature_scalars(s)
    E.check_guard(cs.H, cs.K)
    return integrate(E.eval(cs.H, cs.K), s, allow_open=allow_open)


def first_variation(s: SurfaceSample, E: EnergyDensity, u: ScalarField, allow_open: bool = False) -> float:
    """Normal-deformation derivative of F in direction u, in closed form:

    integral of (E_H/2 + 2H E_K) Lap u
      + ((2H^2 - K + 2 k0) E_H + 2HK E_K - 2H E) u
      - E_K <h, Hess u> dS.
    """
    cs = curvature_scalars(s)
    E.check_guard(cs.H, cs.K)
    H, K, k0 = cs.H, cs.K, s.sf.k0
    Ev, EH, EK = E.eval(H, K), E.E_H(H, K), E.E_K(H, K)
    lap_u = laplace_beltrami(u, s).values
    h_hess_u = contract(shape_tensor(s), hessian(u, s), s).values
    integrand = (
        (0.5 * EH + 2.0 * H * EK) * lap_u
        + ((2.0 * H**2 - K + 2.0 * k0) * EH + 2.0 * H * K * EK - 2.0 * H * Ev) * u.values
        - EK * h_hess_u
    )
    return integrate(integrand, s, allow_open=allow_open)


def _composed_field(s: SurfaceSample, value, d1H, d1K, second: Optional[dict]) -> ScalarField:
    """Field G(H, K) on the surface with chart partials by the chain rule
    through the analytic partials of H and K when those are available."""
    Hf = curvature_field(s, "H")
    Kf = curvature_field(s, "K")
    cs = curvature_scalars(s)
    vals = value(cs.H, cs.K)
    if s.analytic_scalars is None or second is None:
        return ScalarField(vals, s)

    def impl(a, b):
        Ha, Ka = Hf.partial(a, b), Kf.partial(a, b)
        if a + b == 1:
            return d1H(cs.H, cs.K) * Ha + d1K(cs.H, cs.K) * Ka
        if a + b == 2:
            if (a, b) == (2, 0):
                e1 = e2 = (1, 0)
            elif (a, b) == (0, 2):
                e1 = e2 = (0, 1)
            else:
                e1, e2 = (1, 0), (0, 1)
            H1, K1 = Hf.partial(*e1), Kf.partial(*e1)
            H2, K2 = Hf.partial(*e2), Kf.partial(*e2)
            return (
                second["HH"](cs.H, cs.K) * H1 * H2
                + second["HK"](cs.H, cs.K) * (H1 * K2 + K1 * H2)
                + second["KK"](cs.H, cs.K) * K1 * K2
                + d1H(cs.H, cs.K) * Ha
                + d1K(cs.H, cs.K) * Ka
            )
        raise ConfigError("composed-field partials available to order 2 only")

    return ScalarField(vals, s, partial_impl=impl)


def el_residual(s: SurfaceSample, E: EnergyDensity) -> ScalarField:
    """Pointwise Euler-Lagrange residual of F:

    (Lap/2 + (2H^2 - K + 2 k0)) E_H + (div-tilde-grad + 2HK) E_K - 2H E,

    where the self-adjoint operator acts as 2H Lap w - <h, Hess w>. The
    residual vanishes identically exactly when the surface is critical
    among closed surfaces.
    """
    cs = curvature_scalars(s)
    E.check_guard(cs.H, cs.K)
    H, K, k0 = cs.H, cs.K, s.sf.k0
    third = E.third
    EH_field = _composed_field(
        s,
        E.E_H,
        E.E_HH,
        E.E_HK,
        None if third is None else {"HH": third["HHH"], "HK": third["HHK"], "KK": third["HKK"]},
    )
    EK_field = _composed_field(
        s,
        E.E_K,
        E.E_HK,
        E.E_KK,
        None if third is None else {"HH": third["HHK"], "HK": third["HKK"], "KK": third["KKK"]},
    )
    lap_EH = laplace_beltrami(EH_field, s).values
    lap_EK = laplace_beltrami(EK_field, s).values
    h_hess_EK = contract(shape_tensor(s), hessian(EK_field, s), s).values
    vals = (
        0.5 * lap_EH
        + (2.0 * H**2 - K + 2.0 * k0) * EH_field.values
        + 2.0 * H * lap_EK
        - h_hess_EK
        + 2.0 * H * K * EK_field.values
        - 2.0 * H * E.eval(H, K)
    )
    return ScalarField(vals, s)


def _criticality(s: SurfaceSample, E: EnergyDensity, tol: float):
    """Classify the immersion: returns (kind, multiplier) with kind one of
    'critical', 'constrained', 'not_critical'."""
    res = el_residual(s, E)
    cs = curvature_scalars(s)
    scale = 1.0 + np.max(np.abs(E.eval(cs.H, cs.K))) * (1.0 + 2.0 * np.max(np.abs(cs.H)))
    w = fundamental_forms(s).dS_weight
    mean = float(np.sum(res.values * w) / np.sum(w))
    if np.max(np.abs(res.values)) <= tol * scale:
        return "critical", 0.0
    if np.max(np.abs(res.values - mean)) <= tol * scale:
        return "constrained", mean
    return "not_critical", mean


def second_variation(
    s: SurfaceSample,
    E: EnergyDensity,
    u: ScalarField,
    allow_open: bool = False,
    force: bool = False,
    criticality_tol: float = 1e-5,
) -> float:
    """Second normal-deformation derivative of F at a critical immersion.

    At a volume-constrained critical immersion (pointwise EL residual equal
    to a nonzero constant) the expression is valid on variation fields with
    zero mean; this is checked. ``force=True`` evaluates the expression
    regardless, outside its stated validity.
    """
    cs = curvature_scalars(s)
    E.check_guard(cs.H, cs.K)
    if not force:
        kind, _ = _criticality(s, E, criticality_tol)
        if kind == "not_critical":
            raise NotCriticalError(
                "surface is not critical for this density; the second-variation "
                "formula only holds there (pass force=True to evaluate anyway)"
            )
        if kind == "constrained":
            mean_u = integrate(u, s, allow_open=allow_open) / integrate(
                np.ones(s.shape), s, allow_open=allow_open
            )
            if abs(mean_u) > 1e-8 * (1.0 + float(np.max(np.abs(u.values)))):
                raise NotCriticalError(
                    "surface is only volume-constrained critical; the variation "
                    "field must have zero mean (or pass force=True)"
                )

    H, K, k0 = cs.H, cs.K, s.sf.k0
    Ev = E.eval(H, K)
    EH, EK = E.E_H(H, K), E.E_K(H, K)
    EHH, EHK, EKK = E.E_HH(H, K), E.E_HK(H, K), E.E_KK(H, K)

    h_t = shape_tensor(s)
    h2_t = h_squared(s)
    hess_u = hessian(u, s)
    lap_u = laplace_beltrami(u, s).values
    h_hess_u = contract(h_t, hess_u, s).values
    h2_hess_u = contract(h2_t, hess_u, s).values
    hess_u_sq = contract(hess_u, hess_u, s).values
    h_gu_gu = bilinear(h_t, u, u, s)
    h2_gu_gu = bilinear(h2_t, u, u, s)
    grad_u_sq = grad_inner(u, u, s)
    Hf = curvature_field(s, "H")
    Kf = curvature_field(s, "K")
    gradH_gu = grad_inner(Hf, u, s)
    gradK_gu = grad_inner(Kf, u, s)
    uv = u.values

    w = 2.0 * H**2 - K + 2.0 * k0
    integrand = (
        (0.25 * EHH + 2.0 * H * EHK + 4.0 * H**2 * EKK + EK) * lap_u**2
        + EKK * h_hess_u**2
        - (EHK + 4.0 * H * EKK) * lap_u * h_hess_u
        + EK * (uv * gradK_gu - 3.0 * uv * h2_hess_u - 2.0 * h2_gu_gu - hess_u_sq)
        + (
            w * EHH
            + 2.0 * H * (4.0 * H**2 - K + 4.0 * k0) * EHK
            + 8.0 * H**2 * K * EKK
            - 2.0 * H * EH
            + (3.0 * k0 - K) * EK
            - Ev
        )
        * uv
        * lap_u
        + (
            w**2 * EHH
            + 4.0 * H * K * w * EHK
            + 4.0 * H**2 * K**2 * EKK
            - 2.0 * K * (K - 2.0 * k0) * EK
            - 2.0 * H * K * EH
            + 2.0 * (K - 2.0 * k0) * Ev
        )
        * uv**2
        + (2.0 * EH + 6.0 * H * EK - 2.0 * w * EHK - 4.0 * H * K * EKK) * uv * h_hess_u
        + (EH + 4.0 * H * EK) * h_gu_gu
        + EH * uv * gradH_gu
        - (2.0 * (K - k0) * EK + H * EH) * grad_u_sq
    )
    return integrate(integrand, s, allow_open=allow_open)


def volume_functional(s: SurfaceSample) -> float:
    """Signed flux volume (1/3) integral of <r, N> dS (Euclidean model).

    Its deformation derivatives are integral of u dS and of -2 H u^2 dS in
    the orientation carried by the sample, whatever that orientation is.
    """
    if s.sf.model is not Model.EUCLIDEAN:
        raise ConfigError("the flux volume functional is defined in the Euclidean model")
    flux = np.einsum("...i,...i->...", s.positions, fundamental_forms(s).N)
    return integrate(flux, s, allow_open=True) / 3.0


def _default_steps(s: SurfaceSample, u: ScalarField, order: int = 1) -> tuple[float, float]:
    # step relative to the smallest curvature radius and the field size;
    # the second difference divides by h^2, so it gets a smaller base step
    # to keep truncation below the target tolerances
    cs = curvature_scalars(s)
    kappa = max(np.max(np.abs(cs.kappa1)), np.max(np.abs(cs.kappa2)), 1e-12)
    umax = max(float(np.max(np.abs(u.values))), 1e-12)
    scale = 1.0 / (kappa * umax)
    base = 1e-2 if order == 1 else 5e-3
    return base * scale, 0.5 * base * scale


def fd_variation_oracle(
    s: SurfaceSample,
    E: EnergyDensity,
    u: ScalarField,
    order: int = 1,
    lagrange_multiplier: Optional[float] = None,
    h: Optional[float] = None,
    fd: FdConfig = FdConfig(),
    allow_open: bool = False,
    force: bool = False,
) -> VariationReport:
    """Difference quotient of F along the geodesic normal deformation of u,
    compared against the closed-form variation of the same order.

    For order 2 the differenced functional is the augmented F - lambda * V;
    the multiplier defaults to the (area-weighted) mean Euler-Lagrange
    residual, which is the value making a constrained-critical immersion
    stationary, and is zero at an unconstrained critical immersion. The
    formula side is augmented identically: the second variation of the
    volume, integral of -2 H u^2 dS, times lambda is subtracted, so both
    columns of the report describe the same augmented functional. (Along a
    symmetry direction such as a translation of the sphere the augmented
    value is zero while the plain closed-form expression is not; both are
    available, their difference being exactly lambda times the volume
    term.)
    """
    if order not in (1, 2):
        raise ConfigError("oracle order must be 1 or 2")
    h1, h2 = _default_steps(s, u, order) if h is None else (float(h), 0.5 * float(h))

    lam = 0.0
    if order == 2:
        if lagrange_multiplier is not None:
            lam = float(lagrange_multiplier)
        else:
            res = el_residual(s, E)
            w = fundamental_forms(s).dS_weight
            lam = float(np.sum(res.values * w) / np.sum(w))
            if abs(lam) < 1e-8 * (1.0 + abs(functional_value(s, E, allow_open=True))):
                lam = 0.0

    def G(t: float) -> float:
        st = s if t == 0.0 else deform_normal(s, u, t, fd)
        val = functional_value(st, E, allow_open=True)
        if lam != 0.0:
            val -= lam * volume_functional(st)
        return val

    if order == 1:
        formula = first_variation(s, E, u, allow_open=allow_open)
        d_h1 = (G(h1) - G(-h1)) / (2.0 * h1)
        d_h2 = (G(h2) - G(-h2)) / (2.0 * h2)
    else:
        formula = second_variation(s, E, u, allow_open=allow_open, force=force)
        if lam != 0.0:
            cs = curvature_scalars(s)
            formula -= lam * integrate(-2.0 * cs.H * u.values**2, s, allow_open=True)
        g0 = G(0.0)
        d_h1 = (G(h1) - 2.0 * g0 + G(-h1)) / h1**2
        d_h2 = (G(h2) - 2.0 * g0 + G(-h2)) / h2**2

    ratio = h1 / h2
    oracle = (ratio**2 * d_h2 - d_h1) / (ratio**2 - 1.0) if fd.richardson else d_h2
    e1, e2 = abs(d_h1 - formula), abs(d_h2 - formula)
    floor = 1e-11 * (1.0 + abs(formula))
    if e1 <= floor or e2 <= floor:
        conv = 2.0
    else:
        conv = math.log(e1 / e2) / math.log(ratio)
    return _report(formula, oracle, h1, conv)


_EVOLUTION_QUANTITIES = ("g", "g_inv", "dS", "2H", "K", "laplacian_f", "h_hess_f")


def _evolution_formula(s: SurfaceSample, u: ScalarField, f: Optional[ScalarField], quantity: str):
    ff = fundamental_forms(s)
    cs = curvature_scalars(s)
    H, K, k0 = cs.H, cs.K, s.sf.k0
    uv = u.values
    if quantity == "g":
        return -2.0 * uv[..., None, None] * ff.h
    if quantity == "g_inv":
        h_up = np.einsum("...ik,...jl,...kl->...ij", ff.g_inv, ff.g_inv, ff.h)
        return 2.0 * uv[..., None, None] * h_up
    if quantity == "dS":
        return -2.0 * H * uv * ff.dS_weight
    lap_u = laplace_beltrami(u, s).values
    if quantity == "2H":
        return lap_u + 2.0 * uv * (2.0 * H**2 - K + 2.0 * k0)
    if quantity == "K":
        h_hess_u = contract(shape_tensor(s), hessian(u, s), s).values
        return 2.0 * H * lap_u - h_hess_u + 2.0 * H * K * uv
    if f is None:
        raise ConfigError(f"quantity '{quantity}' needs the auxiliary field f")
    h_t = shape_tensor(s)
    h2_t = h_squared(s)
    hess_f = hessian(f, s)
    Hf = curvature_field(s, "H")
    Kf = curvature_field(s, "K")
    if quantity == "laplacian_f":
        return (
            2.0 * uv * contract(h_t, hess_f, s).values
            + 2.0 * uv * grad_inner(Hf, f, s)
            + 2.0 * bilinear(h_t, u, f, s)
            - 2.0 * H * grad_inner(u, f, s)
        )
    if quantity == "h_hess_f":
        lap_f = laplace_beltrami(f, s).values
        # <grad |h|^2, grad f> via |h|^2 = 4H^2 - 2(K - k0)
        grad_h2_f = 8.0 * H * grad_inner(Hf, f, s) - 2.0 * grad_inner(Kf, f, s)
        return (
            contract(hessian(u, s), hess_f, s).values
            + 3.0 * uv * contract(h2_t, hess_f, s).values
            + uv * k0 * lap_f
            + 2.0 * bilinear(h2_t, u, f, s)
            + 0.5 * uv * grad_h2_f
            - cs.h_norm_sq * grad_inner(u, f, s)
        )
    raise ConfigError(f"unknown evolution quantity '{quantity}' (have: {', '.join(_EVOLUTION_QUANTITIES)})")


def _evolution_measure(st: SurfaceSample, f: Optional[ScalarField], quantity: str):
    ff = fundamental_forms(st)
    cs = curvature_scalars(st)
    if quantity == "g":
        return ff.g
    if quantity == "g_inv":
        return ff.g_inv
    if quantity == "dS":
        return ff.dS_weight
    if quantity == "2H":
        return 2.0 * cs.H
    if quantity == "K":
        return cs.K
    ft = f.with_sample(st)
    if quantity == "laplacian_f":
        return laplace_beltrami(ft, st).values
    if quantity == "h_hess_f":
        return contract(shape_tensor(st), hessian(ft, st), st).values
    raise ConfigError(f"unknown evolution quantity '{quantity}'")


def evolution_check_many(
    s: SurfaceSample,
    u: ScalarField,
    f: Optional[ScalarField] = None,
    quantities: tuple = _EVOLUTION_QUANTITIES,
    h: Optional[float] = None,
    fd: FdConfig = FdConfig(),
) -> dict:
    """Evolution-equation checks for several quantities sharing the same
    four deformed samples; returns {quantity: VariationReport}."""
    for q in quantities:
        if q in ("laplacian_f", "h_hess_f") and f is None:
            raise ConfigError(f"quantity '{q}' needs the auxiliary field f")
        if q not in _EVOLUTION_QUANTITIES:
            raise ConfigError(f"unknown evolution quantity '{q}' (have: {', '.join(_EVOLUTION_QUANTITIES)})")
    h1, h2 = _default_steps(s, u) if h is None else (float(h), 0.5 * float(h))
    deformed = {t: deform_normal(s, u, t, fd) for t in (h1, -h1, h2, -h2)}
    ratio = h1 / h2
    out = {}
    for q in quantities:
        formula = _evolution_formula(s, u, f, q)
        d1 = (_evolution_measure(deformed[h1], f, q) - _evolution_measure(deformed[-h1], f, q)) / (2.0 * h1)
        d2 = (_evolution_measure(deformed[h2], f, q) - _evolution_measure(deformed[-h2], f, q)) / (2.0 * h2)
        oracle = (ratio**2 * d2 - d1) / (ratio**2 - 1.0) if fd.richardson else d2
        scale = float(np.max(np.abs(formula))) + float(np.max(np.abs(oracle))) + 1e-12
        e1 = float(np.max(np.abs(d1 - formula)))
        e2 = float(np.max(np.abs(d2 - formula)))
        floor = 1e-10 * scale
        conv = 2.0 if (e1 <= floor or e2 <= floor) else math.log(e1 / e2) / math.log(ratio)
        err = float(np.max(np.abs(oracle - formula)))
        out[q] = VariationReport(
            formula_value=float(np.max(np.abs(formula))),
            oracle_value=float(np.max(np.abs(oracle))),
            abs_error=err,
            rel_error=err / max(scale, 1e-300),
            fd_step=h1,
            convergence_order=conv,
        )
    return out


def evolution_check(
    s: SurfaceSample,
    u: ScalarField,
    f: Optional[ScalarField] = None,
    quantity: str = "2H",
    h: Optional[float] = None,
    fd: FdConfig = FdConfig(),
) -> VariationReport:
    """Per-node check of one evolution equation: centered finite difference
    of the quantity along the geodesic normal deformation versus its
    closed-form deformation derivative. Reports sup-norm errors.
    """
    return evolution_check_many(s, u, f, (quantity,), h, fd)[quantity]
