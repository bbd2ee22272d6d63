"""Curvature energy densities E(H, K) with exact partial derivatives.

A density carries its value and the five partials E_H, E_K, E_HH, E_HK,
E_KK used by the variation formulas, plus an optional domain guard (for
example H > 0 for non-integer powers of the mean curvature).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
import sympy as sp

from .errors import ConfigError, GuardViolation

_H, _K = sp.symbols("H K", real=True)


@dataclass(frozen=True)
class EnergyDensity:
    name: str
    eval: Callable
    E_H: Callable
    E_K: Callable
    E_HH: Callable
    E_HK: Callable
    E_KK: Callable
    domain_guard: Optional[Callable] = None
    params: dict = field(default_factory=dict)
    # optional third partials ("HHH", "HHK", "HKK", "KKK"); when present the
    # Euler-Lagrange residual can differentiate composed fields analytically
    third: Optional[dict] = None

    def check_guard(self, H, K) -> None:
        if self.domain_guard is None:
            return
        ok = np.asarray(self.domain_guard(np.asarray(H), np.asarray(K)))
        if not np.all(ok):
            node = tuple(int(i) for i in np.unravel_index(np.argmin(ok), ok.shape))
            raise GuardViolation(
                f"density '{self.name}' is outside its domain at node {node} "
                f"(H={np.asarray(H)[node]:.6g})",
                node=node,
            )


def _scalarize(fn):
    def f(H, K):
        H = np.asarray(H, dtype=float)
        K = np.asarray(K, dtype=float)
        return np.broadcast_to(np.asarray(fn(H, K), dtype=float), np.broadcast(H, K).shape).copy()

    return f


def density_from_expr(expr, name: str, domain_guard=None, params: dict | None = None) -> EnergyDensity:
    """Build a density from a sympy expression in the symbols H and K."""
    expr = sp.sympify(expr)
    expr = expr.xreplace(
        {s: (_H if s.name == "H" else _K) for s in expr.free_symbols if s.name in ("H", "K")}
    )
    extra = [s for s in expr.free_symbols if s not in (_H, _K)]
    if extra:
        raise ConfigError(f"density expression has unknown symbols: {extra}")
    parts = {
        "eval": expr,
        "E_H": sp.diff(expr, _H),
        "E_K": sp.diff(expr, _K),
        "E_HH": sp.diff(expr, _H, 2),
        "E_HK": sp.diff(expr, _H, _K),
        "E_KK": sp.diff(expr, _K, 2),
    }
    fns = {k: _scalarize(sp.lambdify((_H, _K), e, modules="numpy")) for k, e in parts.items()}
    third = {
        key: _scalarize(sp.lambdify((_H, _K), sp.diff(expr, *args), modules="numpy"))
        for key, args in {
            "HHH": (_H, 3),
            "HHK": (_H, 2, _K, 1),
            "HKK": (_H, 1, _K, 2),
            "KKK": (_K, 3),
        }.items()
    }
    return EnergyDensity(name=name, domain_guard=domain_guard, params=dict(params or {}), third=third, **fns)


def willmore(k0: float = 0.0) -> EnergyDensity:
    return density_from_expr(_H**2 + k0, "willmore", params={"k0": k0})


def bending(k0: float = 0.0) -> EnergyDensity:
    return density_from_expr(_H**2 - _K + k0, "bending", params={"k0": k0})


def helfrich(kc: float = 1.0, c0: float = 0.0, kbar: float = 0.0) -> EnergyDensity:
    return density_from_expr(
        kc * (2 * _H + c0) ** 2 + kbar * _K, "helfrich", params={"kc": kc, "c0": c0, "kbar": kbar}
    )


def pwillmore(p: float) -> EnergyDensity:
    """H^p; exact integer powers for integer p, guard H > 0 otherwise."""
    if p < 1:
        raise ConfigError("pwillmore exponent must be >= 1")
    if float(p).is_integer():
        expr = _H ** int(p)
        guard = None
    else:
        expr = _H ** sp.Float(p)
        guard = lambda H, K: H > 0
    return density_from_expr(expr, "pwillmore", domain_guard=guard, params={"p": float(p)})


def ksquared() -> EnergyDensity:
    return density_from_expr(_K**2, "ksquared")


def area_density() -> EnergyDensity:
    return density_from_expr(sp.Integer(1), "area")


BUILTIN_DENSITIES = ("willmore", "bending", "helfrich", "pwillmore", "ksquared", "area")


def builtin_density(name: str, **params) -> EnergyDensity:
    if name == "willmore":
        return willmore(params.get("k0", 0.0))
    if name == "bending":
        return bending(params.get("k0", 0.0))
    if name == "helfrich":
        return helfrich(params.get("kc", 1.0), params.get("c0", 0.0), params.get("kbar", 0.0))
    if name == "pwillmore":
        if "p" not in params:
            raise ConfigError("pwillmore requires the exponent p")
        return pwillmore(params["p"])
    if name == "ksquared":
        return ksquared()
    if name == "area":
        return area_density()
    raise ConfigError(f"unknown density '{name}' (have: {', '.join(BUILTIN_DENSITIES)})")
