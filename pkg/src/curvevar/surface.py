"""Parametric surface patches on structured grids.

A SurfaceSample carries the partial derivatives (jets) of the immersion up
to total order 4 at every grid node, either exactly (catalog surfaces,
differentiated symbolically) or by high-order finite differences of a
position map.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum
from itertools import product

import numpy as np

from .errors import ConfigError, DegenerateMetricError
from .gridops import ChartDerivatives, fd_weights
from .spaceform import Model, SpaceForm

JET_ORDER = 4


@dataclass(frozen=True)
class PatchDomain:
    """Rectangular chart domain with grid counts and periodicity flags."""

    u_range: tuple[float, float]
    v_range: tuple[float, float]
    nu: int
    nv: int
    periodic_u: bool = False
    periodic_v: bool = False
    pole_offset: bool = False

    def __post_init__(self):
        if self.nu < 8 or self.nv < 8:
            raise ConfigError("grid counts must be at least 8")
        if self.periodic_v and self.pole_offset:
            raise ConfigError("pole_offset applies to a non-periodic v direction")

    @property
    def u_nodes(self) -> np.ndarray:
        a, b = self.u_range
        if self.periodic_u:
            return a + (b - a) * np.arange(self.nu) / self.nu
        return np.linspace(a, b, self.nu)

    @property
    def v_nodes(self) -> np.ndarray:
        a, b = self.v_range
        if self.periodic_v:
            return a + (b - a) * np.arange(self.nv) / self.nv
        if self.pole_offset:
            return a + (b - a) * (np.arange(self.nv) + 0.5) / self.nv
        return np.linspace(a, b, self.nv)

    def meshes(self) -> tuple[np.ndarray, np.ndarray]:
        return np.meshgrid(self.u_nodes, self.v_nodes, indexing="ij")

    @property
    def closed(self) -> bool:
        """True when quadrature over the patch covers a closed surface."""
        u_ok = self.periodic_u
        v_ok = self.periodic_v or self.pole_offset
        return u_ok and v_ok

    @property
    def extent(self) -> float:
        return max(self.u_range[1] - self.u_range[0], self.v_range[1] - self.v_range[0])


class Provenance(Enum):
    ANALYTIC = "analytic"
    NUMERIC_JETS = "numeric_jets"


@dataclass(frozen=True)
class FdConfig:
    """Stencil configuration for numeric jets (5-point + one Richardson level)."""

    base_step: float | None = None  # default: 1e-3 x domain extent
    richardson: bool = True

    def step_for(self, domain: PatchDomain) -> float:
        return self.base_step if self.base_step is not None else 1e-3 * domain.extent


MULTI_INDICES = [(a, b) for a in range(JET_ORDER + 1) for b in range(JET_ORDER + 1) if a + b <= JET_ORDER]


@dataclass
class SurfaceSample:
    """Grid of immersion jets plus evaluation hooks for off-grid points."""

    domain: PatchDomain
    sf: SpaceForm
    jets: dict[tuple[int, int], np.ndarray]
    orientation_sign: float = 1.0
    provenance: Provenance = Provenance.NUMERIC_JETS
    position_map: object = None  # callable (U, V) -> (..., dim)
    raw_normal_map: object = None  # callable (U, V) -> unoriented unit normal
    # lambdified chart functions for curvature scalars: name -> {(a, b): fn}
    analytic_scalars: dict = field(default_factory=dict)
    name: str = "surface"
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def positions(self) -> np.ndarray:
        return self.jets[(0, 0)]

    @property
    def ambient_dim(self) -> int:
        return self.positions.shape[-1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.positions.shape[:2]

    def jet_at(self, i: int, j: int) -> dict[tuple[int, int], np.ndarray]:
        """Pointwise jet (ImmersionJet view) at node (i, j)."""
        return {ab: arr[i, j] for ab, arr in self.jets.items()}

    def chart_ops(self) -> ChartDerivatives:
        if "chart_ops" not in self._cache:
            self._cache["chart_ops"] = ChartDerivatives(self.domain)
        return self._cache["chart_ops"]

    def flipped(self) -> "SurfaceSample":
        s = replace(self, orientation_sign=-self.orientation_sign, _cache={})
        return s

    def normal_at(self, U, V) -> np.ndarray:
        """Oriented unit normal at arbitrary chart points."""
        if self.raw_normal_map is not None:
            return self.orientation_sign * self.raw_normal_map(U, V)
        if self.position_map is None:
            raise ConfigError("sample has no position map; cannot evaluate off-grid normal")
        h = 1e-5 * self.domain.extent
        ru = _fd1(self.position_map, U, V, h, axis="u")
        rv = _fd1(self.position_map, U, V, h, axis="v")
        p = self.position_map(U, V)
        n = _eps_normal(self.sf, p, ru, rv)
        return self.orientation_sign * n

    def export_positions_csv(self, path) -> None:
        UU, VV = self.domain.meshes()
        pos = self.positions
        cols = [UU.ravel(), VV.ravel()] + [pos[..., k].ravel() for k in range(pos.shape[-1])]
        header = "u,v," + ",".join("xyzw"[: pos.shape[-1]])
        np.savetxt(path, np.column_stack(cols), delimiter=",", header=header, comments="")


def _fd1(f, U, V, h, axis):
    if axis == "u":
        return (8 * (f(U + h, V) - f(U - h, V)) - (f(U + 2 * h, V) - f(U - 2 * h, V))) / (12 * h)
    return (8 * (f(U, V + h) - f(U, V - h)) - (f(U, V + 2 * h) - f(U, V - 2 * h))) / (12 * h)


def _eps_normal(sf: SpaceForm, p, ru, rv) -> np.ndarray:
    """Unit normal tangent to the model quadric, via generalized cross product."""
    if sf.ambient_dim == 3:
        n = np.cross(ru, rv)
        norm = np.linalg.norm(n, axis=-1, keepdims=True)
        return n / norm
    # covector w_l = det(e_l, q, r_u, r_v); raise with the flat metric
    q = p  # quadric gradient direction for both embedded models
    w = np.empty_like(p)
    idx = np.arange(4)
    for l in range(4):
        cols = idx[idx != l]
        m = np.stack([q[..., cols], ru[..., cols], rv[..., cols]], axis=-2)
        w[..., l] = (-1.0) ** l * np.linalg.det(m)
    signs = sf.metric_signs
    n = w * signs  # raise index: n^l = G^{ll} w_l (diagonal metric)
    nn = np.einsum("...i,i,...i->...", n, signs, n)
    return n / np.sqrt(np.abs(nn))[..., None]


def induced_metric(sample: SurfaceSample) -> np.ndarray:
    """g_ij = <r_i, r_j> over the grid, shape (nu, nv, 2, 2)."""
    signs = sample.sf.metric_signs
    r_u, r_v = sample.jets[(1, 0)], sample.jets[(0, 1)]
    basis = np.stack([r_u, r_v], axis=-2)
    return np.einsum("...ik,k,...jk->...ij", basis, signs, basis)


def check_immersion(sample: SurfaceSample, where: str = "") -> None:
    g = induced_metric(sample)
    det = g[..., 0, 0] * g[..., 1, 1] - g[..., 0, 1] ** 2
    scale = np.max(np.abs(g)) ** 2 + 1e-300
    bad = det <= 1e-12 * scale
    if np.any(bad):
        i, j = np.unravel_index(np.argmax(bad), bad.shape)
        raise DegenerateMetricError(
            f"degenerate metric at node ({i}, {j}){' in ' + where if where else ''}",
            node=(int(i), int(j)),
        )


# -- numeric jets ----------------------------------------------------------


def _stencil_tables(h: float):
    offsets = np.array([-2.0, -1.0, 0.0, 1.0, 2.0]) * h
    return {m: fd_weights(offsets, m) for m in range(JET_ORDER + 1)}


def numeric_jets(f, domain: PatchDomain, fd: FdConfig = FdConfig()) -> dict:
    """All chart partials of a position map up to order 4 at the grid nodes.

    5-point centered stencils at steps h and h/2, combined by Richardson
    extrapolation at the leading error order of each multi-index.
    """
    UU, VV = domain.meshes()
    h = fd.step_for(domain)
    steps = [h, h / 2.0] if fd.richardson else [h]
    # shared evaluation cache over the union of stencil offsets
    offs = sorted({i * s for s in steps for i in range(-2, 3)})
    evals = {}
    for du in offs:
        for dv in offs:
            evals[(du, dv)] = np.asarray(f(UU + du, VV + dv), dtype=float)

    def raw(a, b, step):
        w = _stencil_tables(step)
        acc = 0.0
        iu = range(-2, 3) if a > 0 else [0]
        iv = range(-2, 3) if b > 0 else [0]
        for i in iu:
            wi = w[a][i + 2] if a > 0 else 1.0
            for j in iv:
                wj = w[b][j + 2] if b > 0 else 1.0
                acc = acc + wi * wj * evals[(i * step, j * step)]
        return acc

    jets = {}
    for a, b in MULTI_INDICES:
        if a + b == 0:
            jets[(a, b)] = evals[(0.0, 0.0)]
            continue
        d1 = raw(a, b, steps[0])
        if len(steps) == 1:
            jets[(a, b)] = d1
            continue
        d2 = raw(a, b, steps[1])
        p = min(4 if k <= 2 else 2 for k in (a, b) if k > 0)
        fac = 2.0**p
        jets[(a, b)] = (fac * d2 - d1) / (fac - 1.0)
    return jets


def sample_callable(
    f,
    domain: PatchDomain,
    sf: SpaceForm = SpaceForm.euclidean(),
    fd: FdConfig = FdConfig(),
    orientation_sign: float = 1.0,
    name: str = "callable",
) -> SurfaceSample:
    """Sample a user-supplied position map with finite-difference jets."""
    jets = numeric_jets(f, domain, fd)
    s = SurfaceSample(
        domain=domain,
        sf=sf,
        jets=jets,
        orientation_sign=orientation_sign,
        provenance=Provenance.NUMERIC_JETS,
        position_map=f,
        name=name,
    )
    check_immersion(s, where=name)
    return s


def deform_normal(s: SurfaceSample, u, t: float, fd: FdConfig = FdConfig()) -> SurfaceSample:
    """Geodesic normal deformation: each point moves distance t*u(x) along N.

    In the Euclidean model this is exactly r0 + t u N. The deformed sample
    gets numeric jets of the composed position map.
    """
    if s.position_map is None:
        raise ConfigError("deform_normal needs a sample with a position map")
    sf = s.sf
    u_eval = _field_evaluator(u, s)

    def moved(U, V):
        p = s.position_map(U, V)
        n = s.normal_at(U, V)
        return sf.geodesic_step(p, n, t * u_eval(U, V))

    jets = numeric_jets(moved, s.domain, fd)
    out = SurfaceSample(
        domain=s.domain,
        sf=sf,
        jets=jets,
        orientation_sign=s.orientation_sign,
        provenance=Provenance.NUMERIC_JETS,
        position_map=moved,
        name=f"{s.name}+deform",
    )
    check_immersion(out, where="deform_normal")
    return out


def _field_evaluator(u, s: SurfaceSample):
    """Off-grid evaluator for a scalar field: analytic when available,
    spline interpolation of grid values otherwise."""
    ev = getattr(u, "eval_fn", None)
    if ev is not None:
        return ev
    values = np.asarray(u.values if hasattr(u, "values") else u, dtype=float)
    return _spline_evaluator(values, s.domain)


def _spline_evaluator(values: np.ndarray, domain: PatchDomain):
    from scipy.interpolate import RectBivariateSpline

    un = domain.u_nodes.copy()
    vn = domain.v_nodes.copy()
    vals = values
    pad = 5
    if domain.periodic_u:
        lu = domain.u_range[1] - domain.u_range[0]
        un = np.concatenate([un[-pad:] - lu, un, un[:pad] + lu])
        vals = np.concatenate([vals[-pad:], vals, vals[:pad]], axis=0)
    if domain.periodic_v:
        lv = domain.v_range[1] - domain.v_range[0]
        vn = np.concatenate([vn[-pad:] - lv, vn, vn[:pad] + lv])
        vals = np.concatenate([vals[:, -pad:], vals, vals[:, :pad]], axis=1)
    spl = RectBivariateSpline(un, vn, vals, kx=min(5, len(un) - 1), ky=min(5, len(vn) - 1))

    def ev(U, V):
        return spl.ev(np.asarray(U, dtype=float), np.asarray(V, dtype=float))

    return ev
