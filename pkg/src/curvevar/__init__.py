"""Curvature functionals on surfaces immersed in 3-D space forms.

Evaluates general energies of the form integral E(H, K) dS, their first
and second variations, and the p-Willmore sphere stability analysis, with
finite-difference deformation oracles for every closed-form expression.
"""

from .spaceform import Model, SpaceForm
from .surface import FdConfig, PatchDomain, Provenance, SurfaceSample, deform_normal, sample_callable
from .catalog import sample_builtin, default_domain
from .curvature import (
    CurvatureScalars,
    FundamentalForms,
    codazzi_residual,
    curvature_scalars,
    fundamental_forms,
    intrinsic_gauss_curvature,
)
from .calculus import (
    AmbientPolyField,
    ScalarField,
    area,
    curvature_field,
    export_field_csv,
    gradient,
    hessian,
    import_field_csv,
    integrate,
    laplace_beltrami,
    random_smooth_field,
)
from .densities import (
    BUILTIN_DENSITIES,
    EnergyDensity,
    builtin_density,
    density_from_expr,
)
from .variations import (
    VariationReport,
    el_residual,
    evolution_check,
    evolution_check_many,
    fd_variation_oracle,
    first_variation,
    functional_value,
    second_variation,
    volume_functional,
)
from .pwillmore import (
    PWillmoreSetting,
    StabilityReport,
    coercivity_bound,
    harmonic_field,
    harmonic_project,
    poincare_check,
    pwillmore_el_residual,
    random_span_field,
    sphere_index_form,
    sphere_spectrum,
    stability_report,
    volume_variations,
)
from .errors import (
    ConfigError,
    CurveVarError,
    DegenerateMetricError,
    GuardViolation,
    NotCriticalError,
    NotTangentError,
)

__all__ = [
    "Model",
    "SpaceForm",
    "FdConfig",
    "PatchDomain",
    "Provenance",
    "SurfaceSample",
    "deform_normal",
    "sample_callable",
    "sample_builtin",
    "default_domain",
    "CurvatureScalars",
    "FundamentalForms",
    "codazzi_residual",
    "curvature_scalars",
    "fundamental_forms",
    "intrinsic_gauss_curvature",
    "AmbientPolyField",
    "ScalarField",
    "area",
    "curvature_field",
    "export_field_csv",
    "gradient",
    "hessian",
    "import_field_csv",
    "integrate",
    "laplace_beltrami",
    "random_smooth_field",
    "BUILTIN_DENSITIES",
    "EnergyDensity",
    "builtin_density",
    "density_from_expr",
    "VariationReport",
    "el_residual",
    "evolution_check",
    "evolution_check_many",
    "fd_variation_oracle",
    "first_variation",
    "functional_value",
    "second_variation",
    "volume_functional",
    "PWillmoreSetting",
    "StabilityReport",
    "coercivity_bound",
    "harmonic_field",
    "harmonic_project",
    "poincare_check",
    "pwillmore_el_residual",
    "random_span_field",
    "sphere_index_form",
    "sphere_spectrum",
    "stability_report",
    "volume_variations",
    "CurveVarError",
    "ConfigError",
    "DegenerateMetricError",
    "GuardViolation",
    "NotCriticalError",
    "NotTangentError",
]
