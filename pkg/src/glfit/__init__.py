"""Generalized Laplace distributions, their projection on the circle,
and quadrature-based maximum likelihood fitting."""

from .circular import (
    PGLParams,
    VMFit,
    VMParams,
    load_angles,
    pgl_logpdf,
    pgl_logpdf_exact,
    pn_conditional_logpdf,
    pn_logpdf,
    sample_pgl,
    save_angles,
    vm_fit,
    vm_logpdf,
    wrap_angle,
)
from .estimate import (
    FitResult,
    OptimResult,
    fit_gl,
    fit_pgl,
    fit_pn,
    fit_vm,
    gl_direct_negloglik,
    gl_gq_negloglik,
    nelder_mead,
    pack_gl,
    pack_pgl,
    pgl_gq_negloglik,
    pn_negloglik,
    quasi_newton,
    unpack_gl,
    unpack_pgl,
)
from .gl import (
    GLParams,
    gl_moments,
    load_observations,
    logpdf_al,
    logpdf_gl_multi,
    logpdf_gl_uni,
    logpdf_laplace,
    radial_logpdf,
    sample_gl,
    save_observations,
)
from .quadrature import QuadratureRule, gamma_rule, mixture_expectation
from .simharness import (
    MetricsTable,
    ReplicationRecord,
    Scenario,
    builtin_scenarios,
    emit_report,
    load_replications,
    run_scenario,
    run_scenarios,
    summarize,
)

__version__ = "0.1.0"

__all__ = [
    "GLParams",
    "PGLParams",
    "VMParams",
    "VMFit",
    "QuadratureRule",
    "FitResult",
    "OptimResult",
    "Scenario",
    "ReplicationRecord",
    "MetricsTable",
    "gamma_rule",
    "mixture_expectation",
    "logpdf_laplace",
    "logpdf_al",
    "logpdf_gl_uni",
    "logpdf_gl_multi",
    "gl_moments",
    "sample_gl",
    "radial_logpdf",
    "save_observations",
    "load_observations",
    "wrap_angle",
    "pn_conditional_logpdf",
    "pn_logpdf",
    "pgl_logpdf",
    "pgl_logpdf_exact",
    "sample_pgl",
    "vm_logpdf",
    "vm_fit",
    "save_angles",
    "load_angles",
    "pack_gl",
    "unpack_gl",
    "pack_pgl",
    "unpack_pgl",
    "gl_gq_negloglik",
    "pgl_gq_negloglik",
    "gl_direct_negloglik",
    "pn_negloglik",
    "nelder_mead",
    "quasi_newton",
    "fit_gl",
    "fit_pgl",
    "fit_pn",
    "fit_vm",
    "builtin_scenarios",
    "run_scenario",
    "run_scenarios",
    "summarize",
    "emit_report",
    "load_replications",
]
