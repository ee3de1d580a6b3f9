"""Fitting walkthrough: quadrature ML for the GL and projected GL,
direct ML for the projected normal, closed-form von Mises.

Every fitter returns a FitResult with the estimate, the maximized
loglikelihood, convergence metadata and wall-clock time.
"""

import numpy as np

from glfit import (
    GLParams,
    PGLParams,
    fit_gl,
    fit_pgl,
    fit_pn,
    fit_vm,
    gl_moments,
    sample_gl,
    sample_pgl,
)

rng = np.random.default_rng(2024)

print("=== Univariate GL(1, 1, 3, 2), n = 500 ===")
truth = GLParams.univariate(1.0, 1.0, 3.0, 2.0)
y = sample_gl(truth, 500, rng)
for method in ["gq_nm_h20", "gq_qn_h20", "direct_ml"]:
    fit = fit_gl(y, method=method)
    mean, cov = gl_moments(fit.params_hat)
    print(f"  {method:11s}: loglik {fit.loglik:9.2f}  converged={fit.converged} "
          f"({fit.termination_reason}, {fit.function_evals} evals, {fit.elapsed_seconds:.2f}s)  "
          f"mean {mean[0]:.2f} (true 7)  var {cov[0, 0]:.1f} (true 20)")

print("\n=== Bimodal projected GL, n = 500 ===")
truth_pgl = PGLParams([-np.sqrt(2.0), 0.0], np.sqrt(30.0), 4.0 / np.sqrt(30.0), 0.5)
angles = sample_pgl(truth_pgl, 500, rng)
for method in ["gq_nm_h20", "gq_qn_h20"]:
    fit = fit_pgl(angles, method=method)
    p = fit.params_hat
    print(f"  pgl {method:10s}: loglik {fit.loglik:8.2f}  alpha {p.alpha:.3f} (true 0.5)  "
          f"phi {p.phi:.2f}  rho {p.rho:.2f}")
fit_n = fit_pn(angles)
print(f"  pn  direct ml  : loglik {fit_n.loglik:8.2f}  (no shape parameter: flatter spike)")
fit_v = fit_vm(angles)
print(f"  vm  closed form: loglik {fit_v.loglik:8.2f}  (unimodal: cannot track both modes)")

print("\nThe three models rank PGL > PN > VM on this data, the same "
      "pattern the benchmark tables report.")
