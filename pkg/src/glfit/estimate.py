"""Maximum likelihood fitting of GL and circular models.

Contains the unconstrained parameter transforms (matrix-logarithm for
the GL scatter, log/Fisher-z for the projected family), the quadrature
negative loglikelihood objectives, two self-contained optimizers
(Nelder-Mead simplex and a BFGS-style quasi-Newton with finite
difference gradients), and the user-facing fitters.

Objectives never raise on a bad trial point: invalid parameters or
fully underflowed mixture sums return a large finite penalty so the
simplex can back out of bad regions, mirroring how general-purpose
optimizers are expected to recover.
"""

from __future__ import annotations

import re
import time
from dataclasses import dataclass, field
from functools import partial

import numpy as np
from scipy.linalg import solve_triangular
from scipy.special import logsumexp

from . import circular, specfun
from .circular import PGLParams, VMParams
from .gl import GLParams
from .quadrature import gamma_rule

__all__ = [
    "pack_gl",
    "unpack_gl",
    "pack_pgl",
    "unpack_pgl",
    "eta_length_gl",
    "gl_gq_negloglik",
    "pgl_gq_negloglik",
    "gl_direct_negloglik",
    "pn_negloglik",
    "OptimResult",
    "nelder_mead",
    "quasi_newton",
    "finite_difference_gradient",
    "FitResult",
    "fit_gl",
    "fit_pgl",
    "fit_pn",
    "fit_vm",
]

PENALTY = 1e10
_LOG_2PI = float(np.log(2.0 * np.pi))

# Termination reason codes.
REASON_SIMPLEX_DIAMETER = "simplex_diameter"
REASON_OBJECTIVE_SPREAD = "objective_spread"
REASON_GRADIENT = "gradient"
REASON_OBJECTIVE_CHANGE = "objective_change"
REASON_PARAM_CHANGE = "param_change"
REASON_MAXITER = "maxiter"
REASON_LINE_SEARCH = "line_search_failure"
REASON_BAD_START = "non_finite_initial"
REASON_CLOSED_FORM = "closed_form"


# ----------------------------------------------------------------------
# Unconstrained parameter transforms
# ----------------------------------------------------------------------

def eta_length_gl(d: int) -> int:
    """Length of the unconstrained GL parameter vector, d(d+5)/2 + 1."""
    return d * (d + 5) // 2 + 1


def _sym_matrix_log(sigma: np.ndarray) -> np.ndarray:
    vals, vecs = np.linalg.eigh(sigma)
    if np.any(vals <= 0.0):
        raise ValueError("sigma must be positive definite")
    return (vecs * np.log(vals)) @ vecs.T


def _sym_matrix_exp(m: np.ndarray) -> np.ndarray:
    vals, vecs = np.linalg.eigh(m)
    out = (vecs * np.exp(vals)) @ vecs.T
    return 0.5 * (out + out.T)


def pack_gl(params: GLParams) -> np.ndarray:
    """Map GL parameters to the unconstrained vector
    (theta, vech upper triangle of log(Sigma), mu, log alpha)."""
    d = params.dim
    logm = _sym_matrix_log(params.sigma)
    iu = np.triu_indices(d)
    return np.concatenate([params.theta, logm[iu], params.mu, [np.log(params.alpha)]])


def unpack_gl(eta: np.ndarray, d: int) -> GLParams:
    """Inverse of :func:`pack_gl`; always yields a valid GLParams."""
    eta = np.asarray(eta, dtype=float).reshape(-1)
    k = eta_length_gl(d)
    if eta.shape[0] != k:
        raise ValueError(f"eta must have length {k} for d={d}")
    m = d * (d + 1) // 2
    theta = eta[:d]
    logm = np.zeros((d, d))
    iu = np.triu_indices(d)
    logm[iu] = eta[d : d + m]
    logm = logm + np.triu(logm, 1).T
    with np.errstate(over="ignore"):
        sigma = _sym_matrix_exp(logm)
        alpha = float(np.exp(eta[-1]))
    mu = eta[d + m : 2 * d + m]
    return GLParams(theta, sigma, mu, alpha)


def pack_pgl(params: PGLParams) -> np.ndarray:
    """Map PGL parameters to (theta1, theta2, log phi, atanh rho, log alpha)."""
    return np.array(
        [
            params.theta[0],
            params.theta[1],
            np.log(params.phi),
            np.arctanh(params.rho),
            np.log(params.alpha),
        ]
    )


def unpack_pgl(eta: np.ndarray) -> PGLParams:
    """Inverse of :func:`pack_pgl`."""
    eta = np.asarray(eta, dtype=float).reshape(-1)
    if eta.shape[0] != 5:
        raise ValueError("eta must have length 5")
    with np.errstate(over="ignore"):
        phi = float(np.exp(eta[2]))
        alpha = float(np.exp(eta[4]))
    return PGLParams(
        theta=eta[:2],
        phi=phi,
        rho=float(np.tanh(eta[3])),
        alpha=alpha,
    )


def _guarded_unpack_gl(eta, d):
    try:
        params = unpack_gl(eta, d)
    except (ValueError, FloatingPointError, np.linalg.LinAlgError, OverflowError):
        return None
    if not 1e-8 < params.alpha < 1e8:
        return None
    return params


def _guarded_unpack_pgl(eta):
    try:
        params = unpack_pgl(eta)
    except (ValueError, FloatingPointError, OverflowError):
        return None
    if not 1e-8 < params.alpha < 1e8:
        return None
    if not 1e-8 < params.phi < 1e8 or abs(params.rho) >= 1.0 - 1e-15:
        return None
    return params


# ----------------------------------------------------------------------
# Objectives (negative loglikelihoods)
# ----------------------------------------------------------------------

def _as_matrix(data) -> np.ndarray:
    arr = np.asarray(data, dtype=float)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2 or arr.shape[0] < 1:
        raise ValueError("data must be a nonempty matrix of observations")
    if not np.all(np.isfinite(arr)):
        raise ValueError("data must be finite")
    return arr


def _finish_negloglik(per_obs: np.ndarray, diagnostics) -> float:
    bad = ~np.isfinite(per_obs)
    if np.any(bad):
        per_obs = np.where(bad, -PENALTY, per_obs)
        if diagnostics is not None:
            diagnostics["penalized_observations"] = (
                diagnostics.get("penalized_observations", 0) + int(bad.sum())
            )
    return float(-np.sum(per_obs))


def gl_gq_negloglik(eta, data, h: int = 20, diagnostics: dict | None = None) -> float:
    """Negative quadrature loglikelihood of the GL scale mixture.

    The gamma rule is rebuilt at the trial shape alpha = exp(eta[-1]);
    the per-observation node sums are computed by log-sum-exp.
    Observations whose every node term underflows contribute a penalty
    instead of aborting (counted in ``diagnostics`` when given).
    """
    y = _as_matrix(data)
    n, d = y.shape
    params = _guarded_unpack_gl(eta, d)
    if params is None:
        if diagnostics is not None:
            diagnostics["invalid_params"] = diagnostics.get("invalid_params", 0) + 1
        return n * PENALTY
    rule = gamma_rule(params.alpha, h)

    chol = np.linalg.cholesky(params.sigma)
    half_logdet = float(np.sum(np.log(np.diag(chol))))
    # Whitened residuals: ||z0 - v*m||^2 is the Mahalanobis form of
    # y - theta - v*mu, with one triangular solve for the whole batch.
    z0 = solve_triangular(chol, (y - params.theta).T, lower=True)  # (d, n)
    m = solve_triangular(chol, params.mu, lower=True)  # (d,)
    v = rule.nodes
    with np.errstate(over="ignore"):  # extreme trial points feed the penalty path
        diff = z0[:, :, None] - m[:, None, None] * v[None, None, :]
        q2 = np.sum(diff * diff, axis=0)  # (n, H)
        log_f = (
            -0.5 * d * (_LOG_2PI + np.log(v))[None, :]
            - half_logdet
            - 0.5 * q2 / v[None, :]
        )
    with np.errstate(divide="ignore"):
        per_obs = logsumexp(log_f + np.log(rule.weights)[None, :], axis=1)
    return _finish_negloglik(per_obs, diagnostics)


def pgl_gq_negloglik(eta, data, h: int = 20, diagnostics: dict | None = None) -> float:
    """Negative quadrature loglikelihood of the projected GL, with the
    conditional projected-normal density at each gamma node."""
    angles = np.asarray(data, dtype=float).reshape(-1)
    if angles.shape[0] < 1:
        raise ValueError("data must be a nonempty angle sample")
    if not np.all(np.isfinite(angles)):
        raise ValueError("data must be finite")
    n = angles.shape[0]
    params = _guarded_unpack_pgl(eta)
    if params is None:
        if diagnostics is not None:
            diagnostics["invalid_params"] = diagnostics.get("invalid_params", 0) + 1
        return n * PENALTY
    rule = gamma_rule(params.alpha, h)
    mat = circular._pn_log_matrix(angles, params.theta, params.sigma, rule.nodes)
    with np.errstate(divide="ignore"):
        per_obs = logsumexp(mat + np.log(rule.weights)[None, :], axis=1)
    return _finish_negloglik(per_obs, diagnostics)


def gl_direct_negloglik(eta, data, diagnostics: dict | None = None) -> float:
    """Negative analytic GL loglikelihood (the Bessel-form density).

    For alpha <= d/2 the density is unbounded at y == theta, so exact
    ties with the trial location are nudged off the singularity by a
    floor of 1e-12 on the Mahalanobis radius.
    """
    y = _as_matrix(data)
    n, d = y.shape
    params = _guarded_unpack_gl(eta, d)
    if params is None:
        if diagnostics is not None:
            diagnostics["invalid_params"] = diagnostics.get("invalid_params", 0) + 1
        return n * PENALTY
    chol = np.linalg.cholesky(params.sigma)
    half_logdet = float(np.sum(np.log(np.diag(chol))))
    sig_inv_mu = solve_triangular(
        chol.T, solve_triangular(chol, params.mu, lower=True), lower=False
    )
    p2 = 2.0 + float(params.mu @ sig_inv_mu)
    log_p = 0.5 * np.log(p2)
    alpha = params.alpha
    nu = alpha - 0.5 * d
    resid = y - params.theta
    z = solve_triangular(chol, resid.T, lower=True)
    q = np.sqrt(np.sum(z * z, axis=0))
    base = (
        np.log(2.0)
        + resid @ sig_inv_mu
        - 0.5 * d * _LOG_2PI
        - specfun.log_gamma(alpha)
        - half_logdet
    )
    if alpha > 0.5 * d:
        at_loc = q == 0.0
        per_obs = np.empty(n)
        if np.any(~at_loc):
            qr = q[~at_loc]
            per_obs[~at_loc] = (
                base[~at_loc]
                + nu * (np.log(qr) - log_p)
                + specfun.log_bessel_k(nu, np.exp(log_p) * qr)
            )
        if np.any(at_loc):
            limit = np.log(0.5) + specfun.log_gamma(nu) + nu * (np.log(2.0) - 2.0 * log_p)
            per_obs[at_loc] = base[at_loc] + limit
    else:
        q = np.maximum(q, 1e-12)
        per_obs = base + nu * (np.log(q) - log_p) + specfun.log_bessel_k(nu, np.exp(log_p) * q)
    return _finish_negloglik(per_obs, diagnostics)


def pn_negloglik(eta, data, diagnostics: dict | None = None) -> float:
    """Negative projected-normal loglikelihood over (theta, log phi,
    atanh rho) under the unit-second-diagonal scatter constraint."""
    angles = np.asarray(data, dtype=float).reshape(-1)
    n = angles.shape[0]
    eta = np.asarray(eta, dtype=float).reshape(-1)
    if eta.shape[0] != 4:
        raise ValueError("eta must have length 4")
    with np.errstate(over="ignore"):
        phi = float(np.exp(eta[2]))
    rho = float(np.tanh(eta[3]))
    if not (1e-8 < phi < 1e8) or abs(rho) >= 1.0 - 1e-15 or not np.all(np.isfinite(eta)):
        if diagnostics is not None:
            diagnostics["invalid_params"] = diagnostics.get("invalid_params", 0) + 1
        return n * PENALTY
    sigma = np.array([[phi * phi, rho * phi], [rho * phi, 1.0]])
    per_obs = circular._pn_log_matrix(angles, eta[:2], sigma, np.array([1.0]))[:, 0]
    return _finish_negloglik(per_obs, diagnostics)


# ----------------------------------------------------------------------
# Optimizers
# ----------------------------------------------------------------------

@dataclass
class OptimResult:
    """Minimizer output: point, value, counters, and why it stopped."""

    x: np.ndarray
    fun: float
    iterations: int
    function_evals: int
    converged: bool
    reason: str


class _CountedFunction:
    def __init__(self, fun):
        self._fun = fun
        self.calls = 0

    def __call__(self, x):
        self.calls += 1
        val = float(self._fun(x))
        if np.isnan(val):
            return np.inf
        return val


def _jittered_start(fun, x0, max_tries: int = 5):
    """Deterministic restarts for a non-finite starting value."""
    f0 = fun(x0)
    if np.isfinite(f0):
        return x0, f0
    signs = np.where(np.arange(x0.size) % 2 == 0, 1.0, -1.0)
    for attempt in range(1, max_tries + 1):
        x_try = x0 + 0.05 * attempt * signs * np.maximum(1.0, np.abs(x0))
        f_try = fun(x_try)
        if np.isfinite(f_try):
            return x_try, f_try
    return None, None


def nelder_mead(
    fun,
    x0,
    maxiter: int = 5000,
    diameter_tol: float = 1e-8,
    spread_tol: float = 1e-10,
    callback=None,
) -> OptimResult:
    """Nelder-Mead simplex minimizer.

    Reflection 1, expansion 2, contraction 0.5, shrink 0.5. Stops when
    the simplex diameter falls below ``diameter_tol``, the objective
    spread across vertices falls below ``spread_tol``, or the iteration
    cap is reached. The best-vertex value never increases; ``callback``
    (if given) receives it once per iteration.
    """
    counted = _CountedFunction(fun)
    x0 = np.asarray(x0, dtype=float).reshape(-1).copy()
    n = x0.shape[0]
    start, f_start = _jittered_start(counted, x0)
    if start is None:
        return OptimResult(x0, np.inf, 0, counted.calls, False, REASON_BAD_START)

    verts = [start]
    fvals = [f_start]
    for j in range(n):
        step = 0.1 * abs(start[j]) if start[j] != 0.0 else 0.1
        v = start.copy()
        v[j] += step
        verts.append(v)
        fvals.append(counted(v))
    verts = np.asarray(verts)
    fvals = np.asarray(fvals)

    reason = REASON_MAXITER
    niter = 0
    for niter in range(1, maxiter + 1):
        order = np.argsort(fvals, kind="stable")
        verts = verts[order]
        fvals = fvals[order]
        if callback is not None:
            callback(float(fvals[0]))

        diameter = float(np.max(np.abs(verts[1:] - verts[0])))
        finite = fvals[np.isfinite(fvals)]
        spread = float(finite.max() - finite.min()) if finite.size == n + 1 else np.inf
        if diameter < diameter_tol:
            reason = REASON_SIMPLEX_DIAMETER
            break
        if spread < spread_tol:
            reason = REASON_OBJECTIVE_SPREAD
            break

        centroid = np.mean(verts[:-1], axis=0)
        xr = centroid + (centroid - verts[-1])
        fr = counted(xr)
        if fr < fvals[0]:
            xe = centroid + 2.0 * (centroid - verts[-1])
            fe = counted(xe)
            if fe < fr:
                verts[-1], fvals[-1] = xe, fe
            else:
                verts[-1], fvals[-1] = xr, fr
        elif fr < fvals[-2]:
            verts[-1], fvals[-1] = xr, fr
        else:
            if fr < fvals[-1]:
                xc = centroid + 0.5 * (xr - centroid)
            else:
                xc = centroid + 0.5 * (verts[-1] - centroid)
            fc = counted(xc)
            if fc < min(fr, fvals[-1]):
                verts[-1], fvals[-1] = xc, fc
            else:
                for i in range(1, n + 1):
                    verts[i] = verts[0] + 0.5 * (verts[i] - verts[0])
                    fvals[i] = counted(verts[i])

    order = np.argsort(fvals, kind="stable")
    best = order[0]
    converged = reason in (REASON_SIMPLEX_DIAMETER, REASON_OBJECTIVE_SPREAD)
    return OptimResult(
        verts[best].copy(), float(fvals[best]), niter, counted.calls, converged, reason
    )


def finite_difference_gradient(fun, x, counted=None) -> np.ndarray:
    """Central-difference gradient with steps max(1e-6, 1e-7*|x_j|)."""
    f = counted if counted is not None else fun
    x = np.asarray(x, dtype=float)
    grad = np.empty_like(x)
    for j in range(x.size):
        h = max(1e-6, 1e-7 * abs(x[j]))
        xp = x.copy()
        xm = x.copy()
        xp[j] += h
        xm[j] -= h
        grad[j] = (f(xp) - f(xm)) / (2.0 * h)
    return grad


def quasi_newton(
    fun,
    x0,
    maxiter: int = 5000,
    grad_tol: float = 1e-6,
    obj_tol: float = 1e-10,
    step_tol: float = 1e-10,
    auto_scale: bool = True,
) -> OptimResult:
    """BFGS-style quasi-Newton minimizer with numerical gradients.

    Gradients are central differences; the line search backtracks under
    the Armijo condition and then refines the step by one quadratic
    interpolation (exact on quadratic objectives). With ``auto_scale``,
    the inverse Hessian is rescaled by the first measured curvature
    (s'y / y'y), which makes the method far less sensitive to the
    relative scaling of the parameters.

    Distinct stop reasons: "gradient" (gradient norm below tol),
    "objective_change" / "param_change" (relative progress below tol),
    "maxiter", and "line_search_failure" (not converged).
    """
    counted = _CountedFunction(fun)
    x0 = np.asarray(x0, dtype=float).reshape(-1).copy()
    n = x0.shape[0]
    x, f = _jittered_start(counted, x0)
    if x is None:
        return OptimResult(x0, np.inf, 0, counted.calls, False, REASON_BAD_START)

    g = finite_difference_gradient(None, x, counted)
    h_inv = np.eye(n)
    scaled = not auto_scale
    reason = REASON_MAXITER
    converged = False
    niter = 0

    for niter in range(1, maxiter + 1):
        if np.max(np.abs(g)) < grad_tol:
            reason, converged = REASON_GRADIENT, True
            break
        p = -h_inv @ g
        slope = float(g @ p)
        if not np.isfinite(slope) or slope >= 0.0:
            h_inv = np.eye(n)
            p = -g
            slope = float(g @ p)
            if slope >= 0.0:
                reason, converged = REASON_GRADIENT, True
                break

        # Armijo backtracking, then one quadratic interpolation refine.
        t = 1.0
        f_new = counted(x + t * p)
        backtracks = 0
        while not (f_new <= f + 1e-4 * t * slope) and backtracks < 50:
            t *= 0.5
            f_new = counted(x + t * p)
            backtracks += 1
        if not (f_new <= f + 1e-4 * t * slope):
            reason, converged = REASON_LINE_SEARCH, False
            break
        denom = 2.0 * (f_new - f - slope * t)
        if denom > 0.0:
            t_star = -slope * t * t / denom
            if 0.0 < t_star <= 10.0 * t:
                f_star = counted(x + t_star * p)
                if f_star < f_new:
                    t, f_new = t_star, f_star

        x_new = x + t * p
        g_new = finite_difference_gradient(None, x_new, counted)
        s = x_new - x
        yv = g_new - g
        sy = float(s @ yv)
        if not scaled and sy > 0.0:
            h_inv *= sy / float(yv @ yv)
            scaled = True
        if sy > 1e-10 * float(np.linalg.norm(s) * np.linalg.norm(yv)):
            rho = 1.0 / sy
            outer_sy = np.outer(s, yv)
            h_inv = (
                (np.eye(n) - rho * outer_sy) @ h_inv @ (np.eye(n) - rho * outer_sy.T)
                + rho * np.outer(s, s)
            )

        obj_small = abs(f - f_new) <= obj_tol * (abs(f) + obj_tol)
        step_small = np.max(np.abs(s)) <= step_tol * (np.max(np.abs(x)) + step_tol)
        x, f, g = x_new, f_new, g_new
        if obj_small:
            reason, converged = REASON_OBJECTIVE_CHANGE, True
            break
        if step_small:
            reason, converged = REASON_PARAM_CHANGE, True
            break

    return OptimResult(x.copy(), float(f), niter, counted.calls, converged, reason)


# ----------------------------------------------------------------------
# Fitters
# ----------------------------------------------------------------------

@dataclass
class FitResult:
    """A completed fit: estimates, loglikelihood and run metadata."""

    eta_hat: np.ndarray
    params_hat: object
    loglik: float
    converged: bool
    termination_reason: str
    iterations: int
    function_evals: int
    elapsed_seconds: float
    method: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        """Flat JSON-compatible summary of the fit."""
        out = {
            "method": self.method.get("name"),
            "h": self.method.get("h"),
            "loglik": self.loglik,
            "converged": self.converged,
            "reason": self.termination_reason,
            "iterations": self.iterations,
            "fevals": self.function_evals,
            "elapsed_seconds": self.elapsed_seconds,
            "eta": [float(v) for v in np.asarray(self.eta_hat).reshape(-1)],
        }
        p = self.params_hat
        if isinstance(p, GLParams):
            out.update(
                theta=[float(v) for v in p.theta],
                sigma=[float(v) for v in p.sigma.reshape(-1)],
                mu=[float(v) for v in p.mu],
                alpha=p.alpha,
            )
        elif isinstance(p, PGLParams):
            out.update(
                theta=[float(v) for v in p.theta],
                phi=p.phi,
                rho=p.rho,
                alpha=p.alpha,
            )
        elif isinstance(p, VMParams):
            out.update(location=p.location, kappa=p.concentration)
        elif isinstance(p, dict):
            out.update(p)
        return out


_METHOD_RE = re.compile(r"^gq_(nm|bfgs|qn)_h(\d+)$")


def _parse_gl_method(method: str):
    if method == "direct_ml":
        return ("direct", "nm", None)
    m = _METHOD_RE.match(method)
    if m:
        return ("gq", m.group(1), int(m.group(2)))
    raise ValueError(f"unknown GL fitting method: {method!r}")


def _parse_pgl_method(method: str):
    m = _METHOD_RE.match(method)
    if m and m.group(1) in ("nm", "qn", "bfgs"):
        return (m.group(1), int(m.group(2)))
    raise ValueError(f"unknown PGL fitting method: {method!r}")


def _spd_floor(mat: np.ndarray, floor: float = 1e-6) -> np.ndarray:
    vals, vecs = np.linalg.eigh(mat)
    vals = np.maximum(vals, floor)
    return (vecs * vals) @ vecs.T


def initial_eta_gl(data: np.ndarray) -> np.ndarray:
    """Moment-matching start: theta = componentwise median, mu = mean -
    median, alpha = 1, Sigma = sample covariance minus mu mu^T floored
    to positive definite."""
    y = _as_matrix(data)
    n, d = y.shape
    theta0 = np.median(y, axis=0)
    mu0 = np.mean(y, axis=0) - theta0
    cov = np.cov(y.T, ddof=1).reshape(d, d)
    top = float(np.max(np.linalg.eigvalsh(cov)))
    if not np.isfinite(top) or top < 1e-12:
        raise ValueError("degenerate sample: covariance is numerically singular")
    sigma0 = _spd_floor(cov - np.outer(mu0, mu0))
    return pack_gl(GLParams(theta0, sigma0, mu0, 1.0))


def initial_eta_pgl(data: np.ndarray) -> np.ndarray:
    """Start from the unit vector of the circular mean direction with
    phi = 1, rho = 0, alpha = 1."""
    angles = np.asarray(data, dtype=float).reshape(-1)
    mean_dir = np.arctan2(np.mean(np.sin(angles)), np.mean(np.cos(angles)))
    theta0 = np.array([np.cos(mean_dir), np.sin(mean_dir)])
    return pack_pgl(PGLParams(theta0, 1.0, 0.0, 1.0))


def _run_optimizer(objective, eta0, optimizer: str, maxiter: int) -> tuple[OptimResult, float]:
    t0 = time.perf_counter()
    if optimizer == "nm":
        res = nelder_mead(objective, eta0, maxiter=maxiter)
    elif optimizer == "bfgs":
        res = quasi_newton(objective, eta0, maxiter=maxiter, auto_scale=False)
    elif optimizer == "qn":
        res = quasi_newton(objective, eta0, maxiter=maxiter, auto_scale=True)
    else:
        raise ValueError(f"unknown optimizer: {optimizer!r}")
    elapsed = time.perf_counter() - t0
    return res, elapsed


def _build_fit_result(res, elapsed, unpacker, method_info) -> FitResult:
    loglik = -res.fun
    converged = bool(res.converged and np.isfinite(loglik) and res.fun < 0.5 * PENALTY)
    params = unpacker(res.x)
    return FitResult(
        eta_hat=res.x,
        params_hat=params,
        loglik=float(loglik),
        converged=converged,
        termination_reason=res.reason,
        iterations=res.iterations,
        function_evals=res.function_evals,
        elapsed_seconds=float(elapsed),
        method=method_info,
    )


def fit_gl(data, method: str = "gq_qn_h20", maxiter: int = 5000, eta0=None) -> FitResult:
    """Fit the d-dimensional GL law to an observation matrix.

    Methods: ``gq_nm_h20``, ``gq_nm_h30``, ``gq_bfgs_h20``, ``gq_qn_h20``
    (any ``gq_{nm,bfgs,qn}_h<H>`` is accepted), or ``direct_ml`` which
    optimizes the analytic Bessel-form loglikelihood with the simplex.
    """
    y = _as_matrix(data)
    n, d = y.shape
    k = eta_length_gl(d)
    if n < k + 1:
        raise ValueError(f"need at least {k + 1} observations for d={d}")
    kind, optimizer, h = _parse_gl_method(method)
    if eta0 is None:
        eta0 = initial_eta_gl(y)
    if kind == "gq":
        objective = partial(gl_gq_negloglik, data=y, h=h)
    else:
        objective = partial(gl_direct_negloglik, data=y)
    res, elapsed = _run_optimizer(objective, eta0, optimizer, maxiter)
    info = {"name": method, "objective": kind, "optimizer": optimizer, "h": h}
    return _build_fit_result(res, elapsed, lambda e: _guarded_unpack_gl(e, d), info)


def fit_pgl(data, method: str = "gq_qn_h20", maxiter: int = 5000, eta0=None) -> FitResult:
    """Fit the projected GL to an angle sample via the gamma Gauss rule."""
    angles = np.asarray(data, dtype=float).reshape(-1)
    if angles.shape[0] < 6:
        raise ValueError("need at least 6 angles")
    optimizer, h = _parse_pgl_method(method)
    if eta0 is None:
        eta0 = initial_eta_pgl(angles)
    objective = partial(pgl_gq_negloglik, data=angles, h=h)
    res, elapsed = _run_optimizer(objective, eta0, optimizer, maxiter)
    info = {"name": method, "objective": "pgl_gq", "optimizer": optimizer, "h": h}
    return _build_fit_result(res, elapsed, _guarded_unpack_pgl, info)


def fit_pn(data, maxiter: int = 5000, eta0=None) -> FitResult:
    """Fit the projected normal (unit-second-diagonal scatter) by direct
    maximum likelihood with the quasi-Newton optimizer."""
    angles = np.asarray(data, dtype=float).reshape(-1)
    if angles.shape[0] < 5:
        raise ValueError("need at least 5 angles")
    if eta0 is None:
        eta0 = initial_eta_pgl(angles)[:4]
    objective = partial(pn_negloglik, data=angles)
    res, elapsed = _run_optimizer(objective, eta0, "qn", maxiter)
    info = {"name": "pn", "objective": "pn_direct", "optimizer": "qn", "h": None}

    def unpacker(eta):
        phi = float(np.exp(eta[2]))
        rho = float(np.tanh(eta[3]))
        return {
            "theta": [float(eta[0]), float(eta[1])],
            "phi": phi,
            "rho": rho,
        }

    return _build_fit_result(res, elapsed, unpacker, info)


def fit_vm(data) -> FitResult:
    """Closed-form von Mises fit wrapped in the common result type."""
    t0 = time.perf_counter()
    vm = circular.vm_fit(data)
    elapsed = time.perf_counter() - t0
    reason = vm.flag if vm.flag is not None else REASON_CLOSED_FORM
    eta = np.array([vm.params.location, vm.params.concentration])
    return FitResult(
        eta_hat=eta,
        params_hat=vm.params,
        loglik=vm.loglik,
        converged=True,
        termination_reason=reason,
        iterations=0,
        function_evals=0,
        elapsed_seconds=float(elapsed),
        method={"name": "vm", "objective": "vm", "optimizer": "closed_form", "h": None},
    )
