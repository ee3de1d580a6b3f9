"""Circular distributions: projected generalized Laplace, projected
normal, and von Mises.

The projected GL (PGL) is the law of the angle of a centered-scatter
bivariate symmetric GL vector. Its density has no closed form; it is
evaluated either through the gamma Gauss rule applied to the conditional
projected-normal density (the fitting path) or by adaptive integration
over the mixing variable (the oracle path, ``pgl_logpdf_exact``).

The conditional projected-normal density uses the standardized term
``q = w' Sigma^{-1} theta / sqrt(v * w' Sigma^{-1} w)``; note the
mixing variance ``v`` multiplies (not divides) the quadratic form in the
square root, which is what the projection of N(theta, v*Sigma) requires
and what the normalization and inner-integral checks confirm.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import integrate
from scipy import special as sp

from . import specfun
from .gl import GLParams, sample_gl
from .quadrature import QuadratureRule

__all__ = [
    "PGLParams",
    "VMParams",
    "VMFit",
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
]

_LOG_2PI = float(np.log(2.0 * np.pi))
KAPPA_CAP = 1e4


@dataclass(frozen=True)
class PGLParams:
    """Projected-GL parameters (theta, phi, rho, alpha).

    The scatter matrix is constrained for identifiability to
    ``[[phi**2, rho*phi], [rho*phi, 1]]``, which is positive definite
    exactly when phi > 0 and |rho| < 1.
    """

    theta: np.ndarray
    phi: float
    rho: float
    alpha: float

    def __post_init__(self):
        theta = np.asarray(self.theta, dtype=float).reshape(-1)
        if theta.shape != (2,) or not np.all(np.isfinite(theta)):
            raise ValueError("theta must be a finite 2-vector")
        phi = float(self.phi)
        rho = float(self.rho)
        alpha = float(self.alpha)
        if not np.isfinite(phi) or phi <= 0.0:
            raise ValueError("phi must be a finite positive number")
        if not np.isfinite(rho) or abs(rho) >= 1.0:
            raise ValueError("rho must lie in (-1, 1)")
        if not np.isfinite(alpha) or alpha <= 0.0:
            raise ValueError("alpha must be a finite positive number")
        theta.setflags(write=False)
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "phi", phi)
        object.__setattr__(self, "rho", rho)
        object.__setattr__(self, "alpha", alpha)

    @property
    def sigma(self) -> np.ndarray:
        return np.array(
            [
                [self.phi * self.phi, self.rho * self.phi],
                [self.rho * self.phi, 1.0],
            ]
        )


@dataclass(frozen=True)
class VMParams:
    """Von Mises location (in (-pi, pi]) and concentration kappa >= 0."""

    location: float
    concentration: float

    def __post_init__(self):
        loc = wrap_angle(float(self.location))
        kappa = float(self.concentration)
        if not np.isfinite(kappa) or kappa < 0.0:
            raise ValueError("concentration must be finite and >= 0")
        object.__setattr__(self, "location", loc)
        object.__setattr__(self, "concentration", kappa)


@dataclass(frozen=True)
class VMFit:
    """Closed-form von Mises fit with its maximized loglikelihood.

    ``flag`` is None for a regular fit, "resultant_zero" when the mean
    resultant length vanishes (kappa = 0) and "kappa_capped" when the
    sample is so concentrated that kappa hits the cap.
    """

    params: VMParams
    loglik: float
    flag: str | None = None


def wrap_angle(omega):
    """Reduce angles to the support (-pi, pi]."""
    oa = np.asarray(omega, dtype=float)
    if not np.all(np.isfinite(oa)):
        raise ValueError("angles must be finite")
    out = np.mod(oa, 2.0 * np.pi)
    out = np.where(out > np.pi, out - 2.0 * np.pi, out)
    if np.isscalar(omega) or np.ndim(omega) == 0:
        return float(out)
    return out


def _sigma_inv_2x2(sigma: np.ndarray) -> tuple[np.ndarray, float]:
    sigma = np.asarray(sigma, dtype=float)
    if sigma.shape != (2, 2) or not np.all(np.isfinite(sigma)):
        raise ValueError("sigma must be a finite 2 x 2 matrix")
    if abs(sigma[0, 1] - sigma[1, 0]) > 1e-12 * max(1.0, float(np.max(np.abs(sigma)))):
        raise ValueError("sigma must be symmetric")
    det = sigma[0, 0] * sigma[1, 1] - sigma[0, 1] * sigma[1, 0]
    if sigma[0, 0] <= 0.0 or det <= 0.0:
        raise ValueError("sigma must be positive definite")
    inv = np.array(
        [
            [sigma[1, 1], -sigma[0, 1]],
            [-sigma[0, 1], sigma[0, 0]],
        ]
    ) / det
    return inv, float(det)


def _pn_log_matrix(omega: np.ndarray, theta: np.ndarray, sigma: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Log conditional PN densities on an (n angles) x (m mixing values)
    grid: the angle density of N(theta, v*Sigma)."""
    inv, det = _sigma_inv_2x2(sigma)
    theta = np.asarray(theta, dtype=float).reshape(2)
    w = np.stack([np.cos(omega), np.sin(omega)], axis=-1)  # (n, 2)
    a = np.einsum("ni,ij,nj->n", w, inv, w)  # w' Sigma^-1 w
    b = w @ (inv @ theta)  # w' Sigma^-1 theta
    c = float(theta @ inv @ theta)
    q = b[:, None] / np.sqrt(v[None, :] * a[:, None])
    return (
        -0.5 * c / v[None, :]
        - _LOG_2PI
        - np.log(a)[:, None]
        - 0.5 * np.log(det)
        + specfun.log_mills_bracket(q)
    )


def pn_conditional_logpdf(omega, theta, sigma, v: float):
    """Log-density at angle omega of the projection on the circle of a
    bivariate normal with mean theta and covariance v * sigma.

    Safe for extreme standardized values through the Mills-ratio bracket.
    """
    v = float(v)
    if not np.isfinite(v) or v <= 0.0:
        raise ValueError("v must be a finite positive number")
    oa = np.asarray(omega, dtype=float)
    if not np.all(np.isfinite(oa)):
        raise ValueError("omega must be finite")
    ov = np.atleast_1d(wrap_angle(oa))
    out = _pn_log_matrix(ov, theta, sigma, np.array([v]))[:, 0]
    out = out.reshape(np.shape(oa))
    if np.isscalar(omega) or np.ndim(omega) == 0:
        return float(out)
    return out


def pn_logpdf(omega, theta, sigma):
    """Projected normal log-density (the v = 1 conditional)."""
    return pn_conditional_logpdf(omega, theta, sigma, 1.0)


def pgl_logpdf(omega, params: PGLParams, rule: QuadratureRule):
    """Quadrature approximation of the projected-GL log-density.

    The rule must have been built with shape ``params.alpha``; the value
    is ``log sum_h f_PN(omega | v_h) w_h`` computed by log-sum-exp.
    """
    if rule.alpha != params.alpha:
        raise ValueError(
            f"quadrature rule was built for alpha={rule.alpha}, parameters have alpha={params.alpha}"
        )
    oa = np.asarray(omega, dtype=float)
    if not np.all(np.isfinite(oa)):
        raise ValueError("omega must be finite")
    ov = np.atleast_1d(wrap_angle(oa))
    mat = _pn_log_matrix(ov, params.theta, params.sigma, rule.nodes)
    with np.errstate(divide="ignore"):  # weights may underflow to 0 at high order
        out = sp.logsumexp(mat + np.log(rule.weights)[None, :], axis=1)
    out = out.reshape(np.shape(oa))
    if np.isscalar(omega) or np.ndim(omega) == 0:
        return float(out)
    return out


def pgl_logpdf_exact(omega, params: PGLParams, epsrel: float = 1e-10):
    """Oracle evaluation of the projected-GL log-density by adaptive
    integration of the conditional PN density against the gamma mixing
    density.

    The mixing variable is substituted as ``v = alpha * exp(t)`` to tame
    the gamma tail, and the integration runs over the gamma quantile
    range [1e-16, 1 - 1e-16]. For alpha <= 1/2 the density diverges
    (integrably) at the angle pointing along theta; do not evaluate the
    oracle exactly there.
    """
    alpha = params.alpha
    log_alpha = np.log(alpha)
    lgam = float(sp.gammaln(alpha))
    theta = params.theta
    sigma = params.sigma
    from scipy import stats

    v_lo = float(stats.gamma.ppf(1e-16, alpha))
    v_hi = float(stats.gamma.ppf(1.0 - 1e-16, alpha))
    v_lo = max(v_lo, 1e-290)
    t_lo = float(np.log(v_lo) - log_alpha)
    t_hi = float(np.log(v_hi) - log_alpha)

    oa = np.asarray(omega, dtype=float)
    ov = np.atleast_1d(wrap_angle(oa)).ravel()
    out = np.empty(ov.shape)
    for i, w in enumerate(ov):
        w_arr = np.array([w])

        def integrand(t):
            v = alpha * np.exp(t)
            log_fpn = _pn_log_matrix(w_arr, theta, sigma, np.array([v]))[0, 0]
            return np.exp(log_fpn + alpha * (log_alpha + t) - v - lgam)

        val, _ = integrate.quad(
            integrand, t_lo, t_hi, epsabs=1e-14, epsrel=epsrel, limit=300
        )
        out[i] = np.log(val)
    out = out.reshape(np.shape(oa))
    if np.isscalar(omega) or np.ndim(omega) == 0:
        return float(out)
    return out


def sample_pgl(params: PGLParams, n: int, rng) -> np.ndarray:
    """Draw n angles as atan2 of symmetric bivariate GL vectors.

    Returns values in (-pi, pi]; an exact draw at the origin (a
    probability-zero event) is redrawn. Identical seeds give identical
    samples.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    gen = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
    gl_params = GLParams(params.theta, params.sigma, [0.0, 0.0], params.alpha)
    draws = sample_gl(gl_params, n, gen)
    bad = (draws[:, 0] == 0.0) & (draws[:, 1] == 0.0)
    while np.any(bad):
        draws[bad] = sample_gl(gl_params, int(bad.sum()), gen)
        bad = (draws[:, 0] == 0.0) & (draws[:, 1] == 0.0)
    return wrap_angle(np.arctan2(draws[:, 1], draws[:, 0]))


# ----------------------------------------------------------------------
# Von Mises
# ----------------------------------------------------------------------

def vm_logpdf(omega, params: VMParams):
    """Von Mises log-density, kappa*cos(omega - loc) - log(2*pi*I0(kappa))."""
    oa = np.asarray(omega, dtype=float)
    if not np.all(np.isfinite(oa)):
        raise ValueError("omega must be finite")
    _, log_i0 = specfun.bessel_i_ratio_and_log_i0(params.concentration)
    out = params.concentration * np.cos(oa - params.location) - _LOG_2PI - log_i0
    if np.isscalar(omega) or np.ndim(omega) == 0:
        return float(out)
    return out


def _solve_concentration(rbar: float) -> float:
    # Rational initializer (Fisher) followed by Newton steps on
    # A(kappa) = I1/I0 = rbar; A'(kappa) = 1 - A/kappa - A^2.
    if rbar < 0.53:
        kappa = 2.0 * rbar + rbar**3 + 5.0 * rbar**5 / 6.0
    elif rbar < 0.85:
        kappa = -0.4 + 1.39 * rbar + 0.43 / (1.0 - rbar)
    else:
        kappa = 1.0 / (rbar**3 - 4.0 * rbar**2 + 3.0 * rbar)
    kappa = min(max(kappa, 1e-8), KAPPA_CAP)
    for _ in range(100):
        a, _ = specfun.bessel_i_ratio_and_log_i0(kappa)
        deriv = 1.0 - a / kappa - a * a
        if deriv <= 0.0:
            break
        step = (a - rbar) / deriv
        kappa_new = kappa - step
        if kappa_new <= 0.0:
            kappa_new = 0.5 * kappa
        if kappa_new > KAPPA_CAP:
            return KAPPA_CAP
        if abs(kappa_new - kappa) <= 1e-10 * (1.0 + kappa):
            return kappa_new
        kappa = kappa_new
    return kappa


def vm_fit(data) -> VMFit:
    """Closed-form maximum likelihood fit of the von Mises law.

    The location is the circular mean direction; the concentration
    solves I1(kappa)/I0(kappa) = mean resultant length by Newton
    iteration. Degenerate samples are flagged rather than failed: a zero
    resultant gives kappa = 0 and a fully concentrated sample caps kappa
    at 1e4.
    """
    angles = np.asarray(data, dtype=float).reshape(-1)
    if angles.shape[0] < 2:
        raise ValueError("need at least 2 angles")
    if not np.all(np.isfinite(angles)):
        raise ValueError("angles must be finite")
    cbar = float(np.mean(np.cos(angles)))
    sbar = float(np.mean(np.sin(angles)))
    rbar = float(np.hypot(cbar, sbar))
    location = float(np.arctan2(sbar, cbar))
    flag = None
    if rbar <= 1e-15:
        kappa = 0.0
        flag = "resultant_zero"
    elif rbar >= 1.0 - 1e-12:
        kappa = KAPPA_CAP
        flag = "kappa_capped"
    else:
        kappa = _solve_concentration(rbar)
        if kappa >= KAPPA_CAP:
            kappa = KAPPA_CAP
            flag = "kappa_capped"
    params = VMParams(location, kappa)
    loglik = float(np.sum(vm_logpdf(angles, params)))
    return VMFit(params=params, loglik=loglik, flag=flag)


# ----------------------------------------------------------------------
# Angle sample CSV round trip (single column of radians in (-pi, pi])
# ----------------------------------------------------------------------

def save_angles(angles: np.ndarray, path) -> None:
    """Write angles as a single-column CSV of radians in (-pi, pi]."""
    arr = wrap_angle(np.asarray(angles, dtype=float).reshape(-1))
    if arr.size == 0:
        raise ValueError("cannot save an empty angle sample")
    np.savetxt(path, arr[:, None], fmt="%.17g", delimiter=",")


def read_angle_column(path) -> np.ndarray:
    """Read a single-column CSV of raw values without wrapping (the CLI
    converts degree inputs before reduction)."""
    values = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            fields = line.split(",")
            if len(fields) != 1:
                raise ValueError(f"line {lineno}: expected a single column")
            try:
                values.append(float(fields[0]))
            except ValueError as err:
                raise ValueError(f"line {lineno}: {err}") from None
    if not values:
        raise ValueError("no angles found in file")
    return np.asarray(values, dtype=float)


def load_angles(path) -> np.ndarray:
    """Read a single-column CSV angle sample; angles are reduced to
    (-pi, pi] on load."""
    return wrap_angle(read_angle_column(path))
