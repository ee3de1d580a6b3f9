"""Laplace / asymmetric Laplace / generalized Laplace distributions.

Densities (always assembled in log domain), closed-form moments, gamma
scale-mixture sampling, and the radial law of the polar representation
of the elliptically symmetric case. Works in any dimension d >= 1; the
univariate functions take the classical scale parameterization, the
multivariate ones a full covariance-like matrix.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

from . import specfun

__all__ = [
    "GLParams",
    "logpdf_laplace",
    "logpdf_al",
    "logpdf_gl_uni",
    "logpdf_gl_multi",
    "gl_moments",
    "sample_gl",
    "radial_logpdf",
    "save_observations",
    "load_observations",
]

_LOG_2PI = float(np.log(2.0 * np.pi))
_SYM_TOL = 1e-12


@dataclass(frozen=True)
class GLParams:
    """Parameters (theta, sigma, mu, alpha) of a d-dimensional GL law.

    ``sigma`` is the symmetric positive-definite d x d scatter matrix;
    in one dimension it holds the squared scale. ``alpha`` is the gamma
    mixing shape: alpha = 1 recovers the (asymmetric) Laplace, large
    alpha approaches a Gaussian.
    """

    theta: np.ndarray
    sigma: np.ndarray
    mu: np.ndarray
    alpha: float

    def __post_init__(self):
        theta = np.atleast_1d(np.asarray(self.theta, dtype=float))
        sigma = np.atleast_2d(np.asarray(self.sigma, dtype=float))
        mu = np.atleast_1d(np.asarray(self.mu, dtype=float))
        d = theta.shape[0]
        if theta.ndim != 1 or mu.ndim != 1 or mu.shape[0] != d:
            raise ValueError("theta and mu must be vectors of the same length")
        if sigma.shape != (d, d):
            raise ValueError("sigma must be a d x d matrix")
        if not (np.all(np.isfinite(theta)) and np.all(np.isfinite(sigma)) and np.all(np.isfinite(mu))):
            raise ValueError("parameters must be finite")
        scale = max(1.0, float(np.max(np.abs(sigma))))
        if np.max(np.abs(sigma - sigma.T)) > _SYM_TOL * scale:
            raise ValueError("sigma must be symmetric")
        sigma = 0.5 * (sigma + sigma.T)
        try:
            np.linalg.cholesky(sigma)
        except np.linalg.LinAlgError as err:
            raise ValueError("sigma must be positive definite") from err
        alpha = float(self.alpha)
        if not np.isfinite(alpha) or alpha <= 0.0:
            raise ValueError("alpha must be a finite positive number")
        theta.setflags(write=False)
        sigma.setflags(write=False)
        mu.setflags(write=False)
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "sigma", sigma)
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "alpha", alpha)

    @property
    def dim(self) -> int:
        return self.theta.shape[0]

    @classmethod
    def univariate(cls, theta: float, sigma: float, mu: float, alpha: float) -> "GLParams":
        """Build the d=1 law from the classical (theta, sigma, mu, alpha)
        scale parameterization, i.e. Sigma = [[sigma**2]]."""
        sigma = float(sigma)
        if not np.isfinite(sigma) or sigma <= 0.0:
            raise ValueError("sigma must be a finite positive number")
        return cls([theta], [[sigma * sigma]], [mu], alpha)


def _maybe_scalar(out, ref):
    if np.isscalar(ref) or np.ndim(ref) == 0:
        return float(out)
    return out


def logpdf_laplace(y, theta: float, sigma: float):
    """Log-density of the classical Laplace law with location theta and
    scale sigma (variance sigma**2)."""
    sigma = float(sigma)
    if not np.isfinite(sigma) or sigma <= 0.0:
        raise ValueError("sigma must be a finite positive number")
    ya = np.asarray(y, dtype=float)
    out = -np.log(np.sqrt(2.0) * sigma) - (np.sqrt(2.0) / sigma) * np.abs(ya - theta)
    return _maybe_scalar(out, y)


def logpdf_al(y, theta: float, sigma: float, mu: float):
    """Log-density of the asymmetric Laplace law.

    ``mu`` is the asymmetry parameter; mu = 0 reduces to the symmetric
    Laplace. The two exponential rates differ on either side of theta.
    """
    sigma = float(sigma)
    if not np.isfinite(sigma) or sigma <= 0.0:
        raise ValueError("sigma must be a finite positive number")
    mu = float(mu)
    ya = np.asarray(y, dtype=float)
    root = np.sqrt(2.0 * sigma * sigma + mu * mu)
    const = -np.log(np.sqrt(2.0 + (mu / sigma) ** 2) * sigma)
    rate_up = (root - mu) / (sigma * sigma)
    rate_down = (root + mu) / (sigma * sigma)
    dev = np.abs(ya - theta)
    out = const + np.where(ya >= theta, -rate_up * dev, -rate_down * dev)
    return _maybe_scalar(out, y)


def _log_norm_ratio_limit(nu: float, log_p: float) -> float:
    # Limit of (x/P)^nu K_nu(P x) as x -> 0+, valid for nu > 0:
    # (1/2) Gamma(nu) (2/P^2)^nu.
    return np.log(0.5) + specfun.log_gamma(nu) + nu * (np.log(2.0) - 2.0 * log_p)


def logpdf_gl_uni(y, params: GLParams):
    """Log-density of the univariate generalized Laplace law.

    At y == theta the density has a finite limit only when alpha > 1/2;
    the analytic limit is returned there, while alpha <= 1/2 raises
    because the density is unbounded at the location.
    """
    if params.dim != 1:
        raise ValueError("logpdf_gl_uni requires d = 1 parameters")
    theta = float(params.theta[0])
    sigma = float(np.sqrt(params.sigma[0, 0]))
    mu = float(params.mu[0])
    alpha = params.alpha
    nu = alpha - 0.5
    p = np.sqrt(2.0 + (mu / sigma) ** 2)
    log_p = float(np.log(p))

    ya = np.asarray(y, dtype=float)
    yv = np.atleast_1d(ya)
    dev = yv - theta
    x = np.abs(dev) / sigma
    at_loc = x == 0.0
    if np.any(at_loc) and alpha <= 0.5:
        raise ValueError("GL density is unbounded at y == theta for alpha <= 1/2")

    base = (
        np.log(2.0)
        + mu * dev / (sigma * sigma)
        - 0.5 * _LOG_2PI
        - specfun.log_gamma(alpha)
        - np.log(sigma)
    )
    out = np.empty_like(yv)
    reg = ~at_loc
    if np.any(reg):
        xr = x[reg]
        out[reg] = base[reg] + nu * (np.log(xr) - log_p) + specfun.log_bessel_k(nu, p * xr)
    if np.any(at_loc):
        out[at_loc] = base[at_loc] + _log_norm_ratio_limit(nu, log_p)
    out = out.reshape(np.shape(ya))
    return _maybe_scalar(out, y)


def logpdf_gl_multi(y, params: GLParams):
    """Log-density of the d-dimensional generalized Laplace law.

    Parameters
    ----------
    y : array
        A single d-vector or an (n, d) matrix of observations.
    params : GLParams

    Notes
    -----
    ``Sigma^{-1}`` and ``|Sigma|`` are obtained from one Cholesky
    factorization. At y == theta the analytic limit is used when
    alpha > d/2 and a ValueError is raised otherwise.
    """
    d = params.dim
    ya = np.asarray(y, dtype=float)
    single = ya.ndim == 1
    ym = np.atleast_2d(ya)
    if ym.shape[1] != d:
        raise ValueError(f"observations must have {d} columns")

    chol = np.linalg.cholesky(params.sigma)
    half_logdet = float(np.sum(np.log(np.diag(chol))))
    sig_inv_mu = solve_triangular(
        chol.T, solve_triangular(chol, params.mu, lower=True), lower=False
    )
    p2 = 2.0 + float(params.mu @ sig_inv_mu)
    log_p = 0.5 * np.log(p2)
    alpha = params.alpha
    nu = alpha - 0.5 * d

    resid = ym - params.theta
    z = solve_triangular(chol, resid.T, lower=True)
    q = np.sqrt(np.sum(z * z, axis=0))
    at_loc = q == 0.0
    if np.any(at_loc) and alpha <= 0.5 * d:
        raise ValueError("GL density is unbounded at y == theta for alpha <= d/2")

    base = (
        np.log(2.0)
        + resid @ sig_inv_mu
        - 0.5 * d * _LOG_2PI
        - specfun.log_gamma(alpha)
        - half_logdet
    )
    out = np.empty(ym.shape[0])
    reg = ~at_loc
    if np.any(reg):
        qr = q[reg]
        out[reg] = base[reg] + nu * (np.log(qr) - log_p) + specfun.log_bessel_k(nu, np.exp(log_p) * qr)
    if np.any(at_loc):
        out[at_loc] = base[at_loc] + _log_norm_ratio_limit(nu, log_p)
    if single:
        return float(out[0])
    return out


def gl_moments(params: GLParams) -> tuple[np.ndarray, np.ndarray]:
    """Closed-form mean and covariance of the GL law:
    E(Y) = theta + alpha*mu, Var(Y) = alpha*(Sigma + mu mu^T)."""
    mean = params.theta + params.alpha * params.mu
    cov = params.alpha * (params.sigma + np.outer(params.mu, params.mu))
    return mean, cov


def _as_generator(rng) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


def sample_gl(params: GLParams, n: int, rng) -> np.ndarray:
    """Draw n observations via the gamma scale mixture.

    Each row is ``theta + V*mu + sqrt(V)*Z`` with V ~ gamma(alpha, 1)
    and Z ~ N(0, Sigma) through the Cholesky factor of Sigma. The output
    is an (n, d) matrix; identical seeds give identical matrices.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    gen = _as_generator(rng)
    d = params.dim
    chol = np.linalg.cholesky(params.sigma)
    v = gen.gamma(params.alpha, 1.0, size=n)
    z = gen.standard_normal((n, d)) @ chol.T
    return params.theta + v[:, None] * params.mu + np.sqrt(v)[:, None] * z


def radial_logpdf(r, dim: int, alpha: float):
    """Log-density of the radius R in the polar representation of the
    symmetric (mu = 0) GL law in ``dim`` dimensions."""
    if isinstance(dim, bool) or not isinstance(dim, (int, np.integer)) or dim < 1:
        raise ValueError("dim must be a positive integer")
    alpha = float(alpha)
    if not np.isfinite(alpha) or alpha <= 0.0:
        raise ValueError("alpha must be a finite positive number")
    ra = np.asarray(r, dtype=float)
    if not np.all(np.isfinite(ra)) or np.any(ra <= 0.0):
        raise ValueError("r must be finite and > 0")
    half_d = 0.5 * dim
    out = (
        np.log(2.0)
        + (half_d + alpha - 1.0) * np.log(ra)
        + specfun.log_bessel_k(alpha - half_d, np.sqrt(2.0) * ra)
        - (half_d + alpha - 2.0) * 0.5 * np.log(2.0)
        - specfun.log_gamma(alpha)
        - specfun.log_gamma(half_d)
    )
    return _maybe_scalar(out, r)


# ----------------------------------------------------------------------
# Observation matrix CSV round trip (headerless, 17 significant digits)
# ----------------------------------------------------------------------

def save_observations(y: np.ndarray, path) -> None:
    """Write an (n, d) observation matrix as headerless CSV, one row per
    observation, at full float64 round-trip precision."""
    ym = np.atleast_2d(np.asarray(y, dtype=float))
    if ym.size == 0:
        raise ValueError("cannot save an empty observation matrix")
    np.savetxt(path, ym, fmt="%.17g", delimiter=",")


def load_observations(path) -> np.ndarray:
    """Read a headerless CSV observation matrix; raises ValueError with
    the offending line number on malformed input."""
    rows = []
    width = None
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            fields = line.split(",")
            if width is None:
                width = len(fields)
            elif len(fields) != width:
                raise ValueError(f"line {lineno}: expected {width} columns, got {len(fields)}")
            try:
                rows.append([float(f) for f in fields])
            except ValueError as err:
                raise ValueError(f"line {lineno}: {err}") from None
    if not rows:
        raise ValueError("no observations found in file")
    return np.asarray(rows, dtype=float)
