"""Scalar special functions shared by all densities and fitters.

Thin, domain-checked wrappers around SciPy's special functions, plus the
numerically delicate pieces SciPy does not expose directly: a log-domain
modified Bessel K that never under- or overflows, and the Mills-ratio
bracket ``1 + q*Phi(q)/phi(q)`` that appears in projected-normal angular
densities and loses all precision in naive form for large ``|q|``.

All functions accept scalars or numpy arrays and are pure (no shared
mutable state), so they are safe to call from any thread.
"""

from __future__ import annotations

import numpy as np
from scipy import special as sp

__all__ = [
    "bessel_k",
    "log_bessel_k",
    "log_gamma",
    "normal_pdf_cdf",
    "log_mills_bracket",
    "bessel_i_ratio_and_log_i0",
]

_LOG_2PI = float(np.log(2.0 * np.pi))
_SQRT_HALF_PI = float(np.sqrt(0.5 * np.pi))

# Mills-ratio switch point: below this the direct bracket formula keeps
# enough relative precision; beyond it the asymptotic series is used.
MILLS_SWITCH = -8.0


def _as_float_array(x, name: str, positive: bool = False, nonnegative: bool = False):
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must be finite")
    if positive and np.any(arr <= 0.0):
        raise ValueError(f"{name} must be > 0")
    if nonnegative and np.any(arr < 0.0):
        raise ValueError(f"{name} must be >= 0")
    return arr


def _maybe_scalar(out, *inputs):
    if all(np.isscalar(v) or np.ndim(v) == 0 for v in inputs):
        return float(out)
    return out


def bessel_k(nu: float, x) -> float | np.ndarray:
    """Modified Bessel function of the third kind, K_nu(x).

    Parameters
    ----------
    nu : float
        Order; any real number (K is even in its order).
    x : float or array
        Argument, strictly positive.

    Returns
    -------
    float or ndarray
        K_nu(x). Values beyond the double-precision range come back as
        ``inf`` (tiny x with large ``|nu|``) or 0.0 (very large x); use
        :func:`log_bessel_k` in those regimes.
    """
    if not np.isfinite(nu):
        raise ValueError("nu must be finite")
    xa = _as_float_array(x, "x", positive=True)
    out = np.atleast_1d(np.asarray(sp.kv(nu, xa), dtype=float))
    # kv saturates a little before the actual float64 range; recover the
    # representable edge cases from the log form.
    edge = (out == 0.0) | ~np.isfinite(out)
    if np.any(edge):
        xe = np.atleast_1d(xa)[edge]
        with np.errstate(over="ignore"):
            out[edge] = np.exp(log_bessel_k(nu, xe))
    out = out.reshape(np.shape(xa))
    return _maybe_scalar(out, x)


def log_bessel_k(nu: float, x) -> float | np.ndarray:
    """log K_nu(x), stable for arguments where K itself over/underflows.

    Uses the exponentially scaled ``kve`` (so large x never underflows)
    and falls back to the ascending small-argument series when even the
    scaled value overflows (tiny x combined with large ``|nu|``).
    """
    if not np.isfinite(nu):
        raise ValueError("nu must be finite")
    nu_abs = abs(float(nu))
    xa = _as_float_array(x, "x", positive=True)
    xv = np.atleast_1d(xa)
    with np.errstate(over="ignore", divide="ignore"):
        out = np.log(sp.kve(nu_abs, xv)) - xv
    bad = ~np.isfinite(out)
    if np.any(bad):
        out[bad] = _log_k_small_x(nu_abs, xv[bad])
    out = out.reshape(np.shape(xa))
    return _maybe_scalar(out, x)


def _log_k_small_x(nu: float, x: np.ndarray) -> np.ndarray:
    # Dominant term of the ascending series, K_nu(x) ~ Gamma(nu)/2 * (2/x)^nu,
    # with the confluent correction factor sum_k (x^2/4)^k / (k! (1-nu)...(k-nu)).
    # Only reachable when kve overflowed (large nu); where the series fails to
    # settle (x^2 comparable to 4*nu) the Debye large-order asymptotic takes over.
    lead = np.log(0.5) + sp.gammaln(nu) + nu * (np.log(2.0) - np.log(x))
    quarter_x2 = 0.25 * x * x
    s = np.ones_like(x)
    term = np.ones_like(x)
    with np.errstate(all="ignore"):
        for k in range(1, 13):
            denom = k * (k - nu)
            factor = quarter_x2 / denom if denom != 0.0 else 0.0
            term = term * factor
            s = s + term
        good = np.isfinite(s) & (s > 0.0) & (np.abs(term) <= 1e-10 * np.abs(s))
        out = np.where(good, lead + np.log(np.where(good, s, 1.0)), 0.0)
    bad = ~good
    if np.any(bad):
        out[bad] = _log_k_debye(nu, x[bad])
    return out


def _log_k_debye(nu: float, x: np.ndarray) -> np.ndarray:
    # Leading term of the uniform large-order expansion; relative error
    # O(1/nu), used only outside the ascending series' comfort zone.
    z = x / nu
    root = np.sqrt(1.0 + z * z)
    eta = root + np.log(z / (1.0 + root))
    return 0.5 * np.log(np.pi / (2.0 * nu)) - nu * eta - 0.25 * np.log1p(z * z)


def log_gamma(x) -> float | np.ndarray:
    """log Gamma(x) for x > 0."""
    xa = _as_float_array(x, "x", positive=True)
    return _maybe_scalar(sp.gammaln(xa), x)


def normal_pdf_cdf(x) -> tuple[float | np.ndarray, float | np.ndarray]:
    """Standard normal density and cumulative probability at x.

    Returns
    -------
    (pdf, cdf)
        ``pdf = exp(-x^2/2)/sqrt(2*pi)`` and ``cdf = Phi(x)``.
    """
    xa = _as_float_array(x, "x")
    pdf = np.exp(-0.5 * xa * xa) / np.sqrt(2.0 * np.pi)
    cdf = sp.ndtr(xa)
    return _maybe_scalar(pdf, x), _maybe_scalar(cdf, x)


def log_mills_bracket(q) -> float | np.ndarray:
    """log of the bracket ``1 + q*Phi(q)/phi(q)`` for any real q.

    The bracket is the angular part of the projected-normal density. It
    is strictly positive but behaves like ``1/q^2`` as q -> -inf, where
    the direct formula is pure cancellation, and like ``q/phi(q)`` as
    q -> +inf, where phi underflows. Three regimes:

    * q >= 0: log-sum-exp with ``log Phi`` (exact at any magnitude),
    * -8 <= q < 0: scaled complementary error function ``erfcx``,
    * q < -8: asymptotic Mills-ratio expansion ``q^-2 (1 - 3/q^2 + ...)``.
    """
    qa = _as_float_array(q, "q")
    qv = np.atleast_1d(qa)
    out = np.empty_like(qv)

    pos = qv >= 0.0
    if np.any(pos):
        qp = qv[pos]
        with np.errstate(divide="ignore"):  # log(0) at q == 0 is fine
            t = np.log(qp) + sp.log_ndtr(qp) + 0.5 * qp * qp + 0.5 * _LOG_2PI
        out[pos] = np.logaddexp(0.0, t)

    mid = (qv < 0.0) & (qv >= MILLS_SWITCH)
    if np.any(mid):
        qm = qv[mid]
        # q*Phi(q)/phi(q) = q*sqrt(pi/2)*erfcx(-q/sqrt(2)), no underflow
        out[mid] = np.log1p(qm * _SQRT_HALF_PI * sp.erfcx(-qm / np.sqrt(2.0)))

    far = qv < MILLS_SWITCH
    if np.any(far):
        out[far] = _log_bracket_asymptotic(qv[far])

    out = out.reshape(np.shape(qa))
    return _maybe_scalar(out, q)


def _log_bracket_asymptotic(q: np.ndarray) -> np.ndarray:
    # 1 + q*Phi(q)/phi(q) = q^-2 * (1 - 3/q^2 + 15/q^4 - ...) for q -> -inf.
    # Terms shrink monotonically through k=16 whenever q^2 >= 64.
    r = 1.0 / (q * q)
    s = np.ones_like(q)
    term = np.ones_like(q)
    for k in range(1, 17):
        term = term * (-(2.0 * k + 1.0)) * r
        s = s + term
    return np.log(s) + np.log(r)


def bessel_i_ratio_and_log_i0(kappa) -> tuple[float | np.ndarray, float | np.ndarray]:
    """Ratio I_1(kappa)/I_0(kappa) and log I_0(kappa) for kappa >= 0.

    Both are computed from the exponentially scaled Bessel functions, so
    there is no overflow for concentrations up to 1e4 and beyond.
    """
    ka = _as_float_array(kappa, "kappa", nonnegative=True)
    ratio = sp.i1e(ka) / sp.i0e(ka)
    log_i0 = np.log(sp.i0e(ka)) + ka
    return _maybe_scalar(ratio, kappa), _maybe_scalar(log_i0, kappa)
