"""Log-scale special functions backing the density kernels.

The asymmetric Laplace family densities involve the modified Bessel
function of the second kind ``K_nu`` (also called the modified Bessel
function of the third kind, or Macdonald function) at orders that grow
linearly with the total dimension of the distribution.  ``K_nu(z)``
itself overflows double precision already for moderate orders at small
arguments, so every evaluation here is carried in log scale and stays
finite over the whole supported range.

Evaluation strategy for ``log K_nu(z)``:

* ``|nu| <= 1.5`` -- scipy's exponentially scaled kernel ``kve`` (which
  internally switches between the small-argument series and the
  large-argument continued-fraction/asymptotic branches), de-scaled in
  log space.
* larger orders -- seed at the fractional order ``nu0 in [0, 1)`` and
  ``nu0 + 1``, then climb with the three-term recurrence
  ``K_{mu+1}(z) = K_{mu-1}(z) + (2 mu / z) K_mu(z)`` carried in log
  space.  Increasing order is the stable direction for ``K``, and the
  log-space sum never overflows.
* ``z`` below ``1e-100`` -- small-argument asymptotics evaluated
  directly in log space (the scaled kernel itself would overflow for
  seed orders above 1).

The branch-switch constants are module-level and fixed once by the
oracle-agreement tests; they are never adjusted per call.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import special as _sp
from scipy.integrate import quad

__all__ = ["log_gamma", "log_bessel_k", "bessel_k_integral_oracle", "MAX_ORDER"]

#: Largest supported |order| for :func:`log_bessel_k`.
MAX_ORDER = 10_000.0

# Branch-switch constants (see module docstring).
_DIRECT_ORDER_MAX = 1.5
_TINY_Z = 1e-100
# Below this order the one-term small-argument form loses accuracy and the
# two-term reflection form is used instead.
_TINY_Z_ORDER_SPLIT = 0.05

# Supported ranges of the quadrature oracle.
_ORACLE_Z_MIN = 1e-3
_ORACLE_Z_MAX = 60.0
_ORACLE_ORDER_MAX = 25.0


def log_gamma(x: float) -> float:
    """Natural logarithm of the gamma function, for x > 0.

    Raises
    ------
    ValueError
        If ``x`` is not strictly positive.
    """
    x = float(x)
    if not x > 0.0:
        raise ValueError(f"log_gamma requires x > 0, got {x!r}")
    return math.lgamma(x)


def _log_kve_seed(nu: float, z: float) -> float:
    """log K_nu(z) straight from the scaled scipy kernel; needs small |nu|."""
    return math.log(float(_sp.kve(nu, z))) - z


def _log_k_tiny_z(nu: float, z: float) -> float:
    """log K_nu(z) for z < _TINY_Z via small-argument asymptotics.

    For nu >= _TINY_Z_ORDER_SPLIT the one-term form
    ``K_nu(z) ~ Gamma(nu)/2 * (2/z)^nu`` has relative error below
    ``(z/2)^(2 nu)`` which is < 1e-10 everywhere on this branch.  For
    smaller orders the two-term reflection form is exact to O(z^2):
    ``K_nu(z) = pi/(2 sin(pi nu)) * [(z/2)^(-nu)/Gamma(1-nu)
    - (z/2)^nu/Gamma(1+nu)]``, degenerating to
    ``K_0(z) = -log(z/2) - gamma_euler`` as nu -> 0.
    """
    ln_half_z = math.log(z) - math.log(2.0)
    if nu >= _TINY_Z_ORDER_SPLIT:
        return math.lgamma(nu) - math.log(2.0) - nu * ln_half_z
    if nu < 1e-12:
        return math.log(-ln_half_z - np.euler_gamma)
    a = math.exp(-nu * ln_half_z) / math.gamma(1.0 - nu)
    b = math.exp(nu * ln_half_z) / math.gamma(1.0 + nu)
    return math.log(math.pi / (2.0 * math.sin(math.pi * nu)) * (a - b))


def log_bessel_k(nu: float, z: float) -> float:
    """``log K_nu(z)`` for real order and ``z > 0``, finite over the range.

    Even in the order (``K_{-nu} = K_nu``); the implementation works with
    ``|nu|``.  Supported orders are ``|nu| <= MAX_ORDER``.

    Raises
    ------
    ValueError
        If ``z <= 0`` (domain) or ``|nu| > MAX_ORDER`` (unsupported).
    """
    nu = abs(float(nu))
    z = float(z)
    if not z > 0.0:
        raise ValueError(f"log_bessel_k requires z > 0, got {z!r}")
    if nu > MAX_ORDER or not math.isfinite(nu):
        raise ValueError(f"order {nu!r} outside the supported range |nu| <= {MAX_ORDER}")
    if z < _TINY_Z:
        return _log_k_tiny_z(nu, z)
    if nu <= _DIRECT_ORDER_MAX:
        return _log_kve_seed(nu, z)

    steps = int(math.floor(nu))
    nu0 = nu - steps  # fractional order in [0, 1)
    lk_prev = _log_kve_seed(nu0, z)
    lk_cur = _log_kve_seed(nu0 + 1.0, z)
    log_2_over_z = math.log(2.0) - math.log(z)
    for j in range(1, steps):
        t = log_2_over_z + math.log(nu0 + j) + lk_cur
        hi, lo = (t, lk_prev) if t > lk_prev else (lk_prev, t)
        lk_prev, lk_cur = lk_cur, hi + math.log1p(math.exp(lo - hi))
    return lk_cur


def bessel_k_integral_oracle(nu: float, z: float) -> float:
    """``K_nu(z)`` by adaptive quadrature of the integral representation.

    Integrates ``int_0^inf exp(-z cosh t) cosh(nu t) dt``.  Test oracle
    only: slow, but independent of the series/recurrence evaluation
    path.  Supported on ``z in [1e-3, 60]``, ``|nu| <= 25`` where the
    quadrature converges comfortably and the result fits in a double.

    Raises
    ------
    ValueError
        If the inputs fall outside the supported oracle range.
    """
    nu = abs(float(nu))
    z = float(z)
    if not (_ORACLE_Z_MIN <= z <= _ORACLE_Z_MAX) or nu > _ORACLE_ORDER_MAX:
        raise ValueError(
            f"oracle supports z in [{_ORACLE_Z_MIN}, {_ORACLE_Z_MAX}] and "
            f"|nu| <= {_ORACLE_ORDER_MAX}, got nu={nu!r}, z={z!r}"
        )

    def integrand(t: float) -> float:
        a = nu * t
        # log cosh(a), overflow-safe
        log_cosh = a + math.log1p(math.exp(-2.0 * a)) - math.log(2.0) if a > 0.0 else 0.0
        e = -z * math.cosh(t) + log_cosh
        return math.exp(e) if e > -745.0 else 0.0

    # The integrand peaks near asinh(nu/z); past the peak it dies off
    # doubly exponentially, so a fixed margin suffices for the cutoff.
    t_peak = math.asinh(nu / z) if nu > 0.0 else 0.0
    t_max = t_peak + 35.0
    breakpoints = [t_peak] if 0.0 < t_peak < t_max else None
    value, _ = quad(
        integrand, 0.0, t_max, points=breakpoints, limit=400, epsabs=0.0, epsrel=1e-12
    )
    return value
