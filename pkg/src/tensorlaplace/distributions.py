"""Matrix and tensor variate (generalized) asymmetric Laplace families.

Four families share one density kernel:

* ``MgalParams`` -- matrix variate generalized asymmetric Laplace with
  location ``M`` (k x n), row scale ``sigma`` (k x k), column scale
  ``psi`` (n x n) and shape ``lam > 0``.  The plain asymmetric Laplace
  family is the ``lam = 1`` alias (:meth:`MgalParams.mal`).
* ``TgalParams`` -- the order-D tensor analogue with one scale factor
  per mode; again ``lam = 1`` gives the plain family
  (:meth:`TgalParams.tal`).

Every member arises as the Gaussian scale-location mixture
``Y = M W + sqrt(W) X`` with ``X`` matrix/tensor normal centered at
zero and ``W ~ Gamma(lam, 1)`` (exponential for ``lam = 1``); that
representation drives the samplers.  The log-density is assembled
entirely in log scale from five scalar statistics (two quadratic forms,
a cross term, a log-determinant, the total dimension), so evaluation
stays finite even at total dimensions where the raw density underflows.

The density has a removable or genuine singularity where the quadratic
form of the evaluation point vanishes (the origin).  With
``d`` the total dimension, the kernel returns the analytic limit there:
finite for ``2 lam > d``, and the ``+inf`` sentinel for ``2 lam <= d``
(logarithmic blow-up at ``2 lam = d``, power blow-up below).

Scale non-identifiability: ``(c * sigma, psi / c)`` describes the same
distribution.  Parameters are stored exactly as given; no normalization
is imposed.
"""

from __future__ import annotations

import hashlib
import math
import struct
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence, Tuple, Union

import numpy as np

from .linalg import (
    SpdMatrix,
    NotPositiveDefiniteError,
    kron_logdet,
    materialize_kron,
    mode_multiply,
    tensor_quadratic_form,
    trace_quadratic_form,
    unvec,
    vec,
)
from .rng import RngStream, sample_matrix_normal, sample_tensor_normal
from .special import log_bessel_k, log_gamma

__all__ = [
    "MgalParams",
    "TgalParams",
    "GalKernelInputs",
    "SampleBatch",
    "gal_log_kernel",
    "log_pdf_mgal",
    "log_pdf_tgal",
    "cf_mgal",
    "cf_tgal",
    "sample_mgal",
    "sample_tgal",
    "moments_mgal",
    "moments_tgal",
    "covariance_action_mgal",
    "covariance_action_tgal",
    "transform_mgal",
    "log_pdf",
    "cf",
    "sample",
    "moments",
    "scale_quadratic_form",
    "COV_DIM_CAP",
]

_LN_2PI = math.log(2.0 * math.pi)

#: Default cap on the side length of a materialized covariance matrix.
COV_DIM_CAP = 4096


def _freeze(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class MgalParams:
    """Parameter bundle of the matrix variate generalized family.

    ``lam = 1`` is the plain asymmetric Laplace family; use
    :meth:`mal` to construct it.
    """

    m: np.ndarray
    sigma: SpdMatrix
    psi: SpdMatrix
    lam: float = 1.0

    def __post_init__(self):
        m = np.array(self.m, dtype=float)
        if m.ndim != 2:
            raise ValueError(f"location must be a matrix, got ndim {m.ndim}")
        if not np.all(np.isfinite(m)):
            raise ValueError("location entries must be finite")
        sigma = self.sigma if isinstance(self.sigma, SpdMatrix) else SpdMatrix(self.sigma)
        psi = self.psi if isinstance(self.psi, SpdMatrix) else SpdMatrix(self.psi)
        if sigma.dim != m.shape[0] or psi.dim != m.shape[1]:
            raise ValueError(
                f"location of shape {m.shape} does not match scales "
                f"({sigma.dim}, {psi.dim})"
            )
        lam = float(self.lam)
        if not (lam > 0.0 and math.isfinite(lam)):
            raise ValueError(f"shape parameter must be positive and finite, got {lam!r}")
        object.__setattr__(self, "m", _freeze(m))
        object.__setattr__(self, "sigma", sigma)
        object.__setattr__(self, "psi", psi)
        object.__setattr__(self, "lam", lam)

    @classmethod
    def mal(cls, m, sigma, psi) -> "MgalParams":
        """Plain asymmetric Laplace parameters (shape fixed at one)."""
        return cls(m=m, sigma=sigma, psi=psi, lam=1.0)

    @property
    def shape(self) -> Tuple[int, int]:
        return self.m.shape

    @property
    def total_dim(self) -> int:
        return self.m.size

    @cached_property
    def _q_location(self) -> float:
        return trace_quadratic_form(self.psi, self.sigma, self.m, self.m)

    @cached_property
    def _log_det_scale(self) -> float:
        k, n = self.m.shape
        return kron_logdet([self.sigma, self.psi], [k, n])

    @cached_property
    def digest(self) -> str:
        """Hex digest identifying the parameter values (sample provenance)."""
        h = hashlib.sha256()
        h.update(b"mgal")
        h.update(struct.pack("<qq", *self.m.shape))
        h.update(np.ascontiguousarray(self.m).tobytes())
        h.update(np.ascontiguousarray(self.sigma.entries).tobytes())
        h.update(np.ascontiguousarray(self.psi.entries).tobytes())
        h.update(struct.pack("<d", self.lam))
        return h.hexdigest()

    def __repr__(self) -> str:
        k, n = self.shape
        return f"MgalParams(shape=({k}, {n}), lam={self.lam})"


@dataclass(frozen=True, eq=False)
class TgalParams:
    """Parameter bundle of the tensor variate generalized family.

    One positive-definite scale factor per mode; ``lam = 1`` is the
    plain asymmetric Laplace family (:meth:`tal`).
    """

    m: np.ndarray
    sigmas: Tuple[SpdMatrix, ...]
    lam: float = 1.0

    def __post_init__(self):
        m = np.array(self.m, dtype=float)
        if m.ndim < 1:
            m = m.reshape(1)
        if not np.all(np.isfinite(m)):
            raise ValueError("location entries must be finite")
        sigmas = tuple(s if isinstance(s, SpdMatrix) else SpdMatrix(s) for s in self.sigmas)
        if len(sigmas) != m.ndim:
            raise ValueError(f"{len(sigmas)} scale factors for an order-{m.ndim} location")
        for i, s in enumerate(sigmas):
            if s.dim != m.shape[i]:
                raise ValueError(f"scales[{i}] has dim {s.dim}, expected {m.shape[i]}")
        lam = float(self.lam)
        if not (lam > 0.0 and math.isfinite(lam)):
            raise ValueError(f"shape parameter must be positive and finite, got {lam!r}")
        object.__setattr__(self, "m", _freeze(m))
        object.__setattr__(self, "sigmas", sigmas)
        object.__setattr__(self, "lam", lam)

    @classmethod
    def tal(cls, m, sigmas) -> "TgalParams":
        """Plain asymmetric Laplace parameters (shape fixed at one)."""
        return cls(m=m, sigmas=tuple(sigmas), lam=1.0)

    @property
    def dims(self) -> Tuple[int, ...]:
        return self.m.shape

    @property
    def total_dim(self) -> int:
        return self.m.size

    @cached_property
    def _q_location(self) -> float:
        return tensor_quadratic_form(self.m, self.m, self.sigmas)

    @cached_property
    def _log_det_scale(self) -> float:
        return kron_logdet(self.sigmas, self.dims)

    @cached_property
    def digest(self) -> str:
        """Hex digest identifying the parameter values (sample provenance)."""
        h = hashlib.sha256()
        h.update(b"tgal")
        h.update(struct.pack(f"<{self.m.ndim}q", *self.m.shape))
        h.update(np.ascontiguousarray(self.m).tobytes())
        for s in self.sigmas:
            h.update(np.ascontiguousarray(s.entries).tobytes())
        h.update(struct.pack("<d", self.lam))
        return h.hexdigest()

    def __repr__(self) -> str:
        return f"TgalParams(dims={self.dims}, lam={self.lam})"


Params = Union[MgalParams, TgalParams]


@dataclass(frozen=True)
class GalKernelInputs:
    """Scalar sufficient statistics feeding the shared density kernel.

    ``q_x`` and ``q_m`` are the inverse-scale quadratic forms of the
    evaluation point and the location, ``s_xm`` the cross term entering
    the exponential tilt, ``logdet`` the log-determinant of the
    Kronecker scale, ``total_dim`` the dimension of the linearized
    variate and ``lam`` the shape.
    """

    q_x: float
    q_m: float
    s_xm: float
    logdet: float
    total_dim: int
    lam: float

    def __post_init__(self):
        if self.q_x < 0.0 or self.q_m < 0.0:
            raise ValueError("quadratic forms must be non-negative")
        if self.total_dim < 1:
            raise ValueError("total dimension must be at least one")
        if not self.lam > 0.0:
            raise ValueError("shape parameter must be positive")


@dataclass(frozen=True)
class SampleBatch:
    """Seeded draw collection with provenance metadata.

    ``draws`` has shape ``(count, *dims)``; :meth:`vec_draws` linearizes
    each draw under the package vec convention.
    """

    draws: np.ndarray
    seed: int
    stream_id: int
    params_digest: str

    def __post_init__(self):
        draws = np.asarray(self.draws, dtype=float)
        if draws.ndim < 2:
            raise ValueError("draws must have shape (count, *dims)")
        object.__setattr__(self, "draws", _freeze(draws))

    @property
    def count(self) -> int:
        return self.draws.shape[0]

    @property
    def dims(self) -> Tuple[int, ...]:
        return self.draws.shape[1:]

    def vec_draws(self) -> np.ndarray:
        """Draws linearized mode-1-fastest, shape (count, total_dim)."""
        d = self.draws
        reversed_modes = (0,) + tuple(range(d.ndim - 1, 0, -1))
        return d.transpose(reversed_modes).reshape(d.shape[0], -1)

    def __repr__(self) -> str:
        return f"SampleBatch(count={self.count}, dims={self.dims}, seed={self.seed})"


def gal_log_kernel(inp: GalKernelInputs) -> float:
    """Shared log-density kernel of all four families.

    For ``q_x > 0``::

        log 2 + s_xm - (d/2) log(2 pi) - log Gamma(lam) - logdet / 2
        + (nu / 2) (log q_x - log(2 + q_m)) + log K_nu(sqrt((2 + q_m) q_x))

    with ``d = total_dim`` and ``nu = lam - d/2``.  At ``q_x = 0`` the
    analytic limit is returned: finite when ``2 lam > d``, the ``+inf``
    sentinel otherwise (see the module docstring for the three regimes).
    """
    d = inp.total_dim
    lam = inp.lam
    nu = lam - 0.5 * d
    b = 2.0 + inp.q_m
    const = inp.s_xm - 0.5 * d * _LN_2PI - log_gamma(lam) - 0.5 * inp.logdet
    if inp.q_x == 0.0:
        if 2.0 * lam > d:
            return const + log_gamma(nu) + nu * math.log(2.0) - nu * math.log(b)
        return math.inf
    z = math.sqrt(b * inp.q_x)
    return (
        math.log(2.0)
        + const
        + 0.5 * nu * (math.log(inp.q_x) - math.log(b))
        + log_bessel_k(nu, z)
    )


def _check_point_shape(x: np.ndarray, dims: Tuple[int, ...]) -> None:
    if x.shape != dims:
        raise ValueError(f"evaluation point of shape {x.shape} does not match dims {dims}")


def log_pdf_mgal(p: MgalParams, x) -> float:
    """Log-density of the matrix family at a k x n point.

    May return the ``+inf`` sentinel at the origin when ``2 lam`` does
    not exceed the total dimension.
    """
    x = np.asarray(x, dtype=float)
    _check_point_shape(x, p.shape)
    q_x = trace_quadratic_form(p.psi, p.sigma, x, x)
    s_xm = trace_quadratic_form(p.psi, p.sigma, x, p.m)
    inp = GalKernelInputs(
        q_x=q_x,
        q_m=p._q_location,
        s_xm=s_xm,
        logdet=p._log_det_scale,
        total_dim=p.total_dim,
        lam=p.lam,
    )
    return gal_log_kernel(inp)


def log_pdf_tgal(p: TgalParams, x) -> float:
    """Log-density of the tensor family at an order-D point."""
    x = np.asarray(x, dtype=float)
    _check_point_shape(x, p.dims)
    q_x = tensor_quadratic_form(x, x, p.sigmas)
    s_xm = tensor_quadratic_form(x, p.m, p.sigmas)
    inp = GalKernelInputs(
        q_x=q_x,
        q_m=p._q_location,
        s_xm=s_xm,
        logdet=p._log_det_scale,
        total_dim=p.total_dim,
        lam=p.lam,
    )
    return gal_log_kernel(inp)


def scale_quadratic_form(p: Params, t) -> float:
    """``vec(t)^T K vec(t)`` with K the Kronecker scale (not its inverse)."""
    t = np.asarray(t, dtype=float)
    if isinstance(p, MgalParams):
        _check_point_shape(t, p.shape)
        return float(np.sum((t @ p.psi.entries) * (p.sigma.entries @ t)))
    _check_point_shape(t, p.dims)
    t_scaled = t
    for i, s in enumerate(p.sigmas):
        t_scaled = mode_multiply(t_scaled, s.entries, i)
    return float(np.sum(t * t_scaled))


def _cf_from_parts(q_t: float, inner: float, lam: float) -> complex:
    # The base has real part >= 1, so the principal branch of the
    # complex power is smooth in t.
    base = complex(1.0 + 0.5 * q_t, -inner)
    return base ** (-lam)


def cf_mgal(p: MgalParams, t) -> complex:
    """Characteristic function of the matrix family at frequency T.

    ``(1 + tr(Psi T^T Sigma T) / 2 - i tr(M^T T))^(-lam)``; equals one
    at zero and has modulus at most one everywhere.
    """
    t = np.asarray(t, dtype=float)
    _check_point_shape(t, p.shape)
    q_t = scale_quadratic_form(p, t)
    inner = float(np.sum(p.m * t))
    return _cf_from_parts(q_t, inner, p.lam)


def cf_tgal(p: TgalParams, t) -> complex:
    """Characteristic function of the tensor family at an order-D frequency."""
    t = np.asarray(t, dtype=float)
    _check_point_shape(t, p.dims)
    q_t = scale_quadratic_form(p, t)
    inner = float(np.sum(p.m * t))
    return _cf_from_parts(q_t, inner, p.lam)


def sample_mgal(p: MgalParams, count: int, rng: RngStream) -> SampleBatch:
    """Draws via the mixture representation ``M W + sqrt(W) X``.

    ``W`` is standard gamma with shape ``lam`` and ``X`` centered matrix
    normal with the bundle's scales.
    """
    count = _check_count(count)
    w = np.asarray(rng.standard_gamma(p.lam, size=count))
    x = sample_matrix_normal(np.zeros(p.shape), p.sigma, p.psi, rng, count=count)
    draws = w[:, None, None] * p.m + np.sqrt(w)[:, None, None] * x
    return SampleBatch(
        draws=draws, seed=rng.seed, stream_id=rng.stream_id, params_digest=p.digest
    )


def sample_tgal(p: TgalParams, count: int, rng: RngStream) -> SampleBatch:
    """Tensor-family draws via the same gamma scale-location mixture."""
    count = _check_count(count)
    w = np.asarray(rng.standard_gamma(p.lam, size=count))
    x = sample_tensor_normal(np.zeros(p.dims), p.sigmas, rng, count=count)
    w_shape = (count,) + (1,) * p.m.ndim
    draws = w.reshape(w_shape) * p.m + np.sqrt(w).reshape(w_shape) * x
    return SampleBatch(
        draws=draws, seed=rng.seed, stream_id=rng.stream_id, params_digest=p.digest
    )


def _check_count(count: int) -> int:
    count = int(count)
    if count < 1:
        raise ValueError(f"count must be at least one, got {count}")
    return count


def _kron_chain(mats) -> np.ndarray:
    out = mats[0]
    for m in mats[1:]:
        out = np.kron(out, m)
    return out


def moments_mgal(p: MgalParams, cov_cap: int = COV_DIM_CAP):
    """Mean and linearized covariance of the matrix family.

    Mean is ``lam * M``; the covariance of the linearized variate is
    ``lam * (psi (x) sigma + vec(M) vec(M)^T)``, materialized only up to
    ``cov_cap`` rows.  Use :func:`covariance_action_mgal` beyond the cap.
    """
    d = p.total_dim
    if d > cov_cap:
        raise ValueError(
            f"covariance is {d} x {d}, above the materialization cap {cov_cap}; "
            "use covariance_action_mgal instead"
        )
    mean = p.lam * p.m
    vm = vec(p.m)
    cov = p.lam * (np.kron(p.psi.entries, p.sigma.entries) + np.outer(vm, vm))
    return mean, cov


def moments_tgal(p: TgalParams, cov_cap: int = COV_DIM_CAP):
    """Mean and linearized covariance of the tensor family (same cap rule)."""
    d = p.total_dim
    if d > cov_cap:
        raise ValueError(
            f"covariance is {d} x {d}, above the materialization cap {cov_cap}; "
            "use covariance_action_tgal instead"
        )
    mean = p.lam * p.m
    vm = vec(p.m)
    chain = _kron_chain([s.entries for s in reversed(p.sigmas)])
    cov = p.lam * (chain + np.outer(vm, vm))
    return mean, cov


def covariance_action_mgal(p: MgalParams, v) -> np.ndarray:
    """Covariance-vector product without materializing the covariance.

    Computes ``lam * (psi (x) sigma) v + lam * vec(M) <vec(M), v>`` via
    one small matrix sandwich.
    """
    v = np.asarray(v, dtype=float)
    if v.shape != (p.total_dim,):
        raise ValueError(f"vector of shape {v.shape}, expected ({p.total_dim},)")
    v_mat = unvec(v, p.shape)
    kron_part = vec(p.sigma.entries @ v_mat @ p.psi.entries)
    vm = vec(p.m)
    return p.lam * (kron_part + vm * float(vm @ v))


def covariance_action_tgal(p: TgalParams, v) -> np.ndarray:
    """Tensor-family covariance-vector product via mode multiplications."""
    v = np.asarray(v, dtype=float)
    if v.shape != (p.total_dim,):
        raise ValueError(f"vector of shape {v.shape}, expected ({p.total_dim},)")
    v_tensor = unvec(v, p.dims)
    for i, s in enumerate(p.sigmas):
        v_tensor = mode_multiply(v_tensor, s.entries, i)
    vm = vec(p.m)
    return p.lam * (vec(v_tensor) + vm * float(vm @ v))


def transform_mgal(p: MgalParams, d, c) -> MgalParams:
    """Parameters of ``D X C`` for a matrix-family variate ``X``.

    ``D`` must be m x k with m <= k and full row rank, ``C`` must be
    n x q with q <= n and full column rank; the result has location
    ``D M C``, row scale ``D sigma D^T``, column scale ``C^T psi C`` and
    the same shape parameter.  Rank-deficient transforms are rejected
    when the transformed scales fail positive-definite validation.
    """
    d = np.asarray(d, dtype=float)
    c = np.asarray(c, dtype=float)
    k, n = p.shape
    if d.ndim != 2 or d.shape[1] != k:
        raise ValueError(f"left factor must have {k} columns, got shape {d.shape}")
    if c.ndim != 2 or c.shape[0] != n:
        raise ValueError(f"right factor must have {n} rows, got shape {c.shape}")
    if d.shape[0] > k:
        raise ValueError(f"left factor has {d.shape[0]} rows, more than {k}")
    if c.shape[1] > n:
        raise ValueError(f"right factor has {c.shape[1]} columns, more than {n}")
    try:
        new_sigma = SpdMatrix(d @ p.sigma.entries @ d.T)
    except (NotPositiveDefiniteError, ValueError) as exc:
        raise NotPositiveDefiniteError(
            f"transformed row scale is not positive definite: {exc}"
        ) from exc
    try:
        new_psi = SpdMatrix(c.T @ p.psi.entries @ c)
    except (NotPositiveDefiniteError, ValueError) as exc:
        raise NotPositiveDefiniteError(
            f"transformed column scale is not positive definite: {exc}"
        ) from exc
    return MgalParams(m=d @ p.m @ c, sigma=new_sigma, psi=new_psi, lam=p.lam)


# Family-generic front ends ------------------------------------------------


def log_pdf(p: Params, x) -> float:
    """Dispatch :func:`log_pdf_mgal` / :func:`log_pdf_tgal` on the bundle type."""
    return log_pdf_mgal(p, x) if isinstance(p, MgalParams) else log_pdf_tgal(p, x)


def cf(p: Params, t) -> complex:
    """Dispatch :func:`cf_mgal` / :func:`cf_tgal` on the bundle type."""
    return cf_mgal(p, t) if isinstance(p, MgalParams) else cf_tgal(p, t)


def sample(p: Params, count: int, rng: RngStream) -> SampleBatch:
    """Dispatch :func:`sample_mgal` / :func:`sample_tgal` on the bundle type."""
    return sample_mgal(p, count, rng) if isinstance(p, MgalParams) else sample_tgal(p, count, rng)


def moments(p: Params, cov_cap: int = COV_DIM_CAP):
    """Dispatch :func:`moments_mgal` / :func:`moments_tgal` on the bundle type."""
    return moments_mgal(p, cov_cap) if isinstance(p, MgalParams) else moments_tgal(p, cov_cap)
