"""Reproducible random streams and the Gaussian/mixing-variable samplers.

Streams are counter-based (Philox) and keyed by a ``(seed, stream_id)``
pair: the same pair always reproduces the same draw sequence, and
distinct stream ids give statistically independent streams, so parallel
batches can be sharded by stream id without coordination.  A single
stream must not be shared between threads.
"""

from __future__ import annotations

from typing import Optional, Sequence

import numpy as np

from .linalg import SpdMatrix, mode_multiply

__all__ = [
    "RngStream",
    "sample_gamma",
    "sample_matrix_normal",
    "sample_tensor_normal",
]

_MASK64 = (1 << 64) - 1


class RngStream:
    """Seeded, splittable random stream backed by a Philox counter generator."""

    def __init__(self, seed: int, stream_id: int = 0):
        self.seed = int(seed)
        self.stream_id = int(stream_id)
        key = np.array([self.seed & _MASK64, self.stream_id & _MASK64], dtype=np.uint64)
        self._gen = np.random.Generator(np.random.Philox(key=key))

    def split(self, stream_id: int) -> "RngStream":
        """Independent stream under the same seed."""
        return RngStream(self.seed, stream_id)

    def standard_normal(self, shape=None) -> np.ndarray:
        return self._gen.standard_normal(shape) if shape is not None else self._gen.standard_normal()

    def standard_gamma(self, shape_param: float, size=None):
        return self._gen.standard_gamma(shape_param, size=size)

    def integers(self, low: int, high: int, size=None):
        return self._gen.integers(low, high, size=size)

    def __repr__(self) -> str:
        return f"RngStream(seed={self.seed}, stream_id={self.stream_id})"


def sample_gamma(lam: float, rng: RngStream) -> float:
    """One draw from Gamma(shape=lam, scale=1); lam=1 coincides with Exp(1).

    Raises
    ------
    ValueError
        If ``lam`` is not strictly positive.
    """
    lam = float(lam)
    if not lam > 0.0:
        raise ValueError(f"gamma shape must be positive, got {lam!r}")
    return float(rng.standard_gamma(lam))


def sample_matrix_normal(
    m, sigma: SpdMatrix, psi: SpdMatrix, rng: RngStream, count: Optional[int] = None
):
    """Draw from the matrix normal with row scale sigma and column scale psi.

    Returns ``M + L_sigma Z L_psi^T`` with ``Z`` a grid of independent
    standard normals, so the linearized draw is Gaussian with mean
    ``vec(M)`` and covariance ``psi (x) sigma``.  With ``count`` set,
    returns a ``(count, k, n)`` stack drawn from a single stream pass.
    """
    m = np.asarray(m, dtype=float)
    if m.ndim != 2:
        raise ValueError(f"location must be a matrix, got ndim {m.ndim}")
    k, n = m.shape
    if sigma.dim != k or psi.dim != n:
        raise ValueError(
            f"location of shape {m.shape} does not match scales ({sigma.dim}, {psi.dim})"
        )
    if count is None:
        z = rng.standard_normal((k, n))
        return m + sigma.cholesky @ z @ psi.cholesky.T
    z = rng.standard_normal((int(count), k, n))
    return m + np.einsum("ij,bjl,kl->bik", sigma.cholesky, z, psi.cholesky)


def sample_tensor_normal(
    m, sigmas: Sequence[SpdMatrix], rng: RngStream, count: Optional[int] = None
):
    """Draw from the tensor normal with per-mode scale factors.

    A standard normal tensor is mode-multiplied by each Cholesky factor,
    so the linearized draw has covariance equal to the Kronecker product
    of the factors under the package vec convention.  Order two with
    factors ``[sigma, psi]`` agrees draw-for-draw with
    :func:`sample_matrix_normal` on the same stream.
    """
    m = np.asarray(m, dtype=float)
    dims = m.shape
    if len(sigmas) != m.ndim:
        raise ValueError(f"{len(sigmas)} scale factors for an order-{m.ndim} location")
    for i, s in enumerate(sigmas):
        if s.dim != dims[i]:
            raise ValueError(f"scales[{i}] has dim {s.dim}, expected {dims[i]}")
    batched = count is not None
    z = rng.standard_normal(((int(count),) if batched else ()) + dims)
    offset = 1 if batched else 0
    for i, s in enumerate(sigmas):
        z = mode_multiply(z, s.cholesky, i + offset)
    return m + z
