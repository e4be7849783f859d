"""Kronecker-structured linear algebra on small dense scale factors.

Scale matrices enter every formula only through the Kronecker product of
the per-mode factors, and the product is never formed: quadratic forms
and log-determinants are computed from the cached Cholesky factors of
the individual modes, at cost ``sum_i n_i * n_total`` instead of
``n_total^2``.  :func:`materialize_kron` exists solely as a small-instance
test oracle and refuses to build anything larger than 64 x 64.

Conventions, fixed package-wide:

* An order-D array is linearized with the mode-1 index fastest
  (``ravel(order="F")``); for matrices this is column stacking.
* Under that layout, mode-wise multiplication by ``A_1, ..., A_D``
  acts on the linearized vector as the chain ``A_D (x) ... (x) A_1``,
  so a factor list ``[S_1, ..., S_D]`` in mode order materializes as
  ``S_D (x) ... (x) S_1``.  For a k x n matrix with row scale ``S`` and
  column scale ``P`` this reduces to the familiar ``P (x) S``.
"""

from __future__ import annotations

from functools import reduce
from typing import Sequence

import numpy as np
from scipy.linalg import solve_triangular

__all__ = [
    "NotPositiveDefiniteError",
    "SpdMatrix",
    "vec",
    "unvec",
    "mode_multiply",
    "trace_quadratic_form",
    "tensor_quadratic_form",
    "kron_logdet",
    "materialize_kron",
]

# Relative tolerance for the symmetry check of scale matrices; tolerates
# round-trip serialization noise.
_SYMMETRY_RTOL = 1e-12

# Guard for the explicit-Kronecker test oracle.
_MATERIALIZE_DIM_CAP = 64


class NotPositiveDefiniteError(ValueError):
    """A matrix required to be symmetric positive definite is not."""


class SpdMatrix:
    """Symmetric positive-definite matrix with a cached Cholesky factor.

    The input must be symmetric to relative precision ``1e-12`` (it is
    then symmetrized exactly before factoring) and must admit a Cholesky
    factorization with strictly positive pivots.  Instances are
    immutable after construction and safe to share across threads.
    """

    __slots__ = ("_entries", "_chol", "_log_det")

    def __init__(self, entries):
        a = np.array(entries, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError(f"expected a square matrix, got shape {a.shape}")
        if not np.all(np.isfinite(a)):
            raise ValueError("matrix entries must be finite")
        asym = np.max(np.abs(a - a.T)) if a.size else 0.0
        scale = np.max(np.abs(a)) if a.size else 0.0
        if asym > _SYMMETRY_RTOL * max(scale, np.finfo(float).tiny):
            raise ValueError(
                f"matrix is not symmetric: max |S - S^T| = {asym:.3e} "
                f"exceeds {_SYMMETRY_RTOL:g} * max |S| = {_SYMMETRY_RTOL * scale:.3e}"
            )
        a = 0.5 * (a + a.T)
        try:
            chol = np.linalg.cholesky(a)
        except np.linalg.LinAlgError as exc:
            raise NotPositiveDefiniteError(
                "Cholesky factorization failed: matrix is not positive definite"
            ) from exc
        self._entries = a
        self._chol = chol
        self._log_det = 2.0 * float(np.sum(np.log(np.diag(chol))))
        self._entries.setflags(write=False)
        self._chol.setflags(write=False)

    @property
    def dim(self) -> int:
        return self._entries.shape[0]

    @property
    def entries(self) -> np.ndarray:
        return self._entries

    @property
    def cholesky(self) -> np.ndarray:
        """Lower-triangular factor L with L L^T equal to the matrix."""
        return self._chol

    @property
    def log_det(self) -> float:
        """log det, computed as twice the log-sum of the pivot diagonal."""
        return self._log_det

    def solve_lower(self, b: np.ndarray) -> np.ndarray:
        """Solve L x = b with the cached lower factor."""
        return solve_triangular(self._chol, b, lower=True)

    def __repr__(self) -> str:
        return f"SpdMatrix(dim={self.dim})"


def _as_spd(value) -> SpdMatrix:
    return value if isinstance(value, SpdMatrix) else SpdMatrix(value)


def vec(x) -> np.ndarray:
    """Linearize an array with the mode-1 index fastest.

    For matrices this is column stacking; for order-1 arrays the
    identity map.
    """
    return np.ravel(np.asarray(x, dtype=float), order="F")


def unvec(v, dims: Sequence[int]) -> np.ndarray:
    """Inverse of :func:`vec` for the given dimension list."""
    v = np.asarray(v, dtype=float)
    dims = tuple(int(d) for d in dims)
    if v.size != int(np.prod(dims)):
        raise ValueError(f"vector of length {v.size} cannot be reshaped to dims {dims}")
    return np.reshape(v, dims, order="F")


def mode_multiply(x, m, mode: int) -> np.ndarray:
    """Multiply an order-D array by a matrix along one mode.

    ``m`` must have as many columns as ``x`` has entries along ``mode``;
    the result replaces that dimension with ``m.shape[0]``.  Applying
    matrices ``A_1, ..., A_D`` on every mode acts on :func:`vec` as the
    Kronecker chain ``A_D (x) ... (x) A_1``.
    """
    x = np.asarray(x, dtype=float)
    m = np.asarray(m, dtype=float)
    if m.ndim != 2:
        raise ValueError(f"mode factor must be a matrix, got ndim {m.ndim}")
    if not 0 <= mode < x.ndim:
        raise ValueError(f"mode {mode} out of range for an order-{x.ndim} array")
    if m.shape[1] != x.shape[mode]:
        raise ValueError(
            f"mode-{mode} factor has {m.shape[1]} columns but the array "
            f"has length {x.shape[mode]} along that mode"
        )
    out = np.tensordot(m, x, axes=(1, mode))
    return np.moveaxis(out, 0, mode)


def _mode_solve(x: np.ndarray, chol: np.ndarray, mode: int) -> np.ndarray:
    """Apply L^{-1} along one mode via a triangular solve (no inverse)."""
    moved = np.moveaxis(x, mode, 0)
    flat = moved.reshape(moved.shape[0], -1)
    solved = solve_triangular(chol, flat, lower=True)
    return np.moveaxis(solved.reshape(moved.shape), 0, mode)


def trace_quadratic_form(psi: SpdMatrix, sigma: SpdMatrix, a, b) -> float:
    """``tr(Psi^{-1} A^T Sigma^{-1} B)`` for k x n matrices A, B.

    Equals ``vec(A)^T (Psi (x) Sigma)^{-1} vec(B)``.  Computed by
    whitening both arguments with the cached triangular factors (two
    solves per argument) and taking the Frobenius inner product; no
    inverse is ever formed.  Symmetric in ``(a, b)``.
    """
    sigma = _as_spd(sigma)
    psi = _as_spd(psi)
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.ndim != 2 or a.shape != b.shape:
        raise ValueError(f"arguments must be matrices of equal shape, got {a.shape} and {b.shape}")
    if a.shape != (sigma.dim, psi.dim):
        raise ValueError(
            f"arguments of shape {a.shape} do not match scales ({sigma.dim}, {psi.dim})"
        )
    a_w = solve_triangular(psi.cholesky, sigma.solve_lower(a).T, lower=True)
    if b is a or np.shares_memory(a, b):
        b_w = a_w
    else:
        b_w = solve_triangular(psi.cholesky, sigma.solve_lower(b).T, lower=True)
    return float(np.sum(a_w * b_w))


def tensor_quadratic_form(x, y, sigmas: Sequence[SpdMatrix]) -> float:
    """``vec(x)^T (kron of sigmas)^{-1} vec(y)`` via mode-wise solves.

    One triangular solve per mode and argument, cost
    ``sum_i n_i * n_total``; the Kronecker product itself is never
    formed.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    sigmas = [_as_spd(s) for s in sigmas]
    if x.shape != y.shape:
        raise ValueError(f"arguments must have equal dims, got {x.shape} and {y.shape}")
    _check_mode_dims(sigmas, x.shape)
    same = y is x or np.shares_memory(x, y)
    x_w = x
    y_w = y if not same else None
    for mode, s in enumerate(sigmas):
        x_w = _mode_solve(x_w, s.cholesky, mode)
        if not same:
            y_w = _mode_solve(y_w, s.cholesky, mode)
    if same:
        y_w = x_w
    return float(np.sum(x_w * y_w))


def kron_logdet(sigmas: Sequence[SpdMatrix], dims: Sequence[int]) -> float:
    """log det of the Kronecker product of the factors.

    Equals ``sum_i (n_total / n_i) * log det S_i`` with each factor's
    log-determinant read off its Cholesky diagonal.
    """
    sigmas = [_as_spd(s) for s in sigmas]
    dims = tuple(int(d) for d in dims)
    _check_mode_dims(sigmas, dims)
    n_total = int(np.prod(dims))
    return float(sum((n_total / s.dim) * s.log_det for s in sigmas))


def materialize_kron(sigmas: Sequence[SpdMatrix]) -> SpdMatrix:
    """Explicit Kronecker product of the factor list, small instances only.

    Factors are given in mode order and composed as
    ``S_D (x) ... (x) S_1`` so the result matches the action of
    :func:`mode_multiply` on :func:`vec`.  Test oracle: refuses products
    larger than 64 x 64.
    """
    sigmas = [_as_spd(s) for s in sigmas]
    if not sigmas:
        raise ValueError("factor list must be non-empty")
    n_total = int(np.prod([s.dim for s in sigmas]))
    if n_total > _MATERIALIZE_DIM_CAP:
        raise ValueError(
            f"refusing to materialize a {n_total} x {n_total} Kronecker product "
            f"(cap {_MATERIALIZE_DIM_CAP}); use the structured operations instead"
        )
    full = reduce(np.kron, [s.entries for s in reversed(sigmas)])
    return SpdMatrix(full)


def _check_mode_dims(sigmas: Sequence[SpdMatrix], dims: Sequence[int]) -> None:
    if len(sigmas) != len(dims):
        raise ValueError(f"{len(sigmas)} scale factors for {len(dims)} modes")
    for i, (s, d) in enumerate(zip(sigmas, dims)):
        if s.dim != d:
            raise ValueError(f"scales[{i}] has dim {s.dim}, expected {d}")
