"""SVD, singular value thresholding, nuclear norm, and pseudoinverse.

Thin wrappers around LAPACK via numpy, pinned to the contracts the solvers
rely on: descending singular values, thin factors, and an explicit relative
cutoff (RANK_TOL * sigma_max) below which singular values count as zero.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NumericError, ParameterError

# Relative cutoff under which a singular value is treated as zero.
RANK_TOL = 1e-12


def _as_matrix(mat) -> np.ndarray:
    a = np.asarray(mat, dtype=np.float64)
    if a.ndim != 2:
        raise NumericError(f"expected a 2-D matrix, got ndim={a.ndim}")
    if not np.isfinite(a).all():
        raise NumericError("matrix contains non-finite entries")
    return a


@dataclass(frozen=True, eq=False)
class SvdFactors:
    """Thin SVD: u (m x r) and v (n x r) with orthonormal columns, sigma descending."""

    u: np.ndarray
    sigma: np.ndarray
    v: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return (self.u * self.sigma) @ self.v.T


def svd(mat) -> SvdFactors:
    a = _as_matrix(mat)
    u, s, vh = np.linalg.svd(a, full_matrices=False)
    return SvdFactors(u=u, sigma=s, v=vh.T)


def svt(mat, threshold: float) -> np.ndarray:
    """Soft-threshold the singular values of ``mat`` by ``threshold``.

    Returns the unique minimizer of threshold*||M'||_* + 0.5*||mat - M'||_F^2.
    """
    out, _ = svt_with_nuclear_norm(mat, threshold)
    return out


def svt_with_nuclear_norm(mat, threshold: float) -> tuple[np.ndarray, float]:
    """Like :func:`svt` but also returns the nuclear norm of the output,
    which the thresholding already knows for free."""
    a = _as_matrix(mat)
    if threshold < 0:
        raise ParameterError(f"threshold must be nonnegative, got {threshold}")
    u, s, vh = np.linalg.svd(a, full_matrices=False)
    shrunk = s - threshold
    keep = shrunk > 0
    if not keep.any():
        return np.zeros_like(a), 0.0
    out = (u[:, keep] * shrunk[keep]) @ vh[keep]
    return out, float(shrunk[keep].sum())


def nuclear_norm(mat) -> float:
    a = _as_matrix(mat)
    return float(np.linalg.svd(a, compute_uv=False).sum())


def pinv(mat, tol: float = RANK_TOL) -> np.ndarray:
    """Moore-Penrose pseudoinverse; singular values below tol*sigma_max are
    treated as zero."""
    a = _as_matrix(mat)
    if tol < 0:
        raise ParameterError(f"tol must be nonnegative, got {tol}")
    return np.linalg.pinv(a, rcond=tol)


def numerical_rank(mat, tol: float = RANK_TOL) -> int:
    a = _as_matrix(mat)
    s = np.linalg.svd(a, compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int((s > tol * s[0]).sum())
