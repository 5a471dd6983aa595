"""Kernel evaluation and Gram-matrix construction for the dual solver."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

RBF = "rbf"
LINEAR = "linear"


@dataclass(frozen=True)
class KernelSpec:
    """Kernel choice: Gaussian similarity with bandwidth ``sigma_sq`` or a plain inner product."""

    kind: str = RBF
    sigma_sq: float = 1.0

    def validate(self) -> None:
        if self.kind not in (RBF, LINEAR):
            raise ValueError(f"unknown kernel kind {self.kind!r}")
        if self.kind == RBF and not self.sigma_sq > 0.0:
            raise ValueError(f"rbf bandwidth must be positive, got {self.sigma_sq}")


def _sq_dists(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    # Explicit (a-b)^2 broadcast keeps the matrix exactly symmetric when a is b.
    diff = a[:, None, :] - b[None, :, :]
    return np.einsum("ijk,ijk->ij", diff, diff)


def kernel_eval(x: np.ndarray, x_other: np.ndarray, spec: KernelSpec) -> float:
    """Kernel value for a single pair of equal-length vectors."""
    spec.validate()
    x = np.asarray(x, dtype=float)
    x_other = np.asarray(x_other, dtype=float)
    if x.shape != x_other.shape or x.ndim != 1:
        raise ValueError(f"dimension mismatch: {x.shape} vs {x_other.shape}")
    if spec.kind == LINEAR:
        return float(np.dot(x, x_other))
    d = x - x_other
    return float(np.exp(-np.dot(d, d) / (2.0 * spec.sigma_sq)))


def kernel_cross(a: np.ndarray, b: np.ndarray, spec: KernelSpec) -> np.ndarray:
    """Kernel matrix between the rows of ``a`` and the rows of ``b``."""
    spec.validate()
    a = np.atleast_2d(np.asarray(a, dtype=float))
    b = np.atleast_2d(np.asarray(b, dtype=float))
    if a.shape[1] != b.shape[1]:
        raise ValueError(f"dimension mismatch: {a.shape[1]} vs {b.shape[1]} columns")
    if spec.kind == LINEAR:
        return a @ b.T
    return np.exp(-_sq_dists(a, b) / (2.0 * spec.sigma_sq))


def gram_matrix(x: np.ndarray, spec: KernelSpec) -> np.ndarray:
    """Symmetric kernel matrix over the rows of ``x``.

    The upper triangle is mirrored so K[i][j] == K[j][i] holds exactly,
    and the RBF diagonal is pinned to 1.
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    if x.shape[0] < 1:
        raise ValueError("need at least one row")
    k = kernel_cross(x, x, spec)
    k = np.triu(k) + np.triu(k, 1).T
    if spec.kind == RBF:
        np.fill_diagonal(k, 1.0)
    return k
