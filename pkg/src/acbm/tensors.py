"""Dense multilinear algebra on one (2n+1)-dimensional tangent space.

Conventions used throughout the package:

* a vector is a length-``d`` array of components in the working basis;
* an endomorphism ``M`` acts by ``M @ x``, so column ``j`` holds ``M e_j``;
* a covariant 3-tensor ``A`` stores ``A[i, j, k] = A(e_i, e_j, e_k)``;
* a vector-valued bilinear map ``Q`` stores ``Q[i, j, a]`` = component ``a``
  of ``Q(e_i, e_j)``.
"""

from __future__ import annotations

import numpy as np

DEFAULT_TOL = 1e-9
DEGENERACY_THRESHOLD = 1e-12


class DegenerateMetric(ValueError):
    """The metric matrix is (numerically) singular."""


class ShapeMismatch(ValueError):
    """Array shapes are inconsistent with the working dimension."""


def dim_from_n(n: int) -> int:
    if int(n) != n or n < 1:
        raise ValueError(f"n must be a positive integer, got {n!r}")
    return 2 * int(n) + 1


def n_from_dim(d: int) -> int:
    if d < 3 or d % 2 == 0:
        raise ShapeMismatch(f"dimension must be odd and >= 3, got {d}")
    return (d - 1) // 2


def as_tensor3(A, d: int | None = None) -> np.ndarray:
    A = np.asarray(A, dtype=float)
    if A.ndim != 3 or not (A.shape[0] == A.shape[1] == A.shape[2]):
        raise ShapeMismatch(f"expected a cubic 3-tensor, got shape {A.shape}")
    if d is not None and A.shape[0] != d:
        raise ShapeMismatch(f"expected dimension {d}, got {A.shape[0]}")
    if not np.all(np.isfinite(A)):
        raise ValueError("tensor has non-finite entries")
    return A


def frozen(a) -> np.ndarray:
    """Return a read-only float copy of ``a``."""
    out = np.array(a, dtype=float)
    out.flags.writeable = False
    return out


def metric_inverse(g) -> np.ndarray:
    """Inverse of a symmetric nondegenerate metric matrix, symmetrized."""
    g = np.asarray(g, dtype=float)
    if g.ndim != 2 or g.shape[0] != g.shape[1]:
        raise ShapeMismatch(f"metric must be square, got shape {g.shape}")
    if abs(np.linalg.det(g)) < DEGENERACY_THRESHOLD:
        raise DegenerateMetric(f"|det g| = {abs(np.linalg.det(g)):.3e} is below threshold")
    ginv = np.linalg.inv(g)
    return 0.5 * (ginv + ginv.T)


def signature(g, tol: float = 1e-12) -> tuple[int, int]:
    """(number of negative, number of positive) eigenvalues of a symmetric matrix."""
    ev = np.linalg.eigvalsh(0.5 * (np.asarray(g) + np.asarray(g).T))
    scale = max(1.0, float(np.max(np.abs(ev))))
    return int(np.sum(ev < -tol * scale)), int(np.sum(ev > tol * scale))


# Index brackets.

def antisym_first_pair(A: np.ndarray) -> np.ndarray:
    """``{A(x,y,z)}_[x<->y] = A(x,y,z) - A(y,x,z)``."""
    return A - A.transpose(1, 0, 2)


def sym_first_pair(A: np.ndarray) -> np.ndarray:
    """``{A(x,y,z)}_(x<->y) = A(x,y,z) + A(y,x,z)``."""
    return A + A.transpose(1, 0, 2)


def antisym_last_pair(A: np.ndarray) -> np.ndarray:
    """``{A(x,y,z)}_[y<->z] = A(x,y,z) - A(x,z,y)``."""
    return A - A.transpose(0, 2, 1)


def sym_last_pair(A: np.ndarray) -> np.ndarray:
    """``{A(x,y,z)}_(y<->z) = A(x,y,z) + A(x,z,y)``."""
    return A + A.transpose(0, 2, 1)


def cyclic_sum(A: np.ndarray) -> np.ndarray:
    """``A(x,y,z) + A(y,z,x) + A(z,x,y)``."""
    return A + np.transpose(A, (2, 0, 1)) + np.transpose(A, (1, 2, 0))


# Slot substitution and contraction.

def sub(A: np.ndarray, M: np.ndarray, slot: int) -> np.ndarray:
    """Replace argument ``slot`` of ``A`` by ``M x``."""
    return np.moveaxis(np.tensordot(A, M, axes=([slot], [0])), -1, slot)


def subs(A: np.ndarray, *maps) -> np.ndarray:
    """Apply one endomorphism (or ``None`` for identity) per slot."""
    for slot, M in enumerate(maps):
        if M is not None:
            A = sub(A, M, slot)
    return A


def at(A: np.ndarray, v: np.ndarray, slot: int) -> np.ndarray:
    """Contract argument ``slot`` of ``A`` with the vector ``v``."""
    return np.tensordot(A, v, axes=([slot], [0]))


def outer3(a, b, c) -> np.ndarray:
    return np.einsum("i,j,k->ijk", a, b, c)


def lower_with_g(Q: np.ndarray, g: np.ndarray) -> np.ndarray:
    """``result(x,y,z) = g(Q(x,y), z)`` for a vector-valued bilinear map ``Q``."""
    return np.einsum("ija,ak->ijk", Q, g)


def raise_with(A: np.ndarray, ginv: np.ndarray) -> np.ndarray:
    """Vector-valued map ``Q`` with ``g(Q(x,y), z) = A(x,y,z)``."""
    return np.einsum("ijk,ka->ija", A, ginv)


def max_abs(*arrays) -> float:
    return max((float(np.max(np.abs(a))) if np.size(a) else 0.0) for a in arrays)


def rel_residual(a, b=None) -> float:
    """Max-abs difference normalized by the operands' max-abs (floored at 1)."""
    a = np.asarray(a, dtype=float)
    if b is None:
        return float(np.max(np.abs(a))) if a.size else 0.0
    b = np.asarray(b, dtype=float)
    scale = max(1.0, max_abs(a, b))
    return float(np.max(np.abs(a - b))) / scale if a.size else 0.0
