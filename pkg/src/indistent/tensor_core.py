"""Dense complex linear algebra on small tensor-product spaces.

Vectors are 1-D complex ``numpy`` arrays and operators are 2-D arrays.
Composite indices are flattened row-major, the first factor being the
slowest-varying one (``np.kron`` convention).
"""

from dataclasses import dataclass
import math

import numpy as np

from .config import DEFAULT_TOL, DIM_CAP
from .errors import DimensionError, ValidationError

__all__ = [
    "SchmidtResult",
    "as_vector",
    "as_matrix",
    "tensor_product",
    "partial_trace",
    "svd_schmidt",
    "orthonormalize",
    "haar_unitary",
    "projector_onto",
    "random_vector",
    "random_hermitian",
    "check_dim",
]


@dataclass(frozen=True)
class SchmidtResult:
    """Schmidt decomposition ``psi = sum_i coefficients[i] left[i] (x) right[i]``.

    ``left_basis`` and ``right_basis`` hold one vector per row; there are
    ``min(dimA, dimB)`` coefficients, sorted in descending order.
    """

    coefficients: np.ndarray
    left_basis: np.ndarray
    right_basis: np.ndarray

    def reconstruct(self):
        return np.einsum("i,ia,ib->ab", self.coefficients, self.left_basis,
                         self.right_basis).reshape(-1)


def check_dim(dim, cap=DIM_CAP):
    """Reject state-space dimensions above ``cap``."""
    if dim > cap:
        raise DimensionError(f"dimension {dim} exceeds the cap of {cap} entries")
    return dim


def as_vector(v):
    arr = np.asarray(v, dtype=complex)
    if arr.ndim != 1 or arr.size == 0:
        raise DimensionError(f"expected a non-empty 1-D vector, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValidationError("vector has non-finite entries")
    return arr


def as_matrix(m, square=False):
    arr = np.asarray(m, dtype=complex)
    if arr.ndim != 2 or arr.size == 0:
        raise DimensionError(f"expected a non-empty 2-D matrix, got shape {arr.shape}")
    if square and arr.shape[0] != arr.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValidationError("matrix has non-finite entries")
    return arr


def tensor_product(a, b, cap=DIM_CAP):
    """Kronecker product of two vectors; entry ``i*len(b)+j`` is ``a[i]*b[j]``."""
    a = as_vector(a)
    b = as_vector(b)
    check_dim(a.size * b.size, cap)
    return np.kron(a, b)


def partial_trace(rho, dims, keep):
    """Trace out every tensor factor of ``rho`` not listed in ``keep``.

    Parameters
    ----------
    rho : array_like, shape (D, D)
        Operator on ``C^dims[0] (x) ... (x) C^dims[-1]`` with ``D = prod(dims)``.
    dims : sequence of int
        Factor dimensions.
    keep : iterable of int
        Factors to keep. The result keeps them in ascending order. An empty
        set yields the ``1x1`` matrix holding the full trace.
    """
    rho = as_matrix(rho, square=True)
    dims = [int(d) for d in dims]
    if any(d < 1 for d in dims):
        raise DimensionError(f"factor dimensions must be positive, got {dims}")
    total = math.prod(dims)
    if rho.shape[0] != total:
        raise DimensionError(f"operator of size {rho.shape[0]} does not match dims {dims}")
    keep = sorted(set(int(k) for k in keep))
    if any(k < 0 or k >= len(dims) for k in keep):
        raise DimensionError(f"keep={keep} out of range for {len(dims)} factors")
    k = len(dims)
    if k > 26:
        raise DimensionError("at most 26 tensor factors are supported")
    letters = "abcdefghijklmnopqrstuvwxyz"
    upper = letters.upper()
    row = list(letters[:k])
    col = [row[j] if j not in keep else upper[j] for j in range(k)]
    out = "".join(row[j] for j in keep) + "".join(col[j] for j in keep)
    t = rho.reshape(dims + dims)
    reduced = np.einsum("".join(row) + "".join(col) + "->" + out, t)
    kd = math.prod(dims[j] for j in keep)
    return reduced.reshape(kd, kd)


def svd_schmidt(psi, dimA, dimB, tol=DEFAULT_TOL):
    """Schmidt decomposition of a normalized bipartite vector."""
    psi = as_vector(psi)
    if psi.size != dimA * dimB:
        raise DimensionError(f"vector of length {psi.size} is not {dimA}x{dimB}")
    norm = np.linalg.norm(psi)
    if abs(norm - 1.0) > tol:
        raise ValidationError(f"Schmidt decomposition needs a normalized vector (norm={norm!r})")
    u, s, vh = np.linalg.svd(psi.reshape(dimA, dimB), full_matrices=False)
    return SchmidtResult(coefficients=s, left_basis=u.T.copy(), right_basis=vh)


def orthonormalize(vectors, tol=DEFAULT_TOL):
    """Gram-Schmidt with reorthogonalization.

    Vectors whose residual norm falls below ``tol`` times their own norm
    are treated as linearly dependent and dropped. Returns an array with
    one orthonormal vector per row.
    """
    vecs = [as_vector(v) for v in vectors]
    if not vecs:
        raise ValidationError("orthonormalize needs at least one vector")
    dim = vecs[0].size
    if any(v.size != dim for v in vecs):
        raise DimensionError("vectors must share one dimension")
    basis = []
    for v in vecs:
        scale = np.linalg.norm(v)
        if scale == 0.0:
            continue
        w = v.copy()
        for _ in range(2):
            for b in basis:
                w -= np.vdot(b, w) * b
        r = np.linalg.norm(w)
        if r <= tol * scale:
            continue
        basis.append(w / r)
    if not basis:
        return np.zeros((0, dim), dtype=complex)
    return np.array(basis)


def haar_unitary(dim, rng):
    """Draw a Haar-distributed unitary from ``U(dim)``.

    QR factorization of a complex Ginibre matrix, with each column of ``Q``
    multiplied by the phase of the matching diagonal entry of ``R`` so the
    result does not depend on the QR sign convention.
    """
    if dim < 1:
        raise DimensionError(f"dim must be >= 1, got {dim}")
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    phases = d / np.abs(d)
    return q * phases[np.newaxis, :]


def projector_onto(basis, tol=DEFAULT_TOL):
    """Orthogonal projector ``sum_b |b><b|`` for an orthonormal set of rows."""
    b = np.atleast_2d(np.asarray(basis, dtype=complex))
    if b.ndim != 2 or b.shape[0] == 0:
        raise DimensionError("projector needs at least one basis vector")
    gram = b.conj() @ b.T
    err = np.max(np.abs(gram - np.eye(b.shape[0])))
    if err > tol:
        raise ValidationError(f"basis is not orthonormal (max Gram deviation {err:.3e})")
    return b.T @ b.conj()


def random_vector(dim, rng):
    """Normalized vector with i.i.d. complex Gaussian entries."""
    v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return v / np.linalg.norm(v)


def random_hermitian(dim, rng):
    a = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return (a + a.conj().T) / 2
