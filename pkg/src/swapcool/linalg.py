"""Dense complex linear algebra used throughout the package.

Matrices, state vectors and density matrices are plain ``numpy`` arrays.
Composite systems follow a single ordering convention: subsystem 0 is the
most significant factor of the flattened index, exactly as ``np.kron``
produces it.
"""

from __future__ import annotations

from functools import reduce
from typing import NamedTuple, Sequence

import numpy as np

from .tolerances import TOL


class NotHermitianError(ValueError):
    pass


def tensor_product(*factors: np.ndarray) -> np.ndarray:
    """Kronecker product of the factors, first factor most significant."""
    if not factors:
        return np.ones((1, 1), dtype=complex)
    return reduce(np.kron, [np.asarray(f) for f in factors])


def _check_keep(dims: Sequence[int], keep: Sequence[int]) -> list[int]:
    keep = sorted(set(int(k) for k in keep))
    if not keep:
        raise ValueError("keep must name at least one subsystem")
    for k in keep:
        if k < 0 or k >= len(dims):
            raise IndexError(f"subsystem index {k} out of range for dims {tuple(dims)}")
    return keep


def partial_trace(rho: np.ndarray, dims: Sequence[int], keep: Sequence[int]) -> np.ndarray:
    """Reduced density matrix on the subsystems in ``keep`` (order preserved)."""
    dims = [int(d) for d in dims]
    keep = _check_keep(dims, keep)
    n = len(dims)
    total = int(np.prod(dims))
    if rho.shape != (total, total):
        raise ValueError(f"rho has shape {rho.shape}, expected {(total, total)} for dims {dims}")
    t = rho.reshape(dims + dims)
    # contract each traced subsystem's row index with its column index
    row = list(range(n))
    col = [n + k if k in keep else k for k in range(n)]
    out = [k for k in keep] + [n + k for k in keep]
    red = np.einsum(t, row + col, out)
    d_keep = int(np.prod([dims[k] for k in keep]))
    return red.reshape(d_keep, d_keep)


def reduced_from_pure(psi: np.ndarray, dims: Sequence[int], keep: Sequence[int]) -> np.ndarray:
    """Reduced density matrix of the pure state ``psi`` without forming |psi><psi|."""
    dims = [int(d) for d in dims]
    keep = _check_keep(dims, keep)
    traced = [k for k in range(len(dims)) if k not in keep]
    t = np.moveaxis(np.asarray(psi).reshape(dims), keep + traced, list(range(len(dims))))
    d_keep = int(np.prod([dims[k] for k in keep]))
    m = t.reshape(d_keep, -1)
    return m @ m.conj().T


def hermiticity_defect(h: np.ndarray) -> float:
    return float(np.max(np.abs(h - h.conj().T))) if h.size else 0.0


def eig_hermitian(h: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Ascending eigenvalues and unitary eigenvector matrix of a Hermitian matrix."""
    h = np.asarray(h)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {h.shape}")
    defect = hermiticity_defect(h)
    scale = max(1.0, float(np.max(np.abs(h)))) if h.size else 1.0
    if defect > TOL.hermitian * scale:
        raise NotHermitianError(f"matrix is not Hermitian: max |A - A^dag| = {defect:.3e}")
    return np.linalg.eigh(h)


def evolve_unitary(h: np.ndarray, t: float) -> np.ndarray:
    """exp(-i h t) through the eigendecomposition of ``h``."""
    w, q = eig_hermitian(h)
    return (q * np.exp(-1j * w * t)) @ q.conj().T


def is_unitary(u: np.ndarray, tol: float = TOL.unitary) -> bool:
    u = np.asarray(u)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        return False
    return float(np.linalg.norm(u.conj().T @ u - np.eye(u.shape[0]))) <= tol


class PolarResult(NamedTuple):
    v: np.ndarray
    p: np.ndarray
    unique: bool


def canonical_basis(span: np.ndarray) -> np.ndarray:
    """Orthonormal basis of span(columns), built by projecting e_0, e_1, ... in order."""
    k = span.shape[1]
    if k == 0:
        return span
    proj = span @ span.conj().T
    basis: list[np.ndarray] = []
    for i in range(span.shape[0]):
        v = proj[:, i].copy()
        for b in basis:
            v -= (b.conj() @ v) * b
        nv = np.linalg.norm(v)
        if nv > 1e-8:
            basis.append(v / nv)
            if len(basis) == k:
                break
    return np.column_stack(basis)


def polar_decompose(d: np.ndarray) -> PolarResult:
    """Left polar decomposition d = p @ v with v unitary and p positive semidefinite.

    Computed from the SVD d = A S B^dag as v = A B^dag, p = A S A^dag. When some
    singular values vanish the unitary factor is not unique; the null blocks of
    A and B are then replaced by canonical bases (standard basis vectors
    projected in index order) and ``unique`` is False.
    """
    d = np.asarray(d, dtype=complex)
    if d.ndim != 2 or d.shape[0] != d.shape[1]:
        raise ValueError(f"polar decomposition needs a square matrix, got {d.shape}")
    a, s, bh = np.linalg.svd(d)
    b = bh.conj().T
    null = s < TOL.singular
    unique = not bool(np.any(null))
    if not unique:
        a = a.copy()
        b = b.copy()
        a[:, null] = canonical_basis(a[:, null])
        b[:, null] = canonical_basis(b[:, null])
    v = a @ b.conj().T
    p = (a * s) @ a.conj().T
    p = (p + p.conj().T) / 2
    return PolarResult(v, p, unique)


class Norms(NamedTuple):
    frobenius: float
    trace_norm: float
    spectral: float


def norms(m: np.ndarray) -> Norms:
    s = np.linalg.svd(np.asarray(m), compute_uv=False)
    return Norms(float(np.sqrt(np.sum(s**2))), float(np.sum(s)), float(s[0]) if s.size else 0.0)


def trace_norm(m: np.ndarray) -> float:
    return float(np.sum(np.linalg.svd(np.asarray(m), compute_uv=False)))


def trace_distance(a: np.ndarray, b: np.ndarray) -> float:
    """Half the trace norm of a - b."""
    return 0.5 * trace_norm(np.asarray(a) - np.asarray(b))


def density_defects(rho: np.ndarray) -> tuple[float, float, float]:
    """(Hermiticity defect, |trace - 1|, most negative eigenvalue clipped at 0)."""
    herm = hermiticity_defect(rho)
    tr = abs(complex(np.trace(rho)) - 1.0)
    w = np.linalg.eigvalsh((rho + rho.conj().T) / 2)
    return herm, tr, float(max(0.0, -w[0]))


def is_density_matrix(rho: np.ndarray) -> bool:
    herm, tr, neg = density_defects(rho)
    return herm <= TOL.hermitian and tr <= TOL.trace and neg <= TOL.psd


def projector(psi: np.ndarray) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex).ravel()
    return np.outer(psi, psi.conj())


def purity(rho: np.ndarray) -> float:
    return float(np.real(np.vdot(rho, rho)))
