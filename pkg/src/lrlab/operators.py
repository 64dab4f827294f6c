"""Dense operator algebra on finite tensor-product Hilbert spaces.

Everything here is plain ndarray manipulation: embedding local operators into
a labeled product space, commutators, spectral norms, and Heisenberg evolution
through a cached eigenbasis.  Site 0 is the first (leftmost) Kronecker factor,
so a basis index decomposes as b = sum_k s_k * prod_{j>k} d_j.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

HERMITICITY_TOL = 1e-10

# Detection threshold for (anti-)Hermitian structure, relative to the largest
# entry.  Commutators of Hermitian matrices land well inside this.
_SYMMETRY_DETECT_TOL = 1e-12


@dataclass(frozen=True)
class FullOperator:
    """An operator already embedded on the full lattice Hilbert space."""

    matrix: np.ndarray

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True)
class SpectralDecomposition:
    """Eigenbasis of a Hermitian operator, H = V diag(w) V^dagger."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def dim(self) -> int:
        return int(self.eigenvalues.shape[0])


def _as_matrix(a) -> np.ndarray:
    if isinstance(a, FullOperator):
        return a.matrix
    return np.asarray(a)


def _embedding_layout(op_sites, site_dims):
    op_sites = [int(s) for s in op_sites]
    n = len(site_dims)
    if not op_sites:
        raise ValueError("operator must act on at least one site")
    if op_sites != sorted(op_sites) or len(set(op_sites)) != len(op_sites):
        raise ValueError(f"operator sites must be sorted and unique, got {op_sites}")
    if op_sites[0] < 0 or op_sites[-1] >= n:
        raise ValueError(f"operator sites {op_sites} outside lattice of {n} sites")
    rest = [k for k in range(n) if k not in set(op_sites)]
    d_op = int(np.prod([site_dims[k] for k in op_sites]))
    d_rest = int(np.prod([site_dims[k] for k in rest])) if rest else 1
    return op_sites, rest, d_op, d_rest


def embed_dense(payload, op_sites, site_dims) -> np.ndarray:
    """Embed `payload` (acting on the sorted sites `op_sites`) into the full space.

    The payload's tensor factors follow increasing site order.  For a 2-qubit
    lattice, embedding Z on site 0 yields diag(1, 1, -1, -1): site 0 varies
    slowest.
    """
    payload = np.asarray(payload)
    op_sites, rest, d_op, d_rest = _embedding_layout(op_sites, site_dims)
    if payload.shape != (d_op, d_op):
        raise ValueError(
            f"payload shape {payload.shape} does not match support dimension {d_op}"
        )
    n = len(site_dims)
    full = np.kron(payload, np.eye(d_rest, dtype=payload.dtype))
    if not rest:
        return full
    # Axes currently follow (op_sites..., rest...); permute back to site order.
    mixed = list(op_sites) + rest
    perm = list(np.argsort(mixed))
    shape = [site_dims[k] for k in mixed]
    total = d_op * d_rest
    t = full.reshape(shape + shape)
    t = t.transpose(perm + [n + p for p in perm])
    return np.ascontiguousarray(t.reshape(total, total))


def embed_sparse(payload, op_sites, site_dims) -> sp.csr_matrix:
    """Sparse version of `embed_dense`, for operators used only in products."""
    payload = np.asarray(payload)
    op_sites, rest, d_op, d_rest = _embedding_layout(op_sites, site_dims)
    if payload.shape != (d_op, d_op):
        raise ValueError(
            f"payload shape {payload.shape} does not match support dimension {d_op}"
        )
    mixed_full = sp.kron(sp.csr_matrix(payload), sp.identity(d_rest, format="csr"))
    if not rest:
        return sp.csr_matrix(mixed_full)
    # Permute basis states from (op_sites..., rest...) layout to site order.
    mixed = list(op_sites) + rest
    perm = list(np.argsort(mixed))
    shape = [site_dims[k] for k in mixed]
    order = np.arange(d_op * d_rest).reshape(shape).transpose(perm).reshape(-1)
    out = sp.csr_matrix(mixed_full)[order][:, order]
    return sp.csr_matrix(out)


def commutator(a, b) -> np.ndarray:
    ma, mb = _as_matrix(a), _as_matrix(b)
    return ma @ mb - mb @ ma


def spectral_norm(a) -> float:
    """Largest singular value.

    Hermitian and anti-Hermitian inputs (commutators of Hermitians are the
    latter) take the eigvalsh path, which is about twice as fast as SVD.
    """
    m = _as_matrix(a)
    if m.size == 0:
        return 0.0
    scale = float(np.abs(m).max())
    if scale == 0.0:
        return 0.0
    tol = _SYMMETRY_DETECT_TOL * max(scale, 1.0)
    adj = m.conj().T
    if np.abs(m - adj).max() <= tol:
        return float(np.abs(np.linalg.eigvalsh(m)).max())
    if np.abs(m + adj).max() <= tol:
        return float(np.abs(np.linalg.eigvalsh(1j * m)).max())
    return float(np.linalg.svd(m, compute_uv=False)[0])


def decompose(h) -> SpectralDecomposition:
    """Eigendecompose a Hermitian matrix, rejecting non-Hermitian input."""
    m = _as_matrix(h)
    dev = float(np.abs(m - m.conj().T).max())
    scale = max(float(np.abs(m).max()), 1.0)
    if dev > HERMITICITY_TOL * scale:
        raise ValueError(f"matrix is not Hermitian: max deviation {dev:.3e}")
    w, v = np.linalg.eigh(m)
    return SpectralDecomposition(eigenvalues=w, eigenvectors=v)


def heisenberg_evolve(a, decomp: SpectralDecomposition, t: float):
    """A(t) = e^{iHt} A e^{-iHt} through the eigenbasis of H."""
    m = _as_matrix(a)
    v = decomp.eigenvectors
    phase = np.exp(1j * decomp.eigenvalues * t)
    inner = (v.conj().T @ m @ v) * np.outer(phase, phase.conj())
    out = v @ inner @ v.conj().T
    if isinstance(a, FullOperator):
        return FullOperator(out)
    return out
