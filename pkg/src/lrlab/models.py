"""Concrete lattice models exercised by the bounds.

Three builders share the two-family container:

* ``tfim``: transverse-field Ising chain; family 0 holds the X_i X_{i+1}
  bonds (coupling J), family 1 the Z_i fields (coupling g).
* ``commuting_ising``: the bonds alone; family 1 is empty, so every pair of
  terms commutes and the model carries zero Lieb-Robinson velocity.
* ``dicke_chain``: spins interleaved with truncated bosonic modes,
  h_n = sigma^z_n (b_n^dag + b_n) + i sigma^z_n (b_{n+1}^dag - b_{n+1}),
  families split by the parity of n.  Site 2k is mode k (dimension =
  truncation), site 2k+1 is spin k, so the interaction graph is a plain path
  of length 2N.
"""

from __future__ import annotations

import numpy as np

from .lattice import LocalTerm, TwoFamilyHamiltonian, build_graph, region
from .operators import embed_dense

PAULI_X = np.array([[0.0, 1.0], [1.0, 0.0]])
PAULI_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]])
PAULI_Z = np.array([[1.0, 0.0], [0.0, -1.0]])
ID2 = np.eye(2)

FULL_HAMILTONIAN_DIM_CAP = 2**14


def ladder_lower(truncation: int) -> np.ndarray:
    """Truncated annihilation operator: b|k> = sqrt(k)|k-1>, k < truncation."""
    if truncation < 2:
        raise ValueError(f"truncation must be at least 2, got {truncation}")
    return np.diag(np.sqrt(np.arange(1.0, truncation)), 1)


def mode_quadratures(truncation: int):
    """(P, Qtilde) = (b^dag + b, i(b^dag - b)) at the given truncation."""
    b = ladder_lower(truncation)
    return b + b.T, 1j * (b.T - b)


def _path_graph(site_count: int):
    edges = [(i, i + 1) for i in range(site_count - 1)]
    return build_graph(site_count, edges)


def build_tfim(length: int, j: float = 1.0, g: float = 1.0) -> TwoFamilyHamiltonian:
    if length < 2:
        raise ValueError("tfim needs at least 2 sites")
    graph = _path_graph(length)
    xx = np.kron(PAULI_X, PAULI_X)
    bonds = tuple(
        LocalTerm(0, i, region(graph, (i, i + 1)), xx) for i in range(length - 1)
    )
    fields = tuple(
        LocalTerm(1, i, region(graph, (i,)), PAULI_Z.copy()) for i in range(length)
    )
    return TwoFamilyHamiltonian(
        graph=graph,
        site_dims=(2,) * length,
        family0=bonds,
        family1=fields,
        h0=float(j),
        h1=float(g),
        name="tfim",
    )


def build_commuting_ising(length: int, j: float = 1.0) -> TwoFamilyHamiltonian:
    if length < 2:
        raise ValueError("commuting_ising needs at least 2 sites")
    graph = _path_graph(length)
    xx = np.kron(PAULI_X, PAULI_X)
    bonds = tuple(
        LocalTerm(0, i, region(graph, (i, i + 1)), xx) for i in range(length - 1)
    )
    return TwoFamilyHamiltonian(
        graph=graph,
        site_dims=(2,) * length,
        family0=bonds,
        family1=(),
        h0=float(j),
        h1=0.0,
        name="commuting_ising",
    )


def build_dicke_chain(
    length: int, h: float = 1.0, truncation: int = 4
) -> TwoFamilyHamiltonian:
    """Spin-boson chain of `length` spins and `length` truncated modes."""
    if length < 1:
        raise ValueError("dicke_chain needs at least 1 spin")
    m = int(truncation)
    site_count = 2 * length
    graph = _path_graph(site_count)
    dims = tuple(m if s % 2 == 0 else 2 for s in range(site_count))
    p_op, q_op = mode_quadratures(m)
    id_m = np.eye(m)

    terms = []
    for n in range(length):
        if n < length - 1:
            # Support (mode_n, spin_n, mode_{n+1}) in increasing site order.
            sites = (2 * n, 2 * n + 1, 2 * n + 2)
            payload = np.kron(p_op, np.kron(PAULI_Z, id_m)) + np.kron(
                id_m, np.kron(PAULI_Z, q_op)
            )
        else:
            # Open boundary: the last spin couples only to its own mode.
            sites = (2 * n, 2 * n + 1)
            payload = np.kron(p_op, PAULI_Z)
        terms.append((n, sites, payload))

    family0 = tuple(
        LocalTerm(0, n, region(graph, sites), payload)
        for n, sites, payload in terms
        if n % 2 == 0
    )
    family1 = tuple(
        LocalTerm(1, n, region(graph, sites), payload)
        for n, sites, payload in terms
        if n % 2 == 1
    )
    return TwoFamilyHamiltonian(
        graph=graph,
        site_dims=dims,
        family0=family0,
        family1=family1,
        h0=float(h),
        h1=float(h),
        boson_sites=frozenset(range(0, site_count, 2)),
        name="dicke_chain",
    )


def dicke_commuting_terms(model: TwoFamilyHamiltonian) -> tuple:
    """The rewriting h~_n = b_n (sigma^z_n - i sigma^z_{n-1}) + h.c.

    The h~_n commute pairwise exactly (each touches a single mode and only
    sigma^z spins) and sum to the same Hamiltonian as the h_n.
    """
    if model.name != "dicke_chain":
        raise ValueError("commuting rewriting defined for dicke_chain only")
    length = model.graph.site_count // 2
    m = model.site_dims[0]
    p_op, q_op = mode_quadratures(m)
    out = []
    for n in range(length):
        if n == 0:
            sites = (0, 1)
            payload = np.kron(p_op, PAULI_Z)
        else:
            # Support (spin_{n-1}, mode_n, spin_n).
            sites = (2 * n - 1, 2 * n, 2 * n + 1)
            payload = np.kron(PAULI_Z, np.kron(q_op, ID2)) + np.kron(
                np.eye(2), np.kron(p_op, PAULI_Z)
            )
        out.append(LocalTerm(0, n, region(model.graph, sites), payload))
    return tuple(out)


def build_model(name: str, length: int, **kwargs) -> TwoFamilyHamiltonian:
    """Dispatch on model name; kwargs are the model's couplings/truncation."""
    builders = {
        "tfim": build_tfim,
        "commuting_ising": build_commuting_ising,
        "dicke_chain": build_dicke_chain,
    }
    if name not in builders:
        raise ValueError(f"unknown model {name!r}; expected one of {sorted(builders)}")
    return builders[name](length, **kwargs)


def full_hamiltonian(
    model: TwoFamilyHamiltonian, dim_cap: int = FULL_HAMILTONIAN_DIM_CAP
) -> np.ndarray:
    """Dense H on the full Hilbert space (guarded by an explicit size cap)."""
    dim = model.hilbert_dim
    if dim > dim_cap:
        raise ValueError(f"Hilbert dimension {dim} exceeds cap {dim_cap}")
    real = all(np.isrealobj(t.payload) for t in model.terms)
    h = np.zeros((dim, dim), dtype=np.float64 if real else np.complex128)
    dims = list(model.site_dims)
    for term in model.terms:
        h += model.coupling(term.family) * embed_dense(
            term.payload, term.support.sites, dims
        )
    return h


def occupation_projector_diagonal(model: TwoFamilyHamiltonian, max_level: int):
    """Diagonal of the projector keeping boson occupations <= max_level."""
    keep = np.ones(1)
    for s in range(model.graph.site_count):
        d = model.site_dims[s]
        vec = np.ones(d)
        if s in model.boson_sites:
            vec[max_level + 1 :] = 0.0
        keep = np.kron(keep, vec)
    return keep
