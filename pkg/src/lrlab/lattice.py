"""Lattice structure, two-family Hamiltonians, and bound constants.

A model is H = h0 * sum_i Phi_0^i + h1 * sum_j Phi_1^j where terms within one
family commute exactly and only cross-family pairs with overlapping support
may fail to commute.  From the term data we extract everything the bounds
need: the noncommuting adjacency, the pair/triple commutator constants K and
Q, the branching number nu, the locality radius R, and the derived rates.

All commutator norms are evaluated on the union of the supports involved,
embedded locally; the full Hilbert space is never materialized here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .operators import commutator, embed_dense, spectral_norm

INTRA_FAMILY_TOL = 1e-10
NONCOMMUTING_TOL = 1e-12


@dataclass(frozen=True)
class InteractionGraph:
    """Connected interaction graph with precomputed all-pairs distances."""

    site_count: int
    edges: frozenset
    distances: np.ndarray = field(repr=False, compare=False)


def build_graph(site_count: int, edges) -> InteractionGraph:
    """Validate an edge list and precompute BFS distances.

    Single-site graphs may have no edges; anything larger must be connected.
    """
    if site_count < 1:
        raise ValueError(f"site_count must be positive, got {site_count}")
    norm_edges = set()
    for e in edges:
        a, b = int(e[0]), int(e[1])
        if a == b:
            raise ValueError(f"self loop at site {a}")
        if not (0 <= a < site_count and 0 <= b < site_count):
            raise ValueError(f"edge {(a, b)} outside 0..{site_count - 1}")
        norm_edges.add((min(a, b), max(a, b)))
    if not norm_edges and site_count > 1:
        raise ValueError("edge list is empty for a multi-site graph")

    adj = [[] for _ in range(site_count)]
    for a, b in norm_edges:
        adj[a].append(b)
        adj[b].append(a)
    dist = np.full((site_count, site_count), -1, dtype=np.int64)
    for src in range(site_count):
        dist[src, src] = 0
        queue = [src]
        while queue:
            nxt = []
            for u in queue:
                for v in adj[u]:
                    if dist[src, v] < 0:
                        dist[src, v] = dist[src, u] + 1
                        nxt.append(v)
            queue = nxt
    if (dist < 0).any():
        raise ValueError("interaction graph is not connected")
    return InteractionGraph(
        site_count=site_count, edges=frozenset(norm_edges), distances=dist
    )


@dataclass(frozen=True)
class SupportRegion:
    """A set of sites with its graph diameter."""

    sites: tuple
    diameter: int


def region(graph: InteractionGraph, sites) -> SupportRegion:
    sites = tuple(sorted(int(s) for s in set(sites)))
    if not sites:
        raise ValueError("support region must be nonempty")
    if sites[0] < 0 or sites[-1] >= graph.site_count:
        raise ValueError(f"sites {sites} outside graph")
    diam = 0
    for a in sites:
        for b in sites:
            diam = max(diam, int(graph.distances[a, b]))
    return SupportRegion(sites=sites, diameter=diam)


def region_distance(graph: InteractionGraph, a, b) -> int:
    """Minimum graph distance between two site sets (0 when they overlap)."""
    sa = a.sites if isinstance(a, SupportRegion) else tuple(a)
    sb = b.sites if isinstance(b, SupportRegion) else tuple(b)
    return int(min(graph.distances[i, j] for i in sa for j in sb))


def regions_overlap(a: SupportRegion, b: SupportRegion) -> bool:
    return bool(set(a.sites) & set(b.sites))


@dataclass(frozen=True)
class LocalTerm:
    """One local interaction term Phi_family^index with Hermitian payload."""

    family: int
    index: int
    support: SupportRegion
    payload: np.ndarray = field(repr=False, compare=False)


@dataclass(frozen=True)
class Observable:
    """A local observable to test against the bounds; shaped like a term."""

    support: SupportRegion
    payload: np.ndarray = field(repr=False, compare=False)
    label: str = ""


@dataclass(frozen=True)
class TwoFamilyHamiltonian:
    graph: InteractionGraph
    site_dims: tuple
    family0: tuple
    family1: tuple
    h0: float
    h1: float
    boson_sites: frozenset = frozenset()
    name: str = ""

    @property
    def terms(self) -> tuple:
        """All terms, family 0 first; the position is the global term id."""
        return self.family0 + self.family1

    def coupling(self, family: int) -> float:
        return self.h0 if family == 0 else self.h1

    @property
    def hilbert_dim(self) -> int:
        return int(np.prod(self.site_dims))


def observable_from_sites(
    model: TwoFamilyHamiltonian, sites, payload, label: str = ""
) -> Observable:
    return Observable(
        support=region(model.graph, sites), payload=np.asarray(payload), label=label
    )


def _region_embed(model: TwoFamilyHamiltonian, op, sites_union):
    """Embed a term/observable into the product space over `sites_union`."""
    dims = [model.site_dims[s] for s in sites_union]
    pos = {s: k for k, s in enumerate(sites_union)}
    op_sites = [pos[s] for s in op.support.sites]
    return embed_dense(op.payload, op_sites, dims)


def _interior_diagonal(model: TwoFamilyHamiltonian, sites_union) -> np.ndarray:
    """Diagonal of the projector dropping each boson site's top Fock level."""
    keep = np.ones(1)
    for s in sites_union:
        d = model.site_dims[s]
        vec = np.ones(d)
        if s in model.boson_sites and d >= 2:
            vec[d - 1] = 0.0
        keep = np.kron(keep, vec)
    return keep


def operator_norm_on_union(model, ops, combine, projected: bool = False) -> float:
    """Spectral norm of `combine(embedded ops)` on the union of supports.

    With `projected=True` the result is the interior-projected norm
    ||P C P|| where P removes the top retained Fock level of every boson
    site in the union.
    """
    union = sorted(set().union(*(op.support.sites for op in ops)))
    mats = [_region_embed(model, op, union) for op in ops]
    out = combine(*mats)
    if projected:
        keep = _interior_diagonal(model, union)
        out = out * np.outer(keep, keep)
    return spectral_norm(out)


def pair_commutator_norm(model, a, b, projected: bool = False) -> float:
    if not regions_overlap(a.support, b.support):
        return 0.0
    return operator_norm_on_union(model, (a, b), commutator, projected=projected)


def triple_commutator_norm(model, a, b, c, projected: bool = False) -> float:
    return operator_norm_on_union(
        model, (a, b, c), lambda ma, mb, mc: commutator(commutator(ma, mb), mc),
        projected=projected,
    )


@dataclass(frozen=True)
class ValidationReport:
    passed: bool
    failures: tuple

    def __str__(self) -> str:
        if self.passed:
            return "structure OK"
        return "; ".join(self.failures)


def validate_two_family(
    model: TwoFamilyHamiltonian, tol: float = INTRA_FAMILY_TOL
) -> ValidationReport:
    """Check the structural contract; collects failures instead of aborting."""
    failures = []
    for fam, terms in ((0, model.family0), (1, model.family1)):
        for term in terms:
            if term.family != fam:
                failures.append(f"term {fam}:{term.index} carries family {term.family}")
            d = int(np.prod([model.site_dims[s] for s in term.support.sites]))
            if term.payload.shape != (d, d):
                failures.append(
                    f"term {fam}:{term.index} payload shape {term.payload.shape} "
                    f"!= support dim {d}"
                )
                continue
            dev = float(np.abs(term.payload - term.payload.conj().T).max())
            if dev > tol * max(1.0, float(np.abs(term.payload).max())):
                failures.append(
                    f"term {fam}:{term.index} payload not Hermitian (dev {dev:.3e})"
                )
    for fam, terms in ((0, model.family0), (1, model.family1)):
        for i, a in enumerate(terms):
            for b in terms[i + 1 :]:
                if not regions_overlap(a.support, b.support):
                    continue
                nrm = pair_commutator_norm(model, a, b)
                if nrm > tol:
                    failures.append(
                        f"family {fam} terms {a.index},{b.index} do not commute "
                        f"(norm {nrm:.3e})"
                    )
    return ValidationReport(passed=not failures, failures=tuple(failures))


@dataclass(frozen=True)
class NoncommutingAdjacency:
    """Z_i map: for each global term id, the opposite-family ids it fails to
    commute with (commutator norm above NONCOMMUTING_TOL)."""

    zmap: dict
    families: dict
    supports: dict
    pair_norms: dict  # (i, j) with i < j -> ||[Phi_i, Phi_j]||

    @property
    def nu(self) -> int:
        if not self.zmap:
            return 0
        return max(len(zs) for zs in self.zmap.values())


def noncommuting_adjacency(
    model: TwoFamilyHamiltonian, projected: bool = False
) -> NoncommutingAdjacency:
    terms = model.terms
    n0 = len(model.family0)
    zmap = {gid: frozenset() for gid in range(len(terms))}
    staged = {gid: set() for gid in range(len(terms))}
    pair_norms = {}
    for i in range(n0):
        for j in range(n0, len(terms)):
            a, b = terms[i], terms[j]
            if not regions_overlap(a.support, b.support):
                continue
            nrm = pair_commutator_norm(model, a, b, projected=projected)
            if nrm > NONCOMMUTING_TOL:
                pair_norms[(i, j)] = nrm
                staged[i].add(j)
                staged[j].add(i)
    zmap = {gid: frozenset(s) for gid, s in staged.items()}
    return NoncommutingAdjacency(
        zmap=zmap,
        families={gid: t.family for gid, t in enumerate(terms)},
        supports={gid: t.support for gid, t in enumerate(terms)},
        pair_norms=pair_norms,
    )


@dataclass(frozen=True)
class BoundConstants:
    K: float
    Q: float
    nu: int
    R: int
    gamma: float
    xi: float
    lam: float
    M: float
    Mtilde: float
    Mtildetilde: float
    h0: float
    h1: float
    v_lr: float
    zero_velocity: bool

    def as_dict(self) -> dict:
        return {
            "K": self.K,
            "Q": self.Q,
            "nu": self.nu,
            "R": self.R,
            "gamma": self.gamma,
            "xi": self.xi,
            "lambda": self.lam,
            "M": self.M,
            "Mtilde": self.Mtilde,
            "Mtildetilde": self.Mtildetilde,
            "h0": self.h0,
            "h1": self.h1,
            "v_lr": self.v_lr,
            "zero_velocity": self.zero_velocity,
        }


def _coupling_ratio(model: TwoFamilyHamiltonian) -> float:
    # Degenerate families or couplings carry no cross terms; ratio defaults to 1.
    if not model.family0 or not model.family1:
        return 1.0
    if model.h0 <= 0.0 or model.h1 <= 0.0:
        return 1.0
    return max(model.h0 / model.h1, model.h1 / model.h0)


def compute_bound_constants(
    model: TwoFamilyHamiltonian,
    lam: float | None = None,
    projected: bool = False,
    adjacency: NoncommutingAdjacency | None = None,
) -> BoundConstants:
    """Extract (K, Q, nu, R, ...) and the derived rates from the term data.

    K maxes h_a*h_b*||[Phi_a, Phi_b]|| over noncommuting cross-family pairs;
    Q maxes h_a*h_b*h_c*||[[Phi_a, Phi_b], Phi_c]|| over those pairs against
    any third term whose support meets the pair's union (the pair's own
    members included).  M is the dominating prefactor
    max(K*r, Q*sqrt(r)/sqrt(2*h0*h1*K)) with r the coupling imbalance; a
    fully commuting model gets K = 0, M = 1 and the zero-velocity flag.
    """
    adj = adjacency if adjacency is not None else noncommuting_adjacency(
        model, projected=projected
    )
    terms = model.terms
    hh = model.h0 * model.h1

    K = 0.0
    for (i, j), nrm in adj.pair_norms.items():
        K = max(K, hh * nrm)

    Q = 0.0
    for (i, j) in adj.pair_norms:
        a, b = terms[i], terms[j]
        pair_sites = set(a.support.sites) | set(b.support.sites)
        for k, c in enumerate(terms):
            if not (pair_sites & set(c.support.sites)):
                continue
            nrm = triple_commutator_norm(model, a, b, c, projected=projected)
            if nrm <= NONCOMMUTING_TOL:
                continue
            Q = max(Q, hh * model.coupling(c.family) * nrm)

    nu = adj.nu
    diam = max((t.support.diameter for t in terms), default=0)
    R = 1 + diam
    gamma = math.sqrt(2.0) * nu
    xi = 1.0 / R
    if lam is None:
        lam = xi

    zero_velocity = K == 0.0
    r = _coupling_ratio(model)
    if zero_velocity:
        M = 1.0
    elif Q == 0.0:
        M = K * r
    else:
        M = max(K * r, Q * math.sqrt(r) / math.sqrt(2.0 * hh * K))
    Mtilde = 1.0
    v_lr = 2.0 * (gamma / xi) * math.e * math.sqrt(hh * K)

    return BoundConstants(
        K=K,
        Q=Q,
        nu=nu,
        R=R,
        gamma=gamma,
        xi=xi,
        lam=float(lam),
        M=M,
        Mtilde=Mtilde,
        Mtildetilde=Mtilde * M,
        h0=model.h0,
        h1=model.h1,
        v_lr=v_lr,
        zero_velocity=zero_velocity,
    )


@dataclass(frozen=True)
class ObservableConditions:
    """Prefactor data (F_P, F_Q, n_P, d) for the observable-pair bound."""

    F_P: float
    F_Q: float
    n_P: int
    d: int


def observable_conditions(
    model: TwoFamilyHamiltonian,
    op_p: Observable,
    op_q: Observable,
    consts: BoundConstants | None = None,
    adjacency: NoncommutingAdjacency | None = None,
    projected: bool = False,
) -> ObservableConditions:
    """Check conditions (i)-(iii) for an observable pair and extract constants.

    Raises when the separation does not exceed R (condition (i)), when the
    model is fully commuting (the constants are undefined), or when Q = 0 but
    O_Q sees a nonzero pair commutator (condition (iii) unsatisfiable).
    """
    if consts is None:
        consts = compute_bound_constants(model, projected=projected)
    if consts.zero_velocity:
        raise ValueError("constants undefined for commuting system (K = 0)")
    d = region_distance(model.graph, op_p.support, op_q.support)
    if d <= consts.R:
        raise ValueError(
            f"condition (i) violated: separation d = {d} must exceed R = {consts.R}"
        )
    adj = adjacency if adjacency is not None else noncommuting_adjacency(
        model, projected=projected
    )
    terms = model.terms

    def obs_term_norm(obs, term):
        if not regions_overlap(obs.support, term.support):
            return 0.0
        return operator_norm_on_union(
            model, (obs, term), commutator, projected=projected
        )

    p_norms = [obs_term_norm(op_p, t) for t in terms]
    q_norms = [obs_term_norm(op_q, t) for t in terms]
    n_P = sum(1 for x in p_norms if x > NONCOMMUTING_TOL)
    F_P = max(p_norms) / consts.K
    F_Q = max(q_norms) / consts.K

    for (i, j) in adj.pair_norms:
        a, b = terms[i], terms[j]
        pair_sites = set(a.support.sites) | set(b.support.sites)
        if not (pair_sites & set(op_q.support.sites)):
            continue
        nrm = operator_norm_on_union(
            model,
            (op_q, a, b),
            lambda mq, ma, mb: commutator(mq, commutator(ma, mb)),
            projected=projected,
        )
        if consts.Q == 0.0:
            if nrm > NONCOMMUTING_TOL:
                raise ValueError(
                    "condition (iii) unsatisfiable: Q = 0 but "
                    f"||[O_Q,[Phi_{i},Phi_{j}]]|| = {nrm:.3e}"
                )
            continue
        F_Q = max(F_Q, nrm / consts.Q)

    return ObservableConditions(F_P=F_P, F_Q=F_Q, n_P=n_P, d=d)
