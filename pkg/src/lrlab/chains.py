"""Counting the operator chains that feed the series bound.

A chain starts from the term s_0 containing the propagated operator and
appends terms s_1, ..., s_n subject to the alternating rule: the k-th added
term must fail to commute with its predecessor when k is odd, and with either
of its two predecessors when k is even.  A chain of length n contributes to
the coefficient c_n iff its terminal support touches the target region: the
support of s_n for even n, of s_{n-1} or s_n for odd n (s_0's own support at
n = 0).

Two counts are kept.  ``counts`` treats every admissible sequence as
distinct, which is exactly what unrolling the recursion produces (the two
branches of an even step extend disjoint families, so no sequence arises
twice).  ``collapsed`` additionally identifies sequences that differ only in
the dummy predecessor of an even step taken through the two-back branch.
collapsed <= counts <= 2^floor(n/2) * nu^n holds everywhere, and both vanish
below the reachability cutoff R*n >= d.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .lattice import NoncommutingAdjacency, SupportRegion

BRUTE_FORCE_MAX_ORDER = 10


@dataclass(frozen=True)
class ChainState:
    """Suffix of a partial chain: the last two terms and the added count."""

    last: int
    penult: int | None
    length: int


@dataclass(frozen=True)
class ChainCountTable:
    start: int
    target: SupportRegion
    n_max: int
    counts: dict
    collapsed: dict

    def coefficient(self, n: int) -> int:
        if n > self.n_max:
            raise ValueError(
                f"chain table covers orders <= {self.n_max}, requested n = {n}"
            )
        return self.counts[n]


def overlaps(a: SupportRegion, b) -> bool:
    sb = b.sites if isinstance(b, SupportRegion) else tuple(b)
    return bool(set(a.sites) & set(sb))


def _terminal_even(adj, gid, target) -> bool:
    return overlaps(adj.supports[gid], target)


def count_chains_dp(
    adj: NoncommutingAdjacency, start: int, target: SupportRegion, n_max: int
) -> ChainCountTable:
    """Dynamic program over chain suffixes; exact integer counts.

    Even-length frontiers are keyed by the last term (the next odd step only
    looks one back); odd-length frontiers keep (penult, last) pairs because
    both the next even step and the odd terminal rule look two back.
    """
    if start not in adj.zmap:
        raise ValueError(f"start term id {start} not in adjacency")
    counts = {n: 0 for n in range(n_max + 1)}
    collapsed = {n: 0 for n in range(n_max + 1)}

    counts[0] = 1 if _terminal_even(adj, start, target) else 0
    collapsed[0] = counts[0]

    # counts: S holds even-length frontier {last: n_sequences}.
    s_even = {start: 1}
    # collapsed: F as above, G holds the odd frontier {(penult, last): n_classes}.
    f_even = {start: 1}
    g_odd: dict = {}

    for n in range(1, n_max + 1):
        if n % 2 == 1:
            s_odd = {}
            for last, cnt in s_even.items():
                for y in adj.zmap[last]:
                    key = (last, y)
                    s_odd[key] = s_odd.get(key, 0) + cnt
            g_odd = {}
            for last, cnt in f_even.items():
                for y in adj.zmap[last]:
                    g_odd[(last, y)] = g_odd.get((last, y), 0) + cnt
            for (p, l), cnt in s_odd.items():
                if overlaps(adj.supports[p], target) or overlaps(
                    adj.supports[l], target
                ):
                    counts[n] += cnt
            for (p, l), cnt in g_odd.items():
                if overlaps(adj.supports[p], target) or overlaps(
                    adj.supports[l], target
                ):
                    collapsed[n] += cnt
            s_frontier = s_odd
        else:
            s_next = {}
            for (p, l), cnt in s_frontier.items():
                for x in adj.zmap[l] | adj.zmap[p]:
                    s_next[x] = s_next.get(x, 0) + cnt
            f_next = {}
            for (p, l), cnt in g_odd.items():
                for x in adj.zmap[l]:
                    f_next[x] = f_next.get(x, 0) + cnt
            for p, cnt in f_even.items():
                # Two-back branch: the dummy intermediate is quotiented out.
                for x in adj.zmap[p]:
                    f_next[x] = f_next.get(x, 0) + cnt
            for x, cnt in s_next.items():
                if _terminal_even(adj, x, target):
                    counts[n] += cnt
            for x, cnt in f_next.items():
                if _terminal_even(adj, x, target):
                    collapsed[n] += cnt
            s_even = s_next
            f_even = f_next

    return ChainCountTable(
        start=start, target=target, n_max=n_max, counts=counts, collapsed=collapsed
    )


def count_chains_bruteforce(
    adj: NoncommutingAdjacency, start: int, target: SupportRegion, n_max: int
) -> ChainCountTable:
    """Explicit enumeration of sequences and collapsed classes; n_max <= 10."""
    if n_max > BRUTE_FORCE_MAX_ORDER:
        raise ValueError(
            f"brute force capped at order {BRUTE_FORCE_MAX_ORDER}, got {n_max}"
        )
    if start not in adj.zmap:
        raise ValueError(f"start term id {start} not in adjacency")
    counts = {n: 0 for n in range(n_max + 1)}
    collapsed = {n: 0 for n in range(n_max + 1)}

    def term_hits(gid) -> bool:
        return overlaps(adj.supports[gid], target)

    counts[0] = 1 if term_hits(start) else 0
    collapsed[0] = counts[0]

    def walk_sequences(seq):
        n = len(seq) - 1
        if n >= n_max:
            return
        k = n + 1
        if k % 2 == 1:
            choices = adj.zmap[seq[-1]]
        else:
            choices = adj.zmap[seq[-1]] | adj.zmap[seq[-2]]
        for x in choices:
            nxt = seq + (x,)
            if k % 2 == 1:
                if term_hits(nxt[-2]) or term_hits(nxt[-1]):
                    counts[k] += 1
            else:
                if term_hits(nxt[-1]):
                    counts[k] += 1
            walk_sequences(nxt)

    walk_sequences((start,))

    def walk_classes(last, length):
        # `last` is the recorded term at an even length.
        if length + 1 <= n_max:
            for y in adj.zmap[last]:
                if term_hits(last) or term_hits(y):
                    collapsed[length + 1] += 1
        if length + 2 <= n_max:
            for y in adj.zmap[last]:
                for x in adj.zmap[y]:
                    if term_hits(x):
                        collapsed[length + 2] += 1
                    walk_classes(x, length + 2)
            for x in adj.zmap[last]:
                if term_hits(x):
                    collapsed[length + 2] += 1
                walk_classes(x, length + 2)

    walk_classes(start, 0)

    return ChainCountTable(
        start=start, target=target, n_max=n_max, counts=counts, collapsed=collapsed
    )


def closed_form_chain_bound(consts, n: int, d: int, lam: float | None = None) -> float:
    """Per-order envelope (sqrt(2) nu)^n e^{lam (R n - d)}, zero below reach."""
    lam = consts.lam if lam is None else lam
    if consts.R * n < d:
        return 0.0
    return (math.sqrt(2.0) * consts.nu) ** n * math.exp(lam * (consts.R * n - d))
