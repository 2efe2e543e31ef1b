"""Pure-Python shortest-path kernels; the reference for the compiled module."""

from __future__ import annotations

from collections.abc import Sequence


def brandes(indptr: Sequence[int], indices: Sequence[int]) -> tuple[int, list[float]]:
    """Diameter and raw betweenness of an undirected simple graph in CSR form.

    Betweenness is the unnormalized pair count: each unordered pair (s, t)
    contributes the fraction of its shortest paths through v.  The diameter
    is the largest finite distance, so a disconnected graph reports the
    widest of its components.

    A degree-1 vertex hanging off a vertex p of higher degree sees exactly
    p's shortest-path DAG one step further out, so it is never used as a
    source: p's dependencies are counted once more per such leaf, p itself
    gains the leaf's reach, and the leaf's eccentricity is p's plus one.
    """
    n = len(indptr) - 1
    bc = [0.0] * n
    diameter = 0
    dist = [-1] * n
    sigma = [0.0] * n
    delta = [0.0] * n
    leaves = [0] * n
    skip = [False] * n
    for v in range(n):
        if indptr[v + 1] - indptr[v] == 1:
            p = indices[indptr[v]]
            if indptr[p + 1] - indptr[p] > 1:
                skip[v] = True
                leaves[p] += 1
    for s in range(n):
        if skip[s]:
            continue
        for v in range(n):
            dist[v] = -1
            sigma[v] = 0.0
            delta[v] = 0.0
        dist[s] = 0
        sigma[s] = 1.0
        order = [s]
        head = 0
        while head < len(order):
            v = order[head]
            head += 1
            dv = dist[v] + 1
            for k in range(indptr[v], indptr[v + 1]):
                w = indices[k]
                if dist[w] < 0:
                    dist[w] = dv
                    order.append(w)
                if dist[w] == dv:
                    sigma[w] += sigma[v]
        ecc = dist[order[-1]] + (1 if leaves[s] else 0)
        if ecc > diameter:
            diameter = ecc
        weight = 1 + leaves[s]
        for w in reversed(order):
            dw = dist[w] - 1
            coeff = (1.0 + delta[w]) / sigma[w]
            for k in range(indptr[w], indptr[w + 1]):
                v = indices[k]
                if dist[v] == dw:
                    delta[v] += sigma[v] * coeff
            if w != s:
                bc[w] += weight * delta[w]
        bc[s] += leaves[s] * (len(order) - 2)
    return diameter, [b / 2.0 for b in bc]
