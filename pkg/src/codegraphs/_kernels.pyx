# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled shortest-path kernels.  Same contract as ``_kernels_py``."""

from libc.stdlib cimport calloc, malloc, free


def brandes(const long long[::1] indptr, const long long[::1] indices):
    cdef Py_ssize_t n = indptr.shape[0] - 1
    cdef Py_ssize_t s, v, w, p, k, head, tail, dv, ecc, diameter = 0
    cdef double coeff, weight
    if n <= 0:
        return 0, []
    cdef long long *dist = <long long *> malloc(n * sizeof(long long))
    cdef long long *order = <long long *> malloc(n * sizeof(long long))
    cdef double *sigma = <double *> malloc(n * sizeof(double))
    cdef double *delta = <double *> malloc(n * sizeof(double))
    cdef double *bc = <double *> calloc(n, sizeof(double))
    cdef long long *leaves = <long long *> calloc(n, sizeof(long long))
    cdef char *skip = <char *> calloc(n, sizeof(char))
    if not (dist and order and sigma and delta and bc and leaves and skip):
        free(dist); free(order); free(sigma); free(delta); free(bc); free(leaves); free(skip)
        raise MemoryError()
    try:
        for v in range(n):
            if indptr[v + 1] - indptr[v] == 1:
                p = indices[indptr[v]]
                if indptr[p + 1] - indptr[p] > 1:
                    skip[v] = 1
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
            order[0] = s
            head = 0
            tail = 1
            while head < tail:
                v = order[head]
                head += 1
                dv = dist[v] + 1
                for k in range(indptr[v], indptr[v + 1]):
                    w = indices[k]
                    if dist[w] < 0:
                        dist[w] = dv
                        order[tail] = w
                        tail += 1
                    if dist[w] == dv:
                        sigma[w] += sigma[v]
            ecc = dist[order[tail - 1]] + (1 if leaves[s] else 0)
            if ecc > diameter:
                diameter = ecc
            weight = 1.0 + leaves[s]
            for head in range(tail - 1, -1, -1):
                w = order[head]
                coeff = (1.0 + delta[w]) / sigma[w]
                for k in range(indptr[w], indptr[w + 1]):
                    v = indices[k]
                    if dist[v] == dist[w] - 1:
                        delta[v] += sigma[v] * coeff
                if w != s:
                    bc[w] += weight * delta[w]
            bc[s] += leaves[s] * (tail - 2)
        return diameter, [bc[v] / 2.0 for v in range(n)]
    finally:
        free(dist); free(order); free(sigma); free(delta); free(bc); free(leaves); free(skip)
