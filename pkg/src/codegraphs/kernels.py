"""Backend selection for the metric kernels.

The compiled extension is used when it was built; otherwise the pure-Python
module with the identical contract.  Setting ``CODEGRAPHS_PURE_PYTHON=1``
forces the fallback.
"""

from __future__ import annotations

import os
from array import array

from . import _kernels_py

try:
    from . import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None

python_brandes = _kernels_py.brandes
compiled_brandes = None if _compiled is None else _compiled.brandes

if compiled_brandes is not None and os.environ.get("CODEGRAPHS_PURE_PYTHON", "") in ("", "0"):
    BACKEND = "cython"
    _brandes = compiled_brandes
else:
    BACKEND = "python"
    _brandes = python_brandes


def csr(n: int, pairs) -> tuple[array, array]:
    """Symmetric CSR arrays of the simple undirected graph on ``pairs``.

    Self-loops and repeated pairs are dropped.
    """
    adjacency: list[set[int]] = [set() for _ in range(n)]
    for u, v in pairs:
        if u != v:
            adjacency[u].add(v)
            adjacency[v].add(u)
    indptr = array("q", [0])
    indices = array("q")
    for neighbours in adjacency:
        indices.extend(sorted(neighbours))
        indptr.append(len(indices))
    return indptr, indices


def brandes(indptr, indices, backend: str | None = None) -> tuple[int, list[float]]:
    if backend is None:
        fn = _brandes
    elif backend == "python":
        fn = python_brandes
    elif backend == "cython":
        if compiled_brandes is None:
            raise RuntimeError("compiled kernels are not built")
        fn = compiled_brandes
    else:
        raise ValueError(f"unknown backend {backend!r}")
    if len(indptr) <= 1:
        return 0, []
    return fn(indptr, indices)
