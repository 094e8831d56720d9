"""Graph construction and adjacency algebra for cluster-state layouts.

A single undirected simple graph drives every layer of the toolkit: its
edges give the CPHASE pattern of the continuous-variable cluster state,
the CZ pattern of the downloaded qubit cluster state, and the corrective
phase shifts applied after quadrature measurement.  The decorrelation
planner additionally consumes the eigendecomposition of A^2, where A is
the 0/1 adjacency matrix.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass

import numpy as np

__all__ = [
    "Graph",
    "make_graph",
    "path_graph",
    "cycle_graph",
    "grid2d_graph",
    "complete_graph",
    "star_graph",
    "random_graph",
    "adjacency_matrix",
    "degrees",
    "max_degree",
    "a_squared_spectrum",
    "neighbor_phase",
    "graph_to_json",
    "graph_from_json",
    "parse_graph_spec",
]

SQRT_PI = math.sqrt(math.pi)


@dataclass(frozen=True)
class Graph:
    """Undirected simple graph on vertices ``0 .. n-1``.

    Edges are normalized to a sorted tuple of ``(i, j)`` pairs with
    ``i < j``.  Construction rejects out-of-range endpoints, self-loops
    and duplicate edges with a diagnostic.
    """

    n: int
    edges: tuple[tuple[int, int], ...] = ()

    def __post_init__(self) -> None:
        if int(self.n) < 1:
            raise ValueError(f"vertex count must be >= 1, got {self.n}")
        object.__setattr__(self, "n", int(self.n))
        seen: set[tuple[int, int]] = set()
        normalized = []
        for edge in self.edges:
            i, j = (int(edge[0]), int(edge[1]))
            if not (0 <= i < self.n and 0 <= j < self.n):
                raise ValueError(
                    f"edge ({i}, {j}) has an endpoint outside [0, {self.n})"
                )
            if i == j:
                raise ValueError(f"self-loop ({i}, {i}) is not allowed")
            key = (min(i, j), max(i, j))
            if key in seen:
                raise ValueError(f"duplicate edge {key}")
            seen.add(key)
            normalized.append(key)
        object.__setattr__(self, "edges", tuple(sorted(normalized)))

    @property
    def edge_count(self) -> int:
        return len(self.edges)


def path_graph(n: int) -> Graph:
    """Open chain 0-1-2-...-(n-1).  ``n = 1`` gives a single bare vertex."""
    return Graph(n, tuple((i, i + 1) for i in range(n - 1)))


def cycle_graph(n: int) -> Graph:
    """Closed chain on ``n >= 3`` vertices.

    Smaller sizes are rejected: a 1-cycle is a self-loop and a 2-cycle a
    duplicate edge, neither of which is a simple graph.
    """
    if n < 3:
        raise ValueError(f"cycle graph needs n >= 3 vertices, got {n}")
    return Graph(n, tuple((i, (i + 1) % n) for i in range(n)))


def grid2d_graph(rows: int, cols: int) -> Graph:
    """Rectangular lattice with nearest-neighbor edges, row-major indexing."""
    if rows < 1 or cols < 1:
        raise ValueError(f"grid dimensions must be >= 1, got {rows}x{cols}")
    edges = []
    for r in range(rows):
        for c in range(cols):
            v = r * cols + c
            if c + 1 < cols:
                edges.append((v, v + 1))
            if r + 1 < rows:
                edges.append((v, v + cols))
    return Graph(rows * cols, tuple(edges))


def complete_graph(n: int) -> Graph:
    return Graph(n, tuple((i, j) for i in range(n) for j in range(i + 1, n)))


def star_graph(n: int) -> Graph:
    """Vertex 0 connected to all others (a GHZ-class layout)."""
    return Graph(n, tuple((0, i) for i in range(1, n)))


def random_graph(n: int, edge_probability: float, rng: np.random.Generator) -> Graph:
    """Erdos-Renyi style draw: each pair becomes an edge independently."""
    if not 0.0 <= edge_probability <= 1.0:
        raise ValueError(f"edge probability must be in [0, 1], got {edge_probability}")
    edges = tuple(
        (i, j)
        for i in range(n)
        for j in range(i + 1, n)
        if rng.random() < edge_probability
    )
    return Graph(n, edges)


_FAMILIES = {
    "path": path_graph,
    "cycle": cycle_graph,
    "complete": complete_graph,
    "star": star_graph,
}


def make_graph(kind: str, **params) -> Graph:
    """Dispatch to a named family or a custom edge list.

    Supported kinds: ``path``, ``cycle``, ``complete``, ``star`` (each
    takes ``n``), ``grid2d`` (takes ``rows`` and ``cols``) and ``custom``
    (takes ``n`` and ``edges``).
    """
    kind = kind.lower()
    if kind in _FAMILIES:
        return _FAMILIES[kind](int(params["n"]))
    if kind == "grid2d":
        return grid2d_graph(int(params["rows"]), int(params["cols"]))
    if kind == "custom":
        return Graph(int(params["n"]), tuple(map(tuple, params["edges"])))
    raise ValueError(f"unknown graph kind {kind!r}")


def adjacency_matrix(graph: Graph) -> np.ndarray:
    """Symmetric 0/1 adjacency matrix as float64."""
    a = np.zeros((graph.n, graph.n))
    for i, j in graph.edges:
        a[i, j] = 1.0
        a[j, i] = 1.0
    return a


def degrees(graph: Graph) -> np.ndarray:
    d = np.zeros(graph.n, dtype=int)
    for i, j in graph.edges:
        d[i] += 1
        d[j] += 1
    return d


def max_degree(graph: Graph) -> int:
    return int(degrees(graph).max())


def a_squared_spectrum(graph: Graph) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition ``A^2 = O diag(D) O^T`` with a deterministic layout.

    Returns ``(D, O)`` where ``D`` is sorted descending (ties broken by
    ascending index of each eigenvector's dominant component) and every
    column of ``O`` is sign-fixed so its dominant component is positive.
    ``A^2`` is positive semidefinite, so tiny negative round-off in ``D``
    is clamped to zero.

    The ordering matters downstream: the decorrelation planner assigns
    its principal (least-corrected) mode to the first column.
    """
    a = adjacency_matrix(graph)
    a2 = a @ a
    try:
        vals, vecs = np.linalg.eigh(a2)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - defensive
        raise RuntimeError(f"eigendecomposition of A^2 did not converge: {exc}")
    vals = np.where((vals < 0.0) & (vals > -1e-10), 0.0, vals)
    if np.any(vals < 0.0):  # pragma: no cover - defensive
        raise RuntimeError("A^2 produced a significantly negative eigenvalue")
    dominant = np.argmax(np.abs(vecs), axis=0)
    order = sorted(range(graph.n), key=lambda k: (-vals[k], dominant[k]))
    d = vals[order]
    o = vecs[:, order].copy()
    for k in range(graph.n):
        lead = int(np.argmax(np.abs(o[:, k])))
        if o[lead, k] < 0.0:
            o[:, k] = -o[:, k]
    return d, o


def neighbor_phase(graph: Graph, q: np.ndarray) -> np.ndarray:
    """Corrective phase vector ``phi = sqrt(pi) A q`` for measured outcomes."""
    q = np.asarray(q, dtype=float)
    if q.shape != (graph.n,):
        raise ValueError(f"expected {graph.n} outcomes, got shape {q.shape}")
    return SQRT_PI * (adjacency_matrix(graph) @ q)


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

def graph_to_json(graph: Graph) -> dict:
    return {"n": graph.n, "edges": [list(e) for e in graph.edges]}


def graph_from_json(obj: dict | str) -> Graph:
    """Accept either an explicit edge list or a named-family description.

    Explicit form: ``{"n": 3, "edges": [[0, 1], [1, 2]]}``.
    Named form: ``{"kind": "path", "n": 4}`` or
    ``{"kind": "grid2d", "rows": 2, "cols": 3}``.
    """
    if isinstance(obj, str):
        obj = json.loads(obj)
    if not isinstance(obj, dict):
        raise ValueError(f"graph JSON must be an object, got {type(obj).__name__}")
    if "kind" in obj:
        params = {k: v for k, v in obj.items() if k != "kind"}
        return make_graph(obj["kind"], **params)
    if "n" not in obj:
        raise ValueError("graph JSON needs either 'kind' or 'n'+'edges'")
    return Graph(int(obj["n"]), tuple(map(tuple, obj.get("edges", ()))))


def parse_graph_spec(spec: str) -> Graph:
    """Parse a command-line graph description.

    Either the path of a JSON file (see :func:`graph_from_json`), or a
    compact string: ``path:4``, ``cycle:5``, ``complete:3``, ``star:6``,
    ``grid2d:2x3``.
    """
    if os.path.isfile(spec):
        with open(spec, "r", encoding="utf-8") as fh:
            return graph_from_json(json.load(fh))
    kind, sep, arg = spec.partition(":")
    if not sep:
        raise ValueError(
            f"graph spec {spec!r} is neither a file nor of the form kind:size"
        )
    kind = kind.strip().lower()
    if kind == "grid2d":
        rows, sep, cols = arg.partition("x")
        if not sep:
            raise ValueError(f"grid2d spec must look like grid2d:RxC, got {spec!r}")
        return grid2d_graph(int(rows), int(cols))
    if kind in _FAMILIES:
        return _FAMILIES[kind](int(arg))
    raise ValueError(f"unknown graph kind {kind!r} in spec {spec!r}")
