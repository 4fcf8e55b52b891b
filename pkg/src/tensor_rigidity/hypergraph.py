"""k-partite k-uniform hypergraphs and their random models.

A :class:`PartiteHypergraph` records which entries of a partial tensor are
observed: vertex class j enumerates the indices along axis j, and each
hyperedge is a transversal (one vertex per class) naming one observed entry.

Edges are stored sorted lexicographically with a hash index for membership;
random-process insertion order lives in :class:`MdTrace`, never in the graph.
Vertices are globally numbered by the flat order that concatenates classes:
class 0 first, then class 1, and so on.  All matrix rows/columns indexed by
vertices use that flat order.

Randomness everywhere is numpy's PCG64 (``numpy.random.default_rng``); every
generator in this module is a pure function of its parameters and seed.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass

import numpy as np

Edge = tuple[int, ...]


@dataclass(frozen=True, order=True)
class VertexId:
    """A vertex addressed as (class, within-class index)."""

    part: int
    index: int

    def flat(self, part_sizes: tuple[int, ...]) -> int:
        return sum(part_sizes[: self.part]) + self.index

    @staticmethod
    def from_flat(flat: int, part_sizes: tuple[int, ...]) -> "VertexId":
        for part, size in enumerate(part_sizes):
            if flat < size:
                return VertexId(part, flat)
            flat -= size
        raise ValueError("flat index out of range")


class PartiteHypergraph:
    """Immutable k-partite k-uniform hypergraph.

    Args:
        part_sizes: sizes (n_1, ..., n_k) of the k vertex classes, k >= 2.
        edges: iterable of k-tuples of within-class 0-based indices.

    Raises:
        ValueError: on malformed part sizes, out-of-range vertices, or
            duplicate edges.
    """

    __slots__ = ("part_sizes", "edges", "_edge_set", "_offsets")

    def __init__(self, part_sizes, edges=()):
        sizes = tuple(int(n) for n in part_sizes)
        if len(sizes) < 2:
            raise ValueError("need at least two vertex classes")
        if any(n <= 0 for n in sizes):
            raise ValueError("every vertex class must be nonempty")
        k = len(sizes)
        cleaned = []
        for e in edges:
            t = tuple(int(v) for v in e)
            if len(t) != k:
                raise ValueError(f"edge {t} is not a transversal of {k} classes")
            for j, v in enumerate(t):
                if not 0 <= v < sizes[j]:
                    raise ValueError(f"edge {t}: vertex {v} out of range for class {j}")
            cleaned.append(t)
        ordered = tuple(sorted(cleaned))
        if len(set(ordered)) != len(ordered):
            raise ValueError("duplicate edges are not allowed")
        self.part_sizes = sizes
        self.edges = ordered
        self._edge_set = frozenset(ordered)
        offs = [0]
        for n in sizes:
            offs.append(offs[-1] + n)
        self._offsets = tuple(offs)

    # -- constructors --------------------------------------------------------

    @classmethod
    def complete(cls, part_sizes) -> "PartiteHypergraph":
        sizes = tuple(int(n) for n in part_sizes)
        return cls(sizes, itertools.product(*[range(n) for n in sizes]))

    def with_edges(self, extra) -> "PartiteHypergraph":
        """New graph with `extra` edges added (duplicates rejected)."""
        return PartiteHypergraph(self.part_sizes, list(self.edges) + list(extra))

    def subgraph(self, edges) -> "PartiteHypergraph":
        """Same vertex set, edge set restricted to `edges` (must be present)."""
        edges = [tuple(e) for e in edges]
        missing = [e for e in edges if e not in self._edge_set]
        if missing:
            raise ValueError(f"edges not in graph: {missing[:3]}")
        return PartiteHypergraph(self.part_sizes, edges)

    # -- basic structure -----------------------------------------------------

    @property
    def k(self) -> int:
        return len(self.part_sizes)

    @property
    def num_vertices(self) -> int:
        return self._offsets[-1]

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    @property
    def max_edges(self) -> int:
        out = 1
        for n in self.part_sizes:
            out *= n
        return out

    def has_edge(self, edge) -> bool:
        return tuple(edge) in self._edge_set

    def flat_id(self, part: int, index: int) -> int:
        return self._offsets[part] + index

    def edge_flat_ids(self, edge: Edge) -> tuple[int, ...]:
        return tuple(self._offsets[j] + v for j, v in enumerate(edge))

    def edge_array(self) -> np.ndarray:
        """(|E|, k) array of flat vertex ids, rows in edge order."""
        if not self.edges:
            return np.zeros((0, self.k), dtype=np.int64)
        arr = np.asarray(self.edges, dtype=np.int64)
        return arr + np.asarray(self._offsets[:-1], dtype=np.int64)[None, :]

    def degrees(self) -> np.ndarray:
        """Degree of every vertex, in flat order."""
        out = np.zeros(self.num_vertices, dtype=np.int64)
        flat = self.edge_array()
        if flat.size:
            np.add.at(out, flat.ravel(), 1)
        return out

    def degree(self, part: int, index: int) -> int:
        return int(self.degrees()[self.flat_id(part, index)])

    def min_degree(self) -> int:
        return int(self.degrees().min())

    def incidence_matrix(self) -> np.ndarray:
        """0/1 vertex-by-edge incidence matrix, shape (N, |E|)."""
        out = np.zeros((self.num_vertices, self.num_edges), dtype=np.int64)
        flat = self.edge_array()
        for col in range(self.num_edges):
            out[flat[col], col] = 1
        return out

    # -- equality / display ----------------------------------------------------

    def __eq__(self, other) -> bool:
        if not isinstance(other, PartiteHypergraph):
            return NotImplemented
        return self.part_sizes == other.part_sizes and self.edges == other.edges

    def __hash__(self) -> int:
        return hash((self.part_sizes, self.edges))

    def __repr__(self) -> str:
        return f"PartiteHypergraph(parts={self.part_sizes}, edges={self.num_edges})"

    # -- serialization -----------------------------------------------------------

    def to_json(self) -> str:
        return json.dumps(
            {"k": self.k, "parts": list(self.part_sizes), "edges": [list(e) for e in self.edges]}
        )

    @classmethod
    def from_json(cls, text: str) -> "PartiteHypergraph":
        doc = json.loads(text)
        if doc.get("k") != len(doc.get("parts", [])):
            raise ValueError("graph JSON: k must equal len(parts)")
        return cls(doc["parts"], doc["edges"])

    def to_text(self) -> str:
        lines = [str(self.k) + " " + " ".join(str(n) for n in self.part_sizes)]
        lines.extend(" ".join(str(v) for v in e) for e in self.edges)
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "PartiteHypergraph":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        if not lines:
            raise ValueError("empty graph text")
        head = lines[0].split()
        k = int(head[0])
        sizes = [int(x) for x in head[1:]]
        if len(sizes) != k:
            raise ValueError("graph text: header must list k class sizes")
        edges = [tuple(int(x) for x in ln.split()) for ln in lines[1:]]
        return cls(sizes, edges)


# ---------------------------------------------------------------------------
# edge indexing in the complete graph (mixed radix, most-significant first)
# ---------------------------------------------------------------------------


def edge_rank(edge: Edge, part_sizes) -> int:
    idx = 0
    for v, n in zip(edge, part_sizes):
        idx = idx * n + v
    return idx


def edge_unrank(idx: int, part_sizes) -> Edge:
    out = []
    for n in reversed(part_sizes):
        idx, v = divmod(idx, n)
        out.append(v)
    return tuple(reversed(out))


def all_edges(part_sizes):
    """Lexicographic iterator over the complete graph's edges."""
    return itertools.product(*[range(n) for n in part_sizes])


# ---------------------------------------------------------------------------
# structural constructions
# ---------------------------------------------------------------------------


def degree_d_extension(graph: PartiteHypergraph, new_vertex_part: int, attachments) -> PartiteHypergraph:
    """Add one vertex to `new_vertex_part` plus one edge per attachment.

    Each attachment is a (k-1)-tuple of within-class indices for the classes
    other than `new_vertex_part`, in ascending class order; it must name
    existing vertices, and attachments must be pairwise distinct.
    """
    k = graph.k
    if not 0 <= new_vertex_part < k:
        raise ValueError("new_vertex_part out of range")
    atts = [tuple(int(v) for v in a) for a in attachments]
    if len(set(atts)) != len(atts):
        raise ValueError("attachments must be distinct")
    other_parts = [j for j in range(k) if j != new_vertex_part]
    for a in atts:
        if len(a) != k - 1:
            raise ValueError(f"attachment {a} must cover the other {k - 1} classes")
        for j, v in zip(other_parts, a):
            if not 0 <= v < graph.part_sizes[j]:
                raise ValueError(f"attachment {a}: vertex {v} not in class {j}")
    sizes = list(graph.part_sizes)
    new_index = sizes[new_vertex_part]
    sizes[new_vertex_part] += 1
    new_edges = []
    for a in atts:
        e = list(a)
        e.insert(new_vertex_part, new_index)
        new_edges.append(tuple(e))
    return PartiteHypergraph(sizes, list(graph.edges) + new_edges)


def random_dtree(k: int, d: int, part_sizes_target, seed=0) -> PartiteHypergraph:
    """Random k-partite d-tree grown to the target class sizes.

    Starts from the complete balanced graph with d vertices per class and
    applies uniformly random degree-d extensions (random class among those
    still below target, d distinct random attachments) until every class
    reaches its target size.  The result always satisfies
    ``|E| == d**k + d * (N - k*d)``.
    """
    target = tuple(int(n) for n in part_sizes_target)
    if len(target) != k:
        raise ValueError("part_sizes_target must list k sizes")
    if any(n < d for n in target):
        raise ValueError("every class target must be at least d")
    rng = np.random.default_rng(seed)
    graph = PartiteHypergraph.complete([d] * k)
    while graph.part_sizes != target:
        below = [j for j in range(k) if graph.part_sizes[j] < target[j]]
        part = below[int(rng.integers(0, len(below)))]
        others = [graph.part_sizes[j] for j in range(k) if j != part]
        total = 1
        for n in others:
            total *= n
        chosen: set[int] = set()
        while len(chosen) < d:
            chosen.add(int(rng.integers(0, total)))
        atts = [edge_unrank(idx, others) for idx in sorted(chosen)]
        graph = degree_d_extension(graph, part, atts)
    return graph


def is_d_extendable(graph: PartiteHypergraph, vertex_set, d: int) -> VertexId | None:
    """First vertex v in `vertex_set` with >= d edges avoiding the set elsewhere.

    An edge counts for v when its k-1 other vertices all lie outside
    `vertex_set`.  Returns None when no such vertex exists.
    """
    wanted = sorted(
        v if isinstance(v, VertexId) else VertexId(int(v[0]), int(v[1])) for v in vertex_set
    )
    blocked = {(v.part, v.index) for v in wanted}
    for v in wanted:
        count = 0
        for e in graph.edges:
            if e[v.part] != v.index:
                continue
            if any(j != v.part and (j, idx) in blocked for j, idx in enumerate(e)):
                continue
            count += 1
            if count >= d:
                break
        if count >= d:
            return v
    return None


# ---------------------------------------------------------------------------
# random models on the balanced complete graph
# ---------------------------------------------------------------------------


def _random_edge_sample(n: int, k: int, m: int, rng) -> list[Edge]:
    """Uniform m-subset of E(K) via partial Fisher-Yates over edge ranks."""
    total = n**k
    repl: dict[int, int] = {}
    sizes = (n,) * k
    out = []
    for i in range(m):
        j = int(rng.integers(i, total))
        vi = repl.get(i, i)
        repl[i] = repl.get(j, j)
        repl[j] = vi
        out.append(edge_unrank(repl[i], sizes))
    return out


def gnm(n: int, k: int, m: int, seed=0) -> PartiteHypergraph:
    """Uniformly random m-edge subgraph of the balanced complete graph."""
    if not 0 <= m <= n**k:
        raise ValueError(f"m={m} out of range for n**k={n ** k}")
    rng = np.random.default_rng(seed)
    return PartiteHypergraph((n,) * k, _random_edge_sample(n, k, m, rng))


def gnp(n: int, k: int, p: float, seed=0) -> PartiteHypergraph:
    """Keep each edge of the balanced complete graph independently w.p. p.

    Drawn as Binomial(n**k, p) for the count followed by a uniform subset of
    that size, which is the same distribution without materializing all
    edges.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0, 1]")
    rng = np.random.default_rng(seed)
    m = int(rng.binomial(n**k, p))
    return PartiteHypergraph((n,) * k, _random_edge_sample(n, k, m, rng))


@dataclass(frozen=True)
class MdTrace:
    """Prefix of a uniformly random edge insertion order, stopped at degree d.

    ``edge_order`` holds the first ``m_d`` inserted edges; ``stops[j-1]`` is
    the first prefix length whose minimum degree reaches j, so
    ``stops[-1] == m_d`` and the stops are nondecreasing.
    """

    n: int
    k: int
    d: int
    edge_order: tuple[Edge, ...]
    stops: tuple[int, ...]

    @property
    def m_d(self) -> int:
        return self.stops[-1]

    def graph(self, m: int | None = None) -> PartiteHypergraph:
        """Graph of the first m inserted edges (defaults to all of them)."""
        if m is None:
            m = len(self.edge_order)
        return PartiteHypergraph((self.n,) * self.k, self.edge_order[:m])


def md_process(n: int, k: int, d: int, seed=0) -> MdTrace:
    """Run the random insertion process until minimum degree reaches d."""
    if d < 1:
        raise ValueError("d must be positive")
    if d > n ** (k - 1):
        raise ValueError("d exceeds the maximum possible degree")
    rng = np.random.default_rng(seed)
    total = n**k
    sizes = (n,) * k
    repl: dict[int, int] = {}
    deg = np.zeros(k * n, dtype=np.int64)
    # below[j] counts vertices with degree < j, for j = 1..d
    below = [k * n] * (d + 1)
    stops = [0] * (d + 1)
    order: list[Edge] = []
    reached = 0
    for i in range(total):
        j = int(rng.integers(i, total))
        vi = repl.get(i, i)
        repl[i] = repl.get(j, j)
        repl[j] = vi
        e = edge_unrank(repl[i], sizes)
        order.append(e)
        for part, v in enumerate(e):
            flat = part * n + v
            deg[flat] += 1
            new_deg = int(deg[flat])
            if new_deg <= d:
                below[new_deg] -= 1
        while reached < d and below[reached + 1] == 0:
            reached += 1
            stops[reached] = i + 1
        if reached == d:
            break
    if reached < d:
        raise AssertionError("insertion process exhausted without reaching degree d")
    return MdTrace(n, k, d, tuple(order), tuple(stops[1:]))
