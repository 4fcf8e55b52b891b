"""Rigidity maps, Jacobians, and local-rigidity decisions.

A d-dimensional point configuration assigns a vector in F^d to every vertex;
the rigidity map evaluates, for each observed entry (edge), the sum over
coordinates of the product of the incident vertices' values.  Local rigidity
asks whether the Jacobian of that map attains its maximum possible rank
``d*N - d*(k-1)`` (the defect is the dimension of the scaling symmetry that
cannot be removed: per-class diagonal scalings with product one, plus
coordinate permutations).

Rank evaluation is randomized over GF(P) for the fixed 61-bit prime P: an
observed full rank certifies the generic rank deterministically (ranks of
specializations never exceed the generic rank), while a "not rigid" answer is
one-sided Monte Carlo whose failure odds per trial are bounded by
Schwartz-Zippel at degree/P.  An exact rational mode is available for audits
on tiny instances.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .exactlinalg import (
    GF_LARGE,
    LARGE_PRIME,
    QQ,
    FieldMatrix,
    PrimeField,
    RationalField,
    _eliminate_mod,
    _mulmod,
    _rank_mod,
    _submod,
)
from .hypergraph import PartiteHypergraph, all_edges


class GuardError(RuntimeError):
    """Raised when a request exceeds the documented desk-scale limits."""


# ---------------------------------------------------------------------------
# point configurations
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PointConfiguration:
    """d coordinates per vertex; row v of `values` is the vector of vertex v.

    Entries are uint64 residues for a prime field or Fractions for Q.  The
    pseudo-generic samplers below never produce a zero entry (products of
    coordinates must not vanish).
    """

    field: object
    values: np.ndarray

    @property
    def n_points(self) -> int:
        return self.values.shape[0]

    @property
    def d(self) -> int:
        return self.values.shape[1]

    def coordinate(self, j: int) -> np.ndarray:
        return self.values[:, j]


def sample_configuration(n_points: int, d: int, rng, field=GF_LARGE) -> PointConfiguration:
    """Uniform pseudo-generic configuration with all entries nonzero."""
    rng = np.random.default_rng(rng)
    if isinstance(field, RationalField):
        mags = rng.integers(1, 1000, size=(n_points, d))
        signs = rng.integers(0, 2, size=(n_points, d)) * 2 - 1
        vals = np.empty((n_points, d), dtype=object)
        for i in range(n_points):
            for j in range(d):
                vals[i, j] = Fraction(int(mags[i, j] * signs[i, j]))
        return PointConfiguration(field, vals)
    q = field.q
    vals = rng.integers(1, q, size=(n_points, d), dtype=np.int64).astype(np.uint64)
    return PointConfiguration(field, vals)


def apply_stabilizer(
    graph: PartiteHypergraph,
    config: PointConfiguration,
    diagonals,
    permutation=None,
) -> PointConfiguration:
    """Act on a configuration by per-class diagonal scalings and a shared
    coordinate permutation.

    ``diagonals[j]`` is a length-d vector applied to the vertices of class j;
    the action leaves the rigidity map invariant exactly when the entrywise
    product of the diagonals is all-ones.  ``permutation`` reorders the d
    coordinates (the same way in every class).
    """
    d = config.d
    perm = tuple(range(d)) if permutation is None else tuple(permutation)
    if sorted(perm) != list(range(d)):
        raise ValueError("permutation must reorder the coordinates")
    out = config.values.copy()
    offset = 0
    for part, size in enumerate(graph.part_sizes):
        diag = diagonals[part]
        block = out[offset : offset + size][:, perm]
        if isinstance(config.field, RationalField):
            for j in range(d):
                block[:, j] = block[:, j] * diag[j]
        else:
            q = config.field.q
            diag_arr = np.array([int(x) % q for x in diag], dtype=np.uint64)
            block = _mulmod(block, diag_arr[None, :], q)
        out[offset : offset + size] = block
        offset += size
    return PointConfiguration(config.field, out)


# ---------------------------------------------------------------------------
# rigidity map and Jacobian
# ---------------------------------------------------------------------------


def _gathered_values(graph: PartiteHypergraph, config: PointConfiguration) -> np.ndarray:
    """Values arranged per edge: shape (|E|, k, d)."""
    flat = graph.edge_array()
    return config.values[flat]


def _prefix_suffix_products(vals: np.ndarray, field) -> np.ndarray:
    """Leave-one-out products along axis 1: out[:, i] = prod of vals[:, j != i]."""
    E, k, d = vals.shape
    if isinstance(field, RationalField):
        one = Fraction(1)
        mul = lambda a, b: a * b  # noqa: E731 - object arrays use Python ops
        pre = np.empty((E, k, d), dtype=object)
        suf = np.empty((E, k, d), dtype=object)
    else:
        one = np.uint64(1)
        q = field.q
        mul = lambda a, b: _mulmod(a, b, q)  # noqa: E731
        pre = np.empty((E, k, d), dtype=np.uint64)
        suf = np.empty((E, k, d), dtype=np.uint64)
    pre[:, 0] = one
    for i in range(1, k):
        pre[:, i] = mul(pre[:, i - 1], vals[:, i - 1])
    suf[:, k - 1] = one
    for i in range(k - 2, -1, -1):
        suf[:, i] = mul(suf[:, i + 1], vals[:, i + 1])
    return mul(pre, suf)


def rigidity_map(graph: PartiteHypergraph, config: PointConfiguration) -> np.ndarray:
    """Per-edge sums over coordinates of the incident-value products.

    Returns an array of length |E| over the configuration's field, in edge
    order.
    """
    if config.n_points != graph.num_vertices:
        raise ValueError("configuration size does not match the graph")
    vals = _gathered_values(graph, config)
    E, k, d = vals.shape
    if isinstance(config.field, RationalField):
        prod = vals[:, 0, :].copy() if k else None
        for i in range(1, k):
            prod = prod * vals[:, i, :]
        out = np.empty(E, dtype=object)
        for e in range(E):
            out[e] = sum(prod[e], Fraction(0))
        return out
    q = config.field.q
    prod = vals[:, 0, :]
    for i in range(1, k):
        prod = _mulmod(prod, vals[:, i, :], q)
    out = np.zeros(E, dtype=np.uint64)
    for j in range(d):
        out = (out + prod[:, j]) % np.uint64(q)
    return out


def jacobian_array(graph: PartiteHypergraph, config: PointConfiguration) -> np.ndarray:
    """Raw Jacobian entries of the rigidity map at `config`.

    Shape (|E|, N*d); the column of vertex u, coordinate j is u*d + j
    (vertex-major, coordinate-minor).  Row e has exactly k*d nonzeros: at
    column (u, j) for u in e the entry is the product of the j-th coordinates
    of the other k-1 vertices of e.
    """
    if config.n_points != graph.num_vertices:
        raise ValueError("configuration size does not match the graph")
    E = graph.num_edges
    N, d = config.values.shape
    vals = _gathered_values(graph, config)
    loo = _prefix_suffix_products(vals, config.field)
    if isinstance(config.field, RationalField):
        out = np.empty((E, N * d), dtype=object)
        out[:] = Fraction(0)
    else:
        out = np.zeros((E, N * d), dtype=np.uint64)
    if E == 0:
        return out
    flat = graph.edge_array()
    rows = np.arange(E)
    for i in range(graph.k):
        base = flat[:, i] * d
        for j in range(d):
            out[rows, base + j] = loo[:, i, j]
    return out


def jacobian(graph: PartiteHypergraph, config: PointConfiguration) -> FieldMatrix:
    """The Jacobian as a FieldMatrix over the configuration's field."""
    return FieldMatrix(config.field, None, _trusted=jacobian_array(graph, config))


def required_rank(graph: PartiteHypergraph, d: int) -> int:
    """Maximum possible Jacobian rank: d*N - d*(k-1)."""
    return d * graph.num_vertices - d * (graph.k - 1)


# ---------------------------------------------------------------------------
# local rigidity
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LocalRigidityVerdict:
    """Outcome of the randomized rank test.

    ``rigid=True`` is certain: a full-rank specialization proves the generic
    rank.  ``rigid=False`` is one-sided Monte Carlo; all `trials` evaluations
    would have to be unlucky for it to be wrong.
    """

    d: int
    rank_observed: int
    rank_required: int
    rigid: bool
    trials: int
    prime: int

    def __post_init__(self):
        assert self.rank_observed <= self.rank_required


def local_rigid(
    graph: PartiteHypergraph, d: int, trials: int = 3, seed=0, field=None
) -> LocalRigidityVerdict:
    """Randomized local-rigidity decision in dimension d.

    Samples `trials` pseudo-generic configurations (streams derived from
    (seed, trial index)), computes the Jacobian rank of each over GF(P), and
    reports the maximum against the required rank d*N - d*(k-1).
    """
    if d < 1:
        raise ValueError("dimension d must be positive")
    field = GF_LARGE if field is None else field
    need = required_rank(graph, d)
    best = 0
    for t in range(trials):
        rng = np.random.default_rng(_seed_entropy(seed) + [t])
        config = sample_configuration(graph.num_vertices, d, rng, field)
        if isinstance(field, RationalField):
            r = jacobian(graph, config).rank()
        else:
            r = _rank_mod(jacobian_array(graph, config), field.q)
        assert r <= need, "Jacobian rank exceeded the structural bound"
        best = max(best, r)
        if best == need:
            break
    prime = field.q if isinstance(field, PrimeField) else 0
    return LocalRigidityVerdict(d, best, need, best == need, trials, prime)


def local_rigid_1d_exact(graph: PartiteHypergraph) -> bool:
    """Deterministic 1-dimensional test: incidence rank equals N - (k-1)."""
    inc = FieldMatrix.from_rows(graph.incidence_matrix().tolist(), QQ)
    return inc.rank() == graph.num_vertices - (graph.k - 1)


def _seed_entropy(seed) -> list[int]:
    """Flatten a seed (int or sequence of ints) for stream derivation."""
    if isinstance(seed, (int, np.integer)):
        return [int(seed)]
    return [int(x) for x in seed]


# ---------------------------------------------------------------------------
# the rigidity matroid at small scale
# ---------------------------------------------------------------------------


class TensorRigidityMatroid:
    """Rank and closure oracle for the dimension-d rigidity matroid on the
    edges of the complete k-partite graph.

    One pseudo-generic configuration is drawn per trial and shared by all
    queries, so ranks are coherent across calls; closure intersects the
    per-trial closures, which keeps false memberships one-sided and rare.
    """

    def __init__(self, part_sizes, d: int, trials: int = 2, seed=0):
        self.part_sizes = tuple(int(n) for n in part_sizes)
        self.d = int(d)
        self.ambient = PartiteHypergraph.complete(self.part_sizes)
        self._configs = [
            sample_configuration(
                self.ambient.num_vertices, d, np.random.default_rng(_seed_entropy(seed) + [t])
            )
            for t in range(trials)
        ]

    def _rows(self, edges, config) -> np.ndarray:
        sub = PartiteHypergraph(self.part_sizes, edges)
        return jacobian_array(sub, config)

    def rank(self, edges) -> int:
        """Matroid rank of an edge set (max over the shared trials)."""
        edges = [tuple(e) for e in edges]
        if not edges:
            return 0
        return max(_rank_mod(self._rows(edges, c), LARGE_PRIME) for c in self._configs)

    def closure(self, edges) -> tuple:
        """All ambient edges whose addition leaves the rank unchanged."""
        edges = sorted(tuple(e) for e in edges)
        universe = list(self.ambient.edges)
        in_set = set(edges)
        candidates = [e for e in universe if e not in in_set]
        members = set(edges)
        closed: set | None = None
        for config in self._configs:
            if edges:
                rref, pivots = _eliminate_mod(self._rows(edges, config), LARGE_PRIME, reduced=True)
            else:
                rref, pivots = None, []
            if candidates:
                cand = self._rows(candidates, config)
                for rr, pc in enumerate(pivots):
                    f = cand[:, pc]
                    nz = np.nonzero(f)[0]
                    if nz.size:
                        cand[nz] = _submod(
                            cand[nz],
                            _mulmod(f[nz, None], rref[rr][None, :], LARGE_PRIME),
                            LARGE_PRIME,
                        )
                dependent = {candidates[i] for i in np.nonzero(~cand.any(axis=1))[0]}
            else:
                dependent = set()
            closed = dependent if closed is None else (closed & dependent)
        return tuple(sorted(members | (closed or set())))


def matroid_rank(part_sizes, d: int, edge_subset, trials: int = 2, seed=0) -> int:
    """Rank of `edge_subset` in the dimension-d rigidity matroid."""
    return TensorRigidityMatroid(part_sizes, d, trials, seed).rank(edge_subset)


def closure(part_sizes, d: int, edge_subset, trials: int = 2, seed=0) -> tuple:
    """Closure of `edge_subset` in the dimension-d rigidity matroid."""
    return TensorRigidityMatroid(part_sizes, d, trials, seed).closure(edge_subset)


def find_spanning_dtree_in_closure(
    graph: PartiteHypergraph,
    d: int,
    trials: int = 2,
    seed=0,
    max_ambient_edges: int = 512,
) -> PartiteHypergraph | None:
    """Greedy search for a spanning d-tree inside the rigidity closure.

    Finds a complete d-per-class seed clique among closure edges, then
    repeatedly attaches any uncovered vertex having at least d closure edges
    into the covered set.  Returns the d-tree found, or None when the greedy
    search stalls (which proves nothing).

    Only balanced graphs with at most `max_ambient_edges` ambient edges are
    accepted; the closure costs one rank pass per ambient edge.
    """
    sizes = graph.part_sizes
    if len(set(sizes)) != 1:
        raise GuardError("spanning d-tree search requires balanced classes")
    if graph.max_edges > max_ambient_edges:
        raise GuardError(
            f"ambient edge count {graph.max_edges} exceeds the guard ({max_ambient_edges})"
        )
    n, k = sizes[0], graph.k
    if d > n:
        raise ValueError("d cannot exceed the class size")
    matroid = TensorRigidityMatroid(sizes, d, trials, seed)
    closed_edges = sorted(matroid.closure(graph.edges))
    closed = set(closed_edges)

    seed_sets = None
    for combo in itertools.product(*[itertools.combinations(range(n), d) for _ in range(k)]):
        if all(e in closed for e in itertools.product(*combo)):
            seed_sets = combo
            break
    if seed_sets is None:
        return None
    covered = [set(c) for c in seed_sets]
    tree_edges = list(itertools.product(*seed_sets))
    changed = True
    while changed and any(len(c) < n for c in covered):
        changed = False
        for part in range(k):
            for v in range(n):
                if v in covered[part]:
                    continue
                pool = [
                    e
                    for e in closed_edges
                    if e[part] == v
                    and all(e[j] in covered[j] for j in range(k) if j != part)
                ]
                if len(pool) >= d:
                    tree_edges.extend(sorted(pool)[:d])
                    covered[part].add(v)
                    changed = True
    if any(len(c) < n for c in covered):
        return None
    return PartiteHypergraph(sizes, tree_edges)
