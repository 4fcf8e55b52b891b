"""Numerical cross-check of the certificates by multi-start least squares.

Given an observation pattern, a dimension d, and entries generated from a
hidden random configuration, this module searches for completions by damped
least squares from many random starts and counts how many distinct full
tensors the converged solutions produce.  A certificate that claims global
rigidity predicts exactly one tensor class; the oracle can falsify that but
never prove it.

This is the only module that touches floating point.  Tolerances are
explicit arguments: `eps_res` for accepting a converged solution (relative
residual) and `eps_cong` for identifying two solutions as the same tensor
(relative sup distance between full tensors).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import least_squares

from .hypergraph import PartiteHypergraph
from .identifiability import certify_global_rigidity
from .rigidity import _seed_entropy

DEFAULT_EPS_RES = 1e-9
DEFAULT_EPS_CONG = 1e-6
DEFAULT_STARTS = 50


# ---------------------------------------------------------------------------
# the real-arithmetic model
# ---------------------------------------------------------------------------


def tensor_values(values: np.ndarray, flat_edges: np.ndarray) -> np.ndarray:
    """Model predictions: per edge, sum over coordinates of the vertex-value
    products.  `values` is (N, d) float, `flat_edges` (E, k) flat ids."""
    if flat_edges.shape[0] == 0:
        return np.zeros(0)
    gathered = values[flat_edges]  # (E, k, d)
    return gathered.prod(axis=1).sum(axis=1)


def model_jacobian(values: np.ndarray, flat_edges: np.ndarray) -> np.ndarray:
    """Analytic Jacobian of `tensor_values` wrt the flattened (N*d) values."""
    n_points, d = values.shape
    E, k = flat_edges.shape
    out = np.zeros((E, n_points * d))
    if E == 0:
        return out
    gathered = values[flat_edges]  # (E, k, d)
    pre = np.ones_like(gathered)
    suf = np.ones_like(gathered)
    for i in range(1, k):
        pre[:, i] = pre[:, i - 1] * gathered[:, i - 1]
    for i in range(k - 2, -1, -1):
        suf[:, i] = suf[:, i + 1] * gathered[:, i + 1]
    loo = pre * suf
    rows = np.arange(E)
    for i in range(k):
        base = flat_edges[:, i] * d
        for j in range(d):
            out[rows, base + j] = loo[:, i, j]
    return out


# ---------------------------------------------------------------------------
# problems
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CompletionProblem:
    """Observed entries of a hidden low-rank tensor.

    `hidden` is the configuration the entries were generated from; it is kept
    only to evaluate solver behaviour and never enters the solve path.
    """

    graph: PartiteHypergraph
    d: int
    observed: np.ndarray
    hidden: np.ndarray

    def to_json(self) -> str:
        return json.dumps(
            {
                "graph": json.loads(self.graph.to_json()),
                "d": self.d,
                "observed": self.observed.tolist(),
                "hidden": self.hidden.tolist(),
            }
        )

    @classmethod
    def from_json(cls, text: str) -> "CompletionProblem":
        doc = json.loads(text)
        graph = PartiteHypergraph(doc["graph"]["parts"], doc["graph"]["edges"])
        return cls(
            graph,
            int(doc["d"]),
            np.asarray(doc["observed"], dtype=float),
            np.asarray(doc["hidden"], dtype=float),
        )


def make_problem(graph: PartiteHypergraph, d: int, seed=0) -> CompletionProblem:
    """Sample a hidden configuration with entries in +/-[0.5, 1.5] (bounded
    away from zero) and record the observed entries on the graph's edges."""
    rng = np.random.default_rng(seed)
    n = graph.num_vertices
    mags = rng.uniform(0.5, 1.5, size=(n, d))
    signs = rng.integers(0, 2, size=(n, d)) * 2 - 1
    hidden = mags * signs
    observed = tensor_values(hidden, graph.edge_array())
    return CompletionProblem(graph, d, observed, hidden)


# ---------------------------------------------------------------------------
# multi-start solving
# ---------------------------------------------------------------------------


@dataclass
class SolveOutcome:
    """Converged solutions and their grouping into full-tensor classes."""

    solutions: list = field(default_factory=list)
    residuals: list = field(default_factory=list)
    classes: list = field(default_factory=list)
    class_tensors: list = field(default_factory=list)
    nonconverged: int = 0

    @property
    def distinct_tensor_classes(self) -> int:
        return len(self.classes)

    def to_json(self) -> str:
        return json.dumps(
            {
                "residuals": [float(r) for r in self.residuals],
                "classes": self.classes,
                "distinct_tensor_classes": self.distinct_tensor_classes,
                "nonconverged": self.nonconverged,
                "solutions": [s.tolist() for s in self.solutions],
            }
        )


def full_tensor(graph: PartiteHypergraph, values: np.ndarray) -> np.ndarray:
    """All entries of the rank-d tensor a configuration generates."""
    complete = PartiteHypergraph.complete(graph.part_sizes)
    return tensor_values(values, complete.edge_array())


def _cluster_by_tensor(tensors: list[np.ndarray], eps_cong: float) -> list[list[int]]:
    order = sorted(range(len(tensors)), key=lambda i: tuple(np.round(tensors[i], 9)))
    classes: list[list[int]] = []
    reps: list[np.ndarray] = []
    for idx in order:
        t = tensors[idx]
        placed = False
        for c, rep in enumerate(reps):
            scale = max(1.0, np.abs(rep).max(), np.abs(t).max())
            if np.abs(t - rep).max() <= eps_cong * scale:
                classes[c].append(idx)
                placed = True
                break
        if not placed:
            classes.append([idx])
            reps.append(t)
    return classes


def multistart_solve(
    problem: CompletionProblem,
    starts: int = DEFAULT_STARTS,
    seed=0,
    eps_res: float = DEFAULT_EPS_RES,
    eps_cong: float = DEFAULT_EPS_CONG,
    init_box: float = 2.0,
) -> SolveOutcome:
    """Damped least-squares descents from `starts` random initializations.

    A start counts as converged when its relative residual drops below
    `eps_res`; converged solutions are grouped by full-tensor agreement
    within `eps_cong` (relative).  Nonconvergent starts are counted, never
    fabricated into solutions.
    """
    graph, d = problem.graph, problem.d
    flat = graph.edge_array()
    n = graph.num_vertices
    scale = max(1.0, float(np.linalg.norm(problem.observed)))
    rng = np.random.default_rng(seed)

    def residual(x):
        return tensor_values(x.reshape(n, d), flat) - problem.observed

    def jac(x):
        return model_jacobian(x.reshape(n, d), flat)

    outcome = SolveOutcome()
    tensors: list[np.ndarray] = []
    for _ in range(starts):
        x0 = rng.uniform(-init_box, init_box, size=n * d)
        result = least_squares(
            residual, x0, jac=jac, method="trf", xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=400
        )
        rel = float(np.linalg.norm(result.fun)) / scale
        if rel < eps_res:
            sol = result.x.reshape(n, d)
            outcome.solutions.append(sol)
            outcome.residuals.append(rel)
            tensors.append(full_tensor(graph, sol))
        else:
            outcome.nonconverged += 1
    outcome.classes = _cluster_by_tensor(tensors, eps_cong)
    outcome.class_tensors = [tensors[c[0]] for c in outcome.classes]
    return outcome


# ---------------------------------------------------------------------------
# certificate cross-check
# ---------------------------------------------------------------------------


def crosscheck(
    graph: PartiteHypergraph,
    d: int,
    trials: int = 20,
    starts: int = DEFAULT_STARTS,
    seed=0,
    eps_res: float = DEFAULT_EPS_RES,
    eps_cong: float = DEFAULT_EPS_CONG,
) -> dict:
    """Compare empirical completion counts against the rigidity certificate.

    Soundness is checked in one direction only: a "globally_rigid" verdict
    must see exactly one tensor class among converged solutions in every
    trial.  More than one class under an "unknown" verdict is evidence, not
    contradiction, and is recorded as such.
    """
    certificate = certify_global_rigidity(graph, d, "real", seed=seed)
    trials_out = []
    agreements = disagreements = 0
    for t in range(trials):
        problem = make_problem(graph, d, seed=_seed_entropy(seed) + [t])
        outcome = multistart_solve(
            problem, starts=starts, seed=_seed_entropy(seed) + [t, 1], eps_res=eps_res, eps_cong=eps_cong
        )
        classes = outcome.distinct_tensor_classes
        if certificate.verdict == "globally_rigid":
            ok = classes == 1
        elif certificate.verdict == "not_globally_rigid":
            ok = classes != 1
        else:
            ok = True
        agreements += ok
        disagreements += not ok
        trials_out.append(
            {
                "trial": t,
                "classes": classes,
                "converged": len(outcome.solutions),
                "nonconverged": outcome.nonconverged,
                "agrees": bool(ok),
            }
        )
    return {
        "d": d,
        "verdict": certificate.verdict,
        "certificate": certificate.to_dict(),
        "trials": trials_out,
        "agreements": agreements,
        "disagreements": disagreements,
    }
