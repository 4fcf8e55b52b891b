"""Monte Carlo harness for threshold phenomenology.

Sweeps sample random observation patterns, evaluate the requested
certificates, and emit one record per evaluation point in a frozen CSV
schema.  Two sampling modes exist:

* ``gnm``: a fixed grid of edge counts m, graph drawn uniformly among
  m-edge subgraphs;
* ``at-threshold``: one random edge-insertion trace per trial, evaluated at
  the minimum-degree stopping times.  Certificates needing different degrees
  share the trace, mirroring the nesting of the stopping times: the
  1-dimensional global certificates run at the degree-1 stop, local rigidity
  in dimension d at the degree-d stop, and the d >= 2 global ingredients at
  the degree-(d+1) stop.

Records are pure functions of (master seed, grid point, trial index), so a
sweep is bit-reproducible across runs and worker counts (except the wall
time column, which is measurement).  Asymptotic statements are summarized as
rates with Wilson intervals, never as sharp pass/fail at fixed n.
"""

from __future__ import annotations

import csv
import io
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields

import numpy as np

from .hypergraph import PartiteHypergraph, gnm, md_process
from .identifiability import (
    GuardError,
    SNF_GUARD_N,
    certify_global_rigidity,
    cycle_kernel_condition,
    global_rigid_1d_complex,
    global_rigid_1d_real,
    stress_kernel_condition,
)
from .rigidity import local_rigid

CERTIFICATE_CHOICES = ("local", "global_1d", "global_1d_cplx", "mm", "co")

CSV_HEADER = (
    "seed,n,k,d,mode,m,min_degree,local,"
    "global1d_real,global1d_cplx,mm_i,mm_ii,mm_iii,co,verdict,ms"
)


# ---------------------------------------------------------------------------
# threshold formulas and interval helpers
# ---------------------------------------------------------------------------


def degree_threshold_window(n: int, k: int, d: int) -> tuple[float, float]:
    """The (lower, upper) probability window for minimum degree d:
    (log n + (d-1) log log n -/+ log log log n) / n**(k-1), natural logs.

    The values are the formula's, verbatim: below n = e**e the innermost log
    is negative, so the "window" comes back inverted (it is an asymptotic
    object; callers at tiny n get what the formula says).
    """
    if n < 3:
        raise ValueError("threshold window needs n >= 3 (iterated logs)")
    ln = math.log(n)
    lln = math.log(ln)
    llln = math.log(lln) if lln > 0 else -math.inf
    center = ln + (d - 1) * lln
    scale = float(n ** (k - 1))
    return (center - llln) / scale, (center + llln) / scale


def wilson_interval(successes: int, total: int, z: float = 1.959963984540054):
    """95% Wilson score interval for a binomial proportion."""
    if total == 0:
        return (0.0, 1.0)
    phat = successes / total
    denom = 1 + z * z / total
    center = (phat + z * z / (2 * total)) / denom
    half = z * math.sqrt(phat * (1 - phat) / total + z * z / (4 * total * total)) / denom
    lo = 0.0 if successes == 0 else max(0.0, center - half)
    hi = 1.0 if successes == total else min(1.0, center + half)
    return (lo, hi)


# ---------------------------------------------------------------------------
# records
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ExperimentRecord:
    """One certificate evaluation; column set is frozen (see CSV_HEADER)."""

    seed: int
    n: int
    k: int
    d: int
    mode: str
    m: int
    min_degree: int
    local: bool | None = None
    global1d_real: bool | None = None
    global1d_cplx: bool | None = None
    mm_i: bool | None = None
    mm_ii: bool | None = None
    mm_iii: bool | None = None
    co: bool | None = None
    verdict: str = ""
    ms: int = 0

    def to_csv_row(self) -> str:
        def cell(v):
            if v is None:
                return ""
            if isinstance(v, bool):
                return "1" if v else "0"
            return str(v)

        return ",".join(cell(getattr(self, f.name)) for f in fields(self))

    @staticmethod
    def from_csv_row(row: str) -> "ExperimentRecord":
        parts = row.split(",")
        names = [f.name for f in fields(ExperimentRecord)]
        kwargs = {}
        for name, raw in zip(names, parts):
            if name in ("seed", "n", "k", "d", "m", "min_degree", "ms"):
                kwargs[name] = int(raw)
            elif name in ("mode", "verdict"):
                kwargs[name] = raw
            else:
                kwargs[name] = None if raw == "" else raw == "1"
        return ExperimentRecord(**kwargs)


def write_records_csv(records, out) -> None:
    """Write records with the frozen header to a path or text stream."""
    own = isinstance(out, (str, bytes))
    stream = open(out, "w", encoding="utf-8") if own else out
    try:
        stream.write(CSV_HEADER + "\n")
        for rec in records:
            stream.write(rec.to_csv_row() + "\n")
    finally:
        if own:
            stream.close()


def read_records_csv(stream_or_path) -> list[ExperimentRecord]:
    own = isinstance(stream_or_path, (str, bytes))
    stream = open(stream_or_path, encoding="utf-8") if own else stream_or_path
    try:
        lines = [ln.strip() for ln in stream if ln.strip()]
    finally:
        if own:
            stream.close()
    if not lines or lines[0] != CSV_HEADER:
        raise ValueError("missing or unexpected CSV header")
    return [ExperimentRecord.from_csv_row(ln) for ln in lines[1:]]


# ---------------------------------------------------------------------------
# sweep configuration
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SweepConfig:
    """Grid description for a threshold sweep.

    `certificates` picks what gets evaluated: "local" (dimension d),
    "global_1d" (exact real test), "global_1d_cplx" (all-primes divisor
    test, guarded to small N), "mm" and "co" (the d >= 2 global rigidity
    ingredients).
    """

    k: int
    d: int
    n_list: tuple
    mode: str = "gnm"
    m_grid: tuple | None = None
    certificates: tuple = ("local",)
    trials: int = 20
    seed: int = 0
    jobs: int = 1
    inner_trials: int = 3

    def validate(self) -> None:
        if self.k < 2:
            raise ValueError("k must be at least 2")
        if self.d < 1:
            raise ValueError("d must be at least 1")
        if self.seed < 0:
            raise ValueError("master seed must be nonnegative")
        if not self.n_list:
            raise ValueError("n_list must be nonempty")
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if self.mode not in ("gnm", "at-threshold"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.mode == "gnm" and not self.m_grid:
            raise ValueError("gnm mode needs an m grid")
        bad = [c for c in self.certificates if c not in CERTIFICATE_CHOICES]
        if bad:
            raise ValueError(f"unknown certificates: {bad}")
        if not self.certificates:
            raise ValueError("certificate set must be nonempty")
        if "global_1d_cplx" in self.certificates:
            for n in self.n_list:
                if n * self.k > SNF_GUARD_N:
                    raise GuardError(
                        f"all-primes certificate needs N <= {SNF_GUARD_N}; n={n} gives N={n * self.k}"
                    )

    def point_seed(self, n: int, point_index: int, trial: int) -> list[int]:
        return [self.seed, n, point_index, trial]


def _evaluate_graph(cfg: SweepConfig, graph: PartiteHypergraph, certs, mode: str, m: int, entropy) -> ExperimentRecord:
    t0 = time.perf_counter()
    min_deg = graph.min_degree()
    vals = {
        "local": None,
        "global1d_real": None,
        "global1d_cplx": None,
        "mm_i": None,
        "mm_ii": None,
        "mm_iii": None,
        "co": None,
    }
    verdict = ""
    if "local" in certs:
        verdict_local = local_rigid(graph, cfg.d, trials=cfg.inner_trials, seed=entropy)
        vals["local"] = verdict_local.rigid
        if verdict_local.rigid:
            assert min_deg >= cfg.d, "locally rigid record with minimum degree below d"
    if "global_1d" in certs:
        vals["global1d_real"] = global_rigid_1d_real(graph)
    if "global_1d_cplx" in certs:
        vals["global1d_cplx"] = global_rigid_1d_complex(graph)
    if "mm" in certs:
        cert = certify_global_rigidity(graph, cfg.d, "real", trials=cfg.inner_trials, seed=entropy)
        vals["mm_i"] = cert.mm_i
        vals["mm_ii"] = cert.mm_ii
        vals["mm_iii"] = cert.mm_iii
        vals["co"] = cert.co
        vals["global1d_real"] = cert.global_1d_real
        verdict = cert.verdict
    elif "co" in certs:
        vals["co"] = stress_kernel_condition(graph, cfg.d, trials=cfg.inner_trials, seed=entropy)
    ms = int((time.perf_counter() - t0) * 1000)
    return ExperimentRecord(
        seed=cfg.seed,
        n=graph.part_sizes[0],
        k=cfg.k,
        d=cfg.d,
        mode=mode,
        m=m,
        min_degree=min_deg,
        verdict=verdict,
        ms=ms,
        **vals,
    )


def _stop_degree(cfg: SweepConfig, cert: str) -> int:
    if cert in ("global_1d", "global_1d_cplx"):
        return 1
    if cert == "local":
        return cfg.d
    return cfg.d + 1  # mm / co evaluate past the local threshold


def _run_task(args) -> list[ExperimentRecord]:
    cfg, n, point_index, point, trial = args
    records = []
    if cfg.mode == "gnm":
        m = point
        entropy = cfg.point_seed(n, point_index, trial)
        graph = gnm(n, cfg.k, m, seed=entropy)
        records.append(
            _evaluate_graph(cfg, graph, cfg.certificates, "gnm", m, entropy + [1])
        )
        return records
    # at-threshold: group certificates by the minimum-degree stop they use
    stops: dict[int, list] = {}
    for cert in cfg.certificates:
        stops.setdefault(_stop_degree(cfg, cert), []).append(cert)
    max_degree = max(stops)
    entropy = cfg.point_seed(n, point_index, trial)
    trace = md_process(n, cfg.k, max_degree, seed=entropy)
    for degree in sorted(stops):
        m = trace.stops[degree - 1]
        graph = trace.graph(m)
        records.append(
            _evaluate_graph(cfg, graph, stops[degree], f"md{degree}", m, entropy + [degree])
        )
    return records


def threshold_sweep(cfg: SweepConfig) -> list[ExperimentRecord]:
    """Run the sweep and return records in deterministic grid-then-trial
    order.  `cfg.jobs > 1` distributes trials over a process pool; the
    record list is identical either way."""
    cfg.validate()
    points = list(enumerate(cfg.m_grid)) if cfg.mode == "gnm" else [(0, None)]
    tasks = [
        (cfg, n, point_index, point, trial)
        for n in cfg.n_list
        for point_index, point in points
        for trial in range(cfg.trials)
    ]
    if cfg.jobs > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            chunks = list(pool.map(_run_task, tasks, chunksize=4))
    else:
        chunks = [_run_task(t) for t in tasks]
    return [rec for chunk in chunks for rec in chunk]


# ---------------------------------------------------------------------------
# summaries
# ---------------------------------------------------------------------------


_BOOL_COLUMNS = ("local", "global1d_real", "global1d_cplx", "mm_i", "mm_ii", "mm_iii", "co")


def curve_summary(records) -> list[dict]:
    """Success rates with Wilson 95% intervals per grid point.

    Records must share (n, k, d); rows are emitted per (mode, m-bucket,
    certificate column), sorted, so the table is independent of record
    order.  In at-threshold modes the m column varies per trial and the
    bucket is the mode itself.
    """
    records = list(records)
    if not records:
        return []
    keys = {(r.n, r.k, r.d) for r in records}
    if len(keys) != 1:
        raise ValueError("curve_summary needs records sharing (n, k, d)")
    buckets: dict = {}
    for r in records:
        bucket = (r.mode, r.m if r.mode == "gnm" else -1)
        buckets.setdefault(bucket, []).append(r)
    rows = []
    for (mode, m) in sorted(buckets):
        group = buckets[(mode, m)]
        for col in _BOOL_COLUMNS:
            present = [getattr(r, col) for r in group if getattr(r, col) is not None]
            if not present:
                continue
            successes = sum(present)
            lo, hi = wilson_interval(successes, len(present))
            rows.append(
                {
                    "mode": mode,
                    "m": m if mode == "gnm" else "",
                    "certificate": col,
                    "successes": successes,
                    "trials": len(present),
                    "rate": successes / len(present),
                    "wilson_low": lo,
                    "wilson_high": hi,
                }
            )
    return rows


def summary_to_csv(rows) -> str:
    out = io.StringIO()
    writer = csv.DictWriter(
        out,
        fieldnames=[
            "mode", "m", "certificate", "successes", "trials", "rate", "wilson_low", "wilson_high",
        ],
    )
    writer.writeheader()
    for row in rows:
        writer.writerow(row)
    return out.getvalue()


def md_statistics(n: int, k: int, d: int, trials: int, seed=0) -> dict:
    """Empirical distribution of the degree-d stopping time.

    Stopping times are reported both raw and as empirical edge probabilities
    m / n**k, compared against the minimum-degree threshold window; the
    fractions of trials falling below/above the window carry Wilson
    intervals.  For the median, both the raw window test and the window
    scaled by n (the m / n**(k-1) normalization) are recorded; they are the
    same test.
    """
    stops = np.zeros((trials, d), dtype=np.int64)
    for t in range(trials):
        trace = md_process(n, k, d, seed=[int(seed), t])
        stops[t] = trace.stops
        assert list(trace.stops) == sorted(trace.stops)
    m_values = stops[:, d - 1]
    total = float(n**k)
    p_hat = m_values / total
    median_p = float(np.median(p_hat))
    out = {
        "n": n,
        "k": k,
        "d": d,
        "trials": trials,
        "seed": int(seed),
        "m_mean": float(m_values.mean()),
        "m_median": float(np.median(m_values)),
        "m_min": int(m_values.min()),
        "m_max": int(m_values.max()),
        "p_hat_median": median_p,
        "p_window_low": None,
        "p_window_high": None,
        "scaled_median": median_p * n,  # median of m / n**(k-1)
        "scaled_window_low": None,
        "scaled_window_high": None,
        "frac_below": None,
        "frac_below_wilson": None,
        "frac_above": None,
        "frac_above_wilson": None,
        "median_inside_window": None,
    }
    if n >= 3:  # the iterated-log window is undefined below e
        lo, hi = degree_threshold_window(n, k, d)
        below = int((p_hat < lo).sum())
        above = int((p_hat > hi).sum())
        out.update(
            p_window_low=lo,
            p_window_high=hi,
            scaled_window_low=lo * n,
            scaled_window_high=hi * n,
            frac_below=below / trials,
            frac_below_wilson=wilson_interval(below, trials),
            frac_above=above / trials,
            frac_above_wilson=wilson_interval(above, trials),
            median_inside_window=bool(lo <= median_p <= hi),
        )
    return out
