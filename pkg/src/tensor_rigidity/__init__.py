"""Rigidity and identifiability certificates for partially observed
low-rank tensors.

The package decides, for an observation pattern encoded as a k-partite
k-uniform hypergraph and a target rank d, whether generic completion is
locally unique (local rigidity), globally unique (global rigidity over the
reals or complexes), and whether the associated projected variety passes the
identifiability certificates -- all by exact or certified-randomized linear
algebra.  A Monte Carlo harness reproduces the random-sampling threshold
behaviour, and a floating-point least-squares oracle cross-checks the
certificates empirically.
"""

from .completion import (
    CompletionProblem,
    SolveOutcome,
    crosscheck,
    full_tensor,
    make_problem,
    multistart_solve,
)
from .exactlinalg import (
    GF,
    GF_LARGE,
    LARGE_PRIME,
    QQ,
    FieldMatrix,
    PrimeField,
    RationalField,
    SnfResult,
    kernel_basis,
    rank,
    smith_normal_form,
    stack_rank,
)
from .experiments import (
    CSV_HEADER,
    ExperimentRecord,
    SweepConfig,
    curve_summary,
    degree_threshold_window,
    md_statistics,
    read_records_csv,
    threshold_sweep,
    wilson_interval,
    write_records_csv,
)
from .hypergraph import (
    MdTrace,
    PartiteHypergraph,
    VertexId,
    all_edges,
    degree_d_extension,
    edge_rank,
    edge_unrank,
    gnm,
    gnp,
    is_d_extendable,
    md_process,
    random_dtree,
)
from .identifiability import (
    CanonicalCycleBasis,
    GlobalRigidityCertificate,
    adjacency_matrix,
    canonical_cycle_basis,
    certify_global_rigidity,
    coordinated_adjacency_matrix,
    cycle_kernel_condition,
    cycle_kernel_report,
    cycle_polymatroid_rank,
    global_rigid_1d_complex,
    global_rigid_1d_real,
    stress_kernel_condition,
    stress_kernel_report,
    structure_vectors,
)
from .rigidity import (
    GuardError,
    LocalRigidityVerdict,
    PointConfiguration,
    TensorRigidityMatroid,
    apply_stabilizer,
    closure,
    find_spanning_dtree_in_closure,
    jacobian,
    local_rigid,
    local_rigid_1d_exact,
    matroid_rank,
    required_rank,
    rigidity_map,
    sample_configuration,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
