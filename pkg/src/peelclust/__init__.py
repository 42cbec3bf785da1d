"""peelclust: exact recovery of planted clusters by convex splitting and
iterative peeling, with active-sampling support under partial observation."""

from .certificate import (
    build_certificate,
    build_context,
    check_certificate,
    project_tangent,
    random_norm_probe,
)
from .detect import (
    PartialClustering,
    detect_partial_clustering,
    match_to_ground_truth,
    min_cluster_size,
    soundness_threshold_full,
    soundness_threshold_partial,
)
from .matcore import (
    apply_mask,
    project_box,
    shrink_weighted,
    spectral_norm,
    svt,
    sym_eig,
)
from .peeling import (
    PeelOptions,
    PeelReport,
    Schedule,
    recover_big_full,
    recover_big_partial,
    recover_full,
    recover_partial,
)
from .planted import (
    GroundTruth,
    ObservationOracle,
    PartialObservation,
    make_ground_truth,
    make_oracle,
    sample_full,
    zero_fill,
)
from .solver import (
    Consts,
    PartialConsts,
    Solution,
    SolveOpts,
    SolveParams,
    objective,
    params_full,
    params_partial,
    solve,
)

__version__ = "0.1.0"
