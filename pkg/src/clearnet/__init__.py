"""Clearing payments on financial liability networks.

Compute dominant clearing vectors, decide uniqueness and parameterize the
full clearing set, find optimal non-pro-rata payment matrices, and run
random-network contagion experiments.
"""

__version__ = "0.1.0"

from .model import (  # noqa: F401
    DEFAULT_TOL,
    ClearingSolution,
    FinancialNetwork,
    NetworkError,
    PaymentMatrix,
    RelativeLiabilities,
    check_clearing_matrix,
    check_clearing_vector,
    equities,
    flows,
    load_network,
    network_from_dict,
    network_to_dict,
    relative_liabilities,
    save_network,
    solution_from_payments,
)
from .graph import (  # noqa: F401
    CondensationReport,
    Digraph,
    is_schur_stable_substochastic,
    reachable_from,
    reachable_to,
    spectral_radius,
    strongly_connected_components,
)
from .lp import LinearProgram, LpError, LpSolution, solve  # noqa: F401
from .clearing_vector import (  # noqa: F401
    DominantVector,
    dominant_vector_fda,
    dominant_vector_lp,
    predict_positive_support,
)
from .clearing_set import (  # noqa: F401
    ClearingSet,
    EnumeratedClearingSet,
    StageRecord,
    brute_force_clearing_set,
    resolve_clearing_set,
    sample_clearing_vectors,
    sink_component_uniqueness,
    sufficient_uniqueness,
)
from .clearing_matrix import (  # noqa: F401
    NoMaximalReport,
    demonstrate_no_maximal,
    optimal_matrix_lp,
    prorata_matrix,
    system_loss,
)
from .simgen import (  # noqa: F401
    GeneratorConfig,
    ShockConfig,
    apply_shock,
    generate,
)
from .experiment import (  # noqa: F401
    CellSummary,
    ExperimentRecord,
    run_cell,
    run_sweep,
)
