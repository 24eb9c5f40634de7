"""Physical network systems on directed graphs and k-complexes.

Laplacian dynamics, Matrix-Tree balancing of flow Laplacians,
port-Hamiltonian splitting, asymmetric consensus and the available storage
of passive networks with flow sources.
"""

from .complexes import (
    ChainComplex,
    Entropy,
    HeatComplexSystem,
    LOG_ENTROPY,
    coboundary,
    entropy_rate,
    heat_field,
    is_closed,
    validate_complex,
)
from .dynamics import (
    HamiltonianSpec,
    PassivityCertificate,
    Trajectory,
    conserved_quantity_check,
    custom,
    default_step,
    exponential,
    gradient_flow_field,
    kinetic,
    lyapunov_rate,
    polynomial,
    quadratic,
    scaled_passivity_weights,
    simulate,
    transformed_hamiltonian,
    unit_quadratic,
)
from .errors import *  # noqa: F401,F403
from .graph import (
    DirectedGraph,
    build_graph,
    connected_components,
    graph_from_dict,
    incidence_matrix,
    kron_extend,
    spanning_trees_towards,
    strongly_connected_components,
    tree_weight_sums,
)
from .kirchhoff import (
    JRDecomposition,
    SigmaVector,
    adjugate,
    balance,
    consensus_value,
    jr_decomposition,
    nullspace_direction,
    sigma_left,
    sigma_per_component,
    sigma_right,
)
from .laplacian import (
    LaplacianKind,
    LaplacianMatrix,
    consensus_laplacian,
    degree_adjacency,
    flow_laplacian,
    is_balanced,
    metzler_augment,
    symmetric_laplacian,
    transport_matrix,
)
from .storage import (
    GeneralizedSystem,
    StorageResult,
    available_storage_general,
    available_storage_generalized,
    available_storage_quadratic,
    constrained_minimizer,
    controllability_check,
    motion_energy,
)

__version__ = "0.1.0"
