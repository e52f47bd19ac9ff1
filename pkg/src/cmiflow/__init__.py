"""cmiflow: conditional mutual information flow analysis for
ancilla-system-environment quantum dynamics.

Computes I(A:E|S) and its decomposition into classical, classical-quantum
and quantum parts via measurement and state-extension optimization, tracks
information backflow along unitary system-environment evolutions, and
verifies the associated identities and monogamy equalities numerically.
"""

__version__ = "0.1.0"

from .backend import backend_name
from .channels import (
    KrausChannel,
    Povm,
    apply_channel,
    broadcast,
    broadcast_channel,
    channel_from_json,
    channel_to_json,
    composite_extend,
    measure_to_cq,
    naimark_extend,
    recover,
)
from .discord import (
    MeasurementParametrization,
    OptimizerConfig,
    bipartite_classical_corr,
    big_r,
    classical_cmi,
    discord,
    j_conditional,
    r_conditional,
)
from .dynamics import (
    Scenario,
    TrajectoryReport,
    broadcast_suite,
    dephasing_scenario,
    evolve,
    example_scenario,
    example_state,
    partial_swap_scenario,
    property_suite,
    trajectory,
)
from .entropy import (
    EntropyReport,
    capacity_identity,
    cmi,
    decomposition_identity,
    mutual_information,
    relative_entropy,
    vn_entropy,
)
from .extensions import (
    DecompositionParametrization,
    ExtensionParametrization,
    concurrence,
    e_a,
    entanglement_of_formation,
    eof_general,
    extend,
    generalized_kw_check,
    koashi_winter_check,
    r_ex,
    w_quantity,
)
from .linalg import HermitianSpectrum, hermitian_eig, kron, partial_trace, permute_factors, purify
from .states import (
    LabeledState,
    SubsystemLayout,
    classical_state,
    from_matrix,
    from_vector,
    maximally_entangled,
    purify_state,
    reduce,
    state_from_json,
    state_to_json,
    tensor,
    validate,
)
