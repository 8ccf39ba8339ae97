"""Simulator for an associative quantum memory with a nonlinear
flag-spreading search, plus single-qubit noise-channel fidelity analysis."""

from .errors import CapacityError, NonlinearSemanticsError, ValidationError
from .gates import (
    NlePairCase,
    classify_pair,
    hadamard,
    m_matrix,
    nle_step_casewise,
    nle_step_or,
    not_gate,
    or_casewise_equivalence,
    pi_matrix,
    u_gate,
    v_matrix,
)
from .memory import (
    PatternStore,
    apply_storage,
    apply_storage_inverse_conditional,
    build_s,
    build_storage,
    cs_apply,
    storage_to_text,
    target_from_values,
)
from .noise import (
    ChannelKind,
    KrausChannel,
    apply_channel,
    consistency_report,
    expand_product_density,
    fidelity_f0,
    fidelity_f0_per_qubit,
    fidelity_general,
    fidelity_pure,
    make_channel,
    noisy_nle_density,
    noisy_retrieval_fidelity,
    tau,
)
from .oracle import MarkedSet, oracle_apply, restricted_oracle_apply
from .qstate import (
    FLAG,
    MeasurementOutcome,
    PureState,
    apply_1q,
    apply_2q,
    flag_disentangled,
    flag_distribution,
    from_support,
    measure_flag,
    measure_register,
    register_distribution,
    states_allclose,
    support,
    uniform_state,
)
from .retrieval import (
    ComplexityParams,
    RetrievalConfig,
    RetrievalOutcome,
    complexity_params,
    expand_restricted_values,
    residue_coverage,
    run_retrieval,
)

__version__ = "0.1.0"
