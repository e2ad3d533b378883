"""Trap-based certification of logical-qubit computations.

The package compiles target and trap logical circuits, twirls noise into
stochastic Pauli channels, simulates trap statistics under configurable
regimes, and turns trap failures into certified bounds (TVD, expectation
error, infidelity, Renyi-2 entropy density, mitigation headroom).
"""

from .circuits import (
    GateLayer,
    LayerKind,
    LogicalCircuit,
    Mechanism,
    RotationGate,
    build_iqp,
    build_trotter,
    heisenberg_chain,
    rus_expected_attempts,
    trotter_error_bound,
)
from .dense import (
    DenseState,
    evolve_circuit,
    exact_fidelity,
    exact_output_distribution,
    exact_renyi2_density,
    exact_tvd,
    total_error_rate,
)
from .noise import (
    CircuitChannels,
    CorrelatedSampler,
    Regime,
    RegimeConfig,
    SharedCoefficient,
    StochasticPauliChannel,
    depolarizing,
    local_depolarizing_channels,
    logical_error_rate,
    pauli_diamond_distance,
    robustness_bound,
)
from .pauli import (
    CliffordTableau,
    PauliString,
    conjugate,
    multiply,
    random_pauli,
    symplectic_product,
)
from .protocol import (
    GENERAL,
    MARKOVIAN,
    NONMARKOVIAN_GATES,
    AccreditationResult,
    SoundnessParams,
    entropy_density_bound,
    expectation_error_bound,
    infidelity_bound,
    mitigation_efficiency_check,
    required_traps,
    run_protocol,
)
from .simulator import ShotOutcome, TrapEnsemble, run_trap_shot, run_trap_shots
from .traps import (
    Construction,
    TrapInstance,
    TrapMagicVariant,
    compile_trap,
    compile_trap_modified,
    deterministic_zero_output,
    trap_channels,
)
from .twirling import (
    ChiMatrix,
    MagicVariant,
    TwirlRecord,
    insert_twirls,
    rotation_twirl_angle,
    twirl_channel,
    twirl_magic_state,
)

__version__ = "0.1.0"
