"""State-vector simulation of phase-initialization errors, phase decoherence,
Grover search sensitivity and Shor/Steane code behaviour under analog errors."""
from .errors import (
    ConfigError,
    DegenerateMeasurement,
    InvalidArgument,
    InvalidGate,
    InvalidPattern,
    NumericalError,
    QPhaseError,
    UncorrectableSyndrome,
)
from .kernels import BACKEND
from .statevec import (
    GateMatrix,
    RegisterState,
    apply_gate,
    apply_global_phase,
    apply_phase_vector,
    component_count,
    fidelity,
    init_basis,
    measure_all,
    uniform_state,
)

__version__ = "0.1.0"
