"""Grover search with an index-marking oracle and inversion about the mean,
plus the phase-error sensitivity analysis."""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple

import numpy as np

from . import kernels
from .errors import InvalidArgument
from .noise import (
    DecoherenceModel,
    InitPhaseNoise,
    PhaseWalkModel,
    dephasing_sigma,
    noisy_initialize,
    per_qubit_phases,
    phase_walk_sample,
)
from .statevec import RegisterState, _evolved, apply_global_phase, apply_phase_vector, fidelity, uniform_state


def nominal_iterations(n_states: int) -> int:
    """``round(pi/4 * sqrt(N))``, halves rounded up."""
    return int(math.floor(math.pi / 4.0 * math.sqrt(n_states) + 0.5))


def clean_marked_amplitude(n_states: int, k: int) -> float:
    return math.sin((2 * k + 1) * math.asin(1.0 / math.sqrt(n_states)))


def clean_success_probability(n_states: int, k: int) -> float:
    return clean_marked_amplitude(n_states, k) ** 2


@dataclass(frozen=True)
class GroverPlan:
    n_qubits: int
    marked_index: int = 0
    iterations: int | None = None
    oracle_phase_error_eps: float = 0.0

    def __post_init__(self):
        n_states = 1 << self.n_qubits
        if not 0 <= self.marked_index < n_states:
            raise InvalidArgument(f"marked_index {self.marked_index} out of range for N={n_states}")
        if self.iterations is None:
            object.__setattr__(self, "iterations", nominal_iterations(n_states))
        elif self.iterations < 0:
            raise InvalidArgument("iterations must be >= 0")

    @property
    def n_states(self) -> int:
        return 1 << self.n_qubits


def oracle_apply(state: RegisterState, marked_index: int, eps: float = 0.0) -> RegisterState:
    """Rotate the marked amplitude's phase by ``pi + eps``."""
    if not 0 <= marked_index < state.dim:
        raise InvalidArgument(f"marked_index {marked_index} out of range for N={state.dim}")
    amps = state.amps.copy()
    amps[marked_index] *= -cmath.exp(1j * eps)
    return _evolved(state, amps)


def diffusion_apply(state: RegisterState) -> RegisterState:
    """Inversion about the mean, ``out_k = 2 mean(a) - a_k``, in O(N)."""
    amps = state.amps.copy()
    kernels.diffuse(amps)
    return _evolved(state, amps)


def diffusion_matrix(n_states: int) -> np.ndarray:
    """Dense ``D`` with ``2/N`` off the diagonal and ``-1 + 2/N`` on it."""
    return np.full((n_states, n_states), 2.0 / n_states) - np.eye(n_states)


@dataclass(frozen=True)
class GroverNoise:
    """Noise injected into a Grover run.

    ``init`` perturbs the starting superposition. ``walk`` adds, before every
    oracle call, a phase-walk increment of ``walk.steps`` steps, either one per
    qubit (applied to that qubit's ``|1>``) or one per basis state.
    ``decoherence`` adds per-qubit Gaussian dephasing kicks equivalent to
    ``dt`` seconds of the decoherence law per round. ``gate_phase_sigma``
    attaches an unknown global phase to every oracle and diffusion call.
    """

    init: InitPhaseNoise | None = None
    walk: PhaseWalkModel | None = None
    walk_mode: str = "per_qubit"
    decoherence: DecoherenceModel | None = None
    dt: float = 0.0
    gate_phase_sigma: float = 0.0

    def __post_init__(self):
        if self.walk_mode not in ("per_qubit", "per_basis_state"):
            raise InvalidArgument(f"unknown walk_mode {self.walk_mode!r}")

    @property
    def perturbs_rounds(self) -> bool:
        return (self.walk is not None and self.walk.steps > 0) or (
            self.decoherence is not None and self.dt > 0
        )

    def round_phases(self, n_qubits: int, rng: np.random.Generator) -> np.ndarray:
        n_states = 1 << n_qubits
        phases = np.zeros(n_states)
        qubit_kicks = np.zeros((n_qubits, 2))
        if self.walk is not None and self.walk.steps > 0:
            if self.walk_mode == "per_qubit":
                qubit_kicks[:, 1] += phase_walk_sample(self.walk, rng, n_qubits)
            else:
                phases += phase_walk_sample(self.walk, rng, n_states)
        if self.decoherence is not None and self.dt > 0:
            sigma = dephasing_sigma(self.decoherence, self.dt)
            qubit_kicks[:, 1] += sigma * rng.standard_normal(n_qubits)
        return phases + per_qubit_phases(qubit_kicks)


class GroverStep(NamedTuple):
    iteration: int
    marked_amplitude: complex
    success_prob: float


@dataclass
class GroverTrace:
    steps: list[GroverStep] = field(default_factory=list)
    final_state: RegisterState | None = None

    def __iter__(self):
        return iter(self.steps)

    def __len__(self):
        return len(self.steps)

    def __getitem__(self, i):
        return self.steps[i]

    @property
    def final(self) -> GroverStep:
        return self.steps[-1]


def _record(state: RegisterState, k: int, marked: int) -> GroverStep:
    return GroverStep(k, state.amplitude(marked), float(state.probabilities[marked]))


def grover_run(
    plan: GroverPlan, noise: GroverNoise | None = None, rng: np.random.Generator | None = None
) -> GroverTrace:
    """Run ``plan.iterations`` oracle + diffusion rounds.

    The trace starts with the initial state (iteration 0) and holds one entry
    per completed round.
    """
    noise = noise or GroverNoise()
    random = noise.init is not None or noise.perturbs_rounds or noise.gate_phase_sigma > 0
    if random and rng is None:
        raise InvalidArgument("a random generator is required for noisy runs")
    if noise.init is not None:
        state = noisy_initialize(plan.n_qubits, noise.init, rng)
    else:
        state = uniform_state(plan.n_qubits)
    marked = plan.marked_index
    trace = GroverTrace([_record(state, 0, marked)])
    for k in range(1, plan.iterations + 1):
        if noise.perturbs_rounds:
            state = apply_phase_vector(state, noise.round_phases(plan.n_qubits, rng))
        state = oracle_apply(state, marked, plan.oracle_phase_error_eps)
        state = diffusion_apply(state)
        if noise.gate_phase_sigma > 0:
            state = apply_global_phase(state, noise.gate_phase_sigma * rng.standard_normal(2).sum())
        trace.steps.append(_record(state, k, marked))
    trace.final_state = state
    return trace


class AmplitudeError(NamedTuple):
    simulated_delta: float
    formula_delta: float


class OneStepDeviation(NamedTuple):
    deviation: complex
    clean_amplitude: complex
    fidelity: float


def one_step_deviation(n_qubits: int, eps: float, marked_index: int = 0) -> OneStepDeviation:
    """Complex change in the marked amplitude after one round from the uniform
    state when the oracle phase is off by ``eps``, and the full-state fidelity
    between the perturbed and clean results."""
    start = uniform_state(n_qubits)
    clean = diffusion_apply(oracle_apply(start, marked_index, 0.0))
    noisy = diffusion_apply(oracle_apply(start, marked_index, eps))
    a0 = clean.amplitude(marked_index)
    return OneStepDeviation(noisy.amplitude(marked_index) - a0, a0, fidelity(clean, noisy))


def amplitude_error_formula(n_states: int, eps: float) -> float:
    return (-eps + 2.0 * eps / n_states) / math.sqrt(n_states)


def amplitude_error_one_step(n_qubits: int, eps: float) -> AmplitudeError:
    """Simulated vs closed-form first-order error in the marked amplitude.

    A phase error moves the amplitude in quadrature, so the simulated value is
    the deviation's component along ``-i`` times the clean amplitude's
    direction. Other states carry no error.
    """
    dev = one_step_deviation(n_qubits, eps)
    direction = dev.clean_amplitude / abs(dev.clean_amplitude)
    simulated = (dev.deviation * 1j * direction.conjugate()).real
    return AmplitudeError(simulated, amplitude_error_formula(1 << n_qubits, eps))


@dataclass
class SensitivityCurve:
    iterations: np.ndarray
    clean_success: np.ndarray
    mean_noisy_success: np.ndarray

    @property
    def relative_loss(self) -> np.ndarray:
        return 1.0 - self.mean_noisy_success / self.clean_success


def sensitivity_curve(
    plan: GroverPlan, noise: GroverNoise, rngs: Iterable[np.random.Generator]
) -> SensitivityCurve:
    """Mean success probability per iteration over one trial per generator,
    against the clean run."""
    clean = np.array([s.success_prob for s in grover_run(plan)])
    runs = [[s.success_prob for s in grover_run(plan, noise, rng)] for rng in rngs]
    if not runs:
        raise InvalidArgument("need at least one trial")
    return SensitivityCurve(np.arange(plan.iterations + 1), clean, np.mean(runs, axis=0))
