"""
Dense Statevector Engine

This module implements the numerical core used by the protocol simulator:
labeled multi-qubit pure states, the fixed gate set, basis measurements,
post-selection, partial trace and fidelity.

CRITICAL CONSTRAINTS:
- StateVector values are IMMUTABLE (read-only numpy buffers)
- Every operation returns a NEW value
- Bit order: the FIRST label is the MOST significant bit of the basis index
- Measured qubits are REMOVED from the register
- All state comparisons are phase-insensitive

TOLERANCES:
- 1e-9   user-input normalization
- 1e-10  acceptance checks
- 1e-15  zero-probability detection
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Dict, Iterable, List, Sequence, Tuple, Union

import numpy as np

logger = logging.getLogger(__name__)

NORMALIZATION_TOL = 1e-9
ACCEPTANCE_TOL = 1e-10
ZERO_PROBABILITY_TOL = 1e-15
DENSITY_TOL = 1e-12
MAX_QUBITS = 12


# ============================================================================
# ERRORS
# ============================================================================

class QStateError(Exception):
    """Base class for statevector engine errors."""


class NotNormalized(QStateError):
    """Amplitudes do not have unit norm."""


class DuplicateLabel(QStateError):
    """A qubit label appears twice in one register."""


class UnknownLabel(QStateError):
    """A qubit label is not part of the register."""


class ZeroProbabilityBranch(QStateError):
    """A post-selected outcome has (numerically) zero probability."""


class DimensionMismatch(QStateError):
    """Operands have incompatible shapes or registers."""


# ============================================================================
# ENUMS
# ============================================================================

class Basis(str, Enum):
    Z = "Z"
    X = "X"


class BellOutcome(str, Enum):
    PHI_PLUS = "phi_plus"
    PHI_MINUS = "phi_minus"
    PSI_PLUS = "psi_plus"
    PSI_MINUS = "psi_minus"


BELL_OUTCOMES: Tuple[BellOutcome, ...] = (
    BellOutcome.PHI_PLUS,
    BellOutcome.PHI_MINUS,
    BellOutcome.PSI_PLUS,
    BellOutcome.PSI_MINUS,
)

# Bits read after CNOT(q1 -> q2) then H(q1)
BELL_FROM_BITS: Dict[Tuple[int, int], BellOutcome] = {
    (0, 0): BellOutcome.PHI_PLUS,
    (0, 1): BellOutcome.PSI_PLUS,
    (1, 0): BellOutcome.PHI_MINUS,
    (1, 1): BellOutcome.PSI_MINUS,
}
BITS_FROM_BELL: Dict[BellOutcome, Tuple[int, int]] = {v: k for k, v in BELL_FROM_BITS.items()}


class GateKind(str, Enum):
    I = "I"
    X = "X"
    IY = "iY"
    Z = "Z"
    H = "H"
    CNOT = "CNOT"


_SQRT2_INV = 1 / np.sqrt(2)

_GATE_MATRICES: Dict[GateKind, np.ndarray] = {
    GateKind.I: np.array([[1, 0], [0, 1]], dtype=complex),
    GateKind.X: np.array([[0, 1], [1, 0]], dtype=complex),
    # i*sigma_y = |0><1| - |1><0|
    GateKind.IY: np.array([[0, 1], [-1, 0]], dtype=complex),
    GateKind.Z: np.array([[1, 0], [0, -1]], dtype=complex),
    GateKind.H: np.array([[1, 1], [1, -1]], dtype=complex) * _SQRT2_INV,
    GateKind.CNOT: np.array(
        [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
    ),
}
for _m in _GATE_MATRICES.values():
    _m.setflags(write=False)


@dataclass(frozen=True)
class Gate:
    """A gate from the fixed set acting on named qubits.

    For CNOT, targets are (control, target).
    """
    kind: GateKind
    targets: Tuple[str, ...]

    def __post_init__(self):
        expected = 2 if self.kind == GateKind.CNOT else 1
        if len(self.targets) != expected:
            raise DimensionMismatch(
                f"{self.kind.value} acts on {expected} qubit(s), got targets {self.targets}"
            )
        if len(set(self.targets)) != len(self.targets):
            raise DuplicateLabel(f"Gate targets must be distinct, got {self.targets}")

    @property
    def matrix(self) -> np.ndarray:
        return _GATE_MATRICES[self.kind]


def gate(kind: Union[GateKind, str], *targets: str) -> Gate:
    return Gate(GateKind(kind), tuple(targets))


# ============================================================================
# STATE TYPES
# ============================================================================

class StateVector:
    """Normalized pure state over an ordered register of qubit labels."""

    __slots__ = ("_labels", "_amps")

    def __init__(self, labels: Sequence[str], amps: Iterable[complex], check_norm: bool = True):
        labels = tuple(labels)
        if len(set(labels)) != len(labels):
            raise DuplicateLabel(f"Duplicate labels in register {labels}")
        if len(labels) > MAX_QUBITS:
            raise DimensionMismatch(f"At most {MAX_QUBITS} qubits supported, got {len(labels)}")

        data = np.array(amps, dtype=complex).reshape(-1)
        if data.size != 2 ** len(labels):
            raise DimensionMismatch(
                f"{len(labels)} label(s) need {2 ** len(labels)} amplitudes, got {data.size}"
            )
        if not np.all(np.isfinite(data)):
            raise NotNormalized(f"Amplitudes must be finite, got {data}")
        if check_norm:
            norm_sq = float(np.vdot(data, data).real)
            if abs(norm_sq - 1.0) > NORMALIZATION_TOL:
                raise NotNormalized(f"State norm^2 is {norm_sq:.12f}, expected 1")

        data.setflags(write=False)
        self._labels = labels
        self._amps = data

    @property
    def labels(self) -> Tuple[str, ...]:
        return self._labels

    @property
    def amps(self) -> np.ndarray:
        return self._amps

    @property
    def num_qubits(self) -> int:
        return len(self._labels)

    def index_of(self, label: str) -> int:
        try:
            return self._labels.index(label)
        except ValueError:
            raise UnknownLabel(f"Qubit '{label}' not in register {self._labels}") from None

    def tensor_view(self) -> np.ndarray:
        return self._amps.reshape([2] * self.num_qubits)

    def norm(self) -> float:
        return float(np.linalg.norm(self._amps))

    def __repr__(self) -> str:
        return f"StateVector(labels={self._labels}, {to_ket_string(self)})"


class DensityMatrix:
    """Hermitian, unit-trace, positive semidefinite operator over labeled qubits."""

    __slots__ = ("_labels", "_matrix")

    def __init__(self, labels: Sequence[str], matrix: np.ndarray, check: bool = True):
        labels = tuple(labels)
        if len(set(labels)) != len(labels):
            raise DuplicateLabel(f"Duplicate labels in register {labels}")
        data = np.array(matrix, dtype=complex)
        dim = 2 ** len(labels)
        if data.shape != (dim, dim):
            raise DimensionMismatch(f"Expected {dim}x{dim} matrix, got {data.shape}")

        if check:
            if not np.allclose(data, data.conj().T, atol=DENSITY_TOL, rtol=0):
                raise QStateError("Density matrix is not Hermitian")
            trace = complex(np.trace(data))
            if abs(trace - 1.0) > DENSITY_TOL:
                raise QStateError(f"Density matrix trace is {trace}, expected 1")
            if np.linalg.eigvalsh(data).min() < -ACCEPTANCE_TOL:
                raise QStateError("Density matrix is not positive semidefinite")

        data.setflags(write=False)
        self._labels = labels
        self._matrix = data

    @property
    def labels(self) -> Tuple[str, ...]:
        return self._labels

    @property
    def matrix(self) -> np.ndarray:
        return self._matrix

    @property
    def num_qubits(self) -> int:
        return len(self._labels)

    def trace(self) -> float:
        return float(np.trace(self._matrix).real)

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self._matrix)

    def purity(self) -> float:
        return float(np.trace(self._matrix @ self._matrix).real)

    def __repr__(self) -> str:
        return f"DensityMatrix(labels={self._labels}, trace={self.trace():.12f})"


@dataclass(frozen=True)
class InputState:
    """Single-qubit payload alpha0|0> + alpha1|1>."""
    alpha0: complex
    alpha1: complex

    def __post_init__(self):
        if not np.all(np.isfinite([complex(self.alpha0), complex(self.alpha1)])):
            raise NotNormalized(f"Amplitudes must be finite, got ({self.alpha0}, {self.alpha1})")
        norm_sq = abs(self.alpha0) ** 2 + abs(self.alpha1) ** 2
        if abs(norm_sq - 1.0) > NORMALIZATION_TOL:
            raise NotNormalized(
                f"|alpha0|^2 + |alpha1|^2 = {norm_sq:.12f}, must be 1 within {NORMALIZATION_TOL}"
            )
        object.__setattr__(self, "alpha0", complex(self.alpha0))
        object.__setattr__(self, "alpha1", complex(self.alpha1))

    @classmethod
    def from_components(cls, re0: float, im0: float, re1: float, im1: float) -> "InputState":
        return cls(complex(re0, im0), complex(re1, im1))

    @classmethod
    def haar_random(cls, rng: np.random.Generator) -> "InputState":
        """Draw a Haar-random qubit: two standard complex normals, normalized.

        The global phase is rotated so alpha0 is real and non-negative.
        """
        re0, im0, re1, im1 = rng.standard_normal(4)
        vec = np.array([complex(re0, im0), complex(re1, im1)])
        vec = vec / np.linalg.norm(vec)
        return cls(complex(vec[0]), complex(vec[1])).canonical()

    def canonical(self) -> "InputState":
        """Same state with the global phase chosen so alpha0 is real and non-negative."""
        if abs(self.alpha0) < ZERO_PROBABILITY_TOL:
            return InputState(0j, complex(abs(self.alpha1), 0.0))
        phase = self.alpha0 / abs(self.alpha0)
        return InputState(complex(abs(self.alpha0), 0.0), self.alpha1 / phase)

    @property
    def amplitudes(self) -> np.ndarray:
        return np.array([self.alpha0, self.alpha1], dtype=complex)

    def components(self) -> List[float]:
        return [self.alpha0.real, self.alpha0.imag, self.alpha1.real, self.alpha1.imag]

    def to_state(self, label: str = "q") -> StateVector:
        return StateVector((label,), self.amplitudes, check_norm=False)


# ============================================================================
# PREPARATION
# ============================================================================

def prepare_single(alpha0: complex, alpha1: complex, label: str = "q") -> StateVector:
    """
    Prepare the single-qubit state alpha0|0> + alpha1|1>.

    Args:
        alpha0: Amplitude of |0>
        alpha1: Amplitude of |1>
        label: Qubit label of the new register

    Returns:
        1-qubit StateVector with amps [alpha0, alpha1]

    Raises:
        NotNormalized: if an amplitude is not finite, or |alpha0|^2 + |alpha1|^2
            differs from 1 by more than 1e-9
    """
    return InputState(alpha0, alpha1).to_state(label)


def basis_state(bits: str, labels: Sequence[str]) -> StateVector:
    if len(bits) != len(labels):
        raise DimensionMismatch(f"Bitstring '{bits}' does not match labels {tuple(labels)}")
    amps = np.zeros(2 ** len(labels), dtype=complex)
    amps[int(bits, 2) if bits else 0] = 1.0
    return StateVector(labels, amps)


def bell_state(outcome: Union[BellOutcome, str], labels: Sequence[str]) -> StateVector:
    outcome = BellOutcome(outcome)
    amps = np.zeros(4, dtype=complex)
    if outcome == BellOutcome.PHI_PLUS:
        amps[0b00], amps[0b11] = _SQRT2_INV, _SQRT2_INV
    elif outcome == BellOutcome.PHI_MINUS:
        amps[0b00], amps[0b11] = _SQRT2_INV, -_SQRT2_INV
    elif outcome == BellOutcome.PSI_PLUS:
        amps[0b01], amps[0b10] = _SQRT2_INV, _SQRT2_INV
    else:
        amps[0b01], amps[0b10] = _SQRT2_INV, -_SQRT2_INV
    return StateVector(labels, amps)


def tensor(a: StateVector, b: StateVector) -> StateVector:
    """Tensor product a (x) b; the labels of a become the high-order bits."""
    overlap = set(a.labels) & set(b.labels)
    if overlap:
        raise DuplicateLabel(f"Registers share labels {sorted(overlap)}")
    return StateVector(a.labels + b.labels, np.kron(a.amps, b.amps), check_norm=False)


def permute(s: StateVector, labels: Sequence[str]) -> StateVector:
    """Reorder the register of s to the given label order."""
    labels = tuple(labels)
    if sorted(labels) != sorted(s.labels):
        raise DimensionMismatch(f"Cannot reorder {s.labels} to {labels}")
    axes = [s.index_of(label) for label in labels]
    amps = np.transpose(s.tensor_view(), axes).reshape(-1)
    return StateVector(labels, amps, check_norm=False)


# ============================================================================
# GATES
# ============================================================================

def _apply_matrix(s: StateVector, matrix: np.ndarray, targets: Sequence[str]) -> StateVector:
    axes = [s.index_of(t) for t in targets]
    k = len(axes)
    op = matrix.reshape([2] * (2 * k))
    psi = np.tensordot(op, s.tensor_view(), axes=(list(range(k, 2 * k)), axes))
    psi = np.moveaxis(psi, list(range(k)), axes)
    return StateVector(s.labels, psi.reshape(-1), check_norm=False)


def apply_gate(s: StateVector, g: Gate) -> StateVector:
    """
    Apply (G (x) I_rest) to s.

    Raises:
        UnknownLabel: if a gate target is not in the register
    """
    return _apply_matrix(s, g.matrix, g.targets)


def apply_gates(s: StateVector, gates: Iterable[Gate]) -> StateVector:
    for g in gates:
        s = apply_gate(s, g)
    return s


# ============================================================================
# MEASUREMENT
# ============================================================================

def _rotate_to_z(s: StateVector, q: str, basis: Union[Basis, str]) -> StateVector:
    # H maps |+> -> |0> and |-> -> |1>
    if Basis(basis) == Basis.X:
        return apply_gate(s, Gate(GateKind.H, (q,)))
    return s


def outcome_probabilities(s: StateVector, q: str, basis: Union[Basis, str] = Basis.Z) -> Tuple[float, float]:
    rotated = _rotate_to_z(s, q, basis)
    axis = rotated.index_of(q)
    psi = np.moveaxis(rotated.tensor_view(), axis, 0).reshape(2, -1)
    probs = np.sum(np.abs(psi) ** 2, axis=1)
    return float(probs[0]), float(probs[1])


def postselect(
    s: StateVector, q: str, basis: Union[Basis, str], outcome: int
) -> Tuple[float, StateVector]:
    """
    Condition s on qubit q reading `outcome` in the given basis.

    X-basis outcome 0 is |+>, outcome 1 is |->. The measured qubit is removed
    from the register and the remaining state is renormalized.

    Args:
        s: State to condition
        q: Measured qubit label
        basis: Basis.Z or Basis.X
        outcome: 0 or 1

    Returns:
        (probability, post-measurement state without q)

    Raises:
        UnknownLabel: if q is not in the register
        ZeroProbabilityBranch: if the outcome probability is below 1e-15
    """
    if outcome not in (0, 1):
        raise ValueError(f"Outcome must be 0 or 1, got {outcome}")
    rotated = _rotate_to_z(s, q, basis)
    axis = rotated.index_of(q)
    branch = np.take(rotated.tensor_view(), outcome, axis=axis)
    probability = float(np.sum(np.abs(branch) ** 2))
    if probability < ZERO_PROBABILITY_TOL:
        raise ZeroProbabilityBranch(
            f"Outcome {outcome} of {Basis(basis).value}-measurement on '{q}' has probability {probability:.3e}"
        )
    remaining = tuple(label for label in s.labels if label != q)
    return probability, StateVector(remaining, branch.reshape(-1) / np.sqrt(probability), check_norm=False)


def _sample_index(probabilities: Sequence[float], rng: np.random.Generator) -> int:
    probs = np.asarray(probabilities, dtype=float)
    cumulative = np.cumsum(probs)
    index = int(np.searchsorted(cumulative, rng.random() * cumulative[-1], side="right"))
    # Roundoff may push the draw past the last bucket; fall back to the last possible outcome
    possible = np.flatnonzero(probs >= ZERO_PROBABILITY_TOL)
    return int(min(index, possible[-1]))


def measure(
    s: StateVector, q: str, basis: Union[Basis, str], rng: np.random.Generator
) -> Tuple[int, float, StateVector]:
    """Sampled single-qubit measurement; returns (outcome, probability, state)."""
    outcome = _sample_index(outcome_probabilities(s, q, basis), rng)
    probability, post = postselect(s, q, basis, outcome)
    return outcome, probability, post


def bell_probabilities(s: StateVector, q1: str, q2: str) -> Dict[BellOutcome, float]:
    rotated = apply_gates(s, [Gate(GateKind.CNOT, (q1, q2)), Gate(GateKind.H, (q1,))])
    axes = [rotated.index_of(q1), rotated.index_of(q2)]
    psi = np.moveaxis(rotated.tensor_view(), axes, [0, 1]).reshape(2, 2, -1)
    weights = np.sum(np.abs(psi) ** 2, axis=2)
    return {BELL_FROM_BITS[(b1, b2)]: float(weights[b1, b2]) for b1 in (0, 1) for b2 in (0, 1)}


def postselect_bell(
    s: StateVector, q1: str, q2: str, outcome: Union[BellOutcome, str]
) -> Tuple[float, StateVector]:
    """
    Forced Bell measurement on (q1, q2).

    Realized as CNOT(q1 -> q2), H(q1), then Z post-selection of both qubits.

    Raises:
        ZeroProbabilityBranch: if the requested outcome is impossible
    """
    bit1, bit2 = BITS_FROM_BELL[BellOutcome(outcome)]
    rotated = apply_gates(s, [Gate(GateKind.CNOT, (q1, q2)), Gate(GateKind.H, (q1,))])
    p1, rotated = postselect(rotated, q1, Basis.Z, bit1)
    p2, rotated = postselect(rotated, q2, Basis.Z, bit2)
    return p1 * p2, rotated


def measure_bell(
    s: StateVector, q1: str, q2: str, rng: np.random.Generator
) -> Tuple[BellOutcome, float, StateVector]:
    """Sampled Bell measurement on (q1, q2); both qubits are removed."""
    probabilities = bell_probabilities(s, q1, q2)
    outcome = BELL_OUTCOMES[_sample_index([probabilities[o] for o in BELL_OUTCOMES], rng)]
    probability, post = postselect_bell(s, q1, q2, outcome)
    logger.debug(f"Bell measurement on ({q1}, {q2}): {outcome.value} with p={probability:.6f}")
    return outcome, probability, post


# ============================================================================
# MIXED STATES AND FIGURES OF MERIT
# ============================================================================

def density_matrix(s: StateVector) -> DensityMatrix:
    rho = np.outer(s.amps, s.amps.conj())
    return DensityMatrix(s.labels, rho / np.trace(rho).real)


def partial_trace(s: StateVector, keep: Iterable[str]) -> DensityMatrix:
    """
    Reduced density matrix of s on the qubits in `keep`.

    A set keeps register order; a list or tuple keeps the given order.

    Raises:
        UnknownLabel: if a kept label is not in the register
    """
    if isinstance(keep, (set, frozenset)):
        for label in keep:
            s.index_of(label)
        kept = tuple(label for label in s.labels if label in keep)
    else:
        kept = tuple(keep)
        for label in kept:
            s.index_of(label)
    rest = tuple(label for label in s.labels if label not in kept)
    psi = permute(s, kept + rest).amps.reshape(2 ** len(kept), 2 ** len(rest))
    rho = psi @ psi.conj().T
    # Inputs are only normalized to 1e-9; the reduced state is exact to 1e-12
    return DensityMatrix(kept, rho / np.trace(rho).real)


def mix(states: Sequence[DensityMatrix], weights: Sequence[float]) -> DensityMatrix:
    if not states or len(states) != len(weights):
        raise DimensionMismatch("mix() needs one weight per state and at least one state")
    labels = states[0].labels
    total = np.zeros_like(states[0].matrix)
    for rho, w in zip(states, weights):
        if rho.labels != labels:
            raise DimensionMismatch(f"Cannot mix registers {labels} and {rho.labels}")
        total = total + w * rho.matrix
    return DensityMatrix(labels, total)


def trace_distance(rho: DensityMatrix, sigma: DensityMatrix) -> float:
    if rho.matrix.shape != sigma.matrix.shape:
        raise DimensionMismatch(f"Shapes differ: {rho.matrix.shape} vs {sigma.matrix.shape}")
    return float(0.5 * np.sum(np.abs(np.linalg.eigvalsh(rho.matrix - sigma.matrix))))


def maximally_mixed(label: str) -> DensityMatrix:
    return DensityMatrix((label,), np.eye(2, dtype=complex) / 2)


def _target_vector(target: Union[InputState, StateVector, Sequence[complex]]) -> np.ndarray:
    if isinstance(target, InputState):
        vec = target.amplitudes
    elif isinstance(target, StateVector):
        vec = target.amps
    else:
        vec = np.asarray(target, dtype=complex)
    if vec.shape != (2,):
        raise DimensionMismatch(f"Fidelity target must be a single qubit, got shape {vec.shape}")
    return vec / np.linalg.norm(vec)


def fidelity_pure(
    d: Union[DensityMatrix, StateVector], target: Union[InputState, StateVector, Sequence[complex]]
) -> float:
    """
    Fidelity <t|rho|t> of a 1-qubit state with a pure target.

    Global phase of either argument does not change the result.

    Raises:
        DimensionMismatch: if d is not a 1-qubit state
    """
    t = _target_vector(target)
    if d.num_qubits != 1:
        raise DimensionMismatch(f"fidelity_pure needs a 1-qubit state, got {d.num_qubits} qubits")
    if isinstance(d, StateVector):
        value = abs(np.vdot(t, d.amps)) ** 2
    else:
        value = float(np.vdot(t, d.matrix @ t).real)
    return float(min(1.0, max(0.0, value)))


def overlap(a: StateVector, b: StateVector) -> float:
    """|<a|b>| after reordering b to a's register."""
    if set(a.labels) != set(b.labels):
        raise DimensionMismatch(f"Registers differ: {a.labels} vs {b.labels}")
    b = permute(b, a.labels)
    return float(abs(np.vdot(a.amps, b.amps)))


def states_equal_up_to_phase(a: StateVector, b: StateVector, tol: float = ACCEPTANCE_TOL) -> bool:
    return overlap(a, b) >= 1.0 - tol


def make_rng(seed: int) -> np.random.Generator:
    """PCG64 generator; identical seeds give identical streams."""
    return np.random.Generator(np.random.PCG64(seed))


def spawn_rngs(seed: int, n: int) -> List[np.random.Generator]:
    """n independent PCG64 generators from SeedSequence(seed).spawn(n)."""
    return [np.random.Generator(np.random.PCG64(child)) for child in np.random.SeedSequence(seed).spawn(n)]


def to_ket_string(s: StateVector, tol: float = 1e-12) -> str:
    terms = []
    for index, amp in enumerate(s.amps):
        if abs(amp) < tol:
            continue
        bits = format(index, f"0{s.num_qubits}b") if s.num_qubits else ""
        terms.append(f"({amp.real:+.6f}{amp.imag:+.6f}j)|{bits}>")
    return " + ".join(terms) if terms else "0"
