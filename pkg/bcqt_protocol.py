"""
Bidirectional Controlled Teleportation Protocol

Alice and Bob teleport one unknown qubit each to the other over three shared
EPR pairs, with Charlie acting as controller.

REGISTERS:
- a1, a2, A  belong to Alice (A carries her payload)
- b1, b2, B  belong to Bob (B carries his payload)
- c1, c2     belong to Charlie
- EPR pairs: (a1, b1), (c1, a2), (c2, b2)

RECEIVERS:
- b1 (held by Bob) ends up carrying Alice's payload
- a2 (held by Alice) ends up carrying Bob's payload

STEPS:
1. Build the three-pair channel and attach both payloads
2. CNOT A -> a1 and B -> b2
3. Alice measures a1 in Z and A in X; Bob measures b2 in Z and B in X;
   both announce their bits to the other user and to Charlie
4. Charlie (if he cooperates) applies H to c1 and c2, performs a Bell
   measurement on (c1, c2) and announces the outcome; the receivers apply
   Pauli corrections

CRITICAL CONSTRAINTS:
- The correction table is DERIVED by brute-force Pauli search, never transcribed
- Corrections are compared up to global phase
- Charlie's non-cooperation is modeled as "no message"
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import Any, Callable, Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from qstate import (
    ACCEPTANCE_TOL,
    BELL_OUTCOMES,
    Basis,
    BellOutcome,
    DensityMatrix,
    DimensionMismatch,
    Gate,
    GateKind,
    InputState,
    StateVector,
    apply_gate,
    bell_state,
    fidelity_pure,
    make_rng,
    maximally_mixed,
    measure,
    measure_bell,
    mix,
    density_matrix,
    partial_trace,
    postselect,
    postselect_bell,
    tensor,
    trace_distance,
)

logger = logging.getLogger(__name__)

CHANNEL_LABELS: Tuple[str, ...] = ("a1", "b1", "c1", "a2", "c2", "b2")
SYSTEM_LABELS: Tuple[str, ...] = CHANNEL_LABELS + ("A", "B")
EPR_PAIRS: Tuple[Tuple[str, str], ...] = (("a1", "b1"), ("c1", "a2"), ("c2", "b2"))
COLLAPSED_LABELS: Tuple[str, ...] = ("b1", "c1", "a2", "c2")
RECEIVER_LABELS: Tuple[str, ...] = ("b1", "a2")

# receiver qubit -> (holder, whose payload it receives)
RECEIVERS: Dict[str, Tuple[str, str]] = {
    "b1": ("bob", "alice"),
    "a2": ("alice", "bob"),
}

# Probe input with nonzero real and imaginary parts and |alpha0| != |alpha1|
PROBE_ALICE = InputState(0.6, 0.8j)
PROBE_BOB = InputState(0.36 + 0.48j, 0.8)

REVALIDATION_SAMPLES = 20
REVALIDATION_SEED = 20140101


# ============================================================================
# ERRORS
# ============================================================================

class ProtocolError(Exception):
    """Base class for protocol-level errors."""


class MissingCharlieOutcome(ProtocolError):
    """A correction was requested for a branch without Charlie's announcement."""


class NoValidCorrection(ProtocolError):
    """No Pauli pair recovers both payloads on a branch."""


class AmbiguousCorrection(ProtocolError):
    """More than one Pauli pair recovers both payloads on a branch."""


class TranscriptOrderError(ProtocolError):
    """Charlie announced before both users did."""


# ============================================================================
# DOMAIN TYPES
# ============================================================================

class PauliOp(str, Enum):
    I = "I"
    X = "sigma_x"
    IY = "i_sigma_y"
    Z = "sigma_z"

    @property
    def gate_kind(self) -> GateKind:
        return _PAULI_GATES[self]


_PAULI_GATES = {
    PauliOp.I: GateKind.I,
    PauliOp.X: GateKind.X,
    PauliOp.IY: GateKind.IY,
    PauliOp.Z: GateKind.Z,
}
PAULI_OPS: Tuple[PauliOp, ...] = (PauliOp.I, PauliOp.X, PauliOp.IY, PauliOp.Z)


@dataclass(frozen=True)
class OutcomeRecord:
    """Classical results: Alice (Z on a1, X on A), Bob (Z on b2, X on B), Charlie (Bell on c1, c2).

    X results use 0 for |+> and 1 for |->. charlie_bell is None when Charlie
    withholds cooperation.
    """
    alice_z: int
    alice_x: int
    bob_z: int
    bob_x: int
    charlie_bell: Optional[BellOutcome] = None

    def __post_init__(self):
        for name in ("alice_z", "alice_x", "bob_z", "bob_x"):
            if getattr(self, name) not in (0, 1):
                raise ValueError(f"{name} must be 0 or 1, got {getattr(self, name)}")
        if self.charlie_bell is not None:
            object.__setattr__(self, "charlie_bell", BellOutcome(self.charlie_bell))

    @property
    def user_bits(self) -> Tuple[int, int, int, int]:
        return (self.alice_z, self.alice_x, self.bob_z, self.bob_x)

    @property
    def key(self) -> Tuple[int, int, int, int, Optional[BellOutcome]]:
        return self.user_bits + (self.charlie_bell,)

    def with_charlie(self, outcome: Optional[BellOutcome]) -> "OutcomeRecord":
        return OutcomeRecord(*self.user_bits, charlie_bell=outcome)

    def label(self) -> str:
        signs = "+-"
        users = f"{self.alice_z}{signs[self.alice_x]}{self.bob_z}{signs[self.bob_x]}"
        bell = self.charlie_bell.value if self.charlie_bell else "silent"
        return f"{users}/{bell}"


@dataclass(frozen=True)
class Message:
    sender: str
    recipients: Tuple[str, ...]
    payload: Dict[str, Any]


class Transcript:
    """Ordered classical messages of one protocol round.

    Charlie's announcement may only follow both users' announcements.
    """

    def __init__(self, messages: Sequence[Message] = ()):
        self._messages: List[Message] = []
        for message in messages:
            self.append(message)

    def append(self, message: Message) -> None:
        if message.sender == "charlie":
            announced = {m.sender for m in self._messages}
            missing = {"alice", "bob"} - announced
            if missing:
                raise TranscriptOrderError(
                    f"Charlie announced before {', '.join(sorted(missing))}"
                )
        self._messages.append(message)

    @property
    def messages(self) -> Tuple[Message, ...]:
        return tuple(self._messages)

    def from_sender(self, sender: str) -> Optional[Message]:
        for message in self._messages:
            if message.sender == sender:
                return message
        return None

    def __len__(self) -> int:
        return len(self._messages)


@dataclass(frozen=True)
class PauliCorrection:
    on_b1: PauliOp
    on_a2: PauliOp


@dataclass
class ProtocolResult:
    outcomes: OutcomeRecord
    transcript: Transcript
    correction: PauliCorrection
    final_b1: DensityMatrix
    final_a2: DensityMatrix
    fidelity_b1_vs_A: float
    fidelity_a2_vs_B: float
    branch_probability: float


@dataclass
class BranchRecord:
    """One post-selected branch of the measurement tree."""
    outcomes: OutcomeRecord
    probability: float
    collapsed_state: StateVector
    measured_state: StateVector
    correction: PauliCorrection
    final_state: StateVector
    fidelity_b1: float
    fidelity_a2: float
    trial: int = 0


@dataclass
class ControlPower:
    controlled_fidelity_without_charlie: float
    uncontrolled_fidelity_without_charlie: float
    controlled_receiver: str
    uncontrolled_receiver: str
    controlled_trace_distance: float

    def __iter__(self) -> Iterator[float]:
        yield self.controlled_fidelity_without_charlie
        yield self.uncontrolled_fidelity_without_charlie


CorrectionTable = Dict[Tuple[int, int, int, int, BellOutcome], PauliCorrection]


def all_user_branches() -> List[Tuple[int, int, int, int]]:
    return list(itertools.product((0, 1), repeat=4))


def all_outcome_records() -> List[OutcomeRecord]:
    """The 64 branches in branch-index order (user bits, then Bell outcome)."""
    return [
        OutcomeRecord(*bits, charlie_bell=outcome)
        for bits in all_user_branches()
        for outcome in BELL_OUTCOMES
    ]


def branch_index(rec: OutcomeRecord) -> int:
    a_z, a_x, b_z, b_x = rec.user_bits
    user = (a_z << 3) | (a_x << 2) | (b_z << 1) | b_x
    bell = BELL_OUTCOMES.index(rec.charlie_bell) if rec.charlie_bell else 0
    return user * len(BELL_OUTCOMES) + bell


# ============================================================================
# STEPS 1-4
# ============================================================================

def build_channel() -> StateVector:
    """Three |phi+> pairs on (a1, b1), (c1, a2), (c2, b2), register order a1 b1 c1 a2 c2 b2."""
    channel = bell_state(BellOutcome.PHI_PLUS, EPR_PAIRS[0])
    for pair in EPR_PAIRS[1:]:
        channel = tensor(channel, bell_state(BellOutcome.PHI_PLUS, pair))
    logger.debug(f"Channel built on {channel.labels}")
    return channel


def compose_system(channel: StateVector, in_a: InputState, in_b: InputState) -> StateVector:
    """Attach Alice's payload on A and Bob's on B to the channel."""
    if channel.labels != CHANNEL_LABELS:
        raise DimensionMismatch(f"Expected channel on {CHANNEL_LABELS}, got {channel.labels}")
    return tensor(tensor(channel, in_a.to_state("A")), in_b.to_state("B"))


def step2_cnots(s: StateVector) -> StateVector:
    s = apply_gate(s, Gate(GateKind.CNOT, ("A", "a1")))
    return apply_gate(s, Gate(GateKind.CNOT, ("B", "b2")))


def step3_measure(
    s: StateVector,
    forced: Optional[Tuple[int, int, int, int]] = None,
    rng: Optional[np.random.Generator] = None,
) -> Tuple[OutcomeRecord, float, StateVector]:
    """
    Users' measurements: a1 in Z, A in X, b2 in Z, B in X.

    Args:
        s: Post-CNOT 8-qubit state
        forced: Optional (alice_z, alice_x, bob_z, bob_x) to post-select
        rng: Generator used when not forced

    Returns:
        (outcomes without Charlie, branch probability, state on b1 c1 a2 c2)

    Raises:
        ZeroProbabilityBranch: forced mode only
    """
    if forced is None and rng is None:
        raise ValueError("step3_measure needs either forced outcomes or an rng")

    schedule = (("a1", Basis.Z), ("A", Basis.X), ("b2", Basis.Z), ("B", Basis.X))
    bits: List[int] = []
    probability = 1.0
    for i, (qubit, basis) in enumerate(schedule):
        if forced is not None:
            p, s = postselect(s, qubit, basis, forced[i])
            bits.append(forced[i])
        else:
            bit, p, s = measure(s, qubit, basis, rng)
            bits.append(bit)
        probability *= p

    record = OutcomeRecord(*bits)
    logger.debug(f"Users measured {record.label()} with p={probability:.6f}")
    return record, probability, s


def step4_charlie(
    s: StateVector,
    cooperate: bool = True,
    forced: Optional[BellOutcome] = None,
    rng: Optional[np.random.Generator] = None,
) -> Tuple[Optional[BellOutcome], float, StateVector]:
    """
    Charlie's step: H on c1 and c2, then a Bell measurement on (c1, c2).

    Returns:
        (outcome or None, probability, state on b1 a2); when Charlie does not
        cooperate the input state is returned unchanged with probability 1.
    """
    if tuple(sorted(s.labels)) != tuple(sorted(COLLAPSED_LABELS)):
        raise DimensionMismatch(f"Expected state on {COLLAPSED_LABELS}, got {s.labels}")
    if not cooperate:
        logger.info("Charlie withholds cooperation")
        return None, 1.0, s

    s = apply_gate(s, Gate(GateKind.H, ("c1",)))
    s = apply_gate(s, Gate(GateKind.H, ("c2",)))
    if forced is not None:
        outcome = BellOutcome(forced)
        probability, s = postselect_bell(s, "c1", "c2", outcome)
    else:
        if rng is None:
            raise ValueError("step4_charlie needs either a forced outcome or an rng")
        outcome, probability, s = measure_bell(s, "c1", "c2", rng)
    return outcome, probability, s


def apply_correction(s: StateVector, correction: PauliCorrection) -> StateVector:
    s = apply_gate(s, Gate(correction.on_b1.gate_kind, ("b1",)))
    return apply_gate(s, Gate(correction.on_a2.gate_kind, ("a2",)))


def receiver_fidelities(s: StateVector, in_a: InputState, in_b: InputState) -> Tuple[float, float]:
    """(b1 vs Alice's payload, a2 vs Bob's payload)."""
    return (
        fidelity_pure(partial_trace(s, ["b1"]), in_a),
        fidelity_pure(partial_trace(s, ["a2"]), in_b),
    )


# ============================================================================
# CORRECTION TABLE (BRUTE FORCE)
# ============================================================================

def _post_cnot_state(in_a: InputState, in_b: InputState) -> StateVector:
    return step2_cnots(compose_system(build_channel(), in_a, in_b))


def _measured_branch(
    post_cnot: StateVector, rec: OutcomeRecord
) -> Tuple[float, StateVector, StateVector]:
    p_users, collapsed = step3_measure(post_cnot, forced=rec.user_bits)[1:]
    _, p_charlie, measured = step4_charlie(collapsed, cooperate=True, forced=rec.charlie_bell)
    return p_users * p_charlie, collapsed, measured


def _passing_corrections(
    measured: StateVector, in_a: InputState, in_b: InputState
) -> List[PauliCorrection]:
    passing = []
    for on_b1, on_a2 in itertools.product(PAULI_OPS, PAULI_OPS):
        candidate = PauliCorrection(on_b1, on_a2)
        f_b1, f_a2 = receiver_fidelities(apply_correction(measured, candidate), in_a, in_b)
        if f_b1 >= 1.0 - ACCEPTANCE_TOL and f_a2 >= 1.0 - ACCEPTANCE_TOL:
            passing.append(candidate)
    return passing


def _revalidation_inputs(samples: int, seed: int) -> List[Tuple[InputState, InputState]]:
    rng = make_rng(seed)
    return [(InputState.haar_random(rng), InputState.haar_random(rng)) for _ in range(samples)]


def derive_correction_table(
    probe: Tuple[InputState, InputState] = (PROBE_ALICE, PROBE_BOB),
    revalidation_samples: int = REVALIDATION_SAMPLES,
    seed: int = REVALIDATION_SEED,
) -> CorrectionTable:
    """
    Derive the Pauli correction for all 64 branches by brute force.

    PROCESS:
    1. For each branch, run the protocol with forced outcomes on the probe input
    2. Try all 4 x 4 Pauli pairs on (b1, a2)
    3. Keep the pair reaching both fidelities >= 1 - 1e-10
    4. Re-check the whole table on fresh random input pairs

    Args:
        probe: Generic (Alice, Bob) input pair
        revalidation_samples: Number of random pairs for step 4
        seed: Seed for the revalidation pairs

    Returns:
        Map from (alice_z, alice_x, bob_z, bob_x, charlie_bell) to PauliCorrection

    Raises:
        NoValidCorrection: a branch has no recovering pair (would falsify the protocol)
        AmbiguousCorrection: several pairs survive probe and revalidation inputs
    """
    return dict(_derive_correction_table(probe, revalidation_samples, seed))


@lru_cache(maxsize=8)
def _derive_correction_table(
    probe: Tuple[InputState, InputState], revalidation_samples: int, seed: int
) -> CorrectionTable:
    logger.info("=" * 70)
    logger.info("Deriving correction table by brute-force Pauli search")
    logger.info("=" * 70)

    in_a, in_b = probe
    post_cnot = _post_cnot_state(in_a, in_b)
    extra_inputs = _revalidation_inputs(revalidation_samples, seed)
    extra_states = [(a, b, _post_cnot_state(a, b)) for a, b in extra_inputs]

    table: CorrectionTable = {}
    for rec in all_outcome_records():
        _, _, measured = _measured_branch(post_cnot, rec)
        passing = _passing_corrections(measured, in_a, in_b)
        if not passing:
            raise NoValidCorrection(f"No Pauli pair recovers both payloads on branch {rec.label()}")

        if len(passing) > 1:
            logger.warning(f"Branch {rec.label()}: {len(passing)} candidate pairs on probe input")
            for a, b, state in extra_states:
                measured_extra = _measured_branch(state, rec)[2]
                survivors = _passing_corrections(measured_extra, a, b)
                passing = [c for c in passing if c in survivors]
            if len(passing) != 1:
                raise AmbiguousCorrection(
                    f"Branch {rec.label()} has {len(passing)} recovering pairs: {passing}"
                )
        table[rec.key] = passing[0]

    for a, b, state in extra_states:
        for rec in all_outcome_records():
            measured = _measured_branch(state, rec)[2]
            f_b1, f_a2 = receiver_fidelities(apply_correction(measured, table[rec.key]), a, b)
            if min(f_b1, f_a2) < 1.0 - ACCEPTANCE_TOL:
                raise NoValidCorrection(
                    f"Correction {table[rec.key]} for {rec.label()} fails on revalidation input "
                    f"(fidelities {f_b1:.12f}, {f_a2:.12f})"
                )

    logger.info(f"Correction table derived: {len(table)} entries, revalidated on {len(extra_states)} input pairs")
    return table


def resolve_corrections(rec: OutcomeRecord, table: Optional[CorrectionTable] = None) -> PauliCorrection:
    """
    Look up the correction for a complete outcome record.

    Raises:
        MissingCharlieOutcome: if Charlie has not announced
    """
    if rec.charlie_bell is None:
        raise MissingCharlieOutcome(f"Branch {rec.label()} has no Charlie outcome")
    if table is None:
        table = derive_correction_table()
    return table[rec.key]


def charlie_dependence(table: CorrectionTable) -> Dict[str, bool]:
    """Whether each receiver's correction varies with Charlie's outcome for some user branch."""
    dependence = {"b1": False, "a2": False}
    for bits in all_user_branches():
        column = [table[bits + (outcome,)] for outcome in BELL_OUTCOMES]
        if len({c.on_b1 for c in column}) > 1:
            dependence["b1"] = True
        if len({c.on_a2 for c in column}) > 1:
            dependence["a2"] = True
    return dependence


def charlie_dependent_receiver(table: CorrectionTable) -> str:
    """Name the receiver that needs Charlie's announcement ("b1", "a2", "both" or "none")."""
    dependence = charlie_dependence(table)
    dependent = [r for r in RECEIVER_LABELS if dependence[r]]
    if len(dependent) == 1:
        return dependent[0]
    return "both" if dependent else "none"


def b1_depends_only_on_alice(table: CorrectionTable) -> bool:
    by_alice: Dict[Tuple[int, int], set] = {}
    for key, correction in table.items():
        by_alice.setdefault((key[0], key[1]), set()).add(correction.on_b1)
    return all(len(ops) == 1 for ops in by_alice.values())


# ============================================================================
# END-TO-END RUNS
# ============================================================================

def _announce(transcript: Transcript, rec: OutcomeRecord) -> None:
    transcript.append(Message("alice", ("bob", "charlie"), {"a1_z": rec.alice_z, "A_x": rec.alice_x}))
    transcript.append(Message("bob", ("alice", "charlie"), {"b2_z": rec.bob_z, "B_x": rec.bob_x}))
    if rec.charlie_bell is not None:
        transcript.append(Message("charlie", ("alice", "bob"), {"bell": rec.charlie_bell.value}))


def run_protocol(
    in_a: InputState,
    in_b: InputState,
    rng: Optional[np.random.Generator] = None,
    forced: Optional[OutcomeRecord] = None,
    table: Optional[CorrectionTable] = None,
) -> ProtocolResult:
    """
    Run Steps 1-4 end to end, sampled (rng) or post-selected (forced).

    Both transfers complete in one round over one shared transcript.

    Raises:
        ZeroProbabilityBranch: forced mode only
        MissingCharlieOutcome: if a forced record omits Charlie's outcome
    """
    if (rng is None) == (forced is None):
        raise ValueError("run_protocol needs exactly one of rng or forced")
    if forced is not None and forced.charlie_bell is None:
        raise MissingCharlieOutcome("Forced runs need Charlie's outcome")
    if table is None:
        table = derive_correction_table()

    post_cnot = _post_cnot_state(in_a, in_b)
    users, p_users, collapsed = step3_measure(
        post_cnot, forced=forced.user_bits if forced else None, rng=rng
    )
    outcome, p_charlie, measured = step4_charlie(
        collapsed, cooperate=True, forced=forced.charlie_bell if forced else None, rng=rng
    )
    rec = users.with_charlie(outcome)

    transcript = Transcript()
    _announce(transcript, rec)

    correction = resolve_corrections(rec, table)
    final = apply_correction(measured, correction)
    final_b1 = partial_trace(final, ["b1"])
    final_a2 = partial_trace(final, ["a2"])
    result = ProtocolResult(
        outcomes=rec,
        transcript=transcript,
        correction=correction,
        final_b1=final_b1,
        final_a2=final_a2,
        fidelity_b1_vs_A=fidelity_pure(final_b1, in_a),
        fidelity_a2_vs_B=fidelity_pure(final_a2, in_b),
        branch_probability=p_users * p_charlie,
    )
    logger.debug(
        f"Branch {rec.label()}: corrections ({correction.on_b1.value}, {correction.on_a2.value}), "
        f"fidelities ({result.fidelity_b1_vs_A:.12f}, {result.fidelity_a2_vs_B:.12f})"
    )
    return result


def enumerate_branches(
    in_a: InputState,
    in_b: InputState,
    table: Optional[CorrectionTable] = None,
    map_fn: Callable = map,
    trial: int = 0,
) -> List[BranchRecord]:
    """
    Post-select all 64 branches for one input pair.

    Args:
        in_a, in_b: Payloads
        table: Correction table (derived if omitted)
        map_fn: map-like callable; a worker pool's map distributes the branches
        trial: Index stored on each record

    Returns:
        BranchRecords in branch-index order
    """
    if table is None:
        table = derive_correction_table()
    post_cnot = _post_cnot_state(in_a, in_b)

    def run_branch(rec: OutcomeRecord) -> BranchRecord:
        probability, collapsed, measured = _measured_branch(post_cnot, rec)
        correction = table[rec.key]
        final = apply_correction(measured, correction)
        f_b1, f_a2 = receiver_fidelities(final, in_a, in_b)
        return BranchRecord(rec, probability, collapsed, measured, correction, final, f_b1, f_a2, trial)

    records = list(map_fn(run_branch, all_outcome_records()))
    return sorted(records, key=lambda r: branch_index(r.outcomes))


def reassemble_branches(records: Sequence[BranchRecord], corrected: bool = True) -> DensityMatrix:
    """
    Probability-weighted sum of the per-branch (b1, a2) states.

    Uses the final corrected states by default; corrected=False mixes the
    post-measurement states before any correction, which reassemble to I/4.
    """
    states = [r.final_state if corrected else r.measured_state for r in records]
    return mix([density_matrix(s) for s in states], [r.probability for r in records])


# ============================================================================
# CONTROL POWER
# ============================================================================

def control_power(
    in_a: InputState, in_b: InputState, table: Optional[CorrectionTable] = None
) -> ControlPower:
    """
    Receivers' fidelities when Charlie stays silent.

    Each receiver applies only the correction it can resolve without Charlie's
    message; the Charlie-dependent receiver falls back to the |phi+> entry.
    States are averaged over all user branches and Charlie's unannounced outcome.

    Returns:
        ControlPower with the controlled receiver's fidelity (0.5 expected) and
        the uncontrolled receiver's fidelity (1.0 expected)
    """
    if table is None:
        table = derive_correction_table()
    controlled = charlie_dependent_receiver(table)
    if controlled not in RECEIVER_LABELS:
        raise ProtocolError(f"Expected exactly one Charlie-dependent receiver, got '{controlled}'")
    uncontrolled = "a2" if controlled == "b1" else "b1"
    targets = {"b1": in_a, "a2": in_b}

    post_cnot = _post_cnot_state(in_a, in_b)
    reduced: Dict[str, List[DensityMatrix]] = {"b1": [], "a2": []}
    weights: List[float] = []
    for rec in all_outcome_records():
        probability, _, measured = _measured_branch(post_cnot, rec)
        # Receivers only know the user bits
        guess = table[rec.user_bits + (BellOutcome.PHI_PLUS,)]
        corrected = apply_correction(measured, guess)
        for receiver in RECEIVER_LABELS:
            reduced[receiver].append(partial_trace(corrected, [receiver]))
        weights.append(probability)

    averaged = {r: mix(reduced[r], weights) for r in RECEIVER_LABELS}
    result = ControlPower(
        controlled_fidelity_without_charlie=fidelity_pure(averaged[controlled], targets[controlled]),
        uncontrolled_fidelity_without_charlie=fidelity_pure(averaged[uncontrolled], targets[uncontrolled]),
        controlled_receiver=controlled,
        uncontrolled_receiver=uncontrolled,
        controlled_trace_distance=trace_distance(averaged[controlled], maximally_mixed(controlled)),
    )
    logger.info(
        f"Control power: {controlled} (held by {RECEIVERS[controlled][0]}) reaches "
        f"{result.controlled_fidelity_without_charlie:.12f} without Charlie; "
        f"{uncontrolled} reaches {result.uncontrolled_fidelity_without_charlie:.12f}"
    )
    return result
