"""
Test Suite for the Bidirectional Controlled Teleportation Protocol

This test suite validates:
1. The three-pair channel
2. Uniform branching at the users' and Charlie's measurements
3. The brute-force correction table
4. One-direction control (which receiver needs Charlie)
5. End-to-end runs, transcripts and error cases
6. Branch enumeration and reassembly
7. Control power with Charlie silent
"""

import sys
import os

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import numpy as np

from bcqt_protocol import (
    CHANNEL_LABELS,
    COLLAPSED_LABELS,
    PROBE_ALICE,
    PROBE_BOB,
    Message,
    MissingCharlieOutcome,
    OutcomeRecord,
    PauliCorrection,
    PauliOp,
    Transcript,
    TranscriptOrderError,
    all_user_branches,
    b1_depends_only_on_alice,
    branch_index,
    build_channel,
    charlie_dependence,
    charlie_dependent_receiver,
    compose_system,
    control_power,
    derive_correction_table,
    enumerate_branches,
    reassemble_branches,
    resolve_corrections,
    run_protocol,
    step2_cnots,
    step3_measure,
    step4_charlie,
)
from branch_runner import ThreadPoolBranchRunner
from qstate import (
    BELL_OUTCOMES,
    BellOutcome,
    DensityMatrix,
    InputState,
    density_matrix,
    make_rng,
    permute,
    tensor,
    trace_distance,
)

BRANCH_TOL = 1e-12
FIDELITY_TOL = 1e-10


def _post_cnot(in_a, in_b):
    return step2_cnots(compose_system(build_channel(), in_a, in_b))


def test_channel():
    """Test the three-pair channel."""
    print("=" * 70)
    print("TEST: Channel")
    print("=" * 70)

    channel = build_channel()
    assert channel.labels == CHANNEL_LABELS, f"Unexpected register {channel.labels}"
    nonzero = {format(i, "06b") for i, a in enumerate(channel.amps) if abs(a) > 1e-12}
    expected = {"000000", "000011", "001100", "001111", "110000", "110011", "111100", "111111"}
    assert nonzero == expected, f"Unexpected kets {sorted(nonzero)}"
    assert np.allclose([channel.amps[int(k, 2)] for k in expected], 1 / np.sqrt(8))
    print("   ✓ 8 equal-weight kets on a1 b1 c1 a2 c2 b2")

    print("\n✓ Channel tests passed")


def test_uniform_branching():
    """All 16 user branches have p = 1/16 and all Bell outcomes p = 1/4, for any input."""
    print("=" * 70)
    print("TEST: Uniform Branching")
    print("=" * 70)

    rng = make_rng(3)
    inputs = [(PROBE_ALICE, PROBE_BOB), (InputState(1, 0), InputState(0, 1))]
    inputs += [(InputState.haar_random(rng), InputState.haar_random(rng)) for _ in range(3)]
    for in_a, in_b in inputs:
        post_cnot = _post_cnot(in_a, in_b)
        for bits in all_user_branches():
            record, p, collapsed = step3_measure(post_cnot, forced=bits)
            assert abs(p - 1 / 16) < BRANCH_TOL, f"Branch {record.label()} has p={p}"
            assert collapsed.labels == COLLAPSED_LABELS
            for outcome in BELL_OUTCOMES:
                _, p_bell, rest = step4_charlie(collapsed, forced=outcome)
                assert abs(p_bell - 0.25) < BRANCH_TOL, f"{outcome.value} has p={p_bell}"
                assert rest.labels == ("b1", "a2")
    print(f"   ✓ Uniform on {len(inputs)} input pairs")

    print("\n✓ Branching tests passed")


def test_correction_table():
    """Test the derived correction table against hand-checked entries."""
    print("=" * 70)
    print("TEST: Correction Table")
    print("=" * 70)

    table = derive_correction_table()
    assert len(table) == 64, f"Expected 64 entries, got {len(table)}"

    print("\n1. Branch (0,+,0,+) with phi+ needs no correction")
    assert table[(0, 0, 0, 0, BellOutcome.PHI_PLUS)] == PauliCorrection(PauliOp.I, PauliOp.I)
    print("   ✓ (I, I)")

    print("\n2. a2 on branch (0,+,0,+) follows Charlie's outcome")
    expected_a2 = {
        BellOutcome.PHI_PLUS: PauliOp.I,
        BellOutcome.PHI_MINUS: PauliOp.X,
        BellOutcome.PSI_PLUS: PauliOp.Z,
        BellOutcome.PSI_MINUS: PauliOp.IY,
    }
    for outcome, op in expected_a2.items():
        got = table[(0, 0, 0, 0, outcome)]
        assert got.on_a2 == op, f"{outcome.value}: expected a2 {op.value}, got {got.on_a2.value}"
        assert got.on_b1 == PauliOp.I, f"{outcome.value}: b1 should stay I, got {got.on_b1.value}"
    print("   ✓ I, sigma_x, sigma_z, i_sigma_y")

    print("\n3. b1 follows Alice's bits only")
    expected_b1 = {(0, 0): PauliOp.I, (1, 0): PauliOp.X, (0, 1): PauliOp.Z, (1, 1): PauliOp.IY}
    for key, correction in table.items():
        assert correction.on_b1 == expected_b1[(key[0], key[1])], f"Wrong b1 correction at {key}"
    assert b1_depends_only_on_alice(table)
    print("   ✓ Z^s X^m1 on b1")

    print("\n4. Bob's bits move a2")
    assert table[(0, 0, 1, 0, BellOutcome.PHI_PLUS)].on_a2 == PauliOp.X
    assert table[(1, 1, 0, 0, BellOutcome.PHI_PLUS)] == PauliCorrection(PauliOp.IY, PauliOp.I)
    print("   ✓ (0,+,1,+,phi+) -> a2 sigma_x; (1,-,0,+,phi+) -> (i_sigma_y, I)")

    print("\n5. The table is cached but returned as a copy")
    table[(0, 0, 0, 0, BellOutcome.PHI_PLUS)] = PauliCorrection(PauliOp.Z, PauliOp.Z)
    fresh = derive_correction_table()
    assert fresh[(0, 0, 0, 0, BellOutcome.PHI_PLUS)] == PauliCorrection(PauliOp.I, PauliOp.I)
    print("   ✓ Caller edits do not leak")

    print("\n✓ Correction table tests passed")


def test_one_direction_control():
    """Only a2 (Alice's receiver for Bob's qubit) depends on Charlie."""
    print("=" * 70)
    print("TEST: One-Direction Control")
    print("=" * 70)

    table = derive_correction_table()
    dependence = charlie_dependence(table)
    assert dependence == {"b1": False, "a2": True}, f"Unexpected dependence {dependence}"
    assert charlie_dependent_receiver(table) == "a2"
    print("   ✓ b1 constant across Charlie's outcome; a2 varies")

    print("\n✓ Control direction tests passed")


def test_run_protocol():
    """Test sampled and forced end-to-end runs."""
    print("=" * 70)
    print("TEST: End-to-End Runs")
    print("=" * 70)

    table = derive_correction_table()

    print("\n1. Sampled runs transfer both payloads")
    rng = make_rng(7)
    for _ in range(10):
        result = run_protocol(PROBE_ALICE, PROBE_BOB, rng=rng, table=table)
        assert result.fidelity_b1_vs_A >= 1 - FIDELITY_TOL, f"b1 fidelity {result.fidelity_b1_vs_A}"
        assert result.fidelity_a2_vs_B >= 1 - FIDELITY_TOL, f"a2 fidelity {result.fidelity_a2_vs_B}"
        assert abs(result.branch_probability - 1 / 64) < BRANCH_TOL
    print("   ✓ 10 sampled runs, both fidelities 1")

    print("\n2. Transcript order and recipients")
    messages = result.transcript.messages
    assert [m.sender for m in messages] == ["alice", "bob", "charlie"]
    assert messages[0].recipients == ("bob", "charlie")
    assert messages[2].payload == {"bell": result.outcomes.charlie_bell.value}
    bob = result.transcript.from_sender("bob")
    assert bob.recipients == ("alice", "charlie")
    assert bob.payload == {"b2_z": result.outcomes.bob_z, "B_x": result.outcomes.bob_x}
    assert Transcript().from_sender("charlie") is None
    print("   ✓ alice, bob, then charlie")

    print("\n3. Forced run on (1,-,0,+,phi+)")
    forced = OutcomeRecord(1, 1, 0, 0, BellOutcome.PHI_PLUS)
    result = run_protocol(PROBE_ALICE, PROBE_BOB, forced=forced, table=table)
    assert result.correction == PauliCorrection(PauliOp.IY, PauliOp.I)
    assert min(result.fidelity_b1_vs_A, result.fidelity_a2_vs_B) >= 1 - FIDELITY_TOL
    print("   ✓ Corrections (i_sigma_y, I), fidelity 1")

    print("\n4. Same seed, same transcript")
    first = run_protocol(PROBE_ALICE, PROBE_BOB, rng=make_rng(99), table=table)
    second = run_protocol(PROBE_ALICE, PROBE_BOB, rng=make_rng(99), table=table)
    assert first.outcomes == second.outcomes
    print("   ✓ Reproducible")

    print("\n✓ End-to-end tests passed")


def test_error_cases():
    """Test protocol-level errors."""
    print("=" * 70)
    print("TEST: Error Cases")
    print("=" * 70)

    print("\n1. Corrections need Charlie's outcome")
    try:
        resolve_corrections(OutcomeRecord(0, 0, 0, 0))
        assert False, "Expected MissingCharlieOutcome"
    except MissingCharlieOutcome:
        print("   ✓ MissingCharlieOutcome raised")

    print("\n2. run_protocol needs exactly one of rng / forced")
    try:
        run_protocol(PROBE_ALICE, PROBE_BOB)
        assert False, "Expected ValueError"
    except ValueError:
        print("   ✓ ValueError raised")

    print("\n3. Charlie may not announce first")
    transcript = Transcript()
    transcript.append(Message("alice", ("bob", "charlie"), {"a1_z": 0, "A_x": 0}))
    try:
        transcript.append(Message("charlie", ("alice", "bob"), {"bell": "phi_plus"}))
        assert False, "Expected TranscriptOrderError"
    except TranscriptOrderError:
        print("   ✓ TranscriptOrderError raised")

    print("\n4. Silent Charlie leaves the state untouched")
    collapsed = step3_measure(_post_cnot(PROBE_ALICE, PROBE_BOB), forced=(0, 0, 0, 0))[2]
    outcome, p, same = step4_charlie(collapsed, cooperate=False)
    assert outcome is None and p == 1.0 and same is collapsed
    assert OutcomeRecord(0, 0, 0, 0).label() == "0+0+/silent"
    print("   ✓ No outcome, probability 1")

    print("\n✓ Error case tests passed")


def test_enumerate_branches():
    """Test branch enumeration, ordering and reassembly."""
    print("=" * 70)
    print("TEST: Branch Enumeration")
    print("=" * 70)

    table = derive_correction_table()
    rng = make_rng(20)
    in_a, in_b = InputState.haar_random(rng), InputState.haar_random(rng)
    records = enumerate_branches(in_a, in_b, table=table)

    print("\n1. 64 branches in branch-index order")
    assert len(records) == 64
    assert [branch_index(r.outcomes) for r in records] == list(range(64))
    print("   ✓ Ordered")

    print("\n2. Every branch: p = 1/64, both fidelities 1")
    for r in records:
        assert abs(r.probability - 1 / 64) < BRANCH_TOL, f"{r.outcomes.label()} p={r.probability}"
        assert min(r.fidelity_b1, r.fidelity_a2) >= 1 - FIDELITY_TOL, f"{r.outcomes.label()} failed"
    print("   ✓ Perfect transfer on all branches")

    print("\n3. Thread pool gives identical records")
    pooled = enumerate_branches(in_a, in_b, table=table, map_fn=ThreadPoolBranchRunner(4).map)
    assert [r.outcomes for r in pooled] == [r.outcomes for r in records]
    assert all(abs(a.fidelity_a2 - b.fidelity_a2) < 1e-15 for a, b in zip(pooled, records))
    print("   ✓ Order independent of scheduling")

    print("\n4. Reassembled uncorrected state is I/4")
    reassembled = reassemble_branches(records, corrected=False)
    assert abs(reassembled.trace() - 1) < BRANCH_TOL
    target = DensityMatrix(("b1", "a2"), np.eye(4) / 4)
    assert trace_distance(reassembled, target) < 1e-10, "Branches do not reassemble to I/4"
    print("   ✓ Probabilities sum to 1; mixture is maximally mixed")

    print("\n5. Reassembled corrected state is the product of the payloads")
    reassembled = reassemble_branches(records)
    assert abs(reassembled.trace() - 1) < BRANCH_TOL
    swapped = permute(tensor(in_a.to_state("b1"), in_b.to_state("a2")), reassembled.labels)
    assert trace_distance(reassembled, density_matrix(swapped)) < 1e-10, "Corrected branches disagree"
    print("   ✓ b1 holds A, a2 holds B on every branch")

    print("\n✓ Enumeration tests passed")


def test_control_power():
    """With Charlie silent, a2 is maximally mixed and b1 is perfect."""
    print("=" * 70)
    print("TEST: Control Power")
    print("=" * 70)

    table = derive_correction_table()
    rng = make_rng(3)
    for _ in range(5):
        in_a, in_b = InputState.haar_random(rng), InputState.haar_random(rng)
        cp = control_power(in_a, in_b, table)
        controlled, uncontrolled = cp
        assert cp.controlled_receiver == "a2" and cp.uncontrolled_receiver == "b1"
        assert abs(controlled - 0.5) < 1e-9, f"Controlled fidelity {controlled}"
        assert uncontrolled >= 1 - FIDELITY_TOL, f"Uncontrolled fidelity {uncontrolled}"
        assert cp.controlled_trace_distance < 1e-12, f"Distance to I/2: {cp.controlled_trace_distance}"
    print("   ✓ a2: 0.5 (I/2); b1: 1.0 on 5 random inputs")

    print("\n✓ Control power tests passed")


def run_all_tests():
    """Run all protocol test suites."""
    print("\n" + "=" * 70)
    print("BCQT PROTOCOL: COMPREHENSIVE TEST SUITE")
    print("=" * 70)

    try:
        test_channel()
        test_uniform_branching()
        test_correction_table()
        test_one_direction_control()
        test_run_protocol()
        test_error_cases()
        test_enumerate_branches()
        test_control_power()

        print("\n" + "=" * 70)
        print("✓ ALL PROTOCOL TESTS PASSED")
        print("=" * 70)
        return True

    except AssertionError as e:
        print(f"\n✗ TEST FAILED: {e}")
        import traceback
        traceback.print_exc()
        return False
    except Exception as e:
        print(f"\n✗ UNEXPECTED ERROR: {e}")
        import traceback
        traceback.print_exc()
        return False


if __name__ == "__main__":
    success = run_all_tests()
    sys.exit(0 if success else 1)
