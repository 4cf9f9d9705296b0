"""
Test Suite for Branch Runner Selection

Tests that:
1. The default runner is serial
2. BCQT_WORKERS selects a thread pool
3. An explicit worker count overrides the environment
4. Results keep input order
5. Invalid worker counts are rejected
"""

import sys
import os

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from branch_runner import (
    SerialBranchRunner,
    ThreadPoolBranchRunner,
    get_branch_runner,
    resolve_workers,
)


def _with_env(value, fn):
    previous = os.environ.pop("BCQT_WORKERS", None)
    try:
        if value is not None:
            os.environ["BCQT_WORKERS"] = value
        return fn()
    finally:
        os.environ.pop("BCQT_WORKERS", None)
        if previous is not None:
            os.environ["BCQT_WORKERS"] = previous


def test_runner_selection():
    """Test runner selection from flag and environment."""
    print("=" * 70)
    print("TEST: Runner Selection")
    print("=" * 70)

    runner = _with_env(None, get_branch_runner)
    assert isinstance(runner, SerialBranchRunner), f"Expected serial runner, got {type(runner).__name__}"
    print("   ✓ Serial by default")

    runner = _with_env("3", get_branch_runner)
    assert isinstance(runner, ThreadPoolBranchRunner) and runner.workers == 3
    print("   ✓ BCQT_WORKERS=3 -> thread pool")

    runner = _with_env("3", lambda: get_branch_runner(1))
    assert isinstance(runner, SerialBranchRunner), "Explicit count must override the environment"
    print("   ✓ Flag overrides environment")

    print("\n✓ Selection tests passed")


def test_order_preserved():
    """Pool results come back in input order."""
    print("=" * 70)
    print("TEST: Order Preservation")
    print("=" * 70)

    items = list(range(200))
    expected = [i * i for i in items]
    assert SerialBranchRunner().map(lambda i: i * i, items) == expected
    assert ThreadPoolBranchRunner(8).map(lambda i: i * i, items) == expected
    print("   ✓ Serial and pooled results identical")

    print("\n✓ Order tests passed")


def test_invalid_workers():
    """Invalid counts raise ValueError."""
    print("=" * 70)
    print("TEST: Invalid Worker Counts")
    print("=" * 70)

    for bad in (lambda: resolve_workers(0), lambda: _with_env("many", resolve_workers), lambda: ThreadPoolBranchRunner(1)):
        try:
            bad()
            assert False, "Expected ValueError"
        except ValueError:
            pass
    print("   ✓ 0, non-integer env and single-worker pool rejected")

    print("\n✓ Invalid worker tests passed")


def run_all_tests():
    print("\n" + "=" * 70)
    print("BRANCH RUNNER: TEST SUITE")
    print("=" * 70)

    try:
        test_runner_selection()
        test_order_preserved()
        test_invalid_workers()

        print("\n" + "=" * 70)
        print("✓ ALL BRANCH RUNNER TESTS PASSED")
        print("=" * 70)
        return True

    except AssertionError as e:
        print(f"\n✗ TEST FAILED: {e}")
        import traceback
        traceback.print_exc()
        return False


if __name__ == "__main__":
    success = run_all_tests()
    sys.exit(0 if success else 1)
