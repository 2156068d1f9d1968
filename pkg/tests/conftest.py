"""Shared helpers: run a choreography under both interpreters and require
that every cross-mode observable agrees."""

from choreo import (
    check_fifo,
    check_value_agreement,
    run_centralized,
    run_simulated,
)


def run_both(proc, census, args=None, seed=0, inputs=None, step_budget=10_000):
    central = run_centralized(proc, census, args, seed=seed, inputs=inputs)
    simulated = run_simulated(
        proc, census, args, seed=seed, inputs=inputs, step_budget=step_budget
    )
    return central, simulated


def run_agreeing(proc, census, args=None, seed=0, inputs=None):
    """Both modes must succeed, agree on every endpoint's result and branch
    log, and satisfy the value-agreement and FIFO invariants."""
    central, simulated = run_both(proc, census, args=args, seed=seed, inputs=inputs)
    central.require_success()
    simulated.require_success()
    for name in census.names:
        assert central.result_view(name) == simulated.result_view(name), name
        assert central.branch_outcomes(name) == simulated.branch_outcomes(name), name
    assert len(central.messages) == len(simulated.messages)
    assert check_value_agreement(central) == []
    assert check_value_agreement(simulated) == []
    assert check_fifo(simulated) == []
    return central, simulated
