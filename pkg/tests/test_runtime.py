"""Interpreter-level properties: oracle equivalence, projection erasure,
per-endpoint randomness, report serialization, and the value-agreement check
catching real divergence."""

import pytest
from conftest import run_agreeing

from choreo import census_of, project_and_run, run_centralized, run_simulated
from choreo.errors import CommitmentFailed, StepBudgetExceeded, WitnessMismatchError
from choreo.runtime import check_value_agreement
from choreo.seeding import location_rng

THREE = census_of(["a", "b", "c"])


def _relay(b, args):
    v = b.locally(b.member("a"), lambda un: args)
    at_b = b.multicast(b.member("a"), b.subset(["b"]), v)
    return b.locally(b.member("b"), lambda un: un(at_b) + 1)


def test_singleton_pure_choreography_is_plain_evaluation():
    solo = census_of(["only"])

    def chor(b, args):
        return b.locally(b.member("only"), lambda un: args * 2)

    central, simulated = run_agreeing(chor, solo, args=21)
    assert len(simulated.messages) == 0
    assert central.result_view("only") == {"located": ["only"], "value": 42}


def test_run_at_location_outside_census_rejected():
    class NoTransport:
        def send(self, to, body):
            raise AssertionError("unused")

        def recv(self, frm):
            raise AssertionError("unused")

    with pytest.raises(WitnessMismatchError):
        project_and_run(_relay, THREE, "zebra", NoTransport(), args=1)


def test_projection_erasure_for_uninvolved_endpoint():
    # c takes part in no communication and no local computation: projecting
    # to c must touch the network zero times and yield absent-shaped results.
    class ExplodingTransport:
        def send(self, to, body):
            raise AssertionError("uninvolved endpoint tried to send")

        def recv(self, frm):
            raise AssertionError("uninvolved endpoint tried to receive")

    result, fragment = project_and_run(_relay, THREE, "c", ExplodingTransport(), args=1)
    assert result == {"located": ["b"], "value": "?absent"}
    assert fragment.endpoints["c"].events == []
    assert fragment.messages == []


def test_per_endpoint_randomness_matches_across_modes():
    def chor(b, args):
        return b.parallel(b.everyone(), lambda loc, un: un.rng.randrange(1000))

    central, simulated = run_agreeing(chor, THREE, seed=123)
    expected = {n: location_rng(123, n).randrange(1000) for n in THREE.names}
    for name in THREE.names:
        assert central.result_view(name)["facet"] == expected[name]


def test_input_streams_shared_across_modes():
    def chor(b, args):
        first = b.locally(b.member("a"), lambda un: un.next_input())
        second = b.locally(b.member("a"), lambda un: un.next_input())
        shared = b.multicast(b.member("a"), b.everyone(), first)
        return b.naked(shared)

    inputs = {"a": [5, 6]}
    central, simulated = run_agreeing(chor, THREE, inputs=inputs)
    assert central.result_view("b") == 5


def test_report_serialization_format():
    central, simulated = run_agreeing(_relay, THREE, args=1)
    text = simulated.serialize()
    lines = text.strip().splitlines()
    assert lines and all(l.split()[0] in ("MSG", "BRANCH") for l in lines)
    msg = [l for l in lines if l.startswith("MSG")]
    assert len(msg) == 1
    sender, receiver, nbytes, t = msg[0].split()[1:]
    assert (sender, receiver) == ("a", "b")
    assert int(nbytes) > 0 and int(t) >= 0


def test_centralized_same_seed_identical_reports():
    from choreo.examples import build_example

    ex = build_example("lottery", servers=2, clients=2)
    reports = [
        run_centralized(ex.choreography, ex.census, ex.args, seed=8, inputs=ex.inputs)
        for _ in range(2)
    ]
    assert reports[0].serialize() == reports[1].serialize()
    for name in ex.census.names:
        assert reports[0].result_view(name) == reports[1].result_view(name)


def test_report_golden_file():
    # freezes the serialized report for one seeded single-Get run: message
    # sizes, logical timestamps, branch site naming, and outcome encoding
    from choreo.examples import build_example
    from choreo.protocols.kvs import Get

    ex = build_example("kvs-enclave", script=[Get("k")])
    report = run_simulated(ex.choreography, ex.census, ex.args, seed=4, inputs=ex.inputs)
    report.require_success()
    assert report.serialize() == (
        "MSG client primary 8 0\n"
        "MSG primary backup 8 3\n"
        "MSG primary client 9 4\n"
        "BRANCH primary primary+backup#0 050003000000016b\n"
        "BRANCH backup primary+backup#0 050003000000016b\n"
    )


def test_value_agreement_catches_divergence():
    # A "replicated" body that sneaks in endpoint identity (here: the bundle
    # object's id, which differs per endpoint task) breaks the agreement
    # contract; the run bookkeeping must catch it after the fact.
    def diverging(b, args):
        return b.replicated(lambda un: id(b) % (1 << 31))

    report = run_simulated(diverging, THREE)
    report.require_success()
    assert check_value_agreement(report) != []


def test_centralized_failure_tags_the_raising_endpoint():
    def chor(b, args):
        def boom(un):
            raise CommitmentFailed("nope")

        return b.locally(b.member("b"), boom)

    report = run_centralized(chor, THREE)
    assert isinstance(report.errors()["b"], CommitmentFailed)
    assert "a" in report.errors() and "c" in report.errors()


def test_simulated_partial_failure_is_per_endpoint():
    def chor(b, args):
        def maybe_boom(loc, un):
            if loc.name == "b":
                raise CommitmentFailed("nope")
            return 0

        b.parallel(b.everyone(), maybe_boom)
        v = b.locally(b.member("b"), lambda un: 1)
        at_a = b.multicast(b.member("b"), b.subset(["a"]), v)
        return at_a

    report = run_simulated(chor, THREE)
    errors = report.errors()
    assert isinstance(errors["b"], CommitmentFailed)
    assert isinstance(errors["a"], StepBudgetExceeded)  # waits for b forever
    assert "c" not in errors  # c finishes: nothing else involves it
