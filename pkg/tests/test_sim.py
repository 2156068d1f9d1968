"""Deterministic simulator: FIFO, seeded determinism, observable reordering,
stall and budget detection."""

import pytest

from choreo import census_of, run_simulated
from choreo.errors import StepBudgetExceeded, TransportError
from choreo.transport import SimNet, sim_make


def test_pairs_available():
    net, handles = sim_make(["a", "b", "c"], seed=0)
    assert len(net.pairs) == 6
    assert set(handles) == {"a", "b", "c"}


def _ping_pong_mains(net, rounds=3):
    a, b = net.handle("a"), net.handle("b")

    def main_a():
        for i in range(rounds):
            a.send("b", bytes([i]))
            assert b"ack" + bytes([i]) == a.recv("b")

    def main_b():
        for i in range(rounds):
            assert bytes([i]) == b.recv("a")
            b.send("a", b"ack" + bytes([i]))

    return {"a": main_a, "b": main_b}


def test_fifo_and_completion():
    net = SimNet(["a", "b"], seed=5)
    errors = net.run(_ping_pong_mains(net))
    assert errors == {"a": None, "b": None}
    seqs = [m.seq for m in net.messages if m.sender == "a"]
    assert seqs == sorted(seqs) == list(range(len(seqs)))
    assert all(m.t_recv is not None for m in net.messages)


def test_same_seed_same_schedule():
    logs = []
    for _ in range(2):
        net = SimNet(["a", "b"], seed=77)
        net.run(_ping_pong_mains(net))
        logs.append([(m.sender, m.receiver, m.seq, m.t_send, m.t_deliver, m.t_recv)
                     for m in net.messages])
    assert logs[0] == logs[1]


def _two_senders(net):
    a, b, c = net.handle("a"), net.handle("b"), net.handle("c")

    def main_a():
        a.send("c", b"from-a")

    def main_b():
        b.send("c", b"from-b")

    def main_c():
        c.recv("a")
        c.recv("b")

    return {"a": main_a, "b": main_b, "c": main_c}


def test_cross_pair_reordering_across_seeds():
    orders = set()
    for seed in range(30):
        net = SimNet(["a", "b", "c"], seed=seed)
        assert net.run(_two_senders(net)) == {"a": None, "b": None, "c": None}
        order = tuple(
            m.sender for m in sorted(net.messages, key=lambda m: m.t_deliver)
        )
        orders.add(order)
    assert orders == {("a", "b"), ("b", "a")}


def test_stall_is_flagged():
    net = SimNet(["a", "b"], seed=0)

    def main_a():
        pass

    def main_b():
        net.handle("b").recv("a")

    errors = net.run({"a": main_a, "b": main_b})
    assert errors["a"] is None
    assert isinstance(errors["b"], StepBudgetExceeded)


def test_step_budget_trips():
    net = SimNet(["a", "b"], seed=0, step_budget=10)
    a, b = net.handle("a"), net.handle("b")

    def main_a():
        for i in range(100):
            a.send("b", b"x")
            a.recv("b")

    def main_b():
        for i in range(100):
            b.recv("a")
            b.send("a", b"x")

    errors = net.run({"a": main_a, "b": main_b})
    assert any(isinstance(e, StepBudgetExceeded) for e in errors.values())


def test_unknown_routes_rejected():
    net, handles = sim_make(["a", "b"], seed=0)
    with pytest.raises(TransportError):
        net.handle("nobody")

    def main_a():
        handles["a"].send("zzz", b"x")

    def main_b():
        pass

    errors = net.run({"a": main_a, "b": main_b})
    assert isinstance(errors["a"], TransportError)


def test_count_messages_filters():
    from choreo import count_messages

    net = SimNet(["a", "b", "c"], seed=1)
    net.run(_two_senders(net))
    assert count_messages([]) == 0
    assert count_messages(net.messages) == 2
    assert count_messages(net.messages, senders={"a"}) == 1
    assert count_messages(net.messages, receivers={"c"}) == 2
    assert count_messages(net.messages, t_range=(0, 0)) == 0


def test_run_simulated_determinism():
    from choreo.examples import build_example

    ex = build_example("kvs-enclave")
    first = run_simulated(ex.choreography, ex.census, ex.args, seed=9, inputs=ex.inputs)
    second = run_simulated(ex.choreography, ex.census, ex.args, seed=9, inputs=ex.inputs)
    assert first.serialize() == second.serialize()
    assert [m.t_deliver for m in first.messages] == [m.t_deliver for m in second.messages]
    for name in ex.census.names:
        assert first.result_view(name) == second.result_view(name)
