from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import P1, P2, model, reach
from sepflow import events as ev
from sepflow.events import SCHEDULER, TRANSMITTER

DOMAINS = (SCHEDULER, TRANSMITTER, P1, P2)


def _states(sem="fixed", pids="counter"):
    return reach(sem, pids).states


idx = st.integers(0, 10**6)


@settings(max_examples=200, deadline=None)
@given(idx, idx, idx, st.sampled_from(DOMAINS))
def test_vpeq_is_an_equivalence(i, j, k, d):
    m = model("fixed", "counter")
    S = _states()
    s, t, u = S[i % len(S)], S[j % len(S)], S[k % len(S)]
    assert m.vpeq(s, d, s)
    assert m.vpeq(s, d, t) == m.vpeq(t, d, s)
    if m.vpeq(s, d, t) and m.vpeq(t, d, u):
        assert m.vpeq(s, d, u)
    assert (m.diff(s, d, t) is None) == m.vpeq(s, d, t)


def test_partition_sees_destination_contents_not_source():
    m = model()
    s = m.init()
    sent = m.step(s, ev.send_queuing_message(1, "m0"))
    assert m.vpeq(s, P1, sent._replace(stores=s.stores))       # own source buffer hidden
    assert not m.vpeq(s, TRANSMITTER, sent)
    delivered = m.run([ev.schedule(TRANSMITTER), ev.transfer_queuing("C")], sent)
    assert m.diff(sent, P2, delivered)[0] == "buffers"


def test_transmitter_full_view_adds_destination_buffers():
    src, full = model(), model(view="full")
    s = src.run([ev.send_queuing_message(1, "m0"), ev.schedule(TRANSMITTER), ev.transfer_queuing("C"),
                 ev.schedule(P2)])
    t = src.step(s, ev.receive_queuing_message(2))
    assert src.diff(s, TRANSMITTER, t) is None
    assert full.diff(s, TRANSMITTER, t)[0] == "buffers"


def test_scheduler_view_is_current_and_locals():
    m = model()
    s = m.init()
    assert m.view(s, SCHEDULER) == (("locals", s.stores[0]), ("current", P1))
    assert not m.vpeq(s, SCHEDULER, m.step(s, ev.schedule(P2)))
    assert m.vpeq(s, SCHEDULER, m.step(s, ev.partition_action("act_P1")))


def test_counter_ids_are_visible_to_owner():
    m = model("fixed", "counter")
    a = m.run([ev.create_queuing_port("qs")])
    b = m.run([ev.schedule(P2), ev.create_queuing_port("qd"), ev.schedule(P1), ev.create_queuing_port("qs")])
    assert m.diff(a, P1, b) == ("locals", (("ret", ("port_id", 1)),), (("ret", ("port_id", 2)),))
    # even with equal registers the id shows up in the owned-port list
    b = b._replace(stores=a.stores[:2] + (a.stores[2],) + b.stores[3:])
    assert m.diff(a, P1, b)[0] == "ports"
