import numpy as np
import pytest

from conftest import P1, P2, SAMPLING_CFG, index, model, reach
from sepflow import events as ev
from sepflow.checker import (
    BudgetExceeded,
    canonical,
    check_invariants,
    explore,
    minimize,
    replay,
    verify_unwinding,
)
from sepflow.config import PortIdStrategy, parse_config
from sepflow.events import SCHEDULER, TRANSMITTER, EventKind
from sepflow.hoare import CASES, LEMMA2, HoareCase, covered_kinds, run_case, run_hoare_suite
from sepflow.kernel import ARINC, FIXED
from sepflow.model import build_model
from sepflow.security import Counterexample, P


@pytest.mark.parametrize("sem, pids, n", [("fixed", "static", 1749), ("arinc", "static", 2034),
                                          ("fixed", "counter", 3468), ("arinc", "counter", 4014)])
def test_golden_state_counts(sem, pids, n):
    assert len(reach(sem, pids)) == n


def test_schedule_only_alphabet_has_three_states():
    m = build_model(model().cfg, alphabet=tuple(ev.schedule(d) for d in (P1, P2, TRANSMITTER)))
    assert len(explore(m)) == 3


def test_reachable_set_is_closed_and_paths_replay():
    rs = reach("arinc", "counter")
    m = rs.model
    assert rs.succ.shape == (len(rs), len(m.alphabet))
    for i in range(0, len(rs), 97):
        s = rs.states[i]
        assert m.run(rs.path(i)) == s
        for k, e in enumerate(m.alphabet):
            assert rs.states[rs.succ[i, k]] == m.step(s, e)


def test_budget_exceeded_reports_frontier():
    with pytest.raises(BudgetExceeded, match="frontier"):
        explore(model("fixed", "counter"), budget=100)


def test_canonical_is_stable():
    rs = reach()
    a = [canonical(s) for s in rs.states[:50]]
    assert a == [canonical(s) for s in explore(model()).states[:50]]
    assert len(set(a)) == 50


@pytest.mark.parametrize("sem, pids", [("fixed", "static"), ("arinc", "counter")])
def test_invariants_hold_on_reachable_states(sem, pids):
    r = check_invariants(reach(sem, pids))
    assert r.holds and r.states == len(reach(sem, pids))


def test_invariant_negative_control():
    rs = reach()
    s = rs.states[5]
    bad = s._replace(comm=s.comm._replace(created=s.comm.created - {2}))
    r = check_invariants(rs, states=list(rs.states[:5]) + [bad])
    assert not r.holds and r.state == 5 and "port_consistent" in r.failed


# ---------------------------------------------------------------------------
# Hoare suite

def test_hoare_suite_covers_every_kind():
    assert len(CASES) >= 33
    assert covered_kinds() == set(EventKind)


@pytest.mark.parametrize("sem, pids", [("fixed", "static"), ("arinc", "static"),
                                       ("fixed", "counter"), ("arinc", "counter")])
def test_hoare_suite_passes_on_cfg1(sem, pids):
    results = run_hoare_suite(reach(sem, pids))
    failed = [r.case.name for r in results if not r.holds]
    assert failed == []


def test_sampling_lemma_is_exercised_under_counter():
    cfg = parse_config(SAMPLING_CFG)
    for variant in (FIXED, ARINC):
        rs = explore(build_model(cfg, variant, PortIdStrategy.COUNTER))
        results = {r.case.name: r for r in run_hoare_suite(rs)}
        assert all(r.holds for r in results.values())
        assert results[LEMMA2].checked > 0


def test_broken_postcondition_is_caught():
    case = HoareCase((EventKind.SEND_QUEUING_MESSAGE,), "send_never_changes_anything",
                     lambda m, s, e: True, lambda m, s, e, s2: s2 == s)
    r = run_case(reach(), case)
    assert not r.holds and r.failure[1].kind is EventKind.SEND_QUEUING_MESSAGE


# ---------------------------------------------------------------------------
# witnesses

def test_minimize_strips_irrelevant_events():
    m = model("arinc")
    noise = ev.partition_action("act_P1")
    cx = Counterexample(P.WEAK_STEP_CONSISTENT, P1,
                        prefix_a=(noise, ev.create_queuing_port("qs")),
                        prefix_b=(noise, ev.send_queuing_message(1, "m0"), noise,
                                  ev.create_queuing_port("qs")),
                        event=ev.send_queuing_message(1, "m0"))
    assert replay(m, cx)
    small = minimize(m, cx)
    assert replay(m, small)
    assert noise not in small.prefix_a + small.prefix_b
    assert small.length <= 4
    assert minimize(m, small) == small


def test_minimize_rejects_non_witness():
    m = model()
    cx = Counterexample(P.LOCAL_RESPECT, P2, event=ev.schedule(P2))
    with pytest.raises(ValueError):
        minimize(m, cx)


def test_unwinding_witnesses_replay_and_round_trip():
    lr, wsc = verify_unwinding(index("arinc", "counter"))
    m = model("arinc", "counter")
    for v in (lr, wsc):
        assert not v.holds
        for cx in [v.witness, *v.details["by_kind"].values()]:
            assert replay(m, cx)
            back = Counterexample.from_dict(m, cx.to_dict(m))
            assert replay(m, back) and back.event == cx.event


def test_fixed_static_per_kind_table_is_all_pass():
    lr, wsc = verify_unwinding(index())
    assert lr.holds and wsc.holds
    assert set(lr.details["per_kind"]) == {e.kind.value for e in model().alphabet}
    assert all(lr.details["per_kind"].values()) and all(wsc.details["per_kind"].values())


def test_purge_irrelevance_spot_check():
    """Views of a domain never depend on events that were purged for it."""
    from sepflow.security import ipurge

    m = model()
    rs = reach()
    rng = np.random.default_rng(7)
    alpha = m.alphabet
    for _ in range(300):
        s = rs.states[rng.integers(len(rs))]
        seq = tuple(alpha[i] for i in rng.integers(len(alpha), size=4))
        for d in (SCHEDULER, TRANSMITTER, P1, P2):
            assert m.vpeq(m.run(seq, s), d, m.run(ipurge(m, seq, s, d), s))
