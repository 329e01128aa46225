"""Pre/postcondition cases for every event kind, checked on all reachable states.

Each :class:`HoareCase` states ``{pre} e {post}`` for the events of one kind
(or a few kinds sharing a frame condition).  ``run_hoare_suite`` applies the
case to every reachable state and every alphabet event of a matching kind,
evaluating ``post`` only where ``pre`` holds, and counts how many pairs were
actually exercised so vacuous passes are visible.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

from .config import Direction, Mode, PortIdStrategy
from .events import HYPERCALLS, INIT_EVENT, DomainKind, Event, EventKind
from .kernel import (
    EMPTY,
    EXISTS,
    FAILED,
    NO_ERROR,
    NOT_AVAILABLE,
    RET,
    SUCCESS,
    VALID,
    PartMode,
    SendMode,
    TransferMode,
    count_ret,
    event_enabled,
    lookup,
    msg_ret,
    port_consistent,
    port_id_of,
    port_id_ret,
    port_name_of,
    port_state,
)

K = EventKind


@dataclass(frozen=True)
class HoareCase:
    kinds: tuple
    name: str
    pre: Callable      # (model, s, e) -> bool
    post: Callable     # (model, s, e, s2) -> bool
    boot: bool = False  # the event is the boot step: s2 = init(cfg) regardless of s


@dataclass
class HoareResult:
    case: HoareCase
    holds: bool
    checked: int                       # (state, event) pairs where pre held
    failure: Optional[tuple] = None    # (state index, event)


# ---------------------------------------------------------------------------
# predicate helpers

def _enabled(m, s, e) -> bool:
    return event_enabled(m.cfg, s, e)


def _ret(m, s, d=None):
    d = s.current if d is None else d
    return lookup(s.stores[m.cfg.domains.index(d)], RET)


def _owned(m, s, pid, mode, direction=None) -> bool:
    if pid not in s.comm.created:
        return False
    pc = m.cfg.port(port_name_of(s, pid))
    return (pc is not None and pc.mode is mode and pc.owner == s.current.part
            and (direction is None or pc.direction is direction)
            and lookup(s.comm.port_owner, pid) == s.current.part)


def _ps(s, pid):
    return port_state(s, pid)


def _others_same(m, s, s2) -> bool:
    """Every store except the caller's, the mode map and ``current`` are unchanged."""
    i = m.cfg.domains.index(s.current)
    return (s.current == s2.current and s.part_mode == s2.part_mode
            and all(a == b for j, (a, b) in enumerate(zip(s.stores, s2.stores)) if j != i))


def _only_ret(m, s, s2, value) -> bool:
    return _others_same(m, s, s2) and s.comm == s2.comm and _ret(m, s2) == value


def _can_create(m, s, e, mode) -> bool:
    pc = m.cfg.port(e.args[0])
    return (_enabled(m, s, e) and pc is not None and pc.mode is mode
            and port_id_of(s, pc.name) is None and pc.owner == s.current.part)


def _get_ok(m, s, e, mode) -> bool:
    pc = m.cfg.port(e.args[0])
    return (_enabled(m, s, e) and pc is not None and pc.mode is mode
            and pc.owner == s.current.part and port_id_of(s, pc.name) is not None)


def _channel_ports(m, s, e):
    c = m.cfg.channel(e.args[0])
    return [port_id_of(s, n) for n in (c.source,) + c.destinations]


def _queue(s, pid):
    return _ps(s, pid).queue


def _on(*kinds):
    return tuple(kinds)


def _yes(m, s, e) -> bool:
    return True


def _disabled(m, s, e) -> bool:
    return not _enabled(m, s, e)


def _identity(m, s, e, s2) -> bool:
    return s == s2


def _send_mode(m) -> SendMode:
    return m.variant.send_mode


def _transfer_full(m, s, e) -> bool:
    if not _enabled(m, s, e):
        return False
    sp, dp = _channel_ports(m, s, e)
    return (sp is not None and dp is not None and bool(_queue(s, sp))
            and len(_queue(s, dp)) >= m.cfg.channel(e.args[0]).capacity)


# ---------------------------------------------------------------------------
# the cases

def _create_lemma(m, s, e, s2) -> bool:
    r = _ret(m, s2)
    return r is not None and r[0] == "port_id" and port_state(s2, r[1]) is not None


def _create_fresh(m, s, e, s2) -> bool:
    r = _ret(m, s2)
    i = r[1]
    return (s2.comm.created == s.comm.created | {i} and i not in s.comm.created
            and lookup(s2.comm.port_owner, i) == s.current.part
            and port_id_of(s2, e.args[0]) == i and _others_same(m, s, s2))


def _counter_step(m, s, e, s2) -> bool:
    ok = _ret(m, s2) != FAILED
    return s2.next_port_id == s.next_port_id + (1 if ok else 0)


def _send_room(m, s, e) -> bool:
    return (_enabled(m, s, e) and _owned(m, s, e.args[0], Mode.QUEUING, Direction.SOURCE)
            and len(_queue(s, e.args[0])) < m.cfg.capacity_of(port_name_of(s, e.args[0])))


def _send_full(m, s, e) -> bool:
    return (_enabled(m, s, e) and _owned(m, s, e.args[0], Mode.QUEUING, Direction.SOURCE)
            and len(_queue(s, e.args[0])) >= m.cfg.capacity_of(port_name_of(s, e.args[0])))


def _send_room_post(m, s, e, s2) -> bool:
    pid, msg = e.args
    code = SUCCESS if _send_mode(m) is SendMode.MAY_LOST else NO_ERROR
    return _queue(s2, pid) == _queue(s, pid) + (msg,) and _ret(m, s2) == code


def _send_full_post(m, s, e, s2) -> bool:
    code = SUCCESS if _send_mode(m) is SendMode.MAY_LOST else NOT_AVAILABLE
    return _only_ret(m, s, s2, code)


def _recv_nonempty(m, s, e) -> bool:
    return (_enabled(m, s, e) and _owned(m, s, e.args[0], Mode.QUEUING, Direction.DESTINATION)
            and bool(_queue(s, e.args[0])))


def _recv_empty(m, s, e) -> bool:
    return (_enabled(m, s, e) and _owned(m, s, e.args[0], Mode.QUEUING, Direction.DESTINATION)
            and not _queue(s, e.args[0]))


def _recv_post(m, s, e, s2) -> bool:
    q, q2 = _queue(s, e.args[0]), _queue(s2, e.args[0])
    return len(q2) == len(q) - 1 and q2 == q[1:] and _ret(m, s2) == msg_ret(q[0])


def _transfer_s_live(m, s, e) -> bool:
    if not _enabled(m, s, e):
        return False
    ids = _channel_ports(m, s, e)
    return all(i is not None for i in ids) and _ps(s, ids[0]).sampling_msg is not None


def _transfer_s_post(m, s, e, s2) -> bool:
    ids = _channel_ports(m, s, e)
    msg = _ps(s, ids[0]).sampling_msg
    return (_ps(s2, ids[0]) == _ps(s, ids[0])
            and all(_ps(s2, i).sampling_msg == msg for i in ids[1:])
            and s.stores == s2.stores and s.current == s2.current)


def _transfer_q_room(m, s, e) -> bool:
    if not _enabled(m, s, e):
        return False
    sp, dp = _channel_ports(m, s, e)
    return (sp is not None and dp is not None and bool(_queue(s, sp))
            and len(_queue(s, dp)) < m.cfg.channel(e.args[0]).capacity)


def _transfer_q_room_post(m, s, e, s2) -> bool:
    sp, dp = _channel_ports(m, s, e)
    head = _queue(s, sp)[0]
    return (_queue(s2, sp) == _queue(s, sp)[1:] and _queue(s2, dp) == _queue(s, dp) + (head,)
            and s.stores == s2.stores)


def _transfer_q_full_post(m, s, e, s2) -> bool:
    sp, dp = _channel_ports(m, s, e)
    if m.variant.transfer_mode is TransferMode.ARINC_NO_LOSS:
        return s2 == s
    return _queue(s2, sp) == _queue(s, sp)[1:] and _queue(s2, dp) == _queue(s, dp)


def _transfer_q_idle(m, s, e) -> bool:
    if not _enabled(m, s, e):
        return True
    sp, dp = _channel_ports(m, s, e)
    return sp is None or dp is None or not _queue(s, sp)


def _boot_post(m, s, e, s2) -> bool:
    cfg = m.cfg
    static = cfg.portid_strategy is PortIdStrategy.STATIC
    created = frozenset(p.static_id for p in cfg.ports) if static else frozenset()
    return (port_consistent(s2) and s2.comm.created == created
            and all(md is PartMode.NORMAL for _, md in s2.part_mode)
            and all(st == () for st in s2.stores)
            and s2.current.kind is DomainKind.PARTITION
            and s2.current.part == min(cfg.partition_ids)
            and s2.next_port_id == (None if static else 1)
            and all(not ps.queue and ps.sampling_msg is None for _, ps in s2.comm.ports))


def _hypercall_frame(m, s, e, s2) -> bool:
    return _others_same(m, s, s2) and s2.next_port_id in (s.next_port_id, (s.next_port_id or 0) + 1)


def _system_frame(m, s, e, s2) -> bool:
    return s.stores == s2.stores and s.part_mode == s2.part_mode and s.next_port_id == s2.next_port_id


def _fail(m, s, e, s2) -> bool:
    return _only_ret(m, s, s2, FAILED)


def _rejects(pred):
    """Enabled, but the success precondition ``pred`` does not hold."""
    return lambda m, s, e: _enabled(m, s, e) and not pred(m, s, e)


def _owned_pre(mode, direction=None):
    return lambda m, s, e: _enabled(m, s, e) and _owned(m, s, e.args[0], mode, direction)


_sw = _owned_pre(Mode.SAMPLING, Direction.SOURCE)
_sr = _owned_pre(Mode.SAMPLING, Direction.DESTINATION)
_sany = _owned_pre(Mode.SAMPLING)
_qany = _owned_pre(Mode.QUEUING)
_qdst = _owned_pre(Mode.QUEUING, Direction.DESTINATION)


def _cs(m, s, e):
    return _can_create(m, s, e, Mode.SAMPLING)


def _cq(m, s, e):
    return _can_create(m, s, e, Mode.QUEUING)


CASES: tuple[HoareCase, ...] = (
    # Create_Sampling_Port
    HoareCase(_on(K.CREATE_SAMPLING_PORT), "create_sampling_lemma2", _cs, _create_lemma),
    HoareCase(_on(K.CREATE_SAMPLING_PORT), "create_sampling_fresh_id", _cs, _create_fresh),
    HoareCase(_on(K.CREATE_SAMPLING_PORT), "create_sampling_reject", _rejects(_cs), _fail),
    # Write / Read sampling
    HoareCase(_on(K.WRITE_SAMPLING_MESSAGE), "write_sampling_stores", _sw,
              lambda m, s, e, s2: _ps(s2, e.args[0]).sampling_msg == e.args[1]
              and _ret(m, s2) == SUCCESS and _others_same(m, s, s2)),
    HoareCase(_on(K.WRITE_SAMPLING_MESSAGE), "write_sampling_reject", _rejects(_sw), _fail),
    HoareCase(_on(K.READ_SAMPLING_MESSAGE), "read_sampling_nondestructive", _sr,
              lambda m, s, e, s2: _only_ret(m, s, s2, msg_ret(_ps(s, e.args[0]).sampling_msg))),
    HoareCase(_on(K.READ_SAMPLING_MESSAGE), "read_sampling_reject", _rejects(_sr), _fail),
    # Get_Sampling_Portid / Portstatus
    HoareCase(_on(K.GET_SAMPLING_PORTID), "get_sampling_portid",
              lambda m, s, e: _get_ok(m, s, e, Mode.SAMPLING),
              lambda m, s, e, s2: _only_ret(m, s, s2, port_id_ret(port_id_of(s, e.args[0])))),
    HoareCase(_on(K.GET_SAMPLING_PORTID), "get_sampling_portid_reject",
              _rejects(lambda m, s, e: _get_ok(m, s, e, Mode.SAMPLING)), _fail),
    HoareCase(_on(K.GET_SAMPLING_PORTSTATUS), "sampling_status_validity", _sr,
              lambda m, s, e, s2: _only_ret(
                  m, s, s2, EMPTY if _ps(s, e.args[0]).sampling_msg is None else VALID)),
    HoareCase(_on(K.GET_SAMPLING_PORTSTATUS), "sampling_status_source_opaque", _sw,
              lambda m, s, e, s2: _only_ret(m, s, s2, EXISTS)),
    HoareCase(_on(K.GET_SAMPLING_PORTSTATUS), "sampling_status_reject", _rejects(_sany), _fail),
    # Create_Queuing_Port
    HoareCase(_on(K.CREATE_QUEUING_PORT), "create_queuing_lemma2", _cq, _create_lemma),
    HoareCase(_on(K.CREATE_QUEUING_PORT), "create_queuing_empty_buffer", _cq,
              lambda m, s, e, s2: _create_fresh(m, s, e, s2)
              and _queue(s2, _ret(m, s2)[1]) == ()),
    HoareCase(_on(K.CREATE_QUEUING_PORT), "create_queuing_reject", _rejects(_cq), _fail),
    HoareCase(_on(K.CREATE_SAMPLING_PORT, K.CREATE_QUEUING_PORT), "create_counter_advances",
              lambda m, s, e: _enabled(m, s, e) and m.cfg.portid_strategy is PortIdStrategy.COUNTER,
              _counter_step),
    # Send_Queuing_Message
    HoareCase(_on(K.SEND_QUEUING_MESSAGE), "send_appends", _send_room, _send_room_post),
    HoareCase(_on(K.SEND_QUEUING_MESSAGE), "send_full_status", _send_full, _send_full_post),
    HoareCase(_on(K.SEND_QUEUING_MESSAGE), "send_reject",
              _rejects(_owned_pre(Mode.QUEUING, Direction.SOURCE)), _fail),
    HoareCase(_on(K.SEND_QUEUING_MESSAGE), "send_capacity_bound", _enabled,
              lambda m, s, e, s2: all(len(ps.queue) <= m.cfg.capacity_of(port_name_of(s2, i))
                                      for i, ps in s2.comm.ports if ps.mode is Mode.QUEUING)),
    # Receive_Queuing_Message
    HoareCase(_on(K.RECEIVE_QUEUING_MESSAGE), "receive_pops_head", _recv_nonempty, _recv_post),
    HoareCase(_on(K.RECEIVE_QUEUING_MESSAGE), "receive_empty", _recv_empty,
              lambda m, s, e, s2: _only_ret(m, s, s2, msg_ret(None))),
    HoareCase(_on(K.RECEIVE_QUEUING_MESSAGE), "receive_reject", _rejects(_qdst), _fail),
    # Get_Queuing_Portid / Portstatus
    HoareCase(_on(K.GET_QUEUING_PORTID), "get_queuing_portid",
              lambda m, s, e: _get_ok(m, s, e, Mode.QUEUING),
              lambda m, s, e, s2: _only_ret(m, s, s2, port_id_ret(port_id_of(s, e.args[0])))),
    HoareCase(_on(K.GET_QUEUING_PORTID), "get_queuing_portid_reject",
              _rejects(lambda m, s, e: _get_ok(m, s, e, Mode.QUEUING)), _fail),
    HoareCase(_on(K.GET_QUEUING_PORTSTATUS), "queuing_status_dest_count", _qdst,
              lambda m, s, e, s2: _only_ret(m, s, s2, count_ret(len(_queue(s, e.args[0]))))),
    HoareCase(_on(K.GET_QUEUING_PORTSTATUS), "queuing_status_source_opaque",
              _owned_pre(Mode.QUEUING, Direction.SOURCE),
              lambda m, s, e, s2: _only_ret(m, s, s2, EXISTS)),
    HoareCase(_on(K.GET_QUEUING_PORTSTATUS), "queuing_status_reject", _rejects(_qany), _fail),
    # Clear_Queuing_Port
    HoareCase(_on(K.CLEAR_QUEUING_PORT), "clear_empties", _qdst,
              lambda m, s, e, s2: _queue(s2, e.args[0]) == () and _ret(m, s2) == SUCCESS
              and _others_same(m, s, s2)),
    HoareCase(_on(K.CLEAR_QUEUING_PORT), "clear_reject", _rejects(_qdst), _fail),
    # Schedule
    HoareCase(_on(K.SCHEDULE), "schedule_sets_current", _yes,
              lambda m, s, e, s2: s2.current == e.args[0] and s2.comm == s.comm
              and s2.stores == s.stores and s2.part_mode == s.part_mode),
    HoareCase(_on(K.SCHEDULE), "schedule_idempotent", _yes,
              lambda m, s, e, s2: m.step(s2, e) == s2),
    # Transfers
    HoareCase(_on(K.TRANSFER_SAMPLING), "transfer_sampling_copies", _transfer_s_live, _transfer_s_post),
    HoareCase(_on(K.TRANSFER_SAMPLING), "transfer_sampling_idle",
              lambda m, s, e: not _transfer_s_live(m, s, e), _identity),
    HoareCase(_on(K.TRANSFER_QUEUING), "transfer_queuing_moves_head", _transfer_q_room,
              _transfer_q_room_post),
    HoareCase(_on(K.TRANSFER_QUEUING), "transfer_queuing_dest_full", _transfer_full,
              _transfer_q_full_post),
    HoareCase(_on(K.TRANSFER_QUEUING), "transfer_queuing_idle", _transfer_q_idle, _identity),
    HoareCase(_on(K.TRANSFER_SAMPLING, K.TRANSFER_QUEUING), "transfer_frame", _yes, _system_frame),
    # Partition_Action
    HoareCase(_on(K.PARTITION_ACTION), "action_writes_token", _enabled,
              lambda m, s, e, s2: _only_ret(m, s, s2, ("token", e.args[0]))),
    HoareCase(_on(K.PARTITION_ACTION), "action_disabled", _disabled, _identity),
    # Init
    HoareCase(_on(K.INIT), "init_boot_state", _yes, _boot_post, boot=True),
    HoareCase(_on(K.INIT), "init_inert_at_runtime", _yes, _identity),
    # frame conditions shared by all hypercalls
    HoareCase(HYPERCALLS, "hypercall_disabled_stutters", _disabled, _identity),
    HoareCase(HYPERCALLS, "hypercall_frame", _enabled, _hypercall_frame),
    HoareCase(HYPERCALLS, "hypercall_keeps_port_consistent",
              lambda m, s, e: port_consistent(s), lambda m, s, e, s2: port_consistent(s2)),
)

LEMMA2 = "create_sampling_lemma2"


def covered_kinds(cases=CASES) -> set:
    return {k for c in cases for k in c.kinds}


def _events_for(model, kinds) -> list:
    if K.INIT in kinds:
        return [INIT_EVENT]
    return [e for e in model.alphabet if e.kind in kinds]


def run_case(rs, case: HoareCase) -> HoareResult:
    m = rs.model
    events = _events_for(m, case.kinds)
    boot = m.init() if case.boot else None
    checked = 0
    for i, s in enumerate(rs.states):
        for e in events:
            if not case.pre(m, s, e):
                continue
            checked += 1
            s2 = boot if case.boot else m.step(s, e)
            if not case.post(m, s, e, s2):
                return HoareResult(case, False, checked, (i, e))
    return HoareResult(case, True, checked)


def run_hoare_suite(rs, cases=CASES) -> list[HoareResult]:
    return [run_case(rs, c) for c in cases]
