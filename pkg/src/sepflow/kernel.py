"""Deterministic kernel state machine.

States are nested NamedTuples with maps stored as key-sorted tuples of pairs,
so equality and hashing are structural and iteration order is canonical.
Every event semantics is a total function ``State -> State``; a hypercall
reports its outcome by overwriting the caller's return register.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Iterable, NamedTuple, Optional

from .config import Direction, Mode, PortIdStrategy, SysConfig
from .events import (
    SCHEDULER,
    TRANSMITTER,
    Domain,
    DomainKind,
    Event,
    EventKind,
    partition,
)


class PartMode(str, Enum):
    IDLE = "IDLE"
    NORMAL = "NORMAL"


class SendMode(str, Enum):
    ARINC_STATUS = "ArincStatus"
    MAY_LOST = "MayLost"


class TransferMode(str, Enum):
    ARINC_NO_LOSS = "ArincNoLoss"
    MAY_LOST = "MayLost"


@dataclass(frozen=True)
class SemanticsVariant:
    send_mode: SendMode
    transfer_mode: TransferMode

    @property
    def name(self) -> str:
        for k, v in VARIANTS.items():
            if v == self:
                return k
        return f"{self.send_mode.value}/{self.transfer_mode.value}"


ARINC = SemanticsVariant(SendMode.ARINC_STATUS, TransferMode.ARINC_NO_LOSS)
FIXED = SemanticsVariant(SendMode.MAY_LOST, TransferMode.MAY_LOST)
VARIANTS = {"arinc": ARINC, "fixed": FIXED}


# Return-register values.  Tagged pairs keep e.g. a port id and a message count apart.
RET = "ret"
FAILED = ("code", "FAILED")
SUCCESS = ("code", "SUCCESS")
NO_ERROR = ("code", "NO_ERROR")
NOT_AVAILABLE = ("code", "NOT_AVAILABLE")
EXISTS = ("status", "EXISTS")
VALID = ("status", "VALID")
EMPTY = ("status", "EMPTY")


def port_id_ret(i: int) -> tuple:
    return ("port_id", i)


def msg_ret(m: Optional[str]) -> tuple:
    return ("msg", m)


def count_ret(n: int) -> tuple:
    return ("count", n)


class PortState(NamedTuple):
    mode: Mode
    sampling_msg: Optional[str] = None
    queue: tuple = ()


class CommState(NamedTuple):
    created: frozenset
    ports: tuple          # ((port_id, PortState), ...) sorted by id
    port_owner: tuple     # ((port_id, partition id), ...) sorted by id
    ids_by_name: tuple    # ((name, port_id), ...) sorted by name


class State(NamedTuple):
    current: Domain
    part_mode: tuple      # ((partition id, PartMode), ...)
    comm: CommState
    stores: tuple         # LocalStore per domain, aligned with cfg.domains
    next_port_id: Optional[int] = None

    def store(self, cfg: SysConfig, d: Domain) -> tuple:
        return self.stores[cfg.domains.index(d)]


def lookup(pairs: tuple, key, default=None):
    for k, v in pairs:
        if k == key:
            return v
    return default


def assoc(pairs: tuple, key, value) -> tuple:
    out = [(k, v) for k, v in pairs if k != key]
    out.append((key, value))
    out.sort(key=lambda kv: kv[0])
    return tuple(out)


def port_name_of(s: State, port_id: int) -> Optional[str]:
    for name, i in s.comm.ids_by_name:
        if i == port_id:
            return name
    return None


def port_id_of(s: State, name: str) -> Optional[int]:
    return lookup(s.comm.ids_by_name, name)


def port_state(s: State, port_id: int) -> Optional[PortState]:
    return lookup(s.comm.ports, port_id)


def port_state_by_name(s: State, name: str) -> Optional[PortState]:
    i = port_id_of(s, name)
    return None if i is None else port_state(s, i)


# ---------------------------------------------------------------------------
# boot, domains, enabledness

def init(cfg: SysConfig) -> State:
    pids = sorted(cfg.partition_ids)
    if cfg.portid_strategy is PortIdStrategy.STATIC:
        ports = tuple(sorted((p.static_id, PortState(p.mode)) for p in cfg.ports))
        owner = tuple(sorted((p.static_id, p.owner) for p in cfg.ports))
        names = tuple(sorted((p.name, p.static_id) for p in cfg.ports))
        comm = CommState(frozenset(p.static_id for p in cfg.ports), ports, owner, names)
        nxt = None
    else:
        comm = CommState(frozenset(), (), (), ())
        nxt = 1
    return State(
        current=partition(pids[0]),
        part_mode=tuple((pid, PartMode.NORMAL) for pid in pids),
        comm=comm,
        stores=tuple(() for _ in cfg.domains),
        next_port_id=nxt,
    )


def domain_of_event(s: State, e: Event) -> Domain:
    k = e.kind
    if k is EventKind.SCHEDULE or k is EventKind.INIT:
        return SCHEDULER
    if k is EventKind.TRANSFER_SAMPLING or k is EventKind.TRANSFER_QUEUING:
        return TRANSMITTER
    return s.current


def _valid_target(cfg: SysConfig, d: Domain) -> bool:
    return d == TRANSMITTER or (d.kind is DomainKind.PARTITION and d.part in cfg.partition_ids)


def event_enabled(cfg: SysConfig, s: State, e: Event) -> bool:
    k = e.kind
    if k is EventKind.SCHEDULE:
        return _valid_target(cfg, e.args[0])
    if k is EventKind.INIT:
        return False
    if k is EventKind.TRANSFER_SAMPLING or k is EventKind.TRANSFER_QUEUING:
        return s.current == TRANSMITTER
    cur = s.current
    return cur.kind is DomainKind.PARTITION and lookup(s.part_mode, cur.part) is PartMode.NORMAL


# ---------------------------------------------------------------------------
# helpers shared by hypercalls

def _set_ret(cfg: SysConfig, s: State, value, comm: Optional[CommState] = None,
             next_port_id=None) -> State:
    i = cfg.domains.index(s.current)
    stores = s.stores[:i] + (((RET, value),),) + s.stores[i + 1:]
    return State(s.current, s.part_mode, s.comm if comm is None else comm, stores,
                 s.next_port_id if next_port_id is None else next_port_id)


def _owned_port(cfg: SysConfig, s: State, port_id, mode: Mode, direction: Optional[Direction]):
    """Config and runtime state of ``port_id`` if it is created, of ``mode`` and owned by the caller."""
    if port_id not in s.comm.created:
        return None, None
    name = port_name_of(s, port_id)
    pc = cfg.port(name) if name is not None else None
    if pc is None or pc.mode is not mode or pc.owner != s.current.part:
        return None, None
    if direction is not None and pc.direction is not direction:
        return None, None
    if lookup(s.comm.port_owner, port_id) != s.current.part:
        return None, None
    return pc, port_state(s, port_id)


def _with_port(s: State, port_id: int, ps: PortState) -> CommState:
    c = s.comm
    return CommState(c.created, assoc(c.ports, port_id, ps), c.port_owner, c.ids_by_name)


def _capacity(cfg: SysConfig, s: State, port_id: int) -> int:
    return cfg.capacity_of(port_name_of(s, port_id))


# ---------------------------------------------------------------------------
# hypercalls

def _create_port(cfg: SysConfig, s: State, name: str, mode: Mode) -> State:
    pc = cfg.port(name)
    if (pc is None or pc.mode is not mode or pc.owner != s.current.part
            or port_id_of(s, name) is not None):
        return _set_ret(cfg, s, FAILED)
    if cfg.portid_strategy is PortIdStrategy.STATIC:
        new_id, nxt = pc.static_id, None
    else:
        new_id, nxt = s.next_port_id, s.next_port_id + 1
    c = s.comm
    comm = CommState(
        c.created | {new_id},
        assoc(c.ports, new_id, PortState(mode)),
        assoc(c.port_owner, new_id, pc.owner),
        assoc(c.ids_by_name, name, new_id),
    )
    return _set_ret(cfg, s, port_id_ret(new_id), comm, nxt)


def create_sampling_port(cfg: SysConfig, s: State, name: str) -> State:
    return _create_port(cfg, s, name, Mode.SAMPLING)


def create_queuing_port(cfg: SysConfig, s: State, name: str) -> State:
    return _create_port(cfg, s, name, Mode.QUEUING)


def write_sampling_message(cfg: SysConfig, s: State, port_id: int, m: str) -> State:
    pc, ps = _owned_port(cfg, s, port_id, Mode.SAMPLING, Direction.SOURCE)
    if pc is None:
        return _set_ret(cfg, s, FAILED)
    return _set_ret(cfg, s, SUCCESS, _with_port(s, port_id, ps._replace(sampling_msg=m)))


def read_sampling_message(cfg: SysConfig, s: State, port_id: int) -> State:
    pc, ps = _owned_port(cfg, s, port_id, Mode.SAMPLING, Direction.DESTINATION)
    if pc is None:
        return _set_ret(cfg, s, FAILED)
    return _set_ret(cfg, s, msg_ret(ps.sampling_msg))


def _get_portid(cfg: SysConfig, s: State, name: str, mode: Mode) -> State:
    pc = cfg.port(name)
    i = port_id_of(s, name)
    if pc is None or pc.mode is not mode or pc.owner != s.current.part or i is None:
        return _set_ret(cfg, s, FAILED)
    return _set_ret(cfg, s, port_id_ret(i))


def get_sampling_portid(cfg: SysConfig, s: State, name: str) -> State:
    return _get_portid(cfg, s, name, Mode.SAMPLING)


def get_queuing_portid(cfg: SysConfig, s: State, name: str) -> State:
    return _get_portid(cfg, s, name, Mode.QUEUING)


def get_sampling_portstatus(cfg: SysConfig, s: State, port_id: int) -> State:
    pc, ps = _owned_port(cfg, s, port_id, Mode.SAMPLING, None)
    if pc is None:
        return _set_ret(cfg, s, FAILED)
    if pc.direction is Direction.SOURCE:
        # like queuing sources: the slot lies outside the owner's view
        return _set_ret(cfg, s, EXISTS)
    return _set_ret(cfg, s, EMPTY if ps.sampling_msg is None else VALID)


def get_queuing_portstatus(cfg: SysConfig, s: State, port_id: int) -> State:
    pc, ps = _owned_port(cfg, s, port_id, Mode.QUEUING, None)
    if pc is None:
        return _set_ret(cfg, s, FAILED)
    if pc.direction is Direction.SOURCE:
        # a sender's buffer is drained by the transmitter, so no count is exposed
        return _set_ret(cfg, s, EXISTS)
    return _set_ret(cfg, s, count_ret(len(ps.queue)))


def send_queuing_message(cfg: SysConfig, s: State, port_id: int, m: str,
                         mode: SendMode = SendMode.MAY_LOST) -> State:
    pc, ps = _owned_port(cfg, s, port_id, Mode.QUEUING, Direction.SOURCE)
    if pc is None:
        return _set_ret(cfg, s, FAILED)
    full = len(ps.queue) >= _capacity(cfg, s, port_id)
    if mode is SendMode.MAY_LOST:
        if full:
            return _set_ret(cfg, s, SUCCESS)
        return _set_ret(cfg, s, SUCCESS, _with_port(s, port_id, ps._replace(queue=ps.queue + (m,))))
    if full:
        return _set_ret(cfg, s, NOT_AVAILABLE)
    return _set_ret(cfg, s, NO_ERROR, _with_port(s, port_id, ps._replace(queue=ps.queue + (m,))))


def receive_queuing_message(cfg: SysConfig, s: State, port_id: int) -> State:
    pc, ps = _owned_port(cfg, s, port_id, Mode.QUEUING, Direction.DESTINATION)
    if pc is None:
        return _set_ret(cfg, s, FAILED)
    if not ps.queue:
        return _set_ret(cfg, s, msg_ret(None))
    head = ps.queue[0]
    return _set_ret(cfg, s, msg_ret(head), _with_port(s, port_id, ps._replace(queue=ps.queue[1:])))


def clear_queuing_port(cfg: SysConfig, s: State, port_id: int) -> State:
    pc, ps = _owned_port(cfg, s, port_id, Mode.QUEUING, Direction.DESTINATION)
    if pc is None:
        return _set_ret(cfg, s, FAILED)
    if not ps.queue:
        return _set_ret(cfg, s, SUCCESS)
    return _set_ret(cfg, s, SUCCESS, _with_port(s, port_id, ps._replace(queue=())))


# ---------------------------------------------------------------------------
# system events

def schedule(s: State, target: Domain) -> State:
    return s._replace(current=target)


def transfer_sampling(cfg: SysConfig, s: State, channel: str) -> State:
    c = cfg.channel(channel)
    if c is None or c.mode is not Mode.SAMPLING:
        return s
    ids = [port_id_of(s, n) for n in (c.source,) + c.destinations]
    if any(i is None for i in ids):
        return s
    msg = port_state(s, ids[0]).sampling_msg
    if msg is None:
        return s
    comm = s.comm
    for i in ids[1:]:
        ps = lookup(comm.ports, i)
        comm = comm._replace(ports=assoc(comm.ports, i, ps._replace(sampling_msg=msg)))
    return s._replace(comm=comm)


def transfer_queuing(cfg: SysConfig, s: State, channel: str,
                     mode: TransferMode = TransferMode.MAY_LOST) -> State:
    c = cfg.channel(channel)
    if c is None or c.mode is not Mode.QUEUING:
        return s
    sp, dp = port_id_of(s, c.source), port_id_of(s, c.destinations[0])
    if sp is None or dp is None:
        return s
    src, dst = port_state(s, sp), port_state(s, dp)
    if not src.queue:
        return s
    full = len(dst.queue) >= c.capacity
    if mode is TransferMode.ARINC_NO_LOSS and full:
        return s
    head = src.queue[0]
    comm = s.comm._replace(ports=assoc(s.comm.ports, sp, src._replace(queue=src.queue[1:])))
    if not full:
        comm = comm._replace(ports=assoc(comm.ports, dp, dst._replace(queue=dst.queue + (head,))))
    return s._replace(comm=comm)


def partition_action(cfg: SysConfig, s: State, token: str) -> State:
    return _set_ret(cfg, s, ("token", token))


# ---------------------------------------------------------------------------
# dispatch

def exec_event(cfg: SysConfig, s: State, e: Event, variant: SemanticsVariant = FIXED) -> State:
    if not event_enabled(cfg, s, e):
        return s
    k, a = e.kind, e.args
    if k is EventKind.SCHEDULE:
        return schedule(s, a[0])
    if k is EventKind.SEND_QUEUING_MESSAGE:
        return send_queuing_message(cfg, s, a[0], a[1], variant.send_mode)
    if k is EventKind.TRANSFER_QUEUING:
        return transfer_queuing(cfg, s, a[0], variant.transfer_mode)
    return _HANDLERS[k](cfg, s, *a)


_HANDLERS = {
    EventKind.CREATE_SAMPLING_PORT: create_sampling_port,
    EventKind.WRITE_SAMPLING_MESSAGE: write_sampling_message,
    EventKind.READ_SAMPLING_MESSAGE: read_sampling_message,
    EventKind.GET_SAMPLING_PORTID: get_sampling_portid,
    EventKind.GET_SAMPLING_PORTSTATUS: get_sampling_portstatus,
    EventKind.CREATE_QUEUING_PORT: create_queuing_port,
    EventKind.RECEIVE_QUEUING_MESSAGE: receive_queuing_message,
    EventKind.GET_QUEUING_PORTID: get_queuing_portid,
    EventKind.GET_QUEUING_PORTSTATUS: get_queuing_portstatus,
    EventKind.CLEAR_QUEUING_PORT: clear_queuing_port,
    EventKind.TRANSFER_SAMPLING: transfer_sampling,
    EventKind.PARTITION_ACTION: partition_action,
}


def execute(cfg: SysConfig, events: Iterable[Event], s: State,
            variant: SemanticsVariant = FIXED) -> State:
    for e in events:
        s = exec_event(cfg, s, e, variant)
    return s


# ---------------------------------------------------------------------------
# invariants

def port_consistent(s: State) -> bool:
    c = s.comm
    return (c.created == frozenset(k for k, _ in c.ports) == frozenset(k for k, _ in c.port_owner)
            and len({i for _, i in c.ids_by_name}) == len(c.ids_by_name)
            and {i for _, i in c.ids_by_name} <= c.created)


def invariant_failures(cfg: SysConfig, s: State) -> list[str]:
    """Names of the state invariants violated by ``s`` (empty when all hold)."""
    bad = []
    if not port_consistent(s):
        bad.append("port_consistent")
    for pid, ps in s.comm.ports:
        name = port_name_of(s, pid)
        if ps.mode is Mode.QUEUING and name is not None and len(ps.queue) > cfg.capacity_of(name):
            bad.append(f"capacity:{name}")
    if len(s.stores) != len(cfg.domains):
        bad.append("locals_complete")
    if not _valid_target(cfg, s.current):
        bad.append("current_schedulable")
    return bad
