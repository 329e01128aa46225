"""Event vocabulary of the kernel model.

Events are plain hashable tuples so that they can serve as dictionary keys
and be compared structurally.  ``Event.render`` gives the compact textual form
used in traces (``Send_Queuing_Message(1,m0)``) and ``parse_event`` inverts it.
"""

from __future__ import annotations

import re
from enum import Enum
from typing import NamedTuple, Optional


class DomainKind(str, Enum):
    SCHEDULER = "scheduler"
    TRANSMITTER = "transmitter"
    PARTITION = "partition"


class Domain(NamedTuple):
    kind: DomainKind
    part: Optional[int] = None

    def __str__(self) -> str:
        if self.kind is DomainKind.SCHEDULER:
            return "Scheduler"
        if self.kind is DomainKind.TRANSMITTER:
            return "Transmitter"
        return f"partition#{self.part}"


SCHEDULER = Domain(DomainKind.SCHEDULER)
TRANSMITTER = Domain(DomainKind.TRANSMITTER)


def partition(pid: int) -> Domain:
    return Domain(DomainKind.PARTITION, pid)


class EventKind(str, Enum):
    CREATE_SAMPLING_PORT = "Create_Sampling_Port"
    WRITE_SAMPLING_MESSAGE = "Write_Sampling_Message"
    READ_SAMPLING_MESSAGE = "Read_Sampling_Message"
    GET_SAMPLING_PORTID = "Get_Sampling_Portid"
    GET_SAMPLING_PORTSTATUS = "Get_Sampling_Portstatus"
    CREATE_QUEUING_PORT = "Create_Queuing_Port"
    SEND_QUEUING_MESSAGE = "Send_Queuing_Message"
    RECEIVE_QUEUING_MESSAGE = "Receive_Queuing_Message"
    GET_QUEUING_PORTID = "Get_Queuing_Portid"
    GET_QUEUING_PORTSTATUS = "Get_Queuing_Portstatus"
    CLEAR_QUEUING_PORT = "Clear_Queuing_Port"
    SCHEDULE = "Schedule"
    TRANSFER_SAMPLING = "Transfer_Sampling_Message"
    TRANSFER_QUEUING = "Transfer_Queuing_Message"
    PARTITION_ACTION = "Partition_Action"
    INIT = "Init"

    def __str__(self) -> str:
        return self.value


HYPERCALLS = tuple(EventKind)[:11]
NAME_ARG = frozenset({
    EventKind.CREATE_SAMPLING_PORT, EventKind.GET_SAMPLING_PORTID,
    EventKind.CREATE_QUEUING_PORT, EventKind.GET_QUEUING_PORTID,
})
MESSAGE_ARG = frozenset({EventKind.WRITE_SAMPLING_MESSAGE, EventKind.SEND_QUEUING_MESSAGE})


class Event(NamedTuple):
    kind: EventKind
    args: tuple = ()

    @property
    def is_hypercall(self) -> bool:
        return self.kind in HYPERCALLS

    def render(self, names: Optional[dict] = None) -> str:
        """Compact form; ``names`` maps Domain -> display name for Schedule targets."""
        parts = []
        for a in self.args:
            if isinstance(a, Domain):
                parts.append(names.get(a, str(a)) if names else str(a))
            else:
                parts.append(str(a))
        return f"{self.kind.value}({','.join(parts)})"

    def __str__(self) -> str:
        return self.render()


def create_sampling_port(name: str) -> Event:
    return Event(EventKind.CREATE_SAMPLING_PORT, (name,))


def write_sampling_message(port: int, msg: str) -> Event:
    return Event(EventKind.WRITE_SAMPLING_MESSAGE, (port, msg))


def read_sampling_message(port: int) -> Event:
    return Event(EventKind.READ_SAMPLING_MESSAGE, (port,))


def get_sampling_portid(name: str) -> Event:
    return Event(EventKind.GET_SAMPLING_PORTID, (name,))


def get_sampling_portstatus(port: int) -> Event:
    return Event(EventKind.GET_SAMPLING_PORTSTATUS, (port,))


def create_queuing_port(name: str) -> Event:
    return Event(EventKind.CREATE_QUEUING_PORT, (name,))


def send_queuing_message(port: int, msg: str) -> Event:
    return Event(EventKind.SEND_QUEUING_MESSAGE, (port, msg))


def receive_queuing_message(port: int) -> Event:
    return Event(EventKind.RECEIVE_QUEUING_MESSAGE, (port,))


def get_queuing_portid(name: str) -> Event:
    return Event(EventKind.GET_QUEUING_PORTID, (name,))


def get_queuing_portstatus(port: int) -> Event:
    return Event(EventKind.GET_QUEUING_PORTSTATUS, (port,))


def clear_queuing_port(port: int) -> Event:
    return Event(EventKind.CLEAR_QUEUING_PORT, (port,))


def schedule(target: Domain) -> Event:
    return Event(EventKind.SCHEDULE, (target,))


def transfer_sampling(channel: str) -> Event:
    return Event(EventKind.TRANSFER_SAMPLING, (channel,))


def transfer_queuing(channel: str) -> Event:
    return Event(EventKind.TRANSFER_QUEUING, (channel,))


def partition_action(token: str) -> Event:
    return Event(EventKind.PARTITION_ACTION, (token,))


INIT_EVENT = Event(EventKind.INIT)

_EVENT_RE = re.compile(r"^\s*([A-Za-z_]+)\s*\((.*)\)\s*$")


def parse_event(text: str, domains_by_name: dict) -> Event:
    """Inverse of ``Event.render``.  Raises ValueError on malformed text."""
    m = _EVENT_RE.match(text)
    if not m:
        raise ValueError(f"malformed event {text!r}")
    try:
        kind = EventKind(m.group(1))
    except ValueError:
        raise ValueError(f"unknown event kind {m.group(1)!r}") from None
    raw = [a.strip() for a in m.group(2).split(",")] if m.group(2).strip() else []
    if kind is EventKind.INIT:
        expected = 0
    elif kind in MESSAGE_ARG:
        expected = 2
    else:
        expected = 1
    if len(raw) != expected:
        raise ValueError(f"{kind.value} takes {expected} argument(s), got {len(raw)}")
    if kind is EventKind.SCHEDULE:
        if raw[0] not in domains_by_name:
            raise ValueError(f"unknown domain {raw[0]!r}")
        return schedule(domains_by_name[raw[0]])
    if kind in NAME_ARG or kind in (EventKind.TRANSFER_SAMPLING, EventKind.TRANSFER_QUEUING,
                                    EventKind.PARTITION_ACTION):
        return Event(kind, (raw[0],))
    if kind is EventKind.INIT:
        return INIT_EVENT
    args = [int(raw[0])] + raw[1:]
    return Event(kind, tuple(args))
