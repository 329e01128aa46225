"""Per-domain observation model.

``view(cfg, s, d)`` projects a state onto what domain ``d`` can observe; two
states are equivalent for ``d`` exactly when their views are equal.  Views are
tuples of ``(component, value)`` pairs so a mismatch can be reported by name.

Partitions see their own register, mode, created ports and the full contents
of their destination buffers, but not their source buffers (the transmitter
drains those).  The transmitter sees the created-port table and every source
buffer; with ``TransmitterView.FULL`` it also sees destination buffers.
"""

from __future__ import annotations

from enum import Enum
from typing import Iterable, Optional

from .config import Direction, Mode, SysConfig
from .events import SCHEDULER, TRANSMITTER, Domain
from .kernel import State, lookup, port_id_of, port_state


class TransmitterView(str, Enum):
    SOURCE_ONLY = "source-only"
    FULL = "full"


def _content(ps) -> object:
    if ps is None:
        return None
    return ps.sampling_msg if ps.mode is Mode.SAMPLING else ps.queue


def view(cfg: SysConfig, s: State, d: Domain,
         transmitter_view: TransmitterView = TransmitterView.SOURCE_ONLY) -> tuple:
    store = s.stores[cfg.domains.index(d)]
    if d == SCHEDULER:
        return (("locals", store), ("current", s.current))
    if d == TRANSMITTER:
        created = tuple((n, i) for n, i in s.comm.ids_by_name)
        wanted = (Direction.SOURCE,) if transmitter_view is TransmitterView.SOURCE_ONLY \
            else (Direction.SOURCE, Direction.DESTINATION)
        buffers = []
        for p in cfg.ports:
            if p.direction in wanted and cfg.channel_of_port(p.name) is not None:
                i = port_id_of(s, p.name)
                if i is not None:
                    buffers.append((p.name, _content(port_state(s, i))))
        return (("locals", store), ("created", created), ("buffers", tuple(buffers)))
    pid = d.part
    own = []
    dest = []
    for p in cfg.ports:
        if p.owner != pid:
            continue
        i = port_id_of(s, p.name)
        if i is None:
            continue
        own.append((p.name, i))
        if p.direction is Direction.DESTINATION:
            dest.append((p.name, _content(port_state(s, i))))
    return (("locals", store), ("mode", lookup(s.part_mode, pid)),
            ("ports", tuple(own)), ("buffers", tuple(dest)))


def vpeq(cfg: SysConfig, s: State, d: Domain, t: State,
         transmitter_view: TransmitterView = TransmitterView.SOURCE_ONLY) -> bool:
    return view(cfg, s, d, transmitter_view) == view(cfg, t, d, transmitter_view)


def vpeq_set(cfg: SysConfig, s: State, ds: Iterable[Domain], t: State,
             transmitter_view: TransmitterView = TransmitterView.SOURCE_ONLY) -> bool:
    return all(vpeq(cfg, s, d, t, transmitter_view) for d in ds)


def view_diff(cfg: SysConfig, s: State, d: Domain, t: State,
              transmitter_view: TransmitterView = TransmitterView.SOURCE_ONLY) -> Optional[tuple]:
    """First differing view component as ``(name, value_in_s, value_in_t)``, or None."""
    for (name, a), (_, b) in zip(view(cfg, s, d, transmitter_view), view(cfg, t, d, transmitter_view)):
        if a != b:
            return name, a, b
    return None
