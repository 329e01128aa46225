"""Static system configuration, its concrete syntax, and the derived policy.

Config file format (one declaration per line, ``#`` starts a comment)::

    partition <id> <name>
    samplingchannel <name> source=<part>.<port> dest=<part>.<port>[,<part>.<port>...]
    queuingchannel <name> source=<part>.<port> dest=<part>.<port> [capacity=<n>]
    messages <k>
    portids static|counter

``<part>`` is a partition id or name.  A port reference may carry an explicit
static identifier as ``<part>.<port>:<id>``; ports without one are numbered
from 1 in order of appearance, skipping identifiers already taken.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Iterable, Optional

from .events import (
    SCHEDULER,
    TRANSMITTER,
    Domain,
    Event,
    EventKind,
    MESSAGE_ARG,
    NAME_ARG,
    HYPERCALLS,
    partition,
    partition_action,
    schedule,
    transfer_queuing,
    transfer_sampling,
)


class ConfigError(ValueError):
    pass


class Mode(str, Enum):
    SAMPLING = "sampling"
    QUEUING = "queuing"


class Direction(str, Enum):
    SOURCE = "source"
    DESTINATION = "destination"


class PortIdStrategy(str, Enum):
    STATIC = "static"
    COUNTER = "counter"


@dataclass(frozen=True)
class PortConf:
    name: str
    mode: Mode
    direction: Direction
    owner: int
    static_id: Optional[int] = None


@dataclass(frozen=True)
class ChannelConf:
    name: str
    mode: Mode
    source: str
    destinations: tuple[str, ...]
    capacity: int = 1


@dataclass(frozen=True)
class SysConfig:
    partitions: tuple[tuple[int, str], ...]
    channels: tuple[ChannelConf, ...] = ()
    ports: tuple[PortConf, ...] = ()
    message_alphabet_size: int = 2
    portid_strategy: PortIdStrategy = PortIdStrategy.STATIC
    default_capacity: int = 1
    _port_index: dict = field(default=None, init=False, repr=False, compare=False, hash=False)
    _domains: tuple = field(default=(), init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        object.__setattr__(self, "_port_index", {p.name: p for p in self.ports})
        doms = (SCHEDULER, TRANSMITTER) + tuple(partition(pid) for pid in sorted(self.partition_ids))
        object.__setattr__(self, "_domains", doms)

    @property
    def partition_ids(self) -> tuple[int, ...]:
        return tuple(pid for pid, _ in self.partitions)

    @property
    def domains(self) -> tuple[Domain, ...]:
        """Scheduler, transmitter, then partitions in id order.  Fixes domain indices."""
        return self._domains

    @property
    def messages(self) -> tuple[str, ...]:
        return tuple(f"m{i}" for i in range(self.message_alphabet_size))

    def port(self, name: str) -> Optional[PortConf]:
        return self._port_index.get(name)

    def ports_of(self, pid: int) -> tuple[PortConf, ...]:
        return tuple(p for p in self.ports if p.owner == pid)

    def channel(self, name: str) -> Optional[ChannelConf]:
        for c in self.channels:
            if c.name == name:
                return c
        return None

    def channel_of_port(self, port_name: str) -> Optional[ChannelConf]:
        for c in self.channels:
            if c.source == port_name or port_name in c.destinations:
                return c
        return None

    def capacity_of(self, port_name: str) -> int:
        c = self.channel_of_port(port_name)
        return c.capacity if c is not None else self.default_capacity

    def domain_name(self, d: Domain) -> str:
        if d.part is None:
            return str(d)
        for pid, name in self.partitions:
            if pid == d.part:
                return name
        return str(d)

    def domain_names(self) -> dict[Domain, str]:
        return {d: self.domain_name(d) for d in self.domains}

    def domains_by_name(self) -> dict[str, Domain]:
        out = {self.domain_name(d): d for d in self.domains}
        for pid in self.partition_ids:
            out.setdefault(str(pid), partition(pid))
        return out

    def port_ids(self) -> tuple[int, ...]:
        """Identifiers a port can carry under the active strategy."""
        if self.portid_strategy is PortIdStrategy.STATIC:
            return tuple(sorted(p.static_id for p in self.ports))
        return tuple(range(1, len(self.ports) + 1))

    def with_strategy(self, strategy: PortIdStrategy) -> "SysConfig":
        return replace(self, portid_strategy=strategy)


@dataclass(frozen=True)
class Policy:
    interferes: frozenset

    def allows(self, u: Domain, v: Domain) -> bool:
        return (u, v) in self.interferes


def derive_policy(cfg: SysConfig) -> Policy:
    pairs = set()
    for d in cfg.domains:
        pairs.add((d, d))
        pairs.add((SCHEDULER, d))
    for c in cfg.channels:
        src = cfg.port(c.source)
        pairs.add((partition(src.owner), TRANSMITTER))
        for dn in c.destinations:
            pairs.add((TRANSMITTER, partition(cfg.port(dn).owner)))
    return Policy(frozenset(pairs))


def instantiate_alphabet(cfg: SysConfig) -> tuple[Event, ...]:
    """Every concrete runtime event of the configuration, in a fixed order.

    Init is boot-only and therefore not part of the alphabet.
    """
    names = [p.name for p in cfg.ports]
    ids = cfg.port_ids()
    out: list[Event] = []
    for kind in HYPERCALLS:
        if kind in NAME_ARG:
            out.extend(Event(kind, (n,)) for n in names)
        elif kind in MESSAGE_ARG:
            out.extend(Event(kind, (i, m)) for i in ids for m in cfg.messages)
        else:
            out.extend(Event(kind, (i,)) for i in ids)
    for pid in sorted(cfg.partition_ids):
        out.append(schedule(partition(pid)))
    out.append(schedule(TRANSMITTER))
    for c in cfg.channels:
        out.append(transfer_sampling(c.name) if c.mode is Mode.SAMPLING else transfer_queuing(c.name))
    for pid, name in sorted(cfg.partitions):
        out.append(partition_action(f"act_{name}"))
    return tuple(out)


# ---------------------------------------------------------------------------
# parsing

def _parse_int(tok: str, what: str, lineno: int) -> int:
    try:
        return int(tok)
    except ValueError:
        raise ConfigError(f"line {lineno}: {what} must be an integer, got {tok!r}") from None


def _split_ref(ref: str, lineno: int) -> tuple[str, str, Optional[int]]:
    sid = None
    if ":" in ref:
        ref, raw = ref.rsplit(":", 1)
        sid = _parse_int(raw, "port id", lineno)
        if sid < 1:
            raise ConfigError(f"line {lineno}: port id must be positive")
    if "." not in ref:
        raise ConfigError(f"line {lineno}: port reference {ref!r} must be <part>.<port>")
    part, port = ref.split(".", 1)
    if not part or not port:
        raise ConfigError(f"line {lineno}: port reference {ref!r} must be <part>.<port>")
    return part, port, sid


def parse_config(text: str) -> SysConfig:
    partitions: list[tuple[int, str, int]] = []
    raw_channels: list[tuple[int, str, Mode, dict]] = []
    messages = 2
    strategy = PortIdStrategy.STATIC
    seen_keys: set[str] = set()

    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        toks = line.split()
        key = toks[0]
        if key == "partition":
            if len(toks) != 3:
                raise ConfigError(f"line {lineno}: expected 'partition <id> <name>'")
            pid = _parse_int(toks[1], "partition id", lineno)
            if pid < 0:
                raise ConfigError(f"line {lineno}: partition id must be a natural number")
            partitions.append((pid, toks[2], lineno))
        elif key in ("samplingchannel", "queuingchannel"):
            if len(toks) < 3:
                raise ConfigError(f"line {lineno}: channel needs a name and source=/dest=")
            opts: dict[str, str] = {}
            for kv in toks[2:]:
                if "=" not in kv:
                    raise ConfigError(f"line {lineno}: expected key=value, got {kv!r}")
                k, v = kv.split("=", 1)
                allowed = {"source", "dest"} | ({"capacity"} if key == "queuingchannel" else set())
                if k not in allowed:
                    raise ConfigError(f"line {lineno}: unknown key {k!r}")
                if k in opts:
                    raise ConfigError(f"line {lineno}: duplicate key {k!r}")
                opts[k] = v
            for k in ("source", "dest"):
                if k not in opts:
                    raise ConfigError(f"line {lineno}: missing {k}=")
            mode = Mode.SAMPLING if key == "samplingchannel" else Mode.QUEUING
            raw_channels.append((lineno, toks[1], mode, opts))
        elif key == "messages":
            if len(toks) != 2:
                raise ConfigError(f"line {lineno}: expected 'messages <k>'")
            messages = _parse_int(toks[1], "message count", lineno)
            if messages < 1:
                raise ConfigError(f"line {lineno}: message alphabet must be positive")
        elif key == "portids":
            if len(toks) != 2 or toks[1] not in ("static", "counter"):
                raise ConfigError(f"line {lineno}: expected 'portids static|counter'")
            strategy = PortIdStrategy(toks[1])
        else:
            raise ConfigError(f"line {lineno}: unknown declaration {key!r}")
        if key in ("messages", "portids"):
            if key in seen_keys:
                raise ConfigError(f"line {lineno}: duplicate {key!r} declaration")
            seen_keys.add(key)

    if not partitions:
        raise ConfigError("no partitions")
    by_id: dict[int, str] = {}
    by_name: dict[str, int] = {}
    for pid, name, lineno in partitions:
        if pid in by_id:
            raise ConfigError(f"line {lineno}: duplicate partition id {pid}")
        if name in by_name or name in ("Scheduler", "Transmitter"):
            raise ConfigError(f"line {lineno}: duplicate or reserved partition name {name!r}")
        by_id[pid] = name
        by_name[name] = pid

    def resolve_part(tok: str, lineno: int) -> int:
        if tok in by_name:
            return by_name[tok]
        if tok.isdigit() and int(tok) in by_id:
            return int(tok)
        raise ConfigError(f"line {lineno}: unknown partition {tok!r}")

    ports: list[dict] = []
    port_names: set[str] = set()
    channels: list[ChannelConf] = []
    channel_names: set[str] = set()
    for lineno, cname, mode, opts in raw_channels:
        if cname in channel_names:
            raise ConfigError(f"line {lineno}: duplicate channel {cname!r}")
        channel_names.add(cname)
        capacity = 1
        if "capacity" in opts:
            capacity = _parse_int(opts["capacity"], "capacity", lineno)
            if capacity < 1:
                raise ConfigError(f"line {lineno}: capacity must be >= 1")
        dests = [d for d in opts["dest"].split(",")]
        if any(not d for d in dests):
            raise ConfigError(f"line {lineno}: empty destination")
        if mode is Mode.QUEUING and len(dests) != 1:
            raise ConfigError(f"line {lineno}: queuing channel {cname!r} must have exactly one destination")
        refs = [(opts["source"], Direction.SOURCE)] + [(d, Direction.DESTINATION) for d in dests]
        owners = []
        names = []
        for ref, direction in refs:
            part, pname, sid = _split_ref(ref, lineno)
            owner = resolve_part(part, lineno)
            if pname in port_names:
                raise ConfigError(f"line {lineno}: duplicate port name {pname!r}")
            port_names.add(pname)
            ports.append(dict(name=pname, mode=mode, direction=direction, owner=owner,
                              static_id=sid, lineno=lineno))
            owners.append(owner)
            names.append(pname)
        if owners[0] in owners[1:]:
            raise ConfigError(f"line {lineno}: channel {cname!r} connects partition "
                              f"{by_id[owners[0]]!r} to itself")
        channels.append(ChannelConf(cname, mode, names[0], tuple(names[1:]), capacity))

    used: set[int] = set()
    for p in ports:
        if p["static_id"] is not None:
            if p["static_id"] in used:
                raise ConfigError(f"line {p['lineno']}: duplicate static port id {p['static_id']}")
            used.add(p["static_id"])
    nxt = 1
    for p in ports:
        if p["static_id"] is None:
            while nxt in used:
                nxt += 1
            p["static_id"] = nxt
            used.add(nxt)

    port_confs = tuple(PortConf(p["name"], p["mode"], p["direction"], p["owner"], p["static_id"])
                       for p in ports)
    return SysConfig(
        partitions=tuple(sorted((pid, name) for pid, name, _ in partitions)),
        channels=tuple(channels),
        ports=port_confs,
        message_alphabet_size=messages,
        portid_strategy=strategy,
    )


def render_config(cfg: SysConfig) -> str:
    lines = [f"partition {pid} {name}" for pid, name in cfg.partitions]
    names = dict(cfg.partitions)

    def ref(pname: str) -> str:
        p = cfg.port(pname)
        return f"{names[p.owner]}.{p.name}:{p.static_id}"

    for c in cfg.channels:
        dest = ",".join(ref(d) for d in c.destinations)
        if c.mode is Mode.SAMPLING:
            lines.append(f"samplingchannel {c.name} source={ref(c.source)} dest={dest}")
        else:
            lines.append(f"queuingchannel {c.name} source={ref(c.source)} dest={dest} capacity={c.capacity}")
    lines.append(f"messages {cfg.message_alphabet_size}")
    lines.append(f"portids {cfg.portid_strategy.value}")
    return "\n".join(lines) + "\n"


def load_config(path) -> SysConfig:
    with open(path, encoding="utf-8") as f:
        return parse_config(f.read())


def config_from_parts(partitions: Iterable[tuple[int, str]],
                      channels: Iterable[tuple[str, Mode, tuple, tuple, int]] = (),
                      messages: int = 2,
                      strategy: PortIdStrategy = PortIdStrategy.STATIC) -> SysConfig:
    """Build a config programmatically: channels are (name, mode, (part, port), [(part, port)...], capacity)."""
    names = dict(partitions)
    lines = [f"partition {pid} {name}" for pid, name in partitions]
    for cname, mode, src, dests, cap in channels:
        d = ",".join(f"{names[p]}.{n}" for p, n in dests)
        s = f"{names[src[0]]}.{src[1]}"
        if mode is Mode.SAMPLING:
            lines.append(f"samplingchannel {cname} source={s} dest={d}")
        else:
            lines.append(f"queuingchannel {cname} source={s} dest={d} capacity={cap}")
    lines.append(f"messages {messages}")
    lines.append(f"portids {strategy.value}")
    return parse_config("\n".join(lines))
