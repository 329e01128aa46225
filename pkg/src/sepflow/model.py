"""A configured model: config, semantics variant and observation mode bundled together."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional

from .config import Policy, PortIdStrategy, SysConfig, derive_policy, instantiate_alphabet
from .equivalence import TransmitterView, view, view_diff, vpeq, vpeq_set
from .events import Domain, Event
from .kernel import (FIXED, SemanticsVariant, State, domain_of_event, event_enabled, exec_event,
                     execute, init)


@dataclass(frozen=True)
class Model:
    cfg: SysConfig
    variant: SemanticsVariant = FIXED
    transmitter_view: TransmitterView = TransmitterView.SOURCE_ONLY
    alphabet: tuple = None
    policy: Policy = field(default=None, compare=False)

    def __post_init__(self):
        if self.alphabet is None:
            object.__setattr__(self, "alphabet", instantiate_alphabet(self.cfg))
        if self.policy is None:
            object.__setattr__(self, "policy", derive_policy(self.cfg))

    @property
    def domains(self) -> tuple[Domain, ...]:
        return self.cfg.domains

    @property
    def describe(self) -> dict:
        return {
            "semantics": self.variant.name,
            "portids": self.cfg.portid_strategy.value,
            "transmitter_view": self.transmitter_view.value,
        }

    def init(self) -> State:
        return init(self.cfg)

    def enabled(self, s: State, e: Event) -> bool:
        return event_enabled(self.cfg, s, e)

    def step(self, s: State, e: Event) -> State:
        return exec_event(self.cfg, s, e, self.variant)

    def run(self, events: Iterable[Event], s: Optional[State] = None) -> State:
        return execute(self.cfg, events, self.init() if s is None else s, self.variant)

    def dom(self, s: State, e: Event) -> Domain:
        return domain_of_event(s, e)

    def allows(self, u: Domain, v: Domain) -> bool:
        return self.policy.allows(u, v)

    def view(self, s: State, d: Domain) -> tuple:
        return view(self.cfg, s, d, self.transmitter_view)

    def vpeq(self, s: State, d: Domain, t: State) -> bool:
        return vpeq(self.cfg, s, d, t, self.transmitter_view)

    def vpeq_set(self, s: State, ds, t: State) -> bool:
        return vpeq_set(self.cfg, s, ds, t, self.transmitter_view)

    def diff(self, s: State, d: Domain, t: State):
        return view_diff(self.cfg, s, d, t, self.transmitter_view)

    def name(self, d: Domain) -> str:
        return self.cfg.domain_name(d)

    def render(self, e: Event) -> str:
        return e.render(self.cfg.domain_names())

    def trace(self, events: Iterable[Event], s: Optional[State] = None) -> list[str]:
        """``Domain: Event`` lines for ``events`` executed from ``s`` (default: init)."""
        s = self.init() if s is None else s
        out = []
        for e in events:
            out.append(f"{self.name(self.dom(s, e))}: {self.render(e)}")
            s = self.step(s, e)
        return out


def build_model(cfg: SysConfig, variant: SemanticsVariant = FIXED,
                portids: Optional[PortIdStrategy] = None,
                transmitter_view: TransmitterView = TransmitterView.SOURCE_ONLY,
                alphabet: Optional[tuple] = None) -> Model:
    if portids is not None:
        cfg = cfg.with_strategy(portids)
    return Model(cfg, variant, transmitter_view, alphabet)
