"""Explicit-state engine: reachability, invariants, unwinding and property drivers."""

from __future__ import annotations

import json
from array import array
from collections import OrderedDict
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .events import Event, EventKind
from .kernel import State, invariant_failures
from .model import Model
from .security import (
    BOUNDED,
    P,
    Counterexample,
    PropertyId,
    SecurityIndex,
    Verdict,
    _with_diff,
    order_violations,
    witness_holds,
)

DEFAULT_BUDGET = 200_000
DEFAULT_BOUND = 3


class BudgetExceeded(RuntimeError):
    pass


@dataclass
class ReachableSet:
    model: Model
    states: list
    index: dict
    succ: np.ndarray          # (N, E): succ[i, e] = index of exec_event(states[i], alphabet[e])
    parent: list              # BFS tree: (predecessor index, event index); (-1, -1) for s0
    s0: int = 0

    def __len__(self) -> int:
        return len(self.states)

    def edge(self, i: int, e: Event) -> int:
        return int(self.succ[i, self.model.alphabet.index(e)])

    def path(self, i: int) -> tuple:
        """Shortest event sequence from s0 to state ``i``."""
        out = []
        while i != self.s0:
            i, e = self.parent[i]
            out.append(self.model.alphabet[e])
        return tuple(reversed(out))


def canonical(s: State) -> str:
    """Normalised serialisation of a state (sorted keys), stable across runs."""
    from .security import fmt_value

    def enc(v):
        if isinstance(v, tuple) and hasattr(v, "_fields"):
            return {k: enc(x) for k, x in zip(v._fields, v)}
        if isinstance(v, (tuple, list, frozenset, set)):
            items = sorted(v) if isinstance(v, (frozenset, set)) else v
            return [enc(x) for x in items]
        if v is None or isinstance(v, (int, str)) and not hasattr(v, "value"):
            return v
        return fmt_value(v)

    return json.dumps(enc(s), sort_keys=True, separators=(",", ":"))


def explore(model: Model, budget: int = DEFAULT_BUDGET) -> ReachableSet:
    s0 = model.init()
    states = [s0]
    index = {s0: 0}
    parent = [(-1, -1)]
    alphabet = model.alphabet
    rows = array("i")
    # equal stores/comm tuples are shared between states; with ~10^6 states
    # this roughly halves resident memory
    shared: dict = {}

    def intern(x):
        return shared.setdefault(x, x)

    # enabledness depends only on `current` and the mode map; disabled events stutter
    live_cache: dict = {}
    i = 0
    while i < len(states):
        s = states[i]
        key = (s.current, s.part_mode)
        live = live_cache.get(key)
        if live is None:
            live = live_cache[key] = [model.enabled(s, e) for e in alphabet]
        for e_idx, e in enumerate(alphabet):
            if not live[e_idx]:
                rows.append(i)
                continue
            n = model.step(s, e)
            j = i if n == s else index.get(n)
            if j is None:
                if len(states) >= budget:
                    raise BudgetExceeded(
                        f"state budget {budget} exceeded; frontier size {len(states) - i}")
                j = len(states)
                n = n._replace(comm=intern(n.comm), stores=tuple(intern(x) for x in n.stores))
                index[n] = j
                states.append(n)
                parent.append((i, e_idx))
            rows.append(j)
        i += 1
    succ = np.frombuffer(rows, dtype=np.int32).reshape(len(states), len(alphabet)).copy()
    del rows
    return ReachableSet(model, states, index, succ, parent)


@dataclass
class InvariantReport:
    holds: bool
    states: int
    failed: list = field(default_factory=list)   # invariant names violated by the first bad state
    state: Optional[int] = None
    trace: tuple = ()


def check_invariants(rs: ReachableSet, states: Optional[Sequence[State]] = None) -> InvariantReport:
    """port_consistent, queue capacity bound and the shape invariants on every state.

    ``states`` overrides the explored set, which the negative controls use to
    feed in deliberately corrupted states.
    """
    cfg = rs.model.cfg
    pool = rs.states if states is None else states
    for i, s in enumerate(pool):
        bad = invariant_failures(cfg, s)
        if bad:
            trace = rs.path(i) if states is None else ()
            return InvariantReport(False, len(pool), bad, i, trace)
    return InvariantReport(True, len(pool))


def security_index(rs: ReachableSet, seq_budget: int = 60_000_000) -> SecurityIndex:
    return SecurityIndex(rs.model, rs.states, rs.succ, rs.path, seq_budget)


def _per_kind(model: Model, per_event: np.ndarray) -> "OrderedDict[str, bool]":
    out: "OrderedDict[str, bool]" = OrderedDict()
    for e, bad in zip(model.alphabet, per_event):
        k = e.kind.value
        out[k] = out.get(k, True) and not bool(bad)
    return out


def verify_unwinding(index: SecurityIndex) -> tuple:
    """Both unwinding conditions, each with a pass/fail table per event kind."""
    lr = index.check_local_respect()
    wsc = index.check_weak_step_consistent()
    for v in (lr, wsc):
        v.details["per_kind"] = _per_kind(index.model, v.details.pop("per_event"))
        if v.witness is not None:
            v.witness = minimize(index.model, v.witness)
            v.details["by_kind"] = {k: minimize(index.model, cx)
                                    for k, cx in v.details.get("by_kind", {}).items()}
    return lr, wsc


def verify_property(index: SecurityIndex, p: PropertyId, bound: int = 2) -> Verdict:
    v = index.check(p, bound)
    if v.witness is not None:
        v.witness = minimize(index.model, v.witness)
    v.bound = bound if p in BOUNDED else None
    return v


def verify_all(index: SecurityIndex, bound: int) -> dict:
    lr, wsc = verify_unwinding(index)
    out = {P.LOCAL_RESPECT: lr, P.WEAK_STEP_CONSISTENT: wsc}
    for p in BOUNDED:
        out[p] = verify_property(index, p, bound)
    return out


def audit_implications(verdicts: dict) -> list:
    return order_violations({p: v.holds for p, v in verdicts.items()})


def replay(model: Model, cx: Counterexample) -> bool:
    return witness_holds(model, cx)


_FIELDS = ("prefix_a", "prefix_b", "run_a", "run_b")


def minimize(model: Model, cx: Counterexample) -> Counterexample:
    """Greedy single-event deletion from the witness sequences while it still replays."""
    if not witness_holds(model, cx):
        raise ValueError("counterexample does not replay")
    changed = True
    while changed:
        changed = False
        for f in _FIELDS:
            i = 0
            while i < len(getattr(cx, f)):
                seq = getattr(cx, f)
                trial = _replace(cx, **{f: seq[:i] + seq[i + 1:]})
                if witness_holds(model, trial):
                    cx = trial
                    changed = True
                else:
                    i += 1
    return _with_diff(model, cx)


def _replace(cx: Counterexample, **kw) -> Counterexample:
    d = {f: getattr(cx, f) for f in ("kind", "observer", "prefix_a", "prefix_b", "event",
                                      "run_a", "run_b", "diff")}
    d.update(kw)
    return Counterexample(**d)
