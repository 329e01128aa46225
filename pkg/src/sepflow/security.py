"""Information-flow properties of the kernel model.

Two routes are provided.  The direct functions (``sources``, ``ipurge``,
``obs_equiv`` and ``witness_holds``) follow the recursive definitions over
concrete states and are used to replay and minimise witnesses.  The bounded
checks (``check_*``) run on a :class:`SecurityIndex`, which interns every
reachable state's per-domain view and evaluates the quantifiers as vectorised
group-by operations over the explored transition table.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

from .events import SCHEDULER, Domain, Event, parse_event
from .kernel import State


class PropertyId(str, Enum):
    NONINTERFERENCE = "noninterference"
    WEAK_NONINTERFERENCE = "weak_noninterference"
    NONINTERFERENCE_R = "noninterference_r"
    WEAK_NONINTERFERENCE_R = "weak_noninterference_r"
    NONLEAKAGE = "nonleakage"
    NONINFLUENCE = "noninfluence"
    STRONG_NONINFLUENCE = "strong_noninfluence"
    LOCAL_RESPECT = "local_respect"
    WEAK_STEP_CONSISTENT = "weak_step_consistent"

    def __str__(self) -> str:
        return self.value


P = PropertyId
BOUNDED = (P.NONINTERFERENCE, P.WEAK_NONINTERFERENCE, P.NONINTERFERENCE_R,
           P.WEAK_NONINTERFERENCE_R, P.NONLEAKAGE, P.NONINFLUENCE, P.STRONG_NONINFLUENCE)
UNWINDING = (P.LOCAL_RESPECT, P.WEAK_STEP_CONSISTENT)

# premises (all must hold) -> conclusions
IMPLIES: tuple[tuple[frozenset, frozenset], ...] = (
    (frozenset({P.STRONG_NONINFLUENCE}), frozenset({P.NONINFLUENCE, P.NONINTERFERENCE_R, P.NONLEAKAGE})),
    (frozenset({P.NONINTERFERENCE_R}), frozenset({P.NONINTERFERENCE})),
    (frozenset({P.NONINTERFERENCE}), frozenset({P.WEAK_NONINTERFERENCE})),
    (frozenset({P.LOCAL_RESPECT, P.WEAK_STEP_CONSISTENT}), frozenset({P.STRONG_NONINFLUENCE})),
)


def implied_by(holding: Iterable[PropertyId]) -> set[PropertyId]:
    """Closure of ``holding`` under the implication order."""
    known = set(holding)
    changed = True
    while changed:
        changed = False
        for prem, concl in IMPLIES:
            if prem <= known and not concl <= known:
                known |= concl
                changed = True
    return known


def order_violations(verdicts: dict) -> list[PropertyId]:
    """Properties that fail although the holding ones imply them."""
    holding = {p for p, ok in verdicts.items() if ok}
    derived = implied_by(holding)
    return [p for p in PropertyId if p in verdicts and not verdicts[p] and p in derived]


# ---------------------------------------------------------------------------
# witnesses

def fmt_value(v) -> str:
    if v is None:
        return "none"
    if isinstance(v, Enum):
        return str(v.value)
    if isinstance(v, Domain):
        return str(v)
    if isinstance(v, tuple):
        if len(v) == 2 and v[0] in ("code", "status"):
            return str(v[1])
        if len(v) == 2 and isinstance(v[0], str) and not isinstance(v[1], tuple):
            return f"{v[0]}:{fmt_value(v[1])}"
        return "[" + ",".join(fmt_value(x) for x in v) + "]"
    return str(v)


@dataclass(frozen=True)
class Counterexample:
    kind: PropertyId
    observer: Domain
    prefix_a: tuple = ()
    prefix_b: tuple = ()
    event: Optional[Event] = None
    run_a: tuple = ()
    run_b: tuple = ()
    diff: Optional[tuple] = None

    @property
    def length(self) -> int:
        return (len(self.prefix_a) + len(self.prefix_b) + (self.event is not None)
                + len(self.run_a) + len(self.run_b))

    def to_dict(self, model) -> dict:
        r = model.render
        out = {
            "kind": self.kind.value,
            "observer": model.name(self.observer),
            "prefix_a": [r(e) for e in self.prefix_a],
            "prefix_b": [r(e) for e in self.prefix_b],
        }
        if self.event is not None:
            out["event"] = r(self.event)
            out["event_domain"] = model.name(model.dom(model.run(self.prefix_a), self.event))
        if self.run_a or self.kind in BOUNDED:
            out["run_a"] = [r(e) for e in self.run_a]
        if self.run_b:
            out["run_b"] = [r(e) for e in self.run_b]
        if self.diff is not None:
            out["diff"] = {"component": self.diff[0], "a": self.diff[1], "b": self.diff[2]}
        return out

    @classmethod
    def from_dict(cls, model, data: dict) -> "Counterexample":
        names = model.cfg.domains_by_name()

        def evs(key):
            return tuple(parse_event(x, names) for x in data.get(key, ()))

        ev = data.get("event")
        return cls(
            kind=PropertyId(data["kind"]),
            observer=names[data["observer"]],
            prefix_a=evs("prefix_a"),
            prefix_b=evs("prefix_b"),
            event=parse_event(ev, names) if ev else None,
            run_a=evs("run_a"),
            run_b=evs("run_b"),
        )


@dataclass
class Verdict:
    property: PropertyId
    holds: bool
    witness: Optional[Counterexample] = None
    bound: Optional[int] = None
    details: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.holds and self.witness is None:
            raise ValueError(f"failing verdict for {self.property} needs a witness")


# ---------------------------------------------------------------------------
# direct definitions

def sources(model, events: Sequence[Event], s: State, d: Domain) -> frozenset:
    trace = [s]
    for e in events[:-1]:
        trace.append(model.step(trace[-1], e))
    srcs = {d}
    for st, e in zip(reversed(trace), reversed(events)):
        u = model.dom(st, e)
        if any(model.allows(u, v) for v in srcs):
            srcs.add(u)
    return frozenset(srcs)


def ipurge(model, events: Sequence[Event], s: State, d: Domain) -> tuple:
    out = []
    events = tuple(events)
    for i, e in enumerate(events):
        if model.dom(s, e) in sources(model, events[i:], s, d):
            out.append(e)
            s = model.step(s, e)
    return tuple(out)


def obs_equiv(model, s: State, as_: Sequence[Event], t: State, bs: Sequence[Event], d: Domain) -> bool:
    return model.vpeq(model.run(as_, s), d, model.run(bs, t))


def witness_holds(model, cx: Counterexample) -> bool:
    """True when ``cx`` still exhibits a violation of its property under ``model``."""
    s = model.run(cx.prefix_a)
    t = model.run(cx.prefix_b)
    d = cx.observer
    k = cx.kind
    if k is P.LOCAL_RESPECT:
        if cx.event is None:
            return False
        return not model.allows(model.dom(s, cx.event), d) and not model.vpeq(s, d, model.step(s, cx.event))
    if k is P.WEAK_STEP_CONSISTENT:
        if cx.event is None:
            return False
        u = model.dom(s, cx.event)
        return (model.vpeq(s, d, t) and model.vpeq(s, SCHEDULER, t) and model.allows(u, d)
                and model.vpeq(s, u, t)
                and not model.vpeq(model.step(s, cx.event), d, model.step(t, cx.event)))
    if k in (P.NONINTERFERENCE, P.NONINTERFERENCE_R):
        if k is P.NONINTERFERENCE and cx.prefix_a:
            return False
        return not obs_equiv(model, s, cx.run_a, s, ipurge(model, cx.run_a, s, d), d)
    if k in (P.WEAK_NONINTERFERENCE, P.WEAK_NONINTERFERENCE_R):
        if k is P.WEAK_NONINTERFERENCE and cx.prefix_a:
            return False
        return (ipurge(model, cx.run_a, s, d) == ipurge(model, cx.run_b, s, d)
                and not obs_equiv(model, s, cx.run_a, s, cx.run_b, d))
    pre = model.vpeq(s, SCHEDULER, t) and model.vpeq_set(s, sources(model, cx.run_a, s, d), t)
    if not pre:
        return False
    if k is P.NONLEAKAGE:
        return not obs_equiv(model, s, cx.run_a, t, cx.run_a, d)
    if k is P.NONINFLUENCE:
        return (ipurge(model, cx.run_a, s, d) == ipurge(model, cx.run_b, s, d)
                and not obs_equiv(model, s, cx.run_a, t, cx.run_b, d))
    if k is P.STRONG_NONINFLUENCE:
        return not obs_equiv(model, s, cx.run_a, t, ipurge(model, cx.run_a, t, d), d)
    raise ValueError(f"unknown property {k}")


def witness_diff(model, cx: Counterexample) -> Optional[tuple]:
    """First differing view component of the two observed end states of ``cx``."""
    s = model.run(cx.prefix_a)
    t = model.run(cx.prefix_b)
    d = cx.observer
    k = cx.kind
    if k is P.LOCAL_RESPECT:
        a, b = s, model.step(s, cx.event)
    elif k is P.WEAK_STEP_CONSISTENT:
        a, b = model.step(s, cx.event), model.step(t, cx.event)
    elif k in (P.NONINTERFERENCE, P.NONINTERFERENCE_R):
        a, b = model.run(cx.run_a, s), model.run(ipurge(model, cx.run_a, s, d), s)
    elif k in (P.WEAK_NONINTERFERENCE, P.WEAK_NONINTERFERENCE_R):
        a, b = model.run(cx.run_a, s), model.run(cx.run_b, s)
    elif k is P.NONLEAKAGE:
        a, b = model.run(cx.run_a, s), model.run(cx.run_a, t)
    elif k is P.NONINFLUENCE:
        a, b = model.run(cx.run_a, s), model.run(cx.run_b, t)
    else:
        a, b = model.run(cx.run_a, s), model.run(ipurge(model, cx.run_a, t, d), t)
    diff = model.diff(a, d, b)
    if diff is None:
        return None
    return diff[0], fmt_value(diff[1]), fmt_value(diff[2])


# ---------------------------------------------------------------------------
# vectorised engine

class BoundTooLarge(ValueError):
    pass


@dataclass
class _SeqTable:
    seqs: list            # tuples of event indices, by length then lexicographic
    final: np.ndarray     # (nseq, N) end state of each sequence from each state
    sub: np.ndarray       # (nseq, 2**L) index of the subsequence selected by a keep mask
    per_domain: dict = field(default_factory=dict)


def _row_keys(cols: np.ndarray) -> np.ndarray:
    """Dense int64 ids for the distinct rows of a 2-D non-negative int array."""
    key = np.zeros(cols.shape[0], dtype=np.int64)
    span = 1
    for j in range(cols.shape[1]):
        c = cols[:, j].astype(np.int64)
        width = int(c.max()) + 1 if c.size else 1
        if span * width >= 2 ** 62:
            _, key = np.unique(np.stack([key, c], axis=1), axis=0, return_inverse=True)
            key = key.reshape(-1).astype(np.int64)
            span = int(key.max()) + 1 if key.size else 1
        key = key * width + c
        span *= width
    _, inv = np.unique(key, return_inverse=True)
    return inv.reshape(-1)


class SecurityIndex:
    """Interned views and transition table of a closed reachable set.

    ``paths(i)`` must return an event sequence leading from the initial state
    (index 0) to state ``i``; it is used only to build witnesses.
    """

    def __init__(self, model, states: Sequence[State], succ: np.ndarray,
                 paths: Callable[[int], tuple], seq_budget: int = 60_000_000):
        self.model = model
        self.states = states
        self.succ = succ
        self.paths = paths
        self.seq_budget = seq_budget
        self.N, self.E = succ.shape
        doms = model.domains
        self.D = len(doms)
        if self.D > 62:
            raise ValueError("too many domains for bitmask encoding")
        self.didx = {d: i for i, d in enumerate(doms)}
        self.sched = self.didx[SCHEDULER]

        V = np.empty((self.N, self.D), dtype=np.int32)
        for j, d in enumerate(doms):
            ids: dict = {}
            col = V[:, j]
            for i, s in enumerate(states):
                col[i] = ids.setdefault(model.view(s, d), len(ids))
        self.V = V

        # domain of each event depends on the state only through `current`
        rows: dict = {}
        dom = np.empty((self.N, self.E), dtype=np.int8)
        for i, s in enumerate(states):
            r = rows.get(s.current)
            if r is None:
                r = np.array([self.didx[model.dom(s, e)] for e in model.alphabet], dtype=np.int8)
                rows[s.current] = r
            dom[i] = r
        self.dom = dom
        self.allow = np.array([[model.allows(u, v) for v in doms] for u in doms], dtype=bool)
        # narrowest integer that holds a bitmask over all domains
        self.mask_t = np.int16 if self.D < 15 else np.int32 if self.D < 31 else np.int64
        self.infl = np.array([sum(1 << j for j in range(self.D) if self.allow[i, j])
                              for i in range(self.D)], dtype=self.mask_t)
        self._tables: dict = {}
        self._groups: dict = {}

    # -- helpers -----------------------------------------------------------

    def sched_pairs(self) -> int:
        _, counts = np.unique(self.V[:, self.sched], return_counts=True)
        return int((counts.astype(np.int64) ** 2).sum())

    def _events(self, seq) -> tuple:
        return tuple(self.model.alphabet[a] for a in seq)

    def _cx(self, kind, d, s, t=None, event=None, run_a=(), run_b=()) -> Counterexample:
        cx = Counterexample(
            kind=kind, observer=self.model.domains[d],
            prefix_a=self.paths(int(s)), prefix_b=self.paths(int(s if t is None else t)),
            event=None if event is None else self.model.alphabet[int(event)],
            run_a=self._events(run_a), run_b=self._events(run_b))
        return _with_diff(self.model, cx)

    def groups(self, mask: int):
        """Partition of states by (scheduler view, views of every domain in ``mask``)."""
        g = self._groups.get(mask)
        if g is None:
            cols = [self.sched] + [j for j in range(self.D) if mask >> j & 1 and j != self.sched]
            inv = _row_keys(self.V[:, cols])
            order = np.argsort(inv, kind="stable")
            starts = np.flatnonzero(np.r_[True, np.diff(inv[order]) != 0])
            g = (inv, order, starts)
            self._groups[mask] = g
        return g

    def _group_minmax(self, mask: int, values: np.ndarray):
        inv, order, starts = self.groups(mask)
        v = values[order]
        return np.minimum.reduceat(v, starts)[inv], np.maximum.reduceat(v, starts)[inv]

    def table(self, L: int) -> _SeqTable:
        tab = self._tables.get(L)
        if tab is not None:
            return tab
        nseq = sum(self.E ** k for k in range(L + 1))
        if nseq * self.N > self.seq_budget:
            raise BoundTooLarge(
                f"bound {L}: {nseq} sequences x {self.N} states exceeds budget {self.seq_budget}")
        seqs: list = [()]
        index = {(): 0}
        final = np.empty((nseq, self.N), dtype=np.int32)
        final[0] = np.arange(self.N)
        sub = np.zeros((nseq, 1 << L), dtype=np.int32)
        for k in range(1, L + 1):
            for seq in itertools.product(range(self.E), repeat=k):
                i = len(seqs)
                index[seq] = i
                seqs.append(seq)
                final[i] = final[index[seq[1:]]][self.succ[:, seq[0]]]
                for m in range(1 << k):
                    sub[i, m] = index[tuple(a for j, a in enumerate(seq) if m >> j & 1)]
        tab = _SeqTable(seqs, final, sub)
        tab.index = index
        self._tables[L] = tab
        return tab

    def purge_data(self, L: int, d: int):
        """Per-sequence arrays for observer ``d``: sources bitmask, purge index, purged end state."""
        tab = self.table(L)
        got = tab.per_domain.get(d)
        if got is not None:
            return got
        if len(tab.seqs) * self.N * self.D > 25_000_000:
            tab.per_domain.clear()  # large models: keep one observer at a time
        nseq = len(tab.seqs)
        mt = self.mask_t
        src = np.empty((nseq, self.N), dtype=mt)
        keep = np.empty((nseq, self.N), dtype=np.int32)
        src[0] = 1 << d
        keep[0] = 0
        ar = np.arange(self.N)
        for i in range(1, nseq):
            seq = tab.seqs[i]
            a, r = seq[0], tab.index[seq[1:]]
            nxt = self.succ[:, a]
            u = self.dom[:, a]
            s_rest = src[r][nxt]
            hit = (s_rest & self.infl[u]) != 0
            src[i] = s_rest | (hit.astype(mt) << u.astype(mt))
            keep[i] = np.where(hit, 1 | (keep[r][nxt] << 1), keep[r] << 1)
        pid = np.take_along_axis(tab.sub, keep, axis=1)
        del keep
        fpurged = tab.final[pid, ar[None, :]]
        got = (src, pid, fpurged)
        tab.per_domain[d] = got
        return got

    # -- unwinding conditions ----------------------------------------------

    def check_local_respect(self) -> Verdict:
        V, succ = self.V, self.succ
        per_event = np.zeros(self.E, dtype=bool)
        total = 0
        first: dict = {}
        chunk = max(1, 4_000_000 // (self.E * self.D))
        for lo in range(0, self.N, chunk):
            hi = min(self.N, lo + chunk)
            allowed = self.allow[self.dom[lo:hi]]                  # (n, E, D)
            viol = (V[succ[lo:hi]] != V[lo:hi, None, :]) & ~allowed
            if not viol.any():
                continue
            per_event |= viol.any(axis=(0, 2))
            total += int(viol.sum())
            for s, e, d in np.argwhere(viol):
                first.setdefault(self.model.alphabet[e].kind, (int(s) + lo, int(e), int(d)))
        details = {"per_event": per_event, "violations": total}
        if not first:
            return Verdict(P.LOCAL_RESPECT, True, details=details)
        details["by_kind"] = {k: self._cx(P.LOCAL_RESPECT, d, s, event=e) for k, (s, e, d) in first.items()}
        s, e, d = min(first.values())
        return Verdict(P.LOCAL_RESPECT, False, self._cx(P.LOCAL_RESPECT, d, s, event=e), details=details)

    def check_weak_step_consistent(self) -> Verdict:
        V, N = self.V, self.N
        ar = np.arange(N)
        per_event = np.zeros(self.E, dtype=bool)
        best = None
        by_kind: dict = {}
        count = 0
        for e in range(self.E):
            u = self.dom[:, e]
            vu = V[ar, u]
            for d in range(self.D):
                cond = self.allow[u, d]
                if not cond.any():
                    continue
                idx = np.flatnonzero(cond)
                inv = _row_keys(np.stack([V[idx, self.sched], V[idx, d], vu[idx], u[idx]], axis=1))
                target = V[self.succ[idx, e], d]
                order = np.lexsort((idx, inv))
                starts = np.flatnonzero(np.r_[True, np.diff(inv[order]) != 0])
                tv = target[order]
                gmin = np.minimum.reduceat(tv, starts)
                gmax = np.maximum.reduceat(tv, starts)
                bad = np.flatnonzero(gmin != gmax)
                if bad.size == 0:
                    continue
                per_event[e] = True
                count += int(bad.size)
                # smallest state of each bad group is its first member (stable order by index)
                for g in bad:
                    lo = starts[g]
                    hi = starts[g + 1] if g + 1 < len(starts) else len(order)
                    members = idx[order[lo:hi]]
                    tvals = tv[lo:hi]
                    s0 = members[0]
                    t0 = members[np.flatnonzero(tvals != tvals[0])[0]]
                    cand = (int(s0), int(t0), e, d)
                    if best is None or cand < best:
                        best = cand
                    k = self.model.alphabet[e].kind
                    if k not in by_kind or cand < by_kind[k]:
                        by_kind[k] = cand
        details = {"per_event": per_event, "violating_classes": count, "pairs": self.sched_pairs()}
        if best is None:
            return Verdict(P.WEAK_STEP_CONSISTENT, True, details=details)
        details["by_kind"] = {k: self._cx(P.WEAK_STEP_CONSISTENT, d, s, t, event=e)
                              for k, (s, t, e, d) in by_kind.items()}
        s, t, e, d = best
        return Verdict(P.WEAK_STEP_CONSISTENT, False,
                       self._cx(P.WEAK_STEP_CONSISTENT, d, s, t, event=e), details=details)

    # -- bounded properties ------------------------------------------------

    def check(self, prop: PropertyId, L: int) -> Verdict:
        if prop is P.LOCAL_RESPECT:
            return self.check_local_respect()
        if prop is P.WEAK_STEP_CONSISTENT:
            return self.check_weak_step_consistent()
        fn = {
            P.NONINTERFERENCE: lambda: self._noninterference(L, only_s0=True),
            P.NONINTERFERENCE_R: lambda: self._noninterference(L, only_s0=False),
            P.WEAK_NONINTERFERENCE: lambda: self._weak_noninterference(L, only_s0=True),
            P.WEAK_NONINTERFERENCE_R: lambda: self._weak_noninterference(L, only_s0=False),
            P.NONLEAKAGE: lambda: self._nonleakage(L),
            P.NONINFLUENCE: lambda: self._noninfluence(L),
            P.STRONG_NONINFLUENCE: lambda: self._strong_noninfluence(L),
        }[prop]
        v = fn()
        v.bound = L
        return v

    def _first(self, cands):
        cands = [c for c in cands if c is not None]
        return min(cands) if cands else None

    def _noninterference(self, L: int, only_s0: bool) -> Verdict:
        kind = P.NONINTERFERENCE if only_s0 else P.NONINTERFERENCE_R
        if L == 0:
            return Verdict(kind, True)
        tab = self.table(L)
        cands = []
        for d in range(self.D):
            _, pid, fpurged = self.purge_data(L, d)
            fin, fp = (tab.final[:, :1], fpurged[:, :1]) if only_s0 else (tab.final, fpurged)
            viol = self.V[fin, d] != self.V[fp, d]
            if viol.any():
                i, s = np.argwhere(viol)[0]
                cands.append((int(i), d, int(s)))
        best = self._first(cands)
        if best is None:
            return Verdict(kind, True)
        i, d, s = best
        return Verdict(kind, False, self._cx(kind, d, s, run_a=tab.seqs[i]))

    def _weak_noninterference(self, L: int, only_s0: bool) -> Verdict:
        kind = P.WEAK_NONINTERFERENCE if only_s0 else P.WEAK_NONINTERFERENCE_R
        if L == 0:
            return Verdict(kind, True)
        tab = self.table(L)
        nseq = len(tab.seqs)
        cands = []
        for d in range(self.D):
            _, pid, _ = self.purge_data(L, d)
            cols = slice(0, 1) if only_s0 else slice(None)
            fv = self.V[tab.final[:, cols], d]
            pc = pid[:, cols]
            n = fv.shape[1]
            # class representative: smallest sequence index with that purge at that state
            rep = np.full((nseq, n), -1, dtype=np.int32)
            ar = np.arange(n)
            for i in range(nseq - 1, -1, -1):
                rep[pc[i], ar] = i
            ref = fv[rep[pc, ar[None, :]], ar[None, :]]
            viol = fv != ref
            if viol.any():
                s, j = np.argwhere(viol.T)[0]
                a = int(rep[pc[j, s], s])
                cands.append((int(s), a, int(j), d))
        best = self._first(cands)
        if best is None:
            return Verdict(kind, True)
        s, a, b, d = best
        return Verdict(kind, False, self._cx(kind, d, s, run_a=tab.seqs[a], run_b=tab.seqs[b]))

    def _nonleakage(self, L: int) -> Verdict:
        tab = self.table(L)
        cands = []
        for d in range(self.D):
            src, _, _ = self.purge_data(L, d)
            for i in range(len(tab.seqs)):
                fv = self.V[tab.final[i], d]
                hit = self._pair_violation(src[i], fv, fv)
                if hit is not None:
                    cands.append((i, d) + hit)
                    break
        best = self._first(cands)
        if best is None:
            return Verdict(P.NONLEAKAGE, True)
        i, d, s, t = best
        return Verdict(P.NONLEAKAGE, False, self._cx(P.NONLEAKAGE, d, s, t, run_a=tab.seqs[i]))

    def _strong_noninfluence(self, L: int) -> Verdict:
        tab = self.table(L)
        cands = []
        for d in range(self.D):
            src, _, fpurged = self.purge_data(L, d)
            for i in range(len(tab.seqs)):
                hit = self._pair_violation(src[i], self.V[tab.final[i], d], self.V[fpurged[i], d])
                if hit is not None:
                    cands.append((i, d) + hit)
                    break
        best = self._first(cands)
        if best is None:
            return Verdict(P.STRONG_NONINFLUENCE, True)
        i, d, s, t = best
        return Verdict(P.STRONG_NONINFLUENCE, False,
                       self._cx(P.STRONG_NONINFLUENCE, d, s, t, run_a=tab.seqs[i]))

    def _pair_violation(self, src: np.ndarray, from_s: np.ndarray, from_t: np.ndarray):
        """Least (s, t) with t in the sources-group of s and from_s[s] != from_t[t]."""
        best = None
        for mask in np.unique(src):
            mask = int(mask)
            inv, order, starts = self.groups(mask)
            gmin, gmax = self._group_minmax(mask, from_t)
            sel = src == mask
            bad = sel & ((gmin != gmax) | (gmin != from_s))
            if bad.any():
                s = int(np.flatnonzero(bad)[0])
                members = np.flatnonzero(inv == inv[s])
                t = int(members[np.flatnonzero(from_t[members] != from_s[s])[0]])
                if best is None or (s, t) < best:
                    best = (s, t)
        return best

    def _noninfluence(self, L: int) -> Verdict:
        tab = self.table(L)
        nseq = len(tab.seqs)
        N = self.N
        ar = np.arange(N)
        cands = []
        for d in range(self.D):
            src, pid, _ = self.purge_data(L, d)
            fv_all = self.V[tab.final, d]
            masks = np.unique(src)
            if len(masks) > 63:
                raise BoundTooLarge("too many distinct source sets")
            # U[p, s]: which source sets occur among sequences purging to p at s.
            # Within one row the targets (pid[i, s], s) are distinct, so a plain
            # in-place OR is safe and avoids an (nseq, N) int64 temporary.
            U = np.zeros((nseq, N), dtype=np.int64)
            rep = np.full((nseq, N), -1, dtype=np.int32)
            for i in range(nseq - 1, -1, -1):
                U[pid[i], ar] |= np.left_shift(1, np.searchsorted(masks, src[i]))
                rep[pid[i], ar] = i
            found = None
            for b in range(nseq):
                pb = pid[b]
                ub = U[pb, ar]
                ra = rep[pb, ar]
                ref = fv_all[ra, ar]
                fvb = fv_all[b]
                for j, mask in enumerate(masks):
                    sel = (ub >> j) & 1 == 1
                    if not sel.any():
                        continue
                    mask = int(mask)
                    gmin, gmax = self._group_minmax(mask, fvb)
                    bad = sel & ((gmin != gmax) | (gmin != ref))
                    if not bad.any():
                        continue
                    s = int(np.flatnonzero(bad)[0])
                    inv = self.groups(mask)[0]
                    members = np.flatnonzero(inv == inv[s])
                    # an `as` in the class of b at s whose sources set is `mask`
                    cls = np.flatnonzero((pid[:, s] == pb[s]) & (src[:, s] == mask))
                    a = int(cls[0])
                    off = np.flatnonzero(fvb[members] != fv_all[a, s])
                    if off.size:
                        cand = (s, int(members[off[0]]), a, b, d)
                    else:
                        # b agrees with a everywhere, so a disagrees with the class representative at s
                        cand = (s, s, a, int(ra[s]), d)
                    if found is None or cand < found:
                        found = cand
                if found is not None:
                    break
            if found is not None:
                cands.append(found)
        best = self._first(cands)
        if best is None:
            return Verdict(P.NONINFLUENCE, True)
        s, t, a, b, d = best
        return Verdict(P.NONINFLUENCE, False,
                       self._cx(P.NONINFLUENCE, d, s, t, run_a=tab.seqs[a], run_b=tab.seqs[b]))


def _with_diff(model, cx: Counterexample) -> Counterexample:
    return Counterexample(cx.kind, cx.observer, cx.prefix_a, cx.prefix_b, cx.event,
                          cx.run_a, cx.run_b, witness_diff(model, cx))
