"""Brute-force reference semantics for the security properties.

Written straight from the recursive definitions, sharing nothing with the
vectorised engine except the model's step/dom/view/policy functions.  Only
usable on small models: every quantifier is an explicit loop.
"""

from __future__ import annotations

import itertools

from sepflow.events import SCHEDULER
from sepflow.security import PropertyId as P


def run(m, s, events):
    for e in events:
        s = m.step(s, e)
    return s


def sources(m, events, s, d):
    if not events:
        return frozenset({d})
    a, rest = events[0], events[1:]
    later = sources(m, rest, m.step(s, a), d)
    u = m.dom(s, a)
    if any(m.allows(u, v) for v in later):
        return later | {u}
    return later


def ipurge(m, events, s, d):
    if not events:
        return ()
    a, rest = events[0], tuple(events[1:])
    if m.dom(s, a) in sources(m, events, s, d):
        return (a,) + ipurge(m, rest, m.step(s, a), d)
    return ipurge(m, rest, s, d)


def equiv(m, s, d, t):
    return m.view(s, d) == m.view(t, d)


def obs(m, s, as_, t, bs, d):
    return equiv(m, run(m, s, as_), d, run(m, t, bs))


def sequences(alphabet, L):
    for k in range(L + 1):
        yield from itertools.product(alphabet, repeat=k)


def verdicts(m, states, L):
    """Holds/fails for every property over the given closed state set."""
    doms = m.domains
    seqs = [tuple(x) for x in sequences(m.alphabet, L)]
    s0 = m.init()
    out = {}

    out[P.LOCAL_RESPECT] = all(
        m.allows(m.dom(s, e), d) or equiv(m, s, d, m.step(s, e))
        for s in states for e in m.alphabet for d in doms)

    out[P.WEAK_STEP_CONSISTENT] = all(
        equiv(m, m.step(s, e), d, m.step(t, e))
        for s in states for t in states
        if equiv(m, s, SCHEDULER, t)
        for d in doms if equiv(m, s, d, t)
        for e in m.alphabet
        if m.allows(m.dom(s, e), d) and equiv(m, s, m.dom(s, e), t))

    def ni(starts):
        return all(obs(m, s, a, s, ipurge(m, a, s, d), d) for s in starts for a in seqs for d in doms)

    def wni(starts):
        for s in starts:
            for d in doms:
                classes: dict = {}
                for a in seqs:
                    classes.setdefault(ipurge(m, a, s, d), set()).add(m.view(run(m, s, a), d))
                if any(len(v) > 1 for v in classes.values()):
                    return False
        return True

    out[P.NONINTERFERENCE] = ni([s0])
    out[P.NONINTERFERENCE_R] = ni(states)
    out[P.WEAK_NONINTERFERENCE] = wni([s0])
    out[P.WEAK_NONINTERFERENCE_R] = wni(states)

    def pre(s, t, a, d):
        return equiv(m, s, SCHEDULER, t) and all(equiv(m, s, x, t) for x in sources(m, a, s, d))

    out[P.NONLEAKAGE] = all(
        obs(m, s, a, t, a, d)
        for s in states for t in states for a in seqs for d in doms if pre(s, t, a, d))
    out[P.STRONG_NONINFLUENCE] = all(
        obs(m, s, a, t, ipurge(m, a, t, d), d)
        for s in states for t in states for a in seqs for d in doms if pre(s, t, a, d))

    ok = True
    for s in states:
        for d in doms:
            purge_of = {a: ipurge(m, a, s, d) for a in seqs}
            by_purge: dict = {}
            for b in seqs:
                by_purge.setdefault(purge_of[b], []).append(b)
            for a in seqs:
                peers = by_purge[purge_of[a]]
                for t in states:
                    if not pre(s, t, a, d):
                        continue
                    va = m.view(run(m, s, a), d)
                    if any(m.view(run(m, t, b), d) != va for b in peers):
                        ok = False
                        break
                if not ok:
                    break
            if not ok:
                break
        if not ok:
            break
    out[P.NONINFLUENCE] = ok
    return out
