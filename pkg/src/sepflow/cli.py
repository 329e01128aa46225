"""Command-line front end.

    sepflow --config configs/cfg1.sk --semantics arinc --format json

Exit status: 0 when every requested check passes, 1 when a violation was
found (the report then carries counterexamples and a replay command), 2 on
configuration or usage errors.  With ``--replay WITNESS`` the tool instead
re-executes one counterexample and exits 1 if the violation reproduces.
"""

from __future__ import annotations

import argparse
import json
import shlex
import sys
import time
from typing import Optional

from .checker import (
    BudgetExceeded,
    audit_implications,
    check_invariants,
    explore,
    security_index,
    verify_property,
    verify_unwinding,
)
from .config import ConfigError, PortIdStrategy, load_config
from .equivalence import TransmitterView
from .hoare import run_hoare_suite
from .kernel import VARIANTS
from .model import Model, build_model
from .security import BOUNDED, BoundTooLarge, Counterexample, witness_holds

CHECKS = ("reach", "invariants", "hoare", "unwinding", "properties")
EXIT_OK, EXIT_VIOLATION, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def parse_checks(text: str) -> tuple:
    if text == "all":
        return CHECKS
    picked = [c.strip() for c in text.split(",") if c.strip()]
    unknown = [c for c in picked if c not in CHECKS]
    if unknown or not picked:
        raise argparse.ArgumentTypeError(
            f"unknown check(s) {', '.join(unknown) or '(none)'}; choose from {', '.join(CHECKS)} or all")
    return tuple(c for c in CHECKS if c in picked)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="sepflow",
        description="Explicit-state information-flow checker for a partitioned kernel model.")
    ap.add_argument("--config", required=True, help="system configuration file")
    ap.add_argument("--semantics", choices=sorted(VARIANTS), default="fixed")
    ap.add_argument("--portids", choices=[s.value for s in PortIdStrategy], default=None,
                    help="port-id strategy (default: the config's own declaration)")
    ap.add_argument("--transmitter-view", choices=[v.value for v in TransmitterView],
                    default=TransmitterView.SOURCE_ONLY.value)
    ap.add_argument("--checks", type=parse_checks, default=CHECKS,
                    help="comma-separated subset of " + ",".join(CHECKS) + " (default: all)")
    ap.add_argument("--bound", type=int, default=2, metavar="L",
                    help="sequence length bound for the trace properties (default: 2)")
    ap.add_argument("--budget", type=int, default=200_000, help="maximum number of states")
    ap.add_argument("--format", choices=("text", "json"), default="text")
    ap.add_argument("--timing", action="store_true",
                    help="report wall-clock time (makes output differ between runs)")
    ap.add_argument("--replay", metavar="WITNESS",
                    help="replay one counterexample given as JSON text or @file")
    return ap


# ---------------------------------------------------------------------------
# replay

def replay_command(args, cx: Counterexample, model: Model) -> str:
    payload = {k: v for k, v in cx.to_dict(model).items() if k not in ("diff", "event_domain")}
    parts = ["python3", "-m", "sepflow", "--config", args.config,
             "--semantics", args.semantics,
             "--portids", model.cfg.portid_strategy.value,
             "--transmitter-view", args.transmitter_view,
             "--replay", json.dumps(payload, separators=(",", ":"))]
    return " ".join(shlex.quote(p) for p in parts)


def _load_witness(text: str) -> dict:
    if text.startswith("@"):
        with open(text[1:], encoding="utf-8") as fh:
            text = fh.read()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"witness is not valid JSON: {exc}") from None


def run_replay(args, model: Model, out) -> int:
    data = _load_witness(args.replay)
    try:
        cx = Counterexample.from_dict(model, data)
    except (KeyError, ValueError) as exc:
        raise UsageError(f"malformed witness: {exc}") from None
    if witness_holds(model, cx):
        from .security import witness_diff
        diff = witness_diff(model, cx)
        where = f" ({diff[0]}: {diff[1]} vs {diff[2]})" if diff else ""
        print(f"reproduced {cx.kind.value} violation observed by {model.name(cx.observer)}{where}", file=out)
        return EXIT_VIOLATION
    print(f"{cx.kind.value} witness does not reproduce under this model", file=out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# analysis

def _witness_json(args, model, cx: Optional[Counterexample]) -> Optional[dict]:
    if cx is None:
        return None
    d = cx.to_dict(model)
    d["length"] = cx.length
    d["trace_a"] = model.trace(cx.prefix_a)
    d["trace_b"] = model.trace(cx.prefix_b)
    d["replay"] = replay_command(args, cx, model)
    return d


def analyse(args, model: Model) -> dict:
    checks = []
    stats = {"states": None, "pairs": None, "wallclock_ms": None}
    t0 = time.perf_counter()
    rs = explore(model, args.budget)
    stats["states"] = len(rs)
    if "reach" in args.checks:
        checks.append({"name": "reach", "holds": True, "bound": None,
                       "details": {"states": len(rs), "events": len(model.alphabet)}})
    if "invariants" in args.checks:
        inv = check_invariants(rs)
        entry = {"name": "invariants", "holds": inv.holds, "bound": None,
                 "details": {"states": inv.states, "failed": inv.failed}}
        if not inv.holds:
            entry["witness"] = {"state_trace": [model.render(e) for e in inv.trace]}
        checks.append(entry)
    if "hoare" in args.checks:
        results = run_hoare_suite(rs)
        entry = {"name": "hoare", "holds": all(r.holds for r in results), "bound": None,
                 "details": {"cases": [{"name": r.case.name, "kinds": [k.value for k in r.case.kinds],
                                        "holds": r.holds, "checked": r.checked} for r in results]}}
        bad = next((r for r in results if not r.holds), None)
        if bad is not None:
            i, e = bad.failure
            entry["witness"] = {"case": bad.case.name,
                                "state_trace": [model.render(x) for x in rs.path(i)],
                                "event": model.render(e)}
        checks.append(entry)
    verdicts = {}
    if "unwinding" in args.checks or "properties" in args.checks:
        index = security_index(rs)
        stats["pairs"] = index.sched_pairs()
        if "unwinding" in args.checks:
            for v in verify_unwinding(index):
                verdicts[v.property] = v
                entry = {"name": v.property.value, "holds": v.holds, "bound": None,
                         "details": {"per_event_kind": dict(v.details["per_kind"])}}
                if v.witness is not None:
                    entry["witness"] = _witness_json(args, model, v.witness)
                    entry["details"]["witness_by_kind"] = {
                        k.value: _witness_json(args, model, cx)
                        for k, cx in v.details.get("by_kind", {}).items()}
                checks.append(entry)
        if "properties" in args.checks:
            for p in BOUNDED:
                v = verify_property(index, p, args.bound)
                verdicts[p] = v
                entry = {"name": p.value, "holds": v.holds, "bound": args.bound}
                if v.witness is not None:
                    entry["witness"] = _witness_json(args, model, v.witness)
                checks.append(entry)
        if len(verdicts) > 1:
            broken = audit_implications(verdicts)
            checks.append({"name": "implication_order", "holds": not broken, "bound": None,
                           "details": {"violated": [p.value for p in broken]}})
    if args.timing:
        stats["wallclock_ms"] = round((time.perf_counter() - t0) * 1000)
    return {
        "config": args.config,
        "variant": model.describe,
        "checks": checks,
        "stats": stats,
    }


# ---------------------------------------------------------------------------
# rendering

def render_json(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=False) + "\n"


def _render_witness(w: dict, indent: str) -> list:
    lines = []
    if "case" in w:
        lines.append(f"{indent}case: {w['case']}")
    if "state_trace" in w:
        lines.append(f"{indent}trace to state: {' ; '.join(w['state_trace']) or '(initial state)'}")
        if "event" in w:
            lines.append(f"{indent}event: {w['event']}")
        return lines
    lines.append(f"{indent}observer: {w['observer']}  ({w['length']} events)")
    two_states = w["kind"] in ("weak_step_consistent", "nonleakage", "noninfluence",
                               "strong_noninfluence")
    for tag in ("a", "b") if two_states else ("a",):
        lines.append(f"{indent}prefix {tag}:" + ("" if w["trace_" + tag] else " (initial state)"))
        lines.extend(f"{indent}  {x}" for x in w["trace_" + tag])
    if "event" in w:
        lines.append(f"{indent}event:    {w['event']}  (domain {w['event_domain']})")
    if "run_a" in w:
        lines.append(f"{indent}run a:    {' ; '.join(w['run_a']) or '(empty)'}")
    if "run_b" in w:
        lines.append(f"{indent}run b:    {' ; '.join(w['run_b']) or '(empty)'}")
    if "diff" in w:
        d = w["diff"]
        lines.append(f"{indent}differs in {d['component']}: {d['a']} vs {d['b']}")
    lines.append(f"{indent}replay: {w['replay']}")
    return lines


def render_text(report: dict) -> str:
    v = report["variant"]
    st = report["stats"]
    out = [f"config: {report['config']}",
           f"variant: semantics={v['semantics']} portids={v['portids']} "
           f"transmitter-view={v['transmitter_view']}",
           f"states: {st['states']}" + (f"  scheduler-equivalent pairs: {st['pairs']}"
                                        if st["pairs"] is not None else "")]
    if st["wallclock_ms"] is not None:
        out.append(f"wall clock: {st['wallclock_ms']} ms")
    out.append("")
    for c in report["checks"]:
        tag = "PASS" if c["holds"] else "FAIL"
        head = f"[{tag}] {c['name']}"
        if c.get("bound") is not None:
            head += f" (L={c['bound']})"
        det = c.get("details", {})
        if c["name"] == "reach":
            head += f": {det['states']} states, {det['events']} events"
        elif c["name"] == "invariants":
            head += f": {det['states']} states" + (f", failed {', '.join(det['failed'])}"
                                                   if det["failed"] else "")
        elif c["name"] == "hoare":
            ok = sum(x["holds"] for x in det["cases"])
            head += f": {ok}/{len(det['cases'])} cases"
        elif c["name"] == "implication_order" and det["violated"]:
            head += ": " + ", ".join(det["violated"])
        out.append(head)
        if "per_event_kind" in det:
            for k, ok in det["per_event_kind"].items():
                out.append(f"    {k:<28} {'ok' if ok else 'VIOLATED'}")
        if "witness_by_kind" in det:
            for k, w in det["witness_by_kind"].items():
                out.append(f"  counterexample at {k}:")
                out.extend(_render_witness(w, "    "))
        elif "witness" in c:
            out.append("  counterexample:")
            out.extend(_render_witness(c["witness"], "    "))
    failed = [c["name"] for c in report["checks"] if not c["holds"]]
    out.append("")
    out.append("result: " + ("VIOLATION in " + ", ".join(failed) if failed else "all checks pass"))
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------

def main(argv=None, out=None) -> int:
    out = sys.stdout if out is None else out
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        if args.bound < 0 or args.budget < 1:
            raise UsageError("--bound must be >= 0 and --budget >= 1")
        cfg = load_config(args.config)
        model = build_model(cfg, VARIANTS[args.semantics],
                            PortIdStrategy(args.portids) if args.portids else None,
                            TransmitterView(args.transmitter_view))
        if args.replay is not None:
            return run_replay(args, model, out)
        report = analyse(args, model)
    except (ConfigError, UsageError, BudgetExceeded, BoundTooLarge) as exc:
        print(f"sepflow: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"sepflow: error: cannot read {exc.filename}: {exc.strerror}", file=sys.stderr)
        return EXIT_USAGE
    out.write(render_json(report) if args.format == "json" else render_text(report))
    return EXIT_OK if all(c["holds"] for c in report["checks"]) else EXIT_VIOLATION


def main_entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    main_entry()
