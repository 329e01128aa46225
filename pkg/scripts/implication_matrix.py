#!/usr/bin/env python3
"""Verdict matrix over semantics x port ids, with the implication-order audit.

    python3 scripts/implication_matrix.py --config configs/cfg1.sk --bound 2
    python3 scripts/implication_matrix.py --config configs/cfg3.sk --bound 1 --portids static

The counter cells of the three-partition config need about 10 minutes and
3 GB each.
"""

import argparse
import pathlib
import sys
import time

ROOT = pathlib.Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "src"))

from sepflow.checker import audit_implications, explore, security_index, verify_all  # noqa: E402
from sepflow.config import PortIdStrategy, load_config  # noqa: E402
from sepflow.kernel import VARIANTS  # noqa: E402
from sepflow.model import build_model  # noqa: E402
from sepflow.security import P  # noqa: E402

SHORT = {P.LOCAL_RESPECT: "LR", P.WEAK_STEP_CONSISTENT: "WSC", P.NONINTERFERENCE: "NI",
         P.WEAK_NONINTERFERENCE: "WNI", P.NONINTERFERENCE_R: "NIr", P.WEAK_NONINTERFERENCE_R: "WNIr",
         P.NONLEAKAGE: "NL", P.NONINFLUENCE: "NF", P.STRONG_NONINFLUENCE: "SNF"}


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--config", default=str(ROOT / "configs" / "cfg1.sk"))
    ap.add_argument("--bound", type=int, default=2)
    ap.add_argument("--portids", choices=("static", "counter", "both"), default="both")
    ap.add_argument("--budget", type=int, default=2_000_000)
    args = ap.parse_args()
    cfg = load_config(args.config)
    pids = ("static", "counter") if args.portids == "both" else (args.portids,)
    print(f"{'cell':<16} {'states':>8} " + " ".join(f"{s:>4}" for s in SHORT.values())
          + "  order  secs")
    clean = True
    for sem in ("fixed", "arinc"):
        for p in pids:
            t = time.perf_counter()
            rs = explore(build_model(cfg, VARIANTS[sem], PortIdStrategy(p)), args.budget)
            vs = verify_all(security_index(rs), args.bound)
            broken = audit_implications(vs)
            clean &= not broken
            marks = " ".join(f"{'ok' if vs[k].holds else 'X':>4}" for k in SHORT)
            print(f"{sem + '/' + p:<16} {len(rs):>8} {marks}  {'ok' if not broken else 'BROKEN':<5} "
                  f"{time.perf_counter() - t:5.0f}", flush=True)
    sys.exit(0 if clean else 1)


if __name__ == "__main__":
    main()
