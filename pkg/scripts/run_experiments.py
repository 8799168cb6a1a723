"""Run every suite over a grid of algebras and deformation parameters.

Writes one JSON report per (algebra, parameter) into ``--out`` and prints a
summary table of the worst residual per check family.

    python3 scripts/run_experiments.py --samples 20 --out runs/
"""

from __future__ import annotations

import argparse
import json
import time
from collections import defaultdict
from pathlib import Path

from poissonlie.cli import SuiteConfig, emit_report, run_suite

SPLIT_NU = (0.25, 0.35, 0.5)
COMPACT_THETA = (0.1, 0.3, 0.7)


def grid(algebras):
    for alg in algebras:
        if alg.startswith("su"):
            for theta in COMPACT_THETA:
                yield SuiteConfig(algebra=alg, theta=theta)
        else:
            for nu in SPLIT_NU:
                yield SuiteConfig(algebra=alg, nu=nu)


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--algebras", nargs="+", default=["sl2", "su2", "sl3", "su3"])
    ap.add_argument("--samples", type=int, default=20)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", type=Path, default=Path("runs"))
    args = ap.parse_args(argv)
    args.out.mkdir(parents=True, exist_ok=True)

    failed = 0
    for cfg in grid(args.algebras):
        cfg.samples, cfg.seed = args.samples, args.seed
        t0 = time.perf_counter()
        report = run_suite("all", cfg)
        param = f"theta{cfg.theta}" if cfg.compact else f"nu{cfg.nu}"
        path = args.out / f"all_{cfg.algebra}_{param}_seed{cfg.seed}.json"
        path.write_text(emit_report(report, "json"))

        worst = defaultdict(float)
        for r in report.records:
            if r.expect == "pass":
                fam = r.check_id.split(".")[0]
                worst[fam] = max(worst[fam], r.max_residual)
        bad = [r.check_id for r in report.records if not r.passed]
        failed += bool(bad)
        fams = "  ".join(f"{k} {v:.1e}" for k, v in sorted(worst.items()))
        print(f"{cfg.algebra} {param:<9} {report.verdict:<4} {time.perf_counter() - t0:6.1f}s  {fams}")
        for cid in bad:
            print(f"    failed: {cid}")

    (args.out / "index.json").write_text(json.dumps(sorted(p.name for p in args.out.glob("all_*.json")), indent=2))
    return 1 if failed else 0


if __name__ == "__main__":
    raise SystemExit(main())
