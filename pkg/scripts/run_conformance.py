"""Run the conformance suite and write a canonical report.

    python scripts/run_conformance.py --count 1000 --depth 4 --seed 7 --out suite.json
"""

import argparse
import sys
import time

from copland.conformance import run_suite
from copland.config import save
from copland.text import print_phrase


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--count", type=int, default=1000)
    ap.add_argument("--depth", type=int, default=4)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--places", type=int, default=3)
    ap.add_argument("--schedules", type=int, default=3)
    ap.add_argument("--out")
    args = ap.parse_args()

    done = [0]

    def progress(report):
        done[0] += 1
        if done[0] % 500 == 0:
            print(f"  {done[0]} runs checked", file=sys.stderr)

    start = time.perf_counter()
    report = run_suite(args.count, args.depth, args.seed, args.places, args.schedules, on_case=progress)
    print(f"{report.count} phrases, {done[0]} runs, {report.checks_run} checks, "
          f"{len(report.failures)} failures in {time.perf_counter() - start:.1f}s")
    for r in report.failures:
        names = ", ".join(c.name for c in r.failures())
        print(f"  seed={r.seed} place={r.place} [{names}] {print_phrase(r.phrase)}")
    if args.out:
        save(report, args.out)
    return 0 if report.ok else 1


if __name__ == "__main__":
    sys.exit(main())
