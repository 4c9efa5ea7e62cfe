"""Walk through the four virus-checking phrases, from a bare request to layered attestation.

Each phrase is run with a fresh nonce and appraised against golden values
taken from a reference run; the layered one is also tampered three ways.
"""

import argparse

from copland.config import default_config
from copland.scenario import PHRASES, run_scenario
from copland.text import print_phrase


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--provider", choices=("abstract", "real"), default="real")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    cfg = default_config(4, args.provider)
    for name in PHRASES:
        run = run_scenario(cfg, args.seed, name)
        print(f"[{name}] {print_phrase(run.phrase, cfg.symbols())}")
        print(f"  {len(run.trace)} events, appraisal {run.result.verdict}, "
              f"{sum(f.check == 'signature' for f in run.result.findings)} signatures checked")
        for case in run.tampered:
            print(f"  tamper {case.name!r}: {case.result.verdict}, caught at {case.path}: {case.caught}")


if __name__ == "__main__":
    main()
