"""Desk-scale check against the reference enclosures.

All 41 two-variable terms on the center region, plus the bounded region of
B23, B24, B34 and B71 at nonsingular depth 7. Reports go to results/.
"""

import argparse
import sys
import time
from pathlib import Path

from rigorquad import cli
from rigorquad.report import emit_report

RESULTS = Path(__file__).resolve().parent.parent / "results"


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()
    RESULTS.mkdir(exist_ok=True)
    runs = {
        "spot_center": cli.CampaignConfig(mode="single-term", terms=cli.muskat.TWO_D_TERMS,
                                          regions=("singularity-center",), reference_check=True,
                                          workers=args.workers),
        "spot_bounded": cli.CampaignConfig(mode="single-term", terms=("B23", "B24", "B34", "B71"),
                                           regions=("bounded-region",), depths={"nonsingular": 7},
                                           reference_check=True, workers=args.workers),
    }
    code = cli.EXIT_OK
    for name, cfg in runs.items():
        start = time.monotonic()
        report = cli.run(cfg)
        emit_report(report, RESULTS / f"{name}.json")
        emit_report(report, RESULTS / f"{name}.csv", "csv")
        print(cli.summary(report))
        print(f"{name}: {time.monotonic() - start:.0f} s")
        code = max(code, cli.exit_code(report))
    return code


if __name__ == "__main__":
    sys.exit(main())
