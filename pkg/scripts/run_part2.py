"""Full two-variable campaign with default parameters (hours of CPU time).

Progress is logged per region task; the report goes to results/part2_full.json.
Extra arguments are passed to the command line, e.g. ``--workers 16``.
"""

import sys
from pathlib import Path

from rigorquad import cli

OUT = Path(__file__).resolve().parent.parent / "results" / "part2_full.json"

if __name__ == "__main__":
    OUT.parent.mkdir(exist_ok=True)
    sys.exit(cli.main(["--mode", "part2", "--check-refs", "--out", str(OUT), *sys.argv[1:]]))
