"""Sign of the first time derivative of the slope at both amplitude endpoints.

Writes results/part1.json and exits with the campaign's exit code.
"""

import sys
from pathlib import Path

from rigorquad import cli

OUT = Path(__file__).resolve().parent.parent / "results" / "part1.json"

if __name__ == "__main__":
    OUT.parent.mkdir(exist_ok=True)
    sys.exit(cli.main(["--mode", "part1", "--workers", "1", "--check-refs", "--out", str(OUT), *sys.argv[1:]]))
