"""Write the term registry (blocks, factors, expansion orders, region plans) as JSON."""

import json
import sys

from rigorquad import muskat

if __name__ == "__main__":
    out = sys.argv[1] if len(sys.argv) > 1 else "-"
    text = json.dumps(muskat.manifest(), indent=2) + "\n"
    if out == "-":
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
