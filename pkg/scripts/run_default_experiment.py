#!/usr/bin/env python3
"""Run every scheme on the default scenario and write figure-ready CSVs.

Full scale (N=256, 10^4 Monte-Carlo trials) takes ~10 minutes; pass --ci
for the desk-scale preset.
"""

import sys
from pathlib import Path

from nfsec.cli import main

if __name__ == "__main__":
    out = Path(__file__).resolve().parent.parent / "results" / "default"
    config = Path(__file__).resolve().parent.parent / "configs" / "default.json"
    argv = ["--config", str(config), "--scheme", "all", "--out", str(out)]
    if "--ci" in sys.argv:
        argv += ["--preset", "ci"]
    sys.exit(main(argv))
