#!/usr/bin/env python3
"""Sweep the location-error level and compare schemes.

Reproduces the rate-versus-error and security-versus-error trends: the
non-robust design keeps the highest rate but loses security as the error
grows, bound-based designs collapse in rate, and the cell-partitioned
design holds both. Runs at desk scale by default; pass --full for N=256.
"""

import sys
from dataclasses import replace
from pathlib import Path

from nfsec.cli import apply_ci_preset, run
from nfsec.config import SweepSpec, load_config

if __name__ == "__main__":
    root = Path(__file__).resolve().parent.parent
    cfg = load_config(root / "configs" / "default.json")
    cfg = replace(
        cfg,
        scheme="all",
        sweep=SweepSpec(parameter="sigma_c", values=[0.02, 0.04, 0.06, 0.08, 0.1]),
    )
    if "--full" not in sys.argv:
        cfg = apply_ci_preset(cfg)
    sys.exit(run(cfg, root / "results" / "sigma_sweep"))
