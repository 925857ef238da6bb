"""Run every shipped scenario through the CLI and collect the CSV outputs.

Usage: python scripts/reproduce_figures.py [--out results] [--seed 0]
"""
import argparse
import sys
from pathlib import Path

from trailer_jackknife.cli import main as cli

CONFIGS = Path(__file__).resolve().parent.parent / "configs"

JOBS = [
    ("limits", "fig4_long"),
    ("regions", "fig4_long"),
    ("limits", "fig8_medium"),
    ("regions", "fig8_medium"),
    ("limits", "l1_long8"),
    ("simulate", "fig5_jackknife"),
    ("simulate", "l1_long8"),
    ("simulate", "fig8_medium"),
    ("simulate", "fig9_constant"),
    ("simulate", "fig10_terrain"),
    ("simulate", "fig11_aware"),
    ("simulate", "fig11_ignorant"),
    ("sweep", "fig10_terrain"),
    ("estimate", "estimate_forward"),
]


def run(out: Path, seed: int) -> int:
    worst = 0
    for verb, name in JOBS:
        target = out / name
        print(f"== {verb} {name}")
        args = [verb, "--config", str(CONFIGS / f"{name}.toml"), "--out", str(target)]
        if verb == "estimate":
            for mode in ("slip_partial", "slip_ignorant"):
                worst = max(worst, cli(args + ["--mode", mode, "--seed", str(seed)]))
            continue
        worst = max(worst, cli(args))
    print("== oracle-check")
    worst = max(worst, cli(["oracle-check", "--count", "100", "--seed", str(seed),
                            "--out", str(out / "oracle")]))
    return worst


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="results", type=Path)
    ap.add_argument("--seed", default=0, type=int)
    a = ap.parse_args()
    sys.exit(run(a.out, a.seed))
