"""Plot the CSV files written by reproduce_figures.py (needs matplotlib).

Usage: python scripts/plot_results.py [--results results] [--out plots]
"""
import argparse
import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

LIMITS = ("psi_plus_kmax_deg", "psi_minus_kmax_deg", "psi_plus_kmin_deg", "psi_minus_kmin_deg")


def read(path: Path):
    with path.open(newline="") as fh:
        rows = list(csv.DictReader(fh))
    return {k: np.array([float(r[k]) if r[k] != "" else np.nan for r in rows]) for k in rows[0]}


def plot_run(csv_path: Path, out: Path):
    d = read(csv_path)
    fig, (ax1, ax2, ax3) = plt.subplots(3, 1, sharex=True, figsize=(7, 8))
    ax1.plot(d["t"], d["psi_deg"], "k", label="hitch angle")
    for name in LIMITS:
        if not np.all(np.isnan(d[name])):
            ax1.plot(d["t"], d[name], "--", label=name.replace("_deg", ""))
    ax1.set_ylabel("deg")
    ax1.legend(fontsize=7)
    ax2.plot(d["t"], d["steering_wheel_deg"])
    ax2.set_ylabel("steering wheel, deg")
    ax3.plot(d["t"], d["lateral_error"])
    ax3.set_ylabel("lateral error, m")
    ax3.set_xlabel("t, s")
    fig.suptitle(csv_path.stem)
    fig.tight_layout()
    fig.savefig(out / f"{csv_path.stem}.png", dpi=120)
    plt.close(fig)


def plot_sweep(csv_path: Path, out: Path):
    d = read(csv_path)
    br, bt = np.unique(d["beta_R_deg"]), np.unique(d["beta_T_deg"])
    z = d["psi_plus_kmax_deg"].reshape(br.size, bt.size)
    fig, ax = plt.subplots(figsize=(6, 5))
    cs = ax.contour(bt, br, z, levels=15)
    ax.clabel(cs, fontsize=7)
    ax.set_xlabel("beta_T, deg")
    ax.set_ylabel("beta_R, deg")
    ax.set_title("psi+ at kappa_max")
    fig.tight_layout()
    fig.savefig(out / "sweep.png", dpi=120)
    plt.close(fig)


def plot_estimate(folder: Path, out: Path):
    fig, ax = plt.subplots(figsize=(7, 4))
    for mode in ("slip_partial", "slip_ignorant"):
        path = folder / f"estimate_{mode}.csv"
        if path.exists():
            d = read(path)
            ax.plot(d["t"], np.degrees(d["psi_minus_kmax"]), label=f"predicted ({mode})")
            hitch = np.degrees(d["hitch_angle"])
    ax.plot(d["t"], hitch, "k", label="smoothed hitch angle")
    ax.set_xlabel("t, s")
    ax.set_ylabel("deg")
    ax.legend()
    fig.tight_layout()
    fig.savefig(out / "estimate.png", dpi=120)
    plt.close(fig)


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--results", default="results", type=Path)
    ap.add_argument("--out", default="plots", type=Path)
    a = ap.parse_args()
    a.out.mkdir(parents=True, exist_ok=True)
    for folder in sorted(p for p in a.results.iterdir() if p.is_dir()):
        run = folder / f"{folder.name}.csv"
        if run.exists():
            plot_run(run, a.out)
        if (folder / "sweep.csv").exists():
            plot_sweep(folder / "sweep.csv", a.out)
        if (folder / "estimate_slip_partial.csv").exists():
            plot_estimate(folder, a.out)
    print(f"plots in {a.out}")
