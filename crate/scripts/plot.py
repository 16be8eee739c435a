#!/usr/bin/env python3
"""Turn the simulator's CSV exports into figures.

Usage: python3 scripts/plot.py <output-dir> [--save <dir>]

Expects whichever of the following are present in <output-dir>:
bmatrix.csv, jmatrix.csv, spectrum_on.csv / spectrum_off.csv,
evolve_T*.csv, evolve_notweezers.csv, sweep.csv, mobility.csv.
"""
import argparse
import glob
import os
import re

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np
import pandas as pd


def save(fig, outdir, name):
    path = os.path.join(outdir, name)
    fig.savefig(path, dpi=160, bbox_inches="tight")
    plt.close(fig)
    print("wrote", path)


def plot_matrix(csv_path, title, outdir, name):
    df = pd.read_csv(csv_path)
    m = df.drop(columns="site").to_numpy()
    fig, ax = plt.subplots(figsize=(4.2, 3.6))
    im = ax.imshow(m, origin="lower", cmap="viridis",
                   extent=(0.5, m.shape[1] + 0.5, 0.5, m.shape[0] + 0.5))
    fig.colorbar(im, ax=ax, label="Hz")
    ax.set_xlabel("site j")
    ax.set_ylabel("site i")
    ax.set_title(title)
    save(fig, outdir, name)


def plot_spectrum(outdir, data_dir):
    on = pd.read_csv(os.path.join(data_dir, "spectrum_on.csv"))
    off = pd.read_csv(os.path.join(data_dir, "spectrum_off.csv"))
    k = min(50, len(on))
    fig, ax = plt.subplots(figsize=(4.2, 3.4))
    ax.plot(range(k), off["eigenvalue_hz"][:k], "o", ms=3, label="tweezers off")
    ax.plot(range(k), on["eigenvalue_hz"][:k], "s", ms=3, label="tweezers on")
    ax.set_xlabel("eigenvalue index")
    ax.set_ylabel("energy / h (Hz, relative to lowest)")
    ax.legend()
    save(fig, outdir, "fig_spectrum.png")


def plot_evolution(outdir, data_dir):
    files = sorted(glob.glob(os.path.join(data_dir, "evolve_*.csv")))
    files = [f for f in files if "meta" not in f]
    if not files:
        return
    fig, axes = plt.subplots(2, len(files), figsize=(3.2 * len(files), 5.2),
                             squeeze=False, sharex=True)
    for col, f in enumerate(files):
        df = pd.read_csv(f)
        sites = [c for c in df.columns if c.startswith("p_site_")]
        p = df[sites].to_numpy().T
        label = re.sub(r".*evolve_|\.csv", "", f)
        ax = axes[0][col]
        im = ax.imshow(p, aspect="auto", origin="lower", cmap="magma",
                       extent=(df.time_ms.min(), df.time_ms.max(), 0.5, len(sites) + 0.5),
                       vmin=0, vmax=1)
        ax.set_title(label)
        ax.set_ylabel("site")
        axes[1][col].plot(df.time_ms, df.p_total)
        axes[1][col].set_ylim(0, 1.05)
        axes[1][col].set_xlabel("time (ms)")
        axes[1][col].set_ylabel("total pair probability")
    fig.colorbar(im, ax=axes[0].tolist(), label="pair probability", shrink=0.9)
    save(fig, outdir, "fig_evolution.png")


def plot_sweep(outdir, data_dir):
    df = pd.read_csv(os.path.join(data_dir, "sweep.csv"))
    fig, ax = plt.subplots(figsize=(4.2, 3.4))
    for col, label in [("sigma_sd_10ms", "10 ms"), ("sigma_sd_30ms", "30 ms"),
                       ("sigma_sd_50ms", "50 ms")]:
        ax.plot(df.T_uK, df[col], "o-", ms=3, label=label)
    ax.set_xlabel("temperature (uK)")
    ax.set_ylabel("spread sigma_sd")
    ax.legend()
    save(fig, outdir, "fig_sweep.png")


def plot_mobility(outdir, data_dir):
    df = pd.read_csv(os.path.join(data_dir, "mobility.csv"))
    fig, ax = plt.subplots(figsize=(4.2, 3.4))
    for n, grp in df.groupby("N"):
        g = grp[grp.T_uK > 0]
        ax.plot(g.T_uK, g.p_mobile_product, "o-", ms=3, label=f"N = {n}")
    one = df[df.N == df.N.min()]
    one = one[one.T_uK > 0]
    ax.plot(one.T_uK, one.p_mobile_closed, "k-", lw=1.5, label="closed form")
    ax.set_xlabel("temperature (uK)")
    ax.set_ylabel("ground-state probability (non-com modes)")
    ax.legend(fontsize=8)
    save(fig, outdir, "fig_mobility.png")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("data_dir")
    ap.add_argument("--save", default=None)
    args = ap.parse_args()
    outdir = args.save or args.data_dir
    os.makedirs(outdir, exist_ok=True)

    if os.path.exists(os.path.join(args.data_dir, "bmatrix.csv")):
        plot_matrix(os.path.join(args.data_dir, "bmatrix.csv"),
                    "two-spin energy B_ij", outdir, "fig_bmatrix.png")
    if os.path.exists(os.path.join(args.data_dir, "jmatrix.csv")):
        plot_matrix(os.path.join(args.data_dir, "jmatrix.csv"),
                    "hopping J_ij", outdir, "fig_jmatrix.png")
    if os.path.exists(os.path.join(args.data_dir, "spectrum_on.csv")):
        plot_spectrum(outdir, args.data_dir)
    plot_evolution(outdir, args.data_dir)
    if os.path.exists(os.path.join(args.data_dir, "sweep.csv")):
        plot_sweep(outdir, args.data_dir)
    if os.path.exists(os.path.join(args.data_dir, "mobility.csv")):
        plot_mobility(outdir, args.data_dir)


if __name__ == "__main__":
    main()
