"""Figure rendering for the CLI report paths (Agg backend, PNG files)."""

from __future__ import annotations

import numpy as np


def _plt():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def _save(plt, fig, path):
    fig.savefig(path, dpi=144)
    plt.close(fig)


def save_spectrum(path, energies, theta) -> None:
    plt = _plt()
    fig, ax = plt.subplots(figsize=(5.0, 4.0), constrained_layout=True)
    for i, eps in enumerate(energies, start=1):
        ax.hlines(eps, 0.2, 0.8, lw=2.0)
        ax.annotate(f"$\\varepsilon_{i}$", (0.82, eps), va="center")
    ax.set_xlim(0.0, 1.0)
    ax.set_xticks([])
    ax.set_ylabel("polariton energy / $g_N$")
    ax.set_title(f"mixing angle $\\theta$ = {theta:.4f} rad")
    _save(plt, fig, path)


def save_occupations(path, rows) -> None:
    data = np.asarray(rows, dtype=float)
    plt = _plt()
    fig, ax = plt.subplots(figsize=(7.0, 4.2), constrained_layout=True)
    for column, label in zip(range(1, 5), ("$n_a$", "$n_b$", "$n_A$", "$n_C$")):
        ax.plot(data[:, 0], data[:, column], label=label)
    ax.plot(data[:, 0], data[:, 5], "k--", lw=1.0, label="$S_a$ (bits)")
    ax.set_xlabel("t · $g_N$")
    ax.set_ylabel("mode occupation")
    ax.legend(ncol=5, fontsize=8)
    _save(plt, fig, path)


def save_entanglement(path, rows) -> None:
    data = np.asarray(rows, dtype=float)
    plt = _plt()
    fig, ax = plt.subplots(figsize=(7.0, 4.2), constrained_layout=True)
    ax.plot(data[:, 0], data[:, 1])
    ax.set_xlabel("t · $g_N$")
    ax.set_ylabel("entanglement entropy (bits)")
    _save(plt, fig, path)


def save_resonances(path, revival_times, swap_times) -> None:
    plt = _plt()
    fig, ax = plt.subplots(figsize=(7.0, 2.8), constrained_layout=True)
    ax.vlines(revival_times, 0.0, 1.0, color="C0", label="revival")
    if swap_times is not None and len(swap_times):
        ax.vlines(swap_times, 0.0, 0.6, color="C3", label="swap")
    ax.set_ylim(0.0, 1.2)
    ax.set_yticks([])
    ax.set_xlabel("t · $g_N$")
    ax.legend(loc="upper right", fontsize=8)
    _save(plt, fig, path)


def save_amplitudes(path, rows) -> None:
    data = np.asarray(rows, dtype=float)
    plt = _plt()
    fig, ax = plt.subplots(figsize=(7.0, 4.2), constrained_layout=True)
    for base, label in zip((1, 3, 5, 7), ("|α|", "|β|", "|ζ|", "|η|")):
        ax.plot(data[:, 0], np.hypot(data[:, base], data[:, base + 1]), label=label)
    ax.set_xlabel("t · $g_N$")
    ax.set_ylabel("coherent amplitude magnitude")
    ax.legend(ncol=4, fontsize=8)
    _save(plt, fig, path)


def save_cat_scan(path, rows) -> None:
    data = np.asarray(rows, dtype=float)
    plt = _plt()
    fig, ax = plt.subplots(figsize=(7.0, 4.2), constrained_layout=True)
    ax.plot(data[:, 0], data[:, -1])
    ax.set_xlabel("t · $g_N$")
    ax.set_ylabel("branch-entropy (bits)")
    _save(plt, fig, path)


def save_schedule(path, ts, omegas, g_N, caption) -> None:
    plt = _plt()
    fig, ax = plt.subplots(figsize=(7.0, 4.2), constrained_layout=True)
    ax.plot(ts, np.asarray(omegas) / g_N)
    ax.axhline(0.0, color="k", lw=0.5)
    ax.set_xlabel("t · $g_N$")
    ax.set_ylabel("$\\Omega / g_N$")
    ax.set_title(caption, fontsize=9)
    _save(plt, fig, path)


def save_bosonization(path, N_values, errors) -> None:
    plt = _plt()
    fig, ax = plt.subplots(figsize=(5.5, 4.2), constrained_layout=True)
    ax.loglog(N_values, errors, "o-")
    ax.set_xlabel("ensemble size N")
    ax.set_ylabel("max trace distance")
    ax.grid(True, which="both", lw=0.3)
    _save(plt, fig, path)


def save_defects(path, ts, defects) -> None:
    plt = _plt()
    fig, ax = plt.subplots(figsize=(7.0, 4.2), constrained_layout=True)
    floor = 1e-18
    ax.semilogy(ts, np.maximum(np.asarray(defects), floor))
    ax.set_xlabel("t · $g_N$")
    ax.set_ylabel("fidelity defect")
    _save(plt, fig, path)
