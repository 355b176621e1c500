"""PNG figures written next to the CSV output of the command-line tools."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .analysis import shell_profile  # noqa: E402


def _save(fig, path):
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_history(history, path, title="solver history"):
    it = np.array([h[0] for h in history])
    res = np.array([h[2] for h in history])
    energy = np.array([h[1] for h in history])
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 3.5))
    ax1.semilogy(it, np.maximum(res, 1e-300))
    ax1.set_xlabel("iteration")
    ax1.set_ylabel("relative residual")
    ax2.plot(it, energy)
    ax2.set_xlabel("iteration")
    ax2.set_ylabel("energy")
    fig.suptitle(title)
    _save(fig, path)


def plot_profile(u, path, title="radial profile"):
    """Shell means with their min/max band; log-log when the field is positive."""
    rows = shell_profile(u)
    r, mean, lo, hi = rows.T
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.fill_between(r, lo, hi, alpha=0.3, lw=0)
    ax.plot(r, mean, lw=1.2)
    pos = (r > 0) & (mean > 0)
    if np.all(lo[pos] > 0) and np.count_nonzero(pos) > 2:
        ax.set_xscale("log")
        ax.set_yscale("log")
    ax.set_xlabel("|x|")
    ax.set_ylabel("u")
    ax.set_title(title)
    _save(fig, path)


def plot_decay(fit, path):
    rows = fit.shells
    r, mean = rows[:, 0], rows[:, 1]
    keep = (r > 0) & (mean > 0)
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.loglog(r[keep], mean[keep], ".", ms=2, label="shell mean")
    lo, hi = fit.window
    rr = np.geomspace(lo, hi, 50)
    ax.loglog(rr, fit.amplitude * rr**fit.exponent, lw=1.5, label=f"slope {fit.exponent:.3f}")
    ax.axvspan(lo, hi, alpha=0.1)
    ax.set_xlabel("|x|")
    ax.set_ylabel("u")
    ax.legend()
    _save(fig, path)


def plot_spectrum(morse, path):
    vals = np.asarray(morse.eigenvalues)
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.axhline(0.0, color="k", lw=0.6)
    ax.axhspan(-morse.zero_tol, morse.zero_tol, alpha=0.2)
    ax.plot(np.arange(len(vals)), vals, "o")
    ax.set_xlabel("index")
    ax.set_ylabel("eigenvalue")
    ax.set_title(f"negative: {morse.negative_count}, zero: {morse.zero_modes}")
    _save(fig, path)


def plot_sweep(rows, key, path):
    x = np.array([float(r[key]) for r in rows])
    fig, ax = plt.subplots(figsize=(5, 3.5))
    for col in ("e_omega", "s_quot"):
        y = np.array([float(r[col]) if r[col] not in ("", None) else np.nan for r in rows])
        ax.plot(x, y, "o-", label=col)
    ax.set_xlabel(key)
    ax.legend()
    _save(fig, path)
