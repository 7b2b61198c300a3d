"""Figures for traces, linking matrices and fuzz runs (matplotlib, Agg)."""
from __future__ import annotations

import os
from collections import Counter

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .invariants import LinkingMatrix  # noqa: E402


def _save(fig, path: str) -> str:
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def plot_trace(trace, path: str) -> str:
    """Signature and H1 rank along each script, failed steps marked."""
    fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(7, 5), sharex=True)
    names = sorted({r.script for r in trace.steps})
    for name in names:
        steps = [r for r in trace.steps if r.script == name]
        xs, sig, rank, bad = [0], [], [], []
        first = steps[0].pre if steps else None
        if first is None:
            continue
        sig.append(first.signature)
        rank.append(len(first.h1_factors))
        for r in steps:
            rec = r.post or r.pre
            xs.append(r.index)
            sig.append(rec.signature if rec else float("nan"))
            rank.append(len(rec.h1_factors) if rec else float("nan"))
            if r.verdict != "pass":
                bad.append((r.index, sig[-1]))
        ax1.plot(xs, sig, marker="o", label=name)
        ax2.plot(xs, rank, marker="s", label=name)
        if bad:
            ax1.scatter(*zip(*bad), color="red", zorder=3, s=60, marker="x")
    ax1.set_ylabel("signature")
    ax2.set_ylabel("number of H1 factors")
    ax2.set_xlabel("step")
    if names:
        ax1.legend(fontsize=7, loc="best")
    ax1.set_title(f"trace ({trace.overall})")
    return _save(fig, path)


def plot_linking_matrix(lm: LinkingMatrix, path: str, title: str = "") -> str:
    n = max(lm.order, 1)
    fig, ax = plt.subplots(figsize=(1.2 + 0.6 * n, 1.0 + 0.6 * n))
    rows = lm.rows() if lm.order else [[0]]
    top = max(1, max(abs(v) for r in rows for v in r))
    ax.imshow(rows, cmap="coolwarm", vmin=-top, vmax=top)
    for i, r in enumerate(rows):
        for j, v in enumerate(r):
            ax.text(j, i, str(v), ha="center", va="center", fontsize=9)
    ax.set_xticks(range(lm.order), lm.labels)
    ax.set_yticks(range(lm.order), lm.labels)
    ax.set_title(title or "linking matrix")
    return _save(fig, path)


def plot_fuzz(results: list, path: str) -> str:
    """Move kinds exercised and failures per kind over a fuzz run."""
    tried, failed = Counter(), Counter()
    for r in results:
        for kind, ok in r["checks"]:
            tried[kind] += 1
            failed[kind] += 0 if ok else 1
    kinds = sorted(tried)
    fig, ax = plt.subplots(figsize=(8, 3.5))
    ax.bar(kinds, [tried[k] for k in kinds], color="tab:blue", label="checked")
    ax.bar(kinds, [failed[k] for k in kinds], color="tab:red", label="invariant changed")
    ax.set_ylabel("cases")
    ax.tick_params(axis="x", rotation=60, labelsize=7)
    ax.legend(fontsize=8)
    return _save(fig, path)


__all__ = ["plot_trace", "plot_linking_matrix", "plot_fuzz"]
