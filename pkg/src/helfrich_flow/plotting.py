"""Optional PNG rendering of CLI outputs; matplotlib is imported lazily."""

from __future__ import annotations

from pathlib import Path

import numpy as np


def _pyplot():
    try:
        import matplotlib
    except ImportError as exc:  # pragma: no cover - depends on the environment
        raise RuntimeError("plotting needs matplotlib; install the 'plot' extra") from exc
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    return plt


def plot_figure1(rows, path) -> Path:
    """Allowable radii against the rotation angle."""
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6, 4))
    width = max(len(r) for _, r in rows)
    theta = np.array([t for t, _ in rows])
    for j in range(width):
        rho = np.array([r[j] if j < len(r) else np.nan for _, r in rows])
        ax.plot(theta, rho, lw=1.5)
    ax.set_xlabel(r"$\theta$")
    ax.set_ylabel(r"$\rho$")
    ax.set_xlim(0, 2 * np.pi)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return Path(path)


def plot_flow(snapshots, diagnostics, outdir, max_curves: int = 8) -> list[Path]:
    """Curve snapshots (first two coordinates) and energy/residual histories."""
    plt = _pyplot()
    outdir = Path(outdir)
    paths = []
    fig, ax = plt.subplots(figsize=(5, 5))
    idx = np.unique(np.linspace(0, len(snapshots) - 1, min(max_curves, len(snapshots))).astype(int))
    for i in idx:
        t, curve = snapshots[i]
        P = np.vstack([curve.points, curve.points[:1]])
        ax.plot(P[:, 0], P[:, 1], lw=1, label=f"t={t:.3g}")
    ax.set_aspect("equal")
    ax.legend(fontsize=7)
    fig.tight_layout()
    paths.append(outdir / "curves.png")
    fig.savefig(paths[-1], dpi=120)
    plt.close(fig)

    t = diagnostics.series("t")
    fig, (a1, a2) = plt.subplots(2, 1, figsize=(6, 5), sharex=True)
    a1.plot(t, diagnostics.series("energy.total"))
    a1.set_ylabel("energy")
    a2.semilogy(t, diagnostics.series("residual.l2"))
    a2.set_ylabel(r"$\|H\|_{L^2}$")
    a2.set_xlabel("t")
    fig.tight_layout()
    paths.append(outdir / "history.png")
    fig.savefig(paths[-1], dpi=120)
    plt.close(fig)
    return paths
