"""
SVG figures mirroring the CSV outputs. Plots are a convenience; the CSVs are the data
of record.
"""
import logging
import math
from pathlib import Path
from typing import List, Optional, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib as mpl  # noqa: E402
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from qubot_sim.experiments import (  # noqa: E402
    BlochSnapshot,
    PhotodissociationResult,
    StabilizationResult,
    SweepResult,
    TransientResult,
)

logger = logging.getLogger(__name__)

# Fixed salt and no timestamp so re-runs produce identical SVG files.
mpl.rcParams["svg.hashsalt"] = "qubot-sim"
mpl.rcParams["svg.fonttype"] = "none"
SVG_METADATA = {"Date": None, "Creator": "qubot-sim"}


def get_figure(  # type: ignore[no-untyped-def]
    width: float = 6.0, height: Optional[float] = None, ncols: int = 1
):
    """Figure with a golden-ratio panel aspect."""
    golden_ratio = (math.sqrt(5) - 1.0) / 2.0
    if not height:
        height = width * golden_ratio / ncols
    fig, axes = plt.subplots(1, ncols, figsize=(width, height), facecolor="w")
    return fig, axes


def _save(fig, path: Path) -> Path:  # type: ignore[no-untyped-def]
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata=SVG_METADATA)
    plt.close(fig)
    logger.debug(f"Wrote {path}")
    return path


def plot_transient(
    result: TransientResult, out_dir: Path, entropy_unit: str
) -> List[Path]:
    fig, ax = get_figure()
    times = [s.time for s in result.samples]
    free_times, free_c = zip(*result.baseline)
    ax.plot(free_times, free_c, label="C free spins")
    ax.plot(times, [s.concurrence_ab for s in result.samples], label="C(AB) qubot")
    s_ab = [s.entropy_ab for s in result.samples]
    s_loop = [s.entropy_loop for s in result.samples]
    ax.plot(times, s_ab, "--", label=f"S(AB) [{entropy_unit}]")
    ax.plot(times, s_loop, "--", label=f"S(L) [{entropy_unit}]")
    ax.set_xlabel(r"$\Delta t$")
    ax.legend(frameon=False)
    return [_save(fig, out_dir / "transient.svg")]


def plot_stabilization(result: StabilizationResult, out_dir: Path) -> List[Path]:
    fig, ax = get_figure()
    for gamma_d, points in result.curves.items():
        found = [p for p in points if p.t_o is not None]
        ax.plot(
            [p.gamma_forget for p in found],
            [p.t_o for p in found],
            marker="o",
            label=rf"$\Gamma/\Delta={gamma_d:g}$",
        )
    ax.set_xlabel(r"$\gamma/\Delta$")
    ax.set_ylabel(r"$\Delta t_o$")
    ax.legend(frameon=False)
    return [_save(fig, out_dir / "stabilization.svg")]


def _heatmap(
    result: SweepResult, values: np.ndarray, title: str, path: Path
) -> Path:
    fig, ax = get_figure(width=5.0, height=4.0)
    mesh = ax.pcolormesh(
        result.gamma_forget_grid,
        result.gamma_dephasing_grid,
        np.ma.masked_invalid(values),
        shading="nearest",
        cmap="viridis",
    )
    gamma = np.asarray(result.gamma_forget_grid)
    ax.plot(gamma, 0.2 * gamma, "w--", linewidth=1.0)
    ax.set_ylim(min(result.gamma_dephasing_grid), max(result.gamma_dephasing_grid))
    ax.set_xlabel(r"$\gamma/\Delta$")
    ax.set_ylabel(r"$\Gamma/\Delta$")
    ax.set_title(title)
    fig.colorbar(mesh, ax=ax)
    return _save(fig, path)


def plot_sweep(result: SweepResult, out_dir: Path, entropy_unit: str) -> List[Path]:
    def grid_of(attr: str) -> np.ndarray:
        return np.array(
            [
                [getattr(r, attr) if r is not None else np.nan for r in row]
                for row in result.records
            ]
        )

    return [
        _heatmap(
            result, grid_of("concurrence"), "C(AB)", out_dir / "sweep_concurrence.svg"
        ),
        _heatmap(
            result,
            grid_of("entropy_ab"),
            f"S(AB) [{entropy_unit}]",
            out_dir / "sweep_entropy_ab.svg",
        ),
        _heatmap(
            result,
            grid_of("entropy_loop"),
            f"S(L) [{entropy_unit}]",
            out_dir / "sweep_entropy_loop.svg",
        ),
    ]


def plot_bloch(snapshots: Sequence[BlochSnapshot], out_dir: Path) -> List[Path]:
    """One x-z projection panel per snapshot time."""
    fig, axes = get_figure(width=3.0 * len(snapshots), height=3.2, ncols=len(snapshots))
    axes = np.atleast_1d(axes)
    circle = np.linspace(0.0, 2.0 * math.pi, 200)
    for ax, snap in zip(axes, snapshots):
        pts = np.asarray(snap.points)
        ax.plot(np.cos(circle), np.sin(circle), color="0.7", linewidth=0.8)
        ax.scatter(
            pts[:, 0], pts[:, 2], s=6, c=pts[:, 1], cmap="coolwarm", vmin=-1, vmax=1
        )
        ax.set_aspect("equal")
        ax.set_xlim(-1.1, 1.1)
        ax.set_ylim(-1.1, 1.1)
        ax.set_title(rf"$\Delta t = {snap.time:g}$")
        ax.set_xlabel("x")
    axes[0].set_ylabel("z")
    return [_save(fig, out_dir / "bloch.svg")]


def plot_photodissociation(
    result: PhotodissociationResult, out_dir: Path
) -> List[Path]:
    fig, ax = get_figure()
    ax.plot(result.times, result.free_fidelity, label="free spins")
    ax.plot(result.times, result.qubot_fidelity, label="qubot")
    ax.set_xlabel(r"$\Delta t$")
    ax.set_ylabel("F")
    ax.legend(frameon=False)
    return [_save(fig, out_dir / "photodissociation.svg")]
