"""Matplotlib figures written next to the CLI's JSON/CSV outputs."""
from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .candidates import CandidateSpec, Kind, angular_steps, make_candidates  # noqa: E402
from .evalbench import INV_MAX, INV_MIN, hit_mask, to_inverse  # noqa: E402

plt.rcParams.update({
    "font.size": 9,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "savefig.dpi": 150,
})


def _save(fig, path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, bbox_inches="tight")
    plt.close(fig)
    return path


def candidate_steps_figure(path, baselines=(0.17, 0.58, 1.0), d_min=0.5, d_max=100.0, n=16):
    """Ray-angle step per candidate index for EV and GI sets at several baselines."""
    fig, axes = plt.subplots(1, 2, figsize=(8, 3), sharey=True)
    for ax, kind in zip(axes, (Kind.EV, Kind.GI)):
        for b in baselines:
            cset = make_candidates(CandidateSpec(d_min, d_max, n, kind, b))
            ax.plot(np.degrees(angular_steps(cset, b)), marker="o", ms=3, label=f"b = {b:g} m")
        ax.set_title(f"{kind.value} candidates")
        ax.set_xlabel("step index (near to far)")
    axes[0].set_ylabel("ray-angle step [deg]")
    axes[1].legend(frameon=False)
    return _save(fig, path)


def distance_figure(path, pred, gt=None, mask=None, title=None):
    """Inverse-distance panels: prediction, ground truth and absolute error."""
    p = to_inverse(pred)
    panels = [("prediction", p if mask is None else np.where(np.asarray(mask, bool), p, np.nan))]
    if gt is not None:
        valid = hit_mask(gt) if mask is None else hit_mask(gt) & np.asarray(mask, bool)
        g = to_inverse(gt)
        panels.append(("ground truth", np.where(hit_mask(gt), g, np.nan)))
        panels.append(("|error|", np.where(valid, np.abs(p - g), np.nan)))
    fig, axes = plt.subplots(len(panels), 1, figsize=(6, 2.2 * len(panels)), squeeze=False)
    for ax, (name, img) in zip(axes[:, 0], panels):
        if name == "|error|":
            im = ax.imshow(img, cmap="magma", vmin=0, vmax=0.2)
        else:
            im = ax.imshow(img, cmap="turbo", vmin=INV_MIN, vmax=min(INV_MAX, 1.0))
        ax.set_title(name)
        ax.set_axis_off()
        fig.colorbar(im, ax=ax, fraction=0.025, label="1/m")
    if title:
        fig.suptitle(title)
    return _save(fig, path)


def layout_figure(path, results, title=None):
    """Grouped bars of stale vs adjusted MAE per scene."""
    names = [r.scene for r in results]
    x = np.arange(len(names))
    fig, ax = plt.subplots(figsize=(max(4, 1.1 * len(names)), 3))
    ax.bar(x - 0.2, [r.stale.mae for r in results], 0.4, label="training candidates")
    ax.bar(x + 0.2, [r.adjusted.mae for r in results], 0.4, label="adjusted candidates")
    ax.set_xticks(x, names)
    ax.set_ylabel("MAE (inverse distance)")
    ax.legend(frameon=False)
    if title:
        ax.set_title(title)
    return _save(fig, path)
