"""SVG line charts of summary metrics with shaded one-standard-deviation bands."""
from __future__ import annotations

import json
import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

METRICS = ("l1", "l2", "kept_fraction")
LABELS = {"l1": "L1 error", "l2": "L2 error", "kept_fraction": "fraction of windows used"}


def _x_values(summary: list[dict]) -> tuple[list, bool]:
    raw = list(dict.fromkeys(row["sweep_value"] for row in summary))
    parsed = [json.loads(v) if v else None for v in raw]
    numeric = all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in parsed)
    return (parsed if numeric else list(range(len(raw)))), numeric


def write_plots(summary: list[dict], out_dir, x_label: str) -> list[str]:
    """One chart per metric; returns the written file names (relative to ``out_dir``)."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    raw = list(dict.fromkeys(row["sweep_value"] for row in summary))
    xs, numeric = _x_values(summary)
    estimators = list(dict.fromkeys(row["estimator"] for row in summary))
    written = []
    for metric in METRICS:
        fig, ax = plt.subplots(figsize=(6, 4))
        for est in estimators:
            pts = []
            for x, key in zip(xs, raw):
                row = next(r for r in summary if r["sweep_value"] == key and r["estimator"] == est)
                mean, std = row[f"{metric}_mean"], row[f"{metric}_std"]
                if math.isfinite(mean):
                    pts.append((x, mean, std if math.isfinite(std) else 0.0))
            if not pts:
                continue
            px, pm, ps = zip(*pts)
            (line,) = ax.plot(px, pm, marker="o", label=est)
            ax.fill_between(px, [m - s for m, s in zip(pm, ps)], [m + s for m, s in zip(pm, ps)],
                            color=line.get_color(), alpha=0.2, linewidth=0)
        if not numeric:
            ax.set_xticks(xs, [k or "-" for k in raw])
        ax.set_xlabel(x_label)
        ax.set_ylabel(LABELS[metric])
        ax.grid(alpha=0.3)
        if ax.get_legend_handles_labels()[0]:
            ax.legend()
        name = f"{metric}.svg"
        fig.tight_layout()
        fig.savefig(out_dir / name, format="svg", metadata={"Date": None})
        plt.close(fig)
        written.append(name)
    return written
