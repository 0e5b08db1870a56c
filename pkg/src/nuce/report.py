"""Matplotlib figure rendering for the CLI report paths.

Figures are written as SVG next to the CSV/JSON outputs. A fixed hash
salt and stripped date metadata keep reruns byte-identical.
"""

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

plt.rcParams["svg.hashsalt"] = "nuce"

CLASS_COLORS = ("tab:blue", "tab:red", "tab:green", "tab:orange",
                "tab:purple", "tab:brown")


def _save(fig, path):
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def loss_curves_figure(histories, path) -> None:
    """One training-loss line per run; histories is [(label, values)]."""
    fig, ax = plt.subplots(figsize=(6, 4))
    for label, values in histories:
        ax.plot(range(1, len(values) + 1), values, linewidth=1.0, label=label)
    ax.set_xlabel("epoch")
    ax.set_ylabel("training loss")
    if len(histories) <= 8:
        ax.legend(fontsize=8)
    fig.tight_layout()
    _save(fig, path)


def metric_bar_figure(labels, values, ylabel, path) -> None:
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.bar(range(len(labels)), values, color="tab:blue")
    ax.set_xticks(range(len(labels)))
    ax.set_xticklabels(labels, rotation=30, ha="right", fontsize=8)
    ax.set_ylabel(ylabel)
    ax.set_ylim(0.0, 1.05)
    fig.tight_layout()
    _save(fig, path)


def pr_curve_figure(recall, precision, title, path) -> None:
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.plot(recall, precision, marker="o", markersize=3, linewidth=1.0)
    ax.set_xlabel("recall")
    ax.set_ylabel("precision")
    ax.set_xlim(0.0, 1.05)
    ax.set_ylim(0.0, 1.05)
    ax.set_title(title)
    fig.tight_layout()
    _save(fig, path)


def scatter_figure(points, labels, path) -> None:
    """2-D embedding scatter colored by class label."""
    fig, ax = plt.subplots(figsize=(5, 5))
    classes = sorted(set(int(y) for y in labels))
    for c in classes:
        mask = [int(y) == c for y in labels]
        xs = [p[0] for p, m in zip(points, mask) if m]
        ys = [p[1] for p, m in zip(points, mask) if m]
        ax.scatter(xs, ys, s=6, alpha=0.6,
                   color=CLASS_COLORS[c % len(CLASS_COLORS)], label=f"class {c}")
    ax.set_xlabel("pc1")
    ax.set_ylabel("pc2")
    ax.legend(fontsize=8)
    fig.tight_layout()
    _save(fig, path)
