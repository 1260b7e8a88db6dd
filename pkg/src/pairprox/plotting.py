"""Static log-scale error plots written next to the CSV output."""

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

# fixed salt and no date so repeated runs produce identical SVG files
matplotlib.rcParams["svg.hashsalt"] = "pairprox"


def plot_error_curves(curves, path, title="", ylabel=r"$\|x_n - x^*\|_2$"):
    """Plot each ``label -> (n, err)`` curve on a semilog axis and save to ``path``."""
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for label, (n, err) in curves.items():
        err = np.asarray(err, dtype=float)
        mask = err > 0
        ax.semilogy(np.asarray(n)[mask], err[mask], label=label, lw=1.4)
    ax.set_xlabel("iteration n")
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title)
    ax.grid(True, which="both", alpha=0.3)
    if curves:
        ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, metadata={"Date": None} if str(path).endswith(".svg") else None)
    plt.close(fig)
    return path
