"""Figures for the dominance analysis, written straight to files."""
from __future__ import annotations

from fractions import Fraction
from typing import Mapping, Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .analysis import DominanceRow  # noqa: E402


def plot_dominance(rows: Sequence[DominanceRow],
                   sweep: Mapping[tuple, Fraction],
                   path: str,
                   title: str = "") -> None:
    """Two panels: favorable base indices per |e|, and the sweep heatmap."""
    fig, (left, right) = plt.subplots(1, 2, figsize=(11, 4.5))

    n = [r.n_exts for r in rows]
    left.bar(n, n, color="0.85", label="cases (i = 1..|e|)")
    left.bar(n, [r.max_favorable_i for r in rows], color="tab:blue",
             label="hierarchy-first no worse")
    left.set_xlabel("active extensions |e|")
    left.set_ylabel("base method index i")
    left.set_xticks(n)
    left.legend(loc="upper left", frameon=False)
    if title:
        left.set_title(title)

    subs = sorted({k[0] for k in sweep})
    sups = sorted({k[1] for k in sweep})
    grid = [[float(sweep[(s, p)]) for s in subs] for p in sups]
    im = right.imshow(grid, origin="lower", cmap="viridis", vmin=0, vmax=1, aspect="auto")
    right.set_xticks(range(len(subs)), [str(s) for s in subs])
    right.set_yticks(range(len(sups)), [str(p) for p in sups])
    right.set_xlabel("average subclasses")
    right.set_ylabel("average superclasses")
    right.set_title("fraction of cases favoring hierarchy-first")
    fig.colorbar(im, ax=right)

    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
