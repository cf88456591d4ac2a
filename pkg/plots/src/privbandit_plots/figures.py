"""Figure builders for the two sweep-table families.

Both figures are pure views of the CSV rows. The trade-off figure draws one
regret-vs-deanonymization curve per strategy with a standard-error band and
marks the chance level; the noise figure draws de-anonymization probability
and the identifiability metric against the noise variance, one facet per
auxiliary-cell budget.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .results import SchemaError, SweepRow, read_sweep, strategy_order

STYLE_FILE = Path(__file__).parent / "style.mplstyle"


@dataclass(frozen=True)
class PlotSpec:
    """One figure request: input table, figure kind, output image."""

    input_csv: str
    kind: str
    output: str
    strategies: tuple[str, ...] = ()
    chance_line: bool = True

    def __post_init__(self):
        if self.kind not in ("tradeoff", "ads"):
            raise ValueError(f"unknown figure kind {self.kind!r}")
        object.__setattr__(self, "strategies", tuple(self.strategies))


def _select(rows: list[SweepRow], strategies: tuple[str, ...]) -> list[SweepRow]:
    if not strategies:
        return rows
    keep = [r for r in rows if r.strategy in strategies]
    if not keep:
        raise SchemaError(f"no rows match strategy filter {strategies!r}")
    return keep


def _chance_level(rows: list[SweepRow]) -> float | None:
    values = [r.deanon_chance for r in rows if r.deanon_chance is not None]
    return min(values) if values else None


def build_tradeoff_figure(rows: list[SweepRow], strategies: tuple[str, ...] = (),
                          chance_line: bool = True):
    """Regret vs. de-anonymization probability, one curve per strategy.

    Returns (figure, info) where info records the legend labels and the
    annotated chance level.
    """
    rows = _select(rows, strategies)
    plotted = [r for r in rows if r.deanon_prob is not None and r.regret_mean is not None]
    if not plotted:
        raise SchemaError("no rows carry both deanon_prob and regret_mean")

    with plt.style.context(str(STYLE_FILE)):
        fig, ax = plt.subplots()
        labels = []
        for name in strategy_order(plotted):
            group = [r for r in plotted if r.strategy == name]
            x = np.array([r.deanon_prob for r in group])
            y = np.array([r.regret_mean for r in group])
            err = np.array([r.regret_stderr or 0.0 for r in group])
            line, = ax.plot(x, y, marker="o", label=name)
            ax.fill_between(x, y - err, y + err, alpha=0.25,
                            color=line.get_color(), linewidth=0)
            labels.append(name)
        chance = _chance_level(plotted) if chance_line else None
        if chance is not None:
            ax.axvline(chance, color="0.35", linestyle="--", linewidth=1.0)
            ax.annotate(f"chance = {chance:.3f}", xy=(chance, 1.0),
                        xycoords=("data", "axes fraction"), xytext=(4, -4),
                        textcoords="offset points", va="top", fontsize=8,
                        color="0.35")
        ax.set_xlabel("de-anonymization probability")
        ax.set_ylabel("cumulative regret")
        ax.legend(title=None)
    return fig, {"legend": labels, "chance": chance}


def build_ads_figure(rows: list[SweepRow], strategies: tuple[str, ...] = (),
                     chance_line: bool = True):
    """De-anonymization probability and identifiability vs. noise variance.

    One facet per auxiliary-cell budget; solid lines are the attack's success
    probability, dashed lines the identifiability metric, colored per
    strategy. Returns (figure, info) with legend labels and facet budgets.
    """
    rows = _select(rows, strategies)
    plotted = [r for r in rows if r.epsilon is not None and r.deanon_prob is not None]
    if not plotted:
        raise SchemaError("no rows carry both epsilon and deanon_prob")

    budgets = sorted({r.n_cells for r in plotted if r.n_cells is not None})
    if not budgets:
        raise SchemaError("no rows carry n_cells")
    names = strategy_order(plotted)

    with plt.style.context(str(STYLE_FILE)):
        ncols = min(len(budgets), 5)
        nrows = int(np.ceil(len(budgets) / ncols))
        fig, axes = plt.subplots(nrows, ncols, squeeze=False, sharey=True,
                                 figsize=(2.6 * ncols + 1.2, 2.2 * nrows + 0.9))
        handles = {}
        chance = _chance_level(plotted) if chance_line else None
        for pos, budget in enumerate(budgets):
            ax = axes[pos // ncols][pos % ncols]
            facet = sorted((r for r in plotted if r.n_cells == budget),
                           key=lambda r: r.epsilon)
            for name in names:
                group = [r for r in facet if r.strategy == name]
                if not group:
                    continue
                eps = np.array([r.epsilon for r in group])
                deanon = np.array([r.deanon_prob for r in group])
                line, = ax.plot(eps, deanon, marker="o", label=name)
                handles.setdefault(name, line)
                ads = [r.ads for r in group]
                if all(a is not None for a in ads):
                    ax.plot(eps, np.array(ads), marker=".", linestyle="--",
                            color=line.get_color(), alpha=0.8)
            if chance is not None:
                ax.axhline(chance, color="0.35", linestyle=":", linewidth=1.0)
            ax.set_title(f"{budget} aux cells", fontsize=9)
            ax.set_ylim(-0.05, 1.05)
            ax.set_xlabel("noise variance")
        for pos in range(len(budgets), nrows * ncols):
            axes[pos // ncols][pos % ncols].set_axis_off()
        axes[0][0].set_ylabel("probability / identifiability")
        fig.legend(handles.values(), handles.keys(), loc="upper center",
                   ncol=min(len(names), 5), bbox_to_anchor=(0.5, 1.02))
        fig.text(0.5, 0.005,
                 "solid: de-anonymization probability    dashed: identifiability",
                 ha="center", fontsize=8, color="0.35")
        fig.tight_layout(rect=(0.0, 0.03, 1.0, 0.93))
    return fig, {"legend": list(handles.keys()), "facets": budgets, "chance": chance}


def _save(fig, output) -> Path:
    output = Path(output)
    output.parent.mkdir(parents=True, exist_ok=True)
    # pin the id salt and strip the creation date so identical inputs give
    # identical bytes
    with matplotlib.rc_context({"svg.hashsalt": "privbandit"}):
        if output.suffix.lower() == ".svg":
            fig.savefig(output, metadata={"Date": None})
        else:
            fig.savefig(output)
    plt.close(fig)
    return output


def plot_tradeoff(spec: PlotSpec) -> Path:
    rows = read_sweep(spec.input_csv)
    fig, _ = build_tradeoff_figure(rows, spec.strategies, spec.chance_line)
    return _save(fig, spec.output)


def plot_ads(spec: PlotSpec) -> Path:
    rows = read_sweep(spec.input_csv)
    fig, _ = build_ads_figure(rows, spec.strategies, spec.chance_line)
    return _save(fig, spec.output)
