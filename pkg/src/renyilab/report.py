"""CSV reports and the optional matplotlib figures rendered alongside them.

Reports are locale-independent CSV (header row, '.' decimal separator, one
units column).  Figure rendering is opt-in: when a plot directory is given,
each report function drops a PNG next to the delimited output.
"""

from __future__ import annotations

import csv
import io
import math
import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

__all__ = ["format_value", "write_csv", "render_regression", "render_sweep",
           "render_packing"]


def format_value(x) -> str:
    if isinstance(x, float):
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return f"{x:.12g}"
    return str(x)


def write_csv(stream, header, rows) -> None:
    """Deterministic CSV: same rows in, same bytes out."""
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([format_value(v) for v in r])


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    write_csv(buf, header, rows)
    return buf.getvalue()


def _save(fig, plot_dir: str, name: str) -> str:
    os.makedirs(plot_dir, exist_ok=True)
    path = os.path.join(plot_dir, name)
    fig.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(fig)
    return path


def render_regression(report, plot_dir: str, name: str = "exponent_regression.png") -> str:
    """-log(divergence) against n with the fitted slope and the predicted exponent."""
    ns = sorted(report.per_n)
    ys = [-math.log(report.per_n[n][0]) if report.per_n[n][0] > 0 else math.nan for n in ns]
    fig, ax = plt.subplots(figsize=(5.2, 3.4))
    ax.plot(ns, ys, "o", label="simulation")
    if not math.isnan(report.slope):
        xs = [ns[0], ns[-1]]
        mean_n = sum(n for n, y in zip(ns, ys) if not math.isnan(y)) / max(
            sum(1 for y in ys if not math.isnan(y)), 1)
        mean_y = sum(y for y in ys if not math.isnan(y)) / max(
            sum(1 for y in ys if not math.isnan(y)), 1)
        ax.plot(xs, [mean_y + report.slope * (x - mean_n) for x in xs], "-",
                label=f"fit slope {report.slope:.4f}")
    if report.predicted is not None:
        ax.plot(ns, [ys[0] + report.predicted * (n - ns[0]) for n in ns], "--",
                label=f"theory {report.predicted:.4f}")
    ax.set_xlabel("blocklength n")
    ax.set_ylabel(r"$-\log D_q$")
    ax.legend(fontsize=8)
    ax.set_title(f"q={report.q}, {report.trials} trials, seed {report.seed}", fontsize=9)
    return _save(fig, plot_dir, name)


def render_sweep(xs, series: dict, xlabel: str, ylabel: str, plot_dir: str,
                 name: str = "sweep.png", title: str = "") -> str:
    fig, ax = plt.subplots(figsize=(5.2, 3.4))
    for label, ys in series.items():
        ax.plot(xs, ys, marker=".", label=str(label))
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title, fontsize=9)
    if len(series) > 1:
        ax.legend(fontsize=8)
    return _save(fig, plot_dir, name)


def render_packing(report, plot_dir: str, name: str = "packing_covering.png") -> str:
    fig, ax = plt.subplots(figsize=(5.2, 3.4))
    data = report.per_trial_sup_dev if report.per_trial_sup_dev is not None \
        else report.per_trial_sup_phi
    ax.hist(data, bins=24)
    label = "sup |phi/E[phi] - 1|" if report.regime == "covering" else "sup phi"
    ax.set_xlabel(label)
    ax.set_ylabel("trials")
    ax.set_title(f"{report.regime} regime, n={report.n}, M={report.M}", fontsize=9)
    return _save(fig, plot_dir, name)
