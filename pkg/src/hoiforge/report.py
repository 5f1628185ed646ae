"""Figure rendering for histogram and evaluation reports.

The stats/eval commands emit machine-readable JSON; this module is the
downstream renderer that turns those files into PNG figures with a CSV table
alongside, so a report directory is both human-browsable and scriptable.
"""

from __future__ import annotations

import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .stats import CategoryHistogram, tail_report
from .vocabulary import TripletVocabulary


def _category_label(vocab: TripletVocabulary | None, hoi_id: int) -> str:
    if vocab is None:
        return str(hoi_id)
    e = vocab.entry(hoi_id)
    return f"{e.verb} {e.object_name}"


def write_histogram_report(
    hist: CategoryHistogram,
    out_dir: Path | str,
    stem: str = "histogram",
    threshold: int = 50,
    vocab: TripletVocabulary | None = None,
    compare: CategoryHistogram | None = None,
) -> tuple[Path, Path]:
    """Render the per-category count distribution and write the CSV table.

    Categories are ordered by descending count so the long tail reads left to
    right; ``compare`` overlays a second histogram (e.g. after merging) on
    the same category order.  Returns (png_path, csv_path).
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    png_path = out_dir / f"{stem}.png"
    csv_path = out_dir / f"{stem}.csv"

    order = sorted(range(len(hist.counts)), key=lambda i: (-hist.counts[i], i))
    counts = [hist.counts[i] for i in order]
    below, _ = tail_report(hist, threshold)

    fig, ax = plt.subplots(figsize=(10, 4))
    ax.bar(range(len(counts)), counts, width=1.0, color="#4878cf", label=f"{hist.unit} per category")
    if compare is not None and len(compare.counts) == len(hist.counts):
        ax.bar(
            range(len(counts)),
            [compare.counts[i] for i in order],
            width=1.0,
            color="#e24a33",
            alpha=0.6,
            label="comparison",
        )
    ax.axhline(threshold, color="black", linewidth=0.8, linestyle="--", label=f"threshold {threshold}")
    ax.set_xlabel("category rank")
    ax.set_ylabel(hist.unit)
    ax.set_title(f"category distribution ({below} of {len(counts)} below {threshold})")
    ax.legend(loc="upper right", fontsize=8)
    fig.tight_layout()
    fig.savefig(png_path, dpi=150)
    plt.close(fig)

    with csv_path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        header = ["rank", "hoi_id", "label", "count"]
        if compare is not None:
            header.append("comparison_count")
        writer.writerow(header)
        for rank, i in enumerate(order):
            row = [rank, i, _category_label(vocab, i), hist.counts[i]]
            if compare is not None:
                row.append(compare.counts[i] if i < len(compare.counts) else "")
            writer.writerow(row)
    return png_path, csv_path


def write_eval_report(
    report: dict,
    out_dir: Path | str,
    stem: str = "eval",
    vocab: TripletVocabulary | None = None,
) -> tuple[Path, Path]:
    """Render per-category AP bars from a map_report JSON dict, plus the CSV."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    png_path = out_dir / f"{stem}.png"
    csv_path = out_dir / f"{stem}.csv"

    cats = [c for c in report.get("per_category", []) if c.get("ap") is not None]
    cats.sort(key=lambda c: -c["ap"])
    colors = ["#e24a33" if c.get("rare") else "#4878cf" for c in cats]

    fig, ax = plt.subplots(figsize=(10, 4))
    ax.bar(range(len(cats)), [c["ap"] for c in cats], width=1.0, color=colors)
    parts = [f"full {report['full']:.4f}" if report.get("full") is not None else "full n/a"]
    if report.get("rare") is not None:
        parts.append(f"rare {report['rare']:.4f}")
    if report.get("non_rare") is not None:
        parts.append(f"non-rare {report['non_rare']:.4f}")
    ax.set_title(f"AP per category ({report.get('mode', '?')} mode): " + ", ".join(parts))
    ax.set_xlabel("category rank by AP (rare in red)")
    ax.set_ylabel("AP")
    ax.set_ylim(0.0, 1.05)
    fig.tight_layout()
    fig.savefig(png_path, dpi=150)
    plt.close(fig)

    with csv_path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["hoi_id", "label", "ap", "n_gt", "n_pred", "rare"])
        for c in report.get("per_category", []):
            writer.writerow(
                [
                    c["hoi_id"],
                    _category_label(vocab, c["hoi_id"]),
                    "" if c.get("ap") is None else c["ap"],
                    c.get("n_gt", ""),
                    c.get("n_pred", ""),
                    c.get("rare", ""),
                ]
            )
    return png_path, csv_path
