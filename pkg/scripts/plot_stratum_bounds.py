"""Plot the per-stratum intervals behind a conditioning-strategy result.

Reads the CSV written by ``rulebounds bounds --stratum-csv`` and draws one
horizontal interval per stratum, scaled marker for the stratum weight.
Skipped (zero-mass) strata are listed in the margin instead of plotted.
"""

import argparse
import csv
import sys


def load_strata(path):
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        fixed = {"weight", "level", "guideline_level", "lower", "upper", "skipped"}
        label_cols = [c for c in (reader.fieldnames or []) if c not in fixed]
        rows = []
        for row in reader:
            rows.append(
                {
                    "label": ", ".join(f"{c}={row[c]}" for c in label_cols),
                    "weight": float(row["weight"]),
                    "lower": float(row["lower"]) if row["lower"] else None,
                    "upper": float(row["upper"]) if row["upper"] else None,
                    "skipped": row["skipped"] == "1",
                }
            )
    return rows


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--input", required=True, help="stratum CSV")
    parser.add_argument("--output", default=None,
                        help="image path; omit to open a window")
    parser.add_argument("--title", default="per-stratum bounds")
    args = parser.parse_args(argv)

    try:
        import matplotlib
        if args.output:
            matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError:
        print("matplotlib is not installed; pip install matplotlib", file=sys.stderr)
        return 1

    try:
        strata = load_strata(args.input)
    except OSError as err:
        print(f"cannot read {args.input}: {err}", file=sys.stderr)
        return 1
    plotted = [s for s in strata if not s["skipped"]]
    skipped = [s for s in strata if s["skipped"]]
    if not plotted:
        print("nothing to plot: every stratum was skipped", file=sys.stderr)
        return 1

    fig, ax = plt.subplots(figsize=(7, 0.6 * len(plotted) + 1.5))
    for i, s in enumerate(plotted):
        ax.plot([s["lower"], s["upper"]], [i, i], lw=2, color="C0")
        ax.plot([s["lower"], s["upper"]], [i, i], "|", ms=10, color="C0")
        # marker area tracks the stratum's share of the population
        ax.scatter(
            [(s["lower"] + s["upper"]) / 2], [i],
            s=400 * s["weight"], color="C0", alpha=0.4, zorder=3,
        )
    ax.set_yticks(range(len(plotted)))
    ax.set_yticklabels([s["label"] for s in plotted])
    ax.set_xlabel("bound on the stratum outcome probability")
    ax.set_title(args.title)
    if skipped:
        ax.text(
            0.99, 0.01,
            "skipped (zero mass): " + "; ".join(s["label"] for s in skipped),
            transform=ax.transAxes, ha="right", va="bottom", fontsize=8,
        )
    fig.tight_layout()
    if args.output:
        fig.savefig(args.output, dpi=150)
        print(f"figure written to {args.output}")
    else:
        plt.show()
    return 0


if __name__ == "__main__":
    sys.exit(main())
