"""Comparison tables over stored run results.

Two styles: "table2" compares models (Model, mIoU, Dice, HD, MAD);
"table3" adds the Enhancement column. mIoU/Dice print with 4 decimals,
HD/MAD with 2, matching the reporting convention of the experiments this
toolkit reproduces.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .runner import RunResult

_ENHANCEMENT_RANK = {"Original": 0, "original": 0, "CLAHE": 1, "clahe": 1,
                     "CLAHE+Gamma": 2, "clahe_gamma": 2, "DCPD": 3, "dcpd": 3}


@dataclass(frozen=True)
class RenderedTable:
    markdown: str
    csv: str


def _rows(results: Sequence[RunResult], with_enhancement: bool) -> list[list[str]]:
    ordered = sorted(
        results,
        key=lambda r: (r.label, _ENHANCEMENT_RANK.get(r.enhancement, 99), r.enhancement),
    )
    rows = []
    for r in ordered:
        m = r.dataset_metrics
        cells = [r.label]
        if with_enhancement:
            cells.append(r.enhancement)
        cells += [f"{m.miou:.4f}", f"{m.dice:.4f}", f"{m.hd_mean:.2f}", f"{m.mad_mean:.2f}"]
        rows.append(cells)
    return rows


def render_table(results: Sequence[RunResult], style: str = "table2") -> RenderedTable:
    """Markdown and CSV renderings of a result list, sorted by label."""
    if style not in ("table2", "table3"):
        raise ValueError(f"style must be table2 or table3, got {style!r}")
    if not results:
        raise ValueError("render_table needs at least one result")
    with_enh = style == "table3"
    header = ["Model"] + (["Enhancement"] if with_enh else []) + ["mIoU", "Dice", "HD", "MAD"]
    rows = _rows(results, with_enh)

    csv_lines = [",".join(header)] + [",".join(r) for r in rows]
    widths = [max(len(h), *(len(r[i]) for r in rows)) for i, h in enumerate(header)]
    md_lines = [
        "| " + " | ".join(h.ljust(widths[i]) for i, h in enumerate(header)) + " |",
        "|" + "|".join("-" * (w + 2) for w in widths) + "|",
    ]
    md_lines += [
        "| " + " | ".join(c.ljust(widths[i]) for i, c in enumerate(row)) + " |"
        for row in rows
    ]
    return RenderedTable(markdown="\n".join(md_lines) + "\n", csv="\n".join(csv_lines) + "\n")
