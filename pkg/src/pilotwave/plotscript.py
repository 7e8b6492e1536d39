"""gnuplot script overlaying closed-form and oracle trajectory CSVs."""

from __future__ import annotations

import os
from pathlib import Path


def _panels(paths):
    """Normalize to a list of panels, each a list of CSV paths."""
    paths = list(paths)
    if not paths:
        raise ValueError("emit_plot_script needs at least one trajectory CSV")
    if all(isinstance(p, (str, os.PathLike)) for p in paths):
        return [[Path(p) for p in paths]]
    panels = [[Path(p) for p in panel] for panel in paths]
    if any(not panel for panel in panels):
        raise ValueError("every ensemble panel needs at least one CSV")
    return panels


def _curve(csv: Path, base: Path) -> str:
    rel = os.path.relpath(csv.resolve(), base.resolve()).replace(os.sep, "/")
    title = csv.stem.replace("_", " ")
    if "guidance" in csv.stem:
        style = "with points pt 7 ps 0.4"
    else:
        style = "with lines lw 2"
    return f"'{rel}' using 1:2 {style} title '{title}'"


def emit_plot_script(paths, output) -> Path:
    """Write a gnuplot script plotting q(t) for each CSV.

    ``paths`` is either a flat list of CSVs (one panel) or a list of lists
    (one panel per ensemble).  CSVs are referenced relative to the script.
    """
    panels = _panels(paths)
    for panel in panels:
        for csv in panel:
            if not csv.is_file():
                raise FileNotFoundError(f"trajectory CSV not found: {csv}")
    output = Path(output)
    output.parent.mkdir(parents=True, exist_ok=True)
    base = output.parent
    lines = [
        "set datafile separator ','",
        "set key outside right",
        "set xlabel 't'",
        "set ylabel 'q'",
    ]
    if len(panels) > 1:
        lines.append(f"set multiplot layout {len(panels)},1")
    for i, panel in enumerate(panels):
        lines.append(f"set title 'ensemble {i + 1}'")
        lines.append("plot " + ", \\\n     ".join(_curve(c, base) for c in panel))
    if len(panels) > 1:
        lines.append("unset multiplot")
    output.write_text("\n".join(lines) + "\n")
    return output
