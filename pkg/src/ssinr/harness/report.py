"""Merge CSV outputs into a single markdown document."""
import csv
from pathlib import Path


def _table(path):
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        return "_(empty)_\n"
    header, body = rows[0], rows[1:]
    lines = ["| " + " | ".join(header) + " |", "|" + "---|" * len(header)]
    lines += ["| " + " | ".join(r) + " |" for r in body]
    return "\n".join(lines) + "\n"


def write_report(directory, out_path):
    """Every CSV under ``directory`` (sorted by path) becomes one section."""
    root = Path(directory).resolve()
    out_path = Path(out_path)
    paths = sorted(p for p in root.rglob("*.csv") if p.resolve() != out_path.resolve())
    parts = [f"# Run summary: {root.name}\n"]
    for p in paths:
        parts.append(f"\n## {p.relative_to(root).as_posix()}\n\n{_table(p)}")
    out_path.parent.mkdir(parents=True, exist_ok=True)
    out_path.write_text("".join(parts), encoding="utf-8")
    return len(paths)
