"""CSV emission/parsing for experiment records, and diagnostic plots.

The CSV schema is exactly `n,d,t,trials,hits,phat,stderr,seed,flags`.
Floats are written with repr (shortest round-trip form), so parsing a file
and re-emitting it reproduces the bytes exactly; flags are joined by ';'.
"""

from __future__ import annotations

from pathlib import Path

from ..errors import ConfigError
from .distance import CSV_HEADER, ExperimentRecord


def render_csv(records: list[ExperimentRecord]) -> str:
    lines = [CSV_HEADER]
    for r in records:
        lines.append(
            f"{r.n},{r.d},{r.t!r},{r.trials},{r.hits},{r.phat!r},"
            f"{r.stderr!r},{r.seed},{';'.join(r.flags)}"
        )
    return "\n".join(lines) + "\n"


def emit_records(records: list[ExperimentRecord], out_path: str | Path) -> Path:
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    out_path.write_text(render_csv(records))
    return out_path


def parse_records(path: str | Path) -> list[ExperimentRecord]:
    text = Path(path).read_text()
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0] != CSV_HEADER:
        raise ConfigError(f"unexpected CSV header in {path}")
    records = []
    for ln in lines[1:]:
        parts = ln.split(",")
        if len(parts) != 9:
            raise ConfigError(f"malformed CSV row: {ln!r}")
        records.append(
            ExperimentRecord(
                n=int(parts[0]),
                d=int(parts[1]),
                t=float(parts[2]),
                trials=int(parts[3]),
                hits=int(parts[4]),
                phat=float(parts[5]),
                stderr=float(parts[6]),
                seed=int(parts[7]),
                flags=tuple(f for f in parts[8].split(";") if f),
            )
        )
    return records


def write_plots(
    records: list[ExperimentRecord], out_dir: str | Path, basename: str = "dist"
) -> list[Path]:
    """One log-log decay plot per (n, d) group, with a slope-d guide line."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    groups: dict[tuple[int, int], list[ExperimentRecord]] = {}
    for r in records:
        groups.setdefault((r.n, r.d), []).append(r)
    for (n, d), rows in sorted(groups.items()):
        rows = sorted(rows, key=lambda r: r.t)
        ts = [r.t for r in rows]
        ps = [max(r.phat, 0.5 / r.trials) for r in rows]
        errs = [r.stderr for r in rows]
        fig, ax = plt.subplots(figsize=(5, 4))
        ax.errorbar(ts, ps, yerr=errs, fmt="o-", capsize=3, label="hit fraction")
        anchor = next(
            (r for r in reversed(rows) if r.phat > 10.0 / r.trials), None
        )
        if anchor is not None:
            guide = [anchor.phat * (t / anchor.t) ** d for t in ts]
            ax.plot(ts, guide, "--", label=f"slope {d} guide")
        ax.set_xscale("log")
        ax.set_yscale("log")
        ax.set_xlabel("t")
        ax.set_ylabel(r"P(dist $\leq t\sqrt{d}$)")
        ax.set_title(f"n={n}, d={d}")
        ax.legend()
        fig.tight_layout()
        p = out_dir / f"{basename}_n{n}_d{d}.png"
        fig.savefig(p, dpi=110)
        plt.close(fig)
        paths.append(p)
    return paths
