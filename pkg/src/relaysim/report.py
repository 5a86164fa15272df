"""CSV tables, SVG charts and the plain-text acceptance summary.

All writers are deterministic: same inputs give byte-identical files.
"""

from __future__ import annotations

import csv
import io
import logging
import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .harness import Row, SweepResult  # noqa: E402
from .metrics import DROP_CAUSES  # noqa: E402
from .scenario import RunSummary  # noqa: E402

log = logging.getLogger(__name__)

plt.rcParams["svg.hashsalt"] = "relaysim"
plt.rcParams["svg.fonttype"] = "none"

RUN_COLUMNS = ["seed", "flow", "normalized_throughput", "mean_delay_ms", "p95_delay_ms",
               *(f"drops_{c}" for c in DROP_CAUSES)]
AGG_COLUMNS = ["value", "flow", "metric", "mean", "half_width", "ci_lo", "ci_hi", "n"]


class ReportError(OSError):
    pass


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return f"{x:.6g}"
    return str(x)


def _csv_text(header: list[str], rows: list[list]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_fmt(x) for x in r])
    return buf.getvalue()


def run_rows(runs: list[RunSummary]) -> list[list]:
    rows = []
    for r in runs:
        for fid, f in sorted(r.flows.items()):
            rows.append([r.seed, fid, f.normalized_throughput, f.mean_delay_ms, f.p95_delay_ms,
                         *(f.drops.get(c, 0) for c in DROP_CAUSES)])
    return rows


def runs_csv(runs: list[RunSummary]) -> str:
    return _csv_text(RUN_COLUMNS, run_rows(runs))


def aggregate_csv(rows: list[Row]) -> str:
    out = []
    for r in rows:
        lo = hi = None
        if r.mean is not None:
            lo, hi = r.mean - r.half_width, r.mean + r.half_width
        out.append([r.value, r.flow, r.metric, r.mean, r.half_width, lo, hi, r.n])
    return _csv_text(AGG_COLUMNS, out)


def _write(path: str, text: str) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(text)


def sweep_figure(result: SweepResult, flows: list[str] | None = None):
    """Throughput and delay panels over the sweep axis, with 95% CI bars."""
    rows = result.rows()
    values = [v for v in dict.fromkeys(r.value for r in rows)]
    flows = flows or sorted({r.flow for r in rows if r.metric == "normalized_throughput"})
    fig, axes = plt.subplots(1, 2, figsize=(10, 3.8))
    numeric = result.spec.axis == "alpha"
    width = 0.8 / max(1, len(flows))
    for k, (metric, label) in enumerate((("normalized_throughput", "normalized throughput"),
                                          ("mean_delay_ms", "mean delay [ms]"))):
        ax = axes[k]
        for j, flow in enumerate(flows):
            pts = {r.value: r for r in rows if r.flow == flow and r.metric == metric}
            ys = [pts[v].mean if v in pts and pts[v].mean is not None else float("nan")
                  for v in values]
            es = [pts[v].half_width if v in pts and pts[v].half_width is not None else 0.0
                  for v in values]
            if numeric:
                ax.errorbar(values, ys, yerr=es, marker="o", capsize=3, label=flow)
            else:
                xs = [i + (j - (len(flows) - 1) / 2) * width for i in range(len(values))]
                ax.bar(xs, ys, width, yerr=es, capsize=3, label=flow)
        if metric == "mean_delay_ms":
            ax.axhline(100.0, color="k", linestyle="--", linewidth=0.8)
        if not numeric:
            ax.set_xticks(range(len(values)))
            ax.set_xticklabels([str(v) for v in values], rotation=30)
        ax.set_xlabel(result.spec.axis)
        ax.set_ylabel(label)
        ax.legend(fontsize=8)
    fig.tight_layout()
    return fig


def save_svg(fig, path: str) -> None:
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def emit_report(result: SweepResult | None, out_dir: str, prefix: str,
                acceptance: list | None = None) -> list[str]:
    """Write ``{prefix}_throughput.csv``, ``{prefix}_delay.csv``, ``{prefix}.svg`` and,
    when given, ``acceptance.txt``. Returns the paths written."""
    rows = result.rows() if result is not None else []
    if not rows and not acceptance:
        log.warning("nothing to report: empty tables")
        return []
    try:
        os.makedirs(out_dir, exist_ok=True)
        if not os.access(out_dir, os.W_OK):
            raise PermissionError(f"{out_dir} is not writable")
        written = []
        if rows:
            for metric, suffix in (("normalized_throughput", "throughput"),
                                   ("mean_delay_ms", "delay")):
                path = os.path.join(out_dir, f"{prefix}_{suffix}.csv")
                _write(path, aggregate_csv([r for r in rows if r.metric == metric]))
                written.append(path)
            path = os.path.join(out_dir, f"{prefix}.svg")
            save_svg(sweep_figure(result), path)
            written.append(path)
        if acceptance is not None:
            path = os.path.join(out_dir, "acceptance.txt")
            _write(path, acceptance_text(acceptance))
            written.append(path)
    except OSError as exc:
        raise ReportError(f"cannot write report to {out_dir}: {exc}") from exc
    return written


def acceptance_text(results: list) -> str:
    lines = [f"{r.id} {'PASS' if r.passed else 'FAIL'}  {r.detail}" for r in results]
    failing = [r.id for r in results if not r.passed]
    lines.append("")
    lines.append("failing: " + (" ".join(failing) if failing else "none"))
    return "\n".join(lines) + "\n"
