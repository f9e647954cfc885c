"""Aggregate bench outputs and oracle labels into a summary table."""

import csv
import json
import logging
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Union

from pydantic import ValidationError

from app.config import LOGGER_NAME
from app.datasetgen.views import OptimumHistogram
from app.errors import DatasetError
from app.report.bench import geomean
from app.report.constants import (
    BENCH_JSON_FILE,
    HISTOGRAM_CSV_FILE,
    METHOD_BRUTEFORCE,
    RUN_SUMMARY_FILE,
    SUMMARY_CSV_FILE,
    SUMMARY_JSON_FILE,
    SUMMARY_MD_FILE,
)
from app.report.views import BenchReport, MethodSummary, RunLedger, RunSummary

logger = logging.getLogger(LOGGER_NAME)


def load_bench(path: Union[str, Path]) -> BenchReport:
    path = Path(path)
    if path.is_dir():
        path = path / BENCH_JSON_FILE
    try:
        return BenchReport.model_validate_json(path.read_text(encoding="utf-8"))
    except OSError as e:
        raise DatasetError(detail=f"Cannot read bench report {path}: {e}", context={"path": str(path)})
    except ValidationError as e:
        raise DatasetError(detail=f"Invalid bench report {path}: {e.error_count()} errors", context={"path": str(path)})


def summarize(reports: Sequence[BenchReport]) -> List[MethodSummary]:
    """
    Pool the per-program values of every report and summarize each method.

    Methods are listed in first-seen order. gap_to_oracle is relative to the
    brute-force geomean when a brute-force column exists.
    """
    pooled: Dict[str, List[float]] = {}
    for report in reports:
        for method in report.methods:
            pooled.setdefault(method, [])
        for program in report.programs:
            for method, value in program.normalized.items():
                pooled.setdefault(method, []).append(value)

    means = {method: geomean(values) for method, values in pooled.items() if values}
    oracle = means.get(METHOD_BRUTEFORCE)
    return [
        MethodSummary(
            method=method,
            geomean=mean,
            speedup=1.0 / mean,
            gap_to_oracle=None if oracle is None else mean / oracle - 1.0,
            programs=len(pooled[method]),
        )
        for method, mean in means.items()
    ]


def _markdown(summaries: Sequence[MethodSummary], histogram: Optional[OptimumHistogram]) -> str:
    lines = [
        "| method | geomean normalized time | speedup over baseline | gap to oracle | programs |",
        "|---|---|---|---|---|",
    ]
    for s in summaries:
        gap = "" if s.gap_to_oracle is None else f"{100.0 * s.gap_to_oracle:+.2f}%"
        lines.append(f"| {s.method} | {s.geomean:.4f} | {s.speedup:.3f}x | {gap} | {s.programs} |")
    if histogram is not None:
        lines += ["", f"Optimum distribution over {histogram.total} programs "
                      f"(mode VF={histogram.mode_vf}, IF={histogram.mode_if}):", "",
                  "| VF | IF | programs | percent |", "|---|---|---|---|"]
        lines += [f"| {c.vf} | {c.if_} | {c.count} | {c.percent:.2f}% |" for c in histogram.cells if c.count]
    return "\n".join(lines) + "\n"


def write_summary(
    summaries: Sequence[MethodSummary],
    out_dir: Union[str, Path],
    histogram: Optional[OptimumHistogram] = None,
) -> Dict[str, str]:
    """Write summary.csv, summary.json, summary.md and the optimum histogram; returns the paths by name."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    outputs: Dict[str, str] = {}

    csv_path = out_dir / SUMMARY_CSV_FILE
    with csv_path.open("w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(list(MethodSummary.model_fields))
        for summary in summaries:
            writer.writerow(["" if v is None else (repr(v) if isinstance(v, float) else v)
                             for v in summary.model_dump().values()])
    outputs["summary_csv"] = str(csv_path)

    json_path = out_dir / SUMMARY_JSON_FILE
    payload = {
        "methods": [s.model_dump() for s in summaries],
        "optimum_distribution": histogram.model_dump(by_alias=True) if histogram else None,
    }
    json_path.write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
    outputs["summary_json"] = str(json_path)

    md_path = out_dir / SUMMARY_MD_FILE
    md_path.write_text(_markdown(summaries, histogram), encoding="utf-8")
    outputs["summary_md"] = str(md_path)

    if histogram is not None:
        hist_path = out_dir / HISTOGRAM_CSV_FILE
        with hist_path.open("w", encoding="utf-8", newline="") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(["vf", "if", "count", "percent"])
            for cell in histogram.cells:
                writer.writerow([cell.vf, cell.if_, cell.count, repr(cell.percent)])
        outputs["optimum_distribution_csv"] = str(hist_path)

    logger.info("Wrote summary of %d methods to %s", len(summaries), out_dir)
    return outputs


def write_run_summary(run_dir: Union[str, Path], summary: RunSummary) -> Path:
    """Merge summary into run_dir/run.json under its command name."""
    path = Path(run_dir) / RUN_SUMMARY_FILE
    path.parent.mkdir(parents=True, exist_ok=True)
    ledger = RunLedger()
    if path.exists():
        try:
            ledger = RunLedger.model_validate_json(path.read_text(encoding="utf-8"))
        except ValidationError:
            logger.warning("Replacing unreadable %s", path)
    ledger.commands[summary.command] = summary
    path.write_text(ledger.model_dump_json(indent=2) + "\n", encoding="utf-8")
    return path
