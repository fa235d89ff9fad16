"""Rendering of per-loop metric tables, CSV/curve data, and the
judge-vs-human alignment study."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any

from .errors import DegenerateInput, MalformedManifest
from .metrics import MetricReport, pearson
from .simulate import TOKEN_METRIC_NAME, AnnotationRecord, BatchResult

DEFAULT_TABLE_LOOPS = (0, 1, 2, 3, 10)

REPORT_FORMATS = ("table", "csv", "curvedata")


# -- batch result serialization ----------------------------------------------


def batch_result_to_dict(result: BatchResult) -> dict[str, Any]:
    return {
        "max_loops": result.max_loops,
        "stalled_ids": result.stalled_ids,
        "datasets": {
            tag: {
                "mode": result.modes[tag],
                "rows": [
                    {
                        "loop_index": r.loop_index,
                        "token_error_rate": r.token_error_rate,
                        "sentence_error_rate": r.sentence_error_rate,
                        "s2er": r.s2er,
                        "n_utterances": r.n_utterances,
                    }
                    for r in rows
                ],
            }
            for tag, rows in result.reports.items()
        },
    }


def batch_result_from_dict(data: dict[str, Any]) -> BatchResult:
    reports = {}
    modes = {}
    for tag, block in data["datasets"].items():
        modes[tag] = block["mode"]
        reports[tag] = [
            MetricReport(
                loop_index=r["loop_index"],
                token_error_rate=r["token_error_rate"],
                sentence_error_rate=r["sentence_error_rate"],
                s2er=r["s2er"],
                n_utterances=r["n_utterances"],
            )
            for r in block["rows"]
        ]
    return BatchResult(
        reports=reports,
        modes=modes,
        trajectories=[],
        max_loops=data["max_loops"],
        stalled_ids=data.get("stalled_ids", []),
    )


def write_batch_result(result: BatchResult, path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(batch_result_to_dict(result), indent=2, sort_keys=True, ensure_ascii=False)
        + "\n",
        encoding="utf-8",
    )


def read_batch_result(path: str | Path) -> BatchResult:
    return batch_result_from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


# -- report emission ----------------------------------------------------------


def _pct(value: float) -> str:
    return f"{value * 100:.2f}"


def render_table(result: BatchResult, loops: tuple[int, ...] = DEFAULT_TABLE_LOOPS) -> str:
    """Fixed-width per-loop table: one row per loop, three metric columns
    (token metric, SER, S2ER) per dataset. Values are percentages."""
    tags = sorted(result.reports)
    loops = tuple(t for t in loops if t <= result.max_loops)
    col = 8
    lines = []
    header1 = "Loop".ljust(6)
    header2 = " " * 6
    for tag in tags:
        header1 += tag.ljust(3 * col)
        metric = TOKEN_METRIC_NAME[result.modes[tag]]
        for name in (metric, "SER", "S2ER"):
            header2 += name.ljust(col)
    lines.append(header1.rstrip())
    lines.append(header2.rstrip())
    for loop in loops:
        row = str(loop).ljust(6)
        for tag in tags:
            by_loop = {r.loop_index: r for r in result.reports[tag]}
            r = by_loop.get(loop)
            if r is None:
                row += "-".ljust(col) * 3
            else:
                for value in (r.token_error_rate, r.sentence_error_rate, r.s2er):
                    row += _pct(value).ljust(col)
        lines.append(row.rstrip())
    return "\n".join(lines) + "\n"


def render_csv(result: BatchResult) -> str:
    """Every loop row for every dataset, ratios rounded to 4 decimals."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(
        [
            "loop",
            "dataset",
            "token_metric",
            "token_error_rate",
            "sentence_error_rate",
            "s2er",
            "n_utterances",
        ]
    )
    for tag in sorted(result.reports):
        metric = TOKEN_METRIC_NAME[result.modes[tag]]
        for r in result.reports[tag]:
            writer.writerow(
                [
                    r.loop_index,
                    tag,
                    metric,
                    round(r.token_error_rate, 4),
                    round(r.sentence_error_rate, 4),
                    round(r.s2er, 4),
                    r.n_utterances,
                ]
            )
    return buf.getvalue()


def render_curvedata(result: BatchResult) -> str:
    """One (loop, metric, value, dataset) record per point, CSV."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["loop", "metric", "value", "dataset"])
    for tag in sorted(result.reports):
        metric = TOKEN_METRIC_NAME[result.modes[tag]]
        for r in result.reports[tag]:
            writer.writerow([r.loop_index, metric, round(r.token_error_rate, 6), tag])
            writer.writerow([r.loop_index, "SER", round(r.sentence_error_rate, 6), tag])
            writer.writerow([r.loop_index, "S2ER", round(r.s2er, 6), tag])
    return buf.getvalue()


def emit_report(result: BatchResult, format: str = "table") -> str:
    if format == "table":
        return render_table(result)
    if format == "csv":
        return render_csv(result)
    if format == "curvedata":
        return render_curvedata(result)
    raise ValueError(f"unknown report format: {format!r}")


# -- alignment study -----------------------------------------------------------


@dataclass(frozen=True)
class JudgmentRecord:
    item_id: str
    dataset_tag: str
    outcome: int  # 0 | 1


@dataclass(frozen=True)
class AlignmentRow:
    group: str
    llm_r: float
    expert_r: float | None
    n_items: int


def load_judgments(path: str | Path) -> list[JudgmentRecord]:
    """JSONL of {item_id, dataset_tag, outcome}."""
    records = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
                outcome = int(obj["outcome"])
                if outcome not in (0, 1):
                    raise ValueError("outcome must be 0 or 1")
                records.append(
                    JudgmentRecord(
                        item_id=str(obj["item_id"]),
                        dataset_tag=str(obj.get("dataset_tag", "default")),
                        outcome=outcome,
                    )
                )
            except (json.JSONDecodeError, KeyError, ValueError) as exc:
                raise MalformedManifest(f"bad judgment record: {exc}", lineno)
    return records


def load_annotations(path: str | Path) -> list[AnnotationRecord]:
    """CSV with columns item_id, annotator_id, cohort, rating."""
    records = []
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        required = {"item_id", "annotator_id", "cohort", "rating"}
        if reader.fieldnames is None or not required.issubset(reader.fieldnames):
            raise MalformedManifest(
                f"annotation CSV must have columns {sorted(required)}"
            )
        for lineno, row in enumerate(reader, start=2):
            rating = int(row["rating"])
            if rating not in (0, 1):
                raise MalformedManifest("rating must be 0 or 1", lineno)
            cohort = row["cohort"]
            if cohort not in ("nonexpert", "expert"):
                raise MalformedManifest(f"unknown cohort {cohort!r}", lineno)
            records.append(
                AnnotationRecord(
                    item_id=row["item_id"],
                    annotator_id=row["annotator_id"],
                    rating=rating,
                    cohort=cohort,
                )
            )
    return records


def alignment_study(
    judgments: list[JudgmentRecord], annotations: list[AnnotationRecord]
) -> list[AlignmentRow]:
    """Pearson r of the LLM judge and of individual experts against the human
    consensus (mean of all annotator ratings per item), per dataset and
    overall. The expert column is the average of per-expert correlations."""
    by_item: dict[str, list[AnnotationRecord]] = {}
    for ann in annotations:
        by_item.setdefault(ann.item_id, []).append(ann)
    for j in judgments:
        if j.item_id not in by_item:
            raise MalformedManifest(f"no annotations for judged item {j.item_id!r}")
    consensus = {
        item: sum(a.rating for a in anns) / len(anns) for item, anns in by_item.items()
    }
    expert_ratings: dict[str, dict[str, int]] = {}
    for ann in annotations:
        if ann.cohort == "expert":
            expert_ratings.setdefault(ann.annotator_id, {})[ann.item_id] = ann.rating

    groups: dict[str, list[JudgmentRecord]] = {}
    for j in judgments:
        groups.setdefault(j.dataset_tag, []).append(j)
    groups["Overall"] = list(judgments)

    rows = []
    order = sorted(t for t in groups if t != "Overall") + ["Overall"]
    for tag in order:
        items = sorted(groups[tag], key=lambda j: j.item_id)
        x = [float(j.outcome) for j in items]
        y = [consensus[j.item_id] for j in items]
        llm_r = pearson(x, y)
        expert_rs = []
        for ratings in expert_ratings.values():
            xs, ys = [], []
            for j in items:
                if j.item_id in ratings:
                    xs.append(float(ratings[j.item_id]))
                    ys.append(consensus[j.item_id])
            if len(xs) >= 2:
                try:
                    expert_rs.append(pearson(xs, ys))
                except DegenerateInput:
                    continue
        expert_r = sum(expert_rs) / len(expert_rs) if expert_rs else None
        rows.append(AlignmentRow(group=tag, llm_r=llm_r, expert_r=expert_r, n_items=len(items)))
    return rows


def render_alignment_table(rows: list[AlignmentRow]) -> str:
    lines = [f"{'Dataset':<16}{'LLM (r)':>10}{'Expert (r)':>12}{'N':>6}"]
    for row in rows:
        expert = f"{row.expert_r:.4f}" if row.expert_r is not None else "-"
        lines.append(f"{row.group:<16}{row.llm_r:>10.4f}{expert:>12}{row.n_items:>6}")
    return "\n".join(lines) + "\n"
