"""Headline dataset ingestion, median-split labeling, and k-fold planning."""

from __future__ import annotations

import csv
import json
import os
import random
import statistics
from dataclasses import dataclass
from typing import Iterable, Sequence


class DataError(ValueError):
    """Malformed or invariant-violating dataset content.

    Carries the 1-based line number when the problem is tied to one line.
    """

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


@dataclass(frozen=True)
class Headline:
    """One raw record: a title plus the popularity metric used for labeling."""

    id: str
    title: str
    metric: float
    group: str

    def __post_init__(self):
        if not self.id:
            raise DataError("id must be non-empty")
        if not self.title.strip():
            raise DataError(f"headline {self.id!r}: title is empty")
        if not (self.metric >= 0):
            raise DataError(f"headline {self.id!r}: metric must be non-negative, got {self.metric}")
        if not self.group:
            raise DataError(f"headline {self.id!r}: group must be non-empty")


@dataclass(frozen=True)
class LabeledExample:
    headline: Headline
    label: int

    def __post_init__(self):
        if self.label not in (0, 1):
            raise DataError(f"label must be 0 or 1, got {self.label}")


@dataclass(frozen=True)
class FoldPlan:
    """Partition of example ids into k folds (sizes differ by at most one)."""

    k: int
    seed: int
    assignments: dict[str, int]

    def fold_of(self, example_id: str) -> int:
        return self.assignments[example_id]

    def ids_in_fold(self, fold: int) -> list[str]:
        return sorted(i for i, f in self.assignments.items() if f == fold)


_REQUIRED_FIELDS = ("id", "title", "metric", "group")


def _headline_from_record(record: dict, line: int) -> Headline:
    for key in _REQUIRED_FIELDS:
        if key not in record:
            raise DataError(f"missing field {key!r}", line=line)
    if not isinstance(record["id"], str) or not isinstance(record["title"], str) \
            or not isinstance(record["group"], str):
        raise DataError("id, title and group must be strings", line=line)
    metric = record["metric"]
    if isinstance(metric, bool) or not isinstance(metric, (int, float)):
        raise DataError(f"metric must be a number, got {metric!r}", line=line)
    try:
        return Headline(id=record["id"], title=record["title"],
                        metric=float(metric), group=record["group"])
    except DataError as exc:
        raise DataError(str(exc), line=line) from None


def load_dataset(path: str, format: str | None = None) -> list[Headline]:
    """Load headlines from a JSONL or CSV file, order preserved.

    format defaults to the file suffix (.csv -> csv, otherwise jsonl).
    Malformed lines, duplicate ids and missing fields raise DataError
    with the offending line number.
    """
    if format is None:
        format = "csv" if str(path).lower().endswith(".csv") else "jsonl"
    if format not in ("jsonl", "csv"):
        raise ValueError(f"unknown dataset format {format!r}")
    out: list[Headline] = []
    seen: set[str] = set()
    if format == "jsonl":
        with open(path, encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, start=1):
                if not raw.strip():
                    continue
                try:
                    record = json.loads(raw)
                except json.JSONDecodeError as exc:
                    raise DataError(f"invalid JSON: {exc.msg}", line=lineno) from None
                if not isinstance(record, dict):
                    raise DataError("each line must be a JSON object", line=lineno)
                headline = _headline_from_record(record, lineno)
                if headline.id in seen:
                    raise DataError(f"duplicate id {headline.id!r}", line=lineno)
                seen.add(headline.id)
                out.append(headline)
    else:
        with open(path, encoding="utf-8", newline="") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None:
                return []
            missing = [f for f in _REQUIRED_FIELDS if f not in reader.fieldnames]
            if missing:
                raise DataError(f"csv header missing columns {missing}", line=1)
            for lineno, row in enumerate(reader, start=2):
                try:
                    metric = float(row["metric"])
                except (TypeError, ValueError):
                    raise DataError(f"metric must be a number, got {row['metric']!r}",
                                    line=lineno) from None
                record = {"id": row["id"], "title": row["title"],
                          "metric": metric, "group": row["group"]}
                headline = _headline_from_record(record, lineno)
                if headline.id in seen:
                    raise DataError(f"duplicate id {headline.id!r}", line=lineno)
                seen.add(headline.id)
                out.append(headline)
    return out


def label_by_group_median(data: Sequence[Headline]) -> list[LabeledExample]:
    """Label each headline popular iff its metric strictly exceeds its group median.

    Ties at the median (including every member of a constant group) are
    unpopular. Even-sized groups use the mean of the two middle values.
    Output order matches input order.
    """
    if not data:
        raise DataError("cannot label an empty dataset")
    medians: dict[str, float] = {}
    by_group: dict[str, list[float]] = {}
    for h in data:
        by_group.setdefault(h.group, []).append(h.metric)
    for group, metrics in by_group.items():
        medians[group] = float(statistics.median(metrics))
    return [LabeledExample(headline=h, label=int(h.metric > medians[h.group]))
            for h in data]


def make_folds(data: Sequence[LabeledExample], k: int, seed: int) -> FoldPlan:
    """Deterministic k-fold partition.

    Ids are sorted lexicographically, shuffled by an explicit seeded
    Fisher-Yates pass, then dealt into contiguous folds whose sizes differ
    by at most one (the first n mod k folds get the extra example).
    """
    if k < 2:
        raise ValueError(f"k must be at least 2, got {k}")
    ids = sorted(ex.headline.id for ex in data)
    if len(set(ids)) != len(ids):
        raise DataError("example ids must be unique")
    if len(ids) < k:
        raise ValueError(f"cannot make {k} folds from {len(ids)} examples")
    rng = random.Random(seed)
    for i in range(len(ids) - 1, 0, -1):
        j = rng.randrange(i + 1)
        ids[i], ids[j] = ids[j], ids[i]
    base, extra = divmod(len(ids), k)
    assignments: dict[str, int] = {}
    pos = 0
    for fold in range(k):
        size = base + (1 if fold < extra else 0)
        for example_id in ids[pos:pos + size]:
            assignments[example_id] = fold
        pos += size
    return FoldPlan(k=k, seed=seed, assignments=assignments)


def save_labeled(examples: Iterable[LabeledExample], path: str) -> None:
    """Write labeled examples as JSONL (dataset schema plus a label field)."""
    tmp = f"{path}.tmp.{os.getpid()}"
    with open(tmp, "w", encoding="utf-8") as fh:
        for ex in examples:
            h = ex.headline
            fh.write(json.dumps({"id": h.id, "title": h.title, "metric": h.metric,
                                 "group": h.group, "label": ex.label},
                                ensure_ascii=False))
            fh.write("\n")
    os.replace(tmp, path)


def load_labeled(path: str) -> list[LabeledExample]:
    """Load labeled JSONL written by save_labeled (or the label CLI command)."""
    out: list[LabeledExample] = []
    seen: set[str] = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            if not raw.strip():
                continue
            try:
                record = json.loads(raw)
            except json.JSONDecodeError as exc:
                raise DataError(f"invalid JSON: {exc.msg}", line=lineno) from None
            if "label" not in record:
                raise DataError("missing field 'label'", line=lineno)
            label = record["label"]
            if label not in (0, 1):
                raise DataError(f"label must be 0 or 1, got {label!r}", line=lineno)
            headline = _headline_from_record(record, lineno)
            if headline.id in seen:
                raise DataError(f"duplicate id {headline.id!r}", line=lineno)
            seen.add(headline.id)
            out.append(LabeledExample(headline=headline, label=int(label)))
    return out
