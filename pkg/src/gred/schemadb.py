"""Database-schema model, schema-block formatting, dataset ingestion, and splitting.

File formats:
  * examples: JSON Lines, fields {example_id, nlq, dvq, db_id, chart, hardness?}
  * schemas: a JSON document per database {db_id, tables: [{name, columns: [{name, type}]}],
    foreign_keys: [["t.c", "t.c"], ...]}; a schema file may hold one document or a list,
    and a directory of ``*.json`` files is accepted too
  * annotations: JSON Lines, fields {db_id, model_id, annotation}
"""

from __future__ import annotations

import json
import math
import os
import random
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .dvq import ChartType, DvqError, parse_dvq


class FileMissing(FileNotFoundError):
    pass


class RecordInvalid(ValueError):
    def __init__(self, source: str, lineno: int, reason: str):
        self.source = source
        self.lineno = lineno
        self.reason = reason
        super().__init__(f"{source}:{lineno}: {reason}")


class TooFewExamples(ValueError):
    pass


class MissingAnnotation(LookupError):
    pass


# ----------------------------------------------------------------- schema model


@dataclass(frozen=True)
class Column:
    name: str
    col_type: str


@dataclass(frozen=True)
class Table:
    name: str
    columns: tuple[Column, ...]


@dataclass(frozen=True)
class ForeignKey:
    left_table: str
    left_column: str
    right_table: str
    right_column: str

    def __str__(self) -> str:
        return f"{self.left_table}.{self.left_column} = {self.right_table}.{self.right_column}"


@dataclass(frozen=True)
class DatabaseSchema:
    db_id: str
    tables: tuple[Table, ...]
    foreign_keys: tuple[ForeignKey, ...] = ()

    def __post_init__(self):
        if not self.tables:
            raise ValueError(f"schema {self.db_id!r} has no tables")
        seen = set()
        for table in self.tables:
            key = table.name.lower()
            if key in seen:
                raise ValueError(f"schema {self.db_id!r}: duplicate table {table.name!r}")
            seen.add(key)
            if not table.columns:
                raise ValueError(f"schema {self.db_id!r}: table {table.name!r} has no columns")
            cols = set()
            for column in table.columns:
                ckey = column.name.lower()
                if ckey in cols:
                    raise ValueError(
                        f"schema {self.db_id!r}: duplicate column {column.name!r} in {table.name!r}"
                    )
                cols.add(ckey)
        for fk in self.foreign_keys:
            for table, column in ((fk.left_table, fk.left_column), (fk.right_table, fk.right_column)):
                if not self._has_column(table, column):
                    raise ValueError(f"schema {self.db_id!r}: foreign key endpoint {table}.{column} does not resolve")

    def _has_column(self, table: str, column: str) -> bool:
        for t in self.tables:
            if t.name.lower() == table.lower():
                return any(c.name.lower() == column.lower() for c in t.columns)
        return False


@dataclass(frozen=True)
class AnnotatedDatabase:
    schema: DatabaseSchema
    annotation: str

    def __post_init__(self):
        if not self.annotation.strip():
            raise ValueError(f"database {self.schema.db_id!r} has an empty annotation")


@dataclass(frozen=True)
class Example:
    example_id: str
    nlq: str
    dvq: str
    db_id: str
    chart: ChartType
    hardness: str | None = None


@dataclass(frozen=True)
class DatasetSplit:
    train: tuple[Example, ...]
    dev: tuple[Example, ...]
    test: tuple[Example, ...]


# ------------------------------------------------------------- block formatting


def format_schema_block(schema: DatabaseSchema) -> str:
    """Render the prompt schema block: one ``# Table`` line per table, then the FK line."""
    lines = []
    for table in schema.tables:
        columns = " , ".join(column.name for column in table.columns)
        lines.append(f"# Table {table.name}, columns = [ * , {columns} ]")
    if schema.foreign_keys:
        fks = " , ".join(str(fk) for fk in schema.foreign_keys)
        lines.append(f"# Foreign_keys = [ {fks} ]")
    else:
        lines.append("# Foreign_keys = [ ]")
    return "\n".join(lines)


# ------------------------------------------------------------------- loading


def load_schemas(path: str | os.PathLike) -> dict[str, DatabaseSchema]:
    """Load schemas from a JSON file (single object or list) or a directory of ``*.json``."""
    path = Path(path)
    if not path.exists():
        raise FileMissing(f"schema path {path} does not exist")
    documents: list[tuple[str, object]] = []
    if path.is_dir():
        for child in sorted(path.glob("*.json")):
            documents.append((str(child), json.loads(child.read_text(encoding="utf-8"))))
    else:
        documents.append((str(path), json.loads(path.read_text(encoding="utf-8"))))

    schemas: dict[str, DatabaseSchema] = {}
    for source, doc in documents:
        items = doc if isinstance(doc, list) else [doc]
        for i, raw in enumerate(items):
            try:
                schema = _schema_from_dict(raw)
            except (KeyError, TypeError, ValueError) as exc:
                raise RecordInvalid(source, i + 1, f"bad schema record: {exc}") from exc
            if schema.db_id in schemas:
                raise RecordInvalid(source, i + 1, f"duplicate db_id {schema.db_id!r}")
            schemas[schema.db_id] = schema
    return schemas


def _schema_from_dict(raw: Mapping) -> DatabaseSchema:
    tables = tuple(
        Table(
            name=t["name"],
            columns=tuple(Column(c["name"], c.get("type", "text")) for c in t["columns"]),
        )
        for t in raw["tables"]
    )
    fks = []
    for pair in raw.get("foreign_keys", []):
        left, right = pair
        lt, lc = left.split(".", 1)
        rt, rc = right.split(".", 1)
        fks.append(ForeignKey(lt, lc, rt, rc))
    return DatabaseSchema(raw["db_id"], tables, tuple(fks))


def schema_to_dict(schema: DatabaseSchema) -> dict:
    return {
        "db_id": schema.db_id,
        "tables": [
            {"name": t.name, "columns": [{"name": c.name, "type": c.col_type} for c in t.columns]}
            for t in schema.tables
        ],
        "foreign_keys": [
            [f"{fk.left_table}.{fk.left_column}", f"{fk.right_table}.{fk.right_column}"]
            for fk in schema.foreign_keys
        ],
    }


def load_examples(path: str | os.PathLike, schemas: Mapping[str, DatabaseSchema]) -> list[Example]:
    """Load and eagerly validate a JSONL example file; gold DVQs are parsed once here."""
    path = Path(path)
    if not path.exists():
        raise FileMissing(f"example file {path} does not exist")
    examples: list[Example] = []
    seen_ids: set[str] = set()
    with open(path, encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                raw = json.loads(line)
            except json.JSONDecodeError as exc:
                raise RecordInvalid(str(path), lineno, f"bad JSON: {exc}") from exc
            try:
                example = _example_from_dict(raw, schemas)
            except (KeyError, TypeError, ValueError) as exc:
                raise RecordInvalid(str(path), lineno, str(exc)) from exc
            if example.example_id in seen_ids:
                raise RecordInvalid(str(path), lineno, f"duplicate example_id {example.example_id!r}")
            seen_ids.add(example.example_id)
            examples.append(example)
    return examples


def _example_from_dict(raw: Mapping, schemas: Mapping[str, DatabaseSchema]) -> Example:
    example_id = str(raw["example_id"])
    nlq = raw["nlq"]
    dvq = raw["dvq"]
    db_id = raw["db_id"]
    if not nlq or not nlq.strip():
        raise ValueError("empty nlq")
    if db_id not in schemas:
        raise ValueError(f"unknown db_id {db_id!r}")
    try:
        parsed = parse_dvq(dvq)
    except DvqError as exc:
        raise ValueError(f"gold DVQ does not parse: {type(exc).__name__}: {exc}") from exc
    chart = ChartType(str(raw["chart"]).upper())
    if chart is not parsed.chart:
        raise ValueError(f"chart field {chart.value} does not match gold DVQ chart {parsed.chart.value}")
    return Example(example_id, nlq, dvq, db_id, chart, raw.get("hardness"))


def example_to_dict(example: Example) -> dict:
    record = {
        "example_id": example.example_id,
        "nlq": example.nlq,
        "dvq": example.dvq,
        "db_id": example.db_id,
        "chart": example.chart.value,
    }
    if example.hardness is not None:
        record["hardness"] = example.hardness
    return record


def dump_examples(examples: Iterable[Example], path: str | os.PathLike) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        for example in examples:
            handle.write(json.dumps(example_to_dict(example), ensure_ascii=False) + "\n")


# ---------------------------------------------------------------- annotations


@dataclass(frozen=True)
class AnnotationRecord:
    db_id: str
    model_id: str
    annotation: str


def load_annotations(path: str | os.PathLike) -> dict[str, AnnotationRecord]:
    path = Path(path)
    if not path.exists():
        raise FileMissing(f"annotation store {path} does not exist")
    records: dict[str, AnnotationRecord] = {}
    with open(path, encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            raw = json.loads(line)
            try:
                record = AnnotationRecord(raw["db_id"], raw["model_id"], raw["annotation"])
            except KeyError as exc:
                raise RecordInvalid(str(path), lineno, f"missing field {exc}") from exc
            if not record.annotation.strip():
                raise RecordInvalid(str(path), lineno, f"empty annotation for {record.db_id!r}")
            records[record.db_id] = record
    return records


def append_annotation(record: AnnotationRecord, path: str | os.PathLike) -> None:
    with open(path, "a", encoding="utf-8") as handle:
        handle.write(
            json.dumps(
                {"db_id": record.db_id, "model_id": record.model_id, "annotation": record.annotation},
                ensure_ascii=False,
            )
            + "\n"
        )


# ------------------------------------------------------------------- splitting


def split_dataset(
    examples: Sequence[Example],
    ratios: tuple[float, float, float] = (80.0, 4.5, 15.5),
    seed: int = 0,
) -> DatasetSplit:
    """Deterministic shuffle then contiguous slicing with largest-remainder rounding.

    Every bucket is kept non-empty by borrowing from the largest bucket after
    rounding, so at least three examples are required.
    """
    if any(r <= 0 for r in ratios):
        raise ValueError("ratios must be positive")
    if abs(sum(ratios) - 100.0) > 1e-9:
        raise ValueError(f"ratios must sum to 100, got {sum(ratios)}")
    n = len(examples)
    if n < 3:
        raise TooFewExamples(f"need at least 3 examples to split, got {n}")

    quotas = [n * r / 100.0 for r in ratios]
    sizes = [math.floor(q) for q in quotas]
    leftover = n - sum(sizes)
    by_remainder = sorted(range(3), key=lambda i: (-(quotas[i] - sizes[i]), i))
    for i in by_remainder[:leftover]:
        sizes[i] += 1
    for i in range(3):
        while sizes[i] == 0:
            donor = max(range(3), key=lambda j: sizes[j])
            sizes[donor] -= 1
            sizes[i] += 1

    order = list(examples)
    random.Random(seed).shuffle(order)
    train = tuple(order[: sizes[0]])
    dev = tuple(order[sizes[0] : sizes[0] + sizes[1]])
    test = tuple(order[sizes[0] + sizes[1] :])
    return DatasetSplit(train, dev, test)
