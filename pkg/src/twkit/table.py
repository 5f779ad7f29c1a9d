"""The row-major mixed-type table, CSV ingestion, masks, splits, missingness.

Cells are declared categorical codes, floats, or ``None`` for missing. Tables
are immutable after construction and validated against their schema. In CSV
form a missing cell is an empty field or the literal ``NA``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .errors import DataError, SchemaError
from .schema import CATEGORICAL, Code, Schema
from .seeds import derive_seed

MISSING_TOKENS = ("", "NA")

Cell = Code | float | None
Row = tuple[Cell, ...]


def round_half_up(x: float) -> int:
    """Round with ties away from zero toward +inf (0.5 -> 1, 1.5 -> 2)."""
    return int(math.floor(x + 0.5))


@dataclass(frozen=True)
class Table:
    """Validated rows under a schema."""

    schema: Schema
    rows: tuple[Row, ...]

    def __post_init__(self):
        for r, row in enumerate(self.rows):
            if len(row) != len(self.schema.attributes):
                raise DataError(f"row {r}: expected {len(self.schema.attributes)} cells, got {len(row)}")
            for attr, cell in zip(self.schema.attributes, row):
                if cell is None:
                    continue
                if attr.kind == CATEGORICAL:
                    if cell not in attr.codes:
                        raise DataError(f"row {r}, attribute {attr.name!r}: undeclared code {cell!r}")
                elif not isinstance(cell, (int, float)) or isinstance(cell, bool):
                    raise DataError(f"row {r}, attribute {attr.name!r}: expected numeric, got {cell!r}")

    def __len__(self) -> int:
        return len(self.rows)

    def column(self, name: str) -> list[Cell]:
        i = self.schema.index_of(name)
        return [row[i] for row in self.rows]

    def labels(self) -> list[Code]:
        i = self.schema.label_index
        return [row[i] for row in self.rows]

    def is_complete(self, names: tuple[str, ...] | None = None) -> bool:
        idx = range(len(self.schema.attributes)) if names is None else [self.schema.index_of(n) for n in names]
        return all(row[i] is not None for row in self.rows for i in idx)

    def replace_rows(self, rows) -> "Table":
        return Table(self.schema, tuple(tuple(r) for r in rows))


@dataclass(frozen=True)
class MaskMatrix:
    """Observed/missing indicator aligned with a table's cell grid (1 = observed)."""

    entries: np.ndarray  # (n_rows, n_attributes) of {0, 1}

    def __post_init__(self):
        if self.entries.ndim != 2:
            raise DataError("mask must be 2-d")

    @classmethod
    def from_table(cls, table: Table) -> "MaskMatrix":
        grid = np.array(
            [[0 if cell is None else 1 for cell in row] for row in table.rows],
            dtype=np.int8,
        ).reshape(len(table), len(table.schema.attributes))
        return cls(grid)


def load_csv(path, schema: Schema) -> Table:
    """Read and validate a CSV whose header matches the schema attribute names.

    Header order is free; `origin` columns written by the augmenter are
    rejected here (use :func:`load_augmented_csv`). Errors name the offending
    row and column.
    """
    table, origins = _read_csv(path, schema, allow_origin=False)
    return table


def load_augmented_csv(path, schema: Schema) -> tuple[Table, list[str] | None]:
    """Like :func:`load_csv` but tolerates an extra `origin` column."""
    return _read_csv(path, schema, allow_origin=True)


def _read_csv(path, schema, allow_origin):
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            try:
                header = next(reader)
            except StopIteration:
                raise DataError(f"{path}: empty file") from None
            raw_rows = list(reader)
    except OSError as exc:
        raise DataError(f"{path}: {exc}") from exc

    header = [h.strip() for h in header]
    origin_col = None
    if allow_origin and "origin" in header:
        origin_col = header.index("origin")
    known = set(schema.names)
    for name in header:
        if name not in known and (origin_col is None or name != "origin"):
            raise DataError(f"{path}: unknown column {name!r}")
    for name in schema.names:
        if name not in header:
            raise DataError(f"{path}: missing column {name!r}")

    positions = [header.index(name) for name in schema.names]
    rows = []
    origins: list[str] = []
    for r, raw in enumerate(raw_rows):
        if len(raw) != len(header):
            raise DataError(f"{path}: row {r + 1} has {len(raw)} fields, expected {len(header)}")
        cells: list[Cell] = []
        for attr, pos in zip(schema.attributes, positions):
            token = raw[pos].strip()
            if token in MISSING_TOKENS:
                cells.append(None)
                continue
            try:
                cells.append(attr.parse_token(token))
            except SchemaError as exc:
                raise DataError(f"{path}: row {r + 1}: {exc}") from None
        rows.append(tuple(cells))
        if origin_col is not None:
            origins.append(raw[origin_col].strip())
    table = Table(schema, tuple(rows))
    return table, (origins if origin_col is not None else None)


def _format_cell(cell: Cell) -> str:
    if cell is None:
        return ""
    if isinstance(cell, float):
        return repr(cell)
    return str(cell)


def save_csv(table: Table, path, origins: list[str] | None = None) -> None:
    """Write a table (optionally with an `origin` metadata column) as CSV."""
    if origins is not None and len(origins) != len(table):
        raise DataError("origins length does not match row count")
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        header = list(table.schema.names) + (["origin"] if origins is not None else [])
        writer.writerow(header)
        for i, row in enumerate(table.rows):
            out = [_format_cell(c) for c in row]
            if origins is not None:
                out.append(origins[i])
            writer.writerow(out)


def class_histogram(table: Table) -> dict[Code, int]:
    """Row count per declared class code; absent classes report 0."""
    counts = {code: 0 for code in table.schema.class_codes}
    for label in table.labels():
        if label is not None:
            counts[label] += 1
    return counts


def inject_missing(
    table: Table, features: list[str], rate: float, seed: int
) -> tuple[Table, MaskMatrix]:
    """Blank exactly round(rate * n_rows) cells per named feature, MCAR.

    Each feature gets its own generator seeded from (seed, feature name), so
    adding or reordering features does not disturb the other streams. The
    named features must be fully observed beforehand.
    """
    if not 0 < rate < 1:
        raise DataError(f"rate must be in (0, 1), got {rate}")
    n = len(table)
    k = round_half_up(rate * n)
    cols = {}
    for name in features:
        idx = table.schema.index_of(name)
        if any(row[idx] is None for row in table.rows):
            raise DataError(f"feature {name!r} already contains missing cells")
        rng = np.random.default_rng(derive_seed(seed, name))
        cols[idx] = set(rng.choice(n, size=k, replace=False).tolist())
    rows = [
        tuple(None if (j in cols and i in cols[j]) else cell for j, cell in enumerate(row))
        for i, row in enumerate(table.rows)
    ]
    out = table.replace_rows(rows)
    return out, MaskMatrix.from_table(out)


def kfold_stratified(table: Table, k: int, seed: int) -> list[tuple[Table, Table]]:
    """Stratified k-fold partition: per class, shuffled members deal round-robin
    into folds; classes with fewer members than folds simply skip some folds."""
    if k < 2:
        raise DataError(f"k must be >= 2, got {k}")
    if len(table) == 0:
        raise DataError("cannot fold an empty table")
    rng = np.random.default_rng(seed)
    fold_of = [0] * len(table)
    by_class: dict[Code, list[int]] = {}
    for i, label in enumerate(table.labels()):
        by_class.setdefault(label, []).append(i)
    for code in table.schema.class_codes:
        members = by_class.get(code, [])
        order = rng.permutation(len(members))
        for pos, p in enumerate(order):
            fold_of[members[p]] = pos % k
    splits = []
    for fold in range(k):
        train_rows = [table.rows[i] for i in range(len(table)) if fold_of[i] != fold]
        test_rows = [table.rows[i] for i in range(len(table)) if fold_of[i] == fold]
        splits.append((table.replace_rows(train_rows), table.replace_rows(test_rows)))
    return splits


def split_stratified(table: Table, test_fraction: float, seed: int) -> tuple[Table, Table]:
    """Per-class proportional train/test split; singleton classes go to train."""
    if len(table) == 0:
        raise DataError("cannot split an empty table")
    if not 0 < test_fraction < 1:
        raise DataError(f"test_fraction must be in (0, 1), got {test_fraction}")
    by_class: dict[Code, list[int]] = {}
    for i, label in enumerate(table.labels()):
        by_class.setdefault(label, []).append(i)
    rng = np.random.default_rng(seed)
    test_idx: list[int] = []
    # iterate classes in declared order so the draw sequence is stable
    for code in table.schema.class_codes:
        members = by_class.get(code, [])
        if len(members) <= 1:
            continue
        k = min(round_half_up(test_fraction * len(members)), len(members) - 1)
        picked = rng.permutation(len(members))[:k]
        test_idx.extend(members[p] for p in picked)
    test_set = set(test_idx)
    train_rows = [table.rows[i] for i in range(len(table)) if i not in test_set]
    test_rows = [table.rows[i] for i in sorted(test_set)]
    return table.replace_rows(train_rows), table.replace_rows(test_rows)
