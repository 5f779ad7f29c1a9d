"""Invertible numeric embedding of a table.

Categorical attributes become one-hot blocks (declared code order), numerics
are min-max scaled to [0, 1], missing cells encode as all-zero entries with a
mask of 0. The codec records block layout plus numeric ranges so train and
test data share one embedding, and so matrices decode back to tables.

Decoded numerics are rounded to 9 decimals, which makes min-max round-trips
exact for values recorded at any sane precision.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import CodecError
from .schema import CATEGORICAL, Code, Schema
from .table import Cell, MaskMatrix, Table


@dataclass(frozen=True)
class Block:
    """Column group for one attribute: a one-hot span or a scaled numeric."""

    attribute: str
    start: int
    table_column: int = 0  # index of the attribute in the source schema
    codes: tuple[Code, ...] = ()  # empty for numeric
    lo: float = 0.0
    hi: float = 1.0

    @property
    def width(self) -> int:
        return len(self.codes) if self.codes else 1

    @property
    def stop(self) -> int:
        return self.start + self.width


@dataclass(frozen=True)
class Codec:
    """Ordered block layout over a subset of schema attributes."""

    blocks: tuple[Block, ...]

    @property
    def width(self) -> int:
        return self.blocks[-1].stop if self.blocks else 0

    @property
    def attributes(self) -> tuple[str, ...]:
        return tuple(b.attribute for b in self.blocks)

    def block(self, attribute: str) -> Block:
        for b in self.blocks:
            if b.attribute == attribute:
                return b
        raise CodecError(f"codec does not cover attribute {attribute!r}")

    def categorical_spans(self) -> list[tuple[int, int]]:
        return [(b.start, b.stop) for b in self.blocks if b.codes]


@dataclass(frozen=True)
class EncodedMatrix:
    """Real-valued (n, d) grid plus the codec that produced it."""

    values: np.ndarray
    codec: Codec

    def __post_init__(self):
        if self.values.ndim != 2 or self.values.shape[1] != self.codec.width:
            raise CodecError(
                f"matrix width {self.values.shape} does not match codec width {self.codec.width}"
            )

    @property
    def n_rows(self) -> int:
        return int(self.values.shape[0])


def build_codec(table: Table, attributes: tuple[str, ...] | None = None) -> Codec:
    """Derive a codec from the table (code order from schema, ranges from data)."""
    names = attributes if attributes is not None else table.schema.names
    blocks = []
    start = 0
    for name in names:
        attr = table.schema.attribute(name)
        col = table.schema.index_of(name)
        if attr.kind == CATEGORICAL:
            block = Block(attribute=name, start=start, table_column=col, codes=attr.codes)
        else:
            observed = [c for c in table.column(name) if c is not None]
            if not observed:
                raise CodecError(f"attribute {name!r} has no observed values to derive a range")
            block = Block(
                attribute=name,
                start=start,
                table_column=col,
                lo=float(min(observed)),
                hi=float(max(observed)),
            )
        blocks.append(block)
        start = block.stop
    return Codec(tuple(blocks))


def encode(
    table: Table,
    codec_source: EncodedMatrix | Codec | None = None,
    attributes: tuple[str, ...] | None = None,
    strict: bool = False,
) -> EncodedMatrix:
    """Embed a table; reuse `codec_source` so two tables share one embedding.

    With `strict`, a numeric value outside the reused codec range is an error;
    otherwise it clamps to the range.
    """
    if codec_source is not None:
        codec = codec_source.codec if isinstance(codec_source, EncodedMatrix) else codec_source
        if attributes is not None and tuple(attributes) != codec.attributes:
            raise CodecError("attribute selection conflicts with the reused codec")
    else:
        codec = build_codec(table, attributes)

    n = len(table)
    values = np.zeros((n, codec.width), dtype=np.float64)
    for block in codec.blocks:
        col = table.schema.index_of(block.attribute)
        if block.codes:
            index = {code: k for k, code in enumerate(block.codes)}
            for i, row in enumerate(table.rows):
                cell = row[col]
                if cell is None:
                    continue
                try:
                    values[i, block.start + index[cell]] = 1.0
                except KeyError:
                    raise CodecError(
                        f"attribute {block.attribute!r}: code {cell!r} not in codec"
                    ) from None
        else:
            lo, hi = block.lo, block.hi
            span = hi - lo
            for i, row in enumerate(table.rows):
                cell = row[col]
                if cell is None:
                    continue
                v = float(cell)
                if strict and not (lo <= v <= hi):
                    raise CodecError(
                        f"attribute {block.attribute!r}: value {v} outside codec range [{lo}, {hi}]"
                    )
                values[i, block.start] = 0.5 if span == 0 else min(max((v - lo) / span, 0.0), 1.0)
    return EncodedMatrix(values, codec)


def decode_cells(values: np.ndarray, codec: Codec) -> list[dict[str, Cell]]:
    """Per-row {attribute: cell} maps: argmax within one-hot blocks, unscaled numerics."""
    out: list[dict[str, Cell]] = []
    for i in range(values.shape[0]):
        cells: dict[str, Cell] = {}
        for block in codec.blocks:
            if block.codes:
                k = int(np.argmax(values[i, block.start : block.stop]))
                cells[block.attribute] = block.codes[k]
            else:
                t = min(max(float(values[i, block.start]), 0.0), 1.0)
                cells[block.attribute] = round(block.lo + t * (block.hi - block.lo), 9)
        out.append(cells)
    return out


def decode(encoded: EncodedMatrix, schema: Schema) -> Table:
    """Rebuild a full table; the codec must cover every schema attribute."""
    missing = set(schema.names) - set(encoded.codec.attributes)
    if missing:
        raise CodecError(f"codec does not cover attributes {sorted(missing)}; cannot decode a table")
    rows = []
    for cells in decode_cells(encoded.values, encoded.codec):
        rows.append(tuple(cells[name] for name in schema.names))
    return Table(schema, tuple(rows))


def expand_mask(mask: MaskMatrix, codec: Codec) -> np.ndarray:
    """Spread the per-attribute mask across each attribute's encoded columns."""
    n = mask.entries.shape[0]
    out = np.zeros((n, codec.width), dtype=np.float64)
    for block in codec.blocks:
        col = block.table_column
        out[:, block.start : block.stop] = mask.entries[:, col : col + 1]
    return out


def label_indices(table: Table) -> np.ndarray:
    """Class labels as indices into the schema's declared class-code order."""
    order = {code: i for i, code in enumerate(table.schema.class_codes)}
    return np.array([order[label] for label in table.labels()], dtype=np.int64)


def one_hot_labels(table: Table) -> np.ndarray:
    idx = label_indices(table)
    out = np.zeros((len(idx), len(table.schema.class_codes)), dtype=np.float64)
    out[np.arange(len(idx)), idx] = 1.0
    return out


def codec_to_dict(codec: Codec) -> dict:
    """JSON-friendly codec descriptor (code tokens keep their string form)."""
    return {
        "blocks": [
            {
                "attribute": b.attribute,
                "start": b.start,
                "table_column": b.table_column,
                "codes": [str(c) for c in b.codes],
                "lo": b.lo,
                "hi": b.hi,
            }
            for b in codec.blocks
        ]
    }


def codec_from_dict(doc: dict, schema: Schema) -> Codec:
    blocks = []
    for raw in doc["blocks"]:
        attr = schema.attribute(raw["attribute"])
        codes = tuple(attr.parse_token(tok) for tok in raw["codes"])
        blocks.append(
            Block(
                attribute=raw["attribute"],
                start=raw["start"],
                table_column=raw["table_column"],
                codes=codes,
                lo=raw["lo"],
                hi=raw["hi"],
            )
        )
    return Codec(tuple(blocks))
