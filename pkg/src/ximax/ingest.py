"""Delimited-file ingestion into a paired sample."""

from __future__ import annotations

import csv
import math

import numpy as np

from .ranks import PairedSample

_DELIMITERS = {"comma": ",", "tab": "\t"}


class MatrixFormatError(ValueError):
    """Input file cannot be parsed into a numeric matrix."""


def _resolve_delimiter(path: str, delimiter: str | None) -> str:
    if delimiter is None:
        return "\t" if path.lower().endswith(".tsv") else ","
    if delimiter in _DELIMITERS:
        return _DELIMITERS[delimiter]
    if delimiter in _DELIMITERS.values():
        return delimiter
    raise MatrixFormatError(f"unsupported delimiter: {delimiter!r}")


def load_matrix(path: str, x_col: int | str,
                delimiter: str | None = None) -> PairedSample:
    """Read a header-plus-numeric-rows file and split off the x column.

    x_col is a 0-based column index (int) or a header name (str). The
    delimiter defaults to tab for .tsv files and comma otherwise. Every data
    cell must parse as a finite float; errors name the offending row and
    column.
    """
    sep = _resolve_delimiter(path, delimiter)
    with open(path, newline="") as handle:
        reader = csv.reader(handle, delimiter=sep)
        try:
            header = [cell.strip() for cell in next(reader)]
        except StopIteration:
            raise MatrixFormatError(f"{path}: file is empty") from None
        if len(header) < 2:
            raise MatrixFormatError(
                f"{path}: need an x column plus at least one hypothesis column"
            )
        if isinstance(x_col, int):
            if not 0 <= x_col < len(header):
                raise MatrixFormatError(
                    f"{path}: x column index {x_col} outside 0..{len(header) - 1}"
                )
            x_index = x_col
        else:
            hits = [i for i, name in enumerate(header) if name == x_col]
            if not hits:
                raise MatrixFormatError(f"{path}: no column named {x_col!r}")
            if len(hits) > 1:
                raise MatrixFormatError(f"{path}: column name {x_col!r} is ambiguous")
            x_index = hits[0]

        rows = []
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise MatrixFormatError(
                    f"{path}: line {line_no} has {len(row)} cells, expected {len(header)}"
                )
            parsed = []
            for name, cell in zip(header, row):
                try:
                    value = float(cell)
                except ValueError:
                    raise MatrixFormatError(
                        f"{path}: line {line_no}, column {name!r}: "
                        f"cannot parse {cell.strip()!r}"
                    ) from None
                if not math.isfinite(value):
                    raise MatrixFormatError(
                        f"{path}: line {line_no}, column {name!r}: non-finite value"
                    )
                parsed.append(value)
            rows.append(parsed)

    data = np.asarray(rows, dtype=np.float64).reshape(len(rows), len(header))
    keep = [i for i in range(len(header)) if i != x_index]
    return PairedSample(
        x=data[:, x_index],
        y=data[:, keep],
        names=tuple(header[i] for i in keep),
    )
