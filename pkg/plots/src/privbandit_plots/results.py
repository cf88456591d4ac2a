"""Reader for the sweep result CSVs.

The schema is fixed by the benchmark harness; this package depends only on
the file format, never on the benchmark code. Lines starting with '#' are
the harness's metadata echo and are skipped.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

EXPECTED_HEADER = [
    "strategy", "param", "epsilon", "rank", "n_cells", "deanon_prob",
    "deanon_chance", "ads", "regret_mean", "regret_stderr", "runs", "seed",
]

_FLOAT_FIELDS = ("epsilon", "deanon_prob", "deanon_chance", "ads",
                 "regret_mean", "regret_stderr")
_INT_FIELDS = ("rank", "n_cells", "runs", "seed")


@dataclass(frozen=True)
class SweepRow:
    strategy: str
    param: str
    epsilon: float | None
    rank: int | None
    n_cells: int | None
    deanon_prob: float | None
    deanon_chance: float | None
    ads: float | None
    regret_mean: float | None
    regret_stderr: float | None
    runs: int | None
    seed: int | None


class SchemaError(ValueError):
    """Raised when a CSV does not carry the harness schema."""


def _check_header(header: list[str] | None) -> None:
    if header is None:
        raise SchemaError("input CSV is empty")
    if header == EXPECTED_HEADER:
        return
    for position, want in enumerate(EXPECTED_HEADER):
        got = header[position] if position < len(header) else "<missing>"
        if got != want:
            raise SchemaError(
                f"schema mismatch at column {position}: expected {want!r}, got {got!r}")
    raise SchemaError(f"schema mismatch: {len(header)} columns, "
                      f"expected {len(EXPECTED_HEADER)}")


def _convert(name: str, value: str, row_number: int):
    if value == "":
        return None
    try:
        if name in _FLOAT_FIELDS:
            return float(value)
        if name in _INT_FIELDS:
            return int(float(value))
    except ValueError:
        raise SchemaError(f"row {row_number}: column {name!r} holds "
                          f"non-numeric value {value!r}") from None
    return value


def read_sweep(path) -> list[SweepRow]:
    """Parse a results CSV, skipping '#' metadata lines."""
    with open(path, newline="", encoding="utf-8") as fh:
        lines = [line for line in fh if not line.startswith("#")]
    reader = csv.reader(lines)
    _check_header(next(reader, None))
    rows = []
    for number, raw in enumerate(reader, start=1):
        if not raw:
            continue
        if len(raw) != len(EXPECTED_HEADER):
            raise SchemaError(f"row {number}: expected {len(EXPECTED_HEADER)} "
                              f"columns, got {len(raw)}")
        values = {name: _convert(name, value, number)
                  for name, value in zip(EXPECTED_HEADER, raw)}
        rows.append(SweepRow(**values))
    if not rows:
        raise SchemaError("input CSV holds no data rows")
    return rows


def strategy_order(rows: list[SweepRow]) -> list[str]:
    """Distinct strategy names in first-appearance order."""
    seen: list[str] = []
    for row in rows:
        if row.strategy not in seen:
            seen.append(row.strategy)
    return seen
