"""File formats: event logs, matrices, profiles, cohort directories, result CSVs.

All writers are deterministic (stable float repr, sorted JSON keys, no
timestamps), so rerunning a command with the same inputs produces
byte-identical files.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .ingest import EventLog

EVENT_LOG_HEADER = ["user_id", "timestamp_s", "state"]
RESULTS_HEADER = ["strategy", "param", "epsilon", "rank", "n_cells", "deanon_prob",
                  "deanon_chance", "ads", "regret_mean", "regret_stderr", "runs", "seed"]
CURVE_HEADER = ["step", "regret_mean", "regret_stderr"]


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


# ---------------------------------------------------------------- event logs

def write_event_log_csv(path, log: EventLog) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(EVENT_LOG_HEADER)
        for user in log.users:
            for t, state in log.events(user):
                writer.writerow([user, _fmt(t), state])


def read_event_log_csv(path) -> EventLog:
    entries = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != EVENT_LOG_HEADER:
            raise ValueError(f"event log must start with header {','.join(EVENT_LOG_HEADER)!r}")
        for row in reader:
            if not row:
                continue
            if len(row) != 3:
                raise ValueError(f"malformed event row: {row!r}")
            user, timestamp, state = row
            t = float(timestamp)
            if t < 0:
                raise ValueError(f"negative timestamp for user {user!r}")
            entries.append((user, t, int(state)))
    return EventLog(entries)


# ------------------------------------------------------------------ matrices

def write_matrix_csv(path, matrix) -> None:
    m = np.asarray(matrix, dtype=float)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        for row in m:
            fh.write(",".join(repr(float(v)) for v in row))
            fh.write("\n")


def read_matrix_csv(path) -> np.ndarray:
    rows = []
    with open(path, newline="", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                rows.append([float(v) for v in line.split(",")])
    if not rows:
        raise ValueError(f"empty matrix file: {path}")
    return np.asarray(rows, dtype=float)


def write_matrix_json(path, matrix) -> None:
    m = np.asarray(matrix, dtype=float)
    payload = {"d": int(m.shape[0]), "rows": [[float(v) for v in row] for row in m]}
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, sort_keys=True)
        fh.write("\n")


def read_matrix_json(path) -> np.ndarray:
    with open(path, encoding="utf-8") as fh:
        payload = json.load(fh)
    m = np.asarray(payload["rows"], dtype=float)
    if m.shape != (payload["d"], payload["d"]):
        raise ValueError(f"matrix shape {m.shape} does not match declared d={payload['d']}")
    return m


# ---------------------------------------------------------- cohort directory

def write_cohort_dir(directory, matrices, manifest: dict) -> None:
    """Write one matrix CSV per user plus a manifest.json."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    names = []
    for i, m in enumerate(matrices):
        name = f"user_{i:04d}.csv"
        write_matrix_csv(directory / name, m)
        names.append(name)
    payload = dict(manifest)
    payload["files"] = names
    with open(directory / "manifest.json", "w", encoding="utf-8") as fh:
        json.dump(payload, fh, sort_keys=True, indent=2)
        fh.write("\n")


def read_cohort_dir(directory) -> tuple[list[np.ndarray], dict]:
    directory = Path(directory)
    with open(directory / "manifest.json", encoding="utf-8") as fh:
        manifest = json.load(fh)
    matrices = [read_matrix_csv(directory / name) for name in manifest["files"]]
    return matrices, manifest


# ------------------------------------------------------------------ profiles

def write_profiles_csv(path, user_ids, vectors) -> None:
    x = np.asarray(vectors, dtype=float)
    if x.ndim != 2 or x.shape[0] != len(user_ids):
        raise ValueError("vectors must be (n_users, n_features) aligned with user_ids")
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["user_id"] + [f"f{i}" for i in range(x.shape[1])])
        for user, row in zip(user_ids, x):
            writer.writerow([user] + [repr(float(v)) for v in row])


def read_profiles_csv(path) -> tuple[list[str], np.ndarray]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header or header[0] != "user_id":
            raise ValueError("profiles CSV must start with a user_id column")
        users, rows = [], []
        for row in reader:
            if not row:
                continue
            users.append(row[0])
            rows.append([float(v) for v in row[1:]])
    if not rows:
        raise ValueError(f"empty profiles file: {path}")
    return users, np.asarray(rows, dtype=float)


# ------------------------------------------------------------------- results

def write_results_csv(path, rows, meta: dict) -> None:
    """Result table as RFC-4180 CSV, preceded by '#' metadata lines.

    The metadata lines echo the toolkit version and the fully resolved
    configuration; readers in this repository skip lines starting with '#'.
    """
    with open(path, "w", newline="", encoding="utf-8") as fh:
        for key in sorted(meta):
            fh.write(f"# {key}: {json.dumps(meta[key], sort_keys=True)}\r\n")
        writer = csv.writer(fh)
        writer.writerow(RESULTS_HEADER)
        for row in rows:
            writer.writerow([_fmt(v) for v in row.as_tuple()])


def read_results_csv(path) -> tuple[list[dict], dict]:
    """Read a result table; returns (rows as dicts of strings, metadata)."""
    meta: dict = {}
    lines = []
    with open(path, newline="", encoding="utf-8") as fh:
        for line in fh:
            if line.startswith("#"):
                body = line[1:].strip()
                if ":" in body:
                    key, _, value = body.partition(":")
                    try:
                        meta[key.strip()] = json.loads(value.strip())
                    except json.JSONDecodeError:
                        meta[key.strip()] = value.strip()
                continue
            lines.append(line)
    reader = csv.reader(lines)
    header = next(reader, None)
    if header != RESULTS_HEADER:
        raise ValueError(f"results CSV must have header {','.join(RESULTS_HEADER)!r}")
    rows = [dict(zip(RESULTS_HEADER, row)) for row in reader if row]
    return rows, meta


def write_curve_csv(path, mean, stderr, meta: dict | None = None) -> None:
    """Cumulative-regret curve: one row per step."""
    mean = np.asarray(mean, dtype=float)
    stderr = np.asarray(stderr, dtype=float)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        for key in sorted(meta or {}):
            fh.write(f"# {key}: {json.dumps(meta[key], sort_keys=True)}\r\n")
        writer = csv.writer(fh)
        writer.writerow(CURVE_HEADER)
        for step, (m, s) in enumerate(zip(mean, stderr), start=1):
            writer.writerow([step, repr(float(m)), repr(float(s))])
