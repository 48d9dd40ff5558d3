"""CSV and JSON persistence of experiment results."""

from __future__ import annotations

import csv
import dataclasses
import json
import math
import subprocess
from pathlib import Path

from . import __version__
from .experiments import ExperimentRecord


def version_string() -> str:
    try:
        out = subprocess.run(["git", "describe", "--always", "--dirty", "--tags"],
                             cwd=Path(__file__).parent, capture_output=True, text=True, timeout=5)
        if out.returncode == 0 and out.stdout.strip():
            return f"{__version__}+{out.stdout.strip()}"
    except (OSError, subprocess.SubprocessError):
        pass
    return __version__


def _cell(value):
    if value is None:
        return ""
    if isinstance(value, float):
        return "" if math.isnan(value) else repr(value)
    return value


def _open(path):
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        return open(path, "w", newline="")
    except OSError as exc:
        raise OSError(f"cannot write results to {path}: {exc}") from exc


def write_rows(path, header, rows) -> Path:
    with _open(path) as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_cell(v) for v in row])
    return Path(path)


def write_records(records, path) -> Path:
    names = ExperimentRecord.field_names()
    return write_rows(path, names, ([getattr(r, n) for n in names] for r in records))


_TYPES = {f.name: f.type for f in dataclasses.fields(ExperimentRecord)}


def _parse(name: str, text: str):
    kind = str(_TYPES[name])
    if "bool" in kind:
        if text == "":
            return None
        return text == "True"
    if "int" in kind:
        return None if text == "" else int(text)
    if "float" in kind:
        return float("nan") if text == "" else float(text)
    return text


def read_records(path) -> list:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        return [ExperimentRecord(**{k: _parse(k, v) for k, v in row.items()}) for row in reader]


def write_cdf(tables: dict, path) -> Path:
    """Long format: one ``(n_users, turn, fraction)`` row per CDF step."""
    rows = [(n, t, f) for n, table in tables.items() for t, f in table]
    return write_rows(path, ["n_users", "turn", "fraction_converged"], rows)


def write_dataclass_rows(rows, path) -> Path:
    if not rows:
        raise ValueError("no rows to write")
    names = [f.name for f in dataclasses.fields(rows[0])]
    return write_rows(path, names, ([getattr(r, n) for n in names] for r in rows))


def write_rates_long(rows, path) -> Path:
    """Long format ``(n_users, series, mean, std)`` for rates-vs-N plots."""
    series = [("fsig_mean", "mean_rate", "mean_rate_std"),
              ("fsig_min", "min_rate", "min_rate_std"),
              ("optimal_mean", "optimal_mean_rate", "optimal_mean_rate_std"),
              ("random_mean", "random_mean_rate", "random_mean_rate_std"),
              ("random_min", "random_min_rate", "random_min_rate_std")]
    out = [(r.n_users, name, getattr(r, mean), getattr(r, std))
           for r in rows for name, mean, std in series]
    return write_rows(path, ["n_users", "series", "mean", "std"], out)


def write_summary(path, config=None, **extra) -> Path:
    payload = {"version": version_string()}
    if config is not None:
        payload["config"] = config.to_dict() if hasattr(config, "to_dict") else config
    payload.update(extra)
    try:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        Path(path).write_text(json.dumps(payload, indent=2, default=_json_default))
    except OSError as exc:
        raise OSError(f"cannot write summary to {path}: {exc}") from exc
    return Path(path)


def _json_default(obj):
    if dataclasses.is_dataclass(obj):
        return dataclasses.asdict(obj)
    if hasattr(obj, "tolist"):
        return obj.tolist()
    if hasattr(obj, "item"):
        return obj.item()
    raise TypeError(f"not JSON serialisable: {type(obj).__name__}")


def emit_results(records, fmt: str, path, config=None, **extra) -> Path:
    """Write ``records`` as ``csv`` rows or a ``json`` summary at ``path``."""
    if fmt == "csv":
        return write_records(records, path)
    if fmt == "json":
        return write_summary(path, config, records=[dataclasses.asdict(r) for r in records], **extra)
    raise ValueError(f"unknown format {fmt!r}")
