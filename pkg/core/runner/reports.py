#!/usr/bin/env python3
"""
Report Files
============

Per scenario one JSON document (full report, resolved config embedded)
and, with the csv format, one CSV file per result table. A manifest.json
lists the scenarios of the run. The only volatile field is
'generated_at'; strip_volatile() removes it for comparisons.

Non-finite floats are written as the strings "inf", "-inf" and null for
NaN so the documents stay strict JSON.
"""

import csv
import json
import logging
from datetime import datetime, timezone
from enum import Enum
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Union

import numpy as np

from .. import __version__
from ..errors import ReportIOError

logger = logging.getLogger(__name__)

VOLATILE_FIELDS = ('generated_at',)


def to_jsonable(value: Any) -> Any:
    """numpy scalars and arrays, enums, tuples and non-finite floats made JSON-safe"""
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return to_jsonable(value.tolist())
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if np.isnan(value):
            return None
        if np.isinf(value):
            return "inf" if value > 0 else "-inf"
        return value
    return value


def dumps(document: Dict[str, Any]) -> str:
    return json.dumps(to_jsonable(document), indent=2, allow_nan=False)


def strip_volatile(document: Dict[str, Any]) -> Dict[str, Any]:
    return {k: v for k, v in document.items() if k not in VOLATILE_FIELDS}


def report_stem(scenario_id: str) -> str:
    return scenario_id.replace('/', '__').replace(' ', '_')


def _prepare(out_dir: Union[str, Path]) -> Path:
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise ReportIOError(f"cannot create output directory {out}: {e}") from e
    return out


def _write_text(path: Path, text: str):
    try:
        path.write_text(text, encoding='utf-8')
    except OSError as e:
        raise ReportIOError(f"cannot write {path}: {e}") from e


def table_columns(rows: Iterable[Dict[str, Any]]) -> List[str]:
    """Union of row keys in first-seen order"""
    columns: List[str] = []
    for row in rows:
        for key in row:
            if key not in columns:
                columns.append(key)
    return columns


def write_table(path: Path, rows: List[Dict[str, Any]]):
    columns = table_columns(rows)
    try:
        with open(path, 'w', newline='', encoding='utf-8') as handle:
            writer = csv.DictWriter(handle, fieldnames=columns, restval='')
            writer.writeheader()
            for row in rows:
                writer.writerow({k: _cell(v) for k, v in row.items()})
    except OSError as e:
        raise ReportIOError(f"cannot write {path}: {e}") from e


def _cell(value: Any) -> Any:
    value = to_jsonable(value)
    if value is None:
        return ''
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, (list, dict)):
        return json.dumps(value)
    return value


def write_report(report: Dict[str, Any], out_dir: Union[str, Path], fmt: str = "json",
                 generated_at: Optional[str] = None) -> List[Path]:
    """Write one scenario report; returns the files written"""
    if fmt not in ("json", "csv"):
        raise ReportIOError(f"unknown report format {fmt!r}")
    out = _prepare(out_dir)
    stem = report_stem(report['scenario'])
    document = dict(report, generated_at=generated_at or _now())
    written = [out / f"{stem}.json"]
    _write_text(written[0], dumps(document))
    if fmt == "csv":
        for name, rows in report.get('tables', {}).items():
            if not rows:
                continue
            path = out / f"{stem}__{name}.csv"
            write_table(path, rows)
            written.append(path)
    logger.debug("Wrote %d report files for %s", len(written), report['scenario'])
    return written


def write_manifest(entries: List[Dict[str, Any]], out_dir: Union[str, Path], run_seed: int,
                   generated_at: Optional[str] = None) -> Path:
    out = _prepare(out_dir)
    path = out / "manifest.json"
    _write_text(path, dumps({
        'version': __version__,
        'run_seed': int(run_seed),
        'scenarios': entries,
        'generated_at': generated_at or _now(),
    }))
    return path


def load_report(path: Union[str, Path]) -> Dict[str, Any]:
    try:
        with open(path, 'r', encoding='utf-8') as handle:
            return json.load(handle)
    except (OSError, json.JSONDecodeError) as e:
        raise ReportIOError(f"cannot read report {path}: {e}") from e


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec='seconds')
