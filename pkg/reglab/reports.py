"""CSV and JSON rendering of rate studies."""
import csv
import io
import json
import logging
import math
from pathlib import Path

import numpy as np

from .exceptions import InvalidParameter, ReportWriteError
from .experiments import ROW_COLUMNS

logger = logging.getLogger(__name__)

FORMATS = ('csv', 'json')


def csv_cell(value):
    if isinstance(value, (bool, np.bool_)):
        return 'true' if value else 'false'
    return format(float(value), '.17g')


def _jsonable(value):
    """Plain JSON types; NaN and infinities become null."""
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, np.ndarray):
        return [_jsonable(v) for v in value.tolist()]
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


def report_payload(result):
    rows = []
    for row in result.rows:
        entry = row.as_dict()
        entry['checks'] = row.checks
        rows.append(entry)
    return _jsonable({
        'rows': rows,
        'fitted_slopes': result.fitted_slopes,
        'summary': result.summary,
        'rate_constant': result.rate_constant,
        'config': result.config,
    })


def render_report(result, fmt):
    if fmt == 'csv':
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator='\n')
        writer.writerow(ROW_COLUMNS)
        for row in result.rows:
            values = row.as_dict()
            writer.writerow([csv_cell(values[name]) for name in ROW_COLUMNS])
        return buffer.getvalue()
    if fmt == 'json':
        # floats are written with the shortest repr that round-trips exactly
        return json.dumps(report_payload(result), indent=2, sort_keys=True, allow_nan=False) + '\n'
    raise InvalidParameter(f"unknown report format '{fmt}', choose one of {', '.join(FORMATS)}")


def emit_report(result, fmt, path):
    text = render_report(result, fmt)
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding='utf-8')
    except OSError as exc:
        raise ReportWriteError(path, exc.strerror or str(exc)) from exc
    logger.info("wrote %s report with %d rows to %s", fmt, len(result.rows), path)
    return path
