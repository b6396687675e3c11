"""
CSV and JSON report writers.

Reports embed the resolved configuration and the tolerances in use; data
files never contain timestamps, so identical configurations give identical
bytes.
"""
import json
import logging
import math
import os
import sys
import tempfile
from typing import Optional

import numpy as np
import pandas as pd
from django.conf import settings

logger = logging.getLogger(__name__)

TOLERANCE_SETTINGS = (
    'QUAD_RTOL', 'QUAD_LIMIT', 'NEWTON_TOL', 'NEWTON_STEP', 'NEWTON_MAX_ITER',
    'THRESHOLD_CLAMP', 'FIXED_POINT_TOL', 'FIXED_POINT_MAX_ITER',
)


def tolerances() -> dict:
    return {name.lower(): getattr(settings, name) for name in TOLERANCE_SETTINGS}


def _plain(value, exact: bool):
    """Turn numpy scalars, complex numbers and non-finite floats into JSON values"""
    if isinstance(value, dict):
        return {key: _plain(item, exact) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(item, exact) for item in value]
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, bool) or value is None:
        return value
    if isinstance(value, complex):
        return {'re': _plain(value.real, exact), 'im': _plain(value.imag, exact)}
    if isinstance(value, float):
        if exact or not math.isfinite(value):
            return repr(value)
        return value
    return value


def _header(config: dict) -> str:
    lines = [f"# {key}={value}" for key, value in config.items()]
    lines += [f"# {key}={value}" for key, value in tolerances().items()]
    return '\n'.join(lines) + '\n'


def render_csv(frame: pd.DataFrame, config: dict, header: bool = True) -> str:
    body = frame.to_csv(float_format=settings.CSV_FLOAT_FORMAT, index=False, lineterminator='\n')
    return (_header(config) if header else '') + body


def render_json(config: dict, rows=None, report=None, exact: bool = False) -> str:
    document = {'config': _plain(config, exact), 'tolerances': _plain(tolerances(), exact)}
    if rows is not None:
        if isinstance(rows, pd.DataFrame):
            rows = rows.to_dict(orient='records')
        document['rows'] = _plain(rows, exact)
    if report is not None:
        document['report'] = _plain(report, exact)
    return json.dumps(document, indent=2) + '\n'


def write_atomic(text: str, path: Optional[str]) -> None:
    """Write to a temporary file next to ``path`` and rename it into place; stdout when path is None"""
    if path is None:
        sys.stdout.write(text)
        return
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    handle = tempfile.NamedTemporaryFile('w', dir=directory, delete=False, suffix='.tmp',
                                         encoding='utf-8', newline='')
    try:
        with handle:
            handle.write(text)
        os.replace(handle.name, path)
    except Exception:
        if os.path.exists(handle.name):
            os.unlink(handle.name)
        logger.error(f"Could not write {path}")
        raise
    logger.info(f"Wrote {path}")


def write_report(config: dict, path: Optional[str], fmt: str, frame: pd.DataFrame = None,
                 report=None, exact: bool = False, header: bool = True) -> None:
    """
    Emit one report.

    CSV needs a frame; JSON carries the frame as "rows" and/or a free-form
    "report" mapping.
    """
    if fmt == 'csv':
        if frame is None:
            frame = pd.DataFrame([report]) if isinstance(report, dict) else pd.DataFrame(report)
        text = render_csv(frame, config, header)
    else:
        text = render_json(config, rows=frame, report=report, exact=exact)
    write_atomic(text, path)
