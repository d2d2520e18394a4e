"""
Deterministic writers: CSV with a commented header, JSON with sorted keys
and SVG figures without timestamps.
"""
import csv
import io
import json
import os

import matplotlib

matplotlib.use('Agg')
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from . import config  # noqa: E402


def _cell(value):
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return str(value)


def write_csv(path, header, columns, rows):
    """
    Writes `rows` to `path`.

    Arguments
    ---------
    path : str or None
        if None, the text is returned instead of written
    header : list of str
        lines written first, each prefixed by ``# ``, describing the columns
    columns : list of str
        the column names
    rows : iterable of sequences
        floats are written with `repr`, so that they read back exactly
    """
    lines = ['# ' + h for h in header]
    if path is None:
        buf = io.StringIO()
        _write_rows(buf, lines, columns, rows)
        return buf.getvalue()
    with open(path, 'wt', newline='') as f:
        _write_rows(f, lines, columns, rows)


def _write_rows(f, lines, columns, rows):
    for line in lines:
        f.write(line + '\n')
    writer = csv.writer(f, lineterminator='\n')
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_cell(v) for v in row])


def read_csv(path):
    """
    Reads a file written by `write_csv`; returns ``(columns, rows)`` with
    the rows as lists of strings
    """
    with open(path, 'rt', newline='') as f:
        lines = [l for l in f if not l.startswith('#')]
    reader = csv.reader(lines)
    columns = next(reader)
    return columns, [r for r in reader]


def jsonable(obj):
    """
    Converts complex numbers to ``{"re": .., "im": ..}`` and numpy values
    to plain Python, recursively
    """
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (complex, np.complexfloating)):
        return {'re': float(obj.real), 'im': float(obj.imag)}
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    return obj


def dump_json(obj, path=None):
    """
    JSON with sorted keys; written to `path` or returned as a string
    """
    text = json.dumps(jsonable(obj), sort_keys=True, indent=2)
    if path is None:
        return text
    with open(path, 'wt') as f:
        f.write(text + '\n')


def save_svg(fig, path):
    """
    Saves `fig` as SVG without the date and with a fixed hash salt, so that
    the same figure always gives the same bytes
    """
    plt.rcParams['svg.hashsalt'] = config.get('output', 'svg_hashsalt')
    fig.savefig(path, format='svg', metadata={'Date': None})
    plt.close(fig)


def ensure_dir(path):
    d = os.path.dirname(os.path.abspath(path))
    if not os.path.exists(d):
        os.makedirs(d)
