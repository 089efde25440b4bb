"""
report.py

Writers for the record streams of the console scripts. CSV and JSON lines
are the stable formats; ``table`` pads columns for reading on a terminal.
"""
import csv
import json
import math
import sys

FORMATS = ('csv', 'json', 'table')


def _cell(value):
    if isinstance(value, float):
        return "{:.6g}".format(value)
    if value is None:
        return ''
    return str(value)


def _jsonable(value):
    if isinstance(value, float) and not math.isfinite(value):
        return str(value)
    if isinstance(value, complex):
        return [value.real, value.imag]
    return value


def columns_of(records):
    """Keys of all records in first-seen order."""
    out = []
    for rec in records:
        for key in rec:
            if key not in out:
                out.append(key)
    return out


def write_records(records, fmt='csv', stream=None, columns=None):
    """
    Write a list of flat dictionaries.

    Parameters
    ----------
    records : list of dict
        One dictionary per row.
    fmt : str
        ``csv``, ``json`` (one object per line) or ``table``.
    stream : file, optional
        Defaults to standard output.
    columns : list of str, optional
        Column order; defaults to the keys in first-seen order.

    Example
    -------
    >>> write_records([{'a': 1, 'b': 0.5}], 'json')
    {"a": 1, "b": 0.5}
    """
    stream = stream if stream is not None else sys.stdout
    if fmt not in FORMATS:
        raise ValueError("Unknown format '{}'; expected one of {}.".format(fmt, ', '.join(FORMATS)))
    columns = columns or columns_of(records)
    if fmt == 'csv':
        writer = csv.DictWriter(stream, fieldnames=columns, extrasaction='ignore', lineterminator='\n')
        writer.writeheader()
        for rec in records:
            writer.writerow(rec)
    elif fmt == 'json':
        for rec in records:
            stream.write(json.dumps({k: _jsonable(rec.get(k)) for k in columns}) + '\n')
    else:
        rows = [[_cell(rec.get(k)) for k in columns] for rec in records]
        widths = [max([len(c)] + [len(r[i]) for r in rows]) for i, c in enumerate(columns)]
        stream.write('  '.join(c.ljust(w) for c, w in zip(columns, widths)).rstrip() + '\n')
        stream.write('  '.join('-' * w for w in widths) + '\n')
        for row in rows:
            stream.write('  '.join(c.ljust(w) for c, w in zip(row, widths)).rstrip() + '\n')


if __name__ == "__main__":
    import doctest
    doctest.testmod()
