from typing import Union
import argparse
from pathlib import Path
import logging
import sys

import numpy as np


def read_matrix(filename: Union[Path, str]):
    """
    Read a dense complex matrix from a text file.

    The file holds the dimension ``n`` followed by ``n*n`` pairs ``re im``
    in row-major order; line breaks are not significant.

    Parameters
    ----------
    filename : str or Path
        Path to the matrix file.

    Returns
    -------
    numpy.ndarray
        Complex array of shape ``(n, n)``.

    Raises
    ------
    ValueError
        If the file is empty or holds the wrong number of entries.
    """
    tokens = Path(filename).read_text().split()
    if not tokens:
        raise ValueError("Empty matrix file: {}".format(filename))
    n = int(tokens[0])
    values = list(map(float, tokens[1:]))
    if n <= 0 or len(values) != 2 * n * n:
        raise ValueError("Expected {} 're im' pairs after the dimension, found {} numbers.".format(
            n * n, len(values)))
    pairs = np.array(values).reshape(n * n, 2)
    return (pairs[:, 0] + 1j * pairs[:, 1]).reshape(n, n)


def parse_complex(text: str) -> complex:
    """
    Read a complex number written as ``"re im"`` or as a plain real.

    Example
    -------
    >>> parse_complex("0 1")
    1j
    >>> parse_complex("2.5")
    (2.5+0j)
    """
    parts = text.split()
    if len(parts) == 1:
        return complex(float(parts[0]), 0.0)
    if len(parts) == 2:
        return complex(float(parts[0]), float(parts[1]))
    raise ValueError("Cannot read '{}' as a complex number.".format(text))


def parse_floats(text: str):
    """Split a comma separated list of reals."""
    return [float(item) for item in text.split(',') if item.strip()]


def common_parser(description: str, default_format=None):
    """
    Argument parser shared by the console scripts: the scenario file and
    the ``--format``, ``--seed``, ``--tol``, ``--depth`` and ``-v`` flags.
    """
    parser = argparse.ArgumentParser(description=description)
    parser.add_argument('config', help='Scenario file (INI key = value sections)')
    parser.add_argument('--format', choices=['csv', 'json', 'table'], default=default_format,
                        help='Output format; overrides the scenario file')
    parser.add_argument('--seed', type=int, help='Seed of random conditions and section families')
    parser.add_argument('--tol', type=float, help='Tolerance of universal clauses and class merging')
    parser.add_argument('--depth', type=int, help='Filter chain depth')
    parser.add_argument('-v', '--verbose', action='count', default=0,
                        help='Log INFO with -v and DEBUG with -vv')
    return parser


def overrides(args):
    """Command line values that take precedence over the scenario file."""
    return {'format': args.format, 'seed': args.seed, 'tol': args.tol, 'depth': args.depth}


def setup_logging(verbosity: int = 0):
    level = logging.WARNING
    if verbosity == 1:
        level = logging.INFO
    elif verbosity > 1:
        level = logging.DEBUG
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")

# common print error


def print_err(msg="", is_stop=True):
    print(msg)
    if is_stop:
        sys.exit(1)


if __name__ == "__main__":
    import doctest
    doctest.testmod()
