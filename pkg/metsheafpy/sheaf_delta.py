import logging

import numpy as np

from metsheafpy.quadrature import QuadratureError, quadrature_oracle
from metsheafpy.report import write_records
from metsheafpy.scenario import ScenarioError, float_list, physical_constants, read_scenario
from metsheafpy.utilis import common_parser, overrides, print_err, setup_logging

LOGGER = logging.getLogger(__name__)

COLUMNS = ['tau', 'value', 'g0', 'error', 'ratio']

TEST_FUNCTIONS = {
    'gauss_cos': lambda x: np.exp(-x ** 2) * np.cos(x),
    'gauss': lambda x: np.exp(-x ** 2),
    'sech': lambda x: 1.0 / np.cosh(x),
}


def run_delta(taus, g, constants):
    """
    Pair ``phi_(tau,0)(., 0)`` with ``g`` for every ``tau``. ``ratio`` is the
    error at the previous ``tau`` divided by the current one; halving
    ``tau`` gives about 4.

    Example
    -------
    >>> from metsheafpy.wavepacket import PhysicalConstants
    >>> rows = run_delta([0.1, 0.05], TEST_FUNCTIONS['gauss_cos'], PhysicalConstants())
    >>> 3.5 < rows[1]['ratio'] < 4.5
    True
    """
    records = []
    previous = None
    g0 = float(g(0.0))
    for tau in taus:
        value = quadrature_oracle('delta', (tau, g, constants)).real
        error = abs(value - g0)
        ratio = previous / error if previous is not None and error > 0 else None
        records.append({'tau': tau, 'value': value, 'g0': g0, 'error': error, 'ratio': ratio})
        previous = error
    return records


def main():
    parser = common_parser('Approach the delta distribution with narrowing position packets')
    args = parser.parse_args()
    setup_logging(args.verbose)
    try:
        scenario = read_scenario(args.config, overrides(args))
        cfg = scenario.section('delta')
        name = cfg.get('function', 'gauss_cos')
        if name not in TEST_FUNCTIONS:
            raise ScenarioError("unknown test function '{}'; expected one of {}".format(
                name, ', '.join(sorted(TEST_FUNCTIONS))), scenario.line_of('delta', 'function'))
        records = run_delta(float_list(scenario, 'delta', 'tau', '0.1, 0.05'), TEST_FUNCTIONS[name],
                            physical_constants(cfg))
    except (ScenarioError, QuadratureError, ValueError) as err:
        print_err("{}: {}".format(args.config, err))
    write_records(records, scenario.fmt, columns=COLUMNS)


if __name__ == "__main__":
    main()
