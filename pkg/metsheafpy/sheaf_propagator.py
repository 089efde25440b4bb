import cmath
import itertools
import logging

from metsheafpy.report import write_records
from metsheafpy.scenario import ScenarioError, float_list, physical_constants, read_scenario
from metsheafpy.utilis import common_parser, overrides, print_err, setup_logging
from metsheafpy.wavepacket import UndefinedLimitError, exact_propagator, propagator

LOGGER = logging.getLogger(__name__)

COLUMNS = ['x1', 'x0', 't', 'tau', 're_K', 'im_K', 'abs_K', 'arg_K', 're_exact', 'im_exact',
           'rel_err', 'flag']


def propagator_record(x1, x0, t, tau, constants):
    """
    One row of the sweep. Rows at ``t = 0`` carry the delta approximant and
    the flag ``delta``; rows with ``tau = t = 0`` are flagged ``undefined``.

    Example
    -------
    >>> from metsheafpy.wavepacket import PhysicalConstants
    >>> row = propagator_record(0.0, 0.0, 1.0, 1e-3, PhysicalConstants())
    >>> round(row['abs_K'], 6), row['flag']
    (0.398942, '')
    """
    row = {'x1': x1, 'x0': x0, 't': t, 'tau': tau, 'flag': ''}
    try:
        K = propagator(x1, x0, t, tau, constants)
    except UndefinedLimitError:
        row['flag'] = 'undefined'
        return row
    row.update(re_K=K.real, im_K=K.imag, abs_K=abs(K), arg_K=cmath.phase(K))
    if t == 0:
        row['flag'] = 'delta'
        return row
    exact = exact_propagator(x1, x0, t, constants)
    row.update(re_exact=exact.real, im_exact=exact.imag, rel_err=abs(K - exact) / abs(exact))
    return row


def run_propagator(x1s, x0s, ts, taus, constants):
    """Rows for every ``tau`` and every ``(x1, x0, t)`` of the grid, in that order."""
    records = [propagator_record(x1, x0, t, tau, constants)
               for tau in taus for x1, x0, t in itertools.product(x1s, x0s, ts)]
    LOGGER.info("propagator sweep of %d rows", len(records))
    return records


def main():
    parser = common_parser('Tabulate the imperfect free-particle propagator against its exact limit')
    args = parser.parse_args()
    setup_logging(args.verbose)
    try:
        scenario = read_scenario(args.config, overrides(args))
        cfg = scenario.section('propagator')
        constants = physical_constants(cfg)
        records = run_propagator(float_list(scenario, 'propagator', 'x1', '0'),
                                 float_list(scenario, 'propagator', 'x0', '0'),
                                 float_list(scenario, 'propagator', 't', '1'),
                                 float_list(scenario, 'propagator', 'tau', '1e-3'), constants)
    except (ScenarioError, ValueError) as err:
        print_err("{}: {}".format(args.config, err))
    write_records(records, scenario.fmt, columns=COLUMNS)


if __name__ == "__main__":
    main()
