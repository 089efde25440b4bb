import logging
import sys

from metsheafpy.forcing import force_local, force_point
from metsheafpy.logic import FormulaSyntaxError, UnknownSymbolError, UnboundVariableError
from metsheafpy.report import write_records
from metsheafpy.scenario import ScenarioError, read_scenario
from metsheafpy.sheaf import SheafError, common_domain
from metsheafpy.topology import OpenSet, meet
from metsheafpy.utilis import common_parser, overrides, print_err, setup_logging

LOGGER = logging.getLogger(__name__)

COLUMNS = ['name', 'condition', 'location', 'status', 'margin', 'expected', 'sections', 'certificate']


def _force_on_chain(scenario, chain, cond, binding):
    """First chain element forcing ``cond``, else the verdict on the last one."""
    domain = common_domain(scenario.sheaf, binding)
    verdict = None
    for k, U in enumerate(chain, 1):
        V = meet(U, domain)
        if V is None:
            raise SheafError("chain element {} misses the bound section domains".format(k))
        verdict = force_local(scenario.sheaf, V, cond, binding, scenario.res)
        if verdict.forced:
            return verdict, k
    return verdict, chain.depth


def run_force(scenario):
    """
    Force every condition of the scenario at its location.

    Returns
    -------
    list of dict, bool
        One record per condition, and whether some verdict contradicts
        the expected outcome.
    """
    records = []
    failed = False
    chain = None
    for item in scenario.conditions:
        record = {'name': item.name, 'condition': item.text, 'location': item.location or 'whole',
                  'expected': item.expect or ''}
        try:
            cond = scenario.condition(item)
            binding = scenario.binding(cond)
            where = scenario.location(item.location or 'whole')
            if where == 'chain':
                chain = chain or scenario.chain()
                verdict, index = _force_on_chain(scenario, chain, cond, binding)
                record['location'] = "chain {}".format(index)
            elif isinstance(where, OpenSet):
                verdict = force_local(scenario.sheaf, where, cond, binding, scenario.res)
            else:
                verdict = force_point(scenario.sheaf, where, cond, binding, scenario.res)
        except FormulaSyntaxError as err:
            record.update(status='error', certificate="position {}: {}".format(err.position, err))
        except (ScenarioError, SheafError, UnknownSymbolError, UnboundVariableError, ValueError) as err:
            record.update(status='error', certificate=str(err))
        else:
            record.update(status=verdict.status.value, margin=verdict.margin,
                          sections='|'.join(sec.label for sec in binding.values()),
                          certificate=verdict.summary())
            if (item.expect == 'forced' and verdict.refuted) or (item.expect == 'refuted' and verdict.forced):
                LOGGER.warning("'%s' is %s, expected %s", item.name, verdict.status.value, item.expect)
                failed = True
        records.append(record)
    LOGGER.info("forced %d conditions", len(records))
    return records, failed


def main():
    parser = common_parser('Force the conditions of a scenario on a metric sheaf')
    args = parser.parse_args()
    setup_logging(args.verbose)
    try:
        scenario = read_scenario(args.config, overrides(args))
    except ScenarioError as err:
        print_err("{}: {}".format(args.config, err))
    records, failed = run_force(scenario)
    write_records(records, scenario.fmt, columns=COLUMNS)
    if failed:
        sys.exit(1)


if __name__ == "__main__":
    main()
