import logging
import random
import sys

from metsheafpy.generic import build_generic_model, gmt_crosscheck
from metsheafpy.logic import FormulaSyntaxError, UnknownSymbolError, format_condition, random_condition
from metsheafpy.report import write_records
from metsheafpy.scenario import ScenarioError, read_scenario
from metsheafpy.sheaf import SheafError
from metsheafpy.utilis import common_parser, overrides, print_err, setup_logging

LOGGER = logging.getLogger(__name__)

COLUMNS = ['name', 'condition', 'generic', 'forcing', 'outcome', 'forced_at']
OUTCOMES = ('agree', 'disagree', 'inconclusive')


def _model_sections(scenario):
    cfg = scenario.section('gmt')
    catalog = scenario.sheaf.catalog
    default = ' '.join(n for n, s in catalog.items() if s.sort == scenario.sheaf.sort)
    names = cfg.get('sections', default).split()
    missing = [n for n in names if n not in catalog]
    if missing:
        raise ScenarioError("unknown section(s) {}".format(', '.join(missing)),
                            scenario.line_of('gmt', 'sections'))
    return {n: catalog[n] for n in names}


def run_gmt(scenario):
    """
    Cross-check generic-model satisfaction against forcing on the chain for
    the listed conditions and ``[gmt] count`` random ones.

    Returns
    -------
    list of dict, dict
        One record per condition and the count of every outcome.

    Raises
    ------
    ScenarioError
        A condition is malformed or names a section missing from the catalog.
    """
    chain = scenario.chain()
    sections = _model_sections(scenario)
    model = build_generic_model(scenario.sheaf, chain, sections, scenario.res)
    cfg = scenario.section('gmt')
    count = int(cfg.get('count', 0))
    depth = int(cfg.get('depth', 3))

    jobs = []
    for item in scenario.conditions:
        try:
            cond = scenario.condition(item)
        except (FormulaSyntaxError, UnknownSymbolError) as err:
            raise ScenarioError("condition '{}': {}".format(item.name, err), item.line) from None
        try:
            binding = scenario.binding(cond)
        except ScenarioError as err:
            raise ScenarioError(err.msg, item.line) from None
        jobs.append((item.name, cond, binding))
    rng = random.Random(scenario.seed)
    names = sorted(sections)
    for i in range(count):
        cond = random_condition(rng, depth, names)
        jobs.append(("random{}".format(i + 1), cond, dict(sections)))

    records = []
    counts = dict.fromkeys(OUTCOMES, 0)
    for name, cond, binding in jobs:
        same = all(sections.get(v) is s for v, s in binding.items())
        check = gmt_crosscheck(scenario.sheaf, chain, cond, binding, scenario.res, model if same else None)
        counts[check.outcome] += 1
        records.append({'name': name, 'condition': format_condition(cond),
                        'generic': check.generic.status.value, 'forcing': check.forcing.status.value,
                        'outcome': check.outcome, 'forced_at': check.forced_at})
    LOGGER.info("agree %d, disagree %d, inconclusive %d", counts['agree'], counts['disagree'],
                counts['inconclusive'])
    return records, counts


def main():
    parser = common_parser('Compare the generic model with forcing along a filter chain')
    args = parser.parse_args()
    setup_logging(args.verbose)
    try:
        scenario = read_scenario(args.config, overrides(args))
        records, counts = run_gmt(scenario)
    except (ScenarioError, SheafError, ValueError) as err:
        print_err("{}: {}".format(args.config, err))
    write_records(records, scenario.fmt, columns=COLUMNS)
    print(' '.join("{}={}".format(k, counts[k]) for k in OUTCOMES), file=sys.stderr)
    if counts['disagree']:
        sys.exit(1)


if __name__ == "__main__":
    main()
