"""
test_cli.py

Unit tests for scenario files, record writers and the console scripts.

Tests are arranged into classes based on the aspect of the module being tested
"""

import io
import json
from unittest.mock import patch

import pytest

from metsheafpy import sheaf_delta, sheaf_force, sheaf_gmt, sheaf_propagator
from metsheafpy.report import *
from metsheafpy.scenario import *
from metsheafpy.topology import Cone, Interval
from metsheafpy.utilis import common_parser, overrides, parse_complex, parse_floats, print_err
from metsheafpy.wavepacket import PhysicalConstants

##############################################################################

"""
Trial scenarios to be used in subsequent testing
"""

TORUS = """\
[scenario]
sheaf = torus
format = csv

[resolution]
grid = 7
family_size = 32
max_refinement = 3

[sections]
s = curve; offset = 0.4
m = curve; offset = 0.4

[conditions]
p1 = d(s, m) < 0.01 @ point 0.5 => forced
p2 = d(s, m) < 0.01 @ point 1.5 => forced
p3 = d(s, m) < 0.01 @ point 2.5 => forced
p4 = d(s, m) < 0.01 @ point 3.5 => forced
p5 = d(s, m) < 0.01 @ point 4.5 => forced
"""

LATTICE = """\
[scenario]
sheaf = lattice

[sheaf]
diagonal = 1, 2, 3, 4, 5

[resolution]
grid = 3
family_size = 8
max_refinement = 1

[sections]
x0 = eigen; index = 0
x1 = eigen; index = 1
x2 = eigen; index = 2
x3 = eigen; index = 3
x4 = eigen; index = 4

[conditions]
orthogonal = max(max(max(P(x0, x1), P(x0, x2)), max(P(x0, x3), P(x0, x4))), max(max(max(P(x1, x2), P(x1, x3)), max(P(x1, x4), P(x2, x3))), max(P(x2, x4), P(x3, x4)))) < 1e-9 @ cone 0 1 2 3 4 => forced
"""

PACKET = """\
[scenario]
sheaf = packet

[sheaf]
hbar = 1
m = 1

[resolution]
grid = 5
family_size = 9

[sections]
wide = packet; center = 0.5; t = 0.5

[conditions]
peak = amp(sigma, sigma) > 0.1 @ point 1.0 => forced
"""

GMT = """\
[scenario]
sheaf = torus
seed = 3

[resolution]
grid = 7
family_size = 32
max_refinement = 3

[sections]
s = curve; offset = 0.4
m = curve; offset = 1.3

[chain]
kind = arcs
center = 1.25
depth = 4

[conditions]
trivial = min(0, 1) < 0.5

[gmt]
count = 10
depth = 3
"""

PROPAGATOR = """\
[scenario]
format = json

[propagator]
x1 = 0, 1, 2
x0 = 0, 1, 2
t = 0.5, 1, 2
tau = 1e-2, 1e-3
"""


def with_conditions(base, *lines):
    head = base.split('[conditions]')[0]
    return head + '[conditions]\n' + '\n'.join(lines) + '\n'


def write_scenario(tmp_path, text):
    path = tmp_path / 'scenario.ini'
    path.write_text(text)
    return str(path)

##############################################################################


class TestScenario:
    """
    Loading scenarios and reporting their errors with line numbers.
    """

    def test_torus_catalog(self):
        sc = load_scenario(TORUS)
        assert sc.kind == 'torus'
        assert sorted(sc.sheaf.catalog) == ['m', 's']
        assert sc.res.grid == 7
        assert [item.expect for item in sc.conditions] == ['forced'] * 5
        assert sc.conditions[0].location == 'point 0.5'

    def test_condition_lines(self):
        sc = load_scenario(TORUS)
        assert sc.conditions[0].line == 15
        assert sc.line_of('sections', 's') == 11

    def test_overrides(self):
        sc = load_scenario(TORUS, {'format': 'json', 'tol': 0.05, 'seed': 9})
        assert sc.fmt == 'json'
        assert sc.res.tol == 0.05
        assert sc.seed == 9 and sc.res.seed == 9

    def test_unknown_sheaf(self):
        with pytest.raises(ScenarioError) as info:
            load_scenario("[scenario]\nsheaf = sphere\n")
        assert info.value.line == 2
        assert str(info.value).startswith('line 2:')

    def test_duplicate_key(self):
        with pytest.raises(ScenarioError) as info:
            load_scenario("[scenario]\nsheaf = torus\nsheaf = lattice\n")
        assert info.value.line == 3

    def test_unknown_resolution_key(self):
        with pytest.raises(ScenarioError) as info:
            load_scenario("[scenario]\nsheaf = torus\n[resolution]\ngrain = 3\n")
        assert info.value.line == 4

    def test_unknown_format(self):
        with pytest.raises(ScenarioError):
            load_scenario("[scenario]\nformat = xml\n")

    def test_bad_expectation(self):
        with pytest.raises(ScenarioError) as info:
            load_scenario(with_conditions(TORUS, 'c = d(s, m) < 0.1 => maybe'))
        assert info.value.line == 15

    def test_bad_section(self):
        with pytest.raises(ScenarioError) as info:
            load_scenario("[scenario]\nsheaf = torus\n[sections]\ns = circle; offset = 1\n")
        assert info.value.line == 3

    def test_locations(self):
        sc = load_scenario(LATTICE)
        assert sc.location('point 0 2') == frozenset({0, 2})
        assert sc.location('cone 1').root == frozenset({1})
        assert isinstance(sc.location('cone 1'), Cone)
        assert sc.location('chain') == 'chain'
        torus = load_scenario(TORUS)
        assert torus.location('point 1.5') == 1.5
        assert isinstance(torus.location('interval 0 1'), Interval)
        with pytest.raises(ScenarioError):
            torus.location('disc 0 1')
        with pytest.raises(ScenarioError):
            torus.location('point')

    def test_binding(self):
        sc = load_scenario(TORUS)
        cond = sc.condition(sc.conditions[0])
        assert sorted(sc.binding(cond)) == ['m', 's']
        other = sc.condition(ConditionItem('q', 'd(s, q) < 0.1', None, None, None))
        with pytest.raises(ScenarioError):
            sc.binding(other)

    def test_packet_sheaf(self):
        sc = load_scenario(PACKET)
        assert sorted(sc.sheaf.catalog) == ['sigma', 'wide']
        assert sc.sheaf.section('wide')(1.0).position.center == 0.5

    def test_float_list(self):
        sc = load_scenario(PROPAGATOR)
        assert float_list(sc, 'propagator', 'tau', '1') == [1e-2, 1e-3]
        assert float_list(sc, 'propagator', 'missing', '4, 5') == [4.0, 5.0]
        bad = load_scenario("[propagator]\nt = 1, x\n")
        with pytest.raises(ScenarioError) as info:
            float_list(bad, 'propagator', 't', '1')
        assert info.value.line == 2

    def test_missing_file(self, tmp_path):
        with pytest.raises(ScenarioError):
            read_scenario(str(tmp_path / 'absent.ini'))


class TestReport:
    """
    CSV, JSON lines and table writers.
    """

    records = [{'name': 'a', 'value': 0.5}, {'name': 'b', 'value': float('inf'), 'extra': 1j}]

    def test_csv(self):
        out = io.StringIO()
        write_records(self.records, 'csv', out, columns=['name', 'value'])
        assert out.getvalue().splitlines() == ['name,value', 'a,0.5', 'b,inf']

    def test_json(self):
        out = io.StringIO()
        write_records(self.records, 'json', out)
        rows = [json.loads(line) for line in out.getvalue().splitlines()]
        assert rows[0] == {'name': 'a', 'value': 0.5, 'extra': None}
        assert rows[1]['value'] == 'inf'
        assert rows[1]['extra'] == [0.0, 1.0]

    def test_table(self):
        out = io.StringIO()
        write_records(self.records, 'table', out, columns=['name', 'value'])
        lines = out.getvalue().splitlines()
        assert lines[0].split() == ['name', 'value']
        assert set(lines[1]) <= {'-', ' '}
        assert lines[2].split() == ['a', '0.5']

    def test_columns_in_first_seen_order(self):
        assert columns_of(self.records) == ['name', 'value', 'extra']

    def test_unknown_format(self):
        with pytest.raises(ValueError):
            write_records(self.records, 'xml', io.StringIO())


class TestForce:
    """
    The forcing runner and its console script.
    """

    def test_torus_points(self):
        records, failed = sheaf_force.run_force(load_scenario(TORUS))
        assert not failed
        assert [r['status'] for r in records] == ['forced'] * 5
        assert all(r['sections'] == 'm|s' for r in records)

    def test_lattice_orthogonality(self):
        records, failed = sheaf_force.run_force(load_scenario(LATTICE))
        assert not failed
        assert records[0]['status'] == 'forced'
        assert records[0]['sections'].split('|') == ['x0', 'x1', 'x2', 'x3', 'x4']

    def test_packet_amplitude(self):
        records, failed = sheaf_force.run_force(load_scenario(PACKET))
        assert records[0]['status'] == 'forced'
        assert not failed

    def test_malformed_condition(self):
        sc = load_scenario(with_conditions(TORUS, 'broken = d(s, m < 0.5 @ point 1'))
        records, failed = sheaf_force.run_force(sc)
        assert records[0]['status'] == 'error'
        assert records[0]['certificate'].startswith('position')
        assert not failed

    def test_constant_out_of_range(self):
        sc = load_scenario(with_conditions(TORUS, 'big = 2 < 0.5 @ point 1'))
        records, failed = sheaf_force.run_force(sc)
        assert records[0]['status'] == 'error'
        assert records[0]['certificate'].startswith('position 0')
        assert not failed

    def test_unknown_section(self):
        sc = load_scenario(with_conditions(TORUS, 'ghost = d(s, q) < 0.5 @ point 1'))
        records, _ = sheaf_force.run_force(sc)
        assert records[0]['status'] == 'error'
        assert 'q' in records[0]['certificate']

    def test_contradicted_expectation(self):
        sc = load_scenario(with_conditions(TORUS, 'wrong = d(s, m) < 0.01 @ point 1 => refuted'))
        records, failed = sheaf_force.run_force(sc)
        assert records[0]['status'] == 'forced'
        assert failed

    def test_chain_location(self):
        sc = load_scenario(with_conditions(GMT, 'near = d(s, s) < 0.1 @ chain'))
        records, _ = sheaf_force.run_force(sc)
        assert records[0]['status'] == 'forced'
        assert records[0]['location'] == 'chain 1'

    def test_main(self, tmp_path, capsys):
        path = write_scenario(tmp_path, TORUS)
        with patch('sys.argv', ['sheaf_force', path, '--format', 'csv']):
            sheaf_force.main()
        lines = capsys.readouterr().out.splitlines()
        assert lines[0].startswith('name,condition')
        assert len(lines) == 6

    def test_main_exit_status(self, tmp_path):
        path = write_scenario(tmp_path, with_conditions(TORUS, 'wrong = d(s, m) < 0.01 @ point 1 => refuted'))
        with patch('sys.argv', ['sheaf_force', path]):
            with pytest.raises(SystemExit) as info:
                sheaf_force.main()
        assert info.value.code == 1

    def test_main_bad_file(self, tmp_path):
        with patch('sys.argv', ['sheaf_force', str(tmp_path / 'absent.ini')]):
            with pytest.raises(SystemExit):
                sheaf_force.main()


class TestPropagatorScript:
    """
    The propagator sweep.
    """

    def test_grid(self):
        records = sheaf_propagator.run_propagator([0.0, 1.0, 2.0], [0.0, 1.0, 2.0], [0.5, 1.0, 2.0],
                                                  [1e-2, 1e-3], PhysicalConstants())
        assert len(records) == 54
        for coarse, fine in zip(records[:27], records[27:]):
            assert 90.0 <= coarse['rel_err'] / fine['rel_err'] <= 110.0

    def test_flags(self):
        constants = PhysicalConstants()
        assert sheaf_propagator.propagator_record(0.0, 0.0, 0.0, 0.1, constants)['flag'] == 'delta'
        row = sheaf_propagator.propagator_record(0.0, 0.0, 0.0, 0.0, constants)
        assert row['flag'] == 'undefined'
        assert 're_K' not in row

    def test_main(self, tmp_path, capsys):
        path = write_scenario(tmp_path, PROPAGATOR)
        with patch('sys.argv', ['sheaf_propagator', path]):
            sheaf_propagator.main()
        rows = [json.loads(line) for line in capsys.readouterr().out.splitlines()]
        assert len(rows) == 54
        assert set(rows[0]) == set(sheaf_propagator.COLUMNS)


class TestGmtScript:
    """
    The generic-model cross-check runner.
    """

    def test_trivial_condition(self):
        sc = load_scenario(GMT.replace('count = 10', 'count = 0'))
        records, counts = sheaf_gmt.run_gmt(sc)
        assert counts == {'agree': 1, 'disagree': 0, 'inconclusive': 0}
        assert records[0]['name'] == 'trivial'

    def test_random_conditions(self):
        records, counts = sheaf_gmt.run_gmt(load_scenario(GMT))
        assert len(records) == 11
        assert counts['disagree'] == 0

    def test_unknown_model_section(self):
        sc = load_scenario(GMT + "sections = s ghost\n")
        with pytest.raises(ScenarioError):
            sheaf_gmt.run_gmt(sc)

    def test_malformed_condition(self):
        sc = load_scenario(with_conditions(GMT, 'broken = max(s < 0.5'))
        with pytest.raises(ScenarioError):
            sheaf_gmt.run_gmt(sc)


class TestDeltaScript:
    """
    The delta-sequence runner.
    """

    def test_ratio(self):
        rows = sheaf_delta.run_delta([0.1, 0.05], sheaf_delta.TEST_FUNCTIONS['gauss_cos'], PhysicalConstants())
        assert rows[0]['ratio'] is None
        assert 3.5 < rows[1]['ratio'] < 4.5
        assert rows[1]['g0'] == 1.0

    def test_unknown_function(self, tmp_path):
        path = write_scenario(tmp_path, "[delta]\nfunction = airy\n")
        with patch('sys.argv', ['sheaf_delta', path]):
            with pytest.raises(SystemExit):
                sheaf_delta.main()


class TestUtilis:
    """
    Shared parsing helpers and the common command line.
    """

    def test_parse_complex(self):
        assert parse_complex('0 1') == 1j
        assert parse_complex('2.5') == 2.5
        with pytest.raises(ValueError):
            parse_complex('1 2 3')

    def test_parse_floats(self):
        assert parse_floats('1, 2.5,') == [1.0, 2.5]

    def test_common_parser(self):
        args = common_parser('demo').parse_args(['run.ini', '--tol', '0.01', '-vv'])
        assert args.config == 'run.ini'
        assert args.verbose == 2
        assert overrides(args) == {'format': None, 'seed': None, 'tol': 0.01, 'depth': None}

    def test_print_err(self, capsys):
        print_err('warning only', is_stop=False)
        assert capsys.readouterr().out == 'warning only\n'
        with pytest.raises(SystemExit):
            print_err('fatal')
