"""Tests de la ligne de commande"""

import csv
import io
import json

import pytest
import yaml

from src.cli import EXIT_FAILED, EXIT_OK, EXIT_USAGE, main
from src.dynamics import Rule
from src.experiments import SCAN_FIELDS, rows_to_csv, scan_q


@pytest.fixture
def cli_config(tmp_path, monkeypatch):
    for var in ('LOG_LEVEL', 'PERCOLATION_CACHE_ENABLED', 'PERCOLATION_WORKERS',
                'PERCOLATION_MEMORY_BUDGET_MB'):
        monkeypatch.delenv(var, raising=False)
    path = tmp_path / 'config.yaml'
    path.write_text(yaml.safe_dump({
        'cache': {'directory': str(tmp_path / 'cache')},
        'output': {'directory': str(tmp_path / 'results')},
        'logging': {'level': 'WARNING'},
    }), encoding='utf-8')
    return str(path)


@pytest.fixture
def run(cli_config):
    def invoke(*argv):
        return main([*argv, '--config', cli_config])
    return invoke


def read_rows(path):
    with open(path, encoding='utf-8', newline='') as f:
        return list(csv.DictReader(f))


class TestUsage:
    def test_missing_command(self):
        assert main([]) == EXIT_USAGE

    def test_unknown_flag(self, run):
        assert run('simulate', '--bogus') == EXIT_USAGE

    def test_invalid_choice(self, run):
        assert run('spread', '--side', 'up') == EXIT_USAGE

    def test_invalid_probability(self, run):
        assert run('simulate', '--p', '1.5', '--L', '10') == EXIT_USAGE

    def test_memory_budget(self, run):
        assert run('simulate', '--p', '0.1', '--L', '100000') == EXIT_USAGE

    def test_invalid_workers(self, run):
        assert run('simulate', '--L', '10', '--workers', '0') == EXIT_USAGE

    def test_show_config(self, run, capsys):
        assert run('selftest', '--show-config') == EXIT_OK
        assert 'simulation' in capsys.readouterr().out


class TestSimulate:
    def test_selftest(self, run):
        assert run('selftest') == EXIT_OK

    def test_summary_json(self, run, tmp_path):
        out = tmp_path / 'summary.json'
        assert run('simulate', '--p', '0.2', '--q', '0.01', '--L', '20', '--out', str(out)) == EXIT_OK
        summary = json.loads(out.read_text(encoding='utf-8'))
        assert summary['width'] == 20
        assert summary['target'] == [10, 10]

    def test_render_is_deterministic(self, run, tmp_path):
        first, second = tmp_path / 'a.ppm', tmp_path / 'b.ppm'
        args = ('render', '--p', '0.1', '--q', '0.01', '--L', '60', '--bc', 'ring', '--seed', '7')
        assert run(*args, '--out', str(first)) == EXIT_OK
        assert run(*args, '--out', str(second)) == EXIT_OK
        data = first.read_bytes()
        assert data == second.read_bytes()
        assert data.startswith(b'P6\n60 60\n255\n')
        assert len(data) == len(b'P6\n60 60\n255\n') + 60 * 60 * 3

    def test_render_png(self, run, tmp_path):
        png = tmp_path / 'fig.png'
        assert run('render', '--L', '20', '--out', str(tmp_path / 'fig.ppm'), '--png', str(png)) == EXIT_OK
        assert png.read_bytes().startswith(b'\x89PNG')

    def test_render_bad_palette(self, run, tmp_path):
        assert run('render', '--L', '10', '--out', str(tmp_path / 'x.ppm'),
                   '--palette-closed', '0,0,0') == EXIT_USAGE


class TestExperiments:
    def test_scan_to_stdout(self, run, capsys):
        assert run('scan', '--p', '0.2', '--alphas', '0,4', '--L', '12', '--trials', '4', '--no-cache') == EXIT_OK
        expected = rows_to_csv(scan_q(0.2, [0.0, 4.0], 1.0, Rule.MODIFIED, 12, 4, 0), SCAN_FIELDS)
        assert capsys.readouterr().out == expected

    def test_scan_to_file(self, run, tmp_path):
        out = tmp_path / 'scan.csv'
        assert run('scan', '--p', '0.2', '--alphas', '0,1,4', '--L', '12', '--trials', '6',
                   '--out', str(out)) == EXIT_OK
        rows = read_rows(out)
        assert len(rows) == 3
        assert list(rows[0]) == SCAN_FIELDS
        hits = [int(row['hits']) for row in rows]
        assert hits == sorted(hits, reverse=True)

    def test_qc_rerun_identical(self, run, tmp_path):
        args = ('qc', '--p', '0.2', '--L', '16', '--trials', '20', '--tol', '0.3', '--seed', '1', '--no-cache')
        first, second = tmp_path / 'a.json', tmp_path / 'b.json'
        assert run(*args, '--out', str(first)) == EXIT_OK
        assert run(*args, '--out', str(second)) == EXIT_OK
        assert first.read_bytes() == second.read_bytes()

    def test_qc_cache(self, run, tmp_path):
        args = ('qc', '--p', '0.2', '--L', '16', '--trials', '10', '--tol', '0.3')
        first, second = tmp_path / 'a.json', tmp_path / 'b.json'
        assert run(*args, '--out', str(first)) == EXIT_OK
        assert len(list((tmp_path / 'cache').glob('*.json'))) == 1
        assert run(*args, '--clear-cache', '--out', str(second)) == EXIT_OK
        assert len(list((tmp_path / 'cache').glob('*.json'))) == 1
        assert json.loads(first.read_text()) == json.loads(second.read_text())

    def test_compare_to_stdout(self, run, capsys):
        assert run('compare', '--p-list', '0.3', '--L', '10', '--trials', '10', '--tol', '0.5',
                   '--no-cache') == EXIT_OK
        rows = list(csv.DictReader(io.StringIO(capsys.readouterr().out)))
        assert len(rows) == 1
        assert float(rows[0]['q_hat_standard']) >= float(rows[0]['q_hat_modified'])


class TestExperimentFile:
    def test_file_fills_missing_options(self, run, tmp_path):
        spec = tmp_path / 'phase.env'
        spec.write_text("p=0.2\nalphas=0,4\nL=12\ntrials=4\nseed=3\n", encoding='utf-8')
        out = tmp_path / 'scan.csv'
        assert run('scan', '--config-file', str(spec), '--p', '0.25', '--out', str(out)) == EXIT_OK
        rows = read_rows(out)
        assert [row['alpha'] for row in rows] == ['0.0', '4.0']
        assert {row['p'] for row in rows} == {'0.25'}
        assert {row['L'] for row in rows} == {'12'}
        assert {row['trials'] for row in rows} == {'4'}

    def test_invalid_value(self, run, tmp_path):
        spec = tmp_path / 'bad.env'
        spec.write_text("trials=many\n", encoding='utf-8')
        assert run('scan', '--config-file', str(spec)) == EXIT_USAGE

    def test_missing_file(self, run, tmp_path):
        assert run('scan', '--config-file', str(tmp_path / 'absent.env')) == EXIT_USAGE


class TestCertificates:
    def test_block_fixture_holds(self, run):
        assert run('block', '--fixture', '3') == EXIT_OK

    def test_sabotaged_block_fails(self, run):
        assert run('block', '--fixture', '3', '--sabotage') == EXIT_FAILED

    def test_spread_fixture(self, run):
        assert run('spread', '--fixture', '2', '--side', 'east') == EXIT_OK

    def test_broken_spread_fails(self, run):
        assert run('spread', '--fixture', '2', '--broken') == EXIT_FAILED

    def test_sampled_box_not_good_is_not_a_failure(self, run, capsys):
        # p + q = 0.9 sur 64 cellules: des sites fermés à moins de la marge du bord
        assert run('spread', '--p', '0.3', '--q', '0.6', '--n', '2') == EXIT_OK
        assert 'non vérifié' in capsys.readouterr().out

    def test_safe_single_draw(self, run, capsys):
        assert run('safe', '--p', '0.05', '--q', '0.01') == EXIT_OK
        assert 'Géométrie' in capsys.readouterr().out
