import json

import numpy as np
import pytest

from conftest import THETA, triangular_data
from pvasym.cli import main
from pvasym.monodromy import to_json

CHART_FLAGS = [
    '--theta0', '0.3', '--theta1', '0.1', '--thetainf', '0.2', '--q0=0.2,0.1',
    '--q1=-0.3,0.2', '--r=1.1,-0.4'
]


def _run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def _write(tmp_path, name, obj):
    path = tmp_path / name
    path.write_text(json.dumps(obj))
    return str(path)


class TestSolve(object):

    def test_zero(self, capsys):
        code, out, _ = _run(capsys, 'solve', '--phi', '0')
        assert code == 0
        report = json.loads(out)
        assert report['A'] == {'re': 0.0, 'im': 0.0}
        assert report['omega_a'] is None
        assert report['E_b'] == {'re': -0.0, 'im': -2.0}

    def test_inner(self, capsys):
        code, out, _ = _run(capsys, 'solve', '--phi', '0.7853981633974483')
        assert code == 0
        report = json.loads(out)
        assert 0 < report['A']['re'] < 1
        assert report['residual'] < 1e-11
        assert report['tau0']['im'] > 0

    def test_no_convergence(self, capsys, tmp_path):
        path = _write(tmp_path, 'cfg.json', {'boutroux': {'max_iters': 0}})
        code, _, err = _run(capsys, '--config', path, 'solve', '--phi', '0.7')
        assert code == 2
        assert err.startswith('NoConvergence')


class TestTrajectory(object):

    def test_csv(self, capsys, tmp_path):
        path = tmp_path / 'traj.csv'
        code, _, _ = _run(capsys, 'trajectory', '--points', '5', '--out',
                          str(path))
        assert code == 0
        lines = [l for l in path.read_text().splitlines() if l[0] != '#']
        assert lines[0] == 'phi,re_A,im_A,re_k,im_k,residual,newton_iters'
        assert len(lines) == 1 + 9

    def test_too_few_points(self, capsys):
        code, _, _ = _run(capsys, 'trajectory', '--points', '2')
        assert code == 1


class TestParams(object):

    def test_chart(self, capsys):
        code, out, _ = _run(capsys, 'params', *CHART_FLAGS, '--phi', '0.6283')
        assert code == 0
        report = json.loads(out)
        assert report['sector'] == {'p': 0, 'breve': False}
        assert report['generic'] is True
        assert 'beta0' in report and 'x0' in report

    def test_breve_sector(self, capsys):
        code, out, _ = _run(capsys, 'params', *CHART_FLAGS, '--phi', '2.5')
        assert code == 0
        assert json.loads(out)['sector']['breve'] is True

    def test_missing_chart(self, capsys):
        code, _, err = _run(capsys, 'params', '--phi', '0.6283')
        assert code == 1
        assert 'InputError' in err

    def test_critical_ray(self, capsys):
        code, _, err = _run(capsys, 'params', *CHART_FLAGS, '--phi', '0')
        assert code == 1
        assert err.startswith('OnCriticalRay')

    def test_non_generic(self, capsys, tmp_path):
        path = _write(tmp_path, 'm.json', to_json(triangular_data(THETA)))
        code, _, err = _run(capsys, 'params', '--monodromy', path, '--phi',
                            '0.6283')
        assert code == 3
        assert err.startswith('NonGenericMonodromy')

    def test_off_manifold(self, capsys, tmp_path):
        obj = to_json(triangular_data(THETA))
        obj['M0'][0][1] = [2.0, 0.0]
        obj['M0'][1][0] = [1.0, 0.0]
        path = _write(tmp_path, 'm.json', obj)
        code, _, err = _run(capsys, 'params', '--monodromy', path, '--phi',
                            '0.6283')
        assert code == 1
        assert err.startswith('ManifoldViolation')

    def test_unknown_config_key(self, capsys, tmp_path):
        path = _write(tmp_path, 'cfg.json', {'boutroux': {'tolerance': 1}})
        code, _, err = _run(capsys, '--config', path, 'solve', '--phi', '0.3')
        assert code == 1
        assert err.startswith('ConfigError')


class TestEval(object):

    def test_leading(self, capsys, tmp_path):
        path = tmp_path / 'eval.csv'
        code, _, _ = _run(capsys, 'eval', *CHART_FLAGS, '--phi', '0.6283',
                          '--t0', '30', '--t1', '40', '--points', '11',
                          '--out', str(path))
        assert code == 0
        lines = [l for l in path.read_text().splitlines() if l[0] != '#']
        columns = lines[0].split(',')
        assert columns[-2:] == ['class', 'residual']
        assert 1 < len(lines) <= 12
        for line in lines[1:]:
            assert line.split(',')[9] != 'near_P0'

    @pytest.mark.slow
    def test_correction_lowers_residual(self, capsys, tmp_path):
        medians = {}
        for mode in ('off', 'on'):
            path = tmp_path / (mode + '.csv')
            code, _, _ = _run(capsys, 'eval', *CHART_FLAGS, '--phi',
                              '0.6283', '--t0', '40', '--t1', '50',
                              '--points', '21', '--correction', mode,
                              '--out', str(path))
            assert code == 0
            lines = [l for l in path.read_text().splitlines() if l[0] != '#']
            rows = [l.split(',') for l in lines[1:]]
            res = [float(r[10]) for r in rows if r[9] == 'clear']
            medians[mode] = np.nanmedian(res)
        assert medians['on'] < 0.5 * medians['off']

    def test_bad_range(self, capsys):
        code, _, _ = _run(capsys, 'eval', *CHART_FLAGS, '--phi', '0.6283',
                          '--t0', '40', '--t1', '30')
        assert code == 1


@pytest.mark.slow
class TestCompare(object):

    def test_unconverged_correction_reports(self, capsys, tmp_path):
        path = _write(tmp_path, 'cfg.json',
                      {'error_term': {
                          'tol_tail': 1e-12
                      }})
        code, out, _ = _run(capsys, '--config', path, 'compare', *CHART_FLAGS,
                            '--phi', '0.6283', '--r0', '40', '--r1', '44',
                            '--points', '5')
        assert code == 0
        report = json.loads(out)
        assert report['seeded_with_correction'] is False
        for key in ('sup_b', 'slope', 'slope_b', 'slope_leading'):
            assert key in report
        for s in report['samples']:
            assert s['corrected'] is False
            assert 'deviation_b' in s and 'deviation_leading' in s


class TestCheck(object):

    def test_list(self, capsys):
        code, out, _ = _run(capsys, 'check', '--list')
        assert code == 0
        assert out.split()[0] == 'legendre_relation'
        assert 'manifold_closure' in out.split()

    def test_pass(self, capsys):
        code, out, _ = _run(capsys, 'check', '--only', 'legendre_relation',
                            'theta_periodicity')
        assert code == 0
        assert 'legendre_relation' in out and 'PASS' in out

    def test_fail(self, capsys, tmp_path):
        path = _write(tmp_path, 'cfg.json',
                      {'checks': {
                          'cycle_derivatives': 1e-30
                      }})
        code, out, _ = _run(capsys, '--config', path, 'check', '--only',
                            'cycle_derivatives')
        assert code == 2
        assert 'FAIL' in out

    def test_unknown(self, capsys):
        code, _, _ = _run(capsys, 'check', '--only', 'nothing')
        assert code == 1


@pytest.mark.slow
class TestStokes(object):

    def test_limit_graph(self, capsys, tmp_path):
        svg = tmp_path / 'graph.svg'
        code, out, _ = _run(capsys, 'stokes', '--phi', '0.6283', '--out',
                            str(svg))
        assert code == 0
        record = json.loads(out)
        assert record['edges'] == record['expected_edges']
        assert '<svg' in svg.read_text()
