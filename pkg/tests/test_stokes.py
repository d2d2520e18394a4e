import json

import numpy as np
import pytest
from numpy.testing import assert_allclose

from conftest import THETA
from pvasym.boutroux import solve_A
from pvasym.ellipkit import branch_sqrt, elliptic_data
from pvasym.errors import CoalescingTurningPoints, SingularDenominator
from pvasym.output import dump_json
from pvasym.stokes import (StokesCurve, expected_edges, graph_record,
                           level_defect, limit_graph, mu, mu_squared,
                           plot_graph, start_directions, stokes_graph,
                           turning_points)

PHI = np.pi / 5


@pytest.fixture(scope='module')
def A():
    return solve_A(PHI).A


class TestRoot(object):

    def test_limit_form(self, A):
        for lam in (0.3 + 0.2j, -1.1 + 0.4j, 2.0j):
            expected = ((np.exp(2j * PHI) * A - lam * lam) /
                        (16 * (np.exp(2j * PHI) - lam * lam)))
            assert_allclose(mu_squared(lam, np.inf, PHI, A, THETA), expected,
                            rtol=1e-14)
            assert_allclose(mu(lam, np.inf, PHI, A, THETA.theta_inf)**2,
                            expected,
                            rtol=1e-13)

    def test_sheet_at_origin(self, A):
        assert_allclose(mu(0.0, np.inf, PHI, A, THETA.theta_inf),
                        branch_sqrt(A) / 4)
        assert_allclose(mu(0.0, 50.0, PHI, A, THETA.theta_inf, sheet=-1),
                        -branch_sqrt(A) / 4)

    def test_truncation(self, A):
        t = 1e4
        lam = 0.4 - 0.3j
        assert abs(
            mu(lam, t, PHI, A, THETA.theta_inf)**2 -
            mu_squared(lam, t, PHI, A, THETA)) < 1e-6

    def test_singular(self, A):
        with pytest.raises(SingularDenominator):
            mu_squared(np.exp(1j * PHI), 50.0, PHI, A, THETA)
        with pytest.raises(SingularDenominator):
            mu(-np.exp(1j * PHI), np.inf, PHI, A, THETA.theta_inf)


class TestTurningPoints(object):

    def test_limits(self, A):
        tp = turning_points(np.inf, PHI, A, THETA)
        e = np.exp(1j * PHI)
        assert_allclose([tp.lambda1, tp.lambda2, tp.lambda1_0, tp.lambda2_0],
                        [e * branch_sqrt(A), -e * branch_sqrt(A), e, -e])

    @pytest.mark.parametrize('t', [50.0, 200.0])
    def test_zeros(self, A, t):
        tp = turning_points(t, PHI, A, THETA)
        for lam in (tp.lambda1, tp.lambda2, tp.lambda1_0, tp.lambda2_0):
            D = np.exp(2j * PHI) - lam * lam
            value = mu_squared(lam, t, PHI, A, THETA) * 4 * D * D
            assert abs(value) < 1e-12

    def test_labels_follow_limits(self, A):
        t = 200.0
        tp = turning_points(t, PHI, A, THETA)
        e = np.exp(1j * PHI)
        shift = 2 * THETA.theta_inf / t
        assert abs(tp.lambda1 - (e * branch_sqrt(A) + shift)) < 1e-3
        assert abs(tp.lambda2 - (-e * branch_sqrt(A) + shift)) < 1e-3
        assert abs(tp.lambda1_0 - e) < 1e-3
        assert abs(tp.lambda2_0 + e) < 1e-3

    @pytest.mark.parametrize('t', [100.0, 400.0])
    def test_second_order_error(self, A, t):
        e = np.exp(1j * PHI)

        def error(s):
            tp = turning_points(s, PHI, A, THETA)
            return abs(tp.lambda1 - e * branch_sqrt(A) -
                       2 * THETA.theta_inf / s)

        assert 3 <= error(t) / error(2 * t) <= 5

    def test_mirror(self, A):
        tp = turning_points(np.inf, PHI, A, THETA)
        other = turning_points(np.inf, -PHI, np.conj(A), THETA)
        assert_allclose(other.lambda1, np.conj(tp.lambda1), atol=1e-14)
        assert_allclose(other.lambda2, np.conj(tp.lambda2), atol=1e-14)

    def test_coalescing(self):
        with pytest.raises(CoalescingTurningPoints):
            turning_points(np.inf, PHI, 0, THETA)
        with pytest.raises(CoalescingTurningPoints):
            turning_points(np.inf, PHI, 1.0, THETA)


class TestStartDirections(object):

    def test_spacing(self, A):
        tp = turning_points(np.inf, PHI, A, THETA)
        angles = start_directions(tp, 'lambda1')
        assert_allclose(np.diff(angles), 2 * np.pi / 3)

    @pytest.mark.parametrize('which', ['lambda1', 'lambda2'])
    def test_level_near_turning_point(self, A, which):
        tp = turning_points(np.inf, PHI, A, THETA)
        lam0 = getattr(tp, which)
        eps = 1e-3

        def defect(angle):
            pts = np.array([lam0, lam0 + eps * np.exp(1j * angle)])
            return level_defect(StokesCurve(which, None, 0, pts, eps), tp)

        for angle in start_directions(tp, which):
            assert defect(angle) < 1e-2 * defect(angle + np.pi / 3)


@pytest.mark.slow
class TestGraphs(object):

    @pytest.fixture(scope='class')
    def graph(self):
        return limit_graph(PHI, elliptic_data(solve_A(PHI).A))

    @pytest.mark.parametrize(
        'phi',
        [PHI, -PHI, np.pi - PHI, np.pi + PHI, np.pi / 3, -np.pi / 3])
    def test_limit_adjacency(self, phi):
        graph = limit_graph(phi, elliptic_data(solve_A(phi).A))
        assert graph.adjacency == expected_edges(phi)
        assert ('lambda1', 'lambda2') in graph.adjacency

    def test_curves_on_level_set(self, graph):
        for c in graph.curves:
            assert level_defect(c, graph.turning_points) < 1e-6

    def test_record(self, graph):
        rec = graph_record(graph)
        assert rec['t'] == 'inf'
        assert len(rec['curves']) == 6
        assert sorted(rec['turning_points']) == sorted(
            ['lambda1', 'lambda2', 'lambda1_0', 'lambda2_0'])
        decoded = json.loads(dump_json(rec))
        assert decoded['edges'] == [list(e) for e in expected_edges(PHI)]

    def test_plot(self, graph, tmp_path):
        path = tmp_path / 'graph.svg'
        plot_graph(graph, str(path))
        assert '<svg' in path.read_text()

    def test_finite_t(self):
        graph = stokes_graph(200.0, PHI, solve_A(PHI).A, THETA)
        assert len(graph.curves) == 6
        ends = {'lambda1', 'lambda2', 'lambda1_0', 'lambda2_0', 'e', '-e',
                'i_inf', '-i_inf'}
        assert all(c.end in ends for c in graph.curves)
