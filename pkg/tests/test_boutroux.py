import numpy as np
import pytest
from numpy.testing import assert_allclose

from pvasym import boutroux
from pvasym.boutroux import (boutroux_jacobian, boutroux_residual,
                             small_angle_modulus, seed, solve_A,
                             sqrt_trajectory, trajectory)
from pvasym.ellipkit import elliptic_data, periods_omega
from pvasym.errors import DegenerateModulus, NoConvergence


class TestEndpoints(object):

    def test_zero(self):
        assert solve_A(0.0).A == 0

    @pytest.mark.parametrize('phi', [np.pi / 2, -np.pi / 2])
    def test_right_angle(self, phi):
        assert solve_A(phi).A == 1

    def test_near_zero_is_exact(self):
        assert solve_A(1e-14).A == 0


class TestSolve(object):

    @pytest.mark.parametrize('phi', [0.05, np.pi / 5, np.pi / 4, 1.2, 1.55])
    def test_residual(self, phi):
        point = solve_A(phi)
        assert max(abs(r) for r in boutroux_residual(point.A, phi)) < 1e-11
        assert 0 < point.A.real < 1

    def test_both_ends_agree(self):
        low = solve_A(np.pi / 4, side='low').A
        high = solve_A(np.pi / 4, side='high').A
        assert_allclose(low, high, atol=1e-9)

    @pytest.mark.parametrize('phi', [0.3, 1.0])
    def test_mirror(self, phi):
        assert_allclose(solve_A(-phi).A, solve_A(phi).A.conjugate(),
                        atol=1e-13)

    @pytest.mark.parametrize('phi', [0.3, -1.0])
    def test_period_pi(self, phi):
        assert_allclose(solve_A(phi + np.pi).A, solve_A(phi).A, atol=1e-12)

    def test_no_convergence(self):
        with pytest.raises(NoConvergence) as info:
            solve_A(np.pi / 4, max_iters=0)
        assert info.value.exit_code == 2

    def test_bad_side(self):
        with pytest.raises(ValueError):
            solve_A(0.5, side='middle')


class TestSmallAngle(object):

    def test_approach_to_leading_law(self):
        devs = []
        for phi in (1e-2, 1e-3, 1e-4):
            A = solve_A(phi).A
            devs.append(abs(A / seed(phi) - 1))
        assert devs[0] > devs[1] > devs[2]

    @pytest.mark.parametrize('phi', [1e-3, 1e-4])
    def test_log_corrected_law(self, phi):
        A = solve_A(phi).A
        assert abs(A / small_angle_modulus(phi) - 1) < 2e-2

    def test_log_corrected_law_is_a_near_root(self):
        phi = 1e-4
        A = small_angle_modulus(phi)
        res = boutroux_residual(A, phi)
        scale = abs(A)
        assert max(abs(r) for r in res) < 0.1 * scale


class TestJacobian(object):

    @pytest.mark.parametrize('phi', [0.3, 1.1])
    def test_against_differences(self, phi):
        A = solve_A(phi).A
        h = 1e-6
        J = boutroux_jacobian(A, phi)
        for col, dA in enumerate((h, 1j * h)):
            plus = np.array(boutroux_residual(A + dA, phi))
            minus = np.array(boutroux_residual(A - dA, phi))
            assert_allclose(J[:, col], (plus - minus) / (2 * h), rtol=1e-5,
                            atol=1e-7)

    @pytest.mark.parametrize('phi', [0.2, 0.7, 1.3])
    def test_determinant(self, phi):
        A = solve_A(phi).A
        ell = elliptic_data(A)
        w_a, _ = periods_omega(A)
        det = np.linalg.det(boutroux_jacobian(A, phi))
        assert_allclose(det, abs(w_a)**2 * ell.tau0.imag / 4, rtol=1e-10)
        det_n = np.linalg.det(boutroux_jacobian(A, phi, normalized=True))
        assert_allclose(det_n, det * (1 + np.tan(phi)**2), rtol=1e-10)

    def test_singular_at_zero(self):
        with pytest.raises(DegenerateModulus):
            boutroux_jacobian(0, 0.1)


class TestTrajectory(object):

    @pytest.fixture(scope='class')
    def traj(self):
        return trajectory(40)

    def test_shape(self, traj):
        phis = [p.phi for p in traj.points]
        assert len(phis) == 79
        assert phis == sorted(phis)
        assert_allclose([phis[0], phis[-1]], [-np.pi / 2, np.pi / 2])

    def test_endpoints(self, traj):
        by_phi = {round(p.phi, 12): p.A for p in traj.points}
        assert by_phi[0.0] == 0
        assert by_phi[round(np.pi / 2, 12)] == 1
        assert by_phi[round(-np.pi / 2, 12)] == 1

    def test_residuals_and_range(self, traj):
        for p in traj.points:
            assert p.residual_norm < 1e-11
            assert 0 <= p.A.real <= 1

    def test_mirror(self, traj):
        by_phi = {round(p.phi, 12): p.A for p in traj.points}
        for p in traj.points:
            assert abs(by_phi[round(-p.phi, 12)] - p.A.conjugate()) < 1e-12

    def test_monotone_real_part(self, traj):
        upper = [p.A.real for p in traj.points if p.phi >= 0]
        assert np.all(np.diff(upper) > 0)

    def test_no_violations(self, traj):
        assert traj.violations == []

    def test_violations_are_reported(self, monkeypatch):
        real_march = boutroux._march

        def shifted(*args):
            return [p._replace(A=p.A + 1.5) for p in real_march(*args)]

        monkeypatch.setattr(boutroux, '_march', shifted)
        traj = trajectory(9)
        assert any('outside [0, 1]' in v for v in traj.violations)
        assert any('not strictly increasing' in v for v in traj.violations)

    def test_agrees_with_pointwise_solve(self, traj):
        p = traj.points[50]
        assert_allclose(solve_A(p.phi).A, p.A, atol=1e-9)

    def test_sqrt(self, traj):
        for phi, k in sqrt_trajectory(traj):
            assert k.real >= 0

    def test_too_few_points(self):
        with pytest.raises(ValueError):
            trajectory(2)

    def test_plot(self, traj, tmp_path):
        path = tmp_path / 'traj.svg'
        boutroux.plot_trajectory(traj, str(path))
        text = path.read_text()
        assert text.startswith('<?xml')
        assert '<svg' in text
