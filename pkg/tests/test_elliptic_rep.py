import cmath

import numpy as np
import pytest
from numpy.testing import assert_allclose

from pvasym.elliptic_rep import (b0, b0_prime, b0_second, default_delta0,
                                 excluded_points, in_strip, lattice_membership,
                                 make_strip, nearest_P0, nearest_Q, psi0,
                                 psi0_prime, psi0_second, psi0_state,
                                 sample_ray, second_relation_residual,
                                 strip_representative, y_from_psi, y_leading,
                                 y_leading_prime)
from pvasym.errors import InputError, PoleProximity, SingularY, UnitValue


def _clear_point(p, t=35.0):
    """
    A point on the ray away from both lattices
    """
    rot = cmath.exp(1j * p.phi)
    for s in np.linspace(0, 3, 31):
        x = rot * (t + s)
        if lattice_membership(x, p, 0.5).classification == 'clear':
            return x
    raise AssertionError("no clear point found")


class TestLeadingTerm(object):

    def test_at_phase_shift(self, params_pi5):
        p = params_pi5
        assert abs(psi0(p.x0, p)) < 1e-14
        assert_allclose(y_leading(p.x0, p), -1, atol=1e-14)

    @pytest.mark.parametrize('which', ['params_pi5', 'params_minus_pi3'])
    def test_first_order_equation(self, which, request):
        p = request.getfixturevalue(which)
        A = p.ell.A
        x = _clear_point(p)
        psi, dpsi = psi0_state(x, p)
        assert_allclose(4 * dpsi**2, (A - psi**2) * (1 - psi**2), rtol=1e-10)
        assert_allclose(psi0_prime(x, p), dpsi, rtol=1e-14)

    def test_derivatives(self, params_pi5):
        p = params_pi5
        x = _clear_point(p)
        h = 1e-5
        assert_allclose(psi0_prime(x, p),
                        (psi0(x + h, p) - psi0(x - h, p)) / (2 * h),
                        rtol=1e-7)
        assert_allclose(psi0_second(x, p),
                        (psi0_prime(x + h, p) - psi0_prime(x - h, p)) /
                        (2 * h),
                        rtol=1e-7)

    def test_y_prime(self, params_pi5):
        p = params_pi5
        x = _clear_point(p)
        h = 1e-5
        y, yp = y_leading_prime(x, p)
        assert_allclose(y, y_leading(x, p))
        assert_allclose(yp, (y_leading(x + h, p) - y_leading(x - h, p)) /
                        (2 * h),
                        rtol=1e-7)

    def test_pole(self, params_pi5):
        p = params_pi5
        with pytest.raises(PoleProximity):
            psi0(p.x0 + p.ell.omega_b, p)

    def test_unit_value(self):
        assert y_from_psi(0) == -1
        with pytest.raises(UnitValue):
            y_from_psi(1 + 1e-12)

    @pytest.mark.parametrize('which', ['params_pi5', 'params_minus_pi3'])
    def test_second_relation_vanishes(self, which, request):
        p = request.getfixturevalue(which)
        x = _clear_point(p)
        y, yp = y_leading_prime(x, p)
        assert abs(second_relation_residual(x, p, y, yp)) < 1e-10

    def test_second_relation_singular(self, params_pi5):
        with pytest.raises(SingularY):
            second_relation_residual(40.0, params_pi5, 0.0, 1.0)
        with pytest.raises(SingularY):
            second_relation_residual(40.0, params_pi5, 1.0, 1.0)


class TestB0(object):

    @pytest.mark.parametrize('which', ['params_pi5', 'params_minus_pi3'])
    def test_derivative_against_psi0(self, which, request):
        p = request.getfixturevalue(which)
        x = _clear_point(p)
        psi, dpsi = psi0_state(x, p)
        assert_allclose(b0_prime(x, p), 2 * (psi**2 - p.ell.A) + 4 * dpsi,
                        rtol=1e-9)

    def test_derivatives(self, params_pi5):
        p = params_pi5
        x = _clear_point(p)
        h = 1e-5
        assert_allclose(b0_prime(x, p), (b0(x + h, p) - b0(x - h, p)) /
                        (2 * h),
                        rtol=1e-7)
        assert_allclose(b0_second(x, p),
                        (b0_prime(x + h, p) - b0_prime(x - h, p)) / (2 * h),
                        rtol=1e-6)

    def test_period_in_omega_a(self, params_pi5):
        # b0(x + 2 Omega_a) - b0(x) = -4 E_a
        p = params_pi5
        x = _clear_point(p)
        ell = p.ell
        assert_allclose(b0(x + 2 * ell.omega_a, p) - b0(x, p), -4 * ell.E_a,
                        rtol=1e-10)


class TestLattices(object):

    def test_nearest_P0(self, params_pi5):
        p = params_pi5
        ell = p.ell
        target = p.x0 + ell.omega_b + 3 * ell.omega_a - 2 * ell.omega_b
        point, d = nearest_P0(target + 1e-3, p)
        assert_allclose(point, target, atol=1e-10)
        assert_allclose(d, 1e-3, rtol=1e-6)

    def test_nearest_Q(self, params_pi5):
        p = params_pi5
        ell = p.ell
        target = p.x0 + ell.omega_a / 2 - ell.omega_a + 5 * ell.omega_b
        point, d = nearest_Q(target, p)
        assert_allclose(point, target, atol=1e-10)
        assert d < 1e-10
        psi = psi0(target, p)
        assert min(abs(psi * psi - 1), abs(psi * psi - p.ell.A)) < 1e-9

    def test_membership(self, params_pi5):
        p = params_pi5
        ell = p.ell
        delta0 = default_delta0(ell)
        assert lattice_membership(p.x0 + ell.omega_b + 0.1 * delta0,
                                  p).classification == 'near_P0'
        assert lattice_membership(p.x0 + ell.omega_a / 2 + 0.1 * delta0,
                                  p).classification == 'near_Q'
        assert lattice_membership(p.x0 + ell.omega_a / 4 + ell.omega_b / 4,
                                  p).classification == 'clear'

    def test_excluded_points_are_poles(self, params_pi5):
        p = params_pi5
        t_range, s_range = (30, 60), (-5, 5)
        pts = excluded_points(p, p.phi, t_range, s_range, excluded='P0')
        assert len(pts) > 0
        rot = cmath.exp(1j * p.phi)
        for t in pts:
            assert t_range[0] <= t.real <= t_range[1]
            assert s_range[0] <= t.imag <= s_range[1]
            assert nearest_P0(rot * t, p)[1] < 1e-9
        both = excluded_points(p, p.phi, t_range, s_range)
        assert len(both) > len(pts)


class TestStrip(object):

    def test_defaults(self, params_pi5):
        s = make_strip(params_pi5)
        ell = params_pi5.ell
        assert s.t_inf == 30.0
        assert_allclose(s.kappa0, max(abs(ell.omega_a), abs(ell.omega_b)))
        assert_allclose(s.delta0, 0.05 * min(abs(ell.omega_a),
                                             abs(ell.omega_b)))
        assert s.excluded == 'P0'

    def test_invalid(self, params_pi5):
        with pytest.raises(InputError):
            make_strip(params_pi5, excluded='Q')
        with pytest.raises(InputError):
            make_strip(params_pi5, kappa0=1.0, delta0=0.6)
        with pytest.raises(InputError):
            make_strip(params_pi5, delta0=0.0)

    def test_membership(self, params_pi5):
        p = params_pi5
        s = make_strip(p)
        rot = cmath.exp(1j * p.phi)
        assert not in_strip(rot * 20.0, s, p)
        assert not in_strip(rot * complex(40.0, 2 * s.kappa0), s, p)
        assert in_strip(_clear_point(p), s, p)

    def test_pole_is_excluded(self, params_pi5):
        p = params_pi5
        s = make_strip(p)
        rot = cmath.exp(1j * p.phi)
        for t in excluded_points(p, p.phi, (35, 50), (-1, 1), excluded='P0'):
            assert not in_strip(rot * t, s, p)

    def test_representative_keeps_b0(self, params_pi5):
        p = params_pi5
        s = make_strip(p)
        q = strip_representative(p, s)
        t = q.x0 / cmath.exp(1j * p.phi)
        assert t.real > s.t_inf
        x = _clear_point(p)
        assert_allclose(b0(x, q), b0(x, p), rtol=1e-10)
        assert_allclose(psi0(x, q), psi0(x, p), rtol=1e-9, atol=1e-12)


class TestSampleRay(object):

    def test_classes(self, params_pi5):
        p = params_pi5
        ts = np.linspace(20, 60, 81)
        samples = sample_ray(p, ts)
        assert len(samples) == 81
        assert {s.cls for s in samples} <= {
            'near_P0', 'near_Q', 'clear', 'outside'
        }
        assert all(s.cls == 'outside' for s in samples
                   if s.t < 30 and s.cls not in ('near_P0', 'near_Q'))

    def test_values(self, params_pi5):
        p = params_pi5
        for s in sample_ray(p, np.linspace(35, 45, 11)):
            if s.cls == 'clear':
                assert_allclose(s.y, y_leading(s.x, p))
                assert_allclose(s.b0, b0(s.x, p))
