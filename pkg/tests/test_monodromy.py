import cmath
import json

import numpy as np
import pytest
from numpy.testing import assert_allclose

from conftest import CHART, THETA, triangular_data
from pvasym.boutroux import solve_A
from pvasym.ellipkit import elliptic_data, theta_logderiv
from pvasym.errors import (InputError, ManifoldViolation, NonGenericMonodromy,
                           OnCriticalRay, SingularChart, ZeroGauge)
from pvasym.monodromy import (MonodromyData, ThetaParams, asymptotic_params,
                              beta0, breve_relation, canonical_cell,
                              classify_sector, from_json, from_parameters,
                              gauge_conjugate, genericity_check,
                              manifold_defects, phase_shift, reconstruct_product,
                              sector_matrices, sector_reduce,
                              stokes_from_matrices, stokes_matrix,
                              stokes_multipliers, to_json, validate)
from pvasym.utils import real_coordinates


def _same_mod_lattice(x, y, ell, tol=1e-10):
    a, b = real_coordinates(x - y, 2 * ell.omega_a, 2 * ell.omega_b)
    return abs(a - round(a)) < tol and abs(b - round(b)) < tol


class TestChart(object):

    def test_half_exponents(self):
        t = ThetaParams(0.5, 0.5, 0.5)
        M = from_parameters(t, 1, 0, 1)
        rho = -1j
        assert_allclose(M.M0, [[-1, -2 / rho], [rho, 1]], atol=1e-15)
        assert_allclose(np.linalg.det(M.M0), 1, atol=1e-15)
        assert_allclose(np.trace(M.M0), 0, atol=1e-15)

    def test_random_charts_on_manifold(self):
        rng = np.random.default_rng(3)
        done = 0
        while done < 100:
            t = ThetaParams(*(rng.uniform(-0.45, 0.45, 3) +
                              1j * rng.uniform(-0.2, 0.2, 3)))
            q0, q1 = rng.uniform(-0.5, 0.5, 2) + 1j * rng.uniform(-0.5, 0.5, 2)
            r = np.exp(rng.uniform(-0.3, 0.3) + 1j * rng.uniform(0, 6.28))
            c0 = cmath.cos(np.pi * t.theta0)
            c1 = cmath.cos(np.pi * t.theta1)
            rho = cmath.exp(-1j * np.pi * t.theta_inf) - (c0 - q0) * (c1 - q1)
            if abs(rho) < 0.1:
                continue
            M = from_parameters(t, q0, q1, r)
            assert np.abs(manifold_defects(M)).max() < 1e-12
            second = M.M0[0, 0] * M.M1[0, 0] + M.M0[1, 0] * M.M1[0, 1]
            assert_allclose(second,
                            cmath.exp(-1j * np.pi * t.theta_inf),
                            atol=1e-12)
            done += 1

    def test_singular(self):
        with pytest.raises(SingularChart):
            from_parameters(THETA, 0.1, 0.2, 0)
        c0 = cmath.cos(np.pi * THETA.theta0)
        c1 = cmath.cos(np.pi * THETA.theta1)
        em = cmath.exp(-1j * np.pi * THETA.theta_inf)
        q0 = 0.3
        q1 = c1 - em / (c0 - q0)
        with pytest.raises(SingularChart):
            from_parameters(THETA, q0, q1, 1)

    def test_validate(self, monodromy_data):
        assert validate(monodromy_data) is monodromy_data
        bad = monodromy_data._replace(M0=monodromy_data.M0 * 1.01)
        with pytest.raises(ManifoldViolation):
            validate(bad)


class TestStokes(object):

    def test_reconstruction(self, monodromy_data):
        pair = stokes_multipliers(monodromy_data, *CHART)
        assert_allclose(reconstruct_product(pair, THETA),
                        monodromy_data.M1 @ monodromy_data.M0,
                        atol=1e-10)

    def test_read_off_matrices(self, monodromy_data):
        pair = stokes_multipliers(monodromy_data, *CHART)
        other = stokes_from_matrices(monodromy_data)
        assert_allclose([pair.s1, pair.s2], [other.s1, other.s2], atol=1e-10)

    def test_zero_multiplier(self):
        c0 = cmath.cos(np.pi * THETA.theta0)
        c1 = cmath.cos(np.pi * THETA.theta1)
        ep = cmath.exp(1j * np.pi * THETA.theta_inf)
        q0 = 0.2
        q1 = ep * (c0 - q0) - c1
        M = from_parameters(THETA, q0, q1, 1.3)
        assert abs(stokes_multipliers(M, q0, q1, 1.3).s1) < 1e-14

    @pytest.mark.parametrize('k', [-3, -2, -1, 0, 1, 2, 3])
    def test_shift_by_two(self, monodromy_data, k):
        pair = stokes_multipliers(monodromy_data, *CHART)
        ep = cmath.exp(1j * np.pi * THETA.theta_inf)
        D = np.diag([ep, 1 / ep])
        assert_allclose(stokes_matrix(k + 2, pair, THETA),
                        D @ stokes_matrix(k, pair, THETA) @ np.linalg.inv(D),
                        atol=1e-13)

    def test_sector_matrices(self, monodromy_data):
        pair = stokes_multipliers(monodromy_data, *CHART)
        S = lambda k: stokes_matrix(k, pair, THETA)  # noqa: E731
        U, Ub = sector_matrices(1, pair, THETA)
        assert_allclose(U, S(2) @ S(3))
        assert_allclose(Ub, S(2) @ S(3) @ S(4))
        U, Ub = sector_matrices(0, pair, THETA)
        assert_allclose(U, np.eye(2))
        assert_allclose(Ub, S(2))
        U, Ub = sector_matrices(-1, pair, THETA)
        inv = np.linalg.inv
        assert_allclose(U, inv(S(1)) @ inv(S(0)))
        assert_allclose(Ub, inv(S(1)) @ inv(S(0)) @ inv(S(-1)))


class TestSectors(object):

    @pytest.mark.parametrize('phi, p, breve, reduced', [
        (np.pi / 5, 0, False, np.pi / 5),
        (-np.pi / 5, 0, False, -np.pi / 5),
        (np.pi - np.pi / 5, 0, True, -np.pi / 5),
        (np.pi + np.pi / 5, 0, True, np.pi / 5),
        (2 * np.pi + np.pi / 5, 1, False, np.pi / 5),
        (-2 * np.pi + np.pi / 5, -1, False, np.pi / 5),
    ])
    def test_classify(self, phi, p, breve, reduced):
        sector, red = classify_sector(phi)
        assert sector.p == p
        assert sector.breve == breve
        assert_allclose(red, reduced, atol=1e-12)

    @pytest.mark.parametrize('phi', [0.0, np.pi / 2, -np.pi, 3 * np.pi / 2])
    def test_critical(self, phi):
        with pytest.raises(OnCriticalRay):
            classify_sector(phi)

    def test_base_sector_is_identity(self, monodromy_data):
        Mred, sector, red = sector_reduce(monodromy_data, np.pi / 5)
        assert_allclose(Mred.M0, monodromy_data.M0, atol=1e-14)
        assert_allclose(Mred.M1, monodromy_data.M1, atol=1e-14)

    @pytest.mark.parametrize('phi', [
        np.pi - np.pi / 5, np.pi + np.pi / 5, 2 * np.pi + np.pi / 5,
        -2 * np.pi - np.pi / 5
    ])
    def test_conjugation_invariants(self, monodromy_data, phi):
        Mred, sector, red = sector_reduce(monodromy_data, phi)
        for X, Y in ((Mred.M0, monodromy_data.M0), (Mred.M1,
                                                    monodromy_data.M1)):
            assert_allclose(np.linalg.det(X), np.linalg.det(Y), atol=1e-10)
            assert_allclose(np.trace(X), np.trace(Y), atol=1e-10)
        if sector.breve:
            assert_allclose(breve_relation(Mred),
                            cmath.exp(1j * np.pi * THETA.theta_inf),
                            atol=1e-10)

    def test_breve_is_conjugation_by_S2(self, monodromy_data):
        pair = stokes_multipliers(monodromy_data, *CHART)
        S2 = stokes_matrix(2, pair, THETA)
        Mred, sector, red = sector_reduce(monodromy_data, np.pi - np.pi / 5,
                                          pair)
        assert sector.breve
        assert_allclose(Mred.M0,
                        np.linalg.inv(S2) @ monodromy_data.M0 @ S2,
                        atol=1e-12)


class TestGenericity(object):

    def test_generic(self, monodromy_data):
        assert genericity_check(monodromy_data, False)

    @pytest.mark.parametrize('value', [0.0, 1e-15])
    def test_vanishing_entry(self, monodromy_data, value):
        M0 = monodromy_data.M0.copy()
        M0[1, 0] = value
        assert not genericity_check(monodromy_data._replace(M0=M0), False)

    def test_params_raise(self):
        M = triangular_data(THETA)
        validate(M)
        with pytest.raises(NonGenericMonodromy) as info:
            asymptotic_params(M, np.pi / 5)
        assert info.value.exit_code == 3


class TestPhaseShift(object):

    @pytest.fixture(scope='class')
    def ell(self):
        return elliptic_data(solve_A(np.pi / 5).A)

    def test_gauge_identity(self, monodromy_data):
        M = gauge_conjugate(monodromy_data, 1)
        assert_allclose(M.M0, monodromy_data.M0)

    def test_gauge_entries(self, monodromy_data):
        d0 = 0.7 + 0.4j
        M = gauge_conjugate(monodromy_data, d0)
        assert_allclose(M.M0[1, 0], d0**2 * monodromy_data.M0[1, 0])
        assert_allclose(M.M1[0, 1], monodromy_data.M1[0, 1] / d0**2)
        assert np.abs(manifold_defects(M)).max() < 1e-12

    def test_zero_gauge(self, monodromy_data):
        with pytest.raises(ZeroGauge):
            gauge_conjugate(monodromy_data, 0)

    @pytest.mark.parametrize('d0', [0.7 + 0.4j, -2.0, 1j])
    def test_gauge_invariance(self, monodromy_data, ell, d0):
        x0 = phase_shift(monodromy_data, np.pi / 5, ell, THETA)
        other = phase_shift(gauge_conjugate(monodromy_data, d0), np.pi / 5,
                            ell, THETA)
        assert _same_mod_lattice(x0, other, ell)

    def test_switch_across_zero(self, monodromy_data, ell):
        # m0_11 below the real axis, exp(-pi i tinf)/m1_11 above
        plus = phase_shift(monodromy_data, np.pi / 5, ell, THETA)
        minus = phase_shift(monodromy_data, -np.pi / 5, ell, THETA)
        em = cmath.exp(-1j * np.pi * THETA.theta_inf)
        ratio = em / (monodromy_data.M1[0, 0] * monodromy_data.M0[0, 0])
        expected = -ell.omega_a / (np.pi * 1j) * cmath.log(ratio)
        assert _same_mod_lattice(plus - minus, expected, ell)

    def test_canonical_cell(self, ell):
        x0 = 0.3 * ell.omega_a + 1.2 * ell.omega_b
        shifted = x0 + 6 * ell.omega_a - 4 * ell.omega_b
        rep, (m, n) = canonical_cell(shifted, ell)
        assert_allclose(rep, x0, atol=1e-12)
        assert (m, n) == (3, -2)

    def test_beta0_cancellation(self, ell):
        t = ThetaParams(0.0, 0.0, -0.5)
        P = cmath.exp(-1j * np.pi * (t.theta_inf + 1))
        Mred = MonodromyData(M0=np.array([[1, 0], [P, 1]], dtype=complex),
                             M1=np.array([[1, 1], [0, 1]], dtype=complex),
                             theta=t)
        assert abs(beta0(Mred, ell, t)) < 1e-14

    def test_beta0_principal_value(self):
        ell = elliptic_data(solve_A(np.pi / 4).A)
        t = ThetaParams(0.0, 0.0, 0.0)
        Mred = MonodromyData(M0=np.array([[1, 0], [2, 1]], dtype=complex),
                             M1=np.array([[1, 1], [0, 1]], dtype=complex),
                             theta=t)
        assert_allclose(beta0(Mred, ell, t),
                        -(8 / ell.omega_a) * (np.log(2) + np.pi * 1j),
                        rtol=1e-14)


class TestAsymptoticParams(object):

    def test_canonical_representative(self, params_pi5):
        p = params_pi5
        a, b = real_coordinates(p.x0, 2 * p.ell.omega_a, 2 * p.ell.omega_b)
        assert -1e-12 <= a < 1 + 1e-12 and -1e-12 <= b < 1 + 1e-12
        assert _same_mod_lattice(p.x0, p.x0_raw, p.ell)

    def test_modulus_of_reduced_angle(self, monodromy_data):
        p = asymptotic_params(monodromy_data, np.pi + np.pi / 5)
        assert_allclose(p.ell.A, solve_A(np.pi / 5).A, atol=1e-12)
        assert p.sector.breve

    def test_branch_shift_keeps_b0(self, params_pi5):
        p = params_pi5
        ell = p.ell
        n = p.beta0_branch
        beta_raw = p.beta0 + 16j * np.pi * n / ell.omega_a
        x = 35 * cmath.exp(1j * p.phi)

        def b0(x0, beta):
            z = (x - x0) / (2 * ell.omega_a)
            return (beta - 2 * ell.E_a * x / ell.omega_a -
                    8 / ell.omega_a * theta_logderiv(z, ell.tau0))

        assert_allclose(b0(p.x0, p.beta0), b0(p.x0_raw, beta_raw),
                        rtol=1e-10)

    def test_critical_ray(self, monodromy_data):
        with pytest.raises(OnCriticalRay) as info:
            asymptotic_params(monodromy_data, np.pi / 2)
        assert info.value.exit_code == 1


class TestJson(object):

    def test_round_trip(self, monodromy_data):
        text = json.dumps(to_json(monodromy_data))
        M = from_json(text)
        assert_allclose(M.M0, monodromy_data.M0, rtol=1e-15)
        assert_allclose(M.M1, monodromy_data.M1, rtol=1e-15)
        assert M.theta == monodromy_data.theta

    def test_layout(self, monodromy_data):
        obj = to_json(monodromy_data)
        assert sorted(obj) == ['M0', 'M1', 'theta']
        assert sorted(obj['theta']) == ['t0', 't1', 'tinf']
        assert obj['theta']['t0'] == [0.3, 0.0]

    def test_malformed(self):
        with pytest.raises(InputError):
            from_json({'theta': {'t0': [0, 0]}})

    def test_off_manifold(self, monodromy_data):
        obj = to_json(monodromy_data)
        obj['M1'][0][0] = [5.0, 0.0]
        with pytest.raises(ManifoldViolation):
            from_json(obj)
