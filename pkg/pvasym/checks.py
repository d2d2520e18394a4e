"""
Invariant suite run by ``pvasym check``.

Every check is a function without arguments returning a CheckResult; the
tolerances live in the ``checks`` section of the configuration.
"""
import logging
from collections import OrderedDict, namedtuple

import numpy as np
from numpy.polynomial.legendre import leggauss

from . import config
from .boutroux import solve_A, trajectory
from .ellipkit import (cycle_I, elliptic_data, kernel, periods_omega, theta,
                       theta_logderiv)
from .error_term import sn_primitive
from .errors import SingularChart
from .monodromy import ThetaParams, from_parameters, manifold_defects

logger = logging.getLogger(__name__)

CheckResult = namedtuple('CheckResult', ['name', 'passed', 'value', 'tol'])

_CHECKS = OrderedDict()


def check(func):
    """
    Registers `func` in the suite under its own name
    """
    _CHECKS[func.__name__] = func
    return func


def _result(name, value):
    tol = config.get('checks', name)
    return CheckResult(name, bool(value < tol), float(value), tol)


def _inner_points(n=11, phi_max=np.pi / 2):
    return [
        p for p in trajectory(n).points
        if p.A not in (0, 1) and abs(p.phi) <= phi_max
    ]


def _five_point(f, z, h):
    return (-f(z + 2 * h) + 8 * f(z + h) - 8 * f(z - h) + f(z - 2 * h)) / (12 *
                                                                          h)


def _continuous_sqrt(values):
    """
    Square roots of `values` (ordered along a path) with the sign carried
    by continuity from the principal root of the first one
    """
    out = np.sqrt(np.asarray(values, dtype=complex))
    for i in range(1, len(out)):
        if (out[i] * np.conj(out[i - 1])).real < 0:
            out[i:] = -out[i:]
    return out


def w0_cycle_quadrature(A, phi, nodes=400, bow=0.3):
    """
    ``(int_a W0, int_b W0)`` for ``W0 = (e^{i phi}/4) A (1 - z**-2) dz/w``
    by Gauss-Legendre.

    On the a cycle ``z = k sin(th)`` with ``th(s) = s + i bow cos(s)``,
    ``s in [-pi/2, pi/2]``, bowing around the double pole at ``z = 0``; on
    the b cycle ``z**2 = A + (1 - A) sin(th)**2``, ``th in [0, pi/2]``.
    """
    rot = np.exp(1j * phi) / 4
    x, w = leggauss(nodes)
    s = 0.5 * np.pi * x
    ws = 0.5 * np.pi * w
    th = s + 1j * bow * np.cos(s)
    dth = 1 - 1j * bow * np.sin(s)
    sn2 = np.sin(th)**2
    root = _continuous_sqrt(1 - A * sn2)
    a_int = 2 * rot * A * np.sum(ws * (1 - 1 / (A * sn2)) * dth / root)

    th = 0.25 * np.pi * (x + 1)
    wt = 0.25 * np.pi * w
    z = np.sqrt(A + (1 - A) * np.sin(th)**2 + 0j)
    b_int = 2j * rot * A * np.sum(wt * (1 - 1 / z**2) / z)
    return complex(a_int), complex(b_int)


@check
def legendre_relation():
    """
    ``|E_a Omega_b - E_b Omega_a - 4 pi i|`` on the trajectory
    """
    worst = 0.0
    for p in _inner_points():
        ell = elliptic_data(p.A)
        worst = max(
            worst,
            abs(ell.E_a * ell.omega_b - ell.E_b * ell.omega_a - 4j * np.pi))
    return _result('legendre_relation', worst)


@check
def cycle_w0_identities():
    """
    ``int_a W0 = (e^{i phi}/4) E_a`` by quadrature and in theta form, and
    ``int_b W0 - tau0 int_a W0 = -e^{i phi} pi i / Omega_a``
    """
    worst = 0.0
    for p in _inner_points(7, np.pi / 3 + 1e-9):
        ell = elliptic_data(p.A)
        rot = np.exp(1j * p.phi)
        a_int, b_int = w0_cycle_quadrature(p.A, p.phi)
        dL = theta_logderiv(ell.tau0 / 2, ell.tau0, deriv=1)
        a_theta = rot / 8 * ((p.A - 1) * ell.omega_a - 4 / ell.omega_a * dL)
        worst = max(worst, abs(a_int - rot / 4 * ell.E_a),
                    abs(b_int - rot / 4 * ell.E_b),
                    abs(a_theta - rot / 4 * ell.E_a),
                    abs(b_int - ell.tau0 * a_int + rot * np.pi * 1j /
                        ell.omega_a))
    return _result('cycle_w0_identities', worst)


def _theta_samples():
    rng = np.random.default_rng(7)
    ell = elliptic_data(solve_A(np.pi / 4).A)
    zs = rng.uniform(-0.5, 0.5, 10) + 1j * rng.uniform(-0.4, 0.4, 10)
    return ell.tau0, zs


@check
def theta_periodicity():
    tau, zs = _theta_samples()
    worst = max(
        abs(theta(z + 1, tau) - theta(z, tau)) / abs(theta(z, tau))
        for z in zs)
    return _result('theta_periodicity', worst)


@check
def theta_quasi_periodicity():
    """
    ``theta(z + tau) = exp(-pi i tau - 2 pi i z) theta(z)``
    """
    tau, zs = _theta_samples()
    worst = max(
        abs(theta(z + tau, tau) -
            np.exp(-1j * np.pi * tau - 2j * np.pi * z) * theta(z, tau)) /
        abs(theta(z + tau, tau)) for z in zs)
    return _result('theta_quasi_periodicity', worst)


@check
def sn_differential_equation():
    """
    ``(sn')**2 = (1 - sn**2)(1 - k**2 sn**2)`` with sn' by a five-point
    difference
    """
    worst = 0.0
    for A in (0.3 + 0.2j, elliptic_data(solve_A(np.pi / 5).A).A):
        ell = elliptic_data(A)
        sn = kernel(ell.k).sn
        for u in (0.3 * ell.K + 0.2 * ell.Kp * 1j, 0.7 + 0.1j, 1.1 - 0.3j):
            d = _five_point(sn, u, 1e-3)
            s = sn(u)
            worst = max(worst, abs(d * d - (1 - s * s) * (1 - A * s * s)))
    return _result('sn_differential_equation', worst)


@check
def cycle_derivatives():
    """
    ``dI/dA = omega/2`` (relative), derivative by a five-point difference
    """
    worst = 0.0
    for p in _inner_points(7, np.pi / 3 + 1e-9):
        w_a, w_b = periods_omega(p.A)
        dI_a = _five_point(lambda A: cycle_I(A)[0], p.A, 1e-3)
        dI_b = _five_point(lambda A: cycle_I(A)[1], p.A, 1e-3)
        worst = max(worst,
                    abs(dI_a - w_a / 2) / abs(w_a),
                    abs(dI_b - w_b / 2) / abs(w_b))
    return _result('cycle_derivatives', worst)


INTEGRANDS = {
    'u0': lambda sn, cn, dn: 1 / cn**2,
    'v0': lambda sn, cn, dn: sn / cn**2,
    'u1': lambda sn, cn, dn: 1 / dn**2,
    'v1': lambda sn, cn, dn: sn / dn**2,
    'u2': lambda sn, cn, dn: 1 / cn**4,
    'v2': lambda sn, cn, dn: sn / cn**4,
}


def primitive_quadrature(kind, u, ell, nodes=400):
    """
    ``int_0^u`` of the integrand of `kind` along the straight segment
    """
    x, w = leggauss(nodes)
    vs = 0.5 * u * (x + 1)
    f = INTEGRANDS[kind]
    ker = kernel(ell.k)
    vals = np.array([f(*ker.sncndn(v)) for v in vs])
    return complex(0.5 * u * np.sum(w * vals))


@check
def closed_primitives():
    ell = elliptic_data(0.5)
    worst = 0.0
    for u in (0.3 * ell.omega_a + 0.25 * ell.omega_b,
              0.15 * ell.omega_a + 0.1 * ell.omega_b):
        for kind in INTEGRANDS:
            closed = sn_primitive(kind, u, ell)
            worst = max(worst, abs(closed - primitive_quadrature(kind, u,
                                                                 ell)))
    return _result('closed_primitives', worst)


@check
def boutroux_endpoints():
    value = abs(solve_A(0.0).A) + abs(solve_A(np.pi / 2).A - 1)
    return _result('boutroux_endpoints', value)


@check
def boutroux_trajectory():
    """
    Largest residual on the trajectory, together with
    ``|A_{-phi} - conj(A_phi)|``
    """
    pts = trajectory(11).points
    worst = max(p.residual_norm for p in pts)
    by_phi = {round(p.phi, 12): p.A for p in pts}
    for p in pts:
        worst = max(worst, abs(by_phi[round(-p.phi, 12)] - p.A.conjugate()))
    return _result('boutroux_trajectory', worst)


@check
def manifold_closure():
    """
    Manifold defects of random chart points, relative to the size of the
    matrices
    """
    rng = np.random.default_rng(11)
    worst = 0.0
    for _ in range(100):
        t = ThetaParams(*(rng.uniform(-0.45, 0.45, 3) +
                          1j * rng.uniform(-0.2, 0.2, 3)))
        q0, q1 = rng.uniform(-1, 1, 2) + 1j * rng.uniform(-1, 1, 2)
        r = np.exp(rng.uniform(-0.5, 0.5) + 1j * rng.uniform(0, 2 * np.pi))
        try:
            M = from_parameters(t, q0, q1, r)
        except SingularChart:
            continue
        scale = max(1.0, np.abs(M.M0).max(), np.abs(M.M1).max())**2
        worst = max(worst, np.abs(manifold_defects(M)).max() / scale)
    return _result('manifold_closure', worst)


def list_checks():
    return list(_CHECKS)


def run_check(name):
    if name not in _CHECKS:
        raise KeyError("Unknown check: " + str(name))
    res = _CHECKS[name]()
    logger.info("%s: %s (%.3g, tol %.3g)", name,
                'ok' if res.passed else 'FAILED', res.value, res.tol)
    return res


def run_all(names=None):
    """
    Runs the checks in `names` (all if None) and returns their results
    """
    return [run_check(n) for n in (names or list_checks())]
