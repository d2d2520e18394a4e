"""
Leading elliptic representation on a ray: ``psi0``, ``y``, ``b0``, the pole
lattices and the cheese-like strip.
"""
import logging
from collections import namedtuple

import numpy as np

from . import config
from .ellipkit import kernel, theta_logderiv
from .errors import (InputError, NearThetaZero, PoleProximity, SingularY,
                     UnitValue)
from .utils import real_coordinates

logger = logging.getLogger(__name__)

CheeseStrip = namedtuple('CheeseStrip',
                         ['phi', 't_inf', 'kappa0', 'delta0', 'excluded'])
LatticeInfo = namedtuple('LatticeInfo', [
    'nearest_P0', 'dist_P0', 'nearest_Q', 'dist_Q', 'classification'
])
RaySample = namedtuple('RaySample', ['t', 'x', 'y', 'psi0', 'b0', 'cls'])

EXCLUDED = ('P0', 'P0Q')


def _sncndn(x, p):
    ell = p.ell
    return kernel(ell.k).sncndn((x - p.x0) / 2)


def psi0(x, p):
    """
    ``psi0(x) = k sn((x - x0)/2; k)``

    Raises PoleProximity near the lattice ``P0``.
    """
    return p.ell.k * kernel(p.ell.k).sn((x - p.x0) / 2)


def psi0_prime(x, p):
    """
    ``psi0' = (k/2) cn dn`` at ``(x - x0)/2``
    """
    sn, cn, dn = _sncndn(x, p)
    return 0.5 * p.ell.k * cn * dn


def psi0_state(x, p):
    """
    ``(psi0, psi0')`` from a single sn/cn/dn evaluation
    """
    sn, cn, dn = _sncndn(x, p)
    k = p.ell.k
    return k * sn, 0.5 * k * cn * dn


def psi0_second(x, p):
    """
    ``psi0'' = -(k/4) sn (dn**2 + k**2 cn**2)``
    """
    sn, cn, dn = _sncndn(x, p)
    k = p.ell.k
    return -0.25 * k * sn * (dn * dn + k * k * cn * cn)


def y_from_psi(psi, tol_unit=None):
    """
    ``y = (psi + 1)/(psi - 1)``; UnitValue if ``psi`` is within `tol_unit` of 1
    """
    tol_unit = config.pick('elliptic_rep', 'tol_unit', tol_unit)
    if abs(psi - 1) < tol_unit:
        raise UnitValue("psi = 1 is a pole of y")
    return (psi + 1) / (psi - 1)


def y_leading(x, p, tol_unit=None):
    """
    Leading-order ``y(x)`` with ``(y + 1)/(y - 1) = psi0(x)``.

    ``psi0`` has poles on ``P0``, where y tends to 1: there PoleProximity
    is propagated, carrying the pole.
    """
    return y_from_psi(psi0(x, p), tol_unit)


def y_leading_prime(x, p, tol_unit=None):
    """
    ``(y, y')`` of the leading term, ``y' = -2 psi0'/(psi0 - 1)**2``
    """
    psi, dpsi = psi0_state(x, p)
    y = y_from_psi(psi, tol_unit)
    return y, -2 * dpsi / (psi - 1)**2


def _theta_argument(x, p):
    return (x - p.x0) / (2 * p.ell.omega_a)


def b0(x, p):
    """
    ``b0(x) = beta0 - (2 E_a/Omega_a) x - (8/Omega_a) L((x - x0)/(2 Omega_a),
    tau0)`` with ``L = theta'/theta``.

    Raises NearThetaZero at the poles of b0, which lie on ``P0``.
    """
    ell = p.ell
    L = theta_logderiv(_theta_argument(x, p), ell.tau0)
    return p.beta0 - 2 * ell.E_a / ell.omega_a * x - 8 / ell.omega_a * L


def b0_prime(x, p):
    """
    ``b0' = -2 E_a/Omega_a - (4/Omega_a**2) L'``, which equals
    ``2(psi0**2 - A) + 4 psi0'``
    """
    ell = p.ell
    dL = theta_logderiv(_theta_argument(x, p), ell.tau0, deriv=1)
    return -2 * ell.E_a / ell.omega_a - 4 / ell.omega_a**2 * dL


def b0_second(x, p):
    ell = p.ell
    d2L = theta_logderiv(_theta_argument(x, p), ell.tau0, deriv=2)
    return -2 / ell.omega_a**3 * d2L


def _nearest(z, origin, e1, e2):
    a, b = real_coordinates(z - origin, e1, e2)
    a0, b0_ = round(a), round(b)
    best = None
    for da in (-1, 0, 1):
        for db in (-1, 0, 1):
            point = origin + (a0 + da) * e1 + (b0_ + db) * e2
            d = abs(z - point)
            if best is None or d < best[1]:
                best = (point, d)
    return best


def nearest_P0(x, p):
    """
    Nearest point of ``P0 = x0 + Omega_a Z + Omega_b (2Z + 1)`` and its
    distance
    """
    ell = p.ell
    return _nearest(x, p.x0 + ell.omega_b, ell.omega_a, 2 * ell.omega_b)


def nearest_Q(x, p):
    """
    Nearest point of ``Q = x0 + Omega_a/2 + Omega_a Z + Omega_b Z``, where
    sn is ``+-1`` or ``+-1/k``
    """
    ell = p.ell
    return _nearest(x, p.x0 + ell.omega_a / 2, ell.omega_a, ell.omega_b)


def _lattice_in_box(origin, e1, e2, phi, t_range, s_range):
    rot = np.exp(1j * phi)
    corners = [
        rot * complex(t, s) - origin for t in t_range for s in s_range
    ]
    coords = np.array([real_coordinates(c, e1, e2) for c in corners])
    lo = np.floor(coords.min(axis=0)).astype(int) - 1
    hi = np.ceil(coords.max(axis=0)).astype(int) + 1
    m, n = np.meshgrid(np.arange(lo[0], hi[0] + 1),
                       np.arange(lo[1], hi[1] + 1))
    pts = origin + m.ravel() * e1 + n.ravel() * e2
    tpts = pts / rot
    keep = ((tpts.real >= t_range[0]) & (tpts.real <= t_range[1]) &
            (tpts.imag >= s_range[0]) & (tpts.imag <= s_range[1]))
    return tpts[keep]


def excluded_points(p, phi, t_range, s_range, excluded='P0Q'):
    """
    Points of ``P0`` (and of ``Q`` if `excluded` is ``'P0Q'``) inside the
    box ``t_range x s_range`` of ``t = e^{-i phi} x``, returned in t
    coordinates.
    """
    ell = p.ell
    pts = [
        _lattice_in_box(p.x0 + ell.omega_b, ell.omega_a, 2 * ell.omega_b, phi,
                        t_range, s_range)
    ]
    if excluded == 'P0Q':
        pts.append(
            _lattice_in_box(p.x0 + ell.omega_a / 2, ell.omega_a, ell.omega_b,
                            phi, t_range, s_range))
    return np.concatenate(pts)


def default_delta0(ell):
    return 0.05 * min(abs(ell.omega_a), abs(ell.omega_b))


def lattice_membership(x, p, delta0=None):
    """
    Classifies `x` as ``'near_P0'``, ``'near_Q'`` or ``'clear'`` using
    disks of radius `delta0` (``0.05 min|Omega|`` by default).
    """
    delta0 = config.pick('elliptic_rep', 'delta0', delta0)
    if delta0 is None:
        delta0 = default_delta0(p.ell)
    P, dP = nearest_P0(x, p)
    Q, dQ = nearest_Q(x, p)
    if dP < delta0:
        cls = 'near_P0'
    elif dQ < delta0:
        cls = 'near_Q'
    else:
        cls = 'clear'
    return LatticeInfo(P, dP, Q, dQ, cls)


def make_strip(p, t_inf=None, kappa0=None, delta0=None, excluded='P0'):
    """
    Builds the CheeseStrip of the ray of `p`. Missing values come from the
    configuration; ``kappa0`` and ``delta0`` default to ``max|Omega|`` and
    ``0.05 min|Omega|``.
    """
    ell = p.ell
    t_inf = config.pick('elliptic_rep', 't_inf', t_inf)
    kappa0 = config.pick('elliptic_rep', 'kappa0', kappa0)
    delta0 = config.pick('elliptic_rep', 'delta0', delta0)
    if kappa0 is None:
        kappa0 = max(abs(ell.omega_a), abs(ell.omega_b))
    if delta0 is None:
        delta0 = default_delta0(ell)
    if excluded not in EXCLUDED:
        raise InputError("excluded must be one of " + str(EXCLUDED))
    if delta0 <= 0 or kappa0 <= 2 * delta0:
        raise InputError("Strip needs delta0 > 0 and kappa0 > 2 delta0")
    return CheeseStrip(phi=p.phi,
                       t_inf=t_inf,
                       kappa0=kappa0,
                       delta0=delta0,
                       excluded=excluded)


def in_strip(x, s, p):
    """
    True if ``t = e^{-i phi} x`` has ``Re t > t_inf`` and ``|Im t| < kappa0``
    and `x` is farther than ``delta0`` from the excluded lattice(s).
    """
    t = np.exp(-1j * s.phi) * x
    if t.real <= s.t_inf or abs(t.imag) >= s.kappa0:
        return False
    if nearest_P0(x, p)[1] < s.delta0:
        return False
    if s.excluded == 'P0Q' and nearest_Q(x, p)[1] < s.delta0:
        return False
    return True


def strip_representative(p, strip=None):
    """
    Translates ``x0`` by ``2m Omega_a + 2n Omega_b`` to the representative
    with ``Re t > t_inf`` of smallest ``|Im t|``; beta0 moves by
    ``16 pi i n / Omega_a`` so that b0 is unchanged.
    """
    if strip is None:
        strip = make_strip(p)
    ell = p.ell
    rot = np.exp(1j * strip.phi)
    e1, e2 = 2 * ell.omega_a, 2 * ell.omega_b
    target = rot * (strip.t_inf + abs(e1) + abs(e2))
    a, b = real_coordinates(target - p.x0, e1, e2)
    best = None
    for m in range(int(np.floor(a)) - 2, int(np.floor(a)) + 4):
        for n in range(int(np.floor(b)) - 2, int(np.floor(b)) + 4):
            t = (p.x0 + m * e1 + n * e2) / rot
            if t.real <= strip.t_inf:
                continue
            if best is None or abs(t.imag) < best[0]:
                best = (abs(t.imag), m, n)
    _, m, n = best
    if best[0] >= strip.kappa0:
        logger.warning("No translate of x0 within |Im t| < kappa0 = %.4g",
                       strip.kappa0)
    return p._replace(x0=p.x0 + m * e1 + n * e2,
                      beta0=p.beta0 + 16j * np.pi * n / ell.omega_a)


def second_relation_residual(x, p, y, yprime, tol_singular=None):
    """
    ``(y'**2 - y**2)/(y (y - 1)**2) - (1 - A)/4``; it vanishes for the
    leading term and is O(1/x) for solutions.

    Raises SingularY for y at 0 or 1.
    """
    tol = config.pick('elliptic_rep', 'tol_singular', tol_singular)
    if abs(y) < tol or abs(y - 1) < tol:
        raise SingularY("y must avoid 0 and 1")
    return (yprime**2 - y**2) / (y * (y - 1)**2) - (1 - p.ell.A) / 4


def sample_ray(p, t_values, strip=None):
    """
    Evaluates the leading term at ``x = e^{i phi} t`` for each `t`.

    Samples near ``P0`` carry NaN values; the class column is the lattice
    classification, or ``'outside'`` for points not in the strip.
    """
    if strip is None:
        strip = make_strip(p)
    nan = complex(np.nan, np.nan)
    rot = np.exp(1j * p.phi)
    out = []
    for t in t_values:
        x = rot * t
        cls = lattice_membership(x, p, strip.delta0).classification
        if not in_strip(x, strip, p) and cls == 'clear':
            cls = 'outside'
        try:
            psi = psi0(x, p)
            y = y_from_psi(psi)
        except (PoleProximity, UnitValue):
            psi, y = nan, nan
        try:
            b = b0(x, p)
        except NearThetaZero:
            b = nan
        out.append(RaySample(t=t, x=x, y=y, psi0=psi, b0=b, cls=cls))
    return out
