"""
Monodromy data on the manifold

    det M0 = det M1 = 1,  tr M0 = 2 cos(pi theta0),  tr M1 = 2 cos(pi theta1),
    (M1 M0)_11 = exp(-pi i theta_inf)

its ``(q0, q1, r)`` chart, Stokes matrices, sector reductions and the
phase shift ``x0`` and constant ``beta0`` of the elliptic representation.
"""
import cmath
import json
import logging
from collections import namedtuple

import numpy as np

from . import config
from .boutroux import solve_A
from .ellipkit import elliptic_data
from .errors import (DegeneratePhi, InputError, ManifoldViolation,
                     NonGenericMonodromy, OnCriticalRay, SingularChart,
                     ZeroGauge)
from .utils import complex_pair, real_coordinates

logger = logging.getLogger(__name__)

ThetaParams = namedtuple('ThetaParams', ['theta0', 'theta1', 'theta_inf'])
MonodromyData = namedtuple('MonodromyData', ['M0', 'M1', 'theta'])
StokesPair = namedtuple('StokesPair', ['s1', 's2'])
Sector = namedtuple('Sector', ['p', 'breve'])
AsymptoticParams = namedtuple('AsymptoticParams', [
    'phi', 'ell', 'x0', 'beta0', 'sector', 'beta0_branch', 'x0_raw',
    'reduced_phi'
])
AsymptoticParams.__doc__ = """
Everything needed to evaluate the elliptic representation on the ray of
angle `phi`: `ell` is the EllipticData of ``A`` at `reduced_phi`, `x0` the
representative of the phase shift in the cell ``{a Omega_a + b Omega_b :
a, b in [0, 2)}`` and `beta0` the constant matching `x0` (the
principal-branch value minus ``16 pi i n / Omega_a``, with ``n`` =
`beta0_branch`, so that b0 is the same for `x0` and `x0_raw`).
"""


def _matrix(rows):
    return np.array(rows, dtype=complex)


def _em(theta_inf, sign=-1):
    return cmath.exp(sign * 1j * np.pi * complex(theta_inf))


def manifold_defects(M):
    """
    Returns the five defects of the manifold relations, in the order
    ``det M0 - 1``, ``det M1 - 1``, ``tr M0 - 2cos``, ``tr M1 - 2cos``,
    ``(M1 M0)_11 - exp(-pi i theta_inf)``.
    """
    t = M.theta
    return np.array([
        np.linalg.det(M.M0) - 1,
        np.linalg.det(M.M1) - 1,
        np.trace(M.M0) - 2 * cmath.cos(np.pi * t.theta0),
        np.trace(M.M1) - 2 * cmath.cos(np.pi * t.theta1),
        (M.M1 @ M.M0)[0, 0] - _em(t.theta_inf)
    ])


def validate(M, tol_manifold=None):
    """
    Raises ManifoldViolation if `M` is off the manifold by more than
    `tol_manifold`
    """
    tol = config.pick('monodromy', 'tol_manifold', tol_manifold)
    defects = np.abs(manifold_defects(M))
    if defects.max() > tol:
        raise ManifoldViolation("Monodromy data off the manifold: defects " +
                                str(defects))
    return M


def _chart_constants(theta, q0, q1):
    c0 = cmath.cos(np.pi * theta.theta0)
    c1 = cmath.cos(np.pi * theta.theta1)
    rho = _em(theta.theta_inf) - (c0 - q0) * (c1 - q1)
    return c0, c1, rho


def from_parameters(theta, q0, q1, r, tol_singular=None):
    """
    Monodromy data of the chart ``(q0, q1, r)``:

        M0 = [[c0 - q0, r (c0**2 - q0**2 - 1)/rho], [rho/r, c0 + q0]]
        M1 = [[c1 - q1, r], [(c1**2 - q1**2 - 1)/r, c1 + q1]]

    with ``c_j = cos(pi theta_j)`` and
    ``rho = exp(-pi i theta_inf) - (c0 - q0)(c1 - q1)``.

    Raises SingularChart if `r` or ``rho`` vanish.
    """
    tol = config.pick('monodromy', 'tol_singular', tol_singular)
    q0, q1, r = complex(q0), complex(q1), complex(r)
    c0, c1, rho = _chart_constants(theta, q0, q1)
    if abs(r) < tol:
        raise SingularChart("r = 0 is outside the chart")
    if abs(rho) < tol:
        raise SingularChart("rho(q0, q1) = 0 is outside the chart")
    M0 = _matrix([[c0 - q0, r * (c0 * c0 - q0 * q0 - 1) / rho],
                  [rho / r, c0 + q0]])
    M1 = _matrix([[c1 - q1, r], [(c1 * c1 - q1 * q1 - 1) / r, c1 + q1]])
    return MonodromyData(M0=M0, M1=M1, theta=theta)


def stokes_multipliers(M, q0, q1, r, tol_singular=None):
    """
    Stokes multipliers from the chart values:

        r s1 = e^{pi i theta_inf}(c0 - q0) - (c1 + q1)
        (rho/r) s2 = e^{pi i theta_inf}(c1 - q1) - (c0 + q0)
    """
    tol = config.pick('monodromy', 'tol_singular', tol_singular)
    q0, q1, r = complex(q0), complex(q1), complex(r)
    c0, c1, rho = _chart_constants(M.theta, q0, q1)
    if abs(r) < tol or abs(rho) < tol:
        raise SingularChart("Chart values are singular")
    ep = _em(M.theta.theta_inf, +1)
    s1 = (ep * (c0 - q0) - (c1 + q1)) / r
    s2 = (r / rho) * (ep * (c1 - q1) - (c0 + q0))
    return StokesPair(s1=s1, s2=s2)


def stokes_from_matrices(M):
    """
    Stokes multipliers read off ``M1 M0 = S1^{-1} e^{-pi i theta_inf sigma3}
    S2^{-1}``: ``s1 = -e^{pi i theta_inf}(M1 M0)_21`` and
    ``s2 = -e^{pi i theta_inf}(M1 M0)_12``.
    """
    prod = M.M1 @ M.M0
    ep = _em(M.theta.theta_inf, +1)
    return StokesPair(s1=-ep * prod[1, 0], s2=-ep * prod[0, 1])


def stokes_matrix(k, pair, theta):
    """
    ``S_k`` for any integer `k`, from ``S_1``, ``S_2`` and
    ``S_{k+2} = e^{i pi theta_inf sigma3} S_k e^{-i pi theta_inf sigma3}``.
    """
    ep = _em(theta.theta_inf, +1)
    if k % 2:
        j = (k - 1) // 2
        return _matrix([[1, 0], [pair.s1 * ep**(-2 * j), 1]])
    j = k // 2
    return _matrix([[1, pair.s2 * ep**(2 * (j - 1))], [0, 1]])


def reconstruct_product(pair, theta):
    """
    ``S1^{-1} e^{-pi i theta_inf sigma3} S2^{-1}``, to be compared with
    ``M1 M0``
    """
    em = _em(theta.theta_inf)
    S1 = stokes_matrix(1, pair, theta)
    S2 = stokes_matrix(2, pair, theta)
    return np.linalg.inv(S1) @ np.diag([em, 1 / em]) @ np.linalg.inv(S2)


def sector_matrices(p, pair, theta):
    """
    Returns ``(U_p, U_p_breve)``:

        U_p = S_2 S_3 ... S_{2p+1}                     (p > 0)
        U_p = S_1^{-1} S_0^{-1} ... S_{2p+2}^{-1}      (p < 0)
        U_p_breve = U_p S_{2p+2}  (p >= 0),   U_p S_{2p+1}^{-1}  (p < 0)
    """
    U = np.eye(2, dtype=complex)
    if p > 0:
        for k in range(2, 2 * p + 2):
            U = U @ stokes_matrix(k, pair, theta)
    elif p < 0:
        for k in range(1, 2 * p + 1, -1):
            U = U @ np.linalg.inv(stokes_matrix(k, pair, theta))
    if p >= 0:
        U_breve = U @ stokes_matrix(2 * p + 2, pair, theta)
    else:
        U_breve = U @ np.linalg.inv(stokes_matrix(2 * p + 1, pair, theta))
    return U, U_breve


def classify_sector(phi, phi_min=None):
    """
    Returns ``(Sector, reduced_phi)``. With ``p = floor((phi + pi/2)/(2 pi))``
    and ``psi = phi - 2 pi p`` in ``[-pi/2, 3pi/2)``, the sector is plain
    when ``psi < pi/2`` (reduced angle `psi`) and breve otherwise (reduced
    angle ``psi - pi``).

    Raises OnCriticalRay within `phi_min` of the real and imaginary axes.
    """
    phi_min = config.pick('monodromy', 'phi_min', phi_min)
    quarter = phi / (np.pi / 2)
    if abs(quarter - round(quarter)) * np.pi / 2 < phi_min:
        raise OnCriticalRay("phi = " + str(phi) + " is on a critical ray")
    p = int(np.floor((phi + np.pi / 2) / (2 * np.pi)))
    psi = phi - 2 * np.pi * p
    if psi < np.pi / 2:
        return Sector(p, False), psi
    return Sector(p, True), psi - np.pi


def sector_reduce(M, phi, pair=None):
    """
    Conjugates `M` into the sector of `phi`.

    Parameters
    ----------

    * M : MonodromyData
    * phi : float
        the ray angle
    * pair : StokesPair or None
        if None, it is read off the matrices by `stokes_from_matrices`

    Returns
    -------

    tuple :
        ``(Mred, sector, reduced_phi)``; ``Mred`` is ``U_p^{-1} M U_p`` in
        plain sectors and ``U_p_breve^{-1} M U_p_breve`` in breve ones
    """
    sector, reduced = classify_sector(phi)
    if pair is None:
        pair = stokes_from_matrices(M)
    U, U_breve = sector_matrices(sector.p, pair, M.theta)
    C = U_breve if sector.breve else U
    Cinv = np.linalg.inv(C)
    Mred = MonodromyData(M0=Cinv @ M.M0 @ C, M1=Cinv @ M.M1 @ C,
                         theta=M.theta)
    if sector.breve:
        defect = abs(breve_relation(Mred) - _em(M.theta.theta_inf, +1))
        if defect > config.get('monodromy', 'tol_manifold'):
            raise ManifoldViolation("Breve relation violated by " +
                                    str(defect))
    logger.debug("phi=%.6g reduced to %.6g in sector %s", phi, reduced,
                 sector)
    return Mred, sector, reduced


def breve_relation(Mred):
    """
    ``m0_12 m1_21 + m0_22 m1_22``, which equals ``exp(pi i theta_inf)`` after
    a breve reduction
    """
    return (Mred.M0[0, 1] * Mred.M1[1, 0] + Mred.M0[1, 1] * Mred.M1[1, 1])


def gauge_conjugate(M, d0):
    """
    ``d0^{-sigma3} M d0^{sigma3}``: ``m_12 -> m_12/d0**2``,
    ``m_21 -> d0**2 m_21``.
    """
    d0 = complex(d0)
    if d0 == 0:
        raise ZeroGauge("Gauge parameter d0 must be nonzero")
    left = np.diag([1 / d0, d0])
    right = np.diag([d0, 1 / d0])
    return MonodromyData(M0=left @ M.M0 @ right,
                         M1=left @ M.M1 @ right,
                         theta=M.theta)


def _generic_entries(Mred, breve):
    if breve:
        return (Mred.M0[0, 1], Mred.M1[1, 0], Mred.M0[1, 1], Mred.M1[1, 1])
    return (Mred.M0[0, 0], Mred.M1[0, 0], Mred.M0[1, 0], Mred.M1[0, 1])


def genericity_check(Mred, breve, tol_generic=None):
    """
    True if each of the four entries entering the phase shift exceeds
    `tol_generic` in modulus: ``m0_11, m1_11, m0_21, m1_12`` (plain) or
    ``m0_12, m1_21, m0_22, m1_22`` (breve).
    """
    tol = config.pick('monodromy', 'tol_generic', tol_generic)
    return all(abs(e) > tol for e in _generic_entries(Mred, breve))


def _log_terms(Mred, reduced_phi, theta, breve):
    """
    ``(log of the product term, log of frak m)`` on principal branches
    """
    em = _em(theta.theta_inf)
    if breve:
        log_prod = cmath.log(1 / (Mred.M0[0, 1] * Mred.M1[1, 0]))
        if reduced_phi < 0:
            frak_m = em * Mred.M0[1, 1]
        else:
            frak_m = 1 / Mred.M1[1, 1]
    else:
        log_prod = cmath.log(Mred.M0[1, 0] * Mred.M1[0, 1])
        if reduced_phi < 0:
            frak_m = Mred.M0[0, 0]
        else:
            frak_m = em / Mred.M1[0, 0]
    return log_prod, cmath.log(frak_m)


def phase_shift_raw(Mred, phi, ell, theta, breve=False):
    """
    ``x0 = (-1/(pi i))(Omega_b log P + Omega_a log m) - (Omega_a/2 + Omega_b)
    (theta_inf + 1)`` with principal logarithms, before lattice reduction
    """
    if not genericity_check(Mred, breve):
        raise NonGenericMonodromy("Phase shift undefined: a required entry "
                                  "vanishes")
    log_prod, log_m = _log_terms(Mred, phi, theta, breve)
    oa, ob = ell.omega_a, ell.omega_b
    return ((-1 / (np.pi * 1j)) * (ob * log_prod + oa * log_m) -
            (oa / 2 + ob) * (theta.theta_inf + 1))


def canonical_cell(x0, ell):
    """
    Reduces `x0` modulo ``2 Omega_a Z + 2 Omega_b Z``; returns the
    representative and the integer pair ``(m, n)`` with
    ``x0_canonical = x0 - 2m Omega_a - 2n Omega_b``.
    """
    a, b = real_coordinates(x0, 2 * ell.omega_a, 2 * ell.omega_b)
    m, n = int(np.floor(a)), int(np.floor(b))
    return x0 - 2 * m * ell.omega_a - 2 * n * ell.omega_b, (m, n)


def phase_shift(Mred, phi, ell, theta, breve=False):
    """
    Phase shift in the canonical cell.

    Arguments
    ---------
    Mred : MonodromyData
        data already conjugated into the sector of `phi`
    phi : float
        the reduced angle, in ``(-pi/2, pi/2)``; its sign selects frak m
    ell : EllipticData
        elliptic data of A at the reduced angle
    theta : ThetaParams
    breve : bool
        whether the breve substitutions apply
    """
    x0 = phase_shift_raw(Mred, phi, ell, theta, breve)
    return canonical_cell(x0, ell)[0]


def beta0(Mred, ell, theta, breve=False):
    """
    ``beta0 = -(8/Omega_a)(log P + pi i (theta_inf + 1))`` with ``P`` the
    product ``m0_21 m1_12`` (or ``1/(m0_12 m1_21)`` for breve sectors) on the
    principal branch.
    """
    if breve:
        prod = Mred.M0[0, 1] * Mred.M1[1, 0]
        if prod == 0:
            raise NonGenericMonodromy("m0_12 m1_21 = 0")
        log_prod = cmath.log(1 / prod)
    else:
        prod = Mred.M0[1, 0] * Mred.M1[0, 1]
        if prod == 0:
            raise NonGenericMonodromy("m0_21 m1_12 = 0")
        log_prod = cmath.log(prod)
    return -(8 / ell.omega_a) * (log_prod + np.pi * 1j *
                                 (theta.theta_inf + 1))


def asymptotic_params(M, phi, pair=None):
    """
    Builds the AsymptoticParams of the ray of angle `phi`: sector
    reduction, genericity, A at the reduced angle, canonical ``x0`` and the
    matching ``beta0``.
    """
    Mred, sector, reduced = sector_reduce(M, phi, pair)
    if not genericity_check(Mred, sector.breve):
        raise NonGenericMonodromy(
            "Monodromy data is not generic in the sector of phi = " +
            str(phi))
    point = solve_A(reduced)
    if point.A in (0, 1):
        raise DegeneratePhi("A is degenerate at the reduced angle " +
                            str(reduced))
    ell = elliptic_data(point.A)
    x0_raw = phase_shift_raw(Mred, reduced, ell, M.theta, sector.breve)
    x0, (m, n) = canonical_cell(x0_raw, ell)
    b = beta0(Mred, ell, M.theta, sector.breve) - 16j * np.pi * n / ell.omega_a
    return AsymptoticParams(phi=phi,
                            ell=ell,
                            x0=x0,
                            beta0=b,
                            sector=sector,
                            beta0_branch=n,
                            x0_raw=x0_raw,
                            reduced_phi=reduced)


def to_json(M):
    """
    Encodes `M` as a JSON-ready dict:
    ``{"theta": {"t0": [re, im], "t1": .., "tinf": ..}, "M0": [[[re, im], ..],
    ..], "M1": ..}``
    """

    def mat(X):
        return [[complex_pair(X[i, j]) for j in range(2)] for i in range(2)]

    t = M.theta
    return {
        'theta': {
            't0': complex_pair(t.theta0),
            't1': complex_pair(t.theta1),
            'tinf': complex_pair(t.theta_inf)
        },
        'M0': mat(M.M0),
        'M1': mat(M.M1)
    }


def from_json(obj, tol_manifold=None):
    """
    Decodes the output of `to_json` (a dict or a JSON string) and validates
    it against the manifold.
    """
    if isinstance(obj, str):
        obj = json.loads(obj)
    try:

        def num(pair):
            return complex(float(pair[0]), float(pair[1]))

        theta = ThetaParams(theta0=num(obj['theta']['t0']),
                            theta1=num(obj['theta']['t1']),
                            theta_inf=num(obj['theta']['tinf']))
        M0 = _matrix([[num(e) for e in row] for row in obj['M0']])
        M1 = _matrix([[num(e) for e in row] for row in obj['M1']])
    except (KeyError, IndexError, TypeError, ValueError) as e:
        raise InputError("Malformed monodromy JSON: " + str(e))
    if M0.shape != (2, 2) or M1.shape != (2, 2):
        raise InputError("Monodromy matrices must be 2x2")
    return validate(MonodromyData(M0=M0, M1=M1, theta=theta), tol_manifold)
