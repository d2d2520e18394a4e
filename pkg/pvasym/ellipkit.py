"""
Complex special-function kernel.

Complete elliptic integrals by the arithmetic-geometric mean, the cycle
integrals of the Boutroux equations, the theta function
``theta(z, tau) = sum_n exp(pi*i*tau*n**2 + 2*pi*i*z*n)`` with its
log-derivative, Jacobi sn/cn/dn as theta quotients, and the algebraic
function ``w(A, z) = sqrt((1 - z**2)*(A - z**2))`` on its two sheets.

Orientation of the cycles is pinned by the boundary values
``I_a(0) = 0``, ``I_b(0) = 2i``, ``I_a(1) = 4``, ``I_b(1) = 0``; with it,
``Omega_a = 4K(k)``, ``Omega_b = 2iK(k')``, ``E_a = I_a`` and ``E_b = -I_b``.
"""
import cmath
import functools
import logging
from collections import namedtuple

import numpy as np

from . import config
from .errors import (BranchPoint, DegenerateModulus, NearThetaZero,
                     NonconvergentNome, PoleProximity)
from .utils import real_coordinates

logger = logging.getLogger(__name__)

PI = np.pi
TWO_PI_I = 2j * np.pi

EllipticData = namedtuple(
    'EllipticData', ['A', 'k', 'omega_a', 'omega_b', 'E_a', 'E_b', 'tau0',
                     'K', 'Kp'])
EllipticData.__doc__ = """
Boutroux modulus ``A`` with ``k = A**(1/2)`` (``Re k >= 0``), periods
``omega_a = 4K``, ``omega_b = 2iK'``, cycle integrals ``E_a``, ``E_b`` and
``tau0 = omega_b / omega_a``. ``K`` and ``Kp`` are ``K(k)`` and ``K(k')``.
"""

SheetedPoint = namedtuple('SheetedPoint', ['z', 'sheet'])
SheetedPoint.__doc__ = "A point `z` on the `upper` or `lower` sheet of w"

SHEETS = ('upper', 'lower')


def branch_sqrt(A):
    """
    Square root with ``Re >= 0`` and, on the imaginary axis, ``Im > 0``.
    """
    k = cmath.sqrt(complex(A))
    if k.real == 0.0 and k.imag < 0:
        k = -k
    return k


def _agm_K_E(m):
    """
    K(m) and E(m) by one arithmetic-geometric sweep (right choice of the
    geometric mean, so that the principal branch off ``[1, inf)`` is
    obtained).

    Returns a tuple of two complex!
    """
    a = 1 + 0j
    b = cmath.sqrt(1 - m)
    weight = 0.5
    csum = 0.5 * m
    for _ in range(64):
        if abs(a - b) <= 1e-16 * abs(a):
            break
        c = 0.5 * (a - b)
        a_next = 0.5 * (a + b)
        b_next = cmath.sqrt(a * b)
        if abs(a_next - b_next) > abs(a_next + b_next):
            b_next = -b_next
        weight *= 2
        csum += weight * c * c
        a, b = a_next, b_next
    K = PI / (2 * a)
    return K, K * (1 - csum)


def _K_of_m(m, tol_degenerate=None):
    tol_degenerate = config.pick('ellipkit', 'tol_degenerate', tol_degenerate)
    if abs(m - 1) < tol_degenerate:
        raise DegenerateModulus("K diverges at k^2 = " + str(m))
    return _agm_K_E(complex(m))[0]


def complete_K(k, tol_degenerate=None):
    """
    Complete elliptic integral of the first kind of modulus `k`.

    Parameters
    ----------

    * k : complex
        the modulus; ``k**2`` must stay away from 1
    * tol_degenerate : float or None
        distance of ``k**2`` from 1 below which DegenerateModulus is raised

    Returns
    -------

    complex :
        ``K(k) = int_0^{pi/2} dtheta / sqrt(1 - k**2 sin(theta)**2)``
    """
    k = complex(k)
    return _K_of_m(k * k, tol_degenerate)


def complete_E(k):
    """
    Complete elliptic integral of the second kind; ``E(1) = 1``.
    """
    k = complex(k)
    m = k * k
    if abs(m - 1) < config.get('ellipkit', 'tol_degenerate'):
        return 1 + 0j
    return _agm_K_E(m)[1]


def cycle_I(A, tol_degenerate=None):
    """
    Cycle integrals of ``sqrt((A - z**2)/(1 - z**2))`` over the a and b
    cycles.

    The exact rewrite ``I_a = 4(E(A) - (1 - A)K(A))``,
    ``I_b = 2i(E(1 - A) - A K(1 - A))`` is used; ``A = 0`` and ``A = 1``
    return the exact boundary values.
    """
    tol_degenerate = config.pick('ellipkit', 'tol_degenerate', tol_degenerate)
    A = complex(A)
    if abs(A) < tol_degenerate:
        return 0j, 2j
    if abs(A - 1) < tol_degenerate:
        return 4 + 0j, 0j
    K, E = _agm_K_E(A)
    Kp, Ep = _agm_K_E(1 - A)
    return 4 * (E - (1 - A) * K), 2j * (Ep - A * Kp)


def cycle_I_quadrature(A, nodes=None):
    """
    Gauss-Legendre evaluation of the cycle integrals after the substitutions
    ``t = sin(theta)`` (a cycle) and ``z**2 = A + (1 - A) sin(theta)**2``
    (b cycle), which remove the endpoint square roots:

        I_a = 4A int_0^{pi/2} cos^2 / sqrt(1 - A sin^2)
        I_b = 2i(1 - A) int_0^{pi/2} sin^2 / sqrt(A + (1 - A) sin^2)

    This is the independent path used to verify `cycle_I`.
    """
    nodes = config.pick('ellipkit', 'quad_nodes', nodes)
    A = complex(A)
    x, wts = np.polynomial.legendre.leggauss(nodes)
    theta = 0.25 * PI * (x + 1)
    wts = 0.25 * PI * wts
    s2 = np.sin(theta)**2
    c2 = np.cos(theta)**2
    I_a = 4 * A * np.sum(wts * c2 / np.sqrt(1 - A * s2 + 0j))
    I_b = 2j * (1 - A) * np.sum(wts * s2 / np.sqrt(A + (1 - A) * s2 + 0j))
    return complex(I_a), complex(I_b)


def periods_omega(A):
    """
    Periods ``omega = 2 dI/dA``: ``omega_a = 4K(k)``, ``omega_b = -2iK(k')``.
    """
    A = complex(A)
    return 4 * _K_of_m(A), -2j * _K_of_m(1 - A)


def cycle_ratio(A):
    """
    Returns ``I = I_a/I_b`` and its derivative ``2 pi i / I_b**2``.
    """
    I_a, I_b = cycle_I(A)
    return I_a / I_b, TWO_PI_I / I_b**2


def elliptic_data(A, tol_degenerate=None):
    """
    Builds the EllipticData of modulus-squared `A`.

    Raises DegenerateModulus when `A` is within `tol_degenerate` of 0 or 1.
    """
    tol_degenerate = config.pick('ellipkit', 'tol_degenerate', tol_degenerate)
    A = complex(A)
    if abs(A) < tol_degenerate or abs(A - 1) < tol_degenerate:
        raise DegenerateModulus("Degenerate elliptic curve at A = " + str(A))
    k = branch_sqrt(A)
    if k.real == 0.0:
        logger.info("Re A^(1/2) = 0 at A = %s; Im k > 0 branch taken", A)
    K, E = _agm_K_E(A)
    Kp, Ep = _agm_K_E(1 - A)
    I_a = 4 * (E - (1 - A) * K)
    I_b = 2j * (Ep - A * Kp)
    omega_a = 4 * K
    omega_b = 2j * Kp
    tau0 = omega_b / omega_a
    if tau0.imag <= 0:
        raise NonconvergentNome("Im tau0 <= 0 at A = " + str(A))
    return EllipticData(A=A,
                        k=k,
                        omega_a=omega_a,
                        omega_b=omega_b,
                        E_a=I_a,
                        E_b=-I_b,
                        tau0=tau0,
                        K=K,
                        Kp=Kp)


def _check_nome(tau):
    if tau.imag <= config.get('ellipkit', 'tol_imtau'):
        raise NonconvergentNome("Im tau too small: " + str(tau))
    if np.exp(-PI * tau.imag) > config.get('ellipkit', 'theta_max_nome'):
        raise NonconvergentNome("|q| above the admitted nome at tau = " +
                                str(tau))


def theta(z, tau, order=0):
    """
    ``order``-th z-derivative of ``theta(z, tau)``, order in 0..3.

    The series is centred at its largest term and truncated when the terms
    drop below ``theta_rtol`` times the largest one, with at most
    ``theta_max_terms`` terms on each side.
    """
    if order not in (0, 1, 2, 3):
        raise ValueError("theta derivative order must be in 0..3")
    z = complex(z)
    tau = complex(tau)
    _check_nome(tau)
    nterms = config.get('ellipkit', 'theta_max_terms')
    rtol = config.get('ellipkit', 'theta_rtol')

    centre = int(round(-z.imag / tau.imag))
    n = np.arange(centre - nterms, centre + nterms + 1)
    expo = 1j * PI * tau * n * n + TWO_PI_I * z * n
    envelope = np.exp(expo.real - expo.real.max())
    if max(envelope[0], envelope[-1]) >= rtol:
        raise NonconvergentNome("theta series not converged within " +
                                str(nterms) + " terms")
    keep = envelope >= rtol * 1e-3
    terms = np.exp(expo[keep])
    if order:
        terms = terms * (TWO_PI_I * n[keep])**order
    return complex(np.sum(terms))


def theta_logderiv(z, tau, deriv=0):
    """
    ``theta'/theta`` at `z` (deriv=0) or its first/second derivative.

    The argument is reduced by ``z -> z - m*tau - n`` first, using
    ``L(z + tau) = L(z) - 2*pi*i``; the derivatives are doubly periodic.
    NearThetaZero is raised at zeros of theta (``1/2 + tau/2`` mod lattice).
    """
    z = complex(z)
    tau = complex(tau)
    m = int(round(z.imag / tau.imag))
    z = z - m * tau
    n = int(round(z.real))
    z = z - n
    t0 = theta(z, tau, 0)
    if abs(t0) < config.get('ellipkit', 'tol_zero'):
        raise NearThetaZero("theta vanishes at " + str(z) + " (reduced)")
    L = theta(z, tau, 1) / t0
    if deriv == 0:
        return L - TWO_PI_I * m
    t2 = theta(z, tau, 2) / t0
    if deriv == 1:
        return t2 - L * L
    if deriv == 2:
        t3 = theta(z, tau, 3) / t0
        return t3 - 3 * L * t2 + 2 * L**3
    raise ValueError("theta_logderiv supports derivative orders 0..2")


class JacobiKernel(object):
    """
    Jacobi sn, cn, dn of a fixed modulus `k` through theta quotients with
    ``tau' = iK'/K`` and ``z = u/(2K)``:

        sn = -i e^{i pi z} theta(0) theta(z + 1/2 + tau'/2)
             / (theta(tau'/2) theta(z + 1/2))

    `u` is reduced modulo ``(4K, 4iK')`` before evaluation. ``k = 0`` falls
    back to the circular functions, ``k**2 = 1`` to the hyperbolic ones.
    """

    def __init__(self, k):
        self.k = complex(k)
        self.m = self.k * self.k
        tol = config.get('ellipkit', 'tol_degenerate')
        if abs(self.m) < tol:
            self.kind = 'circular'
            self.K, self.Kp = PI / 2 + 0j, None
        elif abs(self.m - 1) < tol:
            self.kind = 'hyperbolic'
            self.K, self.Kp = None, PI / 2 + 0j
        else:
            self.kind = 'elliptic'
            self.K = _K_of_m(self.m)
            self.Kp = _K_of_m(1 - self.m)
            self.tau = 1j * self.Kp / self.K
            _check_nome(self.tau)
            self.th0 = theta(0, self.tau)
            self.th_half = theta(0.5, self.tau)
            self.th_tau2 = theta(self.tau / 2, self.tau)

    def nearest_pole(self, u):
        """
        Nearest point of ``2mK + (2n+1)iK'`` to `u` and its distance
        """
        if self.kind == 'circular':
            return None, np.inf
        if self.kind == 'hyperbolic':
            n = np.floor((u.imag - self.Kp.real) / (2 * self.Kp.real) + 0.5)
            pole = u.real + 1j * (2 * n + 1) * self.Kp.real
            return pole, abs(u - pole)
        e1 = 2 * self.K
        e2 = 2j * self.Kp
        a, b = real_coordinates(u, e1, e2)
        a0 = round(a)
        b0 = np.floor(b) + 0.5
        best = None
        for da in (-1, 0, 1):
            for db in (-1, 0, 1):
                pole = (a0 + da) * e1 + (b0 + db) * e2
                d = abs(u - pole)
                if best is None or d < best[1]:
                    best = (pole, d)
        return best

    def _check_pole(self, u, tol_pole):
        pole, d = self.nearest_pole(u)
        if d < tol_pole:
            raise PoleProximity("u = " + str(u) + " is a pole of sn",
                                pole=pole)

    def _reduce(self, u):
        e1 = 4 * self.K
        e2 = 4j * self.Kp
        a, b = real_coordinates(u, e1, e2)
        return u - np.floor(a + 0.5) * e1 - np.floor(b + 0.5) * e2

    def sncndn(self, u, tol_pole=None):
        """
        Returns the tuple ``(sn, cn, dn)`` at `u`.
        """
        tol_pole = config.pick('ellipkit', 'tol_pole', tol_pole)
        u = complex(u)
        self._check_pole(u, tol_pole)
        if self.kind == 'circular':
            return cmath.sin(u), cmath.cos(u), 1 + 0j
        if self.kind == 'hyperbolic':
            sech = 1 / cmath.cosh(u)
            return cmath.tanh(u), sech, sech
        tau = self.tau
        z = self._reduce(u) / (2 * self.K)
        phase = cmath.exp(1j * PI * z)
        den = self.th_tau2 * theta(z + 0.5, tau)
        sn = -1j * phase * self.th0 * theta(z + 0.5 + tau / 2, tau) / den
        cn = phase * self.th_half * theta(z + tau / 2, tau) / den
        dn = self.th_half * theta(z, tau) * self.th_tau2 / (self.th0 * den)
        return sn, cn, dn

    def sn(self, u, tol_pole=None):
        tol_pole = config.pick('ellipkit', 'tol_pole', tol_pole)
        u = complex(u)
        self._check_pole(u, tol_pole)
        if self.kind == 'circular':
            return cmath.sin(u)
        if self.kind == 'hyperbolic':
            return cmath.tanh(u)
        tau = self.tau
        e1 = 4 * self.K
        e2 = 2j * self.Kp
        a, b = real_coordinates(u, e1, e2)
        z = (u - np.floor(a + 0.5) * e1 - np.floor(b + 0.5) * e2) / (2 *
                                                                     self.K)
        return (-1j * cmath.exp(1j * PI * z) * self.th0 *
                theta(z + 0.5 + tau / 2, tau) /
                (self.th_tau2 * theta(z + 0.5, tau)))


@functools.lru_cache(maxsize=64)
def kernel(k):
    """
    Cached JacobiKernel of modulus `k`
    """
    return JacobiKernel(k)


def jacobi_sn(u, k, tol_pole=None):
    """
    Jacobi sn(u; k).

    Raises PoleProximity within `tol_pole` of ``2mK + (2n+1)iK'``; the
    exception carries the pole.
    """
    return kernel(complex(k)).sn(u, tol_pole)


def jacobi_cn_dn(u, k, tol_pole=None):
    """
    Jacobi cn and dn at `u`, same reduction and pole rule as `jacobi_sn`
    """
    sn, cn, dn = kernel(complex(k)).sncndn(u, tol_pole)
    return cn, dn


def w_branch(A, p, tol_branch=None):
    """
    ``w(A, z)`` on the sheet of `p`, with cuts ``[k, 1]`` and ``[-1, -k]``.

    The upper sheet is ``(1 - z**2) sqrt((z - k)/(z - 1)) sqrt((z + k)/(z + 1))``
    with principal roots, so that ``w(A, 0) = k`` there; the lower sheet is
    its negative.

    Parameters
    ----------

    * A : complex
        modulus squared
    * p : SheetedPoint
        the point and its sheet

    Returns
    -------

    complex :
        w on the chosen sheet
    """
    tol_branch = config.pick('ellipkit', 'tol_branch', tol_branch)
    if p.sheet not in SHEETS:
        raise ValueError("sheet must be one of " + str(SHEETS))
    z = complex(p.z)
    k = branch_sqrt(A)
    for bp in (1, -1, k, -k):
        if abs(z - bp) < tol_branch:
            raise BranchPoint("z = " + str(z) + " is a branch point of w")
    w = (1 - z * z) * cmath.sqrt((z - k) / (z - 1)) * cmath.sqrt(
        (z + k) / (z + 1))
    if p.sheet == 'lower':
        return -w
    return w
