"""
Boutroux equations

    Re(e^{i phi} I_a(A)) = Re(e^{i phi} I_b(A)) = 0

and the trajectory ``phi -> A_phi``. Newton works in ``(Re A, Im A)`` with
the exact Jacobian assembled from the periods; angles away from the ends
are reached by continuation from the nearest end, where log-corrected
seeds are available.
"""
import logging
from collections import namedtuple

import numpy as np
from scipy.optimize import brentq

from . import config
from .ellipkit import branch_sqrt, cycle_I, periods_omega
from .errors import DegenerateModulus, NoConvergence

logger = logging.getLogger(__name__)

HALF_PI = np.pi / 2
LOG_CONSTANT = 1 + 4 * np.log(2)

BoutrouxPoint = namedtuple('BoutrouxPoint',
                           ['phi', 'A', 'residual_norm', 'newton_iters'])
Trajectory = namedtuple('Trajectory', ['points', 'violations'])


def boutroux_residual(A, phi):
    """
    Returns ``(Re(e^{i phi} I_a(A)), Re(e^{i phi} I_b(A)))``
    """
    I_a, I_b = cycle_I(A)
    rot = np.exp(1j * phi)
    return (rot * I_a).real, (rot * I_b).real


def boutroux_jacobian(A, phi, normalized=False):
    """
    Exact Jacobian of the residuals with respect to ``(Re A, Im A)``.

    ``dI/dA = omega/2`` and the Cauchy-Riemann relations give the rows
    ``[Re p, -Im p]`` with ``p = e^{i phi} omega/2``. The determinant is
    ``|omega_a|**2 Im(tau0) / 4``, independent of `phi`; with
    ``normalized=True`` the residuals are divided by ``cos(phi)`` and the
    determinant picks up the factor ``1 + tan(phi)**2``.

    Raises DegenerateModulus at A = 0 or 1.
    """
    A = complex(A)
    if abs(A) < config.get('ellipkit', 'tol_degenerate'):
        raise DegenerateModulus("The Jacobian is singular at A = 0")
    omega_a, omega_b = periods_omega(A)
    rot = np.exp(1j * phi)
    if normalized:
        rot = rot / np.cos(phi)
    p = rot * omega_a / 2
    q = rot * omega_b / 2
    return np.array([[p.real, -p.imag], [q.real, -q.imag]])


def _log_radius(delta):
    """
    Root of ``r (1 + 4 log 2 - log r) = 4 sin(delta)``, ``0 < r < 16``
    """
    target = 4 * np.sin(delta)
    return brentq(lambda r: r * (LOG_CONSTANT - np.log(r)) - target, 1e-300,
                  16.0, xtol=1e-300, rtol=4 * np.finfo(float).eps)


def small_angle_modulus(phi):
    """
    Log-corrected small-angle law ``A = r (sin(phi) + i cos(phi))`` with
    ``r (1 + 4 log 2 - log r) = 4 sin(phi)``; it follows from
    ``I_a = pi A (1 + O(A))`` and
    ``I_b = (i/2)(4 + A log A - (1 + 4 log 2) A + ...)``.

    `phi` must be in ``(0, pi/2)``.
    """
    r = _log_radius(phi)
    return r * complex(np.sin(phi), np.cos(phi))


def right_angle_modulus(phi):
    """
    Counterpart of `small_angle_modulus` at the other end: with
    ``phit = phi - pi/2 < 0``, ``A = 1 + r (sin(phit) + i cos(phit))`` and
    ``r (1 + 4 log 2 - log r) = 4 |sin(phit)|``.
    """
    phit = phi - HALF_PI
    r = _log_radius(-phit)
    return 1 + r * complex(np.sin(phit), np.cos(phit))


def seed(phi):
    """
    Leading-order seeds: for ``phi < pi/4``
    ``A = -4 phi**2/log(phi) - 4i phi/log(phi)``; otherwise, with
    ``phit = phi - pi/2``,
    ``A = 1 + 4 phit**2/log|phit| + 4i phit/log|phit|``.
    """
    if phi < np.pi / 4:
        lg = np.log(phi)
        return complex(-4 * phi**2 / lg, -4 * phi / lg)
    phit = phi - HALF_PI
    lg = np.log(abs(phit))
    return complex(1 + 4 * phit**2 / lg, 4 * phit / lg)


def _newton(A, phi, tol, max_iters):
    """
    Damped Newton iteration; returns ``(A, residual_norm, iterations)``.
    """
    res = np.array(boutroux_residual(A, phi))
    norm = np.abs(res).max()
    for it in range(max_iters + 1):
        if norm < tol:
            logger.debug("Newton at phi=%.6g converged in %d iterations", phi,
                         it)
            return A, norm, it
        if it == max_iters:
            break
        J = boutroux_jacobian(A, phi)
        delta = np.linalg.solve(J, -res)
        step = complex(delta[0], delta[1])
        lam = 1.0
        for _ in range(40):
            trial = A + lam * step
            try:
                r_trial = np.array(boutroux_residual(trial, phi))
            except DegenerateModulus:
                r_trial = None
            if r_trial is not None and np.all(np.isfinite(r_trial)):
                n_trial = np.abs(r_trial).max()
                if n_trial < norm:
                    break
            lam /= 2
        else:
            break
        A, res, norm = trial, r_trial, n_trial

    raise NoConvergence(
        "Newton did not converge at phi = " + str(phi) + " (residual " +
        str(norm) + ")",
        phi=phi)


def _march(phi, A, targets, tol, max_iters):
    """
    Predictor-corrector continuation from the solved point ``(phi, A)``
    through `targets` (monotone, all on the same side of `phi`).
    """
    h = config.get('boutroux', 'continuation_step')
    max_step = config.get('boutroux', 'max_step')
    min_step = config.get('boutroux', 'min_step')
    prev = None
    norm, iters = np.abs(boutroux_residual(A, phi)).max(), 0
    out = []
    for target in targets:
        while phi != target:
            direction = np.sign(target - phi)
            if abs(target - phi) <= h:
                phi_new = target
            else:
                phi_new = phi + direction * h
            if prev is None:
                A_pred = A
            else:
                A_pred = A + (A - prev[1]) * (phi_new - phi) / (phi - prev[0])
            try:
                A_new, norm_new, iters_new = _newton(A_pred, phi_new, tol,
                                                     max_iters)
            except (NoConvergence, DegenerateModulus):
                h /= 2
                logger.debug("continuation step halved to %.3g at phi=%.6g",
                             h, phi)
                if h < min_step:
                    raise NoConvergence(
                        "Continuation stalled at phi = " + str(phi_new),
                        phi=phi_new)
                continue
            prev = (phi, A)
            phi, A, norm, iters = phi_new, A_new, norm_new, iters_new
            h = min(1.5 * h, max_step)
        out.append(BoutrouxPoint(phi, A, norm, iters))
    return out


def _reduce(phi):
    """
    Maps `phi` to ``[0, pi/2]`` using ``A_{phi+pi} = A_phi`` and
    ``A_{-phi} = conj(A_phi)``; returns the reduced angle and whether
    the result must be conjugated.
    """
    red = phi - np.pi * np.floor(phi / np.pi + 0.5)
    if red < 0:
        return -red, True
    return red, False


def _check_point(point):
    """
    Messages for the bounds ``|A| < 2`` and ``0 <= Re A <= 1`` that `point`
    breaks, each also logged as a warning
    """
    A = point.A
    out = []
    if abs(A) >= 2:
        out.append("|A| = %.4g >= 2 at phi = %.6g" % (abs(A), point.phi))
    if not 0 <= A.real <= 1:
        out.append("Re A = %.6g outside [0, 1] at phi = %.6g" %
                   (A.real, point.phi))
    for msg in out:
        logger.warning(msg)
    return out


def _solve_reduced(phi, side, tol, max_iters):
    phi_min = config.get('boutroux', 'phi_min')
    phi_small = config.get('boutroux', 'phi_small')
    if phi < phi_min:
        logger.info("phi within phi_min of 0: A = 0 exactly")
        return BoutrouxPoint(phi, 0j, 0.0, 0)
    if HALF_PI - phi < phi_min:
        logger.info("phi within phi_min of pi/2: A = 1 exactly")
        return BoutrouxPoint(phi, 1 + 0j, 0.0, 0)

    if side is None:
        side = 'low' if phi <= np.pi / 4 else 'high'
    if side == 'low':
        start = min(phi, phi_small)
        A0 = small_angle_modulus(start)
    elif side == 'high':
        start = max(phi, HALF_PI - phi_small)
        A0 = right_angle_modulus(start)
    else:
        raise ValueError("side must be 'low', 'high' or None")

    A, norm, iters = _newton(A0, start, tol, max_iters)
    if start == phi:
        return BoutrouxPoint(phi, A, norm, iters)
    return _march(start, A, [phi], tol, max_iters)[-1]


def solve_A(phi, side=None, tol_boutroux=None, max_iters=None):
    """
    Solves the Boutroux equations at `phi`.

    Parameters
    ----------

    * phi : float
        any real angle; it is reduced modulo pi and reflected before solving
    * side : str or None
        ``'low'`` continues from the end ``phi = 0``, ``'high'`` from
        ``phi = pi/2``; None picks the nearest end. Both must give the same
        value, which is how uniqueness is cross-checked.
    * tol_boutroux : float or None
        stopping tolerance on the max of the two residuals
    * max_iters : int or None
        Newton iterations per corrector

    Returns
    -------

    BoutrouxPoint :
        `phi` as given, ``A_phi``, the residual and the iterations of the
        last corrector. Within ``phi_min`` of the ends the exact values 0
        and 1 are returned.
    """
    tol = config.pick('boutroux', 'tol_boutroux', tol_boutroux)
    max_iters = config.pick('boutroux', 'max_iters', max_iters)
    red, conjugate = _reduce(phi)
    point = _solve_reduced(red, side, tol, max_iters)
    A = point.A.conjugate() if conjugate else point.A
    point = BoutrouxPoint(phi, A, point.residual_norm, point.newton_iters)
    _check_point(point)
    return point


def trajectory(n=None, tol_boutroux=None, max_iters=None):
    """
    Samples ``A_phi`` at ``phi_j = (pi/2) j/(n-1)``, ``j = 0..n-1``, by
    continuation, and mirrors the samples to ``[-pi/2, 0)`` by conjugation.

    Returns a Trajectory whose points are sorted by increasing phi
    (``2n - 1`` of them); `violations` lists the points breaking
    ``|A| < 2``, ``0 <= Re A <= 1`` or the strict growth of ``Re A``, empty
    on a healthy run.
    """
    n = config.pick('output', 'trajectory_points', n)
    if n < 3:
        raise ValueError("trajectory needs at least 3 points")
    tol = config.pick('boutroux', 'tol_boutroux', tol_boutroux)
    max_iters = config.pick('boutroux', 'max_iters', max_iters)
    phi_small = config.get('boutroux', 'phi_small')

    phis = HALF_PI * np.arange(n) / (n - 1)
    phis[-1] = HALF_PI
    upper = [BoutrouxPoint(0.0, 0j, 0.0, 0)]
    inner = phis[1:-1]

    near_low = [p for p in inner if p < phi_small]
    near_high = [p for p in inner if p > HALF_PI - phi_small]
    middle = [p for p in inner if phi_small <= p <= HALF_PI - phi_small]

    for p in near_low:
        upper.append(_solve_reduced(p, 'low', tol, max_iters))
    if middle:
        A, norm, iters = _newton(small_angle_modulus(phi_small), phi_small,
                                 tol, max_iters)
        upper.extend(_march(phi_small, A, middle, tol, max_iters))
    for p in near_high:
        upper.append(_solve_reduced(p, 'high', tol, max_iters))
    upper.append(BoutrouxPoint(HALF_PI, 1 + 0j, 0.0, 0))

    violations = []
    for point in upper:
        violations.extend(_check_point(point))
    re_A = np.array([p.A.real for p in upper])
    for i in np.flatnonzero(np.diff(re_A) <= 0):
        msg = ("Re A is not strictly increasing at phi = %.6g" %
               upper[i + 1].phi)
        logger.warning(msg)
        violations.append(msg)

    lower = [
        BoutrouxPoint(-p.phi, p.A.conjugate(), p.residual_norm,
                      p.newton_iters) for p in reversed(upper[1:])
    ]
    return Trajectory(points=lower + upper, violations=violations)


def sqrt_trajectory(traj):
    """
    ``(phi, A_phi^{1/2})`` along a trajectory, with ``Re A^{1/2} >= 0``.
    Occurrences of ``Re A^{1/2} > 1`` are logged, nothing is asserted.
    """
    out = []
    for p in traj.points:
        k = branch_sqrt(p.A)
        if k.real > 1:
            logger.info("Re A^(1/2) = %.6g > 1 at phi = %.6g", k.real, p.phi)
        out.append((p.phi, k))
    return out


def plot_trajectory(traj, path):
    """
    SVG of the closed loop traced by ``A_phi`` (solid) and ``A_phi^{1/2}``
    (dashed) for ``phi`` in ``[-pi/2, pi/2]``
    """
    import matplotlib.pyplot as plt

    from .output import save_svg

    A = np.array([p.A for p in traj.points])
    k = np.array([v for _, v in sqrt_trajectory(traj)])
    fig, ax = plt.subplots(figsize=(6, 6))
    ax.plot(A.real, A.imag, color='black', linewidth=1.2, label='A')
    ax.plot(k.real, k.imag, '--', color='gray', linewidth=1.0,
            label='A^(1/2)')
    ax.plot([0, 1], [0, 0], 'o', color='black', markersize=3)
    ax.set_aspect('equal')
    ax.legend(loc='upper left')
    save_svg(fig, path)
