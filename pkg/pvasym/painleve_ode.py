"""
Numerical integration of Painleve V along complex rays ``x = e^{i phi} t``.

The integration variables are ``(y, y')``; poles of ``y`` and the points
where ``y`` is 0 or 1 are stepped around by semicircles in the t plane.
This module is the independent check of the asymptotic formulas.
"""
import logging
from collections import namedtuple

import numpy as np
from scipy.integrate import RK45, solve_ivp

from . import config
from .elliptic_rep import (b0, b0_prime, in_strip, make_strip, nearest_Q,
                           psi0, y_leading_prime)
from .ellipkit import kernel
from .error_term import (L_function, a_from_y, corrected_state,
                         correction_profile)
from .errors import (MaxSteps, NearThetaZero, PoleProximity, SingularPoint,
                     SingularY, StepUnderflow, UnitValue)
from .output import write_csv
from .utils import Arc, Segment

logger = logging.getLogger(__name__)

RaySolutionState = namedtuple('RaySolutionState',
                              ['t', 'x', 'y', 'yprime', 'detour'])
Diagnostics = namedtuple('Diagnostics', ['a_phi', 'b', 'L'])
PsiBView = namedtuple('PsiBView', ['psi', 'dpsi', 'b'])
ComparisonSample = namedtuple('ComparisonSample', [
    't', 'x', 'psi_ode', 'psi_asym', 'deviation', 'b_ode', 'b_asym',
    'deviation_b', 'deviation_leading', 'dist_Q', 'used', 'corrected',
    'tail_bound'
])
ComparisonReport = namedtuple('ComparisonReport', [
    'phi', 'r0', 'r1', 'correction', 'seeded_with_correction', 'samples',
    'sup', 'sup_b', 'early', 'late', 'slope', 'slope_b', 'slope_leading'
])

TRAJECTORY_HEADER = [
    't: ray parameter, x = exp(i phi) t (complex on detours)',
    're_y, im_y: Painleve V solution y(x)',
    're_yp, im_yp: dy/dx',
    're_aphi, im_aphi: a_phi from y and dy/dx',
    're_b, im_b: b = x (a_phi - A_phi)',
    'detour_flag: 1 if the sample lies on a semicircle around a pole',
]


def pv_rhs(x, y, yprime, theta, tol_singular=None):
    """
    ``y''`` of Painleve V:

        y'' = (1/(2y) + 1/(y - 1)) y'**2 - y'/x
              + (y - 1)**2/(8 x**2) (p**2 y - m**2/y)
              + (1 - t0 - t1) y/x - y (y + 1)/(2(y - 1))

    with ``p = t0 - t1 + tinf`` and ``m = t0 - t1 - tinf``.
    """
    tol = config.pick('painleve_ode', 'tol_singular', tol_singular)
    if abs(x) < tol or abs(y) < tol or abs(y - 1) < tol:
        raise SingularPoint("Painleve V is singular at x = 0, y = 0, y = 1")
    dt = theta.theta0 - theta.theta1
    pp = dt + theta.theta_inf
    mm = dt - theta.theta_inf
    return ((0.5 / y + 1 / (y - 1)) * yprime * yprime - yprime / x +
            (y - 1)**2 / (8 * x * x) * (pp * pp * y - mm * mm / y) +
            (1 - theta.theta0 - theta.theta1) * y / x - y * (y + 1) /
            (2 * (y - 1)))


def _system(path, rot, theta):

    def fun(s, Y):
        t, dt = path.at(s)
        x = rot * t
        dx = rot * dt
        return np.array([Y[1], pv_rhs(x, Y[0], Y[1], theta)]) * dx

    return fun


def _events(pole_threshold, zero_threshold):
    big = np.log(pole_threshold)
    small = np.log(zero_threshold)

    def pole(s, Y):
        return np.log(abs(Y[0]) + 1e-300) - big

    def one(s, Y):
        return np.log(abs(Y[0] - 1) + 1e-300) - small

    def zero(s, Y):
        return np.log(abs(Y[0]) + 1e-300) - small

    pole.terminal, pole.direction = True, 1
    one.terminal, one.direction = True, -1
    zero.terminal, zero.direction = True, -1
    return [pole, one, zero]


def _check_start(y, pole_threshold, zero_threshold):
    if (abs(y) > pole_threshold or abs(y) < zero_threshold or
            abs(y - 1) < zero_threshold):
        raise SingularPoint("Start value y = " + str(y) +
                            " is at a singular value")


def _arc_for(centre, radius, direction, side):
    """
    Semicircle from ``centre - direction r`` to ``centre + direction r``
    above (`side` = 1) or below (`side` = -1) the line
    """
    if direction > 0:
        return Arc(centre, radius, np.pi, np.pi - side * np.pi)
    return Arc(centre, radius, 0.0, side * np.pi)


def _arc_taps(arc, taus, direction, side):
    """
    ``s`` on the arc for the samples whose real part falls strictly inside
    it
    """
    c, r = arc.centre, arc.radius
    out = []
    for tau in taus:
        if abs(tau - c.real) < r:
            th = np.arccos((tau - c.real) / r)
            if side < 0:
                th = 2 * np.pi - th if direction > 0 else -th
            out.append(arc.s_at(th))
    return out


def integrate_ray(start,
                  phi,
                  t_end,
                  theta,
                  t_eval=None,
                  rtol=None,
                  atol=None,
                  method=None,
                  pole_threshold=None,
                  zero_threshold=None,
                  detour_radius=None,
                  detour_attempts=None,
                  max_steps=None):
    """
    Integrates Painleve V from `start` along ``Im t = Im t_start`` up to
    ``Re t = t_end`` (either direction).

    Parameters
    ----------

    * start : RaySolutionState
        initial values; ``t`` may be complex
    * phi : float
        the ray angle
    * t_end : float
    * theta : ThetaParams
    * t_eval : sequence of float or None
        the real parts of t where states are emitted; if None, every
        accepted step is emitted

    Returns
    -------

    list of RaySolutionState :
        in integration order; samples falling on a detour are reported at
        the point of the semicircle with the same real part, with
        ``detour=True``

    Raises StepUnderflow when a pole cannot be passed on either side and
    MaxSteps when the right-hand side evaluations exceed `max_steps`.
    """
    rtol = config.pick('painleve_ode', 'rtol', rtol)
    atol = config.pick('painleve_ode', 'atol', atol)
    method = config.pick('painleve_ode', 'method', method)
    pole_threshold = config.pick('painleve_ode', 'pole_threshold',
                                 pole_threshold)
    zero_threshold = config.pick('painleve_ode', 'zero_threshold',
                                 zero_threshold)
    detour_radius = config.pick('painleve_ode', 'detour_radius',
                                detour_radius)
    detour_attempts = config.pick('painleve_ode', 'detour_attempts',
                                  detour_attempts)
    max_steps = config.pick('painleve_ode', 'max_steps', max_steps)

    rot = np.exp(1j * phi)
    t0 = complex(start.t)
    y0 = t0.imag
    direction = 1 if t_end >= t0.real else -1
    _check_start(start.y, pole_threshold, zero_threshold)
    events = _events(pole_threshold, zero_threshold)
    solver_kw = dict(method=method, rtol=rtol, atol=atol)

    taus = None
    if t_eval is not None:
        taus = sorted((float(t) for t in t_eval
                       if (t - t0.real) * direction >= 0 and
                       (t_end - t) * direction >= 0),
                      key=lambda t: direction * t)

    def state(t, Y, detour=False):
        return RaySolutionState(t=complex(t),
                                x=rot * t,
                                y=complex(Y[0]),
                                yprime=complex(Y[1]),
                                detour=detour)

    out = []
    Y = np.array([start.y, start.yprime], dtype=complex)
    cur = t0
    nfev = 0
    while (t_end - cur.real) * direction > 0:
        line = Segment(cur, complex(t_end, y0))
        taps = None
        if taus is not None:
            taps = [
                abs(tau - cur.real)
                for tau in taus
                if (tau - cur.real) * direction >= 0
            ]
        sol = solve_ivp(_system(line, rot, theta), (0.0, line.length),
                        Y,
                        t_eval=None if taps is None else np.unique(
                            np.append(taps, line.length)),
                        events=events,
                        dense_output=True,
                        **solver_kw)
        nfev += sol.nfev
        if nfev > max_steps:
            raise MaxSteps("Painleve V integration exceeded " +
                           str(max_steps) + " evaluations")
        if sol.status == -1:
            raise StepUnderflow("Integration failed at t = " +
                                str(line.at(sol.t[-1])[0]) + ": " +
                                sol.message)
        for s, col in zip(sol.t, sol.y.T):
            if taps is None or any(abs(s - ts) < 1e-12 for ts in taps):
                out.append(state(line.at(s)[0], col))
        if sol.status == 0:
            Y = sol.y[:, -1]
            break

        s_event = min(te[0] for te in sol.t_events if len(te))
        centre = line.at(s_event)[0]
        radius = min(detour_radius, s_event)
        if radius < 1e-3 * detour_radius:
            raise StepUnderflow("No room to detour around t = " +
                                str(centre))
        s_back = s_event - radius
        Y_back = sol.sol(s_back)
        # samples past the back-off point are recomputed on the arc
        t_back = line.at(s_back)[0].real
        out = [st for st in out if (st.t.real - t_back) * direction <= 0]
        passed = None
        for side in (1, -1)[:detour_attempts]:
            arc = _arc_for(centre, radius, direction, side)
            arc_taps = [] if taus is None else _arc_taps(
                arc, taus, direction, side)
            sol2 = solve_ivp(_system(arc, rot, theta), (0.0, arc.length),
                             Y_back,
                             t_eval=np.unique(np.append(arc_taps,
                                                        arc.length)),
                             events=events,
                             **solver_kw)
            nfev += sol2.nfev
            if sol2.status == 0:
                passed = (arc, sol2, arc_taps)
                break
            logger.info("detour %s t = %s failed",
                        'above' if side > 0 else 'below', centre)
        if passed is None:
            raise StepUnderflow("Pole at t = " + str(centre) +
                                " cannot be passed")
        arc, sol2, arc_taps = passed
        logger.debug("detour around t = %s with radius %.3g", centre, radius)
        for s, col in zip(sol2.t, sol2.y.T):
            if taus is None or any(abs(s - ts) < 1e-12 for ts in arc_taps):
                out.append(state(arc.at(s)[0], col, detour=True))
        Y = sol2.y[:, -1]
        cur = complex(arc.at(arc.length)[0].real, y0)
    return out


def fixed_steps(x0, x1, Y0, theta, n):
    """
    ``n`` equal Dormand-Prince steps (fifth-order weights) of Painleve V
    along the segment from `x0` to `x1`; returns ``(y, y')`` at `x1`.
    """
    A, B, C = RK45.A, RK45.B, RK45.C
    h = (x1 - x0) / n
    Y = np.array(Y0, dtype=complex)

    def f(x, Y):
        return np.array([Y[1], pv_rhs(x, Y[0], Y[1], theta)])

    x = complex(x0)
    for _ in range(n):
        K = np.zeros((len(C), 2), dtype=complex)
        for i in range(len(C)):
            K[i] = f(x + C[i] * h, Y + h * np.dot(A[i, :i], K[:i]))
        Y = Y + h * np.dot(B, K)
        x = x + h
    return Y


def diagnostics(s, phi, theta, A):
    """
    ``(a_phi, b, L)`` of a state: ``a_phi`` from ``y`` and ``y'`` (with
    ``y* = e^{i phi} y'``), ``b = x (a_phi - A)`` and L in
    ``psi = (y + 1)/(y - 1)``.

    Arguments
    ---------
    s : RaySolutionState
    phi : float
        unused beyond documenting the ray, as ``x`` already carries it
    theta : ThetaParams
    A : complex
        the modulus of the ray
    """
    tol = config.get('painleve_ode', 'tol_singular')
    if abs(s.y) < tol or abs(s.y - 1) < tol:
        raise SingularY("y must avoid 0 and 1")
    a = a_from_y(s.x, s.y, s.yprime, theta)
    view = psi_b_view(s, A, theta, a=a)
    return Diagnostics(a_phi=a,
                       b=view.b,
                       L=L_function(s.x, view.psi, view.dpsi, theta))


def psi_b_view(s, A, theta, a=None):
    """
    ``(psi, psi', b)`` of a state
    """
    if a is None:
        a = a_from_y(s.x, s.y, s.yprime, theta)
    return PsiBView(psi=(s.y + 1) / (s.y - 1),
                    dpsi=-2 * s.yprime / (s.y - 1)**2,
                    b=s.x * (a - A))


def write_trajectory_csv(path, states, phi, theta, A):
    """
    Writes the states to `path` with the columns of `TRAJECTORY_HEADER`
    """
    rows = []
    for s in states:
        try:
            d = diagnostics(s, phi, theta, A)
            a, b = d.a_phi, d.b
        except SingularY:
            a = b = complex(np.nan, np.nan)
        t = s.t.real if not s.detour else s.t
        rows.append([
            np.real(t), s.y.real, s.y.imag, s.yprime.real, s.yprime.imag,
            a.real, a.imag, b.real, b.imag,
            int(s.detour)
        ])
    write_csv(path, TRAJECTORY_HEADER, [
        't', 're_y', 'im_y', 're_yp', 'im_yp', 're_aphi', 'im_aphi', 're_b',
        'im_b', 'detour_flag'
    ], rows)


def seed_state(t, p, theta, correction=True, result=None):
    """
    RaySolutionState at ``x = e^{i phi} t`` from the asymptotic
    representation, with or without the correction ``h``.

    `result` is a CorrectionResult at that point to seed from; without it
    the correction is computed here (strictly, so a far-field closure that
    does not converge raises TailNotConverged).
    """
    x = np.exp(1j * p.phi) * t
    if correction:
        cs = corrected_state(x, p, theta, result=result)
        y, yp = cs.y, cs.yp
    else:
        y, yp = y_leading_prime(x, p)
    return RaySolutionState(t=complex(t), x=x, y=y, yprime=yp, detour=False)


def _in_strip_start(p, r0, strip):
    rot = np.exp(1j * p.phi)
    step = 0.05 * min(abs(p.ell.omega_a), abs(p.ell.omega_b))
    for i in range(200):
        t = r0 + i * step
        if in_strip(rot * t, strip, p):
            return t
    raise SingularPoint("No seed point in the strip after t = " + str(r0))


def decay_slope(samples, field='deviation'):
    """
    Slope of ``log(field)`` against ``log t`` over the used samples, NaN
    with fewer than three of them
    """
    used = [s for s in samples if s.used and getattr(s, field) > 0]
    if len(used) < 3:
        return np.nan
    t = np.log([s.t for s in used])
    d = np.log([getattr(s, field) for s in used])
    return float(np.polyfit(t, d, 1)[0])


def _asymptotic_pair(x, p, h, chi):
    """
    ``(psi, b)`` of the representation at `x`; ``h = chi = 0`` gives the
    leading term
    """
    try:
        if h == 0:
            psi = psi0(x, p)
        else:
            psi = p.ell.k * kernel(p.ell.k).sn((x - p.x0) / 2 + h / 2)
        b = b0(x, p) + b0_prime(x, p) * h + chi
    except (PoleProximity, NearThetaZero, UnitValue):
        nan = complex(np.nan, np.nan)
        return nan, nan
    return psi, b


def compare_to_asymptotics(p, theta, r0, r1, n_samples=None,
                           correction=True):
    """
    Seeds the integrator from the asymptotic representation at ``t = r0``
    (moved forward into the strip if needed), integrates to ``t = r1`` and
    measures, at `n_samples` points, ``|psi_ode - psi_asym|`` with
    ``psi_ode = (y + 1)/(y - 1)`` and ``psi_asym = k sn((x - x0)/2 + h/2)``,
    and ``|b_ode - b_asym|`` with ``b_ode = x (a - A)`` and
    ``b_asym = b0 + b0' h + chi0`` (``h = chi0 = 0`` without correction).

    Samples where the correction did not converge fall back to the leading
    term and carry ``corrected=False``; the seed does likewise. Only
    samples inside the strip and off the detours count towards the sup;
    the distance to the nearest ``Q`` point is reported with every sample.

    Returns
    -------

    ComparisonReport :
        ``early`` and ``late`` are the mean deviations of psi over the first
        and last quarter of the range; ``slope`` and ``slope_b`` the decay
        exponents of the two deviations in t, ``slope_leading`` that of
        the deviation of psi from the leading term alone
    """
    n_samples = config.pick('painleve_ode', 'compare_samples', n_samples)
    strip = make_strip(p, excluded='P0Q')
    t_start = _in_strip_start(p, r0, strip)
    ts = np.linspace(t_start, r1, n_samples)
    nan = complex(np.nan, np.nan)
    if correction:
        profile = correction_profile(p, theta, ts)
        corrections = [(r.h, r.chi0, r.tail_bound) for r in profile]
    else:
        corrections = [(0j, 0j, 0.0)] * len(ts)
    seeded = correction and np.isfinite(corrections[0][0])
    if correction and not seeded:
        logger.warning("no converged correction at t = %.6g; seeding from "
                       "the leading term", t_start)
    start = seed_state(t_start, p, theta, seeded,
                       result=profile[0] if seeded else None)
    states = integrate_ray(start, p.phi, r1, theta, t_eval=ts)

    samples = []
    for st in states:
        i = int(np.argmin(np.abs(ts - st.t.real)))
        h, chi, tail = corrections[i]
        corrected = bool(correction and np.isfinite(h))
        if not corrected:
            h = chi = 0j
        x = st.x
        psi_asym, b_asym = _asymptotic_pair(x, p, h, chi)
        psi_ode = (st.y + 1) / (st.y - 1)
        try:
            b_ode = psi_b_view(st, p.ell.A, theta).b
        except ZeroDivisionError:
            b_ode = nan
        dev = abs(psi_ode - psi_asym)
        dev_lead = dev if h == 0 else abs(psi_ode -
                                          _asymptotic_pair(x, p, 0j, 0j)[0])
        dev_b = abs(b_ode - b_asym)
        used = (not st.detour and in_strip(x, strip, p) and
                np.isfinite(dev) and np.isfinite(dev_b))
        samples.append(
            ComparisonSample(t=float(ts[i]),
                             x=x,
                             psi_ode=psi_ode,
                             psi_asym=psi_asym,
                             deviation=dev,
                             b_ode=b_ode,
                             b_asym=b_asym,
                             deviation_b=dev_b,
                             deviation_leading=dev_lead,
                             dist_Q=nearest_Q(x, p)[1],
                             used=used,
                             corrected=corrected,
                             tail_bound=tail))
    devs = [s for s in samples if s.used]
    if not devs:
        logger.warning("no usable sample between t = %.6g and %.6g", r0, r1)
    span = r1 - t_start
    early = [s.deviation for s in devs if s.t <= t_start + 0.25 * span]
    late = [s.deviation for s in devs if s.t >= r1 - 0.25 * span]
    report = ComparisonReport(
        phi=p.phi,
        r0=t_start,
        r1=r1,
        correction=correction,
        seeded_with_correction=bool(seeded),
        samples=samples,
        sup=max(s.deviation for s in devs) if devs else np.nan,
        sup_b=max(s.deviation_b for s in devs) if devs else np.nan,
        early=float(np.mean(early)) if early else np.nan,
        late=float(np.mean(late)) if late else np.nan,
        slope=decay_slope(samples),
        slope_b=decay_slope(samples, 'deviation_b'),
        slope_leading=decay_slope(samples, 'deviation_leading'))
    logger.info("ode vs asymptotics on phi = %.4f: sup %.3g, early %.3g, "
                "late %.3g, slope %.3g", p.phi, report.sup, report.early,
                report.late, report.slope)
    return report
