"""
Error term of the elliptic representation.

With ``psi = k sn((x - x0)/2 + h/2)`` and ``b = b0 + b0' h + chi0``, the
correction ``h`` and ``chi0`` solve, to ``O(x**-2)``,

    h'    = -F1/x + c h/x + chi0/(2(A - psi0**2) x) + (F2 - F1**2/2)/x**2
    chi0' = (psi0**2 - A)(F1**2 - 2 F2)/x**2

where ``F1 = F1(psi0, b0)``, ``F2 = F2(psi0)`` and ``c = -dF1/dx``. Both
vanish at infinity along the ray. They are integrated backwards from a far
reference point ``X_ref`` on the ray, with semicircular detours above the
excluded disks.

Along the ray ``x h`` tends to a bounded function ``C - U(x)`` with
``U' = F1``; the constant ``C`` is fixed by asking the ``1/x`` part of the
equation for ``x h`` to have zero mean. The means are smooth-window
averages in ``dt`` over a stretch of the path next to ``X_ref``, and their
spread between the two halves of that stretch gives the tail bound.

All results are conditional on the supposition ``h << 1/x`` under which
the equations above hold.
"""
import logging
from collections import namedtuple

import numpy as np
from scipy.integrate import solve_ivp

from . import config
from .elliptic_rep import (b0, b0_prime, b0_second, excluded_points,
                           in_strip, make_strip, psi0_second, psi0_state)
from .ellipkit import kernel, theta_logderiv
from .errors import (MaxSteps, NumericalError, SingularDenominator,
                     SingularY, StripViolation, TailNotConverged)
from .utils import Arc, Segment, parallel

logger = logging.getLogger(__name__)

CONDITIONAL = 'conditional on h << 1/x'

CorrectionResult = namedtuple('CorrectionResult', [
    'x', 'chi0', 'h', 'tail_bound', 'quad_nodes', 'h_prime', 'h_quadrature',
    'conditional', 'h_triple'
],
                              defaults=(None, ))
CorrectedState = namedtuple(
    'CorrectedState',
    ['x', 'y', 'yp', 'ypp', 'psi', 'dpsi', 'h', 'h_prime', 'chi0'])
LResidual = namedtuple('LResidual', ['defect', 'identity_defect', 'L', 'a'])
BetaFit = namedtuple(
    'BetaFit',
    ['coefficients', 'expected', 'betas', 'values', 'windows', 'closure'])
Closure = namedtuple('Closure', ['C', 'chi_t', 'dC', 'dchi', 'xi_ref'])

# h_p, chi_p, Phi, Psi, U, J, K_p, K_psi, q_p, Psi0
_N_STATE = 10
# norm, 1 + c, (1 + c) U, m0, n, 1/(2(A - psi0**2))
_N_ACC = 6
# norm, x h_p, x Phi, x Psi
_N_MEAN = 4


def F_functions(psi, b, theta, A, tol_singular=None):
    """
    Returns ``(F0, G0, F1, F2)``:

        F0 = 2 T psi/(A - psi**2),      G0 = b/(2(A - psi**2)),
        F1 = F0 - G0 = (4 T psi - b)/(2(A - psi**2)),
        F2 = 2(2(t0 - t1) tinf psi + (t0 - t1)**2 + tinf**2)
             / ((1 - psi**2)(A - psi**2))

    with ``T = theta0 + theta1``. Raises SingularDenominator for
    ``psi**2`` at A or 1.
    """
    tol = config.pick('error_term', 'tol_singular', tol_singular)
    d_A = A - psi * psi
    d_1 = 1 - psi * psi
    if abs(d_A) < tol or abs(d_1) < tol:
        raise SingularDenominator("psi**2 is at A or 1: " + str(psi))
    T = theta.theta0 + theta.theta1
    dt = theta.theta0 - theta.theta1
    F0 = 2 * T * psi / d_A
    G0 = b / (2 * d_A)
    F2 = 2 * (2 * dt * theta.theta_inf * psi + dt * dt +
              theta.theta_inf**2) / (d_1 * d_A)
    return F0, G0, F0 - G0, F2


def F1_psi(psi, b, theta, A):
    """
    Partial derivative of F1 in psi
    """
    T = theta.theta0 + theta.theta1
    d_A = A - psi * psi
    return 2 * T / d_A + (4 * T * psi - b) * psi / d_A**2


_Local = namedtuple(
    '_Local',
    ['psi', 'dpsi', 'b', 'db', 'F1', 'F2', 'coef', 'm0', 'n', 'inv2'])


class _Field(object):
    """
    Coefficients of the correction equations at a point of the plane
    """

    def __init__(self, p, theta):
        self.p = p
        self.theta = theta
        self.A = p.ell.A
        self.rot = np.exp(1j * p.phi)

    def local(self, xi):
        p, A = self.p, self.A
        psi, dpsi = psi0_state(xi, p)
        b, db = b0(xi, p), b0_prime(xi, p)
        _, _, F1, F2 = F_functions(psi, b, self.theta, A)
        inv2 = 1 / (2 * (A - psi * psi))
        coef = db * inv2 - F1_psi(psi, b, self.theta, A) * dpsi
        m0 = F2 - 0.5 * F1 * F1
        n = (psi * psi - A) * (F1 * F1 - 2 * F2)
        return _Local(psi, dpsi, b, db, F1, F2, coef, m0, n, inv2)

    def h_slope(self, xi, h, chi0, loc=None):
        if loc is None:
            loc = self.local(xi)
        return (-loc.F1 / xi + loc.coef * h / xi + chi0 * loc.inv2 / xi +
                loc.m0 / xi**2)


def _clusters(points, y0, rho):
    """
    Groups the excluded points that the line ``Im t = y0`` passes within
    `rho` of into detour circles ``(m, r)``, centred on the line at ``m``,
    that keep every excluded point at distance at least `rho` from the arc
    and do not overlap each other. Returned by decreasing ``m``.
    """
    pts = np.asarray(points)
    near = [i for i in range(len(pts)) if abs(pts[i].imag - y0) < rho]
    groups = [{i} for i in near]

    def circle(group):
        re = [pts[i].real for i in group]
        m = 0.5 * (min(re) + max(re))
        r = max(abs(pts[i] - complex(m, y0)) for i in group) + rho
        return m, r

    changed = True
    while changed:
        changed = False
        groups.sort(key=lambda g: circle(g)[0])
        merged = []
        for g in groups:
            if merged:
                m1, r1 = circle(merged[-1])
                m2, r2 = circle(g)
                if m1 + r1 >= m2 - r2:
                    merged[-1] = merged[-1] | g
                    changed = True
                    continue
            merged.append(g)
        groups = merged
        for g in groups:
            m, r = circle(g)
            centre = complex(m, y0)
            close = {
                i for i in range(len(pts))
                if i not in g and abs(pts[i] - centre) < r + rho
            }
            if close:
                g |= close
                changed = True
    out = [circle(g) for g in groups]
    out.sort(key=lambda c: -c[0])
    return out


def _inside(clusters, tau):
    for m, r in clusters:
        if m - r < tau < m + r:
            return m, r
    return None


def _bump(u):
    if u <= 0 or u >= 1:
        return 0.0
    return np.exp(-1 / (u * (1 - u)))


class _Sweep(object):
    """
    Backward sweep along ``Im t = y0`` from ``t_start`` through the samples
    ``taus`` (real parts of t), with detours and window accumulators.

    `means` lists extra windows ``(upper Re t, width)`` over which the
    smooth average of ``x h`` is accumulated.
    """

    def __init__(self, p, theta, taus, y0, x_ref_factor=None,
                 window_fraction=None, detour_factor=None, means=()):
        self.p = p
        self.theta = theta
        self.field = _Field(p, theta)
        self.taus = np.asarray(taus, dtype=float)
        self.y0 = y0
        x_ref_factor = config.pick('error_term', 'x_ref_factor', x_ref_factor)
        window_fraction = config.pick('error_term', 'window_fraction',
                                      window_fraction)
        detour_factor = config.pick('error_term', 'detour_factor',
                                    detour_factor)
        self.strip = make_strip(p, excluded='P0Q')
        self.rho = detour_factor * self.strip.delta0
        self.means = list(means)

        t_max = max([self.taus.max()] + [hi for hi, _ in self.means])
        t_start = t_max + (x_ref_factor - 1) * abs(complex(t_max, y0))
        t_lo = self.taus.min() - 4 * self.rho
        span = max(abs(p.ell.omega_a), abs(p.ell.omega_b)) + 4 * self.rho
        pts = excluded_points(p, p.phi, (t_lo - span, t_start + 3 * span),
                              (y0 - span, y0 + span))
        self.clusters = _clusters(pts, y0, self.rho)
        self.t_start = self._clear_start(t_start, span, pts)
        t_end = self.taus.min()
        hit = _inside(self.clusters, t_end)
        if hit is not None:
            t_end = hit[0] - hit[1]
        self.t_end = t_end
        self.window = window_fraction * abs(complex(self.t_start, y0))
        self.weights = [(self.t_start, self.window),
                        (self.t_start, 0.5 * self.window),
                        (self.t_start - 0.5 * self.window, 0.5 * self.window)]
        self.pieces = self._build_pieces()
        self.xi_ref = self.field.rot * complex(self.t_start, y0)
        self.lead = self.field.local(self.xi_ref).F1 / self.xi_ref

    def _clear_start(self, t0, span, pts):
        """
        The point of ``[t0, t0 + span]`` on the line farthest from the
        excluded points, outside every detour circle
        """
        best, far = t0, -1.0
        for t in t0 + np.linspace(0.0, span, 65):
            if _inside(self.clusters, t) is not None:
                continue
            d = (np.min(np.abs(pts - complex(t, self.y0)))
                 if len(pts) else np.inf)
            if d > far:
                best, far = t, d
        if far < 0:
            hit = _inside(self.clusters, t0)
            best = t0 if hit is None else hit[0] + hit[1] + self.rho
        return best

    def _build_pieces(self):
        y0 = self.y0
        pieces = []
        cur = self.t_start
        for m, r in self.clusters:
            if m - r >= cur or m + r <= self.t_end:
                continue
            pieces.append(Segment(complex(cur, y0), complex(m + r, y0)))
            pieces.append(Arc(complex(m, y0), r, 0.0, np.pi))
            cur = m - r
        pieces.append(Segment(complex(cur, y0), complex(self.t_end, y0)))
        return [pc for pc in pieces if pc.length > 0]

    def _taps(self):
        """
        For each sample: ``(piece index, s on piece, spur or None)``
        """
        y0 = self.y0
        taps = []
        for tau in self.taus:
            hit = _inside(self.clusters, tau)
            found = None
            for i, pc in enumerate(self.pieces):
                if hit is not None and isinstance(pc, Arc):
                    m, r = hit
                    if abs(pc.centre.real - m) < 1e-12 and \
                            abs(pc.radius - r) < 1e-12:
                        th = np.arccos((tau - m) / r)
                        s = r * th
                        start = pc.at(s)[0]
                        found = (i, s, Segment(start, complex(tau, y0)))
                        break
                elif hit is None and isinstance(pc, Segment):
                    hi, lo = pc.a.real, pc.b.real
                    if lo - 1e-12 <= tau <= hi + 1e-12:
                        found = (i, min(max(hi - tau, 0.0), pc.length), None)
                        break
            if found is None:
                raise StripViolation("Sample t = " + str(tau) +
                                     " is not on the integration path")
            taps.append(found)
        return taps

    def size(self):
        return (_N_STATE + _N_ACC * len(self.weights) +
                _N_MEAN * len(self.means))

    def _fun(self, piece, accumulate=True):
        field = self.field
        rot = field.rot
        lead = self.lead

        def fun(s, y):
            t, dt = piece.at(s)
            xi = rot * t
            dxi = rot * dt
            loc = field.local(xi)
            F1, coef, inv2 = loc.F1, loc.coef, loc.inv2
            h_p, chi_p, Phi, Psi, U, J = y[:6]
            d = np.zeros_like(y)
            src = -F1 / xi + chi_p * inv2 / xi + loc.m0 / xi**2
            gauge = np.exp(F1 / xi - lead + J)
            d[0] = (src + coef * h_p / xi) * dxi
            d[1] = loc.n / xi**2 * dxi
            d[2] = coef * Phi / xi * dxi
            d[3] = (inv2 / xi + coef * Psi / xi) * dxi
            d[4] = F1 * dxi
            d[5] = F1 / xi**2 * dxi
            d[6] = src * gauge * dxi
            d[7] = inv2 / xi * gauge * dxi
            d[8] = (-F1 / xi + (loc.F2 - 1.5 * F1 * F1) / xi**2 +
                    chi_p * inv2 / xi) * dxi
            d[9] = inv2 / xi * dxi
            if not accumulate:
                return d
            base = _N_STATE
            one = 1 + coef
            for hi, width in self.weights:
                w = _bump((hi - t.real) / width)
                if w > 0:
                    d[base:base + _N_ACC] = w * dt * np.array(
                        [1.0, one, one * U, loc.m0, loc.n, inv2])
                base += _N_ACC
            for hi, width in self.means:
                w = _bump((hi - t.real) / width)
                if w > 0:
                    d[base:base + _N_MEAN] = w * dt * np.array(
                        [1.0, xi * h_p, xi * Phi, xi * Psi])
                base += _N_MEAN
            return d

        return fun

    def _integrate(self, fun, length, y, t_eval, rtol, atol):
        t_eval = np.unique(np.append(np.clip(t_eval, 0, length), length))
        sol = solve_ivp(fun, (0.0, length),
                        y,
                        method='DOP853',
                        t_eval=t_eval,
                        rtol=rtol,
                        atol=atol)
        if not sol.success:
            raise NumericalError("Correction sweep failed: " + sol.message)
        return sol

    def run(self, rtol=None, atol=None, max_steps=None):
        """
        Returns the list of raw states at the samples, the final state and
        the number of right-hand side evaluations.
        """
        rtol = config.pick('error_term', 'rtol', rtol)
        atol = config.pick('error_term', 'atol', atol)
        max_steps = config.pick('error_term', 'max_steps', max_steps)
        taps = self._taps()
        y = np.zeros(self.size(), dtype=complex)
        y[2] = 1.0
        states = [None] * len(taps)
        spurs = []
        nfev = 0
        for i, pc in enumerate(self.pieces):
            mine = [(j, tp) for j, tp in enumerate(taps) if tp[0] == i]
            sol = self._integrate(self._fun(pc), pc.length, y,
                                  [tp[1] for _, tp in mine], rtol, atol)
            nfev += sol.nfev
            for j, tp in mine:
                col = np.argmin(np.abs(sol.t - min(max(tp[1], 0), pc.length)))
                if tp[2] is None:
                    states[j] = sol.y[:, col]
                else:
                    spurs.append((j, tp[2], sol.y[:, col]))
            y = sol.y[:, -1]
            if nfev > max_steps:
                raise MaxSteps("Correction sweep exceeded " + str(max_steps) +
                               " evaluations")
        for j, spur, y_spur in spurs:
            sol = self._integrate(self._fun(spur, accumulate=False),
                                  spur.length, y_spur, [spur.length], rtol,
                                  atol)
            nfev += sol.nfev
            states[j] = sol.y[:, -1]
        return states, y, nfev


def _balance(acc):
    norm, one, oneU, m0, n, inv2 = acc
    chi_t = -n / norm
    return (oneU - chi_t * inv2 - m0) / one, chi_t


def _closure(final, sweep):
    """
    Far-field values: ``h(X_ref) = C/X_ref`` and
    ``chi0(X_ref) = chi_t/X_ref`` from the whole window, with the spreads
    ``dC`` and ``dchi`` between its two halves.
    """
    acc = final[_N_STATE:_N_STATE + 3 * _N_ACC].reshape(3, _N_ACC)
    C, chi_t = _balance(acc[0])
    C1, chi1 = _balance(acc[1])
    C2, chi2 = _balance(acc[2])
    return Closure(C=C,
                   chi_t=chi_t,
                   dC=abs(C1 - C2),
                   dchi=abs(chi1 - chi2),
                   xi_ref=sweep.xi_ref)


def _sweep(p, theta, taus, y0, means=(), rtol=None, atol=None,
           max_steps=None, **kwargs):
    sweep = _Sweep(p, theta, taus, y0, means=means, **kwargs)
    states, final, nfev = sweep.run(rtol=rtol, atol=atol,
                                    max_steps=max_steps)
    return sweep, states, final, nfev, _closure(final, sweep)


def _results(p, theta, taus, y0, strict=True, **kwargs):
    tol_tail = config.get('error_term', 'tol_tail')
    sweep, states, final, nfev, cl = _sweep(p, theta, taus, y0, **kwargs)
    h_R, chi_R = cl.C / cl.xi_ref, cl.chi_t / cl.xi_ref
    nan = complex(np.nan, np.nan)
    out = []
    for tau, st in zip(sweep.taus, states):
        x = sweep.field.rot * complex(tau, y0)
        h_p, chi_p, Phi, Psi, _, J, K_p, K_psi, q_p, Psi0 = st[:_N_STATE]
        tail = (2 * (cl.dC * abs(Phi) + cl.dchi * (abs(Psi) + 1)) /
                abs(cl.xi_ref) + (abs(cl.C) + abs(cl.chi_t)) /
                abs(cl.xi_ref)**2)
        if tail > tol_tail:
            if strict:
                raise TailNotConverged("Tail bound " + str(tail) +
                                       " exceeds tol_tail at x = " + str(x))
            logger.warning("tail bound %.3g above tol_tail at t = %.6g",
                           tail, tau)
            out.append(
                CorrectionResult(x, nan, nan, tail, nfev, nan, nan,
                                 CONDITIONAL, nan))
            continue
        h = h_p + h_R * Phi + chi_R * Psi
        chi0 = chi_p + chi_R
        gauge = np.exp(-sweep.field.local(x).F1 / x + sweep.lead - J)
        out.append(
            CorrectionResult(x=x,
                             chi0=chi0,
                             h=h,
                             tail_bound=tail,
                             quad_nodes=nfev,
                             h_prime=sweep.field.h_slope(x, h, chi0),
                             h_quadrature=gauge * (h_R + K_p + chi_R * K_psi),
                             conditional=CONDITIONAL,
                             h_triple=q_p + h_R + chi_R * Psi0))
    return out


def _check_point(x, p):
    strip = make_strip(p, excluded='P0Q')
    if not in_strip(x, strip, p):
        raise StripViolation("x = " + str(x) + " is outside the check strip")


def h_correction(x, p, theta, **kwargs):
    """
    Correction ``h`` at `x` by backward integration from ``X_ref``.

    Parameters
    ----------

    * x : complex
        a point of the check strip (``P0`` and ``Q`` excluded)
    * p : AsymptoticParams
    * theta : ThetaParams

    Returns
    -------

    CorrectionResult :
        ``h``, ``chi0``, ``h'``, two quadrature forms of ``h`` and a tail
        bound; TailNotConverged is raised if the bound exceeds ``tol_tail``
    """
    x = complex(x)
    _check_point(x, p)
    t = np.exp(-1j * p.phi) * x
    return _results(p, theta, [t.real], t.imag, **kwargs)[0]


def chi0(x, p, theta, **kwargs):
    """
    ``chi0 = b - b0 - b0' h`` at `x`; the same sweep as `h_correction`
    """
    return h_correction(x, p, theta, **kwargs)


def h_quadrature(x, p, theta, **kwargs):
    """
    Verification form of `h_correction`: the same equation solved by
    quadrature with the integrating factor

        exp(int c dxi/xi) = exp(F1(X_ref)/X_ref - F1(x)/x
                                - int F1 dxi/xi**2)

    and the same closure at ``X_ref``. The two agree to within the sweep
    tolerance.

    The field ``h_triple`` of the result carries the shorter form
    ``h(X_ref) - int F1 dxi/xi + int (F2 - 3F1**2/2) dxi/xi**2
    + int chi0 dxi/(2(A - psi0**2) xi)``, which drops an ``O(x**-2)``
    boundary term.
    """
    return h_correction(x, p, theta, **kwargs).h_quadrature


def _void(x):
    nan = complex(np.nan, np.nan)
    return CorrectionResult(x, nan, nan, np.nan, 0, nan, nan, CONDITIONAL,
                            nan)


def correction_profile(p, theta, t_values, strict=False, **kwargs):
    """
    One backward sweep along the ray of `p` giving the CorrectionResult at
    ``x = e^{i phi} t`` for every `t` in `t_values`.

    Samples outside the check strip get a result with NaN values. So do the
    samples whose tail bound exceeds ``tol_tail`` (their ``tail_bound`` is
    kept), unless `strict` is set, in which case TailNotConverged is
    raised.
    """
    strip = make_strip(p, excluded='P0Q')
    rot = np.exp(1j * p.phi)
    t_values = [float(t) for t in t_values]
    good = [i for i, t in enumerate(t_values) if in_strip(rot * t, strip, p)]
    out = [_void(rot * t) for t in t_values]
    if good:
        res = _results(p, theta, [t_values[i] for i in good], 0.0,
                       strict=strict, **kwargs)
        for i, r in zip(good, res):
            out[i] = r
    return out


def corrected_state(x, p, theta, result=None, fd_step=None):
    """
    ``(y, y', y'')`` from ``psi = k sn((x - x0)/2 + h/2)``.

    ``h'`` comes from the correction equation and ``h''`` from a centred
    difference of its right-hand side.
    """
    fd_step = config.pick('error_term', 'fd_step', fd_step)
    x = complex(x)
    if result is None:
        result = h_correction(x, p, theta)
    h, dh, chi = result.h, result.h_prime, result.chi0
    field = _Field(p, theta)
    loc = field.local(x)
    dchi = loc.n / x**2
    delta = fd_step * field.rot
    f_plus = field.h_slope(x + delta, h + delta * dh, chi + delta * dchi)
    f_minus = field.h_slope(x - delta, h - delta * dh, chi - delta * dchi)
    d2h = (f_plus - f_minus) / (2 * delta)

    k = p.ell.k
    sn, cn, dn = kernel(k).sncndn((x - p.x0) / 2 + h / 2)
    psi = k * sn
    dpsi = 0.5 * k * cn * dn * (1 + dh)
    d2psi = (-0.25 * k * sn * (dn * dn + k * k * cn * cn) * (1 + dh)**2 +
             0.5 * k * cn * dn * d2h)
    if abs(psi - 1) < config.get('elliptic_rep', 'tol_unit'):
        raise SingularY("psi = 1 at x = " + str(x))
    y = (psi + 1) / (psi - 1)
    yp = -2 * dpsi / (psi - 1)**2
    ypp = -2 * d2psi / (psi - 1)**2 + 4 * dpsi**2 / (psi - 1)**3
    return CorrectedState(x=x,
                          y=y,
                          yp=yp,
                          ypp=ypp,
                          psi=psi,
                          dpsi=dpsi,
                          h=h,
                          h_prime=dh,
                          chi0=chi)


def y_corrected(x, p, theta):
    """
    ``y(x)`` with the correction ``Delta = h/2`` in the sn argument
    """
    return corrected_state(x, p, theta).y


def linearized_pair(x, p, theta, result=None):
    """
    ``(psi, psi', b, b')`` for ``psi = psi0 + psi0' h`` and
    ``b = b0 + b0' h + chi0``
    """
    if result is None:
        result = h_correction(x, p, theta)
    h, dh, chi = result.h, result.h_prime, result.chi0
    ps, dps = psi0_state(x, p)
    d2ps = psi0_second(x, p)
    b, db, d2b = b0(x, p), b0_prime(x, p), b0_second(x, p)
    loc = _Field(p, theta).local(x)
    return (ps + dps * h, dps + d2ps * h + dps * dh, b + db * h + chi,
            db + d2b * h + db * dh + loc.n / x**2)


def system_defect(x, psi, dpsi, b, db, theta, A):
    """
    Defects of the first-order system

        4 psi'**2 = (1 - psi**2)(A - psi**2) - (1 - psi**2)(4 T psi - b)/x
                    + 4 N2/x**2
        b' = -2(A - psi**2) + 4 psi' + (4 T psi - b)/x

    with ``N2 = 2(t0 - t1) tinf psi + (t0 - t1)**2 + tinf**2``.
    """
    T = theta.theta0 + theta.theta1
    dt = theta.theta0 - theta.theta1
    N2 = 2 * dt * theta.theta_inf * psi + dt * dt + theta.theta_inf**2
    one = 1 - psi * psi
    d1 = 4 * dpsi**2 - (one * (A - psi * psi) - one *
                        (4 * T * psi - b) / x + 4 * N2 / x**2)
    d2 = db - (-2 * (A - psi * psi) + 4 * dpsi + (4 * T * psi - b) / x)
    return d1, d2


def a_from_y(x, y, yp, theta):
    """
    ``a = 1 - 4(y'**2 - y**2)/(y (y - 1)**2) + 4 T (y + 1)/((y - 1) x)
    + ((y - 1)/y)(p**2 y - m**2)/x**2`` with ``p = t0 - t1 + tinf`` and
    ``m = t0 - t1 - tinf``; ``a`` tends to ``A`` along the ray.
    """
    T = theta.theta0 + theta.theta1
    pp = theta.theta0 - theta.theta1 + theta.theta_inf
    mm = theta.theta0 - theta.theta1 - theta.theta_inf
    return (1 - 4 * (yp * yp - y * y) / (y * (y - 1)**2) + 4 * T * (y + 1) /
            ((y - 1) * x) + (y - 1) / y * (pp * pp * y - mm * mm) / x**2)


def L_function(x, psi, dpsi, theta):
    """
    ``L = psi'**2/(psi**2 - 1) - (psi**2 - 1)/4 - (1 - T)(1 - psi)/x
    + (p**2 (1 + psi)/(1 - psi) + m**2 (1 - psi)/(1 + psi))/(4x**2)``
    """
    T = theta.theta0 + theta.theta1
    dt = theta.theta0 - theta.theta1
    pp = dt + theta.theta_inf
    mm = dt - theta.theta_inf
    s = psi * psi - 1
    G = pp * pp * (1 + psi) / (1 - psi) + mm * mm * (1 - psi) / (1 + psi)
    return dpsi * dpsi / s - s / 4 - (1 - T) * (1 - psi) / x + G / (4 * x * x)


def L_residual(x, y, yprime, ysecond, theta, tol_singular=None):
    """
    Defect of ``dL/dx = -2L/x - (psi**2 - 1)/(2x) + (T - 1)(1 - psi)/x**2``
    for

        L = psi'**2/(psi**2 - 1) - (psi**2 - 1)/4 - (1 - T)(1 - psi)/x
            + (p**2 (1 + psi)/(1 - psi) + m**2 (1 - psi)/(1 + psi))/(4x**2)

    in ``psi = (y + 1)/(y - 1)``; ``dL/dx`` is formed analytically from
    ``y''``. The identity defect compares L with
    ``(1 - a)/4 + (T - 1 + psi)/x - ((t0 - t1)**2 + tinf**2)/(2x**2)``.

    Returns an LResidual.
    """
    tol = config.pick('elliptic_rep', 'tol_singular', tol_singular)
    if abs(y) < tol or abs(y - 1) < tol:
        raise SingularY("y must avoid 0 and 1")
    T = theta.theta0 + theta.theta1
    dt = theta.theta0 - theta.theta1
    pp = dt + theta.theta_inf
    mm = dt - theta.theta_inf
    psi = (y + 1) / (y - 1)
    dpsi = -2 * yprime / (y - 1)**2
    d2psi = -2 * ysecond / (y - 1)**2 + 4 * yprime**2 / (y - 1)**3
    s = psi * psi - 1
    G = pp * pp * (1 + psi) / (1 - psi) + mm * mm * (1 - psi) / (1 + psi)
    G_psi = 2 * pp * pp / (1 - psi)**2 - 2 * mm * mm / (1 + psi)**2
    L = L_function(x, psi, dpsi, theta)
    dL = (2 * dpsi * d2psi / s - 2 * psi * dpsi**3 / s**2 - psi * dpsi / 2 +
          (1 - T) * dpsi / x + (1 - T) * (1 - psi) / x**2 - G /
          (2 * x**3) + G_psi * dpsi / (4 * x * x))
    rhs = -2 * L / x - s / (2 * x) + (T - 1) * (1 - psi) / x**2
    a = a_from_y(x, y, yprime, theta)
    L_alt = ((1 - a) / 4 + (T - 1 + psi) / x -
             (dt * dt + theta.theta_inf**2) / (2 * x * x))
    return LResidual(defect=dL - rhs, identity_defect=L - L_alt, L=L, a=a)


def sn_primitive(kind, u, ell):
    """
    Closed-form primitives vanishing at ``u = 0``, for ``sn = sn(u; k)``:

        u0 = int du/(1 - sn**2)          v0 = int sn du/(1 - sn**2)
        u1 = int du/(1 - A sn**2)        v1 = int sn du/(1 - A sn**2)
        u2 = int du/(1 - sn**2)**2       v2 = int sn du/(1 - sn**2)**2

    expressed through ``L = theta'/theta`` at ``u/Omega_a +- 1/4`` (shifted
    by ``nu0 = (1 + tau0)/2`` for the ``cn`` kinds).

    Raises NearThetaZero at the poles of the integrand.
    """
    A, k = ell.A, ell.k
    oa, tau = ell.omega_a, ell.tau0
    E_a = ell.E_a
    u = complex(u)
    shift = 0.0 if kind in ('u1', 'v1') else (1 + tau) / 2

    def L(z, d=0):
        return theta_logderiv(z, tau, d) / oa**d

    def pair(v, d=0):
        return (L(v / oa - 0.25 + shift, d), L(v / oa + 0.25 + shift, d))

    lm, lp = pair(u)
    lm0, lp0 = pair(0.0)
    if kind == 'u0':
        return (E_a * u + lm + lp - lm0 - lp0) / ((A - 1) * oa)
    if kind == 'v0':
        return (lm - lp - lm0 + lp0) / ((A - 1) * oa)
    if kind == 'u1':
        return ((E_a + (1 - A) * oa) * u + lm + lp - lm0 - lp0) / ((1 - A) *
                                                                   oa)
    if kind == 'v1':
        return (lp - lm - lp0 + lm0) / (k * (1 - A) * oa)
    d2m, d2p = pair(u, 2)
    d2m0, d2p0 = pair(0.0, 2)
    if kind == 'u2':
        P = E_a * u + lm + lp - lm0 - lp0
        return ((2.0 / 3.0) * (2 * A - 1) * P - (A / 3) * (A - 1) * oa * u -
                (d2m + d2p - d2m0 - d2p0) / 6) / ((A - 1)**2 * oa)
    if kind == 'v2':
        Q = lm - lp - lm0 + lp0
        d2Q = d2m - d2p - d2m0 + d2p0
        return -(d2Q + (1 - 5 * A) * Q) / (6 * (A - 1)**2 * oa)
    raise ValueError("Unknown primitive " + repr(kind))


def _window_means(beta, p, theta, windows, x_ref_factor=None):
    """
    Smooth averages of ``x h`` over `windows` and the far-field constant
    ``C`` of the ray with ``beta0 = beta``
    """
    q = p._replace(beta0=beta)
    lo = min(hi - width for hi, width in windows)
    hi = max(hi for hi, _ in windows)
    sweep, _, final, _, cl = _sweep(q, theta, [lo, hi], 0.0, means=windows,
                                    x_ref_factor=x_ref_factor)
    h_R, chi_R = cl.C / cl.xi_ref, cl.chi_t / cl.xi_ref
    acc = final[sweep.size() - _N_MEAN * len(windows):].reshape(
        len(windows), _N_MEAN)
    means = [(a[1] + h_R * a[2] + chi_R * a[3]) / a[0] for a in acc]
    return means + [cl.C]


def beta0_quadratic_fit(p, theta, t_window, betas=(-2, -1, 0, 1, 2),
                        x_ref_factor=None, **kwargs):
    """
    Quadratic dependence of ``x h(x)`` on beta0.

    The smooth average of ``x h`` over the window ``t_window = (t1, t2)``
    of the ray and over its double ``(2 t1, 2 t2)`` is fitted as a
    quadratic in beta0; the ``1/x`` part of the coefficients is removed by
    extrapolating the two fits. The leading coefficient tends to
    ``1/(8 A (1 - A))``, the beta0**2 part of ``3/8`` times the mean of
    ``1/(A - psi0**2)**2`` along the ray.

    Keyword arguments are passed to `utils.parallel` (e.g. ``n_jobs``); the
    betas are processed in parallel.

    Returns
    -------

    BetaFit :
        ``coefficients`` of the extrapolated fit (highest degree first),
        ``values`` the averages (one row per beta, one column per window),
        ``closure`` the beta0**2 coefficient of the far-field constant ``C``
    """
    t1, t2 = sorted(t_window)
    windows = [(t2, t2 - t1), (2 * t2, 2 * (t2 - t1))]
    rows = parallel(_window_means, list(betas), p, theta, windows,
                    x_ref_factor=x_ref_factor, **kwargs)
    rows = np.array(rows)
    b = np.array(betas, dtype=float)
    near = np.polyfit(b, rows[:, 0], 2)
    far = np.polyfit(b, rows[:, 1], 2)
    closure = np.polyfit(b, rows[:, 2], 2)[0]
    A = p.ell.A
    return BetaFit(coefficients=2 * far - near,
                   expected=1 / (8 * A * (1 - A)),
                   betas=tuple(betas),
                   values=rows[:, :2],
                   windows=tuple(windows),
                   closure=closure)
