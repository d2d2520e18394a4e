"""
Characteristic root ``mu`` of the symmetric linear system, its turning
points and the Stokes curves ``Re int mu dlambda = 0``.

``t`` is either a positive float or ``numpy.inf`` for the limit graph. The
branch of ``mu`` along a traced curve is followed by continuity, starting
from the sheet where ``mu/a^{1/2} -> 1/4`` at ``lambda = 0``.
"""
import logging
from collections import namedtuple

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.optimize import linear_sum_assignment

from . import config
from .ellipkit import branch_sqrt
from .errors import (CoalescingTurningPoints, SingularDenominator,
                     TraceStall)
from .monodromy import ThetaParams
from .output import save_svg

logger = logging.getLogger(__name__)

LABELS = ('lambda1', 'lambda2', 'lambda1_0', 'lambda2_0')

TurningPoints = namedtuple(
    'TurningPoints',
    ['lambda1', 'lambda2', 'lambda1_0', 'lambda2_0', 't', 'phi', 'a_phi',
     'theta'])
StokesCurve = namedtuple('StokesCurve',
                         ['start', 'end', 'ray_index', 'points', 'length'])
StokesGraph = namedtuple('StokesGraph',
                         ['phi', 't', 'turning_points', 'curves', 'adjacency'])

# Cash-Karp 5(4)
_CK_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [3 / 10, -9 / 10, 6 / 5],
    [-11 / 54, 5 / 2, -70 / 27, 35 / 27],
    [1631 / 55296, 175 / 512, 575 / 13824, 44275 / 110592, 253 / 4096],
]
_CK_B = np.array([37 / 378, 0, 250 / 621, 125 / 594, 0, 512 / 1771])
_CK_E = np.array([
    -277 / 64512, 0, 6925 / 370944, -6925 / 202752, -277 / 14336, 277 / 7084
])


def _inv(t):
    return 0.0 if np.isinf(t) else 1.0 / t


def _numerator(t, phi, a_phi, theta):
    """
    Coefficients (highest first) of ``4 (e^{2i phi} - lambda**2)**2 mu**2``
    """
    E2 = np.exp(2j * phi)
    it = _inv(t)
    # (1/4)(E2 - l^2)(E2 a - l^2 + 4 tinf l/t)
    p1 = np.array([-1.0, 0.0, E2])
    p2 = np.array([-1.0, 4 * theta.theta_inf * it, E2 * a_phi])
    quad = 0.25 * np.polymul(p1, p2)
    extra = np.array([
        0.0, 0.0, 0.0,
        2 * (theta.theta1**2 - theta.theta0**2) * np.exp(1j * phi) * it * it,
        2 * (theta.theta0**2 + theta.theta1**2) * E2 * it * it
    ])
    return quad + extra


def mu_squared(lam, t, phi, a_phi, theta, tol_singular=None):
    """
    ``mu**2`` of the characteristic root:

        4(e^{2i phi} - l**2)**2 mu**2
            = (1/4)(e^{2i phi} - l**2)(e^{2i phi} a - l**2 + 4 tinf l/t)
              + 2(t1**2 - t0**2) e^{i phi} l/t**2 + 2(t0**2 + t1**2) e^{2i phi}/t**2

    For ``t = inf`` this is ``(e^{2i phi} a - l**2)/(16 (e^{2i phi} - l**2))``.
    """
    tol = config.pick('stokes', 'tol_singular', tol_singular)
    D = np.exp(2j * phi) - lam * lam
    if abs(D) < tol:
        raise SingularDenominator("lambda is at +-e^{i phi}")
    return np.polyval(_numerator(t, phi, a_phi, theta), lam) / (4 * D * D)


def mu(lam, t, phi, a_phi, theta_inf, sheet=1, tol_singular=None):
    """
    Characteristic root, truncated after the ``1/t`` term:

        mu = S/4 + tinf l/(2t (e^{2i phi} - l**2) S),
        S = sqrt((e^{2i phi} a - l**2)/(e^{2i phi} - l**2))

    with ``S -> a^{1/2}`` at ``lambda = 0`` on ``sheet = 1`` and ``-a^{1/2}``
    on ``sheet = -1``. The cut of S joins ``e^{i phi} a^{1/2}`` to
    ``e^{i phi}`` (and the opposite pair) along the arc where
    ``S**2/a <= 0``.
    """
    tol = config.pick('stokes', 'tol_singular', tol_singular)
    E2 = np.exp(2j * phi)
    D = E2 - lam * lam
    if abs(D) < tol:
        raise SingularDenominator("lambda is at +-e^{i phi}")
    root_a = branch_sqrt(a_phi)
    S = sheet * root_a * np.sqrt(complex((E2 * a_phi - lam * lam) /
                                         (D * a_phi)))
    out = S / 4
    it = _inv(t)
    if it != 0.0:
        if abs(S) < tol:
            raise SingularDenominator("lambda is at a turning point")
        out += theta_inf * lam * it / (2 * D * S)
    return out


def _polish(coeffs, z, iters=6):
    dcoeffs = np.polyder(coeffs)
    for _ in range(iters):
        d = np.polyval(dcoeffs, z)
        if d == 0:
            break
        z = z - np.polyval(coeffs, z) / d
    return z


def turning_points(t, phi, a_phi, theta, tol_sep=None):
    """
    Zeros of ``mu**2``, labelled by proximity to

        lambda1 = e^{i phi} a^{1/2} + 2 tinf/t,    lambda2 = -e^{i phi} a^{1/2} + 2 tinf/t,
        lambda1_0 = e^{i phi},                     lambda2_0 = -e^{i phi}

    with ``a^{1/2}`` the principal root. For ``t = inf`` the limits
    themselves are returned.

    Raises CoalescingTurningPoints when two of them are closer than
    `tol_sep`.
    """
    tol_sep = config.pick('stokes', 'tol_sep', tol_sep)
    if a_phi == 0:
        raise CoalescingTurningPoints("a_phi = 0: lambda1 = lambda2")
    e = np.exp(1j * phi)
    root_a = branch_sqrt(a_phi)
    it = _inv(t)
    guess = np.array([
        e * root_a + 2 * theta.theta_inf * it,
        -e * root_a + 2 * theta.theta_inf * it, e, -e
    ])
    if it == 0.0:
        pts = guess
    else:
        coeffs = _numerator(t, phi, a_phi, theta)
        roots = np.array([_polish(coeffs, z) for z in np.roots(coeffs)])
        cost = np.abs(guess[:, None] - roots[None, :])
        rows, cols = linear_sum_assignment(cost)
        pts = roots[cols[np.argsort(rows)]]
    for i in range(4):
        for j in range(i + 1, 4):
            if abs(pts[i] - pts[j]) < tol_sep:
                raise CoalescingTurningPoints(LABELS[i] + " and " + LABELS[j] +
                                              " coalesce")
    return TurningPoints(lambda1=pts[0],
                         lambda2=pts[1],
                         lambda1_0=pts[2],
                         lambda2_0=pts[3],
                         t=t,
                         phi=phi,
                         a_phi=a_phi,
                         theta=theta)


def _points(tp):
    return dict(zip(LABELS, (tp.lambda1, tp.lambda2, tp.lambda1_0,
                             tp.lambda2_0)))


class _Field(object):
    """
    ``mu`` along a curve, with the branch carried by continuity
    """

    def __init__(self, tp):
        self.tp = tp
        self.coeffs = _numerator(tp.t, tp.phi, tp.a_phi, tp.theta)
        self.E2 = np.exp(2j * tp.phi)

    def mu2(self, lam):
        D = self.E2 - lam * lam
        return np.polyval(self.coeffs, lam) / (4 * D * D)

    def mu(self, lam, ref):
        m = np.sqrt(complex(self.mu2(lam)))
        if (m * np.conj(ref)).real < 0:
            m = -m
        return m

    def mu2_prime(self, lam):
        D = self.E2 - lam * lam
        N = np.polyval(self.coeffs, lam)
        dN = np.polyval(np.polyder(self.coeffs), lam)
        return (dN * D + 4 * lam * N) / (4 * D**3)


def start_directions(tp, which):
    """
    The three angles at which Stokes curves leave the simple turning point
    `which`: with ``mu**2 ~ c2 (lambda - lambda_*)``, ``Re`` of
    ``(2/3) c (lambda - lambda_*)**(3/2)`` vanishes on them.
    """
    lam = _points(tp)[which]
    c = np.sqrt(complex(_Field(tp).mu2_prime(lam)))
    base = (2.0 / 3.0) * (np.pi / 2 - np.angle(c))
    return [base + 2 * np.pi * n / 3 for n in range(3)]


def _chord(field, a, b, ref, nodes, singular=False):
    """
    ``int_a^b mu dlambda`` by Gauss-Legendre; with `singular`, ``a`` is a
    simple zero of ``mu**2`` and the square-root behaviour is removed by
    ``lambda = a + (b - a) v**2``
    """
    x, w = leggauss(nodes)
    v = 0.5 * (x + 1)
    w = 0.5 * w
    d = b - a
    total = 0.0
    if singular:
        lams = a + d * v * v
        jac = 2 * d * v
    else:
        lams = a + d * v
        jac = d * np.ones_like(v)
    m = ref
    for lam, wi, ji in sorted(zip(lams, w, jac), key=lambda r: abs(r[0] - a)):
        m = field.mu(lam, m)
        total += wi * m * ji
    return total, m


def level_defect(curve, tp, nodes=None):
    """
    Largest ``|Re int mu dlambda|`` from the turning point to the vertices
    of `curve`, re-integrated chord by chord
    """
    nodes = config.pick('stokes', 'quad_nodes', nodes)
    field = _Field(tp)
    pts = curve.points
    ref = field.mu(pts[1], np.sqrt(complex(field.mu2(pts[1]))))
    F, ref = _chord(field, pts[0], pts[1], ref, nodes, singular=True)
    worst = abs(F.real)
    ref = field.mu(pts[1], ref)
    for a, b in zip(pts[1:-1], pts[2:]):
        dF, ref = _chord(field, a, b, ref, nodes)
        F += dF
        ref = field.mu(b, ref)
        worst = max(worst, abs(F.real))
    return worst


def _ck_step(f, lam, h):
    K = []
    for i in range(6):
        z = lam + h * sum(a * k for a, k in zip(_CK_A[i], K))
        K.append(f(z))
    K = np.array(K)
    return lam + h * np.dot(_CK_B, K), abs(h * np.dot(_CK_E, K))


def _end_label(lam, tp, which, hit_tp, hit_sing, R_max):
    limit = np.isinf(tp.t)
    for label, p in _points(tp).items():
        # in the limit lambda1_0, lambda2_0 are the singular points
        if limit and label.endswith("_0"):
            continue
        if label != which and abs(lam - p) < hit_tp:
            return label
    e = np.exp(1j * tp.phi)
    if abs(lam - e) < hit_sing:
        return 'e'
    if abs(lam + e) < hit_sing:
        return '-e'
    if abs(lam) > R_max:
        return 'i_inf' if lam.imag > 0 else '-i_inf'
    return None


def trace_stokes(tp,
                 which,
                 ray_index,
                 R_max=None,
                 hit_ratio=None,
                 hit_singular=None,
                 start_ratio=None,
                 rtol=None,
                 atol=None,
                 max_arclength=None,
                 max_step=None,
                 reproject_every=None,
                 nodes=None):
    """
    Traces the Stokes curve leaving turning point `which` along its
    `ray_index`-th start direction.

    The curve follows ``dlambda/ds = +-i conj(mu)/|mu|`` with a Cash-Karp
    5(4) pair; every `reproject_every` steps the point is moved back onto
    ``Re int mu = 0`` by a Newton step across the curve. Tracing stops at
    another turning point, at ``+-e^{i phi}`` or beyond ``|lambda| = R_max``.

    Returns
    -------

    StokesCurve :
        ``points[0]`` is the turning point itself

    Raises TraceStall when the arclength exceeds `max_arclength`.
    """
    R_max = config.pick('stokes', 'R_max', R_max)
    hit_ratio = config.pick('stokes', 'hit_ratio', hit_ratio)
    hit_singular = config.pick('stokes', 'hit_singular', hit_singular)
    start_ratio = config.pick('stokes', 'start_ratio', start_ratio)
    rtol = config.pick('stokes', 'rtol', rtol)
    atol = config.pick('stokes', 'atol', atol)
    max_arclength = config.pick('stokes', 'max_arclength', max_arclength)
    max_step = config.pick('stokes', 'max_step', max_step)
    reproject_every = config.pick('stokes', 'reproject_every',
                                  reproject_every)
    nodes = config.pick('stokes', 'quad_nodes', nodes)

    pts = _points(tp)
    lam0 = pts[which]
    scale = abs(tp.lambda1 - tp.lambda2)
    hit_tp = hit_ratio * scale
    field = _Field(tp)

    angle = start_directions(tp, which)[ray_index]
    lam = lam0 + start_ratio * scale * np.exp(1j * angle)
    ref = np.sqrt(complex(field.mu2(lam)))
    F, ref = _chord(field, lam0, lam, ref, nodes, singular=True)
    ref = field.mu(lam, ref)
    # orientation: leave the turning point
    sign = 1.0
    if ((1j * np.conj(ref)) * np.exp(-1j * angle)).real < 0:
        sign = -1.0

    points = [lam0, lam]
    s = start_ratio * scale
    h = min(max_step, 0.1 * start_ratio * scale + 1e-3)
    steps = 0
    while True:
        label = _end_label(lam, tp, which, hit_tp, hit_singular, R_max)
        if label is not None:
            break
        if s > max_arclength:
            raise TraceStall("Stokes curve from " + which +
                             " did not end within arclength " +
                             str(max_arclength))
        m_start = ref

        def f(z):
            m = field.mu(z, m_start)
            return sign * 1j * np.conj(m) / abs(m)

        new, err = _ck_step(f, lam, h)
        tol = atol + rtol * abs(new)
        if err > tol and h > 1e-12:
            h *= max(0.2, 0.9 * (tol / err)**0.2)
            continue
        if h <= 1e-12:
            raise TraceStall("Step size underflow while tracing from " +
                             which)
        dF, _ = _chord(field, lam, new, m_start, nodes)
        ref = field.mu(new, m_start)
        F += dF
        s += abs(new - lam)
        lam = new
        steps += 1
        if steps % reproject_every == 0 and abs(ref) > 0:
            shift = -F.real * np.conj(ref) / abs(ref)**2
            dF, _ = _chord(field, lam, lam + shift, ref, nodes)
            F += dF
            lam = lam + shift
            ref = field.mu(lam, ref)
        points.append(lam)
        h = min(max_step, h * min(5.0, 0.9 * (tol / max(err, 1e-300))**0.2))
        # slow down near the singular points and the other turning points
        near = min(abs(lam - p) for p in pts.values())
        h = min(h, max(0.25 * near, 1e-6))
    logger.debug("Stokes curve %s[%d] -> %s after %d steps", which,
                 ray_index, label, steps)
    return StokesCurve(start=which,
                       end=label,
                       ray_index=ray_index,
                       points=np.array(points),
                       length=s)


def stokes_graph(t, phi, a_phi, theta):
    """
    The three Stokes curves of ``lambda1`` and of ``lambda2``; `adjacency`
    holds each edge once as a sorted label pair.
    """
    tp = turning_points(t, phi, a_phi, theta)
    curves = []
    for which in ('lambda1', 'lambda2'):
        for k in range(3):
            curves.append(trace_stokes(tp, which, k))
    edges = sorted({tuple(sorted((c.start, c.end))) for c in curves})
    return StokesGraph(phi=phi,
                       t=t,
                       turning_points=tp,
                       curves=curves,
                       adjacency=edges)


def limit_graph(phi, ell, theta=None):
    """
    Stokes graph of ``mu = (1/4) sqrt((e^{2i phi} A - l**2)/(e^{2i phi} - l**2))``
    """
    if theta is None:
        theta = ThetaParams(0.0, 0.0, 0.0)
    return stokes_graph(np.inf, phi, ell.A, theta)


def expected_edges(phi):
    """
    Adjacency of the limit graph for ``0 < |phi mod pi| < pi/2``:
    ``lambda1`` joins ``lambda2``, ``e^{i phi}`` and the end of the
    imaginary axis on the side of ``sin(phi)``; ``lambda2`` joins
    ``-e^{i phi}`` and the opposite end.
    """
    up = np.sin(phi) > 0
    return sorted([
        ('lambda1', 'lambda2'),
        tuple(sorted(('e', 'lambda1'))),
        tuple(sorted(('i_inf' if up else '-i_inf', 'lambda1'))),
        tuple(sorted(('-e', 'lambda2'))),
        tuple(sorted(('-i_inf' if up else 'i_inf', 'lambda2'))),
    ])


def graph_record(graph):
    """
    JSON-ready description of `graph`
    """
    tp = graph.turning_points
    return {
        'phi': graph.phi,
        't': 'inf' if np.isinf(graph.t) else graph.t,
        'turning_points': _points(tp),
        'edges': [list(e) for e in graph.adjacency],
        'curves': [{
            'start': c.start,
            'end': c.end,
            'ray_index': c.ray_index,
            'length': c.length
        } for c in graph.curves],
    }


def plot_graph(graph, path):
    """
    SVG of `graph` on ``[-2, 2]**2``: cuts as double lines, curves as solid
    paths, turning points as dots with labels
    """
    import matplotlib.pyplot as plt

    tp = graph.turning_points
    e = np.exp(1j * tp.phi)
    fig, ax = plt.subplots(figsize=(6, 6))
    for a, b in ((tp.lambda1, e), (-e, tp.lambda2)):
        d = b - a
        n = 1j * d / abs(d) * 0.01
        for off in (n, -n):
            ax.plot([(a + off).real, (b + off).real],
                    [(a + off).imag, (b + off).imag],
                    color='gray',
                    linewidth=0.8)
    for c in graph.curves:
        ax.plot(c.points.real, c.points.imag, color='black', linewidth=1.2)
    for label, p in _points(tp).items():
        ax.plot([p.real], [p.imag], 'o', color='black', markersize=3)
        ax.text(p.real + 0.04, p.imag + 0.04, label, fontsize=8)
    ax.set_xlim(-2, 2)
    ax.set_ylim(-2, 2)
    ax.set_aspect('equal')
    ax.set_title('phi = %.4f' % graph.phi)
    save_svg(fig, path)
