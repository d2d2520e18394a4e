"""
Command line front end.

    pvasym solve --phi 0.7854
    pvasym trajectory --points 40 --out traj.csv --svg traj.svg
    pvasym params --monodromy data.json --phi 0.6283
    pvasym eval --theta0 0.3 --theta1 0.1 --thetainf 0.2 --q0 0.2,0.1 ...
    pvasym compare ... --r0 40 --r1 80
    pvasym stokes --phi 0.6283 --t inf --out graph.svg
    pvasym check

Exit codes: 0 success, 1 input or invariant violation, 2 numerical failure,
3 non-generic monodromy.
"""
import argparse
import logging
import sys

import numpy as np
from alive_progress import alive_bar
from pyfiglet import Figlet

from . import boutroux, checks, config, monodromy, output, stokes
from .elliptic_rep import (make_strip, psi0_second, psi0_state, sample_ray,
                           y_from_psi)
from .ellipkit import cycle_I, elliptic_data
from .error_term import (L_residual, correction_profile, corrected_state,
                         CONDITIONAL)
from .errors import InputError, NumericalError, PVError
from .painleve_ode import compare_to_asymptotics
from .utils import parse_complex

logger = logging.getLogger(__name__)

EVAL_HEADER = [
    't: ray parameter, x = exp(i phi) t',
    're_x, im_x: the point x',
    're_y, im_y: y(x), (y + 1)/(y - 1) = k sn((x - x0)/2 + h/2), h = 0 '
    'without correction',
    're_psi0, im_psi0: psi0 = k sn((x - x0)/2)',
    're_b0, im_b0: b0 = beta0 - 2 E_a x/Omega_a - (8/Omega_a) theta\'/theta',
    'class: clear, near_P0, near_Q or outside (the cheese-like strip)',
    'residual: |dL/dx + 2L/x + (psi**2 - 1)/(2x) - (T - 1)(1 - psi)/x**2| '
    'of the evaluated y',
]
EVAL_CORRECTION_HEADER = [
    're_h, im_h: h, the correction Delta = h/2 of the sn argument (' +
    CONDITIONAL + ')',
    're_chi0, im_chi0: chi0 = b - b0 - b0\' h',
    'tail_bound: bound on the far-field closure of h',
]


def _theta(args):
    return monodromy.ThetaParams(theta0=args.theta0,
                                 theta1=args.theta1,
                                 theta_inf=args.thetainf)


def _monodromy(args):
    """
    MonodromyData from ``--monodromy`` (``-`` reads stdin) or from the chart
    flags; returns ``(M, pair)`` with `pair` None when no chart is given.
    """
    if args.monodromy:
        if args.monodromy == '-':
            text = sys.stdin.read()
        else:
            try:
                text = open(args.monodromy, 'rt').read()
            except OSError as e:
                raise InputError("Cannot read " + args.monodromy + ": " +
                                 str(e))
        return monodromy.from_json(text), None
    if args.q0 is None or args.q1 is None or args.r is None:
        raise InputError("Give --monodromy or all of --q0, --q1, --r")
    theta = _theta(args)
    M = monodromy.validate(
        monodromy.from_parameters(theta, args.q0, args.q1, args.r))
    return M, monodromy.stokes_multipliers(M, args.q0, args.q1, args.r)


def _t_values(args):
    if args.t1 <= args.t0 or args.points < 2:
        raise InputError("Need t1 > t0 and at least two points")
    return np.linspace(args.t0, args.t1, args.points)


def _emit(text, path):
    if path is None:
        print(text, end='' if text.endswith('\n') else '\n')
    else:
        output.ensure_dir(path)
        with open(path, 'wt') as f:
            f.write(text if text.endswith('\n') else text + '\n')


def cmd_solve(args):
    point = boutroux.solve_A(args.phi)
    report = {
        'phi': args.phi,
        'A': point.A,
        'residual': point.residual_norm,
        'newton_iters': point.newton_iters,
    }
    if point.A in (0, 1):
        I_a, I_b = cycle_I(point.A)
        report.update(E_a=I_a, E_b=-I_b, omega_a=None, omega_b=None,
                      tau0=None)
    else:
        ell = elliptic_data(point.A)
        report.update(E_a=ell.E_a,
                      E_b=ell.E_b,
                      omega_a=ell.omega_a,
                      omega_b=ell.omega_b,
                      tau0=ell.tau0)
    print(output.dump_json(report))
    return 0


def cmd_trajectory(args):
    if args.points is not None and args.points < 3:
        raise InputError("--points must be at least 3")
    traj = boutroux.trajectory(args.points)
    roots = dict(boutroux.sqrt_trajectory(traj))
    rows = []
    for p in traj.points:
        k = roots[p.phi]
        rows.append([
            p.phi, p.A.real, p.A.imag, k.real, k.imag, p.residual_norm,
            p.newton_iters
        ])
    header = [
        'phi: the ray angle',
        're_A, im_A: A_phi, solution of the Boutroux equations',
        're_k, im_k: A_phi^(1/2) with Re >= 0',
        'residual: max of the two Boutroux residuals',
        'newton_iters: iterations of the last corrector',
    ]
    header.extend('violation: ' + v for v in traj.violations)
    columns = [
        'phi', 're_A', 'im_A', 're_k', 'im_k', 'residual', 'newton_iters'
    ]
    if args.out:
        output.ensure_dir(args.out)
    text = output.write_csv(args.out, header, columns, rows)
    if text is not None:
        print(text, end='')
    if args.svg:
        output.ensure_dir(args.svg)
        boutroux.plot_trajectory(traj, args.svg)
    return 0


def cmd_params(args):
    M, pair = _monodromy(args)
    p = monodromy.asymptotic_params(M, args.phi, pair)
    report = {
        'phi': p.phi,
        'reduced_phi': p.reduced_phi,
        'sector': {
            'p': p.sector.p,
            'breve': p.sector.breve
        },
        'A': p.ell.A,
        'x0': p.x0,
        'x0_raw': p.x0_raw,
        'beta0': p.beta0,
        'beta0_branch': p.beta0_branch,
        'generic': True,
    }
    _emit(output.dump_json(report), args.out)
    return 0


def _residual(x, y, yp, ypp, theta):
    try:
        return abs(L_residual(x, y, yp, ypp, theta).defect)
    except PVError:
        return np.nan


def _leading_derivatives(x, p):
    psi, dpsi = psi0_state(x, p)
    d2psi = psi0_second(x, p)
    y = y_from_psi(psi)
    yp = -2 * dpsi / (psi - 1)**2
    ypp = -2 * d2psi / (psi - 1)**2 + 4 * dpsi**2 / (psi - 1)**3
    return y, yp, ypp


def cmd_eval(args):
    M, pair = _monodromy(args)
    p = monodromy.asymptotic_params(M, args.phi, pair)
    ts = _t_values(args)
    strip = make_strip(p)
    samples = [s for s in sample_ray(p, ts, strip) if s.cls != 'near_P0']
    correction = args.correction == 'on'
    header = list(EVAL_HEADER)
    columns = [
        't', 're_x', 'im_x', 're_y', 'im_y', 're_psi0', 'im_psi0', 're_b0',
        'im_b0', 'class', 'residual'
    ]
    if correction:
        profile = correction_profile(p, M.theta, [s.t for s in samples])
        header += EVAL_CORRECTION_HEADER
        columns += ['re_h', 'im_h', 're_chi0', 'im_chi0', 'tail_bound']
    else:
        profile = [None] * len(samples)

    rows = []
    for s, r in zip(samples, profile):
        y = s.y
        if r is not None and np.isfinite(r.h):
            try:
                cs = corrected_state(s.x, p, M.theta, result=r)
                y, res = cs.y, _residual(s.x, cs.y, cs.yp, cs.ypp, M.theta)
            except PVError:
                res = np.nan
        else:
            try:
                res = _residual(s.x, *_leading_derivatives(s.x, p),
                                M.theta)
            except PVError:
                res = np.nan
        row = [
            s.t, s.x.real, s.x.imag, y.real, y.imag, s.psi0.real,
            s.psi0.imag, s.b0.real, s.b0.imag, s.cls, res
        ]
        if correction:
            row += [
                r.h.real, r.h.imag, r.chi0.real, r.chi0.imag, r.tail_bound
            ]
        rows.append(row)
    if args.out:
        output.ensure_dir(args.out)
    text = output.write_csv(args.out, header, columns, rows)
    if text is not None:
        print(text, end='')
    return 0


def cmd_compare(args):
    M, pair = _monodromy(args)
    p = monodromy.asymptotic_params(M, args.phi, pair)
    try:
        report = compare_to_asymptotics(p,
                                        M.theta,
                                        args.r0,
                                        args.r1,
                                        n_samples=args.points,
                                        correction=args.correction == 'on')
    except NumericalError as e:
        logger.warning("comparison on phi = %.4f stopped: %s", args.phi, e)
        _emit(
            output.dump_json({
                'phi': args.phi,
                'r0': args.r0,
                'r1': args.r1,
                'error': type(e).__name__ + ': ' + str(e)
            }), args.out)
        return 0
    summary = {
        'phi': report.phi,
        'r0': report.r0,
        'r1': report.r1,
        'correction': report.correction,
        'seeded_with_correction': report.seeded_with_correction,
        'sup': report.sup,
        'sup_b': report.sup_b,
        'early': report.early,
        'late': report.late,
        'slope': report.slope,
        'slope_b': report.slope_b,
        'slope_leading': report.slope_leading,
        'samples': [{
            't': s.t,
            'psi_ode': s.psi_ode,
            'psi_asym': s.psi_asym,
            'deviation': s.deviation,
            'b_ode': s.b_ode,
            'b_asym': s.b_asym,
            'deviation_b': s.deviation_b,
            'deviation_leading': s.deviation_leading,
            'dist_Q': s.dist_Q,
            'used': s.used,
            'corrected': s.corrected,
            'tail_bound': s.tail_bound
        } for s in report.samples],
    }
    _emit(output.dump_json(summary), args.out)
    return 0


def cmd_stokes(args):
    t = np.inf if args.t == 'inf' else float(args.t)
    point = boutroux.solve_A(args.phi)
    graph = stokes.stokes_graph(t, args.phi, point.A, _theta(args))
    record = stokes.graph_record(graph)
    if np.isinf(t):
        record['expected_edges'] = [list(e)
                                    for e in stokes.expected_edges(args.phi)]
    if args.out:
        output.ensure_dir(args.out)
        stokes.plot_graph(graph, args.out)
    _emit(output.dump_json(record), args.json)
    return 0


def cmd_check(args):
    if args.list:
        for name in checks.list_checks():
            print(name)
        return 0
    names = args.only or checks.list_checks()
    unknown = [n for n in names if n not in checks.list_checks()]
    if unknown:
        raise InputError("Unknown checks: " + ', '.join(unknown))
    f = Figlet(font='standard')
    print(f.renderText('pvasym check'))
    results = []
    with alive_bar(len(names)) as bar:
        for name in names:
            res = checks.run_check(name)
            results.append(res)
            bar()
    for res in results:
        print("%-26s %s  %.3e (tol %.1e)" %
              (res.name, 'PASS' if res.passed else 'FAIL', res.value,
               res.tol))
    if all(r.passed for r in results):
        return 0
    return NumericalError.exit_code


def _add_theta(parser):
    for flag in ('--theta0', '--theta1', '--thetainf'):
        parser.add_argument(flag,
                            type=parse_complex,
                            default=0j,
                            help="Formal monodromy exponent, as re[,im]")


def _add_monodromy(parser):
    _add_theta(parser)
    parser.add_argument(
        '--monodromy',
        help="JSON file with theta, M0 and M1 ('-' reads stdin); "
        "overrides the chart flags")
    for flag in ('--q0', '--q1', '--r'):
        parser.add_argument(flag,
                            type=parse_complex,
                            help="Chart coordinate, as re[,im]")
    parser.add_argument('--phi',
                        type=float,
                        required=True,
                        help="Ray angle arg x")


def build_parser():
    argparser = argparse.ArgumentParser(
        prog='pvasym',
        description='Elliptic asymptotics of Painleve V transcendents')
    argparser.add_argument('-v',
                           '--verbose',
                           action='count',
                           default=0,
                           help="More logging (repeat for debug)")
    argparser.add_argument(
        '--config',
        help="JSON file laid over the default tolerances and parameters")
    sub = argparser.add_subparsers(dest='command')
    sub.required = True

    p = sub.add_parser('solve', help="Solve the Boutroux equations at phi")
    p.add_argument('--phi', type=float, required=True)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser('trajectory', help="Sample A_phi on [-pi/2, pi/2]")
    p.add_argument('--points',
                   type=int,
                   default=None,
                   help="Points on [0, pi/2] (default from the configuration)")
    p.add_argument('--out', help="CSV file (default: stdout)")
    p.add_argument('--svg', help="SVG file of the loop")
    p.set_defaults(func=cmd_trajectory)

    p = sub.add_parser('params', help="Phase shift x0 and beta0 on a ray")
    _add_monodromy(p)
    p.add_argument('--out', help="JSON file (default: stdout)")
    p.set_defaults(func=cmd_params)

    p = sub.add_parser('eval', help="Sample y along a ray")
    _add_monodromy(p)
    p.add_argument('--t0', type=float, default=30.0)
    p.add_argument('--t1', type=float, default=60.0)
    p.add_argument('--points', type=int, default=61)
    p.add_argument('--correction', choices=['on', 'off'], default='off')
    p.add_argument('--out', help="CSV file (default: stdout)")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser('compare',
                       help="Asymptotics against direct integration")
    _add_monodromy(p)
    p.add_argument('--r0', type=float, default=40.0)
    p.add_argument('--r1', type=float, default=80.0)
    p.add_argument('--points', type=int, default=None)
    p.add_argument('--correction', choices=['on', 'off'], default='on')
    p.add_argument('--out', help="JSON file (default: stdout)")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser('stokes', help="Stokes graph at (t, phi)")
    _add_theta(p)
    p.add_argument('--phi', type=float, required=True)
    p.add_argument('--t', default='inf', help="A positive number or 'inf'")
    p.add_argument('--out', help="SVG file of the graph")
    p.add_argument('--json', help="JSON file (default: stdout)")
    p.set_defaults(func=cmd_stokes)

    p = sub.add_parser('check', help="Run the invariant suite")
    p.add_argument('--list',
                   action='store_true',
                   help="Print the names of the checks and exit")
    p.add_argument('--only', nargs='*', help="Run only these checks")
    p.set_defaults(func=cmd_check)
    return argparser


def main(argv=None):
    args = build_parser().parse_args(argv)
    level = max(logging.DEBUG, logging.WARNING - 10 * args.verbose)
    logging.basicConfig(level=level,
                        format='%(levelname)s %(name)s: %(message)s')
    try:
        if args.config:
            config.load(args.config)
        return args.func(args)
    except PVError as e:
        print(type(e).__name__ + ": " + str(e), file=sys.stderr)
        return e.exit_code
