# -*- mode: python; indent-tabs-mode: nil -*-

# Part of hardywarp: Hardy-space Dirichlet solver and harmonic image warping
# Copyright (C) 2026  The hardywarp authors

# This program is free software: you can redistribute it and/or modify
# it under the terms of the GNU Affero General Public License as
# published by the Free Software Foundation, either version 3 of the
# License, or (at your option) any later version.

# This program is distributed in the hope that it will be useful,
# but WITHOUT ANY WARRANTY; without even the implied warranty of
# MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.  See the
# GNU Affero General Public License for more details.

# You should have received a copy of the GNU Affero General Public License
# along with this program.  If not, see <http://www.gnu.org/licenses/>.

"""
Command line entry point, arg parsing, etc.

Exit codes: 0 success, 2 bad input, 3 solver conditioning failure,
4 harmonic map fitting failure. stdout carries only the run summary.
"""

import argparse
import logging
import os
import sys

from hardy import dirichlet
from hwarp import config, harmonic, loader, output, profile, raster, util

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_SOLVER = 3
EXIT_FIT = 4


def positive_float(s):
    try:
        v = float(s)
    except ValueError:
        raise argparse.ArgumentTypeError("{} is not a number".format(s))
    if not v > 0 or v == float('inf'):
        raise argparse.ArgumentTypeError("{} should be a finite number > 0".format(s))
    return v


def positive_int(s):
    try:
        v = int(s)
    except ValueError:
        raise argparse.ArgumentTypeError("{} is not an integer".format(s))
    if v < 1:
        raise argparse.ArgumentTypeError("{} should be >= 1".format(s))
    return v


def schedule(s):
    try:
        return dirichlet.check_schedule(float(p) for p in s.split(','))
    except ValueError as e:
        raise argparse.ArgumentTypeError("bad lambda schedule '{}': {}".format(s, e))


def unit_alpha(s):
    try:
        v = float(s)
    except ValueError:
        raise argparse.ArgumentTypeError("{} is not a number".format(s))
    if not 0 <= v < 1:
        raise argparse.ArgumentTypeError("alpha should be in [0, 1), not {}".format(s))
    return v


def viewport(s):
    try:
        return raster.Viewport(*(float(p) for p in s.split(',')))
    except (TypeError, ValueError):
        raise argparse.ArgumentTypeError("{} should be in 'x0,y0,x1,y1' format with x1 > x0, y1 > y0".format(s))


class FitFailed(Exception):
    pass


class HardyWarp(object):
    """The hardywarp command line tool.

    Derive from this if you want to add options, etc.
    """

    def __init__(self, out=None):
        self.out = sys.stdout if out is None else out
        self.logger = logging.getLogger("hardywarp")

    def summary(self, line):
        print(line, file=self.out)

    def add_common_args(self, parser):
        parser.add_argument('--verbose', '-v',
                            help="log debug output to stderr.",
                            action='store_true',
                            default=False)
        parser.add_argument('--seed',
                            help="seed for generated test images (default: %(default)s).",
                            type=int,
                            default=0)
        parser.add_argument('--workers',
                            help="threads used for per-pixel work; results do not depend on it (default: %(default)s).",
                            type=positive_int,
                            default=1)

    def add_solver_args(self, parser):
        parser.add_argument('--lambda',
                            dest='lam',
                            help="regularization parameter, overrides the input file.",
                            type=positive_float,
                            default=None)
        parser.add_argument('--method',
                            help="recursive kernel update or dense closed form (default: %(default)s).",
                            choices=dirichlet.METHODS,
                            default='recursive')

    def add_viewport_args(self, parser):
        parser.add_argument('--viewport',
                            help="planar rectangle x0,y0,x1,y1 of the source region "
                                 "(default: bounding box of the source points).",
                            type=viewport,
                            default=None)

    def add_image_args(self, parser):
        self.add_viewport_args(parser)
        parser.add_argument('--report',
                            help="write a CSV coverage report here.",
                            default=None)

    def make_arg_parser(self):
        common = argparse.ArgumentParser(add_help=False)
        self.add_common_args(common.add_argument_group('Common options'))

        parser = argparse.ArgumentParser(prog='hardywarp',
                                         description="Hardy-space Dirichlet solver and harmonic image warping.")
        sub = parser.add_subparsers(dest='command', metavar='COMMAND')
        sub.required = True

        p = sub.add_parser('solve', parents=[common], help="solve a discrete Dirichlet problem.")
        p.add_argument('problem', help="problem JSON file.")
        p.add_argument('--out', help="write the solution CSV here.", default=None)
        self.add_solver_args(p.add_argument_group('Solver options'))
        p.set_defaults(handler=self.cmd_solve)

        p = sub.add_parser('convergence', parents=[common], help="solve along a decreasing lambda schedule.")
        p.add_argument('problem', help="problem JSON file.")
        p.add_argument('--schedule',
                       help="comma separated, strictly decreasing lambdas (default: %(default)s).",
                       type=schedule,
                       default=','.join(repr(v) for v in config.SCHEDULE))
        p.add_argument('--out', help="write the convergence CSV here.", default=None)
        p.add_argument('--probes',
                       help="interior probe grid density (default: %(default)s).",
                       type=positive_int,
                       default=config.PROBE_DENSITY)
        p.add_argument('--plot', help="write a PNG of residuals against lambda.", default=None)
        self.add_solver_args(p.add_argument_group('Solver options'))
        p.set_defaults(handler=self.cmd_convergence)

        for name, handler, text in (('warp', self.cmd_warp, "distort an image by a fitted harmonic map."),
                                    ('recover', self.cmd_recover, "undo the distortion of an image.")):
            p = sub.add_parser(name, parents=[common], help=text)
            p.add_argument('correspondence', help="correspondence JSON file.")
            p.add_argument('image', help="input PGM image.")
            p.add_argument('--out', help="write the resulting PGM here.", required=True)
            self.add_image_args(p.add_argument_group('Image options'))
            self.add_solver_args(p.add_argument_group('Solver options'))
            p.set_defaults(handler=handler)

        p = sub.add_parser('grid-demo', parents=[common], help="press a test image, then recover it.")
        p.add_argument('--n', help="grid cells per side (default: %(default)s).",
                       type=positive_int, default=config.DEMO_CELLS)
        p.add_argument('--size', help="image size in pixels (default: %(default)s).",
                       type=positive_int, default=config.DEMO_SIZE)
        p.add_argument('--alpha', help="quadratic press strength (default: %(default)s).",
                       type=unit_alpha, default=config.PRESS_ALPHA)
        p.add_argument('--pattern', help="test image (default: %(default)s).",
                       choices=('grid', 'portrait'), default='grid')
        p.add_argument('--outdir', help="output directory, created if needed.", required=True)
        p.add_argument('--plot', help="also write a det J heatmap PNG.", action='store_true', default=False)
        self.add_solver_args(p.add_argument_group('Solver options'))
        p.set_defaults(handler=self.cmd_grid_demo)

        p = sub.add_parser('field', parents=[common], help="tabulate a fitted map over a probe grid.")
        p.add_argument('correspondence', help="correspondence JSON file.")
        p.add_argument('--out', help="write the field CSV here.", required=True)
        p.add_argument('--probes', help="probe grid density (default: %(default)s).",
                       type=positive_int, default=config.PROBE_DENSITY)
        p.add_argument('--svg', help="write the deformed grid as SVG here.", default=None)
        p.add_argument('--plot', help="write a det J heatmap PNG here.", default=None)
        self.add_viewport_args(p.add_argument_group('Grid options'))
        self.add_solver_args(p.add_argument_group('Solver options'))
        p.set_defaults(handler=self.cmd_field)

        return parser

    #
    # solver commands
    #

    def load_problem(self, args):
        xs, ys, values, weights, file_lam = loader.load_problem(args.problem)
        lam = loader.resolve_lambda(args.lam, file_lam, config.SOLVE_LAMBDA, self.logger)
        return loader.build_problem(xs, ys, values, weights, lam)

    def cmd_solve(self, args):
        problem = self.load_problem(args)
        solution = dirichlet.solve(problem, args.method)
        rmax, rrms = dirichlet.boundary_residual(problem, solution)
        self.logger.info("solved N={0} lambda={1!r} with the {2} method".format(len(problem), problem.lam,
                                                                              args.method))
        if args.out:
            output.write_solution_csv(args.out, problem, solution)

        self.summary('residual max={0} rms={1}'.format(util.fmt(rmax), util.fmt(rrms)))
        return EXIT_OK

    def cmd_convergence(self, args):
        problem = self.load_problem(args)
        steps = dirichlet.continuation(problem, args.schedule, method=args.method,
                                       probes=args.probes, workers=args.workers)
        if args.out:
            output.write_convergence_csv(args.out, steps)
        if args.plot:
            from hwarp import plot
            plot.plot_convergence(steps, args.plot)

        corner = dirichlet.lcurve_corner(steps)
        if corner is not None:
            self.logger.info("L-curve corner at lambda={0!r}".format(corner))

        failed = 0
        for s in steps:
            if s.error is None:
                self.summary('residual max={0} rms={1}'.format(util.fmt(s.max_residual), util.fmt(s.rms_residual)))
            else:
                failed += 1
                self.summary('residual failed lambda={0}'.format(util.fmt(s.lam)))

        return EXIT_SOLVER if failed else EXIT_OK

    #
    # warp commands
    #

    def fit(self, corr, file_lam, args):
        lam = loader.resolve_lambda(args.lam, file_lam, config.FIT_LAMBDA, self.logger)
        try:
            return harmonic.fit_map(corr, lam, method=args.method)
        except (dirichlet.ConditioningError, harmonic.EmbeddingError) as e:
            raise FitFailed(str(e))

    def image_viewport(self, args, corr):
        if args.viewport is not None:
            return args.viewport
        lo = corr.source.min(axis=0)
        hi = corr.source.max(axis=0)
        return raster.Viewport(lo[0], lo[1], hi[0], hi[1])

    def cmd_warp(self, args):
        corr, file_lam = loader.load_correspondence(args.correspondence)
        img = raster.load_pgm(args.image)
        m = self.fit(corr, file_lam, args)

        out, report = harmonic.warp_image(m, img, self.image_viewport(args, corr), workers=args.workers)
        raster.save_pgm(args.out, out)
        if args.report:
            output.write_warp_report_csv(args.report, [('warp', report)])

        self.summary('pixels={0} failed={1}'.format(report.pixels, report.failed))
        return EXIT_OK

    def cmd_recover(self, args):
        corr, file_lam = loader.load_correspondence(args.correspondence)
        img = raster.load_pgm(args.image)
        m = self.fit(corr, file_lam, args)

        out, report = harmonic.recover_image(m, img, self.image_viewport(args, corr), workers=args.workers)
        raster.save_pgm(args.out, out)
        if args.report:
            output.write_warp_report_csv(args.report, [('recover', report)])

        self.summary('pixels={0} failed={1}'.format(report.pixels, report.failed))
        return EXIT_OK

    def cmd_grid_demo(self, args):
        os.makedirs(args.outdir, exist_ok=True)

        corr = raster.quadratic_press(args.alpha)
        if args.pattern == 'grid':
            original = raster.make_grid_image(args.n, args.size)
        else:
            original = raster.make_portrait_image(args.size, args.seed)

        m = self.fit(corr, None, args)
        distorted, warp_report = harmonic.warp_image(m, original, workers=args.workers)
        recovered, recover_report = harmonic.recover_image(m, distorted, workers=args.workers)

        mask = raster.interior_mask(original)
        rows = [('original/recovered interior', raster.metrics(original, recovered, mask)),
                ('original/distorted interior', raster.metrics(original, distorted, mask)),
                ('original/recovered', raster.metrics(original, recovered))]

        def path(name):
            return os.path.join(args.outdir, name)

        raster.save_pgm(path('original.pgm'), original)
        raster.save_pgm(path('distorted.pgm'), distorted)
        raster.save_pgm(path('recovered.pgm'), recovered)
        output.export_svg_grid(path('grid.svg'), m, args.n)
        output.write_metrics_csv(path('metrics.csv'), rows)
        output.write_warp_report_csv(path('warp.csv'), [('warp', warp_report), ('recover', recover_report)])
        with open(path('correspondence.json'), 'w') as f:
            f.write(loader.correspondence_json(corr, m.lam) + '\n')

        if args.plot:
            from hwarp import plot
            xs, ys = harmonic.probe_points(33, 0.0, 1.0)
            plot.plot_det_heatmap(output.field_rows(m, xs, ys), path('det.png'))

        self.logger.info("interior exact match {0:.4f}, mae {1:.3f}".format(rows[0][1].exact_match, rows[0][1].mae))
        self.summary('pixels={0} failed={1}'.format(warp_report.pixels, warp_report.failed))
        return EXIT_OK

    def cmd_field(self, args):
        corr, file_lam = loader.load_correspondence(args.correspondence)
        m = self.fit(corr, file_lam, args)

        vp = self.image_viewport(args, corr)
        tx, ty = harmonic.probe_points(args.probes, 0.0, 1.0)
        xs = vp.x0 + tx * (vp.x1 - vp.x0)
        ys = vp.y0 + ty * (vp.y1 - vp.y0)
        rows = output.export_field_csv(args.out, m, xs, ys)

        if args.svg:
            output.export_svg_grid(args.svg, m, viewport=vp)
        if args.plot:
            from hwarp import plot
            plot.plot_det_heatmap(rows, args.plot)

        self.summary('points={0}'.format(len(rows)))
        return EXIT_OK

    def run(self, argv=None):
        args = self.make_arg_parser().parse_args(argv)
        util.setup_logging(args.verbose)
        self.logger = util.TaggingLogger(logging.getLogger("hardywarp"), {'tag': args.command})

        try:
            return args.handler(args)
        except FitFailed as e:
            self.logger.error("fitting the harmonic map failed: {0}".format(e))
            return EXIT_FIT
        except dirichlet.ConditioningError as e:
            self.logger.error("solver failed: {0}".format(e))
            return EXIT_SOLVER
        except (ValueError, OSError) as e:
            self.logger.error("{0}".format(e))
            return EXIT_INPUT
        finally:
            profile.dump_cpu_profiles()


def main(argv=None):
    return HardyWarp().run(argv)
