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
Result writers: CSV reports and the SVG rendering of a deformed grid.

All floating point fields are written as the shortest decimal that reads
back to the same value.
"""

import logging

import numpy

from hardy import dirichlet
from hwarp import config, harmonic, raster
from hwarp.util import fmt, csv_quote

glogger = logging.getLogger("output")


def _write_lines(path, header, lines):
    with open(path, 'w', newline='\n') as f:
        f.write(header + '\n')
        for line in lines:
            f.write(line + '\n')
    glogger.debug("wrote {0}".format(path))


class SolutionCSV(object):
    HEADER = 'j,x_j,y_j,A_j,lambda_j,c_j,residual_j'
    TEMPLATE = '{j},{x},{y},{value},{weight},{coeff},{residual}'

    @classmethod
    def lines(cls, problem, solution):
        r = dirichlet.residuals(problem, solution)
        for j in range(len(problem)):
            yield cls.TEMPLATE.format(j=j,
                                      x=fmt(problem.xs[j]),
                                      y=fmt(problem.ys[j]),
                                      value=fmt(problem.values[j]),
                                      weight=fmt(problem.weights[j]),
                                      coeff=fmt(solution.coeffs[j]),
                                      residual=fmt(r[j]))


def write_solution_csv(path, problem, solution):
    """One row per sample: location, data, the weight actually used, c_j and the fit."""

    _write_lines(path, SolutionCSV.HEADER, SolutionCSV.lines(problem, solution))


CONVERGENCE_HEADER = 'lambda,max_residual,rms_residual,norm,objective,probe_delta,error'
CONVERGENCE_TEMPLATE = '{lam},{rmax},{rrms},{norm},{obj},{delta},{error}'


def write_convergence_csv(path, steps):
    _write_lines(path, CONVERGENCE_HEADER, (CONVERGENCE_TEMPLATE.format(lam=fmt(s.lam),
                                                                         rmax=fmt(s.max_residual),
                                                                         rrms=fmt(s.rms_residual),
                                                                         norm=fmt(s.norm),
                                                                         obj=fmt(s.objective),
                                                                         delta=fmt(s.probe_delta),
                                                                         error=csv_quote(s.error))
                                            for s in steps))


WARP_HEADER = 'run,pixels,mapped,failed,outside,det_min,det_max,greyness_in,greyness_out,greyness_weighted'


def write_warp_report_csv(path, reports):
    """reports: list of (run name, WarpReport)."""

    _write_lines(path, WARP_HEADER, (','.join([csv_quote(name), str(r.pixels), str(r.mapped), str(r.failed),
                                               str(r.outside), fmt(r.det_min), fmt(r.det_max),
                                               str(r.greyness_in), str(r.greyness_out),
                                               fmt(r.greyness_weighted)])
                                     for name, r in reports))


METRICS_HEADER = 'comparison,pixels,mae,psnr,exact_match,total_a,total_b'


def write_metrics_csv(path, rows):
    """rows: list of (comparison name, Metrics)."""

    _write_lines(path, METRICS_HEADER, (','.join([csv_quote(name), str(m.pixels), fmt(m.mae), fmt(m.psnr),
                                                  fmt(m.exact_match), fmt(m.total_a), fmt(m.total_b)])
                                        for name, m in rows))


def field_rows(m, xs, ys):
    """(xi, eta, x, y, det J) at every probe point."""

    xs = numpy.asarray(xs, dtype=float).reshape(-1)
    ys = numpy.asarray(ys, dtype=float).reshape(-1)
    tx, ty = harmonic.apply_many(m, xs, ys)
    det = harmonic.jacobian_many(m, xs, ys).det
    return list(zip(xs.tolist(), ys.tolist(), tx.tolist(), ty.tolist(), det.tolist()))


def export_field_csv(path, m, xs, ys):
    rows = field_rows(m, xs, ys)
    _write_lines(path, 'xi,eta,x,y,det', (','.join(fmt(v) for v in row) for row in rows))
    return rows


def grid_polylines(m, n=config.SVG_GRID_CELLS, samples=config.SVG_SAMPLES_PER_LINE, viewport=raster.UNIT_SQUARE):
    """Images under T of the lines of an n x n grid over `viewport`."""

    t = numpy.linspace(0.0, 1.0, samples + 1)
    along_x = viewport.x0 + t * (viewport.x1 - viewport.x0)
    along_y = viewport.y0 + t * (viewport.y1 - viewport.y0)
    lines = []
    for k in range(n + 1):
        cx = numpy.full_like(t, viewport.x0 + k / n * (viewport.x1 - viewport.x0))
        cy = numpy.full_like(t, viewport.y0 + k / n * (viewport.y1 - viewport.y0))
        lines.append(harmonic.apply_many(m, cx, along_y))
        lines.append(harmonic.apply_many(m, along_x, cy))
    return lines


def svg_grid(m, n=config.SVG_GRID_CELLS, samples=config.SVG_SAMPLES_PER_LINE, size=config.SVG_SIZE,
             viewport=raster.UNIT_SQUARE):
    lines = grid_polylines(m, n, samples, viewport)
    xs = numpy.concatenate([x for x, _ in lines])
    ys = numpy.concatenate([y for _, y in lines])
    x0, x1 = float(xs.min()), float(xs.max())
    y0, y1 = float(ys.min()), float(ys.max())
    span = max(x1 - x0, y1 - y0, 1e-12)
    margin = 0.05 * size
    k = (size - 2 * margin) / span

    out = ['<?xml version="1.0" encoding="UTF-8"?>',
           '<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{0}" height="{0}" '
           'viewBox="0 0 {0} {0}">'.format(size),
           '<rect width="{0}" height="{0}" fill="white"/>'.format(size)]
    for x, y in lines:
        pts = ' '.join('{0:.4f},{1:.4f}'.format(margin + k * (a - x0), size - margin - k * (b - y0))
                       for a, b in zip(x, y))
        out.append('<polyline fill="none" stroke="black" stroke-width="1" points="{0}"/>'.format(pts))
    out.append('</svg>')
    return '\n'.join(out) + '\n'


def export_svg_grid(path, m, n=config.SVG_GRID_CELLS, samples=config.SVG_SAMPLES_PER_LINE,
                    viewport=raster.UNIT_SQUARE):
    """Writes the SVG only once it has rendered, so a failure leaves no file."""

    text = svg_grid(m, n, samples, viewport=viewport)
    with open(path, 'w', newline='\n') as f:
        f.write(text)
    glogger.debug("wrote {0}".format(path))
