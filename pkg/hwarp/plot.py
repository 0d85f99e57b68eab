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
Optional PNG figures. matplotlib is only imported when a figure is asked for.
"""

import logging

import numpy

glogger = logging.getLogger("plot")


def _pyplot():
    import matplotlib
    matplotlib.use('Agg')
    import matplotlib.pyplot as plt
    return plt


def plot_convergence(steps, path):
    """Boundary residuals and H2 norm against lambda, log-log."""

    plt = _pyplot()
    ok = [s for s in steps if s.solution is not None]
    lam = [s.lam for s in ok]

    fig, ax = plt.subplots(figsize=(6, 4.5))
    ax.loglog(lam, [s.max_residual for s in ok], 'o-', label='max residual')
    ax.loglog(lam, [s.rms_residual for s in ok], 's-', label='rms residual')
    ax.loglog(lam, [s.norm for s in ok], '^--', label='H2 norm')
    ax.invert_xaxis()
    ax.set_xlabel('lambda')
    ax.grid(True, which='both', alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=100)
    plt.close(fig)
    glogger.debug("wrote {0}".format(path))


def plot_det_heatmap(rows, path):
    """Jacobian determinant over the probe grid; rows as produced by output.field_rows."""

    plt = _pyplot()
    a = numpy.array(rows, dtype=float)
    xi = numpy.unique(a[:, 0])
    eta = numpy.unique(a[:, 1])

    det = numpy.full((len(eta), len(xi)), numpy.nan)
    det[numpy.searchsorted(eta, a[:, 1]), numpy.searchsorted(xi, a[:, 0])] = a[:, 4]

    fig, ax = plt.subplots(figsize=(6, 5))
    mesh = ax.pcolormesh(xi, eta, det, shading='nearest', cmap='viridis')
    fig.colorbar(mesh, ax=ax, label='det J')
    ax.set_xlabel('xi')
    ax.set_ylabel('eta')
    ax.set_aspect('equal')
    fig.tight_layout()
    fig.savefig(path, dpi=100)
    plt.close(fig)
    glogger.debug("wrote {0}".format(path))
