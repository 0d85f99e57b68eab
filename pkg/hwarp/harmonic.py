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
Harmonic distortion model of planar shapes.

A map T: (xi, eta) -> (x, y) whose coordinate functions are both harmonic
is fitted from a boundary correspondence by two Dirichlet solves in the
upper half-plane. The source region is first moved into the half-plane by
a similarity, which keeps harmonic functions harmonic.

Images are warped by inverting T per output pixel (damped Newton) and
recovered by applying T directly; both resample piecewise-constantly.
"""

import collections
import concurrent.futures
import logging

import numpy
import scipy.linalg

from hardy import dirichlet
from hwarp import config, profile, raster
from hwarp.raster import Viewport  # noqa

glogger = logging.getLogger("harmonic")

CONVERGED = 0
SINGULAR = 1
NONCONVERGED = 2


class EmbeddingError(ValueError):
    pass


class SingularJacobianError(ArithmeticError):
    def __init__(self, msg, point=None, det=None):
        super().__init__(msg)
        self.point = point
        self.det = det


class NonConvergenceError(ArithmeticError):
    def __init__(self, msg, best=None, residual=None):
        super().__init__(msg)
        self.best = best
        self.residual = residual


class BoundaryCorrespondence(object):
    """Pairs of source boundary points (xi, eta) and target points (x, y)."""

    def __init__(self, source, target):
        source = numpy.array(source, dtype=float)
        target = numpy.array(target, dtype=float)
        if source.ndim != 2 or source.shape[1] != 2 or target.ndim != 2 or target.shape[1] != 2:
            raise ValueError("correspondence points must be lists of (x, y) pairs")
        if len(source) != len(target):
            raise ValueError("{0} source points but {1} target points".format(len(source), len(target)))
        if len(source) < 3:
            raise ValueError("a correspondence needs at least 3 point pairs, got {0}".format(len(source)))
        if not (numpy.all(numpy.isfinite(source)) and numpy.all(numpy.isfinite(target))):
            raise ValueError("correspondence points must be finite")
        if len(numpy.unique(source, axis=0)) != len(source):
            raise ValueError("source points must be pairwise distinct")

        source.setflags(write=False)
        target.setflags(write=False)
        self.source = source
        self.target = target

    def centroid(self):
        return float(self.source[:, 0].mean()), float(self.source[:, 1].mean())

    def __len__(self):
        return len(self.source)

    def __repr__(self):
        return 'BoundaryCorrespondence(N={0})'.format(len(self.source))


class Embedding(collections.namedtuple('Embedding', ('scale', 'dx', 'dy'))):
    """Similarity (xi, eta) -> (scale * xi + dx, scale * eta + dy)."""

    __slots__ = ()

    def forward(self, xi, eta):
        return (self.scale * numpy.asarray(xi, dtype=float) + self.dx,
                self.scale * numpy.asarray(eta, dtype=float) + self.dy)

    def inverse(self, x, y):
        return ((numpy.asarray(x, dtype=float) - self.dx) / self.scale,
                (numpy.asarray(y, dtype=float) - self.dy) / self.scale)


def embed_to_halfplane(points, y_min=config.EMBED_Y_MIN):
    """Similarity taking the points' bounding box to a box of larger side 1
    whose bottom edge is at height y_min."""

    points = numpy.asarray(points, dtype=float).reshape(-1, 2)
    if len(points) == 0:
        raise EmbeddingError("no points to embed")
    if not y_min > 0:
        raise EmbeddingError("y_min must be > 0, not {0}".format(y_min))

    lo = points.min(axis=0)
    hi = points.max(axis=0)
    side = float(max(hi - lo))
    if not side > 0:
        raise EmbeddingError("all points coincide, cannot embed")

    s = 1.0 / side
    return Embedding(s, -s * float(lo[0]), y_min - s * float(lo[1]))


JacobianValue = collections.namedtuple('JacobianValue', ('dx_dxi', 'dy_dxi', 'dx_deta', 'dy_deta', 'det'))


def affine_fit(source, target):
    """Least-squares affine map (xi, eta) -> (x, y) through the point pairs.

    Returns a 2 x 3 array; row k is (offset, d/dxi, d/deta) of coordinate k.
    """

    source = numpy.asarray(source, dtype=float).reshape(-1, 2)
    target = numpy.asarray(target, dtype=float).reshape(-1, 2)
    design = numpy.column_stack([numpy.ones(len(source)), source])
    coeffs, _, _, _ = scipy.linalg.lstsq(design, target)
    return coeffs.T


class HarmonicMap(object):
    """A fitted map T = affine part + harmonic correction.

    The correction is (u_x, u_y) evaluated at the embedded point; `problem`
    holds the x-coordinate Dirichlet problem (targets minus the affine part).
    Immutable once built; safe to share between threads.
    """

    def __init__(self, embed, x_solution, y_solution, lam, correspondence, problem, affine=None):
        self.embed = embed
        self.x_solution = x_solution
        self.y_solution = y_solution
        self.lam = lam
        self.correspondence = correspondence
        self.problem = problem

        affine = numpy.zeros((2, 3)) if affine is None else numpy.array(affine, dtype=float)
        if affine.shape != (2, 3):
            raise ValueError("affine part must be 2 x 3, not {0}".format(affine.shape))
        affine.setflags(write=False)
        self.affine = affine

    def centroid(self):
        return self.correspondence.centroid()

    def boundary_residual(self):
        """Largest distance between T(source_j) and target_j."""

        xs, ys = apply_many(self, self.correspondence.source[:, 0], self.correspondence.source[:, 1])
        return float(numpy.max(numpy.hypot(xs - self.correspondence.target[:, 0],
                                           ys - self.correspondence.target[:, 1])))

    def __repr__(self):
        return 'HarmonicMap(N={0}, lambda={1!r})'.format(len(self.correspondence), self.lam)


@profile.trackcpu
def fit_map(corr, lam=config.FIT_LAMBDA, method='recursive', y_min=config.EMBED_Y_MIN, affine=True):
    """Fits both coordinate functions of T to the correspondence.

    With `affine` the least-squares affine map through the point pairs is
    taken out first and the Dirichlet problems fit what is left, so affine
    correspondences are reproduced exactly. Affine maps are harmonic, so T
    is harmonic either way. Both problems share points, arc-length weights
    and lambda, so they share one kernel chain.
    """

    embed = embed_to_halfplane(corr.source, y_min)
    a = affine_fit(corr.source, corr.target) if affine else numpy.zeros((2, 3))
    rest = corr.target - numpy.column_stack([numpy.ones(len(corr)), corr.source]).dot(a.T)

    ex, ey = embed.forward(corr.source[:, 0], corr.source[:, 1])
    problem = dirichlet.DirichletProblem.from_arrays(ex, ey, rest[:, 0], lam)
    x_solution, y_solution = dirichlet.solve_shared(problem, [rest[:, 0], rest[:, 1]], method)

    m = HarmonicMap(embed, x_solution, y_solution, float(lam), corr, problem, a)
    glogger.info("fitted harmonic map: N={0} lambda={1} boundary residual={2:.3g}".format(
        len(corr), lam, m.boundary_residual()))
    return m


def _embedded(m, xs, ys):
    ex, ey = m.embed.forward(xs, ys)
    if numpy.any(~(ey > 0)):
        raise EmbeddingError("point lies outside the upper half-plane after embedding")
    return ex, ey


def affine_part(m, xs, ys):
    """The affine part of T at (xs, ys)."""

    xs = numpy.asarray(xs, dtype=float)
    ys = numpy.asarray(ys, dtype=float)
    a = m.affine
    return a[0, 0] + a[0, 1] * xs + a[0, 2] * ys, a[1, 0] + a[1, 1] * xs + a[1, 2] * ys


def apply_many(m, xs, ys):
    ex, ey = _embedded(m, xs, ys)
    ax, ay = affine_part(m, xs, ys)
    return ax + dirichlet.evaluate_many(m.x_solution, ex, ey), ay + dirichlet.evaluate_many(m.y_solution, ex, ey)


def apply(m, p):
    x, y = apply_many(m, p[0], p[1])
    return float(x), float(y)


def jacobian_many(m, xs, ys):
    """Partial derivatives of T with respect to (xi, eta), through the embedding."""

    ex, ey = _embedded(m, xs, ys)
    s = m.embed.scale
    a = m.affine
    gxx, gxy = dirichlet.evaluate_grad_many(m.x_solution, ex, ey)
    gyx, gyy = dirichlet.evaluate_grad_many(m.y_solution, ex, ey)
    dx_dxi = a[0, 1] + s * gxx
    dx_deta = a[0, 2] + s * gxy
    dy_dxi = a[1, 1] + s * gyx
    dy_deta = a[1, 2] + s * gyy
    return JacobianValue(dx_dxi, dy_dxi, dx_deta, dy_deta, dx_dxi * dy_deta - dx_deta * dy_dxi)


def jacobian(m, p):
    j = jacobian_many(m, p[0], p[1])
    return JacobianValue(*(float(v) for v in j))


def _residual(m, xs, ys, tx, ty):
    """|T(p) - t|, infinite where p cannot be embedded."""

    ex, ey = m.embed.forward(xs, ys)
    ok = (ey > 0) & numpy.isfinite(ex)
    r = numpy.full(xs.shape, numpy.inf)
    fx = numpy.full(xs.shape, numpy.nan)
    fy = numpy.full(xs.shape, numpy.nan)
    if numpy.any(ok):
        ax, ay = affine_part(m, xs[ok], ys[ok])
        fx[ok] = ax + dirichlet.evaluate_many(m.x_solution, ex[ok], ey[ok])
        fy[ok] = ay + dirichlet.evaluate_many(m.y_solution, ex[ok], ey[ok])
        r[ok] = numpy.hypot(fx[ok] - tx[ok], fy[ok] - ty[ok])
    return r, fx, fy


def invert_many(m, tx, ty, gx, gy,
                max_iterations=config.NEWTON_MAX_ITERATIONS,
                tolerance=config.NEWTON_TOLERANCE,
                max_halvings=config.NEWTON_MAX_HALVINGS,
                singular=config.SINGULAR_DET):
    """Damped Newton iteration for T(p) = t from the guesses g, per point.

    Returns (px, py, status, residual). A point is SINGULAR once the
    Jacobian determinant at its iterate drops below `singular`, and
    NONCONVERGED when it runs out of iterations or no halving of the step
    reduces its residual.
    """

    tx = numpy.array(tx, dtype=float).reshape(-1)
    ty = numpy.array(ty, dtype=float).reshape(-1)
    px = numpy.array(numpy.broadcast_to(gx, tx.shape), dtype=float)
    py = numpy.array(numpy.broadcast_to(gy, ty.shape), dtype=float)

    status = numpy.full(tx.shape, NONCONVERGED, dtype=numpy.int8)
    active = numpy.ones(tx.shape, dtype=bool)
    res, fx, fy = _residual(m, px, py, tx, ty)

    for iteration in range(max_iterations + 1):
        done = active & (res <= tolerance)
        status[done] = CONVERGED
        active &= ~done
        if iteration == max_iterations or not numpy.any(active):
            break

        idx = numpy.flatnonzero(active)
        j = jacobian_many(m, px[idx], py[idx])
        sing = ~(j.det >= singular)
        if numpy.any(sing):
            status[idx[sing]] = SINGULAR
            active[idx[sing]] = False
            keep = ~sing
            idx = idx[keep]
            j = JacobianValue(*(v[keep] for v in j))
            if len(idx) == 0:
                break

        rx = fx[idx] - tx[idx]
        ry = fy[idx] - ty[idx]
        step_xi = -(j.dy_deta * rx - j.dx_deta * ry) / j.det
        step_eta = -(j.dx_dxi * ry - j.dy_dxi * rx) / j.det

        pending = numpy.ones(len(idx), dtype=bool)
        t = 1.0
        for _ in range(max_halvings + 1):
            sub = idx[pending]
            cx = px[sub] + t * step_xi[pending]
            cy = py[sub] + t * step_eta[pending]
            cr, cfx, cfy = _residual(m, cx, cy, tx[sub], ty[sub])
            better = cr < res[sub]

            acc = sub[better]
            px[acc] = cx[better]
            py[acc] = cy[better]
            res[acc] = cr[better]
            fx[acc] = cfx[better]
            fy[acc] = cfy[better]

            pending[numpy.flatnonzero(pending)[better]] = False
            if not numpy.any(pending):
                break
            t *= 0.5

        # no damped step helps; the iterate is as good as it gets
        active[idx[pending]] = False

    return px, py, status, res


def invert_point(m, target, guess, **kwargs):
    """Returns p with |T(p) - target| <= tolerance, starting from guess.

    Keyword arguments are passed on to invert_many.
    """

    px, py, status, res = invert_many(m, [target[0]], [target[1]], guess[0], guess[1], **kwargs)
    p = (float(px[0]), float(py[0]))
    if status[0] == SINGULAR:
        raise SingularJacobianError("singular Jacobian while inverting at {0}".format(target), point=p)
    if status[0] != CONVERGED:
        raise NonConvergenceError("Newton iteration did not converge for {0}".format(target),
                                  best=p, residual=float(res[0]))
    return p


WarpReport = collections.namedtuple('WarpReport', ('pixels', 'mapped', 'failed', 'outside', 'det_min', 'det_max',
                                                   'greyness_in', 'greyness_out', 'greyness_weighted'))


def _blocks(height, block_rows):
    return [(r, min(r + block_rows, height)) for r in range(0, height, block_rows)]


def _run_blocks(fn, height, block_rows, workers):
    blocks = _blocks(height, block_rows)
    if workers > 1 and len(blocks) > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, blocks))
    return [fn(b) for b in blocks]


def _invert_block(m, qx, qy, r0, r1):
    """Inverts T for output rows [r0, r1); the first row starts from the
    centroid, later rows from the row above. Failures retry from the centroid."""

    cx, cy = m.centroid()
    width = qx.shape[1]
    px = numpy.empty((r1 - r0, width))
    py = numpy.empty((r1 - r0, width))
    status = numpy.empty((r1 - r0, width), dtype=numpy.int8)

    gx = numpy.full(width, cx)
    gy = numpy.full(width, cy)
    for i, r in enumerate(range(r0, r1)):
        x, y, st, _ = invert_many(m, qx[r], qy[r], gx, gy)
        retry = st != CONVERGED
        if i > 0 and numpy.any(retry):
            rx, ry, rst, _ = invert_many(m, qx[r][retry], qy[r][retry], cx, cy)
            x[retry] = rx
            y[retry] = ry
            st[retry] = rst

        px[i] = x
        py[i] = y
        status[i] = st

        ok = st == CONVERGED
        gx = numpy.where(ok, x, cx)
        gy = numpy.where(ok, y, cy)

    return px, py, status


@profile.trackcpu
def warp_image(m, img, viewport=raster.UNIT_SQUARE, out_width=None, out_height=None, out_viewport=None,
               workers=1, block_rows=config.BLOCK_ROWS, background=config.BACKGROUND):
    """Resamples img (covering `viewport` in source coordinates) under T.

    Every output pixel centre q is pulled back to p = T^-1(q) and takes the
    value of the source pixel containing p. Pixels that fail to invert or
    land outside the source get the background level.

    Rows are inverted in blocks of `block_rows`. The first row of a block
    starts Newton from the source centroid; every later row starts each
    pixel from the converged pre-image of the pixel directly above it, so a
    whole row is one vectorised Newton run and the result does not depend
    on `workers`.
    """

    out_width = img.width if out_width is None else out_width
    out_height = img.height if out_height is None else out_height
    out_viewport = viewport if out_viewport is None else out_viewport

    qx, qy = raster.pixel_centres(out_width, out_height, out_viewport)

    def one(block):
        r0, r1 = block
        return _invert_block(m, qx, qy, r0, r1)

    results = _run_blocks(one, out_height, block_rows, workers)
    px = numpy.concatenate([r[0] for r in results])
    py = numpy.concatenate([r[1] for r in results])
    status = numpy.concatenate([r[2] for r in results])

    ok = status == CONVERGED
    values, inside = raster.pixel_lookup(img, viewport, numpy.where(ok, px, numpy.nan),
                                         numpy.where(ok, py, numpy.nan), background)
    out = raster.GreyImage(values, img.levels)

    if numpy.any(ok):
        det = jacobian_many(m, px[ok], py[ok]).det
        det_min, det_max = float(det.min()), float(det.max())
    else:
        det_min = det_max = None

    failed = int(numpy.count_nonzero(~ok))
    outside = int(numpy.count_nonzero(ok & ~inside))
    area_in = (viewport.x1 - viewport.x0) * (viewport.y1 - viewport.y0) / (img.width * img.height)
    area_out = ((out_viewport.x1 - out_viewport.x0) * (out_viewport.y1 - out_viewport.y0) /
                (out_width * out_height))

    report = WarpReport(pixels=out_width * out_height,
                        mapped=int(numpy.count_nonzero(ok & inside)),
                        failed=failed,
                        outside=outside,
                        det_min=det_min,
                        det_max=det_max,
                        greyness_in=raster.total_greyness(img),
                        greyness_out=raster.total_greyness(out),
                        greyness_weighted=greyness_balance(m, img, viewport) * area_in / area_out)

    if failed:
        glogger.warning("warp: {0} of {1} pixels failed to invert".format(failed, report.pixels))
    glogger.info("warp: {0} pixels mapped, {1} outside the source".format(report.mapped, outside))
    return out, report


@profile.trackcpu
def recover_image(m, distorted, viewport=raster.UNIT_SQUARE, out_width=None, out_height=None, out_viewport=None,
                  workers=1, block_rows=config.BLOCK_ROWS, background=config.BACKGROUND):
    """Undoes a warp by T: output pixel centre p takes the distorted image's
    value at T(p). No inversion is needed in this direction."""

    out_width = distorted.width if out_width is None else out_width
    out_height = distorted.height if out_height is None else out_height
    out_viewport = viewport if out_viewport is None else out_viewport

    xs, ys = raster.pixel_centres(out_width, out_height, out_viewport)
    ex, ey = m.embed.forward(xs, ys)
    embeddable = ey > 0

    def one(block):
        r0, r1 = block
        tx = numpy.full((r1 - r0, out_width), numpy.nan)
        ty = numpy.full((r1 - r0, out_width), numpy.nan)
        ok = embeddable[r0:r1]
        if numpy.any(ok):
            tx[ok], ty[ok] = apply_many(m, xs[r0:r1][ok], ys[r0:r1][ok])
        return tx, ty

    results = _run_blocks(one, out_height, block_rows, workers)
    tx = numpy.concatenate([r[0] for r in results])
    ty = numpy.concatenate([r[1] for r in results])

    values, inside = raster.pixel_lookup(distorted, viewport, tx, ty, background)
    out = raster.GreyImage(values, distorted.levels)

    report = WarpReport(pixels=out_width * out_height,
                        mapped=int(numpy.count_nonzero(inside)),
                        failed=0,
                        outside=int(numpy.count_nonzero(~inside)),
                        det_min=None,
                        det_max=None,
                        greyness_in=raster.total_greyness(distorted),
                        greyness_out=raster.total_greyness(out),
                        greyness_weighted=None)
    glogger.info("recover: {0} pixels mapped, {1} outside the distorted image".format(report.mapped, report.outside))
    return out, report


def greyness_balance(m, img, viewport=raster.UNIT_SQUARE):
    """Sum over source pixels of grey value times det J, in source pixel units.

    Under a change of variables this is what the warped image's total
    greyness should be when the output grid has the source's pixel area.
    """

    xs, ys = raster.pixel_centres(img.width, img.height, viewport)
    det = jacobian_many(m, xs, ys).det
    return float(numpy.sum(img.pixels.astype(numpy.float64) * det))


def probe_points(n, lo=0.2, hi=0.8):
    """n x n interior probes of the unit square."""

    t = numpy.linspace(lo, hi, n)
    gx, gy = numpy.meshgrid(t, t)
    return gx.reshape(-1), gy.reshape(-1)
