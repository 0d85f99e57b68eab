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
Discrete Dirichlet problems in H2 of the upper half-plane.

Given samples (z_j, A_j, lambda_j) and a regularization parameter lambda, find
F in H2 minimizing

    lambda ||F||^2 + sum_j lambda_j |Re F(z_j) - A_j|^2

The minimizer is u(z) = Re F(z) = sum_j c_j Re K(z, z_j). The coefficients
are found by the recursive kernel update: start from the kernel K / lambda
and add one sample at a time with a rank-one downdate

    R_n(z, w) = R_(n-1)(z, w)
                - lambda_n R_(n-1)(z_n, w) R_(n-1)(z, z_n) / (lambda_n R_(n-1)(z_n, z_n) + 1)

while accumulating the product matrix Ahat with R_N(z, .) = Ahat Re K(z, .).
Then c = Ahat^T (lambda_j A_j). A dense solve of (lambda I + Lambda M) c = Lambda A
gives the same coefficients and serves as a cross-check.
"""

import collections
import concurrent.futures
import logging
import math

import numpy
import scipy.linalg

from hardy import kernel

glogger = logging.getLogger("dirichlet")

# a chain denominator lambda_n R(z_n, z_n) + 1 is >= 1 in exact arithmetic;
# anything below this means the chain has been corrupted
DENOMINATOR_FLOOR = 1e-14

# number of evaluation points handled per kernel block
EVAL_CHUNK = 4096

METHODS = ('recursive', 'dense')


class ConditioningError(ArithmeticError):
    """The kernel chain or the dense system produced unusable values."""
    pass


def _frozen(values):
    a = numpy.array(values, dtype=float)
    a.setflags(write=False)
    return a


class BoundarySample(collections.namedtuple('BoundarySample', ('point', 'value', 'weight'))):
    """One constraint: location z_j, prescribed value A_j, weight lambda_j."""

    __slots__ = ()

    def __new__(cls, point, value, weight):
        if not isinstance(point, kernel.UpperHalfPoint):
            point = kernel.UpperHalfPoint(*point)
        value = float(value)
        weight = float(weight)
        if not math.isfinite(value):
            raise ValueError("sample value {0} is not finite".format(value))
        if not math.isfinite(weight) or weight <= 0:
            raise ValueError("sample weight {0} must be finite and > 0".format(weight))
        return super().__new__(cls, point, value, weight)


class DirichletProblem(object):
    """An ordered list of boundary samples plus the global parameter lambda."""

    def __init__(self, samples, lam):
        samples = tuple(samples)
        if not samples:
            raise ValueError("a Dirichlet problem needs at least one sample")

        lam = float(lam)
        if not math.isfinite(lam) or lam <= 0:
            raise ValueError("lambda must be finite and > 0, not {0}".format(lam))

        self.samples = samples
        self.lam = lam
        self.xs = _frozen([s.point.x for s in samples])
        self.ys = _frozen([s.point.y for s in samples])
        self.values = _frozen([s.value for s in samples])
        self.weights = _frozen([s.weight for s in samples])

    @classmethod
    def from_arrays(cls, xs, ys, values, lam, weights=None):
        """Builds a problem from coordinate arrays; weights default to arc-length shares."""

        if weights is None:
            weights = arc_length_weights(xs, ys)
        if not (len(xs) == len(ys) == len(values) == len(weights)):
            raise ValueError("sample arrays have different lengths")

        samples = [BoundarySample(kernel.UpperHalfPoint(x, y), v, w)
                   for x, y, v, w in zip(xs, ys, values, weights)]
        return cls(samples, lam)

    def with_lambda(self, lam):
        return DirichletProblem(self.samples, lam)

    def with_values(self, values):
        """Same points and weights, new prescribed values."""

        if len(values) != len(self.samples):
            raise ValueError("expected {0} values, got {1}".format(len(self.samples), len(values)))
        return DirichletProblem([s._replace(value=float(v)) for s, v in zip(self.samples, values)], self.lam)

    def permuted(self, order):
        return DirichletProblem([self.samples[i] for i in order], self.lam)

    def __len__(self):
        return len(self.samples)

    def __repr__(self):
        return 'DirichletProblem(N={0}, lambda={1!r})'.format(len(self.samples), self.lam)


class SolutionCoefficients(object):
    """Coefficients c_j of u(z) = sum_j c_j Re K(z, z_j)."""

    def __init__(self, coeffs, samples, lam=None):
        coeffs = numpy.array(coeffs, dtype=float).reshape(-1)
        samples = tuple(samples)
        if len(coeffs) != len(samples):
            raise ValueError("{0} coefficients for {1} samples".format(len(coeffs), len(samples)))
        if not numpy.all(numpy.isfinite(coeffs)):
            raise ConditioningError("solution coefficients are not finite")

        coeffs.setflags(write=False)
        self.coeffs = coeffs
        self.samples = samples
        self.lam = lam
        self.xs = _frozen([s.point.x for s in samples])
        self.ys = _frozen([s.point.y for s in samples])

    def __len__(self):
        return len(self.coeffs)

    def __repr__(self):
        return 'SolutionCoefficients(N={0}, lambda={1!r})'.format(len(self.coeffs), self.lam)


# One step of the recursion, kept so that a finished chain can be extended.
ChainStep = collections.namedtuple('ChainStep', ('index', 'weight', 'denominator',
                                                 'restriction_row', 'chain_row'))


class KernelChainState(collections.namedtuple('KernelChainState', ('step', 'restriction', 'chain', 'lam',
                                                                   'weights', 'xs', 'ys', 'history'))):
    """The recursion after `step` samples have been added.

    restriction: Re K_step(z_i, z_j) over all samples (symmetric)
    chain:       Ahat_step with Re K_step(z, z_k) = (Ahat_step Re K(z, .))_k
    history:     the ChainStep records of the steps taken so far
    xs, ys:      sample coordinates, or None for a chain built from a bare Gram matrix
    """

    __slots__ = ()

    def kernel_vector(self, z):
        """Returns (Re K_step(z, z_k))_k for an arbitrary point z."""

        if self.xs is None:
            raise ValueError("this chain was built without sample coordinates")
        column = kernel.szego_re_array(z.x, z.y, self.xs, self.ys)
        return self.chain.dot(column)


def arc_length_weights(xs, ys):
    """Weight of each sample = its share of the closed boundary polyline,
    scaled by N so the weights average 1.

    Every sample owns half of each of its two adjacent segments. Falls back
    to uniform weights 1 when the polyline has no length or a sample would
    get no share at all (repeated consecutive points).
    """

    xs = numpy.asarray(xs, dtype=float)
    ys = numpy.asarray(ys, dtype=float)
    n = len(xs)
    if n == 0:
        raise ValueError("no sample points")

    seg = numpy.hypot(numpy.roll(xs, -1) - xs, numpy.roll(ys, -1) - ys)
    perimeter = seg.sum()
    if n < 2 or not perimeter > 0:
        return numpy.ones(n)

    weights = 0.5 * n * (seg + numpy.roll(seg, 1)) / perimeter
    if numpy.any(weights <= 0):
        glogger.debug("repeated boundary points, using uniform weights")
        return numpy.ones(n)
    return weights


def _gram(xs, ys):
    return kernel.szego_re_array(xs[:, None], ys[:, None], xs[None, :], ys[None, :])


def gram_matrix(problem):
    """M_ij = Re K(z_i, z_j) for the problem's samples."""

    return _gram(problem.xs, problem.ys)


def chain_arrays(gram, weights, lam, steps=None, xs=None, ys=None):
    """Runs the recursive kernel update on a Gram matrix.

    Zero weights are accepted and leave the chain unchanged. Stops after
    `steps` samples when given (default: all of them).
    """

    gram = numpy.asarray(gram, dtype=float)
    weights = numpy.asarray(weights, dtype=float)
    n = len(weights)
    if gram.shape != (n, n):
        raise ValueError("Gram matrix shape {0} does not match {1} weights".format(gram.shape, n))
    if steps is None:
        steps = n
    if not 0 <= steps <= n:
        raise ValueError("steps must be in [0, {0}], not {1}".format(n, steps))

    restriction = gram / lam
    chain = numpy.identity(n) / lam
    history = []

    for k in range(steps):
        w = weights[k]
        row = restriction[k].copy()
        chain_row = chain[k].copy()
        denominator = w * row[k] + 1.0

        if not (math.isfinite(denominator) and numpy.all(numpy.isfinite(row))):
            raise ConditioningError("non-finite kernel values at step {0}".format(k + 1))
        if denominator < DENOMINATOR_FLOOR:
            raise ConditioningError("chain denominator {0} collapsed at step {1}".format(denominator, k + 1))

        s = w / denominator
        # s * outer(row, row) keeps the restriction exactly symmetric
        restriction -= s * numpy.outer(row, row)
        chain -= numpy.outer(s * row, chain_row)
        history.append(ChainStep(k, w, denominator, row, chain_row))

    if not numpy.all(numpy.isfinite(chain)):
        raise ConditioningError("non-finite entries in the kernel chain")

    return KernelChainState(steps, restriction, chain, lam, weights, xs, ys, tuple(history))


def kernel_chain(problem, steps=None):
    """The recursive kernel update over the problem's samples, in order."""

    state = chain_arrays(gram_matrix(problem), problem.weights, problem.lam, steps=steps,
                         xs=problem.xs, ys=problem.ys)
    glogger.debug("kernel chain: {0} of {1} samples, lambda={2}".format(state.step, len(problem), problem.lam))
    return state


def append_sample(state, sample):
    """Extends a finished chain by one more sample without rebuilding it.

    The earlier downdates are replayed on the new point only (O(N^2)),
    then one more rank-one step is taken.
    """

    if state.xs is None:
        raise ValueError("this chain was built without sample coordinates")
    n = len(state.weights)
    if state.step != n:
        raise ValueError("only a finished chain can be extended ({0} of {1} steps)".format(state.step, n))

    lam = state.lam
    p = sample.point
    v = kernel.szego_re_array(p.x, p.y, state.xs, state.ys) / lam
    s = kernel.szego_re(p, p) / lam
    g = numpy.zeros(n)

    history = []
    for h in state.history:
        t = v[h.index]
        f = h.weight / h.denominator
        v -= (f * t) * h.restriction_row
        s -= f * t * t
        g -= (f * t) * h.chain_row
        history.append(h._replace(restriction_row=numpy.append(h.restriction_row, t),
                                  chain_row=numpy.append(h.chain_row, 0.0)))

    restriction = numpy.empty((n + 1, n + 1))
    restriction[:n, :n] = state.restriction
    restriction[:n, n] = v
    restriction[n, :n] = v
    restriction[n, n] = s

    chain = numpy.zeros((n + 1, n + 1))
    chain[:n, :n] = state.chain
    chain[n, :n] = g
    chain[n, n] = 1.0 / lam

    w = sample.weight
    row = restriction[n].copy()
    chain_row = chain[n].copy()
    denominator = w * row[n] + 1.0
    if not math.isfinite(denominator) or denominator < DENOMINATOR_FLOOR:
        raise ConditioningError("chain denominator {0} collapsed while appending".format(denominator))

    f = w / denominator
    restriction -= f * numpy.outer(row, row)
    chain -= numpy.outer(f * row, chain_row)
    history.append(ChainStep(n, w, denominator, row, chain_row))

    return KernelChainState(n + 1, restriction, chain, lam,
                            numpy.append(state.weights, w),
                            numpy.append(state.xs, p.x),
                            numpy.append(state.ys, p.y),
                            tuple(history))


def state_coefficients(state, values):
    """c = Ahat^T (lambda_j A_j)."""

    return state.chain.T.dot(state.weights * numpy.asarray(values, dtype=float))


def solve_recursive(problem):
    """Solves the problem with the recursive kernel update."""

    state = kernel_chain(problem)
    return SolutionCoefficients(state_coefficients(state, problem.values), problem.samples, problem.lam)


def oracle_arrays(gram, weights, values, lam):
    """Solves (lambda I + Lambda M) c = Lambda A by LU factorization."""

    weights = numpy.asarray(weights, dtype=float)
    values = numpy.asarray(values, dtype=float)
    system = lam * numpy.identity(len(weights)) + weights[:, None] * gram
    try:
        return scipy.linalg.solve(system, weights * values)
    except (scipy.linalg.LinAlgError, ValueError) as e:
        raise ConditioningError("dense system could not be solved: {0}".format(e))


def solve_dense_oracle(problem):
    """Solves the problem directly from the closed form."""

    c = oracle_arrays(gram_matrix(problem), problem.weights, problem.values, problem.lam)
    return SolutionCoefficients(c, problem.samples, problem.lam)


def solve(problem, method='recursive'):
    if method == 'recursive':
        return solve_recursive(problem)
    if method == 'dense':
        return solve_dense_oracle(problem)
    raise ValueError("unknown solver method {0!r}, expected one of {1}".format(method, METHODS))


def solve_shared(problem, value_sets, method='recursive'):
    """Solves several right-hand sides over the problem's points and weights.

    The chain (or the LU factorization) depends only on points, weights and
    lambda, so it is built once.
    """

    if method == 'recursive':
        state = kernel_chain(problem)
        coeffs = [state_coefficients(state, values) for values in value_sets]
    elif method == 'dense':
        system = problem.lam * numpy.identity(len(problem)) + problem.weights[:, None] * gram_matrix(problem)
        try:
            lu = scipy.linalg.lu_factor(system)
        except (scipy.linalg.LinAlgError, ValueError) as e:
            raise ConditioningError("dense system could not be factorized: {0}".format(e))
        coeffs = [scipy.linalg.lu_solve(lu, problem.weights * numpy.asarray(values, dtype=float))
                  for values in value_sets]
    else:
        raise ValueError("unknown solver method {0!r}, expected one of {1}".format(method, METHODS))

    return [SolutionCoefficients(c, problem.samples, problem.lam) for c in coeffs]


def _blocks(solution, x, y, fn):
    x, y = numpy.broadcast_arrays(numpy.asarray(x, dtype=float), numpy.asarray(y, dtype=float))
    fx = x.reshape(-1)
    fy = y.reshape(-1)
    for start in range(0, len(fx), EVAL_CHUNK):
        end = start + EVAL_CHUNK
        yield start, end, fn(fx[start:end, None], fy[start:end, None],
                             solution.xs[None, :], solution.ys[None, :])


def evaluate_many(solution, x, y):
    """u at every point of the broadcast arrays x, y."""

    shape = numpy.broadcast(numpy.asarray(x), numpy.asarray(y)).shape
    out = numpy.empty(int(numpy.prod(shape, dtype=int)))
    for start, end, k in _blocks(solution, x, y, kernel.szego_re_array):
        out[start:end] = (k * solution.coeffs).sum(axis=1)
    return out.reshape(shape)


def evaluate_grad_many(solution, x, y):
    """(du/dx, du/dy) at every point of the broadcast arrays x, y."""

    shape = numpy.broadcast(numpy.asarray(x), numpy.asarray(y)).shape
    size = int(numpy.prod(shape, dtype=int))
    gx = numpy.empty(size)
    gy = numpy.empty(size)
    for start, end, (kx, ky) in _blocks(solution, x, y, kernel.szego_re_grad_array):
        gx[start:end] = (kx * solution.coeffs).sum(axis=1)
        gy[start:end] = (ky * solution.coeffs).sum(axis=1)
    return gx.reshape(shape), gy.reshape(shape)


def evaluate(solution, z):
    """u(z) = sum_j c_j Re K(z, z_j)."""

    return float(evaluate_many(solution, z.x, z.y))


def evaluate_grad(solution, z):
    gx, gy = evaluate_grad_many(solution, z.x, z.y)
    return float(gx), float(gy)


def evaluate_analytic(solution, z):
    """F(z) = sum_j c_j K(z, z_j); Re F is u and Im F its harmonic conjugate."""

    k = kernel.szego_array(z.x, z.y, solution.xs, solution.ys)
    return complex((k * solution.coeffs).sum())


def fd_laplacian(solution, z, h):
    """Five point finite-difference Laplacian of u at z with step h."""

    if z.y - h <= 0:
        raise ValueError("step {0} leaves the upper half-plane at {1}".format(h, z))
    x = numpy.array([z.x, z.x + h, z.x - h, z.x, z.x])
    y = numpy.array([z.y, z.y, z.y, z.y + h, z.y - h])
    u = evaluate_many(solution, x, y)
    return float((u[1] + u[2] + u[3] + u[4] - 4.0 * u[0]) / (h * h))


def residuals(problem, solution):
    """u(z_j) - A_j for every sample."""

    return evaluate_many(solution, problem.xs, problem.ys) - problem.values


def boundary_residual(problem, solution):
    """Returns (max, rms) of |u(z_j) - A_j|."""

    r = numpy.abs(residuals(problem, solution))
    return float(r.max()), float(math.sqrt(numpy.mean(r * r)))


def hardy_norm(solution):
    """||F|| in H2 for F = sum_j c_j K(., z_j) with real c: sqrt(c^T M c)."""

    c = solution.coeffs
    q = float(c.dot(_gram(solution.xs, solution.ys).dot(c)))
    return math.sqrt(max(q, 0.0))


def objective(problem, solution):
    """Returns (penalty, misfit, total) of the discrete Tikhonov functional."""

    penalty = problem.lam * hardy_norm(solution) ** 2
    r = residuals(problem, solution)
    misfit = float(numpy.sum(problem.weights * r * r))
    return penalty, misfit, penalty + misfit


def probe_grid(problem, n):
    """n x n points strictly inside the bounding box of the samples."""

    px = numpy.linspace(problem.xs.min(), problem.xs.max(), n + 2)[1:-1]
    py = numpy.linspace(problem.ys.min(), problem.ys.max(), n + 2)[1:-1]
    gx, gy = numpy.meshgrid(px, py)
    return gx.reshape(-1), gy.reshape(-1)


def check_schedule(schedule):
    """Validates a lambda schedule: nonempty, positive, strictly decreasing."""

    schedule = [float(lam) for lam in schedule]
    if not schedule:
        raise ValueError("empty lambda schedule")
    for lam in schedule:
        if not math.isfinite(lam) or lam <= 0:
            raise ValueError("schedule values must be finite and > 0, not {0}".format(lam))
    for a, b in zip(schedule, schedule[1:]):
        if not b < a:
            raise ValueError("schedule must be strictly decreasing ({0} then {1})".format(a, b))
    return schedule


ContinuationStep = collections.namedtuple('ContinuationStep', ('lam', 'solution', 'max_residual', 'rms_residual',
                                                               'norm', 'objective', 'probe_delta', 'error'))


def continuation(problem, schedule, method='recursive', probes=9, workers=1):
    """Solves the problem along a decreasing lambda schedule.

    A diagnostic of the lambda -> 0 behaviour: every step reports the
    boundary residual, the H2 norm, the functional value, and the largest
    change of u on an interior probe grid since the previous successful
    step. A conditioning failure is recorded on its step and does not stop
    the others.
    """

    schedule = check_schedule(schedule)

    def one(lam):
        p = problem.with_lambda(lam)
        try:
            return p, solve(p, method), None
        except ConditioningError as e:
            glogger.warning("lambda={0}: {1}".format(lam, e))
            return p, None, str(e)

    if workers > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(one, schedule))
    else:
        results = [one(lam) for lam in schedule]

    px, py = probe_grid(problem, probes)
    previous = None
    steps = []
    for lam, (p, solution, error) in zip(schedule, results):
        if solution is None:
            steps.append(ContinuationStep(lam, None, None, None, None, None, None, error))
            continue

        rmax, rrms = boundary_residual(p, solution)
        probe_values = evaluate_many(solution, px, py)
        delta = None if previous is None else float(numpy.max(numpy.abs(probe_values - previous)))
        previous = probe_values

        steps.append(ContinuationStep(lam, solution, rmax, rrms, hardy_norm(solution), objective(p, solution)[2],
                                      delta, None))
        glogger.info("lambda={0!r}: residual max={1!r} rms={2!r}".format(lam, rmax, rrms))

    return steps


def lcurve_corner(steps):
    """Lambda at the point of largest curvature of the discrete L-curve.

    The curve is (log misfit norm, log solution norm) along the schedule;
    curvature is the Menger curvature of consecutive triples. Returns None
    with fewer than three usable steps.
    """

    pts = []
    for step in steps:
        if step.solution is None or not step.rms_residual or not step.norm:
            continue
        pts.append((step.lam, math.log(step.rms_residual), math.log(step.norm)))

    if len(pts) < 3:
        return None

    best = None
    for (_, x0, y0), (lam, x1, y1), (_, x2, y2) in zip(pts, pts[1:], pts[2:]):
        a = math.hypot(x1 - x0, y1 - y0)
        b = math.hypot(x2 - x1, y2 - y1)
        c = math.hypot(x2 - x0, y2 - y0)
        if a * b * c == 0:
            continue
        kappa = 2.0 * abs((x1 - x0) * (y2 - y0) - (y1 - y0) * (x2 - x0)) / (a * b * c)
        if best is None or kappa > best[0]:
            best = (kappa, lam)

    return None if best is None else best[1]
