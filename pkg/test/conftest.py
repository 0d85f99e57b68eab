# -*- mode: python; indent-tabs-mode: nil -*-

import os
import sys

import numpy
import pytest

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from hardy import dirichlet, kernel  # noqa: E402


def circle_problem(n=32, lam=1e-2, centre=(0.0, 1.2), radius=0.5):
    """n samples on a circle, unit weights, data from a Poisson kernel centred below the axis."""

    t = 2 * numpy.pi * numpy.arange(n) / n
    xs = centre[0] + radius * numpy.cos(t)
    ys = centre[1] + radius * numpy.sin(t)
    values = (ys + 0.4) / ((xs - 0.3) ** 2 + (ys + 0.4) ** 2)
    return dirichlet.DirichletProblem.from_arrays(xs, ys, values, lam, weights=numpy.ones(n))


def random_problem(rng, n, lam=None):
    xs = rng.uniform(-2.0, 2.0, n)
    ys = rng.uniform(0.2, 2.0, n)
    values = rng.normal(size=n)
    weights = rng.uniform(0.1, 2.0, n)
    if lam is None:
        lam = 10 ** rng.uniform(-3, 0)
    return dirichlet.DirichletProblem.from_arrays(xs, ys, values, lam, weights=weights)


@pytest.fixture
def rng():
    return numpy.random.default_rng(12345)


@pytest.fixture
def single_sample():
    z = kernel.UpperHalfPoint(0.0, 1.0)
    return dirichlet.DirichletProblem([dirichlet.BoundarySample(z, 1.0, 1.0)], 0.01)
