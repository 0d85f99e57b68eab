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
The Szegő reproducing kernel of H2 on the upper half-plane:

    K(z, w) = (i / 2pi) / (z - conj(w))

With X = x_z - x_w and Y = y_z + y_w this is

    K(z, w) = (Y + iX) / (2pi (X^2 + Y^2))

so Re K is a Poisson kernel reflected below the real axis and is harmonic
in z everywhere in the upper half-plane. Derivatives come from
dK/dz = -(i / 2pi) / (z - conj(w))^2.

The scalar functions and the *_array functions share the same arithmetic,
so they agree bit for bit.
"""

import collections
import math

INV_2PI = 1.0 / (2.0 * math.pi)


class UpperHalfPoint(collections.namedtuple('UpperHalfPoint', ('x', 'y'))):
    """A point z = x + yi with y > 0."""

    __slots__ = ()

    def __new__(cls, x, y):
        x = float(x)
        y = float(y)
        if not (math.isfinite(x) and math.isfinite(y)):
            raise ValueError("point ({0}, {1}) is not finite".format(x, y))
        if y <= 0:
            raise ValueError("point ({0}, {1}) is not in the upper half-plane (need y > 0)".format(x, y))
        return super().__new__(cls, x, y)

    @classmethod
    def from_complex(cls, z):
        return cls(z.real, z.imag)

    def __complex__(self):
        return complex(self.x, self.y)


def szego(z, w):
    """Returns K(z, w) as a Python complex."""

    X = z.x - w.x
    Y = z.y + w.y
    r2 = X * X + Y * Y
    return complex(INV_2PI * Y / r2, INV_2PI * X / r2)


def szego_re(z, w):
    """Returns Re K(z, w). Symmetric in its arguments."""

    X = z.x - w.x
    Y = z.y + w.y
    return INV_2PI * Y / (X * X + Y * Y)


def szego_im(z, w):
    """Returns Im K(z, w), the harmonic conjugate of szego_re in z."""

    X = z.x - w.x
    Y = z.y + w.y
    return INV_2PI * X / (X * X + Y * Y)


def szego_re_grad(z, w):
    """Returns (d/dx, d/dy) of Re K(z, w) with respect to z = x + yi.

    d/dx Re K = Re K'(z), d/dy Re K = -Im K'(z), where
    K'(z) = (-2XY - i(X^2 - Y^2)) / (2pi (X^2 + Y^2)^2).
    """

    X = z.x - w.x
    Y = z.y + w.y
    r2 = X * X + Y * Y
    r4 = r2 * r2
    return (INV_2PI * (-2.0 * X * Y) / r4,
            INV_2PI * (X * X - Y * Y) / r4)


def szego_re_array(x, y, xw, yw):
    """Re K for numpy arrays of coordinates, broadcast against each other.

    x, y are the coordinates of z; xw, yw those of w. A Gram matrix is
    szego_re_array(xs[:, None], ys[:, None], xs[None, :], ys[None, :]).
    """

    X = x - xw
    Y = y + yw
    return INV_2PI * Y / (X * X + Y * Y)


def szego_re_grad_array(x, y, xw, yw):
    """Vectorised szego_re_grad; returns a pair of broadcast arrays."""

    X = x - xw
    Y = y + yw
    r2 = X * X + Y * Y
    r4 = r2 * r2
    return (INV_2PI * (-2.0 * X * Y) / r4,
            INV_2PI * (X * X - Y * Y) / r4)


def szego_array(x, y, xw, yw):
    """Vectorised complex kernel values."""

    X = x - xw
    Y = y + yw
    r2 = X * X + Y * Y
    return (INV_2PI * Y / r2) + 1j * (INV_2PI * X / r2)
