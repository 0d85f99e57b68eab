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
Greyscale rasters: the PGM codec, synthetic test patterns, the quadratic
press distortion, piecewise-constant pixel sampling and image metrics.
"""

import collections
import logging
import math
import re

import numpy

from hwarp import config

glogger = logging.getLogger("raster")


class PGMError(ValueError):
    pass


class PGMHeaderError(PGMError):
    pass


class PGMTruncatedError(PGMError):
    pass


class PGMMaxvalError(PGMError):
    pass


class GreyImage(object):
    """An immutable height x width array of grey values in [0, levels)."""

    def __init__(self, pixels, levels=config.GREY_LEVELS):
        levels = int(levels)
        if not 2 <= levels <= 65536:
            raise ValueError("levels must be in [2, 65536], not {0}".format(levels))

        a = numpy.asarray(pixels)
        if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
            raise ValueError("pixels must be a non-empty 2-D array, not shape {0}".format(a.shape))
        if a.dtype.kind not in 'iu':
            if not numpy.all(numpy.isfinite(a)) or not numpy.all(a == numpy.round(a)):
                raise ValueError("pixel values must be integers")
        if a.min() < 0 or a.max() >= levels:
            raise ValueError("pixel values must lie in [0, {0})".format(levels))

        a = a.astype(numpy.uint16)
        a.setflags(write=False)
        self.pixels = a
        self.levels = levels

    @property
    def width(self):
        return self.pixels.shape[1]

    @property
    def height(self):
        return self.pixels.shape[0]

    @property
    def maxval(self):
        return self.levels - 1

    def __eq__(self, other):
        if not isinstance(other, GreyImage):
            return NotImplemented
        return self.levels == other.levels and numpy.array_equal(self.pixels, other.pixels)

    def __ne__(self, other):
        r = self.__eq__(other)
        return r if r is NotImplemented else not r

    __hash__ = None

    def __repr__(self):
        return 'GreyImage({0}x{1}, levels={2})'.format(self.width, self.height, self.levels)


#
# PGM
#

_TOKEN = re.compile(rb'\s*(?:#[^\n]*\n\s*)*([^\s#]+)')


def _header_fields(data):
    """Returns (magic, width, height, maxval, offset of the first payload byte)."""

    fields = []
    pos = 0
    for i in range(4):
        m = _TOKEN.match(data, pos)
        if m is None:
            raise PGMHeaderError("PGM header ends after {0} fields".format(i))
        fields.append(m.group(1))
        pos = m.end()

    magic = fields[0]
    if magic not in (b'P2', b'P5'):
        raise PGMHeaderError("not a greyscale PGM (magic {0!r})".format(magic))

    try:
        width, height, maxval = (int(f) for f in fields[1:])
    except ValueError:
        raise PGMHeaderError("non-numeric PGM header field in {0!r}".format(fields[1:]))

    if width < 1 or height < 1:
        raise PGMHeaderError("bad PGM dimensions {0}x{1}".format(width, height))
    if not 1 <= maxval <= 65535:
        raise PGMHeaderError("bad PGM maxval {0}".format(maxval))

    # exactly one whitespace byte separates the header from a binary payload
    if pos >= len(data) or not data[pos:pos + 1].isspace():
        if magic == b'P5':
            raise PGMTruncatedError("PGM header is not followed by a payload")
    return magic.decode('ascii'), width, height, maxval, pos + 1


def read_pgm(data, levels=None):
    """Decodes a binary (P5) or ASCII (P2) PGM.

    If levels is given, the file's maxval must be levels - 1.
    """

    magic, width, height, maxval, offset = _header_fields(data)
    if levels is not None and maxval != levels - 1:
        raise PGMMaxvalError("PGM maxval {0} does not match {1} grey levels".format(maxval, levels))

    count = width * height
    if magic == 'P5':
        dtype = numpy.dtype('u1') if maxval < 256 else numpy.dtype('>u2')
        need = count * dtype.itemsize
        payload = data[offset:offset + need]
        if len(payload) < need:
            raise PGMTruncatedError("PGM payload has {0} bytes, expected {1}".format(len(payload), need))
        values = numpy.frombuffer(payload, dtype=dtype)
    else:
        tokens = data[offset:].split()
        if len(tokens) < count:
            raise PGMTruncatedError("PGM payload has {0} values, expected {1}".format(len(tokens), count))
        try:
            values = numpy.array([int(t) for t in tokens[:count]], dtype=numpy.int64)
        except ValueError:
            raise PGMHeaderError("non-numeric value in ASCII PGM payload")
        if values.min() < 0:
            raise PGMMaxvalError("negative value in ASCII PGM payload")

    if values.max() > maxval:
        raise PGMMaxvalError("PGM value {0} exceeds maxval {1}".format(int(values.max()), maxval))

    return GreyImage(values.reshape(height, width), levels=maxval + 1)


def write_pgm(img):
    """Encodes an image as binary PGM (P5)."""

    header = 'P5 {0} {1} {2}\n'.format(img.width, img.height, img.maxval).encode('ascii')
    if img.maxval < 256:
        payload = img.pixels.astype(numpy.uint8).tobytes()
    else:
        payload = img.pixels.astype('>u2').tobytes()
    return header + payload


def load_pgm(path, levels=None):
    with open(path, 'rb') as f:
        return read_pgm(f.read(), levels=levels)


def save_pgm(path, img):
    with open(path, 'wb') as f:
        f.write(write_pgm(img))


#
# Geometry
#

class Viewport(collections.namedtuple('Viewport', ('x0', 'y0', 'x1', 'y1'))):
    """The planar rectangle covered by an image; row 0 is the top edge y1."""

    __slots__ = ()

    def __new__(cls, x0, y0, x1, y1):
        x0, y0, x1, y1 = (float(v) for v in (x0, y0, x1, y1))
        if not all(math.isfinite(v) for v in (x0, y0, x1, y1)) or not (x1 > x0 and y1 > y0):
            raise ValueError("bad viewport ({0}, {1}, {2}, {3})".format(x0, y0, x1, y1))
        return super().__new__(cls, x0, y0, x1, y1)


UNIT_SQUARE = Viewport(0.0, 0.0, 1.0, 1.0)


def pixel_centres(width, height, viewport=UNIT_SQUARE):
    """Returns (xs, ys), each height x width, of the pixel centres."""

    dx = (viewport.x1 - viewport.x0) / width
    dy = (viewport.y1 - viewport.y0) / height
    xs = viewport.x0 + (numpy.arange(width) + 0.5) * dx
    ys = viewport.y1 - (numpy.arange(height) + 0.5) * dy
    return numpy.meshgrid(xs, ys)


def pixel_lookup(img, viewport, xs, ys, background=config.BACKGROUND):
    """Piecewise-constant sampling: the value of the pixel containing each point.

    Returns (values, inside); points outside the image get `background`.
    """

    xs = numpy.asarray(xs, dtype=float)
    ys = numpy.asarray(ys, dtype=float)
    dx = (viewport.x1 - viewport.x0) / img.width
    dy = (viewport.y1 - viewport.y0) / img.height

    with numpy.errstate(invalid='ignore'):
        col = numpy.floor((xs - viewport.x0) / dx)
        row = numpy.floor((viewport.y1 - ys) / dy)
        inside = (col >= 0) & (col < img.width) & (row >= 0) & (row < img.height)

    values = numpy.full(xs.shape, background, dtype=numpy.uint16)
    values[inside] = img.pixels[row[inside].astype(int), col[inside].astype(int)]
    return values, inside


#
# Generators
#

def make_grid_image(n, size, line_width=1, levels=config.GREY_LEVELS):
    """White square with black lines cutting it into n x n cells.

    Lines start at k * size // n, the last one clamped onto the final row/column.
    """

    if n < 1 or size < n:
        raise ValueError("grid needs n >= 1 and size >= n (n={0}, size={1})".format(n, size))
    if line_width < 1:
        raise ValueError("line width must be >= 1")

    pixels = numpy.full((size, size), levels - 1, dtype=numpy.uint16)
    for k in range(n + 1):
        p = min(k * size // n, size - 1)
        q = min(p + line_width, size)
        pixels[p:q, :] = 0
        pixels[:, p:q] = 0
    return GreyImage(pixels, levels)


def make_checker_image(size, cells, dark=48, light=208, levels=config.GREY_LEVELS):
    if cells < 1 or size < cells:
        raise ValueError("checker needs cells >= 1 and size >= cells")

    idx = numpy.arange(size) * cells // size
    parity = (idx[:, None] + idx[None, :]) % 2
    return GreyImage(numpy.where(parity == 0, dark, light), levels)


def make_portrait_image(size, seed=0, levels=config.GREY_LEVELS):
    """A smooth synthetic stand-in for a portrait photograph.

    An oval head and two eyes with soft edges on a gradient background,
    plus a few seeded low-frequency ripples. Deterministic in (size, seed).
    """

    if size < 1:
        raise ValueError("size must be >= 1")

    rng = numpy.random.default_rng(seed)
    xs, ys = pixel_centres(size, size)

    def soft(d, width=0.03):
        return 1.0 / (1.0 + numpy.exp(-d / width))

    v = 0.25 + 0.2 * ys
    head = soft(1.0 - numpy.hypot((xs - 0.5) / 0.28, (ys - 0.55) / 0.36), 0.06)
    v = v + 0.45 * head
    for ex in (0.4, 0.6):
        eye = soft(1.0 - numpy.hypot((xs - ex) / 0.05, (ys - 0.62) / 0.03), 0.15)
        v = v - 0.35 * eye * head
    mouth = soft(1.0 - numpy.hypot((xs - 0.5) / 0.1, (ys - 0.38) / 0.025), 0.2)
    v = v - 0.2 * mouth * head

    for _ in range(4):
        fx, fy = rng.integers(1, 4, size=2)
        phase = rng.uniform(0, 2 * math.pi)
        v = v + 0.04 * numpy.cos(2 * math.pi * (fx * xs + fy * ys) + phase)

    v = numpy.clip(v, 0.0, 1.0)
    return GreyImage(numpy.round(v * (levels - 1)).astype(numpy.int64), levels)


def interior_mask(img, fraction=config.INTERIOR_FRACTION):
    """Boolean mask of the central `fraction` of the image in each direction."""

    if not 0 < fraction <= 1:
        raise ValueError("fraction must be in (0, 1]")

    mask = numpy.zeros((img.height, img.width), dtype=bool)
    mr = int(round((1 - fraction) / 2 * img.height))
    mc = int(round((1 - fraction) / 2 * img.width))
    mask[mr:img.height - mr, mc:img.width - mc] = True
    return mask


def unit_square_boundary(per_side):
    """per_side points on each side of the unit square, counter-clockwise from (0, 0)."""

    if per_side < 1:
        raise ValueError("per_side must be >= 1")

    t = numpy.arange(per_side) / per_side
    xs = numpy.concatenate([t, numpy.ones(per_side), 1 - t, numpy.zeros(per_side)])
    ys = numpy.concatenate([numpy.zeros(per_side), t, numpy.ones(per_side), 1 - t])
    return numpy.column_stack([xs, ys])


def press_point(alpha, xi, eta):
    """The quadratic press: the top edge sags by alpha in the middle, the bottom stays put."""

    xi = numpy.asarray(xi, dtype=float)
    eta = numpy.asarray(eta, dtype=float)
    return xi, eta * (1.0 - alpha * 4.0 * xi * (1.0 - xi))


def quadratic_press(alpha, per_side=config.PRESS_PER_SIDE):
    """Boundary correspondence of the quadratic press on the unit square."""

    from hwarp.harmonic import BoundaryCorrespondence

    alpha = float(alpha)
    if not 0 <= alpha < 1:
        raise ValueError("alpha must be in [0, 1), not {0}".format(alpha))

    source = unit_square_boundary(per_side)
    tx, ty = press_point(alpha, source[:, 0], source[:, 1])
    return BoundaryCorrespondence(source, numpy.column_stack([tx, ty]))


#
# Metrics
#

Metrics = collections.namedtuple('Metrics', ('mae', 'psnr', 'exact_match', 'total_a', 'total_b', 'pixels'))


def total_greyness(img, mask=None):
    p = img.pixels.astype(numpy.int64)
    return int(p.sum() if mask is None else p[mask].sum())


def metrics(a, b, mask=None):
    """Compares two images of equal size, optionally over a mask only."""

    if (a.width, a.height) != (b.width, b.height):
        raise ValueError("cannot compare {0} with {1}".format(a, b))

    pa = a.pixels.astype(numpy.float64)
    pb = b.pixels.astype(numpy.float64)
    if mask is not None:
        pa = pa[mask]
        pb = pb[mask]
    if pa.size == 0:
        raise ValueError("empty comparison mask")

    diff = numpy.abs(pa - pb)
    mse = float(numpy.mean(diff * diff))
    peak = float(max(a.maxval, b.maxval))
    psnr = math.inf if mse == 0 else 10.0 * math.log10(peak * peak / mse)
    return Metrics(mae=float(diff.mean()),
                   psnr=psnr,
                   exact_match=float(numpy.mean(diff == 0)),
                   total_a=float(pa.sum()),
                   total_b=float(pb.sum()),
                   pixels=int(pa.size))
