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
Readers for problem and correspondence files (JSON).

Problem:        {"lambda": 0.01, "samples": [{"x": .., "y": .., "value": .., "weight": ..}, ..]}
Correspondence: {"source": [[xi, eta], ..], "target": [[x, y], ..], "lambda": 1e-4}

"weight" and both "lambda" fields are optional.
"""

import logging
import math
import numbers

import numpy
import ujson

from hardy import dirichlet, kernel
from hwarp import harmonic

glogger = logging.getLogger("loader")


class InputError(ValueError):
    """A problem with an input file; `field` names the offending entry."""

    def __init__(self, msg, field=None):
        if field is not None:
            msg = '{0}: {1}'.format(field, msg)
        super().__init__(msg)
        self.field = field


def load_json(path):
    with open(path, 'r') as f:
        text = f.read()
    try:
        return ujson.loads(text)
    except ValueError as e:
        raise InputError("invalid JSON ({0})".format(e), field=path)


def _number(v, field):
    if isinstance(v, bool) or not isinstance(v, numbers.Real):
        raise InputError("expected a number, got {0!r}".format(v), field=field)
    v = float(v)
    if not math.isfinite(v):
        raise InputError("expected a finite number, got {0!r}".format(v), field=field)
    return v


def _optional_lambda(obj):
    if obj.get('lambda') is None:
        return None
    lam = _number(obj['lambda'], 'lambda')
    if lam <= 0:
        raise InputError("must be > 0, got {0!r}".format(lam), field='lambda')
    return lam


def resolve_lambda(flag, file_value, default, logger=glogger):
    """Command line beats the input file, which beats the built-in default."""

    if flag is not None:
        if file_value is not None and flag != file_value:
            logger.warning("lambda={0!r} from the command line overrides lambda={1!r} from the input file".format(
                flag, file_value))
        return flag
    if file_value is not None:
        return file_value
    return default


def parse_problem(obj):
    """Returns (xs, ys, values, weights or None entries, file lambda or None)."""

    if not isinstance(obj, dict):
        raise InputError("a problem file must hold a JSON object")

    samples = obj.get('samples')
    if not isinstance(samples, list):
        raise InputError("missing or not a list", field='samples')
    if not samples:
        raise InputError("at least one sample is required", field='samples')

    xs, ys, values, weights = [], [], [], []
    for i, s in enumerate(samples):
        field = 'samples[{0}]'.format(i)
        if not isinstance(s, dict):
            raise InputError("expected an object", field=field)
        for key in ('x', 'y', 'value'):
            if key not in s:
                raise InputError("missing '{0}'".format(key), field=field)

        x = _number(s['x'], field + '.x')
        y = _number(s['y'], field + '.y')
        if y <= 0:
            raise InputError("point must lie in the upper half-plane (y > 0)", field=field + '.y')
        xs.append(x)
        ys.append(y)
        values.append(_number(s['value'], field + '.value'))

        if s.get('weight') is None:
            weights.append(None)
        else:
            w = _number(s['weight'], field + '.weight')
            if w <= 0:
                raise InputError("must be > 0", field=field + '.weight')
            weights.append(w)

    return xs, ys, values, weights, _optional_lambda(obj)


def build_problem(xs, ys, values, weights, lam):
    """Samples without a weight get their arc-length share."""

    if any(w is None for w in weights):
        shares = dirichlet.arc_length_weights(xs, ys)
        weights = [float(a) if w is None else w for w, a in zip(weights, shares)]

    samples = [dirichlet.BoundarySample(kernel.UpperHalfPoint(x, y), v, w)
               for x, y, v, w in zip(xs, ys, values, weights)]
    return dirichlet.DirichletProblem(samples, lam)


def load_problem(path):
    return parse_problem(load_json(path))


def _point_list(obj, key):
    pts = obj.get(key)
    if not isinstance(pts, list):
        raise InputError("missing or not a list", field=key)
    out = []
    for i, p in enumerate(pts):
        field = '{0}[{1}]'.format(key, i)
        if not isinstance(p, list) or len(p) != 2:
            raise InputError("expected an [x, y] pair", field=field)
        out.append((_number(p[0], field), _number(p[1], field)))
    return out


def parse_correspondence(obj):
    """Returns (BoundaryCorrespondence, file lambda or None)."""

    if not isinstance(obj, dict):
        raise InputError("a correspondence file must hold a JSON object")

    source = _point_list(obj, 'source')
    target = _point_list(obj, 'target')
    if len(source) != len(target):
        raise InputError("{0} source points but {1} target points".format(len(source), len(target)),
                         field='target')
    if len(source) < 3:
        raise InputError("at least 3 point pairs are required", field='source')

    try:
        corr = harmonic.BoundaryCorrespondence(numpy.array(source), numpy.array(target))
    except ValueError as e:
        raise InputError(str(e), field='source')
    return corr, _optional_lambda(obj)


def load_correspondence(path):
    return parse_correspondence(load_json(path))


def correspondence_json(corr, lam=None):
    obj = {'source': corr.source.tolist(), 'target': corr.target.tolist()}
    if lam is not None:
        obj['lambda'] = lam
    return ujson.dumps(obj)
