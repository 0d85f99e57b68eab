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
Random utilities that don't fit elsewhere.
"""

import logging
import math
import sys


class TaggingLogger(logging.LoggerAdapter):
    def process(self, msg, kwargs):
        if 'tag' in self.extra:
            return ('[{tag}] {0}'.format(msg, **self.extra), kwargs)
        else:
            return (msg, kwargs)


_handler = None


def setup_logging(verbose=False):
    """Sends log output to stderr; stdout is reserved for run summaries."""

    global _handler
    root = logging.getLogger()
    if _handler is not None:
        root.removeHandler(_handler)

    _handler = logging.StreamHandler(sys.stderr)
    _handler.setFormatter(logging.Formatter('%(asctime)s %(levelname)s %(name)s: %(message)s'))
    root.addHandler(_handler)
    root.setLevel(logging.DEBUG if verbose else logging.INFO)


def fmt(v):
    """Shortest decimal that reads back to the same float; None is an empty field."""

    if v is None:
        return ''
    v = float(v)
    if math.isinf(v):
        return 'inf' if v > 0 else '-inf'
    return repr(v)


def csv_quote(s):
    if s is None:
        return ''
    if s.find('\n') == -1 and s.find('"') == -1 and s.find(',') == -1:
        return s
    else:
        return '"' + s.replace('"', '""') + '"'
