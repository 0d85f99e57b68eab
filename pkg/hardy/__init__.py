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
Regularized Dirichlet problems in the Hardy space of the upper half-plane,
solved with the Szegő reproducing kernel.
"""

__all__ = ['kernel', 'dirichlet']

from . import kernel
from . import dirichlet
