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

"""Poor man's configuration system, because I'm lazy.."""

# regularization parameter used when fitting a harmonic map and the
# correspondence file does not name one
FIT_LAMBDA = 1e-4

# lambda for `solve` when neither the flag nor the problem file gives one
SOLVE_LAMBDA = 1e-2

# the source region is scaled so its larger side is 1 and its lower
# edge sits at this height in the upper half-plane
EMBED_Y_MIN = 0.5

# damped Newton inversion of a fitted map
NEWTON_MAX_ITERATIONS = 50
NEWTON_TOLERANCE = 1e-9
NEWTON_MAX_HALVINGS = 20

# Jacobian determinants below this are treated as singular (folds included)
SINGULAR_DET = 1e-12

# output rows per warp work unit; the first row of every block is seeded
# from the centroid, so results do not depend on the number of workers
BLOCK_ROWS = 32

# grey level for pixels that map outside the source or fail to invert
BACKGROUND = 0

GREY_LEVELS = 256

# default lambda schedule for `convergence`
SCHEDULE = (1e-1, 1e-2, 1e-3)

# interior probe grid is PROBE_DENSITY x PROBE_DENSITY
PROBE_DENSITY = 9

# quadratic press correspondence: boundary samples per side of the square
PRESS_PER_SIDE = 16
PRESS_ALPHA = 0.25

# grid demo defaults
DEMO_CELLS = 8
DEMO_SIZE = 256

# central fraction of an image used for interior metrics
INTERIOR_FRACTION = 0.9

# deformed grid rendering
SVG_GRID_CELLS = 8
SVG_SAMPLES_PER_LINE = 32
SVG_SIZE = 512
