# -*- mode: python; indent-tabs-mode: nil -*-

import math

import numpy
import pytest

from hardy import dirichlet
from hardy.kernel import UpperHalfPoint
from hwarp import harmonic, raster
from hwarp.harmonic import BoundaryCorrespondence


def square_targets(fn, per_side=16):
    source = raster.unit_square_boundary(per_side)
    tx, ty = fn(source[:, 0], source[:, 1])
    return BoundaryCorrespondence(source, numpy.column_stack([tx, ty]))


@pytest.fixture(scope='module')
def identity_map():
    return harmonic.fit_map(raster.quadratic_press(0.0, per_side=4), 1e-4)


@pytest.fixture(scope='module')
def press_map():
    return harmonic.fit_map(raster.quadratic_press(0.25), 1e-4)


def interior_probes(n=7):
    return harmonic.probe_points(n, 0.2, 0.8)


def test_embedding_of_unit_square():
    e = harmonic.embed_to_halfplane(raster.unit_square_boundary(4))
    assert e == (1.0, 0.0, 0.5)

    e = harmonic.embed_to_halfplane([(0, -1), (2, -1), (2, 0), (0, 0)])
    assert e.scale == 0.5
    assert e.forward(2, -1) == (1.0, 0.5)
    assert e.inverse(*e.forward(0.3, -0.2)) == pytest.approx((0.3, -0.2))


def test_embedding_always_normalizes():
    e = harmonic.embed_to_halfplane([(0, 2), (1, 2), (1, 3)])
    assert e.forward(0, 2) == (0.0, 0.5)


def test_embedding_rejects_degenerate_points():
    with pytest.raises(harmonic.EmbeddingError):
        harmonic.embed_to_halfplane([(1, 1), (1, 1)])
    with pytest.raises(harmonic.EmbeddingError):
        harmonic.embed_to_halfplane([])


def test_embedding_scales_the_laplacian():
    sample = dirichlet.BoundarySample(UpperHalfPoint(0.2, 0.3), 1.0, 1.0)
    sol = dirichlet.solve(dirichlet.DirichletProblem([sample], 0.01))
    e = harmonic.embed_to_halfplane([(0, 0), (2, 2)])
    h = 1e-2
    p = (0.8, 1.1)

    def u(xi, eta):
        x, y = e.forward(xi, eta)
        return dirichlet.evaluate(sol, UpperHalfPoint(x, y))

    lap = (u(p[0] + h, p[1]) + u(p[0] - h, p[1]) + u(p[0], p[1] + h) + u(p[0], p[1] - h) - 4 * u(*p)) / (h * h)
    z = UpperHalfPoint(*e.forward(*p))
    assert lap == pytest.approx(e.scale ** 2 * dirichlet.fd_laplacian(sol, z, e.scale * h), abs=1e-9)


def test_correspondence_validation():
    with pytest.raises(ValueError):
        BoundaryCorrespondence([(0, 0), (1, 0)], [(0, 0), (1, 0)])
    with pytest.raises(ValueError):
        BoundaryCorrespondence([(0, 0), (1, 0), (1, 1)], [(0, 0), (1, 0)])
    with pytest.raises(ValueError):
        BoundaryCorrespondence([(0, 0), (1, 0), (0, 0)], [(0, 0), (1, 0), (1, 1)])
    with pytest.raises(ValueError):
        BoundaryCorrespondence([(0, 0), (1, 0), (1, float('nan'))], [(0, 0), (1, 0), (1, 1)])


def test_identity_fit(identity_map):
    xs, ys = interior_probes()
    tx, ty = harmonic.apply_many(identity_map, xs, ys)
    assert numpy.max(numpy.hypot(tx - xs, ty - ys)) <= 0.02

    det = harmonic.jacobian_many(identity_map, xs, ys).det
    assert numpy.max(numpy.abs(det - 1)) <= 0.05


def test_translation_fit():
    m = harmonic.fit_map(square_targets(lambda a, b: (a + 1, b), per_side=4), 1e-4)
    xs, ys = interior_probes()
    tx, ty = harmonic.apply_many(m, xs, ys)
    assert numpy.max(numpy.hypot(tx - xs - 1, ty - ys)) <= 0.02
    assert numpy.max(numpy.abs(harmonic.jacobian_many(m, xs, ys).det - 1)) <= 0.05


def test_rotation_fit():
    m = harmonic.fit_map(square_targets(lambda a, b: (-b, a), per_side=4), 1e-4)
    xs, ys = interior_probes()
    tx, ty = harmonic.apply_many(m, xs, ys)
    assert numpy.max(numpy.hypot(tx + ys, ty - xs)) <= 0.02
    assert numpy.max(numpy.abs(harmonic.jacobian_many(m, xs, ys).det - 1)) <= 0.05


def test_affine_fit_is_exact_for_affine_pairs():
    source = raster.unit_square_boundary(3)
    target = numpy.column_stack([2 + 0.5 * source[:, 0] - source[:, 1], -1 + 0.25 * source[:, 0] + 3 * source[:, 1]])
    a = harmonic.affine_fit(source, target)
    assert a.shape == (2, 3)
    assert numpy.allclose(a, [[2, 0.5, -1], [-1, 0.25, 3]], atol=1e-12)


def test_affine_part_is_reproduced_exactly():
    m = harmonic.fit_map(square_targets(lambda a, b: (2 * a - b + 3, a + b), per_side=4), 1e-4)
    assert numpy.allclose(m.affine, [[3, 2, -1], [0, 1, 1]], atol=1e-12)
    assert m.boundary_residual() <= 1e-9
    j = harmonic.jacobian(m, (0.4, 0.7))
    assert j.det == pytest.approx(3.0, abs=1e-9)


def test_fit_without_affine_part():
    corr = raster.quadratic_press(0.0, per_side=4)
    plain = harmonic.fit_map(corr, 1e-4, affine=False)
    assert not numpy.any(plain.affine)
    assert plain.boundary_residual() > 1e-3
    assert plain.boundary_residual() > harmonic.fit_map(corr, 1e-4).boundary_residual()

    xs, ys = interior_probes()
    ax, ay = harmonic.affine_part(plain, xs, ys)
    assert not numpy.any(ax) and not numpy.any(ay)


def test_zero_coefficient_map():
    corr = raster.quadratic_press(0.0, per_side=2)
    embed = harmonic.embed_to_halfplane(corr.source)
    problem = dirichlet.DirichletProblem.from_arrays(*embed.forward(corr.source[:, 0], corr.source[:, 1]),
                                                     corr.target[:, 0], 0.1)
    zero = dirichlet.SolutionCoefficients(numpy.zeros(len(corr)), problem.samples)
    m = harmonic.HarmonicMap(embed, zero, zero, 0.1, corr, problem)
    assert harmonic.apply(m, (0.3, 0.7)) == (0.0, 0.0)


def test_boundary_samples_reproduce_targets(press_map):
    corr = press_map.correspondence
    problem = press_map.problem
    _, ay = harmonic.affine_part(press_map, corr.source[:, 0], corr.source[:, 1])
    rx = dirichlet.residuals(problem, press_map.x_solution)
    ry = dirichlet.residuals(problem.with_values(corr.target[:, 1] - ay), press_map.y_solution)
    assert press_map.boundary_residual() == pytest.approx(float(numpy.max(numpy.hypot(rx, ry))), rel=1e-9)
    assert press_map.boundary_residual() < 0.05


def test_apply_rejects_points_outside_the_half_plane(press_map):
    with pytest.raises(harmonic.EmbeddingError):
        harmonic.apply(press_map, (0.5, -1.0))


def test_continuity(press_map):
    p = (0.4, 0.55)
    d = 1e-6
    j = harmonic.jacobian(press_map, p)
    a = harmonic.apply(press_map, p)
    b = harmonic.apply(press_map, (p[0] + d, p[1] + d))
    bound = math.hypot(j.dx_dxi, j.dx_deta) + math.hypot(j.dy_dxi, j.dy_deta)
    assert math.hypot(b[0] - a[0], b[1] - a[1]) <= 1.01 * bound * d * math.sqrt(2)


def test_jacobian_matches_central_differences(press_map):
    h = 1e-5
    for p in zip(*interior_probes(4)):
        j = harmonic.jacobian(press_map, p)
        assert j.det == j.dx_dxi * j.dy_deta - j.dx_deta * j.dy_dxi

        xp = harmonic.apply(press_map, (p[0] + h, p[1]))
        xm = harmonic.apply(press_map, (p[0] - h, p[1]))
        yp = harmonic.apply(press_map, (p[0], p[1] + h))
        ym = harmonic.apply(press_map, (p[0], p[1] - h))
        fd = numpy.array([(xp[0] - xm[0]), (xp[1] - xm[1]), (yp[0] - ym[0]), (yp[1] - ym[1])]) / (2 * h)
        exact = numpy.array([j.dx_dxi, j.dy_dxi, j.dx_deta, j.dy_deta])
        assert numpy.linalg.norm(fd - exact) <= 1e-5 * numpy.linalg.norm(exact)


def test_press_shrinks_area(press_map):
    det = harmonic.jacobian_many(press_map, *interior_probes()).det
    assert numpy.all(det > 0.4)
    assert numpy.all(det < 1.2)
    assert numpy.mean(det) < 0.95


def test_both_coordinates_are_harmonic():
    m = harmonic.fit_map(square_targets(lambda a, b: (a + 0.2 * a * (1 - a) * b, b * (1 - a * (1 - a)))), 1e-4)
    xs, ys = harmonic.probe_points(10, 0.3, 0.7)
    ex, ey = m.embed.forward(xs, ys)
    for sol in (m.x_solution, m.y_solution):
        coarse = numpy.array([dirichlet.fd_laplacian(sol, UpperHalfPoint(x, y), 1e-2) for x, y in zip(ex, ey)])
        fine = numpy.array([dirichlet.fd_laplacian(sol, UpperHalfPoint(x, y), 5e-3) for x, y in zip(ex, ey)])
        assert 3.5 <= numpy.linalg.norm(coarse) / numpy.linalg.norm(fine) <= 4.5


def test_invert_point_round_trip(press_map):
    p0 = (0.4, 0.6)
    target = harmonic.apply(press_map, p0)
    p = harmonic.invert_point(press_map, target, (p0[0] + 0.05, p0[1] - 0.03))
    assert math.hypot(p[0] - p0[0], p[1] - p0[1]) <= 1e-8


def test_invert_identity(identity_map):
    p = harmonic.invert_point(identity_map, (0.3, 0.45), (0.5, 0.5))
    assert p == pytest.approx((0.3, 0.45), abs=0.02)


def test_invert_many_round_trip(press_map):
    xs, ys = interior_probes()
    tx, ty = harmonic.apply_many(press_map, xs, ys)
    px, py, status, res = harmonic.invert_many(press_map, tx, ty, 0.5, 0.5)
    assert numpy.all(status == harmonic.CONVERGED)
    assert numpy.all(res <= 1e-9)
    assert numpy.max(numpy.hypot(px - xs, py - ys)) <= 1e-8


def test_folded_map_is_singular():
    m = harmonic.fit_map(square_targets(lambda a, b: (1 - a, b)), 1e-4)
    assert harmonic.jacobian(m, (0.5, 0.5)).det < 0
    with pytest.raises(harmonic.SingularJacobianError):
        harmonic.invert_point(m, (0.3, 0.3), (0.5, 0.5))


def test_nonconvergence_reports_best_iterate(press_map):
    with pytest.raises(harmonic.NonConvergenceError) as e:
        harmonic.invert_point(press_map, (0.2, 0.2), (0.7, 0.8), max_iterations=1)
    assert e.value.residual > 1e-9
    assert len(e.value.best) == 2


def test_identity_warp_copies_the_interior():
    m = harmonic.fit_map(raster.quadratic_press(0.0), 1e-8, method='dense')
    img = raster.make_checker_image(32, 4)
    out, report = harmonic.warp_image(m, img)
    assert report.failed == 0
    mask = raster.interior_mask(img)
    assert raster.metrics(img, out, mask).exact_match >= 0.99

    back, _ = harmonic.recover_image(m, img)
    assert raster.metrics(img, back, mask).exact_match >= 0.99


def test_warp_of_constant_image(press_map):
    img = raster.GreyImage(numpy.full((24, 24), 100))
    out, report = harmonic.warp_image(press_map, img)
    assert set(numpy.unique(out.pixels)) <= {0, 100}
    assert report.outside > 0
    assert report.mapped + report.failed + report.outside == report.pixels

    back, rreport = harmonic.recover_image(press_map, img)
    assert set(numpy.unique(back.pixels)) <= {0, 100}
    assert rreport.failed == 0


def test_warp_does_not_depend_on_workers(press_map):
    img = raster.make_portrait_image(40, seed=3)
    a, ra = harmonic.warp_image(press_map, img, workers=1, block_rows=8)
    b, rb = harmonic.warp_image(press_map, img, workers=4, block_rows=8)
    assert a == b
    assert ra == rb


def test_warp_keeps_grey_levels(press_map):
    img = raster.make_grid_image(4, 48)
    out, _ = harmonic.warp_image(press_map, img)
    assert set(numpy.unique(out.pixels)) <= set(numpy.unique(img.pixels)) | {0}


def test_greyness_follows_the_jacobian(press_map):
    # the output grid has the source's pixel size but a margin, so nothing of T(source) is cut off
    img = raster.make_portrait_image(60, seed=1)
    wide = raster.Viewport(-0.1, -0.1, 1.1, 1.1)
    out, report = harmonic.warp_image(press_map, img, out_width=72, out_height=72, out_viewport=wide)
    assert report.greyness_out == pytest.approx(report.greyness_weighted, rel=0.03)
    assert report.greyness_weighted < report.greyness_in


def test_greyness_balance_of_identity(identity_map):
    img = raster.make_portrait_image(32, seed=2)
    assert harmonic.greyness_balance(identity_map, img) == pytest.approx(raster.total_greyness(img), rel=0.03)


def test_grid_press_and_recover(press_map):
    img = raster.make_grid_image(8, 256)
    distorted, report = harmonic.warp_image(press_map, img)
    recovered, _ = harmonic.recover_image(press_map, distorted)
    mask = raster.interior_mask(img)
    assert report.failed <= 0.01 * report.pixels
    assert raster.metrics(img, recovered, mask).exact_match >= 0.95
    assert raster.metrics(img, distorted, mask).exact_match < raster.metrics(img, recovered, mask).exact_match


def test_portrait_press_and_recover(press_map):
    img = raster.make_portrait_image(128, seed=0)
    distorted, report = harmonic.warp_image(press_map, img, workers=2)
    recovered, _ = harmonic.recover_image(press_map, distorted, workers=2)
    assert report.failed <= 0.01 * report.pixels
    assert raster.metrics(img, recovered, raster.interior_mask(img)).mae <= 5.0
