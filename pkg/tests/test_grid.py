import math

import numpy as np
import pytest
from scipy import sparse
from scipy.io import mmread

from shrinker_spectra.eig import dense_reference, smallest_eigenpair
from shrinker_spectra.errors import CapabilityError, ParameterError, RefusalError, ResourceError
from shrinker_spectra.grid import (assemble_conjugated, assemble_drifted, assemble_schrodinger, dump_matrix,
                                   dump_nodes, dump_weights, fd_hessian_norm, icosphere, integrate,
                                   integrate_weighted, line_grid, model_grid, product_grid, rescale_sphere,
                                   sphere_mesh)
from shrinker_spectra.models import (affine, constant, expression, harmonic, make_cylinder, make_gaussian,
                                     make_sphere, polynomial, potential_samples)


def generator(disc):
    """W^-1 S, the strong-form operator on all nodes."""
    return sparse.diags(1.0 / disc.weights) @ disc.stiffness


def test_line_grid_stencil():
    disc = line_grid(1.0, 3)
    assert disc.h == 1.0
    assert np.allclose(generator(disc).toarray()[1], [-1.0, 2.0, -1.0])
    assert np.allclose(disc.weights, [0.5, 1.0, 0.5])
    assert list(disc.boundary) == [True, False, True]


def test_line_grid_weights_and_constants():
    disc = line_grid(12.0, 2001)
    assert abs(disc.weights.sum() - 24.0) <= 1e-12
    row = generator(disc) @ np.ones(disc.n_nodes)
    assert np.abs(row[disc.free]).max() <= 1e-9


@pytest.mark.parametrize("L, N", [(0.0, 5), (-1.0, 5), (1.0, 2), (1.0, 2.5)])
def test_line_grid_rejects(L, N):
    with pytest.raises(ParameterError):
        line_grid(L, N)


def test_icosphere_counts():
    verts, faces = icosphere(0)
    assert len(verts) == 12 and len(faces) == 20
    for level in range(5):
        assert sphere_mesh(level).n_nodes == 10 * 4**level + 2
    assert np.allclose(np.linalg.norm(icosphere(2)[0], axis=1), 1.0)


def test_sphere_area_and_spectrum():
    disc = sphere_mesh(4)
    assert abs(disc.weights.sum() - 4 * math.pi) <= 0.005 * 4 * math.pi
    vals = dense_reference((disc.stiffness, disc.weights))
    assert abs(vals[0]) <= 1e-10
    assert np.allclose(vals[1:4], 2.0, atol=1e-2)
    big = rescale_sphere(disc, 2.0)
    vals2 = dense_reference((big.stiffness, big.weights))
    assert vals2[1] == pytest.approx(vals[1] / 4, rel=1e-12)
    assert rescale_sphere(disc, 1.0) is disc
    assert (disc.stiffness - disc.stiffness.T).count_nonzero() == 0 or abs(disc.stiffness - disc.stiffness.T).max() < 1e-14


def test_sphere_constants_in_kernel():
    disc = sphere_mesh(3)
    assert np.abs(disc.stiffness @ np.ones(disc.n_nodes)).max() <= 1e-12


def test_product_five_point_stencil():
    a = line_grid(2.0, 5)
    disc = product_grid(a, a)
    G = generator(disc).toarray()
    centre = 12  # node (2, 2)
    row = G[centre].reshape(5, 5)
    expect = np.zeros((5, 5))
    expect[2, 2] = 4.0
    expect[1, 2] = expect[3, 2] = expect[2, 1] = expect[2, 3] = -1.0
    assert np.allclose(row, expect)
    assert abs(disc.stiffness - disc.stiffness.T).max() == 0.0
    assert np.abs((G @ np.ones(25))[disc.free]).max() <= 1e-12


def test_product_dirichlet_ground_state():
    L, errs = 1.0, []
    for N in (21, 41, 81):
        a = line_grid(L, N)
        disc = product_grid(a, a)
        op = (disc.stiffness[disc.free][:, disc.free], disc.weights[disc.free])
        errs.append(smallest_eigenpair(op).lambda0 - 2 * (math.pi / (2 * L)) ** 2)
    assert abs(errs[-1]) < 1e-3
    assert errs[0] / errs[1] == pytest.approx(4.0, rel=0.02)


def test_product_cap():
    a = line_grid(1.0, 101)
    with pytest.raises(ResourceError):
        product_grid(a, a, max_nodes=5000)


def test_schrodinger_assembly():
    sh = make_gaussian(1, 0.25)
    disc = line_grid(2.0, 5)
    op = assemble_schrodinger(disc, sh, harmonic())
    x = disc.flat_coords[disc.free, 0]
    stiff = disc.stiffness[disc.free][:, disc.free].diagonal()
    assert np.allclose(op.matrix.diagonal() - stiff, op.weights * x * x)
    assert op.inner_product == "plain"
    with pytest.raises(RefusalError):
        assemble_schrodinger(disc, sh, affine([1.0]))
    with pytest.raises(RefusalError):
        assemble_schrodinger(disc, sh, constant(0.0))


def test_sphere_schrodinger_is_shifted_laplacian():
    sh = make_sphere(2, 0.5)
    disc = model_grid(sh, level=2)
    op = assemble_schrodinger(disc, sh, constant(1.0))
    diff = op.matrix - disc.stiffness - sparse.diags(1.5 * disc.weights)
    assert abs(diff).max() <= 1e-14


def test_quartic_ground_state_on_fine_grid():
    sh = make_gaussian(1, 0.25)
    op = assemble_schrodinger(line_grid(8.0, 4001), sh, polynomial([0, 0, 0, 0, 1]))
    assert smallest_eigenpair(op).lambda0 == pytest.approx(1.060362, abs=5e-6)


def test_drifted_zero_potential():
    sh = make_gaussian(1, 0.25)
    disc = line_grid(8.0, 401)
    op = assemble_drifted(disc, sh, constant(0.0))
    res = smallest_eigenpair(op)
    assert abs(res.lambda0) <= 1e-10
    v = res.eigenvector
    assert np.ptp(v[np.abs(disc.flat_coords[disc.free, 0]) < 4]) <= 1e-8 * np.abs(v).max()


def test_drifted_affine_and_similarity():
    sh = make_gaussian(1, 0.25)
    disc = line_grid(10.0, 801)
    op = assemble_drifted(disc, sh, affine([2.0]))
    a = smallest_eigenpair(op).lambda0
    b = smallest_eigenpair(op.companion).lambda0
    assert a == pytest.approx(-1.0, abs=5e-4)  # O(h^2) with h = 0.025
    assert abs(a - b) <= 1e-10 * max(1.0, abs(a))
    closed = smallest_eigenpair(assemble_conjugated(disc, sh, affine([2.0]))).lambda0
    assert closed == pytest.approx(a, abs=1e-3)


def test_drifted_companion_is_exact_similarity():
    sh = make_cylinder(2, 1, 0.5)
    disc = model_grid(sh, 4.0, 17, 1)
    op = assemble_drifted(disc, sh, constant(0.0))
    D = sparse.diags(op.companion.meta["sqrt_density"])
    assert abs(D @ op.companion.matrix @ D - op.matrix).max() <= 1e-12 * abs(op.matrix).max()


def test_integrals():
    sh = make_gaussian(1, 0.25)
    disc = line_grid(12.0, 2001)
    x = disc.flat_coords[:, 0]
    assert abs(integrate(disc, np.exp(-x * x)) - math.sqrt(math.pi)) <= 1e-8
    assert integrate(disc, np.zeros(disc.n_nodes)) == 0.0
    assert integrate_weighted(disc, sh, np.ones(disc.n_nodes)) == pytest.approx(1.0, abs=1e-10)
    s = make_sphere(2, 0.5)
    sd = model_grid(s, level=4)
    assert integrate_weighted(sd, s, np.ones(sd.n_nodes)) == pytest.approx(1.0, rel=5e-3)
    with pytest.raises(ParameterError):
        integrate(disc, np.ones(3))


def test_hessian_norms():
    disc = line_grid(3.0, 61)
    sh = make_gaussian(1, 0.25)
    x = disc.flat_coords[:, 0]
    assert fd_hessian_norm(disc, 3.0 * x - 1.0) <= 1e-12
    assert fd_hessian_norm(disc, x * x) == pytest.approx(2.0, rel=1e-10)
    V = potential_samples(harmonic(), sh, disc)
    f = sh.sample(disc)["f"]
    assert fd_hessian_norm(disc, 4 * sh.tau * V - f) <= 1e-12
    g2 = make_gaussian(2, 1.0)
    d2 = model_grid(g2, 2.0, 21)
    xy = d2.flat_coords
    assert fd_hessian_norm(d2, xy[:, 0] * xy[:, 1]) == pytest.approx(math.sqrt(2.0), rel=1e-10)


def test_hessian_on_sphere_factor():
    c = make_cylinder(2, 1, 0.5)
    disc = model_grid(c, 3.0, 31, 1)
    y = disc.flat_coords[:, 0]
    assert fd_hessian_norm(disc, 2.0 * y + 1.0) <= 1e-12
    with pytest.raises(CapabilityError):
        fd_hessian_norm(disc, disc.sphere_coords[:, 0])


def test_exports(tmp_path):
    sh = make_gaussian(1, 0.25)
    disc = line_grid(2.0, 9)
    op = assemble_schrodinger(disc, sh, harmonic())
    dump_matrix(op, tmp_path / "a.mtx")
    dump_weights(op, tmp_path / "w.mtx")
    dump_nodes(disc, tmp_path / "nodes.csv")
    assert (tmp_path / "a.mtx").read_text().startswith("%%MatrixMarket matrix coordinate real symmetric")
    assert abs(mmread(str(tmp_path / "a.mtx")).tocsr() - op.matrix).max() <= 1e-15
    assert np.allclose(mmread(str(tmp_path / "w.mtx")).diagonal(), op.weights)
    lines = (tmp_path / "nodes.csv").read_text().splitlines()
    assert lines[0] == "node_id,x1" and len(lines) == 10


def test_non_s2_spheres_unsupported():
    with pytest.raises(CapabilityError):
        model_grid(make_sphere(3, 0.25), level=1)


def test_expression_potential_refusal():
    sh = make_gaussian(1, 0.25)
    with pytest.raises(RefusalError):
        assemble_schrodinger(line_grid(4.0, 41), sh, expression("-x^2", 1))
