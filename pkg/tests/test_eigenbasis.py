import numpy as np
import pytest

import oracles
from sfl_pohozaev import (GridMask, Interval, QuadratureError, disk_basis, grid_basis, interval_basis,
                          make_basis, radial_moment_matrix, rectangle_basis, rotate_degenerate_groups,
                          star_shape_margin)
from sfl_pohozaev.eigenbasis import fd_dilation, fd_laplacian, group_eigenvalues, grid_fields

PI = np.pi


def gram(basis, refine=1):
    x, w = basis.volume_quadrature(refine)
    V = basis.values(x)
    return V.T @ (w[:, None] * V)


def test_interval_spectrum():
    b = interval_basis(0.0, 2 * PI, 2)
    assert np.allclose(b.eigenvalues, [0.25, 1.0], rtol=1e-15)
    b = interval_basis(0.0, PI, 8)
    assert np.allclose(b.eigenvalues, np.arange(1, 9) ** 2)


def test_square_spectrum_and_labels():
    b = rectangle_basis(0, PI, 0, PI, 6)
    assert b.labels[:3] == ((1, 1), (1, 2), (2, 1))
    assert np.allclose(b.eigenvalues, [2, 5, 5, 8, 10, 10])
    assert [len(g) for g in b.degenerate_groups()] == [2, 2]


def test_disk_spectrum_against_series_oracle(disk32):
    j01 = oracles.bessel_zeros_below(0, 3.0)[0]
    j11 = oracles.bessel_zeros_below(1, 4.0)[0]
    assert abs(j01 - 2.404826) < 1e-6 and abs(j11 - 3.831706) < 1e-6
    ref = oracles.disk_spectrum(1.0, 32, 13.0)
    assert np.max(np.abs(disk32.eigenvalues - ref) / ref) < 1e-12
    assert disk32.labels[1][:2] == (1, 1) and disk32.labels[2][:2] == (1, 1)


def test_disk_scaling():
    b = disk_basis(2.0, 5, origin=(1.0, -1.0))
    assert np.allclose(b.eigenvalues, disk_basis(1.0, 5).eigenvalues / 4)
    assert np.allclose(b.center, [1.0, -1.0])


def test_grid_spectrum_exact(grid32):
    ref = oracles.unit_square_fd_eigenvalues(1 / 64, 32)
    assert np.max(np.abs(grid32.eigenvalues - ref) / ref) < 1e-11


def test_orthonormality(small_bases, disk32):
    for b in list(small_bases.values()) + [disk32]:
        assert np.max(np.abs(gram(b) - np.eye(b.n))) < 1e-12, b


@pytest.mark.parametrize("name", ["interval", "square", "disk"])
def test_closed_form_eigen_residual(small_bases, name):
    b = small_bases[name]
    rng = np.random.default_rng(3)
    if b.dim == 1:
        pts = rng.uniform(0.3, PI - 0.3, (20, 1))
    elif name == "square":
        pts = rng.uniform(0.3, PI - 0.3, (20, 2))
    else:
        r, t = np.sqrt(rng.uniform(0.01, 0.6, 20)), rng.uniform(0, 2 * PI, 20)
        pts = np.column_stack([r * np.cos(t), r * np.sin(t)])
    for k in range(b.n):
        res = oracles.fd_laplacian_residual(lambda p: b.values(p)[:, k], pts, b.eigenvalues[k])
        assert np.max(res) < 1e-5 * max(1.0, b.eigenvalues[k]), (name, k)


def test_dirichlet_boundary_values(small_bases):
    for name in ("interval", "square", "disk"):
        b = small_bases[name]
        assert np.max(np.abs(b.values(b.boundary.nodes))) < 1e-12


def test_gradients_match_finite_differences(small_bases):
    b = small_bases["disk"]
    p = np.array([[0.3, -0.2], [0.0, 0.0], [-0.5, 0.4]])
    g = b.gradients(p)
    h = 1e-6
    for d in range(2):
        e = np.zeros(2)
        e[d] = h
        fd = (b.values(p + e) - b.values(p - e)) / (2 * h)
        assert np.max(np.abs(fd - g[:, :, d])) < 1e-6


def test_sign_convention(small_bases):
    for b in small_bases.values():
        x, _ = b.volume_quadrature()
        V = b.values(x)
        for k in range(b.n):
            first = np.flatnonzero(np.abs(V[:, k]) > 1e-8)[0]
            assert V[first, k] > 0


def test_moment_matrix_structure(small_bases, interval64):
    for b in list(small_bases.values()) + [interval64]:
        M = b.moment_matrix
        assert np.max(np.abs(np.diag(M) + b.dim / 2)) < 1e-11, b
        off = M - np.diag(np.diag(M))
        assert np.max(np.abs(off + off.T)) < 1e-10, b
    assert abs(interval64.moment_matrix[0, 1] - 4 / 3) < 1e-12


def test_grid_mimetic_moments(unit_grid):
    b = grid_basis(GridMask.rectangle(1.0, 1.0, 1 / 16), 8)
    V = grid_fields(b)
    D = fd_dilation(b.domain).toarray()
    A = fd_laplacian(b.domain).toarray()
    # D + D^T = -N I + h^2/2 A on the interior nodes
    assert np.allclose(D + D.T, -2 * np.eye(len(D)) + b.domain.h**2 / 2 * A, atol=1e-12)
    M = radial_moment_matrix(b)
    # M[j, k] = sum (x - c) . grad phi_j phi_k puts the dilation on the first index
    raw = b.domain.h**2 * (V.T @ D @ V).T
    assert np.allclose(M - M.T, raw - raw.T, atol=1e-12)


def test_moment_diagonal_check_raises():
    b2 = interval_basis(0, PI, 4)
    b2.quad_rtol = -1.0
    with pytest.raises(QuadratureError):
        radial_moment_matrix(b2)


def test_group_eigenvalues():
    tags = group_eigenvalues([1.0, 2.0, 2.0 + 1e-12, 3.0])
    assert list(tags) == [0, 1, 1, 2]


def test_rotations_stay_within_groups(small_bases):
    b = small_bases["square"]
    rb, T = rotate_degenerate_groups(b, np.random.default_rng(0))
    assert np.allclose(T.T @ T, np.eye(b.n))
    x, _ = b.volume_quadrature()
    assert np.allclose(rb.values(x), b.values(x) @ T)
    assert np.max(np.abs(gram(rb) - np.eye(b.n))) < 1e-12
    assert rb.fingerprint != b.fingerprint
    with pytest.raises(ValueError, match="mixes"):
        b.with_transform(np.eye(b.n)[::-1])


def test_fingerprint_deterministic():
    assert interval_basis(0, PI, 5).fingerprint == interval_basis(0, PI, 5).fingerprint
    assert interval_basis(0, PI, 5).fingerprint != interval_basis(0, PI, 6).fingerprint


def test_l_shape_basis_and_star_margin():
    mask = GridMask.l_shape(1.0, 1 / 16)
    b = grid_basis(mask, 12)
    assert np.max(np.abs(gram(b) - np.eye(12))) < 1e-12
    assert np.all(np.diff(b.eigenvalues) >= 0)
    assert star_shape_margin(b) >= 0
    off = GridMask(mask.rows, mask.h, mask.origin, (0.75, 0.25))
    assert star_shape_margin(off) < 0


def test_grid_slices_are_order_independent(unit_grid):
    small = grid_basis(unit_grid, 8)
    big = grid_basis(unit_grid, 32)
    x, _ = small.volume_quadrature()
    assert np.array_equal(small.values(x), big.values(x)[:, :8])


def test_make_basis_and_errors():
    assert make_basis(Interval(0, 1), 3).n == 3
    with pytest.raises(ValueError):
        interval_basis(0, 1, 0)
    with pytest.raises(ValueError, match="exceeds"):
        grid_basis(GridMask.rectangle(1, 1, 0.25), 20)
    with pytest.raises(Exception):
        make_basis("not a domain", 3)
