import math

import numpy as np
import pytest

import oracles
from sfl_pohozaev import (QuadratureError, SpectralFunction, bochner_closed_form, bochner_kernel,
                          bochner_transform, bochner_transform_check, identity_residual, matrices, psd_certify,
                          q1_matrix, qs_direct, qs_schur, qs_tilde, transition_entry, transition_matrix)
from sfl_pohozaev.pohozaev import (bochner_cutoff, bochner_truncation_bound, cross_check,
                                   transition_factorization_check)

PI = np.pi


@pytest.mark.parametrize("s", [0.1, 0.5, 0.9, 1.0])
@pytest.mark.parametrize("pair", [(1.0, 4.0), (2.0, 2.0), (5.0, 5.0 * (1 + 1e-9)), (3.0, 3.0 + 1e-7),
                                  (0.25, 4096.0), (14.68, 14.68)])
def test_transition_entry_against_mpmath(s, pair):
    a, b = pair
    ref = oracles.power_divided_difference(a, b, s)
    assert abs(transition_entry(a, b, s) - ref) <= 1e-13 * abs(ref)


def test_transition_entry_errors():
    with pytest.raises(ValueError):
        transition_entry(-1.0, 2.0, 0.5)
    with pytest.raises(ValueError):
        transition_entry(1.0, 2.0, 0.0)


def test_transition_matrix_is_symmetric_psd():
    lam = np.sort(np.random.default_rng(1).uniform(0.5, 500, 40))
    for s in (0.1, 0.5, 0.9):
        P = transition_matrix(lam, s)
        assert np.array_equal(P.entries, P.entries.T)
        assert psd_certify(P.entries).psd
        assert transition_factorization_check(P) < 1e-12
    assert np.array_equal(transition_matrix(lam, 1.0).entries, np.ones((40, 40)))


def test_interval_q1_closed_form(interval64):
    q1 = q1_matrix(interval64)
    k = np.arange(1, 65)
    exact = np.outer(k, k) * (-1.0) ** (k[:, None] + k[None, :])
    assert np.max(np.abs(q1.entries - exact)) < 1e-10
    assert q1.entries[0, 1] == pytest.approx(-2.0)


def test_q1_diagonal_is_lambda(small_bases, disk32):
    for b in list(small_bases.values()) + [disk32]:
        q1 = q1_matrix(b)
        assert np.max(np.abs(np.diag(q1.entries) - b.eigenvalues) / b.eigenvalues) < 1e-10, b
        assert cross_check(b) < 1e-8 * max(1.0, b.eigenvalues[-1])


def test_grid_q1_keeps_boundary_diagonal(small_bases):
    b = small_bases["grid"]
    q1 = q1_matrix(b)
    assert np.array_equal(np.diag(q1.entries), b.eigenvalues)
    # one-sided traces reproduce lambda only to O(h^2)
    rel = np.abs(q1.boundary_diagonal - b.eigenvalues) / b.eigenvalues
    assert 0 < rel.max() < 0.5


def test_q1_cross_check_raises():
    from sfl_pohozaev import GridMask, grid_basis
    b = grid_basis(GridMask.l_shape(1.0, 1 / 16), 10)
    with pytest.raises(QuadratureError):
        q1_matrix(b)
    assert q1_matrix(b, rtol=np.inf).n == 10


def test_schur_size_mismatch(small_bases):
    b = small_bases["square"]
    with pytest.raises(ValueError, match="size mismatch"):
        qs_schur(q1_matrix(b), transition_matrix(b.eigenvalues[:-1], 0.5))


@pytest.mark.parametrize("name", ["interval", "square", "disk", "grid"])
def test_identity_small_bases(small_bases, name):
    b = small_bases[name]
    rng = np.random.default_rng(7)
    for s in (0.05, 0.25, 0.5, 0.75, 0.95, 1.0):
        Qs = qs_schur(q1_matrix(b), transition_matrix(b.eigenvalues, s))
        # the symmetric part of the direct coefficient matrix is Q^(s)
        T = qs_tilde(b, s)
        assert np.max(np.abs(0.5 * (T + T.T) - Qs)) < 1e-9 * max(1.0, np.abs(Qs).max())
        for _ in range(5):
            u = SpectralFunction(b, rng.standard_normal(b.n))
            assert identity_residual(u, s, Qs) < 1e-10


def test_classical_limit(small_bases):
    for b in small_bases.values():
        q1, p, qs = matrices(b, 1.0)
        assert np.array_equal(qs, q1.entries)
        for k in range(b.n):
            assert qs_direct(SpectralFunction.unit(b, k + 1), 1.0) == pytest.approx(b.eigenvalues[k], rel=1e-11)


def test_psd_certificate():
    rng = np.random.default_rng(2)
    A = rng.standard_normal((6, 6))
    cert = psd_certify(A @ A.T, matrix_id="AAt")
    assert cert.psd and cert.witness is None and cert.verdict == "psd"
    M = np.diag([3.0, 1.0, -0.5])
    cert = psd_certify(M)
    assert not cert.psd
    assert cert.witness_value == pytest.approx(-0.5)
    assert abs(cert.witness[2]) == pytest.approx(1.0)
    d = cert.to_dict()
    assert d["verdict"] == "indefinite" and len(d["witness"]) == 3
    assert psd_certify(np.diag([1.0, -1e-13])).psd
    with pytest.raises(ValueError):
        psd_certify(np.ones((2, 3)))
    with pytest.raises(ValueError, match="symmetric"):
        psd_certify(np.array([[1.0, 2.0], [0.0, 1.0]]))


def test_bochner_kernel():
    t = np.array([0.0, 1e-8, 0.3, 2.0, 800.0])
    for s in (0.25, 0.5, 0.75):
        H = bochner_kernel(t, s)
        assert H[0] == s
        assert np.allclose(H[2:4], np.sinh(s * t[2:4]) / np.sinh(t[2:4]), rtol=1e-14)
        assert np.isfinite(H[-1]) and H[-1] < 1e-80
        assert np.allclose(bochner_kernel(-t, s), H)


@pytest.mark.parametrize("s", [0.25, 0.5, 0.75])
def test_bochner_transform_against_quadpack(s):
    xi = np.array([0.0, 0.05, 0.2, 0.5, 1.0])
    ours = bochner_transform(xi, s)
    ref = np.array([oracles.bochner_quadpack(x, s) for x in xi])
    assert np.max(np.abs(ours - ref)) < 1e-10
    assert np.max(np.abs(ref - bochner_closed_form(xi, s))) < 1e-10
    assert bochner_transform_check(s, np.linspace(0, 2, 41)) < 1e-10


def test_bochner_spot_value():
    assert abs(bochner_transform(0.0, 0.5)[0] - PI) < 1e-12
    assert bochner_closed_form(0.0, 0.5) == pytest.approx(PI, rel=1e-15)


def test_bochner_truncation_guard():
    s = 0.5
    assert bochner_truncation_bound(s, bochner_cutoff(s)) < 1e-12
    with pytest.raises(QuadratureError):
        bochner_transform_check(0.99, [0.0], tol=1e-20)
