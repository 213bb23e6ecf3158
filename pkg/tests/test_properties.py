from fractions import Fraction

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from sfl_pohozaev import (SpectralFunction, bochner_kernel, criticality, identity_residual, interval_basis,
                          psd_certify, q1_matrix, qs_schur, rectangle_basis, transition_entry, transition_matrix)
from sfl_pohozaev.config import number

orders = st.floats(0.01, 0.99)
eigs = st.floats(1e-2, 1e4)

INTERVAL = interval_basis(0.0, np.pi, 10)
SQUARE = rectangle_basis(0.0, np.pi, 0.0, np.pi, 10)
Q1 = {"interval": q1_matrix(INTERVAL), "square": q1_matrix(SQUARE)}


@given(st.lists(eigs, min_size=1, max_size=25), orders)
def test_loewner_matrix_psd(lam, s):
    P = transition_matrix(np.sort(lam), s)
    assert psd_certify(P.entries).psd


@given(eigs, eigs, orders)
def test_divided_difference_mean_value_bounds(a, b, s):
    v = transition_entry(a, b, s)
    lo, hi = min(a, b), max(a, b)
    # s t^{s-1} is decreasing, so the divided difference lies between its end values
    assert s * hi ** (s - 1) * (1 - 1e-12) <= v <= s * lo ** (s - 1) * (1 + 1e-12)
    assert v == transition_entry(b, a, s)


@settings(max_examples=50)
@given(st.integers(1, 8), st.integers(0, 2**32 - 1))
def test_schur_product_theorem(n, seed):
    rng = np.random.default_rng(seed)
    A, B = rng.standard_normal((n, n)), rng.standard_normal((n, n))
    assert psd_certify((A @ A.T) * (B @ B.T)).psd


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(["interval", "square"]), orders,
       st.lists(st.floats(-10, 10), min_size=10, max_size=10))
def test_identity_for_arbitrary_coefficients(which, s, coeffs):
    basis = INTERVAL if which == "interval" else SQUARE
    Qs = qs_schur(Q1[which], transition_matrix(basis.eigenvalues, s))
    assert identity_residual(SpectralFunction(basis, coeffs), s, Qs) < 1e-10


@given(st.floats(-50, 50), orders)
def test_bochner_kernel_bounds(t, s):
    h = bochner_kernel(np.array([t]), s)[0]
    assert 0 <= h <= s * (1 + 1e-14)
    assert h == bochner_kernel(np.array([-t]), s)[0]


@given(st.integers(1, 6), st.fractions(Fraction(1, 100), Fraction(99, 100)),
       st.fractions(Fraction(101, 100), Fraction(20)))
def test_criticality_trichotomy(N, s, p):
    crit = (N + 2 * s) / (N - 2 * s) if N > 2 * s else None
    cls = criticality(N, s, p)
    if crit is None or p < crit:
        assert cls == "subcritical"
    elif p == crit:
        assert cls == "critical"
    else:
        assert cls == "supercritical"


@given(st.floats(-1e6, 1e6, allow_nan=False))
def test_number_parses_float_text(x):
    assert number(repr(x)) == x
