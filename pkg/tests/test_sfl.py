import math

import mpmath
import numpy as np
import pytest

import oracles
from sfl_pohozaev import (ConvergenceError, SpectralFunction, analyze, apply_sfl, interval_basis, sfl_energy,
                          solve_linear, subordination_check, synthesize)
from sfl_pohozaev.sfl import SubordinationQuad, check_order, eigen_power, gamma_negative

PI = np.pi


def test_check_order():
    assert check_order(0.5) == 0.5
    assert check_order(1.0, allow_classical=True) == 1.0
    for bad in (0.0, 1.0, 1.5, -0.1):
        with pytest.raises(ValueError, match=r"s must lie in \(0,1\)"):
            check_order(bad)


def test_eigen_power_exact_at_one():
    lam = np.array([2.0, 3.7, 1e4])
    assert np.array_equal(eigen_power(lam, 1.0), lam)
    assert np.allclose(eigen_power(lam, 0.3), lam**0.3, rtol=1e-15)


def test_spectral_function_algebra(small_bases):
    b = small_bases["square"]
    u = SpectralFunction.unit(b, 2)
    v = SpectralFunction(b, np.arange(b.n, dtype=float))
    w = 2 * u + v - u * 0.5
    assert np.allclose(w.coeffs, 1.5 * u.coeffs + v.coeffs)
    assert u.inner(v) == 1.0
    assert math.isclose(v.norm(), np.linalg.norm(np.arange(b.n)))
    rec = v.to_record()
    assert rec["basis"] == b.fingerprint and rec["coeffs"][3] == 3.0
    with pytest.raises(ValueError):
        SpectralFunction(b, np.zeros(b.n + 1))
    with pytest.raises(ValueError, match="different bases"):
        u + SpectralFunction.unit(small_bases["disk"], 1)
    with pytest.raises(ValueError):
        u.coeffs[0] = 3.0  # read-only


def test_analyze_synthesize_roundtrip(small_bases):
    b = small_bases["interval"]
    f = lambda x: np.sin(3 * x) - 0.25 * np.sin(7 * x)
    u = analyze(b, f)
    expected = np.zeros(b.n)
    expected[2], expected[6] = math.sqrt(PI / 2), -0.25 * math.sqrt(PI / 2)
    assert np.allclose(u.coeffs, expected, atol=1e-13)
    x = np.linspace(0, PI, 11)
    assert np.allclose(synthesize(u, x), f(x), atol=1e-13)
    assert np.allclose(u(x), f(x), atol=1e-13)
    with pytest.raises(ValueError, match="outside"):
        synthesize(u, [PI + 0.1])
    with pytest.raises(ValueError, match="finite"):
        analyze(b, lambda x: np.full_like(x, np.nan))


def test_analyze_2d(small_bases):
    b = small_bases["square"]
    u = analyze(b, lambda p: np.sin(p[:, 0]) * np.sin(2 * p[:, 1]))
    assert abs(u.coeffs[1] - PI / 2) < 1e-13
    assert np.max(np.abs(np.delete(u.coeffs, 1))) < 1e-13


def test_apply_and_solve(small_bases):
    b = small_bases["disk"]
    u = SpectralFunction(b, np.random.default_rng(0).standard_normal(b.n))
    for s in (0.2, 0.5, 1.0):
        Au = apply_sfl(u, s)
        assert np.allclose(Au.coeffs, b.eigenvalues**s * u.coeffs, rtol=1e-14)
        assert np.allclose(solve_linear(Au, s).coeffs, u.coeffs, rtol=1e-14)
        assert math.isclose(sfl_energy(u, s), Au.inner(u), rel_tol=1e-14)
    with pytest.raises(ValueError):
        apply_sfl(u, 1.5)


def test_semigroup_property(small_bases):
    b = small_bases["square"]
    u = SpectralFunction(b, np.linspace(1, 2, b.n))
    lhs = apply_sfl(apply_sfl(u, 0.3), 0.45)
    assert np.allclose(lhs.coeffs, apply_sfl(u, 0.75).coeffs, rtol=1e-13)


def test_gamma_negative_against_mpmath():
    for s in (0.1, 0.3, 0.5, 0.77, 0.99):
        assert math.isclose(gamma_negative(s), float(mpmath.gamma(-s)), rel_tol=1e-14)


@pytest.mark.parametrize("lam", [0.25, 1.0, 5.783, 150.0, 4096.0])
@pytest.mark.parametrize("s", [0.1, 0.3, 0.5, 0.7, 0.9])
def test_subordination_against_mpmath(lam, s):
    ref = oracles.subordination_mpmath(lam, s)
    assert abs(subordination_check(lam, s) - ref) <= 1e-12 * max(1.0, ref)
    assert abs(ref - lam**s) <= 1e-13 * max(1.0, ref)


def test_subordination_errors():
    with pytest.raises(ValueError):
        subordination_check(-1.0, 0.5)
    with pytest.raises(ValueError):
        subordination_check(1.0, 1.0)
    crude = SubordinationQuad(panels_per_decade=1, order=2, tol=1e-14)
    with pytest.raises(ConvergenceError) as info:
        subordination_check(3.0, 0.5, crude)
    assert info.value.estimate > 1e-14


def test_tail_ratio():
    b = interval_basis(0.0, PI, 16)
    assert SpectralFunction.unit(b, 1).tail_ratio() == 0.0
    assert SpectralFunction.unit(b, 16).tail_ratio() == 1.0
    assert SpectralFunction(b, np.zeros(16)).tail_ratio() == 0.0
    # x(pi - x) has coefficients proportional to k^-3 on odd k
    u = analyze(b, lambda x: x * (PI - x))
    k = np.arange(1, 17)
    c = np.where(k % 2 == 1, 1.0 / k**3, 0.0)
    assert math.isclose(u.tail_ratio(), np.linalg.norm(c[-4:]) / np.linalg.norm(c), rel_tol=1e-10)
