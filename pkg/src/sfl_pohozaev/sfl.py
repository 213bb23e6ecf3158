"""Spectral representation of functions and the spectral fractional Laplacian."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .eigenbasis import SpectralBasis, as_points
from .quadrature import gauss_panels


class ConvergenceError(RuntimeError):
    def __init__(self, message, estimate=None):
        super().__init__(message)
        self.estimate = estimate


def check_order(s, allow_classical: bool = False) -> float:
    """Validate a fractional order ``s`` in ``(0, 1)`` (``s = 1`` on request)."""
    s = float(s)
    if allow_classical and s == 1.0:
        return s
    if not 0.0 < s < 1.0:
        raise ValueError(f"s must lie in (0,1), got {s}")
    return s


def eigen_power(eigenvalues, s) -> np.ndarray:
    """``lambda**s`` evaluated as ``exp(s log lambda)``; exact at ``s = 1``."""
    lam = np.asarray(eigenvalues, dtype=float)
    if s == 1:
        return lam.copy()
    return np.exp(s * np.log(lam))


@dataclass(frozen=True)
class SpectralFunction:
    basis: SpectralBasis = field(repr=False)
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=float).reshape(-1)
        if len(c) != self.basis.n:
            raise ValueError(f"expected {self.basis.n} coefficients, got {len(c)}")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @property
    def n(self) -> int:
        return self.basis.n

    def __call__(self, points) -> np.ndarray:
        return synthesize(self, points)

    def __add__(self, other):
        self._same_basis(other)
        return SpectralFunction(self.basis, self.coeffs + other.coeffs)

    def __sub__(self, other):
        self._same_basis(other)
        return SpectralFunction(self.basis, self.coeffs - other.coeffs)

    def __mul__(self, scalar):
        return SpectralFunction(self.basis, float(scalar) * self.coeffs)

    __rmul__ = __mul__

    def _same_basis(self, other):
        if other.basis is not self.basis and other.basis.fingerprint != self.basis.fingerprint:
            raise ValueError("spectral functions live in different bases")

    def inner(self, other) -> float:
        self._same_basis(other)
        return float(self.coeffs @ other.coeffs)

    def norm(self) -> float:
        return float(np.linalg.norm(self.coeffs))

    def tail_ratio(self, fraction: float = 0.25) -> float:
        """Share of the l2 norm carried by the top ``fraction`` of modes.

        Every truncated function is admissible; a large tail flags that the
        truncation is not resolving ``u``.
        """
        total = self.norm()
        if total == 0.0:
            return 0.0
        m = max(1, int(np.ceil(fraction * self.n)))
        return float(np.linalg.norm(self.coeffs[-m:]) / total)

    def to_record(self) -> dict:
        return {"basis": self.basis.fingerprint, "coeffs": self.coeffs.tolist()}

    @classmethod
    def unit(cls, basis: SpectralBasis, k: int) -> "SpectralFunction":
        """The ``k``-th eigenfunction (1-based)."""
        c = np.zeros(basis.n)
        c[k - 1] = 1.0
        return cls(basis, c)


def analyze(basis: SpectralBasis, f, refine: int = 1) -> SpectralFunction:
    """Fourier coefficients ``<f, phi_k>`` by the basis volume quadrature.

    ``f`` maps an ``(m, dim)`` array of points to ``m`` values.
    """
    nodes, w = basis.volume_quadrature(refine)
    vals = np.asarray(f(nodes if basis.dim > 1 else nodes[:, 0]), dtype=float).reshape(-1)
    if not np.all(np.isfinite(vals)):
        raise ValueError("f is not finite at some quadrature nodes")
    return SpectralFunction(basis, basis.values(nodes).T @ (w * vals))


def synthesize(u: SpectralFunction, points) -> np.ndarray:
    """Pointwise values ``sum_k u_k phi_k(x)``."""
    p = as_points(points, u.basis.dim)
    inside = u.basis.domain.contains(p if u.basis.dim > 1 else p[:, 0], tol=1e-9)
    if not np.all(inside):
        raise ValueError(f"{np.count_nonzero(~inside)} point(s) lie outside the closed domain")
    return u.basis.values(p) @ u.coeffs


def apply_sfl(u: SpectralFunction, s) -> SpectralFunction:
    """``(-Delta)^s u``: multiply coefficient ``k`` by ``lambda_k**s``.

    ``s = 1`` gives the classical Dirichlet Laplacian on the span.
    """
    s = check_order(s, allow_classical=True)
    return SpectralFunction(u.basis, eigen_power(u.basis.eigenvalues, s) * u.coeffs)


def solve_linear(rhs: SpectralFunction, s) -> SpectralFunction:
    """Solve ``(-Delta)^s u = rhs`` on the span: divide by ``lambda_k**s``."""
    s = check_order(s, allow_classical=True)
    return SpectralFunction(rhs.basis, rhs.coeffs / eigen_power(rhs.basis.eigenvalues, s))


def sfl_energy(u: SpectralFunction, s) -> float:
    """``<(-Delta)^s u, u> = sum lambda_k^s u_k^2``."""
    return float(eigen_power(u.basis.eigenvalues, s) @ u.coeffs**2)


# ----------------------------------------------------------------------------
# heat-semigroup (subordination) representation


def gamma_negative(s: float) -> float:
    """``Gamma(-s)`` for ``s`` in ``(0, 1)`` via reflection from ``Gamma(1 + s)``."""
    return -math.pi / (math.sin(math.pi * s) * math.exp(math.lgamma(1.0 + s)))


@dataclass(frozen=True)
class SubordinationQuad:
    """Controls for :func:`subordination_check`.

    The integral is split at ``split / lambda``. Below ``series_fraction`` times
    that point the integrand is expanded in series and integrated exactly; the
    rest uses Gauss panels in ``log t`` up to ``tail / lambda``.
    """

    split: float = 1.0
    series_fraction: float = 1e-3
    tail: float = 45.0
    panels_per_decade: int = 2
    order: int = 20
    tol: float = 1e-10


def _series_head(lam, s, eps, terms=40):
    # int_0^eps (e^{-lam t} - 1) t^{-1-s} dt, termwise
    total, term = 0.0, 1.0
    for m in range(1, terms + 1):
        term *= -lam * eps / m
        contrib = term * eps ** (-s) / (m - s)
        total += contrib
        if abs(contrib) < 1e-18 * max(1.0, abs(total)):
            break
    return total


def _log_panels(lam, s, t0, t1, panels, order, tail_part=False):
    u, w = gauss_panels(math.log(t0), math.log(t1), panels, order)
    t = np.exp(u)
    if tail_part:
        integrand = np.exp(-lam * t) * t ** (-s)
    else:
        integrand = np.expm1(-lam * t) * t ** (-s)
    return float(w @ integrand)


def _subordination_integral(lam, s, quad: SubordinationQuad, refine: int) -> float:
    t_star = quad.split / lam
    eps = quad.series_fraction * t_star
    head = _series_head(lam, s, eps)
    decades = math.log10(t_star / eps)
    mid_panels = max(1, int(math.ceil(decades * quad.panels_per_decade))) * refine
    middle = _log_panels(lam, s, eps, t_star, mid_panels, quad.order)
    t_end = quad.tail / lam
    tail_panels = max(1, int(math.ceil(math.log10(t_end / t_star) * quad.panels_per_decade) + 2)) * refine
    # int_{t*}^inf (e^{-lam t} - 1) t^{-1-s} = int_{t*}^{t_end} e^{-lam t} t^{-1-s} - t*^{-s}/s
    tail = _log_panels(lam, s, t_star, t_end, tail_panels, quad.order, tail_part=True)
    tail -= t_star ** (-s) / s
    return (head + middle + tail) / gamma_negative(s)


def subordination_check(lam, s, quad: SubordinationQuad | None = None) -> float:
    """``lambda**s`` through the heat-semigroup integral.

    Computes ``(1/Gamma(-s)) int_0^inf (e^{-lambda t} - 1) t^{-1-s} dt`` and
    raises :class:`ConvergenceError` if two resolutions disagree by more than
    ``quad.tol`` (relative).
    """
    lam = float(lam)
    if not lam > 0:
        raise ValueError("lambda must be positive")
    s = check_order(s)
    quad = quad or SubordinationQuad()
    coarse = _subordination_integral(lam, s, quad, 1)
    fine = _subordination_integral(lam, s, quad, 2)
    est = abs(fine - coarse)
    if est > quad.tol * max(1.0, abs(fine)):
        raise ConvergenceError(f"subordination quadrature did not converge (estimate {est:.3e})", est)
    return fine
