"""Pohozaev matrices: the classical form, the transition matrix and their Schur product."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .eigenbasis import QuadratureError, SpectralBasis
from .quadrature import gauss_panels, leggauss
from .sfl import SpectralFunction, check_order, eigen_power

NEAR_DEGENERATE_RTOL = 1e-6
PSD_RTOL = 1e-10


@dataclass(frozen=True)
class PohozaevQ1:
    basis: SpectralBasis = field(repr=False)
    entries: np.ndarray
    boundary_diagonal: np.ndarray = field(repr=False)

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    def form(self, coeffs) -> float:
        c = np.asarray(coeffs, dtype=float)
        return float(c @ self.entries @ c)


@dataclass(frozen=True)
class TransitionP:
    s: float
    entries: np.ndarray
    log_eigen: np.ndarray

    @property
    def n(self) -> int:
        return self.entries.shape[0]


def boundary_form(basis: SpectralBasis) -> np.ndarray:
    """``B[j, k] = 1/2 int_{dOmega} (grad phi_j . grad phi_k) ((x - c) . nu) dS``."""
    rule = basis.boundary
    g = basis.boundary_gradients()
    B = 0.5 * np.einsum("m,mjd,mkd->jk", rule.weights * rule.support, g, g)
    return 0.5 * (B + B.T)


def q1_matrix(basis: SpectralBasis, rtol: float | None = None) -> PohozaevQ1:
    """Classical Pohozaev matrix in the eigenbasis.

    Entries are boundary integrals. On a grid basis the diagonal is set to
    ``lambda_k`` (the one-sided traces only reproduce it to ``O(h^2)``); the
    boundary diagonal is kept in ``boundary_diagonal`` for inspection.

    Off-diagonal entries between distinct eigenvalues are cross-validated
    against ``(lambda_j - lambda_k) / 2 * M[j, k]`` from the volume moments;
    a discrepancy above ``rtol`` (relative to ``lambda_max``) raises
    :class:`QuadratureError`.
    """
    B = boundary_form(basis)
    lam = basis.eigenvalues
    rtol = basis.quad_rtol if rtol is None else rtol
    bdiag = np.diag(B).copy()
    if basis.is_grid:
        np.fill_diagonal(B, lam)
    else:
        dev = np.max(np.abs(bdiag - lam) / lam)
        if dev > rtol:
            raise QuadratureError(f"boundary diagonal misses lambda_k by {dev:.3e} (relative)")
    if basis.n > 1 and rtol < np.inf:
        dev = cross_check(basis, B)
        if dev > rtol * max(1.0, lam[-1]):
            raise QuadratureError(f"boundary and volume routes disagree by {dev:.3e}")
    B.setflags(write=False)
    return PohozaevQ1(basis, B, bdiag)


def cross_check(basis: SpectralBasis, B=None) -> float:
    """Max gap between ``B[j,k]`` and ``(lambda_j - lambda_k) M[j,k] / 2`` over distinct eigenvalues."""
    if B is None:
        B = boundary_form(basis)
    lam = basis.eigenvalues
    M = basis.moment_matrix
    distinct = basis.groups[:, None] != basis.groups[None, :]
    if not distinct.any():
        return 0.0
    volume = 0.5 * (lam[:, None] - lam[None, :]) * M
    return float(np.max(np.abs(B - volume)[distinct]))


# ----------------------------------------------------------------------------
# transition matrix


def _power_divided_difference(lj, lk, s):
    """Divided difference of ``t**s`` between ``lj`` and ``lk`` (arrays)."""
    lj = np.asarray(lj, dtype=float)
    lk = np.asarray(lk, dtype=float)
    lj, lk = np.broadcast_arrays(lj, lk)
    if s == 1:
        return np.ones(lj.shape)
    out = np.empty(lj.shape)
    gap = np.abs(lj - lk)
    near = gap <= NEAR_DEGENERATE_RTOL * np.maximum(lj, lk)
    far = ~near
    out[far] = (eigen_power(lj[far], s) - eigen_power(lk[far], s)) / (lj[far] - lk[far])
    if near.any():
        # s * int_0^1 (lk + tau (lj - lk))^(s-1) dtau with 8-point Gauss
        x, w = leggauss(8)
        tau = 0.5 * (x + 1.0)
        a, b = lk[near], lj[near]
        pts = a[:, None] + tau[None, :] * (b - a)[:, None]
        out[near] = s * (0.5 * w[None, :] * eigen_power(pts, s - 1.0)).sum(axis=1)
    return out


def transition_entry(lambda_j, lambda_k, s) -> float:
    """``P[j,k] = (lambda_j^s - lambda_k^s) / (lambda_j - lambda_k)``, ``s lambda^{s-1}`` on ties."""
    if lambda_j <= 0 or lambda_k <= 0:
        raise ValueError("eigenvalues must be positive")
    s = check_order(s, allow_classical=True)
    return float(_power_divided_difference(lambda_j, lambda_k, s))


def transition_matrix(eigenvalues, s) -> TransitionP:
    s = check_order(s, allow_classical=True)
    lam = np.asarray(eigenvalues, dtype=float)
    P = _power_divided_difference(lam[:, None], lam[None, :], s)
    P = 0.5 * (P + P.T)
    P.setflags(write=False)
    return TransitionP(s, P, 0.5 * np.log(lam))


def qs_schur(q1: PohozaevQ1, p: TransitionP) -> np.ndarray:
    """Entrywise product ``P^(s) o Q^(1)``."""
    if q1.entries.shape != p.entries.shape:
        raise ValueError(f"size mismatch: Q1 is {q1.entries.shape}, P is {p.entries.shape}")
    return p.entries * q1.entries


def qs_tilde(basis: SpectralBasis, s) -> np.ndarray:
    """Non-symmetric coefficient matrix of the fractional Pohozaev form.

    ``((2s - N)/2) lambda_k^s delta_jk - lambda_k^s M[j, k]``.
    """
    s = check_order(s, allow_classical=True)
    ls = eigen_power(basis.eigenvalues, s)
    M = basis.moment_matrix
    return 0.5 * (2 * s - basis.dim) * np.diag(ls) - M * ls[None, :]


def qs_direct(u: SpectralFunction, s) -> float:
    """Fractional Pohozaev form of ``u`` evaluated from its definition.

    ``((2s-N)/2) <u, (-Delta)^s u> - <(x - c) . grad u, (-Delta)^s u>`` in
    Fourier variables, using the radial-moment matrix of the basis.
    """
    s = check_order(s, allow_classical=True)
    c = u.coeffs
    ls = eigen_power(u.basis.eigenvalues, s)
    M = u.basis.moment_matrix
    first = 0.5 * (2 * s - u.basis.dim) * float(ls @ c**2)
    second = float(c @ M @ (ls * c))
    return first - second


def identity_residual(u: SpectralFunction, s, qs=None) -> float:
    """``|qs_direct - u^T Q^(s) u| / (1 + |qs_direct|)``."""
    if qs is None:
        qs = qs_schur(q1_matrix(u.basis), transition_matrix(u.basis.eigenvalues, s))
    direct = qs_direct(u, s)
    return abs(direct - float(u.coeffs @ qs @ u.coeffs)) / (1.0 + abs(direct))


# ----------------------------------------------------------------------------
# positivity certificates


@dataclass(frozen=True)
class PsdCertificate:
    matrix_id: str
    min_eigenvalue: float
    tol: float
    threshold: float
    method: str
    psd: bool
    witness: np.ndarray | None = None
    witness_value: float | None = None

    @property
    def verdict(self) -> str:
        return "psd" if self.psd else "indefinite"

    def to_dict(self) -> dict:
        out = {"matrix_id": self.matrix_id, "min_eig": self.min_eigenvalue, "tol": self.tol,
               "threshold": self.threshold, "method": self.method, "verdict": self.verdict}
        if self.witness is not None:
            out["witness"] = self.witness.tolist()
            out["witness_value"] = self.witness_value
        return out


def psd_certify(M, tol: float = PSD_RTOL, matrix_id: str = "M") -> PsdCertificate:
    """PSD verdict from the full symmetric spectrum.

    Passes iff ``min eig >= -tol * (1 + ||M||_2)``; an indefinite verdict
    carries the eigenvector of the minimum eigenvalue as witness.
    """
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError("matrix must be square")
    asym = np.max(np.abs(M - M.T), initial=0.0)
    if asym > 1e-12 * max(1.0, np.max(np.abs(M), initial=0.0)):
        raise ValueError(f"matrix is not symmetric (max asymmetry {asym:.3e})")
    w, v = np.linalg.eigh(0.5 * (M + M.T))
    norm2 = float(np.max(np.abs(w), initial=0.0))
    threshold = -tol * (1.0 + norm2)
    lo = float(w[0])
    if lo >= threshold:
        return PsdCertificate(matrix_id, lo, tol, threshold, "full spectrum", True)
    x = v[:, 0]
    return PsdCertificate(matrix_id, lo, tol, threshold, "full spectrum", False,
                          x, float(x @ M @ x))


# ----------------------------------------------------------------------------
# Bochner kernel


def bochner_kernel(t, s):
    """``H_s(t) = sinh(s t) / sinh(t)`` with ``H_s(0) = s``."""
    s = check_order(s)
    t = np.abs(np.asarray(t, dtype=float))
    out = np.empty_like(t)
    small = t < 1e-6
    ts = t[small]
    out[small] = s * (1.0 + (s * s - 1.0) * ts**2 / 6.0)
    big = ~small
    tb = t[big]
    # e^{(s-1)t} (1 - e^{-2st}) / (1 - e^{-2t}); no overflow for large t
    out[big] = np.exp((s - 1.0) * tb) * (-np.expm1(-2 * s * tb)) / (-np.expm1(-2 * tb))
    return out if out.ndim else float(out)


def bochner_closed_form(xi, s):
    """Inverse Fourier transform of ``H_s``: ``pi sin(s pi) / (cos(s pi) + cosh(2 pi^2 xi))``."""
    xi = np.asarray(xi, dtype=float)
    return math.pi * math.sin(s * math.pi) / (math.cos(s * math.pi) + np.cosh(2 * math.pi**2 * xi))


def bochner_cutoff(s, level: float = 1e-14) -> float:
    """``T`` with ``exp(-(1 - s) T) <= level``."""
    return -math.log(level) / (1.0 - s)


def bochner_transform(xi, s, cutoff: float | None = None, order: int | None = None):
    """``int cos(2 pi xi t) H_s(t) dt`` over ``|t| <= cutoff`` by unit-width Gauss panels."""
    s = check_order(s)
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    T = bochner_cutoff(s) if cutoff is None else cutoff
    if order is None:
        order = 16 + int(math.ceil(2 * math.pi * np.max(np.abs(xi), initial=0.0)))
    t, w = gauss_panels(0.0, T, int(math.ceil(T)), order)
    H = bochner_kernel(t, s)
    return 2.0 * (np.cos(2 * math.pi * np.outer(xi, t)) @ (w * H))


def bochner_truncation_bound(s, cutoff) -> float:
    """Bound on ``2 int_T^inf H_s``; uses ``H_s(t) <= e^{(s-1)t} / (1 - e^{-2T})``."""
    return 2.0 * math.exp((s - 1.0) * cutoff) / ((1.0 - s) * (-math.expm1(-2 * cutoff)))


def bochner_transform_check(s, grid, tol: float = 1e-6) -> float:
    """Max ``|quadrature - closed form|`` over the frequency ``grid``.

    Raises :class:`QuadratureError` when the truncation bound exceeds ``tol``.
    """
    s = check_order(s)
    T = bochner_cutoff(s)
    bound = bochner_truncation_bound(s, T)
    if bound > tol:
        raise QuadratureError(f"truncation error bound {bound:.3e} exceeds {tol:.1e}")
    grid = np.atleast_1d(np.asarray(grid, dtype=float))
    return float(np.max(np.abs(bochner_transform(grid, s, T) - bochner_closed_form(grid, s))))


def transition_factorization_check(p: TransitionP) -> float:
    """Max entry error of ``P[j,k] = e^{(s-1)(mu_j + mu_k)} H_s(mu_j - mu_k)``."""
    mu = p.log_eigen
    s = p.s
    if s == 1.0:
        rebuilt = np.ones_like(p.entries)
    else:
        rebuilt = np.exp((s - 1.0) * (mu[:, None] + mu[None, :])) * bochner_kernel(mu[:, None] - mu[None, :], s)
    return float(np.max(np.abs(rebuilt - p.entries)))


def matrices(basis: SpectralBasis, s) -> tuple[PohozaevQ1, TransitionP, np.ndarray]:
    """``(Q1, P, Q^(s))`` for ``basis`` at order ``s``."""
    q1 = q1_matrix(basis)
    p = transition_matrix(basis.eigenvalues, s)
    return q1, p, qs_schur(q1, p)
