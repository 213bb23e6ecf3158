"""Semilinear Dirichlet problems for the spectral fractional Laplacian.

Galerkin truncation onto the first ``n`` eigenfunctions turns
``(-Delta)^s u = f(x, u)`` into ``lambda_k^s u_k = <f(., u), phi_k>``; this
module solves that system by damped Newton, evaluates the Pohozaev functional
of a candidate, and runs non-existence probes.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np

from scipy.optimize import brentq

from .eigenbasis import SpectralBasis, star_shape_margin
from .sfl import SpectralFunction, check_order, eigen_power

log = logging.getLogger(__name__)

QUAD_REFINE = 2


class EvaluationError(ArithmeticError):
    """Non-finite values of the nonlinearity on the quadrature grid."""


class ProbePreconditionError(ValueError):
    """A non-existence probe was asked to run outside its hypotheses."""


@dataclass(frozen=True)
class Nonlinearity:
    """``f(x, t)`` with primitive ``F`` and spatial gradient ``F_x``.

    All callables take points ``x`` of shape ``(m, N)`` and values ``t`` of
    shape ``(m,)``; ``F_x`` returns shape ``(m, N)``. ``f_t`` is the
    derivative in ``t`` used by the Newton Jacobian.
    """

    f: Callable
    F: Callable
    F_x: Callable
    f_t: Callable
    kind: str = "custom"
    params: dict = field(default_factory=dict)

    def describe(self) -> dict:
        return {"kind": self.kind, **{k: v for k, v in self.params.items() if np.isscalar(v)}}

    @classmethod
    def power(cls, p: float, scale: float = 1.0) -> "Nonlinearity":
        """``f(t) = scale |t|^{p-1} t``."""
        p = float(p)
        if p <= 1:
            raise ValueError("power nonlinearity needs p > 1")

        def zero_grad(x, t):
            return np.zeros_like(np.asarray(x, dtype=float))

        return cls(
            f=lambda x, t: scale * np.abs(t) ** (p - 1) * t,
            F=lambda x, t: scale * np.abs(t) ** (p + 1) / (p + 1),
            F_x=zero_grad,
            f_t=lambda x, t: scale * p * np.abs(t) ** (p - 1),
            kind="power", params={"p": p, "scale": scale},
        )

    @classmethod
    def polynomial(cls, coeffs: dict) -> "Nonlinearity":
        """``f(t) = sum_m a_m t^m`` from ``{m: a_m}`` (integer ``m >= 0``)."""
        terms = {int(m): float(a) for m, a in coeffs.items()}

        def f(x, t):
            return sum(a * t**m for m, a in terms.items())

        def F(x, t):
            return sum(a * t ** (m + 1) / (m + 1) for m, a in terms.items())

        def f_t(x, t):
            return sum(a * m * t ** (m - 1) for m, a in terms.items() if m > 0) + 0 * t

        return cls(f, F, lambda x, t: np.zeros_like(np.asarray(x, dtype=float)), f_t,
                   kind="polynomial", params={f"a{m}": a for m, a in terms.items()})

    @classmethod
    def linear(cls, c: float) -> "Nonlinearity":
        """``f(t) = c t``."""
        nl = cls.polynomial({1: c})
        return cls(nl.f, nl.F, nl.F_x, nl.f_t, kind="linear", params={"c": float(c)})

    @classmethod
    def source(cls, g: Callable, grad_g: Callable) -> "Nonlinearity":
        """``f(x, t) = g(x)``, independent of ``t``."""
        return cls(
            f=lambda x, t: g(x) + 0 * t,
            F=lambda x, t: g(x) * t,
            F_x=lambda x, t: grad_g(x) * np.asarray(t)[:, None],
            f_t=lambda x, t: np.zeros_like(np.asarray(t, dtype=float)),
            kind="source",
        )


def _evaluate(fn, x, t):
    val = np.asarray(fn(x, t), dtype=float)
    if not np.all(np.isfinite(val)):
        raise EvaluationError("nonlinearity is not finite on the quadrature grid")
    return val


class _Quad:
    """Basis values on the refined volume rule, shared across Newton steps."""

    def __init__(self, basis: SpectralBasis, refine: int = QUAD_REFINE):
        self.x, self.w = basis.volume_quadrature(refine)
        self.phi = basis.values(self.x)
        self.rel = self.x - basis.center

    def field(self, coeffs):
        return self.phi @ coeffs


_QUADS: dict = {}


def _quad(basis: SpectralBasis) -> _Quad:
    key = id(basis)
    hit = _QUADS.get(key)
    if hit is None or hit[0] is not basis:
        if len(_QUADS) > 16:
            _QUADS.clear()
        hit = (basis, _Quad(basis))
        _QUADS[key] = hit
    return hit[1]


def galerkin_residual(u: SpectralFunction, s, nl: Nonlinearity) -> np.ndarray:
    """``r_k = lambda_k^s u_k - <f(., u), phi_k>``."""
    s = check_order(s, allow_classical=True)
    q = _quad(u.basis)
    vals = q.field(u.coeffs)
    fv = _evaluate(nl.f, q.x, vals)
    return eigen_power(u.basis.eigenvalues, s) * u.coeffs - q.phi.T @ (q.w * fv)


def _jacobian(basis, ls, q, nl, coeffs):
    vals = q.field(coeffs)
    ft = _evaluate(nl.f_t, q.x, vals)
    return np.diag(ls) - (q.phi * (q.w * ft)[:, None]).T @ q.phi


def pohozaev_functional(u: SpectralFunction, s, nl: Nonlinearity) -> float:
    """``((2s-N)/2) int u f(x,u) + N int F(x,u) + int (x - c) . F_x(x,u)``."""
    s = check_order(s, allow_classical=True)
    q = _quad(u.basis)
    N = u.basis.dim
    vals = q.field(u.coeffs)
    uf = vals * _evaluate(nl.f, q.x, vals)
    F = _evaluate(nl.F, q.x, vals)
    Fx = _evaluate(nl.F_x, q.x, vals).reshape(len(vals), -1)
    xFx = np.einsum("md,md->m", q.rel, Fx)
    return float(q.w @ (0.5 * (2 * s - N) * uf + N * F + xFx))


def integral_abs_uf(u: SpectralFunction, nl: Nonlinearity) -> float:
    q = _quad(u.basis)
    vals = q.field(u.coeffs)
    return float(q.w @ np.abs(vals * _evaluate(nl.f, q.x, vals)))


def sup_norm(u: SpectralFunction) -> float:
    """``max |u|`` over the refined quadrature grid."""
    q = _quad(u.basis)
    return float(np.max(np.abs(q.field(u.coeffs)), initial=0.0))


# ----------------------------------------------------------------------------
# criticality


def _rational(v) -> Fraction:
    if isinstance(v, Fraction):
        return v
    if isinstance(v, float):
        return Fraction(repr(v))
    return Fraction(v)


def critical_exponent(N, s):
    """``(N + 2s) / (N - 2s)`` as a Fraction, or ``None`` when ``N <= 2s``."""
    N, s = _rational(N), _rational(s)
    if N <= 2 * s:
        return None
    return (N + 2 * s) / (N - 2 * s)


def criticality(N, s, p) -> str:
    """Position of the power ``p`` relative to ``(N + 2s)/(N - 2s)``.

    Comparisons use exact rational arithmetic; floats are read through their
    shortest decimal representation.
    """
    p = _rational(p)
    if p <= 1:
        raise ValueError("p must exceed 1")
    crit = critical_exponent(N, s)
    if crit is None or p < crit:
        return "subcritical"
    return "critical" if p == crit else "supercritical"


def power_pohozaev_coefficient(N, s, p):
    """``(2s - N)/2 + N/(p + 1)``, exact when the inputs are rational."""
    N, s, p = _rational(N), _rational(s), _rational(p)
    return (2 * s - N) / 2 + N / (p + 1)


# ----------------------------------------------------------------------------
# Newton solver


@dataclass
class SolveReport:
    solution: SpectralFunction
    residual_norm: float
    newton_iters: int
    converged: bool
    pohozaev_value: float
    sup_norm: float
    classification: str | None = None
    message: str = ""
    history: list = field(default_factory=list, repr=False)

    @property
    def trivial(self) -> bool:
        return self.solution.norm() <= 1e-8

    def to_dict(self) -> dict:
        return {"residual": self.residual_norm, "newton_iters": self.newton_iters,
                "converged": self.converged, "pohozaev_value": self.pohozaev_value,
                "sup_norm": self.sup_norm, "classification": self.classification,
                "coeff_norm": self.solution.norm(), "tail_ratio": self.solution.tail_ratio(),
                "message": self.message}


def newton_solve(guess: SpectralFunction, s, nl: Nonlinearity, tol: float = 1e-10,
                 max_iter: int = 100, max_halvings: int = 20) -> SolveReport:
    """Damped Newton iteration on the Galerkin residual.

    A step is halved (up to ``max_halvings`` times) until the residual norm
    decreases; failing that the run is reported as diverged. Singular
    Jacobians and non-finite evaluations end the run with ``converged=False``.
    """
    s = check_order(s, allow_classical=True)
    basis = guess.basis
    ls = eigen_power(basis.eigenvalues, s)
    q = _quad(basis)
    c = guess.coeffs.copy()
    message = ""
    history = []
    it = 0
    try:
        r = galerkin_residual(SpectralFunction(basis, c), s, nl)
        rn = float(np.linalg.norm(r))
        history.append(rn)
        while rn > tol and it < max_iter:
            it += 1
            J = _jacobian(basis, ls, q, nl, c)
            try:
                step = np.linalg.solve(J, -r)
            except np.linalg.LinAlgError:
                message = "singular Jacobian"
                break
            if not np.all(np.isfinite(step)):
                message = "singular Jacobian"
                break
            t = 1.0
            for _ in range(max_halvings + 1):
                trial = c + t * step
                try:
                    r_trial = galerkin_residual(SpectralFunction(basis, trial), s, nl)
                    rn_trial = float(np.linalg.norm(r_trial))
                except EvaluationError:
                    rn_trial = np.inf
                if rn_trial < rn:
                    break
                t *= 0.5
            else:
                message = "damping exhausted"
                break
            c, r, rn = trial, r_trial, rn_trial
            history.append(rn)
        else:
            if rn > tol:
                message = "max_iter exceeded"
    except EvaluationError as exc:
        message = f"evaluation failure: {exc}"
        rn = np.inf
    sol = SpectralFunction(basis, c)
    converged = bool(rn <= tol)
    try:
        pv = pohozaev_functional(sol, s, nl)
        sn = sup_norm(sol)
    except EvaluationError:
        pv, sn = float("nan"), float("nan")
    cls = None
    if nl.kind == "power" and s < 1:
        cls = criticality(basis.dim, s, nl.params["p"])
    return SolveReport(sol, rn, it, converged, pv, sn, cls, message or ("converged" if converged else ""),
                       history)


def _nehari_scale(ls, q, nl, c, max_doublings: int = 200):
    # positive t with t sum lambda^s c^2 = int f(x, t u) u, or None
    a = float(ls @ c**2)
    u = q.field(c)
    if a == 0.0:
        return None

    def g(t):
        try:
            return t * a - float(q.w @ (_evaluate(nl.f, q.x, t * u) * u))
        except EvaluationError:
            return -np.inf

    lo = hi = 1.0
    if g(1.0) > 0:
        for _ in range(max_doublings):
            hi *= 2.0
            if g(hi) <= 0:
                break
        else:
            return None
        lo = hi / 2
    else:
        for _ in range(max_doublings):
            lo *= 0.5
            if g(lo) > 0:
                break
        else:
            return None
        hi = 2 * lo
    if not np.isfinite(g(hi)):
        return None
    return brentq(g, lo, hi, xtol=1e-14, rtol=1e-14)


def nehari_descent(guess: SpectralFunction, s, nl: Nonlinearity, steps: int = 500, step: float = 0.5,
                   tol: float = 1e-6) -> SpectralFunction | None:
    """Preconditioned gradient descent on the Nehari manifold.

    Each iterate is rescaled along its ray so that
    ``sum lambda_k^s c_k^2 = int f(x, u) u``. The result is an initializer for
    Newton, not a certified solution. Returns ``None`` when some ray has no
    Nehari point (e.g. sublinear or sign-changing growth).
    """
    s = check_order(s, allow_classical=True)
    basis = guess.basis
    ls = eigen_power(basis.eigenvalues, s)
    q = _quad(basis)
    t = _nehari_scale(ls, q, nl, guess.coeffs)
    if t is None:
        return None
    c = t * guess.coeffs
    for _ in range(steps):
        r = galerkin_residual(SpectralFunction(basis, c), s, nl)
        if np.linalg.norm(r) < tol:
            break
        trial = c - step * r / ls
        t = _nehari_scale(ls, q, nl, trial)
        if t is None:
            return None
        c = t * trial
    return SpectralFunction(basis, c)


def solve_with_fallback(guess: SpectralFunction, s, nl: Nonlinearity, tol: float = 1e-10,
                        max_iter: int = 100) -> SolveReport:
    """Newton from ``guess``; if that fails, Newton from a Nehari-descent start."""
    rep = newton_solve(guess, s, nl, tol, max_iter)
    if rep.converged:
        return rep
    try:
        start = nehari_descent(guess, s, nl)
    except EvaluationError:
        start = None
    if start is None:
        return rep
    second = newton_solve(start, s, nl, tol, max_iter)
    if not second.converged:
        return rep
    second.message = f"converged after Nehari restart ({rep.message})"
    second.history = rep.history + second.history
    second.newton_iters += rep.newton_iters
    return second


def solve_nontrivial(basis: SpectralBasis, s, nl: Nonlinearity, amplitudes=(1.0, 2.0, 5.0, 10.0),
                     tol: float = 1e-10, max_iter: int = 100) -> SolveReport:
    """First converged nontrivial solution reached from ``a * phi_1``."""
    last = None
    for a in amplitudes:
        rep = newton_solve(SpectralFunction.unit(basis, 1) * a, s, nl, tol, max_iter)
        last = rep
        if rep.converged and not rep.trivial:
            return rep
    return last


# ----------------------------------------------------------------------------
# non-existence probes


def sign_condition(nl: Nonlinearity, basis: SpectralBasis, s, t_values=None, stride: int = 7) -> float:
    """Max over samples of ``((2s-N)/2) t f + N F + (x - c) . F_x`` for ``t != 0``.

    The strict non-existence condition holds on the sample set iff the result
    is negative.
    """
    N = basis.dim
    x, _ = basis.volume_quadrature()
    x = x[::stride]
    if t_values is None:
        mags = np.logspace(-3, 2, 26)
        t_values = np.concatenate([-mags, mags])
    X = np.repeat(x, len(t_values), axis=0)
    T = np.tile(np.asarray(t_values, dtype=float), len(x))
    lhs = (0.5 * (2 * s - N) * T * _evaluate(nl.f, X, T) + N * _evaluate(nl.F, X, T)
           + np.einsum("md,md->m", X - basis.center, _evaluate(nl.F_x, X, T).reshape(len(T), -1)))
    return float(np.max(lhs))


def probe_guesses(basis: SpectralBasis, seed: int, amplitudes=(0.1, 1.0, 10.0), n_random: int = 5):
    """``(id, SpectralFunction)`` pairs: multiples of ``phi_1`` then seeded random vectors with ``k^-2`` decay."""
    out = [(f"phi1x{a:g}", SpectralFunction.unit(basis, 1) * a) for a in amplitudes]
    rng = np.random.default_rng(seed)
    decay = 1.0 / np.arange(1, basis.n + 1) ** 2
    for i in range(n_random):
        out.append((f"random{i}", SpectralFunction(basis, rng.standard_normal(basis.n) * decay)))
    return out


@dataclass
class ProbeRun:
    guess_id: str
    outcome: str
    report: SolveReport

    def to_dict(self) -> dict:
        return {"guess": self.guess_id, "outcome": self.outcome, "residual": self.report.residual_norm,
                "pohozaev_value": self.report.pohozaev_value, "sup_norm": self.report.sup_norm,
                "newton_iters": self.report.newton_iters, "coeff_norm": self.report.solution.norm(),
                "tail_ratio": self.report.solution.tail_ratio()}


@dataclass
class ProbeReport:
    verdict: str
    runs: list
    contradictions: list
    sign_condition_max: float
    star_margin: float
    classification: str | None

    @property
    def clean(self) -> bool:
        return self.verdict == "clean"

    def to_dict(self) -> dict:
        return {"verdict": self.verdict, "runs": [r.to_dict() for r in self.runs],
                "contradictions": self.contradictions, "sign_condition_max": self.sign_condition_max,
                "star_margin": self.star_margin, "classification": self.classification}


def nonexistence_probe(basis: SpectralBasis, s, nl: Nonlinearity, guesses=None, seed: int = 0,
                       tol: float = 1e-10, max_iter: int = 100, pohozaev_rtol: float = 1e-6,
                       margin_tol: float = 1e-12, fallback: bool = True) -> ProbeReport:
    """Search for nontrivial Galerkin solutions where none should exist.

    Every converged nontrivial candidate must violate the Pohozaev inequality
    (functional below ``-pohozaev_rtol (1 + int |u f|)``); such a candidate is
    a truncation artifact and is flagged. A candidate satisfying the
    inequality is a contradiction finding. Runs that neither converge nor reach
    the trivial solution make the verdict ``inconclusive``. With ``fallback``
    a failed Newton run is retried once from a Nehari-descent initializer.

    Raises :class:`ProbePreconditionError` when the domain is not star-shaped
    or the pointwise sign condition fails on the samples. At the critical
    power the probe runs but its verdict is ``out-of-scope``.
    """
    s = check_order(s)
    margin = star_shape_margin(basis)
    if margin < -margin_tol:
        raise ProbePreconditionError(f"domain is not star-shaped about its center (margin {margin:.3e})")
    cls = None
    if nl.kind == "power":
        cls = criticality(basis.dim, s, nl.params["p"])
    sign_max = sign_condition(nl, basis, s)
    if cls != "critical" and not sign_max < 0:
        raise ProbePreconditionError(
            f"sign condition fails: max of (2s-N)/2 t f + N F + x.F_x is {sign_max:.3e} >= 0")
    if guesses is None:
        guesses = probe_guesses(basis, seed)
    runs, contradictions = [], []
    for gid, g in guesses:
        rep = solve_with_fallback(g, s, nl, tol, max_iter) if fallback else newton_solve(g, s, nl, tol, max_iter)
        if not rep.converged:
            outcome = "unresolved"
        elif rep.trivial:
            outcome = "trivial"
        else:
            floor = -pohozaev_rtol * (1.0 + integral_abs_uf(rep.solution, nl))
            if rep.pohozaev_value >= floor:
                outcome = "contradiction"
                contradictions.append({"guess": gid, "pohozaev_value": rep.pohozaev_value,
                                       "coeffs": rep.solution.coeffs.tolist()})
                log.warning("contradiction finding from guess %s: functional %.3e", gid, rep.pohozaev_value)
            else:
                outcome = "flagged-spurious"
        runs.append(ProbeRun(gid, outcome, rep))
    if cls == "critical":
        verdict = "out-of-scope"
    elif contradictions:
        verdict = "contradiction"
    elif any(r.outcome == "unresolved" for r in runs):
        verdict = "inconclusive"
    else:
        verdict = "clean"
    return ProbeReport(verdict, runs, contradictions, sign_max, margin, cls)
