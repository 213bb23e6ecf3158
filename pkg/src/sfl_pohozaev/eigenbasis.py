"""Dirichlet-Laplacian eigenbases with the boundary data used by the Pohozaev matrices.

Every basis exposes the same surface: eigenvalues sorted ascending, pointwise
values and gradients of the eigenfunctions, a volume quadrature that resolves
products of the retained modes, and a boundary quadrature carrying outward
normals. Closed-form bases (interval, rectangle, disk) are exact up to rounding;
:func:`grid_basis` is a 5-point finite-difference approximation.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from functools import cached_property, lru_cache

import numpy as np
import scipy.linalg
import scipy.sparse as sp
from scipy import special

from .domains import Disk, DomainError, GridMask, Interval, Rectangle
from .quadrature import gauss_panels, periodic_trapezoid, tensor_rule

SIGN_THRESHOLD = 1e-8
GROUP_RTOL = 1e-9


class QuadratureError(RuntimeError):
    """A quadrature rule failed its built-in health check."""


class EigenSolverError(RuntimeError):
    pass


def as_points(points, dim: int) -> np.ndarray:
    p = np.asarray(points, dtype=float)
    if dim == 1:
        return p.reshape(-1, 1)
    p = np.atleast_2d(p)
    if p.shape[-1] != dim:
        raise ValueError(f"points must have shape (m, {dim}), got {p.shape}")
    return p.reshape(-1, dim)


def group_eigenvalues(eigenvalues, rtol: float = GROUP_RTOL) -> np.ndarray:
    """Integer tags grouping (numerically) equal neighbours of a sorted spectrum."""
    lam = np.asarray(eigenvalues, dtype=float)
    tags = np.zeros(len(lam), dtype=int)
    for k in range(1, len(lam)):
        same = abs(lam[k] - lam[k - 1]) <= rtol * max(lam[k], lam[k - 1], 1.0)
        tags[k] = tags[k - 1] if same else tags[k - 1] + 1
    return tags


@dataclass(frozen=True)
class BoundaryRule:
    """Boundary nodes with weights, outward normals and ``(x - c) . nu``."""

    nodes: np.ndarray
    weights: np.ndarray
    normals: np.ndarray
    support: np.ndarray
    owners: np.ndarray | None = None

    def __len__(self):
        return len(self.weights)


@dataclass(frozen=True)
class EigenPair:
    index: int
    eigenvalue: float
    multiplicity_tag: int
    label: tuple
    basis: "SpectralBasis" = field(repr=False, compare=False)

    def value(self, points) -> np.ndarray:
        return self.basis.values(points)[:, self.index - 1]

    def gradient(self, points) -> np.ndarray:
        return self.basis.gradients(points)[:, self.index - 1, :]


class SpectralBasis:
    """First ``n`` Dirichlet eigenpairs of a domain.

    ``transform`` is an orthogonal ``n x n`` matrix acting inside degenerate
    eigengroups (sign flips, rotations); the exposed eigenfunctions are
    ``raw_values @ transform``.
    """

    def __init__(self, domain, eigenvalues, labels, evaluator, volume_rule,
                 boundary_rule: BoundaryRule, transform=None, quad_rtol: float = 1e-8):
        self.domain = domain
        self.dim = domain.dim
        lam = np.array(eigenvalues, dtype=float)
        lam.setflags(write=False)
        self.eigenvalues = lam
        self.labels = tuple(labels)
        self.groups = group_eigenvalues(lam)
        self._evaluator = evaluator
        self._volume_rule = volume_rule
        self.boundary = boundary_rule
        self.quad_rtol = quad_rtol
        if transform is None:
            transform = np.diag(self._sign_convention())
        transform = np.array(transform, dtype=float)
        transform.setflags(write=False)
        self.transform = transform

    def __repr__(self):
        return (f"SpectralBasis({self.domain.kind}, n={self.n}, "
                f"lambda=[{self.eigenvalues[0]:.6g} .. {self.eigenvalues[-1]:.6g}])")

    @property
    def n(self) -> int:
        return len(self.eigenvalues)

    @property
    def is_grid(self) -> bool:
        return isinstance(self.domain, GridMask)

    @property
    def center(self) -> np.ndarray:
        return self.domain.center

    @property
    def pairs(self) -> list[EigenPair]:
        return [EigenPair(k + 1, float(lam), int(g), lab, self)
                for k, (lam, g, lab) in enumerate(zip(self.eigenvalues, self.groups, self.labels))]

    def degenerate_groups(self) -> list[np.ndarray]:
        """Index arrays of eigengroups with more than one member."""
        out = []
        for tag in np.unique(self.groups):
            idx = np.flatnonzero(self.groups == tag)
            if len(idx) > 1:
                out.append(idx)
        return out

    def _sign_convention(self) -> np.ndarray:
        nodes, _ = self._volume_rule(1)
        vals = self._evaluator.values(nodes)
        signs = np.ones(vals.shape[1])
        for k in range(vals.shape[1]):
            hit = np.flatnonzero(np.abs(vals[:, k]) > SIGN_THRESHOLD)
            if len(hit) and vals[hit[0], k] < 0:
                signs[k] = -1.0
        return signs

    def values(self, points) -> np.ndarray:
        """Eigenfunction values, shape ``(m, n)``."""
        p = as_points(points, self.dim)
        return self._evaluator.values(p) @ self.transform

    def gradients(self, points) -> np.ndarray:
        """Eigenfunction gradients, shape ``(m, n, dim)``."""
        p = as_points(points, self.dim)
        g = self._evaluator.gradients(p)
        return np.einsum("mjd,jk->mkd", g, self.transform)

    def volume_quadrature(self, refine: int = 1) -> tuple[np.ndarray, np.ndarray]:
        return self._volume_rule(refine)

    def boundary_gradients(self) -> np.ndarray:
        """Gradients at the boundary nodes, shape ``(nb, n, dim)``."""
        if hasattr(self._evaluator, "boundary_gradients"):
            g = self._evaluator.boundary_gradients(self.boundary)
        else:
            g = self._evaluator.gradients(self.boundary.nodes)
        return np.einsum("mjd,jk->mkd", g, self.transform)

    def with_transform(self, transform, atol: float = 1e-10) -> "SpectralBasis":
        """Basis whose eigenfunctions are ``phi @ transform``.

        ``transform`` must be orthogonal and act only within eigengroups.
        """
        T = np.asarray(transform, dtype=float)
        if T.shape != (self.n, self.n):
            raise ValueError("transform must be n x n")
        if np.max(np.abs(T.T @ T - np.eye(self.n))) > atol:
            raise ValueError("transform is not orthogonal")
        if np.max(np.abs(T[self.groups[:, None] != self.groups[None, :]]), initial=0.0) > atol:
            raise ValueError("transform mixes distinct eigenvalues")
        return SpectralBasis(self.domain, self.eigenvalues, self.labels, self._evaluator,
                             self._volume_rule, self.boundary, self.transform @ T, self.quad_rtol)

    @cached_property
    def fingerprint(self) -> str:
        h = hashlib.sha256()
        h.update(json.dumps(self.domain.describe(), sort_keys=True).encode())
        h.update(self.eigenvalues.tobytes())
        h.update(np.ascontiguousarray(self.transform).tobytes())
        return h.hexdigest()[:16]

    @cached_property
    def moment_matrix(self) -> np.ndarray:
        return radial_moment_matrix(self)

    def describe(self) -> dict:
        return {"domain": self.domain.describe(), "n": self.n, "fingerprint": self.fingerprint,
                "eigenvalues": self.eigenvalues.tolist()}


# ----------------------------------------------------------------------------
# boundary rules


def boundary_rule(domain, resolution: int = 16) -> BoundaryRule:
    """Boundary quadrature for ``domain``; ``resolution`` sets nodes per edge/panel."""
    c = domain.center
    if isinstance(domain, Interval):
        nodes = np.array([[domain.a], [domain.b]])
        normals = np.array([[-1.0], [1.0]])
        weights = np.ones(2)
    elif isinstance(domain, Rectangle):
        panels = max(1, int(np.ceil(resolution / 8)))
        xs, wx = gauss_panels(domain.a, domain.b, panels)
        ys, wy = gauss_panels(domain.c, domain.d, panels)
        parts = [
            (np.column_stack([xs, np.full_like(xs, domain.c)]), wx, (0.0, -1.0)),
            (np.column_stack([np.full_like(ys, domain.b), ys]), wy, (1.0, 0.0)),
            (np.column_stack([xs, np.full_like(xs, domain.d)]), wx, (0.0, 1.0)),
            (np.column_stack([np.full_like(ys, domain.a), ys]), wy, (-1.0, 0.0)),
        ]
        nodes = np.vstack([p[0] for p in parts])
        weights = np.concatenate([p[1] for p in parts])
        normals = np.vstack([np.tile(p[2], (len(p[1]), 1)) for p in parts])
    elif isinstance(domain, Disk):
        theta, wt = periodic_trapezoid(max(resolution, 8))
        normals = np.column_stack([np.cos(theta), np.sin(theta)])
        nodes = np.array(domain.origin) + domain.radius * normals
        weights = domain.radius * wt
    elif isinstance(domain, GridMask):
        return _grid_links(domain)
    else:
        raise TypeError(f"unsupported domain {domain!r}")
    support = np.einsum("md,md->m", nodes - c, normals)
    return BoundaryRule(nodes, weights, normals, support)


def star_shape_margin(domain_or_basis) -> float:
    """Minimum of ``(x - star_center) . nu`` over the boundary nodes.

    A nonnegative value certifies star-shapedness about the star center at the
    resolution of the boundary rule.
    """
    if isinstance(domain_or_basis, SpectralBasis):
        rule = domain_or_basis.boundary
    else:
        rule = boundary_rule(domain_or_basis, resolution=256)
    return float(np.min(rule.support))


# ----------------------------------------------------------------------------
# interval


class _SineEvaluator:
    def __init__(self, a: float, length: float, modes):
        self.a = a
        self.length = length
        self.k = np.asarray(modes, dtype=float)
        self.scale = np.sqrt(2.0 / length)

    def values(self, p):
        arg = np.pi * (p[:, :1] - self.a) / self.length * self.k[None, :]
        return self.scale * np.sin(arg)

    def gradients(self, p):
        w = np.pi * self.k / self.length
        arg = (p[:, :1] - self.a) * w[None, :]
        return (self.scale * w[None, :] * np.cos(arg))[:, :, None]

    def second_derivatives(self, p):
        w = np.pi * self.k / self.length
        return -(w**2)[None, :] * self.values(p)


def _check_count(n):
    if int(n) != n or n < 1:
        raise ValueError(f"truncation size must be a positive integer, got {n}")
    return int(n)


def interval_basis(a: float, b: float, n: int, star_center: float = 0.0) -> SpectralBasis:
    n = _check_count(n)
    dom = Interval(a, b, star_center)
    L = dom.length
    modes = np.arange(1, n + 1)
    lam = (np.pi * modes / L) ** 2
    ev = _SineEvaluator(a, L, modes)

    @lru_cache(maxsize=4)
    def rule(refine: int):
        x, w = gauss_panels(a, b, (4 * n + 8) * refine)
        return x[:, None], w

    return SpectralBasis(dom, lam, [(int(k),) for k in modes], ev, rule, boundary_rule(dom))


# ----------------------------------------------------------------------------
# rectangle


class _TensorSineEvaluator:
    def __init__(self, dom: Rectangle, p, q):
        self.dom = dom
        self.wx = np.pi * np.asarray(p, dtype=float) / (dom.b - dom.a)
        self.wy = np.pi * np.asarray(q, dtype=float) / (dom.d - dom.c)
        self.scale = 2.0 / np.sqrt((dom.b - dom.a) * (dom.d - dom.c))

    def _parts(self, p):
        ax = (p[:, :1] - self.dom.a) * self.wx[None, :]
        ay = (p[:, 1:2] - self.dom.c) * self.wy[None, :]
        return ax, ay

    def values(self, p):
        ax, ay = self._parts(p)
        return self.scale * np.sin(ax) * np.sin(ay)

    def gradients(self, p):
        ax, ay = self._parts(p)
        gx = self.scale * self.wx[None, :] * np.cos(ax) * np.sin(ay)
        gy = self.scale * self.wy[None, :] * np.sin(ax) * np.cos(ay)
        return np.stack([gx, gy], axis=-1)

    def laplacians(self, p):
        return -(self.wx**2 + self.wy**2)[None, :] * self.values(p)


def rectangle_modes(a, b, c, d, n):
    """Mode pairs ``(p, q)`` of the ``n`` smallest eigenvalues, ties ordered by ``p``."""
    Lx, Ly = b - a, d - c
    p, q = np.meshgrid(np.arange(1, n + 1), np.arange(1, n + 1), indexing="ij")
    p, q = p.ravel(), q.ravel()
    lam = (np.pi * p / Lx) ** 2 + (np.pi * q / Ly) ** 2
    order = np.lexsort((q, p, lam))[:n]
    return p[order], q[order], lam[order]


def rectangle_basis(a, b, c, d, n: int, star_center=(0.0, 0.0)) -> SpectralBasis:
    n = _check_count(n)
    dom = Rectangle(a, b, c, d, star_center)
    p, q, lam = rectangle_modes(a, b, c, d, n)
    ev = _TensorSineEvaluator(dom, p, q)
    px, qy = int(p.max()), int(q.max())

    @lru_cache(maxsize=4)
    def rule(refine: int):
        rx = gauss_panels(a, b, (2 * px + 4) * refine)
        ry = gauss_panels(c, d, (2 * qy + 4) * refine)
        return tensor_rule(rx, ry)

    bnd = boundary_rule(dom, resolution=8 * (2 * max(px, qy) + 4))
    labels = [(int(i), int(j)) for i, j in zip(p, q)]
    return SpectralBasis(dom, lam, labels, ev, rule, bnd)


# ----------------------------------------------------------------------------
# disk


class _BesselEvaluator:
    def __init__(self, dom: Disk, m, alpha, trig, norm):
        self.dom = dom
        self.m = np.asarray(m, dtype=float)
        self.alpha = np.asarray(alpha, dtype=float)
        self.trig = np.asarray(trig)  # 0: cos(m theta), 1: sin(m theta)
        self.norm = np.asarray(norm, dtype=float)

    def _polar(self, p):
        d = p - np.array(self.dom.origin)
        r = np.hypot(d[:, 0], d[:, 1])
        th = np.arctan2(d[:, 1], d[:, 0])
        return r, th

    def _angular(self, th):
        mt = th[:, None] * self.m[None, :]
        cos_mode = self.trig[None, :] == 0
        ang = np.where(cos_mode, np.cos(mt), np.sin(mt))
        dang = np.where(cos_mode, -np.sin(mt), np.cos(mt))
        return ang, dang

    def values(self, p):
        r, th = self._polar(p)
        z = r[:, None] * self.alpha[None, :]
        ang, _ = self._angular(th)
        return self.norm[None, :] * special.jv(self.m[None, :], z) * ang

    def gradients(self, p):
        r, th = self._polar(p)
        m = self.m[None, :]
        z = r[:, None] * self.alpha[None, :]
        ang, dang = self._angular(th)
        radial = self.norm * self.alpha * special.jvp(m, z) * ang
        # J_m(z)/z = (J_{m-1}(z) + J_{m+1}(z)) / (2m), regular at z = 0
        safe_m = np.where(m > 0, m, 1.0)
        j_over_z = (special.jv(m - 1, z) + special.jv(m + 1, z)) / (2 * safe_m)
        tangential = np.where(m > 0, self.norm * self.alpha * m * j_over_z * dang, 0.0)
        c, s = np.cos(th)[:, None], np.sin(th)[:, None]
        gx = radial * c - tangential * s
        gy = radial * s + tangential * c
        return np.stack([gx, gy], axis=-1)


def disk_modes(R: float, n: int):
    """``(m, ell, trig, root)`` for the ``n`` smallest disk eigenvalues.

    Angular orders ``m >= 1`` contribute a cos/sin pair with a shared eigenvalue.
    """
    cands = []
    lmax = n
    for m in range(n + 1):
        roots = special.jn_zeros(m, lmax)
        for ell, j in enumerate(roots, start=1):
            cands.append((j, m, ell, 0))
            if m > 0:
                cands.append((j, m, ell, 1))
    cands.sort(key=lambda t: (t[0], t[1], t[2], t[3]))
    picked = cands[:n]
    if len(picked) < n:
        raise EigenSolverError("failed to bracket enough Bessel zeros")
    return picked


def disk_basis(R: float, n: int, origin=(0.0, 0.0), star_center=None) -> SpectralBasis:
    n = _check_count(n)
    if star_center is None:
        star_center = origin
    dom = Disk(R, origin, star_center)
    modes = disk_modes(R, n)
    roots = np.array([t[0] for t in modes])
    m = np.array([t[1] for t in modes])
    ell = np.array([t[2] for t in modes])
    trig = np.array([t[3] for t in modes])
    alpha = roots / R
    lam = alpha**2
    # int_0^R J_m(alpha r)^2 r dr = R^2 J_{m+1}(j)^2 / 2; angular mass 2pi (m=0) or pi
    radial_mass = 0.5 * R**2 * special.jv(m + 1, roots) ** 2
    angular_mass = np.where(m == 0, 2 * np.pi, np.pi)
    norm = 1.0 / np.sqrt(radial_mass * angular_mass)
    ev = _BesselEvaluator(dom, m, alpha, trig, norm)
    mmax, lmax = int(m.max()), int(ell.max())
    n_theta = 4 * mmax + 16

    @lru_cache(maxsize=4)
    def rule(refine: int):
        r, wr = gauss_panels(0.0, R, (2 * (lmax + mmax) + 4) * refine)
        th, wt = periodic_trapezoid(n_theta * refine)
        Rr, Th = np.meshgrid(r, th, indexing="ij")
        pts = np.column_stack([(Rr * np.cos(Th)).ravel(), (Rr * np.sin(Th)).ravel()])
        return pts + np.array(origin), np.outer(wr * r, wt).ravel()

    labels = [(int(a), int(b), "cos" if t == 0 else "sin") for a, b, t in zip(m, ell, trig)]
    return SpectralBasis(dom, lam, labels, ev, rule, boundary_rule(dom, n_theta))


# ----------------------------------------------------------------------------
# finite-difference grid


def _grid_links(mask: GridMask) -> BoundaryRule:
    """Boundary links: each (interior node, exterior neighbour) pair."""
    arr = mask.array
    pad = mask.padded()
    index = -np.ones(pad.shape, dtype=int)
    cells = np.argwhere(arr)
    index[cells[:, 0] + 1, cells[:, 1] + 1] = np.arange(len(cells))
    nodes, normals, owners = [], [], []
    # direction (dr, dc) in raster coordinates and the matching outward normal
    for (dr, dc), nu in (((0, 1), (1.0, 0.0)), ((0, -1), (-1.0, 0.0)),
                         ((-1, 0), (0.0, 1.0)), ((1, 0), (0.0, -1.0))):
        rr, cc = cells[:, 0] + 1 + dr, cells[:, 1] + 1 + dc
        outside = ~pad[rr, cc]
        sel = np.flatnonzero(outside)
        owners.append(sel)
        nodes.append(mask.node_coordinates(rr[sel] - 1, cc[sel] - 1))
        normals.append(np.tile(nu, (len(sel), 1)))
    nodes = np.vstack(nodes)
    normals = np.vstack(normals)
    support = np.einsum("md,md->m", nodes - mask.center, normals)
    return BoundaryRule(nodes, np.full(len(nodes), mask.h), normals, support,
                        np.concatenate(owners))


class _GridEvaluator:
    def __init__(self, mask: GridMask, vectors):
        self.mask = mask
        self.h = mask.h
        self.cells = np.argwhere(mask.array)
        self.vectors = vectors  # (ncells, n), discrete L2-normalized with weight h^2
        pad = mask.padded()
        self.field = np.zeros(pad.shape + (vectors.shape[1],))
        self.field[self.cells[:, 0] + 1, self.cells[:, 1] + 1] = vectors
        big = np.pad(self.field, ((1, 1), (1, 1), (0, 0)))
        # raster rows run downward in y
        self.grad_x = (big[1:-1, 2:] - big[1:-1, :-2]) / (2 * self.h)
        self.grad_y = (big[:-2, 1:-1] - big[2:, 1:-1]) / (2 * self.h)

    def _bilinear(self, fieldarr, p):
        nrows = self.mask.shape[0]
        fc = (p[:, 0] - self.mask.origin[0]) / self.h
        fr = nrows + 1 - (p[:, 1] - self.mask.origin[1]) / self.h
        R, C = fieldarr.shape[:2]
        c0 = np.clip(np.floor(fc).astype(int), 0, C - 2)
        r0 = np.clip(np.floor(fr).astype(int), 0, R - 2)
        tc = np.clip(fc - c0, 0.0, 1.0)[:, None]
        tr = np.clip(fr - r0, 0.0, 1.0)[:, None]
        return ((1 - tr) * (1 - tc) * fieldarr[r0, c0] + (1 - tr) * tc * fieldarr[r0, c0 + 1]
                + tr * (1 - tc) * fieldarr[r0 + 1, c0] + tr * tc * fieldarr[r0 + 1, c0 + 1])

    def values(self, p):
        return self._bilinear(self.field, p)

    def gradients(self, p):
        return np.stack([self._bilinear(self.grad_x, p), self._bilinear(self.grad_y, p)], axis=-1)

    def boundary_gradients(self, rule: BoundaryRule):
        # one-sided trace: (0 - phi(interior)) / h along the outward normal
        inner = self.vectors[rule.owners]
        return (-inner / self.h)[:, :, None] * rule.normals[:, None, :]


def fd_laplacian(mask: GridMask) -> sp.csr_matrix:
    """5-point Dirichlet Laplacian (positive definite) on the interior nodes."""
    arr = mask.array
    cells = np.argwhere(arr)
    index = -np.ones(arr.shape, dtype=int)
    index[cells[:, 0], cells[:, 1]] = np.arange(len(cells))
    rows, cols = [np.arange(len(cells))], [np.arange(len(cells))]
    vals = [np.full(len(cells), 4.0)]
    for dr, dc in ((0, 1), (0, -1), (1, 0), (-1, 0)):
        rr, cc = cells[:, 0] + dr, cells[:, 1] + dc
        ok = (rr >= 0) & (rr < arr.shape[0]) & (cc >= 0) & (cc < arr.shape[1])
        nb = np.full(len(cells), -1)
        nb[ok] = index[rr[ok], cc[ok]]
        sel = nb >= 0
        rows.append(np.flatnonzero(sel))
        cols.append(nb[sel])
        vals.append(np.full(sel.sum(), -1.0))
    A = sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                      shape=(len(cells), len(cells)))
    return A / mask.h**2


def fd_dilation(mask: GridMask) -> sp.csr_matrix:
    """Central-difference ``(x - c) . grad`` on the interior nodes (zero Dirichlet data)."""
    arr = mask.array
    cells = np.argwhere(arr)
    index = -np.ones(arr.shape, dtype=int)
    index[cells[:, 0], cells[:, 1]] = np.arange(len(cells))
    xy = mask.node_coordinates(cells[:, 0], cells[:, 1]) - mask.center
    rows, cols, vals = [], [], []
    # (dr, dc, component, sign): +x is dc=+1, +y is dr=-1
    for dr, dc, comp, sign in ((0, 1, 0, 1.0), (0, -1, 0, -1.0), (-1, 0, 1, 1.0), (1, 0, 1, -1.0)):
        rr, cc = cells[:, 0] + dr, cells[:, 1] + dc
        ok = (rr >= 0) & (rr < arr.shape[0]) & (cc >= 0) & (cc < arr.shape[1])
        nb = np.full(len(cells), -1)
        nb[ok] = index[rr[ok], cc[ok]]
        sel = np.flatnonzero(nb >= 0)
        rows.append(sel)
        cols.append(nb[sel])
        vals.append(sign * xy[sel, comp] / (2 * mask.h))
    return sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                         shape=(len(cells), len(cells)))


_GRID_CACHE: dict = {}
GRID_MIN_BUCKET = 64


def grid_basis(mask: GridMask, n: int) -> SpectralBasis:
    """``n`` smallest eigenpairs of the 5-point Laplacian on ``mask``."""
    n = _check_count(n)
    ncells = int(mask.array.sum())
    if n > ncells:
        raise ValueError(f"n={n} exceeds the {ncells} interior cells of the mask")
    # Eigenpairs are computed for a power-of-two bucket and sliced, so the
    # vectors inside degenerate groups do not depend on the order of calls.
    bucket = min(ncells, max(GRID_MIN_BUCKET, 1 << (n - 1).bit_length()))
    key = (mask.rows, mask.h, mask.origin, bucket)
    if key not in _GRID_CACHE:
        A = fd_laplacian(mask).toarray()
        try:
            lam, vec = scipy.linalg.eigh(A, subset_by_index=[0, bucket - 1], driver="evr")
        except (np.linalg.LinAlgError, ValueError) as exc:
            raise EigenSolverError(str(exc)) from exc
        if len(_GRID_CACHE) >= 4:
            _GRID_CACHE.pop(next(iter(_GRID_CACHE)))
        _GRID_CACHE[key] = (lam, vec / mask.h)
    lam, vec = _GRID_CACHE[key]
    lam, vec = lam[:n], vec[:, :n]
    ev = _GridEvaluator(mask, vec)
    nodes = mask.node_coordinates(ev.cells[:, 0], ev.cells[:, 1])
    weights = np.full(ncells, mask.h**2)

    def rule(refine: int):
        return nodes, weights

    labels = [(k + 1,) for k in range(n)]
    return SpectralBasis(mask, lam, labels, ev, rule, _grid_links(mask), quad_rtol=1e-8)


def grid_fields(basis: SpectralBasis) -> np.ndarray:
    """Nodal eigenvector table ``(ncells, n)`` of a grid basis (transform applied)."""
    if not basis.is_grid:
        raise TypeError("not a grid basis")
    return basis._evaluator.vectors @ basis.transform


# ----------------------------------------------------------------------------
# radial moments


def radial_moment_matrix(basis: SpectralBasis, check: bool = True) -> np.ndarray:
    """``M[j, k] = int (x - c) . grad(phi_j) phi_k dx`` over the domain.

    The diagonal equals ``-N/2`` exactly in the continuum and is used as a
    quadrature health check. On a grid basis the central-difference dilation is
    replaced by its skew part plus ``-N/2 I``: the symmetric part of the discrete
    operator is ``-N/2 I + O(h^2 Laplacian)`` and is fixed to its exact value.
    """
    N = basis.dim
    if basis.is_grid:
        V = grid_fields(basis)
        D = fd_dilation(basis.domain)
        raw = basis.domain.h**2 * (D @ V).T @ V
        M = 0.5 * (raw - raw.T) - 0.5 * N * np.eye(basis.n)
        return M
    nodes, w = basis.volume_quadrature()
    V = basis.values(nodes)
    G = basis.gradients(nodes)
    radial = np.einsum("md,mjd->mj", nodes - basis.center, G)
    M = (radial * w[:, None]).T @ V
    if check:
        dev = np.max(np.abs(np.diag(M) + 0.5 * N))
        if dev > basis.quad_rtol:
            raise QuadratureError(f"diagonal radial moments deviate from -N/2 by {dev:.3e}")
    return M


def rotate_degenerate_groups(basis: SpectralBasis, rng) -> tuple[SpectralBasis, np.ndarray]:
    """Apply a random orthogonal rotation inside every degenerate eigengroup.

    Returns the rotated basis and the rotation ``T``; coefficients re-expand as
    ``T.T @ coeffs``.
    """
    T = np.eye(basis.n)
    for idx in basis.degenerate_groups():
        q, r = np.linalg.qr(rng.standard_normal((len(idx), len(idx))))
        q = q * np.sign(np.diag(r))
        T[np.ix_(idx, idx)] = q
    return basis.with_transform(T), T


def make_basis(domain, n: int) -> SpectralBasis:
    """Dispatch on the domain type."""
    if isinstance(domain, Interval):
        return interval_basis(domain.a, domain.b, n, domain.star_center)
    if isinstance(domain, Rectangle):
        return rectangle_basis(domain.a, domain.b, domain.c, domain.d, n, domain.star_center)
    if isinstance(domain, Disk):
        return disk_basis(domain.radius, n, domain.origin, domain.star_center)
    if isinstance(domain, GridMask):
        return grid_basis(domain, n)
    raise DomainError(f"unsupported domain {domain!r}")
