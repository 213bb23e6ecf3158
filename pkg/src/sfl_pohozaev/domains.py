"""Bounded domains on which Dirichlet eigenbases are built."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


class DomainError(ValueError):
    """Raised for geometrically invalid domain descriptions."""


def _point(value, dim: int) -> tuple[float, ...]:
    arr = np.atleast_1d(np.asarray(value, dtype=float)).ravel()
    if arr.size == 1 and dim > 1:
        arr = np.repeat(arr, dim)
    if arr.size != dim:
        raise DomainError(f"expected a point in R^{dim}, got {value!r}")
    return tuple(float(v) for v in arr)


@dataclass(frozen=True)
class Interval:
    a: float
    b: float
    star_center: float = 0.0

    dim = 1
    kind = "interval"

    def __post_init__(self):
        if not (np.isfinite(self.a) and np.isfinite(self.b)) or self.a >= self.b:
            raise DomainError(f"invalid interval: need a < b, got ({self.a}, {self.b})")
        object.__setattr__(self, "star_center", float(self.star_center))

    @property
    def center(self) -> np.ndarray:
        return np.array([self.star_center])

    @property
    def length(self) -> float:
        return self.b - self.a

    def contains(self, points, tol: float = 1e-12) -> np.ndarray:
        x = np.asarray(points, dtype=float).reshape(-1)
        return (x >= self.a - tol) & (x <= self.b + tol)

    def describe(self) -> dict:
        return {"kind": self.kind, "a": self.a, "b": self.b,
                "star_center": [self.star_center]}


@dataclass(frozen=True)
class Rectangle:
    a: float
    b: float
    c: float
    d: float
    star_center: tuple = (0.0, 0.0)

    dim = 2
    kind = "rectangle"

    def __post_init__(self):
        vals = (self.a, self.b, self.c, self.d)
        if not all(np.isfinite(vals)) or self.a >= self.b or self.c >= self.d:
            raise DomainError(f"degenerate rectangle ({self.a},{self.b})x({self.c},{self.d})")
        object.__setattr__(self, "star_center", _point(self.star_center, 2))

    @property
    def center(self) -> np.ndarray:
        return np.array(self.star_center)

    def contains(self, points, tol: float = 1e-12) -> np.ndarray:
        p = np.atleast_2d(np.asarray(points, dtype=float))
        return ((p[:, 0] >= self.a - tol) & (p[:, 0] <= self.b + tol)
                & (p[:, 1] >= self.c - tol) & (p[:, 1] <= self.d + tol))

    def describe(self) -> dict:
        return {"kind": self.kind, "a": self.a, "b": self.b, "c": self.c, "d": self.d,
                "star_center": list(self.star_center)}


@dataclass(frozen=True)
class Disk:
    radius: float
    origin: tuple = (0.0, 0.0)
    star_center: tuple = (0.0, 0.0)

    dim = 2
    kind = "disk"

    def __post_init__(self):
        if not np.isfinite(self.radius) or self.radius <= 0:
            raise DomainError(f"disk radius must be positive, got {self.radius}")
        object.__setattr__(self, "origin", _point(self.origin, 2))
        object.__setattr__(self, "star_center", _point(self.star_center, 2))

    @property
    def center(self) -> np.ndarray:
        return np.array(self.star_center)

    def contains(self, points, tol: float = 1e-12) -> np.ndarray:
        p = np.atleast_2d(np.asarray(points, dtype=float)) - np.array(self.origin)
        return np.hypot(p[:, 0], p[:, 1]) <= self.radius + tol

    def describe(self) -> dict:
        return {"kind": self.kind, "radius": self.radius, "origin": list(self.origin),
                "star_center": list(self.star_center)}


@dataclass(frozen=True)
class GridMask:
    """Raster of interior grid nodes.

    ``rows[0]`` is the top row. The node in row ``r``, column ``c`` sits at
    ``origin + ((c + 1) h, (len(rows) - r) h)``; every node outside the mask
    carries the homogeneous Dirichlet value. The closed domain is the union of
    the lattice cells having at least one interior node as a corner.
    """

    rows: tuple
    h: float
    origin: tuple = (0.0, 0.0)
    star_center: tuple = (0.0, 0.0)
    _array: np.ndarray = field(init=False, repr=False, compare=False)

    dim = 2
    kind = "grid"

    def __post_init__(self):
        rows = tuple(str(r) for r in self.rows)
        object.__setattr__(self, "rows", rows)
        if not np.isfinite(self.h) or self.h <= 0:
            raise DomainError(f"grid spacing must be positive, got {self.h}")
        if not rows or len({len(r) for r in rows}) != 1:
            raise DomainError("grid mask rows must be nonempty and of equal length")
        if set("".join(rows)) - {"0", "1"}:
            raise DomainError("grid mask may only contain '0' and '1'")
        arr = np.array([[ch == "1" for ch in r] for r in rows], dtype=bool)
        if not arr.any():
            raise DomainError("grid mask has no interior cells")
        if not _connected(arr):
            raise DomainError("grid mask is not connected")
        object.__setattr__(self, "_array", arr)
        object.__setattr__(self, "origin", _point(self.origin, 2))
        object.__setattr__(self, "star_center", _point(self.star_center, 2))

    @classmethod
    def from_array(cls, mask, h, origin=(0.0, 0.0), star_center=(0.0, 0.0)) -> "GridMask":
        mask = np.asarray(mask, dtype=bool)
        rows = tuple("".join("1" if v else "0" for v in row) for row in mask)
        return cls(rows, h, origin, star_center)

    @classmethod
    def rectangle(cls, width: float, height: float, h: float,
                  origin=(0.0, 0.0), star_center=None) -> "GridMask":
        nx = int(round(width / h)) - 1
        ny = int(round(height / h)) - 1
        if nx < 1 or ny < 1:
            raise DomainError("rectangle too small for the requested spacing")
        if star_center is None:
            star_center = (origin[0] + width / 2, origin[1] + height / 2)
        return cls.from_array(np.ones((ny, nx), dtype=bool), h, origin, star_center)

    @classmethod
    def l_shape(cls, size: float, h: float, origin=(0.0, 0.0), star_center=None) -> "GridMask":
        """L-shaped polygon: the square of side ``size`` minus its upper-right quarter."""
        m = int(round(size / h)) - 1
        arr = np.ones((m, m), dtype=bool)
        half = m // 2
        arr[:half, half + 1:] = False
        if star_center is None:
            star_center = (origin[0] + size / 4, origin[1] + size / 4)
        return cls.from_array(arr, h, origin, star_center)

    @property
    def array(self) -> np.ndarray:
        return self._array

    @property
    def center(self) -> np.ndarray:
        return np.array(self.star_center)

    @property
    def shape(self) -> tuple[int, int]:
        return self._array.shape

    def node_coordinates(self, r, c) -> np.ndarray:
        nrows = self._array.shape[0]
        x = self.origin[0] + (np.asarray(c) + 1) * self.h
        y = self.origin[1] + (nrows - np.asarray(r)) * self.h
        return np.stack([x, y], axis=-1)

    def padded(self) -> np.ndarray:
        """Mask with a one-node frame of exterior (Dirichlet) nodes."""
        return np.pad(self._array, 1)

    def contains(self, points, tol: float = 1e-12) -> np.ndarray:
        # closed lattice cells with at least one interior corner
        p = np.atleast_2d(np.asarray(points, dtype=float))
        pad = self.padded()
        nrows = self._array.shape[0]
        fc = (p[:, 0] - self.origin[0]) / self.h
        fr = nrows + 1 - (p[:, 1] - self.origin[1]) / self.h
        slack = tol / self.h
        out = np.zeros(len(p), dtype=bool)
        for r0 in {0, 1}:
            for c0 in {0, 1}:
                r = np.floor(fr + (slack if r0 else -slack)).astype(int)
                c = np.floor(fc + (slack if c0 else -slack)).astype(int)
                for dr in (0, 1):
                    for dc in (0, 1):
                        rr, cc = r + dr, c + dc
                        ok = (rr >= 0) & (rr < pad.shape[0]) & (cc >= 0) & (cc < pad.shape[1])
                        hit = np.zeros(len(p), dtype=bool)
                        hit[ok] = pad[rr[ok], cc[ok]]
                        out |= hit
        return out

    def describe(self) -> dict:
        return {"kind": self.kind, "h": self.h, "origin": list(self.origin),
                "star_center": list(self.star_center), "shape": list(self.shape),
                "cells": int(self._array.sum())}

    def to_text(self) -> str:
        head = f"h={self.h!r}\norigin={self.origin[0]!r},{self.origin[1]!r}\n"
        return head + "\n".join(self.rows) + "\n"


def _connected(arr: np.ndarray) -> bool:
    cells = np.argwhere(arr)
    seen = np.zeros_like(arr)
    queue = deque([tuple(cells[0])])
    seen[queue[0]] = True
    count = 0
    while queue:
        r, c = queue.popleft()
        count += 1
        for dr, dc in ((1, 0), (-1, 0), (0, 1), (0, -1)):
            rr, cc = r + dr, c + dc
            if 0 <= rr < arr.shape[0] and 0 <= cc < arr.shape[1] and arr[rr, cc] and not seen[rr, cc]:
                seen[rr, cc] = True
                queue.append((rr, cc))
    return count == len(cells)


def load_grid_mask(path, star_center=None) -> GridMask:
    """Read a raster mask: header ``h=<spacing>`` (optionally ``origin=x,y``) then rows of 0/1."""
    h = None
    origin = (0.0, 0.0)
    rows = []
    for raw in Path(path).read_text().splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("h="):
            h = float(line[2:])
        elif line.startswith("origin="):
            origin = tuple(float(v) for v in line[7:].split(","))
        else:
            rows.append(line)
    if h is None:
        raise DomainError(f"{path}: missing 'h=<spacing>' header")
    mask = GridMask(tuple(rows), h, origin)
    if star_center is not None:
        mask = GridMask(mask.rows, h, origin, star_center)
    return mask
