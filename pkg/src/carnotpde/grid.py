"""Axis-aligned coordinate boxes, sampled grid functions and flow stencils.

A flow stencil records, for every interior node, where a fixed group-flow
move lands and how to read that value back by multilinear interpolation
(convex weights only).  Targets that leave the box are clamped coordinate-
wise to the boundary and evaluated from the lateral datum instead.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class GridSpec:
    """Open box discretized by cells_per_axis intervals, plus the time horizon."""

    box: tuple               # ((lo, hi), ...) per axis
    cells: tuple             # intervals per axis
    horizon: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "box", tuple((float(a), float(b)) for a, b in self.box))
        object.__setattr__(self, "cells", tuple(int(c) for c in self.cells))
        if len(self.box) != len(self.cells):
            raise ValueError("box and cells must agree on the number of axes")
        if any(b <= a for a, b in self.box):
            raise ValueError("each axis needs lo < hi")
        if any(c < 2 for c in self.cells):
            raise ValueError("need at least 2 cells per axis")
        if self.horizon <= 0:
            raise ValueError("time horizon must be positive")

    @property
    def ndim(self):
        return len(self.box)

    @property
    def spacings(self):
        return np.array([(b - a) / c for (a, b), c in zip(self.box, self.cells)])

    @property
    def delta(self):
        """Spatial step of the scheme: the coarsest axis spacing."""
        return float(self.spacings.max())

    @property
    def shape(self):
        return tuple(c + 1 for c in self.cells)

    @property
    def node_count(self):
        return int(np.prod(self.shape))

    def axes(self):
        return [np.linspace(a, b, c + 1) for (a, b), c in zip(self.box, self.cells)]

    def coords(self):
        """All node coordinates, shape (node_count, ndim), lexicographic order."""
        mesh = np.meshgrid(*self.axes(), indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=-1)

    def lateral_mask(self):
        """Flat boolean mask of nodes on the spatial boundary faces."""
        mask = np.zeros(self.shape, dtype=bool)
        for axis in range(self.ndim):
            index = [slice(None)] * self.ndim
            index[axis] = 0
            mask[tuple(index)] = True
            index[axis] = -1
            mask[tuple(index)] = True
        return mask.ravel()


@dataclass
class GridFunction:
    """Scalar samples over all grid nodes at one time level."""

    grid: GridSpec
    values: np.ndarray
    time_level: float = 0.0

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float).ravel()
        if self.values.size != self.grid.node_count:
            raise ValueError("value array does not cover the grid")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("grid function contains non-finite values")

    def reshaped(self):
        return self.values.reshape(self.grid.shape)

    def sup_norm(self):
        return float(np.abs(self.values).max())


def classify_nodes(grid, t):
    """Per-node tags at time t: the initial slice is entirely parabolic
    boundary, afterwards only the lateral faces are."""
    if t <= 0.0:
        boundary = np.ones(grid.node_count, dtype=bool)
    else:
        boundary = grid.lateral_mask()
    return np.where(boundary, "parabolic_boundary", "interior")


@dataclass
class FlowStencil:
    """Interpolation data for one flow move applied at a fixed node set."""

    corner_index: np.ndarray      # (K, 2^N) int32 flat node indices
    weights: np.ndarray           # (K, 2^N) convex weights
    outside_rows: np.ndarray      # (Ko,) rows whose target left the box
    clamped: np.ndarray           # (Ko, N) boundary points for datum lookup

    def evaluate(self, values, boundary_values=None):
        out = np.einsum("kc,kc->k", self.weights, values[self.corner_index])
        if self.outside_rows.size:
            if boundary_values is None:
                raise ValueError("stencil leaves the box but no datum was given")
            out[self.outside_rows] = boundary_values
        return out


def build_stencil(grid, targets):
    """Multilinear stencil for arbitrary target coordinates, shape (K, N)."""
    targets = np.asarray(targets, dtype=float)
    K, N = targets.shape
    lo = np.array([a for a, _ in grid.box])
    hi = np.array([b for _, b in grid.box])
    tol = 1e-10 * (hi - lo)
    inside = np.all((targets >= lo - tol) & (targets <= hi + tol), axis=1)
    clipped = np.clip(targets, lo, hi)

    spac = grid.spacings
    pos = (clipped - lo) / spac
    cell = np.clip(np.floor(pos).astype(np.int64), 0, np.array(grid.cells) - 1)
    frac = pos - cell

    shape = grid.shape
    strides = np.ones(N, dtype=np.int64)
    for axis in range(N - 2, -1, -1):
        strides[axis] = strides[axis + 1] * shape[axis + 1]

    corners = np.empty((K, 2 ** N), dtype=np.int64)
    weights = np.empty((K, 2 ** N))
    for c in range(2 ** N):
        bits = np.array([(c >> (N - 1 - axis)) & 1 for axis in range(N)])
        idx = cell + bits
        corners[:, c] = idx @ strides
        w = np.where(bits == 1, frac, 1.0 - frac)
        weights[:, c] = np.prod(w, axis=1)

    outside_rows = np.nonzero(~inside)[0]
    return FlowStencil(
        corner_index=corners,
        weights=weights,
        outside_rows=outside_rows,
        clamped=clipped[outside_rows],
    )


@dataclass
class StencilBank:
    """A batch of flow stencils over the same node set, evaluated together."""

    corner_index: np.ndarray      # (D, K, 2^N)
    weights: np.ndarray           # (D, K, 2^N)
    outside: list                 # per direction: (rows, clamped coords)

    @classmethod
    def from_targets(cls, grid, target_list):
        stencils = [build_stencil(grid, t) for t in target_list]
        return cls(
            corner_index=np.stack([s.corner_index for s in stencils]),
            weights=np.stack([s.weights for s in stencils]),
            outside=[(s.outside_rows, s.clamped) for s in stencils],
        )

    @property
    def n_directions(self):
        return self.corner_index.shape[0]

    def evaluate(self, values, datum=None, t=0.0, datum_cache=None):
        """Values at every flow target, shape (D, K).

        Off-box targets read the lateral datum; ``datum_cache`` may hold
        precomputed datum values (used when the datum is time-independent).
        """
        out = np.einsum("dkc,dkc->dk", self.weights, values[self.corner_index])
        for d, (rows, clamped) in enumerate(self.outside):
            if rows.size == 0:
                continue
            if datum_cache is not None:
                out[d, rows] = datum_cache[d]
            elif datum is not None:
                out[d, rows] = datum(clamped, t)
            else:
                raise ValueError("stencil leaves the box but no datum was given")
        return out

    def datum_cache(self, datum, t=0.0):
        return [datum(clamped, t) if rows.size else None
                for rows, clamped in self.outside]
