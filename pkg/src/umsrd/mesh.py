"""Cut-cell meshes in 1D and 2D, and the small-cell merging neighborhoods.

A mesh is a background Cartesian grid of width ``h`` in which one or more
cells are reduced to a fraction of the background volume by an embedded
boundary.  Cells with volume fraction below one half are *small cells*; each
small cell is paired with a single full-size merge partner, and the pair
forms a merging neighborhood over which state redistribution operates.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

_TOL = 1e-12


# ---------------------------------------------------------------------------
# neighborhoods


@dataclass(frozen=True)
class Neighborhood:
    """A merging neighborhood: member cells, weights and weighted volume.

    ``weighted_volume`` is the weight-and-volume inner product over the
    members.  In the default configuration every neighborhood has exactly
    two members (small cell + partner) with unit weights, and neighborhoods
    are pairwise disjoint.
    """

    id: int
    members: tuple[int, ...]
    weights: dict[int, float]
    weighted_volume: float


class NeighborhoodSet(Sequence):
    """Sequence of disjoint neighborhoods with precompiled index arrays.

    The compiled arrays (flat member/owner/weight vectors, plus a dense
    ``(K, m)`` member matrix when all neighborhoods share the same size)
    let the redistribution operators run vectorized over all neighborhoods.
    """

    def __init__(self, neighborhoods: Sequence[Neighborhood], volumes: np.ndarray):
        self._items = tuple(neighborhoods)
        cells, owner, weights = [], [], []
        for k, nb in enumerate(self._items):
            for i in nb.members:
                cells.append(i)
                owner.append(k)
                weights.append(nb.weights[i])
        self.member_cells = np.asarray(cells, dtype=np.intp)
        self.member_owner = np.asarray(owner, dtype=np.intp)
        self.member_weights = np.asarray(weights, dtype=float)
        if len(np.unique(self.member_cells)) != len(self.member_cells):
            raise ValueError("neighborhoods must be pairwise disjoint")
        self.member_volumes = (
            volumes[self.member_cells] if len(cells) else np.empty(0)
        )
        self.weighted_volumes = np.bincount(
            self.member_owner,
            weights=self.member_weights * self.member_volumes,
            minlength=len(self._items),
        )
        if np.any(self.weighted_volumes <= 0.0) and len(self._items):
            raise ValueError("every neighborhood needs positive weighted volume")
        sizes = {len(nb.members) for nb in self._items}
        if len(sizes) == 1:
            m = sizes.pop()
            self.member_matrix = self.member_cells.reshape(-1, m)
        else:
            self.member_matrix = None

    def __len__(self) -> int:
        return len(self._items)

    def __getitem__(self, idx):
        return self._items[idx]


# ---------------------------------------------------------------------------
# 1D


@dataclass(frozen=True)
class Mesh1D:
    """Periodic 1D mesh on [0, L] with at most one small cut cell.

    ``widths[cut_index] == alpha * h``; the cell to the right of the cut
    absorbs the remainder so the domain length is preserved exactly.
    """

    n_cells: int
    widths: np.ndarray
    centers: np.ndarray
    h: float
    cut_index: int | None
    alpha: float | None
    domain_length: float = 1.0
    periodic: bool = True

    dim = 1

    @property
    def volumes(self) -> np.ndarray:
        return self.widths

    @property
    def min_fraction(self) -> float:
        return 1.0 if self.alpha is None else self.alpha


def build_mesh_1d(n: int, alpha: float, cut_position: float = 0.5) -> Mesh1D:
    """Uniform grid h = 1/n on [0, 1] with one small cell of width alpha*h.

    The cell containing ``cut_position`` is shrunk to ``alpha*h``, anchored
    at its left edge; its right neighbor stretches to ``(2 - alpha)*h`` so
    the total length stays 1.  The left neighbor keeps full width and acts
    as the merge partner.
    """
    if n < 4:
        raise ValueError(f"need at least 4 cells, got {n}")
    if not 0.0 < alpha < 0.5:
        raise ValueError(f"volume fraction must lie in (0, 1/2), got {alpha}")
    if not 0.0 < cut_position < 1.0:
        raise ValueError(f"cut position must lie inside (0, 1), got {cut_position}")
    h = 1.0 / n
    k = int(cut_position * n)
    if k < 1 or k > n - 2:
        raise ValueError(
            "cut cell needs a full left neighbor and a right neighbor to stretch"
        )
    widths = np.full(n, h)
    widths[k] = alpha * h
    widths[k + 1] = (2.0 - alpha) * h
    edges = np.concatenate(([0.0], np.cumsum(widths)))
    centers = 0.5 * (edges[:-1] + edges[1:])
    widths.flags.writeable = False
    centers.flags.writeable = False
    return Mesh1D(n, widths, centers, h, k, alpha)


def uniform_mesh_1d(n: int) -> Mesh1D:
    """Plain uniform periodic mesh with no cut cell (for reference tests)."""
    if n < 2:
        raise ValueError("need at least 2 cells")
    h = 1.0 / n
    widths = np.full(n, h)
    centers = (np.arange(n) + 0.5) * h
    widths.flags.writeable = False
    centers.flags.writeable = False
    return Mesh1D(n, widths, centers, h, None, None)


# ---------------------------------------------------------------------------
# 2D


@dataclass(frozen=True)
class CutCell:
    """One small cell of a 2D mesh: location, volume fraction, merge info."""

    i: int
    j: int
    fraction: float
    merge_direction: str
    index: int
    partner: int


class Mesh2D:
    """Base class for 2D cut-cell meshes on [0, 1]^2 (periodic)."""

    dim = 2

    def __init__(self, nx, ny, h, volumes, xc, yc, cut_cells, boundary):
        self.nx = nx
        self.ny = ny
        self.h = h
        self.volumes = volumes
        self.xc = xc
        self.yc = yc
        self.cut_cells = tuple(cut_cells)
        self.boundary = boundary
        for arr in (volumes, xc, yc):
            arr.flags.writeable = False

    @property
    def n_cells(self) -> int:
        return self.volumes.size

    @property
    def min_fraction(self) -> float:
        if not self.cut_cells:
            return 1.0
        return min(c.fraction for c in self.cut_cells)


class SingleCutMesh2D(Mesh2D):
    """N x N grid with one cell of reduced height and its absorber above.

    Cell ``(N/2, N/2)`` keeps width ``h`` but its height shrinks to
    ``alpha*h``, anchored at the bottom edge; the cell above stretches to
    height ``(2 - alpha)*h``.  The merge partner is the full cell below.
    """

    def __init__(self, n: int, alpha: float):
        if n < 4 or n % 2:
            raise ValueError(f"grid size must be even and >= 4, got {n}")
        if not 0.0 < alpha < 0.5:
            raise ValueError(f"volume fraction must lie in (0, 1/2), got {alpha}")
        h = 1.0 / n
        c = r = n // 2
        heights = np.full((n, n), h)  # heights[j, i]
        heights[r, c] = alpha * h
        heights[r + 1, c] = (2.0 - alpha) * h
        volumes = (h * heights).ravel()

        ii, jj = np.meshgrid(np.arange(n), np.arange(n))
        xc = ((ii + 0.5) * h).ravel()
        yc = ((jj + 0.5) * h).ravel()
        yc = yc.copy()
        yc[r * n + c] = r * h + 0.5 * alpha * h
        yc[(r + 1) * n + c] = r * h + alpha * h + 0.5 * (2.0 - alpha) * h

        cut_index = r * n + c
        partner = (r - 1) * n + c
        cut = CutCell(c, r, alpha, "down", cut_index, partner)
        super().__init__(n, n, h, volumes, xc, yc, [cut], "single_horizontal_cut")
        self.alpha = alpha
        self.cut_i = c
        self.cut_j = r
        self.heights = heights
        heights.flags.writeable = False


def build_mesh_2d_single_cut(n: int, alpha: float) -> SingleCutMesh2D:
    """2D mesh with a single horizontally-cut small cell merging downward."""
    return SingleCutMesh2D(n, alpha)


def _clamped_line_moments(m, c, xl, xr, ybot, ytop):
    """Exact (area, x-moment, y-moment) of {(x,y): ybot <= y <= g(x)} where
    g = clip(m*x + c, ybot, ytop), over the strip xl <= x <= xr.

    The clamped line is piecewise linear, so 2-point Gauss quadrature per
    piece integrates the (at most quadratic) moment integrands exactly.
    """
    breaks = [xl, xr]
    if m != 0.0:
        for y in (ybot, ytop):
            x = (y - c) / m
            if xl < x < xr:
                breaks.append(x)
    breaks.sort()
    area = sx = sy = 0.0
    gauss = (0.5 - 0.5 / np.sqrt(3.0), 0.5 + 0.5 / np.sqrt(3.0))
    for a, b in zip(breaks[:-1], breaks[1:]):
        w = 0.5 * (b - a)
        for t in gauss:
            x = a + (b - a) * t
            g = min(max(m * x + c, ybot), ytop)
            area += w * (g - ybot)
            sx += w * x * (g - ybot)
            sy += w * 0.5 * (g * g - ybot * ybot)
    return area, sx, sy


class TiltedMesh2D(Mesh2D):
    """N x N grid cut by the straight line y = intercept + slope*(x - 1/2).

    Every background cell crossed by the line splits into a lower and an
    upper subcell whose fractions are the exact polygonal areas (clamped to
    ``[min_frac, 1 - min_frac]``).  Flat cell indices ``0 .. N^2-1`` hold
    whole cells, or the lower subcell of a crossed cell; upper subcells are
    appended after them.  The line is transparent to fluxes: the x-sweep
    face list includes the segments of each vertical grid face on either
    side of the line plus the flux through the line itself.
    """

    def __init__(self, n: int, slope: float, intercept: float,
                 min_frac: float = 0.05):
        if abs(slope) >= 1.0:
            raise ValueError(f"|slope| must be < 1, got {slope}")
        if not 0.0 < min_frac < 0.5:
            raise ValueError(f"min_frac must lie in (0, 1/2), got {min_frac}")
        c0 = intercept - 0.5 * slope  # line(x) = slope*x + c0
        y_ends = (c0, slope + c0)
        if min(y_ends) <= 0.0 or max(y_ends) >= 1.0:
            raise ValueError("embedded line must stay strictly inside the domain")
        h = 1.0 / n
        n_base = n * n

        lower_frac = np.ones(n_base)
        crossed = np.zeros(n_base, dtype=bool)
        upper_index = np.full(n_base, -1, dtype=np.intp)
        vol_list, xc_list, yc_list = [], [], []
        base_vol = np.full(n_base, h * h)
        base_xc = np.empty(n_base)
        base_yc = np.empty(n_base)
        upper_geo = []  # (base index, volume, xc, yc)
        cut_cells = []

        for j in range(n):
            ybot, ytop = j * h, (j + 1) * h
            for i in range(n):
                b = j * n + i
                xl, xr = i * h, (i + 1) * h
                base_xc[b] = xl + 0.5 * h
                base_yc[b] = ybot + 0.5 * h
                area, sx, sy = _clamped_line_moments(slope, c0, xl, xr, ybot, ytop)
                f = area / (h * h)
                lower_frac[b] = f
                if not _TOL < f < 1.0 - _TOL:
                    continue
                crossed[b] = True
                f_cl = min(max(f, min_frac), 1.0 - min_frac)
                lower_frac[b] = f_cl
                base_vol[b] = f_cl * h * h
                base_xc[b] = sx / area
                base_yc[b] = sy / area
                area_up = h * h - area
                sx_up = (xl + 0.5 * h) * h * h - sx
                sy_up = (ybot + 0.5 * h) * h * h - sy
                upper_index[b] = n_base + len(upper_geo)
                upper_geo.append(
                    (b, (1.0 - f_cl) * h * h, sx_up / area_up, sy_up / area_up)
                )

        volumes = np.concatenate([base_vol, [g[1] for g in upper_geo]])
        xc = np.concatenate([base_xc, [g[2] for g in upper_geo]])
        yc = np.concatenate([base_yc, [g[3] for g in upper_geo]])

        # merging: the sub-half subcell of each crossed cell pairs with the
        # vertical neighbor on its own side of the line
        for b_idx, (b, _, _, _) in enumerate(upper_geo):
            i, j = b % n, b // n
            f = lower_frac[b]
            if f < 0.5:
                small, direction, jn = b, "down", j - 1
                side = "lower"
            elif 1.0 - f < 0.5:
                small, direction, jn = n_base + b_idx, "up", j + 1
                side = "upper"
            else:
                continue
            if not 0 <= jn < n:
                raise ValueError(f"small cell at ({i},{j}) has no merge partner")
            nb = jn * n + i
            if crossed[nb]:
                partner = nb if side == "lower" else upper_index[nb]
            else:
                partner = nb
            if volumes[partner] < 0.5 * h * h - _TOL:
                raise ValueError(
                    f"merge partner of small cell at ({i},{j}) is itself small"
                )
            frac = f if side == "lower" else 1.0 - f
            cut_cells.append(CutCell(i, j, frac, direction, small, partner))

        super().__init__(n, n, h, volumes, xc, yc, cut_cells, "tilted_line")
        self.slope = slope
        self.intercept = intercept
        self.min_frac = min_frac
        self.n_base = n_base
        self.crossed = crossed
        self.lower_frac = lower_frac
        self.upper_index = upper_index
        self.n_crossed = int(crossed.sum())
        self._build_faces(slope, c0)
        crossed.flags.writeable = False
        lower_frac.flags.writeable = False
        upper_index.flags.writeable = False

    def _subcell_at(self, i, j, y, y_split):
        b = j * self.nx + i
        if not self.crossed[b]:
            return b
        return b if y < y_split else self.upper_index[b]

    def _build_faces(self, slope, c0):
        """Upwind face list (source cell, destination cell, face length) for
        a rightward x-sweep, periodic in x."""
        n, h = self.nx, self.h
        src, dst, length = [], [], []
        for b in range(n):  # vertical boundary at x = b*h (b=0 is the wrap)
            il = (b - 1) % n
            xl_eval = 1.0 if b == 0 else b * h
            xr_eval = b * h
            y_left = slope * xl_eval + c0
            y_right = slope * xr_eval + c0
            for j in range(n):
                ybot, ytop = j * h, (j + 1) * h
                cl = min(max(y_left, ybot), ytop)
                cr = min(max(y_right, ybot), ytop)
                pts = sorted({ybot, ytop, cl, cr})
                for s, e in zip(pts[:-1], pts[1:]):
                    if e - s < 1e-14:
                        continue
                    mid = 0.5 * (s + e)
                    src.append(self._subcell_at(il, j, mid, cl))
                    dst.append(self._subcell_at(b, j, mid, cr))
                    length.append(e - s)
        # transparent flux through the embedded line inside each crossed cell
        for b in np.flatnonzero(self.crossed):
            i, j = b % n, b // n
            ybot, ytop = j * h, (j + 1) * h
            yl = min(max(slope * i * h + c0, ybot), ytop)
            yr = min(max(slope * (i + 1) * h + c0, ybot), ytop)
            dy = yr - yl
            if abs(dy) < 1e-14:
                continue
            lo, up = b, self.upper_index[b]
            if dy > 0:  # line rises: material crosses from upper into lower
                src.append(up)
                dst.append(lo)
            else:
                src.append(lo)
                dst.append(up)
            length.append(abs(dy))
        self.face_src = np.asarray(src, dtype=np.intp)
        self.face_dst = np.asarray(dst, dtype=np.intp)
        self.face_length = np.asarray(length, dtype=float)


def build_mesh_2d_tilted(n: int, slope: float, intercept: float,
                         min_frac: float = 0.05) -> TiltedMesh2D:
    """2D mesh cut by a tilted embedded line, transparent to fluxes."""
    return TiltedMesh2D(n, slope, intercept, min_frac)


# ---------------------------------------------------------------------------
# neighborhood construction


def build_neighborhoods(mesh) -> NeighborhoodSet:
    """One two-member neighborhood per small cell, with unit weights.

    Every neighborhood holds the small cell and its merge partner; the
    weighted volume is the plain volume sum.  Cells outside all
    neighborhoods are untouched by redistribution.
    """
    items = []
    if mesh.dim == 1:
        if mesh.cut_index is not None:
            k = mesh.cut_index
            members = (k - 1, k)
            vhat = float(mesh.widths[k - 1] + mesh.widths[k])
            items.append(Neighborhood(0, members, {k - 1: 1.0, k: 1.0}, vhat))
    else:
        for nid, cut in enumerate(mesh.cut_cells):
            members = (cut.partner, cut.index)
            vhat = float(mesh.volumes[cut.partner] + mesh.volumes[cut.index])
            items.append(
                Neighborhood(nid, members, {cut.partner: 1.0, cut.index: 1.0}, vhat)
            )
    return NeighborhoodSet(items, mesh.volumes)


def mesh_summary(mesh) -> dict:
    """JSON-serializable geometry summary (for reports and plotting)."""
    if mesh.dim == 1:
        return {
            "type": "mesh1d",
            "n_cells": mesh.n_cells,
            "h": mesh.h,
            "cut_index": mesh.cut_index,
            "alpha": mesh.alpha,
            "widths": mesh.widths.tolist(),
        }
    out = {
        "type": mesh.boundary,
        "nx": mesh.nx,
        "ny": mesh.ny,
        "h": mesh.h,
        "n_cells": mesh.n_cells,
        "cut_cells": [
            {
                "i": c.i,
                "j": c.j,
                "fraction": c.fraction,
                "merge_direction": c.merge_direction,
                "index": int(c.index),
                "partner": int(c.partner),
            }
            for c in mesh.cut_cells
        ],
    }
    return out
