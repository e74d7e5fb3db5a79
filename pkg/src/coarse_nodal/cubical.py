"""Lower-star cubical filtrations on boxes and flat tori, and the coarse counts
and inequality checks built on their barcodes."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field as dc_field
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from . import _kernels
from .barcode import (INF, CountWindow, GradedBarcode, bottleneck_distance, n_delta,
                      n_delta_window, n_delta_zero)

_EPS = np.finfo(np.float64).eps


def _tuple(x, n, cast):
    if isinstance(x, (str, bytes)) or not hasattr(x, "__len__"):
        return (cast(x),) * n
    x = tuple(cast(v) for v in x)
    if len(x) != n:
        raise ValueError(f"expected {n} entries, got {len(x)}")
    return x


@dataclass(frozen=True, eq=False)
class GridField:
    """Samples of a scalar field on a uniform grid.

    ``samples`` has shape ``dims`` (row-major, axis 0 slowest). Each axis is
    either ``"box"`` (closed interval, endpoints sampled) or ``"torus"``
    (periodic, index arithmetic is modular).

    Two optional provenance fields matter for coarse counts of |s|:
    ``sign`` holds the sign of a scalar section s so that sign changes between
    neighbouring samples can be cut exactly, and ``zero_cut`` is a grid bound
    on |s| at the sample nearest to any true zero (zero sets are rarely hit by
    samples).
    """
    samples: np.ndarray
    spacing: tuple = None
    topology: tuple = None
    descriptor: object = None
    origin: tuple = None
    sign: np.ndarray | None = None
    zero_cut: float = 0.0

    def __post_init__(self):
        s = np.array(self.samples, dtype=np.float64)
        if s.ndim == 0:
            s = s.reshape(1)
        s.setflags(write=False)
        n = s.ndim
        object.__setattr__(self, "samples", s)
        object.__setattr__(self, "spacing", _tuple(1.0 if self.spacing is None else self.spacing, n, float))
        topo = _tuple("box" if self.topology is None else self.topology, n, str)
        if any(t not in ("box", "torus") for t in topo):
            raise ValueError(f"topology must be 'box' or 'torus', got {topo}")
        object.__setattr__(self, "topology", topo)
        object.__setattr__(self, "origin", _tuple(0.0 if self.origin is None else self.origin, n, float))
        if self.sign is not None:
            sg = np.sign(np.asarray(self.sign)).astype(np.int8).reshape(s.shape)
            sg.setflags(write=False)
            object.__setattr__(self, "sign", sg)
        if s.size == 0:
            raise ValueError("empty grid")

    @property
    def dims(self) -> tuple:
        return self.samples.shape

    @property
    def n(self) -> int:
        return self.samples.ndim

    @property
    def torus(self) -> tuple:
        return tuple(t == "torus" for t in self.topology)

    def replace(self, **kw) -> "GridField":
        d = dict(samples=self.samples, spacing=self.spacing, topology=self.topology,
                 descriptor=self.descriptor, origin=self.origin, sign=self.sign, zero_cut=self.zero_cut)
        d.update(kw)
        return GridField(**d)

    def abs(self) -> "GridField":
        """|s|, keeping the sign of s when s is scalar."""
        sign = self.sign if self.sign is not None else np.sign(self.samples)
        return self.replace(samples=np.abs(self.samples), sign=sign)

    def scaled(self, t: float) -> "GridField":
        return self.replace(samples=self.samples * t, zero_cut=self.zero_cut * abs(t))

    def coords(self, axis: int) -> np.ndarray:
        return self.origin[axis] + self.spacing[axis] * np.arange(self.dims[axis])

    def subgrid(self, axis: int, start: int, stop: int) -> "GridField":
        """Closed sub-box of indices [start, stop] along a box axis."""
        if self.topology[axis] != "box":
            raise ValueError("sub-grids are taken along box axes only")
        sl = [slice(None)] * self.n
        sl[axis] = slice(start, stop + 1)
        sl = tuple(sl)
        origin = list(self.origin)
        origin[axis] += start * self.spacing[axis]
        return self.replace(samples=self.samples[sl], origin=tuple(origin),
                            sign=None if self.sign is None else self.sign[sl])


def section_zero_cut(values: np.ndarray, torus: Sequence[bool]) -> float:
    """Grid bound on |s| at the vertex nearest to a zero of s.

    ``values`` has the grid shape plus an optional trailing component axis.
    Uses sqrt(n) times the largest Euclidean jump of s along a grid edge.
    """
    v = np.asarray(values, dtype=np.float64)
    n = len(torus)
    if v.ndim == n:
        v = v[..., None]
    jump = 0.0
    for ax in range(n):
        if v.shape[ax] < 2:
            continue
        if torus[ax]:
            d = np.roll(v, -1, axis=ax) - v
        else:
            d = np.diff(v, axis=ax)
        jump = max(jump, float(np.sqrt((d * d).sum(axis=-1)).max()))
    return math.sqrt(n) * jump


# ---------------------------------------------------------------------------
# filtration

def _popcount(m):
    return bin(m).count("1")


class CubicalFiltration:
    """All cubical cells of a grid (up to ``max_dim``), each with the max of its
    vertex values.

    A cell is a pair (mask, corner): ``mask`` lists the axes it spans, the
    corner is its lowest vertex. Cell ids run over masks ordered by
    (dimension, mask) and then corners in row-major order; that id is the
    lexicographic tie-break after (value, dimension).
    """

    def __init__(self, field: GridField, max_dim: int | None = None, mixed_sign_value: float | None = None,
                 dual_top: bool = True):
        self.dual_top = dual_top
        f = field.samples
        if np.isnan(f).any():
            raise ValueError("NaN samples")
        n = field.n
        self.field = field
        self.n = n
        self.dims = field.dims
        self.torus = field.torus
        self.max_dim = n if max_dim is None else min(int(max_dim), n)
        masks = sorted((m for m in range(1 << n) if _popcount(m) <= self.max_dim),
                       key=lambda m: (_popcount(m), m))
        self.masks = masks
        self.shape = {}
        self.offset = {}
        off = 0
        vals, dimv = [], []
        sg = field.sign if mixed_sign_value is not None else None
        for m in masks:
            v = f
            hi = lo = sg
            for ax in range(n):
                if not (m >> ax) & 1:
                    continue
                if self.torus[ax]:
                    v = np.maximum(v, np.roll(v, -1, axis=ax))
                    if sg is not None:
                        hi = np.maximum(hi, np.roll(hi, -1, axis=ax))
                        lo = np.minimum(lo, np.roll(lo, -1, axis=ax))
                else:
                    a = [slice(None)] * n
                    b = [slice(None)] * n
                    a[ax] = slice(0, -1)
                    b[ax] = slice(1, None)
                    v = np.maximum(v[tuple(a)], v[tuple(b)])
                    if sg is not None:
                        hi = np.maximum(hi[tuple(a)], hi[tuple(b)])
                        lo = np.minimum(lo[tuple(a)], lo[tuple(b)])
            if sg is not None and m:
                v = np.where((hi > 0) & (lo < 0), np.maximum(v, mixed_sign_value), v)
            self.shape[m] = v.shape
            self.offset[m] = off
            off += v.size
            vals.append(v.ravel())
            dimv.append(np.full(v.size, _popcount(m), np.int8))
        self.ncells = off
        self.values = np.concatenate(vals)
        self.cell_dim = np.concatenate(dimv)
        ids = np.arange(off)
        self.order = np.lexsort((ids, self.cell_dim, self.values))
        self.pos = np.empty(off, np.int64)
        self.pos[self.order] = ids
        self._barcodes = {}

    def count(self, dim: int) -> int:
        return int(sum(math.prod(self.shape[m]) for m in self.masks if _popcount(m) == dim))

    def faces(self, mask: int) -> np.ndarray:
        """Face ids of every cell of type ``mask``: array (ncells, 2*|mask|)."""
        shape = self.shape[mask]
        corner = np.indices(shape).reshape(len(shape), -1)
        cols = []
        for ax in range(self.n):
            if not (mask >> ax) & 1:
                continue
            fm = mask ^ (1 << ax)
            fshape = self.shape[fm]
            for step in (0, 1):
                c = corner.copy()
                if step:
                    c[ax] += 1
                    if self.torus[ax]:
                        c[ax] %= self.dims[ax]
                cols.append(self.offset[fm] + np.ravel_multi_index(tuple(c), fshape))
        return np.stack(cols, axis=1)

    def _cells_of_dim(self, dim):
        """(cell ids sorted by filtration position, face ids per cell)."""
        ids, fc = [], []
        for m in self.masks:
            if _popcount(m) != dim:
                continue
            k = math.prod(self.shape[m])
            ids.append(self.offset[m] + np.arange(k))
            if dim:
                fc.append(self.faces(m))
        if not ids:
            return np.empty(0, np.int64), np.empty((0, 2 * dim), np.int64)
        ids = np.concatenate(ids)
        fc = np.concatenate(fc) if dim else None
        srt = np.argsort(self.pos[ids], kind="stable")
        return ids[srt], (fc[srt] if dim else None)

    def barcode(self, max_degree: int | None = None) -> GradedBarcode:
        top = self.max_dim if max_degree is None else min(int(max_degree), self.max_dim)
        if top in self._barcodes:
            return self._barcodes[top]
        out = _persistence(self, top)
        self._barcodes[top] = out
        return out


def build_filtration(field: GridField, max_dim: int | None = None,
                     mixed_sign_value: float | None = None) -> CubicalFiltration:
    """Lower-star filtration of ``field``.

    With ``mixed_sign_value`` set and ``field.sign`` present, any cell whose
    vertices carry both signs gets at least that value; this places the zero
    of s on every sign-changing cell.
    """
    return CubicalFiltration(field, max_dim=max_dim, mixed_sign_value=mixed_sign_value)


def _persistence(filt: CubicalFiltration, top: int) -> GradedBarcode:
    val = filt.values
    pos = filt.pos
    n = filt.n
    need = min(top + 1, filt.max_dim)
    degs, births, deaths = [], [], []

    def emit(d, b, e):
        degs.append(np.full(len(b), d, np.int64))
        births.append(np.asarray(b, np.float64))
        deaths.append(np.asarray(e, np.float64))

    # higher degrees first so that pivots can clear the next block
    cleared = None
    positive = {}
    pivot_rows = {}
    for d in range(need, 1, -1):
        ids, fc = filt._cells_of_dim(d)
        if d == n and filt.dual_top and all(k > 1 for k in filt.dims):
            row_cells, col_cells = _dual_top_pairs(filt, ids, fc)
            paired = np.zeros(ids.size, bool)
            paired[np.searchsorted(pos[ids], pos[col_cells])] = True
        else:
            rows = np.sort(pos[fc], axis=1)
            skip = np.zeros(ids.size, np.bool_) if cleared is None else cleared[pos[ids]]
            low = _kernels.reduce_columns(rows, skip, filt.ncells)
            paired = low >= 0
            row_cells = filt.order[low[paired]]
            col_cells = ids[paired]
        positive[d] = ids[~paired]
        pivot_rows[d - 1] = row_cells
        emit(d - 1, val[row_cells], val[col_cells])
        cleared = np.zeros(filt.ncells, np.bool_)
        cleared[pos[row_cells]] = True

    vids, _ = _cells_of_dim0(filt)
    if need >= 1:
        eids, ef = filt._cells_of_dim(1)
        vloc = ef - filt.offset[0]
        dead_v, kill_e, cyc, roots = _kernels.union_find(vids.size, pos[filt.offset[0] + np.arange(vids.size)],
                                                         vloc[:, 0].copy(), vloc[:, 1].copy())
        emit(0, val[filt.offset[0] + dead_v], val[eids[kill_e]])
        positive[1] = eids[cyc]
        root_ids = np.unique(roots) + filt.offset[0]
    else:
        root_ids = vids
    emit(0, val[root_ids], np.full(root_ids.size, INF))

    # essential classes: positive cells never used as a pivot by the block above
    for d in range(1, top + 1):
        pos_cells = positive[d]
        if d in pivot_rows:
            pos_cells = np.setdiff1d(pos_cells, pivot_rows[d], assume_unique=True)
        emit(d, val[pos_cells], np.full(pos_cells.size, INF))

    return GradedBarcode(np.concatenate(degs), np.concatenate(births), np.concatenate(deaths),
                         max_degree=top)


def _dual_top_pairs(filt, ids, fc):
    """(face, top cell) persistence pairs of the top block via the dual graph."""
    nt, w = fc.shape
    flat = fc.ravel()
    owner = np.repeat(np.arange(nt), w)
    srt = np.argsort(flat, kind="stable")
    flat, owner = flat[srt], owner[srt]
    faces, start, cnt = np.unique(flat, return_index=True, return_counts=True)
    if cnt.max() > 2:
        raise RuntimeError("face with more than two cofaces")
    cof = np.full((faces.size, 2), -1, np.int64)
    cof[:, 0] = owner[start]
    two = cnt == 2
    cof[two, 1] = owner[start[two] + 1]
    # faces of a box lying on the boundary: join the outside node
    face_order = np.argsort(-filt.pos[faces], kind="stable")
    pf, pt = _kernels.dual_union_find(face_order, cof, filt.pos[ids])
    return faces[pf], ids[pt]


def _cells_of_dim0(filt):
    k = math.prod(filt.shape[0])
    return np.arange(k), None


def sublevel_barcode(filtration: CubicalFiltration | GridField, max_degree: int | None = None) -> GradedBarcode:
    """Z/2 barcode of the sublevel filtration (degree 0 by union-find, higher
    degrees by column reduction with clearing)."""
    if isinstance(filtration, GridField):
        filtration = build_filtration(filtration, max_dim=None if max_degree is None else max_degree + 1)
    return filtration.barcode(max_degree)


def persistent_rank(filtration: CubicalFiltration, s: float, t: float, r: int) -> int:
    """rank H_r({f <= s}) -> H_r({f <= t})."""
    if not s <= t:
        raise ValueError("need s <= t")
    b = filtration.barcode(max_degree=r)
    sel = (b.degree == r) & (b.birth <= s) & (b.death > t)
    return int(b.mult[sel].sum())


# ---------------------------------------------------------------------------
# coarse counts

@dataclass(frozen=True)
class CoarseCount:
    r: int
    delta: float
    value: int
    kind: str
    eta: float = 0.0


def _eta(field_abs: GridField, eta, use_zero_cut: bool) -> float:
    base = 4.0 * _EPS * float(field_abs.samples.max())
    if eta is not None:
        return max(base, float(eta))
    return max(base, field_abs.zero_cut if use_zero_cut else 0.0)


def _check_abs(field_abs: GridField, delta):
    if not delta > 0:
        raise ValueError("delta must be positive")
    if np.any(field_abs.samples < 0):
        raise ValueError("coarse counts take |s| (non-negative samples)")


def coarse_m(field_abs: GridField, delta: float, r: int = 0, eta: float | None = None) -> CoarseCount:
    """Rank of H_r({|s| >= delta}) -> H_r({|s| >= eta}).

    When the field carries the sign of a scalar s, cells crossing a sign
    change are cut exactly and eta defaults to the round-off floor; otherwise
    eta defaults to the field's grid zero-cut.
    """
    _check_abs(field_abs, delta)
    signed = field_abs.sign is not None
    e = _eta(field_abs, eta, use_zero_cut=not signed)
    if not delta > e:
        raise ValueError(f"delta={delta} must exceed the zero cut eta={e:.3g}")
    neg = field_abs.replace(samples=-field_abs.samples)
    filt = build_filtration(neg, max_dim=r + 1, mixed_sign_value=0.0 if signed else None)
    return CoarseCount(r, delta, persistent_rank(filt, -delta, -e, r), "m", e)


def coarse_z(field_abs: GridField, delta: float, r: int = 0, eta: float | None = None) -> CoarseCount:
    """Rank of H_r({|s| <= eta}) -> H_r({|s| <= delta - eta})."""
    _check_abs(field_abs, delta)
    e = _eta(field_abs, eta, use_zero_cut=True)
    if not delta > 2 * e:
        raise ValueError(f"delta={delta} must exceed twice the zero cut eta={e:.3g}")
    filt = build_filtration(field_abs, max_dim=r + 1)
    return CoarseCount(r, delta, persistent_rank(filt, e, delta - e, r), "z", e)


# ---------------------------------------------------------------------------
# inequality checks

@dataclass
class SubadditivityReport:
    delta: float
    lhs: int
    rhs: int
    holds: bool
    windows: list = dc_field(default_factory=list)  # (lower, upper, lhs, rhs, holds)

    @property
    def all_hold(self) -> bool:
        return self.holds and all(w[-1] for w in self.windows)


def subadditivity_check(u: GradedBarcode, v: GradedBarcode, w: GradedBarcode, delta: float,
                        windows: Sequence[CountWindow] = ()) -> SubadditivityReport:
    """N_{2d}(V) <= N_d(U) + N_d(W) for an exact U -> V -> W, plus the windowed
    form N_{2d}(V,Z) <= N_d(U, Z+[-d,d]) + N_d(W, Z+[-2d,0]) for each window."""
    lhs = n_delta(v, 2 * delta)
    rhs = n_delta(u, delta) + n_delta(w, delta)
    rows = []
    for z in windows:
        lw = n_delta_window(v, 2 * delta, z)
        rw = n_delta_window(u, delta, z.shifted(-delta, delta)) + n_delta_window(w, delta, z.shifted(-2 * delta, 0.0))
        rows.append((z.lower, z.upper, lw, rw, lw <= rw))
    return SubadditivityReport(delta, lhs, rhs, lhs <= rhs, rows)


@dataclass
class MVReport:
    delta: float
    lhs: int
    rhs: int
    holds: bool
    union: GradedBarcode
    halves: tuple
    slice: GradedBarcode
    connecting: GradedBarcode | None = None

    def subadditivity(self, windows: Sequence[CountWindow] = ()) -> SubadditivityReport:
        """Windowed form with U = H(A1) + H(A2) and W = H(slice) one degree up.

        The windowed inequality is only guaranteed for a short exact sequence;
        W may be replaced by its submodule im(d) only at the cost of moving
        bar births, so this form can fail (see ``refined``).
        """
        u = self.halves[0] + self.halves[1]
        return subadditivity_check(u, self.union, self.slice.degree_shifted(1), self.delta, windows)

    def refined(self, windows: Sequence[CountWindow] = (), slack: float = 0.0) -> SubadditivityReport:
        """Windowed form on the short exact sequence 0 -> im(U) -> V -> im(d) -> 0.

        im(U) is a quotient of U, so U may stand in for it; im(d) is computed
        exactly. ``slack`` widens the right-hand windows on both sides.
        """
        if self.connecting is None:
            raise ValueError("connecting-map image unavailable for this split")
        u = self.halves[0] + self.halves[1]
        lhs = n_delta(self.union, 2 * self.delta)
        rhs = n_delta(u, self.delta) + n_delta(self.connecting, self.delta)
        rows = []
        d = self.delta
        for z in windows:
            lw = n_delta_window(self.union, 2 * d, z)
            rw = (n_delta_window(u, d, z.shifted(-d - slack, d + slack))
                  + n_delta_window(self.connecting, d, z.shifted(-2 * d - slack, slack)))
            rows.append((z.lower, z.upper, lw, rw, lw <= rw))
        return SubadditivityReport(d, lhs, rhs, lhs <= rhs, rows)


def mv_two_set_check(field: GridField, split_axis: int, split_index: int, delta: float) -> MVReport:
    """Two closed half-grids sharing the slice ``split_index`` on a box axis."""
    if field.topology[split_axis] != "box":
        raise ValueError("split axis must have box topology")
    d = field.dims[split_axis]
    if not 1 <= split_index <= d - 2:
        raise ValueError("degenerate split: both halves must extend past the slice")
    a1 = field.subgrid(split_axis, 0, split_index)
    a2 = field.subgrid(split_axis, split_index, d - 1)
    sl = field.subgrid(split_axis, split_index, split_index)
    bu, b1, b2, bs = (sublevel_barcode(build_filtration(x)) for x in (field, a1, a2, sl))
    lhs = n_delta(bu, 2 * delta)
    rhs = n_delta(b1, delta) + n_delta(b2, delta) + n_delta(bs, delta)
    conn = connecting_image_barcode(field, split_axis, split_index) if field.n <= 2 else None
    return MVReport(delta, lhs, rhs, lhs <= rhs, bu, (b1, b2), bs, conn)


def _grid_edges(shape, lo, hi, axis):
    """Vertex index pairs of grid edges inside the index range [lo, hi] along ``axis``."""
    idx = np.arange(int(np.prod(shape))).reshape(shape)
    sl = [slice(None)] * len(shape)
    sl[axis] = slice(lo, hi + 1)
    sub = idx[tuple(sl)]
    out = []
    for ax in range(len(shape)):
        if sub.shape[ax] > 1:
            a = np.take(sub, np.arange(sub.shape[ax] - 1), axis=ax).reshape(-1)
            b = np.take(sub, np.arange(1, sub.shape[ax]), axis=ax).reshape(-1)
            out.append(np.stack([a, b], 1))
    verts = sub.reshape(-1)
    edges = np.concatenate(out) if out else np.zeros((0, 2), np.int64)
    return verts, edges


def _labels(nv, verts, edges, vals, t):
    """Component label per vertex of the sublevel graph at t (-1 if absent)."""
    on = np.zeros(nv, bool)
    on[verts] = vals[verts] <= t
    e = edges[on[edges[:, 0]] & on[edges[:, 1]]]
    g = coo_matrix((np.ones(len(e)), (e[:, 0], e[:, 1])), shape=(nv, nv))
    _, lab = connected_components(g, directed=False)
    return np.where(on, lab, -1)


def _gf2_rank(vectors) -> int:
    basis = {}
    r = 0
    for v in vectors:
        while v:
            top = v.bit_length() - 1
            if top in basis:
                v ^= basis[top]
            else:
                basis[top] = v
                r += 1
                break
    return r


def _gf2_nullspace(cols: list, ncols: int) -> list:
    """Basis (as bitmasks over columns) of {x : sum_j x_j cols[j] = 0}, cols as int bitmasks."""
    piv = {}
    null = []
    for j in range(ncols):
        v, comb = cols[j], 1 << j
        while v:
            top = v.bit_length() - 1
            if top in piv:
                pv, pc = piv[top]
                v ^= pv
                comb ^= pc
            else:
                piv[top] = (v, comb)
                break
        if not v:
            null.append(comb)
    return null


def connecting_image_barcode(field: GridField, split_axis: int, split_index: int) -> GradedBarcode:
    """Barcode of the image of the Mayer-Vietoris connecting map H_1(X) -> H_0(S)
    for a closed split of a 1D or 2D box grid, graded in degree 1.

    The image equals ker(H_0(S) -> H_0(A1) + H_0(A2)): sums of slice components
    that are null in both halves. Its rank function is evaluated at the
    critical values of the three degree-0 barcodes and converted to bars.
    """
    if field.n > 2:
        raise ValueError("connecting-map image is implemented for n <= 2")
    shape = field.dims
    d = shape[split_axis]
    vals = field.samples.reshape(-1)
    nv = vals.size
    v1, e1 = _grid_edges(shape, 0, split_index, split_axis)
    v2, e2 = _grid_edges(shape, split_index, d - 1, split_axis)
    vs, es = _grid_edges(shape, split_index, split_index, split_axis)
    if field.n == 1:
        return GradedBarcode.empty(max_degree=1)
    crit = set()
    for v, e in ((v1, e1), (v2, e2), (vs, es)):
        crit.update(vals[v].tolist())
        crit.update(np.maximum(vals[e[:, 0]], vals[e[:, 1]]).tolist())
    times = np.array(sorted(crit))
    m = len(times)
    labS = np.stack([_labels(nv, vs, es, vals, t)[vs] for t in times])
    lab1 = np.stack([_labels(nv, v1, e1, vals, t)[vs] for t in times])
    lab2 = np.stack([_labels(nv, v2, e2, vals, t)[vs] for t in times])
    # kernel basis at each time: bitmasks over slice vertices (one representative per S component)
    kern = []
    for i in range(m):
        present = labS[i] >= 0
        comps = {}
        for j in np.flatnonzero(present):
            comps.setdefault(int(labS[i, j]), j)
        reps = list(comps.values())
        nodes = {}
        cols = []
        for j in reps:
            a = ("a", int(lab1[i, j]))
            b = ("b", int(lab2[i, j]))
            ia = nodes.setdefault(a, len(nodes))
            ib = nodes.setdefault(b, len(nodes))
            cols.append((1 << ia) ^ (1 << ib))
        basis = []
        for comb in _gf2_nullspace(cols, len(cols)):
            mask = 0
            for c in range(len(cols)):
                if comb >> c & 1:
                    mask |= 1 << reps[c]
            basis.append(mask)
        kern.append(basis)

    def push(mask, t):
        out = 0
        j = 0
        while mask:
            if mask & 1:
                out ^= 1 << int(labS[t, j])
            mask >>= 1
            j += 1
        return out

    r = np.zeros((m, m), np.int64)
    for i in range(m):
        if not kern[i]:
            continue
        for t in range(i, m):
            r[i, t] = _gf2_rank([push(b, t) for b in kern[i]])
    births, deaths, mult = [], [], []
    for i in range(m):
        for j in range(i + 1, m):
            c = r[i, j - 1] - r[i, j] - (r[i - 1, j - 1] - r[i - 1, j] if i > 0 else 0)
            if c > 0:
                births.append(times[i]), deaths.append(times[j]), mult.append(c)
        c = r[i, m - 1] - (r[i - 1, m - 1] if i > 0 else 0)
        if c > 0:
            births.append(times[i]), deaths.append(INF), mult.append(c)
    k = len(births)
    return GradedBarcode(np.ones(k, np.int64), np.array(births, np.float64), np.array(deaths, np.float64),
                         np.array(mult, np.int64), 1)


@dataclass
class MinProductReport:
    delta: float
    K: float
    zero_tolerance: float
    prop_lhs: int
    prop_rhs: int
    improved_lhs: int
    improved_rhs: int
    interleave_lhs: int
    interleave_rhs: int
    log_bottleneck: float
    inclusion_violations: int

    @property
    def prop_holds(self) -> bool:
        return self.prop_lhs <= self.prop_rhs

    @property
    def improved_holds(self) -> bool:
        return self.improved_lhs <= self.improved_rhs

    @property
    def interleave_holds(self) -> bool:
        return (self.interleave_lhs <= self.interleave_rhs
                and self.log_bottleneck <= 0.5 * math.log(2.0) + 1e-12)

    @property
    def holds(self) -> bool:
        return self.prop_holds and self.improved_holds and self.interleave_holds and not self.inclusion_violations


def _union_filtration(f: GridField, g: GridField) -> CubicalFiltration:
    # sublevel complex {f <= c} U {g <= c}: each cell enters at min of the two lower-star values
    ff = build_filtration(f)
    fg = build_filtration(g)
    filt = build_filtration(f)
    filt.values = np.minimum(ff.values, fg.values)
    ids = np.arange(filt.ncells)
    filt.order = np.lexsort((ids, filt.cell_dim, filt.values))
    filt.pos[filt.order] = ids
    filt._barcodes = {}
    return filt


def min_product_check(f: GridField, g: GridField, c_sweep: Sequence[float] | None, delta: float,
                      zero_tolerance: float = 0.0) -> MinProductReport:
    """Checks for norms f = |f|, g = |g| on one grid.

    Zero sets are thickened to {f <= tol}: both fields are replaced by
    max(f - tol, 0), which keeps every module non-negatively supported with
    zero-born bars born exactly at 0.

    * N0_d(H) <= N0_{d/K}(V) with H from f*g and V from min(f, g);
    * N0_{2d}(V) <= N0_{d/sqrt2}(W') + N_d(U_f) + N_d(U_g) with V the
      union filtration and W' from sqrt(f^2 + g^2);
    * the sqrt2 multiplicative interleaving of max(f, g) and sqrt(f^2 + g^2).

    ``c_sweep`` levels are used to verify the sublevel inclusions
    {h <= c} in {v <= sqrt c} and {v <= c} in {h <= K c} cell by cell.
    """
    if f.dims != g.dims or f.topology != g.topology:
        raise ValueError("f and g must share a grid")
    if np.any(f.samples < 0) or np.any(g.samples < 0):
        raise ValueError("f and g must be non-negative")
    fs = np.maximum(f.samples - zero_tolerance, 0.0)
    gs = np.maximum(g.samples - zero_tolerance, 0.0)
    K = float(max(fs.max(), gs.max()))
    if K <= 0:
        raise ValueError("K = 0: both fields vanish")
    mk = lambda a: f.replace(samples=a, sign=None)
    F, G = mk(fs), mk(gs)
    hf = build_filtration(mk(fs * gs))
    vf = build_filtration(mk(np.minimum(fs, gs)))
    H = hf.barcode()
    V = vf.barcode()
    prop_lhs = n_delta_zero(H, delta)
    prop_rhs = n_delta_zero(V, delta / K)

    Vu = _union_filtration(F, G).barcode()
    Uf = sublevel_barcode(build_filtration(F))
    Ug = sublevel_barcode(build_filtration(G))
    W = sublevel_barcode(build_filtration(mk(np.maximum(fs, gs))))
    Wp = sublevel_barcode(build_filtration(mk(np.sqrt(fs * fs + gs * gs))))
    improved_lhs = n_delta_zero(Vu, 2 * delta)
    improved_rhs = n_delta_zero(Wp, delta / math.sqrt(2)) + n_delta(Uf, delta) + n_delta(Ug, delta)
    il_lhs = n_delta_zero(W, delta)
    il_rhs = n_delta_zero(Wp, delta / math.sqrt(2))

    pos = np.concatenate([W.birth, Wp.birth, W.death[np.isfinite(W.death)], Wp.death[np.isfinite(Wp.death)]])
    pos = pos[pos > 0]
    floor = pos.min() / 4 if pos.size else 1.0

    def logb(b):
        lo = np.log(np.maximum(b.birth, floor))
        hi = np.where(np.isfinite(b.death), np.log(np.maximum(b.death, floor)), INF)
        return GradedBarcode(b.degree, lo, hi, b.mult, b.max_degree)

    lb = bottleneck_distance(logb(W), logb(Wp))

    viol = 0
    levels = [] if c_sweep is None else list(c_sweep)
    for c in levels:
        if c < 0:
            continue
        inh = hf.values <= c
        inv = vf.values <= math.sqrt(c)
        viol += int(np.count_nonzero(inh & ~inv))
        viol += int(np.count_nonzero((vf.values <= c) & ~(hf.values <= K * c)))
    return MinProductReport(delta, K, zero_tolerance, prop_lhs, prop_rhs, improved_lhs, improved_rhs,
                            il_lhs, il_rhs, lb, viol)


# ---------------------------------------------------------------------------
# I/O

def read_grid(path: str | Path) -> GridField:
    """Load a grid: raw little-endian float64 with a ``.json`` sidecar, or CSV (1D/2D)."""
    path = Path(path)
    if path.suffix.lower() == ".csv":
        a = np.loadtxt(path, delimiter=",", ndmin=1, dtype=np.float64)
        side = path.with_suffix(".json")
        meta = json.loads(side.read_text()) if side.exists() else {}
        if a.ndim == 2 and a.shape[0] == 1:
            a = a[0]
        return GridField(a, spacing=meta.get("spacing"), topology=meta.get("topology"))
    side = Path(str(path) + ".json") if not path.with_suffix(".json").exists() else path.with_suffix(".json")
    meta = json.loads(side.read_text())
    dims = tuple(int(d) for d in meta["dims"])
    raw = np.fromfile(path, dtype="<f8")
    if raw.size != math.prod(dims):
        raise ValueError(f"{path}: {raw.size} samples, sidecar dims {dims}")
    return GridField(raw.reshape(dims), spacing=meta.get("spacing"), topology=meta.get("topology"),
                     origin=meta.get("origin"))


def write_grid(field: GridField, path: str | Path) -> None:
    path = Path(path)
    meta = {"dims": list(field.dims), "spacing": list(field.spacing), "topology": list(field.topology),
            "origin": list(field.origin)}
    if path.suffix.lower() == ".csv":
        if field.n > 2:
            raise ValueError("CSV grids are 1D or 2D")
        np.savetxt(path, np.atleast_2d(field.samples) if field.n == 1 else field.samples,
                   delimiter=",", fmt="%.17g")
    else:
        field.samples.astype("<f8").tofile(path)
    path.with_suffix(".json").write_text(json.dumps(meta))
