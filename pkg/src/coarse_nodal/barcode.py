"""Barcodes and barcode-level operations.

Bars are stored as half-open intervals [birth, death) of closed-sublevel
persistence. Infinite deaths use the ``INF`` sentinel (``math.inf``); no
finite stand-in is ever used.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_bipartite_matching

INF = math.inf


@dataclass(frozen=True)
class Bar:
    degree: int
    birth: float
    death: float
    multiplicity: int = 1

    def __post_init__(self):
        if self.degree < 0:
            raise ValueError("degree must be non-negative")
        if self.multiplicity < 1:
            raise ValueError("multiplicity must be >= 1")
        if math.isnan(self.birth) or math.isnan(self.death) or not self.birth < self.death:
            raise ValueError(f"need birth < death, got [{self.birth}, {self.death})")
        if math.isinf(self.birth):
            raise ValueError("birth must be finite")

    @property
    def length(self) -> float:
        return self.death - self.birth

    @property
    def is_infinite(self) -> bool:
        return self.death == INF


@dataclass(frozen=True)
class CountWindow:
    lower: float = -INF
    upper: float = INF

    def __post_init__(self):
        if not self.lower <= self.upper:
            raise ValueError("window needs lower <= upper")

    def shifted(self, lo: float, hi: float) -> "CountWindow":
        """Minkowski sum with the interval [lo, hi]."""
        return CountWindow(self.lower + lo, self.upper + hi)


class GradedBarcode:
    """Immutable multiset of bars, held as parallel numpy arrays.

    Zero-length bars are dropped on construction and equal bars are merged
    into a single entry with summed multiplicity.
    """

    __slots__ = ("degree", "birth", "death", "mult", "max_degree")

    def __init__(self, degree, birth, death, mult=None, max_degree=None):
        degree = np.asarray(degree, dtype=np.int64).reshape(-1)
        birth = np.asarray(birth, dtype=np.float64).reshape(-1)
        death = np.asarray(death, dtype=np.float64).reshape(-1)
        if mult is None:
            mult = np.ones(degree.shape, dtype=np.int64)
        mult = np.asarray(mult, dtype=np.int64).reshape(-1)
        if not (degree.shape == birth.shape == death.shape == mult.shape):
            raise ValueError("bar arrays must have equal length")
        if np.any(np.isnan(birth)) or np.any(np.isnan(death)) or np.any(~np.isfinite(birth)):
            raise ValueError("births must be finite and no endpoint may be NaN")
        if np.any(degree < 0) or np.any(mult < 1):
            raise ValueError("degrees must be >= 0 and multiplicities >= 1")
        if np.any(death < birth):
            raise ValueError("death before birth")
        keep = death > birth
        degree, birth, death, mult = degree[keep], birth[keep], death[keep], mult[keep]
        # canonical order + merge duplicates
        if degree.size:
            order = np.lexsort((death, birth, degree))
            degree, birth, death, mult = degree[order], birth[order], death[order], mult[order]
            new = np.ones(degree.size, dtype=bool)
            new[1:] = (degree[1:] != degree[:-1]) | (birth[1:] != birth[:-1]) | (death[1:] != death[:-1])
            grp = np.cumsum(new) - 1
            mult = np.bincount(grp, weights=mult).astype(np.int64)
            degree, birth, death = degree[new], birth[new], death[new]
        top = int(degree.max()) if degree.size else 0
        if max_degree is None:
            max_degree = top
        if max_degree < top:
            raise ValueError("bar degree exceeds max_degree")
        for a in (degree, birth, death, mult):
            a.setflags(write=False)
        object.__setattr__(self, "degree", degree)
        object.__setattr__(self, "birth", birth)
        object.__setattr__(self, "death", death)
        object.__setattr__(self, "mult", mult)
        object.__setattr__(self, "max_degree", int(max_degree))

    def __setattr__(self, name, value):
        raise AttributeError("GradedBarcode is immutable")

    @classmethod
    def from_bars(cls, bars: Iterable[Bar | tuple], max_degree=None) -> "GradedBarcode":
        rows = []
        for b in bars:
            if not isinstance(b, Bar):
                b = Bar(*b)
            rows.append((b.degree, b.birth, b.death, b.multiplicity))
        if not rows:
            return cls([], [], [], [], max_degree=max_degree or 0)
        d, bi, de, m = zip(*rows)
        return cls(d, bi, de, m, max_degree=max_degree)

    @classmethod
    def empty(cls, max_degree=0) -> "GradedBarcode":
        return cls([], [], [], [], max_degree=max_degree)

    @property
    def bars(self) -> list[Bar]:
        return [Bar(int(d), float(b), float(e), int(m))
                for d, b, e, m in zip(self.degree, self.birth, self.death, self.mult)]

    def __iter__(self) -> Iterator[Bar]:
        return iter(self.bars)

    def __len__(self) -> int:
        """Number of bars counted with multiplicity."""
        return int(self.mult.sum())

    def __eq__(self, other) -> bool:
        if not isinstance(other, GradedBarcode):
            return NotImplemented
        return (np.array_equal(self.degree, other.degree) and np.array_equal(self.birth, other.birth)
                and np.array_equal(self.death, other.death) and np.array_equal(self.mult, other.mult))

    def __repr__(self) -> str:
        parts = [f"[{b:g},{'inf' if e == INF else format(e, 'g')})d{d}" + (f"x{m}" if m > 1 else "")
                 for d, b, e, m in zip(self.degree, self.birth, self.death, self.mult)]
        if len(parts) > 12:
            parts = parts[:12] + [f"... ({len(self.degree)} distinct)"]
        return "GradedBarcode(" + ", ".join(parts) + ")"

    def in_degree(self, r: int) -> "GradedBarcode":
        s = self.degree == r
        return GradedBarcode(self.degree[s], self.birth[s], self.death[s], self.mult[s],
                             max_degree=self.max_degree)

    def finite(self) -> "GradedBarcode":
        s = np.isfinite(self.death)
        return GradedBarcode(self.degree[s], self.birth[s], self.death[s], self.mult[s],
                             max_degree=self.max_degree)

    def infinite(self) -> "GradedBarcode":
        s = ~np.isfinite(self.death)
        return GradedBarcode(self.degree[s], self.birth[s], self.death[s], self.mult[s],
                             max_degree=self.max_degree)

    def betti(self) -> np.ndarray:
        """Infinite-bar counts per degree 0..max_degree."""
        out = np.zeros(self.max_degree + 1, dtype=np.int64)
        s = ~np.isfinite(self.death)
        np.add.at(out, self.degree[s], self.mult[s])
        return out

    def shifted(self, c: float) -> "GradedBarcode":
        return GradedBarcode(self.degree, self.birth + c, self.death + c, self.mult, self.max_degree)

    def scaled(self, t: float) -> "GradedBarcode":
        if not t > 0:
            raise ValueError("scale must be positive")
        return GradedBarcode(self.degree, self.birth * t, self.death * t, self.mult, self.max_degree)

    def degree_shifted(self, k: int) -> "GradedBarcode":
        """Reindex degrees by ``k`` (bars pushed below degree 0 are dropped)."""
        d = self.degree + k
        s = d >= 0
        return GradedBarcode(d[s], self.birth[s], self.death[s], self.mult[s],
                             max_degree=max(self.max_degree + k, 0))

    def __add__(self, other: "GradedBarcode") -> "GradedBarcode":
        """Direct sum."""
        return GradedBarcode(np.concatenate([self.degree, other.degree]),
                             np.concatenate([self.birth, other.birth]),
                             np.concatenate([self.death, other.death]),
                             np.concatenate([self.mult, other.mult]),
                             max_degree=max(self.max_degree, other.max_degree))


def direct_sum(barcodes: Sequence[GradedBarcode]) -> GradedBarcode:
    out = GradedBarcode.empty()
    for b in barcodes:
        out = out + b
    return out


# ---------------------------------------------------------------------------
# counting functions

def _select(b: GradedBarcode, degree):
    if degree is None:
        return np.ones(b.degree.shape, dtype=bool)
    return b.degree == degree


def n_delta(b: GradedBarcode, delta: float, degree: int | None = None) -> int:
    """Number of bars of length strictly greater than ``delta`` (with multiplicity)."""
    if not delta > 0:
        raise ValueError("delta must be positive")
    s = _select(b, degree) & ((b.death - b.birth) > delta)
    return int(b.mult[s].sum())


def n_delta_window(b: GradedBarcode, delta: float, window: CountWindow,
                   degree: int | None = None) -> int:
    """Bars of length > delta whose birth lies in the closed window."""
    if not delta > 0:
        raise ValueError("delta must be positive")
    s = (_select(b, degree) & ((b.death - b.birth) > delta)
         & (b.birth >= window.lower) & (b.birth <= window.upper))
    return int(b.mult[s].sum())


def n_delta_zero(b: GradedBarcode, delta: float, zero_tolerance: float = 0.0,
                 degree: int | None = None) -> int:
    if zero_tolerance < 0:
        raise ValueError("zero_tolerance must be non-negative")
    return n_delta_window(b, delta, CountWindow(-zero_tolerance, zero_tolerance), degree)


# ---------------------------------------------------------------------------
# norms

def _check_global_max(b: GradedBarcode, global_max: float):
    inf = ~np.isfinite(b.death)
    if np.any(b.birth[inf] > global_max):
        raise ValueError("an infinite bar is born after global_max")
    return inf


def barcode_total_norm(b: GradedBarcode, global_max: float) -> float:
    inf = _check_global_max(b, global_max)
    fin = ~inf
    total = np.sum((b.death[fin] - b.birth[fin]) * b.mult[fin])
    total += np.sum((global_max - b.birth[inf]) * b.mult[inf])
    return float(total)


def barcode_p_norm(b: GradedBarcode, p: float, global_max: float) -> float:
    if not p >= 1:
        raise ValueError("p must be >= 1")
    inf = _check_global_max(b, global_max)
    lengths = np.where(inf, global_max - b.birth, b.death - b.birth)
    if math.isinf(p):
        return float(lengths.max()) if lengths.size else 0.0
    return float(np.sum(b.mult * lengths ** p) ** (1.0 / p))


# ---------------------------------------------------------------------------
# bottleneck distance

def _expand(b: GradedBarcode, r: int):
    s = b.degree == r
    births = np.repeat(b.birth[s], b.mult[s])
    deaths = np.repeat(b.death[s], b.mult[s])
    fin = np.isfinite(deaths)
    return births[fin], deaths[fin], np.sort(births[~fin])


def _covers(adj: csr_matrix) -> bool:
    """True when every row of ``adj`` can be matched."""
    if adj.shape[0] == 0:
        return True
    if adj.shape[1] == 0:
        return False
    m = maximum_bipartite_matching(adj, perm_type="column")
    return bool(np.all(m >= 0))


def _finite_bottleneck(b1, d1, b2, d2) -> float:
    n1, n2 = b1.size, b2.size
    h1 = (d1 - b1) / 2.0
    h2 = (d2 - b2) / 2.0
    if n1 == 0 and n2 == 0:
        return 0.0
    if n1 == 0:
        return float(h2.max())
    if n2 == 0:
        return float(h1.max())
    cost = np.maximum(np.abs(b1[:, None] - b2[None, :]), np.abs(d1[:, None] - d2[None, :]))
    cand = np.unique(np.concatenate([cost.ravel(), h1, h2, [0.0]]))

    def feasible(eps):
        # A matching covering every bar that cannot be erased exists iff one
        # covers the left such bars and one covers the right such bars
        # (Mendelsohn-Dulmage); the remaining bars go to the diagonal.
        ok = cost <= eps
        must1 = h1 > eps
        must2 = h2 > eps
        if not _covers(csr_matrix(ok[must1])):
            return False
        return _covers(csr_matrix(ok[:, must2].T))

    lo, hi = 0, cand.size - 1
    while lo < hi:
        mid = (lo + hi) // 2
        if feasible(cand[mid]):
            hi = mid
        else:
            lo = mid + 1
    return float(cand[lo])


def bottleneck_distance(b1: GradedBarcode, b2: GradedBarcode, degree: int | None = None) -> float:
    """Exact bottleneck distance, maximised over degrees (or for one degree).

    Infinite bars only match infinite bars of the same degree; unequal counts
    give ``inf``.
    """
    if degree is None:
        degrees = set(np.unique(b1.degree).tolist()) | set(np.unique(b2.degree).tolist())
    else:
        degrees = {degree}
    out = 0.0
    for r in sorted(degrees):
        x1, y1, e1 = _expand(b1, r)
        x2, y2, e2 = _expand(b2, r)
        if e1.size != e2.size:
            return INF
        if e1.size:
            out = max(out, float(np.max(np.abs(e1 - e2))))
        out = max(out, _finite_bottleneck(x1, y1, x2, y2))
    return out


# ---------------------------------------------------------------------------
# Kunneth and duality

def kunneth_product(b1: GradedBarcode, b2: GradedBarcode) -> GradedBarcode:
    """Barcode of the sum f(x) + g(y) on a product space, pairwise over bars.

    For bars (a,b] in degree k1 and (c,d] in degree k2 emit
    (a+c, min(a+d, b+c)] in degree k1+k2 and, when both are finite,
    (max(a+d, b+c), b+d] in degree k1+k2+1.
    """
    a, b, k1, m1 = b1.birth[:, None], b1.death[:, None], b1.degree[:, None], b1.mult[:, None]
    c, d, k2, m2 = b2.birth[None, :], b2.death[None, :], b2.degree[None, :], b2.mult[None, :]
    with np.errstate(invalid="ignore"):
        lo1 = a + c
        hi1 = np.minimum(a + d, b + c)
        lo2 = np.maximum(a + d, b + c)
        hi2 = b + d
    deg = k1 + k2
    mult = m1 * m2
    both_fin = np.isfinite(b) & np.isfinite(d)
    deg_all = np.concatenate([deg.ravel(), (deg + 1)[both_fin]])
    lo_all = np.concatenate([lo1.ravel(), lo2[both_fin]])
    hi_all = np.concatenate([hi1.ravel(), hi2[both_fin]])
    m_all = np.concatenate([mult.ravel(), mult[both_fin]])
    top = b1.max_degree + b2.max_degree + 1
    return GradedBarcode(deg_all, lo_all, hi_all, m_all, max_degree=top)


def dualize(b: GradedBarcode, n: int) -> GradedBarcode:
    """Duality on a closed n-manifold: (a,b] in degree r -> (-b,-a] in degree n-r-1,
    (c,inf) in degree r -> (-c,inf) in degree n-r."""
    if np.any(b.degree > n):
        raise ValueError(f"bar in degree > n={n}")
    fin = np.isfinite(b.death)
    deg = np.where(fin, n - b.degree - 1, n - b.degree)
    if np.any(deg < 0):
        raise ValueError(f"finite bar in top degree {n} has no dual")
    birth = np.where(fin, -b.death, -b.birth)
    death = np.where(fin, -b.birth, INF)
    return GradedBarcode(deg, birth, death, b.mult, max_degree=n)


# ---------------------------------------------------------------------------
# serialization

def barcode_to_records(b: GradedBarcode) -> list[dict]:
    # + 0.0 folds -0.0 into 0.0 so output text is canonical
    return [{"degree": int(d), "birth": float(x) + 0.0, "death": "inf" if e == INF else float(e) + 0.0,
             "multiplicity": int(m)}
            for d, x, e, m in zip(b.degree, b.birth, b.death, b.mult)]


def barcode_from_records(records: list[dict], max_degree=None) -> GradedBarcode:
    bars = []
    for r in records:
        death = r["death"]
        death = INF if death == "inf" else float(death)
        bars.append(Bar(int(r["degree"]), float(r["birth"]), death, int(r.get("multiplicity", 1))))
    return GradedBarcode.from_bars(bars, max_degree=max_degree)


def dumps_barcode(b: GradedBarcode) -> str:
    return json.dumps(barcode_to_records(b))


def loads_barcode(text: str) -> GradedBarcode:
    data = json.loads(text)
    if not isinstance(data, list):
        raise ValueError("barcode JSON must be an array")
    return barcode_from_records(data)
