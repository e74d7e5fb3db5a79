"""Multiscale dyadic partitions of [0,1]^n driven by a Sobolev good/bad test,
averaged Taylor polynomials with explicit Morrey constants, and the cube
counting check for barcodes.

Fields are TrigPoly / VectorTrigField (analytic derivatives) or GridField
samples covering [0,1]^n (finite differences).
"""
from __future__ import annotations

import csv
import io
import itertools
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field as dc_field
from functools import lru_cache
from typing import Sequence

import numpy as np
from scipy.special import gamma as _gamma

from .barcode import n_delta
from .cubical import GridField, sublevel_barcode
from .errors import ConfigError, DepthCapError, InputError, QuadratureError, ResolutionError
from .spectral import TrigPoly, VectorTrigField, _multi_indices, _threads, norm_field

DEPTH_CAP = 24


@dataclass(frozen=True, order=True)
class DyadicCube:
    level: int
    index: tuple

    def __post_init__(self):
        idx = tuple(int(m) for m in self.index)
        if self.level < 0 or any(m < 0 or m >= 2 ** self.level for m in idx):
            raise ValueError(f"index {idx} out of range for level {self.level}")
        object.__setattr__(self, "index", idx)

    @classmethod
    def root(cls, n: int) -> "DyadicCube":
        return cls(0, (0,) * n)

    @property
    def n(self) -> int:
        return len(self.index)

    @property
    def side(self) -> float:
        return 2.0 ** -self.level

    @property
    def volume(self) -> float:
        return self.side ** self.n

    @property
    def lower(self) -> np.ndarray:
        return np.asarray(self.index, np.float64) * self.side

    @property
    def upper(self) -> np.ndarray:
        return self.lower + self.side

    @property
    def center(self) -> np.ndarray:
        return self.lower + 0.5 * self.side

    def children(self) -> list:
        out = []
        for bits in itertools.product((0, 1), repeat=self.n):
            out.append(DyadicCube(self.level + 1, tuple(2 * m + b for m, b in zip(self.index, bits))))
        return out

    def parent(self) -> "DyadicCube":
        if self.level == 0:
            raise ValueError("root has no parent")
        return DyadicCube(self.level - 1, tuple(m // 2 for m in self.index))


@dataclass
class DyadicPartition:
    n: int
    cubes: list                                   # leaves, sorted
    fits: dict = dc_field(default_factory=dict)   # leaf -> PolyFit
    margins: dict = dc_field(default_factory=dict)  # cube -> delta/(2C') - criterion
    levels: list = dc_field(default_factory=list)   # LevelStats per subdivision step
    delta: float = math.nan
    params: "SobolevParams | None" = None
    total_seminorm: float = math.nan

    def __len__(self):
        return len(self.cubes)

    @property
    def size(self) -> int:
        return len(self.cubes)

    def is_tiling(self) -> bool:
        """Leaves cover [0,1]^n with disjoint interiors (volumes sum to 1 and no leaf contains another)."""
        vol = math.fsum(c.volume for c in self.cubes)
        if not math.isclose(vol, 1.0, rel_tol=0, abs_tol=1e-12):
            return False
        leaves = set(self.cubes)
        for c in self.cubes:
            a = c
            while a.level > 0:
                a = a.parent()
                if a in leaves:
                    return False
        return True

    @property
    def estimates_hold(self) -> bool:
        return all(s.holds for s in self.levels)

    def to_tree(self) -> dict:
        leaves = set(self.cubes)

        def node(c):
            d = {"level": c.level, "index": list(c.index)}
            if c in self.margins:
                d["good_margin"] = self.margins[c]
            if c in leaves:
                d["leaf"] = True
            else:
                d["children"] = [node(ch) for ch in c.children()]
            return d

        return node(DyadicCube.root(self.n))

    def to_json(self) -> str:
        return json.dumps(self.to_tree(), sort_keys=True)

    @staticmethod
    def from_tree(tree: dict) -> "DyadicPartition":
        leaves, margins = [], {}

        def walk(d):
            c = DyadicCube(d["level"], tuple(d["index"]))
            if "good_margin" in d:
                margins[c] = d["good_margin"]
            if d.get("leaf"):
                leaves.append(c)
            else:
                for ch in d["children"]:
                    walk(ch)

        walk(tree)
        return DyadicPartition(len(tree["index"]), sorted(leaves), margins=margins)


@dataclass(frozen=True)
class SobolevParams:
    k: int
    p: float
    n: int

    def __post_init__(self):
        if self.k < 1 or self.n < 1 or not self.p >= 1:
            raise ConfigError("need k >= 1, n >= 1, p >= 1")
        if not self.k * self.p > self.n:
            raise InputError(f"k*p = {self.k * self.p} must exceed n = {self.n} (hypothesis k > n/p)")

    @property
    def exponent(self) -> float:
        """k/n - 1/p, the power of Vol Q in the criterion."""
        return self.k / self.n - 1.0 / self.p


@dataclass(frozen=True)
class MorreyConstants:
    omega_n: float
    c_n: float
    t: float
    b_nkp: float
    c_prime: float


def ball_volume(n: int) -> float:
    return math.pi ** (n / 2) / _gamma(n / 2 + 1)


def morrey_constant(params: SobolevParams) -> MorreyConstants:
    """Closed-form averaged-Taylor constants B_{n,k,p} and C' = B / k!."""
    n, k, p = params.n, params.k, params.p
    t = 1.0 if math.isinf(p) else p / (p - 1.0) if p > 1 else math.inf
    if math.isinf(t):
        raise ConfigError("p = 1 gives an infinite conjugate exponent")
    w = ball_volume(n)
    cn = 2.0 ** n / w
    inv_p = 0.0 if math.isinf(p) else 1.0 / p
    base = n * w / (t * (k - n) + n)
    if base <= 0:
        raise InputError("t(k-n)+n must be positive")
    b = 2 * k * cn * n ** (k / 2 - 1 - n * inv_p / 2) * base ** (1.0 / t) * n ** k
    return MorreyConstants(float(w), float(cn), float(t), float(b), float(b / math.factorial(k)))


def cube_bar_bound(k: int, n: int, kind: str = "poly") -> float:
    """Bars of a degree-<=k polynomial (or the square root of one) on a cube."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if kind == "poly":
        return 0.5 * (k + 1) ** n + 0.5
    if kind == "sqrt_poly":
        return 0.5 * (2 * k + 1) ** n + 0.5
    raise ValueError("kind is 'poly' or 'sqrt_poly'")


def mdp_size_constant(params: SobolevParams, consts: MorreyConstants | None = None) -> float:
    """Explicit C with |K| <= 1 + C (||D^k s||_p / delta)^{n/k}, from summing the
    two per-level estimates over the levels."""
    consts = consts or morrey_constant(params)
    n, k, p = params.n, params.k, params.p
    geo = 1.0 / (1.0 - 2.0 ** (n - k * p))
    return (2 ** n - 1) * 2 ** n * (2 * consts.c_prime) ** (n / k) * (2 ** n / (2 ** n - 1) + geo)


# ---------------------------------------------------------------------------
# seminorms

def _components(field):
    if isinstance(field, TrigPoly):
        return (field,)
    if isinstance(field, VectorTrigField):
        return field.components
    if isinstance(field, GridField) and isinstance(field.descriptor, (TrigPoly, VectorTrigField)):
        return _components(field.descriptor)
    return None


def _gl(order: int):
    return np.polynomial.legendre.leggauss(order)


def _panel_rule(a: float, b: float, omega: float, nodes: int = 12, refine: int = 1):
    """Composite Gauss-Legendre on [a, b] with panels shorter than pi / (refine * omega)."""
    panels = max(1, int(math.ceil(refine * (b - a) * max(omega, 1.0) / math.pi)))
    x0, w0 = _gl(nodes)
    edges = np.linspace(a, b, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    x = (mid[:, None] + half[:, None] * x0[None, :]).reshape(-1)
    w = (half[:, None] * w0[None, :]).reshape(-1)
    return x, w


def _tensor_weights(ws):
    out = ws[0]
    for w in ws[1:]:
        out = np.multiply.outer(out, w)
    return out


def _pointwise_Dk(comps, axes, k):
    """Sum over |alpha| = k of |D^alpha s|^p needs |D^alpha s| per alpha: list of arrays."""
    out = []
    for a in _multi_indices(comps[0].n, k):
        sq = 0.0
        for c in comps:
            v = c.derivative(a).eval_tensor(axes)
            sq = sq + v * v
        out.append(np.sqrt(sq))
    return out


def _seminorm_p_analytic(comps, cube: DyadicCube, params: SobolevParams) -> float:
    """sum_{|alpha|=k} int_cube |D^alpha s|^p (the p-th power)."""
    axes, ws = [], []
    # |D^a s|^p is smooth for even p; otherwise it has kinks at zeros of D^a s,
    # which Gauss-Legendre only resolves by refining the panels
    p = params.p
    refine = 1 if math.isinf(p) or (p == int(p) and int(p) % 2 == 0) else 16
    for i in range(cube.n):
        om = max(float(np.abs(c.freqs[:, i]).max()) if c.n_modes else 0.0 for c in comps)
        x, w = _panel_rule(cube.lower[i], cube.upper[i], om, refine=refine)
        axes.append(x)
        ws.append(w)
    W = _tensor_weights(ws)
    tot = 0.0
    for d in _pointwise_Dk(comps, axes, params.k):
        if math.isinf(params.p):
            tot = max(tot, float(d.max()))
        else:
            tot += float(np.sum(W * d ** params.p))
    return tot


def _fd1(v: np.ndarray, axis: int, h: float, order: int = 4) -> np.ndarray:
    g = np.gradient(v, h, axis=axis, edge_order=2)
    if order == 2 or v.shape[axis] < 5:
        return g
    vm = np.moveaxis(v, axis, 0)
    out = np.moveaxis(g, axis, 0).copy()
    out[2:-2] = (-vm[4:] + 8 * vm[3:-1] - 8 * vm[1:-3] + vm[:-4]) / (12 * h)
    return np.moveaxis(out, 0, axis)


def _fd_derivative(v, alpha, spacing, order):
    for ax, m in enumerate(alpha):
        for _ in range(m):
            v = _fd1(v, ax, spacing[ax], order)
    return v


def _trap_weights(m: int, h: float) -> np.ndarray:
    w = np.full(m, h)
    if m > 1:
        w[0] = w[-1] = h / 2
    else:
        w[0] = 0.0
    return w


def _seminorm_p_grid(g: GridField, cube: DyadicCube, params: SobolevParams, order: int = 4) -> float:
    sl, ws = [], []
    for i in range(g.n):
        x = g.coords(i)
        lo = int(np.searchsorted(x, cube.lower[i] - 1e-12))
        hi = int(np.searchsorted(x, cube.upper[i] + 1e-12, side="right"))
        if hi - lo < params.k + 2:
            raise ResolutionError(f"only {hi - lo} samples along axis {i} inside cube {cube}")
        sl.append(slice(lo, hi))
        ws.append(_trap_weights(hi - lo, g.spacing[i]))
    W = _tensor_weights(ws)
    tot = 0.0
    for a in _multi_indices(g.n, params.k):
        d = np.abs(_fd_derivative(g.samples, a, g.spacing, order)[tuple(sl)])
        tot = max(tot, float(d.max())) if math.isinf(params.p) else tot + float(np.sum(W * d ** params.p))
    return tot


def _root(val: float, p: float) -> float:
    return val if math.isinf(p) else val ** (1.0 / p)


def sobolev_seminorm(field, cube: DyadicCube, params: SobolevParams, return_uncertainty: bool = False):
    """||D^k s||_{L^p(cube)} = (sum_{|alpha|=k} int_cube |D^alpha s|^p)^{1/p}.

    Vector-valued s uses the Euclidean norm of D^alpha s. Analytic
    derivatives are used when a trigonometric descriptor is present; raw grids
    use 4th-order differences, and the uncertainty is the gap to the 2nd-order
    estimate.
    """
    comps = _components(field)
    if comps is not None:
        val = _root(_seminorm_p_analytic(comps, cube, params), params.p)
        return (val, 0.0) if return_uncertainty else val
    if not isinstance(field, GridField):
        raise InputError("field must be a TrigPoly, VectorTrigField or GridField")
    v4 = _root(_seminorm_p_grid(field, cube, params, 4), params.p)
    if not return_uncertainty:
        return v4
    v2 = _root(_seminorm_p_grid(field, cube, params, 2), params.p)
    return v4, abs(v4 - v2)


def criterion_value(field, cube: DyadicCube, params: SobolevParams, seminorm: float | None = None) -> float:
    if seminorm is None:
        seminorm = sobolev_seminorm(field, cube, params)
    return cube.volume ** params.exponent * seminorm


def is_good(field, cube: DyadicCube, delta: float, params: SobolevParams,
            consts: MorreyConstants | None = None) -> bool:
    consts = consts or morrey_constant(params)
    return criterion_value(field, cube, params) < delta / (2 * consts.c_prime)


# ---------------------------------------------------------------------------
# subdivision

@dataclass
class LevelStats:
    level: int
    n_cubes: int
    n_bad: int
    estimate1: float          # 2^{nl}
    estimate2: float          # (2C')^p 2^{-l(kp-n)} (||D^k s|| / delta)^p
    bad_set_bound: float        # (2C')^{n/k} Vol(B)^{1-n/kp} (||D^k s|_B|| / delta)^{n/k}

    @property
    def holds(self) -> bool:
        tol = 1e-9
        return (self.n_bad <= self.estimate1 and self.n_bad <= self.estimate2 * (1 + tol)
                and self.n_bad <= self.bad_set_bound * (1 + tol))


def build_mdp(field, delta: float, params: SobolevParams, depth_cap: int = DEPTH_CAP,
              fit_leaves: bool = False, fit_fraction: float = 0.5) -> DyadicPartition:
    """Subdivide bad dyadic cubes of [0,1]^n until every leaf is good."""
    if not delta > 0:
        raise InputError("delta must be positive")
    n = _field_dim(field)
    if n != params.n:
        raise InputError(f"field dimension {n} differs from params.n = {params.n}")
    consts = morrey_constant(params)
    thresh = delta / (2 * consts.c_prime)
    k, p = params.k, params.p
    root = DyadicCube.root(n)
    total = sobolev_seminorm(field, root, params)
    leaves, margins, stats = [], {}, []
    frontier = [root]
    workers = _threads()
    level = 0
    while frontier:
        if level > depth_cap:
            raise DepthCapError(f"bad cubes remain beyond level {depth_cap}")
        if workers > 1 and len(frontier) > 1:
            with ThreadPoolExecutor(workers) as ex:
                norms = list(ex.map(lambda c: sobolev_seminorm(field, c, params), frontier))
        else:
            norms = [sobolev_seminorm(field, c, params) for c in frontier]
        bad, bad_pp = [], 0.0
        for c, s in zip(frontier, norms):
            crit = c.volume ** params.exponent * s
            margins[c] = thresh - crit
            if crit < thresh:
                leaves.append(c)
            else:
                bad.append(c)
                bad_pp = max(bad_pp, s) if math.isinf(p) else bad_pp + s ** p
        vol_b = len(bad) * 2.0 ** (-n * level)
        norm_b = _root(bad_pp, p)
        pe = 1.0 if math.isinf(p) else p
        est2 = (2 * consts.c_prime) ** pe * 2.0 ** (-level * (k * pe - n)) * (total / delta) ** pe
        inv_p = 0.0 if math.isinf(p) else 1.0 / p
        bad_set = (2 * consts.c_prime) ** (n / k) * vol_b ** (1 - n * inv_p / k) * (norm_b / delta) ** (n / k) \
            if bad else 0.0
        stats.append(LevelStats(level, len(frontier), len(bad), 2.0 ** (n * level), est2, bad_set))
        frontier = sorted(ch for c in bad for ch in c.children())
        level += 1
    part = DyadicPartition(n, sorted(leaves), margins=margins, levels=stats, delta=delta, params=params,
                           total_seminorm=total)
    if fit_leaves:
        for c in part.cubes:
            part.fits[c] = averaged_taylor(field, c, params, fit_fraction)
    return part


def _field_dim(field) -> int:
    comps = _components(field)
    if comps is not None:
        return comps[0].n
    if isinstance(field, GridField):
        return field.n
    raise InputError("unsupported field type")


# ---------------------------------------------------------------------------
# averaged Taylor polynomial

@dataclass
class PolyFit:
    cube: DyadicCube
    k: int
    center: np.ndarray
    coeffs: dict           # multi-index beta -> array of per-component coefficients about center
    sup_error: float
    bound: float           # c_prime * side^{k-n/p} * seminorm
    seminorm: float
    quad_order: int
    radius: float

    @property
    def degree(self) -> int:
        return self.k - 1

    @property
    def ratio(self) -> float:
        return self.sup_error / self.bound if self.bound > 0 else (0.0 if self.sup_error == 0 else math.inf)

    @property
    def holds(self) -> bool:
        return self.sup_error <= self.bound + 1e-10

    def __call__(self, x) -> np.ndarray:
        """Values (..., ncomp) at points of shape (..., n)."""
        x = np.asarray(x, np.float64)
        v = x - self.center
        out = 0.0
        for beta, c in self.coeffs.items():
            out = out + np.prod(v ** np.asarray(beta), axis=-1)[..., None] * c
        return out


@lru_cache(maxsize=None)
def _mollifier_sigma(n: int) -> float:
    """Largest sigma = 2^-m with exp(-sigma/(1-|x|^2)) peak/mean <= 2 on the unit ball."""
    r = np.linspace(0, 1, 200001)[:-1]
    sigma = 1.0
    for _ in range(40):
        prof = np.exp(-sigma / (1 - r * r))
        mean = n * np.trapezoid(prof * r ** (n - 1), r)   # int over ball / vol(ball)
        if prof[0] / mean <= 2.0:
            return sigma
        sigma /= 2
    raise QuadratureError("no mollifier shape met the sup budget")


def mollifier(points: np.ndarray, center: np.ndarray, radius: float, n: int) -> np.ndarray:
    """Unnormalized bump exp(-sigma/(1-rho^2)) on the ball, rho = |x-c|/radius."""
    rho2 = np.sum(((points - center) / radius) ** 2, axis=-1)
    out = np.zeros_like(rho2)
    m = rho2 < 1
    out[m] = np.exp(-_mollifier_sigma(n) / (1 - rho2[m]))
    return out


def _ball_rule(n: int, order: int):
    """Nodes (m, n) in the unit ball and weights; polar/spherical for n <= 3
    so the rule follows the sphere where the mollifier flattens out."""
    x, w = _gl(order)
    if n == 1:
        return x[:, None], w
    rho, wr = 0.5 * (x + 1), 0.5 * w
    if n == 2:
        m = 2 * order
        th = 2 * math.pi * np.arange(m) / m
        pts = rho[:, None, None] * np.stack([np.cos(th), np.sin(th)], -1)[None]
        wt = (wr * rho)[:, None] * np.full(m, 2 * math.pi / m)[None]
        return pts.reshape(-1, 2), wt.reshape(-1)
    if n == 3:
        m = 2 * order
        ph = 2 * math.pi * np.arange(m) / m
        ct, wc = x, w
        st = np.sqrt(1 - ct * ct)
        dirs = np.stack([st[:, None] * np.cos(ph)[None], st[:, None] * np.sin(ph)[None],
                         np.broadcast_to(ct[:, None], (order, m))], -1)
        pts = rho[:, None, None, None] * dirs[None]
        wt = (wr * rho * rho)[:, None, None] * wc[None, :, None] * np.full(m, 2 * math.pi / m)[None, None]
        return pts.reshape(-1, 3), wt.reshape(-1)
    mesh = np.stack(np.meshgrid(*([x] * n), indexing="ij"), -1).reshape(-1, n)
    return mesh, _tensor_weights([w] * n).reshape(-1)


def _taylor_coeffs(comps, center, radius, k, order):
    n = len(center)
    unit, wq = _ball_rule(n, order)
    pts = center + radius * unit
    phi = mollifier(pts, center, radius, n) * wq
    phi = phi / phi.sum()
    off = pts - center
    betas = [b for d in range(k) for b in _multi_indices(n, d)]
    coeffs = {}
    # a_beta = sum_gamma 1/(beta! gamma!) int phi d^{beta+gamma} f (-v)^gamma, |beta+gamma| < k
    dcache = {}
    for beta in betas:
        acc = np.zeros(len(comps))
        for gdeg in range(k - sum(beta)):
            for gam in _multi_indices(n, gdeg):
                ab = tuple(b + g for b, g in zip(beta, gam))
                if ab not in dcache:
                    dcache[ab] = np.stack([c.derivative(ab)(pts) for c in comps], axis=-1)
                wgt = phi * np.prod((-off) ** np.asarray(gam), axis=-1)
                fac = np.prod([math.factorial(b) for b in beta]) * np.prod([math.factorial(g) for g in gam])
                acc = acc + (wgt @ dcache[ab]) / fac
        coeffs[beta] = acc
    return coeffs


def averaged_taylor(field, cube: DyadicCube, params: SobolevParams, mollifier_radius_fraction: float = 0.5,
                    tol: float = 1e-9, max_order: int = 384, eval_points: int | None = None) -> PolyFit:
    """Averaged Taylor polynomial of degree k-1 over a ball centred in the cube.

    The ball radius is ``mollifier_radius_fraction`` times half the side. The
    remainder sup is measured on a dense grid of the cube and compared with
    c_prime * side^{k-n/p} * ||D^k s||_{L^p(cube)}.
    """
    comps = _components(field)
    if comps is None:
        raise InputError("averaged_taylor needs an analytic (trigonometric) descriptor")
    if not 0 < mollifier_radius_fraction <= 1:
        raise ConfigError("mollifier radius fraction must lie in (0, 1]")
    n, k = params.n, params.k
    consts = morrey_constant(params)
    center = cube.center
    radius = mollifier_radius_fraction * cube.side / 2
    order = max(2 * k, 24)
    prev = _taylor_coeffs(comps, center, radius, k, order)
    while True:
        nxt_order = order * 2
        if nxt_order > max_order:
            raise QuadratureError(f"averaged Taylor coefficients unconverged at order {order}")
        cur = _taylor_coeffs(comps, center, radius, k, nxt_order)
        scale = max(1.0, max(float(np.abs(v).max()) for v in cur.values()))
        diff = max(float(np.abs(cur[b] - prev[b]).max()) for b in cur)
        order = nxt_order
        prev = cur
        if diff <= tol * scale:
            break
    # dense remainder measurement
    if eval_points is None:
        eval_points = {1: 513, 2: 97}.get(n, 25)
    om = max(float(np.abs(c.freqs).max()) if c.n_modes else 0.0 for c in comps)
    m = max(eval_points, int(math.ceil(16 * om * cube.side / math.pi)) + 1)
    if n >= 2:
        m = min(m, 400 if n == 2 else 60)
    axes = [np.linspace(cube.lower[i], cube.upper[i], m) for i in range(n)]
    vals = np.stack([c.eval_tensor(axes) for c in comps], axis=-1)
    mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)
    fit = PolyFit(cube, k, center, prev, 0.0, 0.0, 0.0, order, radius)
    resid = vals - fit(mesh)
    sup = float(np.sqrt((resid ** 2).sum(axis=-1)).max())
    semi = sobolev_seminorm(VectorTrigField(tuple(comps)), cube, params)
    inv_p = 0.0 if math.isinf(params.p) else 1.0 / params.p
    bound = consts.c_prime * cube.side ** (k - n * inv_p) * semi
    fit.sup_error, fit.bound, fit.seminorm = sup, bound, semi
    return fit


# ---------------------------------------------------------------------------
# cube counting check

@dataclass
class MDPCheck:
    delta: float
    k_size: int
    n_actual: int
    bound: float
    ratio: float
    c_nk: float
    resolution: int
    partition: DyadicPartition = None

    @property
    def holds(self) -> bool:
        return self.n_actual <= self.bound

    def row(self) -> dict:
        return {"delta": self.delta, "K_size": self.k_size, "n_actual": self.n_actual,
                "bound": self.bound, "ratio": self.ratio}


def _unit_box_field(field, resolution: int | None):
    comps = _components(field)
    if comps is None:
        if isinstance(field, GridField):
            return field.abs() if field.sign is None else field, field.dims[0]
        raise InputError("unsupported field type")
    n = comps[0].n
    om = max(float(np.abs(c.freqs).max()) if c.n_modes else 0.0 for c in comps)
    if resolution is None:
        resolution = max(257 if n == 1 else 129, int(math.ceil(32 * max(om, 1.0) / (2 * math.pi))) + 1)
        if n == 1:
            resolution = max(resolution, 4097)
    v = VectorTrigField(tuple(comps))
    g = norm_field(v, (resolution,) * n, "box", bounds=[(0.0, 1.0)] * n, check=False)
    return g, resolution


def mdp_count_check(field, delta: float, params: SobolevParams, resolution: int | None = None,
                    partition: DyadicPartition | None = None) -> MDPCheck:
    """Compare N_{2^{n+1} delta}(|s|) on [0,1]^n with C_{n,k} |K|."""
    part = partition if partition is not None else build_mdp(field, delta, params)
    g, res = _unit_box_field(field, resolution)
    # plain sublevel filtration of |s|; the sign only matters for coarse_m
    b = sublevel_barcode(g.replace(sign=None))
    n_act = n_delta(b, 2 ** (params.n + 1) * delta)
    c_nk = 0.5 * (2 * (params.k - 1) + 1) ** params.n + 0.5
    bound = c_nk * part.size
    return MDPCheck(delta, part.size, n_act, bound, n_act / part.size, c_nk, res, part)


def write_report_csv(checks: Sequence[MDPCheck], fh=None) -> str:
    buf = fh or io.StringIO()
    w = csv.DictWriter(buf, fieldnames=["delta", "K_size", "n_actual", "bound", "ratio"], lineterminator="\n")
    w.writeheader()
    for c in checks:
        w.writerow(c.row())
    return buf.getvalue() if fh is None else ""
