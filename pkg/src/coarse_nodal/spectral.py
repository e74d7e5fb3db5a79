"""Trigonometric polynomials on the flat torus T^n = R^n / (2 pi Z)^n.

Laplace eigenvalues are |xi|^2, so F_lambda is spanned by the modes with
|xi|^2 <= lambda and L2 projection onto it is Fourier truncation. Norms use
Lebesgue measure on [0, 2 pi)^n.
"""
from __future__ import annotations

import itertools
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field as dc_field
from typing import Callable, Sequence

import numpy as np
from scipy import optimize, stats

from .cubical import GridField, coarse_m, coarse_z, section_zero_cut
from .errors import ConfigError, PackingError, ResolutionError

TWO_PI = 2.0 * math.pi
ENSEMBLE = ("Gaussian ensemble: iid N(0,1) real cos/sin coefficients on every mode |xi|^2 <= lambda "
            "(flat spectral density), rescaled to unit L2 norm on [0,2pi)^n")


def _canon(freqs: np.ndarray, coeffs: np.ndarray):
    if freqs.shape[0] == 0:
        return freqs, coeffs
    uq, inv = np.unique(freqs, axis=0, return_inverse=True)
    inv = inv.reshape(-1)
    re = np.bincount(inv, weights=coeffs.real, minlength=uq.shape[0])
    im = np.bincount(inv, weights=coeffs.imag, minlength=uq.shape[0])
    c = re + 1j * im
    keep = c != 0
    return uq[keep], c[keep]


class TrigPoly:
    """Real trigonometric polynomial sum_xi c_xi exp(i xi.x) with c_{-xi} = conj(c_xi)."""

    __slots__ = ("n", "freqs", "coeffs", "lambda_cut")

    def __init__(self, freqs, coeffs, n: int | None = None, lambda_cut: float | None = None,
                 symmetrize: bool = True):
        coeffs = np.asarray(coeffs, dtype=np.complex128).reshape(-1)
        freqs = np.asarray(freqs, dtype=np.int64)
        if n is None:
            if freqs.ndim != 2:
                raise ValueError("pass n for an empty polynomial")
            n = freqs.shape[1]
        freqs = freqs.reshape(-1, n)
        if freqs.shape[0] != coeffs.size:
            raise ValueError("freqs and coeffs differ in length")
        freqs, coeffs = _canon(freqs, coeffs)
        if symmetrize and freqs.shape[0]:
            # average with the conjugate partner; a missing partner is an error
            neg = -freqs
            idx = _lookup(freqs, neg)
            if np.any(idx < 0):
                raise ValueError("coefficients lack conjugate partners (function not real)")
            partner = np.conj(coeffs[idx])
            scale = np.abs(coeffs).max()
            if np.abs(coeffs - partner).max() > 1e-9 * scale:
                raise ValueError("coefficients are not conjugate symmetric")
            coeffs = 0.5 * (coeffs + partner)
        sq = (freqs ** 2).sum(axis=1) if freqs.shape[0] else np.zeros(0, np.int64)
        top = float(sq.max()) if sq.size else 0.0
        if lambda_cut is None:
            lambda_cut = top
        elif top > lambda_cut:
            raise ValueError(f"mode with |xi|^2={top} exceeds lambda_cut={lambda_cut}")
        freqs.setflags(write=False)
        coeffs.setflags(write=False)
        object.__setattr__(self, "n", int(n))
        object.__setattr__(self, "freqs", freqs)
        object.__setattr__(self, "coeffs", coeffs)
        object.__setattr__(self, "lambda_cut", float(lambda_cut))

    def __setattr__(self, k, v):
        raise AttributeError("TrigPoly is immutable")

    # constructors -------------------------------------------------------
    @classmethod
    def constant(cls, c: float, n: int = 1) -> "TrigPoly":
        return cls(np.zeros((1, n), np.int64), [c], n=n)

    @classmethod
    def zero(cls, n: int = 1, lambda_cut: float = 0.0) -> "TrigPoly":
        return cls(np.zeros((0, n), np.int64), [], n=n, lambda_cut=lambda_cut)

    @classmethod
    def mode(cls, freq: Sequence[int], kind: str = "sin", amplitude: float = 1.0) -> "TrigPoly":
        """amplitude * sin(xi.x) or cos(xi.x)."""
        xi = np.asarray(freq, np.int64).reshape(1, -1)
        n = xi.shape[1]
        if not np.any(xi):
            return cls.constant(amplitude if kind == "cos" else 0.0, n)
        if kind == "sin":
            c = [amplitude / 2j, -amplitude / 2j]
        elif kind == "cos":
            c = [amplitude / 2, amplitude / 2]
        else:
            raise ValueError("kind is 'sin' or 'cos'")
        return cls(np.vstack([xi, -xi]), c, n=n)

    @classmethod
    def sin(cls, j: int, axis: int = 0, n: int = 1) -> "TrigPoly":
        xi = [0] * n
        xi[axis] = j
        return cls.mode(xi, "sin")

    @classmethod
    def cos(cls, j: int, axis: int = 0, n: int = 1) -> "TrigPoly":
        xi = [0] * n
        xi[axis] = j
        return cls.mode(xi, "cos")

    # algebra -------------------------------------------------------------
    @property
    def n_modes(self) -> int:
        return int(self.freqs.shape[0])

    def __add__(self, other: "TrigPoly") -> "TrigPoly":
        if isinstance(other, (int, float)):
            other = TrigPoly.constant(float(other), self.n)
        return TrigPoly(np.vstack([self.freqs, other.freqs]), np.concatenate([self.coeffs, other.coeffs]),
                        n=self.n, lambda_cut=max(self.lambda_cut, other.lambda_cut), symmetrize=False)

    def __sub__(self, other):
        return self + (-1.0) * other

    def __mul__(self, t):
        if isinstance(t, TrigPoly):
            return product([self, t])
        return TrigPoly(self.freqs, self.coeffs * float(t), n=self.n, lambda_cut=self.lambda_cut,
                        symmetrize=False)

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1.0

    def l2_norm(self) -> float:
        return math.sqrt(TWO_PI ** self.n * float(np.sum(np.abs(self.coeffs) ** 2)))

    def normalized(self) -> "TrigPoly":
        nrm = self.l2_norm()
        if nrm == 0:
            raise ValueError("cannot normalize the zero polynomial")
        return self * (1.0 / nrm)

    def derivative(self, alpha: Sequence[int]) -> "TrigPoly":
        alpha = np.asarray(alpha, np.int64)
        fac = np.prod((1j * self.freqs) ** alpha, axis=1) if self.n_modes else np.zeros(0)
        return TrigPoly(self.freqs, self.coeffs * fac, n=self.n, lambda_cut=self.lambda_cut, symmetrize=False)

    def truncate(self, lam: float) -> "TrigPoly":
        keep = (self.freqs ** 2).sum(axis=1) <= lam
        return TrigPoly(self.freqs[keep], self.coeffs[keep], n=self.n, lambda_cut=min(lam, self.lambda_cut)
                        if self.lambda_cut else lam, symmetrize=False)

    def max_abs_freq(self) -> np.ndarray:
        if not self.n_modes:
            return np.zeros(self.n, np.int64)
        return np.abs(self.freqs).max(axis=0)

    def lipschitz_bound(self) -> float:
        """sum |c_xi| |xi|, an upper bound for |grad f|."""
        return float(np.sum(np.abs(self.coeffs) * np.sqrt((self.freqs ** 2).sum(axis=1))))

    def sup_bound(self) -> float:
        return float(np.abs(self.coeffs).sum())

    # evaluation ----------------------------------------------------------
    def __call__(self, points) -> np.ndarray:
        """Evaluate at points of shape (..., n)."""
        x = np.asarray(points, dtype=np.float64)
        if self.n == 1 and (x.ndim == 0 or x.shape[-1] != 1):
            x = x[..., None]
        shp = x.shape[:-1]
        x = x.reshape(-1, self.n)
        out = np.empty(x.shape[0])
        step = max(1, 2_000_000 // max(self.n_modes, 1))
        for s in range(0, x.shape[0], step):
            ph = np.exp(1j * (x[s:s + step] @ self.freqs.T.astype(np.float64)))
            out[s:s + step] = (ph @ self.coeffs).real
        return out.reshape(shp)

    def eval_tensor(self, axes: Sequence[np.ndarray]) -> np.ndarray:
        """Evaluate on the tensor grid axes[0] x ... x axes[n-1]."""
        if len(axes) != self.n:
            raise ValueError("one coordinate array per axis")
        if not self.n_modes:
            return np.zeros(tuple(len(a) for a in axes))
        tabs = [np.exp(1j * np.outer(self.freqs[:, i], np.asarray(a, np.float64))) for i, a in enumerate(axes)]
        if self.n == 1:
            out = self.coeffs @ tabs[0]
        elif self.n == 2:
            out = (tabs[0].T * self.coeffs) @ tabs[1]
        else:
            letters = "abcdefghijklmnopqrstuvwxyz"[: self.n]
            expr = "m," + ",".join("m" + l for l in letters) + "->" + letters
            out = np.einsum(expr, self.coeffs, *tabs, optimize=True)
        return np.real(out)

    def eval_torus(self, N: int) -> np.ndarray:
        """Values on the torus grid 2 pi k / N (same N on every axis) via FFT."""
        if np.any(2 * self.max_abs_freq() >= N):
            raise ResolutionError(f"N={N} aliases frequency {self.max_abs_freq().max()}")
        A = np.zeros((N,) * self.n, np.complex128)
        np.add.at(A, tuple((self.freqs % N).T), self.coeffs)
        return np.real(np.fft.ifftn(A)) * N ** self.n

    def __repr__(self):
        return f"TrigPoly(n={self.n}, modes={self.n_modes}, lambda_cut={self.lambda_cut:g})"


def _lookup(table: np.ndarray, query: np.ndarray) -> np.ndarray:
    """Row index of each query row in ``table`` (rows unique), -1 if absent."""
    if table.shape[0] == 0:
        return np.full(query.shape[0], -1)
    both = np.vstack([table, query])
    _, inv = np.unique(both, axis=0, return_inverse=True)
    inv = inv.reshape(-1)
    where = np.full(inv.max() + 1, -1)
    where[inv[: table.shape[0]]] = np.arange(table.shape[0])
    return where[inv[table.shape[0]:]]


@dataclass(frozen=True)
class VectorTrigField:
    components: tuple

    def __post_init__(self):
        comps = tuple(self.components)
        if not comps:
            raise ValueError("need at least one component")
        if len({c.n for c in comps}) != 1:
            raise ValueError("components must share the dimension n")
        object.__setattr__(self, "components", comps)

    @property
    def n(self) -> int:
        return self.components[0].n

    @property
    def lambda_cut(self) -> float:
        return max(c.lambda_cut for c in self.components)

    def __len__(self):
        return len(self.components)

    def scaled(self, t: float) -> "VectorTrigField":
        return VectorTrigField(tuple(c * t for c in self.components))


# ---------------------------------------------------------------------------

def lattice_points(n: int, lam: float) -> np.ndarray:
    """Integer vectors with |xi|^2 <= lam, lexicographic order."""
    if lam < 0:
        return np.zeros((0, n), np.int64)
    r = int(math.isqrt(int(math.floor(lam))))
    rng = np.arange(-r, r + 1)
    g = np.stack(np.meshgrid(*([rng] * n), indexing="ij"), axis=-1).reshape(-1, n)
    return g[(g ** 2).sum(axis=1) <= lam]


def random_combination(n: int, lam: float, seed) -> TrigPoly:
    """Random element of F_lambda with unit L2 norm (Gaussian ensemble, see ``ENSEMBLE``)."""
    if lam < 0:
        raise ValueError("lambda must be >= 0")
    rng = np.random.default_rng(seed)
    xi = lattice_points(n, lam)
    # one representative per +-xi pair: the lexicographically positive one
    nz = np.any(xi != 0, axis=1)
    first = np.argmax(xi != 0, axis=1)
    pos = nz & (xi[np.arange(len(xi)), first] > 0)
    reps = xi[pos]
    a = rng.standard_normal(reps.shape[0])
    b = rng.standard_normal(reps.shape[0])
    a0 = rng.standard_normal()
    # a cos + b sin  ->  c_xi = (a - ib)/2, c_-xi = (a + ib)/2
    freqs = np.vstack([np.zeros((1, n), np.int64), reps, -reps])
    coeffs = np.concatenate([[a0], (a - 1j * b) / 2, (a + 1j * b) / 2])
    return TrigPoly(freqs, coeffs, n=n, lambda_cut=float(lam)).normalized()


def nyquist_samples(lam: float) -> int:
    """Per-axis samples over one period: 8 * ceil(sqrt(lambda)), at least 8."""
    return 8 * max(1, math.ceil(math.sqrt(max(lam, 0.0))))


def _axes(dims, topology, bounds):
    n = len(dims)
    out, spacing, origin = [], [], []
    for i in range(n):
        N = int(dims[i])
        if N < 1:
            raise ValueError("dims must be positive")
        lo, hi = (0.0, TWO_PI) if bounds is None else bounds[i]
        if topology[i] == "torus":
            if bounds is not None and not math.isclose(hi - lo, TWO_PI):
                raise ValueError("torus axes span one period")
            h = (hi - lo) / N
            out.append(lo + h * np.arange(N))
        else:
            h = (hi - lo) / max(N - 1, 1)
            out.append(lo + h * np.arange(N))
        spacing.append(h)
        origin.append(lo)
    return out, tuple(spacing), tuple(origin)


def _check_resolution(lam, dims, spacing):
    need = nyquist_samples(lam)
    for N, h in zip(dims, spacing):
        per_period = TWO_PI / h
        if per_period + 1e-9 < need:
            raise ResolutionError(f"{N} samples ({per_period:.1f} per period) below the {need} required "
                                  f"for lambda={lam:g}")


def _norm_tuple(x, n, default):
    if x is None:
        x = default
    if isinstance(x, (str, int, np.integer)):
        return (x,) * n
    return tuple(x)


def sample(f: TrigPoly, dims, topology="torus", bounds=None, check: bool = True) -> GridField:
    """Exact samples on a uniform grid; torus axes cover [0, 2 pi), box axes
    include both endpoints of ``bounds`` (default [0, 2 pi])."""
    dims = tuple(int(d) for d in _norm_tuple(dims, f.n, None))
    topology = _norm_tuple(topology, f.n, "torus")
    axes, spacing, origin = _axes(dims, topology, bounds)
    if check:
        _check_resolution(f.lambda_cut, dims, spacing)
    if all(t == "torus" for t in topology) and len(set(dims)) == 1 and bounds is None \
            and np.all(2 * f.max_abs_freq() < dims[0]):
        vals = f.eval_torus(dims[0])
    else:
        vals = f.eval_tensor(axes)
    torus = [t == "torus" for t in topology]
    return GridField(vals, spacing=spacing, topology=topology, descriptor=f, origin=origin,
                     zero_cut=section_zero_cut(vals, torus))


def norm_field(v: VectorTrigField | TrigPoly, dims, topology="torus", bounds=None, check: bool = True) -> GridField:
    """Pointwise Euclidean norm |s| on the grid (sign of s kept for one component)."""
    if isinstance(v, TrigPoly):
        v = VectorTrigField((v,))
    comps = [sample(c, dims, topology, bounds, check=check) for c in v.components]
    stack = np.stack([c.samples for c in comps], axis=-1)
    g = comps[0]
    nrm = np.sqrt((stack * stack).sum(axis=-1))
    return GridField(nrm, spacing=g.spacing, topology=g.topology, descriptor=v, origin=g.origin,
                     sign=np.sign(stack[..., 0]) if len(comps) == 1 else None,
                     zero_cut=section_zero_cut(stack, g.torus))


def _multi_indices(n: int, order: int):
    """Multi-indices alpha in N^n with |alpha| == order."""
    for combo in itertools.combinations_with_replacement(range(n), order):
        a = [0] * n
        for i in combo:
            a[i] += 1
        yield tuple(a)


def sobolev_norm_exact(f: TrigPoly, k: int) -> float:
    """(sum_{|alpha|<=k} ||D^alpha f||_2^2)^{1/2} by Parseval."""
    if k < 0:
        raise ValueError("k must be >= 0")
    xi2 = f.freqs.astype(np.float64) ** 2
    w = np.zeros(f.n_modes)
    for order in range(k + 1):
        for a in _multi_indices(f.n, order):
            w += np.prod(xi2 ** np.asarray(a), axis=1)
    return math.sqrt(TWO_PI ** f.n * float(np.sum(w * np.abs(f.coeffs) ** 2)))


def product(fs: Sequence[TrigPoly]) -> TrigPoly:
    """Pointwise product by coefficient convolution."""
    fs = list(fs)
    if not fs:
        raise ValueError("empty product")
    n = fs[0].n
    if any(f.n != n for f in fs):
        raise ValueError("factors must share n")
    out = fs[0]
    lam = math.sqrt(fs[0].lambda_cut)
    for g in fs[1:]:
        lam += math.sqrt(g.lambda_cut)
        fr = (out.freqs[:, None, :] + g.freqs[None, :, :]).reshape(-1, n)
        c = (out.coeffs[:, None] * g.coeffs[None, :]).reshape(-1)
        out = TrigPoly(fr, c, n=n, lambda_cut=None, symmetrize=False)
    return TrigPoly(out.freqs, out.coeffs, n=n, lambda_cut=max(lam * lam, float(
        (out.freqs ** 2).sum(axis=1).max()) if out.n_modes else 0.0), symmetrize=False)


def gradient_field(f: TrigPoly) -> VectorTrigField:
    comps = []
    for i in range(f.n):
        a = [0] * f.n
        a[i] = 1
        comps.append(f.derivative(a))
    return VectorTrigField(tuple(comps))


# ---------------------------------------------------------------------------
# sharpness construction

def bump_profile(r):
    """Radial C^2 profile: (1 - r^2)^3 (1 - 364/27 r^2) on r < 1, zero outside.

    phi(0) = 1, phi(1/2) = -1, support in the closed unit ball.
    """
    r = np.asarray(r, dtype=np.float64)
    s = r * r
    return np.where(r < 1.0, (1.0 - s) ** 3 * (1.0 - (364.0 / 27.0) * s), 0.0)


def bump_laplacian(r, n: int):
    """Laplacian of x -> bump_profile(|x|) in R^n (closed form)."""
    r = np.asarray(r, dtype=np.float64)
    s = r * r
    c = 364.0 / 27.0
    # phi = P(s), lap = 4 s P''(s) + 2 n P'(s)
    p1 = -3 * (1 - s) ** 2 * (1 - c * s) - c * (1 - s) ** 3
    p2 = 6 * (1 - s) * (1 - c * s) + 6 * c * (1 - s) ** 2
    return np.where(r < 1.0, 4 * s * p2 + 2 * n * p1, 0.0)


@dataclass
class SharpnessConfig:
    n: int
    lam: float
    delta: float = 1.0
    A: float = 16.0
    a1: float = 1.0
    margin: float = 0.05
    profile: Callable = bump_profile

    @property
    def eps(self) -> float:
        return math.sqrt(self.A / self.lam)

    @property
    def N(self) -> int:
        return int(math.floor(self.a1 * self.delta ** -2 * self.eps ** -self.n))

    def validate(self):
        if self.delta < 1 or self.A <= 1 or self.a1 <= 0 or self.lam <= 0:
            raise ConfigError("need delta >= 1, A > 1, a1 > 0, lambda > 0")
        if self.N < 1:
            raise ConfigError("N = floor(a1 delta^-2 eps^-n) must be >= 1")


@dataclass
class SharpnessResult:
    f: TrigPoly
    centers: np.ndarray
    config: SharpnessConfig
    norm_P: float
    remainder: float          # ||F - P||
    laplacian_bound: float    # ||Delta F|| / lambda
    parseval_gap: float       # | ||F||^2 - ||P||^2 - ||F-P||^2 |
    passing: int              # centers passing the +-1/2 depth test
    resolution: int

    def __iter__(self):
        return iter((self.f, self.centers))

    @property
    def depth(self) -> float:
        """Guaranteed value of f at a passing center: (1/2) / ||P||."""
        return 0.5 / self.norm_P

    @property
    def remainder_ok(self) -> bool:
        return self.remainder <= self.laplacian_bound * (1 + 1e-12) + 1e-300


def _packing(cfg: SharpnessConfig, rng) -> np.ndarray:
    eps, n = cfg.eps, cfg.n
    cell = 4 * eps * (1 + cfg.margin)
    per_axis = int(math.floor(TWO_PI / cell))
    cap = per_axis ** n
    if cfg.N > cap:
        raise PackingError(f"N={cfg.N} balls of radius 2eps={2 * eps:.4g} do not fit (max {cap})", cap)
    w = TWO_PI / per_axis
    sites = np.stack(np.meshgrid(*([np.arange(per_axis)] * n), indexing="ij"), -1).reshape(-1, n)
    pick = np.sort(rng.choice(sites.shape[0], size=cfg.N, replace=False))
    slack = (w - 4 * eps) / 2
    jitter = rng.uniform(-slack, slack, size=(cfg.N, n))
    shift = rng.uniform(0, w, size=n)
    return np.mod((sites[pick] + 0.5) * w + jitter + shift, TWO_PI)


def sharpness_construct(cfg: SharpnessConfig, seed=0, resolution: int | None = None) -> SharpnessResult:
    """Deep nodal domains from transplanted bumps, projected onto F_lambda."""
    cfg.validate()
    rng = np.random.default_rng(seed)
    centers = _packing(cfg, rng)
    eps, n, lam = cfg.eps, cfg.n, cfg.lam
    if resolution is None:
        need = max(4 * nyquist_samples(lam), 48 * TWO_PI / eps)
        resolution = 1 << int(math.ceil(math.log2(need)))
    M = resolution
    h = TWO_PI / M
    F = np.zeros((M,) * n)
    rad = int(math.ceil(eps / h)) + 1
    offs = np.arange(-rad, rad + 1)
    for c in centers:
        base = np.round(c / h).astype(int)
        idx = [np.mod(base[i] + offs, M) for i in range(n)]
        d2 = 0.0
        for i in range(n):
            dx = (base[i] + offs) * h - c[i]
            shape = [1] * n
            shape[i] = -1
            d2 = d2 + (dx.reshape(shape)) ** 2
        F[np.ix_(*idx)] += cfg.profile(np.sqrt(d2) / eps)
    C = np.fft.fftn(F) / M ** n
    k = np.fft.fftfreq(M, d=1.0 / M).astype(np.int64)
    grids = np.meshgrid(*([k] * n), indexing="ij")
    xi2 = sum(g.astype(np.float64) ** 2 for g in grids)
    vol = TWO_PI ** n
    a2 = np.abs(C) ** 2
    low = xi2 <= lam
    normF2 = vol * a2.sum()
    normP2 = vol * a2[low].sum()
    rem2 = vol * a2[~low].sum()
    lap2 = vol * (xi2 ** 2 * a2).sum()
    freqs = np.stack([g[low] for g in grids], axis=1)
    P = TrigPoly(freqs, C[low], n=n, lambda_cut=lam)
    norm_P = P.l2_norm()

    # +-1/2 depth test at the centers and on the spheres of radius eps/2
    if n == 1:
        dirs = np.array([[1.0], [-1.0]])
    elif n == 2:
        t = np.linspace(0, TWO_PI, 64, endpoint=False)
        dirs = np.stack([np.cos(t), np.sin(t)], 1)
    else:
        g = np.random.default_rng(0).standard_normal((256, n))
        dirs = g / np.linalg.norm(g, axis=1, keepdims=True)
    at_c = P(centers)
    ring = P(centers[:, None, :] + 0.5 * eps * dirs[None, :, :])
    ok = (at_c >= 0.5) & np.all(ring <= -0.5, axis=1)
    return SharpnessResult(P * (1.0 / norm_P), centers, cfg, norm_P, math.sqrt(rem2),
                           math.sqrt(lap2) / lam, abs(normF2 - normP2 - rem2), int(ok.sum()), M)


# ---------------------------------------------------------------------------
# sweeps

@dataclass
class ScalingReport:
    parameter: str                  # "lambda" or "delta"
    rows: list                      # (param, trial, count, resolution, seed)
    exponent: float
    ci: tuple
    C1: float
    C2: float
    ensemble: str = ENSEMBLE
    mode: str = ""
    meta: dict = dc_field(default_factory=dict)

    def medians(self):
        ps = sorted({r[0] for r in self.rows})
        return ps, [float(np.median([r[2] for r in self.rows if r[0] == p])) for p in ps]


def fit_exponent(params, counts, transform=lambda p: p + 1.0):
    """Least-squares slope of log(median count) vs log(transform(param)).

    Returns (exponent, (lo, hi) 95% interval, C1, C2); C1 = exp(intercept) and
    C2 is the smallest additive floor with count <= C1 x^exponent + C2 on
    every row.
    """
    params = np.asarray(params, dtype=np.float64)
    counts = np.asarray(counts, dtype=np.float64)
    ps = np.unique(params)
    med = np.array([np.median(counts[params == p]) for p in ps])
    good = med > 0
    if good.sum() < 3:
        return math.nan, (math.nan, math.nan), math.nan, math.nan
    x = np.log(transform(ps[good]))
    y = np.log(med[good])
    res = stats.linregress(x, y)
    if good.sum() > 2:
        tq = stats.t.ppf(0.975, good.sum() - 2)
        ci = (res.slope - tq * res.stderr, res.slope + tq * res.stderr)
    else:
        ci = (math.nan, math.nan)
    C1 = math.exp(res.intercept)
    C2 = max(0.0, float(np.max(counts - C1 * transform(params) ** res.slope)))
    return float(res.slope), (float(ci[0]), float(ci[1])), C1, C2


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("COARSE_NODAL_THREADS", "1")))
    except ValueError:
        return 1


def _trial_seed(seed, i, t):
    return int(np.random.SeedSequence([int(seed), int(i), int(t)]).generate_state(1)[0])


def _z_count(v: VectorTrigField, n: int, delta: float, base: int, max_axis: int):
    N = base
    while True:
        g = norm_field(v, (N,) * n, "torus")
        if 3 * g.zero_cut < delta:
            return coarse_z(g, delta, 0).value, N
        N *= 2
        if N > max_axis:
            raise ResolutionError(f"zero cut still above delta/3 at {N // 2} samples per axis")


def courant_trial(n, lam, delta, mode, seed, l: int = 2, max_axis: int | None = None):
    """One draw of a sweep; returns (count, per-axis resolution)."""
    if max_axis is None:
        max_axis = 1 << (16 if n == 1 else 12)
    if mode == "single":
        f = random_combination(n, lam, seed)
        N = nyquist_samples(lam)
        return coarse_m(sample(f, (N,) * n).abs(), delta, 0).value, N
    if mode == "product":
        ss = np.random.SeedSequence(seed).generate_state(l)
        f = product([random_combination(n, lam, int(s)) for s in ss])
        N = nyquist_samples(f.lambda_cut)
        return coarse_m(sample(f, (N,) * n).abs(), delta, 0).value, N
    if mode == "bezout":
        ss = np.random.SeedSequence(seed).generate_state(n)
        v = VectorTrigField(tuple(random_combination(n, lam, int(s)) for s in ss))
        return _z_count(v, n, delta, nyquist_samples(lam), max_axis)
    if mode == "critical":
        f = random_combination(n, lam, seed)
        return _z_count(gradient_field(f), n, delta, nyquist_samples(lam), max_axis)
    raise ConfigError(f"unknown mode {mode!r}")


def courant_sweep(n: int, lambda_list, delta: float, trials: int, mode: str = "single",
                  seed: int = 0, l: int = 2) -> ScalingReport:
    """Counts over random draws in F_lambda and a log-log fit against lambda + 1."""
    lams = sorted(float(x) for x in lambda_list)
    if len(set(lams)) < 3:
        raise ConfigError("need at least 3 lambda values")
    if max(lams) < 10 * min(lams):
        raise ConfigError("lambda values must span at least one decade")
    if trials < 1:
        raise ConfigError("trials must be >= 1")
    jobs = [(i, lam, t, _trial_seed(seed, i, t)) for i, lam in enumerate(lams) for t in range(trials)]

    def run(job):
        i, lam, t, s = job
        c, N = courant_trial(n, lam, delta, mode, s, l=l)
        return (lam, t, c, N, s)

    workers = _threads()
    if workers > 1:
        with ThreadPoolExecutor(workers) as ex:
            rows = list(ex.map(run, jobs))
    else:
        rows = [run(j) for j in jobs]
    rows.sort(key=lambda r: (r[0], r[1]))
    e, ci, C1, C2 = fit_exponent([r[0] for r in rows], [r[2] for r in rows])
    return ScalingReport("lambda", rows, e, ci, C1, C2, mode=mode,
                         meta={"n": n, "delta": delta, "trials": trials, "seed": seed})


# ---------------------------------------------------------------------------
# x^alpha sin(x^-beta)

def _wiggly_grid(alpha, beta, delta_min, per_half=64):
    # u = x^-beta; zeros at u = m pi; cut where every remaining lobe is below delta_min / 2
    M = max(1, math.ceil((2.0 / delta_min) ** (beta / alpha) / math.pi) + 1)
    u_lo = TWO_PI ** -beta
    u_hi = M * math.pi
    nseg = math.ceil((u_hi - u_lo) / math.pi * per_half)
    u = np.linspace(u_hi, u_lo, nseg + 1)
    x = u ** (-1.0 / beta)
    return x, M


def wiggly_values(alpha, beta, x):
    x = np.asarray(x, np.float64)
    return x ** alpha * np.sin(x ** -beta)


def wiggly_oracle(alpha: float, beta: float, delta: float) -> int:
    """Nodal intervals of x^alpha sin(x^-beta) on (0, 2 pi] whose sup |s| exceeds delta."""
    M = max(1, math.ceil((2.0 / delta) ** (beta / alpha) / math.pi) + 1)
    u_lo = TWO_PI ** -beta
    ends = [u_lo] + [m * math.pi for m in range(1, M + 50) if m * math.pi > u_lo]
    g = lambda u: -abs(u ** (-alpha / beta) * math.sin(u))
    count = 0
    for a, b in zip(ends[:-1], ends[1:]):
        grid = np.linspace(a, b, 65)
        vals = -np.abs(grid ** (-alpha / beta) * np.sin(grid))
        i = int(np.argmin(vals))
        lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, 64)]
        r = optimize.minimize_scalar(g, bounds=(lo, hi), method="bounded", options={"xatol": 1e-13 * b})
        depth = max(-r.fun, -vals[i])
        if depth > delta:
            count += 1
    return count


def wiggly_example(alpha: float, beta: float, delta_list, k: int | None = None,
                   per_half: int = 64) -> ScalingReport:
    """m_0 of x^alpha sin(x^-beta) on (0, 2 pi] against 1/delta.

    Persistence on a 1D path depends only on the sample order, so the grid is
    uniform in u = x^-beta (``per_half`` samples per nodal interval) down to
    the interval where every lobe is below half the smallest delta.
    """
    if beta <= 0 or alpha <= 0:
        raise ConfigError("need alpha, beta > 0")
    if k is None:
        k = alpha / (beta + 1)
    if not math.isclose(alpha, k * (beta + 1)):
        raise ConfigError("need alpha = k (beta + 1)")
    deltas = sorted(float(d) for d in delta_list)
    if len(set(deltas)) < 3:
        raise ConfigError("need at least 3 delta values")
    x, M = _wiggly_grid(alpha, beta, deltas[0], per_half)
    s = wiggly_values(alpha, beta, x)
    g = GridField(s, topology="box").abs()
    rows, oracle = [], []
    for d in deltas:
        rows.append((d, 0, coarse_m(g, d, 0).value, len(x), 0))
        oracle.append(wiggly_oracle(alpha, beta, d))
    e, ci, C1, C2 = fit_exponent([r[0] for r in rows], [r[2] for r in rows], transform=lambda p: 1.0 / p)
    lo_b, hi_b = beta / alpha - 0.1, 1.0 / k + 0.1
    return ScalingReport("delta", rows, e, ci, C1, C2, ensemble="deterministic", mode="wiggly",
                         meta={"alpha": alpha, "beta": beta, "k": k, "oracle": oracle,
                               "agree": [r[2] == o for r, o in zip(rows, oracle)],
                               "slope_window": (lo_b, hi_b), "slope_ok": lo_b <= e <= hi_b,
                               "lobes_resolved": M})
