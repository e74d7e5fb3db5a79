"""Independent reference computations used as test oracles.

Nothing here imports the persistence code under test: complexes are built
from scratch, homology ranks come from dense Z/2 linear algebra, and the
bottleneck distance is brute-forced over all matchings.
"""
import itertools
import math

import numpy as np

INF = math.inf


# ---- Z/2 linear algebra on python-int bit rows ---------------------------

def gf2_rank(rows):
    basis = {}
    r = 0
    for v in rows:
        while v:
            top = v.bit_length() - 1
            if top in basis:
                v ^= basis[top]
            else:
                basis[top] = v
                r += 1
                break
    return r


def gf2_kernel(cols, ncols):
    """Kernel of the linear map whose j-th column is the bitmask cols[j]; returns bitmasks over columns."""
    piv, out = {}, []
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
            out.append(comb)
    return out


# ---- cubical complex from scratch ----------------------------------------

def cubical_complex(shape, torus):
    """Cells as frozensets of vertex multi-indices; returns (cells, dim, faces)."""
    n = len(shape)
    cells = {}
    for corner in itertools.product(*[range(s) for s in shape]):
        for span in itertools.product((0, 1), repeat=n):
            ok = True
            for ax in range(n):
                if span[ax] and not torus[ax] and corner[ax] + 1 >= shape[ax]:
                    ok = False
                if span[ax] and shape[ax] < 2:
                    ok = False
                if span[ax] and torus[ax] and shape[ax] == 2:
                    # two vertices on a circle give two distinct edges; skip such tiny tori
                    ok = False
            if not ok:
                continue
            verts = []
            for off in itertools.product(*[(0, 1) if s else (0,) for s in span]):
                verts.append(tuple((corner[a] + off[a]) % shape[a] for a in range(n)))
            cells[frozenset(verts)] = sum(span)
    keys = list(cells)
    index = {c: i for i, c in enumerate(keys)}
    dims = [cells[c] for c in keys]
    faces = []
    for c in keys:
        d = cells[c]
        if d == 0:
            faces.append([])
            continue
        # facets: (d-1)-cells whose vertex set is a proper subset
        faces.append([index[f] for f in keys if cells[f] == d - 1 and f < c])
    return keys, dims, faces


def brute_barcode(values, torus=None):
    """Sublevel-set barcode of the lower-star filtration, all degrees, as a sorted
    list of (degree, birth, death) with repetition."""
    values = np.asarray(values, dtype=float)
    shape = values.shape
    torus = tuple(torus) if torus is not None else (False,) * len(shape)
    cells, dims, faces = cubical_complex(shape, torus)
    val = [max(values[v] for v in c) for c in cells]
    top = max(dims)
    crit = sorted(set(val))
    ids = {d: [i for i in range(len(cells)) if dims[i] == d] for d in range(top + 1)}
    pos = {d: {c: k for k, c in enumerate(ids[d])} for d in ids}

    def boundary_cols(d, level):
        # columns: d-cells present at level, as bitmasks over (d-1)-cells
        out = []
        for c in ids[d]:
            if val[c] <= level:
                m = 0
                for f in faces[c]:
                    m ^= 1 << pos[d - 1][f]
                out.append(m)
        return out

    def cycles(d, level):
        present = [c for c in ids[d] if val[c] <= level]
        if d == 0:
            return [1 << pos[0][c] for c in present]
        cols = []
        for c in present:
            m = 0
            for f in faces[c]:
                m ^= 1 << pos[d - 1][f]
            cols.append(m)
        out = []
        for comb in gf2_kernel(cols, len(cols)):
            m = 0
            for j, c in enumerate(present):
                if comb >> j & 1:
                    m |= 1 << pos[d][c]
            out.append(m)
        return out

    def rank(d, s, t):
        z = cycles(d, s)
        if not z:
            return 0
        b = boundary_cols(d + 1, t) if d + 1 <= top else []
        return gf2_rank(z + b) - gf2_rank(b)

    bars = []
    m = len(crit)
    for d in range(top + 1):
        r = [[rank(d, crit[i], crit[j]) if j >= i else 0 for j in range(m)] for i in range(m)]
        for i in range(m):
            for j in range(i + 1, m):
                c = r[i][j - 1] - r[i][j] - ((r[i - 1][j - 1] - r[i - 1][j]) if i else 0)
                bars += [(d, crit[i], crit[j])] * c
            c = r[i][m - 1] - (r[i - 1][m - 1] if i else 0)
            bars += [(d, crit[i], INF)] * c
    return sorted(bars)


def as_triples(b):
    out = []
    for bar in b.bars:
        out += [(bar.degree, bar.birth, bar.death)] * bar.multiplicity
    return sorted(out)


# ---- bottleneck by exhaustive matching ------------------------------------

def brute_bottleneck(a, b):
    """a, b: lists of (birth, death) in one degree. Exhaustive over matchings."""
    fa = [x for x in a if x[1] != INF]
    fb = [x for x in b if x[1] != INF]
    ia = sorted(x[0] for x in a if x[1] == INF)
    ib = sorted(x[0] for x in b if x[1] == INF)
    if len(ia) != len(ib):
        return INF
    inf_cost = max([abs(x - y) for x, y in zip(ia, ib)], default=0.0)
    # pad with diagonal copies
    A = fa + [None] * len(fb)
    B = fb + [None] * len(fa)
    best = INF
    for perm in itertools.permutations(range(len(B))):
        c = 0.0
        for i, j in enumerate(perm):
            x, y = A[i], B[j]
            if x is None and y is None:
                continue
            if x is None:
                c = max(c, (y[1] - y[0]) / 2)
            elif y is None:
                c = max(c, (x[1] - x[0]) / 2)
            else:
                c = max(c, abs(x[0] - y[0]), abs(x[1] - y[1]))
            if c >= best:
                break
        best = min(best, c)
    return max(best, inf_cost)


# ---- analytic counts --------------------------------------------------------

def sign_change_intervals(j, N=None):
    """Nodal intervals of sin(jx) on the circle, counted as sign changes of the
    exact values at the cell midpoints of a fine periodic grid."""
    N = N or 64 * j
    x = (np.arange(N) + 0.5) * 2 * math.pi / N
    s = np.sign(np.sin(j * x))
    return int(np.count_nonzero(s != np.roll(s, 1)))


def common_zeros(j, k):
    """Common zeros of (sin jx, sin ky) on the 2-torus."""
    xs = {round(m * math.pi / j, 12) % round(2 * math.pi, 12) for m in range(2 * j)}
    ys = {round(m * math.pi / k, 12) % round(2 * math.pi, 12) for m in range(2 * k)}
    return len(xs) * len(ys)


def lattice_count(n, lam):
    r = int(math.isqrt(int(lam)))
    return sum(1 for p in itertools.product(range(-r, r + 1), repeat=n) if sum(x * x for x in p) <= lam)


def b0_sublevel(values, t):
    """Components of the induced grid graph on {v <= t} (box topology), by flood fill."""
    values = np.asarray(values, dtype=float)
    alive = values <= t
    seen = np.zeros(values.shape, dtype=bool)
    count = 0
    for start in zip(*np.nonzero(alive)):
        if seen[start]:
            continue
        count += 1
        stack = [start]
        seen[start] = True
        while stack:
            p = stack.pop()
            for ax in range(values.ndim):
                for step in (-1, 1):
                    q = list(p)
                    q[ax] += step
                    q = tuple(q)
                    if 0 <= q[ax] < values.shape[ax] and alive[q] and not seen[q]:
                        seen[q] = True
                        stack.append(q)
    return count


def wiggly_lobe_count(alpha, beta, delta):
    """Nodal intervals of x^alpha sin(x^-beta) on (0, 2 pi] deeper than delta.

    In u = x^-beta the lobes are [m pi, (m+1) pi] (the first one truncated at
    u = (2 pi)^-beta) and |s| = u^(-a) |sin u| with a = alpha / beta, whose
    interior maxima solve a sin u = u cos u; endpoints are also candidates.
    """
    from scipy.optimize import brentq

    a = alpha / beta
    u0 = (2 * math.pi) ** -beta
    h = lambda u: a * math.sin(u) - u * math.cos(u)
    depth = lambda u: u ** -a * abs(math.sin(u))
    count, m = 0, int(u0 // math.pi)
    while True:
        lo, hi = max(u0, m * math.pi), (m + 1) * math.pi
        cands = [lo, hi]
        grid = np.linspace(lo, hi, 201)
        hv = [h(u) for u in grid]
        for i in range(200):
            if hv[i] == 0:
                cands.append(grid[i])
            elif hv[i] * hv[i + 1] < 0:
                cands.append(brentq(h, grid[i], grid[i + 1], xtol=1e-15))
        best = max(depth(u) for u in cands)
        if best > delta:
            count += 1
        # the envelope u^-a bounds every later lobe
        if hi ** -a <= delta:
            return count
        m += 1
