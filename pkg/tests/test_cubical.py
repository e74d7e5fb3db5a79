import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra import numpy as hnp

from coarse_nodal.barcode import INF, CountWindow, GradedBarcode, bottleneck_distance, n_delta
from coarse_nodal.cubical import (GridField, build_filtration, coarse_m, coarse_z, connecting_image_barcode,
                                  min_product_check, mv_two_set_check, persistent_rank, read_grid,
                                  subadditivity_check, sublevel_barcode, write_grid)

from oracles import as_triples, b0_sublevel, brute_barcode, common_zeros, sign_change_intervals

TWO_PI = 2 * np.pi


def circle(vals):
    vals = np.asarray(vals, float)
    return GridField(vals, spacing=TWO_PI / vals.size, topology="torus")


def circle_samples(f, N):
    return f(np.arange(N) * TWO_PI / N)


# ---- filtration combinatorics ----------------------------------------------

def test_cell_counts():
    f = build_filtration(GridField(np.arange(7.0)))
    assert (f.count(0), f.count(1)) == (7, 6)
    f = build_filtration(circle(np.arange(7.0)))
    assert (f.count(0), f.count(1)) == (7, 7)
    f = build_filtration(GridField(np.zeros((4, 5)), topology="torus"))
    counts = [f.count(d) for d in range(3)]
    assert counts == [20, 40, 20]
    assert counts[0] - counts[1] + counts[2] == 0


def test_lower_star_values():
    f = build_filtration(GridField(np.array([[0.0, 3.0], [1.0, 2.0]])))
    # 4 vertices, 4 edges, 1 square; the square enters with its largest vertex
    assert f.ncells == 9
    assert sorted(f.values.tolist()) == [0.0, 1.0, 1.0, 2.0, 2.0, 3.0, 3.0, 3.0, 3.0]


# ---- barcodes -----------------------------------------------------------------

def test_constant_torus():
    b = sublevel_barcode(GridField(np.full((4, 4), 2.5), topology="torus"))
    assert as_triples(b) == [(0, 2.5, INF), (1, 2.5, INF), (1, 2.5, INF), (2, 2.5, INF)]


def test_sin_circle():
    N = 1024
    b = sublevel_barcode(circle(circle_samples(np.sin, N)))
    t = as_triples(b)
    assert len(t) == 2
    assert t[0] == (0, -1.0, INF)
    assert t[1][0] == 1 and t[1][2] == INF and abs(t[1][1] - 1.0) <= TWO_PI / N


def test_double_well():
    x = np.linspace(-2, 2, 401)
    v = (x ** 2 - 1) ** 2 - 1
    b = sublevel_barcode(GridField(v, spacing=x[1] - x[0]))
    assert as_triples(b) == [(0, -1.0, 0.0), (0, -1.0, INF)]
    filt = build_filtration(GridField(v))
    assert persistent_rank(filt, -0.5, -0.1, 0) == 2
    assert persistent_rank(filt, 10.0, 10.0, 0) == 1
    assert persistent_rank(filt, -5.0, 10.0, 0) == 0


shapes = st.sampled_from([(7,), (3, 4), (4, 4), (3, 3, 3), (5, 3), (2, 6)])


@st.composite
def small_fields(draw):
    shape = draw(shapes)
    torus = tuple(draw(st.booleans()) and s > 2 for s in shape)
    vals = draw(hnp.arrays(np.float64, shape, elements=st.integers(0, 5).map(float)))
    return vals, torus


@given(small_fields())
def test_barcode_matches_brute_force_rank_function(data):
    vals, torus = data
    g = GridField(vals, topology=["torus" if t else "box" for t in torus])
    assert as_triples(sublevel_barcode(g)) == brute_barcode(vals, torus)


@given(small_fields())
def test_persistent_rank_counts_bars(data):
    vals, torus = data
    g = GridField(vals, topology=["torus" if t else "box" for t in torus])
    filt = build_filtration(g)
    bars = brute_barcode(vals, torus)
    for s, t in [(1.0, 2.0), (0.0, 4.0), (2.5, 2.5)]:
        for r in range(g.n):
            want = sum(1 for d, b, e in bars if d == r and b <= s and e > t)
            assert persistent_rank(filt, s, t, r) == want


@given(small_fields(), st.floats(-3, 3), st.floats(0.25, 4))
def test_barcode_equivariance(data, c, a):
    vals, torus = data
    topo = ["torus" if t else "box" for t in torus]
    b = sublevel_barcode(GridField(vals, topology=topo))
    assert sublevel_barcode(GridField(a * vals + c, topology=topo)) == b.scaled(a).shifted(c)


# ---- coarse counts -------------------------------------------------------------

@pytest.mark.parametrize("j", range(1, 9))
def test_coarse_m_sin(j):
    N = 256 * j
    s = circle_samples(lambda x: np.sin(j * x), N)
    g = circle(s).abs()
    assert coarse_m(g, 0.5).value == sign_change_intervals(j) == 2 * j


def test_coarse_m_above_max():
    g = circle(circle_samples(np.sin, 256)).abs()
    assert coarse_m(g, 1.5).value == 0


def test_coarse_m_unsigned_uses_zero_cut():
    g = circle(np.abs(circle_samples(lambda x: np.sin(3 * x), 768)))
    assert g.sign is None
    assert coarse_m(g, 0.5).value == 6


def test_coarse_z_common_zeros():
    N = 240
    x = np.arange(N) * TWO_PI / N
    X, Y = np.meshgrid(x, x, indexing="ij")
    v = np.sqrt(np.sin(3 * X) ** 2 + np.sin(5 * Y) ** 2)
    # zeros sit on grid points, up to round-off in sin(m * pi)
    g = GridField(v, spacing=TWO_PI / N, topology="torus", zero_cut=1e-9)
    assert coarse_z(g, 0.05).value == common_zeros(3, 5) == 60
    assert coarse_z(GridField(v + 1.0, spacing=TWO_PI / N, topology="torus"), 0.05).value == 0


def test_coarse_rejects_bad_input():
    g = circle(circle_samples(np.sin, 64))
    with pytest.raises(ValueError):
        coarse_m(g, 0.5)
    with pytest.raises(ValueError):
        coarse_m(g.abs(), 0.0)
    with pytest.raises(ValueError):
        coarse_z(GridField(np.abs(circle_samples(np.sin, 16)), zero_cut=0.3), 0.5)


# ---- Mayer-Vietoris -------------------------------------------------------------

def test_mv_constant():
    r = mv_two_set_check(GridField(np.ones((5, 6))), 0, 2, 0.5)
    assert r.holds and r.lhs == n_delta(r.halves[0], 0.5) == 1


def test_mv_sin5x():
    x = np.linspace(0, TWO_PI, 1001)
    g = GridField(np.sin(5 * x), spacing=x[1] - x[0])
    r = mv_two_set_check(g, 0, 500, 0.3)
    assert r.holds and r.lhs <= 11
    assert r.subadditivity().holds and r.refined().holds


def test_mv_rejects_degenerate_split():
    with pytest.raises(ValueError):
        mv_two_set_check(GridField(np.arange(5.0)), 0, 0, 0.1)
    with pytest.raises(ValueError):
        mv_two_set_check(circle(np.arange(5.0)), 0, 2, 0.1)


def test_connecting_image_ring():
    # a ring of low values around a high centre, split through the middle:
    # the two halves are arcs, the union carries the loop until the centre fills
    v = np.full((7, 7), 5.0)
    v[1:6, 1:6] = 2.0
    v[2:5, 2:5] = 9.0
    conn = connecting_image_barcode(GridField(v), 0, 3)
    union = sublevel_barcode(GridField(v))
    assert as_triples(conn) == [(1, 2.0, 9.0)]
    assert [t for t in as_triples(union) if t[0] == 1] == [(1, 2.0, 9.0)]


@st.composite
def split_fields(draw):
    shape = draw(st.sampled_from([(9,), (4, 5), (5, 4), (6, 6), (3, 7)]))
    vals = draw(hnp.arrays(np.float64, shape, elements=st.integers(0, 6).map(float)))
    split = draw(st.integers(1, shape[0] - 2))
    return vals, split


@given(split_fields())
def test_connecting_image_rank_pointwise(data):
    # bars of im(d) alive at t count ker(H0(S_t) -> H0(A1_t) + H0(A2_t)),
    # which exactness turns into a signed sum of component counts
    vals, i = data
    conn = connecting_image_barcode(GridField(vals), 0, i)
    for t in np.unique(vals):
        alive = sum(b.multiplicity for b in conn.bars if b.birth <= t < b.death)
        want = (b0_sublevel(vals[i:i + 1], t) - b0_sublevel(vals[:i + 1], t)
                - b0_sublevel(vals[i:], t) + b0_sublevel(vals, t))
        assert alive == want


@given(split_fields(), st.floats(0.1, 3.0))
def test_mv_inequalities(data, delta):
    vals, i = data
    r = mv_two_set_check(GridField(vals), 0, i, delta)
    assert r.holds
    w = [CountWindow(0.0, 2.0), CountWindow(1.0, 1.0), CountWindow(3.0, 6.0)]
    assert r.refined(w).all_hold


def test_subadditivity_identity():
    b = GradedBarcode.from_bars([(0, 0.0, 1.0), (0, 0.0, 3.0)])
    assert subadditivity_check(b, b, GradedBarcode.empty(), 0.4).holds


# ---- min / product -----------------------------------------------------------

def test_min_product_self():
    f = circle(np.abs(circle_samples(lambda x: np.sin(3 * x), 256)))
    r = min_product_check(f, f, np.linspace(0, 1, 5), 0.1)
    assert r.holds


def test_min_product_sin3_sin5():
    N = 2048
    f = circle(np.abs(circle_samples(lambda x: np.sin(3 * x), N)))
    g = circle(np.abs(circle_samples(lambda x: np.sin(5 * x), N)))
    r = min_product_check(f, g, np.linspace(0, 1, 6), 0.01)
    assert r.prop_holds and r.improved_holds and r.holds


# ---- I/O ------------------------------------------------------------------------

@pytest.mark.parametrize("name", ["g.csv", "g.bin"])
def test_grid_roundtrip(tmp_path, name):
    g = GridField(np.random.default_rng(0).normal(size=(4, 6)), spacing=(0.5, 0.25), topology=("box", "torus"))
    write_grid(g, tmp_path / name)
    h = read_grid(tmp_path / name)
    assert np.array_equal(h.samples, g.samples)
    assert h.topology == g.topology and h.spacing == g.spacing


def test_empty_grid_rejected():
    with pytest.raises(ValueError):
        GridField(np.zeros((0,)))
