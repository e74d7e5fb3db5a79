import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from coarse_nodal.cubical import coarse_m
from coarse_nodal.errors import ConfigError, PackingError, ResolutionError
from coarse_nodal.spectral import (SharpnessConfig, TrigPoly, VectorTrigField, bump_laplacian, bump_profile,
                                   courant_sweep, courant_trial, fit_exponent, gradient_field, lattice_points,
                                   norm_field, nyquist_samples, product, random_combination, sample,
                                   sharpness_construct, sobolev_norm_exact, wiggly_example)

from oracles import common_zeros, lattice_count, wiggly_lobe_count

TWO_PI = 2 * np.pi


def grid_l2(f, N):
    v = f.eval_torus(N)
    return math.sqrt(np.sum(v ** 2) * (TWO_PI / N) ** f.n)


# ---- TrigPoly ---------------------------------------------------------------

def test_trigpoly_pointwise():
    f = TrigPoly.sin(3) + TrigPoly.cos(1) * 2.0
    x = np.linspace(0, 7, 50)
    assert np.allclose(f(x[:, None]), np.sin(3 * x) + 2 * np.cos(x), atol=1e-13)


def test_conjugate_symmetry_enforced():
    with pytest.raises(ValueError):
        TrigPoly(np.array([[1]]), np.array([1.0 + 0j]), n=1)


def test_derivative_and_truncate():
    f = TrigPoly.sin(2) + TrigPoly.sin(5)
    d = f.derivative([1])
    x = np.linspace(0, 6, 31)[:, None]
    assert np.allclose(d(x), 2 * np.cos(2 * x[:, 0]) + 5 * np.cos(5 * x[:, 0]), atol=1e-12)
    t = f.truncate(4)
    assert np.allclose(t(x), np.sin(2 * x[:, 0]), atol=1e-13)
    assert t.truncate(4).l2_norm() == pytest.approx(t.l2_norm())


def test_random_combination_small_lambda():
    f = random_combination(1, 0.5, seed=3)
    assert f.n_modes == 1
    x = np.linspace(0, 6, 7)[:, None]
    assert np.allclose(np.abs(f(x)), 1 / math.sqrt(TWO_PI))


def test_lattice_count():
    assert len(lattice_points(2, 100)) == lattice_count(2, 100) == 317
    assert len(lattice_points(3, 10)) == lattice_count(3, 10)
    f = random_combination(2, 100, seed=0)
    assert f.n_modes == 317


@given(st.integers(1, 3), st.floats(1, 60), st.integers(0, 2 ** 31))
def test_parseval(n, lam, seed):
    if n == 3:
        lam = min(lam, 12)
    f = random_combination(n, lam, seed)
    assert f.l2_norm() == pytest.approx(1.0, rel=1e-12)
    assert grid_l2(f, nyquist_samples(lam)) == pytest.approx(1.0, rel=1e-10)


@given(st.floats(1, 200), st.integers(0, 2 ** 31))
def test_projection_idempotent_and_orthogonal(lam, seed):
    f = random_combination(1, 400, seed)
    p = f.truncate(lam)
    assert (p.truncate(lam) - p).l2_norm() == pytest.approx(0.0, abs=1e-14)
    r = f - p
    assert f.l2_norm() ** 2 == pytest.approx(p.l2_norm() ** 2 + r.l2_norm() ** 2, rel=1e-12)


def test_sample_exact():
    g = sample(TrigPoly.sin(1), (8,))
    assert np.allclose(g.samples, np.sin(TWO_PI * np.arange(8) / 8), atol=1e-15)
    g = sample(TrigPoly.constant(2.0, n=2), (8, 8))
    assert np.allclose(g.samples, 2.0)


def test_sample_resolution_rejection():
    f = TrigPoly.sin(20)
    with pytest.raises(ResolutionError):
        sample(f, (32,))
    sample(f, (32,), check=False)


def test_sobolev_norm_exact():
    assert sobolev_norm_exact(random_combination(2, 30, 1), 0) == pytest.approx(1.0)
    for j in (1, 3, 7):
        f = TrigPoly.sin(j).normalized()
        assert sobolev_norm_exact(f, 2) == pytest.approx(math.sqrt(1 + j ** 2 + j ** 4))


def test_product_rules():
    f = random_combination(2, 20, 5)
    one = TrigPoly.constant(1.0, n=2)
    assert (product([f, one]) - f).l2_norm() < 1e-13
    j = 3
    p = product([TrigPoly.sin(j, 0, 2), TrigPoly.sin(j, 1, 2)])
    assert sorted(map(tuple, np.abs(p.freqs).tolist())) == [(j, j)] * 4
    assert np.allclose(np.abs(p.coeffs), 0.25)


def test_gradient_field():
    g = gradient_field(TrigPoly.constant(3.0, n=2))
    assert all(c.l2_norm() == 0 for c in g.components)
    g = gradient_field(TrigPoly.sin(1, 0, 2) + TrigPoly.sin(1, 1, 2))
    assert (g.components[0] - TrigPoly.cos(1, 0, 2)).l2_norm() < 1e-14
    assert (g.components[1] - TrigPoly.cos(1, 1, 2)).l2_norm() < 1e-14


def test_norm_field():
    f = TrigPoly.sin(3)
    g = norm_field(f, (64,))
    assert np.allclose(g.samples, np.abs(np.sin(3 * TWO_PI * np.arange(64) / 64)), atol=1e-14)
    v = VectorTrigField((TrigPoly.sin(3, 0, 2), TrigPoly.sin(5, 1, 2)))
    from coarse_nodal.cubical import coarse_z
    # |s| >= 1 halfway between neighbouring zeros, so any delta below 1 separates them
    g = norm_field(v, (256, 256))
    assert 2 * g.zero_cut < 0.6
    assert coarse_z(g, 0.6).value == common_zeros(3, 5) == 60


# ---- sharpness ---------------------------------------------------------------

def test_bump_profile():
    assert bump_profile(0.0) == 1.0
    assert bump_profile(0.5) == pytest.approx(-1.0)
    assert bump_profile(1.0) == 0.0 and bump_profile(1.3) == 0.0
    # closed-form Laplacian against a finite difference in 2D
    h = 1e-4
    for r in (0.1, 0.4, 0.7):
        x = np.array([r, 0.0])
        phi = lambda p: bump_profile(np.hypot(*p))
        lap = sum(phi(x + h * e) + phi(x - h * e) - 2 * phi(x) for e in np.eye(2)) / h ** 2
        assert bump_laplacian(r, 2) == pytest.approx(lap, rel=1e-5)


def test_sharpness_single_bump():
    cfg = SharpnessConfig(1, 1000.0, 1.0, A=64, a1=0.3)
    assert cfg.N == 1
    res = sharpness_construct(cfg, seed=0)
    assert res.passing == 1 and res.remainder_ok
    g = sample(res.f, (nyquist_samples(1000),)).abs()
    assert coarse_m(g, 0.99 * res.depth).value >= 1


def test_sharpness_remainder_and_parseval():
    res = sharpness_construct(SharpnessConfig(2, 300.0, 1.0, A=64), seed=1)
    assert res.remainder_ok
    assert res.parseval_gap <= 1e-9 * res.norm_P ** 2
    assert res.f.l2_norm() == pytest.approx(1.0)


def test_sharpness_packing_and_config_errors():
    with pytest.raises(PackingError) as e:
        sharpness_construct(SharpnessConfig(1, 1000.0, 1.0, A=64, a1=50.0))
    assert e.value.max_feasible >= 1
    with pytest.raises(ConfigError):
        SharpnessConfig(1, 100.0, 0.5).validate()


# ---- sweeps ------------------------------------------------------------------

def test_fit_exponent_exact_power():
    lam = np.array([9.0, 99.0, 999.0])
    e, ci, C1, C2 = fit_exponent(lam, 3 * (lam + 1) ** 0.5)
    assert e == pytest.approx(0.5) and C1 == pytest.approx(3.0)
    assert math.isnan(fit_exponent([1.0, 2.0], [1.0, 2.0])[0])


def test_sweep_config_errors():
    with pytest.raises(ConfigError):
        courant_sweep(1, [100, 200], 0.5, 2)
    with pytest.raises(ConfigError):
        courant_sweep(1, [100, 200, 300], 0.5, 2)


def test_sin_anchor_exponent():
    # m_0(sin jx) = 2j at lambda = j^2 gives exponent exactly 1/2 vs lambda
    js = [2, 4, 8, 16]
    counts = []
    for j in js:
        N = nyquist_samples(j * j)
        counts.append(coarse_m(sample(TrigPoly.sin(j), (N,)).abs(), 0.5).value)
    assert counts == [2 * j for j in js]
    e = fit_exponent(np.array(js, float) ** 2, counts, transform=lambda p: p)[0]
    assert e == pytest.approx(0.5)


def test_sweep_deterministic_and_thread_independent(monkeypatch):
    a = courant_sweep(1, [10, 40, 160], 0.3, 3, seed=7)
    monkeypatch.setenv("COARSE_NODAL_THREADS", "3")
    b = courant_sweep(1, [10, 40, 160], 0.3, 3, seed=7)
    assert a.rows == b.rows and a.exponent == b.exponent
    assert a.ensemble.startswith("Gaussian") or "Gaussian" in a.ensemble


@pytest.mark.parametrize("mode", ["product", "bezout", "critical"])
def test_trial_modes_run(mode):
    c, N = courant_trial(2 if mode == "bezout" else 1, 20.0, 0.3, mode, seed=1)
    assert c >= 0 and N >= nyquist_samples(20)


def test_wiggly_against_lobe_oracle():
    deltas = np.logspace(-6, -4, 3)
    rep = wiggly_example(4, 1, deltas)
    assert [r[2] for r in rep.rows] == [wiggly_lobe_count(4, 1, d) for d in sorted(deltas)]
    assert all(rep.meta["agree"])
    with pytest.raises(ConfigError):
        wiggly_example(4, 1, deltas, k=3)
