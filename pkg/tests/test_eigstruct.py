import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from _oracles import brute_lcd
from ctrlgraph.eigstruct import (
    ConstantRegimeError,
    StructureConstants,
    classify,
    is_delocalized,
    lcd,
    lemma_lcd_constant,
    regularized_lcd,
    sphere_net,
    spread_policy,
)


def unit(v):
    v = np.asarray(v, dtype=float)
    return v / np.linalg.norm(v)


def test_lcd_frozen_value():
    # brute-force 1e-5 grid: first hit at 1.12351
    r = lcd([0.6, 0.8], L=1.0)
    assert r.resolved
    assert 1.12350 <= r.lower <= r.upper <= 1.12351
    assert r.lower == pytest.approx(1.1235024, abs=1e-6)


@given(st.lists(st.floats(-1, 1, allow_nan=False), min_size=1, max_size=32), st.sampled_from([1.0, 2.0, 3.0]))
@settings(max_examples=80, deadline=None)
def test_lcd_lower_bounds(v, L):
    v = np.array(v)
    if np.linalg.norm(v) < 1e-3:
        return
    x = unit(v)
    r = lcd(x, L)
    assert r.lower >= L
    assert r.lower >= 1 / (2 * np.abs(x).max()) - 1e-12
    if r.resolved:
        assert r.upper - r.lower <= 1e-8 + 1e-3


def test_lcd_matches_brute_force_small():
    rng = np.random.default_rng(12)
    for _ in range(8):
        x = unit(rng.standard_normal(3))
        r = lcd(x, 2.0)
        ref = brute_lcd(x, 2.0)
        assert r.resolved and ref is not None
        assert abs(r.lower - ref) <= 1e-3


def test_lcd_unresolved():
    r = lcd([1.0], L=2.0, theta_max=3.0)
    # dist(theta, Z) < 2 sqrt(log(theta/2)) first holds near theta ~ 2.06
    assert r.resolved
    r = lcd(unit([1, 2 ** 0.5, 3 ** 0.5]), L=2.0, theta_max=2.01)
    assert not r.resolved and r.lower == pytest.approx(2.01)


def test_lcd_rejects_non_unit():
    with pytest.raises(ValueError):
        lcd([1.0, 1.0])
    with pytest.raises(ValueError):
        lcd([0.6, 0.8], L=0.5)


def test_constants():
    c = StructureConstants()
    assert c.c2 == pytest.approx(0.00025)
    assert c.delta == pytest.approx(0.000125)
    assert c.gamma == pytest.approx(0.000125)
    assert c.spread_size(40) == 1 and c.subset_size(40) == 1
    assert c.spread_size(4000) == 1
    assert c.spread_size(4001) == 2
    with pytest.raises(ValueError):
        StructureConstants(c0=1.2)
    with pytest.raises(ValueError):
        StructureConstants(gamma=0.01)
    assert StructureConstants.for_atom(0.25).L == 2.0
    assert StructureConstants.for_atom(0.1).L == pytest.approx(10 ** 0.5)


def test_classify():
    n = 40
    e1 = np.zeros(n)
    e1[0] = 1
    assert classify(e1).cls == "compressible"
    flat = np.ones(n) / math.sqrt(n)
    rep = classify(flat)
    assert rep.incompressible
    # only floor(0.1 * 40) = 4 coordinates can be kept
    assert rep.sparse_distance == pytest.approx(math.sqrt(36 / 40))
    assert rep.spread_set == (0,)
    with pytest.raises(ConstantRegimeError):
        classify(unit(np.ones(10)))


def test_classify_threshold():
    # sparse distance exactly controlled by the tail mass
    n = 20
    x = np.zeros(n)
    x[0], x[1] = math.sqrt(1 - 0.05 ** 2), 0.05
    assert classify(x).cls == "compressible"  # dist = 0.05 <= c1
    x[1] = 0.2
    x[0] = math.sqrt(1 - 0.04)
    x[2] = 0.0
    assert classify(x).cls == "compressible"  # floor(c0 n) = 2 keeps both


def test_spread_policy_excludes_and_orders():
    n = 40
    flat = np.ones(n) / math.sqrt(n)
    c = StructureConstants()
    assert spread_policy(flat, c, exclude=[0]) == (1,)
    with pytest.raises(ValueError):
        spread_policy(flat, c, exclude=[0, 1])
    big = np.zeros(n)
    big[:2] = 1 / math.sqrt(2)
    with pytest.raises(ValueError):
        spread_policy(big, c)


def test_regularized_lcd_flat():
    n = 40
    flat = np.ones(n) / math.sqrt(n)
    r = regularized_lcd(flat)
    # a one-coordinate restriction is the vector (1,), whose LCD is about L
    assert r.exact
    assert r.maximizing_subset == (0,)
    assert r.value_lower == pytest.approx(lcd([1.0], 2.0).lower)
    assert r.value_lower >= r.lemma_bound


def test_regularized_lcd_modes_agree_on_larger_subsets():
    # near-flat vector in dimension 200: spread set of 8, subsets of 4
    consts = StructureConstants(c0=0.3, c1=0.7, gamma=0.02)
    rng = np.random.default_rng(3)
    x = unit(1 + 0.3 * rng.standard_normal(200))
    rep = classify(x, consts)
    assert rep.incompressible and rep.spread_size == 8
    ex = regularized_lcd(x, consts, "exact")
    he = regularized_lcd(x, consts, "heuristic", seed=1)
    assert ex.subsets_evaluated == math.comb(8, 4)
    assert he.value_lower <= ex.value_lower + 1e-12
    assert not he.exact
    assert ex.value_lower >= lemma_lcd_constant(consts) * math.sqrt(consts.gamma * 200)
    # the maximizer really attains the reported value
    xi = x[list(ex.maximizing_subset)]
    assert lcd(xi / np.linalg.norm(xi), consts.L).lower == ex.value_lower


def test_regularized_lcd_needs_incompressible():
    e = np.zeros(30)
    e[0] = 1
    with pytest.raises(ValueError):
        regularized_lcd(e)


def test_is_delocalized():
    ok, bad = is_delocalized([1] * 10, 1, 0.1)
    assert ok and bad == ()
    ok, bad = is_delocalized([1, 0, Fraction(7, 2)] + [1] * 7, 3, 0.1)
    assert not ok and bad == (1, 2)
    ok, bad = is_delocalized([1, 0] + [1] * 8, 1, 0.1)
    assert ok and bad == (1,)


@pytest.mark.parametrize("d,eps", [(1, 0.5), (2, 0.5), (3, 0.5), (3, 0.2), (4, 0.5)])
def test_sphere_net(d, eps):
    net = sphere_net(d, eps, seed=0)
    assert np.allclose(np.linalg.norm(net, axis=1), 1.0)
    assert len(net) <= (1 + 2 / eps) ** d
    G = np.sqrt(np.maximum(2 - 2 * net @ net.T, 0))
    np.fill_diagonal(G, np.inf)
    assert G.min() > eps
    probes = np.random.default_rng(99).standard_normal((50_000, d))
    probes /= np.linalg.norm(probes, axis=1)[:, None]
    dmin = np.sqrt(np.maximum(2 - 2 * probes @ net.T, 0)).min(axis=1)
    assert dmin.max() <= eps


def test_sphere_net_d1():
    assert len(sphere_net(1, 0.5, seed=0)) == 2
