from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ctrlgraph.matgen import (
    AtomDistribution,
    adjacency_wigner_shift,
    certify_nondegeneracy,
    check_certificate,
    check_int_symmetric,
    sample_gnp,
    sample_gnpq,
    sample_wigner,
    spectral_norm_event,
)
from ctrlgraph.seeding import SeedSpec

RAD = AtomDistribution.rademacher()


def test_rademacher_certificate():
    cert = certify_nondegeneracy(RAD)
    assert (cert.eps0, cert.p0, cert.K0) == (0.5, 0.5, 1.0)
    assert check_certificate(RAD, Fraction(1, 2), Fraction(1, 2), 1)


def test_uniform_three_point_certificate():
    # P(xi = xi') = 1/3 for uniform on {-1, 0, 1}
    cert = certify_nondegeneracy(AtomDistribution.uniform_int(-1, 1))
    assert cert.eps0 == 0.25
    assert cert.p0 == pytest.approx(2 / 3)
    assert cert.K0 == 1.0


def test_bernoulli_certificate():
    # 1 - (0.3^2 + 0.7^2) = 0.42
    cert = certify_nondegeneracy(AtomDistribution.bernoulli01(Fraction(3, 10)))
    assert cert.p0 == pytest.approx(0.42)


def test_degenerate_atom_rejected():
    with pytest.raises(ValueError, match="degenerate"):
        certify_nondegeneracy(AtomDistribution.constant(5))


def test_bad_certificate_rejected():
    # p0 too large: collision probability is 1/2
    assert not check_certificate(RAD, Fraction(1, 2), Fraction(3, 5), 1)
    # K0 too small: tail mass 1 > p0/4
    assert not check_certificate(RAD, Fraction(1, 2), Fraction(1, 2), Fraction(1, 2))


def test_gaussian_certificate_empirical():
    g = AtomDistribution.gaussian()
    assert g.tv_gap() == pytest.approx(0.00468, abs=1e-4)
    assert check_certificate(g, 0.5, 0.5, 8 ** 0.5, n_samples=200_000, seed=1)
    cert = certify_nondegeneracy(g, n_samples=200_000, seed=1)
    assert cert.method == "empirical"
    assert cert.p0 >= 0.5


def test_characteristic_rademacher():
    th = np.linspace(-1, 1, 41)
    assert np.allclose(RAD.characteristic(th), np.cos(2 * np.pi * th))


@given(st.integers(-3, 0), st.integers(0, 3), st.integers(0, 2**32))
@settings(max_examples=30, deadline=None)
def test_uniform_int_sampling_in_support(lo, hi, seed):
    x = AtomDistribution.uniform_int(lo, hi).sample(seed, 500)
    assert x.dtype == np.int64
    assert x.min() >= lo and x.max() <= hi


def test_sampling_frequencies():
    x = AtomDistribution.two_point(3, -2, Fraction(1, 4)).sample(11, 200_000)
    assert set(np.unique(x)) == {-2, 3}
    assert np.mean(x == 3) == pytest.approx(0.25, abs=0.005)


def test_atom_validation():
    with pytest.raises(ValueError):
        AtomDistribution("poisson")
    with pytest.raises(ValueError):
        AtomDistribution.bernoulli01(2)
    with pytest.raises(ValueError):
        AtomDistribution.uniform_int(3, 1)
    d = AtomDistribution.two_point(1, 0, Fraction(1, 3)).to_dict()
    assert AtomDistribution.from_dict(d) == AtomDistribution.two_point(1, 0, Fraction(1, 3))


def test_gnp_shape_and_reproducibility():
    A = sample_gnp(25, 0.5, SeedSpec(3, ("g",)))
    assert np.array_equal(A, A.T)
    assert not np.diag(A).any()
    assert np.isin(A, (0, 1)).all()
    assert np.array_equal(A, sample_gnp(25, 0.5, SeedSpec(3, ("g",))))
    assert not sample_gnp(10, 0.0, 1).any()
    assert sample_gnp(10, 1.0, 1).sum() == 90


def test_gnp_edge_density():
    A = sample_gnp(200, 0.3, 5)
    iu = np.triu_indices(200, 1)
    assert A[iu].mean() == pytest.approx(0.3, abs=0.01)


def test_gnpq_loops():
    s = SeedSpec(9, ("graph", 12, 0))
    assert np.array_equal(np.diag(sample_gnpq(12, 0.5, 1.0, s)), np.ones(12))
    # q = 0 reproduces the loopless sampler exactly
    assert np.array_equal(sample_gnpq(12, 0.5, 0.0, s), sample_gnp(12, 0.5, s))
    off = sample_gnpq(12, 0.5, 1.0, s)
    np.fill_diagonal(off, 0)
    assert np.array_equal(off, sample_gnp(12, 0.5, s))


def test_wigner():
    W = sample_wigner(20, RAD, AtomDistribution.constant(0), 4)
    assert np.array_equal(W, W.T)
    assert not np.diag(W).any()
    assert set(np.unique(W[np.triu_indices(20, 1)])) == {-1, 1}
    with pytest.raises(ValueError):
        sample_wigner(5, AtomDistribution.two_point(Fraction(1, 2), 0, Fraction(1, 2)), RAD, 0)


def test_adjacency_shift_roundtrip():
    A = sample_gnp(15, 0.5, 2)
    W = adjacency_wigner_shift(A, "forward")
    assert np.array_equal(W, 2 * A - np.ones((15, 15), dtype=np.int64))
    assert np.array_equal(adjacency_wigner_shift(W, "backward"), A)


def test_check_int_symmetric():
    with pytest.raises(ValueError):
        check_int_symmetric(np.array([[0, 1], [0, 0]]))
    with pytest.raises(ValueError):
        check_int_symmetric(np.array([[0.5, 0], [0, 0]]))
    with pytest.raises(ValueError):
        check_int_symmetric(np.eye(3, dtype=int), adjacency=True, loops=False)


def test_spectral_norm_matches_dense():
    for t in range(30):
        W = sample_wigner(40, RAD, RAD, SeedSpec(2, ("norm", t)))
        ev = spectral_norm_event(W, 3)
        ref = np.abs(np.linalg.eigvalsh(W.astype(float))).max()
        assert ev.resolved
        assert ev.norm_estimate == pytest.approx(ref, rel=1e-8)
        assert ev.holds == (ref <= 3 * np.sqrt(40))


def test_spectral_norm_boundary_is_exact():
    # all-ones 4x4 has norm exactly 4 = 2 * sqrt(4)
    assert spectral_norm_event(np.ones((4, 4), dtype=int), 2).holds is True
    assert spectral_norm_event(np.zeros((3, 3), dtype=int), 1).holds is True
