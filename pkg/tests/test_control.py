from fractions import Fraction

import numpy as np
import pytest

from _oracles import fraction_rank, krylov_rows
from ctrlgraph.control import (
    NonSimpleSpectrumError,
    eigendecomposition,
    eigvec_dot_profile,
    is_controllable,
    pbh_screen,
    shift_equivalence_check,
    simple_spectrum,
)
from ctrlgraph.matgen import AtomDistribution, sample_gnp, sample_wigner
from ctrlgraph.seeding import SeedSpec

RAD = AtomDistribution.rademacher()


def path(n):
    A = np.zeros((n, n), dtype=np.int64)
    for i in range(n - 1):
        A[i, i + 1] = A[i + 1, i] = 1
    return A


def test_k2_with_ones_uncontrollable():
    v = is_controllable(path(2))
    assert v.controllable is False
    assert v.rank == 1
    assert v.exact


def test_path_from_endpoint_controllable():
    for n in range(2, 12):
        e1 = [1] + [0] * (n - 1)
        assert is_controllable(path(n), e1).controllable
        # symmetry of the path kills the all-ones input for n >= 2
        assert not is_controllable(path(n)).controllable


def test_single_vertex():
    assert is_controllable(np.zeros((1, 1), dtype=int)).controllable
    assert not is_controllable(np.zeros((1, 1), dtype=int), [0]).controllable


def test_agrees_with_fraction_oracle():
    for t in range(60):
        n = 3 + t % 8
        A = sample_gnp(n, 0.5, SeedSpec(4, ("ctl", t)))
        b = [Fraction(1)] * n
        assert is_controllable(A, b, seed=t).rank == fraction_rank(krylov_rows(A, b))


def test_rational_input_vector():
    A = path(4)
    b = [Fraction(1, 2), Fraction(-1, 3), 0, 0]
    ref = fraction_rank(krylov_rows(A, b))
    assert is_controllable(A, b).rank == ref
    with pytest.raises(ValueError):
        is_controllable(A, [1, 1])


def test_pbh_screen_is_advisory_and_agrees():
    for t in range(40):
        A = sample_gnp(10, 0.5, SeedSpec(6, ("pbh", t)))
        scr = pbh_screen(A)
        assert not scr.exact and scr.rank is None
        if scr.controllable:
            assert is_controllable(A).controllable
    assert pbh_screen(path(2)).controllable is False


def test_eigendecomposition_residuals():
    W = sample_wigner(30, RAD, RAD, 1)
    eig = eigendecomposition(W)
    assert eig.residuals.max() < 1e-10
    V = eig.eigenvectors
    assert np.allclose(V.T @ V, np.eye(30), atol=1e-12)


def test_simple_spectrum():
    K3 = np.ones((3, 3), dtype=int) - np.eye(3, dtype=int)
    assert not simple_spectrum(K3)
    assert simple_spectrum(path(6))
    assert not simple_spectrum(np.zeros((2, 2), dtype=int))


def test_dot_profile():
    K3 = np.ones((3, 3), dtype=int) - np.eye(3, dtype=int)
    with pytest.raises(NonSimpleSpectrumError):
        eigvec_dot_profile(K3)
    d = eigvec_dot_profile(path(3))
    # eigenvectors of P3: (1, +-sqrt2, 1)/2 and (1, 0, -1)/sqrt2
    assert d[0] == pytest.approx(0.0, abs=1e-12)
    assert sorted(d[1:]) == pytest.approx([1 - 2 ** -0.5, 1 + 2 ** -0.5])


@pytest.mark.parametrize("gamma", [1, -2, Fraction(1, 3)])
def test_shift_equivalence(gamma):
    for t in range(10):
        W = sample_wigner(7, RAD, RAD, SeedSpec(8, ("shift", t)))
        assert shift_equivalence_check(W, None, gamma)
    assert shift_equivalence_check(path(4), [1, 0, 0, 0], gamma)
