"""Levy concentration estimates and the LCD-driven small-ball bounds.

Every bound takes its constant ``C`` explicitly.  :func:`calibrate_constant`
fits the smallest ``C`` that makes a bound valid on a corpus, so "the bound
holds" becomes a reproducible check rather than a vacuous one.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy import integrate

from .eigstruct import lcd
from .matgen import AtomDistribution, certify_nondegeneracy
from .seeding import as_seed

__all__ = [
    "ConcentrationEstimate",
    "BoundEvaluation",
    "SimpleBoundReport",
    "levy_estimate",
    "weighted_sum_samples",
    "lcd_bound",
    "regularized_bound",
    "matrix_bound",
    "esseen_bound",
    "simple_bound_check",
    "tensorization_check",
    "calibrate_constant",
    "designed_family",
]

_Z95 = 1.959963984540054


@dataclass(frozen=True)
class ConcentrationEstimate:
    t: float
    value: float
    ci_halfwidth: float
    n_samples: int
    sup_location: np.ndarray = field(compare=False)


@dataclass(frozen=True)
class BoundEvaluation:
    kind: str
    value: float
    constants_used: dict


def _ci(p: float, n: int) -> float:
    return _Z95 * math.sqrt(p * (1.0 - p) / n)


def levy_estimate(samples, t: float, n_samples: int = 10**5, *, seed=None,
                  chunk: int = 1024) -> ConcentrationEstimate:
    """Empirical ``sup_u P(||Z - u|| <= t)``.

    ``samples`` is an array of draws (``(N,)`` or ``(N, d)``) or a callable
    ``sampler(seed, size)``.  Scalar draws use a sliding window of width
    ``2t`` over the sorted sample, which is the exact empirical supremum.
    Vector draws center candidate balls on the sample points only.
    """
    if t < 0:
        raise ValueError("t must be non-negative")
    if callable(samples):
        samples = samples(as_seed(seed), n_samples)
    Z = np.asarray(samples, dtype=float)
    N = Z.shape[0]
    if N < 100:
        raise ValueError("levy_estimate needs at least 100 samples")
    if Z.ndim == 1 or Z.shape[1] == 1:
        s = np.sort(Z.ravel())
        counts = np.searchsorted(s, s + 2.0 * t, side="right") - np.arange(N)
        i = int(np.argmax(counts))
        p = counts[i] / N
        return ConcentrationEstimate(t, float(p), _ci(p, N), N, np.array([s[i] + t]))
    best, loc = -1, None
    for start in range(0, N, chunk):
        C = Z[start:start + chunk]
        d2 = (C ** 2).sum(1)[:, None] + (Z ** 2).sum(1)[None, :] - 2.0 * C @ Z.T
        counts = (d2 <= t * t + 1e-12).sum(1)
        j = int(np.argmax(counts))
        if counts[j] > best:
            best, loc = int(counts[j]), C[j].copy()
    p = best / N
    return ConcentrationEstimate(t, float(p), _ci(p, N), N, loc)


def weighted_sum_samples(x, atom: AtomDistribution, n_samples: int, seed=None, *, block: int = 1 << 14) -> np.ndarray:
    """Draws of ``sum_k x_k xi_k`` with iid ``xi_k`` from ``atom``.

    Coordinate ``k`` reads its own child stream, so dropping coordinates
    leaves the remaining ones coupled across calls.
    """
    x = np.asarray(x, dtype=float)
    seed = as_seed(seed)
    out = np.zeros(n_samples)
    for k, xk in enumerate(x):
        if xk != 0.0:
            out += xk * atom.sample(seed.child("coord", k), n_samples).astype(float)
    return out


def _check_bound_args(L, D, p0=None, K=1.0):
    if p0 is not None and L < p0 ** -0.5 * K * (1 - 1e-12):
        raise ValueError(f"L={L} is below p0^(-1/2) K = {p0 ** -0.5 * K}")
    if D < L:
        raise ValueError(f"LCD value {D} is below L={L}")


def lcd_bound(t: float, L: float, D: float, C: float, *, p0: Optional[float] = None, K: float = 1.0) -> float:
    """``min(1, C L (t + 1/D))``; pass ``p0`` (and ``K`` for coefficient sums) to enforce the ``L`` range."""
    if t < 0 or C <= 0:
        raise ValueError("need t >= 0 and C > 0")
    _check_bound_args(L, D, p0, K)
    return min(1.0, C * L * (t + 1.0 / D))


def _reg_base(t, L, gamma, D_hat, C, c2):
    if t < 0 or C <= 0 or gamma <= 0 or (c2 is not None and gamma >= c2):
        raise ValueError("need t >= 0, C > 0 and 0 < gamma < c2")
    _check_bound_args(L, D_hat)
    return C * L * t / math.sqrt(gamma) + C * L / D_hat


def regularized_bound(t: float, L: float, gamma: float, D_hat: float, C: float, *, c2: Optional[float] = None) -> float:
    """``min(1, C L (t / sqrt(gamma) + 1 / D_hat))``."""
    return min(1.0, _reg_base(t, L, gamma, D_hat, C, c2))


def matrix_bound(t: float, L: float, gamma: float, D_hat: float, C: float, n: int, *,
                 c2: Optional[float] = None) -> float:
    """The regularized base raised to ``n - ceil(gamma n)``, clamped to ``[0, 1]``."""
    base = _reg_base(t, L, gamma, D_hat, C, c2)
    if base >= 1.0:
        return 1.0
    return base ** (n - math.ceil(gamma * n))


def esseen_bound(char_fn: Callable[[float], complex], quad_points: int = 200, C: float = 1.0) -> float:
    """``C * integral_{-1}^{1} |phi(theta)| d theta`` by adaptive quadrature (relative 1e-6)."""
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            val, _ = integrate.quad(lambda th: abs(char_fn(th)), -1.0, 1.0, epsrel=1e-6, epsabs=1e-12,
                                    limit=quad_points)
        except integrate.IntegrationWarning as exc:
            raise RuntimeError(f"Esseen quadrature did not converge: {exc}") from exc
    return C * val


@dataclass(frozen=True)
class SimpleBoundReport:
    eps0: float
    p0: float
    atom_levy: ConcentrationEstimate
    atom_bound: float
    atom_ok: bool
    radius: float
    sum_levy: ConcentrationEstimate
    sum_bound: float
    sum_ok: bool


def simple_bound_check(x, atom: AtomDistribution, *, C: float = 1.0, L: Optional[float] = None,
                       n_samples: int = 10**5, seed=None) -> SimpleBoundReport:
    """Empirical check of the atom-level and sum-level concentration bounds.

    The atom must satisfy ``L(xi, eps0/2) <= sqrt(1 - p0/2)``.  For the sum
    the radius is ``c = eps0 eta / 2`` with ``eta = 1 / (4 C L (2 + eps0))``
    and the bound ``1 - c'`` with ``c' = min(1 - sqrt(1 - p0/2), 3/4)``.
    """
    cert = certify_nondegeneracy(atom)
    seed = as_seed(seed)
    L = max(cert.p0 ** -0.5, 2.0) if L is None else L
    atom_levy = levy_estimate(atom.sample(seed.child("atom"), n_samples).astype(float), cert.eps0 / 2)
    atom_bound = math.sqrt(1.0 - cert.p0 / 2.0)
    eta = 1.0 / (4.0 * C * L * (2.0 + cert.eps0))
    radius = cert.eps0 * eta / 2.0
    sum_bound = 1.0 - min(1.0 - atom_bound, 0.75)
    sum_levy = levy_estimate(weighted_sum_samples(x, atom, n_samples, seed.child("sum")), radius)
    return SimpleBoundReport(cert.eps0, cert.p0, atom_levy, atom_bound,
                             atom_levy.value <= atom_bound + atom_levy.ci_halfwidth,
                             radius, sum_levy, sum_bound,
                             sum_levy.value <= sum_bound + sum_levy.ci_halfwidth)


def tensorization_check(M: float, t0: float, n: int, t: float, C: float = 1.0) -> float:
    """``min(1, [C M (t + t0)]^n)``: the product-measure bound at radius ``t sqrt(n)``."""
    if M < 0 or t0 < 0 or t < 0 or n < 1:
        raise ValueError("need M, t0, t >= 0 and n >= 1")
    return min(1.0, (C * M * (t + t0)) ** n)


def calibrate_constant(empirical, base) -> float:
    """Smallest ``C`` with ``C * base >= empirical`` on every corpus entry."""
    emp = np.asarray(empirical, dtype=float)
    base = np.asarray(base, dtype=float)
    if np.any(base <= 0):
        raise ValueError("bound bases must be positive")
    return float(np.max(emp / base))


def designed_family(n: int = 16, seed=None) -> list[np.ndarray]:
    """Twenty unit vectors in ``R^n`` spanning structured to unstructured.

    Flat vectors on the first ``k`` coordinates for ``k = 1..n`` (the most
    arithmetically structured directions), padded with seeded Gaussian
    directions up to twenty vectors.
    """
    out = []
    for k in range(1, n + 1):
        v = np.zeros(n)
        v[:k] = 1.0 / math.sqrt(k)
        out.append(v)
    rng = as_seed(seed).child("family").generator()
    while len(out) < 20:
        g = rng.standard_normal(n)
        out.append(g / np.linalg.norm(g))
    return out[:20]
