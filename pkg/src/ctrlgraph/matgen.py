"""Random models: atom distributions, Wigner matrices, G(n, p) and G(n, p, q).

Matrices are plain ``numpy.int64`` arrays.  All samplers take a seed (int or
:class:`~ctrlgraph.seeding.SeedSpec`) and are pure functions of it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Optional

import numpy as np
from scipy.special import ndtr, ndtri

from .seeding import SeedSpec, as_seed

__all__ = [
    "AtomDistribution",
    "NondegeneracyCert",
    "SpectralNormEvent",
    "sample_gnp",
    "sample_gnpq",
    "sample_wigner",
    "adjacency_wigner_shift",
    "spectral_norm_event",
    "certify_nondegeneracy",
    "check_certificate",
    "check_int_symmetric",
]

ATOM_KINDS = ("constant", "rademacher", "bernoulli01", "two_point", "uniform_int", "gaussian")


def _frac(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(str(x)) if isinstance(x, float) else Fraction(x)


@dataclass(frozen=True)
class AtomDistribution:
    """Distribution of a single matrix entry.

    ``params`` depend on ``kind``:

    * ``constant``: ``(c,)``
    * ``rademacher``: ``()``
    * ``bernoulli01``: ``(p,)`` -- value 1 w.p. p, else 0
    * ``two_point``: ``(a, b, p)`` -- value a w.p. p, else b
    * ``uniform_int``: ``(lo, hi)`` -- uniform on ``lo..hi`` inclusive
    * ``gaussian``: ``(step, trunc)`` -- standard normal truncated to
      ``[-trunc, trunc]`` and rounded to the grid ``step * Z``

    Every value is multiplied by ``scale``.
    """

    kind: str
    params: tuple = ()
    scale: Fraction = Fraction(1)

    def __post_init__(self):
        if self.kind not in ATOM_KINDS:
            raise ValueError(f"unknown atom kind {self.kind!r}")
        object.__setattr__(self, "params", tuple(_frac(p) for p in self.params))
        object.__setattr__(self, "scale", _frac(self.scale))
        if self.scale == 0:
            raise ValueError("scale must be nonzero")
        nparams = {"constant": 1, "rademacher": 0, "bernoulli01": 1, "two_point": 3,
                   "uniform_int": 2, "gaussian": 2}[self.kind]
        if len(self.params) != nparams:
            raise ValueError(f"{self.kind} takes {nparams} parameters, got {len(self.params)}")
        if self.kind in ("bernoulli01", "two_point"):
            p = self.params[-1]
            if not 0 <= p <= 1:
                raise ValueError("probability parameter must lie in [0, 1]")
        if self.kind == "uniform_int":
            lo, hi = self.params
            if lo.denominator != 1 or hi.denominator != 1 or lo > hi:
                raise ValueError("uniform_int needs integers lo <= hi")
        if self.kind == "gaussian":
            step, trunc = self.params
            if step <= 0 or trunc <= 0:
                raise ValueError("gaussian needs positive step and truncation")

    # constructors -----------------------------------------------------------------
    @classmethod
    def constant(cls, c=0):
        return cls("constant", (c,))

    @classmethod
    def rademacher(cls):
        return cls("rademacher")

    @classmethod
    def bernoulli01(cls, p):
        return cls("bernoulli01", (p,))

    @classmethod
    def two_point(cls, a, b, p):
        return cls("two_point", (a, b, p))

    @classmethod
    def uniform_int(cls, lo, hi):
        return cls("uniform_int", (lo, hi))

    @classmethod
    def gaussian(cls, step=Fraction(1, 1024), trunc=Fraction(2828427, 1000000)):
        return cls("gaussian", (step, trunc))

    @classmethod
    def from_dict(cls, d: dict) -> "AtomDistribution":
        params = d.get("params", ())
        if isinstance(params, dict):
            order = {"constant": ("c",), "bernoulli01": ("p",), "two_point": ("a", "b", "p"),
                     "uniform_int": ("lo", "hi"), "gaussian": ("step", "trunc")}.get(d["kind"], ())
            params = tuple(params[k] for k in order)
        return cls(d["kind"], tuple(Fraction(str(p)) for p in params), Fraction(str(d.get("scale", 1))))

    def to_dict(self) -> dict:
        return {"kind": self.kind, "params": [str(p) for p in self.params], "scale": str(self.scale)}

    # support ------------------------------------------------------------------------
    @property
    def is_finite(self) -> bool:
        """True when the support is enumerable with exact rational probabilities."""
        return self.kind != "gaussian"

    def support(self) -> list[tuple[Fraction, Fraction]]:
        """Exact ``(value, probability)`` pairs, values ascending, zero-mass atoms dropped."""
        k, s = self.kind, self.scale
        if k == "constant":
            pts = [(self.params[0], Fraction(1))]
        elif k == "rademacher":
            pts = [(Fraction(-1), Fraction(1, 2)), (Fraction(1), Fraction(1, 2))]
        elif k == "bernoulli01":
            p = self.params[0]
            pts = [(Fraction(0), 1 - p), (Fraction(1), p)]
        elif k == "two_point":
            a, b, p = self.params
            pts = [(a, p), (b, 1 - p)]
        elif k == "uniform_int":
            lo, hi = (int(v) for v in self.params)
            w = Fraction(1, hi - lo + 1)
            pts = [(Fraction(v), w) for v in range(lo, hi + 1)]
        else:
            raise ValueError("gaussian atoms have no exact rational support")
        merged: dict[Fraction, Fraction] = {}
        for v, p in pts:
            if p:
                merged[v * s] = merged.get(v * s, Fraction(0)) + p
        return sorted(merged.items())

    def grid_values(self) -> np.ndarray:
        """Support points as floats (for gaussian: the truncated grid)."""
        if self.is_finite:
            return np.array([float(v) for v, _ in self.support()])
        step, trunc = self.params
        kmax = math.floor(trunc / step)
        return np.arange(-kmax, kmax + 1) * float(step * self.scale)

    @property
    def is_integer_valued(self) -> bool:
        if self.kind == "gaussian":
            return (self.params[0] * self.scale).denominator == 1
        return all(v.denominator == 1 for v, _ in self.support())

    def integer_scale(self) -> int:
        """Least positive integer m such that m * value is an integer for all support points."""
        if self.kind == "gaussian":
            return (self.params[0] * self.scale).denominator
        return math.lcm(*(v.denominator for v, _ in self.support()))

    def scaled(self, factor) -> "AtomDistribution":
        return replace(self, scale=self.scale * _frac(factor))

    @property
    def is_symmetric(self) -> bool:
        """Whether the law of the atom equals the law of its negation."""
        if self.kind == "gaussian":
            return True
        sup = dict(self.support())
        return all(sup.get(-v) == p for v, p in sup.items())

    @property
    def is_degenerate(self) -> bool:
        return self.is_finite and len(self.support()) == 1

    def tv_gap(self) -> float:
        """Total-variation distance introduced by truncation (gaussian only)."""
        if self.kind != "gaussian":
            return 0.0
        return float(2.0 * ndtr(-float(self.params[1])))

    def characteristic(self, theta) -> np.ndarray:
        """``E exp(2 pi i theta xi)`` evaluated elementwise."""
        theta = np.asarray(theta, dtype=float)
        if self.is_finite:
            sup = self.support()
            vals = np.array([float(v) for v, _ in sup])
            probs = np.array([float(p) for _, p in sup])
        else:
            vals = self.grid_values()
            probs = self._gaussian_probs(vals)
        return np.exp(2j * np.pi * np.multiply.outer(theta, vals)) @ probs

    def _gaussian_probs(self, vals: np.ndarray) -> np.ndarray:
        step, trunc = (float(p) for p in self.params)
        z = vals / float(self.scale)
        lo = np.maximum(z - step / 2, -trunc)
        hi = np.minimum(z + step / 2, trunc)
        mass = ndtr(hi) - ndtr(lo)
        return mass / mass.sum()

    # sampling -----------------------------------------------------------------------
    def sample(self, seed, size) -> np.ndarray:
        """Draw ``size`` iid values from the stream ``seed``.

        Integer-valued atoms come back as ``int64``; others as ``float64``.
        """
        rng = as_seed(seed).generator()
        k = self.kind
        if k == "constant":
            out = np.full(size, float(self.params[0]))
        elif k == "rademacher":
            out = rng.integers(0, 2, size=size) * 2.0 - 1.0
        elif k == "bernoulli01":
            out = (rng.random(size) < float(self.params[0])).astype(float)
        elif k == "two_point":
            a, b, p = self.params
            out = np.where(rng.random(size) < float(p), float(a), float(b))
        elif k == "uniform_int":
            lo, hi = (int(v) for v in self.params)
            out = rng.integers(lo, hi + 1, size=size).astype(float)
        else:
            step, trunc = (float(p) for p in self.params)
            a = ndtr(-trunc)
            g = ndtri(a + rng.random(size) * (1.0 - 2.0 * a))
            out = np.clip(np.round(g / step), -math.floor(trunc / step), math.floor(trunc / step))
            if self.is_integer_valued:
                return (out * int(self.params[0] * self.scale)).astype(np.int64)
            return out * step * float(self.scale)
        out = out * float(self.scale)
        return np.rint(out).astype(np.int64) if self.is_integer_valued else out


@dataclass(frozen=True)
class NondegeneracyCert:
    eps0: float
    p0: float
    K0: float
    method: str = "analytic"
    n_samples: int = 0


@dataclass(frozen=True)
class SpectralNormEvent:
    M: float
    holds: Optional[bool]
    norm_estimate: float
    resolved: bool = True
    iterations: int = 0


# --------------------------------------------------------------------------------------
def check_int_symmetric(A, *, adjacency: bool = False, loops: bool = True) -> np.ndarray:
    """Validate and return ``A`` as a square symmetric int64 array."""
    A = np.asarray(A)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {A.shape}")
    if A.dtype == object:
        A = np.array(A.tolist(), dtype=np.int64)
    if not np.issubdtype(A.dtype, np.integer):
        if not np.all(A == np.rint(A)):
            raise ValueError("matrix entries must be integers")
        A = np.rint(A)
    A = A.astype(np.int64, copy=False)
    if not np.array_equal(A, A.T):
        raise ValueError("matrix is not symmetric")
    if adjacency:
        if not np.isin(A, (0, 1)).all():
            raise ValueError("adjacency entries must be 0 or 1")
        if not loops and np.any(np.diag(A)):
            raise ValueError("loops present in a simple-graph adjacency matrix")
    return A


def _check_prob(name, p):
    if not 0 <= p <= 1:
        raise ValueError(f"{name} must lie in [0, 1], got {p}")


def _fill_upper(n: int, values: np.ndarray, diag: np.ndarray) -> np.ndarray:
    A = np.zeros((n, n), dtype=np.int64)
    iu = np.triu_indices(n, 1)
    A[iu] = values
    A = A + A.T
    A[np.diag_indices(n)] = diag
    return A


def sample_gnp(n: int, p: float, seed=None) -> np.ndarray:
    """Adjacency matrix of the Erdos-Renyi graph G(n, p)."""
    if n < 1:
        raise ValueError("n must be positive")
    _check_prob("p", p)
    rng = as_seed(seed).generator()
    edges = (rng.random(n * (n - 1) // 2) < p).astype(np.int64)
    return _fill_upper(n, edges, np.zeros(n, dtype=np.int64))


def sample_gnpq(n: int, p: float, q: float, seed=None) -> np.ndarray:
    """G(n, p) with an independent loop at each vertex with probability ``q``.

    Off-diagonal bits use the same stream as :func:`sample_gnp`, so ``q = 0``
    reproduces it exactly; loops come from the ``"loops"`` child stream.
    """
    _check_prob("q", q)
    seed = as_seed(seed)
    A = sample_gnp(n, p, seed)
    loops = (seed.child("loops").generator().random(n) < q).astype(np.int64)
    A[np.diag_indices(n)] = loops
    return A


def sample_wigner(n: int, xi: AtomDistribution, zeta: AtomDistribution, seed=None) -> np.ndarray:
    """Symmetric matrix with iid ``xi`` above the diagonal and iid ``zeta`` on it."""
    if n < 1:
        raise ValueError("n must be positive")
    for name, atom in (("xi", xi), ("zeta", zeta)):
        if not atom.is_integer_valued:
            raise ValueError(
                f"{name} has non-integer support; rescale with atom.scaled(atom.integer_scale())")
    seed = as_seed(seed)
    off = xi.sample(seed.child("xi"), n * (n - 1) // 2)
    diag = zeta.sample(seed.child("zeta"), n)
    return _fill_upper(n, off, diag)


def adjacency_wigner_shift(A, direction: str = "forward") -> np.ndarray:
    """``forward``: 0/1 adjacency to the sign matrix ``2A - J``; ``backward``: the inverse."""
    A = check_int_symmetric(A)
    J = np.ones_like(A)
    if direction == "forward":
        if not np.isin(A, (0, 1)).all():
            raise ValueError("forward shift expects 0/1 entries")
        return 2 * A - J
    if direction == "backward":
        if not np.isin(A, (-1, 1)).all():
            raise ValueError("backward shift expects +-1 entries")
        return (A + J) // 2
    raise ValueError(f"direction must be 'forward' or 'backward', not {direction!r}")


def _norm_le(W: np.ndarray, theta: float, bound: float, tol: float) -> bool:
    """``theta <= bound``, settled exactly when ``bound`` is an integer eigenvalue within tolerance."""
    c = round(bound)
    if abs(theta - bound) <= 10 * tol * max(theta, 1.0) and abs(bound - c) <= 1e-12 * max(bound, 1.0):
        from .exactlin import det_bareiss  # local import: exactlin does not depend on matgen

        Wi = np.rint(W).astype(np.int64)
        I = np.eye(W.shape[0], dtype=np.int64)
        if det_bareiss(Wi - c * I) == 0 or det_bareiss(Wi + c * I) == 0:
            return True
    return theta <= bound


def spectral_norm_event(W, M: float, *, tol: float = 1e-8, max_iter: int = 10_000,
                        block: int = 4) -> SpectralNormEvent:
    """Decide ``||W|| <= M sqrt(n)``.

    ``||W||`` (largest ``|eigenvalue|``) comes from block subspace iteration
    with Rayleigh-Ritz, stopped when the residual of the dominant Ritz pair
    drops below ``tol`` relative.  Both ends of the spectrum live in the same
    block, so near ties between ``lambda_max`` and ``-lambda_min`` cost nothing.
    An exhausted iteration cap gives ``resolved=False`` and ``holds=None``.
    """
    W = np.asarray(check_int_symmetric(W), dtype=float)
    if M < 1:
        raise ValueError("M must be >= 1")
    n = W.shape[0]
    k = min(block, n)
    Q = SeedSpec(0, ("subspace-iteration", n)).generator().standard_normal((n, k))
    Q, _ = np.linalg.qr(Q)
    theta = 0.0
    for it in range(1, max_iter + 1):
        Z = W @ Q
        if not Z.any():
            return SpectralNormEvent(M, True, 0.0, True, it)
        vals, vecs = np.linalg.eigh(Q.T @ Z)
        j = int(np.argmax(np.abs(vals)))
        theta = abs(float(vals[j]))
        y = Q @ vecs[:, j]
        if np.linalg.norm(W @ y - vals[j] * y) <= tol * theta:
            return SpectralNormEvent(M, _norm_le(W, theta, M * math.sqrt(n), tol), theta, True, it)
        Q, _ = np.linalg.qr(Z)
    return SpectralNormEvent(M, None, theta, False, max_iter)


# --------------------------------------------------------------------------------------
def _collision_prob(sup, eps) -> Fraction:
    return sum((pa * pb for a, pa in sup for b, pb in sup if abs(a - b) <= eps), Fraction(0))


def _tail_prob(sup, K) -> Fraction:
    return sum((p for v, p in sup if abs(v) > K), Fraction(0))


def check_certificate(atom: AtomDistribution, eps0, p0, K0, *, n_samples: int = 10**6,
                      seed=None) -> bool:
    """Whether ``(eps0, p0, K0)`` satisfies both non-degeneracy bounds for ``atom``.

    Exact rational arithmetic on finite support; for gaussian atoms both
    probabilities are estimated and their 99% upper confidence limits used.
    """
    if atom.is_finite:
        sup = atom.support()
        eps0, p0, K0 = _frac(eps0), _frac(p0), _frac(K0)
        return _collision_prob(sup, eps0) <= 1 - p0 and _tail_prob(sup, K0) <= p0 / 4
    q_hi, _ = _empirical_collision(atom, float(eps0), n_samples, seed)
    tail = _empirical_tail(atom, n_samples, seed)
    t_hi = _upper99(float(np.mean(tail > float(K0))), n_samples)
    return q_hi <= 1 - float(p0) and t_hi <= float(p0) / 4


_Z99 = 2.5758293035489004


def _upper99(phat: float, n: int) -> float:
    return phat + _Z99 * math.sqrt(max(phat * (1 - phat), 1.0 / n) / n)


def _empirical_collision(atom, eps, n_samples, seed):
    seed = as_seed(seed).child("certify")
    a = atom.sample(seed.child("x"), n_samples)
    b = atom.sample(seed.child("x'"), n_samples)
    q = float(np.mean(np.abs(a - b) <= eps))
    return _upper99(q, n_samples), q


def _empirical_tail(atom, n_samples, seed):
    return np.abs(atom.sample(as_seed(seed).child("certify", "tail"), n_samples).astype(float))


def certify_nondegeneracy(atom: AtomDistribution, *, n_samples: int = 10**6, seed=None) -> NondegeneracyCert:
    """Find constants ``(eps0, p0, K0)`` for the non-degeneracy assumption.

    Finite support: ``eps0`` is a quarter of the smallest gap between support
    points, so ``P(|xi - xi'| <= eps0) = P(xi = xi')`` and ``p0`` is one minus
    the collision probability; ``K0`` is the largest absolute support value.
    Rademacher gets ``(1/2, 1/2, 1)``.

    Gaussian atoms use ``n_samples`` draws and 99% upper confidence limits.
    """
    if atom.is_finite:
        sup = atom.support()
        if len(sup) == 1:
            raise ValueError("no valid certificate: degenerate (single-point) distribution")
        vals = [v for v, _ in sup]
        eps0 = min(b - a for a, b in zip(vals, vals[1:])) / 4
        p0 = 1 - _collision_prob(sup, eps0)
        K0 = max(abs(v) for v in vals)
        if K0 == 0:
            K0 = eps0
        assert check_certificate(atom, eps0, p0, K0)
        return NondegeneracyCert(float(eps0), float(p0), float(K0), "analytic")
    eps0 = 0.5 * float(abs(atom.scale))
    q_hi, _ = _empirical_collision(atom, eps0, n_samples, seed)
    p0 = 1.0 - q_hi
    if p0 <= 0:
        raise ValueError("no valid certificate: collision probability too large")
    tails = np.sort(_empirical_tail(atom, n_samples, seed))
    K0 = float(tails[-1])
    # smallest order statistic whose upper tail bound fits under p0 / 4
    for frac in (0.5, 0.75, 0.9, 0.95, 0.99, 0.999):
        cand = float(tails[int(frac * (n_samples - 1))])
        if _upper99(float(np.mean(tails > cand)), n_samples) <= p0 / 4:
            K0 = cand
            break
    return NondegeneracyCert(eps0, p0, max(K0, eps0), "empirical", n_samples)
