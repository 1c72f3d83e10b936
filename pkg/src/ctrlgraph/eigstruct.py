"""Additive structure of unit vectors.

Least common denominator (LCD), its regularized version over spread
coordinates, the compressible/incompressible split, delocalization of the
input vector, and epsilon-nets of low-dimensional spheres.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional

import numpy as np
from scipy.special import ndtri
from scipy.stats import qmc

from .seeding import as_seed

__all__ = [
    "StructureConstants",
    "LcdResult",
    "CompressibilityReport",
    "RegularizedLcdResult",
    "ConstantRegimeError",
    "lcd",
    "classify",
    "spread_policy",
    "regularized_lcd",
    "lemma_lcd_constant",
    "is_delocalized",
    "sphere_net",
]

UNIT_TOL = 1e-10


class ConstantRegimeError(ValueError):
    """The dimension is too small for the chosen structure constants."""


def _exact(c: float) -> Fraction:
    return Fraction(repr(float(c)))


@dataclass(frozen=True)
class StructureConstants:
    """Constants for the compressibility split and the regularized LCD.

    ``c2 = c0 c1^2 / 4`` sizes the spread set, ``delta = c0 c1^2 / 8`` bounds
    the number of bad coordinates of ``b``; ``gamma`` defaults to ``c2 / 2``.
    """

    c0: float = 0.1
    c1: float = 0.1
    gamma: Optional[float] = None
    L: float = 2.0

    def __post_init__(self):
        if not (0 < self.c0 < 1 and 0 < self.c1 < 1):
            raise ValueError("c0 and c1 must lie in (0, 1)")
        if self.gamma is None:
            object.__setattr__(self, "gamma", self.c2 / 2)
        if not 0 < self.gamma < self.c2:
            raise ValueError(f"gamma must lie in (0, c2) = (0, {self.c2})")
        if self.L < 1:
            raise ValueError("L must be >= 1")

    @property
    def c2(self) -> float:
        return 0.25 * self.c0 * self.c1 ** 2

    @property
    def delta(self) -> float:
        return 0.125 * self.c0 * self.c1 ** 2

    @classmethod
    def for_atom(cls, p0: float, **kw) -> "StructureConstants":
        """Defaults with ``L = max(p0 ** -0.5, 2)``."""
        return cls(L=max(p0 ** -0.5, 2.0), **kw)

    def floor_c0n(self, n: int) -> int:
        return math.floor(_exact(self.c0) * n)

    def spread_size(self, n: int) -> int:
        return math.ceil(_exact(self.c0) * _exact(self.c1) ** 2 / 4 * n)

    def subset_size(self, n: int) -> int:
        return math.ceil(_exact(self.gamma) * n)

    def max_excluded(self, n: int) -> int:
        return math.ceil(_exact(self.c0) * _exact(self.c1) ** 2 / 8 * n)

    def to_dict(self) -> dict:
        return {"c0": self.c0, "c1": self.c1, "gamma": self.gamma, "L": self.L}


@dataclass(frozen=True)
class LcdResult:
    lower: float
    upper: float
    witness_theta: Optional[float]
    resolved: bool


@dataclass(frozen=True)
class CompressibilityReport:
    cls: str
    sparse_distance: float
    spread_set: tuple = ()
    spread_size: int = 0

    @property
    def incompressible(self) -> bool:
        return self.cls == "incompressible"


@dataclass(frozen=True)
class RegularizedLcdResult:
    value_lower: float
    maximizing_subset: tuple
    exact: bool
    lemma_bound: float = 0.0
    subsets_evaluated: int = field(default=0, compare=False)


def _as_unit(x) -> np.ndarray:
    x = np.asarray(x, dtype=float).ravel()
    if x.size == 0 or abs(float(np.linalg.norm(x)) - 1.0) > UNIT_TOL:
        raise ValueError("x must be a unit vector (|norm - 1| <= 1e-10)")
    return x


# -------------------------------------------------------------------------------------
def _dist_to_lattice(thetas: np.ndarray, x: np.ndarray) -> np.ndarray:
    y = np.multiply.outer(thetas, x)
    return np.linalg.norm(y - np.rint(y), axis=-1)


def _gap(thetas, x, L):
    """``dist(theta x, Z^n) - L sqrt(log_+(theta / L))``; negative means the LCD condition holds."""
    thetas = np.asarray(thetas, dtype=float)
    return _dist_to_lattice(thetas, x) - L * np.sqrt(np.maximum(np.log(thetas / L), 0.0))


def lcd(x, L: float = 2.0, theta_max: Optional[float] = None, *, chunk: int = 1 << 15) -> LcdResult:
    """Bracket the least common denominator ``D_L(x)`` of a unit vector.

    Scans ``theta`` from ``L`` on a grid of step ``min(1e-3, 1 / (4 ||x||_inf sqrt(n)))``
    up to ``theta_max`` (default ``10 n^2``), then bisects the first sign
    change to ``1e-9``.  Without a crossing the result is unresolved with
    ``lower = theta_max``.
    """
    x = _as_unit(x)
    if L < 1:
        raise ValueError("L must be >= 1")
    n = x.size
    xinf = float(np.max(np.abs(x)))
    theta_max = 10.0 * n * n if theta_max is None else float(theta_max)
    if theta_max <= L:
        raise ValueError("theta_max must exceed L")
    floor_bound = max(L, 1.0 / (2.0 * xinf))
    h = min(1e-3, 1.0 / (4.0 * xinf * math.sqrt(n)))
    total = int(math.ceil((theta_max - L) / h))
    start = 0
    hit = None
    while start <= total:
        k = np.arange(start, min(start + chunk, total + 1))
        thetas = np.minimum(L + k * h, theta_max)
        neg = np.nonzero(_gap(thetas, x, L) < 0)[0]
        if neg.size:
            hit = int(k[neg[0]])
            break
        start += chunk
    if hit is None:
        return LcdResult(max(theta_max, floor_bound), math.inf, None, False)
    lo, hi = L + (hit - 1) * h, min(L + hit * h, theta_max)
    while hi - lo > 1e-9:
        mid = 0.5 * (lo + hi)
        if _gap(mid, x, L) < 0:
            hi = mid
        else:
            lo = mid
    lower = max(lo, floor_bound)
    upper = max(hi, lower)
    return LcdResult(lower, upper, hi, True)


# -------------------------------------------------------------------------------------
def classify(x, consts: StructureConstants = StructureConstants(), exclude: Iterable[int] = ()) -> CompressibilityReport:
    """Compressible/incompressible split by exact distance to ``floor(c0 n)``-sparse vectors."""
    x = _as_unit(x)
    n = x.size
    if n * consts.c0 < 2:
        raise ConstantRegimeError(f"constant regime violated: need n >= 2/c0, got n={n}")
    keep = consts.floor_c0n(n)
    mags = np.sort(np.abs(x))
    dist = float(np.linalg.norm(mags[: n - keep]))
    if dist <= consts.c1:
        return CompressibilityReport("compressible", dist)
    spread = spread_policy(x, consts, exclude)
    return CompressibilityReport("incompressible", dist, spread, len(spread))


def spread_policy(x, consts: StructureConstants = StructureConstants(), exclude: Iterable[int] = ()) -> tuple:
    """The first ``ceil(c2 n)`` indices, outside ``exclude``, with
    ``c1 / sqrt(2n) <= |x_k| <= 1 / sqrt(c0 n)``."""
    x = _as_unit(x)
    n = x.size
    exclude = set(int(i) for i in exclude)
    if len(exclude) > consts.max_excluded(n):
        raise ValueError(f"|Q_b| = {len(exclude)} exceeds ceil(delta n) = {consts.max_excluded(n)}")
    lo, hi = consts.c1 / math.sqrt(2 * n), 1.0 / math.sqrt(consts.c0 * n)
    mags = np.abs(x)
    window = [k for k in range(n) if lo <= mags[k] <= hi and k not in exclude]
    need = consts.spread_size(n)
    if len(window) < need:
        raise ValueError(f"only {len(window)} admissible spread coordinates, need {need}")
    return tuple(window[:need])


def lemma_lcd_constant(consts: StructureConstants) -> float:
    """``c`` with ``regularized LCD >= c sqrt(gamma n)`` for every incompressible vector.

    Every restricted coordinate satisfies ``|x_i| / ||x_I|| <= sqrt(2) / (c1 sqrt(c0 gamma n))``,
    so the sup-norm LCD bound gives ``c = c1 sqrt(c0) / (2 sqrt 2)``.
    """
    return consts.c1 * math.sqrt(consts.c0) / (2.0 * math.sqrt(2.0))


def regularized_lcd(x, consts: StructureConstants = StructureConstants(), mode: str = "auto", *,
                    exclude: Iterable[int] = (), theta_max: Optional[float] = None, seed=None,
                    max_exact: int = 10**5, n_random: int = 200) -> RegularizedLcdResult:
    """Lower bound on the max LCD of ``x_I / ||x_I||`` over ``ceil(gamma n)``-subsets of the spread set.

    ``exact`` enumerates every subset (lexicographic order, first maximum
    wins); ``heuristic`` takes the best of ``n_random`` seeded random subsets
    and then single-swap ascent.  ``auto`` is exact when at most
    ``max_exact`` subsets exist.
    """
    x = _as_unit(x)
    n = x.size
    report = classify(x, consts, exclude)
    if not report.incompressible:
        raise ValueError("regularized LCD is defined for incompressible vectors only")
    spread = report.spread_set
    m = consts.subset_size(n)
    total = math.comb(len(spread), m)
    if mode == "auto":
        mode = "exact" if total <= max_exact else "heuristic"
    theta_max = 10.0 * n * n if theta_max is None else theta_max
    cache: dict[tuple, float] = {}

    def value(I: tuple) -> float:
        if I not in cache:
            xi = x[list(I)]
            cache[I] = lcd(xi / np.linalg.norm(xi), consts.L, theta_max).lower
        return cache[I]

    if mode == "exact":
        if total > max_exact:
            raise ValueError(f"{total} subsets exceed the exact-enumeration limit {max_exact}")
        best_I, best = None, -math.inf
        for I in itertools.combinations(spread, m):
            v = value(I)
            if v > best:
                best_I, best = I, v
        exact = True
    elif mode == "heuristic":
        rng = as_seed(seed).child("rlcd-heuristic").generator()
        cands = [tuple(sorted(rng.choice(spread, size=m, replace=False).tolist())) for _ in range(n_random)]
        best_I = max(cands, key=lambda I: (value(I), [-i for i in I]))
        best = value(best_I)
        improved = True
        while improved:
            improved = False
            for pos in range(m):
                for k in spread:
                    if k in best_I:
                        continue
                    J = tuple(sorted(best_I[:pos] + (k,) + best_I[pos + 1:]))
                    if value(J) > best:
                        best_I, best, improved = J, value(J), True
                        break
                if improved:
                    break
        exact = False
    else:
        raise ValueError(f"unknown mode {mode!r}")
    bound = lemma_lcd_constant(consts) * math.sqrt(consts.gamma * n)
    if best < bound * (1 - 1e-12):
        raise AssertionError(f"regularized LCD {best} below the guaranteed {bound}")
    return RegularizedLcdResult(float(best), tuple(best_I), exact, bound, len(cache))


# -------------------------------------------------------------------------------------
def is_delocalized(b, K: int, delta: float) -> tuple[bool, tuple]:
    """``(verdict, Q_b)``: ``Q_b`` lists coordinates that are not nonzero
    fractions ``p/q`` with ``|p|, |q| <= K``; the verdict is ``|Q_b| <= floor(delta n)``."""
    if K < 1 or not 0 < delta < 1:
        raise ValueError("need K >= 1 and delta in (0, 1)")
    vals = [v if isinstance(v, Fraction) else Fraction(str(v)) if isinstance(v, (float, str)) else Fraction(int(v))
            for v in b]
    bad = tuple(k for k, v in enumerate(vals)
                if v == 0 or abs(v.numerator) > K or v.denominator > K)
    n = len(vals)
    return len(bad) <= math.floor(_exact(delta) * n), bad


# -------------------------------------------------------------------------------------
def _sphere_points(d: int, m: int, seed) -> np.ndarray:
    key = int(as_seed(seed).child("sobol").generator().integers(1 << 62))
    sob = qmc.Sobol(d, scramble=True, seed=np.random.default_rng(key))
    u = np.clip(sob.random(m), 1e-12, 1 - 1e-12)
    g = ndtri(u)
    return g / np.linalg.norm(g, axis=1, keepdims=True)


def _random_sphere(d: int, m: int, rng) -> np.ndarray:
    g = rng.standard_normal((m, d))
    return g / np.linalg.norm(g, axis=1, keepdims=True)


def _greedy_extend(net: list, pts: np.ndarray, eps: float) -> list:
    for p in pts:
        if not net or np.min(np.linalg.norm(np.asarray(net) - p, axis=1)) > eps:
            net.append(p)
    return net


def sphere_net(d: int, eps: float, *, seed=None, n_probes: int = 10**6, n_candidates: int = 1 << 12,
               rounds: int = 3) -> np.ndarray:
    """Maximal ``eps``-separated subset of ``S^(d-1)``, verified as an ``eps``-net.

    Points are picked greedily from a scrambled Sobol stream mapped to the
    sphere, then checked against ``n_probes`` random probes.  Uncovered
    probes are added greedily (keeping separation) and the check repeats,
    at most ``rounds`` times.
    """
    if not 1 <= d <= 4:
        raise ValueError("sphere_net supports dimensions 1..4")
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0, 1)")
    seed = as_seed(seed)
    net = _greedy_extend([], _sphere_points(d, n_candidates, seed), eps)
    for r in range(rounds + 1):
        rng = seed.child("probes", r).generator()
        uncovered = []
        done = 0
        while done < n_probes:
            m = min(1 << 16, n_probes - done)
            probes = _random_sphere(d, m, rng)
            N = np.asarray(net)
            dmin = np.sqrt(np.maximum(
                (probes ** 2).sum(1)[:, None] + (N ** 2).sum(1)[None, :] - 2 * probes @ N.T, 0.0)).min(1)
            uncovered.extend(probes[dmin > eps])
            done += m
        if not uncovered:
            return np.asarray(net)
        if r == rounds:
            break
        net = _greedy_extend(net, np.asarray(uncovered), eps)
    raise RuntimeError(f"sphere_net failed to cover S^{d - 1} at eps={eps} after {rounds} rounds")
