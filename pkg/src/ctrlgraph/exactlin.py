"""Exact linear algebra over the integers, the rationals and prime fields.

Matrices here are lists of rows of Python ints (``BigIntMatrix``); entries
are unbounded.  Prime-field work is vectorised with ``int64`` numpy arrays,
which is safe because every modulus is below ``2**31``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import numpy as np

from .seeding import as_seed

__all__ = [
    "IntPolynomial",
    "as_bigint_matrix",
    "rational_to_integer_vector",
    "build_krylov",
    "hadamard_bound",
    "det_bareiss",
    "rank_rational",
    "rank_mod_p",
    "rank_certified",
    "prime_table",
    "charpoly_int",
    "charpoly_mod_p",
    "is_squarefree",
    "poly_gcd",
]

BigIntMatrix = list  # list[list[int]]


def as_bigint_matrix(M) -> BigIntMatrix:
    """Copy any 2-D integer array-like into a list of rows of Python ints."""
    rows = [[int(v) for v in row] for row in (M.tolist() if isinstance(M, np.ndarray) else M)]
    if rows and len({len(r) for r in rows}) != 1:
        raise ValueError("ragged matrix")
    return rows


def rational_to_integer_vector(b) -> list[int]:
    """Scale a rational vector by the LCM of its denominators."""
    fr = [v if isinstance(v, Fraction) else Fraction(str(v)) if isinstance(v, (float, str)) else Fraction(int(v))
          for v in b]
    m = math.lcm(*(f.denominator for f in fr)) if fr else 1
    return [int(f * m) for f in fr]


def build_krylov(A, b) -> BigIntMatrix:
    """Controllability matrix ``[b, Ab, ..., A^(n-1) b]`` over the integers.

    ``b`` may be rational; it is first cleared of denominators, which does
    not change the rank.
    """
    A = as_bigint_matrix(A)
    n = len(A)
    if any(len(r) != n for r in A):
        raise ValueError("A must be square")
    v = rational_to_integer_vector(b)
    if len(v) != n:
        raise ValueError(f"dimension mismatch: A is {n}x{n}, b has length {len(v)}")
    cols = [v]
    for _ in range(n - 1):
        v = [sum(a * x for a, x in zip(row, v)) for row in A]
        cols.append(v)
    return [[cols[k][i] for k in range(n)] for i in range(n)]


def hadamard_bound(M, k: int | None = None) -> int:
    """Upper bound on ``|det|`` of any ``k``-column square minor (default: all columns).

    Product of the ``k`` largest column norms, each rounded up to an integer.
    """
    M = as_bigint_matrix(M)
    if not M:
        return 1
    ncols = len(M[0])
    k = ncols if k is None else k
    norms = sorted((math.isqrt(sum(M[i][j] ** 2 for i in range(len(M)))) + 1 for j in range(ncols)),
                   reverse=True)
    return math.prod(norms[:k])


# -------------------------------------------------------------------------------------
def _bareiss(M: BigIntMatrix, full_pivot: bool) -> tuple[int, int, BigIntMatrix]:
    """Fraction-free elimination in place; returns ``(rank, sign, M)``."""
    m = len(M)
    n = len(M[0]) if m else 0
    prev = 1
    sign = 1
    r = 0
    for k in range(min(m, n)):
        if full_pivot:
            best, pi, pj = 0, -1, -1
            for i in range(k, m):
                row = M[i]
                for j in range(k, n):
                    a = abs(row[j])
                    if a > best:
                        best, pi, pj = a, i, j
            if best == 0:
                break
        else:
            pi = next((i for i in range(k, m) if M[i][k]), -1)
            pj = k
            if pi < 0:
                break
        if pi != k:
            M[k], M[pi] = M[pi], M[k]
            sign = -sign
        if pj != k:
            for row in M:
                row[k], row[pj] = row[pj], row[k]
            sign = -sign
        pivot_row = M[k]
        piv = pivot_row[k]
        tail = pivot_row[k + 1:]
        for i in range(k + 1, m):
            row = M[i]
            f = row[k]
            if f:
                row[k + 1:] = [(piv * a - f * b) // prev for a, b in zip(row[k + 1:], tail)]
            elif piv != prev:
                row[k + 1:] = [(piv * a) // prev for a in row[k + 1:]]
            row[k] = 0
        prev = piv
        r += 1
    return r, sign, M


def det_bareiss(M) -> int:
    """Exact determinant of a square integer matrix."""
    M = as_bigint_matrix(M)
    n = len(M)
    if any(len(r) != n for r in M):
        raise ValueError("determinant needs a square matrix")
    if n == 0:
        return 1
    r, sign, M = _bareiss(M, full_pivot=False)
    return 0 if r < n else sign * M[n - 1][n - 1]


def rank_rational(M) -> int:
    """Exact rank over the rationals (Bareiss with largest-magnitude pivoting)."""
    M = as_bigint_matrix(M)
    if not M or not M[0]:
        return 0
    return _bareiss(M, full_pivot=True)[0]


# -------------------------------------------------------------------------------------
def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    for p in (2, 3, 5, 7, 11, 13):
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in (2, 7, 61):  # deterministic below 2**32
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


@lru_cache(maxsize=None)
def prime_table(count: int = 1024) -> tuple[int, ...]:
    """The ``count`` largest primes below ``2**31``, descending."""
    out = []
    c = (1 << 31) - 1
    while len(out) < count:
        if _is_prime(c):
            out.append(c)
        c -= 2
    return tuple(out)


def _draw_primes(seed, k: int) -> list[int]:
    table = prime_table()
    idx = as_seed(seed).child("primes").generator().permutation(len(table))[:k]
    return [table[i] for i in idx]


def _reduce(M, p: int) -> np.ndarray:
    M = as_bigint_matrix(M)
    return np.array([[v % p for v in row] for row in M], dtype=np.int64).reshape(len(M), -1)


def rank_mod_p(M, prime: int) -> int:
    """Rank of ``M`` reduced modulo ``prime`` (first-nonzero pivoting)."""
    if prime >= 1 << 31 or not _is_prime(prime):
        raise ValueError("modulus must be a prime below 2**31")
    A = _reduce(M, prime)
    m, n = A.shape
    r = 0
    for c in range(n):
        if r == m:
            break
        nz = np.nonzero(A[r:, c])[0]
        if nz.size == 0:
            continue
        piv = r + nz[0]
        if piv != r:
            A[[r, piv]] = A[[piv, r]]
        inv = pow(int(A[r, c]), -1, prime)
        A[r, c:] = A[r, c:] * inv % prime
        below = A[r + 1:, c].copy()
        rows = np.nonzero(below)[0] + r + 1
        if rows.size:
            A[rows, c:] = (A[rows, c:] - (A[rows, c:c + 1] * A[r, c:]) % prime) % prime
        r += 1
    return r


def rank_certified(M, policy: str = "fast", *, seed=None, deficiency: str = "rational") -> tuple[int, str]:
    """Exact rank plus how it was proved.

    ``policy="exact"`` runs :func:`rank_rational` directly.  ``"fast"`` first
    takes the rank modulo one seeded 31-bit prime; full rank there proves full
    rank over the integers.  A deficient result is settled either by the
    rational fallback (``deficiency="rational"``, default) or by adding primes
    until their product exceeds the Hadamard bound of every candidate minor
    one size larger than the observed rank (``deficiency="modular"``).
    """
    M = as_bigint_matrix(M)
    if not M or not M[0]:
        return 0, "full-rank-proved"
    if policy == "exact":
        return rank_rational(M), "exact-rational"
    if policy != "fast":
        raise ValueError(f"unknown policy {policy!r}")
    full = min(len(M), len(M[0]))
    primes = _draw_primes(seed, len(prime_table()))
    r = rank_mod_p(M, primes[0])
    if r == full:
        return r, "full-rank-proved"
    if deficiency == "rational":
        return rank_rational(M), "deficiency-proved-rational"
    if deficiency != "modular":
        raise ValueError(f"unknown deficiency mode {deficiency!r}")
    # each prime whose rank is <= r divides every (r+1)-minor
    bound = hadamard_bound(M, r + 1)
    prod = primes[0]
    for p in primes[1:]:
        if prod > bound:
            return r, "deficiency-proved-modular"
        rp = rank_mod_p(M, p)
        if rp > r:
            if rp == full:
                return rp, "full-rank-proved"
            r, prod, bound = rp, p, hadamard_bound(M, rp + 1)
        else:
            prod *= p
    if prod > bound:
        return r, "deficiency-proved-modular"
    return rank_rational(M), "deficiency-proved-rational"


# -------------------------------------------------------------------------------------
@dataclass(frozen=True)
class IntPolynomial:
    """Integer polynomial; ``coeffs`` run from the leading coefficient down."""

    coeffs: tuple

    def __post_init__(self):
        c = [int(v) for v in self.coeffs]
        while len(c) > 1 and c[0] == 0:
            c.pop(0)
        object.__setattr__(self, "coeffs", tuple(c) if c else (0,))

    @property
    def degree(self) -> int:
        return -1 if self.is_zero else len(self.coeffs) - 1

    @property
    def is_zero(self) -> bool:
        return self.coeffs == (0,)

    def __call__(self, x):
        acc = 0
        for c in self.coeffs:
            acc = acc * x + c
        return acc

    def derivative(self) -> "IntPolynomial":
        d = len(self.coeffs) - 1
        return IntPolynomial(tuple(c * (d - i) for i, c in enumerate(self.coeffs[:-1])) or (0,))

    def __str__(self) -> str:
        d = self.degree
        terms = []
        for i, c in enumerate(self.coeffs):
            if c:
                e = d - i
                mono = "" if e == 0 else "x" if e == 1 else f"x^{e}"
                coef = str(c) if (abs(c) != 1 or e == 0) else ("-" if c < 0 else "")
                terms.append(f"{coef}{mono}")
        return " + ".join(terms).replace("+ -", "- ") if terms else "0"


def charpoly_mod_p(A, prime: int) -> np.ndarray:
    """Coefficients (leading first) of ``det(xI - A)`` modulo ``prime``.

    Hessenberg reduction by elementary similarity transforms, then the
    standard Hessenberg determinant recurrence.
    """
    H = _reduce(A, prime)
    n = H.shape[0]
    p = prime
    for m in range(1, n - 1):
        nz = np.nonzero(H[m:, m - 1])[0]
        if nz.size == 0:
            continue
        i = m + nz[0]
        if i != m:
            H[[i, m]] = H[[m, i]]
            H[:, [i, m]] = H[:, [m, i]]
        inv = pow(int(H[m, m - 1]), -1, p)
        for j in range(m + 1, n):
            u = int(H[j, m - 1]) * inv % p
            if u:
                H[j, :] = (H[j, :] - u * H[m, :] % p) % p
                H[:, m] = (H[:, m] + u * H[:, j] % p) % p
    # polys stored lowest degree first, length n + 1
    polys = [np.zeros(n + 1, dtype=np.int64)]
    polys[0][0] = 1
    for k in range(1, n + 1):
        prev = polys[k - 1]
        cur = np.zeros(n + 1, dtype=np.int64)
        cur[1:] = prev[:-1]
        cur = (cur - int(H[k - 1, k - 1]) * prev % p) % p
        prod = 1
        for i in range(k - 1, 0, -1):
            prod = prod * int(H[i, i - 1]) % p
            if prod == 0:
                break
            coef = int(H[i - 1, k - 1]) * prod % p
            if coef:
                cur = (cur - coef * polys[i - 1] % p) % p
        polys.append(cur)
    return polys[n][::-1].copy()


def charpoly_int(A) -> IntPolynomial:
    """Exact characteristic polynomial ``det(xI - A)`` of an integer matrix.

    Computed modulo enough 31-bit primes to exceed twice the coefficient
    bound ``(1 + R)^n`` (``R`` the largest absolute row sum) and recombined
    with the Chinese remainder theorem.
    """
    M = as_bigint_matrix(A)
    n = len(M)
    if any(len(r) != n for r in M):
        raise ValueError("charpoly needs a square matrix")
    if n == 0:
        return IntPolynomial((1,))
    R = max(sum(abs(v) for v in row) for row in M)
    bound = 2 * (1 + R) ** n
    primes = prime_table()
    modulus = 1
    coeffs = [0] * (n + 1)
    for p in primes:
        res = charpoly_mod_p(M, p)
        # CRT: x = coeffs mod modulus, x = res mod p
        inv = pow(modulus % p, -1, p)
        coeffs = [c + modulus * (((int(r) - c) * inv) % p) for c, r in zip(coeffs, res)]
        modulus *= p
        if modulus > bound:
            break
    half = modulus // 2
    return IntPolynomial(tuple(c - modulus if c > half else c for c in coeffs))


# -------------------------------------------------------------------------------------
def _content(c: list[int]) -> int:
    g = 0
    for v in c:
        g = math.gcd(g, v)
    return g


def _primitive(c: list[int]) -> list[int]:
    g = _content(c)
    if g == 0:
        return [0]
    c = [v // g for v in c]
    return [-v for v in c] if c[0] < 0 else c


def _strip(c: list[int]) -> list[int]:
    while len(c) > 1 and c[0] == 0:
        c = c[1:]
    return c


def _prem(a: list[int], b: list[int]) -> list[int]:
    """Pseudo-remainder of ``a`` by ``b`` (leading-first coefficient lists)."""
    a = list(a)
    db = len(b) - 1
    lb = b[0]
    while len(a) - 1 >= db and any(a):
        lc = a[0]
        a = [lb * x for x in a]
        for i in range(len(b)):
            a[i] -= lc * b[i]
        a = _strip(a[1:] if a[0] == 0 and len(a) > 1 else a)
        if len(a) - 1 < db:
            break
    return _strip(a)


def poly_gcd(f: IntPolynomial, g: IntPolynomial) -> IntPolynomial:
    """Primitive gcd of two integer polynomials (primitive remainder sequence)."""
    a, b = list(f.coeffs), list(g.coeffs)
    if g.is_zero:
        return IntPolynomial(tuple(_primitive(a)))
    if f.is_zero:
        return IntPolynomial(tuple(_primitive(b)))
    if len(a) < len(b):
        a, b = b, a
    a, b = _primitive(a), _primitive(b)
    while b != [0] and any(b):
        r = _prem(a, b)
        a, b = b, (_primitive(r) if any(r) else [0])
    return IntPolynomial(tuple(a))


def _rem_mod_p(a: list[int], b: list[int], p: int) -> list[int]:
    a = list(a)
    inv = pow(b[0], -1, p)
    while len(a) >= len(b):
        f = a[0] * inv % p
        for i in range(len(b)):
            a[i] = (a[i] - f * b[i]) % p
        a.pop(0)
    while a and a[0] == 0:
        a.pop(0)
    return a


def _squarefree_mod_p(coeffs: Sequence[int], p: int) -> bool:
    """True when ``gcd(f, f') mod p`` is constant (``p`` must not divide the leading coefficient)."""
    a = [c % p for c in coeffs]
    d = len(a) - 1
    b = [(c * (d - i)) % p for i, c in enumerate(a[:-1])]
    while b and b[0] == 0:
        b.pop(0)
    if not b:
        return False
    while len(b) > 1:
        a, b = b, _rem_mod_p(a, b, p)
        if not b:
            return False
    return True


def is_squarefree(pol: IntPolynomial, *, screen_primes: int = 3) -> bool:
    """Whether ``gcd(pol, pol')`` is constant.

    A few primes not dividing the leading coefficient are tried first: a
    squarefree reduction proves the integer polynomial squarefree.  Otherwise
    the exact primitive-remainder gcd decides.
    """
    if pol.is_zero:
        raise ValueError("the zero polynomial has no square-free decomposition")
    if pol.degree <= 1:
        return True
    tried = 0
    for p in prime_table():
        if pol.coeffs[0] % p == 0:
            continue
        if _squarefree_mod_p(pol.coeffs, p):
            return True
        tried += 1
        if tried >= screen_primes:
            break
    return poly_gcd(pol, pol.derivative()).degree == 0
