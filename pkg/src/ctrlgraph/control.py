"""Controllability of ``(A, b)`` for real symmetric integer ``A``.

The Kalman rank test on the exact Krylov matrix is authoritative.  The
floating PBH screen (an eigenvector orthogonal to ``b`` means
uncontrollable) is a diagnostic only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np

from .exactlin import build_krylov, charpoly_int, is_squarefree, rank_certified
from .matgen import check_int_symmetric

__all__ = [
    "ControllabilityVerdict",
    "EigenDecomposition",
    "NonSimpleSpectrumError",
    "eigendecomposition",
    "is_controllable",
    "pbh_screen",
    "simple_spectrum",
    "shift_equivalence_check",
    "eigvec_dot_profile",
    "as_rational_vector",
]

_KALMAN_METHOD = {
    "full-rank-proved": "kalman-modular",
    "deficiency-proved-modular": "kalman-modular",
    "deficiency-proved-rational": "kalman-rational",
    "exact-rational": "kalman-rational",
}


class NonSimpleSpectrumError(ValueError):
    """Raised when an operation needs distinct eigenvalues and does not get them."""


@dataclass(frozen=True)
class ControllabilityVerdict:
    controllable: Optional[bool]
    method: str
    rank: Optional[int]
    certificate: str
    witness: Optional[int] = None

    @property
    def exact(self) -> bool:
        return self.method != "pbh-float-screen"


@dataclass(frozen=True)
class EigenDecomposition:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray  # columns
    residuals: np.ndarray


def as_rational_vector(b, n: int | None = None) -> list[Fraction]:
    if b is None:
        if n is None:
            raise ValueError("need b or n")
        return [Fraction(1)] * n
    out = []
    for v in b:
        if isinstance(v, Fraction):
            out.append(v)
        elif isinstance(v, (float, np.floating, str)):
            out.append(Fraction(str(v)))
        else:
            out.append(Fraction(int(v)))
    return out


def eigendecomposition(A, *, check: bool = True) -> EigenDecomposition:
    """Symmetric eigendecomposition with per-pair residuals ``||Av - lambda v||``.

    Raises ``numpy.linalg.LinAlgError`` when the residuals exceed
    ``1e-8 * ||A||`` or the eigenvectors lose orthogonality past ``1e-8``.
    """
    Af = np.asarray(A, dtype=float)
    w, V = np.linalg.eigh(Af)
    res = np.linalg.norm(Af @ V - V * w, axis=0)
    if check:
        scale = max(float(np.max(np.abs(w))) if w.size else 0.0, 1.0)
        gram = V.T @ V - np.eye(len(w))
        if res.size and (res.max() > 1e-8 * scale or np.abs(gram).max() > 1e-8):
            raise np.linalg.LinAlgError("eigensolver residual check failed")
    return EigenDecomposition(w, V, res)


def is_controllable(A, b=None, policy: str = "fast", *, seed=None) -> ControllabilityVerdict:
    """Exact Kalman test: ``(A, b)`` is controllable iff the Krylov matrix has rank ``n``.

    ``b`` defaults to the all-ones vector.
    """
    A = check_int_symmetric(A)
    n = A.shape[0]
    bq = as_rational_vector(b, n)
    if len(bq) != n:
        raise ValueError("dimension mismatch between A and b")
    rank, cert = rank_certified(build_krylov(A, bq), policy, seed=seed)
    return ControllabilityVerdict(rank == n, _KALMAN_METHOD[cert], rank, cert)


def pbh_screen(A, b=None, tol: float = 1e-7) -> ControllabilityVerdict:
    """Floating PBH screen; advisory only.

    Flags "likely uncontrollable" when some unit eigenvector has
    ``|v.b| < tol * ||b||`` or two eigenvalues are closer than ``tol``.
    """
    A = check_int_symmetric(A)
    n = A.shape[0]
    bf = np.array([float(v) for v in as_rational_vector(b, n)])
    try:
        eig = eigendecomposition(A)
    except np.linalg.LinAlgError:
        return ControllabilityVerdict(None, "pbh-float-screen", None, "unresolved")
    bnorm = float(np.linalg.norm(bf))
    if bnorm == 0.0:
        return ControllabilityVerdict(False, "pbh-float-screen", None, "advisory", 0)
    dots = np.abs(eig.eigenvectors.T @ bf)
    k = int(np.argmin(dots))
    if dots[k] < tol * bnorm:
        return ControllabilityVerdict(False, "pbh-float-screen", None, "advisory", k)
    gaps = np.diff(eig.eigenvalues)
    if gaps.size and gaps.min() < tol:
        return ControllabilityVerdict(False, "pbh-float-screen", None, "advisory", int(np.argmin(gaps)))
    return ControllabilityVerdict(True, "pbh-float-screen", None, "advisory")


def simple_spectrum(A) -> bool:
    """Exact test for distinct eigenvalues: the characteristic polynomial is squarefree."""
    return is_squarefree(charpoly_int(check_int_symmetric(A)))


def shift_equivalence_check(A, b=None, gamma=1, *, seed=None) -> bool:
    """Compare the exact verdicts for ``(A, b)`` and ``(A + gamma b b^T, b)``.

    The shifted matrix is formed over the rationals and scaled to integers,
    which leaves the verdict unchanged.
    """
    A = check_int_symmetric(A)
    n = A.shape[0]
    bq = as_rational_vector(b, n)
    g = Fraction(gamma) if not isinstance(gamma, float) else Fraction(str(gamma))
    shifted = [[Fraction(int(A[i, j])) + g * bq[i] * bq[j] for j in range(n)] for i in range(n)]
    d = math.lcm(*(v.denominator for row in shifted for v in row))
    B = np.array([[int(v * d) for v in row] for row in shifted], dtype=object)
    base = is_controllable(A, bq, seed=seed).controllable
    return base == is_controllable(B, bq, seed=seed).controllable


def eigvec_dot_profile(W, b=None) -> np.ndarray:
    """Sorted ``|v_i . b|`` over the unit eigenvectors of ``W``.

    Requires a simple spectrum, so each unit eigenvector is unique up to sign.
    """
    W = check_int_symmetric(W)
    if not simple_spectrum(W):
        raise NonSimpleSpectrumError("spectrum is not simple; eigenvectors are not unique")
    bf = np.array([float(v) for v in as_rational_vector(b, W.shape[0])])
    eig = eigendecomposition(W)
    return np.sort(np.abs(eig.eigenvectors.T @ bf))
