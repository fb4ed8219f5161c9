"""Closed-form moments of the inner product of two LOS channel vectors.

All moments are *scaled*: the mean refers to ``(1/N) h_k^H h_j`` and the
second moment to ``(1/N**2) |h_k^H h_j|**2``.  Exact values hold for every
finite ``N``; asymptotic values are the large-``N`` expressions for a fixed
aperture ``d0`` and are only defined while ``N >= 2 * d0`` (phase scale at
most pi).

Every sinc-squared series is accumulated with :func:`math.fsum`, so the
results are correctly rounded sums of the individually rounded terms.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, InvariantViolation, OutOfValidityError

__all__ = [
    "Provenance",
    "MomentSet",
    "EpsilonPolicy",
    "sinc",
    "exact_mean_scaled",
    "exact_second_moment_scaled",
    "exact_variance_scaled",
    "exact_moments",
    "lemma_sinc_sum",
    "asymptotic_mean_scaled",
    "epsilon_correction",
    "asymptotic_second_moment_scaled",
    "asymptotic_variance_scaled",
    "asymptotic_moments",
    "unlimited_reference_moments",
    "jensen_sum_rate_bound",
]

# Slack before a negative variance is treated as a bug rather than rounding.
VARIANCE_TOLERANCE = 1e-12


class Provenance(enum.Enum):
    EXACT_FINITE_N = "exact"
    ASYMPTOTIC = "asymptotic"
    UNLIMITED_REFERENCE = "reference"


@dataclass(frozen=True)
class MomentSet:
    mean_scaled: float
    second_moment_scaled: float
    variance_scaled: float
    N: int
    d0: float
    provenance: Provenance


@dataclass(frozen=True)
class EpsilonPolicy:
    """Correction term of the asymptotic second moment.

    ``value`` is ``sum_{m=1}^{M} sin(a m)**2 / m / (4 pi**2 d0**2)`` with
    ``M = truncation_limit``.  The untruncated series diverges like
    ``log(M)``, so ``M`` is part of the result, not an accuracy knob.
    """

    truncation_limit: int
    value: float


def _check_N(N):
    if isinstance(N, bool) or not isinstance(N, (int, np.integer)) or N < 1:
        raise DomainError(f"N must be a positive integer, got {N!r}")
    return int(N)


def _check_d0(d0):
    d0 = float(d0)
    if not (d0 > 0.0 and math.isfinite(d0)):
        raise DomainError(f"d0 must be positive and finite, got {d0}")
    return d0


def _phase_scale(N, d0):
    return 2.0 * math.pi * d0 / N


def sinc(x):
    """Unnormalised sinc, ``sin(x) / x`` with ``sinc(0) == 1``.

    Works on scalars and arrays; scalars come back as ``float``.
    """
    arr = np.asarray(x, dtype=float)
    zero = arr == 0.0
    out = np.sin(arr) / np.where(zero, 1.0, arr)
    out = np.where(zero, 1.0, out)
    return float(out) if out.ndim == 0 else out


def _sinc2(a, m):
    return sinc(a * m) ** 2


def exact_mean_scaled(N: int, d0: float) -> float:
    """``E{(1/N) h_k^H h_j} = (1/N) sum_{m=0}^{N-1} sinc(a m)**2``."""
    N = _check_N(N)
    d0 = _check_d0(d0)
    m = np.arange(N, dtype=float)
    return math.fsum(_sinc2(_phase_scale(N, d0), m)) / N


def exact_second_moment_scaled(N: int, d0: float) -> float:
    """``E{|h_k^H h_j|**2} / N**2``.

    The double sum over ``sinc(a (m1 - m2))**2`` is folded by difference,
    ``N + 2 sum_{m=1}^{N-1} (N - m) sinc(a m)**2``, which is O(N).
    """
    N = _check_N(N)
    d0 = _check_d0(d0)
    m = np.arange(1, N, dtype=float)
    off = math.fsum((N - m) * _sinc2(_phase_scale(N, d0), m))
    return math.fsum([float(N), 2.0 * off]) / (N * N)


def _variance(second, mean):
    v = second - mean * mean
    if v < -VARIANCE_TOLERANCE:
        raise InvariantViolation(f"negative variance {v!r}")
    return max(v, 0.0)


def exact_variance_scaled(N: int, d0: float) -> float:
    return _variance(exact_second_moment_scaled(N, d0), exact_mean_scaled(N, d0))


def exact_moments(N: int, d0: float) -> MomentSet:
    mean = exact_mean_scaled(N, d0)
    second = exact_second_moment_scaled(N, d0)
    return MomentSet(mean, second, _variance(second, mean), int(N), float(d0),
                     Provenance.EXACT_FINITE_N)


def lemma_sinc_sum(beta: float) -> float:
    """Closed form of ``sum_{m>=0} sinc(beta m)**2`` for ``0 < beta <= pi``."""
    beta = float(beta)
    if not 0.0 < beta <= math.pi:
        raise DomainError(f"beta must lie in (0, pi], got {beta}")
    return 0.5 * (1.0 + math.pi / beta)


def _check_window(N, d0):
    N = _check_N(N)
    d0 = _check_d0(d0)
    if 2.0 * d0 > N:
        raise DomainError(
            f"asymptotic moments need N >= 2*d0 (phase scale <= pi); got N={N}, d0={d0}")
    return N, d0


def asymptotic_mean_scaled(N: int, d0: float) -> float:
    N, d0 = _check_window(N, d0)
    return 1.0 / (2.0 * N) + 1.0 / (4.0 * d0)


def epsilon_correction(N: int, d0: float, M: int | None = None) -> EpsilonPolicy:
    """Truncated correction term.

    ``M`` defaults to ``N - 1``, the largest element-index difference that
    occurs on an ``N``-element array (at least 1).
    """
    N = _check_N(N)
    d0 = _check_d0(d0)
    if M is None:
        M = max(N - 1, 1)
    elif isinstance(M, bool) or not isinstance(M, (int, np.integer)) or M < 1:
        raise DomainError(f"truncation limit must be a positive integer, got {M!r}")
    M = int(M)
    m = np.arange(1, M + 1, dtype=float)
    s = math.fsum(np.sin(_phase_scale(N, d0) * m) ** 2 / m)
    return EpsilonPolicy(M, s / (4.0 * math.pi ** 2 * d0 ** 2))


def _resolve_eps(N, d0, eps):
    if eps is None:
        return epsilon_correction(N, d0)
    if isinstance(eps, EpsilonPolicy):
        return eps
    return epsilon_correction(N, d0, eps)


def asymptotic_second_moment_scaled(N: int, d0: float, eps=None) -> float:
    """``1/(2 d0) - epsilon``.

    ``eps`` may be an :class:`EpsilonPolicy`, a truncation limit, or None for
    the default policy. A negative result raises :class:`OutOfValidityError`.
    """
    N, d0 = _check_window(N, d0)
    eps = _resolve_eps(N, d0, eps)
    val = 1.0 / (2.0 * d0) - eps.value
    if val < 0.0:
        raise OutOfValidityError(
            f"asymptotic second moment is negative ({val:.3g}) for N={N}, d0={d0}, "
            f"M={eps.truncation_limit}")
    return val


def asymptotic_variance_scaled(N: int, d0: float, eps=None) -> float:
    N, d0 = _check_window(N, d0)
    eps = _resolve_eps(N, d0, eps)
    val = ((1.0 - 1.0 / (2.0 * N) - 1.0 / (8.0 * d0)) / (2.0 * d0)
           - 1.0 / (4.0 * N * N) - eps.value)
    if val < 0.0:
        raise OutOfValidityError(
            f"asymptotic variance is negative ({val:.3g}) for N={N}, d0={d0}, "
            f"M={eps.truncation_limit}")
    return val


def asymptotic_moments(N: int, d0: float, eps=None) -> MomentSet:
    N, d0 = _check_window(N, d0)
    eps = _resolve_eps(N, d0, eps)
    return MomentSet(asymptotic_mean_scaled(N, d0),
                     asymptotic_second_moment_scaled(N, d0, eps),
                     asymptotic_variance_scaled(N, d0, eps),
                     N, d0, Provenance.ASYMPTOTIC)


def unlimited_reference_moments(N: int) -> MomentSet:
    """Moments for half-wavelength spacing (aperture grows as ``N / 2``).

    With phase scale pi every off-diagonal sinc term vanishes, so the mean
    and second moment are both ``1/N`` and the variance is ``1/N - 1/N**2``.
    """
    N = _check_N(N)
    inv = 1.0 / N
    return MomentSet(inv, inv, inv - inv * inv, N, N / 2.0,
                     Provenance.UNLIMITED_REFERENCE)


def jensen_sum_rate_bound(N: int, K: int, d0: float, rho_eff: float) -> float:
    """Jensen lower bound on the MRT ergodic sum rate, in bit/s/Hz.

    Per user ``log2(1 + 1 / (1/(rho N) + (K-1) E{|h_k^H h_j|**2}/N**2))``,
    times ``K`` since the users are exchangeable.
    """
    N = _check_N(N)
    d0 = _check_d0(d0)
    if isinstance(K, bool) or not isinstance(K, (int, np.integer)) or not 1 <= K <= N:
        raise DomainError(f"need 1 <= K <= N, got K={K!r}, N={N}")
    rho_eff = float(rho_eff)
    if not rho_eff > 0.0:
        raise DomainError(f"rho_eff must be positive, got {rho_eff}")
    if K == 1:
        return math.log2(1.0 + rho_eff * N)
    interference = (K - 1) * exact_second_moment_scaled(N, d0)
    return K * math.log2(1.0 + 1.0 / (1.0 / (rho_eff * N) + interference))
