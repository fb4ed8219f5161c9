"""Monte Carlo estimators with a reproducible random-stream layout.

Trials are split into fixed blocks of :data:`BLOCK_TRIALS`.  Block ``b``
draws from a Philox generator keyed by the user seed with counter word
``b``, so the angles of trial ``t`` depend only on ``(seed, t)`` and never
on how blocks are spread over workers.  Per-trial samples are concatenated
in block order and reduced with :func:`math.fsum`.

Because the draws of a trial do not depend on ``N`` or ``d0``, sweeps that
reuse a seed share their angles (common random numbers).
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .array_channel import (
    ArrayGeometry,
    dirichlet_kernel,
    dirichlet_power,
    pair_phase,
    steering_matrix,
)
from .errors import DomainError, InvariantViolation

__all__ = [
    "BLOCK_TRIALS",
    "DIRECT_SUM_LIMIT",
    "TrialPlan",
    "MomentEstimate",
    "RateEstimate",
    "block_stream",
    "draw_sines",
    "estimate_inner_moments",
    "estimate_sum_rate_mrt",
    "quadrature_second_moment",
]

BLOCK_TRIALS = 4096
# Above this many antennas inner products use the Dirichlet closed form.
DIRECT_SUM_LIMIT = 256

_SEED_MAX = 2 ** 64 - 1


@dataclass(frozen=True)
class TrialPlan:
    trials: int
    seed: int = 0
    workers: int = 1

    def __post_init__(self):
        for name in ("trials", "workers"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, (int, np.integer)) or v < 1:
                raise DomainError(f"{name} must be a positive integer, got {v!r}")
        if not isinstance(self.seed, (int, np.integer)) or not 0 <= self.seed <= _SEED_MAX:
            raise DomainError(f"seed must be an unsigned 64-bit integer, got {self.seed!r}")


@dataclass(frozen=True)
class MomentEstimate:
    """Sample moments of ``z = (1/N) h_k^H h_j``.

    Standard errors are sample standard deviations over ``sqrt(trials)``;
    for the complex mean the deviation is ``sqrt(mean |z - zbar|**2)``.
    ``stderr_variance`` uses the per-trial influence ``|z - zbar|**2``.
    """

    mean_scaled: complex
    second_moment_scaled: float
    variance_scaled: float
    stderr_mean: float
    stderr_second: float
    stderr_variance: float
    trials: int


@dataclass(frozen=True)
class RateEstimate:
    sum_rate: float
    per_user_rate: float
    stderr: float
    trials: int
    N: int
    K: int
    d0: float
    reference: bool
    rho_eff: float


def block_stream(seed: int, block: int) -> np.random.Generator:
    """Generator for one trial block; counter word 3 carries the block index."""
    return np.random.Generator(np.random.Philox(key=seed, counter=[0, 0, 0, block]))


def _blocks(trials):
    return [(b, b * BLOCK_TRIALS, min(trials, (b + 1) * BLOCK_TRIALS))
            for b in range(-(-trials // BLOCK_TRIALS))]


def draw_sines(seed: int, block: int, count: int, width: int) -> np.ndarray:
    """Uniform sines for ``count`` trials of one block, shape ``(count, width)``.

    A short final block reads the leading rows of a full block, so a trial's
    draws are the same whatever the total trial count.
    """
    return block_stream(seed, block).uniform(-1.0, 1.0, (BLOCK_TRIALS, width))[:count]


def _run_blocks(plan: TrialPlan, fn):
    blocks = _blocks(plan.trials)
    if plan.workers == 1 or len(blocks) == 1:
        parts = [fn(*blk) for blk in blocks]
    else:
        with ThreadPoolExecutor(max_workers=plan.workers) as pool:
            parts = list(pool.map(lambda blk: fn(*blk), blocks))
    return np.concatenate(parts)


def _mean(x):
    # Shifting by the first sample makes a constant sample reduce exactly.
    x0 = float(x[0])
    return x0 + math.fsum(x - x0) / x.size


def _stderr(dev2, T):
    if T < 2:
        return 0.0
    return math.sqrt(math.fsum(dev2) / (T - 1) / T)


def _scaled_inner(geom: ArrayGeometry, u):
    N = geom.num_antennas
    if N <= DIRECT_SUM_LIMIT:
        h = steering_matrix(geom, u)
        return np.einsum("tn,tn->t", h[:, 0].conj(), h[:, 1]) / N
    return dirichlet_kernel(N, pair_phase(geom, u[:, 0], u[:, 1])) / N


def estimate_inner_moments(geom: ArrayGeometry, plan: TrialPlan) -> MomentEstimate:
    """Estimate the scaled inner-product moments of two independent users.

    Parameters
    ----------
    geom : ArrayGeometry
    plan : TrialPlan
        Each trial draws one ``(u_k, u_j)`` pair.
    """
    def block(b, lo, hi):
        return _scaled_inner(geom, draw_sines(plan.seed, b, hi - lo, 2))

    z = _run_blocks(plan, block)
    T = z.size
    mean = complex(_mean(z.real), _mean(z.imag))
    p = z.real ** 2 + z.imag ** 2
    second = _mean(p)
    dev2 = np.abs(z - mean) ** 2
    var = second - abs(mean) ** 2
    if var < -1e-12:
        raise InvariantViolation(f"negative sample variance {var!r}")
    return MomentEstimate(
        mean_scaled=mean,
        second_moment_scaled=second,
        variance_scaled=var,
        stderr_mean=_stderr(dev2, T),
        stderr_second=_stderr((p - second) ** 2, T),
        stderr_variance=_stderr((dev2 - _mean(dev2)) ** 2, T),
        trials=T,
    )


def _interference_power(geom: ArrayGeometry, u):
    """``|h_k^H h_j|**2`` for every user pair, shape ``(trials, K, K)``."""
    N = geom.num_antennas
    if N <= DIRECT_SUM_LIMIT:
        out = np.empty(u.shape + u.shape[-1:])
        step = 512
        for lo in range(0, u.shape[0], step):
            h = steering_matrix(geom, u[lo:lo + step])
            g = h.conj() @ h.transpose(0, 2, 1)
            out[lo:lo + step] = g.real ** 2 + g.imag ** 2
        return out
    return dirichlet_power(N, pair_phase(geom, u[:, :, None], u[:, None, :]))


def estimate_sum_rate_mrt(geom: ArrayGeometry, K: int, rho_eff: float,
                          plan: TrialPlan) -> RateEstimate:
    """Ergodic MRT sum rate for ``K`` users with uniform sines.

    With ``w_k = h_k / sqrt(N)`` the desired gain is exactly ``N``, so
    ``SINR_k = rho N / (1 + (rho / N) sum_{j != k} |h_k^H h_j|**2)``.
    The standard error is taken over per-trial sum rates.
    """
    N = geom.num_antennas
    if isinstance(K, bool) or not isinstance(K, (int, np.integer)) or K < 1:
        raise DomainError(f"K must be a positive integer, got {K!r}")
    if N < K:
        raise DomainError(f"MRT needs N >= K, got N={N}, K={K}")
    rho_eff = float(rho_eff)
    if not (rho_eff > 0.0 and math.isfinite(rho_eff)):
        raise DomainError(f"rho_eff must be positive, got {rho_eff}")
    K = int(K)
    diag = np.arange(K)

    def block(b, lo, hi):
        u = draw_sines(plan.seed, b, hi - lo, K)
        g2 = _interference_power(geom, u)
        g2[:, diag, diag] = 0.0
        sinr = rho_eff * N / (1.0 + (rho_eff / N) * g2.sum(axis=2))
        return np.log2(1.0 + sinr).sum(axis=1)

    r = _run_blocks(plan, block)
    T = r.size
    total = _mean(r)
    return RateEstimate(
        sum_rate=total,
        per_user_rate=total / K,
        stderr=_stderr((r - total) ** 2, T),
        trials=T,
        N=N,
        K=K,
        d0=geom.aperture,
        reference=geom.is_reference,
        rho_eff=rho_eff,
    )


def quadrature_second_moment(geom: ArrayGeometry, order: int) -> float:
    """Second moment ``E{|h_k^H h_j|**2} / N**2`` by Gauss-Legendre quadrature.

    Tensor-product rule of ``order`` nodes per axis over ``[-1, 1]**2`` with
    the uniform density ``1/4``, integrating the Dirichlet closed form.
    """
    if isinstance(order, bool) or not isinstance(order, (int, np.integer)) or order < 4:
        raise DomainError(f"quadrature order must be an integer >= 4, got {order!r}")
    N = geom.num_antennas
    x, w = np.polynomial.legendre.leggauss(int(order))
    power = dirichlet_power(N, pair_phase(geom, x[:, None], x[None, :]))
    return float(w @ power @ w) / (4.0 * N * N)
