"""Array geometries and line-of-sight steering channels.

A uniform linear array of ``N`` elements squeezed into a fixed aperture of
``d0`` wavelengths has element spacing ``d0 / N`` wavelengths, so the phase
advance between neighbouring elements for a user at ``u = sin(theta)`` is
``a * u`` with ``a = 2 * pi * d0 / N``.  The half-wavelength reference array
keeps ``a = pi`` regardless of ``N``.

Channel entries are ``exp(-1j * a * m * u)`` for ``m = 0 .. N - 1``.
"""

from __future__ import annotations

import enum
import math
import numbers
from dataclasses import dataclass

import numpy as np

from .errors import DomainError

__all__ = [
    "ArrayMode",
    "ArrayGeometry",
    "UserAngleSet",
    "ChannelVector",
    "make_geometry",
    "steering_channel",
    "steering_matrix",
    "sample_angles",
    "inner_product",
    "inner_product_closed_form",
    "dirichlet_kernel",
    "dirichlet_power",
    "pair_phase",
]

# Below this |sin(delta / 2)| the Dirichlet kernel is replaced by its limit.
SINGULAR_THRESHOLD = 1e-14

# Phases are formed and reduced in extended precision where the platform has
# it; element phases reach 2*pi*d0 and would otherwise lose ~|phase| * eps.
_TWO_PI_EXT = np.longdouble("6.283185307179586476925286766559005768394")


class ArrayMode(enum.Enum):
    SPACE_CONSTRAINED = "space-constrained"
    HALF_WAVELENGTH_REFERENCE = "reference"


@dataclass(frozen=True)
class ArrayGeometry:
    """Immutable description of a ULA.

    In reference mode ``aperture`` holds the equivalent ``N / 2`` so that
    the analytic formulas can be evaluated on either kind of array.
    """

    mode: ArrayMode
    num_antennas: int
    aperture: float
    phase_scale: float

    @property
    def is_reference(self) -> bool:
        return self.mode is ArrayMode.HALF_WAVELENGTH_REFERENCE

    def label(self) -> str:
        if self.is_reference:
            return "reference"
        return f"d0={self.aperture:g}"


@dataclass(frozen=True, eq=False)
class UserAngleSet:
    sines: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.sines, dtype=float)
        if s.ndim != 1 or s.size < 1:
            raise DomainError("need at least one user angle")
        if np.any(np.abs(s) > 1.0):
            raise DomainError("angle sines must lie in [-1, 1]")
        s = s.copy()
        s.flags.writeable = False
        object.__setattr__(self, "sines", s)

    def __len__(self):
        return self.sines.size


@dataclass(frozen=True, eq=False)
class ChannelVector:
    entries: np.ndarray
    geometry: ArrayGeometry
    sine: float

    def __len__(self):
        return self.entries.size


def _check_count(N, name="N"):
    if isinstance(N, bool) or not isinstance(N, numbers.Integral):
        raise DomainError(f"{name} must be an integer, got {N!r}")
    if N < 1:
        raise DomainError(f"{name} must be >= 1, got {N}")
    return int(N)


def _check_sine(u):
    u = float(u)
    if not abs(u) <= 1.0:
        raise DomainError(f"angle sine must lie in [-1, 1], got {u}")
    return u


def make_geometry(mode, N, d0=None) -> ArrayGeometry:
    """Build an array geometry.

    Parameters
    ----------
    mode : ArrayMode or str
        ``ArrayMode.SPACE_CONSTRAINED`` or ``ArrayMode.HALF_WAVELENGTH_REFERENCE``
        (the enum values ``"space-constrained"`` / ``"reference"`` are accepted).
    N : int
        Number of antennas, at least 1.
    d0 : float, optional
        Total aperture in wavelengths. Required and positive for the
        space-constrained mode, ignored for the reference mode.
    """
    mode = ArrayMode(mode)
    N = _check_count(N)
    if mode is ArrayMode.HALF_WAVELENGTH_REFERENCE:
        return ArrayGeometry(mode, N, N / 2.0, math.pi)
    if d0 is None or not float(d0) > 0.0 or not math.isfinite(float(d0)):
        raise DomainError(f"aperture d0 must be a positive finite number, got {d0!r}")
    d0 = float(d0)
    return ArrayGeometry(mode, N, d0, 2.0 * math.pi * d0 / N)


def steering_matrix(geom: ArrayGeometry, sines) -> np.ndarray:
    """Channel vectors for an array of sines; the antenna axis is appended last."""
    u = np.asarray(sines, dtype=np.longdouble)
    m = np.arange(geom.num_antennas, dtype=np.longdouble)
    phase = (np.longdouble(geom.phase_scale) * u[..., None]) * m
    phase = (phase - _TWO_PI_EXT * np.rint(phase / _TWO_PI_EXT)).astype(float)
    return np.cos(phase) - 1j * np.sin(phase)


def steering_channel(geom: ArrayGeometry, u: float) -> ChannelVector:
    u = _check_sine(u)
    h = steering_matrix(geom, u)
    h.flags.writeable = False
    return ChannelVector(h, geom, u)


def sample_angles(K: int, stream: np.random.Generator) -> UserAngleSet:
    """Draw ``K`` i.i.d. sines uniform on [-1, 1] from ``stream``."""
    K = _check_count(K, "K")
    return UserAngleSet(stream.uniform(-1.0, 1.0, K))


def inner_product(h_k: ChannelVector, h_j: ChannelVector) -> complex:
    """Return ``h_k^H h_j`` by direct summation."""
    if h_k.entries.shape != h_j.entries.shape:
        raise DomainError(
            f"dimension mismatch: {h_k.entries.size} vs {h_j.entries.size}")
    if h_k.geometry.phase_scale != h_j.geometry.phase_scale:
        raise DomainError("channel vectors come from different geometries")
    return complex(np.vdot(h_k.entries, h_j.entries))


def pair_phase(geom: ArrayGeometry, u_k, u_j):
    """``a * (u_k - u_j)`` in extended precision (broadcasts)."""
    return np.longdouble(geom.phase_scale) * (
        np.asarray(u_k, dtype=np.longdouble) - np.asarray(u_j, dtype=np.longdouble))


def _dirichlet_parts(N, delta):
    half = 0.5 * np.asarray(delta, dtype=np.longdouble)
    s = np.sin(half)
    singular = np.abs(s) < SINGULAR_THRESHOLD
    ratio = np.where(singular, np.longdouble(N), np.sin(N * half) / np.where(singular, 1, s))
    return half, ratio


def dirichlet_kernel(N: int, delta) -> np.ndarray:
    """Vectorised ``sum_{m<N} exp(1j * m * delta)`` via the geometric series.

    Evaluated in extended precision: near ``delta = 2*pi*k`` with ``k != 0``
    (element spacing above half a wavelength) the ratio of sines is
    ill-conditioned in double.
    """
    half, ratio = _dirichlet_parts(N, delta)
    phase = (N - 1) * half
    return (np.cos(phase) * ratio).astype(float) + 1j * (np.sin(phase) * ratio).astype(float)


def dirichlet_power(N: int, delta) -> np.ndarray:
    """``|dirichlet_kernel(N, delta)|**2`` without forming complex numbers."""
    _, ratio = _dirichlet_parts(N, delta)
    return (ratio * ratio).astype(float)


def inner_product_closed_form(geom: ArrayGeometry, u_k: float, u_j: float) -> complex:
    """Closed-form ``h_k^H h_j`` for sines ``u_k`` and ``u_j``.

    With ``delta = a * (u_k - u_j)`` the inner product is the Dirichlet
    kernel ``exp(1j*(N-1)*delta/2) * sin(N*delta/2) / sin(delta/2)``.
    """
    u_k = _check_sine(u_k)
    u_j = _check_sine(u_j)
    return complex(dirichlet_kernel(geom.num_antennas, pair_phase(geom, u_k, u_j)))
