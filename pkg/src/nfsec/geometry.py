"""Uniform linear array geometry and near-field channel primitives.

The transmit array lies on the y-axis with its phase center at the origin.
Angles are measured from the array normal (the positive x-axis), positive
toward positive y. Targets live in the open front half-plane x > 0.

All lengths are in meters, angles in radians, powers in watts. Steering
vectors are plain complex ndarrays of unit L2 norm whose entries all have
magnitude 1/sqrt(N).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

SPEED_OF_LIGHT = 299792458.0
"""Exact SI speed of light in m/s."""


def default_reference_gain(wavelength: float) -> float:
    """Free-space power gain at 1 m reference range, (wavelength / 4 pi)^2."""
    return (wavelength / (4.0 * np.pi)) ** 2


def antenna_coords(n_elements: int, wavelength: float) -> np.ndarray:
    """y-coordinates of a half-wavelength-spaced array centered on the origin.

    Element n (1-based) sits at (2 n - N - 1) / 2 * d with d = wavelength / 2,
    so coordinates are symmetric about zero and sum to zero exactly.
    """
    if n_elements < 1:
        raise ValueError(f"n_elements must be >= 1, got {n_elements}")
    if wavelength <= 0:
        raise ValueError(f"wavelength must be > 0, got {wavelength}")
    n = np.arange(1, n_elements + 1)
    return (2 * n - n_elements - 1) * (wavelength / 4.0)


@dataclass(frozen=True)
class ArrayGeometry:
    """Half-wavelength uniform linear array on the y-axis."""

    n_elements: int
    wavelength: float

    def __post_init__(self) -> None:
        if self.n_elements < 1:
            raise ValueError(f"n_elements must be >= 1, got {self.n_elements}")
        if self.wavelength <= 0:
            raise ValueError(f"wavelength must be > 0, got {self.wavelength}")

    @property
    def spacing(self) -> float:
        return self.wavelength / 2.0

    @property
    def coords(self) -> np.ndarray:
        return antenna_coords(self.n_elements, self.wavelength)

    @property
    def aperture(self) -> float:
        return (self.n_elements - 1) * self.spacing


@dataclass(frozen=True)
class PolarLocation:
    """Location in front of the array: angle from boresight and range."""

    angle: float
    range_m: float

    def __post_init__(self) -> None:
        if not self.range_m > 0:
            raise ValueError(f"range must be > 0, got {self.range_m}")
        if not abs(self.angle) < np.pi / 2:
            raise ValueError(f"angle must lie strictly inside (-pi/2, pi/2), got {self.angle}")


def cart_to_polar(q) -> PolarLocation:
    """Convert a Cartesian point (x, y) with x > 0 to polar coordinates.

    Returns range sqrt(x^2 + y^2) and angle arctan(y / x).
    """
    x, y = float(q[0]), float(q[1])
    if x <= 0:
        raise ValueError(f"x-coordinate must be > 0 (front half-plane), got {x}")
    return PolarLocation(angle=np.arctan2(y, x), range_m=np.hypot(x, y))


def polar_to_cart(loc: PolarLocation) -> np.ndarray:
    """Inverse of :func:`cart_to_polar`."""
    return np.array([loc.range_m * np.cos(loc.angle), loc.range_m * np.sin(loc.angle)])


def steering_matrix(angles, ranges, geo: ArrayGeometry) -> np.ndarray:
    """Fresnel-model steering vectors for many (angle, range) pairs at once.

    Parameters
    ----------
    angles, ranges : array_like
        Equal-length 1-D arrays (broadcastable) of angles and ranges.
    geo : ArrayGeometry

    Returns
    -------
    (M, N) complex ndarray whose row i is the unit-norm steering vector
    toward (angles[i], ranges[i]). Entry n carries the phase
    (2 pi / wavelength) * (u_n sin(angle) - u_n^2 cos(angle)^2 / (2 range)).
    """
    angles = np.atleast_1d(np.asarray(angles, dtype=float))
    ranges = np.atleast_1d(np.asarray(ranges, dtype=float))
    angles, ranges = np.broadcast_arrays(angles, ranges)
    u = geo.coords
    k = 2.0 * np.pi / geo.wavelength
    sin_t = np.sin(angles)[:, None]
    cos2_t = np.cos(angles)[:, None] ** 2
    phases = k * (u[None, :] * sin_t - (u[None, :] ** 2) * cos2_t / (2.0 * ranges[:, None]))
    return np.exp(1j * phases) / np.sqrt(geo.n_elements)


def steering_vector(loc: PolarLocation, geo: ArrayGeometry) -> np.ndarray:
    """Unit-norm near-field (Fresnel) steering vector toward ``loc``."""
    return steering_matrix([loc.angle], [loc.range_m], geo)[0]


def steering_inner(v: np.ndarray, angles, ranges, geo: ArrayGeometry, chunk: int = 4096) -> np.ndarray:
    """Inner products a(angle_i, range_i)^H v over a grid, chunked.

    Avoids materializing the full grid-by-N steering matrix; memory stays
    O(chunk * N) regardless of the grid size.
    """
    angles = np.asarray(angles, dtype=float).ravel()
    ranges = np.asarray(ranges, dtype=float).ravel()
    angles, ranges = np.broadcast_arrays(angles, ranges)
    out = np.empty(angles.shape[0], dtype=complex)
    for lo in range(0, angles.shape[0], chunk):
        hi = lo + chunk
        mat = steering_matrix(angles[lo:hi], ranges[lo:hi], geo)
        out[lo:hi] = mat.conj() @ v
    return out


def steering_vector_exact(q, geo: ArrayGeometry) -> np.ndarray:
    """Steering vector from exact per-element Euclidean distances.

    Entry n carries phase -(2 pi / wavelength) * (|q - u_n| - |q - u_0|),
    with u_0 the array phase center at the origin. Agrees with the Fresnel
    form of :func:`steering_vector` up to the quartic aperture term
    ~ u_n^4 / (8 r^3), which dominates the residual on boresight.
    """
    x, y = float(q[0]), float(q[1])
    u = geo.coords
    dist_n = np.hypot(x, y - u)
    dist_0 = np.hypot(x, y)
    phases = -2.0 * np.pi / geo.wavelength * (dist_n - dist_0)
    return np.exp(1j * phases) / np.sqrt(geo.n_elements)


@dataclass(frozen=True)
class LosChannel:
    """Line-of-sight channel: scalar gain plus steering vector.

    ``row`` is the conjugated channel row vector, i.e. the 1-D array ``v``
    such that the received amplitude is ``v @ w`` for a beamformer ``w``.
    """

    gain: complex
    vector: np.ndarray

    @property
    def row(self) -> np.ndarray:
        n = self.vector.shape[0]
        return np.sqrt(n) * np.conj(self.gain) * np.conj(self.vector)

    @property
    def row_norm(self) -> float:
        return float(np.linalg.norm(self.row))


def los_channel(q, reference_gain: float, geo: ArrayGeometry) -> LosChannel:
    """Line-of-sight channel toward Cartesian point ``q``.

    The complex gain is sqrt(reference_gain) / r * exp(-j 2 pi r / wavelength)
    with r the range of ``q``; the steering vector uses the Fresnel model.
    """
    if reference_gain <= 0:
        raise ValueError(f"reference_gain must be > 0, got {reference_gain}")
    loc = cart_to_polar(q)
    r = loc.range_m
    gain = np.sqrt(reference_gain) / r * np.exp(-2j * np.pi * r / geo.wavelength)
    return LosChannel(gain=complex(gain), vector=steering_vector(loc, geo))
