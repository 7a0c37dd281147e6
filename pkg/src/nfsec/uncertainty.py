"""Location uncertainty discs and their fan-shaped partitioning.

An eavesdropper position is known only up to an isotropic Gaussian error in
Cartesian coordinates. Worst-case design works on the confidence disc of
that error; this module converts the disc to polar error bounds and tiles
it with fan-shaped cells small enough (in the sine-of-angle domain) for a
first-order model of the array response to stay accurate inside each cell.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import PolarLocation, cart_to_polar


class SectorOutsideDiscError(ValueError):
    """The queried angular sector does not intersect the uncertainty disc."""


def confidence_radius(sigma: float, alpha: float) -> float:
    """Radius of the (1 - alpha) confidence disc of an isotropic Gaussian.

    Closed form sigma * sqrt(-2 ln alpha) of the two-degree-of-freedom
    chi-square quantile.
    """
    if sigma < 0:
        raise ValueError(f"sigma must be >= 0, got {sigma}")
    if not 0 < alpha < 1:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    return sigma * np.sqrt(-2.0 * np.log(alpha))


@dataclass(frozen=True)
class LocationUncertainty:
    """Estimated location plus an isotropic Gaussian error model.

    ``center`` is the Cartesian estimate (x, y) with x > 0; ``sigma`` the
    per-axis standard deviation of the error; ``alpha`` the confidence
    parameter. The confidence disc has radius sigma * sqrt(-2 ln alpha) and
    must exclude the array origin (radius < estimated range).
    """

    center: tuple[float, float]
    sigma: float
    alpha: float

    def __post_init__(self) -> None:
        radius = confidence_radius(self.sigma, self.alpha)  # validates sigma, alpha
        if self.center[0] <= 0:
            raise ValueError(f"center x-coordinate must be > 0, got {self.center[0]}")
        r_hat = float(np.hypot(*self.center))
        if not radius < r_hat:
            raise ValueError(
                f"uncertainty radius {radius:.6g} must be smaller than the "
                f"estimated range {r_hat:.6g}; the disc would contain the array"
            )

    @property
    def radius(self) -> float:
        return confidence_radius(self.sigma, self.alpha)

    @property
    def center_polar(self) -> PolarLocation:
        return cart_to_polar(self.center)


def polar_error_bounds(u: LocationUncertainty) -> tuple[float, float]:
    """Worst-case (angle, range) errors induced by the confidence disc.

    The angle error is arcsin(radius / estimated range) -- for a fixed
    Cartesian radius it grows as the target approaches the array -- and the
    range error equals the disc radius.
    """
    est = u.center_polar
    return float(np.arcsin(u.radius / est.range_m)), u.radius


def _projections(u: LocationUncertainty, theta) -> tuple[np.ndarray, np.ndarray]:
    """Parallel/perpendicular projections of the disc center onto direction theta."""
    x, y = u.center
    theta = np.asarray(theta, dtype=float)
    along = x * np.cos(theta) + y * np.sin(theta)
    across = x * np.sin(theta) - y * np.cos(theta)
    return along, across


def disc_range_interval(u: LocationUncertainty, theta: float) -> tuple[float, float]:
    """Range interval where the ray at angle ``theta`` crosses the disc.

    Small negative discriminants from roundoff at tangent angles are clamped
    to zero; a genuinely non-intersecting ray raises SectorOutsideDiscError.
    """
    along, across = _projections(u, theta)
    disc = u.radius**2 - float(across) ** 2
    if disc < -1e-12 * max(u.radius**2, 1e-300):
        raise SectorOutsideDiscError(f"ray at angle {theta} misses the uncertainty disc")
    half = np.sqrt(max(disc, 0.0))
    return float(along - half), float(along + half)


def sector_range_interval(
    u: LocationUncertainty, phi_lo: float, phi_hi: float
) -> tuple[float, float]:
    """Tight range enclosure of the disc within an angular sector.

    Evaluates the ray-chord endpoints at the sector boundary angles and,
    when the angle pointing at the disc center falls inside the sector, at
    that interior critical angle too (where the lower chord attains the
    global minimum range). Raises SectorOutsideDiscError when the sector
    misses the disc entirely.
    """
    if phi_hi < phi_lo:
        raise ValueError(f"need phi_lo <= phi_hi, got ({phi_lo}, {phi_hi})")
    lows: list[float] = []
    highs: list[float] = []
    tol = 1e-12 * max(u.radius**2, 1e-300)
    for phi in (phi_lo, phi_hi):
        along, across = _projections(u, phi)
        disc = u.radius**2 - float(across) ** 2
        if disc < -tol:
            continue  # boundary ray genuinely outside the disc
        half = np.sqrt(max(disc, 0.0))
        lows.append(float(along) - half)
        highs.append(float(along) + half)
    theta_c = u.center_polar.angle
    if phi_lo <= theta_c <= phi_hi:
        r_hat = u.center_polar.range_m
        lows.append(r_hat - u.radius)
        highs.append(r_hat + u.radius)
    if not lows:
        raise SectorOutsideDiscError(
            f"sector [{phi_lo}, {phi_hi}] does not intersect the uncertainty disc"
        )
    return min(lows), max(highs)


@dataclass(frozen=True)
class FanSubRegion:
    """One fan-shaped cell of the partitioned disc.

    The cell is the polar box [phi_min, phi_max] x [r_min, r_max]. The
    surrogate point (phi_s, r_s) anchors the first-order model; half_angle
    and half_range are exactly half the box widths.
    """

    phi_min: float
    phi_max: float
    r_min: float
    r_max: float
    phi_s: float
    r_s: float
    half_angle: float
    half_range: float

    def __post_init__(self) -> None:
        if not (self.phi_min <= self.phi_s <= self.phi_max):
            raise ValueError("surrogate angle outside the cell")
        if not (self.r_min <= self.r_s <= self.r_max):
            raise ValueError("surrogate range outside the cell")

    def contains(self, theta: float, r: float, tol: float = 0.0) -> bool:
        return (
            self.phi_min - tol <= theta <= self.phi_max + tol
            and self.r_min - tol <= r <= self.r_max + tol
        )


def _make_cell(u: LocationUncertainty, phi_lo: float, phi_hi: float, phi_s: float) -> FanSubRegion | None:
    """Build a cell over [phi_lo, phi_hi]; None when the sector misses the disc."""
    try:
        r_lo, r_hi = sector_range_interval(u, phi_lo, phi_hi)
    except SectorOutsideDiscError:
        return None
    if r_hi < r_lo:
        return None
    return FanSubRegion(
        phi_min=phi_lo,
        phi_max=phi_hi,
        r_min=r_lo,
        r_max=r_hi,
        phi_s=phi_s,
        r_s=0.5 * (r_lo + r_hi),
        half_angle=0.5 * (phi_hi - phi_lo),
        half_range=0.5 * (r_hi - r_lo),
    )


def _split_to_budget(u: LocationUncertainty, cell: FanSubRegion, n_elements: int) -> list[FanSubRegion]:
    """Split a cell in the sin-domain until every piece meets the 1/N budget.

    The closed-form edge cells can overshoot the budget by ~2 sin(theta_hat)
    (1 - cos(delta)) when the disc subtends a large angle off boresight;
    splitting restores the per-cell guarantee without changing coverage.
    """
    width = np.sin(cell.phi_max) - np.sin(cell.phi_min)
    budget = 1.0 / n_elements
    if width <= budget + 1e-12:
        return [cell]
    pieces = int(np.ceil(width / budget - 1e-12))
    sin_edges = np.arcsin(np.linspace(np.sin(cell.phi_min), np.sin(cell.phi_max), pieces + 1))
    out = []
    for lo, hi in zip(sin_edges[:-1], sin_edges[1:]):
        sub = _make_cell(u, float(lo), float(hi), 0.5 * (float(lo) + float(hi)))
        if sub is not None:
            out.append(sub)
    return out


def partition_region(u: LocationUncertainty, n_elements: int) -> list[FanSubRegion]:
    """Tile the confidence disc with fan-shaped cells.

    The angular span [theta_hat - d, theta_hat + d] with d = arcsin(radius /
    r_hat) is cut into 2 S + 1 sectors, S = floor((sin(theta_hat + d) -
    sin(theta_hat)) * N + 1/2): interior sectors have sin-width exactly 1/N
    and surrogate angles arcsin(sin(theta_hat) + s / N); the two edge sectors
    absorb the remainder. Each sector carries the tight range enclosure from
    :func:`sector_range_interval`, the mid-range surrogate, and half-widths.
    Sectors that miss the disc are dropped; a zero-radius disc degenerates to
    a single point cell.
    """
    if n_elements < 1:
        raise ValueError(f"n_elements must be >= 1, got {n_elements}")
    est = u.center_polar
    theta_hat, r_hat = est.angle, est.range_m
    if u.radius == 0.0:
        return [
            FanSubRegion(
                phi_min=theta_hat, phi_max=theta_hat, r_min=r_hat, r_max=r_hat,
                phi_s=theta_hat, r_s=r_hat, half_angle=0.0, half_range=0.0,
            )
        ]
    d_theta = np.arcsin(u.radius / r_hat)
    theta_ub = theta_hat + d_theta
    theta_lb = theta_hat - d_theta
    sin_hat = np.sin(theta_hat)
    big_s = int(np.floor((np.sin(theta_ub) - sin_hat) * n_elements + 0.5))

    cells: list[FanSubRegion] = []
    half = 0.5 / n_elements
    for s in range(-big_s, big_s + 1):
        if abs(s) < big_s or big_s == 0:
            phi_lo = np.arcsin(max(sin_hat + s / n_elements - half, -1.0))
            phi_hi = np.arcsin(min(sin_hat + s / n_elements + half, 1.0))
            phi_s = np.arcsin(sin_hat + s / n_elements)
            if big_s == 0:
                # single cell: the full angular span, anchored at the estimate
                phi_lo, phi_hi, phi_s = theta_lb, theta_ub, theta_hat
        elif s == big_s:
            phi_lo = min(np.arcsin(sin_hat + (big_s - 0.5) / n_elements), theta_ub)
            phi_hi = theta_ub
            phi_s = 0.5 * (phi_lo + phi_hi)
        else:  # s == -big_s
            phi_lo = theta_lb
            phi_hi = max(np.arcsin(sin_hat - (big_s - 0.5) / n_elements), theta_lb)
            phi_s = 0.5 * (phi_lo + phi_hi)
        cell = _make_cell(u, float(phi_lo), float(phi_hi), float(phi_s))
        if cell is not None:
            cells.extend(_split_to_budget(u, cell, n_elements))
    return cells
