"""Problem instances: array, users, eavesdroppers, and power/secrecy budgets."""

from __future__ import annotations

from dataclasses import dataclass, replace

from .geometry import (
    SPEED_OF_LIGHT,
    ArrayGeometry,
    LosChannel,
    default_reference_gain,
    los_channel,
)
from .lmi import LeakageThreshold, leakage_threshold
from .uncertainty import LocationUncertainty


@dataclass(frozen=True, eq=False)
class Scenario:
    """One complete secure-transmission design problem.

    Bob locations are known exactly; each eavesdropper comes with a Gaussian
    location-uncertainty model. ``nlos_ratio`` (kappa) bounds the power of
    unmodeled non-line-of-sight leakage paths relative to the line-of-sight
    path; zero means pure line of sight.
    """

    geometry: ArrayGeometry
    bob_locations: tuple[tuple[float, float], ...]
    eves: tuple[LocationUncertainty, ...]
    max_power: float = 1.0
    rate_cap: float = 1.0
    noise_power: float = 1e-9
    reference_gain: float | None = None
    nlos_ratio: float = 0.0

    def __post_init__(self) -> None:
        if self.max_power <= 0 or self.rate_cap <= 0 or self.noise_power <= 0:
            raise ValueError("power, rate cap, and noise must be positive")
        if not 0 <= self.nlos_ratio < 1:
            raise ValueError(f"nlos_ratio must lie in [0, 1), got {self.nlos_ratio}")
        if not self.bob_locations or not self.eves:
            raise ValueError("need at least one Bob and one eavesdropper")
        for q in self.bob_locations:
            if q[0] <= 0:
                raise ValueError(f"Bob location {q} must have x > 0")

    @property
    def n_bobs(self) -> int:
        return len(self.bob_locations)

    @property
    def n_eves(self) -> int:
        return len(self.eves)

    @property
    def h0(self) -> float:
        if self.reference_gain is not None:
            return self.reference_gain
        return default_reference_gain(self.geometry.wavelength)

    def bob_channels(self) -> list[LosChannel]:
        return [los_channel(q, self.h0, self.geometry) for q in self.bob_locations]

    def eve_gain_sq(self, m: int) -> float:
        """Squared channel amplitude |h_E|^2 at the estimated range."""
        r_hat = self.eves[m].center_polar.range_m
        return self.h0 / r_hat**2

    def eve_thresholds(self) -> list[LeakageThreshold]:
        return [
            leakage_threshold(
                self.noise_power, self.rate_cap, self.geometry.n_elements, self.eve_gain_sq(m)
            )
            for m in range(self.n_eves)
        ]

    def with_overrides(self, **kwargs) -> "Scenario":
        return replace(self, **kwargs)


def default_scenario(
    n_elements: int = 256,
    frequency_ghz: float = 30.0,
    sigma_c: float = 0.1,
    nlos_ratio: float = 0.0,
    bob_locations: tuple[tuple[float, float], ...] = ((50.0, 2.5), (50.0, -2.5)),
    eve_locations: tuple[tuple[float, float], ...] = ((10.0, 0.5), (10.0, -0.5)),
    alpha: float = 0.05,
) -> Scenario:
    """The default two-user/two-eavesdropper evaluation scenario.

    30 GHz carrier, 1 W budget, 1 bps/Hz leakage cap, -60 dBm noise, 95%
    confidence discs of per-axis standard deviation ``sigma_c``.
    """
    wavelength = SPEED_OF_LIGHT / (frequency_ghz * 1e9)
    return Scenario(
        geometry=ArrayGeometry(n_elements, wavelength),
        bob_locations=tuple(bob_locations),
        eves=tuple(LocationUncertainty(q, sigma_c, alpha) for q in eve_locations),
        max_power=1.0,
        rate_cap=1.0,
        noise_power=1e-9,
        nlos_ratio=nlos_ratio,
    )
