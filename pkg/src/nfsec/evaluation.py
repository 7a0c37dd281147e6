"""Ground-truth evaluation of synthesized beamformers.

Rates at the legitimate users, eavesdropping rates, a dense-grid worst-case
leakage oracle over an uncertainty disc, a seeded Monte-Carlo estimate of
the secure-transmission probability under the unbounded Gaussian location
error, and beam-pattern grids for plotting.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import ArrayGeometry, steering_inner, steering_matrix
from .scenario import Scenario
from .uncertainty import LocationUncertainty, disc_range_interval, polar_error_bounds


def bob_rates(w_set: np.ndarray, rows: np.ndarray, noise_power: float) -> list[float]:
    """Achievable rate of each user under multi-user interference.

    rows[k] is user k's conjugated channel row; rate_k = log2(1 + SINR_k)
    with SINR_k = |row_k w_k|^2 / (sum_{i != k} |row_k w_i|^2 + noise).
    """
    w_set = np.atleast_2d(w_set)
    rows = np.atleast_2d(rows)
    received = np.abs(rows @ w_set.T) ** 2  # (k, i): |row_k w_i|^2
    out = []
    for k in range(rows.shape[0]):
        interference = received[k].sum() - received[k, k]
        out.append(float(np.log2(1.0 + received[k, k] / (interference + noise_power))))
    return out


def eve_rate(w_k: np.ndarray, eve_row: np.ndarray, noise_power: float) -> float:
    """Interference-free eavesdropping rate log2(1 + |row w_k|^2 / noise)."""
    return float(np.log2(1.0 + np.abs(eve_row @ w_k) ** 2 / noise_power))


def worst_case_leakage(
    w: np.ndarray,
    u: LocationUncertainty,
    geo: ArrayGeometry,
    resolution: int = 400,
) -> tuple[float, tuple[float, float]]:
    """Max of the array gain |a(theta, r)^H w|^2 over the uncertainty disc.

    Two-level search: a coarse resolution x resolution polar grid covering
    the disc, then a 20 x 20 refinement around the coarse argmax. Returns
    the maximum and its (angle, range) location.
    """
    if resolution < 100:
        raise ValueError(f"resolution must be >= 100 per axis, got {resolution}")
    est = u.center_polar
    if u.radius == 0.0:
        gain = float(np.abs(steering_inner(w, [est.angle], [est.range_m], geo)[0]) ** 2)
        return gain, (est.angle, est.range_m)
    d_theta, _ = polar_error_bounds(u)
    thetas = np.linspace(est.angle - d_theta, est.angle + d_theta, resolution)

    def level(theta_grid: np.ndarray, lo: np.ndarray, hi: np.ndarray, n_r: int):
        tt = np.repeat(theta_grid, n_r)
        rr = np.concatenate(
            [np.linspace(a, b, n_r) for a, b in zip(lo, hi)]
        )
        gains = np.abs(steering_inner(w, tt, rr, geo)) ** 2
        i = int(np.argmax(gains))
        return float(gains[i]), float(tt[i]), float(rr[i])

    lo_hi = np.array([disc_range_interval(u, float(t)) for t in thetas])
    best, t_best, r_best = level(thetas, lo_hi[:, 0], lo_hi[:, 1], resolution)

    # refine around the coarse argmax within one coarse step in each axis
    dt = 2 * d_theta / max(resolution - 1, 1)
    t_lo = max(t_best - dt, est.angle - d_theta)
    t_hi = min(t_best + dt, est.angle + d_theta)
    fine_t = np.linspace(t_lo, t_hi, 20)
    fine_bounds = np.array([disc_range_interval(u, float(t)) for t in fine_t])
    chord = fine_bounds[:, 1] - fine_bounds[:, 0]
    dr = chord / max(resolution - 1, 1)
    lo = np.maximum(fine_bounds[:, 0], r_best - 2 * dr.max())
    hi = np.minimum(fine_bounds[:, 1], r_best + 2 * dr.max())
    lo, hi = np.minimum(lo, hi), np.maximum(lo, hi)
    fine_best, ft, fr = level(fine_t, lo, hi, 20)
    if fine_best > best:
        return fine_best, (ft, fr)
    return best, (t_best, r_best)


def secure_probability(
    w_set: np.ndarray,
    scenario: Scenario,
    trials: int = 10_000,
    seed: int = 0,
    chunk: int = 2048,
) -> tuple[float, float]:
    """Monte-Carlo probability that no eavesdropper exceeds the rate cap.

    Draws i.i.d. Gaussian location errors (the unbounded model, not the
    truncated disc) for every eavesdropper, evaluates each one's channel at
    its true location, and counts trials where every (eve, user) pair stays
    at or below the rate cap. Returns (p_full, p_disc): the headline
    probability over the full Gaussian and the companion estimate
    conditioned on all errors falling inside their confidence discs.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    w_set = np.atleast_2d(w_set)
    rng = np.random.default_rng(seed)
    geo = scenario.geometry
    budget = scenario.noise_power * (2.0**scenario.rate_cap - 1.0)
    n = geo.n_elements
    secure = np.ones(trials, dtype=bool)
    in_disc = np.ones(trials, dtype=bool)
    for m, u in enumerate(scenario.eves):
        errors = rng.normal(scale=u.sigma, size=(trials, 2)) if u.sigma > 0 else np.zeros((trials, 2))
        pts = np.asarray(u.center) + errors
        in_disc &= np.hypot(errors[:, 0], errors[:, 1]) <= u.radius
        r_true = np.hypot(pts[:, 0], pts[:, 1])
        t_true = np.arctan2(pts[:, 1], pts[:, 0])
        amp_sq = scenario.h0 / r_true**2  # |h_E|^2 at the true range
        for lo in range(0, trials, chunk):
            hi = lo + chunk
            mat = steering_matrix(t_true[lo:hi], r_true[lo:hi], geo)
            gains = np.abs(mat.conj() @ w_set.T) ** 2  # (chunk, K)
            leak = n * amp_sq[lo:hi, None] * gains  # received power per (trial, k)
            secure[lo:hi] &= (leak <= budget).all(axis=1)
    p_full = float(secure.mean())
    p_disc = float(secure[in_disc].mean()) if in_disc.any() else 1.0
    return p_full, p_disc


def beam_pattern(
    w_set: np.ndarray,
    x_range: tuple[float, float],
    y_range: tuple[float, float],
    resolution: int,
    geo: ArrayGeometry,
    include_path_loss: bool = False,
    reference_gain: float = 1.0,
) -> np.ndarray:
    """Total array gain sum_k |a(x, y)^H w_k|^2 over a Cartesian grid.

    Row-major over the grid: entry (i, j) is the gain at (x_i, y_j). Pure
    spatial focusing by default; with ``include_path_loss`` the gain is
    weighted by N |h|^2 = N reference_gain / r^2.
    """
    if x_range[0] <= 0:
        raise ValueError("grid must lie in the front half-plane x > 0")
    w_set = np.atleast_2d(w_set)
    xs = np.linspace(*x_range, resolution)
    ys = np.linspace(*y_range, resolution)
    xg, yg = np.meshgrid(xs, ys, indexing="ij")
    rr = np.hypot(xg, yg).ravel()
    tt = np.arctan2(yg, xg).ravel()
    total = np.zeros(rr.shape[0])
    for w in w_set:
        total += np.abs(steering_inner(w, tt, rr, geo)) ** 2
    if include_path_loss:
        total *= geo.n_elements * reference_gain / rr**2
    return total.reshape(resolution, resolution)


@dataclass
class EvalReport:
    """Ground-truth evaluation of one beamformer set on one scenario."""

    bob_rates: list[float]
    sum_rate: float
    worst_leakage: np.ndarray  # (M, K) max |a^H w_k|^2 over each disc
    worst_eve_rates: np.ndarray  # (M, K) rates at the leakage argmax
    secure_probability: float  # over the full Gaussian error
    secure_probability_disc: float  # conditioned on errors inside the disc
    trials: int
    seed: int


def evaluate(
    w_set: np.ndarray,
    scenario: Scenario,
    trials: int = 10_000,
    seed: int = 0,
    resolution: int = 400,
) -> EvalReport:
    """Full evaluation: user rates, per-disc worst leakage, secure probability.

    Worst-case eavesdropping rates convert the leakage maxima with the
    channel amplitude at the estimated range (amplitude error over the disc
    is second order).
    """
    w_set = np.atleast_2d(w_set)
    rows = np.array([ch.row for ch in scenario.bob_channels()])
    rates = bob_rates(w_set, rows, scenario.noise_power)
    m_count, k_count = scenario.n_eves, scenario.n_bobs
    leak = np.zeros((m_count, k_count))
    eve_rates = np.zeros((m_count, k_count))
    for m, u in enumerate(scenario.eves):
        amp_sq = scenario.eve_gain_sq(m)
        for k in range(k_count):
            worst, _ = worst_case_leakage(w_set[k], u, scenario.geometry, resolution)
            leak[m, k] = worst
            received = scenario.geometry.n_elements * amp_sq * worst
            eve_rates[m, k] = np.log2(1.0 + received / scenario.noise_power)
    p_full, p_disc = secure_probability(w_set, scenario, trials=trials, seed=seed)
    return EvalReport(
        bob_rates=rates,
        sum_rate=float(sum(rates)),
        worst_leakage=leak,
        worst_eve_rates=eve_rates,
        secure_probability=p_full,
        secure_probability_disc=p_disc,
        trials=trials,
        seed=seed,
    )
