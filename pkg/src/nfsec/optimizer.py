"""Beamformer synthesis: six schemes around one inner-approximation loop.

Every scheme maximizes the (sum) rate of the legitimate users subject to a
transmit power budget and its own rendering of the worst-case leakage
constraints; the non-concave rate objective is handled by iterating concave
tangent surrogates (each subproblem is a conic program, constraints fixed
across iterations, only the objective linearization moves).

Schemes
-------
non_robust      leakage capped only at the estimated eavesdropper locations
sampling        caps at uniformly sampled angles, each paired with the
                extreme ranges of the disc along that angle
error_bound     one norm-ball block per (eve, bob) with the exact
                steering-error bound maximized over the whole disc
partition_only  norm-ball blocks per partition cell with per-cell bounds
refined_only    one first-order 4x4 block anchored at the estimate with
                whole-disc half-widths
proposed        first-order 4x4 blocks per partition cell
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .conic import (
    INFEASIBLE,
    OPTIMAL,
    CompiledProgram,
    ConicProgram,
    LinearObjective,
    NormSumCone,
    QuadCone,
)
from .geometry import PolarLocation, steering_inner, steering_vector
from .lmi import LmiBlock, build_error_bound_lmi, build_refined_lmi_from_vectors
from .scenario import Scenario
from .steering_error import steering_gradients
from .uncertainty import FanSubRegion, disc_range_interval, partition_region, polar_error_bounds

LN2 = float(np.log(2.0))


class Scheme(str, Enum):
    NON_ROBUST = "non_robust"
    SAMPLING = "sampling"
    ERROR_BOUND = "error_bound"
    PARTITION_ONLY = "partition_only"
    REFINED_ONLY = "refined_only"
    PROPOSED = "proposed"


class SolverFailure(RuntimeError):
    """The conic backend failed numerically (not an infeasibility)."""


@dataclass
class SolveOptions:
    max_iterations: int = 50
    objective_tol: float = 1e-4  # bits/s/Hz change between iterations
    sampling_points: int = 100  # angle samples per eavesdropper
    bound_grid: int = 400  # disc grid for the exact error bound
    cell_bound_grid: int = 100  # per-cell grid for partition-only bounds
    error_bound_override: float | None = None  # force the ball radius
    ball_block_max_size: int = 128  # above this N, lower norm-ball blocks
    # to their exact second-order-cone form (identical feasible set; the
    # size-(N+2) semidefinite form dominates solve time at XL apertures)
    bisection_tol: float = 1e-6
    solver: str = "CLARABEL"

    def as_dict(self) -> dict:
        return {
            "max_iterations": self.max_iterations,
            "objective_tol": self.objective_tol,
            "sampling_points": self.sampling_points,
            "bound_grid": self.bound_grid,
            "cell_bound_grid": self.cell_bound_grid,
            "error_bound_override": self.error_bound_override,
            "ball_block_max_size": self.ball_block_max_size,
            "bisection_tol": self.bisection_tol,
            "solver": self.solver,
        }


# --------------------------------------------------------------- constraints


@dataclass(frozen=True, eq=False)
class PointConstraint:
    """|a^H w_k|^2 <= gamma at one location."""

    bob: int
    eve: int
    gamma: float
    a: np.ndarray

    def model_leakage(self, w: np.ndarray) -> float:
        return float(np.abs(np.vdot(self.a, w)) ** 2)


@dataclass(frozen=True, eq=False)
class BallConstraint:
    """Worst case of |(a + e)^H w_k|^2 over ||e|| <= eps."""

    bob: int
    eve: int
    gamma: float
    a: np.ndarray
    eps: float
    cell: FanSubRegion | None = None  # the region the ball models, if any

    def model_leakage(self, w: np.ndarray) -> float:
        return float((np.abs(np.vdot(self.a, w)) + self.eps * np.linalg.norm(w)) ** 2)


@dataclass(frozen=True, eq=False)
class RefinedConstraint:
    """First-order worst case over a fan cell around its surrogate point."""

    bob: int
    eve: int
    gamma: float
    cell: FanSubRegion
    a: np.ndarray
    grad_range: np.ndarray
    grad_angle: np.ndarray

    def model_leakage(self, w: np.ndarray) -> float:
        level = (
            np.abs(np.vdot(self.a, w))
            + self.cell.half_range * np.abs(np.vdot(self.grad_range, w))
            + self.cell.half_angle * np.abs(np.vdot(self.grad_angle, w))
        )
        return float(level**2)


SecrecyConstraint = PointConstraint | BallConstraint | RefinedConstraint


def _max_steering_distance(u, anchor: PolarLocation, geo, resolution: int) -> float:
    """Exact max of ||a(theta, r) - a(anchor)|| over the disc, dense grid."""
    thetas, ranges = _disc_grid(u, resolution)
    inner = steering_inner(steering_vector(anchor, geo), thetas, ranges, geo)
    # || a(g) - a_hat ||^2 = 2 - 2 Re <a(g), a_hat>
    return float(np.sqrt(np.max(2.0 - 2.0 * inner.real)))


def _max_cell_distance(u, cell: FanSubRegion, geo, resolution: int) -> float:
    """Max of ||a(theta, r) - a(surrogate)|| over one cell's polar box."""
    th = np.linspace(cell.phi_min, cell.phi_max, resolution)
    rr = np.linspace(cell.r_min, cell.r_max, resolution)
    tg, rg = np.meshgrid(th, rr, indexing="ij")
    anchor = steering_vector(PolarLocation(cell.phi_s, cell.r_s), geo)
    inner = steering_inner(anchor, tg.ravel(), rg.ravel(), geo)
    return float(np.sqrt(np.max(2.0 - 2.0 * inner.real)))


def _disc_grid(u, resolution: int) -> tuple[np.ndarray, np.ndarray]:
    """Polar grid covering the uncertainty disc: per-angle chord sweeps."""
    est = u.center_polar
    if u.radius == 0.0:
        return np.array([est.angle]), np.array([est.range_m])
    d_theta, _ = polar_error_bounds(u)
    thetas = np.linspace(est.angle - d_theta, est.angle + d_theta, resolution)
    all_t = np.empty(resolution * resolution)
    all_r = np.empty(resolution * resolution)
    for i, t in enumerate(thetas):
        lo, hi = disc_range_interval(u, float(t))
        all_t[i * resolution : (i + 1) * resolution] = t
        all_r[i * resolution : (i + 1) * resolution] = np.linspace(lo, hi, resolution)
    return all_t, all_r


def _whole_disc_cell(u) -> FanSubRegion:
    """The uncertainty disc as a single fan cell anchored at the estimate."""
    est = u.center_polar
    d_theta, d_range = polar_error_bounds(u)
    return FanSubRegion(
        phi_min=est.angle - d_theta,
        phi_max=est.angle + d_theta,
        r_min=est.range_m - d_range,
        r_max=est.range_m + d_range,
        phi_s=est.angle,
        r_s=est.range_m,
        half_angle=d_theta,
        half_range=d_range,
    )


def _refined_constraint(gamma, cell, geo, bob, eve) -> RefinedConstraint:
    surrogate = PolarLocation(cell.phi_s, cell.r_s)
    g = steering_gradients(surrogate, geo)
    return RefinedConstraint(
        bob=bob,
        eve=eve,
        gamma=gamma,
        cell=cell,
        a=steering_vector(surrogate, geo),
        grad_range=g.grad_range,
        grad_angle=g.grad_angle,
    )


def build_secrecy_constraints(
    scenario: Scenario, scheme: Scheme, options: SolveOptions | None = None
) -> list[SecrecyConstraint]:
    """The scheme-specific rendering of the worst-case leakage constraints."""
    options = options or SolveOptions()
    geo = scenario.geometry
    k_range = range(scenario.n_bobs)
    gammas = [t.gamma for t in scenario.eve_thresholds()]
    out: list[SecrecyConstraint] = []
    for m, u in enumerate(scenario.eves):
        gamma = gammas[m]
        est = u.center_polar
        if scheme == Scheme.NON_ROBUST:
            a_hat = steering_vector(est, geo)
            out.extend(PointConstraint(k, m, gamma, a_hat) for k in k_range)
        elif scheme == Scheme.SAMPLING:
            d_theta, _ = polar_error_bounds(u)
            angles = np.linspace(est.angle - d_theta, est.angle + d_theta,
                                 max(options.sampling_points, 1))
            pairs: list[tuple[float, float]] = []
            for t in angles:
                lo, hi = disc_range_interval(u, float(t))
                along = u.center[0] * np.cos(t) + u.center[1] * np.sin(t)
                for r in (lo, hi, float(along)):
                    if all(abs(r - r0) > 1e-12 or abs(t - t0) > 1e-15 for t0, r0 in pairs):
                        pairs.append((float(t), r))
            for t, r in pairs:
                a = steering_vector(PolarLocation(t, r), geo)
                out.extend(PointConstraint(k, m, gamma, a) for k in k_range)
        elif scheme == Scheme.ERROR_BOUND:
            if options.error_bound_override is not None:
                eps = options.error_bound_override
            else:
                eps = _max_steering_distance(u, est, geo, options.bound_grid)
            a_hat = steering_vector(est, geo)
            out.extend(BallConstraint(k, m, gamma, a_hat, eps) for k in k_range)
        elif scheme == Scheme.PARTITION_ONLY:
            for cell in partition_region(u, geo.n_elements):
                a_s = steering_vector(PolarLocation(cell.phi_s, cell.r_s), geo)
                eps = _max_cell_distance(u, cell, geo, options.cell_bound_grid)
                out.extend(BallConstraint(k, m, gamma, a_s, eps, cell=cell) for k in k_range)
        elif scheme == Scheme.REFINED_ONLY:
            cell = _whole_disc_cell(u)
            out.extend(_refined_constraint(gamma, cell, geo, k, m) for k in k_range)
        elif scheme == Scheme.PROPOSED:
            for cell in partition_region(u, geo.n_elements):
                out.extend(_refined_constraint(gamma, cell, geo, k, m) for k in k_range)
        else:  # pragma: no cover
            raise ValueError(f"unknown scheme {scheme}")
    return out


def constraints_satisfied(
    constraints: list[SecrecyConstraint],
    w_set: np.ndarray,
    nlos_ratio: float = 0.0,
    slack: float = 0.0,
) -> bool:
    """Check a beamformer set against each constraint's own leakage model."""
    kappa_sq = nlos_ratio**2
    for c in constraints:
        w = w_set[c.bob]
        lhs = c.model_leakage(w) + kappa_sq * float(np.linalg.norm(w) ** 2)
        if lhs > c.gamma * (1.0 + slack):
            return False
    return True


# ------------------------------------------------------------- program parts


def _program_skeleton(
    scenario: Scenario,
    constraints: list[SecrecyConstraint],
    options: SolveOptions | None = None,
) -> ConicProgram:
    """Fixed constraint set of the iteration subproblems (objective moves).

    Leakage blocks are lowered in gamma-normalized form (amplitudes divided
    by sqrt(gamma), cap 1): a symmetric congruence with an identical
    feasible set that keeps interior-point scaling healthy when gamma is
    orders of magnitude below the power budget.
    """
    options = options or SolveOptions()
    n = scenario.geometry.n_elements
    k_count = scenario.n_bobs
    kappa_sq = scenario.nlos_ratio**2
    names = [f"w_{k}" for k in range(k_count)]
    cones: list = [
        QuadCone(
            terms=tuple((name, np.eye(n, dtype=complex)) for name in names),
            bound_const=scenario.max_power,
        )
    ]
    nlos_vars: list[dict[str, float] | None] = [None] * k_count
    if kappa_sq > 0.0:
        for k, name in enumerate(names):
            nlos_vars[k] = {f"p_{k}": -kappa_sq}
            cones.append(
                QuadCone(
                    terms=((name, np.eye(n, dtype=complex)),),
                    bound_const=0.0,
                    bound_scalars={f"p_{k}": 1.0},
                )
            )

    def scaled_nlos(bob: int, gamma: float) -> dict[str, float] | None:
        terms = nlos_vars[bob]
        if terms is None:
            return None
        return {s: coeff / gamma for s, coeff in terms.items()}

    lmis: list[LmiBlock] = []
    for i, c in enumerate(constraints):
        name = names[c.bob]
        root = np.sqrt(c.gamma)
        if isinstance(c, PointConstraint):
            cones.append(
                QuadCone(
                    terms=((name, c.a.conj()[None, :] / root),),
                    bound_const=1.0,
                    bound_scalars=scaled_nlos(c.bob, c.gamma) or {},
                )
            )
        elif isinstance(c, BallConstraint):
            if n > options.ball_block_max_size:
                cones.append(
                    NormSumCone(
                        terms=(
                            (name, c.a.conj()[None, :] / root),
                            (name, (c.eps / root) * np.eye(n, dtype=complex)),
                        ),
                        bound_const=1.0,
                        bound_scalars=scaled_nlos(c.bob, c.gamma) or {},
                    )
                )
            else:
                lmis.append(
                    build_error_bound_lmi(
                        1.0, c.a / root, c.eps / root, var=name, lam=f"lam_e[{i}]",
                        gamma_terms=scaled_nlos(c.bob, c.gamma),
                    )
                )
        else:
            lmis.append(
                build_refined_lmi_from_vectors(
                    1.0,
                    c.a / root,
                    c.grad_range / root,
                    c.grad_angle / root,
                    c.cell.half_range,
                    c.cell.half_angle,
                    var=name,
                    lam_range=f"lam_r[{i}]",
                    lam_angle=f"lam_t[{i}]",
                    gamma_terms=scaled_nlos(c.bob, c.gamma),
                )
            )
    if scenario.n_bobs > 1:
        # epigraph variables t[k,i] >= |unit_row_k^H w_i|^2 for the concave
        # quadratic part of the multi-user surrogate
        rows = np.array([ch.row for ch in scenario.bob_channels()])
        units = rows / np.linalg.norm(rows, axis=1, keepdims=True)
        for k in range(k_count):
            for i in range(k_count):
                cones.append(
                    QuadCone(
                        terms=((names[i], units[k][None, :]),),
                        bound_const=0.0,
                        bound_scalars={f"t[{k},{i}]": 1.0},
                    )
                )
    return ConicProgram(
        vector_dims={name: n for name in names},
        objective=LinearObjective(),
        cones=cones,
        lmis=lmis,
    )


# ---------------------------------------------------------------- surrogates


def sca_surrogate_single(w_prev: np.ndarray, row: np.ndarray) -> tuple[np.ndarray, float]:
    """Tangent affine minorant of |h^H w|^2 at w_prev.

    Returns (c, const) with the surrogate value Re(c^H w) + const; at
    w = w_prev it equals |h^H w_prev|^2 and its gradient matches.
    """
    inner = complex(row @ w_prev)
    c = 2.0 * inner * np.conj(row)
    return c, -float(np.abs(inner) ** 2)


@dataclass(frozen=True, eq=False)
class MultiUserSurrogate:
    """Concave tangent minorant of the sum-rate at a reference point.

    value(w) = constant + sum_k Re(linear[k]^H w_k)
             - sum_{k,i} quad_weight[k, i] |row_k^H w_i|^2,
    with all quad weights >= 0. Tight (value and gradient) at the
    reference beamformers.
    """

    constant: float
    linear: np.ndarray  # (K, N) coefficient c_k for w_k
    quad_weight: np.ndarray  # (K, K) weight on |row_k^H w_i|^2
    rows: np.ndarray  # (K, N)

    def value(self, w_set: np.ndarray) -> float:
        total = self.constant
        for k in range(self.rows.shape[0]):
            total += float((np.conj(self.linear[k]) @ w_set[k]).real)
            for i in range(self.rows.shape[0]):
                total -= self.quad_weight[k, i] * float(
                    np.abs(self.rows[k] @ w_set[i]) ** 2
                )
        return total


def sca_surrogate_multi(
    w_prev: np.ndarray, rows: np.ndarray, noise_power: float
) -> MultiUserSurrogate:
    """Per-user concave lower bounds of log2(1 + SINR), summed.

    Each user's bound linearizes the signal term around w_prev and weights
    the full received power (signal plus interference) by the negative
    factor |i_k|^2 / (nu_k (|i_k|^2 + nu_k)) evaluated at w_prev.
    """
    k_count = rows.shape[0]
    constant = 0.0
    linear = np.zeros_like(rows)
    quad = np.zeros((k_count, k_count))
    for k in range(k_count):
        inner_k = complex(rows[k] @ w_prev[k])
        nu = noise_power + sum(
            float(np.abs(rows[k] @ w_prev[i]) ** 2) for i in range(k_count) if i != k
        )
        sig = float(np.abs(inner_k) ** 2)
        gamma_prev = sig / nu
        mu = sig / (nu * (sig + nu))
        constant += (np.log1p(gamma_prev) / LN2) - gamma_prev / LN2 - mu * noise_power / LN2
        linear[k] = (2.0 / (LN2 * nu)) * inner_k * np.conj(rows[k])
        quad[k, :] = mu / LN2
    return MultiUserSurrogate(constant=constant, linear=linear, quad_weight=quad, rows=rows)


# ------------------------------------------------------------- initialization


def initialize_beamformers(
    scenario: Scenario, scheme: Scheme = Scheme.PROPOSED, options: SolveOptions | None = None
) -> np.ndarray:
    """Feasible starting point: power-split matched filters, scaled back.

    Each user gets the matched-filter direction at an equal share of the
    power budget; if that violates any secrecy constraint, the whole set is
    scaled down by bisection (to the stated lattice) until feasible. The
    zero vector leaks nothing, so a feasible scale always exists.
    """
    options = options or SolveOptions()
    constraints = build_secrecy_constraints(scenario, scheme, options)
    return _initialize_from_constraints(scenario, constraints, options)


def _initialize_from_constraints(
    scenario: Scenario, constraints: list[SecrecyConstraint], options: SolveOptions
) -> np.ndarray:
    rows = np.array([ch.row for ch in scenario.bob_channels()])
    k_count = rows.shape[0]
    w = np.conj(rows) / np.linalg.norm(rows, axis=1, keepdims=True)
    w *= np.sqrt(scenario.max_power / k_count)

    def feasible(scale: float) -> bool:
        return constraints_satisfied(constraints, scale * w, scenario.nlos_ratio)

    if feasible(1.0):
        return w
    lo, hi = 0.0, 1.0
    while hi - lo > options.bisection_tol:
        mid = 0.5 * (lo + hi)
        if feasible(mid):
            lo = mid
        else:
            hi = mid
    return lo * w


# ----------------------------------------------------------------- main loop


@dataclass
class SolveReport:
    """Outcome of one scheme solve."""

    beamformers: np.ndarray  # (K, N) complex
    status: str  # "optimal" | "infeasible" | "max_iterations"
    trajectory: list[float] = field(default_factory=list)  # sum-rate per iteration
    iterations: int = 0
    wall_time: float = 0.0
    infeasible_at: int | None = None
    solver_settings: dict = field(default_factory=dict)


def _sum_rate(w_set: np.ndarray, rows: np.ndarray, noise_power: float) -> float:
    from .evaluation import bob_rates

    return float(sum(bob_rates(w_set, rows, noise_power)))


def _objective_at(
    w_prev: np.ndarray, rows: np.ndarray, gains: np.ndarray, noise_power: float
) -> LinearObjective:
    """Normalized surrogate objective for the current linearization point."""
    k_count = rows.shape[0]
    if k_count == 1:
        c, _ = sca_surrogate_single(w_prev[0], rows[0])
        scale = max(float(np.abs(c).max()), 1e-300)
        return LinearObjective(vector_coeffs={"w_0": c / scale})
    sur = sca_surrogate_multi(w_prev, rows, noise_power)
    scalar_coeffs = {
        f"t[{k},{i}]": -sur.quad_weight[k, i] * float(gains[k] ** 2)
        for k in range(k_count)
        for i in range(k_count)
    }
    scale = max(
        float(np.abs(sur.linear).max()),
        max(abs(v) for v in scalar_coeffs.values()),
        1e-300,
    )
    return LinearObjective(
        vector_coeffs={f"w_{k}": sur.linear[k] / scale for k in range(k_count)},
        scalar_coeffs={name: v / scale for name, v in scalar_coeffs.items()},
    )


def solve_scheme(
    scenario: Scenario, scheme: Scheme | str, options: SolveOptions | None = None
) -> SolveReport:
    """Run the iterated-surrogate loop for one scheme to convergence.

    Stops when the sum-rate changes by less than ``objective_tol`` between
    iterations or after ``max_iterations``. An infeasible subproblem is
    reported with its iteration index; the trajectory records the true
    achieved sum-rate after every iteration, starting from the feasible
    initialization.
    """
    scheme = Scheme(scheme)
    options = options or SolveOptions()
    t0 = time.perf_counter()
    constraints = build_secrecy_constraints(scenario, scheme, options)
    program = _program_skeleton(scenario, constraints, options)
    compiled = CompiledProgram(program, solver=options.solver)
    rows = np.array([ch.row for ch in scenario.bob_channels()])
    gains = np.linalg.norm(rows, axis=1)
    w = _initialize_from_constraints(scenario, constraints, options)
    trajectory = [_sum_rate(w, rows, scenario.noise_power)]
    settings = {"scheme": scheme.value, **options.as_dict()}
    status = "max_iterations"
    iterations = 0
    for j in range(1, options.max_iterations + 1):
        sol = compiled.solve(_objective_at(w, rows, gains, scenario.noise_power))
        if sol.status == INFEASIBLE:
            return SolveReport(
                beamformers=w,
                status="infeasible",
                trajectory=trajectory,
                iterations=j,
                wall_time=time.perf_counter() - t0,
                infeasible_at=j,
                solver_settings=settings,
            )
        if sol.status != OPTIMAL:
            raise SolverFailure(f"conic backend failed at iteration {j}: {sol.raw_status}")
        w = np.array([sol.vectors[f"w_{k}"] for k in range(scenario.n_bobs)])
        iterations = j
        trajectory.append(_sum_rate(w, rows, scenario.noise_power))
        if abs(trajectory[-1] - trajectory[-2]) < options.objective_tol:
            status = "optimal"
            break
    return SolveReport(
        beamformers=w,
        status=status,
        trajectory=trajectory,
        iterations=iterations,
        wall_time=time.perf_counter() - t0,
        solver_settings=settings,
    )
