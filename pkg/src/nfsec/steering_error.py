"""Perturbation analysis of near-field steering vectors.

Quantifies how much the array response toward (angle, range) moves when the
location is perturbed: the exact vector error, closed-form single-axis error
laws (a Fresnel-integral law in range, a Dirichlet-kernel law in angle),
analytic gradients, the first-order Taylor model built on them, and the
norm-product bound used by error-bound-style robust designs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import special

from .geometry import ArrayGeometry, PolarLocation, steering_vector


def fresnel_cs(beta: float) -> tuple[float, float]:
    """Fresnel cosine and sine integrals (C(beta), S(beta)).

    C(beta) = int_0^beta cos(pi t^2 / 2) dt and likewise with sin.
    """
    if beta < 0:
        raise ValueError(f"beta must be >= 0, got {beta}")
    s, c = special.fresnel(beta)
    return float(c), float(s)


def steering_error(p1: PolarLocation, p2: PolarLocation, geo: ArrayGeometry) -> float:
    """Exact L2 distance between the steering vectors at two locations.

    Equals sqrt(2 - 2 Re{a(p1)^H a(p2)}) since both vectors are unit norm;
    always lies in [0, 2]. Evaluated as ||a(p1) - a(p2)||, the numerically
    stable form of that expression (the inner-product form loses half the
    significant digits near coinciding locations).
    """
    a1 = steering_vector(p1, geo)
    a2 = steering_vector(p2, geo)
    return float(np.linalg.norm(a1 - a2))


def range_error_law(
    theta_hat: float, r_hat: float, r: float, geo: ArrayGeometry
) -> tuple[float, float]:
    """Steering error for a pure range perturbation, closed form and linearization.

    Returns (eps_r, eps_r_lin): eps_r = sqrt(2 - 2 C(beta)/beta) with
    beta = sqrt(N^2 d^2 (1 - sin^2 theta) / (2 lambda) * |1/r - 1/r_hat|),
    and the linear law eps_r_lin = f_r * |r - r_hat| with
    f_r = pi N^2 d^2 (1 - sin^2 theta) / (2 sqrt(20) lambda r_hat^2),
    accurate while |r - r_hat| <= 0.1 r_hat.
    """
    if r <= 0 or r_hat <= 0:
        raise ValueError("ranges must be > 0")
    n, d, lam = geo.n_elements, geo.spacing, geo.wavelength
    front = n**2 * d**2 * (1.0 - np.sin(theta_hat) ** 2)
    beta = np.sqrt(front / (2.0 * lam) * abs(1.0 / r - 1.0 / r_hat))
    if beta < 1e-9:
        eps_r = 0.0  # C(beta)/beta -> 1
    else:
        c, _ = fresnel_cs(beta)
        eps_r = float(np.sqrt(max(2.0 - 2.0 * c / beta, 0.0)))
    f_r = np.pi * front / (2.0 * np.sqrt(20.0) * lam * r_hat**2)
    return eps_r, float(f_r * abs(r - r_hat))


def angle_error_law(theta_hat: float, theta: float, n_elements: int) -> tuple[float, float]:
    """Steering error for a pure angle perturbation, closed form and linearization.

    The closed form sqrt(2 - 2 w) uses the Dirichlet kernel
    w = sin(N pi xi / 2) / (N sin(pi xi / 2)) of the sine gap
    xi = sin(theta) - sin(theta_hat) while |xi| < 3 / N, and the kernel's
    first-minimum floor -1 / (N sin(3 pi / (2 N))) beyond. The linear law is
    f_theta * |theta - theta_hat| with f_theta = pi N cos(theta_hat) /
    sqrt(12), accurate while |xi| <= 1 / (2 N).
    """
    if n_elements < 1:
        raise ValueError(f"n_elements must be >= 1, got {n_elements}")
    n = n_elements
    xi = np.sin(theta) - np.sin(theta_hat)
    if abs(xi) >= 3.0 / n:
        kernel = -1.0 / (n * np.sin(3.0 * np.pi / (2.0 * n)))
    else:
        half = np.pi * xi / 2.0
        denom = np.sin(half)
        if abs(denom) < 1e-12:
            # removable singularity: series of the Dirichlet kernel at xi = 0
            kernel = 1.0 - (n * n - 1.0) * half * half / 6.0
        else:
            kernel = np.sin(n * half) / (n * denom)
    eps_t = float(np.sqrt(max(2.0 - 2.0 * kernel, 0.0)))
    f_t = np.pi * n * np.cos(theta_hat) / np.sqrt(12.0)
    return eps_t, float(f_t * abs(theta - theta_hat))


@dataclass(frozen=True)
class SteeringGradients:
    """Analytic gradients of the steering vector at one location.

    grad_angle[n] = j a_n (2 pi / lambda)(u_n cos t + u_n^2 sin t cos t / r),
    grad_range[n] = j a_n (pi u_n^2 cos^2 t) / (lambda r^2).
    """

    grad_angle: np.ndarray
    grad_range: np.ndarray


def steering_gradients(loc: PolarLocation, geo: ArrayGeometry) -> SteeringGradients:
    """Gradients of the Fresnel steering vector w.r.t. angle and range."""
    a = steering_vector(loc, geo)
    u = geo.coords
    t, r = loc.angle, loc.range_m
    k = 2.0 * np.pi / geo.wavelength
    dphi_dt = k * (u * np.cos(t) + u**2 * np.sin(t) * np.cos(t) / r)
    dphi_dr = np.pi * u**2 * np.cos(t) ** 2 / (geo.wavelength * r**2)
    return SteeringGradients(grad_angle=1j * a * dphi_dt, grad_range=1j * a * dphi_dr)


def taylor_steering_vector(
    anchor: PolarLocation, d_theta: float, d_range: float, geo: ArrayGeometry
) -> np.ndarray:
    """First-order model a(anchor) + grad_angle * d_theta + grad_range * d_range.

    Deliberately not renormalized: the robust constraints are stated on the
    raw linear model.
    """
    g = steering_gradients(anchor, geo)
    return steering_vector(anchor, geo) + g.grad_angle * d_theta + g.grad_range * d_range


def taylor_error_bound(
    anchor: PolarLocation, d_theta_max: float, d_range_max: float, geo: ArrayGeometry
) -> float:
    """Triangle-inequality bound ||grad_angle|| dt_max + ||grad_range|| dr_max.

    Unlike a unit-vector difference this is unbounded: close anchors with
    large angle uncertainty push it far above 2, which is exactly what makes
    error-bound-based designs collapse near the array.
    """
    if d_theta_max < 0 or d_range_max < 0:
        raise ValueError("error bounds must be >= 0")
    g = steering_gradients(anchor, geo)
    return float(
        np.linalg.norm(g.grad_angle) * d_theta_max + np.linalg.norm(g.grad_range) * d_range_max
    )


@dataclass(frozen=True)
class ErrorBudget:
    """All error measures for one (estimate, true location) pair."""

    exact: float
    range_law: float
    range_linear: float
    angle_law: float
    angle_linear: float
    taylor_bound: float


def error_budget(
    estimate: PolarLocation, true: PolarLocation, geo: ArrayGeometry
) -> ErrorBudget:
    """Evaluate every error measure of this module for one location pair."""
    eps_r, eps_r_lin = range_error_law(estimate.angle, estimate.range_m, true.range_m, geo)
    eps_t, eps_t_lin = angle_error_law(estimate.angle, true.angle, geo.n_elements)
    return ErrorBudget(
        exact=steering_error(estimate, true, geo),
        range_law=eps_r,
        range_linear=eps_r_lin,
        angle_law=eps_t,
        angle_linear=eps_t_lin,
        taylor_bound=taylor_error_bound(
            estimate,
            abs(true.angle - estimate.angle),
            abs(true.range_m - estimate.range_m),
            geo,
        ),
    )
