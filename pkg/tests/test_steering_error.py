import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from nfsec.geometry import ArrayGeometry, PolarLocation, steering_vector
from nfsec.steering_error import (
    angle_error_law,
    error_budget,
    fresnel_cs,
    range_error_law,
    steering_error,
    steering_gradients,
    taylor_error_bound,
    taylor_steering_vector,
)
from nfsec.uncertainty import LocationUncertainty, partition_region

GEO256 = ArrayGeometry(256, 0.01)
GEO64 = ArrayGeometry(64, 0.01)


# ---------------------------------------------------------------- exact error


def test_steering_error_zero_and_range():
    p = PolarLocation(0.1, 12.0)
    assert steering_error(p, p, GEO256) == 0.0
    rng = np.random.default_rng(0)
    for _ in range(20):
        p1 = PolarLocation(rng.uniform(-1, 1), rng.uniform(2, 100))
        p2 = PolarLocation(rng.uniform(-1, 1), rng.uniform(2, 100))
        e = steering_error(p1, p2, GEO256)
        assert 0.0 <= e <= 2.0


def test_steering_error_matches_inner_product_oracle():
    # oracle: the raw sqrt(2 - 2 Re a1^H a2) form of the same quantity
    p1 = PolarLocation(0.0, 10.0)
    p2 = PolarLocation(0.02, 10.0)
    inner = np.vdot(steering_vector(p1, GEO256), steering_vector(p2, GEO256))
    formula = np.sqrt(2.0 - 2.0 * inner.real)
    assert abs(steering_error(p1, p2, GEO256) - formula) < 1e-10


@settings(max_examples=40, deadline=None)
@given(
    t1=st.floats(-1.0, 1.0), r1=st.floats(2.0, 100.0),
    t2=st.floats(-1.0, 1.0), r2=st.floats(2.0, 100.0),
)
def test_steering_error_symmetric(t1, r1, t2, r2):
    p1, p2 = PolarLocation(t1, r1), PolarLocation(t2, r2)
    assert abs(steering_error(p1, p2, GEO64) - steering_error(p2, p1, GEO64)) < 1e-12
    direct = np.linalg.norm(steering_vector(p1, GEO64) - steering_vector(p2, GEO64))
    assert abs(steering_error(p1, p2, GEO64) - direct) < 1e-10


# ---------------------------------------------------------- fresnel integrals


def test_fresnel_values_against_quadrature_oracle():
    assert fresnel_cs(0.0) == (0.0, 0.0)
    for beta in [0.3, 1.0, 2.5, 7.0]:
        c_ref = quad(lambda t: np.cos(np.pi * t**2 / 2), 0, beta, limit=200)[0]
        s_ref = quad(lambda t: np.sin(np.pi * t**2 / 2), 0, beta, limit=200)[0]
        c, s = fresnel_cs(beta)
        assert abs(c - c_ref) < 1e-9
        assert abs(s - s_ref) < 1e-9
    c1, _ = fresnel_cs(1.0)
    np.testing.assert_allclose(c1, 0.7798934, atol=1e-7)


def test_fresnel_small_argument_limit():
    beta = 1e-4
    c, _ = fresnel_cs(beta)
    assert abs(c / beta - 1.0) < 1e-6


def test_fresnel_rejects_negative():
    with pytest.raises(ValueError):
        fresnel_cs(-0.1)


# ------------------------------------------------------------------ laws


def test_range_law_zero_perturbation():
    assert range_error_law(0.0, 10.0, 10.0, GEO256) == (0.0, 0.0)


def test_range_law_linear_coefficient_value():
    # f_r(0, 10) = pi N^2 d^2 / (2 sqrt(20) lam r^2) = 0.5754728 per meter
    _, lin = range_error_law(0.0, 10.0, 11.0, GEO256)
    np.testing.assert_allclose(lin, 0.5754728, rtol=1e-6)


def test_range_law_against_exact_oracle_inside_regime():
    # validity regime |dr| <= 0.1 r_hat; compare with max(exact, 1e-3) floor
    theta, r_hat, dr = 0.0, 10.0, 0.5
    exact = steering_error(PolarLocation(theta, r_hat), PolarLocation(theta, r_hat + dr), GEO256)
    law, lin = range_error_law(theta, r_hat, r_hat + dr, GEO256)
    den = max(exact, 1e-3)
    assert abs(lin - exact) / den <= 0.15
    assert abs(law - exact) / den <= 0.15


def test_angle_law_zero_perturbation():
    assert angle_error_law(0.1, 0.1, 256) == (0.0, 0.0)


def test_angle_law_linear_coefficient_value():
    # f_theta(0) = pi N / sqrt(12) = 232.166 per radian at N = 256
    _, lin = angle_error_law(0.0, 1.0, 256)
    np.testing.assert_allclose(lin, 232.16631862, rtol=1e-9)


def test_angle_law_against_exact_oracle_inside_regime():
    n = 256
    xi = 1.0 / (2 * n)
    theta = np.arcsin(xi)
    exact = steering_error(PolarLocation(0.0, 10.0), PolarLocation(theta, 10.0), GEO256)
    law, lin = angle_error_law(0.0, theta, n)
    assert abs(lin - exact) / exact <= 0.10
    assert abs(law - exact) / exact <= 0.10


def test_angle_law_monotone_in_sine_gap():
    # Non-decreasing up to a 1e-2 slack: the Dirichlet kernel attains its
    # true minimum near 2.86/N, slightly before the 3/N switch to the
    # kernel-floor value, so the law dips by a few 1e-3 in that tail.
    for n in (8, 64, 256):
        xis = np.linspace(0.0, 3.0 / n, 60)
        vals = [angle_error_law(0.0, np.arcsin(x), n)[0] for x in xis]
        assert all(b >= a - 1e-2 for a, b in zip(vals[:-1], vals[1:]))
        # strictly monotone over the first 90% of the interval
        head = vals[: int(0.9 * len(vals))]
        assert all(b >= a - 1e-12 for a, b in zip(head[:-1], head[1:]))


def _beta_sq(n, theta, r_hat, r):
    d = 0.005
    return n**2 * d**2 * (1 - np.sin(theta) ** 2) / (2 * 0.01) * abs(1 / r - 1 / r_hat)


@settings(max_examples=50, deadline=None)
@given(
    n=st.sampled_from([64, 256]),
    theta=st.floats(-0.8, 0.8),
    r_hat=st.floats(5.0, 60.0),
    frac=st.floats(0.02, 0.1),
    sign=st.sampled_from([-1.0, 1.0]),
)
def test_lemma_laws_within_15pct_of_exact(n, theta, r_hat, frac, sign):
    geo = ArrayGeometry(n, 0.01)
    # range law: the closed form holds on the whole |dr| <= 0.1 r_hat window;
    # its linearization additionally needs the quartic-integrand condition
    # beta^2 <= 1/pi from its derivation.
    dr = sign * frac * r_hat
    exact_r = steering_error(PolarLocation(theta, r_hat), PolarLocation(theta, r_hat + dr), geo)
    law_r, lin_r = range_error_law(theta, r_hat, r_hat + dr, geo)
    den = max(exact_r, 1e-3)
    assert abs(law_r - exact_r) / den <= 0.15
    if _beta_sq(n, theta, r_hat, r_hat + dr) <= 1 / np.pi:
        assert abs(lin_r - exact_r) / den <= 0.15
    # angle law inside its regime
    xi = sign * frac * 5.0 / (2 * n)  # up to half the 1/(2N) budget and beyond
    s2 = np.sin(theta) + xi
    if abs(s2) < 1.0:
        theta2 = np.arcsin(s2)
        exact_t = steering_error(PolarLocation(theta, r_hat), PolarLocation(theta2, r_hat), geo)
        law_t, lin_t = angle_error_law(theta, theta2, n)
        den = max(exact_t, 1e-3)
        assert abs(law_t - exact_t) / den <= 0.15
        assert abs(lin_t - exact_t) / den <= 0.15


def test_range_linear_law_exceeds_15pct_beyond_beta_condition():
    # Documents why the beta^2 <= 1/pi condition matters: within
    # |dr| <= 0.1 r_hat but with beta^2 ~ 1.5 the linearization overshoots.
    geo = ArrayGeometry(256, 0.01)
    exact = steering_error(PolarLocation(0.0, 5.0), PolarLocation(0.0, 5.5), geo)
    _, lin = range_error_law(0.0, 5.0, 5.5, geo)
    assert _beta_sq(256, 0.0, 5.0, 5.5) > 1 / np.pi
    assert abs(lin - exact) / exact > 0.15


# ------------------------------------------------------------------ gradients


def _fd_gradients(loc, geo, ht=1e-6, hr=1e-4):
    up_t = steering_vector(PolarLocation(loc.angle + ht, loc.range_m), geo)
    dn_t = steering_vector(PolarLocation(loc.angle - ht, loc.range_m), geo)
    up_r = steering_vector(PolarLocation(loc.angle, loc.range_m + hr), geo)
    dn_r = steering_vector(PolarLocation(loc.angle, loc.range_m - hr), geo)
    return (up_t - dn_t) / (2 * ht), (up_r - dn_r) / (2 * hr)


def test_gradients_match_finite_differences_sweep():
    rng = np.random.default_rng(1)
    for n in (8, 64, 256):
        geo = ArrayGeometry(n, 0.01)
        for _ in range(7):
            loc = PolarLocation(rng.uniform(-1.0, 1.0), rng.uniform(5.0, 100.0))
            g = steering_gradients(loc, geo)
            fd_t, fd_r = _fd_gradients(loc, geo)
            assert np.linalg.norm(fd_t - g.grad_angle) / np.linalg.norm(g.grad_angle) <= 1e-5
            assert np.linalg.norm(fd_r - g.grad_range) / np.linalg.norm(g.grad_range) <= 1e-5


def test_gradient_norm_closed_forms():
    # sum u_n^2 ~ N^3 lam^2 / 48 gives ||grad_theta|| ~ pi N / sqrt(12);
    # sum u_n^4 ~ d^4 N^5 / 80 gives the range-gradient norm at boresight.
    g = steering_gradients(PolarLocation(0.0, 10.0), GEO256)
    np.testing.assert_allclose(np.linalg.norm(g.grad_angle), np.pi * 256 / np.sqrt(12), rtol=1e-2)
    d = GEO256.spacing
    closed_r = np.pi / (0.01 * 100.0) * np.sqrt(d**4 * 256**5 / 80 / 256)
    np.testing.assert_allclose(np.linalg.norm(g.grad_range), closed_r, rtol=1e-2)


def test_gradient_entry_formulas():
    loc = PolarLocation(0.3, 15.0)
    geo = GEO64
    a = steering_vector(loc, geo)
    u = geo.coords
    k = 2 * np.pi / geo.wavelength
    g = steering_gradients(loc, geo)
    expect_t = 1j * a * k * (u * np.cos(0.3) + u**2 * np.sin(0.3) * np.cos(0.3) / 15.0)
    expect_r = 1j * a * np.pi * u**2 * np.cos(0.3) ** 2 / (geo.wavelength * 15.0**2)
    np.testing.assert_allclose(g.grad_angle, expect_t, rtol=1e-12)
    np.testing.assert_allclose(g.grad_range, expect_r, rtol=1e-12)


# ------------------------------------------------------------------ taylor


def _residual(anchor, d_theta, d_range, geo):
    true = steering_vector(
        PolarLocation(anchor.angle + d_theta, anchor.range_m + d_range), geo
    )
    return np.linalg.norm(true - taylor_steering_vector(anchor, d_theta, d_range, geo)) ** 2


def test_taylor_exact_at_anchor():
    anchor = PolarLocation(0.05, 20.0)
    np.testing.assert_array_equal(
        taylor_steering_vector(anchor, 0.0, 0.0, GEO256), steering_vector(anchor, GEO256)
    )


def test_taylor_residual_small_inside_partition_cells():
    # The regime the partition actually creates: sine gap <= 1/(2N) from the
    # surrogate and |dr| bounded by the disc radius. Residual stays below
    # 0.05 on every cell corner (measured maximum 0.0315).
    u = LocationUncertainty((10.0, 0.0), 0.1, 0.05)
    worst = 0.0
    for cell in partition_region(u, 256):
        anchor = PolarLocation(cell.phi_s, cell.r_s)
        for dt in (-cell.half_angle, 0.0, cell.half_angle):
            for dr in (-cell.half_range, 0.0, cell.half_range):
                worst = max(worst, _residual(anchor, dt, dr, GEO256))
    assert worst <= 0.05


def test_taylor_residual_blows_up_outside_accuracy_region():
    anchor = PolarLocation(0.0, 10.0)
    assert _residual(anchor, np.arcsin(4.0 / 256), 0.0, GEO256) >= 0.5


def test_taylor_residual_at_claimed_regime_corner():
    # At dr = 0.1 r_hat = 1 m the per-element phase excursion reaches
    # ~1.3 rad and the vector-domain linearization degrades: the measured
    # residual at the regime corner is ~0.31, far above the in-cell level.
    anchor = PolarLocation(0.0, 10.0)
    corner = _residual(anchor, np.arcsin(1.0 / 512), -1.0, GEO256)
    assert 0.25 < corner < 0.4


def test_taylor_error_bound_values():
    assert taylor_error_bound(PolarLocation(0.0, 10.0), 0.0, 0.0, GEO256) == 0.0
    # the bound exceeds the maximum possible unit-vector difference of 2
    b10 = taylor_error_bound(PolarLocation(0.0, 10.0), 0.02448, 0.2448, GEO256)
    np.testing.assert_allclose(b10, 5.8243, rtol=1e-3)
    assert b10 > 2.0
    # same Cartesian radius at r = 50: angle term shrinks ~5x
    b50 = taylor_error_bound(PolarLocation(0.0, 50.0), np.arcsin(0.2448 / 50.0), 0.2448, GEO256)
    assert b10 / b50 > 4.5


def test_error_budget_components_bounded():
    est = PolarLocation(0.0, 10.0)
    true = PolarLocation(0.01, 10.2)
    b = error_budget(est, true, GEO256)
    for v in (b.exact, b.range_law, b.angle_law):
        assert 0.0 <= v <= 2.0
    assert b.range_linear >= 0 and b.angle_linear >= 0 and b.taylor_bound >= 0
