"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line.

Two sub-criteria are known-failing and left red on purpose; their stated
tolerances are geometrically unattainable with this aperture (details in
the failing assertions): the 1e-3 rad Fresnel-residual bound down to 5 m,
and the 0.05 first-order-model residual bound out to range offsets of
0.1 r. Both quantities are measured here against exact oracles.
"""

import os

import numpy as np
import pytest

from nfsec.evaluation import evaluate, secure_probability, worst_case_leakage
from nfsec.geometry import (
    ArrayGeometry,
    PolarLocation,
    polar_to_cart,
    steering_matrix,
    steering_vector,
    steering_vector_exact,
)
from nfsec.optimizer import (
    BallConstraint,
    PointConstraint,
    RefinedConstraint,
    Scheme,
    SolveOptions,
    build_secrecy_constraints,
    solve_scheme,
)
from nfsec.scenario import default_scenario
from nfsec.steering_error import (
    angle_error_law,
    range_error_law,
    steering_error,
    steering_gradients,
    taylor_steering_vector,
)
from nfsec.uncertainty import LocationUncertainty, partition_region

GEO256 = ArrayGeometry(256, 0.01)

pytestmark = pytest.mark.acceptance


def _report(num: str, name: str, ok: bool, detail: str = "") -> None:
    state = "PASS" if ok else "FAIL"
    suffix = f" ({detail})" if detail else ""
    print(f"ACCEPTANCE {num:>3} [{state}] {name}{suffix}")


# ---------------------------------------------------------------- criterion 1


def test_criterion_01a_steering_vector_integrity():
    rng = np.random.default_rng(42)
    worst_norm, worst_mag = 0.0, 0.0
    for _ in range(1000):
        n = int(rng.choice([1, 2, 8, 64, 256]))
        loc = PolarLocation(rng.uniform(-1.4, 1.4), rng.uniform(1.0, 1e3))
        a = steering_vector(loc, ArrayGeometry(n, 0.01))
        worst_norm = max(worst_norm, abs(np.linalg.norm(a) - 1.0))
        worst_mag = max(worst_mag, float(np.abs(np.abs(a) - 1 / np.sqrt(n)).max()))
    ok = worst_norm < 1e-12 and worst_mag < 1e-12
    _report("1a", "unit norm and entry magnitude to 1e-12", ok,
            f"norm dev {worst_norm:.2e}, magnitude dev {worst_mag:.2e}")
    assert ok


def test_criterion_01b_fresnel_vs_exact_tolerance():
    # stated tolerance: < 1e-3 rad per entry for every r >= 5 m at N = 256.
    worst, worst_at = 0.0, None
    for r in np.linspace(5.0, 100.0, 39):
        for theta in np.linspace(-0.06, 0.06, 7):
            af = steering_vector(PolarLocation(theta, r), GEO256)
            ae = steering_vector_exact(polar_to_cart(PolarLocation(theta, r)), GEO256)
            gap = float(np.abs(np.angle(af * np.conj(ae))).max())
            if gap > worst:
                worst, worst_at = gap, (theta, r)
    ok = worst < 1e-3
    _report("1b", "Fresnel vs exact phase gap < 1e-3 rad for r >= 5 m", ok,
            f"measured max {worst:.3e} rad at (theta, r) = {worst_at}")
    # The quartic aperture term (2 pi / lam) u^4 / (8 r^3) alone reaches
    # 1.0e-1 rad at r = 5 and 1.3e-2 rad at r = 10 with u = 0.6375 m, so the
    # stated tolerance cannot hold below r ~ 24 m. Kept red deliberately.
    assert ok, (
        f"Fresnel residual is {worst:.3e} rad at (theta, r) = {worst_at}; "
        "the 1e-3 bound only holds for r >~ 24 m with this aperture"
    )


# ---------------------------------------------------------------- criterion 2


def test_criterion_02_lemma_laws_vs_exact_oracle():
    rng = np.random.default_rng(7)
    worst = 0.0
    checked = 0
    while checked < 50:
        n = int(rng.choice([64, 256]))
        geo = ArrayGeometry(n, 0.01)
        theta = rng.uniform(-0.8, 0.8)
        r_hat = rng.uniform(5.0, 60.0)
        sign = rng.choice([-1.0, 1.0])
        # range law, inside |dr| <= 0.1 r and the derivation's quartic
        # condition beta^2 <= 1/pi for the linearized form
        dr = sign * rng.uniform(0.02, 0.1) * r_hat
        beta_sq = n**2 * 0.005**2 * np.cos(theta) ** 2 / 0.02 * abs(1 / (r_hat + dr) - 1 / r_hat)
        exact_r = steering_error(PolarLocation(theta, r_hat), PolarLocation(theta, r_hat + dr), geo)
        law_r, lin_r = range_error_law(theta, r_hat, r_hat + dr, geo)
        den = max(exact_r, 1e-3)
        worst = max(worst, abs(law_r - exact_r) / den)
        if beta_sq <= 1 / np.pi:
            worst = max(worst, abs(lin_r - exact_r) / den)
        # angle law inside |sin gap| <= 1/(2N)
        xi = sign * rng.uniform(0.1, 1.0) / (2 * n)
        if abs(np.sin(theta) + xi) >= 1.0:
            continue
        theta2 = np.arcsin(np.sin(theta) + xi)
        exact_t = steering_error(PolarLocation(theta, r_hat), PolarLocation(theta2, r_hat), geo)
        law_t, lin_t = angle_error_law(theta, theta2, n)
        den = max(exact_t, 1e-3)
        worst = max(worst, abs(law_t - exact_t) / den, abs(lin_t - exact_t) / den)
        checked += 1
    ok = worst <= 0.15
    _report("2", "closed-form error laws within 15% of exact oracle", ok,
            f"worst relative error {worst:.3f} over {checked} points, N in {{64, 256}}")
    assert ok


# ---------------------------------------------------------------- criterion 3


def test_criterion_03_gradient_checks():
    rng = np.random.default_rng(3)
    worst = 0.0
    for _ in range(20):
        n = int(rng.choice([8, 64, 256]))
        geo = ArrayGeometry(n, 0.01)
        loc = PolarLocation(rng.uniform(-1.0, 1.0), rng.uniform(5.0, 100.0))
        g = steering_gradients(loc, geo)
        ht, hr = 1e-6, 1e-4
        fd_t = (
            steering_vector(PolarLocation(loc.angle + ht, loc.range_m), geo)
            - steering_vector(PolarLocation(loc.angle - ht, loc.range_m), geo)
        ) / (2 * ht)
        fd_r = (
            steering_vector(PolarLocation(loc.angle, loc.range_m + hr), geo)
            - steering_vector(PolarLocation(loc.angle, loc.range_m - hr), geo)
        ) / (2 * hr)
        worst = max(
            worst,
            float(np.linalg.norm(fd_t - g.grad_angle) / np.linalg.norm(g.grad_angle)),
            float(np.linalg.norm(fd_r - g.grad_range) / np.linalg.norm(g.grad_range)),
        )
    g = steering_gradients(PolarLocation(0.0, 10.0), GEO256)
    closed_t = np.pi * 256 / np.sqrt(12)
    closed_r = np.pi / (0.01 * 100.0) * np.sqrt(0.005**4 * 256**4 / 80)
    dev_t = abs(np.linalg.norm(g.grad_angle) - closed_t) / closed_t
    dev_r = abs(np.linalg.norm(g.grad_range) - closed_r) / closed_r
    ok = worst <= 1e-5 and dev_t <= 0.01 and dev_r <= 0.01
    _report("3", "analytic gradients vs finite differences and closed-form norms", ok,
            f"fd rel err {worst:.2e}, norm devs {dev_t:.2e}/{dev_r:.2e}")
    assert ok


# ---------------------------------------------------------------- criterion 4


def _taylor_residual(anchor, d_theta, d_range, geo):
    true = steering_vector(PolarLocation(anchor.angle + d_theta, anchor.range_m + d_range), geo)
    return float(np.linalg.norm(true - taylor_steering_vector(anchor, d_theta, d_range, geo)) ** 2)


def test_criterion_04a_taylor_blowup_outside_region():
    anchor = PolarLocation(0.0, 10.0)
    res = _taylor_residual(anchor, float(np.arcsin(4.0 / 256)), 0.0, GEO256)
    ok = res >= 0.5
    _report("4a", "Taylor residual >= 0.5 at sine gap 4/N", ok, f"measured {res:.2f}")
    assert ok


def test_criterion_04b_taylor_accuracy_inside_stated_region():
    # stated region: sine gap <= 1/(2N) AND |dr| <= 0.1 r at N = 256, r = 10
    anchor = PolarLocation(0.0, 10.0)
    worst, worst_at = 0.0, None
    for gap in np.linspace(0.0, 1.0 / 512, 9):
        for dr in np.linspace(-1.0, 1.0, 17):
            res = _taylor_residual(anchor, float(np.arcsin(gap)), float(dr), GEO256)
            if res > worst:
                worst, worst_at = res, (gap, dr)
    ok = worst <= 0.05
    _report("4b", "Taylor residual <= 0.05 on the stated grid", ok,
            f"measured max {worst:.3f} at (sin gap, dr) = {worst_at}")
    # At dr = +-1 m the per-element phase excursion reaches ~1.3 rad and the
    # vector-domain linearization degrades; the bound does hold for |dr|
    # at the confidence-disc scale (measured 0.031 at |dr| <= 0.245, which
    # is what the partition cells actually use). Kept red deliberately.
    assert ok, (
        f"residual {worst:.3f} at (sin gap, dr) = {worst_at}; "
        "<= 0.05 holds only for |dr| below ~0.4 m at r = 10 m"
    )


# ---------------------------------------------------------------- criterion 5


def test_criterion_05_partition_soundness():
    eves = [
        LocationUncertainty((10.0, 0.5), 0.1, 0.05),
        LocationUncertainty((10.0, -0.5), 0.1, 0.05),
    ]
    counts = [len(partition_region(u, 256)) for u in eves]
    budget_ok = True
    for u in eves:
        for c in partition_region(u, 256):
            if np.sin(c.phi_max) - np.sin(c.phi_min) > 1.0 / 256 + 1e-12:
                budget_ok = False
    # 1e5-point rejection-sampled coverage with zero misses
    rng = np.random.default_rng(17)
    misses = 0
    for u in eves:
        cells = partition_region(u, 256)
        pts = []
        while sum(len(p) for p in pts) < 100_000:
            cand = rng.uniform(-u.radius, u.radius, size=(300_000, 2))
            cand = cand[np.hypot(cand[:, 0], cand[:, 1]) <= u.radius]
            pts.append(cand + np.asarray(u.center))
        pts = np.concatenate(pts)[:100_000]
        ang = np.arctan2(pts[:, 1], pts[:, 0])
        rad = np.hypot(pts[:, 0], pts[:, 1])
        covered = np.zeros(len(pts), dtype=bool)
        for c in cells:
            covered |= (
                (ang >= c.phi_min - 1e-9) & (ang <= c.phi_max + 1e-9)
                & (rad >= c.r_min - 1e-9) & (rad <= c.r_max + 1e-9)
            )
        misses += int((~covered).sum())
    ok = counts == [13, 13] and budget_ok and misses == 0
    _report("5", "partition: coverage, sine budget, 13 cells per eavesdropper", ok,
            f"counts {counts}, misses {misses}")
    assert ok


# ------------------------------------------------- criteria 6-10 fixtures


FULL_SCALE = os.environ.get("NFSEC_ACCEPT_SMALL", "") != "1"


@pytest.fixture(scope="module")
def default_runs():
    """All six schemes solved and evaluated on the default scenario.

    N = 256 by default (a few minutes); NFSEC_ACCEPT_SMALL=1 drops to N = 64
    for quick iteration, at which scale the trend criteria are not asserted.
    """
    n = 256 if FULL_SCALE else 64
    sc = default_scenario(n_elements=n)
    opts = SolveOptions()
    runs = {}
    for scheme in Scheme:
        rep = solve_scheme(sc, scheme, opts)
        ev = evaluate(rep.beamformers, sc, trials=10_000, seed=1, resolution=400)
        runs[scheme] = (rep, ev)
    return sc, runs


def _model_soundness_violation(scenario, scheme, report, options) -> float:
    """Worst constraint-relative leakage over each modeled uncertainty set.

    Returns max over constraints of (leakage / (gamma * (1 + slack))) with
    the slack the criterion assigns to that constraint family.
    """
    rng = np.random.default_rng(23)
    worst = 0.0
    for c in build_secrecy_constraints(scenario, scheme, options):
        w = report.beamformers[c.bob]
        if isinstance(c, PointConstraint):
            leak = abs(np.vdot(c.a, w)) ** 2
            worst = max(worst, leak / (c.gamma * (1 + 1e-3)))
        elif isinstance(c, BallConstraint):
            n = len(c.a)
            e = rng.normal(size=(10_000, n)) + 1j * rng.normal(size=(10_000, n))
            e *= (c.eps * rng.uniform(0, 1, 10_000) ** (1 / (2 * n)) / np.linalg.norm(e, axis=1))[:, None]
            leak = float((np.abs((c.a[None, :] + e).conj() @ w) ** 2).max())
            worst = max(worst, leak / (c.gamma * (1 + 1e-3)))
        else:
            assert isinstance(c, RefinedConstraint)
            cell = c.cell
            if scheme == Scheme.PROPOSED:
                # true steering over the cell box; slack covers the model residual
                th = np.linspace(cell.phi_min, cell.phi_max, 200)
                rr = np.linspace(cell.r_min, cell.r_max, 200)
                tg, rg = np.meshgrid(th, rr, indexing="ij")
                mat = steering_matrix(tg.ravel(), rg.ravel(), scenario.geometry)
                leak = float((np.abs(mat.conj() @ w) ** 2).max())
            else:
                # whole-disc anchor: the modeled set is the first-order model box
                drs = np.linspace(-cell.half_range, cell.half_range, 200)
                dts = np.linspace(-cell.half_angle, cell.half_angle, 200)
                base = np.vdot(c.a, w)
                gr = np.vdot(c.grad_range, w)
                gt = np.vdot(c.grad_angle, w)
                vals = np.abs(base + drs[:, None] * gr + dts[None, :] * gt) ** 2
                leak = float(vals.max())
            worst = max(worst, leak / (c.gamma * (1 + 1e-2)))
    return worst


def test_criterion_06_gsd_lmi_soundness():
    worst = 0.0
    # single-user instance at N = 8, the default two-user scenario at N = 64
    cases = [
        (default_scenario(n_elements=8, bob_locations=((50.0, 0.0),),
                        eve_locations=((10.0, 0.0),)),
         SolveOptions(bound_grid=150, cell_bound_grid=60, sampling_points=40)),
        (default_scenario(n_elements=64), SolveOptions(bound_grid=200, cell_bound_grid=80)),
    ]
    for sc, opts in cases:
        for scheme in Scheme:
            rep = solve_scheme(sc, scheme, opts)
            assert rep.status == "optimal", (scheme, rep.status)
            worst = max(worst, _model_soundness_violation(sc, scheme, rep, opts))
    ok = worst <= 1.0
    _report("6", "dense-grid leakage within slack of gamma for every scheme", ok,
            f"worst leakage ratio {worst:.4f} (<= 1 means inside slack)")
    assert ok


def test_criterion_07_power_cap_and_collapse():
    sc = default_scenario(n_elements=64, bob_locations=((50.0, 0.0),),
                        eve_locations=((10.0, 5.0),))
    gamma = sc.eve_thresholds()[0].gamma
    cap_ok = True
    rates = []
    for eps in (0.05, 0.1, 0.3, 1.0, 2.0):
        opts = SolveOptions(error_bound_override=eps, bound_grid=100)
        rep = solve_scheme(sc, Scheme.ERROR_BOUND, opts)
        if np.linalg.norm(rep.beamformers) ** 2 > gamma / eps**2 + 1e-6:
            cap_ok = False
        rates.append(rep.trajectory[-1])
    monotone = all(b <= a + 1e-9 for a, b in zip(rates[:-1], rates[1:]))
    collapsed = rates[-1] < 0.01 * rates[0]
    ok = cap_ok and monotone and collapsed
    _report("7", "power cap gamma/eps^2 and monotone rate collapse", ok,
            f"rates {['%.3f' % r for r in rates]}")
    assert ok


def test_criterion_08_sca_behavior(default_runs):
    sc, runs = default_runs
    monotone = all(
        all(b >= a - 1e-6 for a, b in zip(rep.trajectory[:-1], rep.trajectory[1:]))
        for rep, _ in runs.values()
    )
    proposed_iters = runs[Scheme.PROPOSED][0].iterations
    converged = runs[Scheme.PROPOSED][0].status == "optimal" and proposed_iters <= 20
    ok = monotone and converged
    _report("8", "monotone trajectories; converged within 20 iterations", ok,
            f"proposed needed {proposed_iters} iterations at N={sc.geometry.n_elements}")
    assert ok


def test_criterion_09_end_to_end_trends(default_runs):
    sc, runs = default_runs
    if not FULL_SCALE:
        pytest.skip("trend thresholds are stated at N=256 (full scale)")
    prop = runs[Scheme.PROPOSED][1]
    nonrob = runs[Scheme.NON_ROBUST][1]
    checks = {
        "a: proposed secure probability >= 0.95":
            prop.secure_probability >= 0.95,
        "b: non-robust probability < 0.9":
            nonrob.secure_probability < 0.9,
        "b: non-robust sum-rate >= proposed":
            nonrob.sum_rate >= prop.sum_rate,
        "c: error-bound < 10% of proposed":
            runs[Scheme.ERROR_BOUND][1].sum_rate < 0.10 * prop.sum_rate,
        "c: partition-only < 10% of proposed":
            runs[Scheme.PARTITION_ONLY][1].sum_rate < 0.10 * prop.sum_rate,
        "d: sampling within 10% of proposed":
            abs(runs[Scheme.SAMPLING][1].sum_rate - prop.sum_rate) <= 0.10 * prop.sum_rate,
    }
    ok = all(checks.values())
    detail = (
        f"P_sec(proposed)={prop.secure_probability:.3f}, "
        f"rates: nr={nonrob.sum_rate:.2f} samp={runs[Scheme.SAMPLING][1].sum_rate:.2f} "
        f"prop={prop.sum_rate:.2f} eb={runs[Scheme.ERROR_BOUND][1].sum_rate:.3f} "
        f"po={runs[Scheme.PARTITION_ONLY][1].sum_rate:.3f}"
    )
    _report("9", "default-scenario trend reproduction", ok, detail)
    assert ok, {k: v for k, v in checks.items() if not v}


def test_criterion_10_nlos_sweep():
    rates, probs = [], []
    for kappa in (0.0, 0.1, 0.2, 0.3):
        sc = default_scenario(n_elements=64, nlos_ratio=kappa)
        rep = solve_scheme(sc, Scheme.PROPOSED, SolveOptions(cell_bound_grid=80))
        assert rep.status == "optimal"
        rates.append(rep.trajectory[-1])
        probs.append(secure_probability(rep.beamformers, sc, trials=10_000, seed=2)[0])
    decreasing = all(b < a for a, b in zip(rates[:-1], rates[1:]))
    secure = all(p >= 0.95 for p in probs)
    ok = decreasing and secure
    _report("10", "sum-rate strictly decreasing in the NLoS ratio, security kept", ok,
            f"rates {['%.3f' % r for r in rates]}, probs {['%.3f' % p for p in probs]}")
    assert ok


def test_criterion_11_csv_determinism(tmp_path):
    from nfsec.cli import run
    from nfsec.config import config_from_dict

    cfg = config_from_dict(
        {
            "frequency_ghz": 30.0,
            "n_elements": 16,
            "bob_locations": [[50.0, 0.0]],
            "eve_locations": [[10.0, 0.0]],
            "sigma_c": 0.1,
            "scheme": "proposed",
            "sampling_points": 20,
            "trials": 500,
            "seed": 11,
            "grid_resolution": 100,
            "beampattern": {"x": [2.0, 20.0], "y": [-2.0, 2.0], "resolution": 10},
        }
    )
    run(cfg, tmp_path / "a")
    run(cfg, tmp_path / "b")

    def numeric_content(path):
        lines = path.read_text().strip().splitlines()
        idx = lines[0].split(",").index("wall_time_s")
        return [",".join(v for i, v in enumerate(l.split(",")) if i != idx) for l in lines]

    same_results = numeric_content(tmp_path / "a/results.csv") == numeric_content(
        tmp_path / "b/results.csv"
    )
    same_traj = (tmp_path / "a/trajectory.csv").read_bytes() == (
        tmp_path / "b/trajectory.csv"
    ).read_bytes()
    same_pattern = (tmp_path / "a/beampattern_proposed.csv").read_bytes() == (
        tmp_path / "b/beampattern_proposed.csv"
    ).read_bytes()
    ok = same_results and same_traj and same_pattern
    _report("11", "byte-identical CSV numeric content across reruns", ok)
    assert ok
