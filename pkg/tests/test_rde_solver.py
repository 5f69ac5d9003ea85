import numpy as np
import pytest
from scipy.linalg import expm

from roughpaths.rough_paths import (decompose, dilate, lift_piecewise_linear,
                                    pure_area_path, recompose)
from roughpaths.rde_solver import (FieldEvaluationError, SolverConfig,
                                   adaptive_partition, apriori_sup_bound,
                                   blowup_json, growth_bound_check,
                                   solution_to_partial, solve_rde,
                                   solve_rde_corrected, write_solution_csv)
from roughpaths.vector_fields import (FieldBounds, VectorField,
                                      counterexample_field, f_dot_grad_f,
                                      linear_field, tanh_field, zero_field)
from roughpaths.partial_rough_paths import rough_integral_along

from oracles import rk4_polyline


def time_lift(T=1.0):
    return lift_piecewise_linear(np.array([[0.0], [T]]), [0.0, T])


def random_polyline(rng, n=6, m=1, T=1.0, scale=0.3):
    pts = np.zeros((n + 1, m))
    pts[1:] = np.cumsum(rng.normal(0.0, scale, size=(n, m)), axis=0)
    return lift_piecewise_linear(pts, np.linspace(0.0, T, n + 1)), pts


# ---------------------------------------------------------------------------
# basic correctness


def test_zero_field_is_constant():
    sol = solve_rde(time_lift(), zero_field(2, 1), np.array([1.0, -2.0]), 1.0,
                    SolverConfig(base_mesh=64))
    assert np.max(np.abs(sol.y - sol.y[0])) == 0.0
    assert np.max(np.abs(sol.cross)) == 0.0
    assert sol.blowup is None


def test_exponential_growth_against_closed_form():
    a = 0.7
    sol = solve_rde(time_lift(), linear_field(1.0), np.array([a]), 1.0,
                    SolverConfig(base_mesh=4096))
    assert abs(sol.y[-1, 0] - a * np.e) <= 1e-6 * a * np.e


def test_doss_sussmann_scalar_polyline():
    # scalar driver: y(T) = a exp(x_T - x_0) for any geometric rough driver
    rng = np.random.default_rng(60)
    for _ in range(3):
        x, pts = random_polyline(rng, n=5, scale=0.25)
        sol = solve_rde(x, linear_field(1.0), np.array([1.3]), 1.0,
                        SolverConfig(base_mesh=4096))
        want = 1.3 * np.exp(pts[-1, 0] - pts[0, 0])
        assert abs(sol.y[-1, 0] - want) <= 1e-6 * abs(want)


def test_matrix_linear_field_against_expm_oracle():
    A = np.array([[0.0, -1.0], [1.0, -0.3]])
    x, pts = random_polyline(np.random.default_rng(61), n=4, scale=0.4)
    sol = solve_rde(x, linear_field(A), np.array([1.0, 0.5]), 1.0,
                    SolverConfig(base_mesh=4096))
    # whole-trajectory check at every 256th mesh point
    u = sol.x1[:, 0]
    for k in range(0, len(sol.times), 256):
        want = expm(A * (u[k] - u[0])) @ np.array([1.0, 0.5])
        assert np.linalg.norm(sol.y[k] - want) <= 1e-6


def test_oracle_equivalence_with_classical_rk4():
    rng = np.random.default_rng(62)
    fields = [linear_field(np.array([[0.2, -1.0], [0.5, 0.0]])),
              counterexample_field(),
              tanh_field(2, 1, seed=9)]
    x, pts = random_polyline(rng, n=6, scale=0.35)
    knots = x.times
    for vf in fields:
        a = np.array([0.8, -0.4])
        sol = solve_rde(x, vf, a, 1.0, SolverConfig(base_mesh=4096))
        check = sol.times[::256]
        ref = rk4_polyline(vf, a, knots, pts, check, h_target=2e-4)
        err = np.max(np.linalg.norm(sol.y[::256] - ref, axis=1))
        assert err <= 1e-6, (vf.name, err)


def test_mesh_refinement_improves_solution():
    x, _ = random_polyline(np.random.default_rng(63), n=5, scale=0.4)
    vf = counterexample_field()
    a = np.array([1.0, 0.0])
    ref = solve_rde(x, vf, a, 1.0, SolverConfig(base_mesh=2 ** 11))
    errs = []
    for mesh in (2 ** 7, 2 ** 8, 2 ** 9):
        sol = solve_rde(x, vf, a, 1.0, SolverConfig(base_mesh=mesh))
        stride = 2 ** 11 // mesh
        errs.append(np.max(np.linalg.norm(sol.y - ref.y[::stride], axis=1)))
    assert errs[0] / errs[1] >= 1.5
    assert errs[1] / errs[2] >= 1.5


def test_solution_cross_additivity():
    rng = np.random.default_rng(64)
    x, _ = random_polyline(rng, n=5)
    sol = solve_rde(x, counterexample_field(), np.array([1.0, 0.0]), 1.0,
                    SolverConfig(base_mesh=256))
    assert sol.cross_additivity_defect() <= 1e-12


def test_nan_field_raises_with_location():
    def ev(y):
        return np.array([[np.nan]]) if y[0] > 1.5 else np.array([[y[0]]])

    def gr(y):
        return np.array([[[1.0]]])

    bad = VectorField(1, 1, ev, gr)
    with pytest.raises(FieldEvaluationError) as err:
        solve_rde(time_lift(), bad, np.array([1.0]), 1.0,
                  SolverConfig(base_mesh=256))
    assert err.value.t > 0.0
    assert err.value.y[0] > 1.4


def test_horizon_beyond_driver_rejected():
    with pytest.raises(ValueError, match="driver's range"):
        solve_rde(time_lift(1.0), linear_field(1.0), np.array([1.0]), 2.0,
                  SolverConfig(base_mesh=16))


# ---------------------------------------------------------------------------
# corrected route and the explosion example


def test_corrected_route_zero_drift_matches_plain():
    rng = np.random.default_rng(65)
    x, _ = random_polyline(rng, n=5)
    geo, drift = decompose(x)
    vf = counterexample_field()
    a = np.array([1.0, 0.0])
    cfg = SolverConfig(base_mesh=512)
    plain = solve_rde(geo, vf, a, 1.0, cfg)
    corr = solve_rde_corrected(geo, drift, vf, f_dot_grad_f(vf), a, 1.0, cfg)
    assert np.max(np.abs(plain.y - corr.y)) <= 1e-12


def test_route_equivalence_on_synthetic_drift():
    # random polyline plus symmetric drift: stepping the recomposed driver
    # equals the geometric rough step plus the Young drift term
    rng = np.random.default_rng(66)
    x, _ = random_polyline(rng, n=6, scale=0.3)
    geo0, _ = decompose(x)
    n = geo0.n_points
    vals = 0.04 * np.cumsum(rng.normal(size=(n, 1, 1)) * np.eye(1), axis=0)
    vals[0] = 0.0
    from roughpaths.rough_paths import AreaDrift
    drift = AreaDrift(geo0.times, vals)
    full = recompose(geo0, drift)
    A = np.array([[0.1, -0.6], [0.4, 0.05]])
    vf = linear_field(A)
    a = np.array([1.0, -0.5])
    cfg = SolverConfig(base_mesh=4096)
    direct = solve_rde(full, vf, a, 1.0, cfg)
    corrected = solve_rde_corrected(geo0, drift, vf, f_dot_grad_f(vf), a,
                                    1.0, cfg)
    assert np.max(np.abs(direct.y - corrected.y)) <= 1e-6


def test_pure_area_explosion_crossing_times():
    vf = counterexample_field()
    h2 = f_dot_grad_f(vf)
    cfg = SolverConfig(base_mesh=4096)
    for a1, window in [(1.0, (0.95, 1.05)), (2.0, (0.45, 0.55))]:
        T = 1.5 / a1
        geo, drift = decompose(pure_area_path(T))
        sol = solve_rde_corrected(geo, drift, vf, h2, np.array([a1, 0.0]), T,
                                  cfg)
        assert sol.blowup is not None
        assert window[0] <= sol.blowup.crossing_time <= window[1]
        assert sol.blowup.last_value_norm >= cfg.r_max
        assert np.max(np.abs(sol.y[:, 1])) == 0.0


def test_no_crossing_means_no_record():
    sol = solve_rde(time_lift(), linear_field(1.0), np.array([1.0]), 1.0,
                    SolverConfig(base_mesh=128))
    assert sol.blowup is None
    assert blowup_json(sol) is None


def test_second_component_stays_zero_along_explosion():
    geo, drift = decompose(pure_area_path(0.5))
    vf = counterexample_field()
    sol = solve_rde_corrected(geo, drift, vf, f_dot_grad_f(vf),
                              np.array([1.0, 0.0]), 0.5,
                              SolverConfig(base_mesh=2048))
    assert np.max(np.abs(sol.y[:, 1])) <= 1e-10
    # y1 follows 1/(1-t) at first order in the mesh
    exact = 1.0 / (1.0 - sol.times)
    assert np.max(np.abs(sol.y[:, 0] - exact) / exact) <= 2e-3


# ---------------------------------------------------------------------------
# bounded-field machinery


def test_partition_interval_count_bracket():
    rng = np.random.default_rng(67)
    x, _ = random_polyline(rng, n=6, T=1.0, scale=0.5)
    bounds = FieldBounds(f_inf=1.0, grad_inf=1.5)
    cfg = SolverConfig(p=2.0)
    part = adaptive_partition(x, bounds, cfg)
    N = part.n_intervals
    omega = 1.0
    step = part.L * part.pvar ** -cfg.p
    assert (N - 1) * step <= omega * (1 + 1e-9)
    assert omega <= N * step * (1 + 1e-9)
    assert part.times[0] == 0.0 and part.times[-1] == 1.0


def test_partition_count_scales_like_pvar_to_the_p():
    rng = np.random.default_rng(68)
    x, _ = random_polyline(rng, n=8, scale=0.6)
    bounds = FieldBounds(f_inf=1.0, grad_inf=1.0)
    cfg = SolverConfig(p=2.0)
    n1 = adaptive_partition(x, bounds, cfg).n_intervals
    n2 = adaptive_partition(dilate(x, 2.0), bounds, cfg).n_intervals
    assert n2 == pytest.approx(n1 * 2 ** cfg.p, rel=0.15)


def test_partition_constant_driver_single_interval():
    x = lift_piecewise_linear(np.zeros((3, 1)), [0.0, 0.5, 1.0])
    part = adaptive_partition(x, FieldBounds(f_inf=1.0, grad_inf=1.0),
                              SolverConfig())
    assert part.n_intervals == 1
    assert np.array_equal(part.times, [0.0, 1.0])


def test_partition_rejects_unbounded_fields():
    x = time_lift()
    with pytest.raises(ValueError, match="bounds"):
        adaptive_partition(x, FieldBounds(), SolverConfig())


def test_apriori_bound_holds_on_random_drivers():
    rng = np.random.default_rng(69)
    vf = tanh_field(2, 1, seed=10)
    cfg = SolverConfig(p=2.0, base_mesh=512)
    for _ in range(50):
        x, _ = random_polyline(rng, n=8, scale=rng.uniform(0.05, 0.6))
        bound = apriori_sup_bound(vf.bounds, x, 1.0, cfg)
        sol = solve_rde(x, vf, np.array([0.2, -0.1]), 1.0, cfg)
        dev = np.max(np.linalg.norm(sol.y - sol.y[0], axis=1))
        assert dev <= bound


def test_apriori_bound_zero_field_trivial():
    x, _ = random_polyline(np.random.default_rng(70), n=4)
    zf = zero_field(2, 1)
    bound = apriori_sup_bound(FieldBounds(0.0, 0.0, 0.0), x, 1.0,
                              SolverConfig())
    assert bound >= 0.0
    sol = solve_rde(x, zf, np.array([1.0, 1.0]), 1.0,
                    SolverConfig(base_mesh=64))
    assert np.max(np.abs(sol.y - sol.y[0])) == 0.0 <= bound


def test_apriori_bound_affine_in_horizon():
    bounds = FieldBounds(f_inf=1.0, grad_inf=1.0)
    x = lift_piecewise_linear(np.array([[0.0], [0.5], [1.0]]),
                              [0.0, 1.5, 3.0])
    cfg = SolverConfig(p=2.0)
    b1 = apriori_sup_bound(bounds, x, 1.0, cfg)
    b2 = apriori_sup_bound(bounds, x, 2.0, cfg)
    b3 = apriori_sup_bound(bounds, x, 3.0, cfg)
    assert b2 - b1 == pytest.approx(b3 - b2, rel=1e-9)


# ---------------------------------------------------------------------------
# growth under driver scaling


def test_growth_check_counterexample_no_explosion():
    rng = np.random.default_rng(71)
    x, _ = random_polyline(rng, n=8, T=5.0, scale=0.12)
    rep = growth_bound_check(counterexample_field(), x, np.array([1.0, 0.0]),
                             5.0, SolverConfig(base_mesh=4096))
    assert not rep.any_explosion
    assert rep.passed
    assert rep.min_slack >= -1e-9


def test_growth_check_exponential_is_exactly_log_linear():
    pts = np.array([[0.0], [0.3], [0.2], [0.5]])
    x = lift_piecewise_linear(pts, np.linspace(0, 5.0, 4))
    rep = growth_bound_check(linear_field(1.0), x, np.array([1.0]), 5.0,
                             SolverConfig(base_mesh=2048),
                             lambdas=(1.0, 2.0, 4.0))
    # sup|y| = exp(lam * max increment); log growth is linear in lam
    logs = [r["log_sup"] for r in rep.rows]
    lams = [r["lam"] for r in rep.rows]
    for (l0, g0), (l1, g1) in zip(zip(lams, logs), zip(lams[1:], logs[1:])):
        expected = np.log(np.exp(l1 * 0.5) + 1) - np.log(np.exp(l0 * 0.5) + 1)
        assert g1 - g0 == pytest.approx(expected, abs=1e-4)


def test_growth_check_zero_driver():
    x = lift_piecewise_linear(np.zeros((2, 1)), [0.0, 5.0])
    rep = growth_bound_check(counterexample_field(), x, np.array([1.0, 0.0]),
                             5.0, SolverConfig(base_mesh=256))
    for row in rep.rows:
        assert row["sup_y"] == pytest.approx(1.0)


def test_growth_check_rejects_nongeometric_driver():
    with pytest.raises(ValueError, match="not geometric"):
        growth_bound_check(counterexample_field(), pure_area_path(5.0),
                           np.array([1.0, 0.0]), 5.0)


# ---------------------------------------------------------------------------
# interchange


def test_solution_to_partial_reproduces_dynamics():
    # integrating f along the solution triple recovers the solution: the
    # beta-correction pathway exercised end to end on the pure-area driver
    x = pure_area_path(0.5, n_points=2)
    vf = counterexample_field()
    sol = solve_rde(x, vf, np.array([1.0, 0.0]), 0.5,
                    SolverConfig(base_mesh=512))
    prp = solution_to_partial(sol, x)
    assert prp.additivity_defect() <= 1e-12
    integral = rough_integral_along(prp, vf)
    assert np.max(np.abs(integral.y - (sol.y - sol.y[0]))) <= 1e-12


def test_solution_csv_and_blowup_json(tmp_path):
    geo, drift = decompose(pure_area_path(1.5))
    vf = counterexample_field()
    sol = solve_rde_corrected(geo, drift, vf, f_dot_grad_f(vf),
                              np.array([1.0, 0.0]), 1.5,
                              SolverConfig(base_mesh=1024))
    dest = tmp_path / "sol.csv"
    write_solution_csv(sol, dest)
    lines = dest.read_text().strip().split("\n")
    assert lines[0] == "t,y1,y2"
    assert len(lines) == len(sol.times) + 1
    payload = blowup_json(sol)
    assert payload is not None and '"threshold": 1000000.0' in payload
