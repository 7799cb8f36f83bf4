//! Worked examples checked against oracles written here, independently of
//! the library's own routes.

use std::f64::consts::{LN_2, PI};

use evitherm::carnot::{audit_cycle, build_cycle, start_on_isotherm, work_numeric};
use evitherm::fisher::{compare_series, e_approx, fi_obs, log_factorial_volume, stirling_log_volume};
use evitherm::numerics::{
    log_beta, log_gamma, log_quadrature, posterior_log_odds_mean, reg_inc_beta, QuadratureConfig,
};
use evitherm::solvers::{
    solve_state, solve_x_for_evidence, trace_adiabat, trace_isotherm, transition_point, Branch, PathSample,
};
use evitherm::state::{entropy, log_lr, ModelConstants};
use evitherm::{Error, Model, Side};

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

/// Composite Simpson of `g` on `[lo, hi]` with `m` (even) intervals.
fn simpson(g: impl Fn(f64) -> f64, lo: f64, hi: f64, m: usize) -> f64 {
    let h = (hi - lo) / m as f64;
    let mut s = g(lo) + g(hi);
    for i in 1..m {
        s += if i % 2 == 1 { 4.0 } else { 2.0 } * g(lo + i as f64 * h);
    }
    s * h / 3.0
}

/// Posterior mean of ln(θ/(1-θ)) on (0, ½) by Simpson in `θ = u^4`.
fn posterior_mean_oracle(n: f64, x: f64) -> f64 {
    let top = 0.5f64.powf(0.25);
    // scale by the kernel's value at its mode to stay in range
    let mode = (x / n).clamp(1e-300, 0.5);
    let ln_peak = x * mode.ln() + (n - x) * (1.0 - mode).ln();
    let kernel = |u: f64| {
        if u == 0.0 {
            return 0.0;
        }
        let t = u.powi(4);
        (x * t.ln() + (n - x) * (1.0 - t).ln() - ln_peak).exp() * 4.0 * u.powi(3)
    };
    let num =
        simpson(|u| if u == 0.0 { 0.0 } else { kernel(u) * (u.powi(4) / (1.0 - u.powi(4))).ln() }, 0.0, top, 1_000_000);
    let den = simpson(kernel, 0.0, top, 1_000_000);
    num / den
}

#[test]
fn special_function_examples() {
    assert_eq!(log_gamma(1.0).unwrap(), 0.0);
    assert!(rel(log_gamma(0.5).unwrap(), PI.sqrt().ln()) < 1e-14);
    let ln_10_fact: f64 = (2..=10).map(|k| (k as f64).ln()).sum();
    assert!(rel(log_gamma(11.0).unwrap(), ln_10_fact) < 1e-14);
    assert!(log_gamma(0.0).is_err() && log_gamma(-1.0).is_err());

    assert_eq!(log_beta(1.0, 1.0).unwrap(), 0.0);
    assert!((log_beta(2.0, 2.0).unwrap() - (1.0f64 / 6.0).ln()).abs() < 1e-14);
    assert!((log_beta(3.0, 1.0).unwrap() - (1.0f64 / 3.0).ln()).abs() < 1e-14);

    for a in [0.3, 1.0, 7.5, 250.0, 1e5] {
        assert!((reg_inc_beta(0.5, a, a).unwrap() - 0.5).abs() < 1e-12);
    }
    assert_eq!(reg_inc_beta(1.0, 3.0, 7.0).unwrap(), 1.0);
    // ∫_0^½ 3(1-θ)² dθ = 7/8
    assert!((reg_inc_beta(0.5, 1.0, 3.0).unwrap() - 0.875).abs() < 1e-14);
    assert!(reg_inc_beta(1.5, 1.0, 1.0).is_err());
}

#[test]
fn quadrature_examples() {
    let cfg = QuadratureConfig::default();
    let v = log_quadrature(|_| 0.0, 0.0, 0.5, &cfg).unwrap();
    assert!((v - 0.5f64.ln()).abs() < 1e-14);
    let m = Model::default();
    let p = m.point(1000.0, 300.0).unwrap();
    let q = log_quadrature(|t| log_lr(t, p).unwrap(), 0.0, 0.5, &cfg).unwrap();
    // oracle: n ln 2 + ln B + ln I_{1/2}
    let beta_route = 1000.0 * LN_2 + log_beta(301.0, 701.0).unwrap() + reg_inc_beta(0.5, 301.0, 701.0).unwrap().ln();
    assert!((q - beta_route).abs() < 1e-8);
}

#[test]
fn posterior_mean_against_grid_oracle() {
    let cfg = QuadratureConfig::default();
    for (n, x) in [(2.0, 1.0), (1000.0, 100.0), (37.0, 3.5)] {
        let got = posterior_log_odds_mean(n, x, &cfg).unwrap();
        let want = posterior_mean_oracle(n, x);
        assert!(got < 0.0);
        assert!(rel(got, want) < 1e-8, "n={n} x={x}: {got} vs {want}");
    }
}

#[test]
fn state_examples() {
    let m = Model::default();
    let p = m.point(4.0, 1.0).unwrap();
    assert!((log_lr(0.25, p).unwrap() - (16.0 * 0.25 * 0.75f64.powi(3)).ln()).abs() < 1e-14);
    assert_eq!(log_lr(0.5, p).unwrap(), 0.0);

    let s = m.state(2.0, 0.0).unwrap();
    let want = (2.0 * LN_2 / 1.5).exp() / (7.0f64 / 6.0).powf(2.0 / 3.0);
    assert!(rel(s.e(), want) < 1e-13);

    let direct = 2.0 * 0.2f64.ln() + 8.0 * 0.8f64.ln() + 10.0 * LN_2;
    assert!((entropy(m.point(10.0, 2.0).unwrap(), &m.consts) - direct).abs() < 1e-13);

    let two = Model::new(ModelConstants::default().with_side(Side::TwoSided));
    let v = two.log_volume(two.point(2.0, 1.0).unwrap()).unwrap();
    assert!((v - (2.0f64 / 3.0).ln()).abs() < 1e-14);
}

#[test]
fn appendix_state_is_near_fisher_band() {
    let m = Model::appendix();
    let e = m.state(1000.0, 50.0).unwrap().e();
    let fi = fi_obs(1000.0, 50.0).unwrap() / (2.0 * PI);
    let approx = e_approx(1000.0, 50.0).unwrap();
    assert!(rel(e, fi) < 0.01, "E = {e}, FI/2π = {fi}");
    assert!(e < approx * 1.01);
}

#[test]
fn transition_point_matches_grid_minimizer_at_ten() {
    let m = Model::default();
    let t = transition_point(&m, 10.0, 1e-10).unwrap();
    let mut best = (0.0, f64::INFINITY);
    for i in 1..50_000 {
        let x = i as f64 * 1e-5 * 10.0;
        let e = m.log_e(10.0, x).unwrap();
        if e < best.1 {
            best = (x, e);
        }
    }
    assert!((t.x_star - best.0).abs() < 1e-4);
}

#[test]
fn evidence_at_minimum_returns_trp_on_both_branches() {
    let m = Model::default();
    let t = transition_point(&m, 30.0, 1e-10).unwrap();
    for b in [Branch::LeftOfTrp, Branch::RightOfTrp] {
        assert!((solve_x_for_evidence(&m, 30.0, t.e_min, b).unwrap() - t.x_star).abs() < 1e-8 * 30.0);
    }
}

#[test]
fn isotherm_has_two_solutions_bracketing_trp() {
    let m = Model::default();
    let t = transition_point(&m, 8.0, 1e-10).unwrap();
    let left = solve_x_for_evidence(&m, 8.0, 2.25, Branch::LeftOfTrp).unwrap();
    let right = solve_x_for_evidence(&m, 8.0, 2.25, Branch::RightOfTrp).unwrap();
    assert!(left < t.x_star && t.x_star < right);
    for x in [left, right] {
        assert!(rel(m.state(8.0, x).unwrap().e(), 2.25) < 1e-10);
    }
}

#[test]
fn boyle_and_charles() {
    let m = Model::default();
    let a = trace_isotherm(&m, 2.25, 1.0, 10.0, 12).unwrap();
    let s = &a.right;
    for w in s.windows(2) {
        assert!(((w[0].p_e / w[1].p_e) / (w[1].v_e / w[0].v_e) - 1.0).abs() < 1e-10);
    }
    // fixed P_E across isotherms: V_E ∝ E
    let p = 5.0;
    for e in [2.0, 2.5, 3.0] {
        let v = m.consts.r * e / p;
        assert!(rel(v / e, m.consts.r / p) < 1e-12);
    }
}

#[test]
fn zero_entropy_adiabat_is_the_diagonal() {
    let m = Model::default();
    let ad = trace_adiabat(&m, 0.0, 1.0, 100.0, 50).unwrap();
    for s in &ad.samples {
        assert_eq!(s.x, s.n / 2.0);
        assert!((s.e.ln() + (1.0 / 1.5) * s.log_v_e).abs() < 1e-12);
    }
}

#[test]
fn infeasible_state_target() {
    let m = Model::default();
    // forced S_E = 1.5 ln 0.5 < 0
    assert!(matches!(solve_state(&m, 0.5, 0.0, 1.0, Branch::LeftOfTrp), Err(Error::Infeasible { .. })));
}

#[test]
fn work_integrals_match_closed_forms() {
    let m = Model::default();
    let r = m.consts.r;
    // isothermal path at E = 3 from V1 to V2, 1000 samples
    let (v1, v2) = (0.2f64, 0.45f64);
    let path: Vec<PathSample> = (0..1000)
        .map(|i| {
            let v = v1 + (v2 - v1) * i as f64 / 999.0;
            PathSample { n: 1.0, x: 0.0, log_v_e: v.ln(), v_e: v, p_e: r * 3.0 / v, e: 3.0, s_e: 0.0 }
        })
        .collect();
    assert!(rel(work_numeric(&path).unwrap(), r * 3.0 * (v2 / v1).ln()) < 1e-4);
    // adiabatic path: E V^(R/C_V) = const
    let g = m.consts.gamma_minus_one();
    let path: Vec<PathSample> = (0..1000)
        .map(|i| {
            let v = v1 + (v2 - v1) * i as f64 / 999.0;
            let e = 4.0 * (v1 / v).powf(g);
            PathSample { n: 1.0, x: 0.0, log_v_e: v.ln(), v_e: v, p_e: r * e / v, e, s_e: 0.0 }
        })
        .collect();
    let (ea, eb) = (path[0].e, path[999].e);
    assert!(rel(work_numeric(&path).unwrap(), m.consts.c_v * (ea - eb)) < 1e-4);
    let flat: Vec<PathSample> = path.iter().map(|p| PathSample { v_e: 0.3, ..*p }).collect();
    assert_eq!(work_numeric(&flat).unwrap(), 0.0);
}

#[test]
fn trapezoid_error_shrinks_with_samples() {
    let m = Model::default();
    let a = start_on_isotherm(&m, 4.0, 0.0).unwrap();
    let mut last = f64::INFINITY;
    for samples in [100, 1000, 10000] {
        let c = build_cycle(&m, 2.0, 4.0, &a, 2.0, samples).unwrap();
        let worst = audit_cycle(&c)
            .checks
            .iter()
            .filter(|ch| ch.name.starts_with("work_"))
            .map(|ch| ch.residual.abs())
            .fold(0.0, f64::max);
        assert!(worst < last, "{samples}: {worst} !< {last}");
        last = worst;
    }
}

#[test]
fn near_degenerate_cycle_has_no_net_work() {
    let m = Model::default();
    let a = start_on_isotherm(&m, 4.0, 0.0).unwrap();
    let c = build_cycle(&m, 4.0 * (1.0 - 1e-9), 4.0, &a, 2.0, 64).unwrap();
    assert!(c.efficiency.abs() < 1e-8);
    assert!(c.net_work().abs() < 1e-8);
}

#[test]
fn fisher_examples() {
    assert!((fi_obs(100.0, 5.0).unwrap() - 1e6 / 475.0).abs() < 1e-9);
    assert!((e_approx(100.0, 5.0).unwrap() - 101f64.powi(3) / (2.0 * PI * 475.0)).abs() < 1e-9);
    assert_eq!(fi_obs(64.0, 32.0).unwrap(), 256.0);
    // the ratio tends to one
    let big = e_approx(1e7, 1e5).unwrap() / (fi_obs(1e7, 1e5).unwrap() / (2.0 * PI));
    assert!((big - 1.0).abs() < 1e-6);

    assert!((log_factorial_volume(2, 1).unwrap() - (2.0f64 / 3.0).ln()).abs() < 1e-15);
    assert_eq!(log_factorial_volume(0, 0).unwrap(), 0.0);
    let lf = |m: u32| (2..=m).map(|k| (k as f64).ln()).sum::<f64>();
    let oracle = 50.0 * LN_2 + lf(20) + lf(30) - lf(51);
    assert!((log_factorial_volume(50, 20).unwrap() - oracle).abs() < 1e-12);
    for n in [100u64, 400, 2000] {
        let exact = log_factorial_volume(n, n / 10).unwrap();
        assert!(rel(stirling_log_volume(n as f64, (n / 10) as f64).unwrap(), exact) < 0.01);
    }
}

#[test]
fn fisher_gap_behaviour_at_n_100() {
    let m = Model::appendix();
    let grid: Vec<f64> = (1..=50).map(|i| i as f64 * 0.01).collect();
    let rows = compare_series(&m, 100.0, &grid).unwrap();
    let gap: Vec<f64> = rows.iter().map(|r| r.rel_gap()).collect();
    // from the transition point down to x/n = 0.1 the gap shrinks ...
    let t = transition_point(&m, 100.0, 1e-10).unwrap().ratio();
    let trp_idx = grid.iter().position(|&u| u >= t).unwrap();
    for i in 9..trp_idx - 1 {
        assert!(gap[i] < gap[i + 1], "x/n = {}", grid[i]);
    }
    // ... and grows again as x/n -> 0 where FI diverges but E stays finite
    assert!(gap[0] > gap[9]);
    // past the transition point E rises while FI keeps falling
    let past: Vec<&_> = rows.iter().filter(|r| r.x_over_n > t + 0.02).collect();
    for w in past.windows(2) {
        assert!(w[1].e_exact > w[0].e_exact && w[1].fi_over_2pi < w[0].fi_over_2pi);
    }
}

#[test]
fn low_pressure_linearity() {
    let m = Model::appendix();
    for n in [200.0, 400.0, 1000.0] {
        let e1 = m.state(n, 0.02 * n).unwrap().e();
        let e2 = m.state(2.0 * n, 0.04 * n).unwrap().e();
        assert!((e2 / e1 - 2.0).abs() < 0.1, "n={n}: {}", e2 / e1);
    }
}
