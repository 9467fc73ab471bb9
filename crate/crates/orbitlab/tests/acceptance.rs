//! Acceptance suite: one test per criterion, each printing a pass/fail
//! line (visible with `--nocapture`). Tolerances and runtime budgets are
//! pinned here, not configurable.

use std::path::PathBuf;
use std::time::Instant;

use orbitlab::census::{self, fixed_points_1d, growth_rate, zeta_partial, LineOpts};
use orbitlab::config::Config;
use orbitlab::harness::run_experiment;
use orbitlab::model::{GlobalMapParams, ModelDiffeo, RemainderPoly, SaddleParams};
use orbitlab::poly::{BiPoly, Poly};
use orbitlab::polymap::{
    monte_carlo_hyperbolicity, periodic_points, power_map, power_map_certificate, ComposeBudget,
    Field, McConfig,
};
use orbitlab::renorm::{convergence_sweep, GridSpec, LimitMap};
use orbitlab::tower::{
    derivative_scaling_check, gap_ratio, rectangle_geometry, select_tower_indices,
    tangency_order_solver, TangencyOpts,
};

fn report(id: u32, name: &str, pass: bool, detail: &str) {
    println!(
        "acceptance {id:02} [{}] {name}: {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "criterion {id} failed: {detail}");
}

fn desk_saddle() -> SaddleParams {
    SaddleParams::new(0.01, 2.0)
}

/// Desk model with nonzero remainders and shear so the convergence is a
/// real measurement, not an identity.
fn desk_model() -> ModelDiffeo {
    let h1 = RemainderPoly::first_kind(BiPoly::from_terms(&[(1, 1, 0.3), (0, 2, 0.3)])).unwrap();
    let h2 =
        RemainderPoly::second_kind(BiPoly::from_terms(&[(1, 1, 0.3), (0, 3, 0.3)]), 2).unwrap();
    let global = GlobalMapParams::new(1.0, 0.3, 1.0, 1.0, 2, vec![0.0, 0.0])
        .unwrap()
        .with_remainders(h1, h2)
        .unwrap();
    ModelDiffeo::new(desk_saddle(), global, 1.0, Poly::zero()).unwrap()
}

fn exact_limit_model() -> ModelDiffeo {
    let global = GlobalMapParams::new(1.0, 0.0, 1.0, 0.0, 2, vec![0.0, 0.0]).unwrap();
    ModelDiffeo::new(desk_saddle(), global, 1.0, Poly::zero()).unwrap()
}

fn tmpdir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("orbitlab-acc-{tag}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    dir
}

#[test]
fn acceptance_01_renorm_convergence() {
    let clock = Instant::now();
    let model = desk_model();
    let limit = LimitMap::new(2, vec![-2.0, 0.0]).unwrap();
    let grid = GridSpec::standard(0.1).unwrap();
    let sweep = convergence_sweep(&model, &limit, 2..=12, grid, 1).unwrap();
    let decreasing = sweep.d0_strictly_decreasing;
    let hit = sweep
        .rows
        .iter()
        .find(|row| row.d0 < 0.05)
        .map(|row| (row.n, row.d0, row.d1.unwrap()));
    let elapsed = clock.elapsed().as_secs_f64();
    let (pass, detail) = match hit {
        Some((n, d0, d1)) => {
            let ok = decreasing && n <= 30 && d1 < 0.1 && elapsed < 10.0;
            (
                ok,
                format!(
                    "d0 strictly decreasing = {decreasing}, d0 = {d0:.3e} at n = {n}, d1 = {d1:.3e}, {elapsed:.2}s"
                ),
            )
        }
        None => (false, "d0 never fell below 0.05".to_string()),
    };
    report(1, "renorm convergence", pass, &detail);
}

#[test]
fn acceptance_02_exact_limit() {
    let clock = Instant::now();
    let model = exact_limit_model();
    let limit = LimitMap::new(2, vec![-2.0, 0.0]).unwrap();
    let grid = GridSpec::standard(0.1).unwrap();
    let sweep = convergence_sweep(&model, &limit, 1..=12, grid, 0).unwrap();
    let worst = sweep.rows.iter().map(|r| r.d0).fold(0.0, f64::max);
    let elapsed = clock.elapsed().as_secs_f64();
    let pass = worst < 1e-10 && elapsed < 1.0;
    report(
        2,
        "exact limit",
        pass,
        &format!("max d0 over n = 1..12 is {worst:.3e}, {elapsed:.2}s"),
    );
}

#[test]
fn acceptance_03_census_exactness() {
    let clock = Instant::now();
    let q = Poly::new(vec![-2.0, 0.0, 1.0]);
    let opts = LineOpts::default();
    let mut pass = true;
    let mut detail = String::new();
    for n in 1..=10u32 {
        let run = fixed_points_1d(&q, n, &opts).unwrap();
        let expected = 1usize << n;
        let counts_ok = run.count == expected && run.square_free;
        let real_ok = run.all_roots_real() && run.points.len() == expected;
        let cert_ok = run
            .certificates
            .iter()
            .all(|c| c.sign_lo != 0 && c.sign_hi != 0 && c.sign_lo != c.sign_hi);
        let mult_ok = run
            .multipliers
            .iter()
            .all(|m| (m.abs() - 1.0).abs() > 1e-8);
        if !(counts_ok && real_ok && cert_ok && mult_ok) {
            pass = false;
            detail = format!(
                "n = {n}: count {} vs {expected}, real {real_ok}, certs {cert_ok}, multipliers {mult_ok}",
                run.count
            );
            break;
        }
    }
    let elapsed = clock.elapsed().as_secs_f64();
    pass = pass && elapsed < 5.0;
    if detail.is_empty() {
        detail = format!("P_n = 2^n for n = 1..10 with Sturm certificates, {elapsed:.2}s");
    }
    report(3, "census exactness", pass, &detail);
}

#[test]
fn acceptance_04_zeta_identity() {
    let q = Poly::new(vec![-2.0, 0.0, 1.0]);
    let census = census::count_pn_1d(&q, 10, &LineOpts::default()).unwrap();
    let zeta = zeta_partial(&census, 10).unwrap();
    let mut worst = 0.0f64;
    for (n, c) in zeta.coeffs.iter().enumerate() {
        worst = worst.max((c - 2.0f64.powi(n as i32)).abs());
    }
    let growth = growth_rate(&census).unwrap();
    let growth_err = (growth.value - 2.0f64.ln()).abs();
    let pass = worst < 1e-9 && growth_err < 1e-12;
    report(
        4,
        "zeta identity",
        pass,
        &format!("max coefficient deviation {worst:.3e}, growth error {growth_err:.3e}"),
    );
}

#[test]
fn acceptance_05_bezout_power_map() {
    let clock = Instant::now();
    let budget = ComposeBudget::default();
    let mut pass = true;
    let mut detail = String::new();
    'outer: for d in [2usize, 3] {
        for k in [1usize, 2, 3] {
            let map = power_map(1, d).unwrap();
            let set = periodic_points(&map, k, Field::Complex, &budget).unwrap();
            let cert = power_map_certificate(1, d, k).unwrap();
            let expected = (d as u128).pow(k as u32);
            if set.count as u128 != expected || !cert.count_matches {
                pass = false;
                detail = format!("D = {d}, k = {k}: count {} vs {expected}", set.count);
                break 'outer;
            }
            if set.margins.iter().any(|&m| m <= 0.5) {
                pass = false;
                detail = format!("D = {d}, k = {k}: a margin fell below 0.5");
                break 'outer;
            }
            let a = set.sorted_multiplier_moduli();
            let b = cert.sorted_moduli.clone();
            if a.len() != b.len() || a.iter().zip(&b).any(|(x, y)| (x - y).abs() > 1e-9) {
                pass = false;
                detail = format!("D = {d}, k = {k}: multiplier moduli disagree");
                break 'outer;
            }
        }
    }
    let elapsed = clock.elapsed().as_secs_f64();
    pass = pass && elapsed < 5.0;
    if detail.is_empty() {
        detail = format!(
            "counts = D^k and certificate moduli agree for D in {{2,3}}, k in {{1,2,3}}, {elapsed:.2}s"
        );
    }
    report(5, "Bezout / power map", pass, &detail);
}

#[test]
fn acceptance_06_monte_carlo() {
    let clock = Instant::now();
    let clean = McConfig {
        degree: 3,
        k_max: 3,
        samples: 1000,
        seed: 20260810,
        margin_tol: 1e-6,
        plants: Vec::new(),
    };
    let stats = monte_carlo_hyperbolicity(&clean).unwrap();
    let planted = McConfig {
        plants: vec![vec![-0.75, 0.0, 1.0]],
        ..clean.clone()
    };
    let with_plant = monte_carlo_hyperbolicity(&planted).unwrap();
    let elapsed = clock.elapsed().as_secs_f64();
    let pass = stats.flagged_count == 0
        && with_plant.flagged == vec![1000]
        && with_plant.flagged_count == 1
        && elapsed < 60.0;
    report(
        6,
        "Monte-Carlo hyperbolicity",
        pass,
        &format!(
            "0 of 1000 random samples flagged (min margin {:.3e}), planted witness flagged exactly once, {elapsed:.2}s",
            stats.min_margin
        ),
    );
}

#[test]
fn acceptance_07_tower_geometry() {
    let model = {
        let global = GlobalMapParams::new(1.0, 0.0, 1.0, 1.0, 2, vec![0.0, 0.0]).unwrap();
        ModelDiffeo::new(desk_saddle(), global, 1.0, Poly::zero()).unwrap()
    };
    // Identity delta_n^rho = lambda^n: the geometry reports it exactly,
    // and the power-function route agrees to floating accuracy.
    let rho = model.saddle.saddle_exponent();
    let mut identity_ok = true;
    for n in 1..=50u32 {
        let (_, image) = rectangle_geometry(&model, n).unwrap();
        let lam_n = model.saddle.lambda.powi(n as i32);
        if image.stable_distance_scale != lam_n {
            identity_ok = false;
            break;
        }
        let via_pow = model.saddle.mu.powi(-(n as i32)).powf(rho);
        if (via_pow - lam_n).abs() > 1e-12 * lam_n {
            identity_ok = false;
            break;
        }
    }
    // Gap ratios decreasing over n_1 = 10..20, positive, under the
    // reported envelope.
    let mut ratios_ok = true;
    let mut prev = f64::INFINITY;
    for n1 in 10..=20u32 {
        let spec = select_tower_indices(&model, 2, n1, 2.0).unwrap();
        let gaps = gap_ratio(&model, &spec, 2.0).unwrap();
        let r = gaps.ratios[0];
        if !(r > 0.0) || r > gaps.envelopes[0] || r >= prev {
            ratios_ok = false;
            break;
        }
        prev = r;
    }
    let pass = identity_ok && ratios_ok;
    report(
        7,
        "tower geometry",
        pass,
        &format!("distance identity to 1 ulp for n <= 50: {identity_ok}; gap ratios positive, enveloped, decreasing over n1 = 10..20: {ratios_ok}"),
    );
}

#[test]
fn acceptance_08_tangency_solver() {
    let opts = TangencyOpts::default();
    let mut pass = true;
    let mut detail = String::new();
    for (k, n) in [(2usize, 6u32), (3, 5)] {
        let global = GlobalMapParams::new(1.0, 0.0, 1.0, 1.0, k, vec![0.0; k]).unwrap();
        let model = ModelDiffeo::new(
            desk_saddle(),
            global,
            1.0,
            Poly::new(vec![0.0, 0.0, 0.0, 0.1, 0.05]),
        )
        .unwrap();
        let state = tangency_order_solver(&model, k, n, &opts).unwrap();
        if state.residual_norm >= 1e-8 || state.next_derivative.abs() <= 1e-6 {
            pass = false;
            detail = format!(
                "k = {k}: residual {:.3e}, certificate {:.3e}",
                state.residual_norm, state.next_derivative
            );
            break;
        }
    }
    if pass {
        // Scaling exponents across an n-sweep at k = 2.
        let global = GlobalMapParams::new(1.0, 0.0, 1.0, 1.0, 2, vec![0.0, 0.0]).unwrap();
        let model = ModelDiffeo::new(
            desk_saddle(),
            global,
            1.0,
            Poly::new(vec![0.0, 0.0, 0.0, 0.1, 0.05]),
        )
        .unwrap();
        let states: Vec<_> = [5u32, 7, 9, 11]
            .iter()
            .map(|&n| tangency_order_solver(&model, 2, n, &opts).unwrap())
            .collect();
        let scaling = derivative_scaling_check(&model, &states).unwrap();
        for e in &scaling.entries {
            if e.zero_predicted {
                continue;
            }
            let (se, te) = e.predicted.unwrap();
            let fs = e.fitted_stretch_exp.unwrap();
            let ft = e.fitted_t_exp.unwrap();
            if (fs - se).abs() > 0.15 || (ft - te).abs() > 0.15 {
                pass = false;
                detail = format!(
                    "scaling ({}, {}): fitted ({fs:.3}, {ft:.3}) vs predicted ({se}, {te})",
                    e.d_order, e.power
                );
                break;
            }
        }
        if pass {
            detail = "k = 2 and k = 3 converge below 1e-8 with order certificates; scaling exponents within 0.15".into();
        }
    }
    report(8, "tangency solver", pass, &detail);
}

#[test]
fn acceptance_09_cascade() {
    let clock = Instant::now();
    let cfg = Config::parse(
        "a_preset = list\na_list = 0,0,2\nn1 = 3\nk = 5\nepsilon = 2.5e-8\neta = 0.5\n",
    )
    .unwrap();
    let dir = tmpdir("cascade");
    let outcome = run_experiment("cascade", &cfg, 42, &dir).unwrap();
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("cascade.json")).unwrap()).unwrap();
    let stage = &json["stages"][0];
    let achieved = stage["achieved"].as_u64().unwrap();
    let min_margin = stage["min_margin"].as_f64().unwrap();
    let preserved = stage["probe"]["preserved"].as_bool().unwrap();
    let elapsed = clock.elapsed().as_secs_f64();
    let pass =
        outcome.passed && achieved >= 6 && min_margin > 1e-4 && preserved && elapsed < 5.0;
    report(
        9,
        "cascade",
        pass,
        &format!(
            "{achieved} hyperbolic period-3 points, min margin {min_margin:.3e}, probe preserved = {preserved}, {elapsed:.2}s"
        ),
    );
}

#[test]
fn acceptance_10_determinism() {
    // Criterion-6 rerun: identical seeds give identical polymap bytes.
    let mc_cfg =
        Config::parse("degree = 3\nk_max = 3\nsamples = 120\nmargin_tol = 1e-6\n").unwrap();
    let d1 = tmpdir("det-polymap-1");
    let d2 = tmpdir("det-polymap-2");
    run_experiment("polymap", &mc_cfg, 20260810, &d1).unwrap();
    run_experiment("polymap", &mc_cfg, 20260810, &d2).unwrap();
    let mc_same = std::fs::read(d1.join("polymap.json")).unwrap()
        == std::fs::read(d2.join("polymap.json")).unwrap()
        && std::fs::read(d1.join("polymap_margins.csv")).unwrap()
            == std::fs::read(d2.join("polymap_margins.csv")).unwrap();

    // Criterion-9 rerun.
    let cascade_cfg = Config::parse(
        "a_preset = list\na_list = 0,0,2\nn1 = 3\nk = 5\nepsilon = 2.5e-8\neta = 0.5\n",
    )
    .unwrap();
    let c1 = tmpdir("det-cascade-1");
    let c2 = tmpdir("det-cascade-2");
    run_experiment("cascade", &cascade_cfg, 42, &c1).unwrap();
    run_experiment("cascade", &cascade_cfg, 42, &c2).unwrap();
    let cascade_same =
        std::fs::read(c1.join("cascade.json")).unwrap() == std::fs::read(c2.join("cascade.json")).unwrap();

    let pass = mc_same && cascade_same;
    report(
        10,
        "determinism",
        pass,
        &format!("polymap bytes identical = {mc_same}, cascade bytes identical = {cascade_same}"),
    );
}
