//! Acceptance criteria 1-10. Each test prints one `criterion N: PASS|FAIL`
//! line with the measured quantities before asserting.

use std::f64::consts::{FRAC_PI_3, PI};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use winfree_core::certificates::{
    initial_layer_check, order_lowering_residual, pod_check, speed_limit_residual,
    theorem1_margins,
};
use winfree_core::embedding::{embed, integrate_kuramoto, verify_embedding};
use winfree_core::equilibrium::{
    alpha_infinity, entrance_time_bound, find_equilibrium, g,
};
use winfree_core::integrate::{
    integrate_field, integrate_first_order, integrate_second_order, IntegratorOptions,
    WinfreeField,
};
use winfree_core::model::{
    divergence, order_parameter, order_parameter_full, potential, winfree_rhs, SystemOrder,
};
use winfree_core::tikhonov::compare_trajectories;
use winfree_core::{ClusterSpec, EnsembleState, ModelParameters, SmallnessConstants};
use winfree_lab::reproduce::{reproduce_theorem1, reproduce_theorem2, Outcome};

fn report(criterion: u32, ok: bool, detail: &str) {
    println!("criterion {criterion}: {} ({detail})", if ok { "PASS" } else { "FAIL" });
}

fn sub(criterion: u32, part: &str, ok: bool, detail: &str) {
    println!("  criterion {criterion}.{part}: {} ({detail})", if ok { "pass" } else { "fail" });
}

fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn uniform_vec(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(lo..hi)).collect()
}

#[test]
fn criterion_01_pathwise_constants() {
    let (r1, r2) = theorem1_margins(SmallnessConstants::new(1.0 / 50.0, 1.0 / 80.0, 1.0 / 20.0).unwrap());
    let ok1 = (r1.lhs - 0.0159).abs() <= 0.0005 && r1.rhs == 0.5 && r1.satisfied;
    let ok2 = (r2.lhs - 0.0911).abs() <= 0.0005 && (r2.rhs - 0.0968).abs() <= 0.0002 && r2.satisfied;
    report(
        1,
        ok1 && ok2,
        &format!("lhs1 = {:.6}, rhs1 = {}, lhs2 = {:.6}, rhs2 = {:.6}", r1.lhs, r1.rhs, r2.lhs, r2.rhs),
    );
    assert!(ok1 && ok2);
}

#[test]
fn criterion_02_pathwise_theorem_reproduction() {
    let start = Instant::now();
    let runs: Vec<_> = (1..=10).map(|seed| reproduce_theorem1(seed, 8, 500.0).unwrap()).collect();
    let elapsed = start.elapsed().as_secs_f64();
    for r in &runs {
        sub(
            2,
            &format!("seed{}", r.seed),
            r.outcome == Outcome::Pass,
            &format!("R0 = {:.4}, min R = {:.4}, floor = {:.4}, died = {}", r.r0, r.inf_r, r.floor, r.died),
        );
    }
    let all = runs
        .iter()
        .all(|r| r.outcome == Outcome::Pass && r.died && r.inf_r >= r.floor - 1e-7);
    let ok = all && elapsed < 60.0;
    report(2, ok, &format!("10 seeds, N = 8, horizon 500, {elapsed:.1} s"));
    assert!(ok);
}

#[test]
fn criterion_03_zero_inertia_theorem_reproduction() {
    let start = Instant::now();
    let runs: Vec<_> = (1..=5)
        .map(|seed| reproduce_theorem2(seed, 5, 2.5, 0.2, 500.0).unwrap())
        .collect();
    let elapsed = start.elapsed().as_secs_f64();
    for r in &runs {
        sub(
            3,
            &format!("seed{}", r.seed),
            r.outcome == Outcome::Pass,
            &format!("m = {:.3e}, R(horizon) = {:.6}, died = {}", r.inertia, r.r_end, r.died),
        );
    }
    let all = runs.iter().all(|r| r.outcome == Outcome::Pass && r.died && r.r_end > 1.8);
    let ok = all && elapsed < 60.0;
    report(3, ok, &format!("5 seeds, theta0_sup = 2.5, eps = 0.2, {elapsed:.1} s"));
    assert!(ok);
}

#[test]
fn criterion_04_gradient_flow_identity() {
    let mut rng = seeded(4);
    let h = 1e-5;
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let n = rng.random_range(2..10);
        let nu = uniform_vec(&mut rng, n, -1.0, 1.0);
        let p = ModelParameters::new(nu, rng.random_range(0.2..2.0), 0.0).unwrap();
        let theta = uniform_vec(&mut rng, n, -PI, PI);
        let f = winfree_rhs(&theta, &p).unwrap();
        let mut err2 = 0.0;
        for k in 0..n {
            let mut plus = theta.clone();
            let mut minus = theta.clone();
            plus[k] += h;
            minus[k] -= h;
            let d = (potential(&plus, &p).unwrap() - potential(&minus, &p).unwrap()) / (2.0 * h);
            err2 += (d + f[k]).powi(2);
        }
        let norm = f.iter().map(|x| x * x).sum::<f64>().sqrt();
        worst = worst.max(err2.sqrt() / norm);
    }
    let ok = worst < 1e-6;
    report(4, ok, &format!("100 points, worst relative error {worst:.3e}"));
    assert!(ok);
}

#[test]
fn criterion_05_pathwise_inequalities() {
    let opts = IntegratorOptions::default()
        .with_tolerances(1e-10, 1e-12)
        .with_sample_interval(0.02);
    let mut worst_speed = f64::NEG_INFINITY;
    let mut worst_lowering = f64::NEG_INFINITY;
    let mut layer_certified = 0;
    let mut layer_ok = true;
    for seed in 0..50 {
        let mut rng = seeded(500 + seed);
        let n = rng.random_range(2..8);
        let m = 10f64.powf(rng.random_range(-3.0..0.0));
        let theta = uniform_vec(&mut rng, n, -PI, PI);
        let omega = uniform_vec(&mut rng, n, -1.0, 1.0);
        let nu = uniform_vec(&mut rng, n, -0.5, 0.5);
        let p = ModelParameters::new(nu, 1.0, m).unwrap();
        let init = EnsembleState::new(theta, omega, 0.0).unwrap();
        let traj = integrate_second_order(&init, &p, 10.0, &opts).unwrap();
        let speed = speed_limit_residual(&traj, 1e-7).unwrap();
        let lowering = order_lowering_residual(&traj, None, 1e-7).unwrap();
        worst_speed = worst_speed.max(speed.lhs);
        worst_lowering = worst_lowering.max(lowering.lhs);

        let r0 = order_parameter_full(&init.phases);
        let (delta, eta) = (0.5, 1.0);
        if initial_layer_check(delta, eta, &p, init.velocity_sup(), r0).unwrap().satisfied {
            layer_certified += 1;
            let dense = IntegratorOptions::default()
                .with_tolerances(1e-10, 1e-12)
                .with_sample_interval(eta * m / 100.0);
            let layer = integrate_second_order(&init, &p, eta * m, &dense).unwrap();
            layer_ok &= layer.min_order_parameter().0 > delta * r0;
        }
    }
    let ok_speed = worst_speed <= 1e-7;
    let ok_lowering = worst_lowering <= 1e-7;
    sub(5, "speed", ok_speed, &format!("worst excess {worst_speed:.3e}"));
    sub(5, "order-lowering", ok_lowering, &format!("worst excess {worst_lowering:.3e}"));
    sub(5, "initial-layer", layer_ok, &format!("{layer_certified} certified runs"));
    let ok = ok_speed && ok_lowering && layer_ok && layer_certified > 0;
    report(5, ok, "50 trajectories, m in [1e-3, 1], slack 1e-7");
    assert!(ok);
}

#[test]
fn criterion_06_embedding_invariance() {
    let opts = IntegratorOptions::default()
        .with_tolerances(1e-10, 1e-12)
        .with_sample_interval(0.1);
    let mut worst = 0.0f64;
    for m in [0.1, 0.0] {
        for seed in 0..5 {
            let mut rng = seeded(600 + seed);
            let theta = uniform_vec(&mut rng, 3, -PI, PI);
            let omega = uniform_vec(&mut rng, 3, -1.0, 1.0);
            let nu = uniform_vec(&mut rng, 3, -1.0, 1.0);
            let p = ModelParameters::new(nu, 1.0, m).unwrap();
            let init = EnsembleState::new(theta, omega, 0.0).unwrap();
            let w = integrate_field(&WinfreeField(&p), &p, &init, 10.0, &opts).unwrap();
            let (system, phi) = embed(&init, &p).unwrap();
            assert_eq!(system.size(), 12);
            let k = integrate_kuramoto(&phi, &system, 10.0, &opts).unwrap();
            let dev = verify_embedding(&w, &k).unwrap();
            sub(6, &format!("m{m}-seed{seed}"), dev < 1e-6, &format!("deviation {dev:.3e}"));
            worst = worst.max(dev);
        }
    }
    let ok = worst < 1e-6;
    report(6, ok, &format!("worst deviation {worst:.3e}"));
    assert!(ok);
}

#[test]
fn criterion_07_tikhonov_bounds() {
    let start = Instant::now();
    let opts = IntegratorOptions::default()
        .with_tolerances(1e-10, 1e-13)
        .with_sample_interval(1e-3)
        .with_max_step(1e-3);
    let mut phase_violations = 0;
    let mut velocity_violations = 0;
    let mut worst_phase: f64 = 0.0;
    let mut worst_velocity: f64 = 0.0;
    let mut ratios = Vec::new();
    for seed in 0..20 {
        let mut rng = seeded(seed);
        let theta = uniform_vec(&mut rng, 4, -PI, PI);
        let omega = uniform_vec(&mut rng, 4, -1.0, 1.0);
        let nu = uniform_vec(&mut rng, 4, -1.0, 1.0);
        let init = EnsembleState::new(theta, omega, 0.0).unwrap();
        let mut sup_gaps = Vec::new();
        for m in [1e-2, 1e-3] {
            let p = ModelParameters::new(nu.clone(), 1.0, m).unwrap();
            let rep = compare_trajectories(&init, &p, 1.0, &opts).unwrap();
            if !rep.phase_holds(1e-9) {
                phase_violations += 1;
            }
            if !rep.velocity_holds_from(m, 1e-9) {
                velocity_violations += 1;
            }
            worst_phase = worst_phase.max(rep.worst_phase_ratio());
            worst_velocity = worst_velocity.max(rep.worst_velocity_ratio(m));
            sup_gaps.push(rep.sup_phase_gap());
        }
        ratios.push(sup_gaps[0] / sup_gaps[1]);
    }
    let elapsed = start.elapsed().as_secs_f64();
    let ratio_ok = ratios.iter().all(|r| (3.0..=30.0).contains(r));
    let (lo, hi) = ratios
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), r| (lo.min(*r), hi.max(*r)));
    sub(
        7,
        "phase",
        phase_violations == 0,
        &format!("{phase_violations}/40 runs exceed the bound, worst gap/bound {worst_phase:.4}"),
    );
    sub(
        7,
        "velocity",
        velocity_violations == 0,
        &format!("{velocity_violations}/40 runs exceed the bound for t >= m, worst gap/bound {worst_velocity:.4}"),
    );
    sub(7, "ratio", ratio_ok, &format!("sup-gap ratio across the decade in [{lo:.2}, {hi:.2}]"));
    let ok = phase_violations == 0 && velocity_violations == 0 && ratio_ok && elapsed < 120.0;
    report(7, ok, &format!("20 seeds, N = 4, m in {{1e-2, 1e-3}}, {elapsed:.1} s"));
    assert!(ok);
}

fn fd_trace(z: &[f64], field: impl Fn(&[f64]) -> Vec<f64>) -> f64 {
    let h = 1e-5;
    (0..z.len())
        .map(|k| {
            let mut plus = z.to_vec();
            let mut minus = z.to_vec();
            plus[k] += h;
            minus[k] -= h;
            (field(&plus)[k] - field(&minus)[k]) / (2.0 * h)
        })
        .sum()
}

#[test]
fn criterion_08_divergence_formulas() {
    let mut rng = seeded(8);
    let (mut worst1, mut worst2) = (0.0f64, 0.0f64);
    let mut weighted_exact = true;
    for _ in 0..100 {
        let n = rng.random_range(2..8);
        let m = rng.random_range(0.05..2.0);
        let nu = uniform_vec(&mut rng, n, -1.0, 1.0);
        let p = ModelParameters::new(nu, rng.random_range(0.2..2.0), m).unwrap();
        let theta = uniform_vec(&mut rng, n, -PI, PI);
        let omega = uniform_vec(&mut rng, n, -1.0, 1.0);
        let state = EnsembleState::new(theta.clone(), omega.clone(), 0.0).unwrap();

        let fd1 = fd_trace(&theta, |t| winfree_rhs(t, &p).unwrap());
        let div1 = divergence(&state, &p, SystemOrder::First, None).unwrap();
        worst1 = worst1.max((fd1 - div1).abs() / div1.abs().max(1e-3));

        let mut z = theta.clone();
        z.extend_from_slice(&omega);
        let fd2 = fd_trace(&z, |z| {
            let f = winfree_rhs(&z[..n], &p).unwrap();
            let mut out = z[n..].to_vec();
            out.extend(f.iter().zip(&z[n..]).map(|(fi, pi)| (fi - pi) / m));
            out
        });
        let div2 = divergence(&state, &p, SystemOrder::Second, None).unwrap();
        worst2 = worst2.max((fd2 - div2).abs() / div2.abs());

        let constant = |_: f64| (2.5, 0.0);
        weighted_exact &= divergence(&state, &p, SystemOrder::Second, Some(&constant)).unwrap() == -(n as f64) / m;
    }
    let ok = worst1 < 1e-5 && worst2 < 1e-6 && weighted_exact;
    report(
        8,
        ok,
        &format!("first order rel err {worst1:.3e}, second order rel err {worst2:.3e}, constant weight exact: {weighted_exact}"),
    );
    assert!(ok);
}

#[test]
fn criterion_09_equilibrium_theory() {
    let alpha = 2.0;
    let pair = alpha_infinity(alpha).unwrap();
    let level_err = (g(pair.alpha_inf) - g(alpha)).abs();
    let ok_level = level_err <= 1e-12 && pair.alpha_inf > 0.0 && pair.alpha_inf < FRAC_PI_3;
    sub(9, "alpha", ok_level, &format!("alpha_inf = {:.12}, |g diff| = {level_err:.1e}", pair.alpha_inf));

    let mut ok_eq = true;
    let mut ok_flow = true;
    for seed in 0..5 {
        let mut rng = seeded(900 + seed);
        let n = 6;
        let kappa = rng.random_range(0.5..2.0);
        let nu: Vec<f64> = uniform_vec(&mut rng, n, -0.2, 0.2).iter().map(|x| x * kappa).collect();
        let p = ModelParameters::new(nu.clone(), kappa, 0.0).unwrap();
        let eq = find_equilibrium(&p, alpha).unwrap();
        let r = order_parameter_full(&eq.phases);
        let residual = nu
            .iter()
            .zip(&eq.phases)
            .fold(0.0f64, |a, (v, t)| a.max((v - kappa * r * t.sin()).abs()));
        let inside = eq.phases.iter().all(|t| t.abs() < pair.alpha_inf);
        ok_eq &= residual <= 1e-10 && inside;

        let theta = uniform_vec(&mut rng, n, -alpha, alpha);
        let t_in = entrance_time_bound(&p, alpha).unwrap();
        let opts = IntegratorOptions::default()
            .with_tolerances(1e-10, 1e-12)
            .with_sample_interval(t_in / 200.0);
        let traj = integrate_first_order(&EnsembleState::at_rest(theta), &p, 3.0 * t_in, &opts).unwrap();
        let entered = traj
            .samples
            .iter()
            .filter(|s| s.time >= t_in)
            .all(|s| s.phases.iter().all(|t| t.abs() < pair.alpha_inf + 1e-9));
        let dist = traj
            .last()
            .phases
            .iter()
            .zip(&eq.phases)
            .fold(0.0f64, |a, (x, y)| a.max((x - y).abs()));
        ok_flow &= entered && dist < 1e-3;
        sub(
            9,
            &format!("seed{seed}"),
            residual <= 1e-10 && inside && entered && dist < 1e-3,
            &format!("residual {residual:.1e}, entered by T: {entered}, distance at 3T {dist:.1e}"),
        );
    }
    let ok = ok_level && ok_eq && ok_flow;
    report(9, ok, "alpha = 2.0, 5 first-order runs");
    assert!(ok);
}

#[test]
fn criterion_10_partial_death_soundness() {
    let opts = IntegratorOptions::default().with_sample_interval(0.05);
    let n = 6;
    let x = 0.5;
    let mut certified = 0;
    let mut sound = true;
    let mut seed = 0u64;
    while certified < 20 && seed < 400 {
        let mut rng = seeded(1000 + seed);
        seed += 1;
        let clustered = rng.random_range(3..=n);
        let theta: Vec<f64> = (0..n)
            .map(|i| if i < clustered { rng.random_range(-1.2..1.2) } else { rng.random_range(-PI..PI) })
            .collect();
        let omega = uniform_vec(&mut rng, n, -0.05, 0.05);
        let nu = uniform_vec(&mut rng, n, -0.05, 0.05);
        let m = 10f64.powf(rng.random_range(-3.0..-1.5));
        let p = ModelParameters::new(nu, 1.0, m).unwrap();
        let init = EnsembleState::new(theta, omega.clone(), 0.0).unwrap();
        let traj = integrate_second_order(&init, &p, 40.0, &opts).unwrap();

        let found = traj.samples.iter().enumerate().find_map(|(k, s)| {
            if s.time < m {
                return None;
            }
            let inner: Vec<usize> = (0..n).filter(|&i| s.phases[i].cos() >= x).collect();
            let cluster = ClusterSpec::new(inner, (0..n).collect(), n).ok()?;
            let mass = order_parameter(&s.phases, Some(cluster.inner())).ok()?;
            let rho = 0.95 * mass * (1.0 + x) / 2.0;
            let pod = pod_check(s, &cluster, rho, x, 1.0, &p, &omega).ok()?;
            pod.satisfied.then_some((k, rho, cluster))
        });
        let Some((k, rho, cluster)) = found else {
            continue;
        };
        certified += 1;
        let later = &traj.samples[k..];
        let min_ra = later
            .iter()
            .map(|s| order_parameter(&s.phases, Some(cluster.inner())).unwrap())
            .fold(f64::INFINITY, f64::min);
        let mut osc_ok = true;
        for i in 0..n {
            let (lo, hi) = later
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), s| (lo.min(s.phases[i]), hi.max(s.phases[i])));
            let cap = if cluster.inner().contains(&i) { 2.0 * PI } else { 4.0 * PI };
            osc_ok &= hi - lo < cap;
        }
        let run_ok = min_ra >= rho - 1e-7 && osc_ok;
        sound &= run_ok;
        sub(
            10,
            &format!("run{certified}"),
            run_ok,
            &format!("t0 = {:.2}, |A| = {}, rho = {rho:.4}, min R_A = {min_ra:.4}", later[0].time, cluster.inner().len()),
        );
    }
    let ok = sound && certified == 20;
    report(10, ok, &format!("{certified} certified trajectories"));
    assert!(ok);
}
