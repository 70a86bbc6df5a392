use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use winfree_core::certificates::{
    initial_layer_check, order_lowering_residual, pathwise_stage_choice, pod_check, smallness_check,
    speed_limit_residual, theorem1_margins,
};
use winfree_core::integrate::{
    detect_death, duhamel_residual, integrate_second_order, IntegratorOptions, Trajectory,
};
use winfree_core::model::{order_parameter, order_parameter_full};
use winfree_core::{ClusterSpec, EnsembleState, ModelParameters, SmallnessConstants};

fn random_run(seed: u64, horizon: f64) -> Trajectory {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(2..7);
    let m = 10f64.powf(rng.random_range(-3.0..0.0));
    let theta = (0..n).map(|_| rng.random_range(-PI..PI)).collect();
    let omega = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
    let nu = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let p = ModelParameters::new(nu, 1.0, m).unwrap();
    let init = EnsembleState::new(theta, omega, 0.0).unwrap();
    let opts = IntegratorOptions::default()
        .with_tolerances(1e-10, 1e-12)
        .with_sample_interval(0.02);
    integrate_second_order(&init, &p, horizon, &opts).unwrap()
}

#[test]
fn speed_limit_and_order_lowering_hold_pathwise() {
    for seed in 0..200 {
        let traj = random_run(seed, 10.0);
        let speed = speed_limit_residual(&traj, 1e-7).unwrap();
        assert!(speed.satisfied, "seed {seed}: speed excess {}", speed.lhs);
        let lowering = order_lowering_residual(&traj, None, 1e-7).unwrap();
        assert!(lowering.satisfied, "seed {seed}: order-lowering excess {}", lowering.lhs);
        let n = traj.params.n_oscillators();
        let half: Vec<usize> = (0..n / 2 + 1).collect();
        let partial = order_lowering_residual(&traj, Some(&half), 1e-7).unwrap();
        assert!(partial.satisfied, "seed {seed}: partial excess {}", partial.lhs);
    }
}

#[test]
fn duhamel_identity_on_generic_run() {
    let p = ModelParameters::new(vec![0.3, -0.2, 0.5, 0.1], 1.0, 0.2).unwrap();
    let init = EnsembleState::new(vec![0.5, -2.0, 1.0, 3.0], vec![1.0, 0.0, -0.5, 0.3], 0.0).unwrap();
    let opts = IntegratorOptions::default()
        .with_tolerances(1e-11, 1e-13)
        .with_sample_interval(1e-3);
    let traj = integrate_second_order(&init, &p, 5.0, &opts).unwrap();
    let residual = duhamel_residual(&traj, &p).unwrap();
    assert!(residual < 1e-5, "residual {residual}");
}

#[test]
fn initial_layer_conclusion_follows_certificate() {
    let mut passed = 0;
    for seed in 0..100 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = 6;
        let m = 10f64.powf(rng.random_range(-3.0..-0.5));
        let theta: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
        let omega: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let nu = (0..n).map(|_| rng.random_range(-0.5..0.5)).collect();
        let p = ModelParameters::new(nu, 1.0, m).unwrap();
        let init = EnsembleState::new(theta, omega, 0.0).unwrap();
        let r0 = order_parameter_full(&init.phases);
        let (delta, eta) = (0.5, 1.0);
        let cert = initial_layer_check(delta, eta, &p, init.velocity_sup(), r0).unwrap();
        if !cert.satisfied {
            continue;
        }
        passed += 1;
        let opts = IntegratorOptions::default().with_sample_interval(eta * m / 50.0);
        let traj = integrate_second_order(&init, &p, eta * m, &opts).unwrap();
        let (r_min, _) = traj.min_order_parameter();
        assert!(r_min > delta * r0, "seed {seed}");
    }
    assert!(passed > 50);
}

#[test]
fn partial_death_certificate_is_sound() {
    let mut certified = 0;
    for seed in 0..40 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = 6;
        let theta: Vec<f64> = (0..n)
            .map(|i| if i < 4 { rng.random_range(-1.0..1.0) } else { rng.random_range(-PI..PI) })
            .collect();
        let omega: Vec<f64> = (0..n).map(|_| rng.random_range(-0.05..0.05)).collect();
        let nu = (0..n).map(|_| rng.random_range(-0.05..0.05)).collect();
        let p = ModelParameters::new(nu, 1.0, 0.01).unwrap();
        let init = EnsembleState::new(theta, omega.clone(), 0.0).unwrap();
        let opts = IntegratorOptions::default().with_sample_interval(0.05);
        let traj = integrate_second_order(&init, &p, 40.0, &opts).unwrap();

        let x = 0.5;
        let Some((k, pod, cluster)) = traj.samples.iter().enumerate().skip(1).find_map(|(k, s)| {
            let inner: Vec<usize> = (0..n).filter(|&i| s.phases[i].cos() >= x).collect();
            let cluster = ClusterSpec::new(inner, (0..n).collect(), n).ok()?;
            let mass = order_parameter(&s.phases, Some(cluster.inner())).ok()?;
            let rho = 0.95 * mass * (1.0 + x) / 2.0;
            let pod = pod_check(s, &cluster, rho, x, 1.0, &p, &omega).ok()?;
            pod.satisfied.then_some((k, (rho, pod), cluster))
        }) else {
            continue;
        };
        certified += 1;
        let (rho, _) = pod;
        let later = &traj.samples[k..];
        for s in later {
            let r_a = order_parameter(&s.phases, Some(cluster.inner())).unwrap();
            assert!(r_a >= rho - 1e-7, "seed {seed}");
        }
        for i in 0..n {
            let (lo, hi) = later
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), s| (lo.min(s.phases[i]), hi.max(s.phases[i])));
            let cap = if cluster.inner().contains(&i) { 2.0 * PI } else { 4.0 * PI };
            assert!(hi - lo < cap, "seed {seed}, oscillator {i}");
        }
    }
    assert!(certified >= 20, "only {certified} certified runs");
}

#[test]
fn smallness_implies_death_with_quarter_floor() {
    let k = SmallnessConstants::PATHWISE;
    let (l1, l2) = theorem1_margins(k);
    assert!(l1.satisfied && l2.satisfied);
    for seed in 0..4 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = 5;
        let theta: Vec<f64> = (0..n).map(|_| rng.random_range(-PI / 2.0..PI / 2.0)).collect();
        let r0 = order_parameter_full(&theta);
        let scale = r0.powf(1.5);
        let spread = |rng: &mut ChaCha8Rng, cap: f64| -> Vec<f64> {
            let raw: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let sup = raw.iter().fold(0.0f64, |a, x| a.max(x.abs()));
            raw.iter().map(|x| x / sup * cap).collect()
        };
        let nu = spread(&mut rng, 0.9 * k.a * scale);
        let omega = spread(&mut rng, 0.9 * k.c * scale);
        let p = ModelParameters::new(nu, 1.0, 0.9 * k.b * scale).unwrap();
        let init = EnsembleState::new(theta, omega, 0.0).unwrap();
        assert!(smallness_check(&init, &p, k).unwrap().satisfied());
        let (mu, rho, _) = pathwise_stage_choice(r0);
        assert_eq!(mu, rho);
        let opts = IntegratorOptions::default().with_sample_interval(0.5);
        let traj = integrate_second_order(&init, &p, 300.0, &opts).unwrap();
        let verdict = detect_death(&traj, 1e-6, 30.0).unwrap();
        assert!(verdict.died, "seed {seed}: residual {}", verdict.residual_velocity);
        assert!(traj.min_order_parameter().0 >= r0 / 4.0 - 1e-7);
    }
}
