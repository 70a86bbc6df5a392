use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use winfree_core::certificates::{pathwise_bundle, theorem1_margins, CertificateReport};
use winfree_core::embedding::{embed, integrate_kuramoto, verify_embedding};
use winfree_core::equilibrium::{
    alpha_infinity, entrance_time_bound, equilibrium_exists, exponential_rate, find_equilibrium,
};
use winfree_core::integrate::{integrate_field, WinfreeField};
use winfree_core::tikhonov::compare_trajectories;
use winfree_core::SmallnessConstants;
use winfree_lab::config::KeyValues;
use winfree_lab::csv::{certificates_csv, gap_csv, real, write_atomic, Table};
use winfree_lab::reproduce::{reproduce_theorem1, reproduce_theorem2, summary_table, ReproSummary};
use winfree_lab::scenario::{run_scenario, write_run, ScenarioConfig};
use winfree_lab::sweep::{run_sweep, sweep_table, SweepSpec};
use winfree_lab::Result;

/// Simulation and verification harness for the inertial Winfree model.
#[derive(Parser)]
#[command(name = "winfree", version)]
struct Cli {
    /// Scenario file (`key = value` lines, `#` comments).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the seed of the scenario.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Worker threads for sweeps (default: available cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Overrides the relative integration tolerance.
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one scenario and write trajectory, certificates and summary.
    Simulate,
    /// Evaluate the a-priori certificates for the scenario's initial data.
    Certify,
    /// Integrate the scenario and its 4N Kuramoto embedding independently.
    EmbedCheck {
        #[arg(long, default_value_t = 1e-6)]
        max_deviation: f64,
    },
    /// Compare the inertial run with the first-order run from the same phases.
    TikhonovCheck {
        #[arg(long, default_value_t = 1e-9)]
        slack: f64,
    },
    /// First-order equilibrium theory for the scenario's frequencies.
    Equilibrium {
        #[arg(long, default_value_t = 2.0)]
        alpha: f64,
    },
    /// Run the sweep described by `axis.<name>` keys in the config.
    Sweep,
    /// Reproduce the pathwise death theorem on seeds `seed..seed+runs`.
    ReproduceThm1 {
        #[arg(long, default_value_t = 8)]
        n: usize,
        #[arg(long, default_value_t = 500.0)]
        horizon: f64,
        #[arg(long, default_value_t = 1)]
        runs: u64,
    },
    /// Reproduce the zero-inertia theorem on seeds `seed..seed+runs`.
    ReproduceThm2 {
        #[arg(long, default_value_t = 5)]
        n: usize,
        #[arg(long, default_value_t = 2.5)]
        theta0_sup: f64,
        #[arg(long, default_value_t = 0.2)]
        epsilon: f64,
        #[arg(long, default_value_t = 500.0)]
        horizon: f64,
        #[arg(long, default_value_t = 1)]
        runs: u64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn key_values(cli: &Cli) -> Result<KeyValues> {
    let mut kv = match &cli.config {
        Some(path) => KeyValues::load(path)?,
        None => KeyValues::default(),
    };
    if let Some(seed) = cli.seed {
        kv.set("seed", seed);
    }
    if let Some(tol) = cli.tol {
        kv.set("rel_tol", tol);
    }
    Ok(kv)
}

fn print_reports(reports: &[CertificateReport]) {
    for r in reports {
        println!(
            "{:<28} {:>14.6e} {:>2} {:<14.6e} {}",
            r.name,
            r.lhs,
            r.relation.symbol(),
            r.rhs,
            if r.satisfied { "ok" } else { "FAIL" }
        );
    }
}

fn write(out: &Path, name: &str, text: &str) -> Result<()> {
    let path = out.join(name);
    write_atomic(&path, text)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn run(cli: &Cli) -> Result<bool> {
    let kv = key_values(cli)?;
    let seed_base = cli.seed.unwrap_or(kv.get_or("seed", 0)?);
    match &cli.command {
        Command::Simulate => {
            let cfg = ScenarioConfig::from_kv(&kv)?;
            let report = run_scenario(&cfg)?;
            write_run(&report, &cli.out)?;
            let s = &report.summary;
            println!(
                "R0 = {:.6}, inf R = {:.6} at t = {}, R(end) = {:.6}, died = {}, status = {}",
                s.r0, s.inf_r, s.inf_r_time, s.r_end, s.died, s.status
            );
            Ok(s.status == "ok")
        }
        Command::Certify => {
            let cfg = ScenarioConfig::from_kv(&kv)?;
            let (init, params) = cfg.realise(0)?;
            let reports = if params.coupling() > 0.0 {
                pathwise_bundle(&init, &params, SmallnessConstants::PATHWISE)?
            } else {
                let (a, b) = theorem1_margins(SmallnessConstants::PATHWISE);
                vec![a, b]
            };
            print_reports(&reports);
            write(&cli.out, "certificates.csv", &certificates_csv(&reports, cfg.seed))?;
            Ok(reports.iter().all(|r| r.satisfied))
        }
        Command::EmbedCheck { max_deviation } => {
            let cfg = ScenarioConfig::from_kv(&kv)?;
            let (init, params) = cfg.realise(0)?;
            let w = integrate_field(&WinfreeField(&params), &params, &init, cfg.t_end, &cfg.options)?;
            let (system, phi) = embed(&init, &params)?;
            let k = integrate_kuramoto(&phi, &system, cfg.t_end, &cfg.options)?;
            let dev = verify_embedding(&w, &k)?;
            let mut t = Table::new(&["n", "kuramoto_size", "inertia", "t_end", "deviation"]);
            t.rows.push(vec![
                params.n_oscillators().to_string(),
                system.size().to_string(),
                real(params.inertia()),
                real(cfg.t_end),
                real(dev),
            ]);
            write(&cli.out, "embedding.csv", &t.render(cfg.seed))?;
            println!("max deviation from the embedded manifold: {dev:e}");
            Ok(dev < *max_deviation)
        }
        Command::TikhonovCheck { slack } => {
            let cfg = ScenarioConfig::from_kv(&kv)?;
            let (init, params) = cfg.realise(0)?;
            let report = compare_trajectories(&init, &params, cfg.t_end, &cfg.options)?;
            write(&cli.out, "tikhonov.csv", &gap_csv(&report, cfg.seed))?;
            let m = params.inertia();
            let phase_ok = report.phase_holds(*slack);
            let velocity_ok = report.velocity_holds_from(m, *slack);
            println!(
                "worst phase gap/bound = {:.4}, worst velocity gap/bound (t >= m) = {:.4}",
                report.worst_phase_ratio(),
                report.worst_velocity_ratio(m)
            );
            println!("phase bound {}, velocity bound {}", verdict(phase_ok), verdict(velocity_ok));
            Ok(phase_ok && velocity_ok)
        }
        Command::Equilibrium { alpha } => {
            let cfg = ScenarioConfig::from_kv(&kv)?;
            let (_, params) = cfg.realise(0)?;
            let pair = alpha_infinity(*alpha)?;
            let exists = equilibrium_exists(&params, *alpha)?;
            print_reports(std::slice::from_ref(&exists));
            let mut t = Table::new(&["quantity", "value"]);
            t.rows.push(vec!["alpha".into(), real(pair.alpha)]);
            t.rows.push(vec!["alpha_inf".into(), real(pair.alpha_inf)]);
            t.rows.push(vec!["rate".into(), real(exponential_rate(pair, params.coupling()))]);
            println!("alpha_inf = {:.12}", pair.alpha_inf);
            if exists.satisfied {
                let t_in = entrance_time_bound(&params, *alpha)?;
                let eq = find_equilibrium(&params, *alpha)?;
                println!("entrance time bound = {t_in:.6}");
                t.rows.push(vec!["entrance_time".into(), real(t_in)]);
                for (i, th) in eq.phases.iter().enumerate() {
                    t.rows.push(vec![format!("theta_{}", i + 1), real(*th)]);
                }
            }
            write(&cli.out, "equilibrium.csv", &t.render(cfg.seed))?;
            Ok(exists.satisfied)
        }
        Command::Sweep => {
            let spec = SweepSpec::from_kv(&kv)?;
            let workers = cli
                .workers
                .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
            let rows = run_sweep(&spec, workers)?;
            write(&cli.out, "sweep.csv", &sweep_table(&spec, &rows).render(spec.template.seed))?;
            Ok(rows.iter().all(|r| r.status == "ok"))
        }
        Command::ReproduceThm1 { n, horizon, runs } => {
            let rows = (seed_base..seed_base + runs)
                .map(|s| reproduce_theorem1(s, *n, *horizon))
                .collect::<Result<Vec<_>>>()?;
            report_repro(&cli.out, "reproduce_thm1.csv", seed_base, &rows)
        }
        Command::ReproduceThm2 { n, theta0_sup, epsilon, horizon, runs } => {
            let rows = (seed_base..seed_base + runs)
                .map(|s| reproduce_theorem2(s, *n, *theta0_sup, *epsilon, *horizon))
                .collect::<Result<Vec<_>>>()?;
            report_repro(&cli.out, "reproduce_thm2.csv", seed_base, &rows)
        }
    }
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "holds"
    } else {
        "FAILS"
    }
}

fn report_repro(out: &Path, name: &str, seed: u64, rows: &[ReproSummary]) -> Result<bool> {
    for r in rows {
        println!(
            "seed {:>4}: R0 = {:.4}, inf R = {:.4}, R(end) = {:.4}, floor = {:.4}, died = {}, {}",
            r.seed, r.r0, r.inf_r, r.r_end, r.floor, r.died, r.outcome.label()
        );
    }
    write(out, name, &summary_table(rows).render(seed))?;
    Ok(!rows.iter().any(|r| r.outcome.is_failure()))
}

