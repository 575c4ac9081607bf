//! Scenario runner for the ε-net wave laboratory.
//!
//! Exit codes: 0 — all verdicts pass; 1 — an analysis verdict failed;
//! 2 — configuration or runtime error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use colwave::error::Error;
use colwave::report::ReportBundle;
use colwave::riesz::{self, ConeSign, PairOptions, RieszParams};
use colwave::scenario::{self, Overrides, Scenario};

#[derive(Parser)]
#[command(name = "colwave", version, about = "Wave equations with weakly singular metrics: per-\u{3b5} solves, condition checks, energies and Riesz distributions")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,

    /// Output directory for reports, tables and field dumps
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Override the number of eps-grid entries
    #[arg(long, global = true)]
    eps_count: Option<usize>,

    /// Override the spatial resolution (all axes)
    #[arg(long, global = true)]
    resolution: Option<usize>,

    /// Worker threads for the eps sweep (0 = rayon default)
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a scenario (builtin name or TOML file path) with all analyses
    Run { scenario: String },
    /// List the shipped scenarios
    List,
    /// Run only the solve analysis of a scenario
    Solve { scenario: String },
    /// Run the solve and energy analyses of a scenario
    Energy { scenario: String },
    /// Run only the condition checks of a scenario
    Conditions { scenario: String },
    /// Riesz-distribution checks at (alpha, n)
    Riesz {
        #[arg(long, default_value_t = 0.0)]
        alpha: f64,
        #[arg(long, default_value_t = 2)]
        n: usize,
        /// advanced | retarded
        #[arg(long, default_value = "advanced")]
        sign: String,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.threads > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global()
        {
            eprintln!("colwave: cannot configure thread pool: {e}");
            return ExitCode::from(2);
        }
    }
    let overrides = Overrides {
        eps_count: cli.eps_count,
        resolution: cli.resolution,
    };
    let result = match &cli.cmd {
        Cmd::List => {
            for (name, desc) in scenario::list_scenarios() {
                println!("{name:28} {desc}");
            }
            return ExitCode::SUCCESS;
        }
        Cmd::Run { scenario } => run_with(scenario, &overrides, cli.out.as_deref(), |_| {}),
        Cmd::Solve { scenario } => run_with(scenario, &overrides, cli.out.as_deref(), |sc| {
            let solve = sc.analyses.solve.take();
            sc.analyses = Default::default();
            sc.analyses.solve = solve.or_else(|| {
                Some(scenario::SolveAnalysisSpec {
                    oracle: "none".into(),
                })
            });
        }),
        Cmd::Energy { scenario } => run_with(scenario, &overrides, cli.out.as_deref(), |sc| {
            let solve = sc.analyses.solve.take();
            let energy = sc.analyses.energy.take();
            sc.analyses = Default::default();
            sc.analyses.solve = solve;
            sc.analyses.energy = energy.or_else(|| {
                Some(scenario::EnergyAnalysisSpec {
                    band: [0.2, 1.2],
                    conservation: false,
                    closed_form: false,
                    moderate: false,
                })
            });
        }),
        Cmd::Conditions { scenario } => run_with(scenario, &overrides, cli.out.as_deref(), |sc| {
            let conditions = sc.analyses.conditions.take();
            sc.analyses = Default::default();
            sc.analyses.conditions = conditions.or_else(|| {
                Some(scenario::ConditionsSpec {
                    k_max: 2,
                    expect: "pass".into(),
                })
            });
        }),
        Cmd::Riesz { alpha, n, sign } => run_riesz(*alpha, *n, sign, cli.out.as_deref()),
    };
    match result {
        Ok(report) => {
            print_verdicts(&report);
            if report.all_pass() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("colwave: {e}");
            ExitCode::from(2)
        }
    }
}

fn run_with(
    name: &str,
    overrides: &Overrides,
    out: Option<&std::path::Path>,
    reshape: impl FnOnce(&mut Scenario),
) -> colwave::Result<ReportBundle> {
    let mut sc = scenario::load_scenario(name)?;
    sc.apply_overrides(overrides);
    reshape(&mut sc);
    sc.validate()?;
    scenario::run_scenario(&sc, out)
}

fn run_riesz(
    alpha: f64,
    n: usize,
    sign: &str,
    out: Option<&std::path::Path>,
) -> colwave::Result<ReportBundle> {
    let sign = match sign {
        "advanced" => ConeSign::Advanced,
        "retarded" => ConeSign::Retarded,
        other => {
            return Err(Error::Config(format!(
                "unknown sign '{other}' (use advanced or retarded)"
            )))
        }
    };
    let opts = PairOptions::default();
    let battery = scenario::riesz_battery(n)?;
    let params = RieszParams::new(alpha, n, sign)?;
    let mut report = ReportBundle::new(&format!("riesz_alpha{alpha}_n{n}"));
    let mut pairings = Vec::new();
    let mut delta_ok = true;
    for phi in &battery {
        let p = riesz::riesz_pair(&params, phi, &opts)?;
        if alpha == 0.0 {
            let want = phi.eval(&vec![0.0; n]);
            let tol = if n == 2 { 1e-6 } else { 1e-5 };
            if (p - want).abs() > tol * want.abs() {
                delta_ok = false;
            }
        }
        pairings.push(p);
    }
    if alpha == 0.0 {
        report.verdict("riesz_delta", delta_ok);
    }
    let rec = riesz::verify_recursion(alpha, n, sign, &battery, &opts)?;
    let tol = if n == 2 { 1e-6 } else { 1e-5 };
    report.verdict("riesz_recursion", rec.max_deviation < tol);
    report.measure(
        "riesz",
        &serde_json::json!({
            "alpha": alpha,
            "n": n,
            "pairings": pairings,
            "recursion_deviations": rec.deviations,
        }),
    )?;
    println!(
        "{}",
        serde_json::to_string_pretty(&report.measurements["riesz"]).unwrap_or_default()
    );
    if let Some(dir) = out {
        report.write(dir)?;
    }
    Ok(report)
}

fn print_verdicts(report: &ReportBundle) {
    for (name, pass) in &report.verdicts {
        println!(
            "{}: {} .. {}",
            report.scenario,
            name,
            if *pass { "PASS" } else { "FAIL" }
        );
    }
}
