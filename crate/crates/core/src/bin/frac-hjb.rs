use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use frac_hjb::harness::{
    export_trajectory, run_operator_check, run_property_suite, run_rate_study, run_regularity_study, write_json,
    write_rate_csv, Check, RegularityReport, StudyConfig, StudyKind,
};
use frac_hjb::solver::solve;
use frac_hjb::Result;

#[derive(Parser)]
#[command(name = "frac-hjb", version, about = "HJB equations with fractional diffusion: solver, studies and checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one problem and export every snapshot.
    Solve(Common),
    /// Run the fractional operator self-check.
    OperatorCheck(Common),
    /// Measure the vanishing-viscosity error over an epsilon ladder.
    RateStudy(Common),
    /// Measure C^{1,α} norms, Hölder seminorms and oscillation decay.
    RegularityStudy(Common),
    /// Run the property suite.
    PropertySuite(Common),
}

#[derive(Args)]
struct Common {
    /// TOML config file; defaults of the subcommand fill missing keys.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed for all randomness.
    #[arg(long)]
    seed: Option<u64>,
    /// Grid points per axis.
    #[arg(long)]
    n: Option<usize>,
}

impl Common {
    fn resolve(&self, kind: StudyKind) -> Result<StudyConfig> {
        let mut cfg = match &self.config {
            Some(path) => StudyConfig::from_file(path, kind)?,
            None => StudyConfig::default_for(kind),
        };
        if let Some(seed) = self.seed {
            cfg.study.seed = seed;
        }
        if let Some(n) = self.n {
            cfg.grid.n = n;
        }
        if let Some(out) = &self.out {
            cfg.study.output_dir = out.display().to_string();
        }
        Ok(cfg)
    }
}

fn print_checks(checks: &[Check]) {
    let mut out = std::io::stdout().lock();
    for c in checks {
        let _ = writeln!(out, "{c}");
    }
}

fn write_regularity_csv(report: &RegularityReport, path: &Path) -> Result<()> {
    let mut text = String::from("t,c1alpha,c1alpha_refined");
    for b in frac_hjb::harness::HOLDER_SCAN {
        text.push_str(&format!(",gradient_holder_{b}"));
    }
    text.push('\n');
    for r in &report.rows {
        text.push_str(&format!("{:e},{:e},{:e}", r.t, r.c1alpha, r.c1alpha_refined));
        for v in &r.gradient_holder {
            text.push_str(&format!(",{v:e}"));
        }
        text.push('\n');
    }
    std::fs::write(path, text)?;
    Ok(())
}

/// `Ok(true)` when every assertion passed.
fn run(command: &Command) -> Result<bool> {
    let (kind, common) = match command {
        Command::Solve(c) => (StudyKind::Solve, c),
        Command::OperatorCheck(c) => (StudyKind::OperatorCheck, c),
        Command::RateStudy(c) => (StudyKind::RateStudy, c),
        Command::RegularityStudy(c) => (StudyKind::RegularityStudy, c),
        Command::PropertySuite(c) => (StudyKind::PropertySuite, c),
    };
    let cfg = common.resolve(kind)?;
    let out = PathBuf::from(&cfg.study.output_dir);
    std::fs::create_dir_all(&out)?;
    match kind {
        StudyKind::Solve => {
            cfg.validate()?;
            let grid = cfg.grid()?;
            let traj = solve(&cfg.initial(&grid)?, &cfg.hamiltonian()?, &cfg.solver_config(cfg.solver.epsilon)?)?;
            let manifest = export_trajectory(&traj, &cfg, &out)?;
            for w in &manifest.warnings {
                eprintln!("warning: {w}");
            }
            println!("wrote {} snapshots to {}", manifest.files.len(), out.display());
            Ok(true)
        }
        StudyKind::OperatorCheck => {
            let verdict = run_operator_check(&cfg)?;
            write_json(&out.join("operator_check.json"), &verdict)?;
            print_checks(&verdict.checks);
            Ok(verdict.pass)
        }
        StudyKind::RateStudy => {
            let report = run_rate_study(&cfg)?;
            write_rate_csv(&report, &out.join("rates.csv"))?;
            write_json(&out.join("rate_report.json"), &report)?;
            print_checks(&report.checks);
            Ok(report.pass)
        }
        StudyKind::RegularityStudy => {
            let report = run_regularity_study(&cfg)?;
            write_regularity_csv(&report, &out.join("regularity.csv"))?;
            write_json(&out.join("regularity_report.json"), &report)?;
            print_checks(&report.checks);
            println!("log-log slope of the C^1,alpha norm in t: {}", report.norm_slope);
            Ok(report.pass)
        }
        StudyKind::PropertySuite => {
            let verdict = run_property_suite(&cfg)?;
            write_json(&out.join("property_suite.json"), &verdict)?;
            print_checks(&verdict.checks);
            Ok(verdict.pass)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = std::env::var("FRAC_HJB_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads.max(1)).build_global() {
            eprintln!("error: cannot size the worker pool: {e}");
            return ExitCode::from(1);
        }
    }
    match run(&cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("assertion failure");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
