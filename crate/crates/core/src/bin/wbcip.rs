use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use wbcip::basis::BasisFamily;
use wbcip::config::{ExperimentConfig, TestCase};
use wbcip::dec::DecVariant;
use wbcip::experiment::{
    convergence_suite, perturbation_run, run_case, wb_check, write_convergence_csv, write_convergence_dat,
    write_errors_csv, write_perturbation_csv, write_perturbation_summary, write_solution_csv, WB_THRESHOLD,
};
use wbcip::physics::Bathymetry;
use wbcip::space::SpaceScheme;
use wbcip::stabilization::StabScheme;
use wbcip::Result;

#[derive(Parser)]
#[command(name = "wbcip", version, about = "Well-balanced CIP solver for the 1D shallow water equations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one case and write the solution and its errors.
    Run(Common),
    /// Run a refinement list and report convergence orders.
    Converge(Common),
    /// Check that a lake at rest is preserved.
    WbCheck {
        #[command(flatten)]
        common: Common,
        /// Pass threshold on every reported norm.
        #[arg(long, default_value_t = WB_THRESHOLD)]
        threshold: f64,
    },
    /// Perturb a steady state and measure spurious oscillations.
    Perturb(Common),
}

#[derive(Args, Clone, Default)]
struct Common {
    /// TOML configuration; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    test: Option<String>,
    /// Basis family: b, p or pgl.
    #[arg(long)]
    basis: Option<String>,
    #[arg(long)]
    degree: Option<usize>,
    /// Element count, or a comma-separated refinement list.
    #[arg(long, value_delimiter = ',')]
    elems: Option<Vec<usize>>,
    /// Space scheme: nonwb, wbhs or wbgf.
    #[arg(long)]
    scheme: Option<String>,
    /// Stabilization: jc, jt, je, jr or jg.
    #[arg(long)]
    stab: Option<String>,
    #[arg(long)]
    cfl: Option<f64>,
    #[arg(long)]
    tfinal: Option<f64>,
    /// Manning coefficient.
    #[arg(long)]
    friction: Option<f64>,
    #[arg(long)]
    delta1: Option<f64>,
    #[arg(long)]
    delta2: Option<f64>,
    /// Perturbation amplitude.
    #[arg(long)]
    amp: Option<f64>,
    /// Bathymetry: flat, smooth or c0.
    #[arg(long)]
    bathymetry: Option<String>,
    /// Time integrator: bdec or bdecu.
    #[arg(long)]
    variant: Option<String>,
    /// Output directory; results go to stdout when unset.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Common {
    fn config(&self, default_test: TestCase, default_elems: &[usize]) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => {
                let mut c = ExperimentConfig::new(
                    default_test,
                    BasisFamily::LagrangeGaussLobatto,
                    3,
                    default_elems[0],
                    SpaceScheme::WbGf,
                    StabScheme::Jg,
                );
                c.discretization.elems = default_elems.to_vec();
                c
            }
        };
        if let Some(t) = &self.test {
            cfg.case.test = TestCase::parse(t)?;
        }
        if let Some(b) = &self.basis {
            cfg.discretization.basis = BasisFamily::parse(b)?;
        }
        if let Some(d) = self.degree {
            cfg.discretization.degree = d;
        }
        if let Some(e) = &self.elems {
            cfg.discretization.elems = e.clone();
        }
        if let Some(s) = &self.scheme {
            cfg.discretization.scheme = SpaceScheme::parse(s)?;
        }
        if let Some(s) = &self.stab {
            cfg.discretization.stab = StabScheme::parse(s)?;
        }
        if let Some(b) = &self.bathymetry {
            cfg.case.bathymetry = Some(Bathymetry::parse(b)?);
        }
        if let Some(v) = &self.variant {
            cfg.time.variant = DecVariant::parse(v)?;
        }
        cfg.time.cfl = self.cfl.or(cfg.time.cfl);
        cfg.case.t_final = self.tfinal.or(cfg.case.t_final);
        cfg.case.friction = self.friction.unwrap_or(cfg.case.friction);
        cfg.discretization.delta1 = self.delta1.or(cfg.discretization.delta1);
        cfg.discretization.delta2 = self.delta2.or(cfg.discretization.delta2);
        cfg.perturbation.amplitude = self.amp.or(cfg.perturbation.amplitude);
        cfg.output.dir = self.out.clone().or(cfg.output.dir);
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Writes to `dir/name`, or to stdout when no directory is configured.
fn emit<F>(dir: Option<&Path>, name: &str, f: F) -> Result<()>
where
    F: FnOnce(&mut dyn Write) -> Result<()>,
{
    match dir {
        Some(d) => {
            std::fs::create_dir_all(d)?;
            let mut w = BufWriter::new(File::create(d.join(name))?);
            f(&mut w)?;
            w.flush()?;
        }
        None => {
            let stdout = io::stdout();
            let mut w = stdout.lock();
            f(&mut w)?;
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Run(c) => {
            let cfg = c.config(TestCase::Lake, &[100])?;
            let out = run_case(&cfg)?;
            let dir = cfg.output.dir.as_deref();
            emit(dir, "solution.csv", |w| write_solution_csv(w, &out.rows))?;
            if let Some(e) = out.errors {
                emit(dir, "errors.csv", |w| write_errors_csv(w, e))?;
            }
            eprintln!("{} steps, t = {}, stop: {:?}", out.summary.steps, out.summary.time, out.summary.reason);
            Ok(true)
        }
        Command::Converge(c) => {
            let cfg = c.config(TestCase::Super, &[25, 50, 100, 200])?;
            let table = convergence_suite(&cfg)?;
            let dir = cfg.output.dir.as_deref();
            emit(dir, "convergence.csv", |w| write_convergence_csv(w, &table))?;
            if dir.is_some() {
                emit(dir, "convergence.dat", |w| write_convergence_dat(w, &table))?;
            }
            for warning in &table.warnings {
                eprintln!("warning: {warning}");
            }
            eprintln!("least-squares order: H {:.3}, q {:.3}", table.ls_order_h, table.ls_order_q);
            Ok(true)
        }
        Command::WbCheck { common, threshold } => {
            let cfg = common.config(TestCase::Lake, &[100])?;
            let r = wb_check(&cfg, threshold)?;
            println!(
                "L1(H) {:.3e}  L1(q) {:.3e}  Linf(eta) {:.3e}  Linf(q) {:.3e}  threshold {:.1e}  {}",
                r.l1_h,
                r.l1_q,
                r.linf_eta,
                r.linf_q,
                r.threshold,
                if r.pass { "PASS" } else { "FAIL" }
            );
            Ok(r.pass)
        }
        Command::Perturb(c) => {
            let cfg = c.config(TestCase::PerturbLake, &[30])?;
            let report = perturbation_run(&cfg)?;
            let dir = cfg.output.dir.as_deref();
            if dir.is_some() {
                emit(dir, "perturbation.csv", |w| write_perturbation_csv(w, &report))?;
            }
            emit(dir, "perturbation_summary.csv", |w| write_perturbation_summary(w, &report))?;
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
