//! Drivers for the one-dimensional experiment suite and their CSV output.

use std::io::Write;

use crate::config::{ExperimentConfig, TestCase, DOMAIN};
use crate::dec::{BoundaryCondition, DecConfig};
use crate::error::{Error, Result};
use crate::mesh::build_uniform_mesh;
use crate::physics::{Bathymetry, PhysParams, Vec2};
use crate::simulation::{RunSummary, Simulation, Solver, SteadyStop};
use crate::space::Discretization;
use crate::steady::{l1_error, Regime, SteadyData, SteadyReference};

/// Upper bound on simulated time for runs driven to a numerical steady state.
pub const LONG_RUN_T_MAX: f64 = 500.0;

/// Strong boundary data of a steady configuration.
pub fn boundary_condition(data: &SteadyData, bathy: &Bathymetry, domain: (f64, f64)) -> BoundaryCondition {
    match *data {
        SteadyData::LakeAtRest { eta } => BoundaryCondition {
            left_h: Some(eta - bathy.value(domain.0)),
            left_q: Some(0.0),
            right_h: Some(eta - bathy.value(domain.1)),
            right_q: Some(0.0),
        },
        SteadyData::Supercritical { q, h_left } => BoundaryCondition {
            left_h: Some(h_left),
            left_q: Some(q),
            ..Default::default()
        },
        SteadyData::Subcritical { q, h_right } => BoundaryCondition {
            left_q: Some(q),
            right_h: Some(h_right),
            ..Default::default()
        },
        SteadyData::Transcritical { q } => BoundaryCondition { left_q: Some(q), ..Default::default() },
    }
}

pub fn build_discretization(cfg: &ExperimentConfig, n_elem: usize) -> Result<Discretization> {
    let spec = cfg.spec()?;
    let mesh = build_uniform_mesh(DOMAIN.0, DOMAIN.1, n_elem, &spec)?;
    Discretization::new(spec, mesh, cfg.phys()?, cfg.bathymetry())
}

/// A configured simulation together with its steady references.
#[derive(Debug, Clone)]
pub struct Case {
    pub sim: Simulation,
    /// Frictionless steady state used for boundary data and initialization.
    pub base: SteadyReference,
    /// Steady state the solution is measured against, if one exists.
    pub reference: Option<SteadyReference>,
}

impl Case {
    /// Initialized with the frictionless steady state interpolated at the DoFs.
    pub fn new(cfg: &ExperimentConfig, n_elem: usize) -> Result<Self> {
        let disc = build_discretization(cfg, n_elem)?;
        let phys = *disc.phys();
        let bathy = cfg.bathymetry();
        let data = cfg.steady_data();
        let frictionless = PhysParams::new(phys.g, 0.0)?;
        let base = SteadyReference::frictionless(data.clone(), bathy.clone(), frictionless, DOMAIN.0, DOMAIN.1)?;
        let reference = if phys.n_manning > 0.0 {
            match data.regime() {
                Regime::LakeAtRest => Some(base.clone()),
                Regime::Transcritical => None,
                _ => Some(SteadyReference::new(data.clone(), bathy.clone(), phys, DOMAIN.0, DOMAIN.1)?),
            }
        } else {
            Some(base.clone())
        };
        let nodal = steady_nodal(&disc, &base)?;
        let initial = disc.coefficients(&nodal);
        Self::assemble(cfg, disc, initial, base, reference)
    }

    /// Same configuration started from the given nodal values.
    pub fn with_initial_nodal(cfg: &ExperimentConfig, n_elem: usize, nodal: &[Vec2]) -> Result<Self> {
        let mut case = Self::new(cfg, n_elem)?;
        let disc = case.sim.discretization().clone();
        if nodal.len() != disc.n_dofs() {
            return Err(Error::InputDomain(format!(
                "initial state has {} entries, mesh has {} DoFs",
                nodal.len(),
                disc.n_dofs()
            )));
        }
        let initial = disc.coefficients(nodal);
        case = Self::assemble(cfg, disc, initial, case.base, case.reference)?;
        Ok(case)
    }

    fn assemble(
        cfg: &ExperimentConfig,
        disc: Discretization,
        initial: Vec<Vec2>,
        base: SteadyReference,
        reference: Option<SteadyReference>,
    ) -> Result<Self> {
        let bc = boundary_condition(&cfg.steady_data(), &cfg.bathymetry(), DOMAIN);
        let solver = Solver::new(disc, cfg.discretization.scheme, cfg.stab_params(), bc)?;
        let dec = DecConfig::with_iterations(cfg.discretization.degree, cfg.time.variant, cfg.iterations())?;
        let sim = Simulation::new(solver, dec, cfg.cfl(), initial)?;
        Ok(Case { sim, base, reference })
    }

    pub fn errors(&self) -> Result<Option<[f64; 2]>> {
        self.reference
            .as_ref()
            .map(|r| l1_error(self.sim.discretization(), self.sim.state(), r))
            .transpose()
    }
}

/// Steady state sampled at the DoF locations.
pub fn steady_nodal(disc: &Discretization, reference: &SteadyReference) -> Result<Vec<Vec2>> {
    if let SteadyData::LakeAtRest { eta } = reference.data() {
        return Ok(disc.bathymetry_nodal().iter().map(|b| Vec2::new(eta - b, 0.0)).collect());
    }
    disc.mesh().dof_coords().iter().map(|&x| reference.sample(x)).collect()
}

/// Per-DoF rows `(x, H, q, η, B)`.
pub fn solution_rows(disc: &Discretization, coeffs: &[Vec2]) -> Vec<[f64; 5]> {
    let nodal = disc.nodal_values(coeffs);
    disc.mesh()
        .dof_coords()
        .iter()
        .zip(&nodal)
        .zip(disc.bathymetry_nodal())
        .map(|((&x, u), &b)| [x, u[0], u[1], u[0] + b, b])
        .collect()
}

#[derive(Debug, Clone)]
pub struct CaseOutput {
    pub n_elem: usize,
    pub summary: RunSummary,
    pub rows: Vec<[f64; 5]>,
    /// `(errH, errq)` in L¹ when a reference exists.
    pub errors: Option<[f64; 2]>,
}

fn run_one(cfg: &ExperimentConfig, n_elem: usize) -> Result<(Case, RunSummary)> {
    let mut case = Case::new(cfg, n_elem)?;
    let summary = case.sim.run(cfg.t_final(), cfg.steady_stop())?;
    Ok((case, summary))
}

/// Runs the first mesh of the configuration to its final time.
pub fn run_case(cfg: &ExperimentConfig) -> Result<CaseOutput> {
    cfg.validate()?;
    let n_elem = cfg.discretization.elems[0];
    let (case, summary) = run_one(cfg, n_elem)?;
    Ok(CaseOutput {
        n_elem,
        summary,
        rows: solution_rows(case.sim.discretization(), case.sim.state()),
        errors: case.errors()?,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub n_elem: usize,
    pub h: f64,
    pub err_h: f64,
    pub order_h: Option<f64>,
    pub err_q: f64,
    pub order_q: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceTable {
    pub rows: Vec<ConvergenceRow>,
    pub ls_order_h: f64,
    pub ls_order_q: f64,
    /// Levels whose error did not decrease, typically at the round-off floor.
    pub warnings: Vec<String>,
}

/// Slope of the least-squares line through `(log h, log err)`.
pub fn least_squares_order(hs: &[f64], errs: &[f64]) -> f64 {
    let n = hs.len() as f64;
    let xs: Vec<f64> = hs.iter().map(|h| h.ln()).collect();
    let ys: Vec<f64> = errs.iter().map(|e| e.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

fn pair_order(e_coarse: f64, e_fine: f64, h_coarse: f64, h_fine: f64) -> f64 {
    (e_coarse / e_fine).ln() / (h_coarse / h_fine).ln()
}

/// Errors on every mesh of the refinement list.
pub fn convergence_suite(cfg: &ExperimentConfig) -> Result<ConvergenceTable> {
    cfg.validate()?;
    let elems = &cfg.discretization.elems;
    if elems.len() < 3 {
        return Err(Error::Config(format!("convergence needs at least 3 meshes, got {}", elems.len())));
    }
    let mut rows: Vec<ConvergenceRow> = Vec::with_capacity(elems.len());
    let mut warnings = Vec::new();
    for &n in elems {
        let (case, _) = run_one(cfg, n)?;
        let [err_h, err_q] = case
            .errors()?
            .ok_or_else(|| Error::Config(format!("test '{}' has no reference solution", cfg.case.test.name())))?;
        let h = (DOMAIN.1 - DOMAIN.0) / n as f64;
        let (order_h, order_q) = match rows.last() {
            Some(p) => {
                if err_h >= p.err_h || err_q >= p.err_q {
                    warnings.push(format!("error did not decrease from {} to {} elements", p.n_elem, n));
                }
                (Some(pair_order(p.err_h, err_h, p.h, h)), Some(pair_order(p.err_q, err_q, p.h, h)))
            }
            None => (None, None),
        };
        rows.push(ConvergenceRow { n_elem: n, h, err_h, order_h, err_q, order_q });
    }
    let hs: Vec<f64> = rows.iter().map(|r| r.h).collect();
    let eh: Vec<f64> = rows.iter().map(|r| r.err_h).collect();
    let eq: Vec<f64> = rows.iter().map(|r| r.err_q).collect();
    Ok(ConvergenceTable {
        ls_order_h: least_squares_order(&hs, &eh),
        ls_order_q: least_squares_order(&hs, &eq),
        rows,
        warnings,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WbReport {
    pub l1_h: f64,
    pub l1_q: f64,
    pub linf_eta: f64,
    pub linf_q: f64,
    pub threshold: f64,
    pub pass: bool,
}

pub const WB_THRESHOLD: f64 = 1e-11;

/// Drift of a lake at rest after the final time.
pub fn wb_check(cfg: &ExperimentConfig, threshold: f64) -> Result<WbReport> {
    cfg.validate()?;
    let eta_bar = match cfg.steady_data() {
        SteadyData::LakeAtRest { eta } => eta,
        _ => return Err(Error::Config("the well-balancing check needs a lake-at-rest test".into())),
    };
    let (case, _) = run_one(cfg, cfg.discretization.elems[0])?;
    let [l1_h, l1_q] = case.errors()?.expect("lake at rest always has a reference");
    let eta = case.sim.total_height_nodal();
    let nodal = case.sim.discretization().nodal_values(case.sim.state());
    let linf_eta = eta.iter().map(|e| (e - eta_bar).abs()).fold(0.0, f64::max);
    let linf_q = nodal.iter().map(|u| u[1].abs()).fold(0.0, f64::max);
    let pass = [l1_h, l1_q, linf_eta, linf_q].iter().all(|&e| e <= threshold);
    Ok(WbReport { l1_h, l1_q, linf_eta, linf_q, threshold, pass })
}

/// Runs the unperturbed configuration until it stops changing.
pub fn long_run_steady(cfg: &ExperimentConfig, n_elem: usize) -> Result<(Case, RunSummary)> {
    let mut case = Case::new(cfg, n_elem)?;
    let stop = cfg.case.steady_stop.unwrap_or_default();
    let summary = case.sim.run(LONG_RUN_T_MAX, Some(stop))?;
    Ok((case, summary))
}

/// Smooth compactly supported bump `A exp(1 - 1/(1 - ((x-c)/w)²))`.
pub fn bump(x: f64, amplitude: f64, center: f64, half_width: f64) -> f64 {
    let r = (x - center) / half_width;
    if r.abs() < 1.0 {
        amplitude * (1.0 - 1.0 / (1.0 - r * r)).exp()
    } else {
        0.0
    }
}

#[derive(Debug, Clone)]
pub struct PerturbationReport {
    pub x: Vec<f64>,
    /// Snapshot times, the last one the final time.
    pub times: Vec<f64>,
    /// `η - η_s` at the DoFs, one vector per snapshot.
    pub deviations: Vec<Vec<f64>>,
    /// Total height of the unperturbed steady state at the DoFs.
    pub eta_steady: Vec<f64>,
    /// Region excluded from the metric at the final time.
    pub window: (f64, f64),
    /// `max |η - η_s|` over DoFs outside `window` at the final time.
    pub metric: f64,
}

/// Wave region reachable from the initial bump by time `t`.
pub fn wave_window(
    cfg: &ExperimentConfig,
    steady: &[Vec2],
    t: f64,
    margin: f64,
) -> (f64, f64) {
    let g = cfg.case.gravity;
    let (lo, hi) = steady.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), u| {
        let v = u[1] / u[0];
        let c = (g * u[0]).sqrt();
        (lo.min(v - c), hi.max(v + c))
    });
    let p = &cfg.perturbation;
    (p.center - p.half_width + lo * t - margin, p.center + p.half_width + hi * t + margin)
}

/// Perturbs η of the steady state, runs to the final time and measures the
/// deviation away from the physical waves.
pub fn perturbation_run(cfg: &ExperimentConfig) -> Result<PerturbationReport> {
    cfg.validate()?;
    let n_elem = cfg.discretization.elems[0];
    let disc = build_discretization(cfg, n_elem)?;
    let steady: Vec<Vec2> = if cfg.case.friction > 0.0 && cfg.steady_data().regime() != Regime::LakeAtRest {
        let (case, _) = long_run_steady(cfg, n_elem)?;
        case.sim.discretization().nodal_values(case.sim.state())
    } else {
        let base = SteadyReference::frictionless(
            cfg.steady_data(),
            cfg.bathymetry(),
            PhysParams::new(cfg.case.gravity, 0.0)?,
            DOMAIN.0,
            DOMAIN.1,
        )?;
        steady_nodal(&disc, &base)?
    };
    let x = disc.mesh().dof_coords().to_vec();
    let b = disc.bathymetry_nodal();
    let eta_steady: Vec<f64> = steady.iter().zip(b).map(|(u, b)| u[0] + b).collect();
    let p = &cfg.perturbation;
    let amp = cfg.amplitude();
    let perturbed: Vec<Vec2> = steady
        .iter()
        .zip(&x)
        .zip(&eta_steady)
        .zip(b)
        .map(|(((u, &xi), &es), &bi)| Vec2::new(es + bump(xi, amp, p.center, p.half_width) - bi, u[1]))
        .collect();
    let mut case = Case::with_initial_nodal(cfg, n_elem, &perturbed)?;

    let t_final = cfg.t_final();
    let n_snap = p.snapshots.max(1);
    let deviation = |sim: &Simulation| -> Vec<f64> {
        sim.total_height_nodal().iter().zip(&eta_steady).map(|(e, s)| e - s).collect()
    };
    let mut times = vec![0.0];
    let mut deviations = vec![deviation(&case.sim)];
    for k in 1..=n_snap {
        let t = if k == n_snap { t_final } else { t_final * k as f64 / n_snap as f64 };
        case.sim.advance_to(t)?;
        times.push(t);
        deviations.push(deviation(&case.sim));
    }
    let dx = (0..n_elem).map(|e| disc.mesh().element_length(e)).fold(0.0, f64::max);
    let window = wave_window(cfg, &steady, t_final, 2.0 * dx);
    let last = deviations.last().expect("at least one snapshot");
    let metric = x
        .iter()
        .zip(last)
        .filter(|(&xi, _)| xi < window.0 || xi > window.1)
        .map(|(_, d)| d.abs())
        .fold(0.0, f64::max);
    Ok(PerturbationReport { x, times, deviations, eta_steady, window, metric })
}

fn io<T>(r: std::io::Result<T>) -> Result<T> {
    r.map_err(Error::from)
}

pub fn write_solution_csv<W: Write + ?Sized>(w: &mut W, rows: &[[f64; 5]]) -> Result<()> {
    io(writeln!(w, "x,H,q,eta,B"))?;
    for r in rows {
        io(writeln!(w, "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}", r[0], r[1], r[2], r[3], r[4]))?;
    }
    Ok(())
}

pub fn write_errors_csv<W: Write + ?Sized>(w: &mut W, errors: [f64; 2]) -> Result<()> {
    io(writeln!(w, "errH_L1,errq_L1"))?;
    io(writeln!(w, "{:.16e},{:.16e}", errors[0], errors[1]))
}

fn opt(o: Option<f64>) -> String {
    o.map(|v| format!("{v:.6}")).unwrap_or_default()
}

pub fn write_convergence_csv<W: Write + ?Sized>(w: &mut W, table: &ConvergenceTable) -> Result<()> {
    io(writeln!(w, "n_elem,h,errH,orderH,errq,orderq"))?;
    for r in &table.rows {
        io(writeln!(
            w,
            "{},{:.16e},{:.16e},{},{:.16e},{}",
            r.n_elem,
            r.h,
            r.err_h,
            opt(r.order_h),
            r.err_q,
            opt(r.order_q)
        ))?;
    }
    Ok(())
}

/// Whitespace-separated table for gnuplot.
pub fn write_convergence_dat<W: Write + ?Sized>(w: &mut W, table: &ConvergenceTable) -> Result<()> {
    io(writeln!(w, "# n_elem h errH errq"))?;
    for r in &table.rows {
        io(writeln!(w, "{} {:.16e} {:.16e} {:.16e}", r.n_elem, r.h, r.err_h, r.err_q))?;
    }
    Ok(())
}

/// Rows `(t, x, η - η_s)` for every snapshot.
pub fn write_perturbation_csv<W: Write + ?Sized>(w: &mut W, report: &PerturbationReport) -> Result<()> {
    io(writeln!(w, "t,x,deta"))?;
    for (t, dev) in report.times.iter().zip(&report.deviations) {
        for (x, d) in report.x.iter().zip(dev) {
            io(writeln!(w, "{t:.16e},{x:.16e},{d:.16e}"))?;
        }
    }
    Ok(())
}

pub fn write_perturbation_summary<W: Write + ?Sized>(w: &mut W, report: &PerturbationReport) -> Result<()> {
    io(writeln!(w, "t_final,window_left,window_right,metric"))?;
    io(writeln!(
        w,
        "{:.16e},{:.16e},{:.16e},{:.16e}",
        report.times.last().copied().unwrap_or(0.0),
        report.window.0,
        report.window.1,
        report.metric
    ))
}

impl ExperimentConfig {
    /// Configured early stop; convergence tests stop at steady state by default.
    pub fn steady_stop(&self) -> Option<SteadyStop> {
        self.case.steady_stop.or(match self.case.test {
            TestCase::Super | TestCase::Sub | TestCase::Trans => Some(SteadyStop::default()),
            _ => None,
        })
    }
}
