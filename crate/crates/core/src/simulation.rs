//! Semi-discrete operator (space residual plus stabilization) and the
//! explicit time loop.

use crate::dec::{apply_strong_bc, compute_dt, dec_step, BoundaryCondition, DecConfig, SemiDiscrete};
use crate::error::{Error, Result};
use crate::physics::{spectral_radius_unchecked, Vec2};
use crate::space::{Discretization, SpaceScheme};
use crate::stabilization::{StabParams, StabScheme};

/// `G_i(c) = Φ_i + ST_i` for one space scheme and one stabilization.
#[derive(Debug, Clone)]
pub struct Solver {
    disc: Discretization,
    scheme: SpaceScheme,
    stab: StabParams,
    bc: BoundaryCondition,
    h_f: Vec<f64>,
    diag: bool,
}

impl Solver {
    pub fn new(
        disc: Discretization,
        scheme: SpaceScheme,
        stab: StabParams,
        bc: BoundaryCondition,
    ) -> Result<Self> {
        stab.validate()?;
        bc.validate()?;
        let h_f = disc.face_length_scales();
        let diag = disc.mass_is_diagonal();
        Ok(Solver { disc, scheme, stab, bc, h_f, diag })
    }

    pub fn discretization(&self) -> &Discretization {
        &self.disc
    }

    pub fn scheme(&self) -> SpaceScheme {
        self.scheme
    }

    pub fn stab(&self) -> &StabParams {
        &self.stab
    }

    pub fn boundary(&self) -> &BoundaryCondition {
        &self.bc
    }

    pub fn residual(&self, coeffs: &[Vec2]) -> Result<Vec<Vec2>> {
        let mut out = vec![Vec2::zeros(); coeffs.len()];
        SemiDiscrete::residual(self, coeffs, &mut out)?;
        Ok(out)
    }

    /// Element-local CFL time step from the nodal values of `coeffs`.
    pub fn compute_dt(&self, cfl: f64, coeffs: &[Vec2]) -> Result<f64> {
        let nodal = self.disc.checked_nodal(coeffs)?;
        let mesh = self.disc.mesh();
        let g = self.disc.phys().g;
        let lengths: Vec<f64> = (0..mesh.n_elem()).map(|e| mesh.element_length(e)).collect();
        let speeds: Vec<f64> = (0..mesh.n_elem())
            .map(|e| {
                mesh.elem_dofs(e)
                    .map(|i| spectral_radius_unchecked(&nodal[i], g))
                    .fold(0.0, f64::max)
            })
            .collect();
        compute_dt(cfl, &lengths, &speeds)
    }
}

impl SemiDiscrete for Solver {
    fn n_dofs(&self) -> usize {
        self.disc.n_dofs()
    }

    fn residual(&self, c: &[Vec2], out: &mut [Vec2]) -> Result<()> {
        let nodal = self.disc.checked_nodal(c)?;
        let gflux = (self.scheme == SpaceScheme::WbGf || self.stab.scheme == StabScheme::Jg)
            .then(|| self.disc.global_flux_nodal(&nodal));
        out.iter_mut().for_each(|v| *v = Vec2::zeros());
        self.disc.space_residual_into(self.scheme, c, &nodal, gflux.as_ref(), out);
        self.disc.stabilization_into(&self.stab, &nodal, gflux.as_ref(), &self.h_f, out)
    }

    fn lumped(&self) -> &[f64] {
        self.disc.lumped_masses()
    }

    fn mass_apply(&self, d: &[Vec2], out: &mut [Vec2]) {
        self.disc.mass_apply(d, out);
    }

    fn mass_is_diagonal(&self) -> bool {
        self.diag
    }

    fn apply_bc(&self, c: &mut [Vec2]) {
        apply_strong_bc(c, &self.bc);
    }
}

/// Why a run stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    FinalTime,
    Steady,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunSummary {
    pub time: f64,
    pub steps: usize,
    pub reason: StopReason,
    /// `max_i |c_i^{n+1} - c_i^n| / Δt` of the last step.
    pub last_rate: f64,
}

/// Early-termination rule for runs that approach a steady state.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SteadyStop {
    pub tol: f64,
    pub window: f64,
}

impl Default for SteadyStop {
    fn default() -> Self {
        SteadyStop { tol: 1e-10, window: 5.0 }
    }
}

/// Solver state advanced by DeC steps.
#[derive(Debug, Clone)]
pub struct Simulation {
    solver: Solver,
    dec: DecConfig,
    cfl: f64,
    state: Vec<Vec2>,
    time: f64,
    steps: usize,
    last_rate: f64,
}

impl Simulation {
    /// `initial` holds coefficients; boundary data are imposed on it.
    pub fn new(solver: Solver, dec: DecConfig, cfl: f64, initial: Vec<Vec2>) -> Result<Self> {
        if initial.len() != solver.disc.n_dofs() {
            return Err(Error::InputDomain(format!(
                "initial state has {} entries, mesh has {} DoFs",
                initial.len(),
                solver.disc.n_dofs()
            )));
        }
        if !(cfl > 0.0) {
            return Err(Error::Config(format!("CFL must be positive, got {cfl}")));
        }
        let mut state = initial;
        apply_strong_bc(&mut state, &solver.bc);
        solver.disc.checked_nodal(&state)?;
        Ok(Simulation { solver, dec, cfl, state, time: 0.0, steps: 0, last_rate: f64::NAN })
    }

    pub fn solver(&self) -> &Solver {
        &self.solver
    }

    pub fn discretization(&self) -> &Discretization {
        &self.solver.disc
    }

    pub fn dec(&self) -> &DecConfig {
        &self.dec
    }

    pub fn cfl(&self) -> f64 {
        self.cfl
    }

    pub fn state(&self) -> &[Vec2] {
        &self.state
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    /// One step of exactly `dt`.
    pub fn step_with(&mut self, dt: f64) -> Result<()> {
        let next = dec_step(&self.solver, &self.state, dt, &self.dec).map_err(|e| Error::StepFailure {
            step: self.steps + 1,
            time: self.time,
            source: Box::new(e),
        })?;
        self.last_rate = next
            .iter()
            .zip(&self.state)
            .map(|(a, b)| (a - b).amax())
            .fold(0.0, f64::max)
            / dt;
        self.state = next;
        self.time += dt;
        self.steps += 1;
        Ok(())
    }

    /// One CFL step, shortened to land on `t_end`.
    pub fn step(&mut self, t_end: f64) -> Result<f64> {
        let dt = self
            .solver
            .compute_dt(self.cfl, &self.state)
            .map_err(|e| Error::StepFailure { step: self.steps + 1, time: self.time, source: Box::new(e) })?;
        let dt = dt.min(t_end - self.time);
        self.step_with(dt)?;
        Ok(dt)
    }

    pub fn advance_to(&mut self, t_end: f64) -> Result<RunSummary> {
        self.run(t_end, None)
    }

    /// Runs to `t_end`, or stops early once `max_i |Δc_i| / Δt` has stayed
    /// below `stop.tol` for a simulated time of at least `stop.window`.
    pub fn run(&mut self, t_end: f64, stop: Option<SteadyStop>) -> Result<RunSummary> {
        let eps = 1e-12 * t_end.abs().max(1.0);
        let mut quiet_since: Option<f64> = None;
        while self.time < t_end - eps {
            let t_prev = self.time;
            self.step(t_end)?;
            if let Some(stop) = stop {
                if self.last_rate <= stop.tol {
                    let since = *quiet_since.get_or_insert(t_prev);
                    if self.time - since >= stop.window {
                        return Ok(self.summary(StopReason::Steady));
                    }
                } else {
                    quiet_since = None;
                }
            }
        }
        Ok(self.summary(StopReason::FinalTime))
    }

    fn summary(&self, reason: StopReason) -> RunSummary {
        RunSummary { time: self.time, steps: self.steps, reason, last_rate: self.last_rate }
    }

    /// Total height `η = H + B` at the DoF locations.
    pub fn total_height_nodal(&self) -> Vec<f64> {
        let nodal = self.solver.disc.nodal_values(&self.state);
        nodal
            .iter()
            .zip(self.solver.disc.bathymetry_nodal())
            .map(|(u, b)| u[0] + b)
            .collect()
    }
}
