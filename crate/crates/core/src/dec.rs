//! Explicit deferred-correction time stepping (bDeC and bDeCu).
//!
//! One step of size `Δt` iterates
//!
//! ```text
//! c_i^{m,(p)} = c_i^{m,(p-1)} - 1/C_i [ Σ_K Σ_j M^K_ij (c_j^{m,(p-1)} - c_j^0)
//!                                      + Δt Σ_ℓ θ^m_ℓ G_i(c^{ℓ,(p-1)}) ]
//! ```
//!
//! over `M + 1` equispaced subtimenodes, starting from `c^{m,(0)} = c_n`.
//! bDeCu starts with one subinterval and adds one per iteration, interpolating
//! the stages in time, until all `M` are in use.

use serde::{Deserialize, Serialize};

use crate::basis::gauss_legendre;
use crate::error::{Error, Result};
use crate::physics::Vec2;

/// Highest subinterval count with a tabulated θ.
pub const MAX_SUBINTERVALS: usize = 6;

/// Semi-discrete system `M dc/dt + G(c) = 0` driven by the DeC iteration.
pub trait SemiDiscrete {
    fn n_dofs(&self) -> usize;

    /// `G_i(c)`, written into `out`.
    fn residual(&self, c: &[Vec2], out: &mut [Vec2]) -> Result<()>;

    /// Lumped masses `C_i`.
    fn lumped(&self) -> &[f64];

    /// Consistent mass product `Σ_K Σ_j M^K_ij d_j`.
    fn mass_apply(&self, d: &[Vec2], out: &mut [Vec2]);

    /// True when `mass_apply` equals multiplication by `C_i`.
    fn mass_is_diagonal(&self) -> bool {
        false
    }

    /// Strong boundary conditions, applied after every stage update.
    fn apply_bc(&self, _c: &mut [Vec2]) {}
}

/// `θ^m_ℓ = ∫₀^{t^m} ψ_ℓ` on the unit interval for Lagrange polynomials `ψ_ℓ`
/// on `M + 1` equispaced nodes. Row `m = 0` is zero.
#[derive(Debug, Clone, PartialEq)]
pub struct ThetaTable {
    pub m: usize,
    pub theta: Vec<Vec<f64>>,
}

/// Lagrange basis on equispaced nodes `k/m`, evaluated at `t`.
fn lagrange_equispaced(m: usize, t: f64) -> Vec<f64> {
    let nodes: Vec<f64> = (0..=m).map(|k| k as f64 / m as f64).collect();
    (0..=m)
        .map(|l| {
            (0..=m)
                .filter(|&k| k != l)
                .map(|k| (t - nodes[k]) / (nodes[l] - nodes[k]))
                .product()
        })
        .collect()
}

pub fn theta_coefficients(m: usize) -> Result<ThetaTable> {
    if m == 0 || m > MAX_SUBINTERVALS {
        return Err(Error::InputDomain(format!(
            "subinterval count must lie in 1..={MAX_SUBINTERVALS}, got {m}"
        )));
    }
    let rule = gauss_legendre(m + 1);
    let mut theta = vec![vec![0.0; m + 1]; m + 1];
    for (row, th) in theta.iter_mut().enumerate().skip(1) {
        let r = rule.mapped(0.0, row as f64 / m as f64);
        for (&t, &w) in r.points.iter().zip(&r.weights) {
            for (l, psi) in lagrange_equispaced(m, t).into_iter().enumerate() {
                th[l] += w * psi;
            }
        }
    }
    Ok(ThetaTable { m, theta })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DecVariant {
    #[serde(rename = "bdec")]
    BDeC,
    #[serde(rename = "bdecu")]
    BDeCu,
}

impl DecVariant {
    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "bdec" => Ok(DecVariant::BDeC),
            "bdecu" => Ok(DecVariant::BDeCu),
            other => Err(Error::Config(format!("unknown DeC variant '{other}'"))),
        }
    }
}

/// Subinterval count, variant and iteration count of the DeC solver.
#[derive(Debug, Clone)]
pub struct DecConfig {
    m: usize,
    variant: DecVariant,
    iterations: usize,
    tables: Vec<ThetaTable>,
}

impl DecConfig {
    /// `m` subintervals, `m + 1` iterations.
    pub fn new(m: usize, variant: DecVariant) -> Result<Self> {
        Self::with_iterations(m, variant, m + 1)
    }

    pub fn with_iterations(m: usize, variant: DecVariant, iterations: usize) -> Result<Self> {
        if iterations == 0 {
            return Err(Error::Config("at least one DeC iteration is required".into()));
        }
        let tables = (1..=m).map(theta_coefficients).collect::<Result<Vec<_>>>()?;
        Ok(DecConfig { m, variant, iterations, tables })
    }

    pub fn subintervals(&self) -> usize {
        self.m
    }

    pub fn variant(&self) -> DecVariant {
        self.variant
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    /// Formal order of accuracy, `min(M, P-1) + 1`.
    pub fn order(&self) -> usize {
        self.m.min(self.iterations - 1) + 1
    }

    fn active(&self, p: usize) -> usize {
        match self.variant {
            DecVariant::BDeC => self.m,
            DecVariant::BDeCu => p.min(self.m),
        }
    }
}

/// Re-samples stage vectors given at `a + 1` equispaced nodes onto `b + 1`.
fn interpolate_stages(stages: &[Vec<Vec2>], b: usize) -> Vec<Vec<Vec2>> {
    let a = stages.len() - 1;
    let n = stages[0].len();
    let mut out = Vec::with_capacity(b + 1);
    out.push(stages[0].clone());
    for m in 1..=b {
        let w = lagrange_equispaced(a, m as f64 / b as f64);
        let mut v = vec![Vec2::zeros(); n];
        for (wk, s) in w.iter().zip(stages) {
            for (vi, si) in v.iter_mut().zip(s) {
                *vi += *wk * *si;
            }
        }
        out.push(v);
    }
    out
}

fn check_finite(c: &[Vec2]) -> Result<()> {
    for (i, u) in c.iter().enumerate() {
        if !(u[0].is_finite() && u[1].is_finite()) {
            return Err(Error::State { dof: i, h: u[0], q: u[1] });
        }
    }
    Ok(())
}

/// One DeC step from `c_n`; returns `c^{M,(P)}`.
pub fn dec_step<S: SemiDiscrete + ?Sized>(
    sys: &S,
    c_n: &[Vec2],
    dt: f64,
    cfg: &DecConfig,
) -> Result<Vec<Vec2>> {
    let n = sys.n_dofs();
    if c_n.len() != n {
        return Err(Error::InputDomain(format!("state has {} entries, expected {n}", c_n.len())));
    }
    let lumped = sys.lumped();
    let diag = sys.mass_is_diagonal();
    let mut r0 = vec![Vec2::zeros(); n];
    sys.residual(c_n, &mut r0)?;

    let mut nodes = cfg.active(1);
    let mut stages: Vec<Vec<Vec2>> = vec![c_n.to_vec(); nodes + 1];
    let mut residuals: Vec<Vec<Vec2>> = vec![r0.clone(); nodes + 1];
    let mut fresh = true;
    let mut md = vec![Vec2::zeros(); n];
    let mut diff = vec![Vec2::zeros(); n];

    for p in 1..=cfg.iterations {
        let want = cfg.active(p);
        if want != nodes {
            stages = interpolate_stages(&stages, want);
            nodes = want;
            fresh = false;
            residuals.resize(nodes + 1, Vec::new());
        }
        if !fresh {
            residuals[0].clone_from(&r0);
            for l in 1..=nodes {
                let mut r = std::mem::take(&mut residuals[l]);
                r.resize(n, Vec2::zeros());
                sys.residual(&stages[l], &mut r)?;
                residuals[l] = r;
            }
        }
        let theta = &cfg.tables[nodes - 1].theta;
        let mut next = Vec::with_capacity(nodes + 1);
        next.push(c_n.to_vec());
        for m in 1..=nodes {
            let stage = &stages[m];
            let mut new = vec![Vec2::zeros(); n];
            if diag {
                for i in 0..n {
                    let mut s = Vec2::zeros();
                    for (l, th) in theta[m].iter().enumerate() {
                        s += *th * residuals[l][i];
                    }
                    new[i] = c_n[i] - (dt / lumped[i]) * s;
                }
            } else {
                for i in 0..n {
                    diff[i] = stage[i] - c_n[i];
                }
                sys.mass_apply(&diff, &mut md);
                for i in 0..n {
                    let mut s = Vec2::zeros();
                    for (l, th) in theta[m].iter().enumerate() {
                        s += *th * residuals[l][i];
                    }
                    new[i] = stage[i] - (md[i] + dt * s) / lumped[i];
                }
            }
            sys.apply_bc(&mut new);
            check_finite(&new)?;
            next.push(new);
        }
        stages = next;
        fresh = false;
    }
    Ok(stages.pop().expect("at least one stage"))
}

/// Prescribed conserved components at the two boundary DoFs.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct BoundaryCondition {
    pub left_h: Option<f64>,
    pub left_q: Option<f64>,
    pub right_h: Option<f64>,
    pub right_q: Option<f64>,
}

impl BoundaryCondition {
    pub fn validate(&self) -> Result<()> {
        for h in [self.left_h, self.right_h].into_iter().flatten() {
            if !(h > 0.0 && h.is_finite()) {
                return Err(Error::Config(format!("prescribed water height must be positive, got {h}")));
            }
        }
        for q in [self.left_q, self.right_q].into_iter().flatten() {
            if !q.is_finite() {
                return Err(Error::Config(format!("prescribed momentum must be finite, got {q}")));
            }
        }
        Ok(())
    }
}

/// Overwrites the prescribed components of the first and last DoF. Both
/// endpoints interpolate, so coefficients there are point values.
pub fn apply_strong_bc(state: &mut [Vec2], bc: &BoundaryCondition) {
    let Some(last) = state.len().checked_sub(1) else { return };
    if let Some(h) = bc.left_h {
        state[0][0] = h;
    }
    if let Some(q) = bc.left_q {
        state[0][1] = q;
    }
    if let Some(h) = bc.right_h {
        state[last][0] = h;
    }
    if let Some(q) = bc.right_q {
        state[last][1] = q;
    }
}

/// `Δt = CFL · min_K Δx_K / max_{i∈K} (|v| + c)` from nodal values.
pub fn compute_dt(cfl: f64, element_lengths: &[f64], elem_speeds: &[f64]) -> Result<f64> {
    if !(cfl > 0.0) {
        return Err(Error::Config(format!("CFL must be positive, got {cfl}")));
    }
    let mut best = f64::INFINITY;
    for (dx, s) in element_lengths.iter().zip(elem_speeds) {
        if !s.is_finite() || *s <= 0.0 {
            return Err(Error::State { dof: usize::MAX, h: f64::NAN, q: *s });
        }
        best = best.min(dx / s);
    }
    Ok(cfl * best)
}
