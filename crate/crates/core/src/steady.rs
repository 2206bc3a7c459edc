//! Exact and oracle steady states: lake at rest, frictionless energy-cubic
//! solutions and friction steady states integrated as an ODE in space.

use serde::{Deserialize, Serialize};

use crate::basis::{eval_basis_into, gauss_legendre};
use crate::error::{Error, Result};
use crate::physics::{Bathymetry, PhysParams, Vec2};
use crate::space::{Discretization, MAX_NODES};

/// Minimum number of RK4 substeps of the friction ODE over the domain.
pub const FRICTION_SUBSTEPS: usize = 1 << 15;

const NEWTON_MAX_ITER: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    LakeAtRest,
    Supercritical,
    Subcritical,
    Transcritical,
}

/// Boundary data identifying a steady state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "regime", rename_all = "snake_case")]
pub enum SteadyData {
    LakeAtRest { eta: f64 },
    /// Inflow momentum and water height at `x_L`.
    Supercritical { q: f64, h_left: f64 },
    /// Inflow momentum and water height at `x_R`.
    Subcritical { q: f64, h_right: f64 },
    /// Inflow momentum; critical flow at the bathymetry crest.
    Transcritical { q: f64 },
}

impl SteadyData {
    pub fn regime(&self) -> Regime {
        match self {
            SteadyData::LakeAtRest { .. } => Regime::LakeAtRest,
            SteadyData::Supercritical { .. } => Regime::Supercritical,
            SteadyData::Subcritical { .. } => Regime::Subcritical,
            SteadyData::Transcritical { .. } => Regime::Transcritical,
        }
    }

    pub fn momentum(&self) -> f64 {
        match *self {
            SteadyData::LakeAtRest { .. } => 0.0,
            SteadyData::Supercritical { q, .. }
            | SteadyData::Subcritical { q, .. }
            | SteadyData::Transcritical { q } => q,
        }
    }

    fn validate(&self) -> Result<()> {
        let bad = |what: &str, v: f64| Err(Error::Config(format!("{what} must be positive, got {v}")));
        match *self {
            SteadyData::LakeAtRest { eta } if !(eta > 0.0) => bad("eta", eta),
            SteadyData::Supercritical { h_left, .. } if !(h_left > 0.0) => bad("h_left", h_left),
            SteadyData::Subcritical { h_right, .. } if !(h_right > 0.0) => bad("h_right", h_right),
            SteadyData::Transcritical { q } if q == 0.0 => {
                Err(Error::Config("transcritical flow needs nonzero momentum".into()))
            }
            d if !d.momentum().is_finite() => Err(Error::Config("momentum must be finite".into())),
            _ => Ok(()),
        }
    }
}

/// Which branch of the energy cubic a sample uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Branch {
    Super,
    Sub,
}

#[derive(Debug, Clone, PartialEq)]
enum Sampler {
    Rest { eta: f64 },
    Energy { energy: f64, crest: Option<(f64, f64)> },
    Table(FrictionTable),
}

/// Friction steady profile stored at RK4 nodes, segment by segment between
/// bathymetry breakpoints.
#[derive(Debug, Clone, PartialEq)]
struct FrictionTable {
    segments: Vec<(f64, f64, f64)>,
    xs: Vec<Vec<f64>>,
    hs: Vec<Vec<f64>>,
}

/// Steady state samplable at arbitrary `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct SteadyReference {
    data: SteadyData,
    bathy: Bathymetry,
    phys: PhysParams,
    x_l: f64,
    x_r: f64,
    sampler: Sampler,
}

fn critical_height(q: f64, g: f64) -> f64 {
    (q * q / g).cbrt()
}

fn energy(h: f64, q: f64, b: f64, g: f64) -> f64 {
    0.5 * q * q / (h * h) + g * (h + b)
}

/// Root of `q²/(2H²) + g(H + b) = E` on the requested branch, given the
/// head excess `d = (E - g b)/g - 3H_c/2 ≥ 0` over critical flow.
///
/// With `H = H_c + s` the equation becomes `s²(3H_c + 2s) = 2d(H_c + s)²`,
/// which stays well conditioned as the flow approaches criticality.
fn solve_energy(q: f64, d: f64, g: f64, branch: Branch, x: f64) -> Result<f64> {
    let hc = critical_height(q, g);
    if d <= 0.0 {
        if d >= -1e-13 * hc.max(1.0) {
            return Ok(hc);
        }
        return Err(Error::Infeasible {
            x,
            reason: format!("energy head {d} below critical flow"),
        });
    }
    let phi = |s: f64| s * s * (3.0 * hc + 2.0 * s) - 2.0 * d * (hc + s) * (hc + s);
    let dphi = |s: f64| 6.0 * s * (hc + s) - 4.0 * d * (hc + s);
    // phi(lo) and phi(hi) carry opposite signs on each branch
    let (mut lo, mut hi, mut s) = match branch {
        Branch::Super => (-hc, 0.0, -(2.0 * d * hc / 3.0).sqrt().min(0.5 * hc)),
        Branch::Sub => (0.0, d + 0.5 * hc, (2.0 * d * hc / 3.0).sqrt()),
    };
    let lo_positive = phi(lo) > 0.0;
    for _ in 0..NEWTON_MAX_ITER {
        let f = phi(s);
        if f == 0.0 {
            break;
        }
        if (f > 0.0) == lo_positive {
            lo = s;
        } else {
            hi = s;
        }
        let next = s - f / dphi(s);
        let next = if next > lo && next < hi && next.is_finite() { next } else { 0.5 * (lo + hi) };
        let done = (next - s).abs() <= 2.0 * f64::EPSILON * (hc + s.abs());
        s = next;
        if done || hi - lo <= 2.0 * f64::EPSILON * hc {
            break;
        }
    }
    Ok(hc + s)
}

impl SteadyReference {
    /// Frictionless steady state (exact energy solution, or lake at rest).
    pub fn frictionless(
        data: SteadyData,
        bathy: Bathymetry,
        phys: PhysParams,
        x_l: f64,
        x_r: f64,
    ) -> Result<Self> {
        data.validate()?;
        bathy.validate()?;
        let g = phys.g;
        let sampler = match data {
            SteadyData::LakeAtRest { eta } => Sampler::Rest { eta },
            SteadyData::Supercritical { q, h_left } => {
                let hc = critical_height(q, g);
                if h_left >= hc {
                    return Err(Error::Config(format!(
                        "supercritical inflow needs H_L < {hc}, got {h_left}"
                    )));
                }
                Sampler::Energy { energy: energy(h_left, q, bathy.value(x_l), g), crest: None }
            }
            SteadyData::Subcritical { q, h_right } => {
                let hc = critical_height(q, g);
                if h_right <= hc {
                    return Err(Error::Config(format!(
                        "subcritical outflow needs H_R > {hc}, got {h_right}"
                    )));
                }
                Sampler::Energy { energy: energy(h_right, q, bathy.value(x_r), g), crest: None }
            }
            SteadyData::Transcritical { q } => {
                let (xc, bc) = bathy.crest(x_l, x_r);
                let hc = critical_height(q, g);
                Sampler::Energy { energy: energy(hc, q, bc, g), crest: Some((xc, bc)) }
            }
        };
        let r = SteadyReference { data, bathy, phys, x_l, x_r, sampler };
        // every regime must be feasible on the whole domain
        for x in r.probe_points() {
            r.sample(x)?;
        }
        Ok(r)
    }

    /// Friction steady state integrated with RK4 on at least `substeps`
    /// steps: left to right for supercritical, right to left for subcritical.
    pub fn with_friction(
        data: SteadyData,
        bathy: Bathymetry,
        phys: PhysParams,
        x_l: f64,
        x_r: f64,
        substeps: usize,
    ) -> Result<Self> {
        data.validate()?;
        bathy.validate()?;
        let (q, start_h, forward) = match data {
            SteadyData::Supercritical { q, h_left } => (q, h_left, true),
            SteadyData::Subcritical { q, h_right } => (q, h_right, false),
            _ => {
                return Err(Error::Config(
                    "friction steady states are supported for supercritical and subcritical flow only"
                        .into(),
                ))
            }
        };
        let mut cuts: Vec<f64> = bathy
            .breakpoints()
            .into_iter()
            .filter(|&x| x > x_l && x < x_r)
            .collect();
        cuts.insert(0, x_l);
        cuts.push(x_r);
        cuts.dedup();
        let len = x_r - x_l;
        let ode = OdeRhs { q, bathy: &bathy, phys: &phys };
        let n_seg = cuts.len() - 1;
        let mut segments = Vec::with_capacity(n_seg);
        let mut xs = vec![Vec::new(); n_seg];
        let mut hs = vec![Vec::new(); n_seg];
        let mut h = start_h;
        let order: Vec<usize> = if forward { (0..n_seg).collect() } else { (0..n_seg).rev().collect() };
        for s in order {
            let (a, b) = (cuts[s], cuts[s + 1]);
            let n = ((substeps as f64 * (b - a) / len).ceil() as usize).max(1);
            let step = (b - a) / n as f64;
            let mut sx = Vec::with_capacity(n + 1);
            let mut sh = Vec::with_capacity(n + 1);
            if forward {
                sx.push(a);
                sh.push(h);
                for k in 0..n {
                    let x0 = a + k as f64 * step;
                    h = ode.rk4(x0, h, step, a, b)?;
                    sx.push(if k + 1 == n { b } else { x0 + step });
                    sh.push(h);
                }
            } else {
                sx.push(b);
                sh.push(h);
                for k in 0..n {
                    let x0 = b - k as f64 * step;
                    h = ode.rk4(x0, h, -step, a, b)?;
                    sx.push(if k + 1 == n { a } else { x0 - step });
                    sh.push(h);
                }
                sx.reverse();
                sh.reverse();
            }
            segments.push((a, b, step));
            xs[s] = sx;
            hs[s] = sh;
        }
        segments.sort_by(|p, q| p.0.total_cmp(&q.0));
        let sampler = Sampler::Table(FrictionTable { segments, xs, hs });
        Ok(SteadyReference { data, bathy, phys, x_l, x_r, sampler })
    }

    /// Friction-aware constructor: the exact solution when `n_M = 0`.
    pub fn new(
        data: SteadyData,
        bathy: Bathymetry,
        phys: PhysParams,
        x_l: f64,
        x_r: f64,
    ) -> Result<Self> {
        if phys.n_manning > 0.0 && data.regime() != Regime::LakeAtRest {
            Self::with_friction(data, bathy, phys, x_l, x_r, FRICTION_SUBSTEPS)
        } else {
            Self::frictionless(data, bathy, phys, x_l, x_r)
        }
    }

    fn probe_points(&self) -> Vec<f64> {
        let mut pts: Vec<f64> = (0..=64)
            .map(|k| self.x_l + (self.x_r - self.x_l) * k as f64 / 64.0)
            .collect();
        pts.extend(self.bathy.breakpoints().into_iter().filter(|&x| x >= self.x_l && x <= self.x_r));
        pts
    }

    pub fn data(&self) -> &SteadyData {
        &self.data
    }

    pub fn regime(&self) -> Regime {
        self.data.regime()
    }

    pub fn momentum(&self) -> f64 {
        self.data.momentum()
    }

    pub fn bathymetry(&self) -> &Bathymetry {
        &self.bathy
    }

    pub fn has_friction(&self) -> bool {
        matches!(self.sampler, Sampler::Table(_))
    }

    /// Constant energy of a frictionless moving steady state.
    pub fn energy(&self) -> Option<f64> {
        match self.sampler {
            Sampler::Energy { energy, .. } => Some(energy),
            Sampler::Rest { eta } => Some(self.phys.g * eta),
            Sampler::Table(_) => None,
        }
    }

    pub fn height(&self, x: f64) -> Result<f64> {
        let g = self.phys.g;
        let b = self.bathy.value(x);
        let q = self.data.momentum();
        match &self.sampler {
            Sampler::Rest { eta } => {
                let h = eta - b;
                if h > 0.0 {
                    Ok(h)
                } else {
                    Err(Error::Infeasible { x, reason: format!("dry lake at rest (H = {h})") })
                }
            }
            Sampler::Energy { energy, crest } => {
                let hc = critical_height(q, g);
                let (branch, d) = match (self.regime(), crest) {
                    (Regime::Supercritical, _) => (Branch::Super, energy / g - b - 1.5 * hc),
                    (Regime::Subcritical, _) => (Branch::Sub, energy / g - b - 1.5 * hc),
                    (_, Some((xc, bc))) => {
                        if x == *xc {
                            return Ok(hc);
                        }
                        let branch = if x < *xc { Branch::Sub } else { Branch::Super };
                        (branch, bc - b)
                    }
                    _ => unreachable!("transcritical sampler always stores its crest"),
                };
                solve_energy(q, d, g, branch, x)
            }
            Sampler::Table(t) => {
                let x = x.clamp(self.x_l, self.x_r);
                let s = t
                    .segments
                    .iter()
                    .position(|seg| x <= seg.1)
                    .unwrap_or(t.segments.len() - 1);
                let (a, b_end, step) = t.segments[s];
                let k = (((x - a) / step).floor() as usize).min(t.xs[s].len() - 1);
                let (x0, h0) = (t.xs[s][k], t.hs[s][k]);
                if x == x0 {
                    return Ok(h0);
                }
                let ode = OdeRhs { q, bathy: &self.bathy, phys: &self.phys };
                ode.rk4(x0, h0, x - x0, a, b_end)
            }
        }
    }

    /// `(H, q)` at `x`.
    pub fn sample(&self, x: f64) -> Result<Vec2> {
        Ok(Vec2::new(self.height(x)?, self.data.momentum()))
    }
}

struct OdeRhs<'a> {
    q: f64,
    bathy: &'a Bathymetry,
    phys: &'a PhysParams,
}

impl OdeRhs<'_> {
    /// Slope inside the smooth segment `[a, b]`, one-sided at its ends.
    fn slope_in(&self, x: f64, a: f64, b: f64) -> f64 {
        if x <= a {
            self.bathy.one_sided_slopes(a).1
        } else if x >= b {
            self.bathy.one_sided_slopes(b).0
        } else {
            self.bathy.slope(x)
        }
    }

    fn rhs(&self, x: f64, h: f64, a: f64, b: f64) -> Result<f64> {
        let g = self.phys.g;
        let n = self.phys.n_manning;
        let q = self.q;
        let den = g - q * q / (h * h * h);
        let crit = g * 1e-10;
        if !(h > 0.0) || den.abs() < crit || !den.is_finite() {
            return Err(Error::Infeasible {
                x,
                reason: format!("friction steady ODE reaches a sonic or dry state (H = {h})"),
            });
        }
        let num = -g * self.slope_in(x, a, b) - g * n * n * q.abs() * q / h.powf(10.0 / 3.0);
        Ok(num / den)
    }

    fn rk4(&self, x: f64, h: f64, dx: f64, a: f64, b: f64) -> Result<f64> {
        let k1 = self.rhs(x, h, a, b)?;
        let k2 = self.rhs(x + 0.5 * dx, h + 0.5 * dx * k1, a, b)?;
        let k3 = self.rhs(x + 0.5 * dx, h + 0.5 * dx * k2, a, b)?;
        let k4 = self.rhs(x + dx, h + dx * k3, a, b)?;
        let out = h + dx / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        let fric = self.phys.n_manning > 0.0;
        let sign_change = (self.phys.g - self.q * self.q / (h * h * h)).signum()
            != (self.phys.g - self.q * self.q / (out * out * out)).signum();
        if !(out > 0.0) || sign_change {
            return Err(Error::Infeasible {
                x: x + dx,
                reason: format!(
                    "friction steady ODE crosses the critical depth{}",
                    if fric { "" } else { " without friction" }
                ),
            });
        }
        Ok(out)
    }
}

/// Samples of a frictionless steady state.
pub fn solve_frictionless_steady(
    data: SteadyData,
    bathy: &Bathymetry,
    xs: &[f64],
    p: &PhysParams,
    domain: (f64, f64),
) -> Result<Vec<Vec2>> {
    let r = SteadyReference::frictionless(data, bathy.clone(), *p, domain.0, domain.1)?;
    xs.iter().map(|&x| r.sample(x)).collect()
}

/// Samples of a friction steady state from the RK4 oracle.
pub fn solve_friction_steady(
    data: SteadyData,
    bathy: &Bathymetry,
    n_manning: f64,
    xs: &[f64],
    p: &PhysParams,
    domain: (f64, f64),
) -> Result<Vec<Vec2>> {
    let phys = PhysParams::new(p.g, n_manning)?;
    let r = SteadyReference::with_friction(data, bathy.clone(), phys, domain.0, domain.1, FRICTION_SUBSTEPS)?;
    xs.iter().map(|&x| r.sample(x)).collect()
}

/// Per-component `∫|u_h − u_ref|` with 10-point Gauss–Legendre per element.
pub fn l1_error_with<F>(disc: &Discretization, coeffs: &[Vec2], reference: F) -> Result<[f64; 2]>
where
    F: Fn(f64) -> Result<Vec2>,
{
    let mesh = disc.mesh();
    let spec = disc.spec();
    let rule = gauss_legendre(10);
    let mut phi = [0.0; MAX_NODES];
    let n = spec.n_local();
    let mut err = [0.0; 2];
    for e in 0..mesh.n_elem() {
        let a = mesh.element_bounds()[e];
        let h = mesh.element_length(e);
        let dofs = mesh.elem_dofs(e);
        for (&xi, &w) in rule.points.iter().zip(&rule.weights) {
            eval_basis_into(spec, 0, xi, &mut phi[..n]);
            let mut u = Vec2::zeros();
            for (j, i) in dofs.clone().enumerate() {
                u += phi[j] * coeffs[i];
            }
            let r = reference(a + h * xi)?;
            err[0] += w * h * (u[0] - r[0]).abs();
            err[1] += w * h * (u[1] - r[1]).abs();
        }
    }
    Ok(err)
}

pub fn l1_error(disc: &Discretization, coeffs: &[Vec2], reference: &SteadyReference) -> Result<[f64; 2]> {
    l1_error_with(disc, coeffs, |x| reference.sample(x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{BasisFamily, BasisSpec};
    use crate::mesh::build_uniform_mesh;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const G: f64 = 9.81;

    fn phys() -> PhysParams {
        PhysParams::default()
    }

    fn grid(n: usize) -> Vec<f64> {
        (0..=n).map(|k| 25.0 * k as f64 / n as f64).collect()
    }

    fn supercritical() -> SteadyData {
        SteadyData::Supercritical { q: 24.0, h_left: 2.0 }
    }

    fn subcritical() -> SteadyData {
        SteadyData::Subcritical { q: 4.42, h_right: 2.0 }
    }

    #[test]
    fn supercritical_examples() {
        let froude = 12.0 / (G * 2.0f64).sqrt();
        assert!((froude - 2.709).abs() < 1e-3);
        let r = SteadyReference::frictionless(supercritical(), Bathymetry::SmoothBump, phys(), 0.0, 25.0)
            .unwrap();
        assert_eq!(r.height(2.0).unwrap(), 2.0);
        assert!((r.height(20.0).unwrap() - 2.0).abs() < 1e-14);
        // supercritical flow thickens over a bump
        assert!(r.height(10.0).unwrap() > 2.0);
    }

    #[test]
    fn energy_residual_is_small_everywhere() {
        let cases = [
            (supercritical(), Bathymetry::SmoothBump),
            (supercritical(), Bathymetry::C0Parabola),
            (subcritical(), Bathymetry::SmoothBump),
            (subcritical(), Bathymetry::C0Parabola),
            (SteadyData::Transcritical { q: 1.53 }, Bathymetry::SmoothBump),
            (SteadyData::Transcritical { q: 1.53 }, Bathymetry::C0Parabola),
        ];
        for (d, b) in cases {
            let r = SteadyReference::frictionless(d, b.clone(), phys(), 0.0, 25.0).unwrap();
            let e = r.energy().unwrap();
            for x in grid(2000) {
                let h = r.height(x).unwrap();
                assert!((energy(h, d.momentum(), b.value(x), G) - e).abs() <= 1e-11 * e, "{d:?} {x}");
                let hc = critical_height(d.momentum(), G);
                match d.regime() {
                    Regime::Supercritical => assert!(h <= hc),
                    Regime::Subcritical => assert!(h >= hc),
                    _ => assert!(if x < 10.0 { h >= hc } else { h <= hc }),
                }
            }
        }
    }

    #[test]
    fn transcritical_is_continuous_at_crest() {
        for b in [Bathymetry::SmoothBump, Bathymetry::C0Parabola] {
            let r = SteadyReference::frictionless(SteadyData::Transcritical { q: 1.53 }, b, phys(), 0.0, 25.0)
                .unwrap();
            let hc = r.height(10.0).unwrap();
            for d in [1e-12, 1e-11] {
                assert!((r.height(10.0 - d).unwrap() - hc).abs() < 1e-9);
                assert!((r.height(10.0 + d).unwrap() - hc).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn subcritical_boundary_value() {
        let r = SteadyReference::frictionless(subcritical(), Bathymetry::C0Parabola, phys(), 0.0, 25.0).unwrap();
        assert!((r.height(25.0).unwrap() - 2.0).abs() < 1e-14);
        assert!(r.height(10.0).unwrap() < 2.0);
    }

    #[test]
    fn lake_at_rest_and_infeasible() {
        let r = SteadyReference::frictionless(
            SteadyData::LakeAtRest { eta: 0.5 },
            Bathymetry::C0Parabola,
            phys(),
            0.0,
            25.0,
        )
        .unwrap();
        assert_eq!(r.sample(10.0).unwrap(), Vec2::new(0.3, 0.0));
        // supercritical inflow whose energy cannot cross a high bump
        let tall = Bathymetry::Tabulated { xs: vec![0.0, 10.0, 20.0], bs: vec![0.0, 5.0, 0.0] };
        let err = SteadyReference::frictionless(
            SteadyData::Supercritical { q: 1.0, h_left: 0.2 },
            tall,
            phys(),
            0.0,
            20.0,
        )
        .unwrap_err();
        assert!(matches!(err, Error::Infeasible { .. }));
        assert!(SteadyReference::frictionless(
            SteadyData::Supercritical { q: 1.0, h_left: 2.0 },
            Bathymetry::Flat,
            phys(),
            0.0,
            25.0
        )
        .is_err());
    }

    #[test]
    fn zero_friction_ode_matches_cubic() {
        for (d, b) in [
            (supercritical(), Bathymetry::C0Parabola),
            (subcritical(), Bathymetry::C0Parabola),
            (supercritical(), Bathymetry::SmoothBump),
        ] {
            let xs = grid(997);
            let exact = solve_frictionless_steady(d, &b, &xs, &phys(), (0.0, 25.0)).unwrap();
            let ode = SteadyReference::with_friction(d, b.clone(), phys(), 0.0, 25.0, FRICTION_SUBSTEPS)
                .unwrap();
            for (x, e) in xs.iter().zip(&exact) {
                let h = ode.height(*x).unwrap();
                assert!((h - e[0]).abs() < 1e-9, "{d:?} x={x}: {h} vs {}", e[0]);
            }
        }
    }

    #[test]
    fn friction_supercritical_total_height_increases() {
        let xs = [0.0, 25.0];
        let s = solve_friction_steady(supercritical(), &Bathymetry::C0Parabola, 0.03, &xs, &phys(), (0.0, 25.0))
            .unwrap();
        assert!(s[1][0] > s[0][0]);
        assert!(s.iter().all(|u| u[1] == 24.0));
        let sub = solve_friction_steady(subcritical(), &Bathymetry::C0Parabola, 0.03, &xs, &phys(), (0.0, 25.0))
            .unwrap();
        assert_eq!(sub[1][0], 2.0);
        assert!(sub.iter().all(|u| u[1] == 4.42));
        assert!(SteadyReference::with_friction(
            SteadyData::Transcritical { q: 1.53 },
            Bathymetry::C0Parabola,
            PhysParams::new(G, 0.03).unwrap(),
            0.0,
            25.0,
            1024
        )
        .is_err());
    }

    #[test]
    fn friction_table_converges_at_fourth_order() {
        let p = PhysParams::new(G, 0.03).unwrap();
        let fine = SteadyReference::with_friction(subcritical(), Bathymetry::C0Parabola, p, 0.0, 25.0, 1 << 12)
            .unwrap();
        let errs: Vec<f64> = [64usize, 128]
            .iter()
            .map(|&n| {
                let c = SteadyReference::with_friction(subcritical(), Bathymetry::C0Parabola, p, 0.0, 25.0, n)
                    .unwrap();
                (c.height(0.0).unwrap() - fine.height(0.0).unwrap()).abs()
            })
            .collect();
        let order = (errs[0] / errs[1]).log2();
        assert!(order > 3.7, "{order}");
    }

    fn disc(spec: BasisSpec, n: usize, bathy: Bathymetry) -> Discretization {
        let mesh = build_uniform_mesh(0.0, 25.0, n, &spec).unwrap();
        Discretization::new(spec, mesh, phys(), bathy).unwrap()
    }

    #[test]
    fn l1_error_examples() {
        let d = disc(BasisSpec::new(BasisFamily::Bernstein, 3).unwrap(), 7, Bathymetry::Flat);
        let rest =
            SteadyReference::frictionless(SteadyData::LakeAtRest { eta: 1.0 }, Bathymetry::Flat, phys(), 0.0, 25.0)
                .unwrap();
        let c = d.coefficients(&vec![Vec2::new(1.0, 0.0); d.n_dofs()]);
        let e = l1_error(&d, &c, &rest).unwrap();
        assert!(e[0] < 1e-13 && e[1] == 0.0);
        let off = d.coefficients(&vec![Vec2::new(1.0 + 1e-3, 0.0); d.n_dofs()]);
        let e = l1_error(&d, &off, &rest).unwrap();
        assert!((e[0] - 0.025).abs() < 1e-14 && e[1] == 0.0);
    }

    #[test]
    fn l1_error_matches_midpoint_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for spec in [
            BasisSpec::new(BasisFamily::Bernstein, 4).unwrap(),
            BasisSpec::new(BasisFamily::LagrangeGaussLobatto, 2).unwrap(),
        ] {
            let d = disc(spec, 5, Bathymetry::Flat);
            let c: Vec<Vec2> =
                (0..d.n_dofs()).map(|_| Vec2::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
            // offsets keep u_h - u_ref of one sign so both rules see a smooth integrand
            let refn = |x: f64| Ok(Vec2::new(0.3 * (0.3 * x).sin() - 3.0, 0.1 * x + 2.0));
            let e = l1_error_with(&d, &c, refn).unwrap();
            let n = 100_000;
            let dx = 25.0 / n as f64;
            let mut brute = [0.0; 2];
            for k in 0..n {
                let x = (k as f64 + 0.5) * dx;
                let u = d.evaluate(&c, x);
                let r = refn(x).unwrap();
                brute[0] += dx * (u[0] - r[0]).abs();
                brute[1] += dx * (u[1] - r[1]).abs();
            }
            for k in 0..2 {
                assert!((e[k] - brute[k]).abs() <= 1e-8 * brute[k], "{k}: {} {}", e[k], brute[k]);
            }
        }
    }
}
