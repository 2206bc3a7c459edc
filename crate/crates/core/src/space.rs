//! Spatial residuals `Φ_i = ∫ [∂ₓF - S]_h φ_i dx` for the three space
//! discretizations and the global-flux construction.
//!
//! All element operators act on nodal values; for the Bernstein family the
//! nodal-to-coefficient map `V⁻¹` is folded into the precomputed tables.

use serde::{Deserialize, Serialize};

use crate::basis::{
    collocation_inverse, collocation_matrix, eval_basis_into, gauss_legendre, lumped_mass,
    quadrature_for, reference_mass, BasisSpec, QuadratureRule,
};
use crate::error::{Error, Result};
use crate::mesh::Mesh1D;
use crate::physics::{flux_unchecked, flux_v_unchecked, friction_unchecked, Bathymetry, PhysParams, Vec2};

/// Upper bound on local DoFs per element.
pub const MAX_NODES: usize = crate::basis::MAX_DEGREE + 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SpaceScheme {
    #[serde(rename = "nonwb")]
    NonWb,
    #[serde(rename = "wbhs")]
    WbHs,
    #[serde(rename = "wbgf")]
    WbGf,
}

impl SpaceScheme {
    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "nonwb" | "reference" => Ok(SpaceScheme::NonWb),
            "wbhs" | "hs" => Ok(SpaceScheme::WbHs),
            "wbgf" | "gf" => Ok(SpaceScheme::WbGf),
            other => Err(Error::Config(format!("unknown space scheme '{other}'"))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SpaceScheme::NonWb => "nonwb",
            SpaceScheme::WbHs => "wbhs",
            SpaceScheme::WbGf => "wbgf",
        }
    }
}

/// Row-major small square matrix.
#[derive(Debug, Clone)]
pub(crate) struct Table {
    n: usize,
    a: Vec<f64>,
}

impl Table {
    fn zeros(n: usize) -> Self {
        Table { n, a: vec![0.0; n * n] }
    }

    fn from_fn(n: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let mut t = Table::zeros(n);
        for i in 0..n {
            for j in 0..n {
                t.a[i * n + j] = f(i, j);
            }
        }
        t
    }

    #[inline]
    pub(crate) fn get(&self, i: usize, j: usize) -> f64 {
        self.a[i * self.n + j]
    }

    #[inline]
    pub(crate) fn row(&self, i: usize) -> &[f64] {
        &self.a[i * self.n..(i + 1) * self.n]
    }

    fn mul(&self, other: &Table) -> Table {
        Table::from_fn(self.n, |i, j| (0..self.n).map(|k| self.get(i, k) * other.get(k, j)).sum())
    }
}

#[inline]
pub(crate) fn dot_vec(w: &[f64], v: &[Vec2]) -> Vec2 {
    let mut s = Vec2::zeros();
    for (a, b) in w.iter().zip(v) {
        s += *a * *b;
    }
    s
}

#[inline]
pub(crate) fn dot(w: &[f64], v: &[f64]) -> f64 {
    w.iter().zip(v).map(|(a, b)| a * b).sum()
}

/// Per-element global-flux nodal values.
#[derive(Debug, Clone)]
pub struct GlobalFluxField {
    /// `G(x_i)` at every global DoF.
    pub values: Vec<Vec2>,
    /// Source primitive `R_h(x_i)` at every global DoF.
    pub primitive: Vec<Vec2>,
}

/// Mesh, basis, bathymetry and physics bundled with every state-independent
/// table used by the residual and stabilization assemblies.
#[derive(Debug, Clone)]
pub struct Discretization {
    pub(crate) spec: BasisSpec,
    pub(crate) mesh: Mesh1D,
    pub(crate) phys: PhysParams,
    pub(crate) bathy: Bathymetry,
    pub(crate) nloc: usize,
    pub(crate) nodal: bool,
    /// `φ_j(ξ_k)`.
    pub(crate) vander: Table,
    /// Nodal values to coefficients.
    pub(crate) vinv: Table,
    /// `∫ φ_i φ_j' dξ` composed with `V⁻¹`.
    pub(crate) dv: Table,
    /// `∫ φ_i φ_j dξ`.
    pub(crate) mref: Table,
    /// `∫ φ_i φ_j dξ` composed with `V⁻¹`.
    pub(crate) mv: Table,
    /// `∫₀^{ξ_k} φ_j dξ` composed with `V⁻¹`.
    pub(crate) pv: Table,
    /// Derivatives at the local nodes, `φ_j'(ξ_k)`, acting on coefficients.
    pub(crate) dnodes: Table,
    pub(crate) quad: QuadratureRule,
    pub(crate) phi_q: Vec<Vec<f64>>,
    pub(crate) dphi_q: Vec<Vec<f64>>,
    /// `end_d[s][r][j]`: r-th reference derivative of `φ_j` at `ξ = s`.
    pub(crate) end_d: [[Vec<f64>; 3]; 2],
    /// `end_d` composed with `V⁻¹`, acting on nodal values.
    pub(crate) end_dv: [[Vec<f64>; 3]; 2],
    pub(crate) lumped: Vec<f64>,
    pub(crate) b_nodal: Vec<f64>,
    pub(crate) b_coef: Vec<f64>,
    pub(crate) b_slope: Vec<f64>,
}

impl Discretization {
    pub fn new(spec: BasisSpec, mesh: Mesh1D, phys: PhysParams, bathy: Bathymetry) -> Result<Self> {
        if mesh.degree() != spec.degree() {
            return Err(Error::Config(format!(
                "mesh built for degree {} used with basis {spec}",
                mesh.degree()
            )));
        }
        bathy.validate()?;
        let n = spec.n_local();
        let v = collocation_matrix(&spec);
        let vinv = collocation_inverse(&spec);
        let vander = Table::from_fn(n, |i, j| v[(i, j)]);
        let vinv = Table::from_fn(n, |i, j| vinv[(i, j)]);
        let nodes = spec.nodes();

        let quad = quadrature_for(&spec);
        let mut phi_q = Vec::new();
        let mut dphi_q = Vec::new();
        for &x in &quad.points {
            let mut p = vec![0.0; n];
            let mut d = vec![0.0; n];
            eval_basis_into(&spec, 0, x, &mut p);
            eval_basis_into(&spec, 1, x, &mut d);
            phi_q.push(p);
            dphi_q.push(d);
        }
        let mut dmat = Table::zeros(n);
        for (q, &w) in quad.weights.iter().enumerate() {
            for i in 0..n {
                for j in 0..n {
                    dmat.a[i * n + j] += w * phi_q[q][i] * dphi_q[q][j];
                }
            }
        }
        let m = reference_mass(&spec);
        let mref = Table::from_fn(n, |i, j| m[(i, j)]);

        // primitives ∫₀^{ξ_k} φ_j, exact with an (M+1)-point Gauss rule
        let gl = gauss_legendre(n);
        let mut prim = Table::zeros(n);
        let mut buf = vec![0.0; n];
        for (k, &xk) in nodes.iter().enumerate() {
            let r = gl.mapped(0.0, xk);
            for (&x, &w) in r.points.iter().zip(&r.weights) {
                eval_basis_into(&spec, 0, x, &mut buf);
                for j in 0..n {
                    prim.a[k * n + j] += w * buf[j];
                }
            }
        }
        let dnodes = Table::from_fn(n, |k, j| {
            let mut d = vec![0.0; n];
            eval_basis_into(&spec, 1, nodes[k], &mut d);
            d[j]
        });

        let end = |s: f64, r: usize| {
            let mut d = vec![0.0; n];
            eval_basis_into(&spec, r, s, &mut d);
            d
        };
        let end_d = [[end(0.0, 0), end(0.0, 1), end(0.0, 2)], [end(1.0, 0), end(1.0, 1), end(1.0, 2)]];
        let fold = |d: &Vec<f64>| -> Vec<f64> {
            (0..n).map(|k| (0..n).map(|j| d[j] * vinv.get(j, k)).sum()).collect()
        };
        let end_dv = [
            [fold(&end_d[0][0]), fold(&end_d[0][1]), fold(&end_d[0][2])],
            [fold(&end_d[1][0]), fold(&end_d[1][1]), fold(&end_d[1][2])],
        ];

        let mut lumped = vec![0.0; mesh.n_dofs()];
        for e in 0..mesh.n_elem() {
            let c = lumped_mass(&spec, mesh.element_length(e))?;
            for (j, i) in mesh.elem_dofs(e).enumerate() {
                lumped[i] += c[j];
            }
        }

        let b_nodal: Vec<f64> = mesh.dof_coords().iter().map(|&x| bathy.value(x)).collect();
        let b_slope: Vec<f64> = mesh.dof_coords().iter().map(|&x| bathy.slope(x)).collect();
        let dv = dmat.mul(&vinv);
        let mv = mref.mul(&vinv);
        let pv = prim.mul(&vinv);
        let mut disc = Discretization {
            spec,
            nodal: spec.is_nodal(),
            nloc: n,
            mesh,
            phys,
            bathy,
            vander,
            vinv,
            dv,
            mref,
            mv,
            pv,
            dnodes,
            quad,
            phi_q,
            dphi_q,
            end_d,
            end_dv,
            lumped,
            b_nodal,
            b_coef: Vec::new(),
            b_slope,
        };
        disc.b_coef = disc.scalar_coefficients(&disc.b_nodal);
        Ok(disc)
    }

    pub fn spec(&self) -> &BasisSpec {
        &self.spec
    }

    pub fn mesh(&self) -> &Mesh1D {
        &self.mesh
    }

    pub fn phys(&self) -> &PhysParams {
        &self.phys
    }

    pub fn bathymetry(&self) -> &Bathymetry {
        &self.bathy
    }

    pub fn n_dofs(&self) -> usize {
        self.mesh.n_dofs()
    }

    /// Global lumped masses `C_i = ∫ φ_i dx`.
    pub fn lumped_masses(&self) -> &[f64] {
        &self.lumped
    }

    /// Bathymetry sampled at the DoFs.
    pub fn bathymetry_nodal(&self) -> &[f64] {
        &self.b_nodal
    }

    /// Coefficients of the bathymetry interpolant `B_h`.
    pub fn bathymetry_coefficients(&self) -> &[f64] {
        &self.b_coef
    }

    /// Values at the DoF coordinates of the field with the given coefficients.
    pub fn nodal_values(&self, coeffs: &[Vec2]) -> Vec<Vec2> {
        if self.nodal {
            return coeffs.to_vec();
        }
        let mut out = coeffs.to_vec();
        let m = self.spec.degree();
        for e in 0..self.mesh.n_elem() {
            let c = &coeffs[e * m..=e * m + m];
            for k in 1..m {
                out[e * m + k] = dot_vec(self.vander.row(k), c);
            }
        }
        out
    }

    /// Coefficients of the interpolant of the given nodal values.
    pub fn coefficients(&self, nodal: &[Vec2]) -> Vec<Vec2> {
        if self.nodal {
            return nodal.to_vec();
        }
        let mut out = nodal.to_vec();
        let m = self.spec.degree();
        for e in 0..self.mesh.n_elem() {
            let v = &nodal[e * m..=e * m + m];
            for j in 1..m {
                out[e * m + j] = dot_vec(self.vinv.row(j), v);
            }
        }
        out
    }

    pub fn scalar_coefficients(&self, nodal: &[f64]) -> Vec<f64> {
        if self.nodal {
            return nodal.to_vec();
        }
        let mut out = nodal.to_vec();
        let m = self.spec.degree();
        for e in 0..self.mesh.n_elem() {
            let v = &nodal[e * m..=e * m + m];
            for j in 1..m {
                out[e * m + j] = dot(self.vinv.row(j), v);
            }
        }
        out
    }

    /// Coefficients of the interpolant of `f(x_i)`.
    pub fn interpolate<F: Fn(f64) -> Vec2>(&self, f: F) -> Vec<Vec2> {
        let nodal: Vec<Vec2> = self.mesh.dof_coords().iter().map(|&x| f(x)).collect();
        self.coefficients(&nodal)
    }

    /// Evaluates the field at `x`.
    pub fn evaluate(&self, coeffs: &[Vec2], x: f64) -> Vec2 {
        let e = self.mesh.locate(x);
        let (a, b) = (self.mesh.element_bounds()[e], self.mesh.element_bounds()[e + 1]);
        let xi = ((x - a) / (b - a)).clamp(0.0, 1.0);
        let mut phi = [0.0; MAX_NODES];
        eval_basis_into(&self.spec, 0, xi, &mut phi[..self.nloc]);
        dot_vec(&phi[..self.nloc], &coeffs[self.mesh.elem_dofs(e)])
    }

    /// Nodal values after checking that every one is a wet, finite state.
    pub(crate) fn checked_nodal(&self, coeffs: &[Vec2]) -> Result<Vec<Vec2>> {
        if coeffs.len() != self.n_dofs() {
            return Err(Error::InputDomain(format!(
                "state has {} entries, mesh has {} DoFs",
                coeffs.len(),
                self.n_dofs()
            )));
        }
        let nodal = self.nodal_values(coeffs);
        for (i, u) in nodal.iter().enumerate() {
            if !(u[0] > 0.0 && u[0].is_finite() && u[1].is_finite()) {
                return Err(Error::State { dof: i, h: u[0], q: u[1] });
            }
        }
        Ok(nodal)
    }

    /// `R_h` and `G = F + R_h` at every DoF, accumulated left to right.
    pub fn global_flux(&self, coeffs: &[Vec2]) -> Result<GlobalFluxField> {
        let nodal = self.checked_nodal(coeffs)?;
        Ok(self.global_flux_nodal(&nodal))
    }

    pub(crate) fn global_flux_nodal(&self, nodal: &[Vec2]) -> GlobalFluxField {
        let n = self.nloc;
        let m = self.spec.degree();
        let g = self.phys.g;
        let mut values = vec![Vec2::zeros(); nodal.len()];
        let mut primitive = vec![Vec2::zeros(); nodal.len()];
        let mut r_left = 0.0;
        let mut integrand = [0.0; MAX_NODES];
        for e in 0..self.mesh.n_elem() {
            let dx = self.mesh.element_length(e);
            let base = e * m;
            let u = &nodal[base..base + n];
            let b = &self.b_nodal[base..base + n];
            let bc = &self.b_coef[base..base + n];
            for k in 0..n {
                let dbdx = dot(self.dnodes.row(k), bc) / dx;
                integrand[k] = g * (u[k][0] + b[k]) * dbdx - friction_unchecked(&u[k], &self.phys);
            }
            let half_b0 = 0.5 * g * b[0] * b[0];
            for k in 0..n {
                let r = if k == 0 {
                    r_left
                } else {
                    r_left + dx * dot(self.pv.row(k), &integrand[..n]) - (0.5 * g * b[k] * b[k] - half_b0)
                };
                primitive[base + k] = Vec2::new(0.0, r);
                values[base + k] = flux_unchecked(&u[k], g) + primitive[base + k];
            }
            r_left = primitive[base + m][1];
        }
        GlobalFluxField { values, primitive }
    }

    /// `(0, g H_h ∂ₓ(H_h + B_h))` tested against the local basis of element
    /// `e`, integrated with the element quadrature.
    pub fn hydrostatic_term(&self, e: usize, coeffs: &[Vec2]) -> Vec<Vec2> {
        let mut out = vec![Vec2::zeros(); self.nloc];
        self.hydrostatic_into(e, coeffs, &mut out);
        out
    }

    fn hydrostatic_into(&self, e: usize, coeffs: &[Vec2], out: &mut [Vec2]) {
        let g = self.phys.g;
        let dofs = self.mesh.elem_dofs(e);
        let c = &coeffs[dofs.clone()];
        let bc = &self.b_coef[dofs];
        for (q, &w) in self.quad.weights.iter().enumerate() {
            let phi = &self.phi_q[q];
            let dphi = &self.dphi_q[q];
            let mut h = 0.0;
            let mut deta = 0.0;
            for j in 0..self.nloc {
                h += phi[j] * c[j][0];
                deta += dphi[j] * (c[j][0] + bc[j]);
            }
            // Δx cancels between the measure and the derivative
            let f = w * g * h * deta;
            for i in 0..self.nloc {
                out[i][1] += f * phi[i];
            }
        }
    }

    /// Assembled space residual for the given coefficients.
    pub fn space_residual(&self, scheme: SpaceScheme, coeffs: &[Vec2]) -> Result<Vec<Vec2>> {
        let nodal = self.checked_nodal(coeffs)?;
        let gflux = match scheme {
            SpaceScheme::WbGf => Some(self.global_flux_nodal(&nodal)),
            _ => None,
        };
        let mut out = vec![Vec2::zeros(); coeffs.len()];
        self.space_residual_into(scheme, coeffs, &nodal, gflux.as_ref(), &mut out);
        Ok(out)
    }

    pub(crate) fn space_residual_into(
        &self,
        scheme: SpaceScheme,
        coeffs: &[Vec2],
        nodal: &[Vec2],
        gflux: Option<&GlobalFluxField>,
        out: &mut [Vec2],
    ) {
        let n = self.nloc;
        let m = self.spec.degree();
        let g = self.phys.g;
        let friction = self.phys.n_manning > 0.0;
        let mut fl = [Vec2::zeros(); MAX_NODES];
        let mut src = [Vec2::zeros(); MAX_NODES];
        let mut hs = [Vec2::zeros(); MAX_NODES];
        for e in 0..self.mesh.n_elem() {
            let dx = self.mesh.element_length(e);
            let base = e * m;
            let u = &nodal[base..base + n];
            let mut with_source = true;
            match scheme {
                SpaceScheme::NonWb => {
                    for k in 0..n {
                        fl[k] = flux_unchecked(&u[k], g);
                        src[k] = Vec2::new(
                            0.0,
                            -g * u[k][0] * self.b_slope[base + k] + friction_unchecked(&u[k], &self.phys),
                        );
                    }
                }
                SpaceScheme::WbHs => {
                    for k in 0..n {
                        fl[k] = flux_v_unchecked(&u[k]);
                        src[k] = Vec2::new(0.0, friction_unchecked(&u[k], &self.phys));
                    }
                    with_source = friction;
                }
                SpaceScheme::WbGf => {
                    let gv = &gflux.expect("global flux computed for WB-GF").values;
                    fl[..n].copy_from_slice(&gv[base..base + n]);
                    with_source = false;
                }
            }
            for i in 0..n {
                let mut r = dot_vec(self.dv.row(i), &fl[..n]);
                if with_source {
                    r -= dx * dot_vec(self.mv.row(i), &src[..n]);
                }
                out[base + i] += r;
            }
            if scheme == SpaceScheme::WbHs {
                hs[..n].iter_mut().for_each(|v| *v = Vec2::zeros());
                self.hydrostatic_into(e, coeffs, &mut hs[..n]);
                for i in 0..n {
                    out[base + i] += hs[i];
                }
            }
        }
    }

    /// `Σ_K Σ_j (∫_K φ_i φ_j) d_j` for every DoF `i`.
    pub fn mass_apply(&self, d: &[Vec2], out: &mut [Vec2]) {
        let n = self.nloc;
        let m = self.spec.degree();
        out.iter_mut().for_each(|v| *v = Vec2::zeros());
        for e in 0..self.mesh.n_elem() {
            let dx = self.mesh.element_length(e);
            let base = e * m;
            let de = &d[base..base + n];
            for i in 0..n {
                out[base + i] += dx * dot_vec(self.mref.row(i), de);
            }
        }
    }

    /// Whether the consistent mass matrix equals the lumped one.
    pub fn mass_is_diagonal(&self) -> bool {
        let n = self.nloc;
        (0..n).all(|i| (0..n).all(|j| i == j || self.mref.get(i, j) == 0.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::BasisFamily;
    use crate::mesh::build_uniform_mesh;
    use crate::physics::GRAVITY;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn disc(spec: BasisSpec, n_elem: usize, bathy: Bathymetry, n_manning: f64) -> Discretization {
        let mesh = build_uniform_mesh(0.0, 25.0, n_elem, &spec).unwrap();
        Discretization::new(spec, mesh, PhysParams::new(GRAVITY, n_manning).unwrap(), bathy).unwrap()
    }

    fn rest_state(d: &Discretization, eta: f64) -> Vec<Vec2> {
        let nodal: Vec<Vec2> = d.bathymetry_nodal().iter().map(|b| Vec2::new(eta - b, 0.0)).collect();
        d.coefficients(&nodal)
    }

    fn max_norm(v: &[Vec2]) -> f64 {
        v.iter().map(|x| x.amax()).fold(0.0, f64::max)
    }

    #[test]
    fn wb_residuals_vanish_at_rest() {
        for spec in BasisSpec::all() {
            for bathy in [Bathymetry::SmoothBump, Bathymetry::C0Parabola] {
                let d = disc(spec, 20, bathy, 0.0);
                let u = rest_state(&d, 0.5);
                for s in [SpaceScheme::WbHs, SpaceScheme::WbGf] {
                    let r = d.space_residual(s, &u).unwrap();
                    let scale = GRAVITY * 0.25;
                    assert!(max_norm(&r) <= 1e-13 * scale, "{spec} {s:?} {}", max_norm(&r));
                }
            }
        }
    }

    #[test]
    fn nonwb_residual_nonzero_at_rest() {
        let d = disc(BasisSpec::new(BasisFamily::Bernstein, 4).unwrap(), 100, Bathymetry::C0Parabola, 0.0);
        let r = d.space_residual(SpaceScheme::NonWb, &rest_state(&d, 0.5)).unwrap();
        assert!(max_norm(&r) > 1e-6);
    }

    #[test]
    fn constant_state_flat_bottom() {
        for spec in BasisSpec::all() {
            let d = disc(spec, 6, Bathymetry::Flat, 0.0);
            let u = vec![Vec2::new(1.3, 0.7); d.n_dofs()];
            for s in [SpaceScheme::NonWb, SpaceScheme::WbHs, SpaceScheme::WbGf] {
                assert!(max_norm(&d.space_residual(s, &u).unwrap()) < 1e-13);
            }
        }
    }

    #[test]
    fn global_flux_at_rest_is_constant() {
        let eta = 0.5;
        for spec in BasisSpec::all() {
            for bathy in [Bathymetry::SmoothBump, Bathymetry::C0Parabola] {
                let d = disc(spec, 16, bathy, 0.0);
                let gf = d.global_flux(&rest_state(&d, eta)).unwrap();
                let b0 = d.bathymetry_nodal()[0];
                let closed = 0.5 * GRAVITY * (eta * eta + b0 * b0 - 2.0 * eta * b0);
                for v in &gf.values {
                    assert!(v[0] == 0.0);
                    assert!((v[1] - closed).abs() <= 1e-12 * GRAVITY * eta * eta);
                }
            }
        }
    }

    #[test]
    fn global_flux_flat_bottom_is_flux() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let d = disc(BasisSpec::new(BasisFamily::LagrangeGaussLobatto, 3).unwrap(), 5, Bathymetry::Flat, 0.0);
        let u: Vec<Vec2> = (0..d.n_dofs()).map(|_| Vec2::new(rng.gen_range(0.5..2.0), rng.gen_range(-1.0..1.0))).collect();
        let gf = d.global_flux(&u).unwrap();
        for (gv, ui) in gf.values.iter().zip(&u) {
            assert_eq!(*gv, flux_unchecked(ui, GRAVITY));
        }
    }

    #[test]
    fn global_flux_first_component_is_momentum() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let d = disc(BasisSpec::new(BasisFamily::Bernstein, 3).unwrap(), 7, Bathymetry::SmoothBump, 0.03);
        let u: Vec<Vec2> = (0..d.n_dofs()).map(|_| Vec2::new(rng.gen_range(0.5..2.0), rng.gen_range(-1.0..1.0))).collect();
        let nodal = d.nodal_values(&u);
        let gf = d.global_flux(&u).unwrap();
        for (gv, ui) in gf.values.iter().zip(&nodal) {
            assert_eq!(gv[0], ui[1]);
        }
    }

    #[test]
    fn hydrostatic_term_examples() {
        // one linear element on [0, 1] with H = x, B = 0, g = 1
        let spec = BasisSpec::new(BasisFamily::LagrangeEquispaced, 1).unwrap();
        let mesh = Mesh1D::from_bounds(vec![0.0, 1.0, 2.0], &spec).unwrap();
        let d = Discretization::new(spec, mesh, PhysParams::new(1.0, 0.0).unwrap(), Bathymetry::Flat).unwrap();
        let u = vec![Vec2::new(1e-300, 0.0), Vec2::new(1.0, 0.0), Vec2::new(2.0, 0.0)];
        let t = d.hydrostatic_term(0, &u);
        assert!((t[0][1] - 1.0 / 6.0).abs() < 1e-15);
        assert!((t[1][1] - 1.0 / 3.0).abs() < 1e-15);

        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for spec in BasisSpec::all() {
            let d = disc(spec, 4, Bathymetry::Flat, 0.0);
            let u: Vec<Vec2> = (0..d.n_dofs()).map(|_| Vec2::new(rng.gen_range(0.5..2.0), 0.0)).collect();
            for e in 0..4 {
                let s: f64 = d.hydrostatic_term(e, &u).iter().map(|v| v[1]).sum();
                let dofs = d.mesh().elem_dofs(e);
                let (hl, hr) = (u[dofs.start][0], u[dofs.end - 1][0]);
                let exact = 0.5 * GRAVITY * (hr * hr - hl * hl);
                assert!((s - exact).abs() <= 1e-13 * exact.abs().max(1.0), "{spec}");
            }
        }
    }

    #[test]
    fn residual_telescopes_to_boundary_flux() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for spec in BasisSpec::all() {
            let d = disc(spec, 9, Bathymetry::Flat, 0.0);
            let u: Vec<Vec2> = (0..d.n_dofs())
                .map(|_| Vec2::new(rng.gen_range(0.5..2.0), rng.gen_range(-1.0..1.0)))
                .collect();
            let nodal = d.nodal_values(&u);
            let last = nodal.len() - 1;
            let expect = flux_unchecked(&nodal[last], GRAVITY) - flux_unchecked(&nodal[0], GRAVITY);
            for s in [SpaceScheme::NonWb, SpaceScheme::WbGf] {
                let r = d.space_residual(s, &u).unwrap();
                let total: Vec2 = r.iter().sum();
                assert!((total - expect).norm() <= 1e-12 * expect.norm().max(1.0), "{spec} {s:?}");
            }
        }
    }

    #[test]
    fn rejects_dry_states() {
        let d = disc(BasisSpec::new(BasisFamily::LagrangeGaussLobatto, 2).unwrap(), 4, Bathymetry::Flat, 0.0);
        let mut u = vec![Vec2::new(1.0, 0.0); d.n_dofs()];
        u[3] = Vec2::new(-0.1, 0.0);
        assert!(matches!(
            d.space_residual(SpaceScheme::WbHs, &u),
            Err(Error::State { dof: 3, .. })
        ));
    }

    #[test]
    fn mass_apply_of_ones_gives_lumped() {
        for spec in BasisSpec::all() {
            let d = disc(spec, 5, Bathymetry::Flat, 0.0);
            let ones = vec![Vec2::new(1.0, 1.0); d.n_dofs()];
            let mut out = vec![Vec2::zeros(); d.n_dofs()];
            d.mass_apply(&ones, &mut out);
            for (o, c) in out.iter().zip(d.lumped_masses()) {
                assert!((o[0] - c).abs() < 1e-13);
            }
            assert_eq!(d.mass_is_diagonal(), spec.family() == BasisFamily::LagrangeGaussLobatto);
        }
    }
}
