//! Continuous interior penalty terms `ST_i` on interior faces.
//!
//! Every scheme has the form `Σ_f Σ_r α_{f,r} ⟦∂ʳφ_i⟧ X_{f,r}` where the
//! face vector `X_{f,r}` is a jump of some derivative, possibly multiplied by
//! a 2×2 matrix frozen at the face node. Jumps are left minus right.

use serde::{Deserialize, Serialize};

use crate::basis::BasisSpec;
use crate::error::{Error, Result};
use crate::mesh::Face;
use crate::physics::{
    abs_jacobian_inverse_unchecked, entropy_jac_af_unchecked, entropy_vars_unchecked,
    jacobian_unchecked, spectral_radius_unchecked, Vec2, DEFAULT_ENTROPY_FIX,
};
use crate::space::{dot, dot_vec, Discretization, GlobalFluxField};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StabScheme {
    /// Conserved variables.
    Jc,
    /// Total height and momentum.
    Jt,
    /// Entropy variables.
    Je,
    /// Space residual.
    Jr,
    /// Global flux.
    Jg,
}

impl StabScheme {
    pub const ALL: [StabScheme; 5] =
        [StabScheme::Jc, StabScheme::Jt, StabScheme::Je, StabScheme::Jr, StabScheme::Jg];

    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "jc" => Ok(StabScheme::Jc),
            "jt" => Ok(StabScheme::Jt),
            "je" => Ok(StabScheme::Je),
            "jr" => Ok(StabScheme::Jr),
            "jg" => Ok(StabScheme::Jg),
            other => Err(Error::Config(format!("unknown stabilization '{other}'"))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            StabScheme::Jc => "jc",
            StabScheme::Jt => "jt",
            StabScheme::Je => "je",
            StabScheme::Jr => "jr",
            StabScheme::Jg => "jg",
        }
    }

    /// Highest derivative order penalized.
    pub fn max_order(self) -> usize {
        match self {
            StabScheme::Jc | StabScheme::Jt => 2,
            _ => 1,
        }
    }
}

/// Default `(δ₁, δ₂)` per polynomial degree.
pub fn default_deltas(degree: usize) -> (f64, f64) {
    match degree {
        1 => (0.05, 0.5),
        2 => (0.3, 0.2),
        3 => (0.15, 0.2),
        _ => (0.5, 0.01),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StabParams {
    pub scheme: StabScheme,
    pub delta1: f64,
    pub delta2: f64,
    /// Entropy-fix fraction used in `|J|⁻¹`.
    pub entropy_fix: f64,
}

impl StabParams {
    pub fn with_defaults(scheme: StabScheme, spec: &BasisSpec) -> Self {
        let (delta1, delta2) = default_deltas(spec.degree());
        StabParams { scheme, delta1, delta2, entropy_fix: DEFAULT_ENTROPY_FIX }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta1 >= 0.0 && self.delta2 >= 0.0) {
            return Err(Error::Config("stabilization coefficients must be non-negative".into()));
        }
        if !(self.entropy_fix > 0.0) {
            return Err(Error::Config("entropy fix fraction must be positive".into()));
        }
        Ok(())
    }

    fn delta(&self, r: usize) -> f64 {
        if r == 1 {
            self.delta1
        } else {
            self.delta2
        }
    }
}

/// `α = δ ρ̄ h^{2r}`.
pub fn stab_coefficient(delta: f64, rho: f64, h_f: f64, r: usize) -> f64 {
    delta * rho * h_f.powi(2 * r as i32)
}

/// Penalty vector of one face for one derivative order, with its coefficient.
#[derive(Debug, Clone, Copy)]
struct FaceTerm {
    alpha: f64,
    r: usize,
    x: Vec2,
}

impl Discretization {
    /// `h_f = (½ Σ_{i ∈ K_L ∪ K_R} |⟦φ_i'⟧|)⁻¹` for every interior face.
    pub fn face_length_scales(&self) -> Vec<f64> {
        let n = self.nloc;
        self.mesh
            .faces()
            .iter()
            .map(|f| {
                let dl = self.mesh.element_length(f.left_elem);
                let dr = self.mesh.element_length(f.right_elem);
                let l = &self.end_d[1][1];
                let r = &self.end_d[0][1];
                let mut s = 0.0;
                for a in 0..n - 1 {
                    s += (l[a] / dl).abs();
                }
                s += (l[n - 1] / dl - r[0] / dr).abs();
                for b in 1..n {
                    s += (r[b] / dr).abs();
                }
                2.0 / s
            })
            .collect()
    }

    /// r-th derivative jumps of a nodal field at a face.
    #[inline]
    fn nodal_jump(&self, f: &Face, nodal: &[Vec2], r: usize) -> Vec2 {
        let m = self.spec.degree();
        let n = self.nloc;
        let dl = self.mesh.element_length(f.left_elem);
        let dr = self.mesh.element_length(f.right_elem);
        let left = dot_vec(&self.end_dv[1][r], &nodal[f.left_elem * m..f.left_elem * m + n]);
        let right = dot_vec(&self.end_dv[0][r], &nodal[f.right_elem * m..f.right_elem * m + n]);
        left / dl.powi(r as i32) - right / dr.powi(r as i32)
    }

    #[inline]
    fn scalar_coef_jump(&self, f: &Face, coef: &[f64], r: usize) -> f64 {
        let m = self.spec.degree();
        let n = self.nloc;
        let dl = self.mesh.element_length(f.left_elem);
        let dr = self.mesh.element_length(f.right_elem);
        let left = dot(&self.end_d[1][r], &coef[f.left_elem * m..f.left_elem * m + n]);
        let right = dot(&self.end_d[0][r], &coef[f.right_elem * m..f.right_elem * m + n]);
        left / dl.powi(r as i32) - right / dr.powi(r as i32)
    }

    fn face_terms(
        &self,
        stab: &StabParams,
        nodal: &[Vec2],
        gflux: Option<&GlobalFluxField>,
        h_f: &[f64],
        out: &mut Vec<(usize, FaceTerm)>,
    ) -> Result<()> {
        let g = self.phys.g;
        let w_nodal: Vec<Vec2>;
        let z: &[Vec2] = match stab.scheme {
            StabScheme::Je => {
                w_nodal = nodal
                    .iter()
                    .zip(&self.b_nodal)
                    .map(|(u, &b)| entropy_vars_unchecked(u, b, g))
                    .collect();
                &w_nodal
            }
            StabScheme::Jg => {
                &gflux
                    .ok_or_else(|| Error::Config("jg stabilization needs the global flux".into()))?
                    .values
            }
            _ => nodal,
        };
        out.clear();
        for (k, f) in self.mesh.faces().iter().enumerate() {
            let uf = nodal[f.shared_dof];
            let rho = spectral_radius_unchecked(&uf, g);
            for r in 1..=stab.scheme.max_order() {
                let alpha = stab_coefficient(stab.delta(r), rho, h_f[k], r);
                let jump = self.nodal_jump(f, z, r);
                let x = match stab.scheme {
                    StabScheme::Jc => jump,
                    StabScheme::Jt => jump + Vec2::new(self.scalar_coef_jump(f, &self.b_coef, r), 0.0),
                    StabScheme::Je => entropy_jac_af_unchecked(&uf, g) * jump,
                    StabScheme::Jr => {
                        let j = jacobian_unchecked(&uf, g);
                        let bf = abs_jacobian_inverse_unchecked(&uf, g, stab.entropy_fix);
                        let db = self.scalar_coef_jump(f, &self.b_coef, 1);
                        j * bf * (j * jump + Vec2::new(0.0, g * uf[0] * db))
                    }
                    StabScheme::Jg => {
                        let j = jacobian_unchecked(&uf, g);
                        let bf = abs_jacobian_inverse_unchecked(&uf, g, stab.entropy_fix);
                        j * bf * jump
                    }
                };
                out.push((k, FaceTerm { alpha, r, x }));
            }
        }
        Ok(())
    }

    /// Assembled stabilization `ST_i` at every DoF.
    pub fn stabilization(
        &self,
        stab: &StabParams,
        coeffs: &[Vec2],
        gflux: Option<&GlobalFluxField>,
    ) -> Result<Vec<Vec2>> {
        let nodal = self.checked_nodal(coeffs)?;
        let mut out = vec![Vec2::zeros(); coeffs.len()];
        let h_f = self.face_length_scales();
        self.stabilization_into(stab, &nodal, gflux, &h_f, &mut out)?;
        Ok(out)
    }

    pub(crate) fn stabilization_into(
        &self,
        stab: &StabParams,
        nodal: &[Vec2],
        gflux: Option<&GlobalFluxField>,
        h_f: &[f64],
        out: &mut [Vec2],
    ) -> Result<()> {
        let mut terms = Vec::with_capacity(self.mesh.faces().len() * 2);
        self.face_terms(stab, nodal, gflux, h_f, &mut terms)?;
        let m = self.spec.degree();
        let n = self.nloc;
        let faces = self.mesh.faces();
        for (k, t) in terms {
            let f = &faces[k];
            let sl = self.mesh.element_length(f.left_elem).powi(t.r as i32).recip();
            let sr = self.mesh.element_length(f.right_elem).powi(t.r as i32).recip();
            let ax = t.alpha * t.x;
            let bl = f.left_elem * m;
            for a in 0..n {
                out[bl + a] += (self.end_d[1][t.r][a] * sl) * ax;
            }
            let br = f.right_elem * m;
            for b in 0..n {
                out[br + b] -= (self.end_d[0][t.r][b] * sr) * ax;
            }
        }
        Ok(())
    }

    /// Residual-distribution split `ST_i^K`: one row of local terms per
    /// element, using the one-sided test derivative `∂ʳφ_i|_K` and the jump
    /// taken from inside `K`.
    pub fn rd_split_stabilization(
        &self,
        stab: &StabParams,
        coeffs: &[Vec2],
        gflux: Option<&GlobalFluxField>,
    ) -> Result<Vec<Vec<Vec2>>> {
        let nodal = self.checked_nodal(coeffs)?;
        let h_f = self.face_length_scales();
        let mut terms = Vec::new();
        self.face_terms(stab, &nodal, gflux, &h_f, &mut terms)?;
        let n = self.nloc;
        let mut out = vec![vec![Vec2::zeros(); n]; self.mesh.n_elem()];
        let faces = self.mesh.faces();
        for (k, t) in terms {
            let f = &faces[k];
            let ax = t.alpha * t.x;
            // K = left element: jump from inside is left minus right
            let sl = self.mesh.element_length(f.left_elem).powi(t.r as i32).recip();
            for a in 0..n {
                out[f.left_elem][a] += (self.end_d[1][t.r][a] * sl) * ax;
            }
            // K = right element: jump from inside flips sign
            let sr = self.mesh.element_length(f.right_elem).powi(t.r as i32).recip();
            for b in 0..n {
                out[f.right_elem][b] -= (self.end_d[0][t.r][b] * sr) * ax;
            }
        }
        Ok(out)
    }
}
