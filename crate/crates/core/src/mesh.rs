//! One-dimensional tessellation with C⁰ global numbering.

use crate::basis::{eval_basis_into, BasisSpec};
use crate::error::{Error, Result};

/// Interior face shared by elements `left_elem` and `left_elem + 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Face {
    pub index: usize,
    pub left_elem: usize,
    pub right_elem: usize,
    pub x_f: f64,
    pub shared_dof: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh1D {
    pub x_l: f64,
    pub x_r: f64,
    degree: usize,
    element_bounds: Vec<f64>,
    dof_coords: Vec<f64>,
    faces: Vec<Face>,
}

/// Uniform mesh of `n_elem` elements carrying the local nodes of `spec`.
pub fn build_uniform_mesh(x_l: f64, x_r: f64, n_elem: usize, spec: &BasisSpec) -> Result<Mesh1D> {
    if !(x_r > x_l) {
        return Err(Error::Config(format!("empty domain [{x_l}, {x_r}]")));
    }
    if n_elem < 2 {
        return Err(Error::Config(format!(
            "at least two elements are needed, got {n_elem}"
        )));
    }
    let dx = (x_r - x_l) / n_elem as f64;
    let mut bounds: Vec<f64> = (0..=n_elem).map(|k| x_l + k as f64 * dx).collect();
    bounds[n_elem] = x_r;
    Mesh1D::from_bounds(bounds, spec)
}

impl Mesh1D {
    /// Mesh from sorted element endpoints.
    pub fn from_bounds(element_bounds: Vec<f64>, spec: &BasisSpec) -> Result<Mesh1D> {
        if element_bounds.len() < 3 {
            return Err(Error::Config("at least two elements are needed".into()));
        }
        if element_bounds.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Config("element bounds must be strictly increasing".into()));
        }
        let m = spec.degree();
        let nodes = spec.nodes();
        let n_elem = element_bounds.len() - 1;
        let mut dof_coords = Vec::with_capacity(n_elem * m + 1);
        for e in 0..n_elem {
            let (a, b) = (element_bounds[e], element_bounds[e + 1]);
            for &xi in &nodes[..m] {
                dof_coords.push(a + (b - a) * xi);
            }
        }
        dof_coords.push(element_bounds[n_elem]);
        // face nodes are stored exactly as the element bounds
        for e in 0..=n_elem {
            dof_coords[e * m] = element_bounds[e];
        }
        let faces = (1..n_elem)
            .map(|k| Face {
                index: k - 1,
                left_elem: k - 1,
                right_elem: k,
                x_f: element_bounds[k],
                shared_dof: k * m,
            })
            .collect();
        Ok(Mesh1D {
            x_l: element_bounds[0],
            x_r: element_bounds[n_elem],
            degree: m,
            element_bounds,
            dof_coords,
            faces,
        })
    }

    pub fn n_elem(&self) -> usize {
        self.element_bounds.len() - 1
    }

    pub fn n_dofs(&self) -> usize {
        self.dof_coords.len()
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn element_bounds(&self) -> &[f64] {
        &self.element_bounds
    }

    pub fn dof_coords(&self) -> &[f64] {
        &self.dof_coords
    }

    pub fn faces(&self) -> &[Face] {
        &self.faces
    }

    pub fn element_length(&self, e: usize) -> f64 {
        self.element_bounds[e + 1] - self.element_bounds[e]
    }

    /// Global index of local DoF `j` of element `e`.
    #[inline]
    pub fn dof(&self, e: usize, j: usize) -> usize {
        e * self.degree + j
    }

    /// Global DoF indices of element `e`.
    pub fn elem_dofs(&self, e: usize) -> std::ops::Range<usize> {
        e * self.degree..e * self.degree + self.degree + 1
    }

    /// Smallest element length.
    pub fn min_element_length(&self) -> f64 {
        (0..self.n_elem())
            .map(|e| self.element_length(e))
            .fold(f64::INFINITY, f64::min)
    }

    /// Element containing `x`, preferring the left one at shared bounds.
    pub fn locate(&self, x: f64) -> usize {
        let b = &self.element_bounds;
        let k = b.partition_point(|&v| v < x);
        k.saturating_sub(1).min(self.n_elem() - 1)
    }
}

/// r-th spatial derivative at the face using only the polynomial of the
/// requested side.
pub fn one_sided_eval(
    mesh: &Mesh1D,
    spec: &BasisSpec,
    coeffs: &[f64],
    face: &Face,
    side: Side,
    r: usize,
) -> f64 {
    let (e, xi) = match side {
        Side::Left => (face.left_elem, 1.0),
        Side::Right => (face.right_elem, 0.0),
    };
    let mut phi = vec![0.0; spec.n_local()];
    eval_basis_into(spec, r, xi, &mut phi);
    let scale = mesh.element_length(e).powi(r as i32).recip();
    mesh.elem_dofs(e)
        .zip(&phi)
        .map(|(i, p)| coeffs[i] * p)
        .sum::<f64>()
        * scale
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::BasisFamily;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn spec(f: BasisFamily, m: usize) -> BasisSpec {
        BasisSpec::new(f, m).unwrap()
    }

    #[test]
    fn counts() {
        let m4 = build_uniform_mesh(0.0, 25.0, 100, &spec(BasisFamily::Bernstein, 4)).unwrap();
        assert_eq!(m4.n_dofs(), 401);
        assert_eq!(m4.faces().len(), 99);
        let m1 = build_uniform_mesh(0.0, 25.0, 100, &spec(BasisFamily::LagrangeEquispaced, 1))
            .unwrap();
        assert_eq!(m1.n_dofs(), 101);
        assert!(build_uniform_mesh(0.0, 25.0, 1, &spec(BasisFamily::Bernstein, 2)).is_err());
        assert!(build_uniform_mesh(1.0, 1.0, 4, &spec(BasisFamily::Bernstein, 2)).is_err());
    }

    #[test]
    fn layout_invariants() {
        for s in BasisSpec::all() {
            let m = build_uniform_mesh(0.0, 25.0, 7, &s).unwrap();
            assert!(m.dof_coords().windows(2).all(|w| w[1] > w[0]));
            let total: f64 = (0..m.n_elem()).map(|e| m.element_length(e)).sum();
            assert!((total - 25.0).abs() < 1e-13);
            for f in m.faces() {
                assert_eq!(f.right_elem, f.left_elem + 1);
                assert_eq!(m.dof_coords()[f.shared_dof], f.x_f);
                assert_eq!(m.elem_dofs(f.left_elem).last(), Some(f.shared_dof));
                assert_eq!(m.elem_dofs(f.right_elem).next(), Some(f.shared_dof));
            }
        }
    }

    #[test]
    fn linear_field_has_no_derivative_jump() {
        let s = spec(BasisFamily::LagrangeEquispaced, 1);
        let m = build_uniform_mesh(0.0, 3.0, 6, &s).unwrap();
        let c: Vec<f64> = m.dof_coords().to_vec();
        for f in m.faces() {
            let l = one_sided_eval(&m, &s, &c, f, Side::Left, 1);
            let r = one_sided_eval(&m, &s, &c, f, Side::Right, 1);
            assert!((l - 1.0).abs() < 1e-14 && (r - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn continuity_of_values() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for s in BasisSpec::all() {
            let m = build_uniform_mesh(0.0, 25.0, 5, &s).unwrap();
            let c: Vec<f64> = (0..m.n_dofs()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            for f in m.faces() {
                let l = one_sided_eval(&m, &s, &c, f, Side::Left, 0);
                let r = one_sided_eval(&m, &s, &c, f, Side::Right, 0);
                assert!((l - r).abs() <= 1e-14);
            }
        }
    }

    #[test]
    fn quadratic_derivative_jump_matches_monomial_algebra() {
        // P2 on two elements [0,1], [1,2]; each local polynomial is rebuilt in
        // monomial form from its three nodal values and differentiated.
        let s = spec(BasisFamily::LagrangeEquispaced, 2);
        let m = build_uniform_mesh(0.0, 2.0, 2, &s).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let c: Vec<f64> = (0..5).map(|_| rng.gen_range(-2.0..2.0)).collect();
            // p(x) = a + b t + d t², t = x - x0, through (0,c0),(0.5,c1),(1,c2)
            let slope_at_end = |v: &[f64]| {
                let d = 2.0 * (v[2] - 2.0 * v[1] + v[0]);
                let b = v[2] - v[0] - d;
                (b, d)
            };
            let (bl, dl) = slope_at_end(&c[0..3]);
            let (br, _) = slope_at_end(&c[2..5]);
            let left = bl + 2.0 * dl;
            let right = br;
            let f = &m.faces()[0];
            let l = one_sided_eval(&m, &s, &c, f, Side::Left, 1);
            let r = one_sided_eval(&m, &s, &c, f, Side::Right, 1);
            assert!(((l - r) - (left - right)).abs() < 1e-12);
        }
    }

    #[test]
    fn locate_elements() {
        let s = spec(BasisFamily::Bernstein, 2);
        let m = build_uniform_mesh(0.0, 10.0, 10, &s).unwrap();
        assert_eq!(m.locate(0.0), 0);
        assert_eq!(m.locate(0.5), 0);
        assert_eq!(m.locate(1.0), 0);
        assert_eq!(m.locate(1.2), 1);
        assert_eq!(m.locate(10.0), 9);
    }
}
