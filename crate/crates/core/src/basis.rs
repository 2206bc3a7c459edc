//! Polynomial bases on the reference element `[0, 1]` and the quadrature
//! rules paired with them.
//!
//! Three families are supported, all with the endpoints among their nodes so
//! that the global space is C⁰:
//!
//! * Bernstein polynomials `B_{i,M}(ξ) = C(M,i) ξ^i (1-ξ)^{M-i}`. Their
//!   coefficients are not point values; point data is converted by
//!   collocation at the equispaced nodes.
//! * Lagrange polynomials on equispaced nodes (degree 4 is rejected, the
//!   resulting scheme is unstable).
//! * Lagrange polynomials on Gauss–Lobatto nodes, integrated with the
//!   matching Gauss–Lobatto rule so that the mass matrix is diagonal.

use std::fmt;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Highest supported polynomial degree.
pub const MAX_DEGREE: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BasisFamily {
    #[serde(rename = "b")]
    Bernstein,
    #[serde(rename = "p")]
    LagrangeEquispaced,
    #[serde(rename = "pgl")]
    LagrangeGaussLobatto,
}

impl BasisFamily {
    pub fn short_name(self) -> &'static str {
        match self {
            BasisFamily::Bernstein => "B",
            BasisFamily::LagrangeEquispaced => "P",
            BasisFamily::LagrangeGaussLobatto => "PGL",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "b" | "bernstein" => Ok(BasisFamily::Bernstein),
            "p" | "lagrange" | "equispaced" => Ok(BasisFamily::LagrangeEquispaced),
            "pgl" | "gl" | "lobatto" => Ok(BasisFamily::LagrangeGaussLobatto),
            other => Err(Error::Config(format!("unknown basis family '{other}'"))),
        }
    }

    pub const ALL: [BasisFamily; 3] = [
        BasisFamily::Bernstein,
        BasisFamily::LagrangeEquispaced,
        BasisFamily::LagrangeGaussLobatto,
    ];
}

/// Basis family together with its polynomial degree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BasisSpec {
    family: BasisFamily,
    degree: usize,
}

impl BasisSpec {
    pub fn new(family: BasisFamily, degree: usize) -> Result<Self> {
        if degree == 0 || degree > MAX_DEGREE {
            return Err(Error::Config(format!(
                "basis degree must lie in 1..={MAX_DEGREE}, got {degree}"
            )));
        }
        if family == BasisFamily::LagrangeEquispaced && degree == 4 {
            return Err(Error::Config(
                "equispaced Lagrange basis of degree 4 is not supported (unstable)".into(),
            ));
        }
        Ok(BasisSpec { family, degree })
    }

    pub fn family(&self) -> BasisFamily {
        self.family
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Number of local basis functions, `M + 1`.
    pub fn n_local(&self) -> usize {
        self.degree + 1
    }

    /// Whether basis coefficients coincide with nodal values.
    pub fn is_nodal(&self) -> bool {
        self.family != BasisFamily::Bernstein || self.degree == 1
    }

    /// Local node layout in `[0, 1]`, strictly increasing, endpoints included.
    pub fn nodes(&self) -> Vec<f64> {
        match self.family {
            BasisFamily::Bernstein | BasisFamily::LagrangeEquispaced => equispaced(self.degree),
            BasisFamily::LagrangeGaussLobatto => gauss_lobatto(self.degree + 1).points,
        }
    }

    /// Every admissible specification, in a stable order.
    pub fn all() -> Vec<BasisSpec> {
        let mut out = Vec::new();
        for family in BasisFamily::ALL {
            for degree in 1..=MAX_DEGREE {
                if let Ok(spec) = BasisSpec::new(family, degree) {
                    out.push(spec);
                }
            }
        }
        out
    }
}

impl fmt::Display for BasisSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.family.short_name(), self.degree)
    }
}

fn equispaced(degree: usize) -> Vec<f64> {
    (0..=degree).map(|k| k as f64 / degree as f64).collect()
}

/// Quadrature rule on the unit interval.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
    /// Highest monomial degree integrated exactly.
    pub exactness_degree: usize,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.points
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }

    /// The same rule mapped onto `[a, b]`; weights absorb the length.
    pub fn mapped(&self, a: f64, b: f64) -> QuadratureRule {
        let len = b - a;
        QuadratureRule {
            points: self.points.iter().map(|&x| a + len * x).collect(),
            weights: self.weights.iter().map(|&w| w * len).collect(),
            exactness_degree: self.exactness_degree,
        }
    }
}

/// Legendre polynomial `P_n(x)` and its derivative on `[-1, 1]`.
fn legendre(n: usize, x: f64) -> (f64, f64, f64) {
    // returns (P_n, P_{n-1}, P'_n)
    if n == 0 {
        return (1.0, 0.0, 0.0);
    }
    let mut p_prev = 1.0;
    let mut p = x;
    for k in 2..=n {
        let kf = k as f64;
        let p_next = ((2.0 * kf - 1.0) * x * p - (kf - 1.0) * p_prev) / kf;
        p_prev = p;
        p = p_next;
    }
    let dp = if (x * x - 1.0).abs() < 1e-300 {
        // P'_n(±1) = (±1)^{n-1} n(n+1)/2
        let s = if x > 0.0 || n % 2 == 1 { 1.0 } else { -1.0 };
        s * (n * (n + 1)) as f64 / 2.0
    } else {
        n as f64 * (x * p - p_prev) / (x * x - 1.0)
    };
    (p, p_prev, dp)
}

/// `n`-point Gauss–Legendre rule on `[0, 1]` (exact to degree `2n-1`).
pub fn gauss_legendre(n: usize) -> QuadratureRule {
    assert!(n >= 1, "Gauss-Legendre rule needs at least one point");
    let mut xs = vec![0.0; n];
    let mut ws = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        // root i counted from x = +1 downwards
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        for _ in 0..100 {
            let (p, _, dp) = legendre(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, _, dp) = legendre(n, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        xs[i] = -x;
        xs[n - 1 - i] = x;
        ws[i] = w;
        ws[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        xs[n / 2] = 0.0;
    }
    QuadratureRule {
        points: xs.iter().map(|&x| 0.5 * (x + 1.0)).collect(),
        weights: ws.iter().map(|&w| 0.5 * w).collect(),
        exactness_degree: 2 * n - 1,
    }
}

/// `n`-point Gauss–Lobatto rule on `[0, 1]` (exact to degree `2n-3`).
pub fn gauss_lobatto(n: usize) -> QuadratureRule {
    assert!(n >= 2, "Gauss-Lobatto rule needs at least two points");
    let deg = n - 1;
    let degf = deg as f64;
    let mut xs = vec![0.0; n];
    let mut ws = vec![0.0; n];
    xs[0] = -1.0;
    xs[n - 1] = 1.0;
    let end_w = 2.0 / (degf * (degf + 1.0));
    ws[0] = end_w;
    ws[n - 1] = end_w;
    for i in 1..n.div_ceil(2) {
        // interior roots of P'_deg, from the right end inwards
        let mut x = (std::f64::consts::PI * i as f64 / degf).cos();
        for _ in 0..100 {
            let (p, _, dp) = legendre(deg, x);
            let d2p = (2.0 * x * dp - degf * (degf + 1.0) * p) / (1.0 - x * x);
            let dx = dp / d2p;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (p, _, _) = legendre(deg, x);
        let w = 2.0 / (degf * (degf + 1.0) * p * p);
        xs[i] = -x;
        xs[n - 1 - i] = x;
        ws[i] = w;
        ws[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        xs[n / 2] = 0.0;
    }
    QuadratureRule {
        points: xs.iter().map(|&x| 0.5 * (x + 1.0)).collect(),
        weights: ws.iter().map(|&w| 0.5 * w).collect(),
        exactness_degree: 2 * n - 3,
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    (0..k).fold(1.0, |acc, j| acc * (n - j) as f64 / (j + 1) as f64)
}

fn bernstein(degree: usize, i: isize, xi: f64) -> f64 {
    if i < 0 || i as usize > degree {
        return 0.0;
    }
    let i = i as usize;
    binomial(degree, i) * xi.powi(i as i32) * (1.0 - xi).powi((degree - i) as i32)
}

/// Writes `d^r φ_i / dξ^r (ξ)` for every local function into `out`.
///
/// No argument checking; `out.len()` must equal `M + 1`.
pub(crate) fn eval_basis_into(spec: &BasisSpec, r: usize, xi: f64, out: &mut [f64]) {
    let m = spec.degree;
    match spec.family {
        BasisFamily::Bernstein => {
            let mf = m as f64;
            for (i, o) in out.iter_mut().enumerate() {
                let i = i as isize;
                *o = match r {
                    0 => bernstein(m, i, xi),
                    1 => mf * (bernstein(m - 1, i - 1, xi) - bernstein(m - 1, i, xi)),
                    _ => {
                        if m < 2 {
                            0.0
                        } else {
                            mf * (mf - 1.0)
                                * (bernstein(m - 2, i - 2, xi) - 2.0 * bernstein(m - 2, i - 1, xi)
                                    + bernstein(m - 2, i, xi))
                        }
                    }
                };
            }
        }
        _ => {
            let nodes = spec.nodes();
            lagrange_into(&nodes, r, xi, out);
        }
    }
}

fn lagrange_into(nodes: &[f64], r: usize, xi: f64, out: &mut [f64]) {
    let n = nodes.len();
    for i in 0..n {
        let denom: f64 = (0..n)
            .filter(|&k| k != i)
            .map(|k| nodes[i] - nodes[k])
            .product();
        let prod_except = |skip: &[usize]| -> f64 {
            (0..n)
                .filter(|k| *k != i && !skip.contains(k))
                .map(|k| xi - nodes[k])
                .product()
        };
        out[i] = match r {
            0 => prod_except(&[]) / denom,
            1 => (0..n).filter(|&a| a != i).map(|a| prod_except(&[a])).sum::<f64>() / denom,
            _ => {
                let mut s = 0.0;
                for a in (0..n).filter(|&a| a != i) {
                    for b in (0..n).filter(|&b| b != i && b != a) {
                        s += prod_except(&[a, b]);
                    }
                }
                s / denom
            }
        };
    }
}

/// Values (`r = 0`) or reference derivatives (`r = 1, 2`) of all local basis
/// functions at `ξ`.
pub fn eval_basis(spec: &BasisSpec, r: usize, xi: f64) -> Result<Vec<f64>> {
    if r > 2 {
        return Err(Error::InputDomain(format!(
            "derivative order must be 0, 1 or 2, got {r}"
        )));
    }
    if !(0.0..=1.0).contains(&xi) {
        return Err(Error::InputDomain(format!(
            "local coordinate must lie in [0, 1], got {xi}"
        )));
    }
    let mut out = vec![0.0; spec.n_local()];
    eval_basis_into(spec, r, xi, &mut out);
    Ok(out)
}

/// Element quadrature paired with a basis: Gauss–Lobatto on the basis nodes
/// for the Gauss–Lobatto family, `M + 1` point Gauss–Legendre otherwise.
pub fn quadrature_for(spec: &BasisSpec) -> QuadratureRule {
    match spec.family {
        BasisFamily::LagrangeGaussLobatto => gauss_lobatto(spec.degree + 1),
        _ => gauss_legendre(spec.degree + 1),
    }
}

/// Reference-element mass matrix `∫₀¹ φ_i φ_j dξ` under `quadrature_for`.
pub(crate) fn reference_mass(spec: &BasisSpec) -> DMatrix<f64> {
    let rule = quadrature_for(spec);
    let n = spec.n_local();
    let mut m = DMatrix::zeros(n, n);
    let mut phi = vec![0.0; n];
    for (&x, &w) in rule.points.iter().zip(&rule.weights) {
        eval_basis_into(spec, 0, x, &mut phi);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] += w * phi[i] * phi[j];
            }
        }
    }
    m
}

/// Lumped masses `C_i = h ∫₀¹ φ_i dξ` of one element.
pub fn lumped_mass(spec: &BasisSpec, h: f64) -> Result<Vec<f64>> {
    if !(h > 0.0) {
        return Err(Error::InputDomain(format!("element length must be positive, got {h}")));
    }
    let rule = quadrature_for(spec);
    let n = spec.n_local();
    let mut c = vec![0.0; n];
    let mut phi = vec![0.0; n];
    for (&x, &w) in rule.points.iter().zip(&rule.weights) {
        eval_basis_into(spec, 0, x, &mut phi);
        for (ci, p) in c.iter_mut().zip(&phi) {
            *ci += w * p * h;
        }
    }
    if let Some(bad) = c.iter().position(|&ci| ci <= 0.0) {
        return Err(Error::Config(format!(
            "{spec}: lumped mass of local dof {bad} is not positive ({}); explicit update ill-posed",
            c[bad]
        )));
    }
    Ok(c)
}

/// Element mass matrix `h ∫₀¹ φ_i φ_j dξ`.
pub fn local_mass_matrix(spec: &BasisSpec, h: f64) -> DMatrix<f64> {
    reference_mass(spec) * h
}

/// Collocation matrix `V[k][j] = φ_j(ξ_k)` at the local nodes.
pub(crate) fn collocation_matrix(spec: &BasisSpec) -> DMatrix<f64> {
    let nodes = spec.nodes();
    let n = spec.n_local();
    let mut v = DMatrix::zeros(n, n);
    let mut phi = vec![0.0; n];
    for (k, &x) in nodes.iter().enumerate() {
        eval_basis_into(spec, 0, x, &mut phi);
        for j in 0..n {
            v[(k, j)] = phi[j];
        }
    }
    v
}

/// Inverse of the collocation matrix. Rows of the endpoint functions are
/// exact unit vectors, since every family interpolates at `ξ = 0` and `ξ = 1`.
pub(crate) fn collocation_inverse(spec: &BasisSpec) -> DMatrix<f64> {
    let n = spec.n_local();
    if spec.is_nodal() {
        return DMatrix::identity(n, n);
    }
    let mut inv = collocation_matrix(spec)
        .try_inverse()
        .expect("collocation matrix is nonsingular for degree <= 4");
    for j in 0..n {
        inv[(0, j)] = if j == 0 { 1.0 } else { 0.0 };
        inv[(n - 1, j)] = if j == n - 1 { 1.0 } else { 0.0 };
    }
    inv
}

/// Coefficients `c_j` with `Σ_j c_j φ_j(ξ_k) = nodal_values[k]` at every
/// local node.
pub fn interpolation_coefficients(spec: &BasisSpec, nodal_values: &[f64]) -> Result<Vec<f64>> {
    if nodal_values.len() != spec.n_local() {
        return Err(Error::InputDomain(format!(
            "expected {} nodal values, got {}",
            spec.n_local(),
            nodal_values.len()
        )));
    }
    if spec.is_nodal() {
        return Ok(nodal_values.to_vec());
    }
    let inv = collocation_inverse(spec);
    let n = spec.n_local();
    Ok((0..n)
        .map(|j| (0..n).map(|k| inv[(j, k)] * nodal_values[k]).sum())
        .collect())
}
