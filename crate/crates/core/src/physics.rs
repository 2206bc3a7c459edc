//! Pointwise shallow-water algebra and bathymetry profiles.
//!
//! States are `(H, q)` pairs stored as [`Vec2`]. Public functions validate
//! `H > 0`; the `*_unchecked` forms used inside assembly loops do not.

use nalgebra::{Matrix2, Vector2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Vec2 = Vector2<f64>;
pub type Mat2 = Matrix2<f64>;

/// Default gravitational acceleration.
pub const GRAVITY: f64 = 9.81;

/// Default entropy-fix fraction for `|J|⁻¹`.
pub const DEFAULT_ENTROPY_FIX: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysParams {
    pub g: f64,
    /// Manning coefficient.
    pub n_manning: f64,
}

impl Default for PhysParams {
    fn default() -> Self {
        PhysParams { g: GRAVITY, n_manning: 0.0 }
    }
}

impl PhysParams {
    pub fn new(g: f64, n_manning: f64) -> Result<Self> {
        if !(g > 0.0) || !g.is_finite() {
            return Err(Error::Config(format!("gravity must be positive, got {g}")));
        }
        if !(n_manning >= 0.0) || !n_manning.is_finite() {
            return Err(Error::Config(format!(
                "Manning coefficient must be non-negative, got {n_manning}"
            )));
        }
        Ok(PhysParams { g, n_manning })
    }
}

#[inline]
pub fn check_state(u: &Vec2) -> Result<()> {
    if u[0] > 0.0 && u[0].is_finite() && u[1].is_finite() {
        Ok(())
    } else {
        Err(Error::State { dof: usize::MAX, h: u[0], q: u[1] })
    }
}

#[inline]
pub(crate) fn flux_unchecked(u: &Vec2, g: f64) -> Vec2 {
    let (h, q) = (u[0], u[1]);
    Vec2::new(q, q * q / h + 0.5 * g * h * h)
}

#[inline]
pub(crate) fn flux_v_unchecked(u: &Vec2) -> Vec2 {
    Vec2::new(u[1], u[1] * u[1] / u[0])
}

/// Second component of the Manning friction source `S^V`.
#[inline]
pub(crate) fn friction_unchecked(u: &Vec2, p: &PhysParams) -> f64 {
    if p.n_manning == 0.0 {
        return 0.0;
    }
    let (h, q) = (u[0], u[1]);
    -p.g * p.n_manning * p.n_manning * q.abs() * q / h.powf(7.0 / 3.0)
}

#[inline]
pub(crate) fn jacobian_unchecked(u: &Vec2, g: f64) -> Mat2 {
    let (h, q) = (u[0], u[1]);
    let v = q / h;
    Mat2::new(0.0, 1.0, g * h - v * v, 2.0 * v)
}

#[inline]
pub(crate) fn spectral_radius_unchecked(u: &Vec2, g: f64) -> f64 {
    (u[1] / u[0]).abs() + (g * u[0]).sqrt()
}

pub(crate) fn abs_jacobian_inverse_unchecked(u: &Vec2, g: f64, fix: f64) -> Mat2 {
    let (h, q) = (u[0], u[1]);
    let v = q / h;
    let c = (g * h).sqrt();
    let rho = v.abs() + c;
    let thr = fix * rho;
    let smooth = |l: f64| {
        let a = l.abs();
        if a < thr {
            (l * l + thr * thr) / (2.0 * thr)
        } else {
            a
        }
    };
    let (l1, l2) = (smooth(v - c), smooth(v + c));
    // R diag(1/|λ|) R⁻¹ with R = [[1,1],[v-c,v+c]], R⁻¹ = [[v+c,-1],[-(v-c),1]]/(2c)
    let (a, b) = (1.0 / l1, 1.0 / l2);
    let s = 0.5 / c;
    Mat2::new(
        s * (a * (v + c) - b * (v - c)),
        s * (b - a),
        s * (v - c) * (v + c) * (a - b),
        s * (b * (v + c) - a * (v - c)),
    )
}

#[inline]
pub(crate) fn entropy_jac_af_unchecked(u: &Vec2, g: f64) -> Mat2 {
    let v = u[1] / u[0];
    Mat2::new(1.0 / g, v / g, v / g, u[0] + v * v / g)
}

#[inline]
pub(crate) fn entropy_vars_unchecked(u: &Vec2, b: f64, g: f64) -> Vec2 {
    let v = u[1] / u[0];
    Vec2::new(g * (u[0] + b) - 0.5 * v * v, v)
}

pub fn flux(u: &Vec2, p: &PhysParams) -> Result<Vec2> {
    check_state(u)?;
    Ok(flux_unchecked(u, p.g))
}

/// Velocity part `(q, q²/H)`.
pub fn flux_v(u: &Vec2) -> Result<Vec2> {
    check_state(u)?;
    Ok(flux_v_unchecked(u))
}

/// Hydrostatic part `(0, gH²/2)`.
pub fn flux_hs(u: &Vec2, p: &PhysParams) -> Result<Vec2> {
    check_state(u)?;
    Ok(Vec2::new(0.0, 0.5 * p.g * u[0] * u[0]))
}

/// `S = S^V + S^HS` for the local bathymetry slope `dbdx`.
pub fn source(u: &Vec2, dbdx: f64, p: &PhysParams) -> Result<Vec2> {
    Ok(source_v(u, p)? + source_hs(u, dbdx, p)?)
}

/// Friction part `-(0, g n² |q| q / H^{7/3})`.
pub fn source_v(u: &Vec2, p: &PhysParams) -> Result<Vec2> {
    check_state(u)?;
    Ok(Vec2::new(0.0, friction_unchecked(u, p)))
}

/// Bathymetry part `-(0, g H dB/dx)`.
pub fn source_hs(u: &Vec2, dbdx: f64, p: &PhysParams) -> Result<Vec2> {
    check_state(u)?;
    Ok(Vec2::new(0.0, -p.g * u[0] * dbdx))
}

pub fn jacobian(u: &Vec2, p: &PhysParams) -> Result<Mat2> {
    check_state(u)?;
    Ok(jacobian_unchecked(u, p.g))
}

/// Eigen-decomposition `J = R Λ R⁻¹` with eigenvalues ordered `(v-c, v+c)`.
pub fn eigen(u: &Vec2, p: &PhysParams) -> Result<(Mat2, Vec2, Mat2)> {
    check_state(u)?;
    let v = u[1] / u[0];
    let c = (p.g * u[0]).sqrt();
    let r = Mat2::new(1.0, 1.0, v - c, v + c);
    let rinv = Mat2::new(v + c, -1.0, -(v - c), 1.0) / (2.0 * c);
    Ok((r, Vec2::new(v - c, v + c), rinv))
}

/// `B_f = |J|⁻¹`, with eigenvalues below `fix·ρ` in magnitude smoothed to
/// `(λ² + (fix·ρ)²) / (2 fix·ρ)`.
pub fn abs_jacobian_inverse(u: &Vec2, p: &PhysParams, fix: f64) -> Result<Mat2> {
    check_state(u)?;
    if !(fix > 0.0) {
        return Err(Error::Config(format!("entropy fix fraction must be positive, got {fix}")));
    }
    Ok(abs_jacobian_inverse_unchecked(u, p.g, fix))
}

/// Entropy variables `(gη - v²/2, v)` with `η = H + b`.
pub fn entropy_vars(u: &Vec2, b: f64, p: &PhysParams) -> Result<Vec2> {
    check_state(u)?;
    Ok(entropy_vars_unchecked(u, b, p.g))
}

/// `∂u/∂w` for a flat bottom.
pub fn entropy_jac_af(u: &Vec2, p: &PhysParams) -> Result<Mat2> {
    check_state(u)?;
    Ok(entropy_jac_af_unchecked(u, p.g))
}

pub fn spectral_radius(u: &Vec2, p: &PhysParams) -> Result<f64> {
    check_state(u)?;
    Ok(spectral_radius_unchecked(u, p.g))
}

/// Bottom profiles used by the test suite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Bathymetry {
    Flat,
    /// `0.2 exp(1 - 1/(1 - ((x-10)/5)²))` on `5 < x < 15`.
    SmoothBump,
    /// `0.2 - 0.05 (x-10)²` on `8 < x < 12`.
    C0Parabola,
    /// Piecewise-linear interpolation of `(x, b)` samples, constant outside.
    Tabulated { xs: Vec<f64>, bs: Vec<f64> },
}

impl Bathymetry {
    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "flat" => Ok(Bathymetry::Flat),
            "smooth" | "smooth_bump" => Ok(Bathymetry::SmoothBump),
            "c0" | "c0_parabola" | "parabola" => Ok(Bathymetry::C0Parabola),
            other => Err(Error::Config(format!("unknown bathymetry '{other}'"))),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let Bathymetry::Tabulated { xs, bs } = self {
            if xs.len() != bs.len() || xs.len() < 2 {
                return Err(Error::Config("tabulated bathymetry needs ≥ 2 matching samples".into()));
            }
            if xs.windows(2).any(|w| !(w[1] > w[0])) {
                return Err(Error::Config("tabulated abscissae must increase".into()));
            }
        }
        Ok(())
    }

    pub fn value(&self, x: f64) -> f64 {
        match self {
            Bathymetry::Flat => 0.0,
            Bathymetry::SmoothBump => {
                let s = (x - 10.0) / 5.0;
                if x > 5.0 && x < 15.0 {
                    0.2 * (1.0 - 1.0 / (1.0 - s * s)).exp()
                } else {
                    0.0
                }
            }
            Bathymetry::C0Parabola => {
                if x > 8.0 && x < 12.0 {
                    0.2 - 0.05 * (x - 10.0) * (x - 10.0)
                } else {
                    0.0
                }
            }
            Bathymetry::Tabulated { xs, bs } => {
                let n = xs.len();
                if x <= xs[0] {
                    return bs[0];
                }
                if x >= xs[n - 1] {
                    return bs[n - 1];
                }
                let k = xs.partition_point(|&v| v <= x) - 1;
                let t = (x - xs[k]) / (xs[k + 1] - xs[k]);
                bs[k] + t * (bs[k + 1] - bs[k])
            }
        }
    }

    pub(crate) fn one_sided_slopes(&self, x: f64) -> (f64, f64) {
        match self {
            Bathymetry::Flat => (0.0, 0.0),
            Bathymetry::SmoothBump => {
                let s = (x - 10.0) / 5.0;
                let d = if x > 5.0 && x < 15.0 {
                    let den = 1.0 - s * s;
                    // d/dx of exp(1 - 1/den) = exp(..) * (-2 s / den²) / 5
                    -0.2 * (1.0 - 1.0 / den).exp() * 2.0 * s / (den * den) / 5.0
                } else {
                    0.0
                };
                (d, d)
            }
            Bathymetry::C0Parabola => {
                let inner = -0.1 * (x - 10.0);
                let left = if x > 8.0 && x <= 12.0 { inner } else { 0.0 };
                let right = if x >= 8.0 && x < 12.0 { inner } else { 0.0 };
                (left, right)
            }
            Bathymetry::Tabulated { xs, bs } => {
                let n = xs.len();
                let seg = |k: usize| (bs[k + 1] - bs[k]) / (xs[k + 1] - xs[k]);
                let left = if x <= xs[0] || x > xs[n - 1] {
                    0.0
                } else {
                    seg(xs.partition_point(|&v| v < x) - 1)
                };
                let right = if x < xs[0] || x >= xs[n - 1] {
                    0.0
                } else {
                    seg(xs.partition_point(|&v| v <= x) - 1)
                };
                (left, right)
            }
        }
    }

    /// Slope `dB/dx`. The parabola's derivative holds on the open interval
    /// only, so its kinks take the slope of the flat bottom; tabulated
    /// profiles take the mean of the one-sided slopes at their samples.
    pub fn slope(&self, x: f64) -> f64 {
        match self {
            Bathymetry::C0Parabola => {
                if x > 8.0 && x < 12.0 {
                    -0.1 * (x - 10.0)
                } else {
                    0.0
                }
            }
            _ => {
                let (l, r) = self.one_sided_slopes(x);
                0.5 * (l + r)
            }
        }
    }

    /// Abscissae where the profile is not smooth.
    pub fn breakpoints(&self) -> Vec<f64> {
        match self {
            Bathymetry::Flat => vec![],
            Bathymetry::SmoothBump => vec![5.0, 15.0],
            Bathymetry::C0Parabola => vec![8.0, 12.0],
            Bathymetry::Tabulated { xs, .. } => xs.clone(),
        }
    }

    /// Location and value of the highest point of the profile on `[a, b]`.
    pub fn crest(&self, a: f64, b: f64) -> (f64, f64) {
        match self {
            Bathymetry::SmoothBump | Bathymetry::C0Parabola if a <= 10.0 && b >= 10.0 => {
                (10.0, self.value(10.0))
            }
            _ => {
                let mut cands: Vec<f64> = self
                    .breakpoints()
                    .into_iter()
                    .filter(|&x| x >= a && x <= b)
                    .collect();
                cands.push(a);
                cands.push(b);
                cands
                    .into_iter()
                    .map(|x| (x, self.value(x)))
                    .fold((a, f64::NEG_INFINITY), |acc, c| if c.1 > acc.1 { c } else { acc })
            }
        }
    }
}
