//! The β-distance on R^n, β-balls and the β-spherical chart.
//!
//! For β = (β_1, …, β_n) with every β_i ≥ 1/2 the distance is
//! `|x - y|_β = (Σ |x_i - y_i|^{1/β_i})^{|β|/n}`. It is homogeneous of degree
//! `|β|/n` under the anisotropic dilation `x ↦ (t^{β_1} x_1, …, t^{β_n} x_n)`
//! and satisfies a quasi-triangle inequality with constant
//! `k = 2^{(1 + 1/β_min)^{|β|/n}}`.
//!
//! The chart writes `x_i = ±(ρ ω_i)^{2β_i}` where `ω` is a unit vector with
//! nonnegative components, so that `|x|_β = ρ^{a}` with `a = 2|β|/n`. Each of
//! the `2^n` sign vectors selects one orthant.

use std::f64::consts::{FRAC_PI_2, LN_2, PI};
use std::ops::Deref;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{check_dim, Error, Result};

/// Exponent vector β together with its derived constants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BetaParams {
    beta: Vec<f64>,
    abs_beta: f64,
    a: f64,
    beta_min: f64,
    k: f64,
}

impl BetaParams {
    pub fn new(beta: Vec<f64>) -> Result<Self> {
        if beta.is_empty() {
            return Err(Error::Domain("β must have at least one component".into()));
        }
        if let Some(b) = beta.iter().find(|b| !(b.is_finite() && **b >= 0.5)) {
            return Err(Error::Domain(format!("every β_i must be ≥ 1/2, got {b}")));
        }
        let n = beta.len() as f64;
        let abs_beta: f64 = beta.iter().sum();
        let beta_min = beta.iter().copied().fold(f64::INFINITY, f64::min);
        let mut bp = BetaParams {
            beta,
            abs_beta,
            a: 2.0 * abs_beta / n,
            beta_min,
            k: 0.0,
        };
        bp.k = quasi_triangle_constant(&bp);
        Ok(bp)
    }

    /// β ≡ 1/2 in dimension `n`: the Euclidean case.
    pub fn isotropic(n: usize) -> Self {
        Self::new(vec![0.5; n]).expect("β = 1/2 is valid")
    }

    pub fn beta(&self) -> &[f64] {
        &self.beta
    }

    pub fn n(&self) -> usize {
        self.beta.len()
    }

    pub fn abs_beta(&self) -> f64 {
        self.abs_beta
    }

    /// The exponent scale `2|β|/n`.
    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn beta_min(&self) -> f64 {
        self.beta_min
    }

    /// Stored quasi-triangle constant (may be `+inf` for extreme β).
    pub fn k(&self) -> f64 {
        self.k
    }

    /// Homogeneity degree `|β|/n`.
    pub fn degree(&self) -> f64 {
        self.abs_beta / self.beta.len() as f64
    }

    pub fn is_isotropic(&self) -> bool {
        self.beta.iter().all(|&b| b == 0.5)
    }

    /// `|x|_β` with no dimension check; callers guarantee `x.len() == n`.
    #[inline]
    pub(crate) fn gauge(&self, x: &[f64]) -> f64 {
        let s: f64 = x
            .iter()
            .zip(&self.beta)
            .map(|(xi, b)| {
                let v = xi.abs();
                if *b == 0.5 {
                    v * v
                } else if *b == 1.0 {
                    v
                } else {
                    v.powf(1.0 / b)
                }
            })
            .sum();
        let e = self.degree();
        if e == 0.5 {
            s.sqrt()
        } else if e == 1.0 {
            s
        } else {
            s.powf(e)
        }
    }

    #[inline]
    pub(crate) fn gauge_diff(&self, x: &[f64], y: &[f64]) -> f64 {
        let s: f64 = x
            .iter()
            .zip(y)
            .zip(&self.beta)
            .map(|((xi, yi), b)| {
                let v = (xi - yi).abs();
                if *b == 0.5 {
                    v * v
                } else {
                    v.powf(1.0 / b)
                }
            })
            .sum();
        s.powf(self.degree())
    }
}

/// A point of R^n.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Point(pub Vec<f64>);

impl Point {
    pub fn origin(n: usize) -> Self {
        Point(vec![0.0; n])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }
}

impl Deref for Point {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl From<Vec<f64>> for Point {
    fn from(v: Vec<f64>) -> Self {
        Point(v)
    }
}

impl From<&[f64]> for Point {
    fn from(v: &[f64]) -> Self {
        Point(v.to_vec())
    }
}

/// β-spherical coordinates: radial parameter, angles and an orthant selector.
#[derive(Debug, Clone, PartialEq)]
pub struct BetaSphericalCoord {
    pub rho: f64,
    /// `φ_1 … φ_{n-1}`; `φ_1..φ_{n-2}` in `[0, π]`, `φ_{n-1}` in `[0, 2π]`.
    pub angles: Vec<f64>,
    /// One of ±1 per coordinate.
    pub signs: Vec<f64>,
}

impl BetaSphericalCoord {
    pub fn new(rho: f64, angles: Vec<f64>, signs: Vec<f64>) -> Result<Self> {
        if !(rho >= 0.0) {
            return Err(Error::Domain(format!("ρ must be ≥ 0, got {rho}")));
        }
        if signs.iter().any(|s| *s != 1.0 && *s != -1.0) {
            return Err(Error::Domain("signs must be ±1".into()));
        }
        let m = angles.len();
        for (i, phi) in angles.iter().enumerate() {
            let hi = if i + 1 == m { 2.0 * PI } else { PI };
            if !(0.0..=hi).contains(phi) {
                return Err(Error::Domain(format!("angle φ_{} = {phi} outside [0, {hi}]", i + 1)));
            }
        }
        Ok(BetaSphericalCoord { rho, angles, signs })
    }

    /// First-orthant coordinate (all signs +1).
    pub fn positive(rho: f64, angles: Vec<f64>) -> Result<Self> {
        let n = angles.len() + 1;
        Self::new(rho, angles, vec![1.0; n])
    }
}

/// `|x - y|_β`.
pub fn beta_distance(x: &[f64], y: &[f64], bp: &BetaParams) -> Result<f64> {
    check_dim(bp.n(), x.len())?;
    check_dim(bp.n(), y.len())?;
    Ok(bp.gauge_diff(x, y))
}

/// `|x|_β`.
pub fn beta_norm(x: &[f64], bp: &BetaParams) -> Result<f64> {
    check_dim(bp.n(), x.len())?;
    Ok(bp.gauge(x))
}

/// Natural log of `k = 2^{(1+1/β_min)^{|β|/n}}`.
pub fn ln_quasi_triangle_constant(bp: &BetaParams) -> f64 {
    LN_2 * (bp.degree() * (1.0 + 1.0 / bp.beta_min()).ln()).exp()
}

/// `k = 2^{(1+1/β_min)^{|β|/n}}`, evaluated through its logarithm.
pub fn quasi_triangle_constant(bp: &BetaParams) -> f64 {
    ln_quasi_triangle_constant(bp).exp()
}

/// The anisotropic dilation `(t^{β_1} x_1, …, t^{β_n} x_n)`.
pub fn homogeneity_scale(x: &[f64], t: f64, bp: &BetaParams) -> Result<Point> {
    check_dim(bp.n(), x.len())?;
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::Domain(format!("dilation factor must be > 0, got {t}")));
    }
    Ok(Point(
        x.iter().zip(bp.beta()).map(|(xi, b)| t.powf(*b) * xi).collect(),
    ))
}

/// Membership in the open ball `B_β(center, r)`.
pub fn in_ball(x: &[f64], center: &[f64], r: f64, bp: &BetaParams) -> Result<bool> {
    if !(r > 0.0) {
        return Err(Error::Domain(format!("ball radius must be > 0, got {r}")));
    }
    Ok(beta_distance(x, center, bp)? < r)
}

/// Standard spherical direction components `ω(φ)` on the unit sphere.
pub fn direction(angles: &[f64]) -> Vec<f64> {
    let n = angles.len() + 1;
    let mut omega = Vec::with_capacity(n);
    let mut sin_prod = 1.0;
    for phi in angles {
        omega.push(sin_prod * phi.cos());
        sin_prod *= phi.sin();
    }
    omega.push(sin_prod);
    omega
}

/// Angular density of the standard spherical chart: `∏_{k=1}^{n-2} sin^{n-1-k} φ_k`.
pub fn spherical_angular_density(angles: &[f64]) -> f64 {
    let n = angles.len() + 1;
    angles
        .iter()
        .enumerate()
        .take(n.saturating_sub(2))
        .map(|(k, phi)| phi.sin().abs().powi((n - 2 - k) as i32))
        .product()
}

fn signed_power(base: f64, exponent: f64) -> Result<f64> {
    if base >= 0.0 {
        return Ok(base.powf(exponent));
    }
    if exponent.fract() == 0.0 {
        return Ok(base.powi(exponent as i32));
    }
    Err(Error::Domain(format!(
        "negative directional factor {base} raised to non-integer power {exponent}"
    )))
}

/// Maps β-spherical coordinates to a point: `x_i = s_i (ρ ω_i)^{2β_i}`.
pub fn beta_sphere_map(c: &BetaSphericalCoord, bp: &BetaParams) -> Result<Point> {
    let n = bp.n();
    check_dim(n - 1, c.angles.len())?;
    check_dim(n, c.signs.len())?;
    let omega = direction(&c.angles);
    omega
        .iter()
        .zip(bp.beta())
        .zip(&c.signs)
        .map(|((w, b), s)| signed_power(c.rho * w, 2.0 * b).map(|v| s * v))
        .collect::<Result<Vec<_>>>()
        .map(Point)
}

/// `|det ∂x/∂(ρ, φ)|` of [`beta_sphere_map`].
///
/// Chain rule through `z = ρ ω(φ)`: `∏ 2β_i |z_i|^{2β_i - 1} · ρ^{n-1} · J_sph(φ)`.
/// Every exponent `2β_i - 1` is nonnegative, so the density is bounded.
pub fn beta_sphere_jacobian(c: &BetaSphericalCoord, bp: &BetaParams) -> Result<f64> {
    let n = bp.n();
    check_dim(n - 1, c.angles.len())?;
    let omega = direction(&c.angles);
    let chain: f64 = omega
        .iter()
        .zip(bp.beta())
        .map(|(w, b)| 2.0 * b * (c.rho * w).abs().powf(2.0 * b - 1.0))
        .product();
    Ok(chain * c.rho.powi(n as i32 - 1) * spherical_angular_density(&c.angles))
}

/// Angular part of the volume element on one orthant:
/// `A(φ) = ∏ 2β_i ω_i^{2β_i-1} · J_sph(φ)` with `ω = ω(φ)`, φ in `[0, π/2]^{n-1}`.
///
/// In the variables `t = |y|_β` and `φ` the volume element is `(1/a) t^{n-1} dt · A(φ) dφ`.
#[inline]
pub(crate) fn orthant_angular_density(omega: &[f64], angles: &[f64], bp: &BetaParams) -> f64 {
    let chain: f64 = omega
        .iter()
        .zip(bp.beta())
        .map(|(w, b)| {
            if *b == 0.5 {
                1.0
            } else {
                2.0 * b * w.powf(2.0 * b - 1.0)
            }
        })
        .product();
    chain * spherical_angular_density(angles)
}

/// Total angular measure `Ω_β = Σ_orthants ∫ A(φ) dφ = 2^{n+1} ∏Γ(β_i + 1) / Γ(|β|)`.
pub fn angular_measure(bp: &BetaParams) -> f64 {
    let n = bp.n() as f64;
    let ln: f64 = bp.beta().iter().map(|b| ln_gamma(b + 1.0)).sum::<f64>() - ln_gamma(bp.abs_beta());
    ((n + 1.0) * LN_2 + ln).exp()
}

/// Lebesgue volume of `B_β(·, r)`: `Ω_β r^n / (a n)`.
pub fn ball_volume(bp: &BetaParams, r: f64) -> f64 {
    let n = bp.n() as f64;
    angular_measure(bp) * r.powf(n) / (bp.a() * n)
}

/// Half widths of the smallest axis box containing `B_β(0, r)`: `r^{nβ_i/|β|}`.
pub fn ball_box_half_widths(bp: &BetaParams, r: f64) -> Vec<f64> {
    let inv = 1.0 / bp.degree();
    bp.beta().iter().map(|b| r.powf(b * inv)).collect()
}

/// All `2^n` sign vectors, in a fixed order.
pub(crate) fn orthant_signs(n: usize) -> Vec<Vec<f64>> {
    (0..1usize << n)
        .map(|mask| {
            (0..n)
                .map(|i| if mask >> i & 1 == 1 { -1.0 } else { 1.0 })
                .collect()
        })
        .collect()
}

/// Upper limit of each angle on one orthant.
pub(crate) const ORTHANT_ANGLE: f64 = FRAC_PI_2;
