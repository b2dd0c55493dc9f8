//! Integration over β-balls and β-annuli, including kernels `|x - y|_β^{-s}`
//! divided by a weight of the β-distance.
//!
//! A ball of radius `r` is cut into dyadic shells `r/2^{k+1} ≤ |y - c|_β < r/2^k`,
//! `k = 0..=J`, plus a core `|y - c|_β < r/2^{J+1}`. Each shell is integrated
//! in the chart `y_i = c_i ± (ρ ω_i)^{2β_i}` with variables `u = ln |y - c|_β`
//! and the orthant angles, where the volume element is
//! `(1/a) t^n du · A(φ) dφ`. The core is handled in closed form from the
//! field's value (or declared singular profile) at the center, so no node is
//! ever placed on the center.

pub(crate) mod cubature;
pub mod legendre;

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::fields::{RadialProfile, ScalarField, WeightFunction};
use crate::metric::{
    angular_measure, ball_box_half_widths, orthant_angular_density, orthant_signs, BetaParams, ORTHANT_ANGLE,
};
use cubature::{evaluate_all, refine, Region, CELL_ORDER};
use legendre::GaussLegendre;

/// Anything that can be integrated over a β-ball.
pub trait Integrand: Sync {
    fn value(&self, y: &[f64]) -> f64;

    /// Local radial profile when `c` is a singular point of the integrand.
    fn profile_at(&self, _c: &[f64]) -> Option<RadialProfile> {
        None
    }
}

impl Integrand for ScalarField {
    fn value(&self, y: &[f64]) -> f64 {
        self.eval(y)
    }

    fn profile_at(&self, c: &[f64]) -> Option<RadialProfile> {
        ScalarField::profile_at(self, c)
    }
}

/// `|g|^p`.
pub struct PowerOf<'a, I: ?Sized> {
    pub inner: &'a I,
    pub p: f64,
}

impl<I: Integrand + ?Sized> Integrand for PowerOf<'_, I> {
    fn value(&self, y: &[f64]) -> f64 {
        let v = self.inner.value(y).abs();
        if self.p == 1.0 {
            v
        } else {
            v.powf(self.p)
        }
    }

    fn profile_at(&self, c: &[f64]) -> Option<RadialProfile> {
        self.inner.profile_at(c).map(|p| p.powered(self.p))
    }
}

/// A closure integrand with an optional declared singular point.
pub struct FnIntegrand<F> {
    f: F,
    singular: Option<(Vec<f64>, RadialProfile)>,
}

impl<F: Fn(&[f64]) -> f64 + Sync> FnIntegrand<F> {
    pub fn new(f: F) -> Self {
        FnIntegrand { f, singular: None }
    }

    pub fn with_singularity(f: F, point: Vec<f64>, profile: RadialProfile) -> Self {
        FnIntegrand { f, singular: Some((point, profile)) }
    }
}

impl<F: Fn(&[f64]) -> f64 + Sync> Integrand for FnIntegrand<F> {
    fn value(&self, y: &[f64]) -> f64 {
        (self.f)(y)
    }

    fn profile_at(&self, c: &[f64]) -> Option<RadialProfile> {
        self.singular
            .as_ref()
            .filter(|(p, _)| p.iter().zip(c).all(|(a, b)| a == b))
            .map(|(_, prof)| *prof)
    }
}

/// Radial kernel `t^{-exponent} / weight(t)` of the β-distance `t`.
#[derive(Debug, Clone, Copy)]
pub struct RadialKernel<'a> {
    pub exponent: f64,
    pub weight: Option<&'a WeightFunction>,
}

impl<'a> RadialKernel<'a> {
    pub fn none() -> Self {
        RadialKernel { exponent: 0.0, weight: None }
    }

    pub fn power(exponent: f64) -> Self {
        RadialKernel { exponent, weight: None }
    }

    pub fn weighted(exponent: f64, weight: Option<&'a WeightFunction>) -> Self {
        RadialKernel { exponent, weight }
    }

    #[inline]
    pub fn eval(&self, t: f64) -> f64 {
        let mut k = if self.exponent == 0.0 { 1.0 } else { t.powf(-self.exponent) };
        if let Some(w) = self.weight {
            k /= w.eval(t);
        }
        k
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum MethodChoice {
    /// Tensor chart for `n ≤ 4`, Monte Carlo beyond.
    #[default]
    Auto,
    TensorChart,
    MonteCarlo,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    TensorChart,
    MonteCarlo,
}

/// Largest dimension handled by the tensor chart.
pub const MAX_CHART_DIM: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Dyadic shells `k = 0..=J` before the analytic core.
    pub ladder_depth: usize,
    /// Initial nodes per angle axis (in cells of 8).
    pub angular_order: usize,
    /// Initial radial nodes per shell (in cells of 8, at most one cell per 64).
    pub radial_order: usize,
    pub mc_budget: usize,
    pub seed: u64,
    /// Region cap per shell and orthant before giving up.
    pub max_regions: usize,
    pub method: MethodChoice,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            rel_tol: 1e-4,
            abs_tol: 1e-12,
            ladder_depth: 20,
            angular_order: 32,
            radial_order: 64,
            mc_budget: 1_000_000,
            seed: 0x5eed,
            max_regions: 4000,
            method: MethodChoice::Auto,
        }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0) {
            return Err(Error::Domain("tolerances must be > 0".into()));
        }
        if self.angular_order < 2 || self.radial_order < 2 {
            return Err(Error::Domain("quadrature orders must be ≥ 2".into()));
        }
        if self.ladder_depth < 1 {
            return Err(Error::Domain("ladder depth must be ≥ 1".into()));
        }
        if self.max_regions < 1 || self.mc_budget < 2 {
            return Err(Error::Domain("region and sample budgets must be positive".into()));
        }
        Ok(())
    }

    /// Cheaper settings used for the outer integral of nested computations.
    pub fn coarse(&self) -> Self {
        QuadratureConfig {
            rel_tol: self.rel_tol.max(1e-3),
            ladder_depth: self.ladder_depth.min(8),
            angular_order: 8,
            radial_order: 8,
            max_regions: self.max_regions.min(200),
            ..self.clone()
        }
    }

    pub(crate) fn use_monte_carlo(&self, n: usize) -> bool {
        match self.method {
            MethodChoice::Auto => n > MAX_CHART_DIM,
            MethodChoice::TensorChart => false,
            MethodChoice::MonteCarlo => true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegralResult {
    pub value: f64,
    pub error_estimate: f64,
    pub method: Method,
    pub annuli_used: usize,
}

/// Accepts a non-converged result as its best estimate with the achieved error.
pub fn best_effort(res: Result<IntegralResult>) -> Result<IntegralResult> {
    match res {
        Err(Error::NonConverged { best, achieved }) => Ok(IntegralResult {
            value: best,
            error_estimate: achieved,
            method: Method::TensorChart,
            annuli_used: 0,
        }),
        other => other,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ShellValue {
    pub value: f64,
    pub error: f64,
}

impl std::ops::Add for ShellValue {
    type Output = ShellValue;
    fn add(self, o: ShellValue) -> ShellValue {
        ShellValue { value: self.value + o.value, error: self.error + o.error }
    }
}

/// Per-shell values of one ball integral; `ball(j)` gives the integral over
/// the ball of radius `radius / 2^j` for every rung at once.
#[derive(Debug, Clone, PartialEq)]
pub struct ShellDecomposition {
    pub radius: f64,
    pub shells: Vec<ShellValue>,
    pub core: ShellValue,
    pub converged: bool,
}

impl ShellDecomposition {
    pub fn depth(&self) -> usize {
        self.shells.len() - 1
    }

    pub fn rung_radius(&self, j: usize) -> f64 {
        self.radius * 0.5f64.powi(j as i32)
    }

    pub fn ball(&self, j: usize) -> ShellValue {
        self.shells[j..].iter().fold(self.core, |acc, s| acc + *s)
    }

    pub fn total(&self) -> ShellValue {
        self.ball(0)
    }
}

/// Shell weights `6/(π² (k+1)²)`, summing to at most 1.
fn shell_weight(k: usize) -> f64 {
    6.0 / (PI * PI * ((k + 1) * (k + 1)) as f64)
}

struct Chart<'a> {
    bp: &'a BetaParams,
    center: &'a [f64],
    signs: Vec<f64>,
    kernel: RadialKernel<'a>,
    f: &'a dyn Integrand,
}

impl Chart<'_> {
    #[inline]
    fn eval(&self, z: &[f64]) -> f64 {
        let n = self.bp.n();
        let u = z[0];
        let t = u.exp();
        let k = self.kernel.eval(t);
        if k == 0.0 {
            return 0.0;
        }
        let rho = (u / self.bp.a()).exp();
        let mut omega = [0.0f64; MAX_CHART_DIM];
        let mut sin_prod = 1.0;
        for i in 0..n - 1 {
            omega[i] = sin_prod * z[1 + i].cos();
            sin_prod *= z[1 + i].sin();
        }
        omega[n - 1] = sin_prod;
        let mut y = [0.0f64; MAX_CHART_DIM];
        for i in 0..n {
            let b = self.bp.beta()[i];
            let zi = rho * omega[i];
            y[i] = self.center[i] + self.signs[i] * if b == 0.5 { zi } else { zi.powf(2.0 * b) };
        }
        let v = self.f.value(&y[..n]);
        if v == 0.0 {
            return 0.0;
        }
        let density = orthant_angular_density(&omega[..n], &z[1..], self.bp);
        v * k * t.powi(n as i32) * density / self.bp.a()
    }
}

/// Initial boxes in `(u, φ_1 … φ_{n-1})` for one shell.
fn shell_boxes(n: usize, t_in: f64, t_out: f64, cfg: &QuadratureConfig) -> Vec<(Vec<f64>, Vec<f64>)> {
    let ang_cells = (cfg.angular_order / CELL_ORDER).max(1);
    let rad_cells = (cfg.radial_order / 64).max(1);
    let (u0, u1) = (t_in.ln(), t_out.ln());
    let d = n;
    let mut counts = vec![ang_cells; d];
    counts[0] = rad_cells;
    let total: usize = counts.iter().product();
    (0..total)
        .map(|mut flat| {
            let mut lo = vec![0.0; d];
            let mut hi = vec![0.0; d];
            for k in (0..d).rev() {
                let i = flat % counts[k];
                flat /= counts[k];
                let (a, b) = if k == 0 { (u0, u1) } else { (0.0, ORTHANT_ANGLE) };
                let h = (b - a) / counts[k] as f64;
                lo[k] = a + i as f64 * h;
                hi[k] = if i + 1 == counts[k] { b } else { a + (i + 1) as f64 * h };
            }
            (lo, hi)
        })
        .collect()
}

/// Integrates over the shells bounded by the descending `breaks`, optionally
/// adding the analytic core below the last break.
fn integrate_shells(
    f: &dyn Integrand,
    kernel: RadialKernel<'_>,
    center: &[f64],
    breaks: &[f64],
    with_core: bool,
    bp: &BetaParams,
    cfg: &QuadratureConfig,
) -> Result<(Vec<ShellValue>, ShellValue, bool)> {
    let n = bp.n();
    let core = if with_core {
        core_contribution(f, kernel, center, *breaks.last().expect("breaks"), bp)?
    } else {
        ShellValue::default()
    };
    let signs = orthant_signs(n);
    let n_shells = breaks.len() - 1;
    let charts: Vec<Chart<'_>> = signs
        .into_iter()
        .map(|s| Chart { bp, center, signs: s, kernel, f })
        .collect();
    let groups: Vec<(usize, usize)> = (0..n_shells).flat_map(|k| (0..charts.len()).map(move |o| (k, o))).collect();

    let initial: Vec<Vec<Region>> = groups
        .par_iter()
        .map(|&(k, o)| {
            let chart = &charts[o];
            let g = |z: &[f64]| chart.eval(z);
            evaluate_all(&g, shell_boxes(n, breaks[k + 1], breaks[k], cfg))
        })
        .collect();

    let mut shell_abs = vec![0.0; n_shells];
    for ((k, _), regions) in groups.iter().zip(&initial) {
        shell_abs[*k] += regions.iter().map(|r| r.value).sum::<f64>().abs();
    }
    if shell_abs.iter().any(|v| !v.is_finite()) {
        return Err(Error::Divergent("non-finite shell integral".into()));
    }
    let mut tail = core.value.abs();
    let mut budgets = vec![0.0; n_shells];
    for k in (0..n_shells).rev() {
        tail += shell_abs[k];
        budgets[k] = (cfg.rel_tol * tail).max(cfg.abs_tol) * shell_weight(k) / charts.len() as f64;
    }

    let refined: Vec<(usize, cubature::Refined)> = groups
        .par_iter()
        .zip(initial.into_par_iter())
        .map(|(&(k, o), regions)| {
            let chart = &charts[o];
            let g = |z: &[f64]| chart.eval(z);
            (k, refine(&g, regions, budgets[k], cfg.max_regions))
        })
        .collect();

    let mut shells = vec![ShellValue::default(); n_shells];
    let mut converged = true;
    for (k, r) in refined {
        shells[k] = shells[k] + ShellValue { value: r.value, error: r.error };
        converged &= r.converged;
    }
    if shells.iter().any(|s| !s.value.is_finite()) {
        return Err(Error::Divergent("non-finite shell integral".into()));
    }
    Ok((shells, core, converged))
}

/// Dyadic decomposition of `∫_{B_β(center, r)} f(y) K(|y - center|_β) dy`
/// with shells `k = 0..=depth`.
pub fn decompose(
    f: &dyn Integrand,
    kernel: RadialKernel<'_>,
    center: &[f64],
    r: f64,
    depth: usize,
    bp: &BetaParams,
    cfg: &QuadratureConfig,
) -> Result<ShellDecomposition> {
    check_dim(bp.n(), center.len())?;
    cfg.validate()?;
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::Domain(format!("radius must be > 0, got {r}")));
    }
    if bp.n() > MAX_CHART_DIM {
        return Err(Error::Domain(format!(
            "chart quadrature supports n ≤ {MAX_CHART_DIM}; use the Monte Carlo method"
        )));
    }
    let breaks: Vec<f64> = (0..=depth + 1).map(|k| r * 0.5f64.powi(k as i32)).collect();
    let (shells, core, converged) = integrate_shells(f, kernel, center, &breaks, true, bp, cfg)?;
    Ok(ShellDecomposition { radius: r, shells, core, converged })
}

fn finish(shells: &[ShellValue], core: ShellValue, converged: bool) -> Result<IntegralResult> {
    let total = shells.iter().fold(core, |acc, s| acc + *s);
    if !converged {
        return Err(Error::NonConverged { best: total.value, achieved: total.error });
    }
    Ok(IntegralResult {
        value: total.value,
        error_estimate: total.error,
        method: Method::TensorChart,
        annuli_used: shells.len(),
    })
}

/// `∫_{B_β(center, r)} f(y) K(|y - center|_β) dy`.
pub fn integrate_kernel(
    f: &dyn Integrand,
    kernel: RadialKernel<'_>,
    center: &[f64],
    r: f64,
    bp: &BetaParams,
    cfg: &QuadratureConfig,
) -> Result<IntegralResult> {
    check_dim(bp.n(), center.len())?;
    if cfg.use_monte_carlo(bp.n()) {
        cfg.validate()?;
        return monte_carlo(f, kernel, center, 0.0, r, bp, cfg.mc_budget, cfg.seed);
    }
    let d = decompose(f, kernel, center, r, cfg.ladder_depth, bp, cfg)?;
    finish(&d.shells, d.core, d.converged)
}

/// `∫_{B_β(center, r)} f`.
pub fn integrate_ball(
    f: &dyn Integrand,
    center: &[f64],
    r: f64,
    bp: &BetaParams,
    cfg: &QuadratureConfig,
) -> Result<IntegralResult> {
    integrate_kernel(f, RadialKernel::none(), center, r, bp, cfg)
}

/// `∫_{B_β(center, r)} f(y) / |y - center|_β^s dy`; divergent unless `n - s > 0`
/// (after accounting for any singular profile of `f` at the center).
pub fn integrate_singular(
    f: &dyn Integrand,
    s: f64,
    center: &[f64],
    r: f64,
    bp: &BetaParams,
    cfg: &QuadratureConfig,
) -> Result<IntegralResult> {
    if !(s >= 0.0) {
        return Err(Error::Domain(format!("kernel exponent must be ≥ 0, got {s}")));
    }
    integrate_kernel(f, RadialKernel::power(s), center, r, bp, cfg)
}

/// `∫_{r_in ≤ |y - center|_β < r_out} f(y) K(|y - center|_β) dy`.
#[allow(clippy::too_many_arguments)]
pub fn integrate_annulus_kernel(
    f: &dyn Integrand,
    kernel: RadialKernel<'_>,
    center: &[f64],
    r_in: f64,
    r_out: f64,
    bp: &BetaParams,
    cfg: &QuadratureConfig,
) -> Result<IntegralResult> {
    check_dim(bp.n(), center.len())?;
    cfg.validate()?;
    if !(r_in >= 0.0 && r_in < r_out) {
        return Err(Error::Domain(format!("need 0 ≤ r_in < r_out, got [{r_in}, {r_out})")));
    }
    if r_in == 0.0 {
        return integrate_kernel(f, kernel, center, r_out, bp, cfg);
    }
    if cfg.use_monte_carlo(bp.n()) {
        return monte_carlo(f, kernel, center, r_in, r_out, bp, cfg.mc_budget, cfg.seed);
    }
    let mut breaks = vec![r_out];
    while breaks.last().unwrap() * 0.5 > r_in * (1.0 + 1e-12) {
        breaks.push(breaks.last().unwrap() * 0.5);
    }
    breaks.push(r_in);
    let (shells, core, converged) = integrate_shells(f, kernel, center, &breaks, false, bp, cfg)?;
    finish(&shells, core, converged)
}

pub fn integrate_annulus(
    f: &dyn Integrand,
    center: &[f64],
    r_in: f64,
    r_out: f64,
    bp: &BetaParams,
    cfg: &QuadratureConfig,
) -> Result<IntegralResult> {
    integrate_annulus_kernel(f, RadialKernel::none(), center, r_in, r_out, bp, cfg)
}

/// Contribution of `|y - center|_β < t0`.
fn core_contribution(
    f: &dyn Integrand,
    kernel: RadialKernel<'_>,
    center: &[f64],
    t0: f64,
    bp: &BetaParams,
) -> Result<ShellValue> {
    let n = bp.n() as f64;
    let omega_a = angular_measure(bp) / bp.a();
    if let Some(p) = f.profile_at(center) {
        if t0 > p.valid_below {
            return Err(Error::Contract(format!(
                "core radius {t0} exceeds the range {} of the declared singular profile",
                p.valid_below
            )));
        }
        let r = radial_integral(n, kernel, p.coef, p.power, p.log_power, t0)?;
        return Ok(ShellValue { value: omega_a * r.value, error: omega_a * r.error });
    }
    let c0 = f.value(center);
    let half = ball_box_half_widths(bp, t0);
    let mut spread: f64 = 0.0;
    let mut y = center.to_vec();
    for i in 0..center.len() {
        for sgn in [-1.0, 1.0] {
            y[i] = center[i] + sgn * half[i];
            spread = spread.max((f.value(&y) - c0).abs());
        }
        y[i] = center[i];
    }
    if c0 == 0.0 && spread == 0.0 {
        return Ok(ShellValue::default());
    }
    let r = radial_integral(n, kernel, 1.0, 0.0, 0.0, t0)?;
    Ok(ShellValue {
        value: omega_a * c0 * r.value,
        error: omega_a * (spread * r.value + c0.abs() * r.error),
    })
}

/// Largest `u = -ln t` for which weights are evaluated directly.
const U_MAX: f64 = 700.0;

/// `∫_0^{t0} t^{n-1} K(t) coef t^{-q} (-ln t)^{-L} dt`.
pub(crate) fn radial_integral(
    n: f64,
    kernel: RadialKernel<'_>,
    coef: f64,
    q: f64,
    log_power: f64,
    t0: f64,
) -> Result<ShellValue> {
    if kernel.weight.is_none() && log_power == 0.0 {
        let m = n - kernel.exponent - q;
        if m <= 0.0 {
            return Err(Error::Divergent(format!(
                "radial exponent {} ≤ -1 near the center",
                m - 1.0
            )));
        }
        return Ok(ShellValue { value: coef * t0.powf(m) / m, error: 0.0 });
    }
    let u0 = -t0.ln();
    if log_power != 0.0 && u0 <= 0.0 {
        return Err(Error::Contract("logarithmic profile needs t0 < 1".into()));
    }
    // t^{n} K(t) P(t) in the variable u = -ln t (dt/t = -du)
    let h = |u: f64| -> f64 {
        let t = (-u).exp();
        let mut ln = -u * (n - q) + kernel.exponent * u;
        if log_power != 0.0 {
            ln -= log_power * u.ln();
        }
        let mut v = coef * ln.exp();
        if let Some(w) = kernel.weight {
            v /= w.eval(t);
        }
        v
    };
    let fine = GaussLegendre::cached(32);
    let rough = GaussLegendre::cached(16);
    let mut total = 0.0;
    let mut err = 0.0;
    let mut a = u0;
    while a < U_MAX {
        let b = (a + a.abs().max(std::f64::consts::LN_2)).min(U_MAX);
        let v = fine.integrate(a, b, h);
        let v2 = rough.integrate(a, b, h);
        if !v.is_finite() {
            return Err(Error::Divergent("radial integral overflows near the center".into()));
        }
        total += v;
        err += (v - v2).abs();
        if v.abs() <= 1e-17 * total.abs() && b > u0 + 8.0 {
            return Ok(ShellValue { value: total, error: err });
        }
        a = b;
    }
    let (h_end, h_mid) = (h(U_MAX), h(U_MAX / 2.0));
    if h_end == 0.0 {
        return Ok(ShellValue { value: total, error: err });
    }
    let c = -(h_end / h_mid).ln() / std::f64::consts::LN_2;
    if !(c > 1.0) {
        return Err(Error::Divergent(format!(
            "radial integrand decays like u^-{c:.3} near the center"
        )));
    }
    let tail = h_end * U_MAX / (c - 1.0);
    Ok(ShellValue { value: total + tail, error: err + tail })
}

/// Rejection sampling over the bounding box of `B_β(center, r_out)`;
/// the error estimate is one standard error.
#[allow(clippy::too_many_arguments)]
pub fn monte_carlo(
    f: &dyn Integrand,
    kernel: RadialKernel<'_>,
    center: &[f64],
    r_in: f64,
    r_out: f64,
    bp: &BetaParams,
    samples: usize,
    seed: u64,
) -> Result<IntegralResult> {
    check_dim(bp.n(), center.len())?;
    if !(r_in >= 0.0 && r_in < r_out) {
        return Err(Error::Domain(format!("need 0 ≤ r_in < r_out, got [{r_in}, {r_out})")));
    }
    let half = ball_box_half_widths(bp, r_out);
    let box_volume: f64 = half.iter().map(|h| 2.0 * h).product();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut y = vec![0.0; center.len()];
    let (mut sum, mut sum2) = (0.0, 0.0);
    for _ in 0..samples {
        for i in 0..y.len() {
            y[i] = center[i] + half[i] * (2.0 * rng.gen::<f64>() - 1.0);
        }
        let t = bp.gauge_diff(&y, center);
        if t < r_in || t >= r_out || t == 0.0 {
            continue;
        }
        let v = f.value(&y) * kernel.eval(t);
        sum += v;
        sum2 += v * v;
    }
    let m = samples as f64;
    let mean = sum / m;
    let var = (sum2 / m - mean * mean).max(0.0);
    Ok(IntegralResult {
        value: mean * box_volume,
        error_estimate: (var / m).sqrt() * box_volume,
        method: Method::MonteCarlo,
        annuli_used: 0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{ball_volume, Point};
    use approx::assert_relative_eq;

    fn cfg() -> QuadratureConfig {
        QuadratureConfig::default()
    }

    #[test]
    fn zero_field_integrates_to_zero() {
        let bp = BetaParams::isotropic(2);
        let z = ScalarField::zero(&bp);
        let r = integrate_ball(&z, &[0.0, 0.0], 1.0, &bp, &cfg()).unwrap();
        assert_eq!(r.value, 0.0);
    }

    #[test]
    fn unit_disk_area() {
        let bp = BetaParams::isotropic(2);
        let one = ScalarField::constant(1.0, &bp);
        let r = integrate_ball(&one, &[0.0, 0.0], 1.0, &bp, &cfg()).unwrap();
        assert_relative_eq!(r.value, PI, max_relative = 1e-4);
        assert_eq!(r.method, Method::TensorChart);
        assert_eq!(r.annuli_used, 21);
    }

    #[test]
    fn annulus_area() {
        let bp = BetaParams::isotropic(2);
        let one = ScalarField::constant(1.0, &bp);
        let r = integrate_annulus(&one, &[0.0, 0.0], 1.0, 2.0, &bp, &cfg()).unwrap();
        assert_relative_eq!(r.value, 3.0 * PI, max_relative = 1e-4);
        assert!(integrate_annulus(&one, &[0.0, 0.0], 2.0, 1.0, &bp, &cfg()).is_err());
    }

    #[test]
    fn anisotropic_ball_volume_closed_form() {
        for beta in [vec![1.0, 1.0], vec![1.0, 1.5], vec![0.5, 0.75, 2.0]] {
            let bp = BetaParams::new(beta).unwrap();
            let one = ScalarField::constant(1.0, &bp);
            let c = vec![0.3; bp.n()];
            let r = integrate_ball(&one, &c, 0.8, &bp, &cfg()).unwrap();
            assert_relative_eq!(r.value, ball_volume(&bp, 0.8), max_relative = 1e-4);
        }
    }

    #[test]
    fn singular_kernel_closed_form() {
        // (4π/3) r^{3/2}
        let bp = BetaParams::isotropic(2);
        let one = ScalarField::constant(1.0, &bp);
        for r in [0.25, 1.0, 3.0] {
            let v = integrate_singular(&one, 0.5, &[0.0, 0.0], r, &bp, &cfg()).unwrap();
            assert_relative_eq!(v.value, 4.0 * PI / 3.0 * r.powf(1.5), max_relative = 1e-4);
        }
    }

    #[test]
    fn divergent_kernel_is_an_error() {
        let bp = BetaParams::isotropic(2);
        let one = ScalarField::constant(1.0, &bp);
        assert!(matches!(
            integrate_singular(&one, 2.0, &[0.0, 0.0], 1.0, &bp, &cfg()),
            Err(Error::Divergent(_))
        ));
        assert!(integrate_singular(&one, -1.0, &[0.0, 0.0], 1.0, &bp, &cfg()).is_err());
        // a field vanishing near the center does not trip the core check
        let ring = ScalarField::constant(1.0, &bp).truncated(Point(vec![3.0, 0.0]), 0.5).unwrap();
        assert!(integrate_singular(&ring, 2.0, &[0.0, 0.0], 1.0, &bp, &cfg()).is_ok());
    }

    #[test]
    fn zero_exponent_matches_ball() {
        let bp = BetaParams::new(vec![1.0, 1.5]).unwrap();
        let g = ScalarField::gaussian(Point(vec![0.1, 0.0]), 0.3, 1.0, &bp).unwrap();
        let a = integrate_singular(&g, 0.0, &[0.0, 0.0], 1.0, &bp, &cfg()).unwrap();
        let b = integrate_ball(&g, &[0.0, 0.0], 1.0, &bp, &cfg()).unwrap();
        assert_relative_eq!(a.value, b.value, max_relative = 1e-12);
    }

    #[test]
    fn telescoping_annuli() {
        let bp = BetaParams::new(vec![1.0, 1.5]).unwrap();
        let g = ScalarField::gaussian(Point(vec![0.1, -0.05]), 0.3, 1.0, &bp).unwrap();
        let c = [0.0, 0.0];
        let ball = integrate_ball(&g, &c, 1.0, &bp, &cfg()).unwrap();
        let mut sum = 0.0;
        let mut err = 0.0;
        for k in 0..6 {
            let a = integrate_annulus(&g, &c, 0.5f64.powi(k + 1), 0.5f64.powi(k), &bp, &cfg()).unwrap();
            sum += a.value;
            err += a.error_estimate;
        }
        let core = integrate_ball(&g, &c, 0.5f64.powi(6), &bp, &cfg()).unwrap();
        sum += core.value;
        err += core.error_estimate + ball.error_estimate;
        assert!((sum - ball.value).abs() <= err.max(1e-4 * ball.value), "{sum} vs {}", ball.value);
    }

    #[test]
    fn power_profile_core() {
        // ∫_{|y|<1} |y|^{-1/4} = Ω/(a (n - 1/4))
        let bp = BetaParams::new(vec![1.0, 1.5]).unwrap();
        let p = ScalarField::power(Point::origin(2), 0.25, &bp).unwrap();
        let v = integrate_ball(&p, &[0.0, 0.0], 1.0, &bp, &cfg()).unwrap();
        let exact = angular_measure(&bp) / bp.a() / 1.75;
        assert_relative_eq!(v.value, exact, max_relative = 1e-4);
    }

    #[test]
    fn log_profile_core() {
        // example field at its center: ∫_0^r t^{-1} (-ln t)^{-6} dt = (-ln r)^{-5}/5
        let bp = BetaParams::isotropic(2);
        let f = crate::fields::make_example1_field(&bp).unwrap();
        let r = (-5f64).exp();
        let v = integrate_ball(&f, &[0.0, 0.0], r, &bp, &cfg()).unwrap();
        assert_relative_eq!(v.value, 2.0 * PI * 5f64.powi(-5) / 5.0, max_relative = 1e-4);
    }

    #[test]
    fn radial_integral_numeric_matches_closed_form() {
        let w = WeightFunction::power(0.5);
        let k = RadialKernel::weighted(0.5, Some(&w));
        let v = radial_integral(2.0, k, 1.0, 0.0, 0.0, 0.3).unwrap();
        // ∫_0^0.3 t^{2-1-0.5-0.5} dt = 0.3
        assert_relative_eq!(v.value, 0.3, max_relative = 1e-10);
        let d = radial_integral(2.0, RadialKernel::weighted(1.5, Some(&w)), 1.0, 0.0, 0.0, 0.3);
        assert!(matches!(d, Err(Error::Divergent(_))));
        let l = radial_integral(2.0, RadialKernel::power(0.0), 1.0, 2.0, 6.0, 0.01).unwrap();
        assert_relative_eq!(l.value, (-(0.01f64).ln()).powi(-5) / 5.0, max_relative = 1e-9);
    }

    #[test]
    fn monte_carlo_agrees_with_chart() {
        let bp = BetaParams::new(vec![1.0, 1.0]).unwrap();
        let one = ScalarField::constant(1.0, &bp);
        let mc = monte_carlo(&one, RadialKernel::none(), &[0.0, 0.0], 0.0, 1.0, &bp, 200_000, 7).unwrap();
        let ch = integrate_ball(&one, &[0.0, 0.0], 1.0, &bp, &cfg()).unwrap();
        assert!((mc.value - ch.value).abs() < 3.0 * mc.error_estimate + ch.error_estimate);
    }

    #[test]
    fn high_dimension_falls_back_to_monte_carlo() {
        let bp = BetaParams::isotropic(5);
        let one = ScalarField::constant(1.0, &bp);
        let mut c = cfg();
        c.mc_budget = 100_000;
        let r = integrate_ball(&one, &[0.0; 5], 1.0, &bp, &c).unwrap();
        assert_eq!(r.method, Method::MonteCarlo);
        assert!((r.value - ball_volume(&bp, 1.0)).abs() < 4.0 * r.error_estimate);
    }

    #[test]
    fn deterministic() {
        let bp = BetaParams::new(vec![1.0, 1.5]).unwrap();
        let g = ScalarField::bump(Point(vec![0.1, 0.0]), 0.4, &bp).unwrap();
        let a = integrate_singular(&g, 0.3, &[0.0, 0.0], 1.0, &bp, &cfg()).unwrap();
        let b = integrate_singular(&g, 0.3, &[0.0, 0.0], 1.0, &bp, &cfg()).unwrap();
        assert_eq!(a.value.to_bits(), b.value.to_bits());
    }

    #[test]
    fn config_validation() {
        let mut c = cfg();
        c.rel_tol = 0.0;
        assert!(c.validate().is_err());
        let mut c = cfg();
        c.ladder_depth = 0;
        assert!(c.validate().is_err());
        let mut c = cfg();
        c.angular_order = 1;
        assert!(c.validate().is_err());
    }
}
