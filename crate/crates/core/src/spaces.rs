//! β-Morrey norms, β-Stummel moduli, the Morrey-to-Stummel embedding and the
//! doubling ratio of moduli.
//!
//! Suprema over centers are taken over a finite [`CenterGrid`], and suprema
//! over radii over a dyadic ladder, so every reported sup is a lower bound.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::convention::ExponentConvention;
use crate::error::{check_dim, Error, Result};
use crate::fields::{fmt12, ScalarField, SampledCurve, WeightFunction};
use crate::metric::{BetaParams, Point};
use crate::quadrature::{decompose, monte_carlo, Integrand, QuadratureConfig, RadialKernel, ShellValue};
use crate::verify::{ClaimEntry, Status};

/// Dyadic radii `r_j = r_max 2^{-j}`, `j = 0..=depth`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ladder {
    pub r_max: f64,
    pub depth: usize,
}

impl Ladder {
    pub fn new(r_max: f64, depth: usize) -> Result<Self> {
        if !(r_max > 0.0 && r_max.is_finite()) {
            return Err(Error::Domain(format!("ladder top radius must be > 0, got {r_max}")));
        }
        if depth < 1 {
            return Err(Error::Domain("ladder needs at least two rungs".into()));
        }
        Ok(Ladder { r_max, depth })
    }

    pub fn radius(&self, j: usize) -> f64 {
        self.r_max * 0.5f64.powi(j as i32)
    }

    pub fn radii(&self) -> Vec<f64> {
        (0..=self.depth).map(|j| self.radius(j)).collect()
    }

    pub fn deepened(&self, extra: usize) -> Ladder {
        Ladder { depth: self.depth + extra, ..*self }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CurveKind {
    Eta,
    Xi,
    Mu,
    MorreyQuotient,
    Mass,
}

/// A quantity sampled on a dyadic ladder (radii decreasing).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModulusCurve {
    pub kind: CurveKind,
    pub radii: Vec<f64>,
    pub values: Vec<f64>,
    pub errors: Vec<f64>,
    /// Index into the center grid attaining each value.
    pub argmax: Vec<usize>,
    pub converged: bool,
}

impl ModulusCurve {
    pub fn new(kind: CurveKind, radii: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        check_dim(radii.len(), values.len())?;
        if radii.windows(2).any(|w| w[0] <= w[1]) {
            return Err(Error::Domain("curve radii must be strictly decreasing".into()));
        }
        if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::Domain("curve values must be finite and ≥ 0".into()));
        }
        let m = radii.len();
        Ok(ModulusCurve { kind, radii, values, errors: vec![0.0; m], argmax: vec![0; m], converged: true })
    }

    pub fn len(&self) -> usize {
        self.radii.len()
    }

    pub fn is_empty(&self) -> bool {
        self.radii.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|v| *v == 0.0)
    }

    /// Non-decreasing in `r` up to the quadrature errors.
    pub fn is_monotone(&self) -> bool {
        (0..self.len().saturating_sub(1))
            .all(|j| self.values[j] + self.errors[j] + self.errors[j + 1] >= self.values[j + 1] * (1.0 - 1e-12))
    }

    /// Log-log slope of `value` against `r` by least squares over the positive rungs.
    pub fn fitted_slope(&self) -> Option<f64> {
        let pts: Vec<(f64, f64)> = self
            .radii
            .iter()
            .zip(&self.values)
            .filter(|(_, v)| **v > 0.0)
            .map(|(r, v)| (r.ln(), v.ln()))
            .collect();
        if pts.len() < 2 {
            return None;
        }
        let m = pts.len() as f64;
        let (sx, sy) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
        let (mx, my) = (sx / m, sy / m);
        let (num, den) = pts
            .iter()
            .fold((0.0, 0.0), |(n, d), (x, y)| (n + (x - mx) * (y - my), d + (x - mx) * (x - mx)));
        Some(num / den)
    }

    /// The curve as an interpolating function of `r` (for use as a weight).
    pub fn sampled(&self) -> Result<SampledCurve> {
        SampledCurve::new(&self.radii, &self.values)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("radius,value,center_argmax_index\n");
        for j in 0..self.len() {
            let _ = writeln!(out, "{},{},{}", fmt12(self.radii[j]), fmt12(self.values[j]), self.argmax[j]);
        }
        out
    }

    pub fn from_csv(text: &str, kind: CurveKind) -> Result<Self> {
        let mut radii = Vec::new();
        let mut values = Vec::new();
        let mut argmax = Vec::new();
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')) {
            if line.starts_with("radius") {
                continue;
            }
            let cols: Vec<&str> = line.split(',').map(str::trim).collect();
            let parse = |s: &str| s.parse::<f64>().map_err(|e| Error::Parse(format!("'{line}': {e}")));
            if cols.len() < 2 {
                return Err(Error::Parse(format!("bad curve line '{line}'")));
            }
            radii.push(parse(cols[0])?);
            values.push(parse(cols[1])?);
            argmax.push(match cols.get(2) {
                Some(s) => s.parse().map_err(|e| Error::Parse(format!("'{line}': {e}")))?,
                None => 0,
            });
        }
        let mut c = ModulusCurve::new(kind, radii, values)?;
        c.argmax = argmax;
        Ok(c)
    }
}

/// Candidate centers for suprema over `x ∈ R^n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CenterGrid {
    pub centers: Vec<Point>,
}

impl CenterGrid {
    pub fn new(centers: Vec<Point>) -> Result<Self> {
        let Some(first) = centers.first() else {
            return Err(Error::Domain("center grid is empty".into()));
        };
        let n = first.dim();
        for c in &centers {
            check_dim(n, c.dim())?;
        }
        Ok(CenterGrid { centers })
    }

    pub fn single(center: Point) -> Self {
        CenterGrid { centers: vec![center] }
    }

    /// The field's singular points and support center, or the origin if it has neither.
    pub fn for_field(f: &ScalarField) -> Self {
        let mut centers: Vec<Point> = f.singularities.iter().map(|s| s.point.clone()).collect();
        if let Some(s) = f.support_ball() {
            centers.push(s.center.clone());
        }
        if centers.is_empty() {
            centers.push(Point::origin(f.n()));
        }
        let mut grid = CenterGrid { centers: Vec::new() };
        for c in centers {
            grid.push(c);
        }
        grid
    }

    fn push(&mut self, c: Point) {
        if !self.centers.contains(&c) {
            self.centers.push(c);
        }
    }

    /// Adds a lattice of `per_axis^n` points over the box `[lo, hi]`.
    pub fn with_lattice(mut self, lo: &[f64], hi: &[f64], per_axis: usize) -> Result<Self> {
        let n = self.centers[0].dim();
        check_dim(n, lo.len())?;
        check_dim(n, hi.len())?;
        if per_axis < 1 {
            return Err(Error::Domain("lattice needs at least one point per axis".into()));
        }
        let total = per_axis.pow(n as u32);
        for mut flat in 0..total {
            let mut p = vec![0.0; n];
            for k in 0..n {
                let i = flat % per_axis;
                flat /= per_axis;
                p[k] = if per_axis == 1 {
                    0.5 * (lo[k] + hi[k])
                } else {
                    lo[k] + (hi[k] - lo[k]) * i as f64 / (per_axis - 1) as f64
                };
            }
            self.push(Point(p));
        }
        Ok(self)
    }

    pub fn covers_singularities(&self, f: &ScalarField) -> bool {
        f.singularities.iter().all(|s| self.centers.contains(&s.point))
    }
}

/// Ball integrals `∫_{B_β(c, r_j)} f K` at every rung for one center.
fn center_balls(
    f: &dyn Integrand,
    kernel: RadialKernel<'_>,
    center: &[f64],
    ladder: &Ladder,
    bp: &BetaParams,
    cfg: &QuadratureConfig,
) -> Result<(Vec<ShellValue>, bool)> {
    if cfg.use_monte_carlo(bp.n()) {
        let balls = ladder
            .radii()
            .iter()
            .map(|&r| {
                monte_carlo(f, kernel, center, 0.0, r, bp, cfg.mc_budget, cfg.seed)
                    .map(|v| ShellValue { value: v.value, error: v.error_estimate })
            })
            .collect::<Result<Vec<_>>>()?;
        return Ok((balls, true));
    }
    let d = decompose(f, kernel, center, ladder.r_max, ladder.depth, bp, cfg)?;
    Ok(((0..=ladder.depth).map(|j| d.ball(j)).collect(), d.converged))
}

/// Per-center ball integrals, in grid order.
fn grid_balls(
    f: &dyn Integrand,
    kernel: RadialKernel<'_>,
    grid: &CenterGrid,
    ladder: &Ladder,
    bp: &BetaParams,
    cfg: &QuadratureConfig,
) -> Result<Vec<(Vec<ShellValue>, bool)>> {
    for c in &grid.centers {
        check_dim(bp.n(), c.dim())?;
    }
    grid.centers
        .par_iter()
        .enumerate()
        .map(|(i, c)| {
            center_balls(f, kernel, c, ladder, bp, cfg).map_err(|e| match e {
                Error::Divergent(m) => Error::Divergent(format!("{m} (center #{i} = {:?})", c.0)),
                other => other,
            })
        })
        .collect()
}

/// Pointwise sup over centers of `scale(r_j) · balls[c][j]`.
fn sup_curve(kind: CurveKind, ladder: &Ladder, balls: &[(Vec<ShellValue>, bool)], scale: impl Fn(f64) -> f64) -> ModulusCurve {
    let radii = ladder.radii();
    let mut values = Vec::with_capacity(radii.len());
    let mut errors = Vec::with_capacity(radii.len());
    let mut argmax = Vec::with_capacity(radii.len());
    for (j, &r) in radii.iter().enumerate() {
        let s = scale(r);
        let (i, best) = balls
            .iter()
            .enumerate()
            .map(|(i, (b, _))| (i, b[j]))
            .fold((0, ShellValue { value: f64::NEG_INFINITY, error: 0.0 }), |acc, (i, v)| {
                if v.value.abs() > acc.1.value { (i, ShellValue { value: v.value.abs(), error: v.error }) } else { acc }
            });
        values.push(best.value * s);
        errors.push(best.error * s);
        argmax.push(i);
    }
    ModulusCurve { kind, radii, values, errors, argmax, converged: balls.iter().all(|b| b.1) }
}

/// `sup_x ∫_{B_β(x, r_j)} |f(y)| / (|x - y|_β^s · w(|x - y|_β)) dy` on the ladder.
#[allow(clippy::too_many_arguments)]
pub fn singular_modulus(
    f: &dyn Integrand,
    s: f64,
    weight: Option<&WeightFunction>,
    grid: &CenterGrid,
    ladder: &Ladder,
    bp: &BetaParams,
    cfg: &QuadratureConfig,
) -> Result<ModulusCurve> {
    if !(s >= 0.0) {
        return Err(Error::Domain(format!("kernel exponent must be ≥ 0, got {s}")));
    }
    let kernel = RadialKernel::weighted(s, weight);
    let balls = grid_balls(f, kernel, grid, ladder, bp, cfg)?;
    let kind = if weight.is_some() { CurveKind::Xi } else { CurveKind::Eta };
    Ok(sup_curve(kind, ladder, &balls, |_| 1.0))
}

/// The Stummel modulus `η_β` (or `ξ_β` with a weight) of order `p`.
#[allow(clippy::too_many_arguments)]
pub fn stummel_modulus(
    f: &dyn Integrand,
    p: f64,
    bp: &BetaParams,
    grid: &CenterGrid,
    ladder: &Ladder,
    cfg: &QuadratureConfig,
    weight: Option<&WeightFunction>,
    convention: ExponentConvention,
) -> Result<ModulusCurve> {
    check_order(p, bp)?;
    if let Some(w) = weight {
        w.verify_on_ladder(ladder.radius(ladder.depth), ladder.r_max, 4 * (ladder.depth + 1))?;
    }
    singular_modulus(f, convention.kernel_exponent(p, bp), weight, grid, ladder, bp, cfg)
}

pub(crate) fn check_order(p: f64, bp: &BetaParams) -> Result<()> {
    let n = bp.n() as f64;
    if !(p > 1.0 && p < n) {
        return Err(Error::Domain(format!("order p must satisfy 1 < p < n = {n}, got {p}")));
    }
    Ok(())
}

/// Sup over centers of `∫_{B_β(x, r_j)} |f|`.
pub fn mass_curve(
    f: &dyn Integrand,
    grid: &CenterGrid,
    ladder: &Ladder,
    bp: &BetaParams,
    cfg: &QuadratureConfig,
) -> Result<ModulusCurve> {
    let balls = grid_balls(f, RadialKernel::none(), grid, ladder, bp, cfg)?;
    Ok(sup_curve(CurveKind::Mass, ladder, &balls, |_| 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum Membership {
    BoundedOnLadder,
    /// Monotone growth over the smallest radii, `quotient ~ r^{-exponent}`.
    Growing { exponent: f64 },
}

/// Rungs (at the small-radius end) over which growth must be monotone.
pub const GROWTH_WINDOW: usize = 8;

impl Membership {
    /// Classifies quotients sampled on a decreasing-radius ladder.
    pub fn classify(radii: &[f64], values: &[f64]) -> Membership {
        let m = values.len();
        if m < GROWTH_WINDOW + 1 {
            return Membership::BoundedOnLadder;
        }
        let tail = &values[m - GROWTH_WINDOW - 1..];
        let increasing = tail.windows(2).all(|w| w[1] > w[0]);
        let total = tail[tail.len() - 1] / tail[0];
        if increasing && total > 1.01 {
            let rr = &radii[m - GROWTH_WINDOW - 1..];
            let exponent = -(tail[tail.len() - 1] / tail[0]).ln() / (rr[rr.len() - 1] / rr[0]).ln();
            Membership::Growing { exponent }
        } else {
            Membership::BoundedOnLadder
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MorreyEstimate {
    /// Largest quotient seen (a lower bound of the true norm).
    pub norm: f64,
    pub error: f64,
    pub argmax_center: usize,
    pub argmax_radius: f64,
    pub quotients: ModulusCurve,
    pub membership: Membership,
}

/// `sup_{x, r} r^{-scale·λ} ∫_{B_β(x, r)} |f|` over the grid and the ladder,
/// with `scale = a` (generalized) or `1` (literal).
pub fn morrey_norm(
    f: &dyn Integrand,
    lambda: f64,
    bp: &BetaParams,
    grid: &CenterGrid,
    ladder: &Ladder,
    cfg: &QuadratureConfig,
    convention: ExponentConvention,
) -> Result<MorreyEstimate> {
    let n = bp.n() as f64;
    if !(lambda > 0.0 && lambda <= n) {
        return Err(Error::Domain(format!("Morrey index must satisfy 0 < λ ≤ n = {n}, got {lambda}")));
    }
    let e = convention.scale(bp) * lambda;
    let balls = grid_balls(f, RadialKernel::none(), grid, ladder, bp, cfg)?;
    let quotients = sup_curve(CurveKind::MorreyQuotient, ladder, &balls, |r| r.powf(-e));
    let (j, _) = quotients
        .values
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (j, v)| if *v > acc.1 { (j, *v) } else { acc });
    let membership = Membership::classify(&quotients.radii, &quotients.values);
    Ok(MorreyEstimate {
        norm: quotients.values[j],
        error: quotients.errors[j],
        argmax_center: quotients.argmax[j],
        argmax_radius: quotients.radii[j],
        quotients,
        membership,
    })
}

/// Constant of the Morrey-to-Stummel embedding:
/// `2^{(n-p)a} / (1 - 2^{-a(λ - (n-p))})`.
pub fn lemma1_constant(p: f64, lambda: f64, bp: &BetaParams) -> Result<f64> {
    check_order(p, bp)?;
    let n = bp.n() as f64;
    let a = bp.a();
    let gap = lambda - (n - p);
    if !(gap > 0.0) {
        return Err(Error::Divergent(format!(
            "geometric series diverges: need λ > n - p = {}, got λ = {lambda}",
            n - p
        )));
    }
    if lambda > n {
        return Err(Error::Domain(format!("λ must be ≤ n = {n}, got {lambda}")));
    }
    Ok(2f64.powf((n - p) * a) / (1.0 - 2f64.powf(-a * gap)))
}

/// Extra rungs for the Morrey norm below the modulus ladder.
pub const MORREY_EXTRA_RUNGS: usize = 8;

/// Checks `η_β(r_j) ≤ C r_j^{(λ-(n-p))a} ‖f‖_{L_{1,λ}^β}` at every rung.
#[allow(clippy::too_many_arguments)]
pub fn check_lemma1(
    f: &dyn Integrand,
    p: f64,
    lambda: f64,
    bp: &BetaParams,
    grid: &CenterGrid,
    ladder: &Ladder,
    cfg: &QuadratureConfig,
) -> Result<(ClaimEntry, ModulusCurve)> {
    let c = lemma1_constant(p, lambda, bp)?;
    let conv = ExponentConvention::Generalized;
    let eta = stummel_modulus(f, p, bp, grid, ladder, cfg, None, conv)?;
    let morrey = morrey_norm(f, lambda, bp, grid, &ladder.deepened(MORREY_EXTRA_RUNGS), cfg, conv)?;
    let n = bp.n() as f64;
    let e = (lambda - (n - p)) * bp.a();
    let rhs: Vec<f64> = eta.radii.iter().map(|r| c * r.powf(e) * morrey.norm).collect();
    let slack: Vec<f64> = eta
        .radii
        .iter()
        .zip(&eta.errors)
        .map(|(r, err)| 2.0 * (err + c * r.powf(e) * morrey.error))
        .collect();
    let mut entry = ClaimEntry::new("lemma1")
        .constant("C(n,p,lambda,beta)", c, "closed form of the geometric series over dyadic annuli")
        .constant("morrey_norm", morrey.norm, "measured: max Morrey quotient over centers and ladder (lower bound)")
        .compare(eta.radii.clone(), eta.values.clone(), rhs, slack);
    if let Some(i) = entry.worst_index {
        let center = grid.centers[eta.argmax[i]].0.clone();
        entry.witness.get_or_insert_with(Default::default).center = Some(center);
    }
    if let Membership::Growing { exponent } = morrey.membership {
        entry = entry.note(format!(
            "Morrey quotient grows like r^-{exponent:.3} on the ladder: norm is finite only on the sampled radii"
        ));
    }
    Ok((entry, eta))
}

/// Fit tolerance for the supplied growth exponent of `η`.
const CONVERSE_FIT_TOL: f64 = 0.10;

/// Converse embedding: `η_β(r) ~ r^{αa}` gives `∫_{B_β(x,r)} |f| ≤ r^{(n-p)a} η_β(r)`
/// and a bounded Morrey quotient for `λ = n - p + α`.
#[allow(clippy::too_many_arguments)]
pub fn check_lemma1_converse(
    f: &dyn Integrand,
    p: f64,
    alpha: Option<f64>,
    bp: &BetaParams,
    grid: &CenterGrid,
    ladder: &Ladder,
    cfg: &QuadratureConfig,
) -> Result<ClaimEntry> {
    let conv = ExponentConvention::Generalized;
    let s = conv.kernel_exponent(p, bp);
    let eta = stummel_modulus(f, p, bp, grid, ladder, cfg, None, conv)?;
    let mass = mass_curve(f, grid, ladder, bp, cfg)?;
    let id = "lemma1.converse";
    if eta.is_zero() && mass.is_zero() {
        return Ok(ClaimEntry::new(id).with_status(Status::Pass).note("vacuous: zero field"));
    }
    let a = bp.a();
    let Some(slope) = eta.fitted_slope() else {
        return Ok(ClaimEntry::new(id).note("no positive rungs to fit"));
    };
    let fitted = slope / a;
    let alpha = match alpha {
        Some(al) if (fitted - al).abs() > CONVERSE_FIT_TOL * al.abs() => {
            return Ok(ClaimEntry::new(id)
                .note(format!("fitted exponent {fitted:.4} inconsistent with supplied α = {al}")));
        }
        Some(al) => al,
        None => fitted,
    };
    let lambda = bp.n() as f64 - p + alpha;
    let rhs: Vec<f64> = eta.radii.iter().zip(&eta.values).map(|(r, v)| r.powf(s) * v).collect();
    let slack: Vec<f64> = eta
        .radii
        .iter()
        .zip(eta.errors.iter().zip(&mass.errors))
        .map(|(r, (e1, e2))| 2.0 * (r.powf(s) * e1 + e2))
        .collect();
    let quotients: Vec<f64> = mass.radii.iter().zip(&mass.values).map(|(r, m)| r.powf(-a * lambda) * m).collect();
    let membership = Membership::classify(&mass.radii, &quotients);
    let bounded = membership == Membership::BoundedOnLadder;
    let qmax = quotients.iter().cloned().fold(0.0, f64::max);
    Ok(ClaimEntry::new(id)
        .constant("alpha", alpha, "fitted log-log slope of the modulus divided by a")
        .constant("lambda", lambda, "n - p + alpha")
        .constant("max_morrey_quotient", qmax, "measured on the ladder")
        .compare(mass.radii.clone(), mass.values.clone(), rhs, slack)
        .require(bounded, "Morrey quotient bounded on the ladder"))
}

/// Largest successive ratio `η(r_j) / η(r_{j+1})` (the empirical doubling constant).
pub fn doubling_constant(curve: &ModulusCurve) -> Result<f64> {
    if curve.len() < 3 {
        return Err(Error::Domain("doubling ratio needs at least three rungs".into()));
    }
    let mut worst: f64 = 1.0;
    for j in 0..curve.len() - 1 {
        let (num, den) = (curve.values[j], curve.values[j + 1]);
        if den == 0.0 {
            if num != 0.0 {
                return Err(Error::Range(format!(
                    "modulus vanishes at r = {} but not at r = {}",
                    curve.radii[j + 1],
                    curve.radii[j]
                )));
            }
            continue;
        }
        worst = worst.max(num / den);
    }
    if !worst.is_finite() {
        return Err(Error::Range("doubling ratio is not finite".into()));
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::angular_measure;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn ladder_and_csv_round_trip() {
        let l = Ladder::new(1.0, 3).unwrap();
        assert_eq!(l.radii(), vec![1.0, 0.5, 0.25, 0.125]);
        assert!(Ladder::new(0.0, 3).is_err());
        let c = ModulusCurve::new(CurveKind::Eta, l.radii(), vec![4.0, 3.0, 2.0, 1.0]).unwrap();
        let back = ModulusCurve::from_csv(&c.to_csv(), CurveKind::Eta).unwrap();
        assert_eq!(back.values, c.values);
        assert!(c.to_csv().starts_with("radius,value,center_argmax_index\n"));
    }

    #[test]
    fn constant_field_stummel_closed_form() {
        let bp = BetaParams::isotropic(2);
        let one = ScalarField::constant(1.0, &bp);
        let grid = CenterGrid::for_field(&one);
        let ladder = Ladder::new(1.0, 10).unwrap();
        let cfg = QuadratureConfig::default();
        let eta =
            stummel_modulus(&one, 1.5, &bp, &grid, &ladder, &cfg, None, ExponentConvention::Generalized).unwrap();
        for (r, v) in eta.radii.iter().zip(&eta.values) {
            assert_relative_eq!(*v, 4.0 * PI / 3.0 * r.powf(1.5), max_relative = 1e-4);
        }
        assert!(eta.is_monotone());
        let cd = doubling_constant(&eta).unwrap();
        assert_relative_eq!(cd, 2f64.powf(1.5), max_relative = 1e-4);
    }

    #[test]
    fn morrey_of_constant_at_lambda_n_is_ball_volume() {
        let bp = BetaParams::isotropic(2);
        let one = ScalarField::constant(1.0, &bp);
        let grid = CenterGrid::for_field(&one);
        let ladder = Ladder::new(1.0, 12).unwrap();
        let m = morrey_norm(&one, 2.0, &bp, &grid, &ladder, &QuadratureConfig::default(), ExponentConvention::Generalized)
            .unwrap();
        assert_relative_eq!(m.norm, PI, max_relative = 1e-4);
        assert_eq!(m.membership, Membership::BoundedOnLadder);
    }

    #[test]
    fn zero_field() {
        let bp = BetaParams::isotropic(2);
        let z = ScalarField::zero(&bp);
        let grid = CenterGrid::for_field(&z);
        let ladder = Ladder::new(1.0, 5).unwrap();
        let cfg = QuadratureConfig::default();
        let m = morrey_norm(&z, 1.0, &bp, &grid, &ladder, &cfg, ExponentConvention::Generalized).unwrap();
        assert_eq!(m.norm, 0.0);
        let eta = stummel_modulus(&z, 1.5, &bp, &grid, &ladder, &cfg, None, ExponentConvention::Generalized).unwrap();
        assert!(eta.is_zero());
        assert_eq!(doubling_constant(&eta).unwrap(), 1.0);
        let (e, _) = check_lemma1(&z, 1.5, 1.75, &bp, &grid, &ladder, &cfg).unwrap();
        assert_eq!(e.status, Status::Pass);
        let c = check_lemma1_converse(&z, 1.5, None, &bp, &grid, &ladder, &cfg).unwrap();
        assert_eq!(c.status, Status::Pass);
    }

    #[test]
    fn lemma1_constant_closed_form() {
        let bp = BetaParams::isotropic(2);
        let c = lemma1_constant(1.5, 1.75, &bp).unwrap();
        let series: f64 = (0..200).map(|k| 2f64.sqrt() * 2f64.powf(-1.25 * k as f64)).sum();
        assert_relative_eq!(c, series, max_relative = 1e-12);
        assert_relative_eq!(c, 2f64.sqrt() / (1.0 - 2f64.powf(-1.25)), max_relative = 1e-12);
        assert!(matches!(lemma1_constant(1.5, 0.5, &bp), Err(Error::Divergent(_))));
        assert!(lemma1_constant(1.5, 0.75, &bp).unwrap() > lemma1_constant(1.5, 1.0, &bp).unwrap());
    }

    #[test]
    fn membership_classification() {
        let radii: Vec<f64> = (0..12).map(|j| 0.5f64.powi(j)).collect();
        let flat = vec![1.0; 12];
        assert_eq!(Membership::classify(&radii, &flat), Membership::BoundedOnLadder);
        let grow: Vec<f64> = radii.iter().map(|r| r.powf(-0.5)).collect();
        match Membership::classify(&radii, &grow) {
            Membership::Growing { exponent } => assert_relative_eq!(exponent, 0.5, max_relative = 1e-12),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn converse_for_power_field() {
        let bp = BetaParams::isotropic(2);
        let f = ScalarField::power(Point::origin(2), 0.25, &bp).unwrap();
        let grid = CenterGrid::for_field(&f);
        let ladder = Ladder::new(1.0, 10).unwrap();
        let e = check_lemma1_converse(&f, 1.5, Some(1.25), &bp, &grid, &ladder, &QuadratureConfig::default()).unwrap();
        assert_eq!(e.status, Status::Pass, "{e:?}");
        let bad = check_lemma1_converse(&f, 1.5, Some(0.5), &bp, &grid, &ladder, &QuadratureConfig::default()).unwrap();
        assert_eq!(bad.status, Status::Inconclusive);
    }

    #[test]
    fn power_field_modulus_matches_radial_closed_form() {
        // ∫_{|y|<r} |y|^{-s-q} = (Ω/a) r^{n-s-q}/(n-s-q)
        let bp = BetaParams::new(vec![1.0, 1.5]).unwrap();
        let f = ScalarField::power(Point::origin(2), 0.25, &bp).unwrap();
        let grid = CenterGrid::for_field(&f);
        let ladder = Ladder::new(1.0, 6).unwrap();
        let eta = stummel_modulus(&f, 1.5, &bp, &grid, &ladder, &QuadratureConfig::default(), None, ExponentConvention::Generalized)
            .unwrap();
        let m = 2.0 - 1.25 - 0.25;
        for (r, v) in eta.radii.iter().zip(&eta.values) {
            assert_relative_eq!(*v, angular_measure(&bp) / bp.a() * r.powf(m) / m, max_relative = 1e-4);
        }
    }

    #[test]
    fn grid_includes_singularities_and_lattice() {
        let bp = BetaParams::isotropic(2);
        let f = ScalarField::power(Point(vec![0.5, 0.5]), 0.1, &bp).unwrap();
        let g = CenterGrid::for_field(&f).with_lattice(&[-1.0, -1.0], &[1.0, 1.0], 3).unwrap();
        assert!(g.covers_singularities(&f));
        assert_eq!(g.centers.len(), 10);
        assert!(CenterGrid::new(vec![]).is_err());
    }
}
