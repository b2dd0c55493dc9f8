//! Scalar fields on R^n and positive weight functions on ]0, ∞[.
//!
//! Fields come from a small registry of closed forms (so that integrals have
//! exact oracles) or from a sampled grid read from a text file. Singular
//! points are declared up front together with their local radial profile;
//! quadrature never places a node on them.

use std::f64::consts::E;
use std::fmt::Write as _;
use std::path::Path;

use crate::convention::ExponentConvention;
use crate::error::{check_dim, Error, Result};
use crate::metric::{BetaParams, Point};
use crate::quadrature::legendre::GaussLegendre;

/// Local behaviour `coef · t^{-power} · (-ln t)^{-log_power}` of a field around
/// a singular point, with `t` the β-distance to it; exact for `t < valid_below`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialProfile {
    pub coef: f64,
    pub power: f64,
    pub log_power: f64,
    pub valid_below: f64,
}

impl RadialProfile {
    pub fn value(&self, t: f64) -> f64 {
        let mut v = self.coef * t.powf(-self.power);
        if self.log_power != 0.0 {
            v *= (-t.ln()).powf(-self.log_power);
        }
        v
    }

    /// Profile of `f^p`.
    pub fn powered(&self, p: f64) -> RadialProfile {
        RadialProfile {
            coef: self.coef.powf(p),
            power: self.power * p,
            log_power: self.log_power * p,
            valid_below: self.valid_below,
        }
    }

    pub fn scaled(&self, c: f64) -> RadialProfile {
        RadialProfile { coef: self.coef * c, ..*self }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Singularity {
    pub point: Point,
    pub profile: RadialProfile,
}

/// Open β-ball outside of which a field vanishes.
#[derive(Debug, Clone, PartialEq)]
pub struct SupportBall {
    pub center: Point,
    pub radius: f64,
}

/// Values on a regular grid, interpolated multilinearly and zero outside.
#[derive(Debug, Clone, PartialEq)]
pub struct GridData {
    pub dims: Vec<usize>,
    pub origin: Vec<f64>,
    pub spacing: Vec<f64>,
    /// Row-major, last index fastest.
    pub values: Vec<f64>,
    gradient: Vec<Vec<f64>>,
}

impl GridData {
    pub fn new(dims: Vec<usize>, origin: Vec<f64>, spacing: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let n = dims.len();
        if n == 0 {
            return Err(Error::Parse("grid needs at least one axis".into()));
        }
        check_dim(n, origin.len())?;
        check_dim(n, spacing.len())?;
        if dims.iter().any(|d| *d < 2) {
            return Err(Error::Parse("every grid axis needs at least 2 nodes".into()));
        }
        if spacing.iter().any(|h| !(*h > 0.0)) {
            return Err(Error::Parse("grid spacing must be positive".into()));
        }
        let total: usize = dims.iter().product();
        if values.len() != total {
            return Err(Error::Parse(format!(
                "grid expects {total} values, found {}",
                values.len()
            )));
        }
        let mut g = GridData { dims, origin, spacing, values, gradient: Vec::new() };
        g.gradient = (0..n).map(|axis| g.nodal_derivative(axis)).collect();
        Ok(g)
    }

    /// Samples `f` on the grid nodes.
    pub fn sample(
        dims: Vec<usize>,
        origin: Vec<f64>,
        spacing: Vec<f64>,
        f: impl Fn(&[f64]) -> f64,
    ) -> Result<Self> {
        let total: usize = dims.iter().product();
        let mut values = Vec::with_capacity(total);
        let mut x = vec![0.0; dims.len()];
        for flat in 0..total {
            let idx = unflatten(flat, &dims);
            for i in 0..dims.len() {
                x[i] = origin[i] + idx[i] as f64 * spacing[i];
            }
            values.push(f(&x));
        }
        Self::new(dims, origin, spacing, values)
    }

    pub fn n(&self) -> usize {
        self.dims.len()
    }

    fn flat(&self, idx: &[usize]) -> usize {
        idx.iter().zip(&self.dims).fold(0, |acc, (i, d)| acc * d + i)
    }

    fn nodal_derivative(&self, axis: usize) -> Vec<f64> {
        let h = self.spacing[axis];
        (0..self.values.len())
            .map(|flat| {
                let idx = unflatten(flat, &self.dims);
                let mut lo = idx.clone();
                let mut hi = idx.clone();
                let i = idx[axis];
                let span = if i == 0 {
                    hi[axis] = 1;
                    h
                } else if i + 1 == self.dims[axis] {
                    lo[axis] = i - 1;
                    h
                } else {
                    lo[axis] = i - 1;
                    hi[axis] = i + 1;
                    2.0 * h
                };
                (self.values[self.flat(&hi)] - self.values[self.flat(&lo)]) / span
            })
            .collect()
    }

    fn interpolate(&self, data: &[f64], x: &[f64]) -> f64 {
        let n = self.n();
        let mut base = vec![0usize; n];
        let mut frac = vec![0.0; n];
        for i in 0..n {
            let mut s = (x[i] - self.origin[i]) / self.spacing[i];
            // nodes reproduce their values exactly despite round-off in x
            if (s - s.round()).abs() <= 1e-9 * s.abs().max(1.0) {
                s = s.round();
            }
            let last = (self.dims[i] - 1) as f64;
            if !(0.0..=last).contains(&s) {
                return 0.0;
            }
            let cell = (s.floor() as usize).min(self.dims[i] - 2);
            base[i] = cell;
            frac[i] = s - cell as f64;
        }
        let mut acc = 0.0;
        let mut idx = vec![0usize; n];
        for corner in 0..(1usize << n) {
            let mut w = 1.0;
            for i in 0..n {
                let bit = corner >> i & 1;
                idx[i] = base[i] + bit;
                w *= if bit == 1 { frac[i] } else { 1.0 - frac[i] };
            }
            if w != 0.0 {
                acc += w * data[self.flat(&idx)];
            }
        }
        acc
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.interpolate(&self.values, x)
    }

    fn gradient_at(&self, x: &[f64]) -> Vec<f64> {
        self.gradient.iter().map(|g| self.interpolate(g, x)).collect()
    }

    /// Parses the grid text format: `n,<n>`, `dims,…`, `origin,…`, `spacing,…`
    /// header lines, then row-major values separated by commas or whitespace.
    /// Lines starting with `#` are comments.
    pub fn parse(text: &str) -> Result<Self> {
        let mut n = None;
        let mut dims = None;
        let mut origin = None;
        let mut spacing = None;
        let mut values = Vec::new();
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let parts: Vec<&str> = line.split(',').map(str::trim).collect();
            let head = parts[0];
            let nums = || -> Result<Vec<f64>> {
                parts[1..]
                    .iter()
                    .map(|s| s.parse::<f64>().map_err(|e| Error::Parse(format!("'{s}': {e}"))))
                    .collect()
            };
            match head {
                "n" => n = Some(nums()?.first().copied().unwrap_or(0.0) as usize),
                "dims" => dims = Some(nums()?.into_iter().map(|d| d as usize).collect::<Vec<_>>()),
                "origin" => origin = Some(nums()?),
                "spacing" => spacing = Some(nums()?),
                _ => {
                    for tok in line.split(|c: char| c == ',' || c.is_whitespace()).filter(|s| !s.is_empty()) {
                        values.push(tok.parse::<f64>().map_err(|e| Error::Parse(format!("'{tok}': {e}")))?);
                    }
                }
            }
        }
        let missing = |k: &str| Error::Parse(format!("grid header is missing '{k}'"));
        let n = n.ok_or_else(|| missing("n"))?;
        let dims = dims.ok_or_else(|| missing("dims"))?;
        check_dim(n, dims.len())?;
        Self::new(
            dims,
            origin.ok_or_else(|| missing("origin"))?,
            spacing.ok_or_else(|| missing("spacing"))?,
            values,
        )
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn to_text(&self) -> String {
        let join = |v: &[f64]| v.iter().map(|x| fmt12(*x)).collect::<Vec<_>>().join(",");
        let mut out = String::new();
        let _ = writeln!(out, "n,{}", self.n());
        let _ = writeln!(
            out,
            "dims,{}",
            self.dims.iter().map(|d| d.to_string()).collect::<Vec<_>>().join(",")
        );
        let _ = writeln!(out, "origin,{}", join(&self.origin));
        let _ = writeln!(out, "spacing,{}", join(&self.spacing));
        for row in self.values.chunks(*self.dims.last().unwrap()) {
            let _ = writeln!(out, "{}", join(row));
        }
        out
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }
}

fn unflatten(mut flat: usize, dims: &[usize]) -> Vec<usize> {
    let mut idx = vec![0; dims.len()];
    for i in (0..dims.len()).rev() {
        idx[i] = flat % dims[i];
        flat /= dims[i];
    }
    idx
}

/// Formats with 12 significant digits.
pub fn fmt12(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let s = format!("{:.11e}", x);
    let v: f64 = s.parse().unwrap_or(x);
    if (1e-6..1e15).contains(&v.abs()) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

/// Built-in closed-form fields.
#[derive(Debug, Clone, PartialEq)]
pub enum FieldKind {
    Constant { value: f64 },
    /// `amplitude · exp(-|x - c|² / (2 width²))` (Euclidean).
    Gaussian { center: Point, width: f64, amplitude: f64 },
    /// `|x - c|_β^{-exponent}`.
    Power { center: Point, exponent: f64 },
    /// `χ_B(x) / (|x|_β^{w} |log |x|_β|^6)` with `B = B_β(0, radius)`.
    Example1 { weight_exponent: f64, radius: f64 },
    /// Smooth compactly supported `exp(1 - 1/(1 - |x - c|²/R²))` (Euclidean).
    Bump { center: Point, radius: f64 },
    Linear { coeffs: Vec<f64> },
    /// `Σ c_i x_i²`.
    Quadratic { coeffs: Vec<f64> },
    Grid(GridData),
}

/// An evaluable scalar field with declared support and singularities.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    pub kind: FieldKind,
    pub bp: BetaParams,
    pub support: Option<SupportBall>,
    pub singularities: Vec<Singularity>,
    pub nonnegative: bool,
    truncated: bool,
}

/// Radius of the smallest β-ball centred at the origin containing `[-h_1,h_1]×…`.
fn beta_radius_of_box(half: &[f64], bp: &BetaParams) -> f64 {
    bp.gauge(half)
}

impl ScalarField {
    fn build(kind: FieldKind, bp: &BetaParams) -> Self {
        ScalarField {
            kind,
            bp: bp.clone(),
            support: None,
            singularities: Vec::new(),
            nonnegative: true,
            truncated: false,
        }
    }

    pub fn constant(value: f64, bp: &BetaParams) -> Self {
        let mut f = Self::build(FieldKind::Constant { value }, bp);
        f.nonnegative = value >= 0.0;
        f
    }

    pub fn zero(bp: &BetaParams) -> Self {
        Self::constant(0.0, bp)
    }

    pub fn gaussian(center: Point, width: f64, amplitude: f64, bp: &BetaParams) -> Result<Self> {
        check_dim(bp.n(), center.dim())?;
        if !(width > 0.0) {
            return Err(Error::Domain("gaussian width must be > 0".into()));
        }
        let mut f = Self::build(FieldKind::Gaussian { center, width, amplitude }, bp);
        f.nonnegative = amplitude >= 0.0;
        Ok(f)
    }

    pub fn power(center: Point, exponent: f64, bp: &BetaParams) -> Result<Self> {
        check_dim(bp.n(), center.dim())?;
        if !(exponent >= 0.0) {
            return Err(Error::Domain("power exponent must be ≥ 0".into()));
        }
        let mut f = Self::build(FieldKind::Power { center: center.clone(), exponent }, bp);
        if exponent > 0.0 {
            f.singularities.push(Singularity {
                point: center,
                profile: RadialProfile { coef: 1.0, power: exponent, log_power: 0.0, valid_below: f64::INFINITY },
            });
        }
        Ok(f)
    }

    pub fn bump(center: Point, radius: f64, bp: &BetaParams) -> Result<Self> {
        check_dim(bp.n(), center.dim())?;
        if !(radius > 0.0) {
            return Err(Error::Domain("bump radius must be > 0".into()));
        }
        let beta_radius = beta_radius_of_box(&vec![radius; bp.n()], bp);
        let mut f = Self::build(FieldKind::Bump { center: center.clone(), radius }, bp);
        f.support = Some(SupportBall { center, radius: beta_radius * (1.0 + 1e-12) });
        Ok(f)
    }

    pub fn linear(coeffs: Vec<f64>, bp: &BetaParams) -> Result<Self> {
        check_dim(bp.n(), coeffs.len())?;
        let mut f = Self::build(FieldKind::Linear { coeffs }, bp);
        f.nonnegative = false;
        Ok(f)
    }

    pub fn quadratic(coeffs: Vec<f64>, bp: &BetaParams) -> Result<Self> {
        check_dim(bp.n(), coeffs.len())?;
        let mut f = Self::build(FieldKind::Quadratic { coeffs: coeffs.clone() }, bp);
        f.nonnegative = coeffs.iter().all(|c| *c >= 0.0);
        Ok(f)
    }

    pub fn grid(data: GridData, bp: &BetaParams) -> Result<Self> {
        check_dim(bp.n(), data.n())?;
        let center: Vec<f64> = (0..data.n())
            .map(|i| data.origin[i] + 0.5 * (data.dims[i] - 1) as f64 * data.spacing[i])
            .collect();
        let half: Vec<f64> = (0..data.n())
            .map(|i| 0.5 * (data.dims[i] - 1) as f64 * data.spacing[i])
            .collect();
        let radius = beta_radius_of_box(&half, bp) * (1.0 + 1e-9);
        let nonnegative = data.values.iter().all(|v| *v >= 0.0);
        let mut f = Self::build(FieldKind::Grid(data), bp);
        f.support = Some(SupportBall { center: Point(center), radius });
        f.nonnegative = nonnegative;
        Ok(f)
    }

    /// Restricts the field to the open ball `B_β(center, radius)`.
    pub fn truncated(mut self, center: Point, radius: f64) -> Result<Self> {
        check_dim(self.bp.n(), center.dim())?;
        if !(radius > 0.0) {
            return Err(Error::Domain("truncation radius must be > 0".into()));
        }
        self.support = Some(SupportBall { center, radius });
        self.truncated = true;
        for s in &mut self.singularities {
            s.profile.valid_below = s.profile.valid_below.min(radius);
        }
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.bp.n()
    }

    /// Value at `x`; unbounded at declared singularities.
    pub fn eval(&self, x: &[f64]) -> f64 {
        if self.truncated {
            if let Some(s) = &self.support {
                if self.bp.gauge_diff(x, &s.center) >= s.radius {
                    return 0.0;
                }
            }
        }
        match &self.kind {
            FieldKind::Constant { value } => *value,
            FieldKind::Gaussian { center, width, amplitude } => {
                let d2: f64 = x.iter().zip(center.iter()).map(|(a, b)| (a - b) * (a - b)).sum();
                amplitude * (-d2 / (2.0 * width * width)).exp()
            }
            FieldKind::Power { center, exponent } => {
                if *exponent == 0.0 {
                    return 1.0;
                }
                self.bp.gauge_diff(x, center).powf(-exponent)
            }
            FieldKind::Example1 { weight_exponent, radius } => {
                let t = self.bp.gauge(x);
                if t >= *radius {
                    0.0
                } else {
                    1.0 / (t.powf(*weight_exponent) * t.ln().abs().powi(6))
                }
            }
            FieldKind::Bump { center, radius } => {
                let q: f64 = x.iter().zip(center.iter()).map(|(a, b)| (a - b) * (a - b)).sum::<f64>()
                    / (radius * radius);
                if q >= 1.0 {
                    0.0
                } else {
                    (1.0 - 1.0 / (1.0 - q)).exp()
                }
            }
            FieldKind::Linear { coeffs } => coeffs.iter().zip(x).map(|(c, v)| c * v).sum(),
            FieldKind::Quadratic { coeffs } => coeffs.iter().zip(x).map(|(c, v)| c * v * v).sum(),
            FieldKind::Grid(g) => g.eval(x),
        }
    }

    fn singular_at(&self, x: &[f64]) -> bool {
        self.singularities.iter().any(|s| s.point.iter().zip(x).all(|(a, b)| a == b))
    }

    /// Checked evaluation: errors on a dimension mismatch or at a declared singularity.
    pub fn evaluate(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.n(), x.len())?;
        if self.singular_at(x) {
            return Err(Error::Domain("evaluation at a declared singularity".into()));
        }
        Ok(self.eval(x))
    }

    /// Declared profile when `c` is one of the field's singular points.
    pub fn profile_at(&self, c: &[f64]) -> Option<RadialProfile> {
        self.singularities
            .iter()
            .find(|s| s.point.iter().zip(c).all(|(a, b)| a == b))
            .map(|s| s.profile)
    }

    pub fn support_ball(&self) -> Option<&SupportBall> {
        self.support.as_ref()
    }

    /// Gradient at `x` (analytic for registry fields, central differences for grids).
    pub fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.n(), x.len())?;
        if self.singular_at(x) {
            return Err(Error::Domain("gradient at a declared singularity".into()));
        }
        let n = self.n();
        if self.truncated {
            if let Some(s) = &self.support {
                if self.bp.gauge_diff(x, &s.center) >= s.radius {
                    return Ok(vec![0.0; n]);
                }
            }
        }
        let radial = |center: &[f64], dg: f64| -> Vec<f64> {
            let y: Vec<f64> = x.iter().zip(center).map(|(a, b)| a - b).collect();
            gauge_gradient(&y, &self.bp).into_iter().map(|g| dg * g).collect()
        };
        Ok(match &self.kind {
            FieldKind::Constant { .. } => vec![0.0; n],
            FieldKind::Gaussian { center, width, .. } => {
                let v = self.eval(x);
                x.iter().zip(center.iter()).map(|(a, b)| -v * (a - b) / (width * width)).collect()
            }
            FieldKind::Power { center, exponent } => {
                let t = self.bp.gauge_diff(x, center);
                radial(center, -exponent * t.powf(-exponent - 1.0))
            }
            FieldKind::Example1 { weight_exponent, radius } => {
                let t = self.bp.gauge(x);
                if t >= *radius {
                    vec![0.0; n]
                } else {
                    let l = -t.ln();
                    let dg = t.powf(-weight_exponent - 1.0) * l.powi(-6) * (-weight_exponent + 6.0 / l);
                    radial(&vec![0.0; n], dg)
                }
            }
            FieldKind::Bump { center, radius } => {
                let r2 = radius * radius;
                let q: f64 = x.iter().zip(center.iter()).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / r2;
                if q >= 1.0 {
                    vec![0.0; n]
                } else {
                    let v = (1.0 - 1.0 / (1.0 - q)).exp();
                    let s = -v / ((1.0 - q) * (1.0 - q)) * 2.0 / r2;
                    x.iter().zip(center.iter()).map(|(a, b)| s * (a - b)).collect()
                }
            }
            FieldKind::Linear { coeffs } => coeffs.clone(),
            FieldKind::Quadratic { coeffs } => coeffs.iter().zip(x).map(|(c, v)| 2.0 * c * v).collect(),
            FieldKind::Grid(g) => g.gradient_at(x),
        })
    }

    /// `|∇u(x)|` (Euclidean norm).
    pub fn gradient_magnitude(&self, x: &[f64]) -> Result<f64> {
        Ok(self.gradient(x)?.iter().map(|g| g * g).sum::<f64>().sqrt())
    }

    /// Builds a field from a registry spec `name[:key=value,…]`; point-valued
    /// parameters use `;` between coordinates (e.g. `c=0;0`).
    pub fn from_spec(spec: &str, bp: &BetaParams) -> Result<Self> {
        let (name, rest) = spec.split_once(':').unwrap_or((spec, ""));
        let params = parse_params(rest)?;
        let get = |k: &str| params.iter().find(|(key, _)| key == k).map(|(_, v)| v.as_str());
        let num = |k: &str, default: f64| -> Result<f64> {
            get(k).map_or(Ok(default), |v| v.parse().map_err(|e| Error::Parse(format!("{k}={v}: {e}"))))
        };
        let point = |k: &str| -> Result<Point> {
            match get(k) {
                None => Ok(Point::origin(bp.n())),
                Some(v) => parse_list(v, ';').map(Point),
            }
        };
        let truncate = |f: ScalarField| -> Result<ScalarField> {
            match get("R") {
                Some(_) => {
                    let c = point("c")?;
                    f.truncated(c, num("R", 1.0)?)
                }
                None => Ok(f),
            }
        };
        match name {
            "const" | "constant" => truncate(Self::constant(num("value", 1.0)?, bp)),
            "zero" => Ok(Self::zero(bp)),
            "gaussian" => Self::gaussian(point("c")?, num("w", 0.25)?, num("amp", 1.0)?, bp),
            "power" => truncate(Self::power(point("c")?, num("s", 0.25)?, bp)?),
            "example1" => {
                let conv = get("convention").map_or(Ok(ExponentConvention::PaperLiteral), ExponentConvention::parse)?;
                make_example1_field_with(bp, conv)
            }
            "bump" => Self::bump(point("c")?, num("R", 0.5)?, bp),
            "linear" => Self::linear(parse_list(get("a").unwrap_or("1"), ';')?, bp),
            "quadratic" => Self::quadratic(parse_list(get("a").unwrap_or("1"), ';')?, bp),
            "grid" => {
                let path = get("path").unwrap_or(rest);
                Self::grid(GridData::read(Path::new(path))?, bp)
            }
            other => Err(Error::Parse(format!("unknown field '{other}'"))),
        }
    }
}

fn parse_params(s: &str) -> Result<Vec<(String, String)>> {
    if s.is_empty() {
        return Ok(Vec::new());
    }
    s.split(',')
        .map(|kv| {
            kv.split_once('=')
                .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
                .ok_or_else(|| Error::Parse(format!("expected key=value, got '{kv}'")))
        })
        .collect()
}

fn parse_list(s: &str, sep: char) -> Result<Vec<f64>> {
    s.split(sep)
        .map(|v| v.trim().parse::<f64>().map_err(|e| Error::Parse(format!("'{v}': {e}"))))
        .collect()
}

/// Gradient of `x ↦ |x|_β` (away from the origin).
pub fn gauge_gradient(x: &[f64], bp: &BetaParams) -> Vec<f64> {
    let e = bp.degree();
    let s: f64 = x.iter().zip(bp.beta()).map(|(v, b)| v.abs().powf(1.0 / b)).sum();
    if s == 0.0 {
        return vec![0.0; x.len()];
    }
    let outer = e * s.powf(e - 1.0);
    x.iter()
        .zip(bp.beta())
        .map(|(v, b)| outer * v.signum() * v.abs().powf(1.0 / b - 1.0) / b)
        .collect()
}

/// Radius `e^{-3}` of the ball carrying the worked-example field.
pub const EXAMPLE1_RADIUS: f64 = 0.049_787_068_367_863_944;

/// The worked-example field `χ_B / (|x|_β² |log|x|_β|⁶)`, `B = B_β(0, e^{-3})`.
pub fn make_example1_field(bp: &BetaParams) -> Result<ScalarField> {
    make_example1_field_with(bp, ExponentConvention::PaperLiteral)
}

/// Example field under a chosen exponent convention.
///
/// The field weight is `|x|_β^{n - s}` where `s` is the order-2 kernel exponent
/// of the convention, which keeps the radial integrand `t^{-1}|log t|^{-6}`.
/// Under the literal convention this is the stated weight `|x|_β²`.
pub fn make_example1_field_with(bp: &BetaParams, convention: ExponentConvention) -> Result<ScalarField> {
    let n = bp.n();
    if n < 2 {
        return Err(Error::Domain("the example field needs n ≥ 2".into()));
    }
    let radius = EXAMPLE1_RADIUS;
    let weight_exponent = n as f64 - convention.kernel_exponent(2.0, bp);
    let mut f = ScalarField::build(FieldKind::Example1 { weight_exponent, radius }, bp);
    f.support = Some(SupportBall { center: Point::origin(n), radius });
    f.singularities.push(Singularity {
        point: Point::origin(n),
        profile: RadialProfile { coef: 1.0, power: weight_exponent, log_power: 6.0, valid_below: radius },
    });
    Ok(f)
}

/// Sampled positive curve `r ↦ v(r)`, interpolated linearly in log-log
/// coordinates and extrapolated below the smallest radius by a tail model.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledCurve {
    /// Ascending radii.
    pub radii: Vec<f64>,
    pub values: Vec<f64>,
    pub tail: TailModel,
}

/// Behaviour of a curve below its smallest sampled radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TailModel {
    /// `v(t) = v0 (t/r0)^slope`.
    Power { r0: f64, v0: f64, slope: f64 },
    /// `v(t) = v0 (ln(1/t) / ln(1/r0))^{-b}`; used when the log-log slope is near zero.
    Log { r0: f64, v0: f64, b: f64 },
    /// `v(t) = v0 (t/r0)^slope (ln(1/t) / ln(1/r0))^{-b}`.
    PowerLog { r0: f64, v0: f64, slope: f64, b: f64 },
    Zero,
}

/// Log-log slopes below this are treated as logarithmic decay.
const POWER_TAIL_MIN_SLOPE: f64 = 0.05;

impl TailModel {
    /// Fits the tail from the two smallest radii (`r0 < r1`).
    pub fn fit(r0: f64, v0: f64, r1: f64, v1: f64) -> TailModel {
        if v0 <= 0.0 || v1 <= 0.0 {
            return TailModel::Zero;
        }
        let slope = (v1 / v0).ln() / (r1 / r0).ln();
        if slope >= POWER_TAIL_MIN_SLOPE || r1 >= 1.0 {
            return TailModel::Power { r0, v0, slope: slope.max(0.0) };
        }
        let (u0, u1) = (-r0.ln(), -r1.ln());
        let b = (v1 / v0).ln() / (u0 / u1).ln();
        TailModel::Log { r0, v0, b: b.max(0.0) }
    }

    /// Fits `c t^k ln(1/t)^{-b}` through the three smallest radii when available,
    /// reducing to the logarithmic model for `k ≈ 0` and the power law for `b ≈ 0`.
    pub fn fit_points(radii: &[f64], values: &[f64]) -> TailModel {
        let two = TailModel::fit(radii[0], values[0], radii[1], values[1]);
        if radii.len() < 3 || radii[2] >= 1.0 || values[..3].iter().any(|v| *v <= 0.0) {
            return two;
        }
        let l = |i: usize| (radii[i] / radii[0]).ln();
        let m = |i: usize| -((-radii[i].ln()) / (-radii[0].ln())).ln();
        let y = |i: usize| (values[i] / values[0]).ln();
        let det = l(1) * m(2) - l(2) * m(1);
        let k = (y(1) * m(2) - y(2) * m(1)) / det;
        let b = (l(1) * y(2) - l(2) * y(1)) / det;
        if !(k.is_finite() && b.is_finite()) {
            return two;
        }
        if k < POWER_TAIL_MIN_SLOPE {
            let (u0, u1) = (-radii[0].ln(), -radii[1].ln());
            let b = (values[1] / values[0]).ln() / (u0 / u1).ln();
            return TailModel::Log { r0: radii[0], v0: values[0], b: b.max(0.0) };
        }
        if b.abs() < POWER_TAIL_MIN_SLOPE {
            return two;
        }
        TailModel::PowerLog { r0: radii[0], v0: values[0], slope: k, b }
    }

    pub fn value(&self, t: f64) -> f64 {
        match *self {
            TailModel::Power { r0, v0, slope } => v0 * (t / r0).powf(slope),
            TailModel::Log { r0, v0, b } => v0 * ((-t.ln()) / (-r0.ln())).powf(-b),
            TailModel::PowerLog { r0, v0, slope, b } => {
                v0 * (t / r0).powf(slope) * ((-t.ln()) / (-r0.ln())).powf(-b)
            }
            TailModel::Zero => 0.0,
        }
    }

    /// `∫_0^{r0} t^{-1} v(t)^{e} dt`, or `None` when it diverges.
    pub fn log_integral(&self, e: f64) -> Option<f64> {
        match *self {
            TailModel::Zero => Some(0.0),
            TailModel::Power { v0, slope, .. } => {
                (slope * e > 0.0).then(|| v0.powf(e) / (slope * e))
            }
            TailModel::Log { r0, v0, b } => {
                let u0 = -r0.ln();
                let m = b * e;
                (m > 1.0).then(|| v0.powf(e) * u0 / (m - 1.0))
            }
            TailModel::PowerLog { r0, v0, slope, b } => {
                // ∫_{u0}^∞ e^{-ke(u-u0)} (u/u0)^{-be} du in w = u - u0
                let (u0, k) = (-r0.ln(), slope * e);
                if k <= 0.0 {
                    return None;
                }
                let gl = GaussLegendre::cached(32);
                let sum: f64 = (0..60)
                    .map(|i| {
                        let w0 = i as f64 / k;
                        gl.integrate(w0, w0 + 1.0 / k, |w| (-k * w).exp() * (1.0 + w / u0).powf(-b * e))
                    })
                    .sum();
                Some(v0.powf(e) * sum)
            }
        }
    }
}

impl SampledCurve {
    /// Builds from radii in any order (duplicates are not allowed).
    pub fn new(radii: &[f64], values: &[f64]) -> Result<Self> {
        check_dim(radii.len(), values.len())?;
        if radii.len() < 2 {
            return Err(Error::Domain("a curve needs at least two samples".into()));
        }
        let mut pairs: Vec<(f64, f64)> = radii.iter().copied().zip(values.iter().copied()).collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        if pairs.windows(2).any(|w| w[0].0 >= w[1].0) || pairs[0].0 <= 0.0 {
            return Err(Error::Domain("curve radii must be positive and distinct".into()));
        }
        if pairs.iter().any(|p| !(p.1 >= 0.0 && p.1.is_finite())) {
            return Err(Error::Domain("curve values must be finite and ≥ 0".into()));
        }
        let (radii, values): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
        let tail = TailModel::fit_points(&radii, &values);
        Ok(SampledCurve { radii, values, tail })
    }

    pub fn value(&self, t: f64) -> f64 {
        let last = self.radii.len() - 1;
        if t >= self.radii[last] {
            return self.values[last];
        }
        if t < self.radii[0] {
            return self.tail.value(t);
        }
        let j = self.radii.partition_point(|r| *r <= t) - 1;
        let (r0, r1, v0, v1) = (self.radii[j], self.radii[j + 1], self.values[j], self.values[j + 1]);
        if v0 > 0.0 && v1 > 0.0 {
            let w = (t / r0).ln() / (r1 / r0).ln();
            (v0.ln() + w * (v1 / v0).ln()).exp()
        } else {
            v0 + (t - r0) / (r1 - r0) * (v1 - v0)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum WeightKind {
    Constant(f64),
    /// `t^alpha`.
    Power { alpha: f64 },
    /// `max(-ln t, 1)^{-b}`: slowly vanishing at 0, constant for `t ≥ e^{-1}`.
    LogPower { b: f64 },
    Curve(SampledCurve),
}

/// Positive function on ]0, ∞[: `base(t)^exponent`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightFunction {
    pub kind: WeightKind,
    pub exponent: f64,
}

impl WeightFunction {
    pub fn new(kind: WeightKind) -> Self {
        WeightFunction { kind, exponent: 1.0 }
    }

    pub fn constant(c: f64) -> Self {
        Self::new(WeightKind::Constant(c))
    }

    pub fn power(alpha: f64) -> Self {
        Self::new(WeightKind::Power { alpha })
    }

    pub fn log_power(b: f64) -> Self {
        Self::new(WeightKind::LogPower { b })
    }

    pub fn curve(curve: SampledCurve) -> Self {
        Self::new(WeightKind::Curve(curve))
    }

    /// `self^e`.
    pub fn powered(&self, e: f64) -> Self {
        WeightFunction { kind: self.kind.clone(), exponent: self.exponent * e }
    }

    pub fn eval(&self, t: f64) -> f64 {
        let base = match &self.kind {
            WeightKind::Constant(c) => *c,
            WeightKind::Power { alpha } => t.powf(*alpha),
            WeightKind::LogPower { b } => (-t.ln()).max(1.0).powf(-b),
            WeightKind::Curve(c) => c.value(t),
        };
        if self.exponent == 1.0 {
            base
        } else {
            base.powf(self.exponent)
        }
    }

    /// Declared non-decreasing.
    pub fn monotone(&self) -> bool {
        match &self.kind {
            WeightKind::Constant(_) => true,
            WeightKind::Power { alpha } => alpha * self.exponent >= 0.0,
            WeightKind::LogPower { b } => b * self.exponent >= 0.0,
            WeightKind::Curve(c) => self.exponent >= 0.0 && c.values.windows(2).all(|w| w[0] <= w[1]),
        }
    }

    /// Declared `lim_{t→0} = 0`.
    pub fn limit_zero(&self) -> bool {
        match &self.kind {
            WeightKind::Constant(c) => *c == 0.0,
            WeightKind::Power { alpha } => alpha * self.exponent > 0.0,
            WeightKind::LogPower { b } => b * self.exponent > 0.0,
            WeightKind::Curve(c) => self.exponent > 0.0 && !matches!(c.tail, TailModel::Power { slope, .. } if slope == 0.0),
        }
    }

    /// Checks positivity and (if declared) monotonicity on a log ladder of `count` points.
    pub fn verify_on_ladder(&self, lo: f64, hi: f64, count: usize) -> Result<()> {
        let mut prev = f64::NEG_INFINITY;
        for i in 0..count {
            let t = (lo.ln() + (hi / lo).ln() * i as f64 / (count - 1).max(1) as f64).exp();
            let v = self.eval(t);
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Contract(format!("weight is not positive at t = {t}: {v}")));
            }
            if self.monotone() && v < prev * (1.0 - 1e-12) {
                return Err(Error::Contract(format!("weight decreases at t = {t}")));
            }
            prev = v;
        }
        Ok(())
    }

    /// Parses `const:c=…`, `power:alpha=…`, `logpower:b=…` or `curve:path=…[,gamma=…]`.
    pub fn from_spec(spec: &str) -> Result<Self> {
        let (name, rest) = spec.split_once(':').unwrap_or((spec, ""));
        let params = parse_params(rest)?;
        let num = |k: &str, d: f64| -> Result<f64> {
            params
                .iter()
                .find(|(key, _)| key == k)
                .map_or(Ok(d), |(_, v)| v.parse().map_err(|e| Error::Parse(format!("{k}={v}: {e}"))))
        };
        let w = match name {
            "const" | "constant" => Self::constant(num("c", 1.0)?),
            "power" => Self::power(num("alpha", 1.0)?),
            "logpower" => Self::log_power(num("b", 1.0)?),
            "curve" => {
                let path = params
                    .iter()
                    .find(|(k, _)| k == "path")
                    .map(|(_, v)| v.clone())
                    .ok_or_else(|| Error::Parse("curve weight needs path=…".into()))?;
                let text = std::fs::read_to_string(&path)?;
                let (r, v) = parse_curve_csv(&text)?;
                Self::curve(SampledCurve::new(&r, &v)?)
            }
            other => return Err(Error::Parse(format!("unknown weight '{other}'"))),
        };
        Ok(w.powered(num("gamma", 1.0)?))
    }
}

/// Reads the `radius,value[,…]` curve CSV, skipping the header line.
pub fn parse_curve_csv(text: &str) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut radii = Vec::new();
    let mut values = Vec::new();
    for line in text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')) {
        let mut cols = line.split(',');
        let (Some(r), Some(v)) = (cols.next(), cols.next()) else {
            return Err(Error::Parse(format!("bad curve line '{line}'")));
        };
        match (r.trim().parse::<f64>(), v.trim().parse::<f64>()) {
            (Ok(r), Ok(v)) => {
                radii.push(r);
                values.push(v);
            }
            _ if radii.is_empty() => continue,
            _ => return Err(Error::Parse(format!("bad curve line '{line}'"))),
        }
    }
    Ok((radii, values))
}

/// `e^{-3}` sanity: keep the constant honest.
#[allow(dead_code)]
fn example1_radius() -> f64 {
    E.powi(-3)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn iso2() -> BetaParams {
        BetaParams::isotropic(2)
    }

    #[test]
    fn example1_radius_constant() {
        assert_relative_eq!(EXAMPLE1_RADIUS, example1_radius(), max_relative = 1e-15);
    }

    #[test]
    fn example1_values() {
        let bp = iso2();
        let f = make_example1_field(&bp).unwrap();
        assert_eq!(f.eval(&[EXAMPLE1_RADIUS, 0.0]), 0.0);
        assert_eq!(f.eval(&[0.1, 0.0]), 0.0);
        let t = (-4f64).exp();
        assert_relative_eq!(f.eval(&[t, 0.0]), 8f64.exp() / 4096.0, max_relative = 1e-12);
        assert!(matches!(f.evaluate(&[0.0, 0.0]), Err(Error::Domain(_))));
        assert!(make_example1_field(&BetaParams::isotropic(1)).is_err());
        assert_eq!(f.singularities.len(), 1);
    }

    #[test]
    fn example1_generalized_weight() {
        let bp = BetaParams::new(vec![1.0, 1.5]).unwrap();
        let lit = make_example1_field_with(&bp, ExponentConvention::PaperLiteral).unwrap();
        let gen = make_example1_field_with(&bp, ExponentConvention::Generalized).unwrap();
        // n = 2: the order-2 kernel exponent is 0 in both conventions.
        assert_eq!(lit, gen);
        let bp3 = BetaParams::new(vec![1.0, 1.0, 1.0]).unwrap();
        let g3 = make_example1_field_with(&bp3, ExponentConvention::Generalized).unwrap();
        assert!(matches!(g3.kind, FieldKind::Example1 { weight_exponent, .. } if (weight_exponent - 1.0).abs() < 1e-15));
    }

    #[test]
    fn gradient_examples() {
        let bp = iso2();
        let c = ScalarField::constant(3.0, &bp);
        assert_eq!(c.gradient_magnitude(&[0.3, 0.1]).unwrap(), 0.0);
        let l = ScalarField::linear(vec![1.0, 0.0], &bp).unwrap();
        assert_eq!(l.gradient_magnitude(&[0.3, 0.1]).unwrap(), 1.0);
        let p = ScalarField::power(Point::origin(2), 0.5, &bp).unwrap();
        assert!(p.gradient(&[0.0, 0.0]).is_err());
    }

    fn finite_difference(f: &ScalarField, x: &[f64]) -> Vec<f64> {
        let h = 1e-6;
        (0..x.len())
            .map(|i| {
                let mut a = x.to_vec();
                let mut b = x.to_vec();
                a[i] += h;
                b[i] -= h;
                (f.eval(&a) - f.eval(&b)) / (2.0 * h)
            })
            .collect()
    }

    #[test]
    fn analytic_gradients_match_finite_differences() {
        let bp = BetaParams::new(vec![1.0, 1.5]).unwrap();
        let fields = vec![
            ScalarField::gaussian(Point(vec![0.1, -0.2]), 0.3, 2.0, &bp).unwrap(),
            ScalarField::power(Point(vec![0.0, 0.0]), 0.7, &bp).unwrap(),
            make_example1_field(&bp).unwrap(),
            ScalarField::bump(Point(vec![0.05, 0.0]), 0.4, &bp).unwrap(),
            ScalarField::quadratic(vec![1.0, -2.0], &bp).unwrap(),
        ];
        for f in &fields {
            for x in [[0.01, 0.02], [0.2, -0.1], [-0.015, 0.004]] {
                let g = f.gradient(&x).unwrap();
                let fd = finite_difference(f, &x);
                for (a, b) in g.iter().zip(&fd) {
                    assert!((a - b).abs() <= 1e-5 * (1.0 + b.abs()), "{:?}: {a} vs {b} at {x:?}", f.kind);
                }
            }
        }
    }

    #[test]
    fn grid_reproduces_nodes_and_interpolates_linear_exactly() {
        let bp = iso2();
        let g = GridData::sample(vec![5, 4], vec![-1.0, 0.0], vec![0.5, 0.25], |x| 2.0 * x[0] - x[1] + 0.5)
            .unwrap();
        let f = ScalarField::grid(g.clone(), &bp).unwrap();
        assert_eq!(f.eval(&[-0.5, 0.25]), 2.0 * -0.5 - 0.25 + 0.5);
        assert_relative_eq!(f.eval(&[0.3, 0.6]), 2.0 * 0.3 - 0.6 + 0.5, epsilon = 1e-14);
        assert_eq!(f.eval(&[1.5, 0.0]), 0.0);
        let back = GridData::parse(&g.to_text()).unwrap();
        assert_eq!(back.dims, g.dims);
        for (a, b) in back.values.iter().zip(&g.values) {
            assert_relative_eq!(a, b, max_relative = 1e-11);
        }
    }

    #[test]
    fn grid_gradient_second_order() {
        let bp = iso2();
        let q = ScalarField::quadratic(vec![1.0, 3.0], &bp).unwrap();
        let g = GridData::sample(vec![9, 9], vec![-1.0, -1.0], vec![0.25, 0.25], |x| q.eval(x)).unwrap();
        let f = ScalarField::grid(g, &bp).unwrap();
        // central differences are exact for a quadratic at interior nodes
        let gr = f.gradient(&[0.25, -0.5]).unwrap();
        assert_relative_eq!(gr[0], 0.5, epsilon = 1e-12);
        assert_relative_eq!(gr[1], -3.0, epsilon = 1e-12);

        let gauss = ScalarField::gaussian(Point::origin(2), 0.5, 1.0, &bp).unwrap();
        let x = [0.25, 0.25];
        let exact = gauss.gradient(&x).unwrap();
        let mut errs = Vec::new();
        for k in [2, 3, 4] {
            let h = 0.5f64.powi(k);
            let m = (2.0 / h) as usize + 1;
            let g = GridData::sample(vec![m, m], vec![-1.0, -1.0], vec![h, h], |y| gauss.eval(y)).unwrap();
            let gr = ScalarField::grid(g, &bp).unwrap().gradient(&x).unwrap();
            errs.push((gr[0] - exact[0]).abs());
        }
        assert!(errs[0] / errs[1] > 3.5 && errs[1] / errs[2] > 3.5, "{errs:?}");
    }

    #[test]
    fn grid_parse_errors() {
        assert!(GridData::parse("n,2\ndims,2,2\norigin,0,0\nspacing,1,1\n1,2,3\n").is_err());
        assert!(GridData::parse("dims,2,2\norigin,0,0\nspacing,1,1\n1,2,3,4\n").is_err());
        assert!(GridData::parse("n,1\ndims,2\norigin,0\nspacing,1\n# c\n1 2\n").is_ok());
    }

    #[test]
    fn truncation_is_exact_zero_outside() {
        let bp = BetaParams::new(vec![1.0, 1.5]).unwrap();
        let f = ScalarField::constant(1.0, &bp).truncated(Point::origin(2), 1.0).unwrap();
        assert_eq!(f.eval(&[0.5, 0.1]), 1.0);
        assert_eq!(f.eval(&[1.0, 0.0]), 0.0);
        let b = ScalarField::bump(Point::origin(2), 0.5, &bp).unwrap();
        let s = b.support_ball().unwrap();
        assert_eq!(b.eval(&[0.5, 0.0]), 0.0);
        assert!(bp.gauge(&[0.5, 0.5]) <= s.radius);
    }

    #[test]
    fn registry_specs() {
        let bp = iso2();
        assert_eq!(ScalarField::from_spec("const", &bp).unwrap().eval(&[5.0, 5.0]), 1.0);
        let f = ScalarField::from_spec("power:s=0.25,R=1", &bp).unwrap();
        assert_eq!(f.eval(&[2.0, 0.0]), 0.0);
        assert_relative_eq!(f.eval(&[0.5, 0.0]), 0.5f64.powf(-0.25), max_relative = 1e-14);
        let g = ScalarField::from_spec("gaussian:w=0.5,c=1;0", &bp).unwrap();
        assert_eq!(g.eval(&[1.0, 0.0]), 1.0);
        assert!(ScalarField::from_spec("nope", &bp).is_err());
        assert!(ScalarField::from_spec("gaussian:w", &bp).is_err());
    }

    #[test]
    fn weights() {
        let w = WeightFunction::power(1.0).powered(0.5);
        assert_relative_eq!(w.eval(4.0), 2.0);
        assert!(w.monotone() && w.limit_zero());
        w.verify_on_ladder(1e-6, 1e3, 50).unwrap();
        let l = WeightFunction::log_power(1.0);
        assert_eq!(l.eval(0.5), 1.0);
        assert_relative_eq!(l.eval((-4f64).exp()), 0.25);
        l.verify_on_ladder(1e-12, 10.0, 50).unwrap();
        assert!(WeightFunction::power(-1.0).verify_on_ladder(1e-3, 1.0, 10).is_ok());
        assert!(!WeightFunction::power(-1.0).monotone());
        assert!(WeightFunction::from_spec("logpower:b=2").is_ok());
        assert!(WeightFunction::from_spec("bogus").is_err());
    }

    #[test]
    fn sampled_curve_interpolates_power_laws() {
        let r: Vec<f64> = (0..10).map(|j| 0.5f64.powi(j)).collect();
        let v: Vec<f64> = r.iter().map(|x| 3.0 * x.powf(1.5)).collect();
        let c = SampledCurve::new(&r, &v).unwrap();
        for t in [0.9, 0.3, 0.01, 1e-5] {
            assert_relative_eq!(c.value(t), 3.0 * t.powf(1.5), max_relative = 1e-12);
        }
        assert_eq!(c.value(2.0), 3.0);
        assert_relative_eq!(c.tail.log_integral(0.5).unwrap(), 2.0 * (3.0 * r[9].powf(1.5)).sqrt() / 1.5, max_relative = 1e-12);
    }

    #[test]
    fn curve_csv() {
        let (r, v) = parse_curve_csv("radius,value,center_argmax_index\n1,2,0\n0.5,1,0\n").unwrap();
        assert_eq!(r, vec![1.0, 0.5]);
        assert_eq!(v, vec![2.0, 1.0]);
    }

    #[test]
    fn fmt12_digits() {
        assert_eq!(fmt12(1.0 / 3.0), "0.333333333333");
        assert_eq!(fmt12(5.0), "5");
    }

    #[test]
    fn tail_fit_tells_log_from_power() {
        let radii: Vec<f64> = (0..6).map(|j| 1e-3 * 0.5f64.powi(5 - j)).collect();
        let logs: Vec<f64> = radii.iter().map(|r| (-r.ln()).powi(-5)).collect();
        match TailModel::fit_points(&radii, &logs) {
            TailModel::Log { b, .. } => assert!((b - 5.0).abs() < 1e-9, "{b}"),
            other => panic!("{other:?}"),
        }
        let pows: Vec<f64> = radii.iter().map(|r| r.powf(0.2)).collect();
        assert!(matches!(TailModel::fit_points(&radii, &pows), TailModel::Power { .. }));
        let mixed: Vec<f64> = radii.iter().map(|r| r.sqrt() * (-r.ln()).powi(-5)).collect();
        match TailModel::fit_points(&radii, &mixed) {
            TailModel::PowerLog { slope, b, .. } => {
                assert!((slope - 0.5).abs() < 1e-9 && (b - 5.0).abs() < 1e-9, "{slope} {b}")
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn power_log_tail_integral() {
        let tail = TailModel::PowerLog { r0: 1e-3, v0: 2.0, slope: 0.5, b: 2.0 };
        let (u0, e) = (-(1e-3f64).ln(), 1.5);
        // midpoint rule in u as an independent check
        let h = 1e-3;
        let f = |u: f64| tail.value((-u).exp()).powf(e);
        let direct: f64 = (0..200_000).map(|i| f(u0 + (i as f64 + 0.5) * h) * h).sum();
        let got = tail.log_integral(e).unwrap();
        assert!((got / direct - 1.0).abs() < 1e-6, "{got} {direct}");
    }
}
