//! Filtered backprojection: the inversion family and its special cases.
//!
//! Every variant first filters each detector row into a radial profile `F`
//! on a uniform `s`-grid (plus its derivative `F'` where needed), then sums
//! over detectors at `s = |x - y|`:
//!
//! `f(x) = a sum_j w_j F'(y_j, s) <y_j - x, y_j - xi> / s + b sum_j w_j F(y_j, s)`.

use std::f64::consts::PI;
use std::ops::Range;

use rayon::prelude::*;

use crate::error::{Result, TatError};
use crate::forward::{DataPanel, PanelKind};
use crate::grids::{dot, norm, sphere_measure, sub, Point, ReconGrid, SphereGrid, TimeGrid};
use crate::numerics::{cubic_stencil, derivative4};
use crate::phantom::Phantom;
use crate::specfun::{
    kernel_h, kernel_kn, log_kernel_density, log_kernel_even, log_product_integral, nonzero_span, KernelPanel,
    LambdaRule,
};
use crate::xform::{d_ds, shrink, RadialProfile, WOperator};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    TimeDomainW,
    KernelKn,
    KernelLogEven,
    PStarTdtt,
    PStarDtTDt,
    PStarDttT,
    Kunyansky,
    NeumannData,
}

impl Variant {
    pub const ALL: [Variant; 8] = [
        Variant::TimeDomainW,
        Variant::KernelKn,
        Variant::KernelLogEven,
        Variant::PStarTdtt,
        Variant::PStarDtTDt,
        Variant::PStarDttT,
        Variant::Kunyansky,
        Variant::NeumannData,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Variant::TimeDomainW => "time_domain_w",
            Variant::KernelKn => "kernel_kn",
            Variant::KernelLogEven => "kernel_log_even",
            Variant::PStarTdtt => "pstar_tdtt",
            Variant::PStarDtTDt => "pstar_dt_t_dt",
            Variant::PStarDttT => "pstar_dtt_t",
            Variant::Kunyansky => "kunyansky",
            Variant::NeumannData => "neumann",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|v| v.name() == s)
    }

    /// Data kinds the variant accepts.
    pub fn data_kinds(self) -> &'static [PanelKind] {
        match self {
            Variant::TimeDomainW => &[PanelKind::WaveT],
            Variant::PStarTdtt | Variant::PStarDtTDt | Variant::PStarDttT => &[PanelKind::WaveT, PanelKind::IntegralP],
            Variant::KernelKn | Variant::KernelLogEven | Variant::Kunyansky => &[PanelKind::RadonRS],
            Variant::NeumannData => &[PanelKind::NeumannTrace],
        }
    }

    /// For the P*-formulas: `m` in `h = s g' + m g` and the constant `phi`
    /// of the family member they come from.
    fn pstar(self, n: usize) -> Option<(f64, f64)> {
        let n = n as f64;
        match self {
            Variant::PStarTdtt => Some((0.0, -2.0 * (n - 2.0))),
            Variant::PStarDtTDt => Some((1.0, -2.0 * (n - 1.0))),
            Variant::PStarDttT => Some((2.0, -2.0 * n)),
            _ => None,
        }
    }

    pub fn is_pstar(self) -> bool {
        self.pstar(3).is_some()
    }
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum XiMode {
    EqualsX,
    Fixed(Point),
    Origin,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PhiMode {
    Zero,
    Constant(f64),
}

impl PhiMode {
    fn value(self) -> f64 {
        match self {
            PhiMode::Zero => 0.0,
            PhiMode::Constant(c) => c,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FormulaSpec {
    pub variant: Variant,
    pub xi_mode: XiMode,
    pub phi_mode: PhiMode,
    /// Overrides for the `lambda`-quadrature of the kernel variants.
    pub lambda_max: Option<f64>,
    pub lambda_steps: Option<usize>,
}

impl FormulaSpec {
    /// Default modes for a variant; P*-formulas and the Kunyansky form get
    /// the modes they are defined by.
    pub fn new(variant: Variant, n: usize) -> Self {
        let (xi_mode, phi_mode) = match variant {
            Variant::Kunyansky => (XiMode::Origin, PhiMode::Zero),
            v => match v.pstar(n) {
                Some((_, c)) => (XiMode::EqualsX, PhiMode::Constant(c)),
                None => (XiMode::EqualsX, PhiMode::Zero),
            },
        };
        Self { variant, xi_mode, phi_mode, lambda_max: None, lambda_steps: None }
    }

    pub fn with_xi(mut self, xi: XiMode) -> Self {
        self.xi_mode = xi;
        self
    }

    pub fn with_phi(mut self, phi: PhiMode) -> Self {
        self.phi_mode = phi;
        self
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        let bad = |msg: String| Err(TatError::InvalidFormula(msg));
        if let Some((_, c)) = self.variant.pstar(n) {
            if self.xi_mode != XiMode::EqualsX || self.phi_mode != PhiMode::Constant(c) {
                return bad(format!("{} requires xi = x and phi = {c}", self.variant));
            }
        }
        if self.variant == Variant::Kunyansky && (self.xi_mode != XiMode::Origin || self.phi_mode != PhiMode::Zero) {
            return bad("kunyansky requires xi = 0 and phi = 0".into());
        }
        if self.variant == Variant::KernelLogEven && n % 2 == 1 {
            return Err(TatError::RequiresEvenDimension(n));
        }
        if let PhiMode::Constant(c) = self.phi_mode {
            if !c.is_finite() {
                return bad("phi must be finite".into());
            }
        }
        if let XiMode::Fixed(p) = self.xi_mode {
            if p.iter().any(|v| !v.is_finite()) || (n == 2 && p[2] != 0.0) {
                return bad("xi must be a finite point of the data dimension".into());
            }
        }
        Ok(())
    }

    fn lambda_rule(&self, n: usize, time: &TimeGrid) -> Result<LambdaRule> {
        let support = time.t_max.min(2.0);
        let lambda_max = self.lambda_max.unwrap_or(0.8 * PI / time.dt());
        let steps = self.lambda_steps.unwrap_or_else(|| (lambda_max / (PI / (2.0 * support))).ceil() as usize);
        LambdaRule::new(n, lambda_max, steps)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorMetrics {
    pub l2: f64,
    pub linf: f64,
    /// `None` when the reference vanishes.
    pub relative_l2: Option<f64>,
}

/// Discrete error metrics of `values` against `truth` over the grid points.
pub fn error_metrics(values: &[f64], truth: &[f64]) -> ErrorMetrics {
    assert_eq!(values.len(), truth.len());
    let count = values.len().max(1) as f64;
    let mut sq = 0.0;
    let mut ref_sq = 0.0;
    let mut linf = 0.0f64;
    for (a, b) in values.iter().zip(truth) {
        let d = a - b;
        sq += d * d;
        ref_sq += b * b;
        linf = linf.max(d.abs());
    }
    ErrorMetrics { l2: (sq / count).sqrt(), linf, relative_l2: (ref_sq > 0.0).then(|| (sq / ref_sq).sqrt()) }
}

/// Relative discrete L2 distance `||a - b|| / ||b||`.
pub fn relative_l2(a: &[f64], b: &[f64]) -> f64 {
    error_metrics(a, b).relative_l2.unwrap_or_else(|| error_metrics(a, b).l2)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReconstructionReport {
    pub grid: ReconGrid,
    /// Per point: `sum_j w_j F(y_j, |x - y_j|)`, the term that vanishes on
    /// range data. Absent for variants whose filter is not `W(g)` or `K_n`.
    pub range_term: Option<Vec<f64>>,
    /// Largest tail contribution of the `lambda`-quadrature (kernel variants).
    pub truncation: f64,
    pub metrics: Option<ErrorMetrics>,
}

impl ReconstructionReport {
    pub fn values(&self) -> &[f64] {
        &self.grid.values
    }

    pub fn with_truth(mut self, phantom: &Phantom) -> Self {
        let truth: Vec<f64> = self.grid.points.iter().map(|x| phantom.eval(x)).collect();
        self.metrics = Some(error_metrics(&self.grid.values, &truth));
        self
    }
}

/// Per-detector filtered profiles on a common radial grid.
struct Filtered {
    grid: TimeGrid,
    values: Vec<f64>,
    deriv: Option<Vec<f64>>,
    valid: Range<usize>,
}

impl Filtered {
    fn build<F>(detectors: usize, with_deriv: bool, f: F) -> Result<Self>
    where
        F: Fn(usize) -> Result<RadialProfile> + Sync,
    {
        let rows: Vec<(RadialProfile, Option<Vec<f64>>)> = (0..detectors)
            .into_par_iter()
            .map(|j| {
                let p = f(j)?;
                let d = if with_deriv { Some(d_ds(&p)?.values) } else { None };
                Ok((p, d))
            })
            .collect::<Result<_>>()?;
        let first = rows.first().ok_or(TatError::InvalidArgument("no detectors".into()))?;
        let grid = first.0.grid;
        let valid = if with_deriv { shrink(&first.0.valid, 2) } else { first.0.valid.clone() };
        let mut values = Vec::with_capacity(detectors * grid.samples);
        let mut deriv = with_deriv.then(|| Vec::with_capacity(detectors * grid.samples));
        for (p, d) in rows {
            values.extend_from_slice(&p.values);
            if let (Some(all), Some(d)) = (deriv.as_mut(), d) {
                all.extend_from_slice(&d);
            }
        }
        Ok(Self { grid, values, deriv, valid })
    }

    fn from_kernel(k: &KernelPanel, with_deriv: bool) -> Result<Self> {
        Self::build(k.sphere.len(), with_deriv, |j| Ok(k.profile(j)))
    }
}

/// Returns the backprojected values and the range term per point.
fn backproject(
    filtered: &Filtered,
    sphere: &SphereGrid,
    grid: &ReconGrid,
    deriv_coeff: f64,
    xi: XiMode,
    value_coeff: f64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    if grid.dim != sphere.dim {
        return Err(TatError::InvalidArgument(format!(
            "grid is {}-dimensional, detectors are {}-dimensional",
            grid.dim, sphere.dim
        )));
    }
    let dt = filtered.grid.dt();
    let m = filtered.grid.samples;
    let lo = filtered.valid.start;
    let hi = filtered.valid.end.saturating_sub(1);
    if hi < lo + 3 {
        return Err(TatError::TooFewSamples { got: filtered.valid.len(), min: 4 });
    }
    let (s_lo, s_hi) = (lo as f64 * dt, hi as f64 * dt);
    let out: Vec<(f64, f64)> = grid
        .points
        .par_iter()
        .map(|x| {
            let xi_point = match xi {
                XiMode::EqualsX => *x,
                XiMode::Origin => [0.0; 3],
                XiMode::Fixed(p) => p,
            };
            let mut acc = 0.0;
            let mut rng = 0.0;
            for (j, (y, &w)) in sphere.nodes.iter().zip(&sphere.weights).enumerate() {
                let d = sub(y, x);
                let s = norm(&d);
                if s < s_lo - 1e-12 || s > s_hi + 1e-12 {
                    return Err(TatError::RadiusOutsideWindow { s, lo: s_lo, hi: s_hi });
                }
                let st = cubic_stencil(s, dt, lo, hi);
                let row = &filtered.values[j * m..(j + 1) * m];
                rng += w * st.apply(row);
                if let Some(deriv) = &filtered.deriv {
                    let geom = dot(&d, &sub(y, &xi_point)) / s;
                    acc += w * st.apply(&deriv[j * m..(j + 1) * m]) * geom;
                }
            }
            Ok((deriv_coeff * acc + value_coeff * rng, rng))
        })
        .collect::<Result<_>>()?;
    Ok(out.into_iter().unzip())
}

/// `W` for data rows of `kind`, evaluated up to `s = 2` (plus stencil room).
fn w_operator(n: usize, time: &TimeGrid, kind: PanelKind) -> Result<WOperator> {
    let rows = ((2.0 / time.dt()).ceil() as usize + 6).min(time.samples);
    WOperator::new(n, *time, kind.decay_class(n), Some(rows))
}

/// Wave trace rows of a WaveT or IntegralP panel.
fn wave_rows(panel: &DataPanel) -> Result<DataPanel> {
    match panel.kind {
        PanelKind::WaveT => Ok(panel.clone()),
        PanelKind::IntegralP => {
            let dt = panel.time.dt();
            panel.map_rows(PanelKind::WaveT, |row| Ok(derivative4(row, dt)))
        }
        _ => panel.expect_kind("wave data", &[PanelKind::WaveT, PanelKind::IntegralP]).map(|_| panel.clone()),
    }
}

/// `P*(h)(x) = int_S W(h)(y, |x - y|) dsigma(y)` for a data panel `h`
/// decaying like the wave trace.
pub fn pstar_backproject(h_panel: &DataPanel, grid: &ReconGrid) -> Result<Vec<f64>> {
    let n = h_panel.dim();
    let op = w_operator(n, &h_panel.time, h_panel.kind)?;
    let filtered = Filtered::build(h_panel.detectors(), false, |j| op.apply(&h_panel.profile(j)))?;
    Ok(backproject(&filtered, &h_panel.sphere, grid, 0.0, XiMode::EqualsX, 1.0)?.0)
}

/// Finite-time even-dimensional formula on spherical means:
/// `f(x) = ((-1)^{(n-2)/2} w_n / (2 pi)^n) int_S int_0^2 [d_r r (d_r 1/r)^{n-1} r^{n-1} g] ln|r^2 - |x-y|^2| dr dsigma`.
pub fn finite_time_even(g_panel: &DataPanel, grid: &ReconGrid) -> Result<Vec<f64>> {
    let n = g_panel.dim();
    if n % 2 == 1 {
        return Err(TatError::RequiresEvenDimension(n));
    }
    g_panel.expect_kind("finite_time_even", &[PanelKind::MeanMS])?;
    if g_panel.time.t_max < 2.0 - 1e-12 {
        return Err(TatError::InvalidArgument(format!(
            "radial grid must cover [0, 2], ends at {}",
            g_panel.time.t_max
        )));
    }
    if grid.dim != n {
        return Err(TatError::InvalidArgument("grid and data dimensions differ".into()));
    }
    let dr = g_panel.time.dt();
    let sign = if ((n - 2) / 2) % 2 == 0 { 1.0 } else { -1.0 };
    let prefactor = sign * sphere_measure(n) / (2.0 * PI).powi(n as i32);
    let brackets: Vec<(Vec<f64>, usize, usize)> = g_panel
        .rows()
        .collect::<Vec<_>>()
        .par_iter()
        .map(|row| {
            let radial: Vec<f64> =
                row.iter().enumerate().map(|(k, v)| v * (k as f64 * dr).powi(n as i32 - 1)).collect();
            let mut b = log_kernel_density(n, &radial, dr);
            for (k, v) in b.iter_mut().enumerate() {
                *v *= k as f64 * dr;
            }
            let mut b = derivative4(&b, dr);
            // data beyond r = 2 does not enter the formula
            let end = ((2.0 / dr).round() as usize + 1).min(b.len());
            b.truncate(end);
            let (lo, hi) = nonzero_span(&b);
            (b, lo, hi)
        })
        .collect();
    let sphere = &g_panel.sphere;
    Ok(grid
        .points
        .par_iter()
        .map(|x| {
            let mut acc = 0.0;
            for ((b, lo, hi), (y, &w)) in brackets.iter().zip(sphere.nodes.iter().zip(&sphere.weights)) {
                let s = norm(&sub(y, x));
                acc += w * log_product_integral(b, dr, *lo, *hi, s);
            }
            prefactor * acc
        })
        .collect())
}

/// `f(x) = 2 int_S W(d_nu u)(y, |x - y|) dsigma(y)`.
pub fn reconstruct_neumann(data: &DataPanel, grid: &ReconGrid) -> Result<Vec<f64>> {
    data.expect_kind("reconstruct_neumann", &[PanelKind::NeumannTrace])?;
    let op = w_operator(data.dim(), &data.time, data.kind)?;
    let filtered = Filtered::build(data.detectors(), false, |j| op.apply(&data.profile(j)))?;
    Ok(backproject(&filtered, &data.sphere, grid, 0.0, XiMode::EqualsX, 2.0)?.0)
}

/// Radial grid of the kernel profiles: the data spacing, up to `s = 2` plus stencil room.
fn kernel_s_grid(time: &TimeGrid) -> Result<TimeGrid> {
    let k = ((2.0 / time.dt()).ceil() as usize + 6).min(time.samples - 1);
    TimeGrid::new(k as f64 * time.dt(), k + 1)
}

pub fn reconstruct(spec: &FormulaSpec, data: &DataPanel, grid: &ReconGrid) -> Result<ReconstructionReport> {
    let n = data.dim();
    spec.validate(n)?;
    data.expect_kind(spec.variant.name(), spec.variant.data_kinds())?;
    if grid.dim != n {
        return Err(TatError::InvalidArgument(format!("grid is {}-dimensional, data is {}-dimensional", grid.dim, n)));
    }
    let phi = spec.phi_mode.value();
    let mut truncation = 0.0;
    let (values, range_term) = match spec.variant {
        Variant::TimeDomainW => {
            let op = w_operator(n, &data.time, data.kind)?;
            let filtered = Filtered::build(data.detectors(), true, |j| op.apply(&data.profile(j)))?;
            let (v, r) = backproject(&filtered, &data.sphere, grid, -2.0, spec.xi_mode, phi)?;
            (v, Some(r))
        }
        v if v.is_pstar() => {
            let (m, _) = v.pstar(n).unwrap();
            let g = wave_rows(data)?;
            let dt = g.time.dt();
            let h = g.map_rows(PanelKind::WaveT, |row| {
                let d = derivative4(row, dt);
                Ok(row.iter().zip(&d).enumerate().map(|(k, (v, dv))| k as f64 * dt * dv + m * v).collect())
            })?;
            let op = w_operator(n, &h.time, h.kind)?;
            let filtered = Filtered::build(h.detectors(), false, |j| op.apply(&h.profile(j)))?;
            let (v, _) = backproject(&filtered, &h.sphere, grid, 0.0, XiMode::EqualsX, -2.0)?;
            (v, None)
        }
        Variant::KernelKn | Variant::KernelLogEven => {
            let s_grid = kernel_s_grid(&data.time)?;
            let kernel = if spec.variant == Variant::KernelKn {
                let rule = spec.lambda_rule(n, &data.time)?;
                kernel_kn(data, &s_grid, &rule)?
            } else {
                let scale = -1.0 / (16.0 * (2.0 * PI).powi(n as i32 - 2));
                log_kernel_even(data, &s_grid)?.scaled(scale)
            };
            truncation = kernel.truncation;
            let filtered = Filtered::from_kernel(&kernel, true)?;
            let (v, r) = backproject(&filtered, &data.sphere, grid, -4.0 / PI, spec.xi_mode, phi)?;
            (v, Some(r))
        }
        Variant::Kunyansky => {
            let s_grid = kernel_s_grid(&data.time)?;
            let rule = spec.lambda_rule(n, &data.time)?;
            let kernel = kernel_h(data, &s_grid, &rule)?;
            truncation = kernel.truncation;
            let filtered = Filtered::from_kernel(&kernel, true)?;
            let a = 1.0 / (4.0 * (2.0 * PI).powi(n as i32 - 1));
            let (v, r) = backproject(&filtered, &data.sphere, grid, a, XiMode::Origin, 0.0)?;
            (v, Some(r))
        }
        Variant::NeumannData => {
            let op = w_operator(n, &data.time, data.kind)?;
            let filtered = Filtered::build(data.detectors(), false, |j| op.apply(&data.profile(j)))?;
            let (v, _) = backproject(&filtered, &data.sphere, grid, 0.0, XiMode::EqualsX, 2.0)?;
            (v, None)
        }
        _ => unreachable!("all variants handled"),
    };
    Ok(ReconstructionReport { grid: grid.with_values(values), range_term, truncation, metrics: None })
}
