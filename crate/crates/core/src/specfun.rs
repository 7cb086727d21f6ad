//! Bessel functions of order zero, the Helmholtz Green's kernel `G(s, lambda)`
//! and the frequency-domain and log-kernel filters built from it.

use std::f64::consts::{FRAC_PI_4, PI};
use std::ops::Range;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Result, TatError};
use crate::forward::{DataPanel, PanelKind};
use crate::grids::{SphereGrid, TimeGrid};
use crate::numerics::{derivative4, GaussLegendre};
use crate::xform::{DecayClass, RadialProfile};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
/// Below this argument the power series is used, above it the asymptotic expansion.
pub const BESSEL_SWITCH: f64 = 12.0;

fn j0_series(x: f64) -> f64 {
    let q = 0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..80 {
        term *= -q / (k * k) as f64;
        sum += term;
        if term.abs() < 1e-17 * sum.abs().max(1e-300) && k > 2 {
            break;
        }
    }
    sum
}

fn y0_series(x: f64) -> f64 {
    let q = 0.25 * x * x;
    let mut term = 1.0;
    let mut harmonic = 0.0;
    let mut sum = 0.0;
    for k in 1..80 {
        term *= -q / (k * k) as f64;
        harmonic += 1.0 / k as f64;
        let add = -term * harmonic;
        sum += add;
        if add.abs() < 1e-17 * sum.abs().max(1e-300) && k > 2 {
            break;
        }
    }
    2.0 / PI * (((0.5 * x).ln() + EULER_GAMMA) * j0_series(x) + sum)
}

/// Hankel asymptotic factors `(P, Q)` for order zero.
fn pq_asymptotic(x: f64) -> (f64, f64) {
    let mut p = 1.0;
    let mut q = 0.0;
    // t_k = a_k / x^k with a_k = prod_{j<=k} -(2j-1)^2 / (k! 8^k)
    let mut t = 1.0f64;
    for k in 0..60usize {
        let next = t * -((2 * k + 1) as f64).powi(2) / (((k + 1) * 8) as f64 * x);
        if next.abs() >= t.abs() || next.abs() < 1e-18 {
            break;
        }
        let idx = k + 1;
        if idx % 2 == 0 {
            p += if (idx / 2) % 2 == 0 { next } else { -next };
        } else {
            q += if ((idx - 1) / 2) % 2 == 0 { next } else { -next };
        }
        t = next;
    }
    (p, q)
}

pub fn bessel_j0(x: f64) -> f64 {
    let x = x.abs();
    if x <= BESSEL_SWITCH {
        j0_series(x)
    } else {
        let (p, q) = pq_asymptotic(x);
        let chi = x - FRAC_PI_4;
        (2.0 / (PI * x)).sqrt() * (p * chi.cos() - q * chi.sin())
    }
}

pub fn bessel_y0(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(TatError::BesselDomain(x));
    }
    if x <= BESSEL_SWITCH {
        Ok(y0_series(x))
    } else {
        let (p, q) = pq_asymptotic(x);
        let chi = x - FRAC_PI_4;
        Ok((2.0 / (PI * x)).sqrt() * (p * chi.sin() + q * chi.cos()))
    }
}

fn check_n(n: usize) -> Result<()> {
    if n == 2 || n == 3 {
        Ok(())
    } else {
        Err(TatError::UnsupportedDimension(n))
    }
}

/// `J(x) = J_{(n-2)/2}(x) / x^{(n-2)/2}`; the half-order case uses its
/// trigonometric closed form.
pub fn scaled_j(n: usize, x: f64) -> f64 {
    match n {
        2 => bessel_j0(x),
        _ => {
            let c = (2.0 / PI).sqrt();
            if x.abs() < 1e-4 {
                c * (1.0 - x * x / 6.0)
            } else {
                c * x.sin() / x
            }
        }
    }
}

/// `N(x) = N_{(n-2)/2}(x) / x^{(n-2)/2}`, singular at `x = 0`.
pub fn scaled_n(n: usize, x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(TatError::BesselDomain(x));
    }
    match n {
        2 => bessel_y0(x),
        _ => Ok(-(2.0 / PI).sqrt() * x.cos() / x),
    }
}

/// `G(s, lambda)`, the outgoing Helmholtz fundamental solution profile.
pub fn green(n: usize, s: f64, lambda: f64) -> Result<Complex64> {
    check_n(n)?;
    if !(s > 0.0) {
        return Err(TatError::InvalidArgument(format!("green needs s > 0, got {s}")));
    }
    match n {
        3 => Ok(Complex64::from_polar(1.0, lambda * s) / (4.0 * PI * s)),
        _ => {
            if lambda == 0.0 {
                return Err(TatError::SingularKernel { s, lambda });
            }
            let x = lambda.abs() * s;
            let g = Complex64::new(-0.25 * bessel_y0(x)?, 0.25 * bessel_j0(x));
            Ok(if lambda > 0.0 { g } else { g.conj() })
        }
    }
}

/// Real and imaginary parts `(R, I)` of `G`.
pub fn green_parts(n: usize, s: f64, lambda: f64) -> Result<(f64, f64)> {
    let g = green(n, s, lambda)?;
    Ok((g.re, g.im))
}

/// `G` for a fixed dimension.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GreenKernel {
    pub n: usize,
}

impl GreenKernel {
    pub fn new(n: usize) -> Result<Self> {
        check_n(n)?;
        Ok(Self { n })
    }

    pub fn eval(&self, s: f64, lambda: f64) -> Result<Complex64> {
        green(self.n, s, lambda)
    }

    pub fn parts(&self, s: f64, lambda: f64) -> Result<(f64, f64)> {
        green_parts(self.n, s, lambda)
    }
}

/// Nodes and weights for the truncated `lambda`-integral over `[0, lambda_max]`.
///
/// Odd n uses the trapezoid rule with `steps` intervals. Even n integrands
/// carry `ln lambda` factors from `Y_0`, so each interval gets a 6-point
/// Gauss–Legendre rule and the first one is refined geometrically toward 0.
#[derive(Debug, Clone, PartialEq)]
pub struct LambdaRule {
    pub lambda_max: f64,
    pub steps: usize,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

const GRADED_LEVELS: usize = 40;
const GRADED_RATIO: f64 = 0.5;

impl LambdaRule {
    pub fn new(n: usize, lambda_max: f64, steps: usize) -> Result<Self> {
        check_n(n)?;
        if !(lambda_max > 0.0) || steps == 0 {
            return Err(TatError::InvalidArgument(format!(
                "lambda rule needs lambda_max > 0 and steps > 0, got {lambda_max}, {steps}"
            )));
        }
        let h = lambda_max / steps as f64;
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        if n % 2 == 1 {
            for m in 0..=steps {
                nodes.push(m as f64 * h);
                weights.push(if m == 0 || m == steps { 0.5 * h } else { h });
            }
        } else {
            let gl = GaussLegendre::new(6);
            let mut push = |a: f64, b: f64| {
                for (x, w) in gl.mapped(a, b) {
                    nodes.push(x);
                    weights.push(w);
                }
            };
            let mut hi = h;
            for _ in 0..GRADED_LEVELS {
                let lo = hi * GRADED_RATIO;
                push(lo, hi);
                hi = lo;
            }
            push(0.0, hi);
            for m in 1..steps {
                push(m as f64 * h, (m + 1) as f64 * h);
            }
            // ascending order keeps accumulation order fixed and readable
            let mut idx: Vec<usize> = (0..nodes.len()).collect();
            idx.sort_by(|&a, &b| nodes[a].total_cmp(&nodes[b]));
            nodes = idx.iter().map(|&i| nodes[i]).collect();
            weights = idx.iter().map(|&i| weights[i]).collect();
        }
        Ok(Self { lambda_max, steps, nodes, weights })
    }

    /// `lambda_max = 0.8 pi / dt` and a step of `pi / (2 t_max)`.
    pub fn default_for(n: usize, grid: &TimeGrid) -> Result<Self> {
        let lambda_max = 0.8 * PI / grid.dt();
        let step = PI / (2.0 * grid.t_max);
        let steps = (lambda_max / step).ceil() as usize;
        Self::new(n, lambda_max, steps)
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }

    fn tail_start(&self) -> f64 {
        0.9 * self.lambda_max
    }
}

/// Detector-by-radius table of a filtered kernel profile.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelPanel {
    pub sphere: SphereGrid,
    pub s_grid: TimeGrid,
    pub values: Vec<f64>,
    /// Indices of `s_grid` where the profile may be evaluated.
    pub valid: Range<usize>,
    /// Largest contribution of the last tenth of the `lambda` range.
    pub truncation: f64,
}

impl KernelPanel {
    pub fn row(&self, j: usize) -> &[f64] {
        let m = self.s_grid.samples;
        &self.values[j * m..(j + 1) * m]
    }

    pub fn profile(&self, j: usize) -> RadialProfile {
        RadialProfile {
            grid: self.s_grid,
            values: self.row(j).to_vec(),
            decay: DecayClass::CompactSupport(self.s_grid.t_max),
            valid: self.valid.clone(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn scaled(mut self, c: f64) -> Self {
        self.values.iter_mut().for_each(|v| *v *= c);
        self.truncation *= c.abs();
        self
    }
}

/// Dense linear map from data samples `g(r_k)` to a kernel profile at `s_i`:
/// `sum_m w_m left(lambda_m, s_i) sum_k wr_k right(lambda_m, r_k) g(r_k)`.
struct LambdaKernel {
    rows: usize,
    cols: usize,
    main: Vec<f64>,
    tail: Vec<f64>,
}

impl LambdaKernel {
    fn build<L, R>(s_grid: &TimeGrid, r_grid: &TimeGrid, rule: &LambdaRule, left: L, right: R) -> Result<Self>
    where
        L: Fn(f64, f64) -> Result<f64> + Sync,
        R: Fn(f64, f64) -> Result<f64> + Sync,
    {
        let rows = s_grid.samples;
        let cols = r_grid.samples;
        let nl = rule.nodes.len();
        let dr = r_grid.dt();
        // right table, columns r_k for k >= 1 (r = 0 carries no data)
        let mut rt = vec![0.0; nl * cols];
        rt.par_chunks_mut(cols).enumerate().try_for_each(|(m, row)| {
            let lam = rule.nodes[m];
            if lam == 0.0 {
                return Ok(());
            }
            for k in 1..cols {
                let wr = if k == cols - 1 { 0.5 * dr } else { dr };
                row[k] = wr * right(lam, r_grid.at(k))?;
            }
            Ok::<(), TatError>(())
        })?;
        let cut = rule.tail_start();
        let mut main = vec![0.0; rows * cols];
        let mut tail = vec![0.0; rows * cols];
        main.par_chunks_mut(cols).zip(tail.par_chunks_mut(cols)).enumerate().try_for_each(|(i, (mrow, trow))| {
            if i == 0 {
                return Ok(());
            }
            let s = s_grid.at(i);
            for m in 0..nl {
                let lam = rule.nodes[m];
                if lam == 0.0 {
                    continue;
                }
                let a = rule.weights[m] * left(lam, s)?;
                let target: &mut [f64] = if lam > cut { trow } else { mrow };
                let src = &rt[m * cols..(m + 1) * cols];
                for (t, r) in target.iter_mut().zip(src) {
                    *t += a * r;
                }
            }
            for (mv, tv) in mrow.iter_mut().zip(trow.iter()) {
                *mv += tv;
            }
            Ok::<(), TatError>(())
        })?;
        Ok(Self { rows, cols, main, tail })
    }

    fn apply(&self, g: &[f64]) -> (Vec<f64>, f64) {
        let mut out = vec![0.0; self.rows];
        let mut diag = 0.0f64;
        for i in 0..self.rows {
            let a = &self.main[i * self.cols..(i + 1) * self.cols];
            let b = &self.tail[i * self.cols..(i + 1) * self.cols];
            out[i] = a.iter().zip(g).map(|(x, y)| x * y).sum();
            let t: f64 = b.iter().zip(g).map(|(x, y)| x * y).sum();
            diag = diag.max(t.abs());
        }
        (out, diag)
    }
}

fn check_nyquist(grid: &TimeGrid, rule: &LambdaRule) -> Result<()> {
    let nyquist = PI / grid.dt();
    if rule.lambda_max > nyquist * (1.0 + 1e-12) {
        Err(TatError::NyquistExceeded { lambda_max: rule.lambda_max, nyquist })
    } else {
        Ok(())
    }
}

fn apply_lambda_kernel<L, R>(
    context: &str,
    panel: &DataPanel,
    s_grid: &TimeGrid,
    rule: &LambdaRule,
    left: L,
    right: R,
) -> Result<KernelPanel>
where
    L: Fn(f64, f64) -> Result<f64> + Sync,
    R: Fn(f64, f64) -> Result<f64> + Sync,
{
    panel.expect_kind(context, &[PanelKind::RadonRS])?;
    check_n(panel.dim())?;
    check_nyquist(&panel.time, rule)?;
    let op = LambdaKernel::build(s_grid, &panel.time, rule, left, right)?;
    let results: Vec<(Vec<f64>, f64)> = panel.rows().collect::<Vec<_>>().par_iter().map(|row| op.apply(row)).collect();
    let truncation = results.iter().fold(0.0f64, |m, r| m.max(r.1));
    let values = results.into_iter().flat_map(|r| r.0).collect();
    Ok(KernelPanel { sphere: panel.sphere.clone(), s_grid: *s_grid, values, valid: 1..s_grid.samples, truncation })
}

/// `K_n(y, s) = int lambda R(s, lambda) int g(y, r) I(r, lambda) dr dlambda`.
pub fn kernel_kn(panel: &DataPanel, s_grid: &TimeGrid, rule: &LambdaRule) -> Result<KernelPanel> {
    let n = panel.dim();
    apply_lambda_kernel(
        "kernel_kn",
        panel,
        s_grid,
        rule,
        |lam, s| Ok(lam * green_parts(n, s, lam)?.0),
        |lam, r| Ok(green_parts(n, r, lam)?.1),
    )
}

/// `k_n(y, s) = int lambda^{2n-3} N(s lambda) int g(y, r) J(r lambda) dr dlambda`.
pub fn kernel_kn_lowercase(panel: &DataPanel, s_grid: &TimeGrid, rule: &LambdaRule) -> Result<KernelPanel> {
    let n = panel.dim();
    let p = (2 * n - 3) as i32;
    apply_lambda_kernel(
        "kernel_kn_lowercase",
        panel,
        s_grid,
        rule,
        |lam, s| Ok(lam.powi(p) * scaled_n(n, s * lam)?),
        |lam, r| Ok(scaled_j(n, r * lam)),
    )
}

/// The second term of `h`: `int lambda^{2n-3} J(s lambda) int g(y, r) N(r lambda) dr dlambda`.
pub fn kernel_jn_swapped(panel: &DataPanel, s_grid: &TimeGrid, rule: &LambdaRule) -> Result<KernelPanel> {
    let n = panel.dim();
    let p = (2 * n - 3) as i32;
    apply_lambda_kernel(
        "kernel_jn_swapped",
        panel,
        s_grid,
        rule,
        |lam, s| Ok(lam.powi(p) * scaled_j(n, s * lam)),
        |lam, r| scaled_n(n, r * lam),
    )
}

/// `h = k_n - (J-then-N term)`, expected to equal `2 k_n`.
pub fn kernel_h(panel: &DataPanel, s_grid: &TimeGrid, rule: &LambdaRule) -> Result<KernelPanel> {
    let a = kernel_kn_lowercase(panel, s_grid, rule)?;
    let b = kernel_jn_swapped(panel, s_grid, rule)?;
    let values = a.values.iter().zip(&b.values).map(|(x, y)| x - y).collect();
    Ok(KernelPanel { values, truncation: a.truncation + b.truncation, ..a })
}

/// `v(r) / r` with the one-sided derivative at `r = 0`.
pub(crate) fn divide_by_r(v: &[f64], dr: f64) -> Vec<f64> {
    let mut out = vec![0.0; v.len()];
    for k in 1..v.len() {
        out[k] = v[k] / (k as f64 * dr);
    }
    if v.len() >= 5 {
        out[0] = (-25.0 * v[0] + 48.0 * v[1] - 36.0 * v[2] + 16.0 * v[3] - 3.0 * v[4]) / (12.0 * dr);
    }
    out
}

#[inline]
fn xlogx(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * x.abs().ln()
    }
}

#[inline]
fn x2logx(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * x * x.abs().ln()
    }
}

/// Antiderivatives in `r` of `ln|r^2 - s^2|` and `r ln|r^2 - s^2|`.
#[inline]
fn log_antiderivatives(r: f64, s: f64) -> (f64, f64) {
    let u = r - s;
    let w = r + s;
    let a0 = xlogx(u) - u + xlogx(w) - w;
    let a1 = 0.5 * x2logx(u) - 0.25 * u * u + s * (xlogx(u) - u) + 0.5 * x2logx(w) - 0.25 * w * w - s * (xlogx(w) - w);
    (a0, a1)
}

/// `int b(r) ln|r^2 - s^2| dr` over the samples `lo..hi` (principal value),
/// with `b` linear on each cell and the log integrated exactly.
pub fn log_product_integral(b: &[f64], dr: f64, lo: usize, hi: usize, s: f64) -> f64 {
    if hi <= lo + 1 {
        return 0.0;
    }
    let mut acc = 0.0;
    let (mut p0, mut p1) = log_antiderivatives(lo as f64 * dr, s);
    for k in lo..hi - 1 {
        let a = k as f64 * dr;
        let (q0, q1) = log_antiderivatives((k + 1) as f64 * dr, s);
        let i0 = q0 - p0;
        let i1 = q1 - p1;
        // hat functions on [a, a + dr]
        acc += b[k] * ((a + dr) * i0 - i1) / dr + b[k + 1] * (i1 - a * i0) / dr;
        p0 = q0;
        p1 = q1;
    }
    acc
}

/// Smallest index range containing all nonzero samples.
pub(crate) fn nonzero_span(b: &[f64]) -> (usize, usize) {
    let lo = b.iter().position(|&v| v != 0.0);
    match lo {
        None => (0, 0),
        Some(lo) => {
            let hi = b.iter().rposition(|&v| v != 0.0).unwrap() + 1;
            (lo.saturating_sub(1), (hi + 1).min(b.len()))
        }
    }
}

/// `(d/dr 1/r)^{n-1} g` for one data row.
pub(crate) fn log_kernel_density(n: usize, row: &[f64], dr: f64) -> Vec<f64> {
    let mut v = row.to_vec();
    for _ in 0..n - 1 {
        v = derivative4(&divide_by_r(&v, dr), dr);
    }
    v
}

/// `k_n(y, s) = ((-1)^{(n-2)/2} / pi) PV int (d/dr 1/r)^{n-1} g(y, r) ln|r^2 - s^2| dr`.
pub fn log_kernel_even(panel: &DataPanel, s_grid: &TimeGrid) -> Result<KernelPanel> {
    let n = panel.dim();
    if n % 2 == 1 {
        return Err(TatError::RequiresEvenDimension(n));
    }
    panel.expect_kind("log_kernel_even", &[PanelKind::RadonRS])?;
    if panel.time.samples < 8 {
        return Err(TatError::TooFewSamples { got: panel.time.samples, min: 8 });
    }
    let dr = panel.time.dt();
    let sign = if ((n - 2) / 2) % 2 == 0 { 1.0 } else { -1.0 };
    let m = s_grid.samples;
    let mut values = vec![0.0; panel.detectors() * m];
    values.par_chunks_mut(m).zip(panel.values.par_chunks(panel.time.samples)).for_each(|(out, row)| {
        let b = log_kernel_density(n, row, dr);
        let (lo, hi) = nonzero_span(&b);
        for (i, o) in out.iter_mut().enumerate() {
            *o = sign / PI * log_product_integral(&b, dr, lo, hi, s_grid.at(i));
        }
    });
    Ok(KernelPanel { sphere: panel.sphere.clone(), s_grid: *s_grid, values, valid: 0..m, truncation: 0.0 })
}
