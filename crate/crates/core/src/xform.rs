//! Radial transforms acting on functions of `s >= 0` sampled on a uniform
//! grid: the intertwining filter `W`, its adjoint `W*`, the filter `B` that
//! turns spherical integrals into wave traces, and the scaled derivative
//! `s d/ds`.
//!
//! The Abel-type integrals behind the even-dimensional transforms are linear
//! in the sampled values and independent of the detector, so they are
//! assembled once into dense matrices ([`AbelMatrix`]) and then applied to
//! every detector row.

use std::f64::consts::PI;
use std::ops::Range;

use crate::error::{Result, TatError};
use crate::grids::{sphere_measure, TimeGrid};
use crate::numerics::{cubic_stencil, derivative4, GaussLegendre};

/// Normalising constant of the intertwining filter.
///
/// Even n: `(-1)^{(n-2)/2} / (2 pi)^{n/2}`; odd n: `(-1)^{(n-3)/2} / (2 (2 pi)^{(n-1)/2})`.
pub fn c_n(n: usize) -> f64 {
    assert!(n >= 2, "c_n needs n >= 2");
    let two_pi = 2.0 * PI;
    if n % 2 == 0 {
        let k = (n - 2) / 2;
        sign(k) / two_pi.powi((n / 2) as i32)
    } else {
        let k = (n - 3) / 2;
        sign(k) / (2.0 * two_pi.powi(((n - 1) / 2) as i32))
    }
}

/// `(-1)^k`
#[inline]
pub fn sign(k: usize) -> f64 {
    if k % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Number of `(s^{-1} d/ds)` factors in the filters for dimension `n`.
pub fn inner_order(n: usize) -> usize {
    if n % 2 == 0 {
        (n - 2) / 2
    } else {
        (n - 3) / 2
    }
}

/// Table of `c_n` and `omega_n` for a dimension.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantsCn {
    pub n: usize,
    pub c_n: f64,
    pub omega_n: f64,
}

impl ConstantsCn {
    pub fn new(n: usize) -> Self {
        Self { n, c_n: c_n(n), omega_n: sphere_measure(n) }
    }
}

/// How a profile behaves beyond the end of its grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DecayClass {
    /// Vanishes for `t > bound`.
    CompactSupport(f64),
    /// Behaves like `t^{-exponent}` beyond the grid.
    PowerDecay(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RadialProfile {
    pub grid: TimeGrid,
    pub values: Vec<f64>,
    pub decay: DecayClass,
    /// Indices where the samples may be evaluated.
    pub valid: Range<usize>,
}

impl RadialProfile {
    pub fn new(grid: TimeGrid, values: Vec<f64>, decay: DecayClass) -> Result<Self> {
        if values.len() != grid.samples {
            return Err(TatError::InvalidArgument(format!(
                "{} values for a grid of {} samples",
                values.len(),
                grid.samples
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(TatError::InvalidArgument("profile has non-finite samples".into()));
        }
        let valid = 0..values.len();
        Ok(Self { grid, values, decay, valid })
    }

    pub fn from_fn<F: Fn(f64) -> f64>(grid: TimeGrid, decay: DecayClass, f: F) -> Self {
        let values = grid.values().into_iter().map(f).collect();
        let valid = 0..grid.samples;
        Self { grid, values, decay, valid }
    }

    fn derived(&self, values: Vec<f64>, valid: Range<usize>) -> Self {
        Self { grid: self.grid, values, decay: self.decay, valid }
    }

    /// Cubic interpolation inside the valid window.
    pub fn eval(&self, s: f64) -> Result<f64> {
        let dt = self.grid.dt();
        let lo = self.valid.start as f64 * dt;
        let hi = (self.valid.end - 1) as f64 * dt;
        if s < lo - 1e-12 || s > hi + 1e-12 || self.valid.len() < 4 {
            return Err(TatError::RadiusOutsideWindow { s, lo, hi });
        }
        let st = cubic_stencil(s, dt, self.valid.start, self.valid.end - 1);
        Ok(st.apply(&self.values))
    }

    pub fn max_abs(&self) -> f64 {
        self.values[self.valid.clone()].iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Shrinks a window by `k` cells at both ends.
pub fn shrink(r: &Range<usize>, k: usize) -> Range<usize> {
    let start = r.start + k;
    let end = r.end.saturating_sub(k).max(start);
    start..end
}

/// `d/ds` with fourth-order stencils; the valid window loses two cells per side.
pub fn d_ds(v: &RadialProfile) -> Result<RadialProfile> {
    if v.values.len() < 5 {
        return Err(TatError::TooFewSamples { got: v.values.len(), min: 5 });
    }
    let d = derivative4(&v.values, v.grid.dt());
    Ok(v.derived(d, shrink(&v.valid, 2)))
}

/// `s * d/ds`.
pub fn s_dds(v: &RadialProfile) -> Result<RadialProfile> {
    let mut d = d_ds(v)?;
    let dt = v.grid.dt();
    for (k, x) in d.values.iter_mut().enumerate() {
        *x *= k as f64 * dt;
    }
    Ok(d)
}

/// `s^{-1} d/ds`; `s = 0` drops out of the valid window.
pub fn inv_s_dds(v: &RadialProfile) -> Result<RadialProfile> {
    let mut d = d_ds(v)?;
    let dt = v.grid.dt();
    d.values[0] = 0.0;
    for (k, x) in d.values.iter_mut().enumerate().skip(1) {
        *x /= k as f64 * dt;
    }
    if d.valid.start == 0 {
        d.valid.start = 1;
    }
    Ok(d)
}

/// `v(s) / s`, using `v'(0)` at the origin (requires `v(0) = 0`).
fn divide_by_s(v: &RadialProfile) -> Result<RadialProfile> {
    let dt = v.grid.dt();
    let scale = v.max_abs().max(f64::MIN_POSITIVE);
    if v.values[0].abs() > 1e-12 * scale && v.values[0] != 0.0 {
        return Err(TatError::NonzeroAtOrigin(v.values[0]));
    }
    let mut out = vec![0.0; v.values.len()];
    for k in 1..out.len() {
        out[k] = v.values[k] / (k as f64 * dt);
    }
    if v.values.len() >= 5 {
        let d = &v.values;
        out[0] = (-25.0 * d[0] + 48.0 * d[1] - 36.0 * d[2] + 16.0 * d[3] - 3.0 * d[4]) / (12.0 * dt);
    }
    Ok(v.derived(out, v.valid.clone()))
}

fn apply_inv_s_dds_times(mut v: RadialProfile, times: usize) -> Result<RadialProfile> {
    for _ in 0..times {
        v = inv_s_dds(&v)?;
    }
    Ok(v)
}

/// Which Abel-type integral a matrix represents.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AbelKind {
    /// `int_0^s v(t) / sqrt(s^2 - t^2) dt`
    Head,
    /// `int_s^inf v(t) / sqrt(t^2 - s^2) dt`
    Tail,
}

/// Dense matrix mapping grid samples to an Abel-type integral evaluated at
/// grid rows `rows`. Integration runs over cells of the grid with a cubic
/// interpolant of the samples; the singular weight is removed by the
/// substitution `t = s sin u` (head) or `t = s cosh u` (tail), and each
/// cell is integrated by Gauss–Legendre in `u`.
#[derive(Debug, Clone)]
pub struct AbelMatrix {
    pub kind: AbelKind,
    pub rows: Range<usize>,
    pub cols: usize,
    data: Vec<f64>,
}

const NODES_PER_CELL: usize = 4;
const MAX_PANEL: f64 = 0.2;

/// Gauss nodes on `[a, b]`, split into panels no wider than `MAX_PANEL`.
fn panels(gl: &GaussLegendre, a: f64, b: f64) -> Vec<(f64, f64)> {
    let pieces = ((b - a) / MAX_PANEL).ceil().max(1.0) as usize;
    let h = (b - a) / pieces as f64;
    (0..pieces).flat_map(|i| gl.mapped(a + i as f64 * h, a + (i + 1) as f64 * h).collect::<Vec<_>>()).collect()
}

impl AbelMatrix {
    /// `support` is the largest `t` at which samples can be nonzero;
    /// for a tail with `tail_exponent = Some(p)` the samples are continued
    /// as `v(T) (T / t)^p` beyond the end `T` of the grid.
    pub fn new(kind: AbelKind, grid: TimeGrid, rows: Range<usize>, support: f64, tail_exponent: Option<f64>) -> Self {
        let n = grid.samples;
        assert!(n >= 4, "Abel matrix needs at least 4 samples");
        let dt = grid.dt();
        let gl = GaussLegendre::new(NODES_PER_CELL);
        let rows = rows.start..rows.end.min(n);
        let mut data = vec![0.0; rows.len() * n];
        let top = support.min(grid.t_max);
        let top_cell = ((top / dt) - 1e-9).ceil().max(0.0) as usize;
        let top_cell = top_cell.min(n - 1);

        for (ri, j) in rows.clone().enumerate() {
            let row = &mut data[ri * n..(ri + 1) * n];
            let s = j as f64 * dt;
            match kind {
                AbelKind::Head => {
                    if j == 0 {
                        // int_0^{pi/2} v(0) du
                        row[0] = 0.5 * PI;
                        continue;
                    }
                    let last = j.min(top_cell);
                    for k in 0..last {
                        let ta = k as f64 * dt;
                        let tb = ((k + 1) as f64 * dt).min(s);
                        let ua = (ta / s).min(1.0).asin();
                        let ub = (tb / s).min(1.0).asin();
                        for (u, w) in panels(&gl, ua, ub) {
                            let t = s * u.sin();
                            let st = cubic_stencil(t, dt, 0, n - 1);
                            for m in 0..4 {
                                row[st.start + m] += w * st.weights[m];
                            }
                        }
                    }
                }
                AbelKind::Tail => {
                    if j == 0 {
                        continue;
                    }
                    for k in j..top_cell {
                        let ta = k as f64 * dt;
                        let tb = (k + 1) as f64 * dt;
                        let ua = (ta / s).max(1.0).acosh();
                        let ub = (tb / s).acosh();
                        for (u, w) in panels(&gl, ua, ub) {
                            let t = s * u.cosh();
                            let st = cubic_stencil(t, dt, 0, n - 1);
                            for m in 0..4 {
                                row[st.start + m] += w * st.weights[m];
                            }
                        }
                    }
                    if let Some(p) = tail_exponent {
                        let t_end = grid.t_max;
                        if s < t_end {
                            let r2 = (s / t_end).powi(2);
                            row[n - 1] += 1.0 / p + r2 / (2.0 * (p + 2.0)) + 3.0 * r2 * r2 / (8.0 * (p + 4.0));
                        }
                    }
                }
            }
        }
        Self { kind, rows, cols: n, data }
    }

    /// Applies the matrix to samples; entries outside `rows` are zero.
    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.cols);
        let mut out = vec![0.0; self.cols];
        for (ri, j) in self.rows.clone().enumerate() {
            let row = &self.data[ri * self.cols..(ri + 1) * self.cols];
            out[j] = row.iter().zip(v).map(|(a, b)| a * b).sum();
        }
        out
    }
}

fn tail_exponent(n: usize, decay: DecayClass) -> Result<Option<f64>> {
    match decay {
        DecayClass::CompactSupport(_) => Ok(None),
        DecayClass::PowerDecay(p) => {
            if n % 2 == 0 && !(p > 0.0) {
                Err(TatError::DivergentTail(p))
            } else {
                Ok(Some(p))
            }
        }
    }
}

fn support_of(grid: &TimeGrid, decay: DecayClass) -> f64 {
    match decay {
        DecayClass::CompactSupport(b) => b.min(grid.t_max),
        DecayClass::PowerDecay(_) => grid.t_max,
    }
}

/// Precomputed `W` for one grid, dimension and decay class. Even dimensions
/// evaluate the tail integral only on rows `1..row_limit`.
#[derive(Debug, Clone)]
pub struct WOperator {
    pub n: usize,
    pub grid: TimeGrid,
    pub decay: DecayClass,
    abel: Option<AbelMatrix>,
}

impl WOperator {
    pub fn new(n: usize, grid: TimeGrid, decay: DecayClass, row_limit: Option<usize>) -> Result<Self> {
        if n < 2 {
            return Err(TatError::UnsupportedDimension(n));
        }
        if grid.samples < 8 {
            return Err(TatError::TooFewSamples { got: grid.samples, min: 8 });
        }
        let abel = if n % 2 == 0 {
            let p = tail_exponent(n, decay)?;
            let end = row_limit.unwrap_or(grid.samples).min(grid.samples);
            Some(AbelMatrix::new(AbelKind::Tail, grid, 1..end, support_of(&grid, decay), p))
        } else {
            None
        };
        Ok(Self { n, grid, decay, abel })
    }

    pub fn apply(&self, v: &RadialProfile) -> Result<RadialProfile> {
        let cn = c_n(self.n);
        let k = inner_order(self.n);
        let base = match &self.abel {
            None => divide_by_s(v)?,
            Some(m) => {
                let vals = m.apply(&v.values);
                let valid = m.rows.start.max(v.valid.start)..m.rows.end.min(v.valid.end);
                v.derived(vals, valid)
            }
        };
        let mut out = apply_inv_s_dds_times(base, k)?;
        out.values.iter_mut().for_each(|x| *x *= cn);
        Ok(out)
    }

    /// Applies `W` to a raw row of samples (the decay class of the operator
    /// is assumed).
    pub fn apply_row(&self, row: &[f64]) -> Result<RadialProfile> {
        let v = RadialProfile::new(self.grid, row.to_vec(), self.decay)?;
        self.apply(&v)
    }
}

/// Precomputed `W*`.
#[derive(Debug, Clone)]
pub struct WStarOperator {
    pub n: usize,
    pub grid: TimeGrid,
    abel: Option<AbelMatrix>,
}

impl WStarOperator {
    pub fn new(n: usize, grid: TimeGrid, support: f64) -> Result<Self> {
        if n < 2 {
            return Err(TatError::UnsupportedDimension(n));
        }
        if grid.samples < 8 {
            return Err(TatError::TooFewSamples { got: grid.samples, min: 8 });
        }
        let abel = (n % 2 == 0).then(|| AbelMatrix::new(AbelKind::Head, grid, 0..grid.samples, support, None));
        Ok(Self { n, grid, abel })
    }

    pub fn apply(&self, v: &RadialProfile) -> Result<RadialProfile> {
        let k = inner_order(self.n);
        let coeff = sign(k) * c_n(self.n);
        let mut out = match &self.abel {
            None => apply_inv_s_dds_times(divide_by_s(v)?, k)?,
            Some(m) => {
                let inner = apply_inv_s_dds_times(v.clone(), k)?;
                let vals = m.apply(&inner.values);
                inner.derived(vals, inner.valid.clone())
            }
        };
        out.values.iter_mut().for_each(|x| *x *= coeff);
        Ok(out)
    }
}

/// Precomputed `B`, mapping spherical integrals `R_S f` to the wave trace.
/// For n = 2 and n = 3 this is `d/ds W*`.
#[derive(Debug, Clone)]
pub struct BOperator {
    pub n: usize,
    pub grid: TimeGrid,
    abel: Option<AbelMatrix>,
}

impl BOperator {
    pub fn new(n: usize, grid: TimeGrid, support: f64) -> Result<Self> {
        if n < 2 {
            return Err(TatError::UnsupportedDimension(n));
        }
        if grid.samples < 8 {
            return Err(TatError::TooFewSamples { got: grid.samples, min: 8 });
        }
        let abel = (n % 2 == 0).then(|| AbelMatrix::new(AbelKind::Head, grid, 0..grid.samples, support, None));
        Ok(Self { n, grid, abel })
    }

    pub fn apply(&self, v: &RadialProfile) -> Result<RadialProfile> {
        let k = inner_order(self.n);
        let coeff = sign(k) * c_n(self.n);
        let base = match &self.abel {
            None => divide_by_s(v)?,
            Some(m) => {
                let vals = m.apply(&v.values);
                v.derived(vals, v.valid.clone())
            }
        };
        let inner = apply_inv_s_dds_times(base, k)?;
        let mut out = d_ds(&inner)?;
        out.values.iter_mut().for_each(|x| *x *= coeff);
        Ok(out)
    }
}

pub fn apply_w(v: &RadialProfile, n: usize) -> Result<RadialProfile> {
    WOperator::new(n, v.grid, v.decay, None)?.apply(v)
}

pub fn apply_w_star(v: &RadialProfile, n: usize) -> Result<RadialProfile> {
    let support = support_of(&v.grid, v.decay);
    WStarOperator::new(n, v.grid, support)?.apply(v)
}

pub fn apply_b(v: &RadialProfile, n: usize) -> Result<RadialProfile> {
    let support = support_of(&v.grid, v.decay);
    BOperator::new(n, v.grid, support)?.apply(v)
}

/// Max-norm of `a - b` over `window`, with two more cells dropped at each end.
pub fn window_residual(a: &RadialProfile, b: &RadialProfile, window: &Range<usize>) -> f64 {
    let w = shrink(window, 2);
    w.map(|k| (a.values[k] - b.values[k]).abs()).fold(0.0, f64::max)
}

fn common(a: &Range<usize>, b: &Range<usize>) -> Range<usize> {
    a.start.max(b.start)..a.end.min(b.end)
}

/// Residual of `s d/ds W(v) = W(s d/ds v) - (n - 2) W(v)`.
pub fn check_intertwining(v: &RadialProfile, n: usize) -> Result<f64> {
    let op = WOperator::new(n, v.grid, v.decay, None)?;
    let wv = op.apply(v)?;
    let lhs = s_dds(&wv)?;
    let sv = s_dds(v)?;
    let w_sv = op.apply(&sv)?;
    let mut rhs = w_sv.clone();
    for (r, w) in rhs.values.iter_mut().zip(&wv.values) {
        *r -= (n as f64 - 2.0) * w;
    }
    let window = common(&common(&lhs.valid, &rhs.valid), &wv.valid);
    Ok(window_residual(&lhs, &rhs, &window))
}

/// Residual of `W(v'') = (d^2/ds^2 + (n - 1)/s d/ds) W(v)`.
pub fn check_bessel_intertwining(v: &RadialProfile, n: usize) -> Result<f64> {
    let op = WOperator::new(n, v.grid, v.decay, None)?;
    let v2 = d_ds(&d_ds(v)?)?;
    let lhs = op.apply(&v2)?;
    let wv = op.apply(v)?;
    let d1 = d_ds(&wv)?;
    let d2 = d_ds(&d1)?;
    let dt = v.grid.dt();
    let mut rhs = d2.clone();
    for k in 1..rhs.values.len() {
        rhs.values[k] += (n as f64 - 1.0) / (k as f64 * dt) * d1.values[k];
    }
    let mut window = common(&lhs.valid, &rhs.valid);
    window.start = window.start.max(1);
    Ok(window_residual(&lhs, &rhs, &window))
}
