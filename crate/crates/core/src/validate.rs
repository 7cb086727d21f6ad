//! Numerical identity checks with refinement pairs.
//!
//! Each check computes a normalised residual at a base resolution and at a
//! refined one. A check passes when the base residual is within tolerance,
//! and it converges when `log2(coarse / fine) >= MIN_SLOPE` or the refined
//! residual is already at the round-off floor.

use std::f64::consts::PI;
use std::fmt::Write as _;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Result, TatError};
use crate::forward::{radon_rs, wave_trace, DataPanel, PanelKind};
use crate::grids::{make_recon_grid, make_sphere_grid, Point, SphereGrid, TimeGrid};
use crate::phantom::{Phantom, Primitive};
use crate::recon::pstar_backproject;
use crate::specfun::{green, green_parts, kernel_jn_swapped, kernel_kn_lowercase, LambdaRule};
use crate::xform::{check_bessel_intertwining, check_intertwining, shrink, DecayClass, RadialProfile, WOperator};

pub const MIN_SLOPE: f64 = 2.0;
/// Refined residuals below this count as converged regardless of slope.
pub const ROUNDOFF_FLOOR: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct IdentityReport {
    pub name: String,
    pub dim: usize,
    pub residual: f64,
    pub residual_fine: Option<f64>,
    pub tolerance: f64,
    pub resolution: String,
    pub slope: Option<f64>,
    pub pass: bool,
    /// Negative controls are expected to fail.
    pub control: bool,
}

impl IdentityReport {
    fn new(name: &str, dim: usize, residual: f64, tolerance: f64, resolution: String) -> Self {
        Self {
            name: name.to_string(),
            dim,
            residual,
            residual_fine: None,
            tolerance,
            resolution,
            slope: None,
            pass: residual <= tolerance,
            control: false,
        }
    }

    fn with_fine(mut self, fine: f64) -> Self {
        self.residual_fine = Some(fine);
        self.slope = Some(if fine > 0.0 && self.residual > 0.0 {
            (self.residual / fine).log2()
        } else if fine == 0.0 {
            f64::INFINITY
        } else {
            0.0
        });
        self
    }

    fn as_control(mut self) -> Self {
        self.control = true;
        self
    }

    /// `None` when no refinement pair was run.
    pub fn converged(&self) -> Option<bool> {
        let fine = self.residual_fine?;
        Some(fine <= ROUNDOFF_FLOOR || self.slope.unwrap_or(0.0) >= MIN_SLOPE)
    }

    /// Residual within tolerance and, if refined, converging.
    pub fn ok(&self) -> bool {
        self.pass && self.converged().unwrap_or(true)
    }

    /// `name<TAB>value` lines.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let opt = |v: Option<f64>| v.map(|x| format!("{x:.6e}")).unwrap_or_else(|| "-".into());
        writeln!(s, "identity\t{}", self.name).unwrap();
        writeln!(s, "dim\t{}", self.dim).unwrap();
        writeln!(s, "residual\t{:.6e}", self.residual).unwrap();
        writeln!(s, "residual_fine\t{}", opt(self.residual_fine)).unwrap();
        writeln!(s, "tolerance\t{:.6e}", self.tolerance).unwrap();
        writeln!(s, "resolution\t{}", self.resolution).unwrap();
        writeln!(s, "slope\t{}", opt(self.slope)).unwrap();
        writeln!(s, "control\t{}", self.control).unwrap();
        writeln!(s, "pass\t{}", self.ok()).unwrap();
        s
    }
}

/// Parses the output of [`IdentityReport::to_text`] (reports separated by blank lines).
pub fn parse_reports(text: &str) -> Result<Vec<IdentityReport>> {
    let mut out = Vec::new();
    for block in text.split("\n\n").map(str::trim).filter(|b| !b.is_empty()) {
        let mut fields = std::collections::HashMap::new();
        for line in block.lines() {
            let (k, v) = line
                .split_once('\t')
                .ok_or_else(|| TatError::InvalidArgument(format!("report line without tab: {line:?}")))?;
            fields.insert(k, v);
        }
        let get =
            |k: &str| fields.get(k).copied().ok_or_else(|| TatError::InvalidArgument(format!("report is missing {k}")));
        let num = |k: &str| -> Result<f64> {
            get(k)?.parse().map_err(|_| TatError::InvalidArgument(format!("bad number for {k}")))
        };
        let opt = |k: &str| -> Result<Option<f64>> {
            match get(k)? {
                "-" => Ok(None),
                v => v.parse().map(Some).map_err(|_| TatError::InvalidArgument(format!("bad number for {k}"))),
            }
        };
        let residual = num("residual")?;
        let tolerance = num("tolerance")?;
        out.push(IdentityReport {
            name: get("identity")?.to_string(),
            dim: num("dim")? as usize,
            residual,
            residual_fine: opt("residual_fine")?,
            tolerance,
            resolution: get("resolution")?.to_string(),
            slope: opt("slope")?,
            pass: residual <= tolerance,
            control: get("control")? == "true",
        });
    }
    Ok(out)
}

/// Sampling used by the checks; `refined` halves every step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Resolution {
    pub sphere: usize,
    pub samples_per_unit: usize,
    pub t_max: f64,
}

impl Resolution {
    pub fn default_for(n: usize) -> Self {
        match n {
            2 => Self { sphere: 64, samples_per_unit: 64, t_max: 8.0 },
            _ => Self { sphere: 16, samples_per_unit: 64, t_max: 2.0 },
        }
    }

    /// Even n data never vanishes, so the observation window grows too.
    pub fn refined(&self) -> Self {
        Self {
            sphere: 2 * self.sphere,
            samples_per_unit: 2 * self.samples_per_unit,
            t_max: if self.t_max > 2.0 { 2.0 * self.t_max } else { self.t_max },
        }
    }

    pub fn time(&self) -> Result<TimeGrid> {
        TimeGrid::new(self.t_max, (self.t_max * self.samples_per_unit as f64).round() as usize + 1)
    }

    fn label(&self) -> String {
        format!("sphere={} samples_per_unit={} t_max={}", self.sphere, self.samples_per_unit, self.t_max)
    }
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Default phantom of the battery: an off-centre smooth bump.
pub fn default_phantom(n: usize) -> Phantom {
    let center = if n == 2 { [0.15, -0.1, 0.0] } else { [0.15, -0.1, 0.05] };
    Phantom::new(n, vec![Primitive::SmoothBump { center, radius: 0.45, amplitude: 1.0 }])
        .expect("default phantom is admissible")
}

fn probe_grid(n: usize) -> Result<crate::grids::ReconGrid> {
    make_recon_grid(n, 0.7, if n == 2 { 9 } else { 5 }, 0.05)
}

/// `max |int_S W(g)(y, |x-y|) dsigma(y)| / ||f||_inf` over interior probes.
fn range_residual(phantom: &Phantom, res: &Resolution) -> Result<f64> {
    let n = phantom.dim;
    let sphere = make_sphere_grid(n, res.sphere)?;
    let g = wave_trace(phantom, &sphere, &res.time()?, 24)?;
    let v = pstar_backproject(&g, &probe_grid(n)?)?;
    let scale = phantom.sup_bound();
    Ok(if scale > 0.0 { max_abs(&v) / scale } else { max_abs(&v) })
}

pub fn check_range_identity(phantom: &Phantom, res: &Resolution) -> Result<IdentityReport> {
    let coarse = range_residual(phantom, res)?;
    let fine = range_residual(phantom, &res.refined())?;
    Ok(IdentityReport::new("range_identity", phantom.dim, coarse, 1e-2, res.label()).with_fine(fine))
}

/// Off-range data: the same Gaussian pulse in `t` on every detector.
pub fn check_range_negative_control(n: usize, res: &Resolution) -> Result<IdentityReport> {
    let sphere = make_sphere_grid(n, res.sphere)?;
    let time = res.time()?;
    let pulse: Vec<f64> = time.values().iter().map(|t| (-((t - 1.0) / 0.15).powi(2)).exp()).collect();
    let values = (0..sphere.len()).flat_map(|_| pulse.iter().copied()).collect();
    let g = DataPanel::new(sphere, time, PanelKind::WaveT, values)?;
    let v = pstar_backproject(&g, &probe_grid(n)?)?;
    Ok(IdentityReport::new("range_identity_negative_control", n, max_abs(&v), 1e-2, res.label()).as_control())
}

fn bump_profile(t: f64) -> f64 {
    let u = (t - 1.0) / 0.5;
    if u.abs() >= 1.0 {
        0.0
    } else {
        (1.0 - u * u).powi(4)
    }
}

/// `max |int conj(G(s, l)) v^(l) dl - W(v)(s)| / max |W(v)|` on `s in [0.1, 1.9]`.
pub fn freqtime_residual(v: &RadialProfile, n: usize, lambda_max: f64) -> Result<f64> {
    let grid = v.grid;
    let dt = grid.dt();
    let w = WOperator::new(n, grid, v.decay, None)?.apply(v)?;
    let rule = LambdaRule::new(n, lambda_max, (lambda_max / (PI / 8.0)).ceil() as usize)?;
    // cosine transform of the even extension: v^(l) = (1/pi) int_0^inf v(t) cos(l t) dt
    let vhat: Vec<f64> = rule
        .nodes
        .iter()
        .map(|&l| {
            let s: f64 = v
                .values
                .iter()
                .enumerate()
                .map(|(k, x)| {
                    let wk = if k == 0 || k + 1 == v.values.len() { 0.5 } else { 1.0 };
                    wk * x * (l * k as f64 * dt).cos()
                })
                .sum();
            s * dt / PI
        })
        .collect();
    let lo = (0.1 / dt).ceil() as usize;
    let hi = ((1.9 / dt).floor() as usize).min(w.valid.end - 1);
    let mut worst = 0.0f64;
    for i in lo..=hi {
        let s = grid.at(i);
        let mut acc = 0.0;
        for ((&l, &wt), vh) in rule.nodes.iter().zip(&rule.weights).zip(&vhat) {
            if l == 0.0 && n == 2 {
                continue;
            }
            acc += wt * green_parts(n, s, l)?.0 * vh;
        }
        worst = worst.max((2.0 * acc - w.values[i]).abs());
    }
    let scale = w.max_abs();
    Ok(if scale > 0.0 { worst / scale } else { worst })
}

pub fn check_freqtime_w(n: usize, res: &Resolution) -> Result<IdentityReport> {
    let run = |r: &Resolution| -> Result<f64> {
        let grid = TimeGrid::new(2.0, 2 * r.samples_per_unit + 1)?;
        let v = RadialProfile::from_fn(grid, DecayClass::CompactSupport(2.0), bump_profile);
        freqtime_residual(&v, n, 0.8 * PI / grid.dt())
    };
    let coarse = run(res)?;
    let fine = run(&res.refined())?;
    Ok(IdentityReport::new("freqtime_w", n, coarse, 1e-3, res.label()).with_fine(fine))
}

/// Relative residual of `int g e^{i l s} ds = -i l int R_S f G(s, l) ds`
/// over all detectors and the given frequencies.
pub fn prop_tr_residual(phantom: &Phantom, res: &Resolution, lambdas: &[f64]) -> Result<f64> {
    let n = phantom.dim;
    let sphere = make_sphere_grid(n, res.sphere.min(16))?;
    let time = res.time()?;
    let rs = radon_rs(phantom, &sphere, &time, 24)?;
    let g = crate::forward::apply_b_transform(&rs)?;
    let dt = time.dt();
    let m = time.samples;
    let trap = |k: usize| if k == 0 || k + 1 == m { 0.5 * dt } else { dt };
    let mut worst = 0.0f64;
    for j in 0..sphere.len() {
        for &l in lambdas {
            let mut lhs = Complex64::new(0.0, 0.0);
            let mut rhs = Complex64::new(0.0, 0.0);
            for k in 0..m {
                let s = time.at(k);
                lhs += trap(k) * g.row(j)[k] * Complex64::from_polar(1.0, l * s);
                if k > 0 {
                    rhs += trap(k) * rs.row(j)[k] * green(n, s, l)?;
                }
            }
            if n % 2 == 0 {
                lhs += g.row(j)[m - 1] * power_tail(n as f64, time.t_max, l);
            }
            rhs *= Complex64::new(0.0, -l);
            worst = worst.max((lhs - rhs).norm() / rhs.norm().max(f64::MIN_POSITIVE));
        }
    }
    Ok(worst)
}

/// `T^p int_T^inf s^{-p} e^{i l s} ds` by repeated integration by parts.
fn power_tail(p: f64, t: f64, l: f64) -> Complex64 {
    let il = Complex64::new(0.0, l);
    let mut term = -Complex64::from_polar(1.0, l * t) / il;
    let mut acc = term;
    for k in 0..6 {
        term *= (p + k as f64) / (il * t);
        acc += term;
    }
    acc
}

pub fn check_prop_tr(phantom: &Phantom, res: &Resolution) -> Result<IdentityReport> {
    let lambdas = [2.0, 5.0];
    let coarse = prop_tr_residual(phantom, res, &lambdas)?;
    let fine = prop_tr_residual(phantom, &res.refined(), &lambdas)?;
    Ok(IdentityReport::new("prop_tr", phantom.dim, coarse, 1e-3, res.label()).with_fine(fine))
}

/// Random interior points, reproducible from `seed`.
pub fn interior_pairs(n: usize, count: usize, seed: u64) -> Vec<(Point, Point)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let point = |rng: &mut ChaCha8Rng| loop {
        let mut p = [0.0; 3];
        for c in p.iter_mut().take(n) {
            *c = rng.gen_range(-0.8..0.8);
        }
        if crate::grids::norm(&p) <= 0.8 {
            return p;
        }
    };
    (0..count).map(|_| (point(&mut rng), point(&mut rng))).collect()
}

/// `K(x, z, l) = int_S R(|x-y|, l) I(|z-y|, l') dsigma(y)`; `l' = l` for the true kernel.
fn kernel_k(sphere: &SphereGrid, x: &Point, z: &Point, l: f64, l_imag: f64) -> Result<f64> {
    let n = sphere.dim;
    let mut acc = 0.0;
    for (y, &w) in sphere.nodes.iter().zip(&sphere.weights) {
        let r = green_parts(n, crate::grids::norm(&crate::grids::sub(x, y)), l)?.0;
        let i = green_parts(n, crate::grids::norm(&crate::grids::sub(z, y)), l_imag)?.1;
        acc += w * r * i;
    }
    Ok(acc)
}

/// `max |K(x,z) - K(z,x)| / max |K|` over pairs and frequencies.
pub fn kernel_symmetry_residual(
    sphere: &SphereGrid,
    lambdas: &[f64],
    pairs: &[(Point, Point)],
    mismatch: f64,
) -> Result<f64> {
    let mut worst = 0.0f64;
    let mut scale = 0.0f64;
    for &l in lambdas {
        for (x, z) in pairs {
            let a = kernel_k(sphere, x, z, l, mismatch * l)?;
            let b = kernel_k(sphere, z, x, l, mismatch * l)?;
            worst = worst.max((a - b).abs());
            scale = scale.max(a.abs()).max(b.abs());
        }
    }
    Ok(if scale > 0.0 { worst / scale } else { 0.0 })
}

pub fn check_kernel_symmetry(n: usize, res: &Resolution, seed: u64) -> Result<IdentityReport> {
    let pairs = interior_pairs(n, 6, seed);
    let lambdas = [1.0, 3.0];
    let base = res.sphere;
    let coarse = kernel_symmetry_residual(&make_sphere_grid(n, base)?, &lambdas, &pairs, 1.0)?;
    let fine = kernel_symmetry_residual(&make_sphere_grid(n, 2 * base)?, &lambdas, &pairs, 1.0)?;
    Ok(IdentityReport::new("kernel_symmetry", n, coarse, 1e-4, format!("sphere={base}")).with_fine(fine))
}

/// The same kernel with `I` taken at a different frequency than `R`.
pub fn check_kernel_symmetry_negative_control(n: usize, res: &Resolution, seed: u64) -> Result<IdentityReport> {
    let pairs = interior_pairs(n, 6, seed);
    let sphere = make_sphere_grid(n, res.sphere)?;
    let r = kernel_symmetry_residual(&sphere, &[1.0, 3.0], &pairs, 1.7)?;
    Ok(IdentityReport::new("kernel_symmetry_negative_control", n, r, 1e-4, format!("sphere={}", res.sphere))
        .as_control())
}

fn kernel_pair(panel: &DataPanel) -> Result<(Vec<f64>, Vec<f64>, TimeGrid)> {
    let time = panel.time;
    let k = ((2.0 / time.dt()).round() as usize).min(time.samples - 1);
    let s_grid = TimeGrid::new(k as f64 * time.dt(), k + 1)?;
    let rule =
        LambdaRule::new(panel.dim(), 0.8 * PI / time.dt(), ((0.8 * PI / time.dt()) / (PI / 4.0)).ceil() as usize)?;
    let a = kernel_kn_lowercase(panel, &s_grid, &rule)?;
    let b = kernel_jn_swapped(panel, &s_grid, &rule)?;
    Ok((a.values, b.values, s_grid))
}

/// `max |h - 2 k_n| / max |k_n|` for `s in [0.2, 1.8]`, where
/// `h = k_n - (J-then-N term)`.
fn h_residual(panel: &DataPanel) -> Result<f64> {
    let (k, swapped, s_grid) = kernel_pair(panel)?;
    let m = s_grid.samples;
    let lo = (0.2 / s_grid.dt()).round() as usize;
    let hi = (1.8 / s_grid.dt()).round() as usize;
    let mut worst = 0.0f64;
    let mut scale = 0.0f64;
    for j in 0..panel.detectors() {
        for i in lo..=hi {
            let kv = k[j * m + i];
            let h = kv - swapped[j * m + i];
            worst = worst.max((h - 2.0 * kv).abs());
            scale = scale.max(kv.abs());
        }
    }
    Ok(if scale > 0.0 { worst / scale } else { 0.0 })
}

/// `h = 2 k_n` on spherical Radon data of a phantom.
pub fn check_h_equals_2k(phantom: &Phantom, res: &Resolution) -> Result<IdentityReport> {
    let n = phantom.dim;
    let run = |r: &Resolution| -> Result<f64> {
        let sphere = make_sphere_grid(n, 4)?;
        let time = TimeGrid::new(2.0, 2 * r.samples_per_unit + 1)?;
        h_residual(&radon_rs(phantom, &sphere, &time, 24)?)
    };
    let coarse = run(res)?;
    let fine = run(&res.refined())?;
    Ok(IdentityReport::new("h_equals_2k", n, coarse, 1e-2, res.label()).with_fine(fine))
}

/// The antisymmetry behind `h = 2 k_n`, on an analytic profile vanishing near 0.
pub fn check_toprk_antisymmetry(n: usize, res: &Resolution) -> Result<IdentityReport> {
    let run = |r: &Resolution| -> Result<f64> {
        let sphere = make_sphere_grid(n, 4)?;
        let time = TimeGrid::new(2.0, 2 * r.samples_per_unit + 1)?;
        let row: Vec<f64> = time.values().into_iter().map(bump_profile).collect();
        let values = (0..sphere.len()).flat_map(|_| row.iter().copied()).collect();
        h_residual(&DataPanel::new(sphere, time, PanelKind::RadonRS, values)?)
    };
    let coarse = run(res)?;
    let fine = run(&res.refined())?;
    Ok(IdentityReport::new("toprk_antisymmetry", n, coarse, 1e-2, res.label()).with_fine(fine))
}

fn intertwining_profile(grid: TimeGrid) -> RadialProfile {
    RadialProfile::from_fn(grid, DecayClass::CompactSupport(2.0), |s| s.powi(3) * bump_profile(s))
}

fn normalised<F>(n: usize, r: &Resolution, f: F) -> Result<f64>
where
    F: Fn(&RadialProfile, usize) -> Result<f64>,
{
    let grid = TimeGrid::new(2.0, 2 * r.samples_per_unit + 1)?;
    let v = intertwining_profile(grid);
    let w = WOperator::new(n, grid, v.decay, None)?.apply(&v)?;
    let scale = w.values[shrink(&w.valid, 2)].iter().fold(0.0f64, |m, x| m.max(x.abs()));
    Ok(f(&v, n)? / scale)
}

/// `s d/ds W(v) = W(s d/ds v) - (n - 2) W(v)`.
pub fn check_intertwining_identity(n: usize, res: &Resolution) -> Result<IdentityReport> {
    let coarse = normalised(n, res, check_intertwining)?;
    let fine = normalised(n, &res.refined(), check_intertwining)?;
    Ok(IdentityReport::new("intertwining", n, coarse, 1e-3, res.label()).with_fine(fine))
}

/// `W(v'') = (d^2/ds^2 + (n-1)/s d/ds) W(v)`.
pub fn check_bessel_intertwining_identity(n: usize, res: &Resolution) -> Result<IdentityReport> {
    let coarse = normalised(n, res, check_bessel_intertwining)?;
    let fine = normalised(n, &res.refined(), check_bessel_intertwining)?;
    Ok(IdentityReport::new("bessel_intertwining", n, coarse, 1e-2, res.label()).with_fine(fine))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationConfig {
    pub dims: Vec<usize>,
    pub seed: u64,
    pub negative_controls: bool,
}

impl Default for ValidationConfig {
    fn default() -> Self {
        Self { dims: vec![2, 3], seed: 7, negative_controls: false }
    }
}

/// Runs every check for every dimension in `config`.
pub fn run_battery(config: &ValidationConfig) -> Result<Vec<IdentityReport>> {
    let mut out = Vec::new();
    for &n in &config.dims {
        if n != 2 && n != 3 {
            return Err(TatError::UnsupportedDimension(n));
        }
        let res = Resolution::default_for(n);
        let f = default_phantom(n);
        out.push(check_intertwining_identity(n, &res)?);
        out.push(check_bessel_intertwining_identity(n, &res)?);
        out.push(check_freqtime_w(n, &res)?);
        out.push(check_prop_tr(&f, &res)?);
        out.push(check_kernel_symmetry(n, &res, config.seed)?);
        out.push(check_h_equals_2k(&f, &res)?);
        out.push(check_toprk_antisymmetry(n, &res)?);
        out.push(check_range_identity(&f, &res)?);
        if config.negative_controls {
            out.push(check_range_negative_control(n, &res)?);
            out.push(check_kernel_symmetry_negative_control(n, &res, config.seed)?);
        }
    }
    Ok(out)
}

pub fn failures(reports: &[IdentityReport]) -> usize {
    reports.iter().filter(|r| !r.ok()).count()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_inputs_give_zero_residuals() {
        let res = Resolution { sphere: 8, samples_per_unit: 32, t_max: 2.0 };
        let z = Phantom::zero(3);
        assert_eq!(range_residual(&z, &res).unwrap(), 0.0);
        let grid = TimeGrid::new(2.0, 65).unwrap();
        let v = RadialProfile::from_fn(grid, DecayClass::CompactSupport(2.0), |_| 0.0);
        assert_eq!(freqtime_residual(&v, 3, 0.8 * PI / grid.dt()).unwrap(), 0.0);
        assert_eq!(prop_tr_residual(&z, &res, &[2.0]).unwrap(), 0.0);
        let sphere = make_sphere_grid(3, 4).unwrap();
        let p = [[0.1, 0.2, 0.3], [0.0; 3]];
        assert_eq!(kernel_symmetry_residual(&sphere, &[1.0], &[(p[0], p[0])], 1.0).unwrap(), 0.0);
    }

    #[test]
    fn report_text_round_trip() {
        let r = IdentityReport::new("x", 3, 1e-4, 1e-3, "sphere=4".into()).with_fine(1e-5);
        let text = format!("{}\n{}", r.to_text(), r.clone().as_control().to_text());
        let back = parse_reports(&text).unwrap();
        assert_eq!(back.len(), 2);
        assert_eq!(back[0].name, "x");
        assert!((back[0].residual - 1e-4).abs() < 1e-15);
        assert!(back[1].control);
        assert!(r.ok());
    }

    #[test]
    fn slope_logic() {
        let r = IdentityReport::new("x", 2, 1e-4, 1e-3, String::new()).with_fine(5e-5);
        assert_eq!(r.converged(), Some(false));
        let r = IdentityReport::new("x", 2, 1e-4, 1e-3, String::new()).with_fine(1e-12);
        assert_eq!(r.converged(), Some(true));
        assert!(!IdentityReport::new("x", 2, 1e-2, 1e-3, String::new()).ok());
    }
}
