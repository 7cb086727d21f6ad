//! Forward operators: boundary data of a phantom on the detector sphere.
//!
//! `R_S f` and `M_S f` are integrated directly; the wave trace `T f` is
//! obtained as `B(R_S f)` and `P f` as its running time integral.

use rayon::prelude::*;

use crate::error::{Result, TatError};
use crate::grids::{scale, sphere_measure, SphereGrid, TimeGrid};
use crate::numerics::GaussLegendre;
use crate::phantom::Phantom;
use crate::xform::{BOperator, DecayClass, RadialProfile};

pub const DEFAULT_ANGULAR_RESOLUTION: usize = 32;
pub const DEFAULT_NEUMANN_STEP: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PanelKind {
    RadonRS,
    MeanMS,
    WaveT,
    IntegralP,
    NeumannTrace,
}

impl PanelKind {
    pub const ALL: [PanelKind; 5] =
        [PanelKind::RadonRS, PanelKind::MeanMS, PanelKind::WaveT, PanelKind::IntegralP, PanelKind::NeumannTrace];

    pub fn name(self) -> &'static str {
        match self {
            PanelKind::RadonRS => "radon",
            PanelKind::MeanMS => "mean",
            PanelKind::WaveT => "wave",
            PanelKind::IntegralP => "integral",
            PanelKind::NeumannTrace => "neumann",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == s)
    }

    /// Behaviour of a data row beyond the end of its time grid.
    pub fn decay_class(self, n: usize) -> DecayClass {
        let odd = n % 2 == 1;
        match self {
            PanelKind::RadonRS | PanelKind::MeanMS => DecayClass::CompactSupport(2.0),
            PanelKind::WaveT if odd => DecayClass::CompactSupport(2.0),
            PanelKind::WaveT => DecayClass::PowerDecay(n as f64),
            PanelKind::IntegralP if odd => DecayClass::CompactSupport(2.0),
            PanelKind::IntegralP => DecayClass::PowerDecay(n as f64 - 1.0),
            PanelKind::NeumannTrace if odd => DecayClass::CompactSupport(2.0 + 0.01),
            PanelKind::NeumannTrace => DecayClass::PowerDecay(n as f64 + 2.0),
        }
    }
}

impl std::fmt::Display for PanelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Detector-major samples: row `j` holds the data of detector `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct DataPanel {
    pub sphere: SphereGrid,
    pub time: TimeGrid,
    pub kind: PanelKind,
    pub values: Vec<f64>,
}

impl DataPanel {
    pub fn new(sphere: SphereGrid, time: TimeGrid, kind: PanelKind, values: Vec<f64>) -> Result<Self> {
        if values.len() != sphere.len() * time.samples {
            return Err(TatError::InvalidArgument(format!(
                "panel needs {} x {} values, got {}",
                sphere.len(),
                time.samples,
                values.len()
            )));
        }
        Ok(Self { sphere, time, kind, values })
    }

    pub fn zeros(sphere: SphereGrid, time: TimeGrid, kind: PanelKind) -> Self {
        let values = vec![0.0; sphere.len() * time.samples];
        Self { sphere, time, kind, values }
    }

    pub fn dim(&self) -> usize {
        self.sphere.dim
    }

    pub fn detectors(&self) -> usize {
        self.sphere.len()
    }

    pub fn row(&self, j: usize) -> &[f64] {
        let m = self.time.samples;
        &self.values[j * m..(j + 1) * m]
    }

    pub fn rows(&self) -> std::slice::Chunks<'_, f64> {
        self.values.chunks(self.time.samples)
    }

    pub fn profile(&self, j: usize) -> RadialProfile {
        RadialProfile {
            grid: self.time,
            values: self.row(j).to_vec(),
            decay: self.kind.decay_class(self.dim()),
            valid: 0..self.time.samples,
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Checks the panel kind, naming both sides on mismatch.
    pub fn expect_kind(&self, context: &str, expected: &[PanelKind]) -> Result<()> {
        if expected.contains(&self.kind) {
            Ok(())
        } else {
            let names: Vec<_> = expected.iter().map(|k| k.name()).collect();
            Err(TatError::KindMismatch {
                context: context.to_string(),
                expected: names.join("|"),
                got: self.kind.name().to_string(),
            })
        }
    }

    /// New panel of `kind` whose rows are `f(row)`, computed in parallel.
    pub fn map_rows<F>(&self, kind: PanelKind, f: F) -> Result<DataPanel>
    where
        F: Fn(&[f64]) -> Result<Vec<f64>> + Sync,
    {
        let m = self.time.samples;
        let mut values = vec![0.0; self.values.len()];
        values.par_chunks_mut(m).zip(self.values.par_chunks(m)).try_for_each(|(out, row)| {
            let r = f(row)?;
            out.copy_from_slice(&r);
            Ok::<(), TatError>(())
        })?;
        Ok(DataPanel { sphere: self.sphere.clone(), time: self.time, kind, values })
    }

    /// `a * self + b * other` for panels on the same grids.
    pub fn combine(&self, a: f64, other: &DataPanel, b: f64) -> Result<DataPanel> {
        if self.kind != other.kind || self.time != other.time || self.sphere.nodes != other.sphere.nodes {
            return Err(TatError::InvalidArgument("panels differ in kind or sampling".into()));
        }
        let values = self.values.iter().zip(&other.values).map(|(x, y)| a * x + b * y).collect();
        Ok(DataPanel { values, ..self.clone() })
    }
}

fn check_phantom(phantom: &Phantom, sphere: &SphereGrid) -> Result<()> {
    if phantom.dim != sphere.dim {
        return Err(TatError::InvalidArgument(format!(
            "phantom is {}-dimensional, detectors are {}-dimensional",
            phantom.dim, sphere.dim
        )));
    }
    Ok(())
}

fn sphere_integrals(
    phantom: &Phantom,
    sphere: &SphereGrid,
    time: &TimeGrid,
    angular_resolution: usize,
    radius: f64,
    weight: impl Fn(f64) -> f64 + Sync,
) -> Result<Vec<f64>> {
    check_phantom(phantom, sphere)?;
    if angular_resolution < 2 {
        return Err(TatError::ResolutionTooLow { got: angular_resolution, min: 2 });
    }
    let gl = GaussLegendre::new(angular_resolution);
    let m = time.samples;
    let mut values = vec![0.0; sphere.len() * m];
    values.par_chunks_mut(m).enumerate().for_each(|(j, row)| {
        let y = scale(&sphere.nodes[j], radius);
        for (k, v) in row.iter_mut().enumerate() {
            let t = time.at(k);
            *v = weight(t) * phantom.sphere_integral(&y, t, &gl);
        }
    });
    Ok(values)
}

/// `R_S f(y, t) = t^{n-1} int_{S^{n-1}} f(y + t w) dw`.
pub fn radon_rs(
    phantom: &Phantom,
    sphere: &SphereGrid,
    time: &TimeGrid,
    angular_resolution: usize,
) -> Result<DataPanel> {
    let p = (sphere.dim - 1) as i32;
    let values = sphere_integrals(phantom, sphere, time, angular_resolution, 1.0, |t| t.powi(p))?;
    DataPanel::new(sphere.clone(), *time, PanelKind::RadonRS, values)
}

/// `M_S f(y, t)`, the mean of `f` over the sphere of radius `t` about `y`.
pub fn mean_ms(
    phantom: &Phantom,
    sphere: &SphereGrid,
    time: &TimeGrid,
    angular_resolution: usize,
) -> Result<DataPanel> {
    let inv = 1.0 / sphere_measure(sphere.dim);
    let values = sphere_integrals(phantom, sphere, time, angular_resolution, 1.0, |_| inv)?;
    DataPanel::new(sphere.clone(), *time, PanelKind::MeanMS, values)
}

/// Wave trace `g = B(R_S f)`, row by row.
pub fn apply_b_transform(panel: &DataPanel) -> Result<DataPanel> {
    panel.expect_kind("apply_b_transform", &[PanelKind::RadonRS])?;
    let op = BOperator::new(panel.dim(), panel.time, panel.time.t_max)?;
    let decay = panel.kind.decay_class(panel.dim());
    panel.map_rows(PanelKind::WaveT, |row| {
        let v = RadialProfile::new(panel.time, row.to_vec(), decay)?;
        Ok(op.apply(&v)?.values)
    })
}

/// `T f` on the detectors, via `B` applied to `R_S f`.
pub fn wave_trace(
    phantom: &Phantom,
    sphere: &SphereGrid,
    time: &TimeGrid,
    angular_resolution: usize,
) -> Result<DataPanel> {
    apply_b_transform(&radon_rs(phantom, sphere, time, angular_resolution)?)
}

/// Running trapezoid integral in time; `P f` from `T f`.
pub fn integral_p(panel: &DataPanel) -> Result<DataPanel> {
    panel.expect_kind("integral_p", &[PanelKind::WaveT])?;
    let dt = panel.time.dt();
    panel.map_rows(PanelKind::IntegralP, |row| {
        let mut out = vec![0.0; row.len()];
        for k in 1..row.len() {
            out[k] = out[k - 1] + 0.5 * dt * (row[k - 1] + row[k]);
        }
        Ok(out)
    })
}

/// Normal derivative of the wave on the detector sphere, by central
/// differences of Dirichlet traces on the spheres of radius `1 +- h_step`.
pub fn neumann_trace(
    phantom: &Phantom,
    sphere: &SphereGrid,
    time: &TimeGrid,
    angular_resolution: usize,
    h_step: f64,
) -> Result<DataPanel> {
    if !(h_step > 0.0 && h_step < 0.5) {
        return Err(TatError::InvalidArgument(format!("neumann step {h_step} outside (0, 0.5)")));
    }
    let n = sphere.dim;
    let p = (n - 1) as i32;
    let op = BOperator::new(n, *time, time.t_max)?;
    let decay = DecayClass::CompactSupport(time.t_max);
    let trace_at = |radius: f64| -> Result<Vec<f64>> {
        let mut r = sphere_integrals(phantom, sphere, time, angular_resolution, radius, |t| t.powi(p))?;
        r.par_chunks_mut(time.samples).try_for_each(|row| {
            let v = RadialProfile::new(*time, row.to_vec(), decay)?;
            row.copy_from_slice(&op.apply(&v)?.values);
            Ok::<(), TatError>(())
        })?;
        Ok(r)
    };
    let outer = trace_at(1.0 + h_step)?;
    let inner = trace_at(1.0 - h_step)?;
    let values = outer.iter().zip(&inner).map(|(a, b)| (a - b) / (2.0 * h_step)).collect();
    DataPanel::new(sphere.clone(), *time, PanelKind::NeumannTrace, values)
}

/// Any of the five panel kinds for a phantom.
pub fn simulate(
    kind: PanelKind,
    phantom: &Phantom,
    sphere: &SphereGrid,
    time: &TimeGrid,
    angular_resolution: usize,
    neumann_step: f64,
) -> Result<DataPanel> {
    match kind {
        PanelKind::RadonRS => radon_rs(phantom, sphere, time, angular_resolution),
        PanelKind::MeanMS => mean_ms(phantom, sphere, time, angular_resolution),
        PanelKind::WaveT => wave_trace(phantom, sphere, time, angular_resolution),
        PanelKind::IntegralP => integral_p(&wave_trace(phantom, sphere, time, angular_resolution)?),
        PanelKind::NeumannTrace => neumann_trace(phantom, sphere, time, angular_resolution, neumann_step),
    }
}
