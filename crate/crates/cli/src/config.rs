//! Run configuration: a TOML file with `[phantom]`, `[grid]`, `[formula]`,
//! `[output]` and `[validate]` sections. Unknown keys are rejected.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use tat_core::forward::PanelKind;
use tat_core::grids::{make_recon_grid, make_sphere_grid, ReconGrid, SphereGrid, TimeGrid};
use tat_core::phantom::{Phantom, Primitive};
use tat_core::recon::{FormulaSpec, PhiMode, Variant, XiMode};
use tat_core::validate::ValidationConfig;

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub dim: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub phantom: PhantomSection,
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default)]
    pub formula: FormulaSection,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default)]
    pub validate: ValidateSection,
}

fn default_seed() -> u64 {
    7
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhantomSection {
    #[serde(default)]
    pub allow_exterior: bool,
    #[serde(default)]
    pub components: Vec<ComponentSpec>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ComponentKind {
    Ball,
    SmoothBump,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentSpec {
    pub kind: ComponentKind,
    pub center: Vec<f64>,
    pub radius: f64,
    #[serde(default = "one")]
    pub amplitude: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSection {
    pub sphere_resolution: usize,
    pub angular_resolution: usize,
    pub time_samples: usize,
    pub t_max: f64,
    pub neumann_step: f64,
    pub recon_half_width: f64,
    pub recon_points_per_axis: usize,
    pub recon_margin: f64,
}

impl Default for GridSection {
    fn default() -> Self {
        Self {
            sphere_resolution: 32,
            angular_resolution: tat_core::forward::DEFAULT_ANGULAR_RESOLUTION,
            time_samples: 129,
            t_max: 2.0,
            neumann_step: tat_core::forward::DEFAULT_NEUMANN_STEP,
            recon_half_width: 0.7,
            recon_points_per_axis: 17,
            recon_margin: tat_core::grids::DEFAULT_MARGIN,
        }
    }
}

/// `"x"`, `"origin"` or an explicit point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum XiSpec {
    Named(String),
    Point(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FormulaSection {
    pub variant: String,
    /// Left unset, the variant's own default applies.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub xi: Option<XiSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phi: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda_steps: Option<usize>,
}

impl Default for FormulaSection {
    fn default() -> Self {
        Self {
            variant: Variant::TimeDomainW.name().to_string(),
            xi: None,
            phi: None,
            lambda_max: None,
            lambda_steps: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub dir: PathBuf,
    /// Panel kinds written by `forward`.
    pub kinds: Vec<String>,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { dir: PathBuf::from("."), kinds: vec![PanelKind::WaveT.name().to_string()] }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ValidateSection {
    pub negative_controls: bool,
    /// Defaults to both supported dimensions.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dims: Option<Vec<usize>>,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        tat_core::grids::check_dim(cfg.dim).map_err(|e| CliError::Config(e.to_string()))?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serialises")
    }

    pub fn phantom(&self, allow_exterior: bool) -> Result<Phantom, CliError> {
        let mut components = Vec::with_capacity(self.phantom.components.len());
        for c in &self.phantom.components {
            if c.center.len() != self.dim {
                return Err(CliError::Config(format!(
                    "phantom center has {} coordinates, expected {}",
                    c.center.len(),
                    self.dim
                )));
            }
            let mut center = [0.0; 3];
            center[..self.dim].copy_from_slice(&c.center);
            components.push(match c.kind {
                ComponentKind::Ball => Primitive::Ball { center, radius: c.radius, amplitude: c.amplitude },
                ComponentKind::SmoothBump => Primitive::SmoothBump { center, radius: c.radius, amplitude: c.amplitude },
            });
        }
        let phantom = if allow_exterior || self.phantom.allow_exterior {
            Phantom::new_allow_exterior(self.dim, components)
        } else {
            Phantom::new(self.dim, components)
        };
        Ok(phantom?)
    }

    pub fn sphere(&self) -> Result<SphereGrid, CliError> {
        Ok(make_sphere_grid(self.dim, self.grid.sphere_resolution)?)
    }

    pub fn time(&self) -> Result<TimeGrid, CliError> {
        Ok(TimeGrid::new(self.grid.t_max, self.grid.time_samples)?)
    }

    pub fn recon_grid(&self) -> Result<ReconGrid, CliError> {
        Ok(make_recon_grid(
            self.dim,
            self.grid.recon_half_width,
            self.grid.recon_points_per_axis,
            self.grid.recon_margin,
        )?)
    }

    pub fn kinds(&self) -> Result<Vec<PanelKind>, CliError> {
        self.output
            .kinds
            .iter()
            .map(|k| PanelKind::from_name(k).ok_or_else(|| CliError::Config(format!("unknown panel kind {k:?}"))))
            .collect()
    }

    pub fn formula(&self) -> Result<FormulaSpec, CliError> {
        let f = &self.formula;
        let variant = Variant::from_name(&f.variant)
            .ok_or_else(|| CliError::Config(format!("unknown variant {:?}", f.variant)))?;
        let mut spec = FormulaSpec::new(variant, self.dim);
        if let Some(xi) = &f.xi {
            spec = spec.with_xi(match xi {
                XiSpec::Named(s) if s == "x" => XiMode::EqualsX,
                XiSpec::Named(s) if s == "origin" => XiMode::Origin,
                XiSpec::Named(s) => {
                    return Err(CliError::Config(format!("xi must be \"x\", \"origin\" or a point, got {s:?}")))
                }
                XiSpec::Point(p) if p.len() == self.dim => {
                    let mut q = [0.0; 3];
                    q[..self.dim].copy_from_slice(p);
                    XiMode::Fixed(q)
                }
                XiSpec::Point(p) => {
                    return Err(CliError::Config(format!("xi has {} coordinates, expected {}", p.len(), self.dim)))
                }
            });
        }
        if let Some(phi) = f.phi {
            spec = spec.with_phi(if phi == 0.0 { PhiMode::Zero } else { PhiMode::Constant(phi) });
        }
        spec.lambda_max = f.lambda_max;
        spec.lambda_steps = f.lambda_steps;
        spec.validate(self.dim)?;
        Ok(spec)
    }

    pub fn validation(&self) -> ValidationConfig {
        ValidationConfig {
            dims: self.validate.dims.clone().unwrap_or_else(|| vec![2, 3]),
            seed: self.seed,
            negative_controls: self.validate.negative_controls,
        }
    }
}
