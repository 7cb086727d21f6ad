//! Pipeline driver for the `tat` binary: config parsing, panel and grid
//! files, and the subcommands themselves.

pub mod config;
pub mod io;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use log::info;
use tat_core::forward::simulate;
use tat_core::grids::{Point, ReconGrid};
use tat_core::recon::{reconstruct, ErrorMetrics};
use tat_core::validate::{failures, run_battery};
use tat_core::TatError;

pub use config::RunConfig;
pub use io::FormatError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Numerics(#[from] TatError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: corrupt file at byte {}: {}", .error.offset, .error.message)]
    Format { path: PathBuf, error: FormatError },
    #[error("{0} identity check(s) failed")]
    ValidationFailed(usize),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io { path: path.to_path_buf(), source }
    }

    pub fn format(path: &Path, error: FormatError) -> Self {
        CliError::Format { path: path.to_path_buf(), error }
    }

    /// 1 usage/config, 2 failed validation, 3 I/O or corrupt file.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Config(_) | CliError::Numerics(_) => 1,
            CliError::ValidationFailed(_) => 2,
            CliError::Io { .. } | CliError::Format { .. } => 3,
        }
    }
}

/// Writes the phantom sampled on the reconstruction grid to `phantom.tatg`.
pub fn cmd_phantom(cfg: &RunConfig, allow_exterior: bool) -> Result<PathBuf, CliError> {
    let phantom = cfg.phantom(allow_exterior)?;
    let grid = cfg.recon_grid()?;
    let values = grid.points.iter().map(|p| phantom.eval(p)).collect();
    let path = cfg.output.dir.join("phantom.tatg");
    io::write_grid(&path, &grid.with_values(values))?;
    info!("phantom: wrote {}", path.display());
    Ok(path)
}

/// Writes one `<kind>.tatp` file per requested panel kind.
pub fn cmd_forward(cfg: &RunConfig, allow_exterior: bool) -> Result<Vec<PathBuf>, CliError> {
    let phantom = cfg.phantom(allow_exterior)?;
    let sphere = cfg.sphere()?;
    let time = cfg.time()?;
    let mut written = Vec::new();
    for kind in cfg.kinds()? {
        let panel = simulate(kind, &phantom, &sphere, &time, cfg.grid.angular_resolution, cfg.grid.neumann_step)?;
        let path = cfg.output.dir.join(format!("{}.tatp", kind.name()));
        io::write_panel(&path, &panel)?;
        info!("forward: wrote {} ({} detectors x {} samples)", path.display(), panel.detectors(), time.samples);
        written.push(path);
    }
    Ok(written)
}

fn metric_value(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.9e}")).unwrap_or_else(|| "-".into())
}

fn metrics_text(variant: &str, m: &ErrorMetrics, truncation: f64, range_term: Option<&[f64]>) -> String {
    // zero against zero has relative error 0, not undefined
    let relative = m.relative_l2.or(if m.l2 == 0.0 { Some(0.0) } else { None });
    let mut s = String::new();
    writeln!(s, "variant\t{variant}").unwrap();
    writeln!(s, "l2\t{:.9e}", m.l2).unwrap();
    writeln!(s, "linf\t{:.9e}", m.linf).unwrap();
    writeln!(s, "relative_l2\t{}", metric_value(relative)).unwrap();
    writeln!(s, "lambda_truncation\t{truncation:.9e}").unwrap();
    let range = range_term.map(|r| r.iter().fold(0.0f64, |a, x| a.max(x.abs())));
    writeln!(s, "range_term_linf\t{}", metric_value(range)).unwrap();
    s
}

#[derive(Debug, Clone)]
pub struct ReconOutput {
    pub grid_path: PathBuf,
    pub metrics_path: PathBuf,
    pub metrics: String,
}

/// Reconstructs from a panel file and scores the result against the
/// configured phantom.
pub fn cmd_recon(cfg: &RunConfig, panel_path: &Path, allow_exterior: bool) -> Result<ReconOutput, CliError> {
    let spec = cfg.formula()?;
    let phantom = cfg.phantom(allow_exterior)?;
    let panel = io::read_panel(panel_path)?;
    if panel.dim() != cfg.dim {
        return Err(CliError::Usage(format!(
            "panel has dimension {} but the config asks for {}",
            panel.dim(),
            cfg.dim
        )));
    }
    info!("recon: {} on {} {} panel", spec.variant, panel.detectors(), panel.kind);
    let report = reconstruct(&spec, &panel, &cfg.recon_grid()?)?.with_truth(&phantom);
    let metrics = metrics_text(
        spec.variant.name(),
        report.metrics.as_ref().expect("truth attached"),
        report.truncation,
        report.range_term.as_deref(),
    );
    let grid_path = cfg.output.dir.join("recon.tatg");
    let metrics_path = cfg.output.dir.join("metrics.txt");
    io::write_grid(&grid_path, &report.grid)?;
    io::write_text(&metrics_path, &metrics)?;
    info!("recon: wrote {} and {}", grid_path.display(), metrics_path.display());
    Ok(ReconOutput { grid_path, metrics_path, metrics })
}

/// Runs the identity battery into `validate.txt`; failures map to exit 2.
pub fn cmd_validate(cfg: &RunConfig) -> Result<PathBuf, CliError> {
    let vc = cfg.validation();
    info!("validate: dims {:?}, negative controls {}", vc.dims, vc.negative_controls);
    let reports = run_battery(&vc)?;
    let text: Vec<String> = reports.iter().map(|r| r.to_text()).collect();
    let path = cfg.output.dir.join("validate.txt");
    io::write_text(&path, &text.join("\n"))?;
    info!("validate: wrote {}", path.display());
    match failures(&reports) {
        0 => Ok(path),
        k => Err(CliError::ValidationFailed(k)),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub metrics: String,
    pub diff_table: String,
    pub slice_table: String,
}

/// Point whose other coordinates are nearest to `through`, per position along `axis`.
fn slice_indices(grid: &ReconGrid, axis: usize, through: &Point) -> Vec<usize> {
    let off = |p: &Point| (0..grid.dim).filter(|&k| k != axis).map(|k| (p[k] - through[k]).abs()).fold(0.0, f64::max);
    let best = grid.points.iter().map(off).fold(f64::INFINITY, f64::min);
    let mut idx: Vec<usize> = (0..grid.len()).filter(|&i| off(&grid.points[i]) <= best + 1e-12).collect();
    idx.sort_by(|&a, &b| grid.points[a][axis].total_cmp(&grid.points[b][axis]));
    idx
}

/// Differences of `b` against reference `a`, plus a 1-D slice along `axis`.
pub fn compare_grids(a: &ReconGrid, b: &ReconGrid, axis: usize, through: &Point) -> Result<Comparison, CliError> {
    if !a.same_geometry(b) {
        return Err(CliError::Usage("grids have different geometry".into()));
    }
    if axis >= a.dim {
        return Err(CliError::Usage(format!("slice axis {axis} out of range for dimension {}", a.dim)));
    }
    let m = tat_core::recon::error_metrics(&b.values, &a.values);
    let mut metrics = String::new();
    writeln!(metrics, "points\t{}", a.len()).unwrap();
    writeln!(metrics, "l2\t{:.9e}", m.l2).unwrap();
    writeln!(metrics, "linf\t{:.9e}", m.linf).unwrap();
    let relative = m.relative_l2.or(if m.l2 == 0.0 { Some(0.0) } else { None });
    writeln!(metrics, "relative_l2\t{}", metric_value(relative)).unwrap();

    let names = ["x", "y", "z"];
    let mut diff_table = String::new();
    writeln!(diff_table, "# {} a b diff", names[..a.dim].join(" ")).unwrap();
    for (p, (va, vb)) in a.points.iter().zip(a.values.iter().zip(&b.values)) {
        for c in &p[..a.dim] {
            write!(diff_table, "{c:.6} ").unwrap();
        }
        writeln!(diff_table, "{va:.9e} {vb:.9e} {:.9e}", vb - va).unwrap();
    }
    let mut slice_table = String::new();
    writeln!(slice_table, "# {} f_true f_recon", names[axis]).unwrap();
    for i in slice_indices(a, axis, through) {
        writeln!(slice_table, "{:.6} {:.9e} {:.9e}", a.points[i][axis], a.values[i], b.values[i]).unwrap();
    }
    Ok(Comparison { metrics, diff_table, slice_table })
}

/// Reads two grid files, writes `diff.txt` and `slice.txt` into `out`.
pub fn cmd_compare(a: &Path, b: &Path, out: &Path, axis: usize, through: &Point) -> Result<Comparison, CliError> {
    let ga = io::read_grid(a)?;
    let gb = io::read_grid(b)?;
    let c = compare_grids(&ga, &gb, axis, through)?;
    io::write_text(&out.join("diff.txt"), &c.diff_table)?;
    io::write_text(&out.join("slice.txt"), &c.slice_table)?;
    io::write_text(&out.join("compare.txt"), &c.metrics)?;
    info!("compare: wrote diff.txt, slice.txt and compare.txt to {}", out.display());
    Ok(c)
}
