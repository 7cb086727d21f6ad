//! Panel (`TATP`) and grid (`TATG`) files: four magic bytes, one text header
//! line of `key=value` fields, then little-endian `f64` payload.

use std::fmt::Write as _;
use std::path::Path;

use tat_core::forward::{DataPanel, PanelKind};
use tat_core::grids::{make_recon_grid, make_sphere_grid, ReconGrid, TimeGrid};

use crate::CliError;

pub const PANEL_MAGIC: &[u8; 4] = b"TATP";
pub const GRID_MAGIC: &[u8; 4] = b"TATG";

/// Refuse headers longer than this instead of scanning a whole corrupt file.
const MAX_HEADER: usize = 4096;

#[derive(Debug, Clone, PartialEq)]
pub struct FormatError {
    pub offset: usize,
    pub message: String,
}

fn bad(offset: usize, message: impl Into<String>) -> FormatError {
    FormatError { offset, message: message.into() }
}

fn push_payload(out: &mut Vec<u8>, values: &[f64]) {
    out.reserve(values.len() * 8);
    for v in values {
        out.extend_from_slice(&v.to_le_bytes());
    }
}

pub fn encode_panel(panel: &DataPanel) -> Vec<u8> {
    let mut header = String::new();
    writeln!(
        header,
        "kind={} n={} sphere_resolution={} detectors={} time_samples={} t_max={}",
        panel.kind.name(),
        panel.dim(),
        panel.sphere.resolution,
        panel.detectors(),
        panel.time.samples,
        panel.time.t_max
    )
    .unwrap();
    let mut out = PANEL_MAGIC.to_vec();
    out.extend_from_slice(header.as_bytes());
    push_payload(&mut out, &panel.values);
    out
}

pub fn encode_grid(grid: &ReconGrid) -> Vec<u8> {
    let mut header = String::new();
    writeln!(
        header,
        "n={} half_width={} points_per_axis={} margin={} points={}",
        grid.dim,
        grid.half_width,
        grid.points_per_axis,
        grid.margin,
        grid.len()
    )
    .unwrap();
    let mut out = GRID_MAGIC.to_vec();
    out.extend_from_slice(header.as_bytes());
    push_payload(&mut out, &grid.values);
    out
}

/// Parsed header fields with the byte offset of each.
struct Header<'a> {
    fields: Vec<(&'a str, &'a str, usize)>,
    end: usize,
}

impl<'a> Header<'a> {
    fn read(bytes: &'a [u8], magic: &[u8; 4], expected: &[&str]) -> Result<Self, FormatError> {
        if bytes.len() < 4 || &bytes[..4] != magic {
            return Err(bad(0, format!("missing magic {}", String::from_utf8_lossy(magic))));
        }
        let limit = bytes.len().min(4 + MAX_HEADER);
        let nl = bytes[4..limit]
            .iter()
            .position(|&b| b == b'\n')
            .ok_or_else(|| bad(limit, "header is not newline-terminated"))?;
        let text =
            std::str::from_utf8(&bytes[4..4 + nl]).map_err(|e| bad(4 + e.valid_up_to(), "header is not utf-8"))?;
        let mut fields = Vec::new();
        let mut pos = 4;
        for token in text.split(' ') {
            let (k, v) = token.split_once('=').ok_or_else(|| bad(pos, format!("malformed header field {token:?}")))?;
            if !expected.contains(&k) || fields.iter().any(|(f, _, _)| *f == k) {
                return Err(bad(pos, format!("unexpected header field {k:?}")));
            }
            fields.push((k, v, pos));
            pos += token.len() + 1;
        }
        let header = Header { fields, end: 4 + nl + 1 };
        for k in expected {
            header.raw(k)?;
        }
        Ok(header)
    }

    fn raw(&self, key: &str) -> Result<(&'a str, usize), FormatError> {
        self.fields
            .iter()
            .find(|(k, _, _)| *k == key)
            .map(|&(_, v, o)| (v, o))
            .ok_or_else(|| bad(self.end - 1, format!("header lacks {key}")))
    }

    fn get<T: std::str::FromStr>(&self, key: &str) -> Result<(T, usize), FormatError> {
        let (v, o) = self.raw(key)?;
        v.parse().map(|x| (x, o)).map_err(|_| bad(o, format!("bad value {v:?} for {key}")))
    }
}

fn read_payload(bytes: &[u8], start: usize, count: usize) -> Result<Vec<f64>, FormatError> {
    let need = count * 8;
    let have = bytes.len() - start;
    if have < need {
        return Err(bad(bytes.len(), format!("payload truncated: {have} of {need} bytes")));
    }
    if have > need {
        return Err(bad(start + need, format!("{} trailing bytes after payload", have - need)));
    }
    let mut out = Vec::with_capacity(count);
    for (i, chunk) in bytes[start..].chunks_exact(8).enumerate() {
        let v = f64::from_le_bytes(chunk.try_into().unwrap());
        if !v.is_finite() {
            return Err(bad(start + 8 * i, "non-finite sample"));
        }
        out.push(v);
    }
    Ok(out)
}

pub fn decode_panel(bytes: &[u8]) -> Result<DataPanel, FormatError> {
    let h =
        Header::read(bytes, PANEL_MAGIC, &["kind", "n", "sphere_resolution", "detectors", "time_samples", "t_max"])?;
    let (kind, ko) = h.raw("kind")?;
    let kind = PanelKind::from_name(kind).ok_or_else(|| bad(ko, format!("unknown kind {kind:?}")))?;
    let (n, no) = h.get::<usize>("n")?;
    let (res, ro) = h.get::<usize>("sphere_resolution")?;
    let (detectors, d_o) = h.get::<usize>("detectors")?;
    let (samples, so) = h.get::<usize>("time_samples")?;
    let (t_max, to) = h.get::<f64>("t_max")?;
    let sphere = make_sphere_grid(n, res).map_err(|e| bad(if n == 2 || n == 3 { ro } else { no }, e.to_string()))?;
    if sphere.len() != detectors {
        return Err(bad(d_o, format!("detector count {detectors} does not match resolution {res}")));
    }
    let time = TimeGrid::new(t_max, samples).map_err(|e| bad(if samples < 2 { so } else { to }, e.to_string()))?;
    let values = read_payload(bytes, h.end, detectors * samples)?;
    DataPanel::new(sphere, time, kind, values).map_err(|e| bad(h.end, e.to_string()))
}

pub fn decode_grid(bytes: &[u8]) -> Result<ReconGrid, FormatError> {
    let h = Header::read(bytes, GRID_MAGIC, &["n", "half_width", "points_per_axis", "margin", "points"])?;
    let (n, no) = h.get::<usize>("n")?;
    let (half_width, ho) = h.get::<f64>("half_width")?;
    let (ppa, _) = h.get::<usize>("points_per_axis")?;
    let (margin, _) = h.get::<f64>("margin")?;
    let (points, po) = h.get::<usize>("points")?;
    let grid = make_recon_grid(n, half_width, ppa, margin)
        .map_err(|e| bad(if n == 2 || n == 3 { ho } else { no }, e.to_string()))?;
    if grid.len() != points {
        return Err(bad(po, format!("point count {points} does not match the grid geometry ({})", grid.len())));
    }
    let values = read_payload(bytes, h.end, points)?;
    Ok(grid.with_values(values))
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    std::fs::write(path, bytes).map_err(|e| CliError::io(path, e))
}

fn read_bytes(path: &Path) -> Result<Vec<u8>, CliError> {
    std::fs::read(path).map_err(|e| CliError::io(path, e))
}

pub fn write_panel(path: &Path, panel: &DataPanel) -> Result<(), CliError> {
    write_bytes(path, &encode_panel(panel))
}

pub fn read_panel(path: &Path) -> Result<DataPanel, CliError> {
    decode_panel(&read_bytes(path)?).map_err(|e| CliError::format(path, e))
}

pub fn write_grid(path: &Path, grid: &ReconGrid) -> Result<(), CliError> {
    write_bytes(path, &encode_grid(grid))
}

pub fn read_grid(path: &Path) -> Result<ReconGrid, CliError> {
    decode_grid(&read_bytes(path)?).map_err(|e| CliError::format(path, e))
}

pub fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    write_bytes(path, text.as_bytes())
}
