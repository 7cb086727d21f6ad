//! Detector quadrature on the unit sphere, uniform radial grids and the
//! Cartesian evaluation lattice inside the unit ball.

use std::f64::consts::PI;

use crate::error::{Result, TatError};
use crate::numerics::GaussLegendre;

/// Point in R^n stored with three components; for n = 2 the last one is zero.
pub type Point = [f64; 3];

#[inline]
pub fn dot(a: &Point, b: &Point) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub fn sub(a: &Point, b: &Point) -> Point {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

#[inline]
pub fn norm(a: &Point) -> f64 {
    dot(a, a).sqrt()
}

#[inline]
pub fn scale(a: &Point, c: f64) -> Point {
    [a[0] * c, a[1] * c, a[2] * c]
}

pub fn check_dim(dim: usize) -> Result<()> {
    match dim {
        2 | 3 => Ok(()),
        other => Err(TatError::UnsupportedDimension(other)),
    }
}

/// Total measure of the unit sphere S^{n-1}.
pub fn sphere_measure(dim: usize) -> f64 {
    match dim {
        2 => 2.0 * PI,
        3 => 4.0 * PI,
        // generic formula 2 pi^{n/2} / Gamma(n/2) for the few other cases we name
        1 => 2.0,
        4 => 2.0 * PI * PI,
        5 => 8.0 * PI * PI / 3.0,
        _ => f64::NAN,
    }
}

pub const MIN_SPHERE_RESOLUTION: usize = 4;

/// Quadrature on S^{n-1}. Detectors sit at the nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct SphereGrid {
    pub dim: usize,
    pub resolution: usize,
    pub nodes: Vec<Point>,
    pub weights: Vec<f64>,
    /// Highest polynomial degree integrated exactly.
    pub exactness_degree: usize,
}

impl SphereGrid {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate<F: FnMut(&Point) -> f64>(&self, mut f: F) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(y, w)| w * f(y)).sum()
    }

    /// Number of detectors a grid of the given resolution has.
    pub fn detector_count(dim: usize, resolution: usize) -> usize {
        match dim {
            2 => resolution,
            _ => 2 * resolution * resolution,
        }
    }

    /// Inverse of [`SphereGrid::detector_count`].
    pub fn resolution_for_count(dim: usize, count: usize) -> Option<usize> {
        match dim {
            2 => Some(count),
            3 => {
                let r = ((count / 2) as f64).sqrt().round() as usize;
                (2 * r * r == count).then_some(r)
            }
            _ => None,
        }
    }
}

/// n = 2: `resolution` equally spaced angles with equal weights.
/// n = 3: `resolution` Gauss–Legendre nodes in the polar cosine times
/// `2 * resolution` equally spaced azimuths.
pub fn make_sphere_grid(dim: usize, resolution: usize) -> Result<SphereGrid> {
    check_dim(dim)?;
    if resolution < MIN_SPHERE_RESOLUTION {
        return Err(TatError::ResolutionTooLow { got: resolution, min: MIN_SPHERE_RESOLUTION });
    }
    let grid = if dim == 2 {
        let w = 2.0 * PI / resolution as f64;
        let nodes = (0..resolution)
            .map(|j| {
                let th = 2.0 * PI * j as f64 / resolution as f64;
                [th.cos(), th.sin(), 0.0]
            })
            .collect();
        SphereGrid { dim, resolution, nodes, weights: vec![w; resolution], exactness_degree: resolution - 1 }
    } else {
        let gl = GaussLegendre::new(resolution);
        let n_az = 2 * resolution;
        let w_az = 2.0 * PI / n_az as f64;
        let mut nodes = Vec::with_capacity(resolution * n_az);
        let mut weights = Vec::with_capacity(resolution * n_az);
        for (&z, &wz) in gl.nodes.iter().zip(&gl.weights) {
            let rho = (1.0 - z * z).max(0.0).sqrt();
            for k in 0..n_az {
                let phi = w_az * k as f64;
                nodes.push([rho * phi.cos(), rho * phi.sin(), z]);
                weights.push(wz * w_az);
            }
        }
        SphereGrid { dim, resolution, nodes, weights, exactness_degree: 2 * resolution - 1 }
    };
    Ok(grid)
}

/// Uniform samples `t_k = k * t_max / (samples - 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    pub t_max: f64,
    pub samples: usize,
}

impl TimeGrid {
    pub fn new(t_max: f64, samples: usize) -> Result<Self> {
        if !(t_max > 0.0) || !t_max.is_finite() {
            return Err(TatError::InvalidArgument(format!("t_max must be positive, got {t_max}")));
        }
        if samples < 2 {
            return Err(TatError::TooFewSamples { got: samples, min: 2 });
        }
        Ok(Self { t_max, samples })
    }

    /// Grid with spacing `dt` reaching at least `t_max`.
    pub fn with_spacing(dt: f64, t_max: f64) -> Result<Self> {
        let steps = (t_max / dt - 1e-9).ceil().max(1.0) as usize;
        Self::new(steps as f64 * dt, steps + 1)
    }

    #[inline]
    pub fn dt(&self) -> f64 {
        self.t_max / (self.samples - 1) as f64
    }

    #[inline]
    pub fn at(&self, k: usize) -> f64 {
        k as f64 * self.dt()
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.samples).map(|k| self.at(k)).collect()
    }

    /// Index of the last sample not exceeding `t` (clamped to the grid).
    pub fn index_at_or_below(&self, t: f64) -> usize {
        let k = (t / self.dt() + 1e-9).floor();
        if k < 0.0 {
            0
        } else {
            (k as usize).min(self.samples - 1)
        }
    }
}

pub const DEFAULT_MARGIN: f64 = 0.05;

/// Lattice points inside the ball `|x| <= 1 - margin` with reconstructed values.
#[derive(Debug, Clone, PartialEq)]
pub struct ReconGrid {
    pub dim: usize,
    pub half_width: f64,
    pub points_per_axis: usize,
    pub margin: f64,
    pub points: Vec<Point>,
    pub values: Vec<f64>,
}

impl ReconGrid {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn with_values(&self, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), self.points.len());
        Self { values, ..self.clone() }
    }

    /// True when both grids were generated from the same lattice parameters.
    pub fn same_geometry(&self, other: &ReconGrid) -> bool {
        self.dim == other.dim
            && self.points_per_axis == other.points_per_axis
            && self.half_width == other.half_width
            && self.margin == other.margin
            && self.points.len() == other.points.len()
    }
}

fn axis_coordinate(i: usize, points_per_axis: usize, half_width: f64) -> f64 {
    if points_per_axis == 1 {
        0.0
    } else {
        -half_width + 2.0 * half_width * i as f64 / (points_per_axis - 1) as f64
    }
}

pub fn make_recon_grid(dim: usize, half_width: f64, points_per_axis: usize, margin: f64) -> Result<ReconGrid> {
    check_dim(dim)?;
    if !(0.0..=1.0).contains(&half_width) {
        return Err(TatError::InvalidArgument(format!("half_width must lie in [0, 1], got {half_width}")));
    }
    if !(margin >= 0.0) {
        return Err(TatError::InvalidArgument(format!("margin must be >= 0, got {margin}")));
    }
    if points_per_axis == 0 {
        return Err(TatError::EmptyGrid);
    }
    let limit = 1.0 - margin;
    let m = points_per_axis;
    let coord = |i| axis_coordinate(i, m, half_width);
    let mut points = Vec::new();
    let mut keep = |p: Point| {
        let r = norm(&p);
        if r <= limit + 1e-12 && r < 1.0 {
            points.push(p);
        }
    };
    if dim == 2 {
        for i in 0..m {
            for j in 0..m {
                keep([coord(i), coord(j), 0.0]);
            }
        }
    } else {
        for i in 0..m {
            for j in 0..m {
                for k in 0..m {
                    keep([coord(i), coord(j), coord(k)]);
                }
            }
        }
    }
    if points.is_empty() {
        return Err(TatError::EmptyGrid);
    }
    let values = vec![0.0; points.len()];
    Ok(ReconGrid { dim, half_width, points_per_axis, margin, points, values })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn circle_grid_of_four() {
        let g = make_sphere_grid(2, 4).unwrap();
        let expect = [[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]];
        for (node, e) in g.nodes.iter().zip(expect) {
            assert!((node[0] - e[0]).abs() < 1e-15 && (node[1] - e[1]).abs() < 1e-15);
        }
        for w in &g.weights {
            assert!((w - PI / 2.0).abs() < 1e-15);
        }
        let total: f64 = g.weights.iter().sum();
        assert!((total - 2.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn sphere_area_and_unit_nodes() {
        for res in [4, 7, 16, 33] {
            let g = make_sphere_grid(3, res).unwrap();
            let total: f64 = g.weights.iter().sum();
            assert!((total - 4.0 * PI).abs() < 1e-10);
            for y in &g.nodes {
                assert!((norm(y) - 1.0).abs() < 1e-12);
            }
            assert!(g.weights.iter().all(|&w| w > 0.0));
            assert_eq!(g.len(), SphereGrid::detector_count(3, res));
            assert_eq!(SphereGrid::resolution_for_count(3, g.len()), Some(res));
        }
    }

    #[test]
    fn z_squared_moment() {
        let g = make_sphere_grid(3, 16).unwrap();
        let m = g.integrate(|y| y[2] * y[2]);
        assert!((m - 4.0 * PI / 3.0).abs() < 1e-9);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert_eq!(make_sphere_grid(4, 16), Err(TatError::UnsupportedDimension(4)));
        assert!(matches!(make_sphere_grid(3, 3), Err(TatError::ResolutionTooLow { .. })));
        assert!(make_recon_grid(2, 1.5, 3, 0.0).is_err());
        assert!(make_recon_grid(2, 0.5, 3, -0.1).is_err());
        assert_eq!(make_recon_grid(2, 0.5, 0, 0.0), Err(TatError::EmptyGrid));
        assert_eq!(make_recon_grid(2, 0.0, 1, 1.5), Err(TatError::EmptyGrid));
    }

    #[test]
    fn recon_grid_filters_corners() {
        let g = make_recon_grid(2, 0.9, 3, 0.05).unwrap();
        // 9 candidates; the four corners at |x| = 0.9 * sqrt(2) are dropped
        assert_eq!(g.len(), 5);
        assert!(g.points.iter().all(|p| norm(p) <= 0.95 + 1e-12));

        let origin = make_recon_grid(2, 0.0, 1, 0.0).unwrap();
        assert_eq!(origin.points, vec![[0.0, 0.0, 0.0]]);

        let g3 = make_recon_grid(3, 0.8, 5, 0.05).unwrap();
        assert!(g3.points.iter().all(|p| norm(p) <= 0.95 + 1e-12));
        assert!(g3.len() < 125);
    }

    #[test]
    fn time_grid_spacing() {
        let t = TimeGrid::new(2.0, 5).unwrap();
        assert_eq!(t.values(), vec![0.0, 0.5, 1.0, 1.5, 2.0]);
        let t = TimeGrid::with_spacing(0.01, 3.0).unwrap();
        assert_eq!(t.samples, 301);
        assert!((t.dt() - 0.01).abs() < 1e-15);
    }
}
