/// Four-point Lagrange stencil on a uniform grid: the interpolated value is
/// `sum(weights[m] * v[start + m])`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CubicStencil {
    pub start: usize,
    pub weights: [f64; 4],
}

impl CubicStencil {
    #[inline]
    pub fn apply(&self, v: &[f64]) -> f64 {
        let s = &v[self.start..self.start + 4];
        self.weights[0] * s[0] + self.weights[1] * s[1] + self.weights[2] * s[2] + self.weights[3] * s[3]
    }
}

/// Cubic interpolation stencil for abscissa `x` on the grid `x_k = k * h`,
/// using only samples with indices in `lo..=hi` (needs `hi - lo >= 3`).
/// The stencil is centred on the cell holding `x` and shifted inward near
/// the window edges.
#[inline]
pub fn cubic_stencil(x: f64, h: f64, lo: usize, hi: usize) -> CubicStencil {
    debug_assert!(hi >= lo + 3);
    let u = x / h;
    let cell = if u <= 0.0 { 0 } else { u.floor() as usize };
    let start = cell.saturating_sub(1).clamp(lo, hi - 3);
    let t = u - start as f64;
    // nodes at t = 0, 1, 2, 3
    let t0 = t;
    let t1 = t - 1.0;
    let t2 = t - 2.0;
    let t3 = t - 3.0;
    let weights = [-t1 * t2 * t3 / 6.0, t0 * t2 * t3 / 2.0, -t0 * t1 * t3 / 2.0, t0 * t1 * t2 / 6.0];
    CubicStencil { start, weights }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproduces_cubics() {
        let h = 0.25;
        let f = |x: f64| 2.0 - x + 0.3 * x * x - 0.7 * x.powi(3);
        let v: Vec<f64> = (0..10).map(|k| f(k as f64 * h)).collect();
        for &x in &[0.0, 0.1, 0.37, 1.0, 1.6, 2.2, 2.25] {
            let st = cubic_stencil(x, h, 0, 9);
            assert!((st.apply(&v) - f(x)).abs() < 1e-12, "x={x}");
        }
    }

    #[test]
    fn hits_nodes_exactly() {
        let h = 0.5;
        let v = [3.0, -1.0, 4.0, 1.0, -5.0, 9.0];
        for (k, &vk) in v.iter().enumerate() {
            let st = cubic_stencil(k as f64 * h, h, 0, 5);
            assert!((st.apply(&v) - vk).abs() < 1e-14);
        }
    }

    #[test]
    fn respects_window() {
        let st = cubic_stencil(0.05, 0.1, 2, 8);
        assert_eq!(st.start, 2);
        let st = cubic_stencil(0.79, 0.1, 2, 8);
        assert_eq!(st.start, 5);
    }
}
