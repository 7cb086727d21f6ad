//! Fourth-order finite differences on uniform grids, with one-sided
//! fourth-order stencils at both ends so every sample gets a value.

/// First derivative of uniformly spaced samples.
pub fn derivative4(values: &[f64], h: f64) -> Vec<f64> {
    let mut out = vec![0.0; values.len()];
    derivative4_into(values, h, &mut out);
    out
}

pub fn derivative4_into(v: &[f64], h: f64, out: &mut [f64]) {
    let n = v.len();
    assert!(n >= 5, "fourth-order stencil needs at least 5 samples");
    assert_eq!(out.len(), n);
    let c = 1.0 / (12.0 * h);
    out[0] = c * (-25.0 * v[0] + 48.0 * v[1] - 36.0 * v[2] + 16.0 * v[3] - 3.0 * v[4]);
    out[1] = c * (-3.0 * v[0] - 10.0 * v[1] + 18.0 * v[2] - 6.0 * v[3] + v[4]);
    for i in 2..n - 2 {
        out[i] = c * (v[i - 2] - 8.0 * v[i - 1] + 8.0 * v[i + 1] - v[i + 2]);
    }
    let m = n - 1;
    out[m - 1] = -c * (-3.0 * v[m] - 10.0 * v[m - 1] + 18.0 * v[m - 2] - 6.0 * v[m - 3] + v[m - 4]);
    out[m] = -c * (-25.0 * v[m] + 48.0 * v[m - 1] - 36.0 * v[m - 2] + 16.0 * v[m - 3] - 3.0 * v[m - 4]);
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_on_quartics_everywhere() {
        let h = 0.1;
        let xs: Vec<f64> = (0..12).map(|i| i as f64 * h).collect();
        let p = |x: f64| 1.0 - 2.0 * x + 0.5 * x * x + 3.0 * x.powi(3) - x.powi(4);
        let dp = |x: f64| -2.0 + x + 9.0 * x * x - 4.0 * x.powi(3);
        let v: Vec<f64> = xs.iter().map(|&x| p(x)).collect();
        let d = derivative4(&v, h);
        for (x, got) in xs.iter().zip(&d) {
            assert!((got - dp(*x)).abs() < 1e-10, "x={x}");
        }
    }

    #[test]
    fn fourth_order_convergence_on_sine() {
        let err = |n: usize| {
            let h = 1.0 / (n - 1) as f64;
            let v: Vec<f64> = (0..n).map(|i| (3.0 * i as f64 * h).sin()).collect();
            derivative4(&v, h)
                .iter()
                .enumerate()
                .map(|(i, d)| (d - 3.0 * (3.0 * i as f64 * h).cos()).abs())
                .fold(0.0, f64::max)
        };
        let ratio = err(41) / err(81);
        assert!(ratio > 12.0, "ratio {ratio}");
    }
}
