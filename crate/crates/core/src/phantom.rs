//! Analytic initial pressures supported in the closed unit ball.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Result, TatError};
use crate::grids::{check_dim, norm, sub, Point};
use crate::numerics::GaussLegendre;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Primitive {
    /// Indicator of a ball. Discontinuous; used for forward-operator oracles.
    Ball { center: Point, radius: f64, amplitude: f64 },
    /// `amplitude * (1 - |x - c|^2 / radius^2)^4` inside the ball, C^3 across its edge.
    SmoothBump { center: Point, radius: f64, amplitude: f64 },
}

impl Primitive {
    pub fn center(&self) -> Point {
        match *self {
            Primitive::Ball { center, .. } | Primitive::SmoothBump { center, .. } => center,
        }
    }

    pub fn radius(&self) -> f64 {
        match *self {
            Primitive::Ball { radius, .. } | Primitive::SmoothBump { radius, .. } => radius,
        }
    }

    pub fn amplitude(&self) -> f64 {
        match *self {
            Primitive::Ball { amplitude, .. } | Primitive::SmoothBump { amplitude, .. } => amplitude,
        }
    }

    /// Value as a function of the distance `r` to the center.
    #[inline]
    pub fn profile(&self, r: f64) -> f64 {
        match *self {
            Primitive::Ball { radius, amplitude, .. } => {
                if r < radius {
                    amplitude
                } else {
                    0.0
                }
            }
            Primitive::SmoothBump { radius, amplitude, .. } => {
                if r < radius {
                    let q = 1.0 - (r * r) / (radius * radius);
                    let q2 = q * q;
                    amplitude * q2 * q2
                } else {
                    0.0
                }
            }
        }
    }

    #[inline]
    pub fn eval(&self, x: &Point) -> f64 {
        self.profile(norm(&sub(x, &self.center())))
    }

    /// `int_{S^{n-1}} f(y + t w) dsigma(w)` for this component alone.
    ///
    /// The component is radial about its center, so the integral collapses to
    /// one dimension along the polar angle measured from the axis `y -> c`;
    /// `nodes` Gauss–Legendre points are spent on the arc or cap that actually
    /// meets the support.
    fn sphere_integral(&self, dim: usize, y: &Point, t: f64, gl: &GaussLegendre) -> f64 {
        let omega = crate::grids::sphere_measure(dim);
        let rho = self.radius();
        let d = norm(&sub(&self.center(), y));
        if t <= 0.0 {
            return omega * self.profile(d);
        }
        if d <= 1e-14 {
            return omega * self.profile(t);
        }
        if t >= d + rho || t <= d - rho {
            return 0.0;
        }
        let mu0 = (d * d + t * t - rho * rho) / (2.0 * d * t);
        if mu0 >= 1.0 {
            return 0.0;
        }
        let mu_lo = mu0.max(-1.0);
        let dist = |mu: f64| (d * d + t * t - 2.0 * d * t * mu).max(0.0).sqrt();
        match dim {
            2 => {
                let theta0 = mu_lo.acos();
                2.0 * gl.integrate(0.0, theta0, |th| self.profile(dist(th.cos())))
            }
            _ => 2.0 * PI * gl.integrate(mu_lo, 1.0, |mu| self.profile(dist(mu))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Phantom {
    pub dim: usize,
    pub components: Vec<Primitive>,
}

impl Phantom {
    /// Phantom whose every component lies in the closed unit ball.
    pub fn new(dim: usize, components: Vec<Primitive>) -> Result<Self> {
        check_dim(dim)?;
        for (index, c) in components.iter().enumerate() {
            check_component(dim, c)?;
            let extent = norm(&c.center()) + c.radius();
            if extent > 1.0 + 1e-12 {
                return Err(TatError::PhantomOutsideBall { index, extent });
            }
        }
        Ok(Self { dim, components })
    }

    /// Same as [`Phantom::new`] without the support check. Only meant for
    /// experiments with sources outside the detector sphere.
    pub fn new_allow_exterior(dim: usize, components: Vec<Primitive>) -> Result<Self> {
        check_dim(dim)?;
        for c in &components {
            check_component(dim, c)?;
        }
        Ok(Self { dim, components })
    }

    pub fn zero(dim: usize) -> Self {
        Self { dim, components: Vec::new() }
    }

    pub fn is_admissible(&self) -> bool {
        self.components.iter().all(|c| norm(&c.center()) + c.radius() <= 1.0 + 1e-12)
    }

    /// Largest distance from the origin reached by the support.
    pub fn support_radius(&self) -> f64 {
        self.components.iter().map(|c| norm(&c.center()) + c.radius()).fold(0.0, f64::max)
    }

    #[inline]
    pub fn eval(&self, x: &Point) -> f64 {
        self.components.iter().map(|c| c.eval(x)).sum()
    }

    /// Upper bound on `sup |f|`.
    pub fn sup_bound(&self) -> f64 {
        self.components.iter().map(|c| c.amplitude().abs()).sum()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        let components = self
            .components
            .iter()
            .map(|c| match *c {
                Primitive::Ball { center, radius, amplitude } => {
                    Primitive::Ball { center, radius, amplitude: amplitude * factor }
                }
                Primitive::SmoothBump { center, radius, amplitude } => {
                    Primitive::SmoothBump { center, radius, amplitude: amplitude * factor }
                }
            })
            .collect();
        Self { dim: self.dim, components }
    }

    /// `int_{S^{n-1}} f(y + t w) dsigma(w)` using `gl` for each component.
    pub fn sphere_integral(&self, y: &Point, t: f64, gl: &GaussLegendre) -> f64 {
        self.components.iter().map(|c| c.sphere_integral(self.dim, y, t, gl)).sum()
    }

    /// Monte Carlo spherical mean of `f` over the sphere of radius `r` about
    /// `y`. Returns `(estimate, standard_error)`.
    pub fn oracle_spherical_mean(&self, y: &Point, r: f64, mc_samples: usize, seed: u64) -> Result<(f64, f64)> {
        if mc_samples < 100 {
            return Err(TatError::InvalidArgument(format!(
                "Monte Carlo oracle needs at least 100 samples, got {mc_samples}"
            )));
        }
        if !(r > 0.0) {
            return Err(TatError::InvalidArgument(format!("radius must be positive, got {r}")));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        for _ in 0..mc_samples {
            let w: Point = if self.dim == 2 {
                let th = 2.0 * PI * rng.gen::<f64>();
                [th.cos(), th.sin(), 0.0]
            } else {
                let z = 2.0 * rng.gen::<f64>() - 1.0;
                let ph = 2.0 * PI * rng.gen::<f64>();
                let s = (1.0 - z * z).max(0.0).sqrt();
                [s * ph.cos(), s * ph.sin(), z]
            };
            let v = self.eval(&[y[0] + r * w[0], y[1] + r * w[1], y[2] + r * w[2]]);
            sum += v;
            sum_sq += v * v;
        }
        let n = mc_samples as f64;
        let mean = sum / n;
        let var = ((sum_sq - n * mean * mean) / (n - 1.0)).max(0.0);
        Ok((mean, (var / n).sqrt()))
    }
}

fn check_component(dim: usize, c: &Primitive) -> Result<()> {
    if !(c.radius() > 0.0) || !c.amplitude().is_finite() {
        return Err(TatError::InvalidArgument(format!("bad phantom component {c:?}")));
    }
    if dim == 2 && c.center()[2] != 0.0 {
        return Err(TatError::InvalidArgument("two-dimensional phantom with nonzero third coordinate".into()));
    }
    Ok(())
}
