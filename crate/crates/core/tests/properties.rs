use proptest::prelude::*;
use tat_core::forward::{mean_ms, DataPanel, PanelKind};
use tat_core::grids::{make_recon_grid, make_sphere_grid, norm, sphere_measure, TimeGrid};
use tat_core::phantom::{Phantom, Primitive};
use tat_core::recon::{reconstruct, FormulaSpec, Variant};
use tat_core::specfun::{green, LambdaRule};
use tat_core::xform::{apply_w, DecayClass, RadialProfile};
use tat_core::TatError;

fn bump(center: [f64; 3], radius: f64, amplitude: f64) -> Primitive {
    Primitive::SmoothBump { center, radius, amplitude }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn sphere_weights_positive_and_total(dim in 2usize..=3, res in 4usize..40) {
        let g = make_sphere_grid(dim, res).unwrap();
        prop_assert!(g.weights.iter().all(|&w| w > 0.0));
        let total: f64 = g.weights.iter().sum();
        prop_assert!((total - sphere_measure(dim)).abs() < 1e-12);
        prop_assert!(g.nodes.iter().all(|y| (norm(y) - 1.0).abs() < 1e-13));
    }

    #[test]
    fn green_conjugate_symmetry(n in 2usize..=3, s in 0.01f64..3.0, l in 0.01f64..50.0) {
        let a = green(n, s, l).unwrap();
        let b = green(n, s, -l).unwrap();
        prop_assert!((a.conj() - b).norm() <= 1e-14 * a.norm().max(1.0));
    }

    #[test]
    fn lambda_rule_weights(n in 2usize..=3, lmax in 1.0f64..300.0, steps in 1usize..200) {
        let r = LambdaRule::new(n, lmax, steps).unwrap();
        prop_assert!(r.weights.iter().all(|&w| w > 0.0));
        let total: f64 = r.weights.iter().sum();
        prop_assert!((total - lmax).abs() < 1e-10 * lmax);
        prop_assert!(r.nodes.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn time_grid_index_inverse(t_max in 0.5f64..10.0, samples in 2usize..2000, frac in 0.0f64..1.0) {
        let g = TimeGrid::new(t_max, samples).unwrap();
        let k = ((samples - 1) as f64 * frac) as usize;
        prop_assert_eq!(g.index_at_or_below(g.at(k)), k);
    }

    #[test]
    fn recon_grid_respects_margin(dim in 2usize..=3, hw in 0.1f64..1.0, m in 2usize..12, margin in 0.0f64..0.5) {
        match make_recon_grid(dim, hw, m, margin) {
            Ok(g) => prop_assert!(g.points.iter().all(|p| norm(p) <= 1.0 - margin + 1e-12)),
            Err(e) => prop_assert_eq!(e, TatError::EmptyGrid),
        }
    }

    #[test]
    fn phantom_is_linear(a in -3.0f64..3.0, x in -0.7f64..0.7, y in -0.7f64..0.7) {
        let f = Phantom::new(3, vec![bump([0.1, 0.0, 0.0], 0.5, 1.3)]).unwrap();
        let p = [x, y, 0.1];
        prop_assert!((f.scaled(a).eval(&p) - a * f.eval(&p)).abs() < 1e-14);
    }

    #[test]
    fn w_is_linear(a in -2.0f64..2.0, b in -2.0f64..2.0, n in 2usize..=3) {
        let grid = TimeGrid::new(2.0, 65).unwrap();
        let decay = DecayClass::CompactSupport(2.0);
        let u = RadialProfile::from_fn(grid, decay, |t| (-(t - 0.8).powi(2) * 9.0).exp() * t);
        let v = RadialProfile::from_fn(grid, decay, |t| (2.0 - t).max(0.0).powi(4) * t * t);
        let mix = RadialProfile::from_fn(grid, decay, |t| {
            a * (-(t - 0.8).powi(2) * 9.0).exp() * t + b * (2.0 - t).max(0.0).powi(4) * t * t
        });
        let (wu, wv, wm) = (apply_w(&u, n).unwrap(), apply_w(&v, n).unwrap(), apply_w(&mix, n).unwrap());
        let scale = wm.max_abs().max(1.0);
        for k in wm.valid.clone() {
            prop_assert!((wm.values[k] - a * wu.values[k] - b * wv.values[k]).abs() < 1e-11 * scale);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn spherical_means_are_linear(a in -2.0f64..2.0, cx in -0.3f64..0.3) {
        let f = Phantom::new(2, vec![bump([cx, 0.1, 0.0], 0.4, 1.0)]).unwrap();
        let sphere = make_sphere_grid(2, 8).unwrap();
        let time = TimeGrid::new(2.0, 33).unwrap();
        let m = mean_ms(&f, &sphere, &time, 16).unwrap();
        let ma = mean_ms(&f.scaled(a), &sphere, &time, 16).unwrap();
        for (x, y) in m.values.iter().zip(&ma.values) {
            prop_assert!((a * x - y).abs() < 1e-13);
        }
    }

    #[test]
    fn variant_kind_compatibility(vi in 0usize..8, ki in 0usize..5) {
        let variant = Variant::ALL[vi];
        let kind = PanelKind::ALL[ki];
        let sphere = make_sphere_grid(2, 8).unwrap();
        let time = TimeGrid::new(2.0, 129).unwrap();
        let panel = DataPanel::zeros(sphere, time, kind);
        let grid = make_recon_grid(2, 0.5, 3, 0.05).unwrap();
        let r = reconstruct(&FormulaSpec::new(variant, 2), &panel, &grid);
        if variant.data_kinds().contains(&kind) {
            prop_assert!(r.unwrap().values().iter().all(|&v| v == 0.0));
        } else {
            prop_assert!(
                matches!(r, Err(TatError::KindMismatch { .. })),
                "expected a kind mismatch"
            );
        }
    }
}
