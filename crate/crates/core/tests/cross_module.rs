use std::sync::Arc;

use proptest::prelude::*;
use tf2d_core::coulomb::{coulomb_energy, RadialDensity};
use tf2d_core::energy::{predict_energy, AtomSpec};
use tf2d_core::grid::make_log_grid;
use tf2d_core::hydrogen::{exact_trace, scaled_trace};
use tf2d_core::potential::ShiftedCoulomb;
use tf2d_core::spectral::{neg_eigenvalue_sum, SpectralOptions};
use tf2d_core::tf::{tf_functional, TfOptions};
use tf2d_core::{RadialGridF32, TfSolverF32, TfSolverF64};

#[test]
fn spectral_traces_reproduce_hydrogen() {
    let h = 0.5f64.sqrt();
    for mu in [2.0 / 9.0, 0.08] {
        let r = neg_eigenvalue_sum(&ShiftedCoulomb::new(1.0, mu), h, &SpectralOptions::default()).unwrap();
        let exact = exact_trace(mu).unwrap();
        assert!((r.sum - exact).abs() <= 3.0 * r.error_estimate + 1e-6, "mu = {mu}: {} vs {exact}", r.sum);
    }
}

#[test]
fn scaling_identity_against_spectral_trace() {
    let h = 0.1f64;
    let r = neg_eigenvalue_sum(&ShiftedCoulomb::new(1.0, 1.0), h, &SpectralOptions::default()).unwrap();
    let exact = scaled_trace(h, 1.0, 1.0).unwrap();
    assert!((r.sum - exact).abs() <= 3.0 * r.error_estimate + 1e-6, "{} vs {exact}", r.sum);
}

#[test]
fn doubled_charge_trace() {
    let h = 0.3f64;
    let r = neg_eigenvalue_sum(&ShiftedCoulomb::new(2.0, 1.0), h, &SpectralOptions::default()).unwrap();
    let exact = scaled_trace(h, 2.0, 1.0).unwrap();
    assert!((r.sum - exact).abs() <= 3.0 * r.error_estimate + 1e-6);
}

#[test]
fn energy_prediction_from_solver() {
    let grid = Arc::new(make_log_grid(401, 1e-6, 1e5).unwrap());
    let solver = TfSolverF64::new(grid);
    let e1 = solver.solve(1.0, &TfOptions::default()).unwrap().energy;
    let spec = AtomSpec::new(100.0, 150.0).unwrap();
    // beyond neutrality the TF energy is the neutral one
    let e = solver.solve(spec.lambda(), &TfOptions::default()).unwrap().energy;
    assert_eq!(e, e1);
    let p = predict_energy(&spec, e);
    let want = -0.5 * 1e4 * 100f64.ln() + (e1 + 0.5 * tf2d_core::hydrogen::c_h::<f64>()) * 1e4;
    assert!((p.e_predicted - want).abs() < 1e-9 * want.abs());
}

#[test]
fn single_precision_pipeline() {
    let grid: Arc<RadialGridF32> = Arc::new(make_log_grid(161, 1e-4, 100.0).unwrap());
    let sol = TfSolverF32::new(grid).solve(0.75, &TfOptions::default()).unwrap();
    assert!((sol.mass() - 0.75).abs() < 1e-4);
    assert!(sol.energy < 0.0);
}

fn shell(grid: &Arc<tf2d_core::RadialGridF64>, centre: f64, width: f64, mass: f64) -> RadialDensity<f64> {
    let d = RadialDensity::from_fn(grid.clone(), |r| (-((r - centre) / width).powi(2)).exp()).unwrap();
    let m = d.mass();
    d.scaled(mass / m).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn coulomb_energy_is_positive_definite(
        c1 in 0.2f64..3.0, c2 in 0.2f64..3.0, w in 0.1f64..1.0, a in -1.0f64..1.0,
    ) {
        let grid = Arc::new(make_log_grid(241, 1e-5, 30.0).unwrap());
        let f = shell(&grid, c1, w, 1.0);
        let g = shell(&grid, c2, w, 1.0);
        let dff = coulomb_energy(&f, &f).unwrap();
        let dgg = coulomb_energy(&g, &g).unwrap();
        let dfg = coulomb_energy(&f, &g).unwrap();
        // D(f + a g) ≥ 0 and Cauchy-Schwarz for the Coulomb form
        prop_assert!(dff + 2.0 * a * dfg + a * a * dgg >= -1e-9);
        prop_assert!(dfg * dfg <= dff * dgg * (1.0 + 1e-6));
    }

    #[test]
    fn functional_is_bounded_below(c in 0.1f64..5.0, w in 0.05f64..2.0, m in 0.05f64..1.0) {
        let grid = Arc::new(make_log_grid(241, 1e-6, 50.0).unwrap());
        let rho = shell(&grid, c, w, m);
        prop_assert!(tf_functional(&rho) >= -m - 0.75);
    }
}
