//! Property tests over the tensor machinery and covariance transforms.

use interfere::fock::BeamSplitter;
use interfere::gaussian::{CovarianceState, GaussianParams};
use interfere::tensor::{ExponentSeries, MomentTensor};
use ndarray::array;
use num_complex::Complex64 as C64;
use proptest::prelude::*;

const PI: f64 = std::f64::consts::PI;

fn entries(order: usize) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(-1.0f64..1.0, 4usize.pow(order as u32))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// Symmetrization is idempotent and the symmetry error is always zero
    /// after construction.
    #[test]
    fn tensors_are_symmetric_on_construction(raw in entries(3)) {
        let t = MomentTensor::new(3, 4, raw).unwrap();
        prop_assert!(t.symmetry_error() < 1e-14);
        let again = MomentTensor::new(3, 4, t.entries().to_vec()).unwrap();
        prop_assert_eq!(t.entries(), again.entries());
    }

    /// The beam-splitter transform preserves permutation symmetry at every
    /// order and is inverted by the opposite angle.
    #[test]
    fn transform_symmetry_and_inverse(
        raw2 in entries(2),
        raw3 in entries(3),
        theta in 0.05f64..(PI - 0.05),
    ) {
        let mut h = ExponentSeries::zero(4, 3).unwrap();
        *h.order_mut(2) = MomentTensor::new(2, 4, raw2).unwrap();
        *h.order_mut(3) = MomentTensor::new(3, 4, raw3).unwrap();
        let fwd = h.transform(&BeamSplitter::new(theta)).unwrap();
        for n in 0..=3 {
            prop_assert!(fwd.order(n).symmetry_error() < 1e-13);
        }
        let back = fwd.transform(&BeamSplitter::new(-theta)).unwrap();
        for n in 0..=3 {
            for (a, b) in back.order(n).entries().iter().zip(h.order(n).entries()) {
                prop_assert!((a - b).abs() < 1e-12);
            }
        }
    }

    /// Physical single-mode Gaussians stay physical through the beam
    /// splitter at the covariance level, and the symplectic spectrum is
    /// preserved.
    #[test]
    fn covariance_transform_preserves_physicality(
        tau_a in 0.55f64..1.5,
        tau_b in 0.55f64..1.5,
        mu_frac_a in 0.0f64..0.9,
        mu_frac_b in 0.0f64..0.9,
        phase_a in 0.0f64..(2.0 * PI),
        phase_b in 0.0f64..(2.0 * PI),
        theta in 0.05f64..(PI - 0.05),
    ) {
        let make = |tau: f64, frac: f64, phase: f64| {
            let cap = (tau * tau - 0.25).max(0.0).sqrt() / 2.0;
            GaussianParams::new(C64::from_polar(frac * cap, phase), tau, C64::new(0.0, 0.0))
        };
        let ga = make(tau_a, mu_frac_a, phase_a);
        let gb = make(tau_b, mu_frac_b, phase_b);
        prop_assume!(ga.is_physical() && gb.is_physical());
        let two = CovarianceState::tensor(
            &ga.to_moments().unwrap(),
            &gb.to_moments().unwrap(),
        )
        .unwrap();
        let out = two.bs_transform(&BeamSplitter::new(theta)).unwrap();
        prop_assert!(out.is_physical().unwrap());

        let mut before = two.symplectic_eigenvalues().unwrap();
        let mut after = out.symplectic_eigenvalues().unwrap();
        before.sort_by(|a, b| a.partial_cmp(b).unwrap());
        after.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (x, y) in before.iter().zip(&after) {
            prop_assert!((x - y).abs() < 1e-10);
        }
    }

    /// The quadrature matrix is orthogonal with the t/r block structure for
    /// every angle.
    #[test]
    fn quadrature_matrix_structure(theta in -10.0f64..10.0) {
        let bs = BeamSplitter::new(theta);
        let m = bs.quadrature_matrix();
        let id = m.t().dot(&m);
        let eye = array![
            [1.0, 0.0, 0.0, 0.0],
            [0.0, 1.0, 0.0, 0.0],
            [0.0, 0.0, 1.0, 0.0],
            [0.0, 0.0, 0.0, 1.0],
        ];
        for i in 0..4 {
            for j in 0..4 {
                prop_assert!((id[[i, j]] - eye[[i, j]]).abs() < 1e-12);
            }
        }
        prop_assert!((bs.t().powi(2) + bs.r().powi(2) - 1.0).abs() < 1e-15);
        prop_assert!((m[[0, 0]] - bs.t()).abs() < 1e-15);
        prop_assert!((m[[0, 2]] - bs.r()).abs() < 1e-15);
        prop_assert!((m[[2, 0]] + bs.r()).abs() < 1e-15);
    }
}
