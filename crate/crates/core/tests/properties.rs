use std::f64::consts::PI;

use bellcat_core::hilbert::{
    build_hamiltonian, coherent_spin_state, collective_ops, CsState, DensityMatrix, HilbertSpace, ModelParams,
    StateVector, Subsystem,
};
use bellcat_core::observables::{fidelity, fock_marginal, reduced_cs, wigner_joint, WignerComponent};
use bellcat_core::spectra::{apply_parity, diagonalize, parity_operator};
use bellcat_core::topology::{winding_analytic, winding_numeric};
use nalgebra::DVector;
use num_complex::Complex64 as C64;
use proptest::prelude::*;

fn joint_state(n: u32, seed: &[(f64, f64)]) -> (HilbertSpace, StateVector) {
    let sp = HilbertSpace::new(n).unwrap();
    let dim = sp.total_dim();
    let amps = DVector::from_fn(dim, |k, _| {
        let (a, b) = seed[k % seed.len()];
        C64::new(a + 0.1 * k as f64, b - 0.05 * k as f64)
    });
    (sp, StateVector::normalized(Subsystem::Joint, amps).unwrap())
}

fn amplitudes() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 3..12)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn su2_commutators(n in 1u32..40) {
        let ops = collective_ops(&HilbertSpace::new(n).unwrap());
        let c = ops.s_plus.commutator(&ops.s_minus).unwrap();
        let want = ops.s_z.scaled(C64::new(2.0, 0.0));
        prop_assert!((c.matrix() - want.matrix()).norm() < 1e-10 * (1.0 + n as f64));
        let zx = ops.s_z.commutator(&ops.s_x).unwrap();
        let iy = ops.s_y.scaled(C64::new(0.0, 1.0));
        prop_assert!((zx.matrix() - iy.matrix()).norm() < 1e-10 * (1.0 + n as f64));
    }

    #[test]
    fn coherent_state_mean_spin(n in 1u32..60, theta in 0.0..PI, phi in 0.0..(2.0 * PI)) {
        let sp = HilbertSpace::new(n).unwrap();
        let ops = collective_ops(&sp);
        let psi = coherent_spin_state(&sp, theta, phi).unwrap();
        let s = 0.5 * n as f64;
        let sz = ops.s_z.expectation(&psi).unwrap().re;
        let sx = ops.s_x.expectation(&psi).unwrap().re;
        let sy = ops.s_y.expectation(&psi).unwrap().re;
        prop_assert!((sz - s * theta.cos()).abs() < 1e-9 * (1.0 + s));
        prop_assert!(((sx * sx + sy * sy + sz * sz).sqrt() - s).abs() < 1e-9 * (1.0 + s));
        prop_assert!((sx - s * theta.sin() * phi.cos()).abs() < 1e-9 * (1.0 + s));
    }

    #[test]
    fn wigner_marginal_identity(n in 1u32..14, seed in amplitudes()) {
        let (sp, psi) = joint_state(n, &seed);
        let rho = DensityMatrix::from_pure(&psi);
        let w0 = wigner_joint(&rho, &sp, WignerComponent::Zero).unwrap();
        for (a, b) in w0.marginal().iter().zip(fock_marginal(&psi).unwrap()) {
            prop_assert!((a - b).abs() < 1e-12);
        }
        prop_assert!((w0.total() - 1.0).abs() < 1e-12);
        let red = reduced_cs(&rho).unwrap();
        for (c, want) in [(WignerComponent::X, 2.0 * red.matrix()[(0, 1)].re), (WignerComponent::Z, red.matrix()[(0, 0)].re - red.matrix()[(1, 1)].re)] {
            let w = wigner_joint(&rho, &sp, c).unwrap();
            prop_assert!((w.total() - want).abs() < 1e-12);
        }
    }

    #[test]
    fn fidelity_symmetric_and_bounded(n in 1u32..20, a in amplitudes(), b in amplitudes()) {
        let (_, x) = joint_state(n, &a);
        let (_, y) = joint_state(n, &b);
        let fxy = fidelity(&x, &y).unwrap();
        let fyx = fidelity(&y, &x).unwrap();
        prop_assert!((fxy - fyx).abs() < 1e-14);
        prop_assert!((-1e-15..=1.0 + 1e-12).contains(&fxy));
        let mixed = fidelity(&DensityMatrix::from_pure(&x), &y).unwrap();
        prop_assert!((mixed - fxy).abs() < 1e-12);
    }

    #[test]
    fn parity_involution(n in 1u32..30, seed in amplitudes()) {
        let (sp, psi) = joint_state(n, &seed);
        let twice = apply_parity(&sp, &apply_parity(&sp, &psi).unwrap()).unwrap();
        prop_assert!((twice.amplitudes() - psi.amplitudes()).norm() < 1e-14);
        let k = sp.index(0.5 * n as f64, CsState::Up).unwrap();
        let image = parity_operator(&sp).matrix().column(k).map(|c| c.norm()).iamax();
        prop_assert_eq!(image, sp.index(-0.5 * n as f64, CsState::Down).unwrap());
    }

    #[test]
    fn winding_numeric_matches_analytic(theta in 0.05..(PI - 0.05), ratio in 0.0..2.0f64) {
        prop_assume!((ratio - theta.sin()).abs() > 0.01);
        let params = ModelParams::new(ratio, 1.0).unwrap();
        let numeric = winding_numeric(theta, &params, 256).unwrap();
        prop_assert_eq!(Some(numeric), winding_analytic(theta, &params).unwrap().value());
    }

    #[test]
    fn chiral_spectrum_mirrors(n in 1u32..24, v in 0.0..2.0f64, u in -1.0..1.0f64) {
        let sp = HilbertSpace::new(n).unwrap();
        let params = ModelParams::new(v, 1.0).unwrap().with_u(u);
        let eig = diagonalize(&build_hamiltonian(&sp, &params).unwrap()).unwrap();
        prop_assert!(eig.mirror_mismatch() < 1e-10);
    }
}
