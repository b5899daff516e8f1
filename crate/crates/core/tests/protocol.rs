use bellcat_core::dynamics::{evolve_schrodinger, splitting_time, timescales, DriveSchedule, EvolveOptions};
use bellcat_core::hilbert::{build_hamiltonian, initial_state, HilbertSpace, ModelParams};
use bellcat_core::observables::fidelity;
use bellcat_core::spectra::{bell_cat_target, diagonalize};

fn final_fidelity(n: u32, v0: f64, vf: f64, gamma: f64) -> f64 {
    let sp = HilbertSpace::new(n).unwrap();
    let params = ModelParams::new(v0, 1.0).unwrap();
    let schedule = DriveSchedule::new(v0, vf, gamma).unwrap();
    let psi0 = initial_state(&sp).unwrap();
    let rec = evolve_schrodinger(&psi0, &schedule, &params, &sp, &EvolveOptions::new(0.01, 1_000_000)).unwrap();
    assert!(rec.max_drift() < 1e-8);
    let eig = diagonalize(&build_hamiltonian(&sp, &params.with_v(vf)).unwrap()).unwrap();
    let target = bell_cat_target(&sp, &eig).unwrap();
    fidelity(rec.final_state.pure().unwrap(), &target).unwrap()
}

#[test]
fn slower_ramps_track_the_target_better() {
    let gammas = [4.8e-3, 2.4e-3, 1.2e-3];
    let fids: Vec<f64> = std::thread::scope(|s| {
        let hs: Vec<_> = gammas.iter().map(|&g| s.spawn(move || final_fidelity(100, 1.3, 0.7, g))).collect();
        hs.into_iter().map(|h| h.join().unwrap()).collect()
    });
    assert!(fids.windows(2).all(|w| w[1] >= w[0]), "{fids:?}");
}

#[test]
fn sudden_quench_loses_the_target() {
    assert!(final_fidelity(60, 1.3, 0.7, 1.0) < 0.5);
}

#[test]
fn splitting_time_agrees_with_leading_order_across_sizes() {
    for n in [100u32, 200, 400] {
        let sp = HilbertSpace::new(n).unwrap();
        let s = DriveSchedule::new(1.3, 0.7, 1.2e-3).unwrap();
        let t = splitting_time(&sp, &s, 1.0).unwrap();
        let ts = timescales(n, 1.3, 1.0, 1.2e-3).unwrap();
        assert!(((t - ts.t_bc) / ts.t_bc).abs() < 0.15, "N = {n}: {t} vs {}", ts.t_bc);
        assert!(t > ts.t1);
    }
}
