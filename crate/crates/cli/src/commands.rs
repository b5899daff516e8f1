use std::f64::consts::LN_2;
use std::fmt;
use std::fs;
use std::str::FromStr;
use std::time::Instant;

use bellcat_core::bosonic::{
    analytic_bound_state, bosonic_zero_modes, build_jc_hamiltonian, coherent_fock_state, mean_number, BosonSpace,
};
use bellcat_core::dynamics::{
    evolve_lindblad, evolve_schrodinger, predicted_coherence, timescales, DriveSchedule, EvolveOptions,
};
use bellcat_core::hilbert::{build_hamiltonian, initial_state, CsState, DensityMatrix, HilbertSpace, ModelParams};
use bellcat_core::observables::{
    cs_polarization, fidelity, fock_marginal, qubit_entropy, wigner_joint, WignerComponent, WignerGrid,
};
use bellcat_core::spectra::{bell_cat_target, diagonalize, fock_energy_map, zero_modes};
use bellcat_core::topology::{bound_descriptor, bound_state_analytic};
use bellcat_core::Error;
use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::output::{fmt_f64, Artifacts, RunManifest, Table};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CommandKind {
    Spectrum,
    Boundstates,
    Drive,
    Lindblad,
    Bosonic,
}

impl CommandKind {
    pub fn name(self) -> &'static str {
        match self {
            CommandKind::Spectrum => "spectrum",
            CommandKind::Boundstates => "boundstates",
            CommandKind::Drive => "drive",
            CommandKind::Lindblad => "lindblad",
            CommandKind::Bosonic => "bosonic",
        }
    }

    fn run(self, cfg: &RunConfig) -> CliResult<Artifacts> {
        match self {
            CommandKind::Spectrum => cmd_spectrum(cfg),
            CommandKind::Boundstates => cmd_boundstates(cfg),
            CommandKind::Drive => cmd_drive(cfg),
            CommandKind::Lindblad => cmd_lindblad(cfg),
            CommandKind::Bosonic => cmd_bosonic(cfg),
        }
    }
}

impl fmt::Display for CommandKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CommandKind {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        Ok(match s {
            "spectrum" => CommandKind::Spectrum,
            "boundstates" => CommandKind::Boundstates,
            "drive" => CommandKind::Drive,
            "lindblad" => CommandKind::Lindblad,
            "bosonic" => CommandKind::Bosonic,
            other => return Err(CliError::Config(format!("unknown command {other:?}"))),
        })
    }
}

/// Runs one command into `cfg.out_dir`, always leaving a manifest behind
/// once the directory exists.
pub fn execute(kind: CommandKind, cfg: &RunConfig) -> CliResult<RunManifest> {
    fs::create_dir_all(&cfg.out_dir)?;
    let start = Instant::now();
    let result = kind.run(cfg).and_then(|art| {
        let files = art.tables.iter().map(|t| t.write(&cfg.out_dir)).collect::<CliResult<Vec<_>>>()?;
        Ok((art, files))
    });
    let mut manifest = RunManifest {
        command: kind.name().into(),
        tool_version: env!("CARGO_PKG_VERSION").into(),
        config: cfg.clone(),
        wall_clock_seconds: 0.0,
        files: Vec::new(),
        summary: Default::default(),
        timescales: None,
        error: None,
    };
    let outcome = match result {
        Ok((art, files)) => {
            manifest.files = files;
            manifest.summary = art.summary;
            manifest.timescales = art.timescales;
            Ok(())
        }
        Err(e) => {
            manifest.error = Some(e.to_string());
            Err(e)
        }
    };
    manifest.wall_clock_seconds = start.elapsed().as_secs_f64();
    manifest.write(&cfg.out_dir)?;
    outcome.map(|()| manifest)
}

fn params(cfg: &RunConfig, v: f64) -> CliResult<ModelParams> {
    Ok(ModelParams::new(v, cfg.w)?.with_u(cfg.u).with_chiral_breaking(cfg.v_z, cfg.w_z))
}

fn pool(workers: usize) -> CliResult<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| CliError::Config(format!("cannot start {workers} workers: {e}")))
}

fn v_grid(cfg: &RunConfig) -> CliResult<Vec<f64>> {
    if cfg.v_points == 0 {
        return Err(CliError::Config("v_points must be at least 1".into()));
    }
    if cfg.v_points == 1 {
        return Ok(vec![cfg.v_min]);
    }
    let span = cfg.v_max - cfg.v_min;
    Ok((0..cfg.v_points).map(|i| cfg.v_min + span * i as f64 / (cfg.v_points - 1) as f64).collect())
}

pub fn cmd_spectrum(cfg: &RunConfig) -> CliResult<Artifacts> {
    let space = HilbertSpace::new(cfg.n_spins_or(10))?;
    let grid = v_grid(cfg)?;
    let rows: Vec<CliResult<(Vec<f64>, bool)>> = pool(cfg.workers)?.install(|| {
        grid.par_iter()
            .map(|&v| {
                let eig = diagonalize(&build_hamiltonian(&space, &params(cfg, v)?)?)?;
                let protected = zero_modes(&eig).is_ok();
                Ok((eig.eigenvalues().to_vec(), protected))
            })
            .collect()
    });
    let mut header = vec!["v".to_string()];
    header.extend((0..space.total_dim()).map(|k| format!("E_{k}")));
    let mut table = Table::with_header("spectrum.csv", header);
    let mut protected = 0;
    for (v, row) in grid.iter().zip(rows) {
        let (energies, has_pair) = row?;
        protected += usize::from(has_pair);
        let mut r = vec![*v];
        r.extend(energies);
        table.push_floats(&r);
    }
    let mut art = Artifacts::default();
    art.note("grid_points", grid.len() as f64);
    art.note("points_with_zero_modes", protected as f64);
    art.tables.push(table);
    Ok(art)
}

pub fn cmd_boundstates(cfg: &RunConfig) -> CliResult<Artifacts> {
    let space = HilbertSpace::new(cfg.n_spins_or(180))?;
    let p = params(cfg, cfg.v_or(0.7))?;
    if p.is_chiral() && p.v >= p.w {
        return Err(Error::Phase("no zero modes: trivial phase".into()).into());
    }
    let eig = diagonalize(&build_hamiltonian(&space, &p)?)?;
    let pair = zero_modes(&eig)?;
    let mut art = Artifacts::default();
    for (branch, name) in [(CsState::Up, "fock_energy_up.csv"), (CsState::Down, "fock_energy_down.csv")] {
        let map = fock_energy_map(&eig, &space, branch)?;
        let mut t = Table::new(name, &["n", "k", "E", "P"]);
        for (i, n) in space.n_values().enumerate() {
            for (k, e) in eig.eigenvalues().iter().enumerate() {
                t.push(vec![fmt_f64(n), k.to_string(), fmt_f64(*e), fmt_f64(map[(i, k)])]);
            }
        }
        art.tables.push(t);
    }
    let up_a = bound_state_analytic(&space, &p, CsState::Up)?;
    let dn_a = bound_state_analytic(&space, &p, CsState::Down)?;
    let mut t = Table::new(
        "zero_mode_profiles.csv",
        &["n", "P_up_numeric", "P_up_analytic", "P_down_numeric", "P_down_analytic", "P_numeric", "l2_discrepancy"],
    );
    let mut worst: f64 = 0.0;
    for (i, n) in space.n_values().enumerate() {
        let iu = 2 * i + CsState::Up.offset();
        let id = 2 * i + CsState::Down.offset();
        let (u, d) = (pair.up.amplitudes()[iu], pair.down.amplitudes()[id]);
        let pu = u.norm_sqr();
        let pd = d.norm_sqr();
        let pua = up_a.amplitudes()[iu].norm_sqr();
        let pda = dn_a.amplitudes()[id].norm_sqr();
        let combined = 0.5 * (u + d).norm_sqr();
        let disc = ((pu - pua).powi(2) + (pd - pda).powi(2)).sqrt();
        worst = worst.max(disc);
        t.push_floats(&[n, pu, pua, pd, pda, combined, disc]);
    }
    art.tables.push(t);
    let desc = bound_descriptor(&space, &p, CsState::Up)?;
    art.note("n_b", desc.n_b);
    art.note("sigma", desc.sigma);
    art.note("energy_0", pair.energies[0]);
    art.note("energy_1", pair.energies[1]);
    art.note("bulk_gap", pair.bulk_gap);
    art.note("fidelity_up", fidelity(&pair.up, &up_a)?);
    art.note("fidelity_down", fidelity(&pair.down, &dn_a)?);
    art.note("max_l2_discrepancy", worst);
    Ok(art)
}

fn wigner_table(name: &str, space: &HilbertSpace, rho: &DensityMatrix) -> CliResult<(Table, f64)> {
    let w0: WignerGrid = wigner_joint(rho, space, WignerComponent::Zero)?;
    let wx = wigner_joint(rho, space, WignerComponent::X)?;
    let mut t = Table::new(name, &["n", "p", "phi_p", "W0", "Wx", "W0+Wx"]);
    let mut min = f64::INFINITY;
    for (i, n) in w0.n_values.iter().enumerate() {
        for (p, phi) in w0.phases.iter().enumerate() {
            let (a, b) = (w0.values[(i, p)], wx.values[(i, p)]);
            min = min.min(a + b);
            t.push(vec![fmt_f64(*n), p.to_string(), fmt_f64(*phi), fmt_f64(a), fmt_f64(b), fmt_f64(a + b)]);
        }
    }
    Ok((t, min))
}

fn schedule(cfg: &RunConfig) -> CliResult<DriveSchedule> {
    Ok(DriveSchedule::new(cfg.v0, cfg.vf, cfg.gamma)?.with_hold(cfg.hold)?)
}

pub fn cmd_drive(cfg: &RunConfig) -> CliResult<Artifacts> {
    let space = HilbertSpace::new(cfg.n_spins_or(200))?;
    let sched = schedule(cfg)?;
    let p0 = params(cfg, cfg.v0)?;
    let psi0 = initial_state(&space)?;
    let opts = EvolveOptions::new(cfg.step, cfg.sample_every_or(2500)).keep_states();
    let rec = evolve_schrodinger(&psi0, &sched, &p0, &space, &opts)?;
    let fids: Vec<CliResult<f64>> = pool(cfg.workers)?.install(|| {
        rec.drive
            .par_iter()
            .zip(&rec.states)
            .map(|(&v, psi)| {
                let eig = diagonalize(&build_hamiltonian(&space, &params(cfg, v)?)?)?;
                Ok(fidelity(psi, &bell_cat_target(&space, &eig)?)?)
            })
            .collect()
    });
    let fids = fids.into_iter().collect::<CliResult<Vec<f64>>>()?;
    let mut ts = Table::new("protocol_timeseries.csv", &["t", "v", "coherence", "fidelity", "entropy", "norm_drift"]);
    let mut entropy = 0.0;
    for (i, fid) in fids.iter().enumerate() {
        entropy = qubit_entropy(&rec.cs_densities[i])?;
        ts.push_floats(&[rec.times[i], rec.drive[i], rec.coherence[i], *fid, entropy, rec.drift[i]]);
    }
    let final_state = rec.final_state.pure().expect("unitary run");
    let (w_init, _) = wigner_table("wigner_initial.csv", &space, &DensityMatrix::from_pure(&psi0))?;
    let (w_final, min_final) = wigner_table("wigner_final.csv", &space, &DensityMatrix::from_pure(final_state))?;
    let marginal = fock_marginal(final_state)?;
    let mut art = Artifacts::default();
    art.note("final_fidelity", *fids.last().unwrap_or(&f64::NAN));
    art.note("final_coherence", *rec.coherence.last().unwrap_or(&f64::NAN));
    art.note("final_entropy", entropy);
    art.note("final_entropy_over_ln2", entropy / LN_2);
    art.note("min_w0_plus_wx_final", min_final);
    art.note("max_norm_drift", rec.max_drift());
    art.note("step", rec.step);
    let ns: Vec<f64> = space.n_values().collect();
    for (label, keep) in [("left_peak_n", -1.0), ("right_peak_n", 1.0)] {
        let peak = ns
            .iter()
            .zip(&marginal)
            .filter(|(n, _)| **n * keep > 0.0)
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(n, _)| *n);
        if let Some(n) = peak {
            art.note(label, n);
        }
    }
    if cfg.v0 > cfg.w {
        art.timescales = Some(timescales(space.n_spins(), cfg.v0, cfg.w, cfg.gamma)?);
    }
    art.tables.extend([ts, w_init, w_final]);
    Ok(art)
}

pub fn cmd_lindblad(cfg: &RunConfig) -> CliResult<Artifacts> {
    let space = HilbertSpace::new(cfg.n_spins_or(100))?;
    let sched = schedule(cfg)?;
    let times = timescales(space.n_spins(), cfg.v0, cfg.w, cfg.gamma)?;
    let rate = cfg.dephasing.unwrap_or(times.d_c);
    let rho0 = DensityMatrix::from_pure(&initial_state(&space)?);
    let opts = EvolveOptions::new(cfg.step, cfg.sample_every_or(100));
    let rec = evolve_lindblad(&rho0, &sched, &params(cfg, cfg.v0)?, &space, rate, &opts)?;
    let mut t = Table::new("coherence_vs_v.csv", &["v", "t", "sigma_x_simulated", "sigma_x_predicted", "trace_drift"]);
    let mut worst: f64 = 0.0;
    let mut crossing = f64::NAN;
    for i in 0..rec.len() {
        let (time, c) = (rec.times[i], rec.coherence[i]);
        let predicted = predicted_coherence(time, rate);
        if time <= times.t1 {
            worst = worst.max((c - predicted).abs());
        }
        if crossing.is_nan() && c < 0.1 {
            crossing = time;
        }
        t.push_floats(&[rec.drive[i], time, c, predicted, rec.drift[i]]);
    }
    let mut art = Artifacts::default();
    art.note("dephasing", rate);
    art.note("max_trivial_deviation", worst);
    art.note("coherence_below_0.1_at", crossing);
    art.note("max_trace_drift", rec.max_drift());
    art.timescales = Some(times);
    art.tables.push(t);
    Ok(art)
}

pub fn cmd_bosonic(cfg: &RunConfig) -> CliResult<Artifacts> {
    let bs = BosonSpace::new(cfg.n_mode)?;
    let v = cfg.v_or(7.0);
    let modes = bosonic_zero_modes(&bs, v, cfg.w, cfg.epsilon)?;
    let coherent = coherent_fock_state(C64::new(-v / cfg.w, 0.0), &bs)?;
    let numeric = fock_marginal(&modes.physical)?;
    let mut dist = Table::new("bosonic_distribution.csv", &["m_a", "P_bound_state", "P_coherent"]);
    for (m, (pn, pc)) in numeric.iter().zip(coherent.probabilities()).enumerate() {
        dist.push(vec![m.to_string(), fmt_f64(*pn), fmt_f64(pc)]);
    }
    let eig = diagonalize(&build_jc_hamiltonian(&bs, v, cfg.w, cfg.epsilon)?)?;
    let mut window: Vec<usize> = eig.indices_by_magnitude().into_iter().take(20).collect();
    window.sort_unstable();
    let mut spectrum = Table::new("bosonic_spectrum.csv", &["k", "E", "sigma_z", "mean_number"]);
    for k in window {
        let state = eig.eigenvector(k);
        spectrum.push(vec![
            k.to_string(),
            fmt_f64(eig.eigenvalues()[k]),
            fmt_f64(cs_polarization(&state)?),
            fmt_f64(mean_number(&state)?),
        ]);
    }
    let top = numeric.iter().copied().fold(0.0, f64::max);
    let peak = numeric.iter().rposition(|p| *p >= top * (1.0 - 1e-9)).unwrap_or(0);
    let mut art = Artifacts::default();
    art.note("physical_energy", modes.physical_energy);
    art.note("artifact_energy", modes.artifact_energy);
    art.note("physical_mean_number", modes.physical_mean);
    art.note("artifact_mean_number", modes.artifact_mean);
    art.note("physical_sigma_z", cs_polarization(&modes.physical)?);
    art.note("peak_m_a", peak as f64);
    art.note("fidelity_with_coherent", fidelity(&modes.physical, &analytic_bound_state(&bs, v, cfg.w)?)?);
    art.tables.extend([dist, spectrum]);
    Ok(art)
}
