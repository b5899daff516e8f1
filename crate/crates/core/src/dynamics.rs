//! Driven evolution under v(t) = v₀ − γt: fixed-step RK4 for the Schrödinger
//! equation and for the σz-dephasing master equation, plus the closed-form
//! timescales and the dephased central-spin prediction.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::hilbert::{
    build_hamiltonian, cs_operator, CsState, DensityMatrix, HilbertSpace, ModelParams, Operator, Pauli, StateVector,
    Subsystem, ZERO,
};
use crate::topology::bound_descriptor;

/// Linear ramp from v0 down to vf at rate gamma, optionally followed by a
/// hold at vf.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DriveSchedule {
    pub v0: f64,
    pub vf: f64,
    pub gamma: f64,
    #[serde(default)]
    pub hold: f64,
}

impl DriveSchedule {
    pub fn new(v0: f64, vf: f64, gamma: f64) -> Result<Self> {
        let s = DriveSchedule { v0, vf, gamma, hold: 0.0 };
        s.validate()?;
        Ok(s)
    }

    /// Constant v for the given duration.
    pub fn hold_at(v: f64, duration: f64) -> Result<Self> {
        if !v.is_finite() || !(duration >= 0.0) || !duration.is_finite() {
            return Err(invalid("constant drive needs finite v and duration ≥ 0"));
        }
        Ok(DriveSchedule { v0: v, vf: v, gamma: 1.0, hold: duration })
    }

    pub fn with_hold(mut self, hold: f64) -> Result<Self> {
        self.hold = hold;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if ![self.v0, self.vf, self.gamma, self.hold].iter().all(|x| x.is_finite()) {
            return Err(invalid("drive schedule values must be finite"));
        }
        if !(self.gamma > 0.0) {
            return Err(invalid(format!("ramp rate γ = {} must be positive", self.gamma)));
        }
        if !(self.hold >= 0.0) {
            return Err(invalid(format!("hold time {} must be non-negative", self.hold)));
        }
        if self.v0 < self.vf || (self.v0 == self.vf && self.hold == 0.0) {
            return Err(invalid(format!("ramp must go down: v0 = {} ≤ vf = {}", self.v0, self.vf)));
        }
        Ok(())
    }

    /// T = (v0 − vf)/γ.
    pub fn ramp_duration(&self) -> f64 {
        (self.v0 - self.vf) / self.gamma
    }

    pub fn duration(&self) -> f64 {
        self.ramp_duration() + self.hold
    }

    pub fn v_at(&self, t: f64) -> f64 {
        (self.v0 - self.gamma * t).max(self.vf)
    }

    /// Ramp time at which v(t) = v.
    pub fn time_at(&self, v: f64) -> f64 {
        (self.v0 - v) / self.gamma
    }
}

/// H(t) = H_fixed + v(t)·H_drive stored as row-wise nonzero lists.
#[derive(Clone, Debug)]
pub struct DrivenHamiltonian {
    subsystem: Subsystem,
    fixed: Vec<Vec<(usize, C64)>>,
    drive: Vec<Vec<(usize, C64)>>,
    fixed_radius: f64,
    drive_radius: f64,
}

fn sparse_rows(m: &DMatrix<C64>) -> Vec<Vec<(usize, C64)>> {
    (0..m.nrows()).map(|i| (0..m.ncols()).filter(|&k| m[(i, k)] != ZERO).map(|k| (k, m[(i, k)])).collect()).collect()
}

fn row_radius(rows: &[Vec<(usize, C64)>]) -> f64 {
    rows.iter().map(|r| r.iter().map(|(_, h)| h.norm()).sum::<f64>()).fold(0.0, f64::max)
}

impl DrivenHamiltonian {
    pub fn new(fixed: &Operator, drive: &Operator) -> Result<Self> {
        if fixed.dim() != drive.dim() || fixed.subsystem() != drive.subsystem() {
            return Err(invalid("fixed and drive parts act on different spaces"));
        }
        for op in [fixed, drive] {
            if !op.is_hermitian(1e-12) {
                return Err(invalid("Hamiltonian parts must be Hermitian"));
            }
        }
        let fixed_rows = sparse_rows(fixed.matrix());
        let drive_rows = sparse_rows(drive.matrix());
        Ok(DrivenHamiltonian {
            subsystem: fixed.subsystem(),
            fixed_radius: row_radius(&fixed_rows),
            drive_radius: row_radius(&drive_rows),
            fixed: fixed_rows,
            drive: drive_rows,
        })
    }

    /// The model Hamiltonian with v replaced by the drive coefficient of σx.
    pub fn from_model(space: &HilbertSpace, params: &ModelParams) -> Result<Self> {
        let fixed = build_hamiltonian(space, &params.with_v(0.0))?;
        Self::new(&fixed, &cs_operator(space, Pauli::X))
    }

    pub fn dim(&self) -> usize {
        self.fixed.len()
    }

    pub fn subsystem(&self) -> Subsystem {
        self.subsystem
    }

    /// Gershgorin bound on max|E| over every v with |v| ≤ v_max.
    pub fn spectral_radius_bound(&self, v_max: f64) -> f64 {
        self.fixed_radius + v_max.abs() * self.drive_radius
    }

    /// out = H(v)·x.
    fn apply(&self, v: f64, x: &[C64], out: &mut [C64]) {
        for (i, o) in out.iter_mut().enumerate() {
            let mut acc = ZERO;
            for &(k, h) in &self.fixed[i] {
                acc += h * x[k];
            }
            let mut d = ZERO;
            for &(k, h) in &self.drive[i] {
                d += h * x[k];
            }
            *o = acc + d * v;
        }
    }

    /// out = H(v)·ρ for a row-major n×n ρ.
    fn apply_left(&self, v: f64, rho: &[C64], out: &mut [C64]) {
        let n = self.dim();
        out.fill(ZERO);
        for i in 0..n {
            let row = &mut out[i * n..(i + 1) * n];
            for &(k, h) in &self.fixed[i] {
                axpy(row, h, &rho[k * n..(k + 1) * n]);
            }
            for &(k, h) in &self.drive[i] {
                axpy(row, h * v, &rho[k * n..(k + 1) * n]);
            }
        }
    }
}

fn axpy(y: &mut [C64], a: C64, x: &[C64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

/// Integration controls.
#[derive(Clone, Debug)]
pub struct EvolveOptions {
    /// Requested step; the effective step divides the duration exactly.
    pub step: f64,
    /// Record observables every this many steps (and always at the end).
    pub sample_every: usize,
    /// Keep the full state at every sample (pure evolution only).
    pub keep_states: bool,
    /// Fidelity at each sample is measured against this state.
    pub reference: Option<StateVector>,
}

impl EvolveOptions {
    pub fn new(step: f64, sample_every: usize) -> Self {
        EvolveOptions { step, sample_every, keep_states: false, reference: None }
    }

    pub fn keep_states(mut self) -> Self {
        self.keep_states = true;
        self
    }

    pub fn with_reference(mut self, reference: StateVector) -> Self {
        self.reference = Some(reference);
        self
    }
}

/// Largest step × spectral-radius product accepted.
pub const STEP_GUARD: f64 = 0.1;
/// Norm or trace drift that aborts a run.
pub const DRIFT_LIMIT: f64 = 1e-6;

/// State at the end of a run.
#[derive(Clone, Debug)]
pub enum FinalState {
    Pure(StateVector),
    Mixed(DensityMatrix),
}

impl FinalState {
    pub fn density(&self) -> DensityMatrix {
        match self {
            FinalState::Pure(psi) => DensityMatrix::from_pure(psi),
            FinalState::Mixed(rho) => rho.clone(),
        }
    }

    pub fn pure(&self) -> Option<&StateVector> {
        match self {
            FinalState::Pure(psi) => Some(psi),
            FinalState::Mixed(_) => None,
        }
    }
}

/// Observables sampled along a run; sample 0 is the initial state.
#[derive(Clone, Debug)]
pub struct EvolutionRecord {
    pub times: Vec<f64>,
    pub drive: Vec<f64>,
    /// ⟨σx⟩ of the central spin.
    pub coherence: Vec<f64>,
    /// |‖ψ‖ − 1| or |Tr ρ − 1|.
    pub drift: Vec<f64>,
    /// Fidelity with the options' reference state, when given.
    pub fidelity: Vec<f64>,
    pub fock_marginals: Vec<Vec<f64>>,
    pub cs_densities: Vec<DensityMatrix>,
    pub states: Vec<StateVector>,
    pub step: f64,
    pub final_state: FinalState,
}

impl EvolutionRecord {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn max_drift(&self) -> f64 {
        self.drift.iter().copied().fold(0.0, f64::max)
    }
}

struct Plan {
    steps: usize,
    step: f64,
}

fn plan(h: &DrivenHamiltonian, schedule: &DriveSchedule, opts: &EvolveOptions, extra_rate: f64) -> Result<Plan> {
    schedule.validate()?;
    if !(opts.step > 0.0) || !opts.step.is_finite() {
        return Err(invalid(format!("step {} must be positive", opts.step)));
    }
    if opts.sample_every == 0 {
        return Err(invalid("sample_every must be at least 1"));
    }
    if let Some(r) = &opts.reference {
        if r.dim() != h.dim() {
            return Err(invalid("reference state has the wrong dimension"));
        }
    }
    let duration = schedule.duration();
    let steps = ((duration / opts.step).round() as usize).max(1);
    let step = duration / steps as f64;
    let radius = h.spectral_radius_bound(schedule.v0.abs().max(schedule.vf.abs())) + extra_rate;
    if step * radius >= STEP_GUARD {
        return Err(Error::StepSize(format!(
            "step {step} × spectral radius bound {radius} = {} exceeds {STEP_GUARD}",
            step * radius
        )));
    }
    Ok(Plan { steps, step })
}

fn cs_sign(k: usize) -> f64 {
    if k.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

fn drift_error(kind: &str, drift: f64, t: f64, step: f64) -> Error {
    Error::StepSize(format!("{kind} drift {drift:e} at t = {t} with step {step}; reduce the step"))
}

fn pure_cs_block(psi: &[C64]) -> DMatrix<C64> {
    let mut out = DMatrix::from_element(2, 2, ZERO);
    for c in psi.chunks(2) {
        for r in 0..2 {
            for s in 0..2 {
                out[(r, s)] += c[r] * c[s].conj();
            }
        }
    }
    out
}

/// Integrates i dψ/dt = H(t)ψ with classical RK4.
pub fn evolve_schrodinger_with(
    h: &DrivenHamiltonian,
    psi0: &StateVector,
    schedule: &DriveSchedule,
    opts: &EvolveOptions,
) -> Result<EvolutionRecord> {
    if psi0.dim() != h.dim() || psi0.subsystem() != h.subsystem() {
        return Err(invalid("initial state does not live in the Hamiltonian's space"));
    }
    let Plan { steps, step } = plan(h, schedule, opts, 0.0)?;
    let n = h.dim();
    let joint = matches!(h.subsystem(), Subsystem::Joint | Subsystem::ModeJoint);
    let mut psi: Vec<C64> = psi0.amplitudes().iter().copied().collect();
    let mut rec = EvolutionRecord {
        times: Vec::new(),
        drive: Vec::new(),
        coherence: Vec::new(),
        drift: Vec::new(),
        fidelity: Vec::new(),
        fock_marginals: Vec::new(),
        cs_densities: Vec::new(),
        states: Vec::new(),
        step,
        final_state: FinalState::Pure(psi0.clone()),
    };
    let sample = |rec: &mut EvolutionRecord, t: f64, psi: &[C64]| -> Result<()> {
        let norm = psi.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        let drift = (norm - 1.0).abs();
        if drift > DRIFT_LIMIT {
            return Err(drift_error("norm", drift, t, step));
        }
        let state = StateVector::from_raw(h.subsystem(), DVector::from_column_slice(psi));
        rec.times.push(t);
        rec.drive.push(schedule.v_at(t));
        rec.drift.push(drift);
        if joint {
            let block = pure_cs_block(psi);
            rec.coherence.push(2.0 * block[(0, 1)].re);
            rec.cs_densities.push(DensityMatrix::from_raw(Subsystem::CentralSpin, block));
            rec.fock_marginals.push(psi.chunks(2).map(|c| c[0].norm_sqr() + c[1].norm_sqr()).collect());
        }
        if let Some(r) = &opts.reference {
            rec.fidelity.push(state.inner(r)?.norm_sqr());
        }
        if opts.keep_states {
            rec.states.push(state);
        }
        Ok(())
    };
    sample(&mut rec, 0.0, &psi)?;
    let mi = C64::new(0.0, -1.0);
    let (mut k1, mut k2, mut k3, mut k4, mut tmp) =
        (vec![ZERO; n], vec![ZERO; n], vec![ZERO; n], vec![ZERO; n], vec![ZERO; n]);
    for s in 1..=steps {
        let t = (s - 1) as f64 * step;
        let (va, vm, vb) = (schedule.v_at(t), schedule.v_at(t + 0.5 * step), schedule.v_at(t + step));
        h.apply(va, &psi, &mut k1);
        k1.iter_mut().for_each(|x| *x *= mi);
        combine(&mut tmp, &psi, 0.5 * step, &k1);
        h.apply(vm, &tmp, &mut k2);
        k2.iter_mut().for_each(|x| *x *= mi);
        combine(&mut tmp, &psi, 0.5 * step, &k2);
        h.apply(vm, &tmp, &mut k3);
        k3.iter_mut().for_each(|x| *x *= mi);
        combine(&mut tmp, &psi, step, &k3);
        h.apply(vb, &tmp, &mut k4);
        k4.iter_mut().for_each(|x| *x *= mi);
        rk4_update(&mut psi, step, &k1, &k2, &k3, &k4);
        if s % opts.sample_every == 0 || s == steps {
            sample(&mut rec, s as f64 * step, &psi)?;
        }
    }
    rec.final_state = FinalState::Pure(StateVector::from_raw(h.subsystem(), DVector::from_vec(psi)));
    Ok(rec)
}

fn combine(out: &mut [C64], base: &[C64], a: f64, k: &[C64]) {
    for ((o, b), x) in out.iter_mut().zip(base).zip(k) {
        *o = b + x * a;
    }
}

fn rk4_update(y: &mut [C64], h: f64, k1: &[C64], k2: &[C64], k3: &[C64], k4: &[C64]) {
    let h6 = h / 6.0;
    for i in 0..y.len() {
        y[i] += (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * h6;
    }
}

/// Schrödinger evolution of the model under the drive schedule.
pub fn evolve_schrodinger(
    psi0: &StateVector,
    schedule: &DriveSchedule,
    params: &ModelParams,
    space: &HilbertSpace,
    opts: &EvolveOptions,
) -> Result<EvolutionRecord> {
    let h = DrivenHamiltonian::from_model(space, params)?;
    evolve_schrodinger_with(&h, psi0, schedule, opts)
}

/// Integrates dρ/dt = i[ρ, H] + D(σz ρ σz − ρ) with classical RK4,
/// symmetrizing ρ after every step.
pub fn evolve_lindblad_with(
    h: &DrivenHamiltonian,
    rho0: &DensityMatrix,
    schedule: &DriveSchedule,
    rate: f64,
    opts: &EvolveOptions,
) -> Result<EvolutionRecord> {
    if rho0.dim() != h.dim() || rho0.subsystem() != h.subsystem() {
        return Err(invalid("initial density matrix does not live in the Hamiltonian's space"));
    }
    if !(rate >= 0.0) || !rate.is_finite() {
        return Err(invalid(format!("dephasing rate {rate} must be non-negative")));
    }
    rho0.validate()?;
    let Plan { steps, step } = plan(h, schedule, opts, 2.0 * rate)?;
    let n = h.dim();
    let joint = matches!(h.subsystem(), Subsystem::Joint | Subsystem::ModeJoint);
    let decay: Vec<f64> = (0..n * n).map(|ij| rate * (cs_sign(ij / n) * cs_sign(ij % n) - 1.0)).collect();
    let m0 = rho0.matrix();
    let mut rho: Vec<C64> = (0..n * n).map(|ij| m0[(ij / n, ij % n)]).collect();
    let mut rec = EvolutionRecord {
        times: Vec::new(),
        drive: Vec::new(),
        coherence: Vec::new(),
        drift: Vec::new(),
        fidelity: Vec::new(),
        fock_marginals: Vec::new(),
        cs_densities: Vec::new(),
        states: Vec::new(),
        step,
        final_state: FinalState::Mixed(rho0.clone()),
    };
    let sample = |rec: &mut EvolutionRecord, t: f64, rho: &[C64]| -> Result<()> {
        let trace: f64 = (0..n).map(|i| rho[i * n + i].re).sum();
        let drift = (trace - 1.0).abs();
        if drift > DRIFT_LIMIT {
            return Err(drift_error("trace", drift, t, step));
        }
        rec.times.push(t);
        rec.drive.push(schedule.v_at(t));
        rec.drift.push(drift);
        if joint {
            let mut block = DMatrix::from_element(2, 2, ZERO);
            for i in 0..n / 2 {
                for r in 0..2 {
                    for c in 0..2 {
                        block[(r, c)] += rho[(2 * i + r) * n + 2 * i + c];
                    }
                }
            }
            rec.coherence.push(2.0 * block[(0, 1)].re);
            rec.cs_densities.push(DensityMatrix::from_raw(Subsystem::CentralSpin, block));
            rec.fock_marginals
                .push((0..n / 2).map(|i| rho[2 * i * n + 2 * i].re + rho[(2 * i + 1) * n + 2 * i + 1].re).collect());
        }
        if let Some(r) = &opts.reference {
            let a = r.amplitudes();
            let mut acc = ZERO;
            for i in 0..n {
                let mut row = ZERO;
                for j in 0..n {
                    row += rho[i * n + j] * a[j];
                }
                acc += a[i].conj() * row;
            }
            rec.fidelity.push(acc.re);
        }
        Ok(())
    };
    sample(&mut rec, 0.0, &rho)?;
    let nn = n * n;
    let (mut k1, mut k2, mut k3, mut k4, mut tmp, mut scratch) =
        (vec![ZERO; nn], vec![ZERO; nn], vec![ZERO; nn], vec![ZERO; nn], vec![ZERO; nn], vec![ZERO; nn]);
    let deriv = |v: f64, rho: &[C64], out: &mut [C64], scratch: &mut [C64]| {
        h.apply_left(v, rho, scratch);
        let mi = C64::new(0.0, -1.0);
        for i in 0..n {
            for j in 0..n {
                let ij = i * n + j;
                out[ij] = mi * (scratch[ij] - scratch[j * n + i].conj()) + rho[ij] * decay[ij];
            }
        }
    };
    for s in 1..=steps {
        let t = (s - 1) as f64 * step;
        let (va, vm, vb) = (schedule.v_at(t), schedule.v_at(t + 0.5 * step), schedule.v_at(t + step));
        deriv(va, &rho, &mut k1, &mut scratch);
        combine(&mut tmp, &rho, 0.5 * step, &k1);
        deriv(vm, &tmp, &mut k2, &mut scratch);
        combine(&mut tmp, &rho, 0.5 * step, &k2);
        deriv(vm, &tmp, &mut k3, &mut scratch);
        combine(&mut tmp, &rho, step, &k3);
        deriv(vb, &tmp, &mut k4, &mut scratch);
        rk4_update(&mut rho, step, &k1, &k2, &k3, &k4);
        symmetrize(&mut rho, n);
        if s % opts.sample_every == 0 || s == steps {
            sample(&mut rec, s as f64 * step, &rho)?;
        }
    }
    let m = DMatrix::from_row_slice(n, n, &rho);
    rec.final_state = FinalState::Mixed(DensityMatrix::from_raw(h.subsystem(), m));
    Ok(rec)
}

fn symmetrize(rho: &mut [C64], n: usize) {
    for i in 0..n {
        rho[i * n + i].im = 0.0;
        for j in i + 1..n {
            let avg = (rho[i * n + j] + rho[j * n + i].conj()) * 0.5;
            rho[i * n + j] = avg;
            rho[j * n + i] = avg.conj();
        }
    }
}

/// Dephasing evolution of the model under the drive schedule.
pub fn evolve_lindblad(
    rho0: &DensityMatrix,
    schedule: &DriveSchedule,
    params: &ModelParams,
    space: &HilbertSpace,
    rate: f64,
    opts: &EvolveOptions,
) -> Result<EvolutionRecord> {
    let h = DrivenHamiltonian::from_model(space, params)?;
    evolve_lindblad_with(&h, rho0, schedule, rate, opts)
}

/// ½[[1, e^{−t/t_D}], [e^{−t/t_D}, 1]] with t_D = 1/(2D).
pub fn predicted_cs_density(t: f64, rate: f64) -> Result<DensityMatrix> {
    if !(t >= 0.0) || !(rate >= 0.0) {
        return Err(invalid(format!("time {t} and rate {rate} must be non-negative")));
    }
    let off = 0.5 * (-2.0 * rate * t).exp();
    let m = DMatrix::from_row_slice(2, 2, &[0.5, off, off, 0.5]).map(|x| C64::new(x, 0.0));
    Ok(DensityMatrix::from_raw(Subsystem::CentralSpin, m))
}

/// Predicted ⟨σx⟩ = e^{−2Dt}.
pub fn predicted_coherence(t: f64, rate: f64) -> f64 {
    (-2.0 * rate * t).exp()
}

/// Closed-form protocol timescales.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Timescales {
    /// Time to reach the transition, (v0 − w)/γ.
    pub t1: f64,
    /// Time past the transition until the lobes separate, w/(128^{1/3} N^{2/3} γ).
    pub t2: f64,
    /// t1 + t2.
    pub t_bc: f64,
    /// Crossover dephasing rate γ/(2(v0 − w)).
    pub d_c: f64,
}

pub fn timescales(n_spins: u32, v0: f64, w: f64, gamma: f64) -> Result<Timescales> {
    if n_spins == 0 {
        return Err(invalid("need at least one spin"));
    }
    if !(gamma > 0.0) || !(w > 0.0) {
        return Err(invalid("γ and w must be positive"));
    }
    if !(v0 > w) {
        return Err(invalid(format!("protocol must start in the trivial phase: v0 = {v0} ≤ w = {w}")));
    }
    let t1 = (v0 - w) / gamma;
    let t2 = w / (128f64.cbrt() * (n_spins as f64).powf(2.0 / 3.0) * gamma);
    Ok(Timescales { t1, t2, t_bc: t1 + t2, d_c: gamma / (2.0 * (v0 - w)) })
}

/// Drive time at which the bound-state separation 2n_b reaches the width σ,
/// found by bisection on the ramp between v = w and v = vf.
pub fn splitting_time(space: &HilbertSpace, schedule: &DriveSchedule, w: f64) -> Result<f64> {
    schedule.validate()?;
    if !(schedule.vf < w && w < schedule.v0) {
        return Err(invalid("ramp must cross v = w"));
    }
    let gap = |t: f64| -> Result<f64> {
        let params = ModelParams::new(schedule.v_at(t), w)?;
        let d = bound_descriptor(space, &params, CsState::Up)?;
        Ok(2.0 * d.n_b - d.sigma)
    };
    let mut lo = schedule.time_at(w) * (1.0 + 1e-12) + 1e-12;
    let mut hi = schedule.ramp_duration();
    if gap(lo)? >= 0.0 || gap(hi)? <= 0.0 {
        return Err(Error::Numerical("bound states never separate along this ramp".into()));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if gap(mid)? < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-12 * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}
