//! A central spin coupled to a single truncated bosonic mode through a
//! Jaynes-Cummings interaction. The mode has one Fock-space edge (the vacuum),
//! so exactly one physical bound state appears, alongside a spurious one at
//! the truncation edge.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use crate::error::{invalid, Error, Result};
use crate::hilbert::{canonicalize_phase, ln_factorials, real, Operator, Pauli, StateVector, Subsystem, ZERO};
use crate::observables::{cs_polarization, fock_marginal};
use crate::spectra::{diagonalize, zero_modes, EigenSystem, ZERO_MODE_RATIO};

/// Mode Fock states m_a = 0..N_a−1 tensored with the central spin; joint index
/// k = 2·m_a + m with ↑ = 0, ↓ = 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BosonSpace {
    truncation: usize,
}

impl BosonSpace {
    pub fn new(truncation: usize) -> Result<Self> {
        if truncation < 2 {
            return Err(invalid(format!("mode truncation {truncation} must be at least 2")));
        }
        Ok(BosonSpace { truncation })
    }

    pub fn truncation(&self) -> usize {
        self.truncation
    }

    pub fn cs_dim(&self) -> usize {
        2
    }

    pub fn total_dim(&self) -> usize {
        2 * self.truncation
    }

    /// Annihilation operator â on the retained Fock states.
    pub fn annihilation(&self) -> Operator {
        let n = self.truncation;
        let mut a = DMatrix::from_element(n, n, ZERO);
        for m in 1..n {
            a[(m - 1, m)] = real((m as f64).sqrt());
        }
        Operator::from_parts(Subsystem::Mode, a)
    }

    /// Number operator â†â.
    pub fn number(&self) -> Operator {
        let n = self.truncation;
        let d = DVector::from_fn(n, |m, _| real(m as f64));
        Operator::from_parts(Subsystem::Mode, DMatrix::from_diagonal(&d))
    }
}

/// H_a = v σx + w(â†σ₋ + âσ₊) + ε â†â.
pub fn build_jc_hamiltonian(bspace: &BosonSpace, v: f64, w: f64, epsilon: f64) -> Result<Operator> {
    if !(v.is_finite() && w.is_finite() && epsilon.is_finite()) {
        return Err(invalid("Jaynes-Cummings parameters must be finite"));
    }
    if epsilon < 0.0 {
        return Err(invalid(format!("perturbation ε = {epsilon} must be non-negative")));
    }
    let a = bspace.annihilation().into_matrix();
    let ad = a.adjoint();
    let id_mode = DMatrix::<C64>::identity(bspace.truncation, bspace.truncation);
    let mut h = id_mode.kronecker(&(Pauli::X.matrix() * real(v)))
        + (ad.kronecker(&Pauli::Lower.matrix()) + a.kronecker(&Pauli::Raise.matrix())) * real(w);
    if epsilon != 0.0 {
        h += bspace.number().matrix().kronecker(&DMatrix::identity(2, 2)) * real(epsilon);
    }
    Ok(Operator::from_parts(Subsystem::ModeJoint, h))
}

/// Largest norm loss tolerated when truncating a coherent state.
pub const TRUNCATION_TOL: f64 = 1e-10;

/// |α⟩ = e^{−|α|²/2} Σ αᵐ/√(m!) |m⟩ restricted to the retained states and
/// renormalized.
pub fn coherent_fock_state(alpha: C64, bspace: &BosonSpace) -> Result<StateVector> {
    if !(alpha.re.is_finite() && alpha.im.is_finite()) {
        return Err(invalid("coherent amplitude must be finite"));
    }
    let n = bspace.truncation;
    let lnf = ln_factorials(n);
    let (r, arg) = (alpha.norm(), alpha.arg());
    let amps = DVector::from_fn(n, |m, _| {
        if r == 0.0 {
            return if m == 0 { real(1.0) } else { ZERO };
        }
        let ln_mag = -0.5 * r * r + m as f64 * r.ln() - 0.5 * lnf[m];
        C64::from_polar(ln_mag.exp(), m as f64 * arg)
    });
    let kept: f64 = amps.iter().map(|c| c.norm_sqr()).sum();
    let loss = 1.0 - kept;
    if loss > TRUNCATION_TOL {
        return Err(Error::Truncation(format!("coherent state |α| = {r} loses {loss:e} of its norm at N_a = {n}")));
    }
    StateVector::normalized(Subsystem::Mode, amps)
}

/// Mean excitation number Σ m P(m) of a mode-joint state.
pub fn mean_number(state: &StateVector) -> Result<f64> {
    Ok(fock_marginal(state)?.iter().enumerate().map(|(m, p)| m as f64 * p).sum())
}

/// The two near-zero states of H_a, labelled by where they live.
#[derive(Clone, Debug)]
pub struct BosonicZeroModes {
    /// Bound state localized near m_a = (v/w)².
    pub physical: StateVector,
    /// Spurious state pinned to the truncation edge.
    pub artifact: StateVector,
    pub physical_energy: f64,
    pub artifact_energy: f64,
    pub physical_mean: f64,
    pub artifact_mean: f64,
    /// Smallest |E| outside the pair.
    pub bulk_gap: f64,
}

/// Separates the near-zero pair into physical and artifact states by mean
/// number (below N_a/2 is physical). A degenerate pair (ε = 0) is first
/// rotated into σz eigenstates; a split pair is used as-is.
pub fn bosonic_zero_modes(bspace: &BosonSpace, v: f64, w: f64, epsilon: f64) -> Result<BosonicZeroModes> {
    let h = build_jc_hamiltonian(bspace, v, w, epsilon)?;
    let eig = diagonalize(&h)?;
    classify_pair(bspace, &h, &eig, epsilon)
}

fn classify_pair(bspace: &BosonSpace, h: &Operator, eig: &EigenSystem, epsilon: f64) -> Result<BosonicZeroModes> {
    let order = eig.indices_by_magnitude();
    let (a, b) = (order[0], order[1]);
    let vals = eig.eigenvalues();
    let (states, bulk_gap) = if epsilon == 0.0 {
        let pair = zero_modes(eig)?;
        ([pair.up, pair.down], pair.bulk_gap)
    } else {
        let bulk = vals[order[2]].abs();
        if !(vals[a].abs().max(vals[b].abs()) < ZERO_MODE_RATIO * bulk) {
            return Err(Error::Phase("no near-zero pair separated from the bulk".into()));
        }
        ([eig.eigenvector(a), eig.eigenvector(b)], bulk)
    };
    let means = [mean_number(&states[0])?, mean_number(&states[1])?];
    let half = 0.5 * bspace.truncation as f64;
    let phys = match (means[0] < half, means[1] < half) {
        (true, false) => 0,
        (false, true) => 1,
        _ => {
            return Err(Error::Truncation(format!(
                "cannot separate physical from artifact state (mean numbers {} and {})",
                means[0], means[1]
            )))
        }
    };
    let art = 1 - phys;
    let energies = [h.expectation(&states[0])?.re, h.expectation(&states[1])?.re];
    let [s0, s1] = states;
    let (physical, artifact) = if phys == 0 { (s0, s1) } else { (s1, s0) };
    Ok(BosonicZeroModes {
        physical,
        artifact,
        physical_energy: energies[phys],
        artifact_energy: energies[art],
        physical_mean: means[phys],
        artifact_mean: means[art],
        bulk_gap,
    })
}

/// Largest deviation of ⟨σz⟩ from −1 allowed for the physical state.
pub const PHYSICAL_SIGMA_Z_TOL: f64 = 1e-8;

/// The normalizable bound state, living in the ↓ subspace near m_a = (v/w)².
pub fn physical_bound_state(bspace: &BosonSpace, v: f64, w: f64) -> Result<StateVector> {
    if !(w > 0.0) || !(v >= 0.0) {
        return Err(invalid(format!("need v ≥ 0 and w > 0, got v = {v}, w = {w}")));
    }
    let modes = bosonic_zero_modes(bspace, v, w, 0.0)?;
    let sz = cs_polarization(&modes.physical)?;
    if (sz + 1.0).abs() > PHYSICAL_SIGMA_Z_TOL {
        return Err(Error::Truncation(format!("physical bound state has ⟨σz⟩ = {sz}, expected −1")));
    }
    Ok(modes.physical)
}

/// |α = −v/w⟩ ⊗ |↓⟩.
pub fn analytic_bound_state(bspace: &BosonSpace, v: f64, w: f64) -> Result<StateVector> {
    if !(w > 0.0) {
        return Err(invalid("w must be positive"));
    }
    let mode = coherent_fock_state(real(-v / w), bspace)?;
    let down = StateVector::basis(Subsystem::CentralSpin, 2, 1)?;
    let mut joint = mode.tensor(&down, Subsystem::ModeJoint);
    let mut amps = joint.amplitudes().clone();
    canonicalize_phase(amps.as_mut_slice());
    joint = StateVector::normalized(Subsystem::ModeJoint, amps)?;
    Ok(joint)
}
