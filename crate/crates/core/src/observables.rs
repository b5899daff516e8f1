//! Reduced states, central-spin coherence, fidelity, entanglement entropy and
//! the discrete joint Wigner distribution over (n, φ_p).

use std::f64::consts::TAU;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::error::{invalid, Error, Result};
use crate::hilbert::{DensityMatrix, HilbertSpace, StateVector, Subsystem, ZERO};

fn factor_of(joint: Subsystem) -> Result<Subsystem> {
    match joint {
        Subsystem::Joint => Ok(Subsystem::Spins),
        Subsystem::ModeJoint => Ok(Subsystem::Mode),
        other => Err(invalid(format!("{other:?} is not a joint space with a central spin"))),
    }
}

/// Tr_S[ρ] (or Tr over the bosonic mode).
pub fn reduced_cs(rho: &DensityMatrix) -> Result<DensityMatrix> {
    factor_of(rho.subsystem())?;
    let m = rho.matrix();
    let mut out = DMatrix::from_element(2, 2, ZERO);
    for i in 0..rho.dim() / 2 {
        for a in 0..2 {
            for b in 0..2 {
                out[(a, b)] += m[(2 * i + a, 2 * i + b)];
            }
        }
    }
    Ok(DensityMatrix::from_raw(Subsystem::CentralSpin, out))
}

/// Tr_CS[ρ].
pub fn reduced_spins(rho: &DensityMatrix) -> Result<DensityMatrix> {
    let factor = factor_of(rho.subsystem())?;
    let m = rho.matrix();
    let d = rho.dim() / 2;
    let out = DMatrix::from_fn(d, d, |i, j| m[(2 * i, 2 * j)] + m[(2 * i + 1, 2 * j + 1)]);
    Ok(DensityMatrix::from_raw(factor, out))
}

/// Reduced central-spin state of a pure joint state.
pub fn reduced_cs_pure(state: &StateVector) -> Result<DensityMatrix> {
    factor_of(state.subsystem())?;
    let a = state.amplitudes();
    let mut out = DMatrix::from_element(2, 2, ZERO);
    for i in 0..state.dim() / 2 {
        for r in 0..2 {
            for c in 0..2 {
                out[(r, c)] += a[2 * i + r] * a[2 * i + c].conj();
            }
        }
    }
    Ok(DensityMatrix::from_raw(Subsystem::CentralSpin, out))
}

/// Probability of each identical-spin (or mode) basis state, summed over the
/// central spin.
pub fn fock_marginal(state: &StateVector) -> Result<Vec<f64>> {
    factor_of(state.subsystem())?;
    Ok(state.amplitudes().as_slice().chunks(2).map(|c| c[0].norm_sqr() + c[1].norm_sqr()).collect())
}

pub fn fock_marginal_mixed(rho: &DensityMatrix) -> Result<Vec<f64>> {
    factor_of(rho.subsystem())?;
    let m = rho.matrix();
    Ok((0..rho.dim() / 2).map(|i| m[(2 * i, 2 * i)].re + m[(2 * i + 1, 2 * i + 1)].re).collect())
}

/// ⟨σx⟩ = Tr[σx ρ].
pub fn cs_coherence(rho: &DensityMatrix) -> Result<f64> {
    factor_of(rho.subsystem())?;
    let m = rho.matrix();
    Ok((0..rho.dim() / 2).map(|i| 2.0 * m[(2 * i, 2 * i + 1)].re).sum())
}

pub fn cs_coherence_pure(state: &StateVector) -> Result<f64> {
    factor_of(state.subsystem())?;
    Ok(state.amplitudes().as_slice().chunks(2).map(|c| 2.0 * (c[0] * c[1].conj()).re).sum())
}

/// ⟨σz⟩ of the central spin in a pure joint state.
pub fn cs_polarization(state: &StateVector) -> Result<f64> {
    factor_of(state.subsystem())?;
    Ok(state.amplitudes().as_slice().chunks(2).map(|c| c[0].norm_sqr() - c[1].norm_sqr()).sum())
}

/// Anything whose overlap with a pure target can be measured.
pub trait QuantumState {
    /// |⟨self|b⟩|² for pure states, ⟨b|ρ|b⟩ for mixed ones.
    fn fidelity_with(&self, target: &StateVector) -> Result<f64>;
}

impl QuantumState for StateVector {
    fn fidelity_with(&self, target: &StateVector) -> Result<f64> {
        Ok(self.inner(target)?.norm_sqr())
    }
}

impl QuantumState for DensityMatrix {
    fn fidelity_with(&self, target: &StateVector) -> Result<f64> {
        self.overlap_with(target)
    }
}

pub fn fidelity<S: QuantumState + ?Sized>(a: &S, b: &StateVector) -> Result<f64> {
    a.fidelity_with(b)
}

/// −Tr[ρ ln ρ] of a 2×2 density matrix.
pub fn qubit_entropy(rho: &DensityMatrix) -> Result<f64> {
    if rho.dim() != 2 {
        return Err(invalid("qubit entropy needs a 2x2 density matrix"));
    }
    let m = rho.matrix();
    let (a, d, b) = (m[(0, 0)].re, m[(1, 1)].re, m[(0, 1)]);
    let tr = a + d;
    let r = (0.25 * (a - d).powi(2) + b.norm_sqr()).sqrt();
    let xlnx = |x: f64| if x > 0.0 { -x * x.ln() } else { 0.0 };
    Ok(xlnx(0.5 * tr + r) + xlnx(0.5 * tr - r))
}

/// Von Neumann entropy (natural log) of the reduced central spin.
pub fn entanglement_entropy_cs(rho: &DensityMatrix) -> Result<f64> {
    qubit_entropy(&reduced_cs(rho)?)
}

pub fn entanglement_entropy_cs_pure(state: &StateVector) -> Result<f64> {
    qubit_entropy(&reduced_cs_pure(state)?)
}

/// Central-spin Pauli label selecting ρᵢ = Tr_CS[σᵢ ρ].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WignerComponent {
    Zero,
    X,
    Y,
    Z,
}

impl WignerComponent {
    pub const ALL: [WignerComponent; 4] =
        [WignerComponent::Zero, WignerComponent::X, WignerComponent::Y, WignerComponent::Z];

    pub fn label(self) -> &'static str {
        match self {
            WignerComponent::Zero => "0",
            WignerComponent::X => "x",
            WignerComponent::Y => "y",
            WignerComponent::Z => "z",
        }
    }

    /// ρᵢ(a, b) = Σ_{m m'} σ_{m m'} ρ(a m', b m).
    fn reduce(self, m: &DMatrix<C64>, a: usize, b: usize) -> C64 {
        let up_up = m[(2 * a, 2 * b)];
        let dn_dn = m[(2 * a + 1, 2 * b + 1)];
        let dn_up = m[(2 * a + 1, 2 * b)];
        let up_dn = m[(2 * a, 2 * b + 1)];
        let i = C64::new(0.0, 1.0);
        match self {
            WignerComponent::Zero => up_up + dn_dn,
            WignerComponent::X => dn_up + up_dn,
            WignerComponent::Y => -i * dn_up + i * up_dn,
            WignerComponent::Z => up_up - dn_dn,
        }
    }
}

/// W_i(n, φ_p) on n ∈ {−N/2..N/2} (rows) × φ_p = 2πp/(N+1), p = 0..N (columns).
#[derive(Clone, Debug)]
pub struct WignerGrid {
    pub component: WignerComponent,
    pub n_values: Vec<f64>,
    pub phases: Vec<f64>,
    pub values: DMatrix<f64>,
    /// Largest |Im W| discarded when taking the real part.
    pub max_imaginary: f64,
}

impl WignerGrid {
    /// Σ_p W(n, φ_p) for every n.
    pub fn marginal(&self) -> Vec<f64> {
        (0..self.values.nrows()).map(|i| self.values.row(i).sum()).collect()
    }

    pub fn min(&self) -> f64 {
        self.values.min()
    }

    pub fn max(&self) -> f64 {
        self.values.max()
    }

    pub fn total(&self) -> f64 {
        self.values.sum()
    }
}

/// Residues above this abort the real-part projection.
pub const WIGNER_IMAG_TOL: f64 = 1e-10;

/// W_i(n, φ_p) = 1/(N+1) Σ_{n'} ⟨n−n'|ρᵢ|n+n'⟩ e^{2iφ_p n'}.
///
/// n' runs over the integers for which both n ± n' are Fock labels; terms
/// leaving the Fock ladder are absent.
pub fn wigner_joint(rho: &DensityMatrix, space: &HilbertSpace, component: WignerComponent) -> Result<WignerGrid> {
    if rho.subsystem() != Subsystem::Joint || rho.dim() != space.total_dim() {
        return Err(invalid("Wigner grid needs a joint density matrix of this space"));
    }
    let d = space.spin_dim();
    let m = rho.matrix();
    // e^{2iφ_p k} = ω^{2pk} with ω = e^{2πi/(N+1)}
    let roots: Vec<C64> = (0..d).map(|j| C64::from_polar(1.0, TAU * j as f64 / d as f64)).collect();
    let norm = 1.0 / d as f64;
    let mut values = DMatrix::zeros(d, d);
    let mut max_imaginary: f64 = 0.0;
    let mut terms = Vec::with_capacity(d);
    for i in 0..d {
        let reach = i.min(d - 1 - i);
        terms.clear();
        for k in 0..=reach {
            terms.push((k, component.reduce(m, i - k, i + k), component.reduce(m, i + k, i - k)));
        }
        for p in 0..d {
            let mut acc = ZERO;
            for &(k, fwd, back) in &terms {
                let phase = roots[(2 * p * k) % d];
                acc += if k == 0 { fwd } else { fwd * phase + back * phase.conj() };
            }
            acc *= norm;
            max_imaginary = max_imaginary.max(acc.im.abs());
            values[(i, p)] = acc.re;
        }
    }
    if max_imaginary > WIGNER_IMAG_TOL {
        return Err(Error::Numerical(format!(
            "Wigner component {} has imaginary residue {max_imaginary:e}",
            component.label()
        )));
    }
    Ok(WignerGrid {
        component,
        n_values: space.n_values().collect(),
        phases: (0..d).map(|p| TAU * p as f64 / d as f64).collect(),
        values,
        max_imaginary,
    })
}
