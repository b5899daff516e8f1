//! Dense operator, pure-state and density-matrix containers.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use super::space::Subsystem;
use crate::error::{invalid, Error, Result};

pub(crate) const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub(crate) const ONE: C64 = C64 { re: 1.0, im: 0.0 };

pub(crate) fn real(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// Dense square complex matrix tagged with the factor it acts on.
#[derive(Clone, Debug, PartialEq)]
pub struct Operator {
    subsystem: Subsystem,
    matrix: DMatrix<C64>,
}

impl Operator {
    pub fn new(subsystem: Subsystem, matrix: DMatrix<C64>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(invalid(format!("operator must be square, got {}x{}", matrix.nrows(), matrix.ncols())));
        }
        Ok(Self { subsystem, matrix })
    }

    pub(crate) fn from_parts(subsystem: Subsystem, matrix: DMatrix<C64>) -> Self {
        debug_assert!(matrix.is_square());
        Self { subsystem, matrix }
    }

    pub fn subsystem(&self) -> Subsystem {
        self.subsystem
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.matrix
    }

    pub fn adjoint(&self) -> Self {
        Self::from_parts(self.subsystem, self.matrix.adjoint())
    }

    /// ‖A − A†‖_F / ‖A‖_F (zero for the zero matrix).
    pub fn hermiticity_error(&self) -> f64 {
        let scale = self.matrix.norm();
        if scale == 0.0 {
            return 0.0;
        }
        (&self.matrix - self.matrix.adjoint()).norm() / scale
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_error() <= tol
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.matrix.norm()
    }

    fn check_same(&self, other: &Operator) -> Result<()> {
        if self.subsystem != other.subsystem || self.dim() != other.dim() {
            return Err(invalid("operators act on different spaces"));
        }
        Ok(())
    }

    pub fn scaled(&self, factor: C64) -> Self {
        Self::from_parts(self.subsystem, &self.matrix * factor)
    }

    pub fn plus(&self, other: &Operator) -> Result<Self> {
        self.check_same(other)?;
        Ok(Self::from_parts(self.subsystem, &self.matrix + &other.matrix))
    }

    pub fn minus(&self, other: &Operator) -> Result<Self> {
        self.check_same(other)?;
        Ok(Self::from_parts(self.subsystem, &self.matrix - &other.matrix))
    }

    pub fn compose(&self, other: &Operator) -> Result<Self> {
        self.check_same(other)?;
        Ok(Self::from_parts(self.subsystem, &self.matrix * &other.matrix))
    }

    /// [A, B] = AB − BA.
    pub fn commutator(&self, other: &Operator) -> Result<Self> {
        self.check_same(other)?;
        Ok(Self::from_parts(self.subsystem, &self.matrix * &other.matrix - &other.matrix * &self.matrix))
    }

    pub fn apply(&self, state: &StateVector) -> Result<DVector<C64>> {
        if state.subsystem() != self.subsystem || state.dim() != self.dim() {
            return Err(invalid("operator and state act on different spaces"));
        }
        Ok(&self.matrix * state.amplitudes())
    }

    /// ⟨ψ|A|ψ⟩.
    pub fn expectation(&self, state: &StateVector) -> Result<C64> {
        let image = self.apply(state)?;
        Ok(state.amplitudes().dotc(&image))
    }
}

/// Normalized pure state.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    subsystem: Subsystem,
    amplitudes: DVector<C64>,
}

impl StateVector {
    pub const NORM_TOL: f64 = 1e-12;

    /// Wraps already-normalized amplitudes.
    pub fn new(subsystem: Subsystem, amplitudes: DVector<C64>) -> Result<Self> {
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > Self::NORM_TOL {
            return Err(invalid(format!("state norm {norm} differs from 1")));
        }
        Ok(Self { subsystem, amplitudes })
    }

    /// Normalizes arbitrary nonzero amplitudes.
    pub fn normalized(subsystem: Subsystem, amplitudes: DVector<C64>) -> Result<Self> {
        let norm = amplitudes.norm();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(invalid("cannot normalize a zero or non-finite vector"));
        }
        Ok(Self { subsystem, amplitudes: amplitudes / real(norm) })
    }

    /// Used by integrators, whose output carries a small (tracked) norm drift.
    pub(crate) fn from_raw(subsystem: Subsystem, amplitudes: DVector<C64>) -> Self {
        Self { subsystem, amplitudes }
    }

    pub fn basis(subsystem: Subsystem, dim: usize, k: usize) -> Result<Self> {
        if k >= dim {
            return Err(invalid(format!("basis index {k} out of range for dimension {dim}")));
        }
        let mut v = DVector::from_element(dim, ZERO);
        v[k] = ONE;
        Ok(Self { subsystem, amplitudes: v })
    }

    pub fn subsystem(&self) -> Subsystem {
        self.subsystem
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    /// ⟨self|other⟩.
    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        if self.subsystem != other.subsystem || self.dim() != other.dim() {
            return Err(invalid("states live in different spaces"));
        }
        Ok(self.amplitudes.dotc(&other.amplitudes))
    }

    /// Product state self ⊗ other, with `other` the fastest-running index.
    pub fn tensor(&self, other: &StateVector, joint: Subsystem) -> StateVector {
        StateVector::from_raw(joint, self.amplitudes.kronecker(&other.amplitudes))
    }

    /// Fixes the global phase: the largest-magnitude component becomes real
    /// and positive (first such component on ties).
    pub fn with_canonical_phase(mut self) -> Self {
        canonicalize_phase(self.amplitudes.as_mut_slice());
        self
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }
}

pub(crate) fn canonicalize_phase(v: &mut [C64]) {
    let mut best = 0;
    let mut best_mag = -1.0;
    for (k, a) in v.iter().enumerate() {
        let mag = a.norm();
        if mag > best_mag * (1.0 + 1e-12) {
            best = k;
            best_mag = mag;
        }
    }
    if best_mag > 0.0 {
        let phase = v[best].conj() / best_mag;
        for a in v.iter_mut() {
            *a *= phase;
        }
        v[best] = real(v[best].re);
    }
}

/// Mixed state. Construction via [`DensityMatrix::new`] validates
/// Hermiticity, unit trace and numerical positivity.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    subsystem: Subsystem,
    matrix: DMatrix<C64>,
}

impl DensityMatrix {
    pub const HERMITIAN_TOL: f64 = 1e-10;
    pub const TRACE_TOL: f64 = 1e-10;
    pub const POSITIVITY_TOL: f64 = 1e-8;

    pub fn new(subsystem: Subsystem, matrix: DMatrix<C64>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(invalid("density matrix must be square"));
        }
        let rho = Self { subsystem, matrix };
        rho.validate()?;
        Ok(rho)
    }

    pub(crate) fn from_raw(subsystem: Subsystem, matrix: DMatrix<C64>) -> Self {
        Self { subsystem, matrix }
    }

    pub fn from_pure(state: &StateVector) -> Self {
        let a = state.amplitudes();
        Self { subsystem: state.subsystem(), matrix: a * a.adjoint() }
    }

    pub fn maximally_mixed(subsystem: Subsystem, dim: usize) -> Self {
        Self { subsystem, matrix: DMatrix::from_diagonal_element(dim, dim, real(1.0 / dim as f64)) }
    }

    /// Checks the three density-matrix invariants.
    pub fn validate(&self) -> Result<()> {
        let herm = (&self.matrix - self.matrix.adjoint()).norm();
        if herm > Self::HERMITIAN_TOL {
            return Err(Error::Numerical(format!("density matrix not Hermitian ({herm:e})")));
        }
        let tr = self.trace();
        if (tr.re - 1.0).abs() > Self::TRACE_TOL || tr.im.abs() > Self::TRACE_TOL {
            return Err(Error::Numerical(format!("density matrix trace {tr} differs from 1")));
        }
        let min_eig = self.min_eigenvalue();
        if min_eig < -Self::POSITIVITY_TOL {
            return Err(Error::Numerical(format!("negative eigenvalue {min_eig:e}")));
        }
        Ok(())
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let h = (&self.matrix + self.matrix.adjoint()) * real(0.5);
        h.symmetric_eigenvalues().iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn subsystem(&self) -> Subsystem {
        self.subsystem
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    /// Tr[Aρ].
    pub fn expectation(&self, op: &Operator) -> Result<C64> {
        if op.subsystem() != self.subsystem || op.dim() != self.dim() {
            return Err(invalid("operator and density matrix act on different spaces"));
        }
        Ok((op.matrix() * &self.matrix).trace())
    }

    /// ⟨ψ|ρ|ψ⟩, real for Hermitian ρ.
    pub fn overlap_with(&self, state: &StateVector) -> Result<f64> {
        if state.subsystem() != self.subsystem || state.dim() != self.dim() {
            return Err(invalid("state and density matrix live in different spaces"));
        }
        let a = state.amplitudes();
        Ok(a.dotc(&(&self.matrix * a)).re)
    }

    pub fn purity(&self) -> f64 {
        (&self.matrix * &self.matrix).trace().re
    }
}
