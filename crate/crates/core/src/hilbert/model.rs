use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::linalg::{real, Operator, StateVector, ONE, ZERO};
use super::space::{HilbertSpace, Subsystem};
use crate::error::{invalid, Result};

/// Coupling constants, all in units of the exchange energy `w`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Central-spin flip energy (coefficient of σx).
    pub v: f64,
    /// Spin-exchange energy between the central spin and the identical spins.
    pub w: f64,
    /// Chiral-preserving σy coefficient.
    #[serde(default)]
    pub u: f64,
    /// Chiral-breaking σz coefficient.
    #[serde(default)]
    pub v_z: f64,
    /// Chiral-breaking σz⊗S_z coefficient.
    #[serde(default)]
    pub w_z: f64,
}

impl ModelParams {
    pub fn new(v: f64, w: f64) -> Result<Self> {
        let p = Self { v, w, u: 0.0, v_z: 0.0, w_z: 0.0 };
        p.validate()?;
        Ok(p)
    }

    pub fn with_u(mut self, u: f64) -> Self {
        self.u = u;
        self
    }

    pub fn with_chiral_breaking(mut self, v_z: f64, w_z: f64) -> Self {
        self.v_z = v_z;
        self.w_z = w_z;
        self
    }

    pub fn with_v(mut self, v: f64) -> Self {
        self.v = v;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.w > 0.0) || !self.w.is_finite() {
            return Err(invalid(format!("exchange energy w must be positive, got {}", self.w)));
        }
        if ![self.v, self.u, self.v_z, self.w_z].iter().all(|x| x.is_finite()) {
            return Err(invalid("model parameters must be finite"));
        }
        Ok(())
    }

    /// True when σz H σz = −H holds.
    pub fn is_chiral(&self) -> bool {
        self.v_z == 0.0 && self.w_z == 0.0
    }
}

/// Collective spin operators of the symmetric S = N/2 sector.
#[derive(Clone, Debug)]
pub struct CollectiveOps {
    pub s_z: Operator,
    pub s_plus: Operator,
    pub s_minus: Operator,
    pub s_x: Operator,
    pub s_y: Operator,
}

/// Ladder matrix elements ⟨n+1|S₊|n⟩ = √(S(S+1) − n(n+1)).
fn raising_matrix(space: &HilbertSpace) -> DMatrix<C64> {
    let d = space.spin_dim();
    let s = space.total_spin();
    let mut m = DMatrix::from_element(d, d, ZERO);
    for i in 0..d - 1 {
        let n = space.n_at(i);
        m[(i + 1, i)] = real((s * (s + 1.0) - n * (n + 1.0)).sqrt());
    }
    m
}

pub fn collective_ops(space: &HilbertSpace) -> CollectiveOps {
    let d = space.spin_dim();
    let s_plus = raising_matrix(space);
    let s_minus = s_plus.adjoint();
    let s_z = DMatrix::from_diagonal(&DVector::from_iterator(d, space.n_values().map(real)));
    let s_x = (&s_plus + &s_minus) * real(0.5);
    let s_y = (&s_plus - &s_minus) * C64::new(0.0, -0.5);
    let wrap = |m| Operator::from_parts(Subsystem::Spins, m);
    CollectiveOps { s_z: wrap(s_z), s_plus: wrap(s_plus), s_minus: wrap(s_minus), s_x: wrap(s_x), s_y: wrap(s_y) }
}

/// Single-qubit operators in the (↑, ↓) basis.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Pauli {
    Identity,
    X,
    Y,
    Z,
    /// σ₊ = |↑⟩⟨↓|
    Raise,
    /// σ₋ = |↓⟩⟨↑|
    Lower,
}

impl Pauli {
    pub fn matrix(self) -> DMatrix<C64> {
        let i = C64::new(0.0, 1.0);
        let entries = match self {
            Pauli::Identity => [ONE, ZERO, ZERO, ONE],
            Pauli::X => [ZERO, ONE, ONE, ZERO],
            Pauli::Y => [ZERO, -i, i, ZERO],
            Pauli::Z => [ONE, ZERO, ZERO, -ONE],
            Pauli::Raise => [ZERO, ONE, ZERO, ZERO],
            Pauli::Lower => [ZERO, ZERO, ONE, ZERO],
        };
        DMatrix::from_row_slice(2, 2, &entries)
    }

    pub fn operator(self) -> Operator {
        Operator::from_parts(Subsystem::CentralSpin, self.matrix())
    }
}

/// Lifts a central-spin operator to the joint space: I ⊗ σ.
pub fn embed_cs(space: &HilbertSpace, op: &DMatrix<C64>) -> Operator {
    let id = DMatrix::<C64>::identity(space.spin_dim(), space.spin_dim());
    Operator::from_parts(Subsystem::Joint, id.kronecker(op))
}

/// Lifts an identical-spin operator to the joint space: A ⊗ I.
pub fn embed_spins(op: &Operator) -> Result<Operator> {
    if op.subsystem() != Subsystem::Spins {
        return Err(invalid("expected an identical-spin operator"));
    }
    Ok(Operator::from_parts(Subsystem::Joint, op.matrix().kronecker(&DMatrix::<C64>::identity(2, 2))))
}

/// Joint σᵢ for the central spin.
pub fn cs_operator(space: &HilbertSpace, which: Pauli) -> Operator {
    embed_cs(space, &which.matrix())
}

/// H = v σx + (2w/N)(S₊σ₋ + S₋σ₊) + u σy + v_z σz + w_z σz S_z.
pub fn build_hamiltonian(space: &HilbertSpace, params: &ModelParams) -> Result<Operator> {
    params.validate()?;
    let ops = collective_ops(space);
    let coupling = real(2.0 * params.w / space.n_spins() as f64);
    let exchange =
        ops.s_plus.matrix().kronecker(&Pauli::Lower.matrix()) + ops.s_minus.matrix().kronecker(&Pauli::Raise.matrix());
    let id = DMatrix::<C64>::identity(space.spin_dim(), space.spin_dim());
    let mut h = id.kronecker(&(Pauli::X.matrix() * real(params.v))) + exchange * coupling;
    if params.u != 0.0 {
        h += id.kronecker(&(Pauli::Y.matrix() * real(params.u)));
    }
    if params.v_z != 0.0 {
        h += id.kronecker(&(Pauli::Z.matrix() * real(params.v_z)));
    }
    if params.w_z != 0.0 {
        h += ops.s_z.matrix().kronecker(&Pauli::Z.matrix()) * real(params.w_z);
    }
    Ok(Operator::from_parts(Subsystem::Joint, h))
}

/// ln k! for k = 0..=n.
pub(crate) fn ln_factorials(n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    let mut acc = 0.0;
    out.push(0.0);
    for k in 1..=n {
        acc += (k as f64).ln();
        out.push(acc);
    }
    out
}

/// SU(2) coherent state of the identical spins pointing along (θ, φ):
/// ⟨n|θ,φ⟩ = √C(N, N/2+n) cos(θ/2)^{N/2+n} sin(θ/2)^{N/2−n} e^{−i(N/2+n)φ}.
pub fn coherent_spin_state(space: &HilbertSpace, theta: f64, phi: f64) -> Result<StateVector> {
    if !(0.0..=PI).contains(&theta) {
        return Err(invalid(format!("polar angle {theta} outside [0, π]")));
    }
    let n_spins = space.n_spins() as usize;
    let lnf = ln_factorials(n_spins);
    let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    let power = |base: f64, k: usize| -> Option<f64> {
        match (k, base) {
            (0, _) => Some(0.0),
            (_, b) if b <= 0.0 => None,
            (k, b) => Some(k as f64 * b.ln()),
        }
    };
    let amps = (0..=n_spins).map(|k| {
        let ln_binom = 0.5 * (lnf[n_spins] - lnf[k] - lnf[n_spins - k]);
        match (power(c, k), power(s, n_spins - k)) {
            (Some(a), Some(b)) => C64::from_polar((ln_binom + a + b).exp(), -(k as f64) * phi),
            _ => ZERO,
        }
    });
    StateVector::normalized(Subsystem::Spins, DVector::from_iterator(n_spins + 1, amps))
}

/// |π/2, π⟩ ⊗ (|↑⟩ + |↓⟩)/√2.
pub fn initial_state(space: &HilbertSpace) -> Result<StateVector> {
    let spins = coherent_spin_state(space, PI / 2.0, PI)?;
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let cs = StateVector::new(Subsystem::CentralSpin, DVector::from_vec(vec![real(h), real(h)]))?;
    Ok(spins.tensor(&cs, Subsystem::Joint))
}
