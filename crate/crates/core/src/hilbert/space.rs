use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// State of the central spin. Doubles as the branch label of a bound state,
/// since each bound state lives entirely in one central-spin subspace.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CsState {
    Up,
    Down,
}

impl CsState {
    /// Position of this state inside a central-spin doublet (↑ first).
    pub fn offset(self) -> usize {
        match self {
            CsState::Up => 0,
            CsState::Down => 1,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            CsState::Up => CsState::Down,
            CsState::Down => CsState::Up,
        }
    }

    /// Eigenvalue of σz.
    pub fn sign(self) -> f64 {
        match self {
            CsState::Up => 1.0,
            CsState::Down => -1.0,
        }
    }
}

/// Which factor of the full Hilbert space an object acts on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Subsystem {
    /// The N identical spins, symmetric sector (dimension N+1).
    Spins,
    /// The central spin alone (dimension 2).
    CentralSpin,
    /// Identical spins ⊗ central spin.
    Joint,
    /// A single truncated bosonic mode.
    Mode,
    /// Bosonic mode ⊗ central spin.
    ModeJoint,
}

/// Fock basis |n, m⟩ of N identical spins plus the central spin.
///
/// Flat index convention: `k = 2·(n + N/2) + m` with m = 0 for ↑ and 1 for ↓,
/// i.e. the central-spin index runs fastest.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct HilbertSpace {
    n_spins: u32,
}

impl HilbertSpace {
    pub fn new(n_spins: u32) -> Result<Self> {
        if n_spins == 0 {
            return Err(invalid("number of identical spins must be at least 1"));
        }
        Ok(Self { n_spins })
    }

    pub fn n_spins(&self) -> u32 {
        self.n_spins
    }

    /// Total spin S = N/2 of the symmetric sector.
    pub fn total_spin(&self) -> f64 {
        self.n_spins as f64 / 2.0
    }

    pub fn spin_dim(&self) -> usize {
        self.n_spins as usize + 1
    }

    pub fn cs_dim(&self) -> usize {
        2
    }

    pub fn total_dim(&self) -> usize {
        2 * self.spin_dim()
    }

    /// Magnetization label n of the i-th identical-spin basis state.
    pub fn n_at(&self, i: usize) -> f64 {
        i as f64 - self.total_spin()
    }

    /// All n values in ascending order: −N/2, −N/2+1, …, N/2.
    pub fn n_values(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.spin_dim()).map(move |i| self.n_at(i))
    }

    /// Position of n inside the identical-spin factor.
    pub fn spin_index(&self, n: f64) -> Result<usize> {
        let shifted = n + self.total_spin();
        let i = shifted.round();
        if (shifted - i).abs() > 1e-9 || i < 0.0 || i as usize >= self.spin_dim() {
            return Err(invalid(format!("n = {n} is not a Fock label for N = {}", self.n_spins)));
        }
        Ok(i as usize)
    }

    pub fn index(&self, n: f64, m: CsState) -> Result<usize> {
        Ok(2 * self.spin_index(n)? + m.offset())
    }

    /// Inverse of [`HilbertSpace::index`].
    pub fn label(&self, k: usize) -> Result<(f64, CsState)> {
        if k >= self.total_dim() {
            return Err(invalid(format!("flat index {k} out of range")));
        }
        let m = if k.is_multiple_of(2) { CsState::Up } else { CsState::Down };
        Ok((self.n_at(k / 2), m))
    }

    /// Dimension of the factor named by `subsystem`, if it belongs to this space.
    pub fn dim_of(&self, subsystem: Subsystem) -> Option<usize> {
        match subsystem {
            Subsystem::Spins => Some(self.spin_dim()),
            Subsystem::CentralSpin => Some(2),
            Subsystem::Joint => Some(self.total_dim()),
            Subsystem::Mode | Subsystem::ModeJoint => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dimensions() {
        assert_eq!(HilbertSpace::new(180).unwrap().total_dim(), 362);
        assert_eq!(HilbertSpace::new(200).unwrap().total_dim(), 402);
        let s = HilbertSpace::new(1).unwrap();
        assert_eq!(s.total_dim(), 4);
        assert_eq!(s.n_values().collect::<Vec<_>>(), vec![-0.5, 0.5]);
    }

    #[test]
    fn zero_spins_rejected() {
        assert!(matches!(HilbertSpace::new(0), Err(crate::Error::InvalidArgument(_))));
    }

    #[test]
    fn index_map_is_a_bijection() {
        for n_spins in [1, 2, 7, 20] {
            let s = HilbertSpace::new(n_spins).unwrap();
            let mut seen = vec![false; s.total_dim()];
            for n in s.n_values() {
                for m in [CsState::Up, CsState::Down] {
                    let k = s.index(n, m).unwrap();
                    assert!(!seen[k]);
                    seen[k] = true;
                    assert_eq!(s.label(k).unwrap(), (n, m));
                }
            }
            assert!(seen.into_iter().all(|x| x));
        }
    }

    #[test]
    fn off_lattice_labels_rejected() {
        let s = HilbertSpace::new(4).unwrap();
        assert!(s.spin_index(0.5).is_err());
        assert!(s.spin_index(3.0).is_err());
        assert_eq!(s.spin_index(-2.0).unwrap(), 0);
        assert!(s.label(10).is_err());
    }
}
