//! Exact diagonalization, zero-mode resolution, parity labels and Fock–energy
//! probability maps.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use crate::error::{invalid, Error, Result};
use crate::hilbert::{canonicalize_phase, CsState, HilbertSpace, Operator, StateVector, Subsystem, ONE, ZERO};

/// Full spectrum with eigenvalues ascending and orthonormal eigenvector
/// columns, each with its largest-magnitude component real and positive.
#[derive(Clone, Debug)]
pub struct EigenSystem {
    subsystem: Subsystem,
    eigenvalues: Vec<f64>,
    eigenvectors: DMatrix<C64>,
}

impl EigenSystem {
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &DMatrix<C64> {
        &self.eigenvectors
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn subsystem(&self) -> Subsystem {
        self.subsystem
    }

    pub fn eigenvector(&self, k: usize) -> StateVector {
        StateVector::from_raw(self.subsystem, self.eigenvectors.column(k).into_owned())
    }

    /// Indices sorted by |E|, ties by index.
    pub fn indices_by_magnitude(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.len()).collect();
        idx.sort_by(|&a, &b| self.eigenvalues[a].abs().total_cmp(&self.eigenvalues[b].abs()).then(a.cmp(&b)));
        idx
    }

    /// max_k |E_k + E_{D−1−k}|; zero for an exactly chiral spectrum.
    pub fn mirror_mismatch(&self) -> f64 {
        let d = self.len();
        (0..d).map(|k| (self.eigenvalues[k] + self.eigenvalues[d - 1 - k]).abs()).fold(0.0, f64::max)
    }
}

/// Dense Hermitian eigendecomposition.
pub fn diagonalize(h: &Operator) -> Result<EigenSystem> {
    let err = h.hermiticity_error();
    if err > 1e-12 {
        return Err(invalid(format!("operator is not Hermitian (relative error {err:e})")));
    }
    let sym = (h.matrix() + h.matrix().adjoint()) * C64::new(0.5, 0.0);
    let eig = sym.symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]).then(a.cmp(&b)));
    let d = h.dim();
    let mut vectors = DMatrix::from_element(d, d, ZERO);
    for (col, &k) in order.iter().enumerate() {
        let mut v: Vec<C64> = eig.eigenvectors.column(k).iter().cloned().collect();
        canonicalize_phase(&mut v);
        vectors.set_column(col, &DVector::from_vec(v));
    }
    Ok(EigenSystem {
        subsystem: h.subsystem(),
        eigenvalues: order.iter().map(|&k| eig.eigenvalues[k]).collect(),
        eigenvectors: vectors,
    })
}

/// Eigen-decomposition of a 2×2 Hermitian matrix [[a, b], [b*, d]]:
/// returns (λ_max, v_max, λ_min, v_min).
fn hermitian_2x2(a: f64, b: C64, d: f64) -> (f64, [C64; 2], f64, [C64; 2]) {
    let mean = 0.5 * (a + d);
    let half = 0.5 * (a - d);
    let r = (half * half + b.norm_sqr()).sqrt();
    let (hi, lo) = (mean + r, mean - r);
    if b.norm() <= 1e-300 {
        return if a >= d { (a, [ONE, ZERO], d, [ZERO, ONE]) } else { (d, [ZERO, ONE], a, [ONE, ZERO]) };
    }
    let normed = |x: C64, y: C64| {
        let n = (x.norm_sqr() + y.norm_sqr()).sqrt();
        [x / n, y / n]
    };
    // (b, λ − a) solves the first row; pick the better-conditioned form.
    let v_hi = if half >= 0.0 { normed(C64::new(hi - d, 0.0), b.conj()) } else { normed(b, C64::new(hi - a, 0.0)) };
    let v_lo = [-v_hi[1].conj(), v_hi[0].conj()];
    (hi, v_hi, lo, v_lo)
}

fn combine(x: &DVector<C64>, y: &DVector<C64>, c: [C64; 2]) -> DVector<C64> {
    x * c[0] + y * c[1]
}

/// Rotates two orthonormal vectors within their span so that σz (sign ±1 by
/// index parity) is diagonal. Returns the σz = +1-like vector first.
pub(crate) fn resolve_sigma_z(x: &DVector<C64>, y: &DVector<C64>) -> ([DVector<C64>; 2], [f64; 2]) {
    let sz_inner = |a: &DVector<C64>, b: &DVector<C64>| -> C64 {
        a.iter()
            .zip(b.iter())
            .enumerate()
            .map(|(k, (p, q))| if k % 2 == 0 { p.conj() * q } else { -(p.conj() * q) })
            .sum()
    };
    let (hi, v_hi, lo, v_lo) = hermitian_2x2(sz_inner(x, x).re, sz_inner(x, y), sz_inner(y, y).re);
    let mut first = combine(x, y, v_hi);
    let mut second = combine(x, y, v_lo);
    canonicalize_phase(first.as_mut_slice());
    canonicalize_phase(second.as_mut_slice());
    ([first, second], [hi, lo])
}

/// The protected pair, each member an eigenstate of σz.
#[derive(Clone, Debug)]
pub struct ZeroModePair {
    /// ⟨σz⟩ = +1 member.
    pub up: StateVector,
    /// ⟨σz⟩ = −1 member.
    pub down: StateVector,
    /// The two eigenvalues closest to zero, ascending.
    pub energies: [f64; 2],
    /// Smallest |E| outside the pair.
    pub bulk_gap: f64,
    /// ⟨σz⟩ of (up, down) after rotation.
    pub sigma_z: [f64; 2],
}

impl ZeroModePair {
    pub fn member(&self, branch: CsState) -> &StateVector {
        match branch {
            CsState::Up => &self.up,
            CsState::Down => &self.down,
        }
    }
}

/// Accepts the two smallest-|E| states as a mid-gap pair when
/// max |E_pair| < 0.1 · (third-smallest |E|).
pub const ZERO_MODE_RATIO: f64 = 0.1;

/// Finds the mid-gap pair and rotates it into σz eigenstates.
pub fn zero_modes(eig: &EigenSystem) -> Result<ZeroModePair> {
    if !matches!(eig.subsystem(), Subsystem::Joint | Subsystem::ModeJoint) {
        return Err(invalid("zero modes need a spectrum of a central-spin joint space"));
    }
    if eig.len() < 3 {
        return Err(invalid("spectrum too small to separate a zero-mode pair"));
    }
    let order = eig.indices_by_magnitude();
    let (a, b) = (order[0], order[1]);
    let pair = eig.eigenvalues[a].abs().max(eig.eigenvalues[b].abs());
    let bulk = eig.eigenvalues[order[2]].abs();
    if !(pair < ZERO_MODE_RATIO * bulk) {
        return Err(Error::Phase(format!(
            "no zero modes: trivial phase or broken chiral symmetry (pair |E| = {pair:e}, bulk |E| = {bulk:e})"
        )));
    }
    let x = eig.eigenvectors.column(a).into_owned();
    let y = eig.eigenvectors.column(b).into_owned();
    let ([up, down], sigma_z) = resolve_sigma_z(&x, &y);
    let mut energies = [eig.eigenvalues[a], eig.eigenvalues[b]];
    energies.sort_by(f64::total_cmp);
    Ok(ZeroModePair {
        up: StateVector::from_raw(eig.subsystem(), up),
        down: StateVector::from_raw(eig.subsystem(), down),
        energies,
        bulk_gap: bulk,
        sigma_z,
    })
}

/// Permutation |n, ↑⟩ ↦ |−n, ↓⟩, |n, ↓⟩ ↦ |−n, ↑⟩.
pub fn parity_operator(space: &HilbertSpace) -> Operator {
    let d = space.total_dim();
    let mut m = DMatrix::from_element(d, d, ZERO);
    for k in 0..d {
        m[(parity_image(space, k), k)] = ONE;
    }
    Operator::new(Subsystem::Joint, m).expect("square by construction")
}

fn parity_image(space: &HilbertSpace, k: usize) -> usize {
    let i = k / 2;
    2 * (space.spin_dim() - 1 - i) + (1 - k % 2)
}

/// P applied to a joint state without building the matrix.
pub fn apply_parity(space: &HilbertSpace, state: &StateVector) -> Result<StateVector> {
    if state.subsystem() != Subsystem::Joint || state.dim() != space.total_dim() {
        return Err(invalid("parity acts on joint states of this space"));
    }
    let mut out = DVector::from_element(state.dim(), ZERO);
    for (k, a) in state.amplitudes().iter().enumerate() {
        out[parity_image(space, k)] = *a;
    }
    Ok(StateVector::from_raw(Subsystem::Joint, out))
}

pub fn parity_expectation(space: &HilbertSpace, state: &StateVector) -> Result<f64> {
    let image = apply_parity(space, state)?;
    Ok(state.inner(&image)?.re)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
    Mixed,
}

/// Labels a state by ⟨P⟩ within `tol` of ±1.
pub fn classify_parity(space: &HilbertSpace, state: &StateVector, tol: f64) -> Result<Parity> {
    let p = parity_expectation(space, state)?;
    Ok(if (p - 1.0).abs() <= tol {
        Parity::Even
    } else if (p + 1.0).abs() <= tol {
        Parity::Odd
    } else {
        Parity::Mixed
    })
}

/// Even and odd superpositions of a zero-mode pair.
pub fn parity_resolved(space: &HilbertSpace, pair: &ZeroModePair) -> Result<(StateVector, StateVector)> {
    let x = pair.up.amplitudes();
    let y = pair.down.amplitudes();
    let px = apply_parity(space, &pair.up)?;
    let py = apply_parity(space, &pair.down)?;
    let (_, v_even, _, v_odd) =
        hermitian_2x2(x.dotc(px.amplitudes()).re, x.dotc(py.amplitudes()), y.dotc(py.amplitudes()).re);
    let finish = |c| {
        let mut v = combine(x, y, c);
        canonicalize_phase(v.as_mut_slice());
        StateVector::from_raw(Subsystem::Joint, v)
    };
    Ok((finish(v_even), finish(v_odd)))
}

/// Instantaneous eigenstate tracked by the generation protocol: the even
/// superposition of the zero modes in the nontrivial phase, otherwise the
/// lowest positive-energy even-parity eigenstate.
pub fn bell_cat_target(space: &HilbertSpace, eig: &EigenSystem) -> Result<StateVector> {
    if let Ok(pair) = zero_modes(eig) {
        return Ok(parity_resolved(space, &pair)?.0);
    }
    for k in 0..eig.len() {
        if eig.eigenvalues[k] <= 0.0 {
            continue;
        }
        let v = eig.eigenvector(k);
        if parity_expectation(space, &v)? > 0.5 {
            return Ok(v);
        }
    }
    Err(Error::Phase("no positive-energy even-parity eigenstate".into()))
}

/// P_m(n, E_k) = |⟨E_k|n, m⟩|²; rows indexed by n (ascending), columns by k.
pub fn fock_energy_map(eig: &EigenSystem, space: &HilbertSpace, branch: CsState) -> Result<DMatrix<f64>> {
    if eig.subsystem() != Subsystem::Joint || eig.len() != space.total_dim() {
        return Err(invalid("eigensystem does not belong to this space"));
    }
    let vecs = &eig.eigenvectors;
    Ok(DMatrix::from_fn(space.spin_dim(), eig.len(), |i, k| vecs[(2 * i + branch.offset(), k)].norm_sqr()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{build_hamiltonian, initial_state, ModelParams};

    fn system(n: u32, v: f64) -> (HilbertSpace, EigenSystem) {
        let sp = HilbertSpace::new(n).unwrap();
        let h = build_hamiltonian(&sp, &ModelParams::new(v, 1.0).unwrap()).unwrap();
        (sp, diagonalize(&h).unwrap())
    }

    #[test]
    fn n1_brute_force_spectrum() {
        let (_, eig) = system(1, 0.0);
        for (got, want) in eig.eigenvalues().iter().zip([-2.0, 0.0, 0.0, 2.0]) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn non_hermitian_rejected() {
        let mut m = DMatrix::from_element(3, 3, ZERO);
        m[(0, 1)] = ONE;
        let op = Operator::new(Subsystem::Joint, m).unwrap();
        assert!(matches!(diagonalize(&op), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn eigenpairs_are_accurate_and_orthonormal() {
        let sp = HilbertSpace::new(30).unwrap();
        let h = build_hamiltonian(&sp, &ModelParams::new(0.6, 1.0).unwrap().with_u(0.2)).unwrap();
        let eig = diagonalize(&h).unwrap();
        let scale = h.matrix().norm();
        for k in 0..eig.len() {
            let x = eig.eigenvectors().column(k);
            let r = h.matrix() * x - x * C64::new(eig.eigenvalues()[k], 0.0);
            assert!(r.norm() < 1e-9 * scale);
        }
        let gram = eig.eigenvectors().adjoint() * eig.eigenvectors();
        let id = DMatrix::<C64>::identity(eig.len(), eig.len());
        assert!((gram - id).iter().all(|x| x.norm() < 1e-10));
        assert!(eig.eigenvalues().windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn chiral_spectrum_mirrors() {
        let (_, eig) = system(40, 0.8);
        assert!(eig.mirror_mismatch() < 1e-9);
    }

    #[test]
    fn parity_is_an_involution_commuting_with_h() {
        let sp = HilbertSpace::new(11).unwrap();
        let p = parity_operator(&sp);
        let pp = p.compose(&p).unwrap();
        assert_eq!(pp.matrix(), &DMatrix::<C64>::identity(sp.total_dim(), sp.total_dim()));
        let h = build_hamiltonian(&sp, &ModelParams::new(0.7, 1.0).unwrap()).unwrap();
        assert!(p.commutator(&h).unwrap().matrix().iter().all(|x| x.norm() < 1e-12));
        let psi = initial_state(&sp).unwrap();
        let direct = p.apply(&psi).unwrap();
        assert_eq!(&direct, apply_parity(&sp, &psi).unwrap().amplitudes());
    }

    #[test]
    fn initial_state_is_even() {
        let sp = HilbertSpace::new(50).unwrap();
        let psi = initial_state(&sp).unwrap();
        assert!((parity_expectation(&sp, &psi).unwrap() - 1.0).abs() < 1e-10);
        assert_eq!(classify_parity(&sp, &psi, 1e-8).unwrap(), Parity::Even);
    }

    #[test]
    fn zero_mode_pair_structure() {
        let (sp, eig) = system(60, 0.5);
        let pair = zero_modes(&eig).unwrap();
        assert!((pair.sigma_z[0] - 1.0).abs() < 1e-8 && (pair.sigma_z[1] + 1.0).abs() < 1e-8);
        assert!(pair.energies[0].abs() < 1e-6 && pair.energies[1].abs() < 1e-6);
        let (even, odd) = parity_resolved(&sp, &pair).unwrap();
        assert_eq!(classify_parity(&sp, &even, 1e-8).unwrap(), Parity::Even);
        assert_eq!(classify_parity(&sp, &odd, 1e-8).unwrap(), Parity::Odd);
        assert_eq!(classify_parity(&sp, &pair.up, 1e-8).unwrap(), Parity::Mixed);
        assert!(parity_expectation(&sp, &pair.up).unwrap().abs() < 1e-6);
    }

    #[test]
    fn trivial_phase_has_no_zero_modes() {
        let (_, eig) = system(60, 1.3);
        assert!(matches!(zero_modes(&eig), Err(Error::Phase(_))));
    }

    #[test]
    fn fock_energy_rows_are_complete() {
        let (sp, eig) = system(24, 0.7);
        for branch in [CsState::Up, CsState::Down] {
            let map = fock_energy_map(&eig, &sp, branch).unwrap();
            for i in 0..sp.spin_dim() {
                assert!((map.row(i).sum() - 1.0).abs() < 1e-10);
            }
            assert!(map.iter().all(|&x| x >= 0.0));
        }
    }

    #[test]
    fn two_by_two_solver() {
        let (hi, v, lo, w) = hermitian_2x2(0.3, C64::new(0.2, -0.4), -0.1);
        for (lam, vec) in [(hi, v), (lo, w)] {
            let r0 = C64::new(0.3, 0.0) * vec[0] + C64::new(0.2, -0.4) * vec[1] - vec[0] * lam;
            let r1 = C64::new(0.2, 0.4) * vec[0] + C64::new(-0.1, 0.0) * vec[1] - vec[1] * lam;
            assert!(r0.norm() < 1e-14 && r1.norm() < 1e-14);
        }
        assert!(hi > lo);
    }
}
