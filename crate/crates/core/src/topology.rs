//! Mean-field picture of the model.
//!
//! Replacing the collective spin by its coherent-state expectation value
//! turns the Hamiltonian into a two-band Bloch form d(θ, φ)·σ with φ playing
//! the role of a quasi-momentum. The winding of d around the origin as φ
//! sweeps 2π classifies each polar angle θ; the boundaries θ₁, θ₂ locate the
//! protected zero-energy bound states, whose Gaussian profiles and the
//! trivial-phase target state are also built here.

use std::f64::consts::{PI, TAU};

use nalgebra::DVector;
use num_complex::Complex64 as C64;

use crate::error::{invalid, Error, Result};
use crate::hilbert::{CsState, HilbertSpace, ModelParams, StateVector, Subsystem, ZERO};

/// Mean-field vector d with H_mf = d·σ.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DVector3 {
    pub d_x: f64,
    pub d_y: f64,
    pub d_z: f64,
}

impl DVector3 {
    pub fn magnitude(&self) -> f64 {
        (self.d_x * self.d_x + self.d_y * self.d_y + self.d_z * self.d_z).sqrt()
    }

    /// Mean-field gap 2|d|.
    pub fn gap(&self) -> f64 {
        2.0 * self.magnitude()
    }
}

/// d(θ, φ) for a collective spin of N spins.
///
/// d_x = v + w sinθ cosφ, d_y = w sinθ sinφ + u, d_z = v_z + w_z (N/2) cosθ.
pub fn d_components(theta: f64, phi: f64, params: &ModelParams, n_spins: u32) -> Result<DVector3> {
    check_polar(theta)?;
    let s = theta.sin();
    Ok(DVector3 {
        d_x: params.v + params.w * s * phi.cos(),
        d_y: params.w * s * phi.sin() + params.u,
        d_z: params.v_z + params.w_z * 0.5 * n_spins as f64 * theta.cos(),
    })
}

fn check_polar(theta: f64) -> Result<()> {
    if !(0.0..=PI).contains(&theta) {
        return Err(invalid(format!("polar angle {theta} outside [0, π]")));
    }
    Ok(())
}

/// Topological classification of a circuit of fixed θ (or fixed |α|).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Winding {
    Trivial,
    Nontrivial,
    /// The circuit passes through the origin: the bound-state location.
    Boundary,
}

impl Winding {
    pub fn from_sign(x: f64) -> Self {
        if x > 0.0 {
            Winding::Nontrivial
        } else if x < 0.0 {
            Winding::Trivial
        } else {
            Winding::Boundary
        }
    }

    pub fn value(self) -> Option<i32> {
        match self {
            Winding::Trivial => Some(0),
            Winding::Nontrivial => Some(1),
            Winding::Boundary => None,
        }
    }
}

/// Closed-form winding ½[1 + sgn(w sinθ − v)] of the unextended model.
pub fn winding_analytic(theta: f64, params: &ModelParams) -> Result<Winding> {
    check_polar(theta)?;
    if params.u != 0.0 {
        return Err(invalid("closed-form winding requires u = 0; use winding_numeric"));
    }
    Ok(Winding::from_sign(params.w * theta.sin() - params.v))
}

/// Trapezoidal evaluation of (1/2π)∮ (d̂ × ∂_φ d̂)_z dφ.
///
/// Accepts u ≠ 0. Chiral-breaking terms are ignored since only the planar
/// components enter the winding. The accumulated value must lie within 0.1 of
/// an integer, otherwise the grid is too coarse for this θ.
pub fn winding_numeric(theta: f64, params: &ModelParams, grid_points: usize) -> Result<i32> {
    check_polar(theta)?;
    if grid_points < 64 {
        return Err(invalid(format!("winding integral needs at least 64 points, got {grid_points}")));
    }
    let radius = params.w * theta.sin();
    let offset = params.v.hypot(params.u);
    let min_gap = (offset - radius).abs();
    if min_gap <= 1e-12 * params.w.max(offset) {
        return Err(Error::SingularInput(format!("mean-field gap closes on the circle at θ = {theta}")));
    }
    let h = TAU / grid_points as f64;
    // Uniform periodic grid: the trapezoid rule reduces to a plain sum.
    let total: f64 = (0..grid_points)
        .map(|k| {
            let phi = k as f64 * h;
            let (dx, dy) = (params.v + radius * phi.cos(), params.u + radius * phi.sin());
            let (ddx, ddy) = (-radius * phi.sin(), radius * phi.cos());
            (dx * ddy - dy * ddx) / (dx * dx + dy * dy)
        })
        .sum::<f64>()
        * h;
    let w = total / TAU;
    let rounded = w.round();
    if (w - rounded).abs() > 0.1 {
        return Err(invalid(format!("winding integral {w} not resolved on {grid_points} points")));
    }
    Ok(rounded as i32)
}

/// Location and width of a protected bound state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundStateDescriptor {
    /// Distance of the center from n = 0, (N/2)√(1 − (v/w)²).
    pub n_b: f64,
    /// Standard deviation of the amplitude Gaussian.
    pub sigma: f64,
    pub theta_1: f64,
    pub theta_2: f64,
    pub branch: CsState,
}

impl BoundStateDescriptor {
    /// Signed Fock-space center of this branch.
    ///
    /// With H containing S₊σ₋ + S₋σ₊, the ↑ zero mode grows from the south
    /// edge and peaks at +n_b (polar angle θ₁); the ↓ mode is its mirror
    /// image at −n_b (θ₂).
    pub fn center(&self) -> f64 {
        match self.branch {
            CsState::Up => self.n_b,
            CsState::Down => -self.n_b,
        }
    }

    /// Polar angle of the center, n = (N/2) cosθ.
    pub fn polar_angle(&self) -> f64 {
        match self.branch {
            CsState::Up => self.theta_1,
            CsState::Down => self.theta_2,
        }
    }
}

fn require_nontrivial(params: &ModelParams) -> Result<f64> {
    params.validate()?;
    let ratio = params.v / params.w;
    if !(params.v > 0.0) {
        return Err(invalid(format!("bound-state formulas need v > 0, got {}", params.v)));
    }
    if ratio >= 1.0 {
        return Err(Error::Phase(format!("no bound states: trivial phase (v/w = {ratio})")));
    }
    Ok(ratio)
}

/// n_b = (N/2)√(1 − r²), σ = √(N r² / (4√(1 − r²))) with r = v/w.
pub fn bound_descriptor(space: &HilbertSpace, params: &ModelParams, branch: CsState) -> Result<BoundStateDescriptor> {
    let r = require_nontrivial(params)?;
    let n = space.n_spins() as f64;
    let root = (1.0 - r * r).sqrt();
    let theta_1 = r.asin();
    Ok(BoundStateDescriptor {
        n_b: 0.5 * n * root,
        sigma: (n * r * r / (4.0 * root)).sqrt(),
        theta_1,
        theta_2: PI - theta_1,
        branch,
    })
}

/// Discrete Gaussian e^{iπn} e^{−(n−c)²/(4σ²)} over the Fock grid, normalized
/// by summation.
fn gaussian_profile(space: &HilbertSpace, center: f64, sigma: f64) -> Vec<C64> {
    space.n_values().map(|n| C64::from_polar((-(n - center).powi(2) / (4.0 * sigma * sigma)).exp(), PI * n)).collect()
}

/// Closed-form Gaussian zero mode attached to its central-spin branch.
pub fn bound_state_analytic(space: &HilbertSpace, params: &ModelParams, branch: CsState) -> Result<StateVector> {
    let desc = bound_descriptor(space, params, branch)?;
    if desc.sigma < 1.0 {
        return Err(invalid(format!("bound-state width {} below one Fock unit", desc.sigma)));
    }
    let profile = gaussian_profile(space, desc.center(), desc.sigma);
    let mut amps = DVector::from_element(space.total_dim(), ZERO);
    for (i, a) in profile.into_iter().enumerate() {
        amps[2 * i + branch.offset()] = a;
    }
    StateVector::normalized(Subsystem::Joint, amps)
}

/// Harmonic ground state of the upper band in the trivial phase,
/// B₀(n) ∝ e^{iπn} e^{−√(1−w/v) n²/N}.
pub fn trivial_target_state(space: &HilbertSpace, params: &ModelParams) -> Result<StateVector> {
    params.validate()?;
    if params.v <= params.w {
        return Err(Error::Phase(format!(
            "harmonic expansion needs the trivial phase v > w (v = {}, w = {})",
            params.v, params.w
        )));
    }
    let sigma = trivial_target_sigma(space, params);
    let profile = gaussian_profile(space, 0.0, sigma);
    StateVector::normalized(Subsystem::Spins, DVector::from_vec(profile))
}

/// Amplitude standard deviation √(N / (4√(1 − w/v))) of the trivial target.
pub fn trivial_target_sigma(space: &HilbertSpace, params: &ModelParams) -> f64 {
    let n = space.n_spins() as f64;
    (n / (4.0 * (1.0 - params.w / params.v).sqrt())).sqrt()
}

/// Band of the mean-field dispersion.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Band {
    Upper,
    Lower,
}

/// E± = ±|d| evaluated at Fock label n via n = (N/2) cosθ. For u = v_z = w_z = 0
/// this is ±√(v² + w²c² + 2vw c cosφ) with c = √(1 − 4n²/N²).
pub fn band_energy(n: f64, phi: f64, params: &ModelParams, n_spins: u32, band: Band) -> Result<f64> {
    let half = 0.5 * n_spins as f64;
    if n.abs() > half {
        return Err(invalid(format!("|n| = {} exceeds N/2 = {half}", n.abs())));
    }
    let c = (1.0 - (n / half).powi(2)).max(0.0).sqrt();
    let (v, w, u) = (params.v, params.w, params.u);
    let d_z = params.v_z + params.w_z * n;
    let e2 = v * v + u * u + w * w * c * c + 2.0 * w * c * (v * phi.cos() + u * phi.sin()) + d_z * d_z;
    let e = e2.max(0.0).sqrt();
    Ok(match band {
        Band::Upper => e,
        Band::Lower => -e,
    })
}

/// Quadratic expansion of the upper band about (n, φ) = (0, π) in the trivial
/// phase: (v − w) + vw/(2(v − w)) (φ − π)² + 2w n²/N².
pub fn harmonic_band_energy(n: f64, phi: f64, params: &ModelParams, n_spins: u32) -> Result<f64> {
    let (v, w) = (params.v, params.w);
    if v <= w {
        return Err(Error::Phase("harmonic expansion needs v > w".into()));
    }
    let nn = n_spins as f64;
    Ok((v - w) + v * w / (2.0 * (v - w)) * (phi - PI).powi(2) + 2.0 * w * n * n / (nn * nn))
}

/// ⟨σx⟩ of an ideal Bell-cat built from two Gaussians at ±n_b:
/// e^{−n_b²/(2σ²)}.
pub fn predicted_cs_coherence(n_b: f64, sigma: f64) -> Result<f64> {
    if !(sigma > 0.0) {
        return Err(invalid(format!("width must be positive, got {sigma}")));
    }
    Ok((-n_b * n_b / (2.0 * sigma * sigma)).exp())
}

/// Winding ½[1 + sgn(w|α| − v)] of the bosonic-mode mean-field Hamiltonian.
pub fn winding_bosonic(alpha_mag: f64, v: f64, w: f64) -> Result<Winding> {
    if !(alpha_mag >= 0.0) {
        return Err(invalid(format!("|α| must be non-negative, got {alpha_mag}")));
    }
    Ok(Winding::from_sign(w * alpha_mag - v))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(v: f64) -> ModelParams {
        ModelParams::new(v, 1.0).unwrap()
    }

    #[test]
    fn d_vector_examples() {
        let d = d_components(PI / 2.0, PI, &params(0.7), 100).unwrap();
        assert!((d.d_x + 0.3).abs() < 1e-15 && d.d_y.abs() < 1e-15 && d.d_z == 0.0);
        let d = d_components(0.7f64.asin(), PI, &params(0.7), 100).unwrap();
        assert!(d.magnitude() < 1e-15);
        for k in [0.0, 0.4, 2.0, 5.5] {
            let d = d_components(PI / 2.0, k, &params(0.3), 10).unwrap();
            assert!((d.d_x - (0.3 + k.cos())).abs() < 1e-15);
            assert!((d.d_y - k.sin()).abs() < 1e-15);
        }
        assert!(d_components(3.5, 0.0, &params(0.3), 10).is_err());
    }

    #[test]
    fn analytic_winding_examples() {
        assert_eq!(winding_analytic(PI / 2.0, &params(0.7)).unwrap(), Winding::Nontrivial);
        assert_eq!(winding_analytic(PI / 2.0, &params(1.3)).unwrap(), Winding::Trivial);
        let theta = 0.4;
        assert_eq!(winding_analytic(theta, &params(theta.sin())).unwrap(), Winding::Boundary);
        assert!(winding_analytic(1.0, &params(0.5).with_u(0.1)).is_err());
    }

    #[test]
    fn numeric_winding_examples() {
        assert_eq!(winding_numeric(PI / 2.0, &params(0.7), 512).unwrap(), 1);
        assert_eq!(winding_numeric(0.3, &params(0.7), 512).unwrap(), 0);
        assert_eq!(winding_numeric(PI / 2.0, &params(0.5).with_u(0.5), 512).unwrap(), 1);
        assert_eq!(winding_numeric(PI / 2.0, &params(0.8).with_u(0.8), 512).unwrap(), 0);
        assert!(matches!(winding_numeric(PI / 2.0, &params(1.0), 512), Err(Error::SingularInput(_))));
        assert!(winding_numeric(PI / 2.0, &params(0.7), 16).is_err());
    }

    #[test]
    fn descriptor_values() {
        let sp = HilbertSpace::new(180).unwrap();
        let d = bound_descriptor(&sp, &params(0.7), CsState::Up).unwrap();
        assert!((d.n_b - 64.27285585688564).abs() < 1e-9);
        assert!((d.sigma - 5.556633499954591).abs() < 1e-9);
        assert!((d.theta_1 - 0.7f64.asin()).abs() < 1e-15);
        assert!((d.theta_1 + d.theta_2 - PI).abs() < 1e-15);
        let d200 = bound_descriptor(&HilbertSpace::new(200).unwrap(), &params(0.7), CsState::Down).unwrap();
        assert!((d200.n_b - 71.4142842854285).abs() < 1e-9);
        assert!(matches!(bound_descriptor(&sp, &params(1.3), CsState::Up), Err(Error::Phase(_))));
        assert!(matches!(bound_descriptor(&sp, &params(1.0), CsState::Up), Err(Error::Phase(_))));
    }

    #[test]
    fn small_v_limit_goes_to_edges() {
        let sp = HilbertSpace::new(100).unwrap();
        let d = bound_descriptor(&sp, &params(1e-6), CsState::Up).unwrap();
        assert!((d.n_b - 50.0).abs() < 1e-9);
        assert!(d.sigma < 1e-4);
    }

    #[test]
    fn analytic_bound_state_lives_in_one_branch() {
        let sp = HilbertSpace::new(180).unwrap();
        for branch in [CsState::Up, CsState::Down] {
            let b = bound_state_analytic(&sp, &params(0.7), branch).unwrap();
            let p = b.probabilities();
            let other: f64 = p.iter().skip(branch.flipped().offset()).step_by(2).sum();
            assert_eq!(other, 0.0);
            let (k, _) = p.iter().enumerate().fold((0, 0.0), |a, (k, &x)| if x > a.1 { (k, x) } else { a });
            let (n, m) = sp.label(k).unwrap();
            assert_eq!(m, branch);
            assert!((n - branch.sign() * 64.27).abs() <= 1.0);
        }
        assert!(bound_state_analytic(&sp, &params(1e-3), CsState::Up).is_err());
    }

    #[test]
    fn trivial_target_width() {
        let sp = HilbertSpace::new(200).unwrap();
        let sigma = trivial_target_sigma(&sp, &params(1.3));
        assert!((sigma - 10.202122).abs() < 1e-5);
        assert!(matches!(trivial_target_state(&sp, &params(0.9)), Err(Error::Phase(_))));
        assert!(matches!(trivial_target_state(&sp, &params(1.0)), Err(Error::Phase(_))));
    }

    #[test]
    fn band_energy_examples() {
        let e = band_energy(0.0, PI, &params(1.3), 100, Band::Upper).unwrap();
        assert!((e - 0.3).abs() < 1e-12);
        let e = band_energy(0.0, PI, &params(1.3), 100, Band::Lower).unwrap();
        assert!((e + 0.3).abs() < 1e-12);
        assert!(band_energy(0.0, PI, &params(1.0), 100, Band::Upper).unwrap().abs() < 1e-12);
        assert!(band_energy(51.0, 0.0, &params(1.0), 100, Band::Upper).is_err());
    }

    #[test]
    fn coherence_prediction() {
        assert_eq!(predicted_cs_coherence(0.0, 3.0).unwrap(), 1.0);
        assert!((predicted_cs_coherence(2.0, 2.0).unwrap() - (-0.5f64).exp()).abs() < 1e-15);
        let c = predicted_cs_coherence(64.27285585688564, 5.556633499954591).unwrap();
        assert!(c < 1e-28);
        assert!(predicted_cs_coherence(1.0, 0.0).is_err());
    }

    #[test]
    fn bosonic_winding() {
        assert_eq!(winding_bosonic(8.0, 7.0, 1.0).unwrap(), Winding::Nontrivial);
        assert_eq!(winding_bosonic(6.0, 7.0, 1.0).unwrap(), Winding::Trivial);
        assert_eq!(winding_bosonic(7.0, 7.0, 1.0).unwrap(), Winding::Boundary);
        assert!(winding_bosonic(-1.0, 7.0, 1.0).is_err());
    }
}
