//! Reduced internal-state density matrices of the atoms after tracing out the
//! cavity fields and the translational motion.
//!
//! Two-qubit matrices are always expressed in the canonical product basis
//! `[|++⟩, |+−⟩, |−+⟩, |−−⟩]` (qubit A first).

use nalgebra::{Matrix2, Matrix4};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::packets::{decay_exponent, GaussianPacket};
use crate::params::{cubic_phase, superposition_weights, DerivedConstants, PhysicalParams};

/// Time-dependent scalars shared by every coefficient family.
///
/// Built with [`ChannelFactors::at`]; the `without_*` adaptors switch off
/// individual physical effects for limit checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelFactors {
    /// Ω₀t
    pub rabi_phase: f64,
    /// Γ(t)
    pub gamma_exp: f64,
    /// ωt
    pub optical_phase: f64,
    /// m·a₀²·t³/ħ
    pub cubic_phase: f64,
}

impl ChannelFactors {
    pub fn at(t: f64, p: &PhysicalParams, c: &DerivedConstants) -> Self {
        let pkt = GaussianPacket::from_params(p);
        Self {
            rabi_phase: c.omega0 * t,
            gamma_exp: decay_exponent(t, &pkt, c),
            optical_phase: c.omega * t,
            cubic_phase: cubic_phase(t, c),
        }
    }

    /// Drops the translational decay, leaving lossless Jaynes-Cummings dynamics.
    pub fn without_decay(self) -> Self {
        Self { gamma_exp: 0.0, ..self }
    }

    pub fn without_optical_phase(self) -> Self {
        Self { optical_phase: 0.0, ..self }
    }

    /// Real part of ⟨φ⁻|φ⁺⟩, i.e. cos(Ω₀t)·e^{−Γ}.
    fn rabi_visibility(&self) -> f64 {
        self.rabi_phase.cos() * (-self.gamma_exp).exp()
    }

    /// cos²(Ω₀t/2)·e^{−Γ/2}, the envelope of every two-atom coherence.
    fn pair_coherence(&self) -> f64 {
        let h = (0.5 * self.rabi_phase).cos();
        h * h * (-0.5 * self.gamma_exp).exp()
    }
}

/// Coefficients of the reduced matrix for the `cos γ|+−⟩ + sin γ|−+⟩` family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoeffsPsi {
    pub a1: f64,
    pub a2: f64,
    pub a3: Complex64,
    pub a4: f64,
}

impl CoeffsPsi {
    pub fn from_factors(f: &ChannelFactors, gamma: f64) -> Self {
        let (s, c) = superposition_weights(gamma);
        let vis = f.rabi_visibility();
        Self {
            a1: 0.5 * c * c * (1.0 + vis),
            a2: 0.5 * s * s * (1.0 + vis),
            a3: Complex64::from(s * c * f.pair_coherence()),
            a4: 0.5 * (1.0 - vis),
        }
    }

    pub fn to_xstate(&self) -> XState {
        XState {
            diag: [0.0, self.a1, self.a2, self.a4],
            inner_coherence: self.a3,
            outer_coherence: Complex64::new(0.0, 0.0),
        }
    }
}

/// Coefficients of the reduced matrix for the `cos γ|++⟩ + sin γ|−−⟩` family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoeffsPhi {
    /// ⟨++|ρ|−−⟩
    pub b1: Complex64,
    pub b2: f64,
    pub b3: f64,
    /// Equal to `b3` because both atoms start at the same distance from a node.
    pub b4: f64,
    pub b5: f64,
}

impl CoeffsPhi {
    pub fn from_factors(f: &ChannelFactors, gamma: f64) -> Self {
        let (s, c) = superposition_weights(gamma);
        let vis = f.rabi_visibility();
        let c2 = c * c;
        // |++⟩ carries two excitations, so it picks up e^{-iϑ₀} once per atom;
        // each ground-packet overlap adds e^{i m a₀² t³/(4ħ)}.
        let phase = -(2.0 * f.optical_phase - f.cubic_phase / 6.0);
        let b3 = 0.25 * c2 * (1.0 - vis * vis);
        Self {
            b1: Complex64::from_polar(s * c * f.pair_coherence(), phase),
            b2: 0.25 * c2 * (1.0 + vis) * (1.0 + vis),
            b3,
            b4: b3,
            b5: s * s + 0.25 * c2 * (1.0 - vis) * (1.0 - vis),
        }
    }

    /// Matrix exactly as laid out in the ordered basis `(|+−⟩, |++⟩, |−−⟩, |−+⟩)`
    /// that makes the φ family block diagonal.
    #[rustfmt::skip]
    pub fn block_form(&self) -> Matrix4<Complex64> {
        let r = Complex64::from;
        let z = Complex64::new(0.0, 0.0);
        Matrix4::new(
            r(self.b3), z, z, z,
            z, r(self.b2), self.b1, z,
            z, self.b1.conj(), r(self.b5), z,
            z, z, z, r(self.b4),
        )
    }

    pub fn to_xstate(&self) -> XState {
        XState::from_matrix(&to_canonical(&self.block_form(), &BLOCK_ORDER))
    }
}

/// Canonical index of each element of the `(|+−⟩, |++⟩, |−−⟩, |−+⟩)` basis.
const BLOCK_ORDER: [usize; 4] = [1, 0, 3, 2];

/// Re-expresses a matrix given in a permuted basis in canonical order.
/// `order[i]` is the canonical index of the i-th basis vector of `m`.
pub fn to_canonical(m: &Matrix4<Complex64>, order: &[usize; 4]) -> Matrix4<Complex64> {
    let mut out = Matrix4::zeros();
    for i in 0..4 {
        for j in 0..4 {
            out[(order[i], order[j])] = m[(i, j)];
        }
    }
    out
}

/// Two-qubit density matrix whose only off-diagonal entries lie on the
/// anti-diagonal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct XState {
    pub diag: [f64; 4],
    /// ⟨+−|ρ|−+⟩
    pub inner_coherence: Complex64,
    /// ⟨++|ρ|−−⟩
    pub outer_coherence: Complex64,
}

impl XState {
    /// Reads the X-structure entries of `m`; anything else is ignored.
    pub fn from_matrix(m: &Matrix4<Complex64>) -> Self {
        Self {
            diag: [m[(0, 0)].re, m[(1, 1)].re, m[(2, 2)].re, m[(3, 3)].re],
            inner_coherence: m[(1, 2)],
            outer_coherence: m[(0, 3)],
        }
    }

    pub fn to_matrix(&self) -> Matrix4<Complex64> {
        let mut m = Matrix4::zeros();
        for (i, d) in self.diag.iter().enumerate() {
            m[(i, i)] = Complex64::from(*d);
        }
        m[(1, 2)] = self.inner_coherence;
        m[(2, 1)] = self.inner_coherence.conj();
        m[(0, 3)] = self.outer_coherence;
        m[(3, 0)] = self.outer_coherence.conj();
        m
    }

    pub fn trace(&self) -> f64 {
        self.diag.iter().sum()
    }

    pub fn purity(&self) -> f64 {
        self.diag.iter().map(|d| d * d).sum::<f64>()
            + 2.0 * (self.inner_coherence.norm_sqr() + self.outer_coherence.norm_sqr())
    }

    /// Spectrum from the two 2×2 blocks, ascending.
    pub fn eigenvalues(&self) -> [f64; 4] {
        let [d0, d1, d2, d3] = self.diag;
        let (p, q) = block_eigenvalues(d0, d3, self.outer_coherence.norm());
        let (r, s) = block_eigenvalues(d1, d2, self.inner_coherence.norm());
        let mut ev = [p, q, r, s];
        ev.sort_by(f64::total_cmp);
        ev
    }

    /// The same state with its outer coherence rotated by a phase; entanglement
    /// measures must not notice.
    pub fn with_outer_phase(self, phase: f64) -> Self {
        Self { outer_coherence: self.outer_coherence * Complex64::from_polar(1.0, phase), ..self }
    }
}

/// Eigenvalues `(lower, upper)` of the Hermitian block `[[a, z], [z*, b]]`, |z| given.
pub(crate) fn block_eigenvalues(a: f64, b: f64, z_abs: f64) -> (f64, f64) {
    let mean = 0.5 * (a + b);
    let radius = (0.5 * (a - b)).hypot(z_abs);
    (mean - radius, mean + radius)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoeffsOneAtom {
    pub q1: f64,
    pub q2: Complex64,
    pub q3: f64,
}

impl CoeffsOneAtom {
    pub fn from_factors(f: &ChannelFactors, gamma: f64) -> Self {
        let (s, c) = superposition_weights(gamma);
        let q1 = 0.5 * c * c * (1.0 + f.rabi_visibility());
        // e^{-iϑ₀} times the averaged ground-packet overlap
        let phase = -f.optical_phase - f.cubic_phase / 6.0 + f.cubic_phase / 4.0;
        let magnitude = s * c * (0.5 * f.rabi_phase).cos() * (-0.25 * f.gamma_exp).exp();
        Self { q1, q2: Complex64::from_polar(1.0, phase) * magnitude, q3: 1.0 - q1 }
    }

    pub fn to_matrix(&self) -> Matrix2<Complex64> {
        Matrix2::new(Complex64::from(self.q1), self.q2, self.q2.conj(), Complex64::from(self.q3))
    }

    pub fn purity(&self) -> f64 {
        self.q1 * self.q1 + self.q3 * self.q3 + 2.0 * self.q2.norm_sqr()
    }
}

pub fn coeffs_psi(t: f64, p: &PhysicalParams, c: &DerivedConstants) -> CoeffsPsi {
    CoeffsPsi::from_factors(&ChannelFactors::at(t, p, c), p.gamma)
}

pub fn coeffs_phi(t: f64, p: &PhysicalParams, c: &DerivedConstants) -> CoeffsPhi {
    CoeffsPhi::from_factors(&ChannelFactors::at(t, p, c), p.gamma)
}

pub fn coeffs_one_atom(t: f64, p: &PhysicalParams, c: &DerivedConstants) -> CoeffsOneAtom {
    CoeffsOneAtom::from_factors(&ChannelFactors::at(t, p, c), p.gamma)
}

pub fn rho_psi(t: f64, p: &PhysicalParams, c: &DerivedConstants) -> XState {
    coeffs_psi(t, p, c).to_xstate()
}

pub fn rho_phi(t: f64, p: &PhysicalParams, c: &DerivedConstants) -> XState {
    coeffs_phi(t, p, c).to_xstate()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::derive_constants;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, FRAC_PI_6};

    fn at(gamma: f64) -> (PhysicalParams, DerivedConstants) {
        let p = PhysicalParams::reference(gamma);
        (p, derive_constants(&p).unwrap())
    }

    #[test]
    fn psi_initial_bell_state() {
        let (p, c) = at(FRAC_PI_4);
        let a = coeffs_psi(0.0, &p, &c);
        assert!((a.a1 - 0.5).abs() < 1e-15 && (a.a2 - 0.5).abs() < 1e-15);
        assert!((a.a3.re - 0.5).abs() < 1e-15 && a.a3.im == 0.0);
        assert_eq!(a.a4, 0.0);
        let x = a.to_xstate();
        assert!((x.purity() - 1.0).abs() < 1e-15);
        assert!((x.trace() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn psi_long_time_limit() {
        let (p, c) = at(FRAC_PI_6);
        let a = coeffs_psi(3e-2, &p, &c);
        let (s, co) = FRAC_PI_6.sin_cos();
        assert!((a.a1 - 0.5 * co * co).abs() < 1e-12);
        assert!((a.a2 - 0.5 * s * s).abs() < 1e-12);
        assert!(a.a3.norm() < 1e-12);
        assert!((a.a4 - 0.5).abs() < 1e-12);
    }

    #[test]
    fn phi_initial_and_limits() {
        let gamma = 0.4;
        let (p, c) = at(gamma);
        let (s, co) = gamma.sin_cos();
        let b = coeffs_phi(0.0, &p, &c);
        assert!((b.b1.re - s * co).abs() < 1e-15 && b.b1.im.abs() < 1e-15);
        assert!((b.b2 - co * co).abs() < 1e-15);
        assert_eq!(b.b3, 0.0);
        assert!((b.b5 - s * s).abs() < 1e-15);
        let late = coeffs_phi(3e-2, &p, &c);
        assert!((late.b3 - co * co / 4.0).abs() < 1e-12);
        assert_eq!(late.b3, late.b4);
    }

    #[test]
    fn phi_without_initial_entanglement() {
        let (p, c) = at(0.0);
        for i in 0..50 {
            let t = i as f64 * 6e-5;
            let f = ChannelFactors::at(t, &p, &c);
            let b = coeffs_phi(t, &p, &c);
            assert_eq!(b.b1.norm(), 0.0);
            let expected = 0.25 * (1.0 - f.rabi_phase.cos() * (-f.gamma_exp).exp()).powi(2);
            assert!((b.b5 - expected).abs() < 1e-15);
            // ρ = ρ_A ⊗ ρ_B with ρ_A = diag(u, 1-u)
            let u = 0.5 * (1.0 + f.rabi_phase.cos() * (-f.gamma_exp).exp());
            let x = b.to_xstate();
            let prod = [u * u, u * (1.0 - u), (1.0 - u) * u, (1.0 - u) * (1.0 - u)];
            for (d, q) in x.diag.iter().zip(prod) {
                assert!((d - q).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn phi_dark_state() {
        let (p, c) = at(FRAC_PI_2);
        for i in 0..20 {
            let x = rho_phi(i as f64 * 1.3e-4, &p, &c);
            assert!(x.diag[0].abs() < 1e-30 && x.diag[1].abs() < 1e-30);
            assert!((x.diag[3] - 1.0).abs() < 1e-15);
            assert!(x.outer_coherence.norm() < 1e-16);
        }
    }

    #[test]
    fn canonical_permutation_of_phi_block() {
        let (p, c) = at(0.7);
        let b = coeffs_phi(4e-4, &p, &c);
        let x = b.to_xstate();
        assert_eq!(x.diag, [b.b2, b.b3, b.b4, b.b5]);
        assert_eq!(x.outer_coherence, b.b1);
        assert_eq!(x.inner_coherence, Complex64::new(0.0, 0.0));
        // the permutation is a similarity transform, entries are only moved
        let m = x.to_matrix();
        assert_eq!(m[(3, 0)], b.b1.conj());
    }

    #[test]
    fn one_atom_initial_and_limit() {
        let gamma = 1.1;
        let (p, c) = at(gamma);
        let (s, co) = gamma.sin_cos();
        let q = coeffs_one_atom(0.0, &p, &c);
        assert!((q.q1 - co * co).abs() < 1e-15);
        assert!((q.q2.re - co * s).abs() < 1e-15 && q.q2.im.abs() < 1e-15);
        assert!((q.q3 - s * s).abs() < 1e-15);
        assert!((q.purity() - 1.0).abs() < 1e-14);
        let late = coeffs_one_atom(3e-2, &p, &c);
        assert!((late.q1 - 0.5 * co * co).abs() < 1e-12);
    }

    #[test]
    fn one_atom_coherence_decays_four_times_slower() {
        let gamma = 0.6;
        let (p, c) = at(gamma);
        let (s, co) = gamma.sin_cos();
        // at Ω₀t = 2πn the population envelope is e^{-Γ} and |q2| is sc·e^{-Γ/4}
        for n in 1..6 {
            let t = 2.0 * std::f64::consts::PI * n as f64 / c.omega0;
            let f = ChannelFactors::at(t, &p, &c);
            let q = coeffs_one_atom(t, &p, &c);
            let pop_env = 2.0 * q.q1 / (co * co) - 1.0;
            let coh_env = q.q2.norm() / (s * co);
            let ratio = pop_env.ln() / coh_env.ln();
            assert!((ratio - 4.0).abs() < 1e-8, "n={n}: {ratio}");
            assert!((coh_env.ln() + f.gamma_exp / 4.0).abs() < 1e-9);
        }
    }

    #[test]
    fn undamped_limit_oscillates_forever() {
        let (p, c) = at(FRAC_PI_4);
        for n in [1.0, 10.0, 100.0] {
            let t = 2.0 * std::f64::consts::PI * n / c.omega0;
            let f = ChannelFactors::at(t, &p, &c).without_decay();
            let a = CoeffsPsi::from_factors(&f, FRAC_PI_4);
            assert!((a.a3.re - 0.5).abs() < 1e-9);
        }
    }

    #[test]
    fn optical_phase_only_touches_coherence_phase() {
        let (p, c) = at(0.9);
        let t = 7.7e-4;
        let f = ChannelFactors::at(t, &p, &c);
        let with = CoeffsPhi::from_factors(&f, 0.9);
        let without = CoeffsPhi::from_factors(&f.without_optical_phase(), 0.9);
        assert!((with.b1.norm() - without.b1.norm()).abs() < 1e-16);
        assert_eq!((with.b2, with.b3, with.b5), (without.b2, without.b3, without.b5));
        assert!((without.b1.arg() - f.cubic_phase / 6.0).abs() < 1e-12);
    }

    #[test]
    fn block_eigenvalues_match_closed_forms() {
        let (p, c) = at(FRAC_PI_6);
        let a = coeffs_psi(3.3e-4, &p, &c);
        let ev = a.to_xstate().eigenvalues();
        let lo = 0.5 * (a.a1 + a.a2) - (0.25 * (a.a1 - a.a2).powi(2) + a.a3.norm_sqr()).sqrt();
        assert!(ev.iter().any(|e| (e - lo).abs() < 1e-15));
        assert!(ev.contains(&0.0) || ev.iter().any(|e| e.abs() < 1e-15));
    }
}
