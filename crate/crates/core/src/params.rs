//! Experiment inputs and the constants derived from them.
//!
//! All quantities are SI. Both atoms and both cavities are taken identical,
//! so a single [`PhysicalParams`] describes the whole two-atom setup.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::ValidationError;

/// Reduced Planck constant (CODATA 2018), J·s.
pub const HBAR: f64 = 1.054_571_817e-34;
/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 2.997_924_58e8;

/// Largest admitted ratio `dx0 / wavelength`. Above it the linear expansion of
/// the mode function around the packet center is no longer trustworthy.
pub const LINEARIZATION_THRESHOLD: f64 = 1.0 / 20.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams {
    /// Atomic mass, kg.
    pub mass: f64,
    /// Atom-field coupling constant, 1/s.
    pub coupling_eps: f64,
    /// Cavity mode wavelength, m.
    pub wavelength: f64,
    /// Initial packet center relative to a field node, m.
    pub x0: f64,
    /// Initial position spread, m.
    pub dx0: f64,
    /// Superposition angle of the initial qubit state, rad.
    pub gamma: f64,
}

impl PhysicalParams {
    /// Reference parameter set: λ = 1 cm, ε = 10⁴ s⁻¹,
    /// m = 10⁻²⁶ kg, x₀ = λ/10, Δx₀ = λ/50.
    pub fn reference(gamma: f64) -> Self {
        let wavelength = 1e-2;
        Self {
            mass: 1e-26,
            coupling_eps: 1e4,
            wavelength,
            x0: wavelength / 10.0,
            dx0: wavelength / 50.0,
            gamma,
        }
    }

    pub fn with_gamma(self, gamma: f64) -> Self {
        Self { gamma, ..self }
    }

    pub fn validate(&self) -> Result<(), ValidationError> {
        fn positive(field: &'static str, v: f64) -> Result<(), ValidationError> {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(ValidationError::new(field, format!("must be finite and > 0, got {v}")))
            }
        }
        positive("mass", self.mass)?;
        positive("wavelength", self.wavelength)?;
        positive("dx0", self.dx0)?;
        // zero coupling is the free limit and is admitted
        if !(self.coupling_eps.is_finite() && self.coupling_eps >= 0.0) {
            return Err(ValidationError::new(
                "coupling_eps",
                format!("must be finite and >= 0, got {}", self.coupling_eps),
            ));
        }
        if !self.x0.is_finite() {
            return Err(ValidationError::new("x0", "must be finite"));
        }
        check_gamma(self.gamma)?;
        let ratio = self.dx0 / self.wavelength;
        if ratio > LINEARIZATION_THRESHOLD {
            return Err(ValidationError::new(
                "dx0",
                format!(
                    "dx0/wavelength = {ratio:.4} exceeds the linearization limit {LINEARIZATION_THRESHOLD}"
                ),
            ));
        }
        Ok(())
    }
}

pub(crate) fn check_gamma(gamma: f64) -> Result<(), ValidationError> {
    if gamma.is_finite() && (0.0..=FRAC_PI_2).contains(&gamma) {
        Ok(())
    } else {
        Err(ValidationError::new("gamma", format!("must lie in [0, pi/2], got {gamma}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedConstants {
    /// Atomic mass, carried along so kinematics need only this struct.
    pub mass: f64,
    /// Wavenumber 2π/λ, 1/m.
    pub k: f64,
    /// Mode angular frequency ck, 1/s.
    pub omega: f64,
    /// Acceleration scale εħk/m, m/s².
    pub a0: f64,
    /// Initial position spread, m.
    pub dx0: f64,
    /// Minimum-uncertainty momentum spread ħ/(2Δx₀).
    pub dp0: f64,
    /// Rabi frequency at the initial packet center, 1/s.
    pub omega0: f64,
    pub hbar: f64,
    pub c: f64,
}

impl DerivedConstants {
    /// Rabi frequency through the mechanical route 2m·a₀·x₀/ħ.
    pub fn omega0_from_force(&self, x0: f64) -> f64 {
        2.0 * self.mass * self.a0 * x0 / self.hbar
    }

    /// Period of the vacuum Rabi oscillation, or infinity at zero coupling.
    pub fn rabi_period(&self) -> f64 {
        2.0 * PI / self.omega0.abs()
    }
}

pub fn derive_constants(p: &PhysicalParams) -> Result<DerivedConstants, ValidationError> {
    p.validate()?;
    let k = 2.0 * PI / p.wavelength;
    Ok(DerivedConstants {
        mass: p.mass,
        k,
        omega: SPEED_OF_LIGHT * k,
        a0: p.coupling_eps * HBAR * k / p.mass,
        dx0: p.dx0,
        dp0: HBAR / (2.0 * p.dx0),
        omega0: 2.0 * p.coupling_eps * k * p.x0,
        hbar: HBAR,
        c: SPEED_OF_LIGHT,
    })
}

/// `(sin γ, cos γ)`, exact at the endpoints so that γ = π/2 gives a true
/// product state.
pub fn superposition_weights(gamma: f64) -> (f64, f64) {
    if gamma == FRAC_PI_2 {
        (1.0, 0.0)
    } else {
        gamma.sin_cos()
    }
}

/// Phase ϑ₀(t) = ωt + m·a₀²·t³/(6ħ) acquired by every singly excited channel.
pub fn theta0(t: f64, c: &DerivedConstants) -> f64 {
    c.omega * t + cubic_phase(t, c) / 6.0
}

/// m·a₀²·t³/ħ, the common scale of all cubic-in-time phases.
pub fn cubic_phase(t: f64, c: &DerivedConstants) -> f64 {
    c.mass * c.a0 * c.a0 * t * t * t / c.hbar
}
