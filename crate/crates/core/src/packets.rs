//! Closed-form Gaussian packets for the two translational branches driven by
//! the dressed channels, the undriven ground-channel packet, and their overlaps.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::params::{cubic_phase, DerivedConstants, PhysicalParams};

/// Minimum-uncertainty Gaussian with zero mean momentum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianPacket {
    pub center: f64,
    pub spread: f64,
}

impl GaussianPacket {
    pub fn new(center: f64, spread: f64) -> Self {
        assert!(spread > 0.0, "packet spread must be positive");
        Self { center, spread }
    }

    pub fn from_params(p: &PhysicalParams) -> Self {
        Self::new(p.x0, p.dx0)
    }

    pub fn momentum_spread(&self, hbar: f64) -> f64 {
        hbar / (2.0 * self.spread)
    }

    /// Rabi frequency 2m·a₀·x/ħ seen by a packet sitting at this center.
    pub fn rabi_frequency(&self, c: &DerivedConstants) -> f64 {
        2.0 * c.mass * c.a0 * self.center / c.hbar
    }
}

/// Dressed-channel branch. `Plus` feels the potential +m·a₀·x.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Branch {
    Plus,
    Minus,
}

impl Branch {
    pub fn sign(self) -> f64 {
        match self {
            Branch::Plus => 1.0,
            Branch::Minus => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KinematicSplit {
    /// Position separation between the branches, −a₀t².
    pub dx: f64,
    /// Momentum separation between the branches, −2m·a₀t.
    pub dp: f64,
    /// Squared phase-space distance Γ(t) between the branches.
    pub gamma_exp: f64,
    pub xplus: f64,
    pub xminus: f64,
    pub beta_re: f64,
    pub beta_im: f64,
}

impl KinematicSplit {
    pub fn beta(&self) -> Complex64 {
        Complex64::new(self.beta_re, self.beta_im)
    }
}

pub fn kinematics(t: f64, pkt: &GaussianPacket, c: &DerivedConstants) -> KinematicSplit {
    let dx = -c.a0 * t * t;
    let dp = -2.0 * c.mass * c.a0 * t;
    let dp0 = pkt.momentum_spread(c.hbar);
    let gamma_exp = dx * dx / (8.0 * pkt.spread * pkt.spread) + dp * dp / (8.0 * dp0 * dp0);
    let shift = 0.5 * c.a0 * t * t;
    KinematicSplit {
        dx,
        dp,
        gamma_exp,
        xplus: pkt.center - shift,
        xminus: pkt.center + shift,
        beta_re: pkt.spread * pkt.spread,
        beta_im: c.hbar * t / (2.0 * c.mass),
    }
}

/// Γ(t) alone.
pub fn decay_exponent(t: f64, pkt: &GaussianPacket, c: &DerivedConstants) -> f64 {
    kinematics(t, pkt, c).gamma_exp
}

fn spreading_gaussian(x: f64, center: f64, spread: f64, beta: Complex64) -> Complex64 {
    let norm = (Complex64::from(spread / (2.0 * PI).sqrt()) / beta).sqrt();
    let u = x - center;
    norm * (-(u * u) / (4.0 * beta)).exp()
}

/// x-representation of a split branch packet at time `t`, in m^(-1/2).
pub fn split_amplitude(
    x: f64,
    t: f64,
    branch: Branch,
    pkt: &GaussianPacket,
    c: &DerivedConstants,
) -> Complex64 {
    let kin = kinematics(t, pkt, c);
    let center = match branch {
        Branch::Plus => kin.xplus,
        Branch::Minus => kin.xminus,
    };
    let kick = Complex64::from_polar(1.0, -branch.sign() * t * c.mass * c.a0 * x / c.hbar);
    kick * spreading_gaussian(x, center, pkt.spread, kin.beta())
}

/// x-representation of the freely spreading ground-channel packet.
pub fn free_amplitude(x: f64, t: f64, pkt: &GaussianPacket, c: &DerivedConstants) -> Complex64 {
    let beta = Complex64::new(pkt.spread * pkt.spread, c.hbar * t / (2.0 * c.mass));
    spreading_gaussian(x, pkt.center, pkt.spread, beta)
}

/// ⟨φ⁻(t)|φ⁺(t)⟩ = exp(−iΩ₀t)·exp(−Γ(t)).
pub fn overlap_pm(t: f64, pkt: &GaussianPacket, c: &DerivedConstants) -> Complex64 {
    let gamma_exp = decay_exponent(t, pkt, c);
    Complex64::from_polar((-gamma_exp).exp(), -pkt.rabi_frequency(c) * t)
}

/// ⟨φ(t)|φ^±(t)⟩ = exp(i·m·a₀²t³/(4ħ) ∓ iΩ₀t/2)·exp(−Γ(t)/4).
pub fn overlap_free_pm(t: f64, branch: Branch, pkt: &GaussianPacket, c: &DerivedConstants) -> Complex64 {
    let gamma_exp = decay_exponent(t, pkt, c);
    let phase = cubic_phase(t, c) / 4.0 - branch.sign() * pkt.rabi_frequency(c) * t / 2.0;
    Complex64::from_polar((-gamma_exp / 4.0).exp(), phase)
}
