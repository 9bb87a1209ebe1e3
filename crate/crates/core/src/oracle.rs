//! Brute-force check of the closed forms.
//!
//! Each dressed channel of one atom is propagated on a periodic spatial grid
//! with a Strang split-step Fourier scheme under its linearized Hamiltonian
//! `p²/2m + s·m·a₀·x` (`s` = +1, −1, or 0 for the uncoupled ground channel).
//! The joint atom-field-motion state is then rebuilt term by term from the
//! dressed-state expansion and the internal density matrix obtained by
//! tracing the field and the motion with numerical overlaps. Nothing here
//! calls the closed-form overlap expressions.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::sync::Arc;

use nalgebra::{Matrix2, Matrix4};
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::entanglement::concurrence_of_matrix;
use crate::error::{EntanglementError, OracleError};
use crate::params::{superposition_weights, DerivedConstants, PhysicalParams};

/// Largest time step used when none is given.
pub const DEFAULT_MAX_DT: f64 = 1e-7;
pub const DEFAULT_POINTS: usize = 8192;
/// Half-width of the default window in units of Δx₀.
pub const DEFAULT_HALF_WIDTH: f64 = 40.0;
const MIN_POINTS: usize = 1024;
const MIN_STEPS: usize = 100;
/// Edge amplitude relative to the peak above which the periodic wrap matters.
const EDGE_TOLERANCE: f64 = 1e-8;

/// Uniform periodic grid, `x_i = x_min + i·dx` for `i < n_points`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub x_min: f64,
    pub x_max: f64,
    pub n_points: usize,
    pub dx: f64,
}

impl Grid {
    pub fn new(x_min: f64, x_max: f64, n_points: usize) -> Result<Self, OracleError> {
        if !n_points.is_power_of_two() || n_points < MIN_POINTS {
            return Err(OracleError::GridViolation(format!(
                "n_points must be a power of two >= {MIN_POINTS}, got {n_points}"
            )));
        }
        if !(x_min.is_finite() && x_max.is_finite()) || x_max <= x_min {
            return Err(OracleError::GridViolation(format!("empty domain [{x_min}, {x_max}]")));
        }
        Ok(Self { x_min, x_max, n_points, dx: (x_max - x_min) / n_points as f64 })
    }

    /// `[x₀ − 40Δx₀, x₀ + 40Δx₀]` with 8192 points.
    pub fn default_for(p: &PhysicalParams) -> Result<Self, OracleError> {
        Self::centered(p, DEFAULT_HALF_WIDTH, DEFAULT_POINTS)
    }

    pub fn centered(p: &PhysicalParams, half_width: f64, n_points: usize) -> Result<Self, OracleError> {
        let h = half_width * p.dx0;
        Self::new(p.x0 - h, p.x0 + h, n_points)
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.dx
    }

    /// Angular wavenumbers in FFT order.
    fn wavenumbers(&self) -> Vec<f64> {
        let n = self.n_points;
        let dk = 2.0 * PI / (n as f64 * self.dx);
        (0..n).map(|j| if j < n / 2 { j as f64 * dk } else { (j as f64 - n as f64) * dk }).collect()
    }

    /// Checks that every branch up to `t_max` fits in the window with six
    /// widths of margin and that the largest momentum kick stays below half
    /// the Nyquist momentum.
    pub fn check_coverage(
        &self,
        p: &PhysicalParams,
        c: &DerivedConstants,
        t_max: f64,
    ) -> Result<(), OracleError> {
        let shift = 0.5 * c.a0 * t_max * t_max;
        let spread = (p.dx0.powi(2) + (c.hbar * t_max / (2.0 * c.mass * p.dx0)).powi(2)).sqrt();
        let lo = p.x0 - shift - 6.0 * spread;
        let hi = p.x0 + shift + 6.0 * spread;
        if lo < self.x_min || hi > self.x_max {
            return Err(OracleError::GridViolation(format!(
                "branches span [{lo:e}, {hi:e}] m at t = {t_max:e} s, outside [{:e}, {:e}] m",
                self.x_min, self.x_max
            )));
        }
        let kick = 2.0 * c.mass * c.a0 * t_max;
        if kick > 0.0 && self.dx > PI * c.hbar / (4.0 * kick) {
            return Err(OracleError::GridViolation(format!(
                "dx = {:e} m does not resolve the momentum kick {kick:e} kg m/s",
                self.dx
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridWavefunction {
    pub grid: Grid,
    pub samples: Vec<Complex64>,
}

impl GridWavefunction {
    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> Complex64) -> Self {
        let samples = (0..grid.n_points).map(|i| f(grid.x(i))).collect();
        Self { grid, samples }
    }

    /// Minimum-uncertainty Gaussian at rest.
    pub fn gaussian(grid: Grid, center: f64, spread: f64) -> Self {
        let norm = (1.0 / ((2.0 * PI).sqrt() * spread)).sqrt();
        Self::from_fn(grid, |x| {
            Complex64::from(norm * (-(x - center).powi(2) / (4.0 * spread * spread)).exp())
        })
    }

    pub fn norm_sqr(&self) -> f64 {
        self.samples.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.grid.dx
    }

    pub fn mean_position(&self) -> f64 {
        let w: f64 = self.samples.iter().enumerate().map(|(i, z)| self.grid.x(i) * z.norm_sqr()).sum();
        w * self.grid.dx / self.norm_sqr()
    }

    /// ⟨p⟩ from the discrete spectrum.
    pub fn mean_momentum(&self, hbar: f64) -> f64 {
        let mut buf = self.samples.clone();
        FftPlanner::new().plan_fft_forward(buf.len()).process(&mut buf);
        let k = self.grid.wavenumbers();
        let (num, den) =
            buf.iter().zip(&k).fold((0.0, 0.0), |(n, d), (z, k)| (n + k * z.norm_sqr(), d + z.norm_sqr()));
        hbar * num / den
    }

    /// Largest edge amplitude relative to the peak.
    pub fn edge_ratio(&self) -> f64 {
        let peak = self.samples.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let edge = self.samples[0].norm().max(self.samples[self.samples.len() - 1].norm());
        if peak == 0.0 {
            0.0
        } else {
            edge / peak
        }
    }

    fn check_edges(&self) -> Result<(), OracleError> {
        let r = self.edge_ratio();
        if r >= EDGE_TOLERANCE {
            return Err(OracleError::GridViolation(format!(
                "edge amplitude is {r:e} of the peak; the packet reached the boundary"
            )));
        }
        Ok(())
    }
}

/// Rectangle-rule ⟨f|g⟩; on a periodic grid this coincides with the trapezoid rule.
pub fn numeric_overlap(f: &GridWavefunction, g: &GridWavefunction) -> Result<Complex64, OracleError> {
    if f.grid != g.grid {
        return Err(OracleError::GridMismatch);
    }
    let s: Complex64 = f.samples.iter().zip(&g.samples).map(|(a, b)| a.conj() * b).sum();
    Ok(s * f.grid.dx)
}

/// Dressed channel an atom-cavity pair evolves in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Channel {
    /// χ⁺, potential +m·a₀·x, one excitation.
    Plus,
    /// χ⁻, potential −m·a₀·x, one excitation.
    Minus,
    /// |−0⟩, no coupling, no excitation.
    Ground,
}

impl Channel {
    pub const ALL: [Channel; 3] = [Channel::Plus, Channel::Minus, Channel::Ground];

    pub fn force_sign(self) -> f64 {
        match self {
            Channel::Plus => 1.0,
            Channel::Minus => -1.0,
            Channel::Ground => 0.0,
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

/// One Strang step: half kinetic, full potential, half kinetic.
struct SplitStepper {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    kinetic_half: Vec<Complex64>,
    potential: Vec<Complex64>,
    scratch: Vec<Complex64>,
    dt: f64,
}

impl SplitStepper {
    fn new(grid: &Grid, channel: Channel, c: &DerivedConstants, dt: f64) -> Self {
        let mut planner = FftPlanner::new();
        let n = grid.n_points;
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        let scratch_len = forward.get_inplace_scratch_len().max(inverse.get_inplace_scratch_len());
        // the inverse transform's 1/n is folded into the kinetic factor
        let inv_n = 1.0 / n as f64;
        let kinetic_half = grid
            .wavenumbers()
            .iter()
            .map(|k| Complex64::from_polar(inv_n, -c.hbar * k * k * dt / (4.0 * c.mass)))
            .collect();
        let force = channel.force_sign() * c.mass * c.a0;
        let potential =
            (0..n).map(|i| Complex64::from_polar(1.0, -force * grid.x(i) * dt / c.hbar)).collect();
        Self {
            forward,
            inverse,
            kinetic_half,
            potential,
            scratch: vec![Complex64::new(0.0, 0.0); scratch_len],
            dt,
        }
    }

    fn kinetic(&mut self, psi: &mut [Complex64]) {
        self.forward.process_with_scratch(psi, &mut self.scratch);
        for (z, k) in psi.iter_mut().zip(&self.kinetic_half) {
            *z *= k;
        }
        self.inverse.process_with_scratch(psi, &mut self.scratch);
    }

    fn step(&mut self, psi: &mut [Complex64]) {
        self.kinetic(psi);
        for (z, v) in psi.iter_mut().zip(&self.potential) {
            *z *= v;
        }
        self.kinetic(psi);
    }
}

/// Advances one channel wavefunction by `t` in `steps` equal steps.
pub fn propagate_channel(
    psi0: &GridWavefunction,
    channel: Channel,
    t: f64,
    steps: usize,
    c: &DerivedConstants,
) -> Result<GridWavefunction, OracleError> {
    let mut psi = psi0.clone();
    if t == 0.0 {
        return Ok(psi);
    }
    if steps < MIN_STEPS {
        return Err(OracleError::GridViolation(format!(
            "at least {MIN_STEPS} steps are required, got {steps}"
        )));
    }
    let mut stepper = SplitStepper::new(&psi.grid, channel, c, t / steps as f64);
    run_steps(&mut stepper, &mut psi, steps)?;
    Ok(psi)
}

fn run_steps(
    stepper: &mut SplitStepper,
    psi: &mut GridWavefunction,
    steps: usize,
) -> Result<(), OracleError> {
    for i in 1..=steps {
        stepper.step(&mut psi.samples);
        if i % 256 == 0 {
            psi.check_edges()?;
        }
    }
    psi.check_edges()
}

/// The three channel wavefunctions of one atom at a common time.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSet {
    pub t: f64,
    pub plus: GridWavefunction,
    pub minus: GridWavefunction,
    pub ground: GridWavefunction,
}

impl ChannelSet {
    pub fn get(&self, ch: Channel) -> &GridWavefunction {
        match ch {
            Channel::Plus => &self.plus,
            Channel::Minus => &self.minus,
            Channel::Ground => &self.ground,
        }
    }

    /// Matrix of ⟨ch'|ch⟩, indexed `[ch'][ch]`.
    pub fn overlaps(&self) -> Result<[[Complex64; 3]; 3], OracleError> {
        let mut m = [[Complex64::new(0.0, 0.0); 3]; 3];
        for a in Channel::ALL {
            for b in Channel::ALL {
                m[a.index()][b.index()] = numeric_overlap(self.get(a), self.get(b))?;
            }
        }
        Ok(m)
    }

    /// Worst deviation of a channel norm from one.
    pub fn norm_drift(&self) -> f64 {
        Channel::ALL.iter().map(|&ch| (self.get(ch).norm_sqr() - 1.0).abs()).fold(0.0, f64::max)
    }
}

/// Knobs for the grid propagation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleSettings {
    pub n_points: usize,
    pub half_width: f64,
    pub max_dt: f64,
}

impl Default for OracleSettings {
    fn default() -> Self {
        Self { n_points: DEFAULT_POINTS, half_width: DEFAULT_HALF_WIDTH, max_dt: DEFAULT_MAX_DT }
    }
}

/// Propagates all three channels of one atom forward through a sequence of
/// snapshot times, reusing the state between snapshots.
pub struct ChannelPropagator {
    grid: Grid,
    constants: DerivedConstants,
    max_dt: f64,
    t: f64,
    states: [GridWavefunction; 3],
    steppers: [Option<SplitStepper>; 3],
}

impl ChannelPropagator {
    pub fn new(p: &PhysicalParams, c: &DerivedConstants, grid: Grid, max_dt: f64) -> Self {
        let psi0 = GridWavefunction::gaussian(grid, p.x0, p.dx0);
        Self {
            grid,
            constants: *c,
            max_dt,
            t: 0.0,
            states: [psi0.clone(), psi0.clone(), psi0],
            steppers: [None, None, None],
        }
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    /// Moves every channel to time `t` (not earlier than the current time).
    pub fn advance_to(&mut self, t: f64) -> Result<ChannelSet, OracleError> {
        assert!(t >= self.t, "propagation only runs forward");
        let span = t - self.t;
        if span > 0.0 {
            let steps = (span / self.max_dt).ceil().max(1.0) as usize;
            let dt = span / steps as f64;
            for ch in Channel::ALL {
                let i = ch.index();
                let fresh = match &self.steppers[i] {
                    Some(s) => (s.dt - dt).abs() > 1e-12 * dt,
                    None => true,
                };
                if fresh {
                    self.steppers[i] = Some(SplitStepper::new(&self.grid, ch, &self.constants, dt));
                }
                let stepper = self.steppers[i].as_mut().expect("stepper initialised above");
                run_steps(stepper, &mut self.states[i], steps)?;
            }
            self.t = t;
        }
        let [plus, minus, ground] = self.states.clone();
        Ok(ChannelSet { t, plus, minus, ground })
    }
}

/// Which reduced matrix to rebuild.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Case {
    /// `cos γ|+−⟩ + sin γ|−+⟩`
    Psi,
    /// `cos γ|++⟩ + sin γ|−−⟩`
    Phi,
    /// `cos γ|+⟩ + sin γ|−⟩`, one atom.
    OneAtom,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NumericRho {
    TwoQubit(Matrix4<Complex64>),
    OneQubit(Matrix2<Complex64>),
}

/// Local qubit state, `+` (excited) is index 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Qubit {
    Up,
    Down,
}

impl Qubit {
    fn index(self) -> usize {
        match self {
            Qubit::Up => 0,
            Qubit::Down => 1,
        }
    }
}

/// One term `coef · |qubit, photons⟩ ⊗ ψ_channel` of an evolved atom-cavity state.
#[derive(Debug, Clone, Copy)]
struct LocalTerm {
    qubit: Qubit,
    photons: u8,
    coef: Complex64,
    channel: Channel,
}

/// Evolves a bare initial state `|q, 0⟩ ⊗ φ₀` of one atom-cavity pair.
///
/// `|+0⟩` is split over the dressed states `|χ^s⟩ = (|+0⟩ + s|−1⟩)/√2`, each
/// of which carries one excitation (phase e^{−iωt}) and its own channel
/// packet; the dressed states are then re-expanded in the bare basis.
fn evolve_local(initial: Qubit, optical_phase: f64) -> Vec<LocalTerm> {
    match initial {
        Qubit::Down => vec![LocalTerm {
            qubit: Qubit::Down,
            photons: 0,
            coef: Complex64::new(1.0, 0.0),
            channel: Channel::Ground,
        }],
        Qubit::Up => {
            let excitation = Complex64::from_polar(1.0, -optical_phase);
            let mut terms = Vec::with_capacity(4);
            for (s, channel) in [(1.0, Channel::Plus), (-1.0, Channel::Minus)] {
                // ⟨χ^s|+0⟩ = 1/√2
                let weight = excitation * FRAC_1_SQRT_2;
                terms.push(LocalTerm { qubit: Qubit::Up, photons: 0, coef: weight * FRAC_1_SQRT_2, channel });
                terms.push(LocalTerm {
                    qubit: Qubit::Down,
                    photons: 1,
                    coef: weight * (s * FRAC_1_SQRT_2),
                    channel,
                });
            }
            terms
        }
    }
}

/// Internal initial state for a case as `(amplitude, qubit A, qubit B)`.
fn initial_pairs(case: Case, gamma: f64) -> Vec<(f64, Qubit, Option<Qubit>)> {
    let (s, c) = superposition_weights(gamma);
    match case {
        Case::Psi => vec![(c, Qubit::Up, Some(Qubit::Down)), (s, Qubit::Down, Some(Qubit::Up))],
        Case::Phi => vec![(c, Qubit::Up, Some(Qubit::Up)), (s, Qubit::Down, Some(Qubit::Down))],
        Case::OneAtom => vec![(c, Qubit::Up, None), (s, Qubit::Down, None)],
    }
}

/// Reduced internal density matrix from channel wavefunctions of atoms A and B.
///
/// `omega` is the mode frequency used for the excitation phase; pass zero to
/// drop the optical phase.
pub fn rho_from_channels(
    case: Case,
    gamma: f64,
    omega: f64,
    atom_a: &ChannelSet,
    atom_b: &ChannelSet,
) -> Result<NumericRho, OracleError> {
    let ov_a = atom_a.overlaps()?;
    let ov_b = atom_b.overlaps()?;
    let phase = omega * atom_a.t;

    match case {
        Case::OneAtom => {
            let mut terms = Vec::new();
            for (amp, qa, _) in initial_pairs(case, gamma) {
                for mut t in evolve_local(qa, phase) {
                    t.coef *= amp;
                    terms.push(t);
                }
            }
            let mut rho = Matrix2::zeros();
            for t in &terms {
                for u in &terms {
                    if t.photons != u.photons {
                        continue;
                    }
                    let env = ov_a[u.channel.index()][t.channel.index()];
                    rho[(t.qubit.index(), u.qubit.index())] += t.coef * u.coef.conj() * env;
                }
            }
            Ok(NumericRho::OneQubit(rho))
        }
        Case::Psi | Case::Phi => {
            // joint terms: coefficient, (qubit, photons, channel) for A and B
            let mut joint = Vec::new();
            for (amp, qa, qb) in initial_pairs(case, gamma) {
                let qb = qb.expect("two-atom case");
                for ta in evolve_local(qa, phase) {
                    for tb in evolve_local(qb, phase) {
                        joint.push((amp * ta.coef * tb.coef, ta, tb));
                    }
                }
            }
            let mut rho = Matrix4::zeros();
            for (ct, ta, tb) in &joint {
                for (cu, ua, ub) in &joint {
                    // the field trace pairs only identical photon numbers
                    if ta.photons != ua.photons || tb.photons != ub.photons {
                        continue;
                    }
                    let env = ov_a[ua.channel.index()][ta.channel.index()]
                        * ov_b[ub.channel.index()][tb.channel.index()];
                    let i = 2 * ta.qubit.index() + tb.qubit.index();
                    let j = 2 * ua.qubit.index() + ub.qubit.index();
                    rho[(i, j)] += ct * cu.conj() * env;
                }
            }
            Ok(NumericRho::TwoQubit(rho))
        }
    }
}

/// Rebuilds the reduced matrix at a single time from scratch.
pub fn numeric_rho(
    t: f64,
    case: Case,
    p: &PhysicalParams,
    c: &DerivedConstants,
    grid: &Grid,
) -> Result<NumericRho, OracleError> {
    numeric_rho_with(t, case, p, c, grid, &OracleSettings::default())
}

pub fn numeric_rho_with(
    t: f64,
    case: Case,
    p: &PhysicalParams,
    c: &DerivedConstants,
    grid: &Grid,
    settings: &OracleSettings,
) -> Result<NumericRho, OracleError> {
    p.validate()?;
    grid.check_coverage(p, c, t)?;
    let steps = ((t / settings.max_dt).ceil() as usize).max(MIN_STEPS);
    let psi0 = GridWavefunction::gaussian(*grid, p.x0, p.dx0);
    let plus = propagate_channel(&psi0, Channel::Plus, t, steps, c)?;
    let minus = propagate_channel(&psi0, Channel::Minus, t, steps, c)?;
    let ground = propagate_channel(&psi0, Channel::Ground, t, steps, c)?;
    let set = ChannelSet { t, plus, minus, ground };
    // both atoms are identical, so one channel set serves A and B
    rho_from_channels(case, p.gamma, c.omega, &set, &set)
}

pub fn numeric_concurrence(
    t: f64,
    case: Case,
    p: &PhysicalParams,
    c: &DerivedConstants,
    grid: &Grid,
) -> Result<f64, NumericConcurrenceError> {
    match numeric_rho(t, case, p, c, grid)? {
        NumericRho::TwoQubit(m) => Ok(concurrence_of_matrix(&m)?),
        NumericRho::OneQubit(_) => Err(NumericConcurrenceError::SingleQubit),
    }
}

#[derive(Debug, thiserror::Error)]
pub enum NumericConcurrenceError {
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Entanglement(#[from] EntanglementError),
    #[error("concurrence needs two qubits")]
    SingleQubit,
}
