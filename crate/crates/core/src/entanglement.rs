//! Concurrence, partial transposition and the sudden-death time.

use nalgebra::{Matrix4, SymmetricEigen};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{block_eigenvalues, coeffs_phi, CoeffsPhi, CoeffsPsi, XState};
use crate::error::EntanglementError;
use crate::packets::{decay_exponent, GaussianPacket};
use crate::params::{superposition_weights, DerivedConstants, PhysicalParams};

/// A partial-transpose eigenvalue above `-PPT_TOLERANCE` counts as non-negative.
pub const PPT_TOLERANCE: f64 = 1e-12;

/// Closed-form and general eigenvalues must agree this closely.
pub const EIGEN_AGREEMENT: f64 = 1e-10;
const EIGEN_FAILURE: f64 = 1e-8;

/// Eigenvalues of ρ below this are treated as a positivity violation.
const NEGATIVE_EIGEN_LIMIT: f64 = -1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConcurrenceSample {
    pub t: f64,
    pub c_closed: f64,
    pub c_general: f64,
    pub d_value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PptReport {
    /// Ascending.
    pub eigenvalues: [f64; 4],
    pub min_eig: f64,
    pub separable: bool,
}

pub fn concurrence_closed_psi(cp: &CoeffsPsi) -> f64 {
    2.0 * cp.a3.norm()
}

/// Returns `(d, max(0, d))` with `d = 2(|b1| − b3)`.
pub fn concurrence_closed_phi(cb: &CoeffsPhi) -> (f64, f64) {
    let d = 2.0 * (cb.b1.norm() - cb.b3);
    (d, d.max(0.0))
}

/// Concurrence of an X state from its entries alone.
pub fn concurrence_x_formula(rho: &XState) -> f64 {
    let [d0, d1, d2, d3] = rho.diag;
    let outer = rho.outer_coherence.norm() - (d1 * d2).max(0.0).sqrt();
    let inner = rho.inner_coherence.norm() - (d0 * d3).max(0.0).sqrt();
    2.0 * outer.max(inner).max(0.0)
}

pub fn concurrence_wootters(rho: &XState) -> Result<f64, EntanglementError> {
    concurrence_of_matrix(&rho.to_matrix())
}

/// Wootters concurrence of an arbitrary two-qubit density matrix.
///
/// With ρ = W·W†, the square roots of the eigenvalues of ρ·ρ̃ are the
/// singular values of Wᵀ·(σy⊗σy)·W. W comes from a pivoted Cholesky
/// factorization, which leaves exactly vanishing populations untouched.
pub fn concurrence_of_matrix(rho: &Matrix4<Complex64>) -> Result<f64, EntanglementError> {
    let herm = hermitian_part(rho);
    let min = SymmetricEigen::new(herm).eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    if min < NEGATIVE_EIGEN_LIMIT {
        return Err(EntanglementError::Numerical(format!("density matrix has eigenvalue {min:e}")));
    }
    let w = pivoted_cholesky(&herm);
    let tau = w.transpose() * spin_flip() * w;
    let mut sv: Vec<f64> = tau.singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    Ok((sv[0] - sv[1] - sv[2] - sv[3]).max(0.0))
}

/// Lower-rank factor W with W·W† = m for a positive semidefinite `m`.
///
/// Pivots on the largest remaining diagonal entry and stops once every
/// remaining pivot is below rounding level.
fn pivoted_cholesky(m: &Matrix4<Complex64>) -> Matrix4<Complex64> {
    let mut a = *m;
    let mut w = Matrix4::<Complex64>::zeros();
    let scale = (0..4).map(|i| a[(i, i)].re).fold(0.0, f64::max);
    let cutoff = 8.0 * f64::EPSILON * scale;
    let mut used = [false; 4];
    for k in 0..4 {
        let Some(p) = (0..4).filter(|&i| !used[i]).max_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re))
        else {
            break;
        };
        let pivot = a[(p, p)].re;
        if pivot <= cutoff {
            break;
        }
        used[p] = true;
        let root = pivot.sqrt();
        for i in 0..4 {
            if !used[i] || i == p {
                w[(i, k)] = a[(i, p)] / root;
            }
        }
        for i in (0..4).filter(|&i| !used[i]) {
            for j in (0..4).filter(|&j| !used[j]) {
                a[(i, j)] -= w[(i, k)] * w[(j, k)].conj();
            }
        }
    }
    w
}

/// σy ⊗ σy in the canonical basis.
fn spin_flip() -> Matrix4<Complex64> {
    let mut y = Matrix4::zeros();
    y[(0, 3)] = Complex64::from(-1.0);
    y[(3, 0)] = Complex64::from(-1.0);
    y[(1, 2)] = Complex64::from(1.0);
    y[(2, 1)] = Complex64::from(1.0);
    y
}

fn hermitian_part(m: &Matrix4<Complex64>) -> Matrix4<Complex64> {
    (m + m.adjoint()) * Complex64::from(0.5)
}

/// Transposition on the second qubit: `|a b⟩⟨a' b'| → |a b'⟩⟨a' b|`.
pub fn partial_transpose_matrix(m: &Matrix4<Complex64>) -> Matrix4<Complex64> {
    let mut out = Matrix4::zeros();
    for a in 0..2 {
        for b in 0..2 {
            for a2 in 0..2 {
                for b2 in 0..2 {
                    out[(2 * a + b2, 2 * a2 + b)] = m[(2 * a + b, 2 * a2 + b2)];
                }
            }
        }
    }
    out
}

pub fn partial_transpose(rho: &XState) -> Matrix4<Complex64> {
    partial_transpose_matrix(&rho.to_matrix())
}

/// Closed-form spectrum of the partial transpose of an X state, ascending.
///
/// Transposition swaps the roles of the two coherences, so the |++⟩/|−−⟩ block
/// now carries |inner| and the |+−⟩/|−+⟩ block carries |outer|.
pub fn ppt_eigenvalues_closed(rho: &XState) -> [f64; 4] {
    let [d0, d1, d2, d3] = rho.diag;
    let (p, q) = block_eigenvalues(d0, d3, rho.inner_coherence.norm());
    let (r, s) = block_eigenvalues(d1, d2, rho.outer_coherence.norm());
    let mut ev = [p, q, r, s];
    ev.sort_by(f64::total_cmp);
    ev
}

/// Ascending eigenvalues of a Hermitian 4×4 matrix from a general solver.
pub fn hermitian_eigenvalues(m: &Matrix4<Complex64>) -> [f64; 4] {
    let eig = SymmetricEigen::new(hermitian_part(m));
    let mut ev = [0.0; 4];
    ev.copy_from_slice(eig.eigenvalues.as_slice());
    ev.sort_by(f64::total_cmp);
    ev
}

pub fn ppt_report(rho: &XState) -> Result<PptReport, EntanglementError> {
    let closed = ppt_eigenvalues_closed(rho);
    let general = hermitian_eigenvalues(&partial_transpose(rho));
    let gap = closed.iter().zip(&general).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    if gap > EIGEN_FAILURE {
        return Err(EntanglementError::Numerical(format!(
            "closed-form and general partial-transpose spectra differ by {gap:e}"
        )));
    }
    let min_eig = closed[0];
    Ok(PptReport { eigenvalues: closed, min_eig, separable: min_eig >= -PPT_TOLERANCE })
}

/// Largest disagreement between the closed and general partial-transpose spectra.
pub fn ppt_spectrum_gap(rho: &XState) -> f64 {
    let closed = ppt_eigenvalues_closed(rho);
    let general = hermitian_eigenvalues(&partial_transpose(rho));
    closed.iter().zip(&general).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
}

/// Closed-form and Wootters concurrence for the φ family at time `t`.
pub fn concurrence_sample_phi(
    t: f64,
    p: &PhysicalParams,
    c: &DerivedConstants,
) -> Result<ConcurrenceSample, EntanglementError> {
    let cb = coeffs_phi(t, p, c);
    let (d_value, c_closed) = concurrence_closed_phi(&cb);
    let c_general = concurrence_wootters(&cb.to_xstate())?;
    Ok(ConcurrenceSample { t, c_closed, c_general, d_value })
}

/// Uniform sampling of `[0, t_max]` with `n_samples` points, ends included.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub t_max: f64,
    pub n_samples: usize,
}

impl TimeGrid {
    pub fn new(t_max: f64, n_samples: usize) -> Self {
        assert!(n_samples >= 2 && t_max > 0.0, "time grid needs two points and t_max > 0");
        Self { t_max, n_samples }
    }

    pub fn step(&self) -> f64 {
        self.t_max / (self.n_samples - 1) as f64
    }

    pub fn time(&self, i: usize) -> f64 {
        if i + 1 == self.n_samples {
            self.t_max
        } else {
            i as f64 * self.step()
        }
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_samples).map(|i| self.time(i))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuddenDeath {
    /// Supremum of the times with d(t) > 0, refined between scan samples.
    pub t_star: f64,
    /// Root of the cos(Ω₀t) = 1 envelope of d(t); an upper bound on `t_star`
    /// within one Rabi period. Absent when the envelope never vanishes.
    pub t_envelope: Option<f64>,
}

fn d_value(t: f64, p: &PhysicalParams, c: &DerivedConstants) -> f64 {
    concurrence_closed_phi(&coeffs_phi(t, p, c)).0
}

/// Final extinction time of the φ-family concurrence.
///
/// `Ok(None)` means d(t) was never positive on the scan (no entanglement to
/// lose, e.g. γ = 0 or γ = π/2).
pub fn sudden_death_time(
    p: &PhysicalParams,
    c: &DerivedConstants,
    scan: &TimeGrid,
) -> Result<Option<SuddenDeath>, EntanglementError> {
    p.validate()?;
    let period = c.rabi_period();
    if period.is_finite() && scan.step() > period / 50.0 {
        return Err(EntanglementError::ScanTooCoarse { step: scan.step(), period });
    }
    let last_positive =
        (0..scan.n_samples).into_par_iter().filter(|&i| d_value(scan.time(i), p, c) > 0.0).max();
    let Some(i) = last_positive else {
        return Ok(None);
    };
    if i + 1 == scan.n_samples {
        return Err(EntanglementError::ScanTooShort { t_max: scan.t_max });
    }
    let t_star = bisect(scan.time(i), scan.time(i + 1), |t| d_value(t, p, c) > 0.0);
    Ok(Some(SuddenDeath { t_star, t_envelope: envelope_death_time(p, c) }))
}

/// Time at which (cot γ/4)(e^{Γ/2} − e^{−3Γ/2}) reaches 1.
pub fn envelope_death_time(p: &PhysicalParams, c: &DerivedConstants) -> Option<f64> {
    let (s, co) = superposition_weights(p.gamma);
    if s <= 0.0 || co <= 0.0 || c.a0 == 0.0 {
        return None;
    }
    let cot = co / s;
    let pkt = GaussianPacket::from_params(p);
    let alive = |t: f64| {
        let g = decay_exponent(t, &pkt, c);
        0.25 * cot * ((0.5 * g).exp() - (-1.5 * g).exp()) < 1.0
    };
    let mut hi = c.rabi_period().min(1.0);
    let mut guard = 0;
    while alive(hi) {
        hi *= 2.0;
        guard += 1;
        if guard > 200 {
            return None;
        }
    }
    Some(bisect(0.0, hi, alive))
}

/// Boundary of a predicate that holds at `lo` and fails at `hi`.
fn bisect(mut lo: f64, mut hi: f64, holds: impl Fn(f64) -> bool) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if holds(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeathBound {
    /// b3 / |b1|
    pub lhs: f64,
    /// (cot γ / 2)·sinh(Γ/2)
    pub rhs: f64,
    pub holds: bool,
}

/// Evaluates the lower bound b3/|b1| ≥ (cot γ/2)·sinh(Γ/2).
pub fn death_bound_check(
    t: f64,
    p: &PhysicalParams,
    c: &DerivedConstants,
) -> Result<DeathBound, EntanglementError> {
    let cb = coeffs_phi(t, p, c);
    let b1 = cb.b1.norm();
    if b1 <= 1e-300 {
        return Err(EntanglementError::Degenerate(format!("|b1| = {b1:e} at t = {t:e}")));
    }
    let (s, co) = superposition_weights(p.gamma);
    let g = decay_exponent(t, &GaussianPacket::from_params(p), c);
    let lhs = cb.b3 / b1;
    let rhs = 0.5 * (co / s) * (0.5 * g).sinh();
    let slack = 4.0 * f64::EPSILON * lhs.abs().max(rhs.abs());
    Ok(DeathBound { lhs, rhs, holds: lhs + slack >= rhs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{coeffs_psi, rho_phi, rho_psi};
    use crate::params::derive_constants;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, FRAC_PI_6, PI};
    const FRAC_PI_12: f64 = PI / 12.0;

    fn at(gamma: f64) -> (PhysicalParams, DerivedConstants) {
        let p = PhysicalParams::reference(gamma);
        (p, derive_constants(&p).unwrap())
    }

    #[test]
    fn maximally_mixed_has_no_concurrence() {
        let x = XState {
            diag: [0.25; 4],
            inner_coherence: Complex64::new(0.0, 0.0),
            outer_coherence: Complex64::new(0.0, 0.0),
        };
        assert_eq!(concurrence_wootters(&x).unwrap(), 0.0);
        assert!(ppt_report(&x).unwrap().separable);
    }

    #[test]
    fn initial_concurrence_is_sin_two_gamma() {
        for gamma in [0.0, FRAC_PI_12, 0.3, FRAC_PI_4, 1.2, FRAC_PI_2] {
            let (p, c) = at(gamma);
            let expected = (2.0 * gamma).sin();
            let psi = coeffs_psi(0.0, &p, &c);
            assert!((concurrence_closed_psi(&psi) - expected).abs() < 1e-15);
            assert!((concurrence_wootters(&psi.to_xstate()).unwrap() - expected).abs() < 1e-12);
            let (d, cc) = concurrence_closed_phi(&coeffs_phi(0.0, &p, &c));
            assert!((d - expected).abs() < 1e-15 && (cc - expected).abs() < 1e-15);
        }
    }

    #[test]
    fn wootters_rejects_non_positive_input() {
        let x = XState {
            diag: [0.5, 0.5, 0.0, 0.0],
            inner_coherence: Complex64::new(0.3, 0.0),
            outer_coherence: Complex64::new(0.0, 0.0),
        };
        assert!(matches!(concurrence_wootters(&x), Err(EntanglementError::Numerical(_))));
    }

    #[test]
    fn partial_transpose_of_product_state() {
        let x = XState {
            diag: [1.0, 0.0, 0.0, 0.0],
            inner_coherence: Complex64::new(0.0, 0.0),
            outer_coherence: Complex64::new(0.0, 0.0),
        };
        assert_eq!(partial_transpose(&x), x.to_matrix());
        let r = ppt_report(&x).unwrap();
        assert_eq!(r.eigenvalues, [0.0, 0.0, 0.0, 1.0]);
        assert!(r.separable);
    }

    #[test]
    fn partial_transpose_moves_coherences() {
        let x = XState {
            diag: [0.1, 0.2, 0.3, 0.4],
            inner_coherence: Complex64::new(0.05, 0.02),
            outer_coherence: Complex64::new(-0.01, 0.03),
        };
        let pt = partial_transpose(&x);
        assert_eq!(pt[(0, 3)], x.inner_coherence);
        assert_eq!(pt[(3, 0)], x.inner_coherence.conj());
        assert_eq!(pt[(1, 2)], x.outer_coherence);
        assert_eq!(pt[(2, 1)], x.outer_coherence.conj());
    }

    #[test]
    fn psi_ppt_spectrum() {
        let (p, c) = at(FRAC_PI_6);
        let t = 2.1e-4;
        let a = coeffs_psi(t, &p, &c);
        let r = ppt_report(&a.to_xstate()).unwrap();
        let root = (a.a4 * a.a4 + 4.0 * a.a3.norm_sqr()).sqrt();
        let mut expected = [a.a1, a.a2, 0.5 * a.a4 + 0.5 * root, 0.5 * a.a4 - 0.5 * root];
        expected.sort_by(f64::total_cmp);
        for (e, g) in expected.iter().zip(&r.eigenvalues) {
            assert!((e - g).abs() < 1e-15);
        }
        assert!(r.min_eig < 0.0 && !r.separable);
    }

    #[test]
    fn phi_ppt_at_start() {
        let (p, c) = at(FRAC_PI_4);
        let r = ppt_report(&rho_phi(0.0, &p, &c)).unwrap();
        assert!((r.min_eig + 0.5).abs() < 1e-15);
    }

    #[test]
    fn phi_separable_after_death() {
        let (p, c) = at(FRAC_PI_4);
        let death = sudden_death_time(&p, &c, &TimeGrid::new(3e-3, 3001)).unwrap().unwrap();
        for i in 1..100 {
            let t = death.t_star + i as f64 * 2e-5;
            assert!(ppt_report(&rho_phi(t, &p, &c)).unwrap().separable, "t = {t}");
        }
    }

    #[test]
    fn death_times_reference_values() {
        let scan = TimeGrid::new(3e-3, 30_001);
        let (p, c) = at(FRAC_PI_4);
        let d = sudden_death_time(&p, &c, &scan).unwrap().unwrap();
        assert!((d.t_star - 0.94e-3).abs() < 0.5e-3 && d.t_star > 0.4e-3, "{d:?}");
        let env = d.t_envelope.unwrap();
        assert!((env - 0.94e-3).abs() < 0.01e-3, "{env}");
        assert!(env >= d.t_star && env - d.t_star < c.rabi_period());
        let (p, c) = at(FRAC_PI_12);
        let d12 = sudden_death_time(&p, &c, &scan).unwrap().unwrap();
        assert!((d12.t_envelope.unwrap() - 0.47e-3).abs() < 0.01e-3);
        assert!(d12.t_star < d.t_star);
    }

    #[test]
    fn death_time_scan_errors() {
        let (p, c) = at(FRAC_PI_4);
        assert!(matches!(
            sudden_death_time(&p, &c, &TimeGrid::new(4.9e-4, 1000)),
            Err(EntanglementError::ScanTooShort { .. })
        ));
        assert!(matches!(
            sudden_death_time(&p, &c, &TimeGrid::new(3e-3, 20)),
            Err(EntanglementError::ScanTooCoarse { .. })
        ));
        let (p0, c0) = at(0.0);
        assert_eq!(sudden_death_time(&p0, &c0, &TimeGrid::new(3e-3, 3001)).unwrap(), None);
    }

    #[test]
    fn bound_at_origin_and_degenerate() {
        let (p, c) = at(FRAC_PI_4);
        let b = death_bound_check(0.0, &p, &c).unwrap();
        assert_eq!((b.lhs, b.rhs), (0.0, 0.0));
        assert!(b.holds);
        // cos(Ω₀t/2) = 0 kills b1
        let t = std::f64::consts::PI / c.omega0;
        let (p0, _) = at(0.0);
        assert!(matches!(death_bound_check(1e-4, &p0, &c), Err(EntanglementError::Degenerate(_))));
        let near = death_bound_check(t, &p, &c);
        assert!(near.is_err() || near.unwrap().holds);
    }

    #[test]
    fn bound_on_bright_branch() {
        // with cos(Ω₀t) = 1 the lhs collapses to (cot γ/4)(e^{Γ/2} − e^{−3Γ/2})
        use crate::dynamics::ChannelFactors;
        let gamma: f64 = 0.8;
        let cot = gamma.cos() / gamma.sin();
        for n in 1..=1000 {
            let g = n as f64 * 0.02;
            let f = ChannelFactors { rabi_phase: 0.0, gamma_exp: g, optical_phase: 0.0, cubic_phase: 0.0 };
            let b = CoeffsPhi::from_factors(&f, gamma);
            let lhs = b.b3 / b.b1.norm();
            let closed = 0.25 * cot * ((0.5 * g).exp() - (-1.5 * g).exp());
            assert!((lhs - closed).abs() < 1e-12 * closed, "{lhs} vs {closed}");
            assert!(closed >= 0.5 * cot * (0.5 * g).sinh());
        }
    }

    #[test]
    fn global_phase_of_outer_coherence_is_invisible() {
        let (p, c) = at(0.5);
        let x = rho_phi(3.1e-4, &p, &c);
        let c0 = concurrence_wootters(&x).unwrap();
        let e0 = ppt_report(&x).unwrap().eigenvalues;
        for k in 0..10 {
            let y = x.with_outer_phase(0.37 + 0.61 * k as f64);
            assert!((concurrence_wootters(&y).unwrap() - c0).abs() < 1e-12);
            let e = ppt_report(&y).unwrap().eigenvalues;
            for (a, b) in e.iter().zip(&e0) {
                assert!((a - b).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn wootters_matches_x_formula_on_psi_family() {
        let (p, c) = at(FRAC_PI_6);
        for i in 0..200 {
            let x = rho_psi(i as f64 * 1.5e-5, &p, &c);
            let g = concurrence_wootters(&x).unwrap();
            assert!((g - concurrence_x_formula(&x)).abs() < 1e-9);
        }
    }
}
