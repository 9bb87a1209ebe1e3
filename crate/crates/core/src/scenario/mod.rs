//! Time sweeps over the closed forms, optionally cross-checked against the
//! grid oracle, for the command-line tool.

mod config;
mod output;

pub use config::{
    parse_angle, parse_config, OutputFormat, RawConfig, ScenarioConfig, DEFAULT_SAMPLES, DEFAULT_T_MAX,
};
pub use output::{render, write_output};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::dynamics::{block_eigenvalues, ChannelFactors, CoeffsOneAtom, CoeffsPhi, CoeffsPsi, XState};
use crate::entanglement::{
    concurrence_closed_phi, concurrence_closed_psi, concurrence_wootters, ppt_report, sudden_death_time,
    TimeGrid,
};
use crate::error::{CheckKind, EntanglementError, ScenarioError};
use crate::oracle::{rho_from_channels, Case, ChannelPropagator, Grid, NumericRho, DEFAULT_MAX_DT};
use crate::params::{derive_constants, DerivedConstants, PhysicalParams};

/// Allowed drift of tr ρ from one.
pub const TRACE_TOLERANCE: f64 = 1e-12;
/// Most negative eigenvalue of ρ accepted as rounding noise.
pub const POSITIVITY_TOLERANCE: f64 = 1e-12;
/// Closed-form vs Wootters concurrence.
pub const CONCURRENCE_TOLERANCE: f64 = 1e-9;
/// Closed-form vs grid-propagated matrix entries.
pub const ORACLE_TOLERANCE: f64 = 1e-6;

/// Longest window searched for the final extinction time, as a multiple of `t_max`.
const DEATH_SCAN_GROWTH: u32 = 20;
/// Death-time scan resolution relative to the Rabi period.
const DEATH_SCAN_PER_PERIOD: f64 = 100.0;
const DEATH_SCAN_MAX_SAMPLES: usize = 20_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Cell {
    Num(f64),
    Bool(bool),
}

/// One (γ, t) sample, laid out as [`columns`] for the scenario.
pub type TimeSeriesRow = Vec<Cell>;

/// Column names of the dataset for one scenario kind.
pub fn columns(case: Case) -> &'static [&'static str] {
    match case {
        Case::Psi => &[
            "t",
            "gamma",
            "gamma_exp",
            "a1",
            "a2",
            "re_a3",
            "im_a3",
            "a4",
            "concurrence_closed",
            "concurrence_general",
            "lambda4",
            "min_ppt_eig",
            "separable",
        ],
        Case::Phi => &[
            "t",
            "gamma",
            "gamma_exp",
            "re_b1",
            "im_b1",
            "b2",
            "b3",
            "b5",
            "concurrence_closed",
            "concurrence_general",
            "d_value",
            "nu4",
            "min_ppt_eig",
            "separable",
        ],
        Case::OneAtom => &["t", "gamma", "gamma_exp", "q1", "re_q2", "im_q2", "q3", "purity"],
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeathTime {
    pub gamma: f64,
    /// `None` when the state never carries concurrence (γ = 0 or π/2).
    pub t_star: Option<f64>,
    pub t_envelope: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub constants: DerivedConstants,
    /// φ scenario only.
    pub death_times: Vec<DeathTime>,
    /// Largest entrywise closed-vs-grid gap; present when the oracle ran.
    pub oracle_max_discrepancy: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub columns: &'static [&'static str],
    /// Grouped by γ in config order, ascending t within a group.
    pub rows: Vec<TimeSeriesRow>,
    pub summary: Summary,
}

fn invariant(detail: String) -> ScenarioError {
    ScenarioError::Tolerance { kind: CheckKind::Invariant, detail }
}

fn oracle_failure(detail: String) -> ScenarioError {
    ScenarioError::Tolerance { kind: CheckKind::Oracle, detail }
}

fn from_entanglement(e: EntanglementError) -> ScenarioError {
    invariant(e.to_string())
}

fn factors(t: f64, cfg: &ScenarioConfig, p: &PhysicalParams, c: &DerivedConstants) -> ChannelFactors {
    let f = ChannelFactors::at(t, p, c);
    if cfg.zero_optical_phase {
        f.without_optical_phase()
    } else {
        f
    }
}

fn check_state(rho: &XState, t: f64, gamma: f64) -> Result<(), ScenarioError> {
    let trace = rho.trace();
    if (trace - 1.0).abs() > TRACE_TOLERANCE {
        return Err(invariant(format!("tr ρ = {trace} at t = {t:e}, γ = {gamma}")));
    }
    let min = rho.eigenvalues()[0];
    if min < -POSITIVITY_TOLERANCE {
        return Err(invariant(format!("ρ has eigenvalue {min:e} at t = {t:e}, γ = {gamma}")));
    }
    Ok(())
}

fn check_concurrence(closed: f64, general: f64, t: f64, gamma: f64) -> Result<(), ScenarioError> {
    if (closed - general).abs() > CONCURRENCE_TOLERANCE {
        return Err(invariant(format!(
            "closed concurrence {closed} vs general {general} at t = {t:e}, γ = {gamma}"
        )));
    }
    Ok(())
}

fn row(
    t: f64,
    cfg: &ScenarioConfig,
    p: &PhysicalParams,
    c: &DerivedConstants,
) -> Result<TimeSeriesRow, ScenarioError> {
    let f = factors(t, cfg, p, c);
    let g = p.gamma;
    let mut cells = vec![Cell::Num(t), Cell::Num(g), Cell::Num(f.gamma_exp)];
    let mut push = |v: f64| cells.push(Cell::Num(v));
    match cfg.scenario {
        Case::Psi => {
            let a = CoeffsPsi::from_factors(&f, g);
            let rho = a.to_xstate();
            check_state(&rho, t, g)?;
            let closed = concurrence_closed_psi(&a);
            let general = concurrence_wootters(&rho).map_err(from_entanglement)?;
            check_concurrence(closed, general, t, g)?;
            let ppt = ppt_report(&rho).map_err(from_entanglement)?;
            // the |++⟩/|−−⟩ block of the partial transpose
            let (lambda4, _) = block_eigenvalues(rho.diag[0], rho.diag[3], rho.inner_coherence.norm());
            for v in [a.a1, a.a2, a.a3.re, a.a3.im, a.a4, closed, general, lambda4, ppt.min_eig] {
                push(v);
            }
            cells.push(Cell::Bool(ppt.separable));
        }
        Case::Phi => {
            let b = CoeffsPhi::from_factors(&f, g);
            let rho = b.to_xstate();
            check_state(&rho, t, g)?;
            let (d, closed) = concurrence_closed_phi(&b);
            let general = concurrence_wootters(&rho).map_err(from_entanglement)?;
            check_concurrence(closed, general, t, g)?;
            let ppt = ppt_report(&rho).map_err(from_entanglement)?;
            let nu4 = b.b3 - b.b1.norm();
            for v in [b.b1.re, b.b1.im, b.b2, b.b3, b.b5, closed, general, d, nu4, ppt.min_eig] {
                push(v);
            }
            cells.push(Cell::Bool(ppt.separable));
        }
        Case::OneAtom => {
            let q = CoeffsOneAtom::from_factors(&f, g);
            let trace = q.q1 + q.q3;
            if (trace - 1.0).abs() > TRACE_TOLERANCE {
                return Err(invariant(format!("tr ρ = {trace} at t = {t:e}, γ = {g}")));
            }
            let purity = q.purity();
            if purity > 1.0 + TRACE_TOLERANCE {
                return Err(invariant(format!("purity {purity} above one at t = {t:e}, γ = {g}")));
            }
            for v in [q.q1, q.q2.re, q.q2.im, q.q3, purity] {
                push(v);
            }
        }
    }
    Ok(cells)
}

/// Final extinction time, widening the window past `t_max` while d(t) is
/// still positive at its end.
fn death_time(
    cfg: &ScenarioConfig,
    p: &PhysicalParams,
    c: &DerivedConstants,
) -> Result<DeathTime, ScenarioError> {
    let step = (c.rabi_period() / DEATH_SCAN_PER_PERIOD).min(cfg.t_max / (cfg.n_samples - 1) as f64);
    let mut window = cfg.t_max;
    for _ in 0..=DEATH_SCAN_GROWTH {
        let n = (window / step).ceil() as usize + 1;
        if n > DEATH_SCAN_MAX_SAMPLES {
            break;
        }
        match sudden_death_time(p, c, &TimeGrid::new(window, n.max(2))) {
            Ok(found) => {
                return Ok(DeathTime {
                    gamma: p.gamma,
                    t_star: found.map(|s| s.t_star),
                    t_envelope: found.and_then(|s| s.t_envelope),
                })
            }
            Err(EntanglementError::ScanTooShort { .. }) => window *= 2.0,
            Err(e) => return Err(from_entanglement(e)),
        }
    }
    Err(invariant(format!(
        "concurrence still alive at t = {window:e} s for γ = {}; no extinction time found",
        p.gamma
    )))
}

fn closed_matrix(t: f64, cfg: &ScenarioConfig, p: &PhysicalParams, c: &DerivedConstants) -> NumericRho {
    let f = factors(t, cfg, p, c);
    match cfg.scenario {
        Case::Psi => NumericRho::TwoQubit(CoeffsPsi::from_factors(&f, p.gamma).to_xstate().to_matrix()),
        Case::Phi => NumericRho::TwoQubit(CoeffsPhi::from_factors(&f, p.gamma).to_xstate().to_matrix()),
        Case::OneAtom => NumericRho::OneQubit(CoeffsOneAtom::from_factors(&f, p.gamma).to_matrix()),
    }
}

fn max_gap(a: &NumericRho, b: &NumericRho) -> f64 {
    fn gap<'a>(x: impl Iterator<Item = &'a Complex64>, y: impl Iterator<Item = &'a Complex64>) -> f64 {
        x.zip(y).map(|(u, v)| (u - v).norm()).fold(0.0, f64::max)
    }
    match (a, b) {
        (NumericRho::TwoQubit(x), NumericRho::TwoQubit(y)) => gap(x.iter(), y.iter()),
        (NumericRho::OneQubit(x), NumericRho::OneQubit(y)) => gap(x.iter(), y.iter()),
        _ => f64::INFINITY,
    }
}

/// Propagates the channels once over the output times and compares every γ.
fn oracle_discrepancy(
    cfg: &ScenarioConfig,
    c: &DerivedConstants,
    grid_times: &TimeGrid,
) -> Result<f64, ScenarioError> {
    let p0 = cfg.params_for(cfg.gammas[0]);
    let grid = Grid::default_for(&p0).map_err(|e| oracle_failure(e.to_string()))?;
    grid.check_coverage(&p0, c, cfg.t_max).map_err(|e| oracle_failure(e.to_string()))?;
    let omega = if cfg.zero_optical_phase { 0.0 } else { c.omega };
    let mut prop = ChannelPropagator::new(&p0, c, grid, DEFAULT_MAX_DT);
    let mut worst: f64 = 0.0;
    for t in grid_times.times() {
        let set = prop.advance_to(t).map_err(|e| oracle_failure(e.to_string()))?;
        let gaps: Vec<f64> = cfg
            .gammas
            .par_iter()
            .map(|&g| {
                let p = cfg.params_for(g);
                let num = rho_from_channels(cfg.scenario, g, omega, &set, &set)?;
                Ok(max_gap(&num, &closed_matrix(t, cfg, &p, c)))
            })
            .collect::<Result<_, crate::error::OracleError>>()
            .map_err(|e| oracle_failure(e.to_string()))?;
        for (&g, gap) in cfg.gammas.iter().zip(gaps) {
            if gap.is_nan() || gap > ORACLE_TOLERANCE {
                return Err(oracle_failure(format!(
                    "closed form and grid differ by {gap:e} at t = {t:e}, γ = {g}"
                )));
            }
            worst = worst.max(gap);
        }
    }
    Ok(worst)
}

fn run(cfg: &ScenarioConfig) -> Result<Dataset, ScenarioError> {
    let c = derive_constants(&cfg.physical).map_err(|e| ScenarioError::config(e.field, 0, e.reason))?;
    let times = TimeGrid::new(cfg.t_max, cfg.n_samples);
    let mut rows = Vec::with_capacity(cfg.gammas.len() * cfg.n_samples);
    let mut death_times = Vec::new();
    for &g in &cfg.gammas {
        let p = cfg.params_for(g);
        let block: Vec<TimeSeriesRow> = (0..times.n_samples)
            .into_par_iter()
            .map(|i| row(times.time(i), cfg, &p, &c))
            .collect::<Result<_, _>>()?;
        rows.extend(block);
        if cfg.scenario == Case::Phi {
            death_times.push(death_time(cfg, &p, &c)?);
        }
    }
    let oracle_max_discrepancy =
        if cfg.run_oracle { Some(oracle_discrepancy(cfg, &c, &times)?) } else { None };
    Ok(Dataset {
        columns: columns(cfg.scenario),
        rows,
        summary: Summary { constants: c, death_times, oracle_max_discrepancy },
    })
}

/// Evaluates every (γ, t) row and the summary, failing on the first broken
/// invariant or tolerance.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<Dataset, ScenarioError> {
    cfg.validate()?;
    if cfg.workers == 0 {
        return run(cfg);
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| ScenarioError::config("workers", 0, e.to_string()))?;
    pool.install(|| run(cfg))
}
