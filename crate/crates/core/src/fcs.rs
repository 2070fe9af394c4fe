//! Full counting statistics of the bright-channel jumps.

use std::f64::consts::{PI, TAU};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{eigenvalues, expm_apply, ComplexMatrix, LinalgError, C64};
use crate::model::{
    lindbladian, pure_state, vec_trace, vectorize, JumpWeight, ModelError, ModelParams, BRIGHT, DARK, GROUND, LEVELS,
};

/// Largest probability mass allowed beyond the histogram cutoff.
pub const TAIL_TOL: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FcsError {
    #[error("probability mass {tail:.3e} beyond n_max = {n_max}; increase n_max")]
    Cutoff { n_max: usize, tail: f64 },
    #[error("initial state is not a density matrix: {0}")]
    InvalidState(&'static str),
    #[error("negative observation time {0}")]
    NegativeTime(f64),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Characteristic jump rates of the bright and dark channels.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Rates {
    pub gamma_b: f64,
    pub gamma_d: f64,
    /// Mean time between bright-channel clicks, `1/Γ_B`.
    pub t_cl: f64,
}

pub fn rates(p: &ModelParams) -> Rates {
    let gamma_b = p.omega_b * p.omega_b / p.gamma_b;
    let gamma_d = p.gamma_b * p.omega_d * p.omega_d / (p.omega_b * p.omega_b);
    Rates { gamma_b, gamma_d, t_cl: 1.0 / gamma_b }
}

/// Initial density matrix.
#[derive(Clone, Debug, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitialState {
    #[default]
    Ground,
    Dark,
    Bright,
    /// Explicit 3×3 density matrix given as `[re, im]` rows.
    Custom(Vec<Vec<[f64; 2]>>),
}

impl InitialState {
    pub fn label(&self) -> &'static str {
        match self {
            InitialState::Ground => "G",
            InitialState::Dark => "D",
            InitialState::Bright => "B",
            InitialState::Custom(_) => "custom",
        }
    }

    pub fn density_matrix(&self) -> Result<ComplexMatrix, FcsError> {
        let rho = match self {
            InitialState::Ground => pure_state(GROUND),
            InitialState::Dark => pure_state(DARK),
            InitialState::Bright => pure_state(BRIGHT),
            InitialState::Custom(rows) => {
                if rows.len() != LEVELS || rows.iter().any(|r| r.len() != LEVELS) {
                    return Err(FcsError::InvalidState("expected a 3×3 matrix"));
                }
                ComplexMatrix::from_fn(LEVELS, LEVELS, |i, j| C64::new(rows[i][j][0], rows[i][j][1]))
            }
        };
        check_density_matrix(&rho)?;
        Ok(rho)
    }
}

pub fn check_density_matrix(rho: &ComplexMatrix) -> Result<(), FcsError> {
    if !rho.is_finite() {
        return Err(FcsError::InvalidState("non-finite entries"));
    }
    if (rho - &rho.adjoint()).max_abs() > 1e-10 {
        return Err(FcsError::InvalidState("not Hermitian"));
    }
    if (rho.trace() - C64::new(1.0, 0.0)).norm() > 1e-10 {
        return Err(FcsError::InvalidState("trace differs from 1"));
    }
    if eigenvalues(rho)?.iter().any(|v| v.re < -1e-10) {
        return Err(FcsError::InvalidState("not positive semidefinite"));
    }
    Ok(())
}

/// Generating function `P_k(t) = Tr[e^{L_k t} ρ₀]` on a time grid.
#[derive(Clone, Debug, PartialEq)]
pub struct GeneratingSeries {
    pub k: f64,
    pub times: Vec<f64>,
    pub times_tcl: Vec<f64>,
    pub values: Vec<C64>,
    pub initial_state: String,
}

fn counting_generator(p: &ModelParams, k: f64) -> ComplexMatrix {
    lindbladian(&p.with_jump_weight(JumpWeight::counting(k)))
}

fn evolve_trace(l: &ComplexMatrix, rho0: &[C64], t: f64) -> Result<C64, FcsError> {
    if t < 0.0 {
        return Err(FcsError::NegativeTime(t));
    }
    if t == 0.0 {
        return Ok(vec_trace(rho0));
    }
    Ok(vec_trace(&expm_apply(l, t, rho0)?))
}

pub fn pk(p: &ModelParams, k: f64, rho0: &InitialState, times: &[f64]) -> Result<GeneratingSeries, FcsError> {
    p.validate()?;
    let rho = vectorize(&rho0.density_matrix()?);
    let l = counting_generator(p, k);
    let values = times.par_iter().map(|&t| evolve_trace(&l, &rho, t)).collect::<Result<Vec<_>, _>>()?;
    let t_cl = rates(p).t_cl;
    Ok(GeneratingSeries {
        k,
        times: times.to_vec(),
        times_tcl: times.iter().map(|t| t / t_cl).collect(),
        values,
        initial_state: rho0.label().to_string(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HistogramSource {
    Exact,
    Sampled,
}

/// Distribution of the number of detected jumps at one observation time.
#[derive(Clone, Debug, PartialEq)]
pub struct JumpHistogram {
    pub time: f64,
    /// `probs[n]` for `n = 0..=n_max`.
    pub probs: Vec<f64>,
    pub n_max: usize,
    pub source: HistogramSource,
    pub sample_count: Option<usize>,
}

impl JumpHistogram {
    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    pub fn mean(&self) -> f64 {
        self.probs.iter().enumerate().map(|(n, p)| n as f64 * p).sum()
    }

    /// `Σ (−1)ⁿ Pₙ`.
    pub fn staggered(&self) -> f64 {
        self.probs.iter().enumerate().map(|(n, p)| if n % 2 == 0 { *p } else { -*p }).sum()
    }

    /// `Σ_{l ≤ N} (−1)^l P_l` for every `N`.
    pub fn partial_sums(&self) -> Vec<f64> {
        self.probs
            .iter()
            .enumerate()
            .scan(0.0, |acc, (n, p)| {
                *acc += if n % 2 == 0 { *p } else { -*p };
                Some(*acc)
            })
            .collect()
    }
}

/// Exact `P_n(t)` by discrete inverse transform of `P_k(t)`.
pub fn pn(p: &ModelParams, rho0: &InitialState, time: f64, n_max: usize) -> Result<JumpHistogram, FcsError> {
    p.validate()?;
    if time < 0.0 {
        return Err(FcsError::NegativeTime(time));
    }
    let rho = vectorize(&rho0.density_matrix()?);
    let m = (4 * (n_max + 1)).next_power_of_two();
    let samples: Vec<C64> = (0..m)
        .into_par_iter()
        .map(|j| evolve_trace(&counting_generator(p, TAU * j as f64 / m as f64), &rho, time))
        .collect::<Result<_, _>>()?;
    let probs: Vec<f64> = (0..=n_max)
        .map(|n| {
            let s: C64 = samples
                .iter()
                .enumerate()
                .map(|(j, v)| v * C64::from_polar(1.0, -TAU * (j * n % m) as f64 / m as f64))
                .sum();
            s.re / m as f64
        })
        .collect();
    let tail = 1.0 - probs.iter().sum::<f64>();
    if tail > TAIL_TOL {
        return Err(FcsError::Cutoff { n_max, tail });
    }
    Ok(JumpHistogram { time, probs, n_max, source: HistogramSource::Exact, sample_count: None })
}

/// Smallest cutoff satisfying the tail bound `mean + 6√mean`, using the
/// first moment of the generating function.
pub fn suggested_n_max(p: &ModelParams, rho0: &InitialState, time: f64) -> Result<usize, FcsError> {
    let mean = mean_jumps(p, rho0, time)?;
    Ok((mean + 6.0 * mean.max(1.0).sqrt()).ceil() as usize + 10)
}

/// `∂P_k/∂(ik)` at k = 0 by central differences.
pub fn mean_jumps(p: &ModelParams, rho0: &InitialState, time: f64) -> Result<f64, FcsError> {
    let h = 1e-4;
    let plus = pk(p, h, rho0, &[time])?.values[0];
    let minus = pk(p, -h, rho0, &[time])?.values[0];
    Ok(((plus - minus) / C64::new(0.0, 2.0 * h)).re)
}

/// `C(k, t) = Re P_k(t)`.
pub fn staggered(p: &ModelParams, rho0: &InitialState, times: &[f64], k: f64) -> Result<Vec<f64>, FcsError> {
    Ok(pk(p, k, rho0, times)?.values.iter().map(|v| v.re).collect())
}

/// `C(π, t)`: even-minus-odd jump-count probability.
pub fn staggered_pi(p: &ModelParams, rho0: &InitialState, times: &[f64]) -> Result<Vec<f64>, FcsError> {
    staggered(p, rho0, times, PI)
}

/// Poisson distribution with the same mean as a histogram.
#[derive(Clone, Debug, PartialEq)]
pub struct PoissonBaseline {
    pub mu: f64,
    /// `Σ(−1)ⁿ e^{−μ} μⁿ/n! = e^{−2μ}`.
    pub c_p: f64,
    pub probs: Vec<f64>,
}

pub fn poisson_baseline(h: &JumpHistogram) -> PoissonBaseline {
    let mu = h.mean() / h.total();
    let mut probs = Vec::with_capacity(h.probs.len());
    let mut term = (-mu).exp();
    for n in 0..h.probs.len() {
        probs.push(term);
        term *= mu / (n + 1) as f64;
    }
    PoissonBaseline { mu, c_p: (-2.0 * mu).exp(), probs }
}

/// `Σ_{l=0}^{N} (−1)^l P_l(t)`.
pub fn partial_sum(p: &ModelParams, rho0: &InitialState, time: f64, n: usize) -> Result<f64, FcsError> {
    let n_max = n.max(suggested_n_max(p, rho0, time)?);
    Ok(pn(p, rho0, time, n_max)?.partial_sums()[n])
}

/// Time grids.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum TimeGrid {
    Linear {
        start: f64,
        stop: f64,
        points: usize,
    },
    Logarithmic {
        start: f64,
        stop: f64,
        points: usize,
    },
    /// Explicit times.
    List {
        values: Vec<f64>,
    },
}

impl TimeGrid {
    /// Sample times; when `scale` is given every value is multiplied by it
    /// (used to express grids in units of `t_cl`).
    pub fn times(&self, scale: f64) -> Vec<f64> {
        let raw: Vec<f64> = match self {
            TimeGrid::Linear { start, stop, points } => match points {
                0 => vec![],
                1 => vec![*start],
                n => (0..*n).map(|i| start + (stop - start) * i as f64 / (*n - 1) as f64).collect(),
            },
            TimeGrid::Logarithmic { start, stop, points } => match points {
                0 => vec![],
                1 => vec![*start],
                n => (0..*n).map(|i| start * (stop / start).powf(i as f64 / (*n - 1) as f64)).collect(),
            },
            TimeGrid::List { values } => values.clone(),
        };
        raw.into_iter().map(|t| t * scale).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(omega_d: f64) -> ModelParams {
        ModelParams::default().with_omega_d(omega_d)
    }

    #[test]
    fn rates_of_defaults() {
        let r = rates(&params(0.01));
        assert!((r.gamma_b - 0.02).abs() < 1e-15);
        assert!((r.t_cl - 50.0).abs() < 1e-12);
        assert!((r.gamma_d - 0.005).abs() < 1e-15);
    }

    #[test]
    fn generating_function_boundaries() {
        let p = params(0.02);
        let s = pk(&p, 0.0, &InitialState::Ground, &[0.0, 10.0, 300.0]).unwrap();
        assert!(s.values.iter().all(|v| (v - C64::new(1.0, 0.0)).norm() < 1e-10));
        let s = pk(&p, 1.3, &InitialState::Dark, &[0.0]).unwrap();
        assert_eq!(s.values[0], C64::new(1.0, 0.0));
    }

    #[test]
    fn dark_state_never_jumps_without_drive() {
        let h = pn(&params(0.0), &InitialState::Dark, 200.0, 10).unwrap();
        assert!((h.probs[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cutoff_is_enforced() {
        let err = pn(&params(0.03), &InitialState::Ground, 500.0, 2).unwrap_err();
        assert!(matches!(err, FcsError::Cutoff { .. }));
    }

    #[test]
    fn poisson_identity() {
        let mu: f64 = 1.0;
        let mut term = (-mu).exp();
        let mut alt = 0.0;
        for n in 0..60 {
            alt += if n % 2 == 0 { term } else { -term };
            term *= mu / (n + 1) as f64;
        }
        assert!((alt - (-2.0f64).exp()).abs() < 1e-15);
        let h = JumpHistogram {
            time: 0.0,
            probs: vec![1.0, 0.0],
            n_max: 1,
            source: HistogramSource::Exact,
            sample_count: None,
        };
        assert_eq!(poisson_baseline(&h).c_p, 1.0);
    }

    #[test]
    fn partial_sum_zero_is_no_jump_probability() {
        let p = params(0.01);
        let h = pn(&p, &InitialState::Ground, 100.0, 40).unwrap();
        assert!((partial_sum(&p, &InitialState::Ground, 100.0, 0).unwrap() - h.probs[0]).abs() < 1e-12);
    }

    #[test]
    fn invalid_custom_state() {
        let bad = InitialState::Custom(vec![vec![[1.0, 0.0]; 3]; 3]);
        assert!(bad.density_matrix().is_err());
        let mixed = InitialState::Custom(vec![
            vec![[0.5, 0.0], [0.0, 0.0], [0.0, 0.0]],
            vec![[0.0, 0.0], [0.5, 0.0], [0.0, 0.0]],
            vec![[0.0, 0.0], [0.0, 0.0], [0.0, 0.0]],
        ]);
        assert!(mixed.density_matrix().is_ok());
    }

    #[test]
    fn time_grids() {
        let lin = TimeGrid::Linear { start: 0.0, stop: 1.0, points: 3 }.times(2.0);
        assert_eq!(lin, vec![0.0, 1.0, 2.0]);
        let log = TimeGrid::Logarithmic { start: 1.0, stop: 100.0, points: 3 }.times(1.0);
        assert!((log[1] - 10.0).abs() < 1e-12);
    }
}
