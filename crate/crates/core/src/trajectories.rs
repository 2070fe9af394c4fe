//! Quantum-jump sampling of the bright-channel click record.
//!
//! The no-jump evolution uses the exact propagator `exp(−i H_eff dt)` and a
//! jump in each step of length `dt` fires with probability `γ|⟨c|ψ⟩|² dt`
//! for the normalized state. Every jump collapses to `|G⟩`, so the process
//! renews after each click and the per-step hazard only depends on the number
//! of steps since the last reset. The hazard tables are computed once and
//! each waiting time is drawn by inversion of the discrete survival function,
//! which reproduces the step-by-step Bernoulli scheme in distribution.
//!
//! Randomness: `ChaCha8Rng::seed_from_u64(seed)` with stream number equal to
//! the trajectory index.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::fcs::{FcsError, HistogramSource, InitialState, JumpHistogram};
use crate::linalg::{eig_full, expm, ComplexMatrix, LinalgError, C64};
use crate::model::{h_eff, ModelError, ModelParams, BRIGHT, DARK, GROUND, LEVELS};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TrajectoryError {
    #[error("time step {dt} exceeds the limit {limit} (0.01/γ_B)")]
    StepSize { dt: f64, limit: f64 },
    #[error("invalid horizon {0}")]
    Horizon(f64),
    #[error("initial state must be pure")]
    MixedState,
    #[error("histogram time {time} beyond record horizon {t_max}")]
    BeyondHorizon { time: f64, t_max: f64 },
    #[error(transparent)]
    State(#[from] FcsError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Detected bright-channel jumps of one trajectory.
#[derive(Clone, Debug, PartialEq)]
pub struct ClickRecord {
    pub jump_times: Vec<f64>,
    pub t_max: f64,
    pub seed: u64,
    pub trajectory: u64,
}

impl ClickRecord {
    pub fn clicks_before(&self, t: f64) -> usize {
        self.jump_times.partition_point(|&s| s < t)
    }
}

/// `counts[n][j]`: number of trajectories with exactly `n` clicks before `times[j]`.
#[derive(Clone, Debug, PartialEq)]
pub struct EnsembleHistogram {
    pub times: Vec<f64>,
    pub counts: Vec<Vec<u64>>,
    pub n_trajectories: u64,
}

impl EnsembleHistogram {
    pub fn probability(&self, n: usize, time_index: usize) -> f64 {
        self.counts.get(n).map_or(0.0, |row| row[time_index] as f64 / self.n_trajectories as f64)
    }

    /// Empirical `Σₙ e^{ikn} P̂ₙ(t)`; the second value holds the standard
    /// errors of the real and imaginary parts.
    pub fn generating_function(&self, k: f64, time_index: usize) -> (C64, C64) {
        let n_traj = self.n_trajectories as f64;
        let (mut mean, mut cos2, mut sin2) = (C64::new(0.0, 0.0), 0.0, 0.0);
        for (n, row) in self.counts.iter().enumerate() {
            let w = row[time_index] as f64 / n_traj;
            let (s, c) = (k * n as f64).sin_cos();
            mean += C64::new(w * c, w * s);
            cos2 += w * c * c;
            sin2 += w * s * s;
        }
        let se = |second: f64, first: f64| ((second - first * first).max(0.0) / n_traj).sqrt();
        (mean, C64::new(se(cos2, mean.re), se(sin2, mean.im)))
    }

    /// Empirical `C(π, t)` with its binomial standard error.
    pub fn staggered(&self, time_index: usize) -> (f64, f64) {
        let (v, se) = self.generating_function(std::f64::consts::PI, time_index);
        (v.re, se.re)
    }

    pub fn jump_histogram(&self, time_index: usize) -> JumpHistogram {
        let probs: Vec<f64> = (0..self.counts.len()).map(|n| self.probability(n, time_index)).collect();
        JumpHistogram {
            time: self.times[time_index],
            n_max: probs.len().saturating_sub(1),
            probs,
            source: HistogramSource::Sampled,
            sample_count: Some(self.n_trajectories as usize),
        }
    }
}

/// Precomputed no-jump hazards for a given start state.
struct HazardTable {
    /// `survival[m]`: probability of no jump in the first `m` steps.
    survival: Vec<f64>,
    /// Probability that a jump in step `m` is a bright one.
    bright_share: Vec<f64>,
}

impl HazardTable {
    fn new(p: &ModelParams, propagator: &ComplexMatrix, start: &[C64], steps: usize, dt: f64) -> Self {
        let mut psi = start.to_vec();
        let mut survival = Vec::with_capacity(steps + 1);
        let mut bright_share = Vec::with_capacity(steps);
        let mut alive = 1.0;
        survival.push(alive);
        for _ in 0..steps {
            let bright = p.gamma_b * psi[BRIGHT].norm_sqr() * dt;
            let dark = p.gamma_d * psi[DARK].norm_sqr() * dt;
            let hazard = (bright + dark).min(1.0);
            bright_share.push(if hazard > 0.0 { bright / (bright + dark) } else { 1.0 });
            alive *= 1.0 - hazard;
            survival.push(alive);
            psi = propagator.matvec(&psi);
            let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            psi.iter_mut().for_each(|z| *z /= norm);
        }
        Self { survival, bright_share }
    }

    /// Step index in which the next jump fires, or `None` if none within the table.
    fn draw(&self, u: f64) -> Option<usize> {
        // first m with survival[m + 1] < u
        let idx = self.survival.partition_point(|&s| s >= u);
        (idx < self.survival.len()).then(|| idx - 1)
    }
}

/// Sampler for one parameter set, shared across trajectories.
pub struct Sampler {
    params: ModelParams,
    dt: f64,
    steps: usize,
    t_max: f64,
    initial: HazardTable,
    reset: HazardTable,
}

fn pure_vector(rho0: &InitialState) -> Result<Vec<C64>, TrajectoryError> {
    let level = match rho0 {
        InitialState::Ground => Some(GROUND),
        InitialState::Dark => Some(DARK),
        InitialState::Bright => Some(BRIGHT),
        InitialState::Custom(_) => None,
    };
    if let Some(l) = level {
        let mut v = vec![C64::new(0.0, 0.0); LEVELS];
        v[l] = C64::new(1.0, 0.0);
        return Ok(v);
    }
    let rho = rho0.density_matrix()?;
    let spec = eig_full(&rho)?;
    let top = (0..spec.len()).max_by(|&a, &b| spec.values[a].re.total_cmp(&spec.values[b].re)).unwrap_or(0);
    if (spec.values[top].re - 1.0).abs() > 1e-8 {
        return Err(TrajectoryError::MixedState);
    }
    let v = spec.right(top);
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    Ok(v.into_iter().map(|z| z / norm).collect())
}

impl Sampler {
    pub fn new(p: &ModelParams, rho0: &InitialState, t_max: f64, dt: f64) -> Result<Self, TrajectoryError> {
        p.validate()?;
        let limit = 0.01 / p.gamma_b;
        if !(dt > 0.0 && dt <= limit * (1.0 + 1e-12)) {
            return Err(TrajectoryError::StepSize { dt, limit });
        }
        if !(t_max > 0.0 && t_max.is_finite()) {
            return Err(TrajectoryError::Horizon(t_max));
        }
        let start = pure_vector(rho0)?;
        let propagator = expm(&h_eff(p).scale(C64::new(0.0, -dt)))?;
        let steps = (t_max / dt).ceil() as usize;
        let mut ground = vec![C64::new(0.0, 0.0); LEVELS];
        ground[GROUND] = C64::new(1.0, 0.0);
        Ok(Self {
            params: *p,
            dt,
            steps,
            t_max,
            initial: HazardTable::new(p, &propagator, &start, steps, dt),
            reset: HazardTable::new(p, &propagator, &ground, steps, dt),
        })
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn run(&self, seed: u64, trajectory: u64) -> ClickRecord {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(trajectory);
        let mut jump_times = Vec::new();
        let mut table = &self.initial;
        let mut step0 = 0usize;
        loop {
            let u: f64 = rng.random();
            let Some(m) = table.draw(u) else { break };
            let step = step0 + m;
            if step >= self.steps {
                break;
            }
            let t = (step + 1) as f64 * self.dt;
            if t >= self.t_max {
                break;
            }
            let bright = table.bright_share[m] >= 1.0 || rng.random::<f64>() < table.bright_share[m];
            if bright {
                jump_times.push(t);
            }
            step0 = step + 1;
            table = &self.reset;
        }
        ClickRecord { jump_times, t_max: self.t_max, seed, trajectory }
    }

    pub fn ensemble(&self, seed: u64, n_trajectories: u64) -> Vec<ClickRecord> {
        (0..n_trajectories).into_par_iter().map(|i| self.run(seed, i)).collect()
    }
}

/// One trajectory.
pub fn simulate(
    p: &ModelParams,
    rho0: &InitialState,
    t_max: f64,
    dt: f64,
    seed: u64,
) -> Result<ClickRecord, TrajectoryError> {
    Ok(Sampler::new(p, rho0, t_max, dt)?.run(seed, 0))
}

/// Histogram of click counts at each requested time.
pub fn aggregate(records: &[ClickRecord], times: &[f64]) -> Result<EnsembleHistogram, TrajectoryError> {
    if let Some(r) = records.iter().find(|r| times.iter().any(|&t| t > r.t_max)) {
        let time = times.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        return Err(TrajectoryError::BeyondHorizon { time, t_max: r.t_max });
    }
    let mut counts: Vec<Vec<u64>> = vec![vec![0; times.len()]];
    for r in records {
        for (j, &t) in times.iter().enumerate() {
            let n = r.clicks_before(t);
            if n >= counts.len() {
                counts.resize(n + 1, vec![0; times.len()]);
            }
            counts[n][j] += 1;
        }
    }
    Ok(EnsembleHistogram { times: times.to_vec(), counts, n_trajectories: records.len() as u64 })
}

/// Simulate an ensemble and aggregate it at the given times.
pub fn simulate_histogram(
    p: &ModelParams,
    rho0: &InitialState,
    times: &[f64],
    dt: f64,
    seed: u64,
    n_trajectories: u64,
) -> Result<EnsembleHistogram, TrajectoryError> {
    let t_max = times.iter().cloned().fold(0.0, f64::max) + dt;
    let sampler = Sampler::new(p, rho0, t_max, dt)?;
    aggregate(&sampler.ensemble(seed, n_trajectories), times)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(omega_d: f64) -> ModelParams {
        ModelParams::default().with_omega_d(omega_d)
    }

    #[test]
    fn dark_state_is_silent() {
        let r = simulate(&params(0.0), &InitialState::Dark, 500.0, 0.02, 7).unwrap();
        assert!(r.jump_times.is_empty());
    }

    #[test]
    fn records_are_reproducible_and_ordered() {
        let p = params(0.03);
        let a = simulate(&p, &InitialState::Ground, 1000.0, 0.02, 11).unwrap();
        let b = simulate(&p, &InitialState::Ground, 1000.0, 0.02, 11).unwrap();
        assert_eq!(a, b);
        assert!(!a.jump_times.is_empty());
        assert!(a.jump_times.windows(2).all(|w| w[0] < w[1]));
        assert!(a.jump_times.iter().all(|&t| t < a.t_max));
        let c = simulate(&p, &InitialState::Ground, 1000.0, 0.02, 12).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn coarse_step_rejected() {
        let err = simulate(&params(0.01), &InitialState::Ground, 10.0, 0.05, 0).unwrap_err();
        assert!(matches!(err, TrajectoryError::StepSize { .. }));
    }

    #[test]
    fn aggregate_small_cases() {
        let empty = ClickRecord { jump_times: vec![], t_max: 10.0, seed: 0, trajectory: 0 };
        let h = aggregate(std::slice::from_ref(&empty), &[1.0, 5.0]).unwrap();
        assert_eq!(h.counts, vec![vec![1, 1]]);

        let one = ClickRecord { jump_times: vec![1.0], t_max: 10.0, seed: 0, trajectory: 0 };
        let two = ClickRecord { jump_times: vec![1.0, 2.0], t_max: 10.0, seed: 0, trajectory: 1 };
        let h = aggregate(&[one, two], &[3.0]).unwrap();
        assert_eq!(h.counts, vec![vec![0], vec![1], vec![1]]);
        assert!(aggregate(&[empty], &[11.0]).is_err());
    }

    #[test]
    fn mixed_initial_state_rejected() {
        let mixed = InitialState::Custom(vec![
            vec![[0.5, 0.0], [0.0, 0.0], [0.0, 0.0]],
            vec![[0.0, 0.0], [0.5, 0.0], [0.0, 0.0]],
            vec![[0.0, 0.0], [0.0, 0.0], [0.0, 0.0]],
        ]);
        assert!(matches!(Sampler::new(&params(0.01), &mixed, 10.0, 0.02), Err(TrajectoryError::MixedState)));
        let h = 0.5f64.sqrt();
        let pure = InitialState::Custom(vec![
            vec![[0.5, 0.0], [0.5, 0.0], [0.0, 0.0]],
            vec![[0.5, 0.0], [0.5, 0.0], [0.0, 0.0]],
            vec![[0.0, 0.0], [0.0, 0.0], [0.0, 0.0]],
        ]);
        let v = pure_vector(&pure).unwrap();
        assert!((v[0].norm() - h).abs() < 1e-10 && (v[1].norm() - h).abs() < 1e-10);
    }
}
