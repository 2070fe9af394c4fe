use std::f64::consts::PI;

use lbr_core::braid::slow_bands;
use lbr_core::fcs::{pk, rates, InitialState};
use lbr_core::linalg::C64;
use lbr_core::model::ModelParams;
use lbr_core::retrieve::{
    auto_window, fit_leading, fit_modes, reconstruct, FitWindow, ObservedSeries, RetrievalError, RetrievalSource,
    Verdict,
};
use lbr_core::trajectories::simulate_histogram;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn params(omega_d: f64) -> ModelParams {
    ModelParams::default().with_omega_d(omega_d)
}

fn t_cl() -> f64 {
    rates(&ModelParams::default()).t_cl
}

fn times() -> Vec<f64> {
    (4..=48).map(|i| i as f64 * t_cl() / 4.0).collect()
}

fn k_list() -> Vec<f64> {
    (-2..=2).map(|j| PI + 0.2 * j as f64).collect()
}

fn window() -> FitWindow {
    FitWindow::new(t_cl(), 12.0 * t_cl())
}

fn exact_verdict(omega: f64, window: FitWindow) -> Verdict {
    let p = params(omega);
    let times = times();
    let source = RetrievalSource::Exact { params: &p, initial: &InitialState::Ground, times: &times };
    reconstruct(source, &k_list(), window).unwrap().verdict
}

#[test]
fn synthetic_fits_are_unbiased_within_reported_errors() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let grid: Vec<f64> = (0..80).map(|i| i as f64 * 4.0).collect();
    let mut covered = 0;
    for _ in 0..100 {
        let l1 = C64::new(-rng.random_range(0.004..0.012), rng.random_range(-0.02..0.02));
        let l2 = C64::new(l1.re * rng.random_range(2.5..5.0), rng.random_range(-0.04..0.04));
        let c1 = C64::from_polar(rng.random_range(0.6..1.0), rng.random_range(-0.5..0.5));
        let c2 = C64::from_polar(rng.random_range(0.3..0.6), rng.random_range(-PI..PI));
        let mut values = Vec::new();
        let mut errors = Vec::new();
        for &t in &grid {
            let clean = c1 * (l1 * t).exp() + c2 * (l2 * t).exp();
            let gr: f64 = rng.sample(StandardNormal);
            let gi: f64 = rng.sample(StandardNormal);
            values.push(clean * C64::new(1.0 + 0.01 * gr, 0.01 * gi));
            errors.push(C64::new(0.01 * clean.norm(), 0.01 * clean.norm()));
        }
        let series = ObservedSeries { k: 0.0, times: grid.clone(), values, errors: Some(errors) };
        let Ok(fit) = fit_modes(&series, FitWindow::new(grid[0], *grid.last().unwrap()), 2) else { continue };
        let within = |truth: C64, got: C64, err: C64| (truth - got).norm() <= 2.0 * err.norm();
        let (m1, m2) = (fit.modes[0], fit.modes[1]);
        if within(l1, m1.lambda, m1.err_lambda) && within(l2, m2.lambda, m2.err_lambda) {
            covered += 1;
        }
    }
    assert!(covered >= 90, "{covered} of 100 instances covered");
}

#[test]
fn early_window_on_two_mode_data_is_flagged() {
    let (l1, l2) = (C64::new(-0.01, 0.0), C64::new(-0.03, 0.02));
    let grid: Vec<f64> = (0..200).map(|i| i as f64 * 2.0).collect();
    let values = grid.iter().map(|&t| (l1 * t).exp() + (l2 * t).exp() * 2.0).collect();
    let series = ObservedSeries { k: 0.0, times: grid.clone(), values, errors: None };
    let early = fit_leading(&series, FitWindow::new(0.0, 150.0)).unwrap();
    assert!(early.is_contaminated());
    assert!((early.mode.lambda - l1).norm() > early.mode.err_lambda.norm());
    let chosen = auto_window(&series).unwrap();
    let late = fit_leading(&series, chosen).unwrap();
    assert!(!late.is_contaminated());
    assert!((late.mode.lambda - l1).norm() < (early.mode.lambda - l1).norm());
}

#[test]
fn leading_fit_recovers_slowest_band() {
    let p = params(0.03);
    let k = PI - 0.4;
    let long: Vec<f64> = (4..=320).map(|i| i as f64 * t_cl() / 4.0).collect();
    let series = ObservedSeries::exact(&pk(&p, k, &InitialState::Ground, &long).unwrap());
    let fit = fit_leading(&series, auto_window(&series).unwrap()).unwrap();
    let exact = slow_bands(&p.with_k(k)).unwrap();
    let error = (exact[0] - fit.mode.lambda).norm() / exact[0].norm();
    assert!(error < 0.05, "relative error {error}");
}

#[test]
fn conjugate_pair_has_no_single_exponential_window() {
    let p = params(0.03);
    let exact = slow_bands(&p.with_k(PI)).unwrap();
    assert!((exact[0] - exact[1].conj()).norm() < 1e-9);
    let series = ObservedSeries::exact(&pk(&p, PI, &InitialState::Ground, &times()).unwrap());
    assert!(matches!(auto_window(&series), Err(RetrievalError::InsufficientSignal)));
}

#[test]
fn exact_series_verdicts_follow_class() {
    assert_eq!(exact_verdict(0.009, window()), Verdict::Swap);
    assert_eq!(exact_verdict(0.0075, window()), Verdict::NoSwap);
    assert_eq!(exact_verdict(0.03, window()), Verdict::Swap);
    assert_eq!(exact_verdict(0.007, window()), Verdict::NoSwap);
}

#[test]
fn verdict_is_stable_under_window_rescaling() {
    for omega in [0.03, 0.009, 0.0075, 0.007] {
        let base = exact_verdict(omega, window());
        assert_eq!(exact_verdict(omega, window().scaled(0.5)), base, "Ω_D={omega} halved");
        assert_eq!(exact_verdict(omega, window().scaled(2.0)), base, "Ω_D={omega} doubled");
    }
}

#[test]
fn sampled_verdict_agrees_with_exact() {
    let p = params(0.03);
    let times = times();
    let h = simulate_histogram(&p, &InitialState::Ground, &times, 0.02, 2024, 100_000).unwrap();
    let r = reconstruct(RetrievalSource::Sampled(&h), &k_list(), window()).unwrap();
    assert_eq!(r.verdict, exact_verdict(0.03, window()));
    assert!(r.eigen.windows(2).all(|w| w[0].k < w[1].k));
}

#[test]
fn round_trip_reproduces_slow_bands() {
    for omega in [0.03, 0.007] {
        let p = params(omega);
        let times = times();
        let source = RetrievalSource::Exact { params: &p, initial: &InitialState::Ground, times: &times };
        for e in reconstruct(source, &k_list(), window()).unwrap().eigen {
            assert!(e.lambda1.re >= e.lambda2.re);
            let exact = slow_bands(&p.with_k(e.k)).unwrap();
            for got in [e.lambda1, e.lambda2] {
                let nearest = exact[..2].iter().map(|v| (v - got).norm() / v.norm()).fold(f64::INFINITY, f64::min);
                assert!(nearest < 0.05, "Ω_D={omega} k={} relative error {nearest}", e.k);
            }
        }
    }
}
