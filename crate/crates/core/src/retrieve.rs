//! Recovery of the slowest eigenvalues from `P_k(t)` time series.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fcs::{pk, FcsError, GeneratingSeries, InitialState};
use crate::linalg::{eigenvalues, inverse_with_rcond, solve, ComplexMatrix, LinalgError, C64};
use crate::model::ModelParams;
use crate::trajectories::EnsembleHistogram;

/// Largest log-space deviation from a single exponential accepted as
/// leading-mode dominance.
pub const CONTAMINATION_MAX: f64 = 0.1;
/// Exponentials fitted per counting field by [`reconstruct`].
pub const RECONSTRUCT_MODES: usize = 3;
/// Error bars an imaginary part must exceed to count as resolved.
pub const IM_SIGNIFICANCE: f64 = 3.0;

const MAX_LM_ITERATIONS: usize = 300;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RetrievalError {
    #[error("phase jump {jump:.3} between t = {t_lo} and t = {t_hi} exceeds π/2; time grid too coarse")]
    Unwrap { t_lo: f64, t_hi: f64, jump: f64 },
    #[error("nonpositive modulus |P| = {value:.3e} at t = {t}")]
    Domain { t: f64, value: f64 },
    #[error("subtracted signal below the noise floor")]
    InsufficientSignal,
    #[error("fit window [{lo}, {hi}] holds {points} samples; need at least {needed}")]
    Window { lo: f64, hi: f64, points: usize, needed: usize },
    #[error("time grid is not uniform inside the fit window")]
    NonUniformGrid,
    #[error("no counting fields requested")]
    EmptyKList,
    #[error("least-squares fit failed: {0}")]
    Fit(&'static str),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Fcs(#[from] FcsError),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitWindow {
    pub t_lo: f64,
    pub t_hi: f64,
}

impl FitWindow {
    pub fn new(t_lo: f64, t_hi: f64) -> Self {
        Self { t_lo, t_hi }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self { t_lo: self.t_lo, t_hi: self.t_lo + (self.t_hi - self.t_lo) * factor }
    }

    fn contains(&self, t: f64) -> bool {
        t >= self.t_lo - 1e-9 && t <= self.t_hi + 1e-9
    }
}

/// `P_k(t)` samples with optional standard errors of the real and imaginary parts.
#[derive(Clone, Debug, PartialEq)]
pub struct ObservedSeries {
    pub k: f64,
    pub times: Vec<f64>,
    pub values: Vec<C64>,
    pub errors: Option<Vec<C64>>,
}

impl ObservedSeries {
    pub fn exact(s: &GeneratingSeries) -> Self {
        Self { k: s.k, times: s.times.clone(), values: s.values.clone(), errors: None }
    }

    pub fn from_histogram(h: &EnsembleHistogram, k: f64) -> Self {
        let (values, errors) = (0..h.times.len()).map(|j| h.generating_function(k, j)).unzip();
        Self { k, times: h.times.clone(), values, errors: Some(errors) }
    }

    fn select(&self, window: FitWindow, needed: usize) -> Result<Vec<usize>, RetrievalError> {
        let idx: Vec<usize> = (0..self.times.len()).filter(|&i| window.contains(self.times[i])).collect();
        if idx.len() < needed {
            return Err(RetrievalError::Window { lo: window.t_lo, hi: window.t_hi, points: idx.len(), needed });
        }
        Ok(idx)
    }

    /// Standard deviation of one sample, taken as the larger component error.
    fn sigma(&self, i: usize) -> f64 {
        self.errors.as_ref().map_or(1.0, |e| e[i].re.max(e[i].im).max(f64::MIN_POSITIVE))
    }

    fn noise_floor(&self, i: usize) -> f64 {
        match &self.errors {
            Some(_) => self.sigma(i),
            None => 1e-13 * self.values.iter().map(|v| v.norm()).fold(0.0, f64::max),
        }
    }
}

/// One fitted exponential `c·e^{λt}` with 1σ half-widths.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ModeFit {
    pub lambda: C64,
    pub c: C64,
    pub err_lambda: C64,
    pub err_c: C64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LeadingFit {
    pub mode: ModeFit,
    pub window: FitWindow,
    /// Largest deviation of `log P` from the fitted line.
    pub contamination: f64,
}

impl LeadingFit {
    pub fn is_contaminated(&self) -> bool {
        self.contamination > CONTAMINATION_MAX
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RetrievedEigen {
    pub k: f64,
    pub lambda1: C64,
    pub lambda2: C64,
    pub c1: C64,
    pub c2: C64,
    pub err_lambda1: C64,
    pub err_lambda2: C64,
    pub fit_window: (f64, f64),
    pub residual_rms: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Swap,
    NoSwap,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Swap => "swap",
            Verdict::NoSwap => "no-swap",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Reconstruction {
    /// Sorted by `k`.
    pub eigen: Vec<RetrievedEigen>,
    pub verdict: Verdict,
    /// Adjacent-k steps across which the continuous strands exchange their
    /// real-part order.
    pub exchanges: usize,
}

/// Data feeding [`reconstruct`].
#[derive(Clone, Copy, Debug)]
pub enum RetrievalSource<'a> {
    Exact { params: &'a ModelParams, initial: &'a InitialState, times: &'a [f64] },
    Sampled(&'a EnsembleHistogram),
}

fn wrap(x: f64) -> f64 {
    x - TAU * ((x + PI) / TAU).floor()
}

fn unwrapped_log(times: &[f64], values: &[C64]) -> Result<Vec<C64>, RetrievalError> {
    let mut out: Vec<C64> = Vec::with_capacity(values.len());
    for (i, (&t, v)) in times.iter().zip(values).enumerate() {
        let m = v.norm();
        if !(m > 0.0) {
            return Err(RetrievalError::Domain { t, value: m });
        }
        let phase = match out.last() {
            None => v.arg(),
            Some(prev) => {
                let jump = wrap(v.arg() - prev.im);
                if jump.abs() > FRAC_PI_2 {
                    return Err(RetrievalError::Unwrap { t_lo: times[i - 1], t_hi: t, jump });
                }
                prev.im + jump
            }
        };
        out.push(C64::new(m.ln(), phase));
    }
    Ok(out)
}

/// Weighted straight-line fit `y = a + b·t`; returns `(a, b, var_a, var_b)`
/// with variances scaled by the residual variance.
fn line_fit(t: &[f64], y: &[f64], w: &[f64]) -> (f64, f64, f64, f64) {
    let sw: f64 = w.iter().sum();
    let st: f64 = w.iter().zip(t).map(|(w, t)| w * t).sum::<f64>() / sw;
    let sy: f64 = w.iter().zip(y).map(|(w, y)| w * y).sum::<f64>() / sw;
    let stt: f64 = w.iter().zip(t).map(|(w, t)| w * (t - st).powi(2)).sum();
    let sty: f64 = w.iter().zip(t).zip(y).map(|((w, t), y)| w * (t - st) * (y - sy)).sum();
    let b = sty / stt;
    let a = sy - b * st;
    let rss: f64 = w.iter().zip(t).zip(y).map(|((w, t), y)| w * (y - a - b * t).powi(2)).sum();
    let s2 = if t.len() > 2 { rss / (t.len() - 2) as f64 } else { 0.0 };
    (a, b, s2 * (1.0 / sw + st * st / stt), s2 / stt)
}

fn complex_line_fit(t: &[f64], y: &[C64], w: &[f64]) -> (C64, C64, C64, C64) {
    let re: Vec<f64> = y.iter().map(|v| v.re).collect();
    let im: Vec<f64> = y.iter().map(|v| v.im).collect();
    let (a_re, b_re, va_re, vb_re) = line_fit(t, &re, w);
    let (a_im, b_im, va_im, vb_im) = line_fit(t, &im, w);
    (
        C64::new(a_re, a_im),
        C64::new(b_re, b_im),
        C64::new(va_re.sqrt(), va_im.sqrt()),
        C64::new(vb_re.sqrt(), vb_im.sqrt()),
    )
}

/// Linear fit of the unwrapped `log P_k(t) = log C + λt`.
pub fn fit_leading(series: &ObservedSeries, window: FitWindow) -> Result<LeadingFit, RetrievalError> {
    let idx = series.select(window, 3)?;
    let t: Vec<f64> = idx.iter().map(|&i| series.times[i]).collect();
    let v: Vec<C64> = idx.iter().map(|&i| series.values[i]).collect();
    let y = unwrapped_log(&t, &v)?;
    let w: Vec<f64> = idx.iter().zip(&v).map(|(&i, v)| (v.norm() / series.sigma(i)).powi(2)).collect();
    let (a, lambda, err_a, err_lambda) = complex_line_fit(&t, &y, &w);
    let contamination = t.iter().zip(&y).map(|(t, y)| (y - a - lambda * t).norm()).fold(0.0, f64::max);
    let c = a.exp();
    let err_c = C64::new(c.norm() * err_a.norm(), c.norm() * err_a.norm());
    Ok(LeadingFit { mode: ModeFit { lambda, c, err_lambda, err_c }, window, contamination })
}

/// Window for [`fit_leading`]: ends at the last sample whose modulus exceeds
/// 100× the noise floor and starts at the earliest time at which the
/// single-exponential fit deviates by less than [`CONTAMINATION_MAX`].
pub fn auto_window(series: &ObservedSeries) -> Result<FitWindow, RetrievalError> {
    let last = (0..series.times.len())
        .rev()
        .find(|&i| series.values[i].norm() > 100.0 * series.noise_floor(i))
        .ok_or(RetrievalError::InsufficientSignal)?;
    let t_hi = series.times[last];
    for first in 0..last.saturating_sub(2) {
        let window = FitWindow::new(series.times[first], t_hi);
        if let Ok(fit) = fit_leading(series, window) {
            if !fit.is_contaminated() {
                return Ok(window);
            }
        }
    }
    Err(RetrievalError::InsufficientSignal)
}

/// Second mode from the linear fit of `log[log P − log C¹ − λ¹t]`. The
/// leading-fit uncertainties enter as per-point weights and are added in
/// quadrature to the fitted slope and intercept errors.
pub fn fit_subleading(
    series: &ObservedSeries,
    leading: &LeadingFit,
    window: FitWindow,
) -> Result<ModeFit, RetrievalError> {
    let idx = series.select(window, 3)?;
    let t: Vec<f64> = idx.iter().map(|&i| series.times[i]).collect();
    let v: Vec<C64> = idx.iter().map(|&i| series.values[i]).collect();
    let logs = unwrapped_log(&t, &v)?;
    let lead = leading.mode;
    let log_c1 = lead.c.ln();
    let rel_c1 = lead.err_c.norm() / lead.c.norm();

    let mut ts = Vec::new();
    let mut xs = Vec::new();
    let mut var = Vec::new();
    for (j, &i) in idx.iter().enumerate() {
        let raw = logs[j] - log_c1 - lead.lambda * t[j];
        let x = C64::new(raw.re, wrap(raw.im));
        let floor = series.noise_floor(i) / v[j].norm();
        if x.norm() <= 3.0 * floor {
            continue;
        }
        let propagated = rel_c1 + lead.err_lambda.norm() * t[j];
        ts.push(t[j]);
        xs.push(x);
        var.push((floor * floor + propagated * propagated) / x.norm_sqr());
    }
    if ts.len() < 3 {
        return Err(RetrievalError::InsufficientSignal);
    }
    let y = unwrapped_log(&ts, &xs)?;
    let w: Vec<f64> = var.iter().map(|v| 1.0 / v.max(1e-300)).collect();
    let (b0, slope, err_b0, err_slope) = complex_line_fit(&ts, &y, &w);
    let lambda = lead.lambda + slope;
    let c = lead.c * b0.exp();
    let quad = |a: C64, b: C64| C64::new(a.re.hypot(b.re), a.im.hypot(b.im));
    let err_lambda = quad(err_slope, lead.err_lambda);
    let rel = err_b0.norm().hypot(rel_c1);
    Ok(ModeFit { lambda, c, err_lambda, err_c: C64::new(c.norm() * rel, c.norm() * rel) })
}

/// Multi-exponential fit result.
#[derive(Clone, Debug, PartialEq)]
pub struct ModesFit {
    /// Sorted by decreasing real part of `lambda`.
    pub modes: Vec<ModeFit>,
    pub residual_rms: f64,
    pub window: FitWindow,
}

struct Projection {
    amplitudes: Vec<C64>,
    residual: Vec<f64>,
    gram_inverse: ComplexMatrix,
}

/// Weighted linear least squares for the amplitudes at fixed rates.
fn project(t: &[f64], y: &[C64], sigma: &[f64], lambdas: &[C64]) -> Result<Projection, RetrievalError> {
    let m = lambdas.len();
    let phi = ComplexMatrix::from_fn(t.len(), m, |i, j| (lambdas[j] * t[i]).exp() / sigma[i]);
    let rhs: Vec<C64> = y.iter().zip(sigma).map(|(y, s)| y / s).collect();
    let phi_h = phi.adjoint();
    let gram = &phi_h * &phi;
    let (gram_inverse, rc) = inverse_with_rcond(&gram)?;
    if !(rc > 1e-15) {
        return Err(RetrievalError::Fit("collinear exponentials"));
    }
    let amplitudes = gram_inverse.matvec(&phi_h.matvec(&rhs));
    let fitted = phi.matvec(&amplitudes);
    let residual = rhs.iter().zip(&fitted).flat_map(|(r, f)| [r.re - f.re, r.im - f.im]).collect();
    Ok(Projection { amplitudes, residual, gram_inverse })
}

fn params_to_lambdas(theta: &[f64]) -> Vec<C64> {
    theta.chunks(2).map(|c| C64::new(c[0], c[1])).collect()
}

/// Linear-prediction estimate of `m` rates from uniformly spaced samples,
/// each prediction row scaled by `row_weight`.
fn prony_rates(y: &[C64], dt: f64, m: usize, row_weight: &[f64]) -> Result<Vec<C64>, RetrievalError> {
    let rows = y.len() - m;
    let a = ComplexMatrix::from_fn(rows, m, |r, j| y[r + j] * row_weight[r + m]);
    let b = ComplexMatrix::from_fn(rows, 1, |r, _| -y[r + m] * row_weight[r + m]);
    let a_h = a.adjoint();
    let coeffs = solve(&(&a_h * &a), &(&a_h * &b))?.column(0);
    let companion = ComplexMatrix::from_fn(m, m, |i, j| {
        if j == m - 1 {
            -coeffs[i]
        } else if i == j + 1 {
            C64::new(1.0, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    eigenvalues(&companion)?
        .into_iter()
        .map(|z| if z.norm() > 0.0 { Ok(z.ln() / dt) } else { Err(RetrievalError::Fit("vanishing prediction root")) })
        .collect()
}

/// Starting rates from plain and noise-weighted linear prediction on the
/// full grid and on every second, third and fourth sample.
fn prony_seeds(y: &[C64], sigma: &[f64], dt: f64, m: usize) -> Vec<Vec<f64>> {
    let mut seeds = Vec::new();
    for stride in 1..=4 {
        let ys: Vec<C64> = y.iter().step_by(stride).copied().collect();
        if ys.len() < 2 * m + 1 {
            break;
        }
        let inv: Vec<f64> = sigma.iter().step_by(stride).map(|s| 1.0 / s).collect();
        for weights in [vec![1.0; ys.len()], inv] {
            if let Ok(rates) = prony_rates(&ys, dt * stride as f64, m, &weights) {
                if rates.iter().all(|l| l.re.is_finite() && l.im.is_finite()) {
                    seeds.push(rates.iter().flat_map(|l| [l.re, l.im]).collect());
                }
            }
        }
    }
    seeds
}

fn real_solve(a: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let n = b.len();
    let am = ComplexMatrix::from_fn(n, n, |i, j| C64::new(a[i][j], 0.0));
    let bm = ComplexMatrix::from_fn(n, 1, |i, _| C64::new(b[i], 0.0));
    solve(&am, &bm).ok().map(|x| x.column(0).iter().map(|z| z.re).collect())
}

struct Refined {
    theta: Vec<f64>,
    cost: f64,
    proj: Projection,
    jac_t_jac: Vec<Vec<f64>>,
}

/// Levenberg-Marquardt on the variable-projection residual from `theta`.
fn refine(t: &[f64], y: &[C64], sigma: &[f64], mut theta: Vec<f64>) -> Option<Refined> {
    let cost_of = |th: &[f64]| -> Option<(f64, Projection)> {
        let p = project(t, y, sigma, &params_to_lambdas(th)).ok()?;
        Some((p.residual.iter().map(|r| r * r).sum(), p))
    };
    let (mut cost, mut proj) = cost_of(&theta)?;
    let np = theta.len();
    let mut mu = 1e-3;
    let mut jac_t_jac = vec![vec![0.0; np]; np];
    for _ in 0..MAX_LM_ITERATIONS {
        let jac: Vec<Vec<f64>> = (0..np)
            .map(|p| {
                let h = 1e-6 * theta[p].abs().max(1e-4);
                let mut plus = theta.clone();
                plus[p] += h;
                let mut minus = theta.clone();
                minus[p] -= h;
                match (cost_of(&plus), cost_of(&minus)) {
                    (Some((_, a)), Some((_, b))) => {
                        a.residual.iter().zip(&b.residual).map(|(a, b)| (a - b) / (2.0 * h)).collect()
                    }
                    _ => vec![0.0; proj.residual.len()],
                }
            })
            .collect();
        for a in 0..np {
            for b in 0..np {
                jac_t_jac[a][b] = jac[a].iter().zip(&jac[b]).map(|(x, y)| x * y).sum();
            }
        }
        let grad: Vec<f64> = (0..np).map(|a| jac[a].iter().zip(&proj.residual).map(|(j, r)| j * r).sum()).collect();
        let mut improved = false;
        for _ in 0..30 {
            let mut damped = jac_t_jac.clone();
            for a in 0..np {
                damped[a][a] += mu * jac_t_jac[a][a].max(1e-30);
            }
            let neg: Vec<f64> = grad.iter().map(|g| -g).collect();
            let Some(step) = real_solve(&damped, &neg) else {
                mu *= 4.0;
                continue;
            };
            let trial: Vec<f64> = theta.iter().zip(&step).map(|(a, b)| a + b).collect();
            if let Some((c, p)) = cost_of(&trial) {
                if c < cost {
                    let rel = (cost - c) / cost.max(1e-300);
                    let small = step.iter().zip(&theta).all(|(s, x)| s.abs() <= 1e-12 * x.abs().max(1e-6));
                    theta = trial;
                    cost = c;
                    proj = p;
                    mu = (mu / 3.0).max(1e-12);
                    improved = !(rel < 1e-15 || small);
                    break;
                }
            }
            mu *= 4.0;
        }
        if !improved {
            break;
        }
    }
    Some(Refined { theta, cost, proj, jac_t_jac })
}

/// Sum of `m` complex exponentials fitted by variable projection, started
/// from several linear-prediction estimates. Needs a uniform time grid in
/// the window.
pub fn fit_modes(series: &ObservedSeries, window: FitWindow, m: usize) -> Result<ModesFit, RetrievalError> {
    let idx = series.select(window, 2 * m + 2)?;
    let t0 = series.times[idx[0]];
    let t: Vec<f64> = idx.iter().map(|&i| series.times[i] - t0).collect();
    let dt = t[1] - t[0];
    if t.windows(2).any(|w| ((w[1] - w[0]) - dt).abs() > 1e-9 * dt.abs().max(1.0)) {
        return Err(RetrievalError::NonUniformGrid);
    }
    let y: Vec<C64> = idx.iter().map(|&i| series.values[i]).collect();
    let sigma: Vec<f64> = idx.iter().map(|&i| series.sigma(i)).collect();

    let Refined { theta, cost, proj, jac_t_jac } = prony_seeds(&y, &sigma, dt, m)
        .into_iter()
        .filter_map(|seed| refine(&t, &y, &sigma, seed))
        .min_by(|a, b| a.cost.total_cmp(&b.cost))
        .ok_or(RetrievalError::Fit("degenerate starting rates"))?;
    let np = theta.len();

    let n_real = 2 * t.len();
    let dof = n_real.saturating_sub(4 * m).max(1) as f64;
    let s2 = cost / dof;
    let cov = {
        let a = ComplexMatrix::from_fn(np, np, |i, j| C64::new(jac_t_jac[i][j], 0.0));
        inverse_with_rcond(&a).map(|(inv, _)| inv).unwrap_or_else(|_| ComplexMatrix::zeros(np, np))
    };
    let band = TAU / dt;
    let lambdas: Vec<C64> =
        params_to_lambdas(&theta).into_iter().map(|l| C64::new(l.re, l.im - band * (l.im / band).round())).collect();
    let mut modes: Vec<ModeFit> = lambdas
        .iter()
        .enumerate()
        .map(|(j, &lambda)| {
            let shift = (-lambda * t0).exp();
            let c = proj.amplitudes[j] * shift;
            let var_c = (s2 * proj.gram_inverse[(j, j)].re).max(0.0) / 2.0;
            let err_c = var_c.sqrt() * shift.norm();
            ModeFit {
                lambda,
                c,
                err_lambda: C64::new(
                    (s2 * cov[(2 * j, 2 * j)].re).max(0.0).sqrt(),
                    (s2 * cov[(2 * j + 1, 2 * j + 1)].re).max(0.0).sqrt(),
                ),
                err_c: C64::new(err_c, err_c),
            }
        })
        .collect();
    modes.sort_by(|a, b| b.lambda.re.total_cmp(&a.lambda.re));
    Ok(ModesFit { modes, residual_rms: (cost / n_real as f64).sqrt(), window })
}

/// Imaginary part dropped when it is below [`IM_SIGNIFICANCE`] error bars.
fn resolved(lambda: C64, err: C64) -> C64 {
    if lambda.im.abs() < IM_SIGNIFICANCE * err.im.abs() {
        C64::new(lambda.re, 0.0)
    } else {
        lambda
    }
}

/// Number of adjacent-k steps at which continuity matching pairs the
/// slower eigenvalue with the faster one at the next field. Imaginary parts
/// that are not resolved by the fit errors are treated as zero.
pub fn count_exchanges(eigen: &[RetrievedEigen]) -> usize {
    let pair = |e: &RetrievedEigen| (resolved(e.lambda1, e.err_lambda1), resolved(e.lambda2, e.err_lambda2));
    eigen
        .windows(2)
        .filter(|w| {
            let ((a1, a2), (b1, b2)) = (pair(&w[0]), pair(&w[1]));
            let same = (a1 - b1).norm() + (a2 - b2).norm();
            let crossed = (a1 - b2).norm() + (a2 - b1).norm();
            crossed < same
        })
        .count()
}

pub fn retrieve_at(series: &ObservedSeries, window: FitWindow) -> Result<RetrievedEigen, RetrievalError> {
    let fit = fit_modes(series, window, RECONSTRUCT_MODES)?;
    let (m1, m2) = (fit.modes[0], fit.modes[1]);
    Ok(RetrievedEigen {
        k: series.k,
        lambda1: m1.lambda,
        lambda2: m2.lambda,
        c1: m1.c,
        c2: m2.c,
        err_lambda1: m1.err_lambda,
        err_lambda2: m2.err_lambda,
        fit_window: (window.t_lo, window.t_hi),
        residual_rms: fit.residual_rms,
    })
}

/// Per-k retrieval of the two slowest eigenvalues and the swap verdict.
pub fn reconstruct(
    source: RetrievalSource<'_>,
    k_list: &[f64],
    window: FitWindow,
) -> Result<Reconstruction, RetrievalError> {
    if k_list.is_empty() {
        return Err(RetrievalError::EmptyKList);
    }
    let mut ks = k_list.to_vec();
    ks.sort_by(f64::total_cmp);
    let eigen = ks
        .par_iter()
        .map(|&k| {
            let series = match source {
                RetrievalSource::Exact { params, initial, times } => {
                    ObservedSeries::exact(&pk(params, k, initial, times)?)
                }
                RetrievalSource::Sampled(h) => ObservedSeries::from_histogram(h, k),
            };
            retrieve_at(&series, window)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let exchanges = count_exchanges(&eigen);
    let verdict = if exchanges % 2 == 1 { Verdict::Swap } else { Verdict::NoSwap };
    Ok(Reconstruction { eigen, verdict, exchanges })
}
