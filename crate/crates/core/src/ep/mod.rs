//! Exceptional points of the counting-field Lindbladian: search,
//! certification, transition scans and the 0–π duality under dark decay.

mod jordan;
mod two_level;

use std::f64::consts::{PI, TAU};

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::braid::{classify, slow_bands, BraidError, ClassLabel};
use crate::linalg::{eig_full, inner, vec_norm, LinalgError, C64};
use crate::model::{lindbladian, ModelParams};
use crate::optimize::{nelder_mead, SimplexOptions};

pub use jordan::{jordan_chain, puiseux_first_order, JordanChainData, PuiseuxExpansion};
pub use two_level::{cubic_discriminant, two_level_ep_gamma, two_level_exact};

/// Largest residual gap accepted for an exceptional point.
pub const GAP_TOL: f64 = 1e-8;
/// Minimal normalized overlap of the coalescing eigenvectors.
pub const OVERLAP_MIN: f64 = 1.0 - 1e-4;

const OMEGA_SCALE: f64 = 1e3;
const CLUSTER_FACTOR: f64 = 100.0;
const PINNED_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EpError {
    #[error("degeneracy at Ω_D = {omega_d:.9}, k = {k:.9} has independent eigenvectors (overlap {overlap:.6}): diabolic, not exceptional")]
    Diabolic { omega_d: f64, k: f64, overlap: f64 },
    #[error("search from Ω_D = {seed_omega}, k = {seed_k} stalled at gap {gap:.3e}")]
    Search { seed_omega: f64, seed_k: f64, gap: f64 },
    #[error("Jordan structure of order {requested} not present ({reason})")]
    OrderMismatch { requested: usize, reason: &'static str },
    #[error("first-order coupling v₁ᵀ·L_J·u₁ vanishes; no cube-root splitting")]
    DegeneratePerturbation,
    #[error("exceptional point near k = {k} disappeared at γ_D = {gamma_d}")]
    Disappeared { gamma_d: f64, k: f64 },
    #[error(transparent)]
    Braid(#[from] BraidError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// A certified exceptional point in the (Ω_D, k) plane.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EpRecord {
    pub omega_d_star: f64,
    /// Canonical counting field in `[0, π]`; the mirror point sits at `2π − k`.
    pub k_star: f64,
    pub gap: f64,
    pub order: usize,
    /// 1-based ranks (Re descending) of the coalescing slow bands.
    pub bands: Vec<usize>,
    pub defect_score: f64,
    /// Normalized overlap of the coalescing right eigenvectors.
    pub overlap: f64,
    pub transition: Option<(ClassLabel, ClassLabel)>,
}

impl EpRecord {
    pub fn mirror_k(&self) -> f64 {
        (TAU - self.k_star).rem_euclid(TAU)
    }

    pub fn transition_label(&self) -> String {
        match self.transition {
            Some((a, b)) => format!("{a}-{b}"),
            None => String::new(),
        }
    }
}

/// Maps any counting field onto `[0, π]` using the k → 2π − k mirror symmetry.
pub fn canonical_k(k: f64) -> f64 {
    let r = k.rem_euclid(TAU);
    if r > PI {
        TAU - r
    } else {
        r
    }
}

/// Minimal pairwise distance among the slow bands at `(omega_d, k)`.
/// Evaluation failures map to `+∞`.
pub fn gap_objective(base: &ModelParams, omega_d: f64, k: f64) -> f64 {
    if !(omega_d >= 0.0) {
        return f64::INFINITY;
    }
    let p = base.with_omega_d(omega_d).with_k(k);
    slow_bands(&p).map(|s| crate::braid::min_pair_gap(&s)).unwrap_or(f64::INFINITY)
}

/// Simplex search for an exceptional point near `(seed_omega, seed_k)`,
/// followed by certification.
pub fn find_ep(base: &ModelParams, seed_omega: f64, seed_k: f64) -> Result<EpRecord, EpError> {
    let objective = |x: &[f64]| gap_objective(base, x[0] / OMEGA_SCALE, x[1]).powi(2);
    let opts = SimplexOptions { target: (0.1 * GAP_TOL).powi(2), ..Default::default() };
    let steps = [0.1, 0.02];
    let result = nelder_mead(objective, &[seed_omega * OMEGA_SCALE, seed_k], &steps, &opts);
    let omega = result.x[0] / OMEGA_SCALE;
    let k = canonical_k(result.x[1]);
    let gap = result.value.sqrt();
    if !(gap <= GAP_TOL) {
        return Err(EpError::Search { seed_omega, seed_k, gap });
    }
    certify(base, omega, k)
}

/// Checks that the closest slow pair at `(omega_d, k)` is an exceptional point.
pub fn certify(base: &ModelParams, omega_d: f64, k: f64) -> Result<EpRecord, EpError> {
    let p = base.with_omega_d(omega_d).with_k(k);
    let slow = slow_bands(&p)?;
    let (a, b) = closest_pair(&slow);
    let gap = (slow[a] - slow[b]).norm();
    let spectrum = eig_full(&lindbladian(&p))?;
    let nearest = |v: C64| {
        (0..spectrum.len())
            .min_by(|&i, &j| (spectrum.values[i] - v).norm().total_cmp(&(spectrum.values[j] - v).norm()))
            .expect("non-empty")
    };
    let ia = nearest(slow[a]);
    let mut ib = nearest(slow[b]);
    if ib == ia {
        ib = (0..spectrum.len())
            .filter(|&i| i != ia)
            .min_by(|&i, &j| (spectrum.values[i] - slow[b]).norm().total_cmp(&(spectrum.values[j] - slow[b]).norm()))
            .expect("at least two eigenvalues");
    }
    let (ra, rb) = (spectrum.right(ia), spectrum.right(ib));
    let overlap = inner(&ra, &rb).norm() / (vec_norm(&ra) * vec_norm(&rb));
    if overlap < OVERLAP_MIN {
        return Err(EpError::Diabolic { omega_d, k, overlap });
    }
    let centre = (slow[a] + slow[b]) * 0.5;
    let radius = (CLUSTER_FACTOR * gap).max(f64::EPSILON * centre.norm().max(1.0));
    let order = spectrum.values.iter().filter(|v| (*v - centre).norm() <= radius).count().max(2);
    Ok(EpRecord {
        omega_d_star: omega_d,
        k_star: k,
        gap,
        order,
        bands: vec![a + 1, b + 1],
        defect_score: spectrum.defect_score(),
        overlap,
        transition: None,
    })
}

fn closest_pair(values: &[C64]) -> (usize, usize) {
    let mut best = (f64::INFINITY, 0, 1);
    for i in 0..values.len() {
        for j in i + 1..values.len() {
            let d = (values[i] - values[j]).norm();
            if d < best.0 {
                best = (d, i, j);
            }
        }
    }
    (best.1, best.2)
}

/// Coarse sampling used by [`scan_transitions`].
#[derive(Clone, Copy, Debug)]
pub struct ScanOptions {
    pub coarse_samples: usize,
    pub bisections: usize,
    pub k_samples: usize,
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self { coarse_samples: 24, bisections: 10, k_samples: 512 }
    }
}

fn label_at(base: &ModelParams, omega_d: f64) -> ClassLabel {
    classify(&base.with_omega_d(omega_d).with_k(0.0)).map(|c| c.class_label).unwrap_or(ClassLabel::Unknown)
}

/// Locates the exceptional points separating braid classes on `omega_range`.
pub fn scan_transitions(base: &ModelParams, omega_range: (f64, f64)) -> Result<Vec<EpRecord>, EpError> {
    scan_transitions_with(base, omega_range, &ScanOptions::default())
}

pub fn scan_transitions_with(
    base: &ModelParams,
    omega_range: (f64, f64),
    opts: &ScanOptions,
) -> Result<Vec<EpRecord>, EpError> {
    let (lo, hi) = omega_range;
    if !(hi > lo) || lo <= 0.0 {
        return Ok(Vec::new());
    }
    let n = opts.coarse_samples.max(2);
    let samples: Vec<f64> = (0..n).map(|i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64)).collect();
    let labels: Vec<ClassLabel> = samples.par_iter().map(|&o| label_at(base, o)).collect();

    let mut brackets = Vec::new();
    let mut last_known: Option<(f64, ClassLabel)> = None;
    for (&o, &l) in samples.iter().zip(&labels) {
        if l == ClassLabel::Unknown {
            continue;
        }
        if let Some((o_prev, l_prev)) = last_known {
            if l_prev != l {
                brackets.push(((o_prev, l_prev), (o, l)));
            }
        }
        last_known = Some((o, l));
    }

    let mut records: Vec<EpRecord> = brackets
        .par_iter()
        .map(|&((mut a, la), (mut b, lb))| {
            for _ in 0..opts.bisections {
                let mid = 0.5 * (a + b);
                let lm = label_at(base, mid);
                if lm == la {
                    a = mid;
                } else if lm == lb {
                    b = mid;
                } else {
                    break;
                }
            }
            let omega = 0.5 * (a + b);
            let seed_k = best_k(base, omega, opts.k_samples);
            let mut rec = find_ep(base, omega, seed_k)?;
            rec.transition = Some((la, lb));
            Ok(rec)
        })
        .collect::<Result<_, EpError>>()?;
    records.sort_by(|x, y| x.omega_d_star.total_cmp(&y.omega_d_star));
    Ok(records)
}

/// Counting field in `[0, π]` minimizing the slow-band gap at fixed Ω_D.
fn best_k(base: &ModelParams, omega_d: f64, samples: usize) -> f64 {
    let m = samples.max(2);
    (0..m)
        .into_par_iter()
        .map(|i| {
            let k = PI * i as f64 / (m - 1) as f64;
            (k, gap_objective(base, omega_d, k))
        })
        .min_by(|x, y| x.1.total_cmp(&y.1))
        .map(|(k, _)| k)
        .unwrap_or(0.0)
}

/// Exceptional points at k = 0 and k = π for one dark decay rate.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DualityRow {
    pub gamma_d: f64,
    pub omega_k0: f64,
    pub k_star_k0: f64,
    pub omega_kpi: f64,
    pub k_star_kpi: f64,
    pub delta_omega_k0: f64,
    pub delta_omega_kpi: f64,
}

impl DualityRow {
    /// Largest distance of either EP from its pinned counting field.
    pub fn k_drift(&self) -> f64 {
        self.k_star_k0.abs().max((self.k_star_kpi - PI).abs())
    }
}

/// Seeds of the dual pair for the default parameters.
pub const DUAL_SEED_K0: f64 = 0.0052;
pub const DUAL_SEED_KPI: f64 = 0.0078;

/// Follows the k = 0 and k = π exceptional points as γ_D varies.
pub fn duality_scan(base: &ModelParams, gamma_d_values: &[f64]) -> Result<Vec<DualityRow>, EpError> {
    let reference = base.with_gamma_d(0.0);
    let ep0 = find_ep(&reference, DUAL_SEED_K0, 0.0)?;
    let eppi = find_ep(&reference, DUAL_SEED_KPI, PI)?;
    let mut order: Vec<usize> = (0..gamma_d_values.len()).collect();
    order.sort_by(|&a, &b| gamma_d_values[a].total_cmp(&gamma_d_values[b]));
    let mut seeds = (ep0.omega_d_star, eppi.omega_d_star);
    let mut rows: Vec<Option<DualityRow>> = vec![None; gamma_d_values.len()];
    for i in order {
        let gd = gamma_d_values[i];
        let p = base.with_gamma_d(gd);
        let follow = |seed: f64, k: f64| {
            find_ep(&p, seed, k).map_err(|e| match e {
                EpError::Search { .. } | EpError::Diabolic { .. } => EpError::Disappeared { gamma_d: gd, k },
                other => other,
            })
        };
        let a = follow(seeds.0, 0.0)?;
        let b = follow(seeds.1, PI)?;
        seeds = (a.omega_d_star, b.omega_d_star);
        rows[i] = Some(DualityRow {
            gamma_d: gd,
            omega_k0: a.omega_d_star,
            k_star_k0: a.k_star,
            omega_kpi: b.omega_d_star,
            k_star_kpi: b.k_star,
            delta_omega_k0: a.omega_d_star - ep0.omega_d_star,
            delta_omega_kpi: b.omega_d_star - eppi.omega_d_star,
        });
    }
    Ok(rows.into_iter().map(|r| r.expect("every row filled")).collect())
}

/// True when `k` sits on one of the mirror-symmetric lines k = 0, π.
pub fn is_pinned(k: f64) -> bool {
    k.abs() <= PINNED_TOL || (k - PI).abs() <= PINNED_TOL
}
