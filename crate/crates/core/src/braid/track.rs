//! Continuous tracking of the slow Lindbladian bands over one counting-field period.

use std::f64::consts::{FRAC_PI_2, TAU};

use rayon::prelude::*;

use super::BraidError;
use crate::linalg::{eigenvalues, C64};
use crate::model::{lindbladian, ModelParams};

pub const TRACKED_BANDS: usize = 3;
pub const DEFAULT_GRID: usize = 512;
pub const MIN_GRID: usize = 64;
pub const DEFAULT_REFINE_DEPTH: usize = 12;

/// Gap-to-displacement ratio below which an interval is bisected.
const AMBIGUITY_RATIO: f64 = 10.0;
/// Ratio still accepted once refinement is exhausted.
const EXHAUSTED_RATIO: f64 = 2.0;
const STATIC_SCALE: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepOptions {
    pub grid_size: usize,
    pub k0: f64,
    pub max_depth: usize,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self { grid_size: DEFAULT_GRID, k0: 0.0, max_depth: DEFAULT_REFINE_DEPTH }
    }
}

/// Slow eigenvalue strands tracked over `[k0, k0 + 2π]`.
#[derive(Clone, Debug)]
pub struct BandSet {
    /// Counting-field samples, first `k0`, last `k0 + 2π` (or reversed).
    pub k_grid: Vec<f64>,
    /// `strands[a][i]` is strand `a` at `k_grid[i]`. Strands are numbered by
    /// decreasing Re λ at the first sample.
    pub strands: Vec<Vec<C64>>,
    /// Strand `a` ends where strand `loop_permutation[a]` starts.
    pub loop_permutation: Vec<usize>,
    /// Positions of the tracked eigenvalues in the (Re asc, Im asc) spectrum at the first sample.
    pub band_selection: Vec<usize>,
    /// The eigenvalue that does not depend on the counting field.
    pub fixed_eigenvalue: C64,
}

impl BandSet {
    pub fn len(&self) -> usize {
        self.k_grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.k_grid.is_empty()
    }

    pub fn strand_count(&self) -> usize {
        self.strands.len()
    }

    pub fn values_at(&self, i: usize) -> Vec<C64> {
        self.strands.iter().map(|s| s[i]).collect()
    }

    /// Same strands traversed in the opposite direction.
    pub fn reversed(&self) -> Self {
        let mut inverse = vec![0; self.loop_permutation.len()];
        for (a, &b) in self.loop_permutation.iter().enumerate() {
            inverse[b] = a;
        }
        Self {
            k_grid: self.k_grid.iter().rev().copied().collect(),
            strands: self.strands.iter().map(|s| s.iter().rev().copied().collect()).collect(),
            loop_permutation: inverse,
            band_selection: self.band_selection.clone(),
            fixed_eigenvalue: self.fixed_eigenvalue,
        }
    }

    /// Largest jump of any strand between adjacent samples.
    pub fn max_step(&self) -> f64 {
        self.strands.iter().flat_map(|s| s.windows(2).map(|w| (w[1] - w[0]).norm())).fold(0.0, f64::max)
    }
}

fn spectrum_at(p: &ModelParams, k: f64) -> Result<Vec<C64>, BraidError> {
    Ok(eigenvalues(&lindbladian(&p.with_k(k)))?)
}

fn nearest_index(values: &[C64], target: C64) -> usize {
    values
        .iter()
        .enumerate()
        .min_by(|a, b| (a.1 - target).norm().total_cmp(&(b.1 - target).norm()))
        .map(|(i, _)| i)
        .expect("non-empty spectrum")
}

/// The counting-field independent eigenvalue: the one among the four slowest
/// at `k` that reappears in the spectra at `k + 2π/3` and `k + 4π/3`.
pub fn k_independent_eigenvalue(p: &ModelParams, k: f64) -> Result<C64, BraidError> {
    let here = spectrum_at(p, k)?;
    let a = spectrum_at(p, k + TAU / 3.0)?;
    let b = spectrum_at(p, k + 2.0 * TAU / 3.0)?;
    let miss = |x: C64| {
        let da = a.iter().map(|y| (y - x).norm()).fold(f64::INFINITY, f64::min);
        let db = b.iter().map(|y| (y - x).norm()).fold(f64::INFINITY, f64::min);
        da + db
    };
    let slow = slowest(&here, TRACKED_BANDS + 1);
    Ok(slow.into_iter().min_by(|x, y| miss(*x).total_cmp(&miss(*y))).expect("four slow eigenvalues"))
}

/// The `n` eigenvalues with largest real part, Re descending.
fn slowest(values: &[C64], n: usize) -> Vec<C64> {
    let mut v = values.to_vec();
    v.sort_by(|a, b| b.re.total_cmp(&a.re).then(b.im.total_cmp(&a.im)));
    v.truncate(n);
    v
}

/// The three tracked slow eigenvalues at a single point, Re descending:
/// the four slowest with the counting-field independent one removed.
pub fn slow_bands(p: &ModelParams) -> Result<Vec<C64>, BraidError> {
    let k = p.jump_weight.k;
    let fixed = k_independent_eigenvalue(p, k)?;
    let mut slow = slowest(&spectrum_at(p, k)?, TRACKED_BANDS + 1);
    slow.remove(nearest_index(&slow, fixed));
    Ok(slow)
}

/// Minimal pairwise distance among the three tracked slow eigenvalues.
pub fn slow_gap(p: &ModelParams) -> Result<f64, BraidError> {
    Ok(min_pair_gap(&slow_bands(p)?))
}

pub fn min_pair_gap(values: &[C64]) -> f64 {
    let mut g = f64::INFINITY;
    for i in 0..values.len() {
        for j in i + 1..values.len() {
            g = g.min((values[i] - values[j]).norm());
        }
    }
    g
}

struct Tracker<'a> {
    params: &'a ModelParams,
    fixed: C64,
    max_depth: usize,
    scale: f64,
}

struct Candidates {
    values: Vec<C64>,
}

impl Tracker<'_> {
    fn candidates(&self, k: f64) -> Result<Candidates, BraidError> {
        Ok(self.rank_candidates(spectrum_at(self.params, k)?))
    }

    fn rank_candidates(&self, mut values: Vec<C64>) -> Candidates {
        values.remove(nearest_index(&values, self.fixed));
        Candidates { values }
    }

    /// Ordered triple of candidates closest in total distance to `current`.
    fn assign(&self, current: &[C64], cand: &Candidates) -> (Vec<C64>, Vec<usize>) {
        let n = cand.values.len();
        let mut best = (f64::INFINITY, [0usize; TRACKED_BANDS]);
        for i in 0..n {
            let di = (cand.values[i] - current[0]).norm();
            for j in (0..n).filter(|&j| j != i) {
                let dj = di + (cand.values[j] - current[1]).norm();
                if dj >= best.0 {
                    continue;
                }
                for l in (0..n).filter(|&l| l != i && l != j) {
                    let d = dj + (cand.values[l] - current[2]).norm();
                    if d < best.0 {
                        best = (d, [i, j, l]);
                    }
                }
            }
        }
        (best.1.iter().map(|&i| cand.values[i]).collect(), best.1.to_vec())
    }

    /// Returns `(gap, displacement, max phase increment)` for a proposed step.
    fn step_quality(&self, from: &[C64], to: &[C64], picked: &[usize], cand: &Candidates) -> (f64, f64, f64) {
        let disp = from.iter().zip(to).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        let mut gap = f64::INFINITY;
        for (&i, v) in picked.iter().zip(to) {
            for (j, w) in cand.values.iter().enumerate() {
                if j != i {
                    gap = gap.min((v - w).norm());
                }
            }
            gap = gap.min((v - self.fixed).norm());
        }
        let mut phase: f64 = 0.0;
        for a in 0..to.len() {
            for b in a + 1..to.len() {
                let d0 = from[a] - from[b];
                let d1 = to[a] - to[b];
                if d0.norm() > 0.0 && d1.norm() > 0.0 {
                    phase = phase.max((d1 / d0).arg().abs());
                }
            }
        }
        (gap, disp, phase)
    }

    #[allow(clippy::too_many_arguments)]
    fn track(
        &self,
        k_a: f64,
        from: &[C64],
        k_b: f64,
        cand_b: &Candidates,
        depth: usize,
        out_k: &mut Vec<f64>,
        out_v: &mut Vec<Vec<C64>>,
    ) -> Result<Vec<C64>, BraidError> {
        let (to, picked) = self.assign(from, cand_b);
        let (gap, disp, phase) = self.step_quality(from, &to, &picked, cand_b);
        let moving = disp > STATIC_SCALE * self.scale;
        let ambiguous = moving && gap < AMBIGUITY_RATIO * disp;
        let coarse_phase = phase >= FRAC_PI_2;
        if ambiguous || coarse_phase {
            if depth >= self.max_depth {
                let (lo, hi) = (k_a.min(k_b), k_a.max(k_b));
                if coarse_phase {
                    return Err(BraidError::Resolution { k_lo: lo, k_hi: hi });
                }
                if gap < EXHAUSTED_RATIO * disp {
                    return Err(BraidError::Tracking { k_lo: lo, k_hi: hi });
                }
            } else {
                let mid = 0.5 * (k_a + k_b);
                let cand_mid = self.candidates(mid)?;
                let v_mid = self.track(k_a, from, mid, &cand_mid, depth + 1, out_k, out_v)?;
                return self.track(mid, &v_mid, k_b, cand_b, depth + 1, out_k, out_v);
            }
        }
        out_k.push(k_b);
        out_v.push(to.clone());
        Ok(to)
    }
}

/// Tracks the three slow bands over `[0, 2π]` on a uniform grid of `grid_size` intervals.
pub fn sweep(p: &ModelParams, grid_size: usize) -> Result<BandSet, BraidError> {
    sweep_with(p, &SweepOptions { grid_size, ..Default::default() })
}

/// Same as [`sweep`] with the window starting at `k0`.
pub fn sweep_from(p: &ModelParams, grid_size: usize, k0: f64) -> Result<BandSet, BraidError> {
    sweep_with(p, &SweepOptions { grid_size, k0, ..Default::default() })
}

pub fn sweep_with(p: &ModelParams, opts: &SweepOptions) -> Result<BandSet, BraidError> {
    p.validate()?;
    if opts.grid_size < MIN_GRID {
        return Err(BraidError::GridTooSmall { grid_size: opts.grid_size, minimum: MIN_GRID });
    }
    let k0 = opts.k0;
    let fixed = k_independent_eigenvalue(p, k0)?;
    let n = opts.grid_size;
    let base_k: Vec<f64> = (0..n).map(|i| k0 + TAU * i as f64 / n as f64).collect();
    let spectra: Vec<Vec<C64>> = base_k.par_iter().map(|&k| spectrum_at(p, k)).collect::<Result<_, _>>()?;

    let start_spectrum = &spectra[0];
    let scale = start_spectrum.iter().map(|z| z.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let tracker = Tracker { params: p, fixed, max_depth: opts.max_depth, scale };

    let mut sorted_start = start_spectrum.clone();
    sorted_start.remove(nearest_index(&sorted_start, fixed));
    let start = slowest(&sorted_start, TRACKED_BANDS);
    let band_selection = start.iter().map(|v| nearest_index(start_spectrum, *v)).collect();

    let mut ks = vec![k0];
    let mut vals = vec![start.clone()];
    let mut current = start.clone();
    for i in 1..=n {
        let (k_b, cand) = if i < n {
            (base_k[i], tracker.rank_candidates(spectra[i].clone()))
        } else {
            (k0 + TAU, tracker.rank_candidates(spectra[0].clone()))
        };
        current = tracker.track(*ks.last().unwrap(), &current, k_b, &cand, 0, &mut ks, &mut vals)?;
    }

    let loop_permutation = current.iter().map(|end| nearest_index(&start, *end)).collect();
    let strands = (0..TRACKED_BANDS).map(|a| vals.iter().map(|v| v[a]).collect()).collect();
    Ok(BandSet { k_grid: ks, strands, loop_permutation, band_selection, fixed_eigenvalue: fixed })
}
