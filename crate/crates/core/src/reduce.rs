//! Adiabatic elimination of the bright-state sector.
//!
//! The superoperator is split into the slow block over `{G,D}⊗{G,D}` and the
//! fast remainder,
//!
//! ```text
//!     ⎛ S     C_up ⎞
//! L = ⎝ C_lo  F    ⎠ ,      L_eff = S − C_up F⁻¹ C_lo .
//! ```
//!
//! The lower-left block is kept as its own matrix; it is not the transpose of
//! the upper-right one in general.

use serde::Serialize;
use thiserror::Error;

use crate::linalg::{eigenvalues, inverse_with_rcond, ComplexMatrix, LinalgError, C64};
use crate::model::{h_eff, lindbladian, JumpWeight, ModelParams, BRIGHT, DARK, GROUND, LEVELS, SUPER_DIM};
use crate::optimize::{nelder_mead, SimplexOptions};

/// Superoperator coordinates of `ρ_GG, ρ_GD, ρ_DG, ρ_DD`.
pub const SLOW_INDICES: [usize; 4] = [0, 1, 3, 4];
pub const FAST_INDICES: [usize; 5] = [2, 5, 6, 7, 8];
/// Smallest accepted reciprocal condition number of the fast block.
pub const FAST_RCOND_MIN: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ReductionError {
    #[error("expected a {expected}×{expected} matrix, got {rows}×{cols}")]
    Dimension { expected: usize, rows: usize, cols: usize },
    #[error("index sets must be disjoint and cover 0..{0}")]
    IndexSets(usize),
    #[error("fast block is singular (rcond {rcond:.2e}); time scales are not separated")]
    Singular { rcond: f64 },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

#[derive(Clone, Debug, PartialEq)]
pub struct BlockPartition {
    pub slow_indices: Vec<usize>,
    pub fast_indices: Vec<usize>,
    pub s: ComplexMatrix,
    pub c_up: ComplexMatrix,
    pub c_lo: ComplexMatrix,
    pub f: ComplexMatrix,
}

impl BlockPartition {
    /// Original matrix rebuilt from the four blocks.
    pub fn reassemble(&self) -> ComplexMatrix {
        let n = self.slow_indices.len() + self.fast_indices.len();
        let mut out = ComplexMatrix::zeros(n, n);
        for (a, &i) in self.slow_indices.iter().enumerate() {
            for (b, &j) in self.slow_indices.iter().enumerate() {
                out[(i, j)] = self.s[(a, b)];
            }
            for (b, &j) in self.fast_indices.iter().enumerate() {
                out[(i, j)] = self.c_up[(a, b)];
            }
        }
        for (a, &i) in self.fast_indices.iter().enumerate() {
            for (b, &j) in self.slow_indices.iter().enumerate() {
                out[(i, j)] = self.c_lo[(a, b)];
            }
            for (b, &j) in self.fast_indices.iter().enumerate() {
                out[(i, j)] = self.f[(a, b)];
            }
        }
        out
    }

    /// `S − C_up F⁻¹ C_lo`.
    pub fn eliminate(&self) -> Result<ComplexMatrix, ReductionError> {
        let (f_inv, rcond) = match inverse_with_rcond(&self.f) {
            Err(LinalgError::Singular { rcond }) => return Err(ReductionError::Singular { rcond }),
            other => other?,
        };
        if !(rcond > FAST_RCOND_MIN) {
            return Err(ReductionError::Singular { rcond });
        }
        Ok(&self.s - &(&(&self.c_up * &f_inv) * &self.c_lo))
    }
}

fn check_square(m: &ComplexMatrix, n: usize) -> Result<(), ReductionError> {
    if m.rows() != n || m.cols() != n {
        return Err(ReductionError::Dimension { expected: n, rows: m.rows(), cols: m.cols() });
    }
    Ok(())
}

/// Split with caller-chosen index sets.
pub fn partition_with(m: &ComplexMatrix, slow: &[usize], fast: &[usize]) -> Result<BlockPartition, ReductionError> {
    let n = m.rows();
    check_square(m, n)?;
    let mut seen = vec![false; n];
    for &i in slow.iter().chain(fast) {
        if i >= n || seen[i] {
            return Err(ReductionError::IndexSets(n));
        }
        seen[i] = true;
    }
    if seen.iter().any(|s| !s) {
        return Err(ReductionError::IndexSets(n));
    }
    Ok(BlockPartition {
        slow_indices: slow.to_vec(),
        fast_indices: fast.to_vec(),
        s: m.select(slow, slow),
        c_up: m.select(slow, fast),
        c_lo: m.select(fast, slow),
        f: m.select(fast, fast),
    })
}

/// Default split of a 9×9 Lindbladian in the `{G,D,B}` row-major basis.
pub fn partition(l: &ComplexMatrix) -> Result<BlockPartition, ReductionError> {
    check_square(l, SUPER_DIM)?;
    partition_with(l, &SLOW_INDICES, &FAST_INDICES)
}

/// Effective 4×4 Lindbladian over the `{G,D}` sector.
pub fn eliminate(l: &ComplexMatrix) -> Result<ComplexMatrix, ReductionError> {
    partition(l)?.eliminate()
}

/// Effective non-Hermitian 2×2 Hamiltonian over `{G,D}`, from the block
/// formula applied to `−iH`.
pub fn eliminate_hamiltonian(h: &ComplexMatrix) -> Result<ComplexMatrix, ReductionError> {
    check_square(h, LEVELS)?;
    let generator = h.scale(C64::new(0.0, -1.0));
    let reduced = partition_with(&generator, &[GROUND, DARK], &[BRIGHT])?.eliminate()?;
    Ok(reduced.scale(C64::new(0.0, 1.0)))
}

/// Eigenvalues sorted by decreasing imaginary part (slowest decay first).
fn by_decay(values: Vec<C64>) -> Vec<C64> {
    let mut v = values;
    v.sort_by(|a, b| b.im.total_cmp(&a.im));
    v
}

/// Two least-decaying eigenvalues of the full effective Hamiltonian and the
/// eigenvalues of its reduction, both sorted by decreasing imaginary part.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HamiltonianPair {
    pub omega_d: f64,
    pub full: [C64; 2],
    pub reduced: [C64; 2],
}

pub fn hamiltonian_pair(base: &ModelParams, omega_d: f64) -> Result<HamiltonianPair, ReductionError> {
    let h = h_eff(&base.with_omega_d(omega_d));
    let full = by_decay(eigenvalues(&h)?);
    let reduced = by_decay(eigenvalues(&eliminate_hamiltonian(&h)?)?);
    Ok(HamiltonianPair { omega_d, full: [full[0], full[1]], reduced: [reduced[0], reduced[1]] })
}

/// Drive strength at which a two-eigenvalue gap closes, located by a coarse
/// log-spaced scan followed by simplex refinement.
fn gap_minimum(gap: impl Fn(f64) -> f64, (lo, hi): (f64, f64)) -> f64 {
    let samples = 400;
    let grid: Vec<f64> = (0..samples).map(|i| lo * (hi / lo).powf(i as f64 / (samples - 1) as f64)).collect();
    let start = grid.iter().copied().min_by(|a, b| gap(*a).total_cmp(&gap(*b))).unwrap_or(lo);
    let opts = SimplexOptions { x_tol: 1e-12, ..SimplexOptions::default() };
    let r = nelder_mead(|x| gap(x[0] * 1e-3), &[start * 1e3], &[start * 1e3 * 0.01], &opts);
    r.x[0] * 1e-3
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HamiltonianEps {
    pub full: f64,
    pub reduced: f64,
}

impl HamiltonianEps {
    pub fn relative_shift(&self) -> f64 {
        (self.reduced - self.full).abs() / self.full
    }
}

/// EP of the slow pair of `H_eff` and of its 2×2 reduction.
pub fn hamiltonian_eps(base: &ModelParams, bracket: (f64, f64)) -> Result<HamiltonianEps, ReductionError> {
    hamiltonian_pair(base, bracket.0)?;
    let full_gap = |o: f64| hamiltonian_pair(base, o.abs()).map_or(f64::INFINITY, |p| (p.full[0] - p.full[1]).norm());
    let reduced_gap =
        |o: f64| hamiltonian_pair(base, o.abs()).map_or(f64::INFINITY, |p| (p.reduced[0] - p.reduced[1]).norm());
    Ok(HamiltonianEps { full: gap_minimum(full_gap, bracket).abs(), reduced: gap_minimum(reduced_gap, bracket).abs() })
}

/// Slowest eigenvalue of the full Lindbladian and of its reduction at a
/// real jump weight `z`; of a conjugate pair the member with `Im ≥ 0` is kept.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SlowestComparison {
    pub omega_d: f64,
    pub z: f64,
    pub full: C64,
    pub reduced: C64,
}

impl SlowestComparison {
    pub fn relative_error(&self) -> f64 {
        (self.reduced - self.full).norm() / self.full.norm()
    }
}

fn by_decay_rate(values: Vec<C64>) -> Vec<C64> {
    let mut v = values;
    v.sort_by(|a, b| b.re.total_cmp(&a.re).then(b.im.total_cmp(&a.im)));
    v
}

pub fn reduced_lindbladian(base: &ModelParams, omega_d: f64, z: f64) -> Result<ComplexMatrix, ReductionError> {
    eliminate(&lindbladian(&base.with_omega_d(omega_d).with_jump_weight(JumpWeight::real(z))))
}

pub fn slowest_comparison(base: &ModelParams, omega_d: f64, z: f64) -> Result<SlowestComparison, ReductionError> {
    let l = lindbladian(&base.with_omega_d(omega_d).with_jump_weight(JumpWeight::real(z)));
    let upper = |v: C64| C64::new(v.re, v.im.abs());
    let full = upper(by_decay_rate(eigenvalues(&l)?)[0]);
    let reduced = upper(by_decay_rate(eigenvalues(&eliminate(&l)?)?)[0]);
    Ok(SlowestComparison { omega_d, z, full, reduced })
}

/// Where a complex-conjugate pair first appears in the reduced spectrum
/// along increasing drive, and the real-part ranks (0 = slowest) of the two
/// eigenvalues that coalesce there.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PairOnset {
    pub omega_d: f64,
    pub ranks: [usize; 2],
}

const IMAG_TOL: f64 = 1e-9;

fn complex_ranks(values: &[C64]) -> Vec<usize> {
    values.iter().enumerate().filter(|(_, v)| v.im.abs() > IMAG_TOL).map(|(i, _)| i).collect()
}

pub fn reduced_pair_onset(
    base: &ModelParams,
    z: f64,
    omega_range: (f64, f64),
    samples: usize,
) -> Result<Option<PairOnset>, ReductionError> {
    let (lo, hi) = omega_range;
    let mut previous: Option<Vec<usize>> = None;
    for i in 0..samples.max(2) {
        let omega = lo + (hi - lo) * i as f64 / (samples.max(2) - 1) as f64;
        let values = by_decay_rate(eigenvalues(&reduced_lindbladian(base, omega, z)?)?);
        let ranks = complex_ranks(&values);
        if let Some(prev) = &previous {
            let fresh: Vec<usize> = ranks.iter().copied().filter(|r| !prev.contains(r)).collect();
            if ranks.len() > prev.len() && fresh.len() >= 2 {
                return Ok(Some(PairOnset { omega_d: omega, ranks: [fresh[0], fresh[1]] }));
            }
        }
        previous = Some(ranks);
    }
    Ok(None)
}
