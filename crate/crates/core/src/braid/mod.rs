//! Eigenvalue braids of the slow Lindbladian bands: winding indices, braid
//! words and topological class labels.

mod track;
mod word;

use std::f64::consts::TAU;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{LinalgError, C64};
use crate::model::{ModelError, ModelParams};

pub use track::{
    k_independent_eigenvalue, min_pair_gap, slow_bands, slow_gap, sweep, sweep_from, sweep_with, BandSet, SweepOptions,
    DEFAULT_GRID, DEFAULT_REFINE_DEPTH, MIN_GRID, TRACKED_BANDS,
};
pub use word::{words_equivalent, words_equivalent_up_to_mirror, BraidWord, Generator, ParseWordError, BURAU_T};

const INTEGRALITY_TOL: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BraidError {
    #[error(
        "band tracking failed on k ∈ [{k_lo:.9}, {k_hi:.9}]: strands too close to resolve (probable exceptional point)"
    )]
    Tracking { k_lo: f64, k_hi: f64 },
    #[error("phase increment ≥ π/2 on k ∈ [{k_lo:.9}, {k_hi:.9}] after maximal refinement")]
    Resolution { k_lo: f64, k_hi: f64 },
    #[error("non-transversal crossing of strands {a} and {b} near k = {k:.9} (probable exceptional point)")]
    Degeneracy { k: f64, a: usize, b: usize },
    #[error("grid size {grid_size} below minimum {minimum}")]
    GridTooSmall { grid_size: usize, minimum: usize },
    #[error("total braid index {value} is not an integer")]
    NonIntegral { value: f64 },
    #[error("strand index {0} out of range")]
    NoSuchStrand(usize),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ClassLabel {
    I,
    II,
    III,
    IV,
    V,
    Unknown,
}

impl ClassLabel {
    pub const KNOWN: [ClassLabel; 5] = [ClassLabel::I, ClassLabel::II, ClassLabel::III, ClassLabel::IV, ClassLabel::V];

    /// Representative braid word of the class.
    pub fn reference_word(&self) -> Option<BraidWord> {
        use Generator as G;
        let gens = match self {
            ClassLabel::I => vec![G::S1, G::S2, G::S2, G::S1],
            ClassLabel::II => vec![G::S2, G::S2],
            ClassLabel::III => vec![G::S2],
            ClassLabel::IV => vec![G::S2, G::S1],
            ClassLabel::V => vec![],
            ClassLabel::Unknown => return None,
        };
        Some(BraidWord(gens))
    }

    pub fn from_word(word: &BraidWord) -> Self {
        Self::KNOWN
            .into_iter()
            .find(|c| words_equivalent_up_to_mirror(word, &c.reference_word().expect("known class")))
            .unwrap_or(ClassLabel::Unknown)
    }
}

impl fmt::Display for ClassLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ClassLabel::I => "I",
            ClassLabel::II => "II",
            ClassLabel::III => "III",
            ClassLabel::IV => "IV",
            ClassLabel::V => "V",
            ClassLabel::Unknown => "Unknown",
        };
        f.write_str(s)
    }
}

/// Winding indices of the tracked strands over one counting-field period.
#[derive(Clone, Debug, PartialEq)]
pub struct BraidIndices {
    /// `nu_pair[a][b]`: winding of `λ_a − λ_b` over one period.
    pub nu_pair: Vec<Vec<f64>>,
    /// `nu_ab[a][b] = nu_pair[a][b] + nu_pair[b][a]`, defined when the pair
    /// closes on itself after one period.
    pub nu_ab: Vec<Vec<Option<i32>>>,
    pub nu_total: i32,
    /// Unrounded total, for integrality checks.
    pub nu_total_raw: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BraidClassification {
    pub indices: BraidIndices,
    /// Shortest conjugate of the extracted word.
    pub word: BraidWord,
    /// Crossings in the order they occur along the sweep.
    pub raw_word: BraidWord,
    pub class_label: ClassLabel,
    pub loop_permutation: Vec<usize>,
}

impl BraidClassification {
    pub fn nu_total(&self) -> i32 {
        self.indices.nu_total
    }

    pub fn nu_ab(&self, a: usize, b: usize) -> Option<i32> {
        self.indices.nu_ab[a][b]
    }
}

/// Accumulated phase of `λ_a − λ_c` along the grid, in units of 2π.
pub fn braid_index_pair(bands: &BandSet, a: usize, c: usize) -> Result<f64, BraidError> {
    let n = bands.strand_count();
    if a >= n {
        return Err(BraidError::NoSuchStrand(a));
    }
    if c >= n || c == a {
        return Err(BraidError::NoSuchStrand(c));
    }
    let diffs: Vec<C64> = bands.strands[a].iter().zip(&bands.strands[c]).map(|(x, y)| x - y).collect();
    let mut total = 0.0;
    for (i, w) in diffs.windows(2).enumerate() {
        if w[0].norm() == 0.0 || w[1].norm() == 0.0 {
            continue;
        }
        let step = (w[1] / w[0]).arg();
        if step.abs() >= std::f64::consts::FRAC_PI_2 {
            return Err(BraidError::Resolution { k_lo: bands.k_grid[i], k_hi: bands.k_grid[i + 1] });
        }
        total += step;
    }
    Ok(total / TAU)
}

#[allow(clippy::needless_range_loop)]
pub fn braid_indices(bands: &BandSet) -> Result<BraidIndices, BraidError> {
    let n = bands.strand_count();
    let mut nu_pair = vec![vec![0.0; n]; n];
    for a in 0..n {
        for c in 0..n {
            if a != c {
                nu_pair[a][c] = braid_index_pair(bands, a, c)?;
            }
        }
    }
    let perm = &bands.loop_permutation;
    let mut nu_ab = vec![vec![None; n]; n];
    let mut raw = 0.0;
    for a in 0..n {
        for c in a + 1..n {
            let combined = nu_pair[a][c] + nu_pair[c][a];
            raw += combined;
            let closes = (perm[a] == a && perm[c] == c) || (perm[a] == c && perm[c] == a);
            if closes {
                let v = Some(combined.round() as i32);
                nu_ab[a][c] = v;
                nu_ab[c][a] = v;
            }
        }
    }
    if (raw - raw.round()).abs() > INTEGRALITY_TOL {
        return Err(BraidError::NonIntegral { value: raw });
    }
    Ok(BraidIndices { nu_pair, nu_ab, nu_total: raw.round() as i32, nu_total_raw: raw })
}

/// Reads off the braid word from the crossings of the real parts.
///
/// Strands are ranked by decreasing Re λ. A crossing between ranks `i` and
/// `i + 1` emits `σ_i` when the strand with the larger Im λ moves from rank
/// `i` to rank `i + 1`, and `σ_i⁻¹` otherwise.
pub fn extract_word(bands: &BandSet) -> Result<BraidWord, BraidError> {
    let n = bands.strand_count();
    let scale = bands.strands.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let degenerate_im = 1e-9 * scale;
    let mut ranking: Vec<usize> = (0..n).collect();
    ranking.sort_by(|&x, &y| bands.strands[y][0].re.total_cmp(&bands.strands[x][0].re));
    let mut word = Vec::new();
    for i in 0..bands.len() - 1 {
        // crossing events inside the interval, ordered by interpolated position
        let mut events: Vec<(f64, usize, usize)> = Vec::new();
        for a in 0..n {
            for b in a + 1..n {
                let d0 = bands.strands[a][i].re - bands.strands[b][i].re;
                let d1 = bands.strands[a][i + 1].re - bands.strands[b][i + 1].re;
                if (d0 > 0.0) != (d1 > 0.0) {
                    let frac = if d0 == d1 { 0.5 } else { d0 / (d0 - d1) };
                    events.push((frac, a, b));
                }
            }
        }
        events.sort_by(|x, y| x.0.total_cmp(&y.0));
        let k_here = bands.k_grid[i];
        for (frac, a, b) in events {
            let ra = ranking.iter().position(|&s| s == a).expect("ranked");
            let rb = ranking.iter().position(|&s| s == b).expect("ranked");
            let (upper, lower, rank) = if ra < rb { (a, b, ra) } else { (b, a, rb) };
            if rank + 1 != ra.max(rb) {
                return Err(BraidError::Degeneracy { k: k_here, a, b });
            }
            let im = |s: usize| bands.strands[s][i].im * (1.0 - frac) + bands.strands[s][i + 1].im * frac;
            let (im_upper, im_lower) = (im(upper), im(lower));
            if (im_upper - im_lower).abs() <= degenerate_im {
                return Err(BraidError::Degeneracy { k: k_here, a, b });
            }
            // `upper` moves from rank `rank` to `rank + 1`
            word.push(Generator::new(rank as u8 + 1, im_upper < im_lower));
            ranking.swap(ra, rb);
        }
    }
    Ok(BraidWord(word))
}

pub fn classify_bands(bands: &BandSet) -> Result<BraidClassification, BraidError> {
    let indices = braid_indices(bands)?;
    let raw_word = extract_word(bands)?;
    let class_label = ClassLabel::from_word(&raw_word);
    Ok(BraidClassification {
        indices,
        word: raw_word.simplified(),
        raw_word,
        class_label,
        loop_permutation: bands.loop_permutation.clone(),
    })
}

/// Sweeps with the default grid and classifies the braid.
pub fn classify(p: &ModelParams) -> Result<BraidClassification, BraidError> {
    classify_bands(&sweep(p, DEFAULT_GRID)?)
}

/// Classifies several parameter points concurrently.
pub fn classify_many(points: &[ModelParams]) -> Vec<Result<BraidClassification, BraidError>> {
    points.par_iter().map(classify).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(omega_d: f64) -> ModelParams {
        ModelParams::default().with_omega_d(omega_d)
    }

    fn synthetic(strands: Vec<Vec<C64>>, perm: Vec<usize>) -> BandSet {
        let n = strands[0].len();
        BandSet {
            k_grid: (0..n).map(|i| TAU * i as f64 / (n - 1) as f64).collect(),
            strands,
            loop_permutation: perm,
            band_selection: vec![0, 1, 2],
            fixed_eigenvalue: C64::new(0.0, 0.0),
        }
    }

    #[test]
    fn constant_strands_have_zero_index() {
        let b = synthetic(
            vec![vec![C64::new(0.0, 0.0); 65], vec![C64::new(-1.0, 0.0); 65], vec![C64::new(-2.0, 1.0); 65]],
            vec![0, 1, 2],
        );
        assert_eq!(braid_index_pair(&b, 0, 1).unwrap(), 0.0);
        assert!(extract_word(&b).unwrap().is_empty());
        assert!(braid_index_pair(&b, 0, 0).is_err());
    }

    #[test]
    fn circling_strand_winds_once() {
        let n = 129;
        let circle: Vec<C64> = (0..n).map(|i| C64::from_polar(1.0, TAU * i as f64 / (n - 1) as f64)).collect();
        let b = synthetic(vec![circle, vec![C64::new(0.0, 0.0); n], vec![C64::new(-5.0, 0.0); n]], vec![0, 1, 2]);
        let nu = braid_index_pair(&b, 0, 1).unwrap();
        assert!((nu - 1.0).abs() < 1e-12);
        let idx = braid_indices(&b).unwrap();
        assert_eq!(idx.nu_ab[0][1], Some(2));
        assert_eq!(idx.nu_total, 2);
        // two Re crossings, each with the moving strand above in Im on the way down
        let w = extract_word(&b).unwrap();
        assert_eq!(w.exponent_sum(), 2);
    }

    #[test]
    fn decoupled_bright_sector_is_static() {
        let p = ModelParams { omega_b: 0.0, omega_d: 0.01, ..Default::default() };
        let b = sweep(&p, 64).unwrap();
        assert!(b.max_step() < 1e-12);
    }

    #[test]
    fn grid_minimum_enforced() {
        assert!(matches!(sweep(&params(0.02), 32), Err(BraidError::GridTooSmall { .. })));
    }

    #[test]
    fn slow_bands_are_three_slowest() {
        let s = slow_bands(&params(0.02)).unwrap();
        assert_eq!(s.len(), 3);
        assert!(s[0].norm() < 1e-10);
        assert!(s.iter().all(|v| v.re > -0.1));
    }

    #[test]
    fn loop_permutations_by_class() {
        for (od, expected) in [(0.002, vec![0, 1, 2]), (0.007, vec![0, 2, 1]), (0.05, vec![0, 1, 2])] {
            let b = sweep(&params(od), 256).unwrap();
            assert_eq!(b.loop_permutation, expected, "Ω_D = {od}");
        }
        let b = sweep(&params(0.009), 256).unwrap();
        let p = &b.loop_permutation;
        assert!((0..3).all(|a| p[a] != a), "three-cycle expected, got {p:?}");
    }

    #[test]
    fn class_labels() {
        assert_eq!(classify(&params(0.002)).unwrap().class_label, ClassLabel::I);
        assert_eq!(classify(&params(0.02)).unwrap().class_label, ClassLabel::IV);
        assert_eq!(classify(&params(0.05)).unwrap().class_label, ClassLabel::V);
    }

    #[test]
    fn reversed_grid_gives_inverse_word() {
        let b = sweep(&params(0.004), 256).unwrap();
        let w = extract_word(&b).unwrap();
        let wr = extract_word(&b.reversed()).unwrap();
        assert_eq!(wr, w.inverse());
    }
}
