//! Three-strand braid words and their reduced Burau images.

use std::collections::{HashSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// Burau parameter used for word comparison.
pub const BURAU_T: f64 = 0.5;

const TRACE_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("cannot parse braid generator {0:?} (expected s1, s2, s1^-1 or s2^-1)")]
pub struct ParseWordError(String);

/// A generator `σ_i^{±1}` of the three-strand braid group.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Generator {
    /// 1 or 2: the crossing sits between rank `index` and `index + 1`.
    pub index: u8,
    pub inverse: bool,
}

impl Generator {
    pub const S1: Self = Self { index: 1, inverse: false };
    pub const S2: Self = Self { index: 2, inverse: false };
    pub const S1_INV: Self = Self { index: 1, inverse: true };
    pub const S2_INV: Self = Self { index: 2, inverse: true };

    pub fn new(index: u8, inverse: bool) -> Self {
        assert!(index == 1 || index == 2, "three-strand generators are s1 and s2");
        Self { index, inverse }
    }

    pub fn exponent(&self) -> i32 {
        if self.inverse {
            -1
        } else {
            1
        }
    }

    pub fn inverted(&self) -> Self {
        Self { index: self.index, inverse: !self.inverse }
    }

    fn burau(&self, t: f64) -> Mat2 {
        let m = match self.index {
            1 => Mat2([[t, 1.0], [0.0, 1.0]]),
            _ => Mat2([[1.0, 0.0], [-t, t]]),
        };
        if self.inverse {
            m.inverse()
        } else {
            m
        }
    }
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.inverse {
            write!(f, "s{}^-1", self.index)
        } else {
            write!(f, "s{}", self.index)
        }
    }
}

impl FromStr for Generator {
    type Err = ParseWordError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (base, inverse) = match s.strip_suffix("^-1") {
            Some(b) => (b, true),
            None => (s, false),
        };
        match base {
            "s1" => Ok(Self::new(1, inverse)),
            "s2" => Ok(Self::new(2, inverse)),
            _ => Err(ParseWordError(s.to_string())),
        }
    }
}

/// A braid word, read left to right in the direction of increasing counting field.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct BraidWord(pub Vec<Generator>);

impl BraidWord {
    pub fn identity() -> Self {
        Self(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn generators(&self) -> &[Generator] {
        &self.0
    }

    /// Signed count of generators.
    pub fn exponent_sum(&self) -> i32 {
        self.0.iter().map(Generator::exponent).sum()
    }

    /// Group inverse: reversed order, every generator inverted.
    pub fn inverse(&self) -> Self {
        Self(self.0.iter().rev().map(Generator::inverted).collect())
    }

    /// Every generator inverted in place (mirror image).
    pub fn mirrored(&self) -> Self {
        Self(self.0.iter().map(Generator::inverted).collect())
    }

    /// Removes adjacent `σσ⁻¹` pairs, cyclically.
    pub fn freely_reduced(&self) -> Self {
        let mut out: Vec<Generator> = Vec::with_capacity(self.0.len());
        for g in &self.0 {
            if out.last() == Some(&g.inverted()) {
                out.pop();
            } else {
                out.push(*g);
            }
        }
        while out.len() >= 2 && out[0] == out[out.len() - 1].inverted() {
            out.pop();
            out.remove(0);
        }
        Self(out)
    }

    /// Cyclic rotation by `shift` letters.
    pub fn rotated(&self, shift: usize) -> Self {
        if self.0.is_empty() {
            return self.clone();
        }
        let s = shift % self.0.len();
        Self(self.0[s..].iter().chain(&self.0[..s]).copied().collect())
    }

    /// Reduced Burau image at parameter `t`, as row-major 2×2 entries.
    pub fn burau(&self, t: f64) -> [[f64; 2]; 2] {
        self.0.iter().fold(Mat2::identity(), |acc, g| acc.mul(&g.burau(t))).0
    }

    pub fn burau_trace(&self, t: f64) -> f64 {
        let m = self.burau(t);
        m[0][0] + m[1][1]
    }
}

impl BraidWord {
    /// Shortest representative found by cyclic rotation, free reduction and
    /// three-letter braid relations, searched breadth first over a bounded
    /// number of words. The result is conjugate to `self`.
    pub fn simplified(&self) -> Self {
        let start = canonical_rotation(&self.freely_reduced());
        let mut best = start.clone();
        let mut seen = HashSet::from([start.clone()]);
        let mut queue = VecDeque::from([start]);
        while let Some(word) = queue.pop_front() {
            if best.is_empty() || seen.len() > SIMPLIFY_LIMIT {
                break;
            }
            for next in relation_moves(&word) {
                if next.len() > word.len() || !seen.insert(next.clone()) {
                    continue;
                }
                if next.len() < best.len() || (next.len() == best.len() && next.0 < best.0) {
                    best = next.clone();
                }
                queue.push_back(next);
            }
        }
        best
    }
}

const SIMPLIFY_LIMIT: usize = 20_000;

/// Three-letter substitutions implied by `σ₁σ₂σ₁ = σ₂σ₁σ₂`.
fn relations() -> Vec<([Generator; 3], [Generator; 3])> {
    let mut out = Vec::new();
    for (a, b) in [(1u8, 2u8), (2, 1)] {
        let g = |i: u8, inv: bool| Generator::new(i, inv);
        out.push(([g(a, false), g(b, false), g(a, false)], [g(b, false), g(a, false), g(b, false)]));
        out.push(([g(a, true), g(b, true), g(a, true)], [g(b, true), g(a, true), g(b, true)]));
        out.push(([g(a, false), g(b, false), g(a, true)], [g(b, true), g(a, false), g(b, false)]));
        out.push(([g(a, true), g(b, false), g(a, false)], [g(b, false), g(a, false), g(b, true)]));
        out.push(([g(a, false), g(b, true), g(a, true)], [g(b, true), g(a, true), g(b, false)]));
        out.push(([g(a, true), g(b, true), g(a, false)], [g(b, false), g(a, true), g(b, true)]));
    }
    let reversed: Vec<_> = out.iter().map(|(l, r)| (*r, *l)).collect();
    out.extend(reversed);
    out
}

fn relation_moves(word: &BraidWord) -> Vec<BraidWord> {
    let n = word.len();
    let mut out = Vec::new();
    if n < 3 {
        return out;
    }
    let rels = relations();
    for shift in 0..n {
        let w = word.rotated(shift);
        for pos in 0..=n - 3 {
            for (lhs, rhs) in &rels {
                if w.0[pos..pos + 3] == lhs[..] {
                    let mut v = w.0.clone();
                    v[pos..pos + 3].copy_from_slice(rhs);
                    out.push(canonical_rotation(&BraidWord(v).freely_reduced()));
                }
            }
        }
    }
    out
}

/// Lexicographically smallest cyclic rotation.
fn canonical_rotation(word: &BraidWord) -> BraidWord {
    (0..word.len().max(1)).map(|s| word.rotated(s)).min_by(|a, b| a.0.cmp(&b.0)).unwrap_or_default()
}

impl fmt::Display for BraidWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, g) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{g}")?;
        }
        Ok(())
    }
}

impl FromStr for BraidWord {
    type Err = ParseWordError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.split_whitespace().map(str::parse).collect::<Result<Vec<_>, _>>().map(Self)
    }
}

/// True when the closed braids of `w1` and `w2` agree in exponent sum and in
/// the trace of the reduced Burau image at `t = 1/2`. Both quantities are
/// invariant under free reduction, the braid relation and cyclic rotation.
pub fn words_equivalent(w1: &BraidWord, w2: &BraidWord) -> bool {
    if w1.exponent_sum() != w2.exponent_sum() {
        return false;
    }
    let a = w1.freely_reduced();
    let b = w2.freely_reduced();
    let tb = b.burau_trace(BURAU_T);
    (0..a.len().max(1)).any(|s| (a.rotated(s).burau_trace(BURAU_T) - tb).abs() <= TRACE_TOL * (1.0 + tb.abs()))
}

/// Equivalence up to simultaneous inversion of every generator.
pub fn words_equivalent_up_to_mirror(w1: &BraidWord, w2: &BraidWord) -> bool {
    words_equivalent(w1, w2) || words_equivalent(&w1.mirrored(), w2)
}

#[derive(Clone, Copy, Debug, PartialEq)]
struct Mat2([[f64; 2]; 2]);

impl Mat2 {
    fn identity() -> Self {
        Self([[1.0, 0.0], [0.0, 1.0]])
    }

    fn mul(&self, o: &Self) -> Self {
        let a = &self.0;
        let b = &o.0;
        Self([
            [a[0][0] * b[0][0] + a[0][1] * b[1][0], a[0][0] * b[0][1] + a[0][1] * b[1][1]],
            [a[1][0] * b[0][0] + a[1][1] * b[1][0], a[1][0] * b[0][1] + a[1][1] * b[1][1]],
        ])
    }

    fn inverse(&self) -> Self {
        let [[a, b], [c, d]] = self.0;
        let det = a * d - b * c;
        Self([[d / det, -b / det], [-c / det, a / det]])
    }
}
