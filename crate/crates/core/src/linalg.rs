//! Dense complex linear algebra for the small (≤ 16×16) operators used
//! throughout the crate.
//!
//! Everything here is a pure function of its inputs. The eigensolver reduces
//! to upper Hessenberg form with Householder reflections and then runs a
//! single-shift complex QR iteration to a full Schur form; eigenvectors are
//! obtained by back substitution on the triangular factor.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;
use thiserror::Error;

pub type C64 = Complex64;

/// Eigenvector matrices with a reciprocal condition number below this value
/// are treated as defective.
pub const DEFECT_RCOND_THRESHOLD: f64 = 1e-6;

/// Minimal reciprocal condition number accepted by [`solve`].
pub const SOLVE_RCOND_MIN: f64 = 1e-12;

const QR_ITERS_PER_EIGENVALUE: usize = 60;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("QR iteration did not converge after {iterations} sweeps ({unconverged} eigenvalues left)")]
    NoConvergence {
        iterations: usize,
        unconverged: usize,
        /// Diagonal of the partially reduced matrix at the point of failure.
        partial: Vec<C64>,
    },
    #[error("matrix is numerically singular (reciprocal condition {rcond:.3e})")]
    Singular { rcond: f64 },
    #[error("matrix exponential out of range (‖a·t‖₁ = {norm:.3e})")]
    Range { norm: f64 },
}

pub type Result<T> = std::result::Result<T, LinalgError>;

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Row-major dense complex matrix.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![C64::new(0.0, 0.0); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a matrix from row-major entries.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(LinalgError::Dimension(format!("{} entries for a {rows}×{cols} matrix", data.len())));
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from real row-major rows.
    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        let r = rows.len();
        let cl = rows.first().map_or(0, |row| row.len());
        Self::from_fn(r, cl, |i, j| C64::new(rows[i][j], 0.0))
    }

    pub fn diag(values: &[C64]) -> Self {
        let n = values.len();
        let mut m = Self::zeros(n, n);
        for (i, v) in values.iter().enumerate() {
            m[(i, i)] = *v;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn set_column(&mut self, j: usize, v: &[C64]) {
        for (i, x) in v.iter().enumerate() {
            self[(i, j)] = *x;
        }
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn conj(&self) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| z.conj()).collect() }
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn scale(&self, s: C64) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| z * s).collect() }
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    /// Maximum absolute column sum.
    pub fn norm1(&self) -> f64 {
        (0..self.cols).map(|j| (0..self.rows).map(|i| self[(i, j)].norm()).sum::<f64>()).fold(0.0, f64::max)
    }

    pub fn norm_fro(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn matvec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(v.len(), self.cols, "matvec dimension");
        (0..self.rows).map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum()).collect()
    }

    /// Extracts the sub-matrix with the given row and column index lists.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> Self {
        Self::from_fn(rows.len(), cols.len(), |i, j| self[(rows[i], cols[j])])
    }

    fn check_square(&self, what: &str) -> Result<()> {
        if self.is_square() {
            Ok(())
        } else {
            Err(LinalgError::Dimension(format!("{what}: {}×{} is not square", self.rows, self.cols)))
        }
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.cols + j]
    }
}

impl<'a> Mul<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.cols, rhs.rows, "matrix product dimension");
        let mut out = ComplexMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for l in 0..self.cols {
                let a = self[(i, l)];
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..rhs.cols {
                    out.data[i * rhs.cols + j] += a * rhs.data[l * rhs.cols + j];
                }
            }
        }
        out
    }
}

impl<'a> Add<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "matrix sum dimension");
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl<'a> Sub<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "matrix difference dimension");
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}×{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for z in self.row(i) {
                write!(f, "{:>+.4e}{:+.4e}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// Kronecker product of two square matrices.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    a.check_square("kron lhs")?;
    b.check_square("kron rhs")?;
    let (n, m) = (a.rows, b.rows);
    Ok(ComplexMatrix::from_fn(n * m, n * m, |i, j| a[(i / m, j / m)] * b[(i % m, j % m)]))
}

pub fn vec_norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Bilinear product `Σ aᵢ bᵢ` (no conjugation).
pub fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Hermitian inner product `Σ conj(aᵢ) bᵢ`.
pub fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Eigen-decomposition of a square matrix.
#[derive(Clone, Debug)]
pub struct Spectrum {
    /// Eigenvalues ordered by (Re asc, Im asc).
    pub values: Vec<C64>,
    /// Right eigenvectors as unit-norm columns, in the order of `values`.
    pub right_vectors: ComplexMatrix,
    /// Left eigenvectors as rows. Biorthonormal to the right vectors
    /// (`left.row(i) · right.column(j) = δᵢⱼ`) unless the matrix is defective.
    pub left_vectors: ComplexMatrix,
    /// Reciprocal 1-norm condition number of `right_vectors`.
    pub rcond: f64,
}

impl Spectrum {
    /// Condition number of the eigenvector matrix; grows without bound as
    /// eigenvectors coalesce.
    pub fn defect_score(&self) -> f64 {
        if self.rcond > 0.0 {
            1.0 / self.rcond
        } else {
            f64::INFINITY
        }
    }

    pub fn is_defective(&self) -> bool {
        self.rcond < DEFECT_RCOND_THRESHOLD
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn right(&self, i: usize) -> Vec<C64> {
        self.right_vectors.column(i)
    }

    pub fn left(&self, i: usize) -> Vec<C64> {
        self.left_vectors.row(i).to_vec()
    }
}

/// Eigenvalues only, same ordering as [`eig_full`].
pub fn eigenvalues(a: &ComplexMatrix) -> Result<Vec<C64>> {
    a.check_square("eigenvalues")?;
    let n = a.rows;
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut h = a.clone();
    hessenberg(&mut h, None);
    schur_qr(&mut h, None)?;
    let mut vals: Vec<C64> = (0..n).map(|i| h[(i, i)]).collect();
    vals.sort_by(cmp_re_im);
    Ok(vals)
}

/// Full eigen-decomposition with right and left eigenvectors.
pub fn eig_full(a: &ComplexMatrix) -> Result<Spectrum> {
    a.check_square("eig_full")?;
    if !a.is_finite() {
        return Err(LinalgError::Dimension("eig_full: non-finite entries".into()));
    }
    let n = a.rows;
    if n == 0 {
        return Ok(Spectrum {
            values: vec![],
            right_vectors: ComplexMatrix::zeros(0, 0),
            left_vectors: ComplexMatrix::zeros(0, 0),
            rcond: 1.0,
        });
    }
    let (t, q) = schur(a)?;
    let y = triangular_eigenvectors(&t);
    let v = &q * &y;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| cmp_re_im(&t[(i, i)], &t[(j, j)]));
    let values: Vec<C64> = order.iter().map(|&i| t[(i, i)]).collect();
    let mut right = ComplexMatrix::zeros(n, n);
    for (col, &i) in order.iter().enumerate() {
        let mut x = v.column(i);
        let nx = vec_norm(&x);
        if nx > 0.0 {
            x.iter_mut().for_each(|z| *z /= nx);
        }
        right.set_column(col, &x);
    }

    let (left, rcond) = match inverse_with_rcond(&right) {
        Ok((inv, rc)) if rc >= DEFECT_RCOND_THRESHOLD => (inv, rc),
        Ok((_, rc)) => (left_vectors_individually(a, &values, &right)?, rc),
        Err(LinalgError::Singular { rcond }) => (left_vectors_individually(a, &values, &right)?, rcond),
        Err(e) => return Err(e),
    };
    Ok(Spectrum { values, right_vectors: right, left_vectors: left, rcond })
}

/// Complex Schur decomposition `a = q t qᴴ` with `t` upper triangular.
pub fn schur(a: &ComplexMatrix) -> Result<(ComplexMatrix, ComplexMatrix)> {
    a.check_square("schur")?;
    let mut h = a.clone();
    let mut q = ComplexMatrix::identity(a.rows);
    hessenberg(&mut h, Some(&mut q));
    schur_qr(&mut h, Some(&mut q))?;
    Ok((h, q))
}

fn cmp_re_im(a: &C64, b: &C64) -> Ordering {
    a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im))
}

/// Householder reduction to upper Hessenberg form, accumulating the
/// transformation into `q` when given.
fn hessenberg(h: &mut ComplexMatrix, mut q: Option<&mut ComplexMatrix>) {
    let n = h.rows;
    if n < 3 {
        return;
    }
    for col in 0..n - 2 {
        let x: Vec<C64> = (col + 1..n).map(|i| h[(i, col)]).collect();
        let alpha = vec_norm(&x);
        if alpha == 0.0 {
            continue;
        }
        let phase = if x[0].norm() > 0.0 { x[0] / x[0].norm() } else { C64::new(1.0, 0.0) };
        let mut v = x.clone();
        v[0] += phase * alpha;
        let vn = vec_norm(&v);
        if vn == 0.0 {
            continue;
        }
        v.iter_mut().for_each(|z| *z /= vn);
        // H ← P H P with P = I − 2 v vᴴ acting on indices col+1..n.
        for j in 0..n {
            let s: C64 = (0..v.len()).map(|k| v[k].conj() * h[(col + 1 + k, j)]).sum();
            for k in 0..v.len() {
                h[(col + 1 + k, j)] -= v[k] * s * 2.0;
            }
        }
        for i in 0..n {
            let s: C64 = (0..v.len()).map(|k| h[(i, col + 1 + k)] * v[k]).sum();
            for k in 0..v.len() {
                h[(i, col + 1 + k)] -= s * v[k].conj() * 2.0;
            }
        }
        if let Some(q) = q.as_deref_mut() {
            for i in 0..n {
                let s: C64 = (0..v.len()).map(|k| q[(i, col + 1 + k)] * v[k]).sum();
                for k in 0..v.len() {
                    q[(i, col + 1 + k)] -= s * v[k].conj() * 2.0;
                }
            }
        }
        for i in col + 2..n {
            h[(i, col)] = C64::new(0.0, 0.0);
        }
    }
}

/// Givens rotation `G = [[c, s], [−s̄, c]]` with `G·[x; y] = [r; 0]`.
fn givens(x: C64, y: C64) -> (f64, C64) {
    let ax = x.norm();
    let ay = y.norm();
    if ay == 0.0 {
        return (1.0, C64::new(0.0, 0.0));
    }
    if ax == 0.0 {
        return (0.0, y.conj() / ay);
    }
    let r = ax.hypot(ay);
    (ax / r, (x / ax) * y.conj() / r)
}

/// Shifted complex QR iteration on an upper Hessenberg matrix, producing an
/// upper triangular Schur factor in place.
fn schur_qr(h: &mut ComplexMatrix, mut q: Option<&mut ComplexMatrix>) -> Result<()> {
    let n = h.rows;
    if n <= 1 {
        return Ok(());
    }
    let eps = f64::EPSILON;
    let scale = h.max_abs().max(f64::MIN_POSITIVE);
    let max_total = QR_ITERS_PER_EIGENVALUE * n;
    let mut total = 0usize;
    let mut hi = n - 1;
    let mut iter = 0usize;
    while hi > 0 {
        let mut lo = hi;
        while lo > 0 {
            let mut s = h[(lo - 1, lo - 1)].norm() + h[(lo, lo)].norm();
            if s == 0.0 {
                s = scale;
            }
            if h[(lo, lo - 1)].norm() <= eps * s {
                h[(lo, lo - 1)] = C64::new(0.0, 0.0);
                break;
            }
            lo -= 1;
        }
        if lo == hi {
            hi -= 1;
            iter = 0;
            continue;
        }
        iter += 1;
        total += 1;
        if total > max_total {
            return Err(LinalgError::NoConvergence {
                iterations: total,
                unconverged: hi + 1,
                partial: (0..n).map(|i| h[(i, i)]).collect(),
            });
        }
        let shift = if iter.is_multiple_of(11) {
            // exceptional shift to break symmetric stalls
            h[(hi, hi)] + C64::new(0.75 * h[(hi, hi - 1)].norm(), 0.25 * h[(hi, hi - 1)].norm())
        } else {
            wilkinson_shift(h[(hi - 1, hi - 1)], h[(hi - 1, hi)], h[(hi, hi - 1)], h[(hi, hi)])
        };

        let mut x = h[(lo, lo)] - shift;
        let mut y = h[(lo + 1, lo)];
        for k in lo..hi {
            if k > lo {
                x = h[(k, k - 1)];
                y = h[(k + 1, k - 1)];
            }
            let (cs, sn) = givens(x, y);
            let col_start = if k > lo { k - 1 } else { lo };
            for j in col_start..n {
                let a = h[(k, j)];
                let b = h[(k + 1, j)];
                h[(k, j)] = a * cs + sn * b;
                h[(k + 1, j)] = -sn.conj() * a + b * cs;
            }
            let row_end = (k + 2).min(hi);
            for i in 0..=row_end {
                let a = h[(i, k)];
                let b = h[(i, k + 1)];
                h[(i, k)] = a * cs + b * sn.conj();
                h[(i, k + 1)] = -a * sn + b * cs;
            }
            if let Some(q) = q.as_deref_mut() {
                for i in 0..n {
                    let a = q[(i, k)];
                    let b = q[(i, k + 1)];
                    q[(i, k)] = a * cs + b * sn.conj();
                    q[(i, k + 1)] = -a * sn + b * cs;
                }
            }
            if k > lo {
                h[(k + 1, k - 1)] = C64::new(0.0, 0.0);
            }
        }
    }
    Ok(())
}

/// Eigenvalue of `[[a, b], [c, d]]` closest to `d`.
fn wilkinson_shift(a: C64, b: C64, c: C64, d: C64) -> C64 {
    let tr_half = (a + d) * 0.5;
    let det = a * d - b * c;
    let disc = (tr_half * tr_half - det).sqrt();
    let l1 = tr_half + disc;
    let l2 = tr_half - disc;
    if (l1 - d).norm() <= (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

/// Right eigenvectors of an upper triangular matrix as columns.
fn triangular_eigenvectors(t: &ComplexMatrix) -> ComplexMatrix {
    let n = t.rows;
    let max_abs = t.max_abs();
    let small = f64::EPSILON * if max_abs > 0.0 { max_abs } else { 1.0 };
    let mut y = ComplexMatrix::zeros(n, n);
    for k in 0..n {
        let lam = t[(k, k)];
        y[(k, k)] = C64::new(1.0, 0.0);
        for i in (0..k).rev() {
            let s: C64 = (i + 1..=k).map(|j| t[(i, j)] * y[(j, k)]).sum();
            if s == C64::new(0.0, 0.0) {
                continue;
            }
            let mut den = t[(i, i)] - lam;
            if den.norm() < small {
                den = C64::new(small, 0.0);
            }
            y[(i, k)] = -s / den;
        }
        // rescale to avoid overflow from tiny denominators
        let nrm = (0..=k).map(|i| y[(i, k)].norm()).fold(0.0, f64::max);
        if nrm > 1e100 {
            for i in 0..=k {
                y[(i, k)] /= nrm;
            }
        }
    }
    y
}

/// Left eigenvectors for (nearly) defective matrices: right eigenvectors of
/// `aᵀ` matched to `values`, scaled so that `w·v = 1` where that is possible.
fn left_vectors_individually(a: &ComplexMatrix, values: &[C64], right: &ComplexMatrix) -> Result<ComplexMatrix> {
    let n = a.rows;
    let (t, q) = schur(&a.transpose())?;
    let y = triangular_eigenvectors(&t);
    let w = &q * &y;
    let mut used = vec![false; n];
    let mut left = ComplexMatrix::zeros(n, n);
    for (row, lam) in values.iter().enumerate() {
        let mut best = None;
        for i in 0..n {
            if used[i] {
                continue;
            }
            let d = (t[(i, i)] - lam).norm();
            if best.is_none_or(|(_, bd)| d < bd) {
                best = Some((i, d));
            }
        }
        let (i, _) = best.expect("non-empty spectrum");
        used[i] = true;
        let mut x = w.column(i);
        let nx = vec_norm(&x);
        x.iter_mut().for_each(|z| *z /= nx);
        let p = dot(&x, &right.column(row));
        if p.norm() > 1e-8 {
            x.iter_mut().for_each(|z| *z /= p);
        }
        for (j, z) in x.into_iter().enumerate() {
            left[(row, j)] = z;
        }
    }
    Ok(left)
}

/// LU factorisation with partial pivoting.
struct Lu {
    lu: ComplexMatrix,
    perm: Vec<usize>,
    singular: bool,
}

fn lu_decompose(a: &ComplexMatrix) -> Lu {
    let n = a.rows;
    let mut lu = a.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut singular = false;
    for k in 0..n {
        let (p, pmax) =
            (k..n).map(|i| (i, lu[(i, k)].norm())).fold((k, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if pmax == 0.0 {
            singular = true;
            continue;
        }
        if p != k {
            for j in 0..n {
                let tmp = lu[(k, j)];
                lu[(k, j)] = lu[(p, j)];
                lu[(p, j)] = tmp;
            }
            perm.swap(k, p);
        }
        let piv = lu[(k, k)];
        for i in k + 1..n {
            let f = lu[(i, k)] / piv;
            lu[(i, k)] = f;
            if f == C64::new(0.0, 0.0) {
                continue;
            }
            for j in k + 1..n {
                let u = lu[(k, j)];
                lu[(i, j)] -= f * u;
            }
        }
    }
    Lu { lu, perm, singular }
}

impl Lu {
    fn solve_vec(&self, b: &[C64]) -> Vec<C64> {
        let n = self.lu.rows;
        let mut x: Vec<C64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let s: C64 = (0..i).map(|j| self.lu[(i, j)] * x[j]).sum();
            x[i] -= s;
        }
        for i in (0..n).rev() {
            let s: C64 = (i + 1..n).map(|j| self.lu[(i, j)] * x[j]).sum();
            x[i] = (x[i] - s) / self.lu[(i, i)];
        }
        x
    }

    fn solve(&self, b: &ComplexMatrix) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(b.rows, b.cols);
        for j in 0..b.cols {
            out.set_column(j, &self.solve_vec(&b.column(j)));
        }
        out
    }
}

/// Inverse together with the reciprocal 1-norm condition number.
pub fn inverse_with_rcond(a: &ComplexMatrix) -> Result<(ComplexMatrix, f64)> {
    a.check_square("inverse")?;
    let n = a.rows;
    let lu = lu_decompose(a);
    if lu.singular {
        return Err(LinalgError::Singular { rcond: 0.0 });
    }
    let inv = lu.solve(&ComplexMatrix::identity(n));
    let denom = a.norm1() * inv.norm1();
    let rcond = if denom.is_finite() && denom > 0.0 { 1.0 / denom } else { 0.0 };
    Ok((inv, rcond))
}

/// Reciprocal 1-norm condition number (0 for exactly singular input).
pub fn rcond(a: &ComplexMatrix) -> f64 {
    match inverse_with_rcond(a) {
        Ok((_, r)) => r,
        Err(_) => 0.0,
    }
}

/// Solves `a·x = b` for `x`.
pub fn solve(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    a.check_square("solve")?;
    if b.rows != a.rows {
        return Err(LinalgError::Dimension(format!("solve: rhs has {} rows, matrix is {}×{}", b.rows, a.rows, a.cols)));
    }
    let lu = lu_decompose(a);
    if lu.singular {
        return Err(LinalgError::Singular { rcond: 0.0 });
    }
    let inv = lu.solve(&ComplexMatrix::identity(a.rows));
    let rc = 1.0 / (a.norm1() * inv.norm1());
    if !(rc >= SOLVE_RCOND_MIN) {
        return Err(LinalgError::Singular { rcond: if rc.is_finite() { rc } else { 0.0 } });
    }
    let mut x = lu.solve(b);
    // one step of iterative refinement
    let r = b - &(a * &x);
    let dx = lu.solve(&r);
    x = &x + &dx;
    Ok(x)
}

// Padé coefficients for the [m/m] approximants of exp (Higham 2005).
const PADE3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const PADE5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const PADE7: [f64; 8] = [17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0];
const PADE9: [f64; 10] =
    [17643225600.0, 8821612800.0, 2075673600.0, 302702400.0, 30270240.0, 2162160.0, 110880.0, 3960.0, 90.0, 1.0];
const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];
const THETA: [(usize, f64); 4] =
    [(3, 1.495585217958292e-2), (5, 2.53939833006323e-1), (7, 9.504178996162932e-1), (9, 2.097847961257068e0)];
const THETA13: f64 = 5.371920351148152;
const MAX_SQUARINGS: i32 = 1000;

/// Matrix exponential by scaling and squaring with Padé approximants.
pub fn expm(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    a.check_square("expm")?;
    let n = a.rows;
    let norm = a.norm1();
    if !norm.is_finite() {
        return Err(LinalgError::Range { norm });
    }
    let ident = ComplexMatrix::identity(n);
    for &(m, theta) in &THETA {
        if norm <= theta {
            let coeffs: &[f64] = match m {
                3 => &PADE3,
                5 => &PADE5,
                7 => &PADE7,
                _ => &PADE9,
            };
            return pade_low(a, coeffs, &ident);
        }
    }
    let s = if norm > THETA13 { (norm / THETA13).log2().ceil() as i32 } else { 0 };
    if s > MAX_SQUARINGS {
        return Err(LinalgError::Range { norm });
    }
    let scaled = a.scale(C64::new(2f64.powi(-s), 0.0));
    let mut r = pade13(&scaled, &ident)?;
    for _ in 0..s {
        r = &r * &r;
    }
    if !r.is_finite() {
        return Err(LinalgError::Range { norm });
    }
    Ok(r)
}

fn pade_low(a: &ComplexMatrix, b: &[f64], ident: &ComplexMatrix) -> Result<ComplexMatrix> {
    let a2 = a * a;
    let mut powers = vec![ident.clone(), a2.clone()];
    while powers.len() * 2 < b.len() {
        let next = powers.last().unwrap() * &a2;
        powers.push(next);
    }
    let n = a.rows;
    let mut u = ComplexMatrix::zeros(n, n);
    let mut v = ComplexMatrix::zeros(n, n);
    for (j, p) in powers.iter().enumerate() {
        v = &v + &p.scale(C64::new(b[2 * j], 0.0));
        if 2 * j + 1 < b.len() {
            u = &u + &p.scale(C64::new(b[2 * j + 1], 0.0));
        }
    }
    let u = a * &u;
    solve_pade(&u, &v)
}

fn pade13(a: &ComplexMatrix, ident: &ComplexMatrix) -> Result<ComplexMatrix> {
    let b = &PADE13;
    let a2 = a * a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let sc = |m: &ComplexMatrix, x: f64| m.scale(C64::new(x, 0.0));
    let inner_u = &(&sc(&a6, b[13]) + &sc(&a4, b[11])) + &sc(&a2, b[9]);
    let u_tail = &(&(&sc(&a6, b[7]) + &sc(&a4, b[5])) + &sc(&a2, b[3])) + &sc(ident, b[1]);
    let u = a * &(&(&a6 * &inner_u) + &u_tail);
    let inner_v = &(&sc(&a6, b[12]) + &sc(&a4, b[10])) + &sc(&a2, b[8]);
    let v_tail = &(&(&sc(&a6, b[6]) + &sc(&a4, b[4])) + &sc(&a2, b[2])) + &sc(ident, b[0]);
    let v = &(&a6 * &inner_v) + &v_tail;
    solve_pade(&u, &v)
}

fn solve_pade(u: &ComplexMatrix, v: &ComplexMatrix) -> Result<ComplexMatrix> {
    let p = v + u;
    let q = v - u;
    let lu = lu_decompose(&q);
    if lu.singular {
        return Err(LinalgError::Range { norm: u.norm1() });
    }
    Ok(lu.solve(&p))
}

/// `e^{a·t}·v` for `t ≥ 0`.
pub fn expm_apply(a: &ComplexMatrix, t: f64, v: &[C64]) -> Result<Vec<C64>> {
    a.check_square("expm_apply")?;
    if v.len() != a.rows {
        return Err(LinalgError::Dimension(format!(
            "expm_apply: vector of length {} for {}×{}",
            v.len(),
            a.rows,
            a.cols
        )));
    }
    if !(t >= 0.0) {
        return Err(LinalgError::Range { norm: t });
    }
    if t == 0.0 {
        return Ok(v.to_vec());
    }
    let e = expm(&a.scale(C64::new(t, 0.0)))?;
    Ok(e.matvec(v))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn approx_eq(a: &ComplexMatrix, b: &ComplexMatrix, tol: f64) -> bool {
        (a - b).max_abs() <= tol
    }

    /// Small deterministic generator so the unit tests need no RNG crate.
    fn lcg_matrix(n: usize, seed: u64, scale: f64) -> ComplexMatrix {
        let mut s = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        let mut next = || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
        };
        ComplexMatrix::from_fn(n, n, |_, _| C64::new(next() * scale, next() * scale))
    }

    #[test]
    fn kron_identity_and_nilpotent() {
        let i2 = ComplexMatrix::identity(2);
        assert_eq!(kron(&i2, &i2).unwrap(), ComplexMatrix::identity(4));
        let n = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]);
        let k = kron(&n, &i2).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let expected = if (i, j) == (0, 2) || (i, j) == (1, 3) { 1.0 } else { 0.0 };
                assert_eq!(k[(i, j)], C64::new(expected, 0.0), "entry ({i},{j})");
            }
        }
    }

    #[test]
    fn kron_rejects_non_square() {
        let a = ComplexMatrix::zeros(2, 3);
        assert!(matches!(kron(&a, &a), Err(LinalgError::Dimension(_))));
    }

    #[test]
    fn diagonal_spectrum() {
        let a = ComplexMatrix::diag(&[c(-1.0, 0.0), c(-2.0, 3.0)]);
        let s = eig_full(&a).unwrap();
        assert!((s.values[0] - c(-2.0, 3.0)).norm() < 1e-14);
        assert!((s.values[1] - c(-1.0, 0.0)).norm() < 1e-14);
        assert!(!s.is_defective());
    }

    #[test]
    fn zero_matrix_has_identity_eigenvectors() {
        let s = eig_full(&ComplexMatrix::zeros(3, 3)).unwrap();
        assert_eq!(s.right_vectors, ComplexMatrix::identity(3));
        assert_eq!(s.rcond, 1.0);
    }

    #[test]
    fn jordan_block_is_defective() {
        let a = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]);
        let s = eig_full(&a).unwrap();
        assert!(s.values.iter().all(|v| v.norm() < 1e-14));
        assert!(s.is_defective(), "rcond {}", s.rcond);
        assert!(s.defect_score() > 1.0 / DEFECT_RCOND_THRESHOLD);
    }

    #[test]
    fn random_spectra_residual_trace_and_biorthogonality() {
        for seed in 0..20 {
            let n = 2 + (seed as usize % 12);
            let a = lcg_matrix(n, seed, 1.0);
            let s = eig_full(&a).unwrap();
            let sum: C64 = s.values.iter().sum();
            assert!((sum - a.trace()).norm() <= 1e-9 * a.trace().norm().max(1.0));
            for i in 0..n {
                let v = s.right(i);
                let av = a.matvec(&v);
                let res: f64 = vec_norm(&av.iter().zip(&v).map(|(x, y)| x - s.values[i] * y).collect::<Vec<_>>());
                assert!(res <= 1e-8 * a.norm1(), "seed {seed} residual {res}");
            }
            let prod = &s.left_vectors * &s.right_vectors;
            assert!(approx_eq(&prod, &ComplexMatrix::identity(n), 1e-8), "seed {seed}");
            for w in s.values.windows(2) {
                assert_ne!(cmp_re_im(&w[0], &w[1]), Ordering::Greater);
            }
        }
    }

    #[test]
    fn hermitian_matrix_has_real_spectrum() {
        let a = lcg_matrix(6, 99, 1.0);
        let h = &a + &a.adjoint();
        let vals = eigenvalues(&h).unwrap();
        assert!(vals.iter().all(|v| v.im.abs() < 1e-12));
    }

    #[test]
    fn expm_trivial_cases() {
        let a = lcg_matrix(4, 3, 1.0);
        let v = vec![c(1.0, 0.0), c(0.0, 1.0), c(2.0, 0.0), c(0.0, 0.0)];
        assert_eq!(expm_apply(&a, 0.0, &v).unwrap(), v);
        let d = ComplexMatrix::diag(&[c(-1.0, 0.0)]);
        let r = expm_apply(&d, 1.0, &[c(1.0, 0.0)]).unwrap();
        assert!((r[0] - c((-1f64).exp(), 0.0)).norm() < 1e-15);
    }

    #[test]
    fn expm_matches_taylor_series() {
        // Taylor series oracle summed to 40 terms.
        let raw = lcg_matrix(9, 7, 1.0);
        let a = raw.scale(c(1.0 / raw.norm1(), 0.0));
        let t = 2.0;
        let at = a.scale(c(t, 0.0));
        let mut term = ComplexMatrix::identity(9);
        let mut sum = term.clone();
        for k in 1..=40 {
            term = (&term * &at).scale(c(1.0 / k as f64, 0.0));
            sum = &sum + &term;
        }
        let e = expm(&at).unwrap();
        let rel = (&e - &sum).norm_fro() / sum.norm_fro();
        assert!(rel <= 1e-9, "relative error {rel}");
    }

    #[test]
    fn expm_handles_jordan_blocks() {
        let j = ComplexMatrix::from_real_rows(&[&[-1.0, 1.0, 0.0], &[0.0, -1.0, 1.0], &[0.0, 0.0, -1.0]]);
        let t = 3.0;
        let e = expm(&j.scale(c(t, 0.0))).unwrap();
        let f = (-t).exp();
        let exact = ComplexMatrix::from_real_rows(&[&[f, t * f, t * t / 2.0 * f], &[0.0, f, t * f], &[0.0, 0.0, f]]);
        assert!(approx_eq(&e, &exact, 1e-14));
    }

    #[test]
    fn expm_overflow_is_range_error() {
        let a = ComplexMatrix::diag(&[c(1e308, 0.0), c(1e308, 0.0)]);
        assert!(matches!(expm(&a), Err(LinalgError::Range { .. })));
    }

    #[test]
    fn solve_trivial_and_residual() {
        let b = lcg_matrix(3, 5, 1.0);
        let x = solve(&ComplexMatrix::identity(3), &b).unwrap();
        assert!(approx_eq(&x, &b, 1e-15));
        let x = solve(&ComplexMatrix::diag(&[c(2.0, 0.0)]), &ComplexMatrix::diag(&[c(4.0, 0.0)])).unwrap();
        assert!((x[(0, 0)] - c(2.0, 0.0)).norm() < 1e-15);

        let a = &lcg_matrix(5, 11, 0.3) + &ComplexMatrix::identity(5).scale(c(3.0, 0.0));
        let b = lcg_matrix(5, 12, 1.0);
        let x = solve(&a, &b).unwrap();
        let r = (&(&a * &x) - &b).norm_fro();
        assert!(r <= 1e-10 * b.norm_fro());
    }

    #[test]
    fn solve_singular_reports_condition() {
        let a = ComplexMatrix::from_real_rows(&[&[1.0, 2.0], &[2.0, 4.0]]);
        let b = ComplexMatrix::identity(2);
        assert!(matches!(solve(&a, &b), Err(LinalgError::Singular { .. })));
        let near = ComplexMatrix::from_real_rows(&[&[1.0, 2.0], &[2.0, 4.0 + 1e-14]]);
        match solve(&near, &b) {
            Err(LinalgError::Singular { rcond }) => assert!(rcond < 1e-12),
            other => panic!("expected singular error, got {other:?}"),
        }
    }
}
