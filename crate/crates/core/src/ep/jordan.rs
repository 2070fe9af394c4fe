//! Jordan chains at a defective eigenvalue and first-order Puiseux splitting.

use std::f64::consts::TAU;

use super::EpError;
use crate::linalg::{dot, eig_full, eigenvalues, solve, vec_norm, ComplexMatrix, C64};

const NULL_TOL: f64 = 1e-6;

/// Right and left Jordan chains of length `m` at `lambda0`.
///
/// Right chain: `(A − λ₀)u₁ = 0`, `(A − λ₀)u_{j+1} = u_j`.
/// Left chain: `v₁ᵀ(A − λ₀) = 0`, `v_{j+1}ᵀ(A − λ₀) = v_jᵀ`, normalized so that
/// `v_iᵀ u_j = 1` when `i + j = m + 1` and `0` otherwise.
#[derive(Clone, Debug)]
pub struct JordanChainData {
    pub lambda0: C64,
    pub u_chain: Vec<Vec<C64>>,
    pub v_chain: Vec<Vec<C64>>,
}

impl JordanChainData {
    pub fn order(&self) -> usize {
        self.u_chain.len()
    }

    /// Largest violation of the chain recurrences for matrix `a`.
    pub fn recurrence_residual(&self, a: &ComplexMatrix) -> f64 {
        let b = shifted(a, self.lambda0);
        let bt = b.transpose();
        let m = self.order();
        let mut worst: f64 = 0.0;
        for j in 0..m {
            let bu = b.matvec(&self.u_chain[j]);
            let bv = bt.matvec(&self.v_chain[j]);
            let (ru, rv) = if j == 0 {
                (vec_norm(&bu), vec_norm(&bv))
            } else {
                (diff_norm(&bu, &self.u_chain[j - 1]), diff_norm(&bv, &self.v_chain[j - 1]))
            };
            worst = worst.max(ru).max(rv);
        }
        worst
    }

    /// Largest violation of `v_iᵀ u_j = δ_{i+j, m+1}`.
    pub fn normalization_residual(&self) -> f64 {
        let m = self.order();
        let mut worst: f64 = 0.0;
        for i in 0..m {
            for j in 0..m {
                let target = if i + j == m - 1 { 1.0 } else { 0.0 };
                worst = worst.max((dot(&self.v_chain[i], &self.u_chain[j]) - target).norm());
            }
        }
        worst
    }
}

fn diff_norm(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt()
}

fn shifted(a: &ComplexMatrix, lambda: C64) -> ComplexMatrix {
    a - &ComplexMatrix::identity(a.rows()).scale(lambda)
}

fn power(b: &ComplexMatrix, e: usize) -> ComplexMatrix {
    (0..e).fold(ComplexMatrix::identity(b.rows()), |acc, _| &acc * b)
}

/// Orthonormal basis (columns) of the numerical null space of `m`.
fn null_basis(m: &ComplexMatrix, tol: f64) -> Result<Vec<Vec<C64>>, EpError> {
    let gram = &m.adjoint() * m;
    let spec = eig_full(&gram)?;
    let scale = gram.max_abs().max(1.0);
    let mut basis: Vec<Vec<C64>> = Vec::new();
    for i in 0..spec.len() {
        if spec.values[i].re.abs() <= tol * tol * scale {
            let mut v = spec.right(i);
            // Gram–Schmidt against vectors already kept
            for b in &basis {
                let p: C64 = b.iter().zip(&v).map(|(x, y)| x.conj() * y).sum();
                v.iter_mut().zip(b).for_each(|(y, x)| *y -= p * x);
            }
            let n = vec_norm(&v);
            if n > 1e-8 {
                v.iter_mut().for_each(|y| *y /= n);
                basis.push(v);
            }
        }
    }
    Ok(basis)
}

/// Top vector `w_m` of a chain `w_j = B^{m−j} w_m` inside the generalized
/// eigenspace, chosen to maximize `|B^{m−1} w_m|`.
fn chain_top(b: &ComplexMatrix, m: usize) -> Result<Vec<C64>, EpError> {
    let bm = power(b, m);
    let space = null_basis(&bm, NULL_TOL)?;
    if space.len() < m {
        return Err(EpError::OrderMismatch { requested: m, reason: "generalized eigenspace too small" });
    }
    let bm1 = power(b, m - 1);
    let top = space
        .iter()
        .map(|w| (vec_norm(&bm1.matvec(w)), w))
        .max_by(|x, y| x.0.total_cmp(&y.0))
        .expect("non-empty basis");
    let scale = b.max_abs().max(1.0).powi(m as i32 - 1);
    if top.0 <= NULL_TOL * scale {
        return Err(EpError::OrderMismatch { requested: m, reason: "chain shorter than requested order" });
    }
    Ok(top.1.clone())
}

/// Jordan chains of order `m` of `a` at `lambda0`.
pub fn jordan_chain(a: &ComplexMatrix, lambda0: C64, m: usize) -> Result<JordanChainData, EpError> {
    if m < 2 {
        return Err(EpError::OrderMismatch { requested: m, reason: "order must be at least 2" });
    }
    let b = shifted(a, lambda0);
    let top = chain_top(&b, m)?;
    let mut u_chain = vec![top];
    for _ in 1..m {
        let next = b.matvec(u_chain.last().unwrap());
        u_chain.push(next);
    }
    u_chain.reverse();
    let s = vec_norm(&u_chain[0]);
    u_chain.iter_mut().for_each(|u| u.iter_mut().for_each(|x| *x /= s));

    // v_m in the left generalized eigenspace with v_mᵀ u_j = δ_{j1}
    let bt = b.transpose();
    let left_space = null_basis(&power(&bt, m), NULL_TOL)?;
    let d = left_space.len();
    if d < m {
        return Err(EpError::OrderMismatch { requested: m, reason: "left generalized eigenspace too small" });
    }
    // constraint matrix: rows j, columns basis vectors
    let cmat = ComplexMatrix::from_fn(m, d, |j, l| dot(&left_space[l], &u_chain[j]));
    let mut rhs = ComplexMatrix::zeros(m, 1);
    rhs[(0, 0)] = C64::new(1.0, 0.0);
    let gram = &cmat * &cmat.adjoint();
    let y = &cmat.adjoint() * &solve(&gram, &rhs)?;
    let n = a.rows();
    let vm: Vec<C64> = (0..n).map(|i| (0..d).map(|l| left_space[l][i] * y[(l, 0)]).sum()).collect();
    let mut v_chain = vec![vm];
    for _ in 1..m {
        let next = bt.matvec(v_chain.last().unwrap());
        v_chain.push(next);
    }
    v_chain.reverse();
    Ok(JordanChainData { lambda0, u_chain, v_chain })
}

/// First-order splitting of a third-order exceptional point under `z·L_J`.
#[derive(Clone, Debug)]
pub struct PuiseuxExpansion {
    pub lambda0: C64,
    /// `v₁ᵀ L_J u₁`.
    pub coupling: C64,
    /// The three cube roots of `e^{ik}·v₁ᵀL_Ju₁`, branch `n` at phase `(k + arg + 2πn)/3`.
    pub coefficients: [C64; 3],
}

impl PuiseuxExpansion {
    /// Predicted eigenvalues `λ₀ + λ₁⁽ⁿ⁾ r^{1/3}`.
    pub fn predict(&self, r: f64) -> [C64; 3] {
        let s = r.cbrt();
        self.coefficients.map(|c| self.lambda0 + c * s)
    }
}

/// Cube-root coefficients of the perturbed third-order exceptional point of `l_ep`.
pub fn puiseux_first_order(l_ep: &ComplexMatrix, l_j: &ComplexMatrix, k: f64) -> Result<PuiseuxExpansion, EpError> {
    let vals = eigenvalues(l_ep)?;
    let scale = vals.iter().map(|v| v.norm()).fold(0.0, f64::max).max(1.0);
    let radius = 1e-4 * scale;
    let (centre, count) = vals
        .iter()
        .map(|v| {
            let members: Vec<&C64> = vals.iter().filter(|w| (*w - v).norm() <= radius).collect();
            let mean = members.iter().copied().sum::<C64>() / members.len() as f64;
            (mean, members.len())
        })
        .max_by_key(|&(_, c)| c)
        .expect("non-empty spectrum");
    if count < 3 {
        return Err(EpError::OrderMismatch { requested: 3, reason: "no triple eigenvalue" });
    }
    let chain = jordan_chain(l_ep, centre, 3)?;
    let coupling = dot(&chain.v_chain[0], &l_j.matvec(&chain.u_chain[0]));
    if coupling.norm() <= 1e-12 * l_j.max_abs().max(1.0) {
        return Err(EpError::DegeneratePerturbation);
    }
    let modulus = coupling.norm().cbrt();
    let phase = k + coupling.arg();
    let coefficients = [0, 1, 2].map(|n| C64::from_polar(modulus, (phase + TAU * n as f64) / 3.0));
    Ok(PuiseuxExpansion { lambda0: centre, coupling, coefficients })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;

    fn example_pair() -> (ComplexMatrix, ComplexMatrix) {
        let l_ep = ComplexMatrix::from_real_rows(&[
            &[-1.0, 0.0, 0.0, 0.0],
            &[0.0, -1.0, 1.0, 0.0],
            &[0.0, 0.0, -1.0, 1.0],
            &[0.0, 0.0, 0.0, -1.0],
        ]);
        let mut l_j = ComplexMatrix::zeros(4, 4);
        l_j[(3, 1)] = c(1.0, 0.0);
        (l_ep, l_j)
    }

    fn unit(n: usize, i: usize) -> Vec<C64> {
        (0..n).map(|j| c(if i == j { 1.0 } else { 0.0 }, 0.0)).collect()
    }

    fn close_vec(a: &[C64], b: &[C64]) -> bool {
        diff_norm(a, b) < 1e-12
    }

    #[test]
    fn two_by_two_block() {
        let a = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]);
        let ch = jordan_chain(&a, c(0.0, 0.0), 2).unwrap();
        assert!(close_vec(&ch.u_chain[0], &unit(2, 0)));
        assert!(close_vec(&ch.u_chain[1], &unit(2, 1)));
        assert!(close_vec(&ch.v_chain[0], &unit(2, 1)));
        assert!(ch.recurrence_residual(&a) < 1e-14);
        assert!(ch.normalization_residual() < 1e-14);
    }

    #[test]
    fn example_chain_is_canonical() {
        let (l_ep, _) = example_pair();
        let ch = jordan_chain(&l_ep, c(-1.0, 0.0), 3).unwrap();
        for j in 0..3 {
            assert!(close_vec(&ch.u_chain[j], &unit(4, j + 1)), "u{} = {:?}", j + 1, ch.u_chain[j]);
            assert!(close_vec(&ch.v_chain[j], &unit(4, 3 - j)), "v{} = {:?}", j + 1, ch.v_chain[j]);
        }
        assert!(ch.normalization_residual() < 1e-14);
    }

    #[test]
    fn similarity_transformed_block() {
        let j = ComplexMatrix::from_real_rows(&[
            &[0.5, 1.0, 0.0, 0.0],
            &[0.0, 0.5, 1.0, 0.0],
            &[0.0, 0.0, 0.5, 0.0],
            &[0.0, 0.0, 0.0, -2.0],
        ]);
        let s = ComplexMatrix::from_fn(4, 4, |r, col| {
            c(((r * 7 + col * 3) % 5) as f64 * 0.3 + if r == col { 2.0 } else { 0.0 }, ((r + 2 * col) % 3) as f64 * 0.2)
        });
        let (s_inv, _) = crate::linalg::inverse_with_rcond(&s).unwrap();
        let a = &(&s * &j) * &s_inv;
        let ch = jordan_chain(&a, c(0.5, 0.0), 3).unwrap();
        assert!(ch.recurrence_residual(&a) < 1e-8, "{}", ch.recurrence_residual(&a));
        assert!(ch.normalization_residual() < 1e-8);
    }

    #[test]
    fn order_mismatch() {
        let a = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]);
        assert!(matches!(jordan_chain(&a, c(0.0, 0.0), 3), Err(EpError::OrderMismatch { .. })));
        let d = ComplexMatrix::diag(&[c(1.0, 0.0), c(1.0, 0.0)]);
        assert!(matches!(jordan_chain(&d, c(1.0, 0.0), 2), Err(EpError::OrderMismatch { .. })));
    }

    #[test]
    fn puiseux_coefficients_for_example() {
        let (l_ep, l_j) = example_pair();
        let p0 = puiseux_first_order(&l_ep, &l_j, 0.0).unwrap();
        assert!((p0.coupling - c(1.0, 0.0)).norm() < 1e-12);
        assert!((p0.coefficients[0] - c(1.0, 0.0)).norm() < 1e-12);
        let pi = puiseux_first_order(&l_ep, &l_j, std::f64::consts::PI).unwrap();
        // n = 1 branch at phase π: λ = −1 − r^{1/3}
        assert!((pi.coefficients[1] - c(-1.0, 0.0)).norm() < 1e-12);
        let zero = ComplexMatrix::zeros(4, 4);
        assert!(matches!(puiseux_first_order(&l_ep, &zero, 0.0), Err(EpError::DegeneratePerturbation)));
    }
}
