//! Operators of the driven V-shaped three-level system and of the two
//! benchmark models (hybrid two-level Liouvillian, static two-qubit
//! Hamiltonian).
//!
//! Basis order is {G, D, B}. Density matrices are vectorized row by row, so
//! `ρᵢⱼ` sits at superoperator index `3i + j` and `vec(AρB) = (A ⊗ Bᵀ) vec(ρ)`.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{c, kron, ComplexMatrix, C64};

pub const GROUND: usize = 0;
pub const DARK: usize = 1;
pub const BRIGHT: usize = 2;
pub const LEVELS: usize = 3;
pub const SUPER_DIM: usize = LEVELS * LEVELS;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("invalid parameter {name} = {value}: {reason}")]
    InvalidParameter { name: &'static str, value: f64, reason: &'static str },
}

/// Complex weight `z = r·e^{ik}` of the monitored jump term.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct JumpWeight {
    /// Detector efficiency, `0 ≤ r ≤ 1`.
    pub r: f64,
    /// Counting field in radians.
    pub k: f64,
}

impl JumpWeight {
    pub fn counting(k: f64) -> Self {
        Self { r: 1.0, k }
    }

    /// Real weight; negative values are represented as `|z|·e^{iπ}`.
    pub fn real(z: f64) -> Self {
        if z < 0.0 {
            Self { r: -z, k: std::f64::consts::PI }
        } else {
            Self { r: z, k: 0.0 }
        }
    }

    pub fn z(&self) -> C64 {
        C64::from_polar(self.r, self.k)
    }

    /// Same efficiency, counting field reduced to `[0, 2π)`.
    pub fn with_k(&self, k: f64) -> Self {
        Self { r: self.r, k: k.rem_euclid(TAU) }
    }
}

impl Default for JumpWeight {
    fn default() -> Self {
        Self::counting(0.0)
    }
}

/// Physical parameters of the three-level model.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub gamma_b: f64,
    pub gamma_d: f64,
    pub omega_b: f64,
    pub omega_d: f64,
    pub jump_weight: JumpWeight,
}

impl Default for ModelParams {
    fn default() -> Self {
        Self { gamma_b: 0.5, gamma_d: 0.0, omega_b: 0.1, omega_d: 0.0, jump_weight: JumpWeight::default() }
    }
}

impl ModelParams {
    pub fn with_omega_d(mut self, omega_d: f64) -> Self {
        self.omega_d = omega_d;
        self
    }

    pub fn with_gamma_d(mut self, gamma_d: f64) -> Self {
        self.gamma_d = gamma_d;
        self
    }

    pub fn with_k(mut self, k: f64) -> Self {
        self.jump_weight = self.jump_weight.with_k(k);
        self
    }

    pub fn with_jump_weight(mut self, w: JumpWeight) -> Self {
        self.jump_weight = w;
        self
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let bad = |name, value, reason| Err(ModelError::InvalidParameter { name, value, reason });
        if !(self.gamma_b > 0.0 && self.gamma_b.is_finite()) {
            return bad("gamma_b", self.gamma_b, "must be positive and finite");
        }
        if !(self.gamma_d >= 0.0 && self.gamma_d.is_finite()) {
            return bad("gamma_d", self.gamma_d, "must be nonnegative and finite");
        }
        if !(self.omega_b >= 0.0 && self.omega_b.is_finite()) {
            return bad("omega_b", self.omega_b, "must be nonnegative and finite");
        }
        if !(self.omega_d >= 0.0 && self.omega_d.is_finite()) {
            return bad("omega_d", self.omega_d, "must be nonnegative and finite");
        }
        if !(0.0..=1.0).contains(&self.jump_weight.r) {
            return bad("r", self.jump_weight.r, "must lie in [0, 1]");
        }
        if !self.jump_weight.k.is_finite() {
            return bad("k", self.jump_weight.k, "must be finite");
        }
        Ok(())
    }
}

/// Raising and lowering operators of the dark (S) and bright (T) transitions.
#[derive(Clone, Debug)]
pub struct JumpOperators {
    pub s_plus: ComplexMatrix,
    pub s_minus: ComplexMatrix,
    pub t_plus: ComplexMatrix,
    pub t_minus: ComplexMatrix,
}

fn ket_bra(n: usize, row: usize, col: usize) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(n, n);
    m[(row, col)] = c(1.0, 0.0);
    m
}

pub fn jump_operators() -> JumpOperators {
    JumpOperators {
        s_plus: ket_bra(LEVELS, DARK, GROUND),
        s_minus: ket_bra(LEVELS, GROUND, DARK),
        t_plus: ket_bra(LEVELS, BRIGHT, GROUND),
        t_minus: ket_bra(LEVELS, GROUND, BRIGHT),
    }
}

/// Interaction-picture drive `Ω_D Sˣ + Ω_B Tˣ`.
pub fn h_int(p: &ModelParams) -> ComplexMatrix {
    let mut h = ComplexMatrix::zeros(LEVELS, LEVELS);
    h[(GROUND, DARK)] = c(p.omega_d / 2.0, 0.0);
    h[(DARK, GROUND)] = c(p.omega_d / 2.0, 0.0);
    h[(GROUND, BRIGHT)] = c(p.omega_b / 2.0, 0.0);
    h[(BRIGHT, GROUND)] = c(p.omega_b / 2.0, 0.0);
    h
}

/// `Γ†Γ = γ_B T⁺T⁻ + γ_D S⁺S⁻`, diagonal in the level basis.
fn decay_operator(p: &ModelParams) -> ComplexMatrix {
    ComplexMatrix::diag(&[c(0.0, 0.0), c(p.gamma_d, 0.0), c(p.gamma_b, 0.0)])
}

/// Effective non-Hermitian Hamiltonian `H_I − (i/2)Γ†Γ`.
pub fn h_eff(p: &ModelParams) -> ComplexMatrix {
    &h_int(p) - &decay_operator(p).scale(c(0.0, 0.5))
}

/// Counting-field Lindbladian on row-major vectorized density matrices.
pub fn lindbladian(p: &ModelParams) -> ComplexMatrix {
    let ops = jump_operators();
    let h = h_int(p);
    let decay = decay_operator(p);
    let ident = ComplexMatrix::identity(LEVELS);
    let left = &h - &decay.scale(c(0.0, 0.5));
    let right = &h.transpose() + &decay.transpose().scale(c(0.0, 0.5));
    let coherent = &kron(&left, &ident).expect("square") - &kron(&ident, &right).expect("square");
    let mut l = coherent.scale(c(0.0, -1.0));
    let bright = kron(&ops.t_minus, &ops.t_minus.conj()).expect("square");
    let dark = kron(&ops.s_minus, &ops.s_minus.conj()).expect("square");
    l = &l + &bright.scale(p.jump_weight.z() * p.gamma_b);
    l = &l + &dark.scale(c(p.gamma_d, 0.0));
    l
}

/// Row-major vectorization of a square matrix.
pub fn vectorize(rho: &ComplexMatrix) -> Vec<C64> {
    rho.as_slice().to_vec()
}

pub fn unvectorize(v: &[C64]) -> ComplexMatrix {
    let n = (v.len() as f64).sqrt().round() as usize;
    ComplexMatrix::from_vec(n, n, v.to_vec()).expect("perfect square length")
}

/// Trace of a row-major vectorized `n×n` matrix.
pub fn vec_trace(v: &[C64]) -> C64 {
    let n = (v.len() as f64).sqrt().round() as usize;
    (0..n).map(|i| v[i * n + i]).sum()
}

/// Pure-state density matrix `|level⟩⟨level|`.
pub fn pure_state(level: usize) -> ComplexMatrix {
    ket_bra(LEVELS, level, level)
}

/// Hybrid two-level benchmark `H = ω/2 σˣ`, `Γ = √γ σ⁻`, jump term weighted by `z`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwoLevelParams {
    pub omega: f64,
    pub gamma: f64,
    pub jump_weight: JumpWeight,
}

impl TwoLevelParams {
    pub fn validate(&self) -> Result<(), ModelError> {
        if !(self.omega > 0.0 && self.omega.is_finite()) {
            return Err(ModelError::InvalidParameter { name: "omega", value: self.omega, reason: "must be positive" });
        }
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return Err(ModelError::InvalidParameter {
                name: "gamma",
                value: self.gamma,
                reason: "must be nonnegative",
            });
        }
        if !(0.0..=1.0).contains(&self.jump_weight.r) {
            return Err(ModelError::InvalidParameter {
                name: "r",
                value: self.jump_weight.r,
                reason: "must lie in [0, 1]",
            });
        }
        Ok(())
    }
}

/// 4×4 Liouvillian of the two-level benchmark in basis {g, e}, with `σ⁻ = |g⟩⟨e|`.
pub fn two_level_liouvillian(q: &TwoLevelParams) -> ComplexMatrix {
    let h = ComplexMatrix::from_real_rows(&[&[0.0, q.omega / 2.0], &[q.omega / 2.0, 0.0]]);
    let lower = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]);
    let decay = ComplexMatrix::diag(&[c(0.0, 0.0), c(q.gamma, 0.0)]);
    let ident = ComplexMatrix::identity(2);
    let left = &h - &decay.scale(c(0.0, 0.5));
    let right = &h.transpose() + &decay.scale(c(0.0, 0.5));
    let coherent = &kron(&left, &ident).expect("square") - &kron(&ident, &right).expect("square");
    let jump = kron(&lower, &lower).expect("square").scale(q.jump_weight.z() * q.gamma);
    &coherent.scale(c(0.0, -1.0)) + &jump
}

/// Static two-qubit Hamiltonian `½(ε σᶻ + ω τᶻ + χ σᶻτᶻ)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwoQubitParams {
    pub eps: f64,
    pub omega: f64,
    pub chi: f64,
}

/// Level energies measured from the ground state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TwoQubitEnergies {
    pub dark: f64,
    pub bright: f64,
    pub doubly_excited: f64,
}

/// Hamiltonian in basis {G=↓↓, D=↑↓, B=↓↑, F=↑↑} and the closed-form level energies.
pub fn two_qubit_h0(q: &TwoQubitParams) -> (ComplexMatrix, TwoQubitEnergies) {
    // (σᶻ, τᶻ) eigenvalues of the basis states
    let spins = [(-1.0, -1.0), (1.0, -1.0), (-1.0, 1.0), (1.0, 1.0)];
    let diag: Vec<C64> = spins.iter().map(|&(s, t)| c(0.5 * (q.eps * s + q.omega * t + q.chi * s * t), 0.0)).collect();
    let energies = TwoQubitEnergies { dark: q.eps - q.chi, bright: q.omega - q.chi, doubly_excited: q.eps + q.omega };
    (ComplexMatrix::diag(&diag), energies)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{eig_full, eigenvalues};
    use std::f64::consts::PI;

    fn close(a: C64, b: C64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn jump_operator_entries() {
        let ops = jump_operators();
        assert_eq!(ops.s_plus[(DARK, GROUND)], c(1.0, 0.0));
        assert_eq!(ops.s_plus.max_abs(), 1.0);
        assert_eq!(ops.s_plus.as_slice().iter().filter(|z| z.norm() > 0.0).count(), 1);
        assert_eq!(ops.t_minus, ops.t_plus.adjoint());
        assert_eq!(ops.t_minus[(GROUND, BRIGHT)], c(1.0, 0.0));
        let proj = &(&ops.s_plus * &ops.s_minus) + &(&ops.t_plus * &ops.t_minus);
        assert_eq!(proj, ComplexMatrix::diag(&[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0)]));
    }

    #[test]
    fn bright_jump_superoperator_entry() {
        let ops = jump_operators();
        let k = kron(&ops.t_minus, &ops.t_minus).unwrap();
        assert_eq!(k.rows(), 9);
        for i in 0..9 {
            for j in 0..9 {
                let expected = if (i, j) == (0, 8) { 1.0 } else { 0.0 };
                assert_eq!(k[(i, j)], c(expected, 0.0));
            }
        }
    }

    #[test]
    fn interaction_hamiltonian() {
        let zero = h_int(&ModelParams { omega_b: 0.0, ..Default::default() });
        assert_eq!(zero.max_abs(), 0.0);
        let h = h_int(&ModelParams::default().with_omega_d(0.008));
        assert!(close(h[(GROUND, DARK)], c(0.004, 0.0), 1e-18));
        assert!(close(h[(DARK, GROUND)], c(0.004, 0.0), 1e-18));
        assert!(close(h[(GROUND, BRIGHT)], c(0.05, 0.0), 1e-18));
        assert_eq!(h, h.adjoint());
        // characteristic polynomial x(x² − (Ω_D² + Ω_B²)/4)
        let vals = eigenvalues(&h).unwrap();
        let half = 0.5 * (0.008f64.powi(2) + 0.01).sqrt();
        let expected = [-half, 0.0, half];
        for (v, e) in vals.iter().zip(expected) {
            assert!(close(*v, c(e, 0.0), 1e-14), "{v} vs {e}");
        }
    }

    #[test]
    fn effective_hamiltonian() {
        let p = ModelParams::default().with_omega_d(0.01);
        let h = h_eff(&p);
        assert!(close(h[(BRIGHT, BRIGHT)], c(0.0, -0.25), 1e-16));
        assert_eq!(h[(DARK, DARK)].im, 0.0);
        let p2 = p.with_gamma_d(0.2);
        assert!(close(h_eff(&p2).trace(), c(0.0, -0.35), 1e-15));

        let decoupled = ModelParams { omega_b: 0.0, omega_d: 0.3, ..Default::default() };
        let vals = eigenvalues(&h_eff(&decoupled)).unwrap();
        let reals: Vec<f64> = vals.iter().filter(|v| v.im.abs() < 1e-14).map(|v| v.re).collect();
        assert_eq!(reals.len(), 2);
        assert!(reals.iter().any(|r| (r - 0.15).abs() < 1e-14));
        assert!(reals.iter().any(|r| (r + 0.15).abs() < 1e-14));
    }

    #[test]
    fn trace_preservation_at_zero_field() {
        let p = ModelParams::default().with_omega_d(0.013).with_gamma_d(0.01);
        let l = lindbladian(&p);
        let vec_id = vectorize(&ComplexMatrix::identity(3));
        for j in 0..9 {
            let s: C64 = (0..9).map(|i| vec_id[i] * l[(i, j)]).sum();
            assert!(s.norm() < 1e-15, "column {j}: {s}");
        }
    }

    #[test]
    fn bright_jump_coefficient_at_pi() {
        let l = lindbladian(&ModelParams::default().with_k(PI));
        assert!(close(l[(0, 8)], c(-0.5, 0.0), 1e-15));
    }

    #[test]
    fn zero_dark_drive_has_degenerate_steady_state() {
        let vals = eigenvalues(&lindbladian(&ModelParams::default())).unwrap();
        assert!(vals.iter().filter(|v| v.norm() < 1e-10).count() >= 2);
    }

    #[test]
    fn steady_state_is_density_matrix() {
        let p = ModelParams::default().with_omega_d(0.02);
        let s = eig_full(&lindbladian(&p)).unwrap();
        let top = s.values.len() - 1;
        assert!(s.values.iter().all(|v| v.re <= 1e-10));
        assert!(s.values[top].norm() < 1e-10);
        let v = s.right(top);
        let rho = unvectorize(&v).scale(vec_trace(&v).inv());
        assert!((&rho - &rho.adjoint()).max_abs() < 1e-10);
        assert!(close(rho.trace(), c(1.0, 0.0), 1e-12));
        let ev = eigenvalues(&rho).unwrap();
        assert!(ev.iter().all(|e| e.re >= -1e-8));
    }

    #[test]
    fn two_level_has_fixed_eigenvalue() {
        for &(gamma, z) in &[(1.0, 1.0), (2.5, -0.3), (0.7, 0.0)] {
            let q = TwoLevelParams { omega: 1.0, gamma, jump_weight: JumpWeight::real(z) };
            let vals = eigenvalues(&two_level_liouvillian(&q)).unwrap();
            assert!(vals.iter().any(|v| close(*v, c(-gamma / 2.0, 0.0), 1e-10)), "{vals:?}");
        }
    }

    #[test]
    fn two_level_cubic_roots() {
        let q = TwoLevelParams { omega: 1.0, gamma: 1.3, jump_weight: JumpWeight { r: 0.7, k: 1.1 } };
        let z = q.jump_weight.z();
        let g = q.gamma;
        let vals = eigenvalues(&two_level_liouvillian(&q)).unwrap();
        let cubic = |x: C64| x * x * x + x * x * (3.0 * g) + x * (4.0 + 2.0 * g * g) + (c(1.0, 0.0) - z) * (4.0 * g);
        let mut hits = 0;
        for v in &vals {
            if close(*v, c(-g / 2.0, 0.0), 1e-9) && hits == 0 {
                hits += 1;
                continue;
            }
            assert!(cubic(*v * 2.0).norm() < 1e-9, "{v}");
        }
    }

    #[test]
    fn two_qubit_energies() {
        let (h, e) = two_qubit_h0(&TwoQubitParams { eps: 5.0, omega: 4.0, chi: 1.0 });
        let eg = h[(0, 0)].re;
        assert_eq!((h[(1, 1)].re - eg, h[(2, 2)].re - eg, h[(3, 3)].re - eg), (4.0, 3.0, 9.0));
        assert_eq!((e.dark, e.bright, e.doubly_excited), (4.0, 3.0, 9.0));
        let (_, e0) = two_qubit_h0(&TwoQubitParams { eps: 2.0, omega: 3.0, chi: 0.0 });
        assert_eq!(e0.doubly_excited, e0.dark + e0.bright);
        let (_, e1) = two_qubit_h0(&TwoQubitParams { eps: 2.0, omega: 2.0, chi: 0.7 });
        assert_eq!(e1.dark, e1.bright);
    }

    #[test]
    fn validation() {
        assert!(ModelParams::default().validate().is_ok());
        assert!(ModelParams { gamma_b: 0.0, ..Default::default() }.validate().is_err());
        assert!(ModelParams { omega_d: -1.0, ..Default::default() }.validate().is_err());
        let w = JumpWeight { r: 1.5, k: 0.0 };
        assert!(ModelParams::default().with_jump_weight(w).validate().is_err());
    }
}
