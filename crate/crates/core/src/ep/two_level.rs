//! Closed-form spectrum of the hybrid two-level Liouvillian (units of ω).

use crate::linalg::C64;
use crate::model::TwoLevelParams;

/// The four eigenvalues: `−γ/2` followed by the three halved roots of
/// `x³ + 3γx² + (4 + 2γ²)x + 4γ(1 − z) = 0`, each in units of ω.
pub fn two_level_exact(q: &TwoLevelParams) -> [C64; 4] {
    let g = q.gamma / q.omega;
    let z = q.jump_weight.z();
    // x = y − γ removes the quadratic term: y³ + (4 − γ²)y − 4γz = 0
    let p = C64::new(4.0 - g * g, 0.0);
    let qq = -z * (4.0 * g);
    let roots = depressed_cubic_roots(p, qq);
    let half = |y: C64| (y - g) * 0.5 * q.omega;
    [C64::new(-0.5 * q.gamma, 0.0), half(roots[0]), half(roots[1]), half(roots[2])]
}

/// Cardano roots of `y³ + p·y + q = 0`.
fn depressed_cubic_roots(p: C64, q: C64) -> [C64; 3] {
    let omega = C64::new(-0.5, 3f64.sqrt() / 2.0);
    let disc = (q * q * 0.25 + p * p * p / 27.0).sqrt();
    let mut u3 = -q * 0.5 + disc;
    if (-q * 0.5 - disc).norm() > u3.norm() {
        u3 = -q * 0.5 - disc;
    }
    if u3.norm() == 0.0 {
        return [C64::new(0.0, 0.0); 3];
    }
    let u = u3.powf(1.0 / 3.0);
    let mut roots = [C64::new(0.0, 0.0); 3];
    let mut w = C64::new(1.0, 0.0);
    for r in roots.iter_mut() {
        let un = u * w;
        *r = un - p / (un * 3.0);
        w *= omega;
    }
    roots
}

/// Discriminant-type quantity `4(4 − γ²)³ + 432γ²z²` of the depressed cubic
/// (in units of ω); it vanishes exactly where two cubic roots coalesce.
pub fn cubic_discriminant(gamma: f64, z: C64) -> C64 {
    let p = 4.0 - gamma * gamma;
    C64::new(4.0 * p * p * p, 0.0) + z * z * (432.0 * gamma * gamma)
}

/// Decay rate γ/ω at which the cubic roots coalesce for real weight `z`,
/// searched on `[0, gamma_max]`.
pub fn two_level_ep_gamma(z: f64, gamma_max: f64) -> Option<f64> {
    let f = |g: f64| cubic_discriminant(g, C64::new(z, 0.0)).re;
    if z == 0.0 {
        return (gamma_max >= 2.0).then_some(2.0);
    }
    // f(0) = 256 > 0 and f → −∞; take the first sign change
    let n = 4000;
    let mut prev = (0.0, f(0.0));
    for i in 1..=n {
        let g = gamma_max * i as f64 / n as f64;
        let v = f(g);
        if (v > 0.0) != (prev.1 > 0.0) {
            let (mut a, mut b) = (prev.0, g);
            let sa = prev.1 > 0.0;
            for _ in 0..200 {
                let m = 0.5 * (a + b);
                if (f(m) > 0.0) == sa {
                    a = m;
                } else {
                    b = m;
                }
            }
            return Some(0.5 * (a + b));
        }
        prev = (g, v);
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::eigenvalues;
    use crate::model::{two_level_liouvillian, JumpWeight};

    fn params(gamma: f64, z: f64) -> TwoLevelParams {
        TwoLevelParams { omega: 1.0, gamma, jump_weight: JumpWeight::real(z) }
    }

    #[test]
    fn triple_root_at_critical_decay() {
        let vals = two_level_exact(&params(2.0, 0.0));
        for v in &vals {
            assert!((v - C64::new(-1.0, 0.0)).norm() < 1e-5, "{v}");
        }
        assert!(cubic_discriminant(2.0, C64::new(0.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn full_weight_spectra() {
        let plus = two_level_exact(&params(4.0, 1.0));
        let minus = two_level_exact(&params(4.0, -1.0));
        let has = |s: &[C64; 4], x: f64| s.iter().any(|v| (v - C64::new(x, 0.0)).norm() < 1e-6);
        assert!(has(&plus, 0.0) && has(&plus, -2.0) && has(&plus, -3.0));
        assert!(has(&minus, -4.0) && has(&minus, -2.0) && has(&minus, -1.0));
    }

    #[test]
    fn matches_numerical_spectrum() {
        for &(g, r, k) in &[(0.3, 0.2, 0.4), (1.7, 1.0, 2.0), (3.1, 0.5, 3.0), (5.0, 0.9, 5.5)] {
            let q = TwoLevelParams { omega: 1.0, gamma: g, jump_weight: JumpWeight { r, k } };
            let exact = two_level_exact(&q);
            let numeric = eigenvalues(&two_level_liouvillian(&q)).unwrap();
            for e in &exact {
                let d = numeric.iter().map(|v| (v - e).norm()).fold(f64::INFINITY, f64::min);
                assert!(d < 1e-10, "γ={g} r={r} k={k}: {e} off by {d}");
            }
        }
    }

    #[test]
    fn ep_locations() {
        assert_eq!(two_level_ep_gamma(0.0, 10.0), Some(2.0));
        assert!((two_level_ep_gamma(1.0, 10.0).unwrap() - 4.0).abs() < 1e-10);
        assert!((two_level_ep_gamma(-1.0, 10.0).unwrap() - 4.0).abs() < 1e-10);
        let half = two_level_ep_gamma(0.5, 10.0).unwrap();
        assert_eq!(half, two_level_ep_gamma(-0.5, 10.0).unwrap());
    }
}
