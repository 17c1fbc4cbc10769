//! Scalar spectral multipliers: the smooth cutoff family used by the
//! semigroup-difference estimates and the Littlewood–Paley machinery.
//!
//! All plateaus are realised through the classical C^∞ transition
//! `S(u) = g(u) / (g(u) + g(1−u))` with `g(u) = e^{−1/u}` for `u > 0`:
//! `S ≡ 0` on `u ≤ 0` and `S ≡ 1` on `u ≥ 1`.

use std::fmt;
use std::sync::Arc;

/// Scalar function of the spectral parameter, `λ ↦ m(λ)` on `[0, ∞)`.
#[derive(Clone)]
pub struct Multiplier {
    name: String,
    bounded: bool,
    f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl fmt::Debug for Multiplier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Multiplier")
            .field("name", &self.name)
            .field("bounded", &self.bounded)
            .finish()
    }
}

impl Multiplier {
    pub fn new(
        name: impl Into<String>,
        bounded: bool,
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Multiplier { name: name.into(), bounded, f: Arc::new(f) }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn is_bounded(&self) -> bool {
        self.bounded
    }

    pub fn eval(&self, lambda: f64) -> f64 {
        (self.f)(lambda)
    }
}

/// `e^{−1/u}` continued by zero.
fn bump_g(u: f64) -> f64 {
    if u > 0.0 {
        (-1.0 / u).exp()
    } else {
        0.0
    }
}

/// Classical smooth step: 0 for `u ≤ 0`, 1 for `u ≥ 1`, C^∞ monotone between.
pub fn smooth_step(u: f64) -> f64 {
    if u <= 0.0 {
        0.0
    } else if u >= 1.0 {
        1.0
    } else {
        let a = bump_g(u);
        a / (a + bump_g(1.0 - u))
    }
}

/// `θ₀`: ≡ 1 on `(0, 1/2]`, ≡ 0 on `[1, ∞)`, smooth in between.
pub fn theta0(lambda: f64) -> f64 {
    smooth_step(2.0 * (1.0 - lambda))
}

/// `θ₁ = 1 − θ₀`: ≡ 0 on `(0, 1/2]`, ≡ 1 on `[1, ∞)`.
pub fn theta1(lambda: f64) -> f64 {
    1.0 - theta0(lambda)
}

/// Dyadic bump `ψ(λ) = θ₀(λ/2) − θ₀(λ)`, supported in `[1/2, 2]`;
/// telescopes to `Σ_{j≥0} ψ(2^{−j} λ) = θ₁(λ)`.
pub fn psi(lambda: f64) -> f64 {
    theta0(lambda / 2.0) - theta0(lambda)
}

/// `ψ̃(λ) = ψ(λ)/λ`, continued by zero at the origin.
pub fn psi_tilde(lambda: f64) -> f64 {
    if lambda == 0.0 {
        0.0
    } else {
        psi(lambda) / lambda
    }
}

/// Littlewood–Paley plateau `φ`: ≡ 1 on `(0, 1/4)`, ≡ 0 on `[1, ∞)`.
pub fn phi_lp(lambda: f64) -> f64 {
    smooth_step((1.0 - lambda) / 0.75)
}

/// `(1 − e^{−λ})/λ` evaluated stably, with value 1 at the origin.
fn one_minus_exp_over(lambda: f64) -> f64 {
    if lambda == 0.0 {
        1.0
    } else {
        -(-lambda).exp_m1() / lambda
    }
}

/// The semigroup-difference symbol `m(λ) = λ^{s/2−1}(1 − e^{−λ})` for
/// `0 ≤ s < 1`; bounded, tends to 0 at infinity.
pub fn semigroup_difference_symbol(s: f64) -> Multiplier {
    Multiplier::new(format!("lambda^({}/2-1)(1-exp(-lambda))", s), true, move |l: f64| {
        if l == 0.0 {
            if s == 0.0 {
                1.0
            } else {
                0.0
            }
        } else {
            l.powf(s / 2.0) * one_minus_exp_over(l)
        }
    })
}

/// `m_a(λ) = θ₁(λ)/λ` (zero near the origin by the cutoff).
pub fn m_a(lambda: f64) -> f64 {
    if lambda == 0.0 {
        0.0
    } else {
        theta1(lambda) / lambda
    }
}

/// `m_b(λ) = e^{−λ} θ₁(λ)/λ`.
pub fn m_b(lambda: f64) -> f64 {
    if lambda == 0.0 {
        0.0
    } else {
        (-lambda).exp() * theta1(lambda) / lambda
    }
}

/// The named family used throughout the experiments.
pub fn build_cutoffs() -> Vec<Multiplier> {
    vec![
        Multiplier::new("theta0", true, theta0),
        Multiplier::new("theta1", true, theta1),
        Multiplier::new("psi", true, psi),
        Multiplier::new("psi_tilde", true, psi_tilde),
        Multiplier::new("m_a", true, m_a),
        Multiplier::new("m_b", true, m_b),
        Multiplier::new("phi", true, phi_lp),
        Multiplier::new("heat", true, |l: f64| (-l).exp()),
    ]
}

/// Heat multiplier `e^{−λ}`.
pub fn heat_multiplier() -> Multiplier {
    Multiplier::new("heat", true, |l: f64| (-l).exp())
}

/// Band-pass symbol of the j-th Littlewood–Paley block,
/// `λ ↦ φ(2^{−2j} λ) − φ(2^{2j} λ)`.
pub fn lp_block_symbol(j: u32) -> Multiplier {
    let down = 2f64.powi(-2 * j as i32);
    let up = 2f64.powi(2 * j as i32);
    Multiplier::new(format!("lp_block_{j}"), true, move |l: f64| phi_lp(down * l) - phi_lp(up * l))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn theta0_plateaus() {
        assert_eq!(theta0(0.25), 1.0);
        assert_eq!(theta0(0.5), 1.0);
        assert_eq!(theta0(2.0), 0.0);
        assert_eq!(theta0(1.0), 0.0);
        let mid = theta0(0.75);
        assert!(mid > 0.0 && mid < 1.0);
    }

    #[test]
    fn partition_of_unity() {
        for l in [0.1, 0.75, 3.0, 0.5, 1.0, 10.0] {
            assert_abs_diff_eq!(theta0(l) + theta1(l), 1.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn psi_telescopes_to_theta1() {
        // Σ_{j=0}^{40} ψ(2^{-j}·5) = θ₁(5) = 1
        let lambda = 5.0;
        let sum: f64 = (0..=40).map(|j| psi(lambda / 2f64.powi(j))).sum();
        assert_abs_diff_eq!(sum, theta1(lambda), epsilon = 1e-12);
        assert_abs_diff_eq!(sum, 1.0, epsilon = 1e-12);
        // and on a sweep of λ
        for &l in &[0.3, 0.8, 1.7, 2.5, 40.0] {
            let s: f64 = (0..=60).map(|j| psi(l / 2f64.powi(j))).sum();
            assert_abs_diff_eq!(s, theta1(l), epsilon = 1e-12);
        }
    }

    #[test]
    fn phi_plateaus() {
        assert_eq!(phi_lp(0.2), 1.0);
        assert_eq!(phi_lp(0.25), 1.0);
        assert_eq!(phi_lp(1.0), 0.0);
        assert_eq!(phi_lp(3.0), 0.0);
    }

    #[test]
    fn semigroup_symbol_split_is_consistent() {
        // m = m θ₀ + (m_a − m_b) λ^{s/2} · λ ... restated directly:
        // for s = 0, m(λ) = (1-e^{-λ})/λ and m·θ₁ = (m_a − m_b).
        let m = semigroup_difference_symbol(0.0);
        for &l in &[0.7, 1.3, 2.0, 5.0] {
            let m1 = m.eval(l) * theta1(l);
            assert_abs_diff_eq!(m1, m_a(l) - m_b(l), epsilon = 1e-14);
        }
        assert_abs_diff_eq!(m.eval(0.0), 1.0, epsilon = 1e-15);
        let ms = semigroup_difference_symbol(0.5);
        assert_eq!(ms.eval(0.0), 0.0);
        // bounded and decaying
        assert!(ms.eval(1e6) < 1e-2);
    }

    #[test]
    fn lp_block_symbol_bands() {
        let b0 = lp_block_symbol(0);
        for &l in &[0.2, 1.0, 7.0] {
            assert_eq!(b0.eval(l), 0.0);
        }
        let b2 = lp_block_symbol(2);
        assert_abs_diff_eq!(b2.eval(1.0), 1.0, epsilon = 1e-15);
        assert_eq!(b2.eval(16.0), 0.0);
        assert_eq!(b2.eval(0.01), 0.0);
    }
}
