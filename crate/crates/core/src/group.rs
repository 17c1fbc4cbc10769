//! Stratified group instances: polynomial group law, dilations, homogeneous
//! gauge and gauge balls.
//!
//! A group is `R^n` with a graded dilation `δ_α[x] = (α^{a_1} x_1, ..., α^{a_n} x_n)`
//! and a polynomial law `(x·y)_k = x_k + y_k + P_k(x, y)`. The two shipped
//! instances are the Heisenberg group `H¹` and abelian `R^n`, but the law is
//! data-driven so further step-2 (and higher) groups can be described without
//! touching consumers.

use crate::error::{Error, Result};

/// One monomial correction term of the group law: adds
/// `coeff * Π x_i^{p_i} * Π y_j^{q_j}` to output coordinate `target`.
#[derive(Debug, Clone, PartialEq)]
pub struct LawTerm {
    pub target: usize,
    pub coeff: f64,
    pub x_powers: Vec<(usize, u32)>,
    pub y_powers: Vec<(usize, u32)>,
}

/// Polynomial in the coordinates of a single point.
#[derive(Debug, Clone, Default)]
pub struct Poly {
    terms: Vec<(f64, Vec<(usize, u32)>)>,
}

impl Poly {
    pub fn eval(&self, x: &[f64]) -> f64 {
        let mut acc = 0.0;
        for (c, powers) in &self.terms {
            let mut v = *c;
            for &(i, p) in powers {
                v *= x[i].powi(p as i32);
            }
            acc += v;
        }
        acc
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

/// A stratified group instance.
///
/// Fields follow the usual conventions: `n` topological dimension, dilation
/// exponents `a_1 ≤ … ≤ a_n` with `a_1 = 1`, homogeneous dimension
/// `N = Σ a_i`, and `m` the number of degree-1 generators.
#[derive(Debug, Clone)]
pub struct GroupSpec {
    name: String,
    n: usize,
    exponents: Vec<u32>,
    law: Vec<LawTerm>,
    gauge_coeff: f64,
    homogeneous_dim: u32,
    generators: usize,
    layer1: Vec<usize>,
    higher: Vec<usize>,
    left_fields: Vec<Vec<(usize, Poly)>>,
    right_fields: Vec<Vec<(usize, Poly)>>,
}

impl GroupSpec {
    /// Builds and validates a group description.
    ///
    /// The law must be homogeneous with respect to the dilation (each term of
    /// `P_k` has homogeneous degree `a_k`), which makes `δ_α` an automorphism
    /// by construction.
    pub fn new(
        name: impl Into<String>,
        exponents: Vec<u32>,
        law: Vec<LawTerm>,
        gauge_coeff: f64,
    ) -> Result<Self> {
        let n = exponents.len();
        if n == 0 {
            return Err(Error::invalid("dimension n ≥ 1"));
        }
        if exponents[0] != 1 {
            return Err(Error::invalid("a₁ = 1 required"));
        }
        if exponents.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::invalid("exponents must be non-decreasing"));
        }
        if !(gauge_coeff > 0.0) {
            return Err(Error::invalid("gauge_coeff > 0"));
        }
        for t in &law {
            if t.target >= n
                || t.x_powers.iter().any(|&(i, _)| i >= n)
                || t.y_powers.iter().any(|&(i, _)| i >= n)
            {
                return Err(Error::invalid("law term indexes a coordinate ≥ n"));
            }
            let deg: u32 = t
                .x_powers
                .iter()
                .chain(&t.y_powers)
                .map(|&(i, p)| exponents[i] * p)
                .sum();
            if deg != exponents[t.target] {
                return Err(Error::invalid(format!(
                    "law term for coordinate {} has homogeneous degree {} ≠ a_k = {}",
                    t.target, deg, exponents[t.target]
                )));
            }
        }

        let generators = exponents.iter().filter(|&&a| a == 1).count();
        let layer1 = (0..n).filter(|&i| exponents[i] == 1).collect();
        let higher = (0..n).filter(|&i| exponents[i] > 1).collect();
        let homogeneous_dim = exponents.iter().sum();

        // Left-invariant fields: X_j = ∂_j + Σ_k q^k_j(x) ∂_k with
        // q^k_j(x) = ∂P_k(x,y)/∂y_j at y = 0, i.e. terms linear in y_j alone.
        let mut left_fields = Vec::with_capacity(generators);
        let mut right_fields = Vec::with_capacity(generators);
        for j in 0..generators {
            let mut left: Vec<(usize, Poly)> = Vec::new();
            let mut right: Vec<(usize, Poly)> = Vec::new();
            for t in &law {
                if t.y_powers == [(j, 1)] {
                    push_poly_term(&mut left, t.target, t.coeff, t.x_powers.clone());
                }
                if t.x_powers == [(j, 1)] {
                    push_poly_term(&mut right, t.target, t.coeff, t.y_powers.clone());
                }
            }
            left_fields.push(left);
            right_fields.push(right);
        }

        Ok(GroupSpec {
            name: name.into(),
            n,
            exponents,
            law,
            gauge_coeff,
            homogeneous_dim,
            generators,
            layer1,
            higher,
            left_fields,
            right_fields,
        })
    }

    /// The Heisenberg group `H¹`: `R³`, exponents (1,1,2), third coordinate
    /// twisted by `½(x₁y₂ − y₁x₂)`.
    pub fn heisenberg(gauge_coeff: f64) -> Self {
        GroupSpec::new(
            "h1",
            vec![1, 1, 2],
            vec![
                LawTerm { target: 2, coeff: 0.5, x_powers: vec![(0, 1)], y_powers: vec![(1, 1)] },
                LawTerm { target: 2, coeff: -0.5, x_powers: vec![(1, 1)], y_powers: vec![(0, 1)] },
            ],
            gauge_coeff,
        )
        .expect("H1 data is valid")
    }

    /// Abelian `R^n` with its usual dilations.
    pub fn euclidean(n: usize) -> Self {
        GroupSpec::new(format!("euclidean{n}"), vec![1; n], vec![], 1.0).expect("R^n data is valid")
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn exponents(&self) -> &[u32] {
        &self.exponents
    }

    /// Homogeneous dimension `N = Σ a_i`.
    pub fn homogeneous_dim(&self) -> u32 {
        self.homogeneous_dim
    }

    /// Number of degree-1 generators `m`.
    pub fn generators(&self) -> usize {
        self.generators
    }

    pub fn gauge_coeff(&self) -> f64 {
        self.gauge_coeff
    }

    pub fn law(&self) -> &[LawTerm] {
        &self.law
    }

    /// Coefficient polynomials of the left-invariant field `X_j` (0-based `j < m`):
    /// the list of `(k, q^k_j)` with `X_j = ∂_j + Σ q^k_j(x) ∂_k`.
    pub fn left_field(&self, j: usize) -> &[(usize, Poly)] {
        &self.left_fields[j]
    }

    /// Same for the right-invariant field `Y_j`.
    pub fn right_field(&self, j: usize) -> &[(usize, Poly)] {
        &self.right_fields[j]
    }

    fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.n {
            return Err(Error::invalid(format!(
                "point has {} coordinates, group dimension is {}",
                x.len(),
                self.n
            )));
        }
        Ok(())
    }

    /// Group product `x · y`.
    pub fn multiply(&self, x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
        self.check_point(x)?;
        self.check_point(y)?;
        let mut out = vec![0.0; self.n];
        self.multiply_into(x, y, &mut out);
        Ok(out)
    }

    /// Allocation-free product for hot loops. Dimensions are debug-asserted.
    pub fn multiply_into(&self, x: &[f64], y: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.n);
        debug_assert_eq!(y.len(), self.n);
        for i in 0..self.n {
            out[i] = x[i] + y[i];
        }
        for t in &self.law {
            let mut v = t.coeff;
            for &(i, p) in &t.x_powers {
                v *= x[i].powi(p as i32);
            }
            for &(i, p) in &t.y_powers {
                v *= y[i].powi(p as i32);
            }
            out[t.target] += v;
        }
    }

    /// Group inverse. For the shipped laws (exponential coordinates) this is
    /// coordinate negation; `multiply(x, inverse(x))` returns the origin.
    pub fn inverse(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_point(x)?;
        Ok(x.iter().map(|v| -v).collect())
    }

    /// Dilation `δ_α[x]`, `α > 0`.
    pub fn dilate(&self, alpha: f64, x: &[f64]) -> Result<Vec<f64>> {
        self.check_point(x)?;
        if !(alpha > 0.0) {
            return Err(Error::invalid("dilation requires α > 0"));
        }
        let mut out = vec![0.0; self.n];
        self.dilate_into(alpha, x, &mut out);
        Ok(out)
    }

    pub fn dilate_into(&self, alpha: f64, x: &[f64], out: &mut [f64]) {
        for i in 0..self.n {
            out[i] = alpha.powi(self.exponents[i] as i32) * x[i];
        }
    }

    /// Homogeneous gauge `ρ`: exactly 1-homogeneous under `δ_α`, symmetric
    /// under inversion, zero only at the origin.
    ///
    /// With `d = a_n`, `ρ(x) = ((Σ_{a_i=1} x_i²)^d + c Σ_{a_i>1} |x_i|^{2d/a_i})^{1/(2d)}`,
    /// which is the Korányi gauge on `H¹` and the Euclidean norm on `R^n`.
    pub fn gauge(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.n);
        let d = *self.exponents.last().unwrap() as f64;
        let s1: f64 = self.layer1.iter().map(|&i| x[i] * x[i]).sum();
        if self.higher.is_empty() {
            return s1.sqrt();
        }
        let mut acc = s1.powf(d);
        for &i in &self.higher {
            let e = 2.0 * d / self.exponents[i] as f64;
            acc += self.gauge_coeff * x[i].abs().powf(e);
        }
        acc.powf(1.0 / (2.0 * d))
    }

    /// Left-invariant gauge distance `ρ(x⁻¹ · y)`.
    pub fn gauge_distance(&self, x: &[f64], y: &[f64]) -> f64 {
        let mut xinv = vec![0.0; self.n];
        for i in 0..self.n {
            xinv[i] = -x[i];
        }
        let mut z = vec![0.0; self.n];
        self.multiply_into(&xinv, y, &mut z);
        self.gauge(&z)
    }

    /// Gauge ball `B(center, r) = { y : ρ(center⁻¹ · y) < r }`.
    pub fn ball_indicator(&self, center: &[f64], r: f64) -> Result<Ball> {
        self.check_point(center)?;
        if !(r > 0.0) {
            return Err(Error::invalid("ball radius r > 0"));
        }
        Ok(Ball {
            spec: self.clone(),
            center_inv: center.iter().map(|v| -v).collect(),
            radius: r,
        })
    }
}

fn push_poly_term(acc: &mut Vec<(usize, Poly)>, target: usize, coeff: f64, powers: Vec<(usize, u32)>) {
    if let Some((_, poly)) = acc.iter_mut().find(|(k, _)| *k == target) {
        poly.terms.push((coeff, powers));
    } else {
        acc.push((target, Poly { terms: vec![(coeff, powers)] }));
    }
}

/// Predicate form of a gauge ball.
#[derive(Debug, Clone)]
pub struct Ball {
    spec: GroupSpec,
    center_inv: Vec<f64>,
    radius: f64,
}

impl Ball {
    pub fn contains(&self, y: &[f64]) -> bool {
        let mut z = vec![0.0; self.spec.dim()];
        self.spec.multiply_into(&self.center_inv, y, &mut z);
        self.spec.gauge(&z) < self.radius
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn random_point(rng: &mut impl Rng, n: usize) -> Vec<f64> {
        (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect()
    }

    #[test]
    fn heisenberg_law_matches_hand_evaluation() {
        let g = GroupSpec::heisenberg(16.0);
        let p = g.multiply(&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0]).unwrap();
        assert_eq!(p, vec![1.0, 1.0, 0.5]);
    }

    #[test]
    fn identity_is_origin() {
        let g = GroupSpec::heisenberg(16.0);
        let x = [1.0, 2.0, 3.0];
        assert_eq!(g.multiply(&[0.0; 3], &x).unwrap(), x.to_vec());
        assert_eq!(g.multiply(&x, &[0.0; 3]).unwrap(), x.to_vec());
    }

    #[test]
    fn inverse_cancels_through_the_law() {
        let g = GroupSpec::heisenberg(16.0);
        let x = [1.0, 2.0, 3.0];
        let xi = g.inverse(&x).unwrap();
        assert_eq!(xi, vec![-1.0, -2.0, -3.0]);
        let e = g.multiply(&x, &xi).unwrap();
        for v in e {
            assert_abs_diff_eq!(v, 0.0, epsilon = 1e-15);
        }
        // Abelian case.
        let r2 = GroupSpec::euclidean(2);
        assert_eq!(r2.inverse(&[1.0, 1.0]).unwrap(), vec![-1.0, -1.0]);
        assert_eq!(r2.inverse(&[0.0, 0.0]).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn associativity_on_random_triples() {
        let g = GroupSpec::heisenberg(16.0);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..1000 {
            let (x, y, z) = (
                random_point(&mut rng, 3),
                random_point(&mut rng, 3),
                random_point(&mut rng, 3),
            );
            let a = g.multiply(&g.multiply(&x, &y).unwrap(), &z).unwrap();
            let b = g.multiply(&x, &g.multiply(&y, &z).unwrap()).unwrap();
            for i in 0..3 {
                assert_abs_diff_eq!(a[i], b[i], epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn dilation_examples_and_automorphism() {
        let g = GroupSpec::heisenberg(16.0);
        assert_eq!(g.dilate(2.0, &[1.0, 1.0, 1.0]).unwrap(), vec![2.0, 2.0, 4.0]);
        let x = [0.3, -0.7, 1.1];
        assert_eq!(g.dilate(1.0, &x).unwrap(), x.to_vec());

        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let (x, y) = (random_point(&mut rng, 3), random_point(&mut rng, 3));
            let alpha = rng.gen_range(0.1..4.0);
            let lhs = g.dilate(alpha, &g.multiply(&x, &y).unwrap()).unwrap();
            let rhs = g
                .multiply(&g.dilate(alpha, &x).unwrap(), &g.dilate(alpha, &y).unwrap())
                .unwrap();
            for i in 0..3 {
                assert_abs_diff_eq!(lhs[i], rhs[i], epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn dilate_rejects_nonpositive_alpha() {
        let g = GroupSpec::heisenberg(16.0);
        assert!(g.dilate(0.0, &[0.0; 3]).is_err());
        assert!(g.dilate(-1.0, &[0.0; 3]).is_err());
    }

    #[test]
    fn gauge_values_and_homogeneity() {
        let g = GroupSpec::heisenberg(16.0);
        // (16·1)^{1/4} = 2
        assert_abs_diff_eq!(g.gauge(&[0.0, 0.0, 1.0]), 2.0, epsilon = 1e-14);
        assert_eq!(g.gauge(&[0.0, 0.0, 0.0]), 0.0);

        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let x = random_point(&mut rng, 3);
            let d = g.dilate(3.0, &x).unwrap();
            assert_abs_diff_eq!(g.gauge(&d), 3.0 * g.gauge(&x), epsilon = 1e-12 * (1.0 + g.gauge(&x)));
            let xi = g.inverse(&x).unwrap();
            assert_abs_diff_eq!(g.gauge(&xi), g.gauge(&x), epsilon = 1e-14);
        }
        // Euclidean reduction.
        let r2 = GroupSpec::euclidean(2);
        assert_abs_diff_eq!(r2.gauge(&[3.0, 4.0]), 5.0, epsilon = 1e-14);
    }

    #[test]
    fn homogeneous_dims() {
        assert_eq!(GroupSpec::heisenberg(16.0).homogeneous_dim(), 4);
        assert_eq!(GroupSpec::heisenberg(16.0).dim(), 3);
        assert_eq!(GroupSpec::heisenberg(16.0).generators(), 2);
        assert_eq!(GroupSpec::euclidean(3).homogeneous_dim(), 3);
    }

    #[test]
    fn left_field_coefficients_for_h1() {
        let g = GroupSpec::heisenberg(16.0);
        // X1 = ∂1 − (x2/2) ∂3, X2 = ∂2 + (x1/2) ∂3
        let x = [2.0, 3.0, 0.0];
        let f1 = g.left_field(0);
        assert_eq!(f1.len(), 1);
        assert_eq!(f1[0].0, 2);
        assert_abs_diff_eq!(f1[0].1.eval(&x), -1.5, epsilon = 1e-15);
        let f2 = g.left_field(1);
        assert_abs_diff_eq!(f2[0].1.eval(&x), 1.0, epsilon = 1e-15);
        // Y1 = ∂1 + (x2/2) ∂3, Y2 = ∂2 − (x1/2) ∂3
        let r1 = g.right_field(0);
        assert_abs_diff_eq!(r1[0].1.eval(&x), 1.5, epsilon = 1e-15);
        let r2 = g.right_field(1);
        assert_abs_diff_eq!(r2[0].1.eval(&x), -1.0, epsilon = 1e-15);
    }

    #[test]
    fn ball_membership_and_left_invariance() {
        let g = GroupSpec::heisenberg(16.0);
        let b = g.ball_indicator(&[0.0; 3], 1.0).unwrap();
        assert!(b.contains(&[0.0; 3]));
        assert!(g.ball_indicator(&[0.0; 3], 0.0).is_err());

        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let (x, y, z) = (
                random_point(&mut rng, 3),
                random_point(&mut rng, 3),
                random_point(&mut rng, 3),
            );
            let r = rng.gen_range(0.2..2.0);
            let in_b = g.ball_indicator(&x, r).unwrap().contains(&y);
            let zx = g.multiply(&z, &x).unwrap();
            let zy = g.multiply(&z, &y).unwrap();
            let in_translated = g.ball_indicator(&zx, r).unwrap().contains(&zy);
            assert_eq!(in_b, in_translated);
        }
    }

    #[test]
    fn rejects_inhomogeneous_law() {
        // A term of homogeneous degree 1 targeting the degree-2 coordinate.
        let bad = GroupSpec::new(
            "bad",
            vec![1, 1, 2],
            vec![LawTerm { target: 2, coeff: 1.0, x_powers: vec![(0, 1)], y_powers: vec![] }],
            1.0,
        );
        assert!(bad.is_err());
    }
}
