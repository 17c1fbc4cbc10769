//! The odd thresholding function `Θ_α` and the checks on its three
//! structural properties, plus a diagnostic tabulation of the two
//! level-set integrals from the strong-inequality argument.

use crate::calculus::{apply_vector_field, gradient_length, integrate};
use crate::error::{Error, Result};
use crate::grid::GridFunction;
use crate::norms::{lebesgue_norm, superlevel_measure};
use crate::spectral::SpectralDecomposition;
use crate::weights::Weight;

/// Scalar thresholding: odd, `0` on `[0, α]`, `t − α` on `[α, Mα]`,
/// `(M−1)α` above `Mα`.
pub fn theta_alpha(v: f64, alpha: f64, m: f64) -> f64 {
    let a = v.abs();
    let out = if a <= alpha {
        0.0
    } else if a <= m * alpha {
        a - alpha
    } else {
        (m - 1.0) * alpha
    };
    out.copysign(v)
}

/// Pointwise thresholding `f_α = Θ_α(f)`, `α > 0`, `M > 10`.
pub fn threshold(f: &GridFunction, alpha: f64, m: f64) -> Result<GridFunction> {
    if !(alpha > 0.0) {
        return Err(Error::invalid("thresholding requires α > 0"));
    }
    if !(m > 10.0) {
        return Err(Error::invalid("thresholding requires M > 10"));
    }
    let mut out = f.clone();
    out.values_mut().mapv_inplace(|v| theta_alpha(v, alpha, m));
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct TabooVerdict {
    /// `{|f| > 5α} ⊂ {|f_α| > 4α}` holds at every node.
    pub level_inclusion: bool,
    /// `|f − f_α| ≤ α` on `{|f| ≤ Mα}` holds at every node.
    pub distance_bound: bool,
    /// max deviation of `∇f_α − (∇f)·1_{α≤|f|≤Mα}` over stencil-interior nodes.
    pub gradient_deviation: f64,
    /// Number of stencil-interior nodes that entered the gradient check.
    pub gradient_nodes: usize,
    pub gradient_ok: bool,
}

impl TabooVerdict {
    pub fn all_ok(&self) -> bool {
        self.level_inclusion && self.distance_bound && self.gradient_ok
    }
}

/// Which linear regime of `Θ_α` a value sits in, or `None` on a regime
/// boundary (where the chain rule is not a pointwise statement).
fn regime(v: f64, alpha: f64, m: f64) -> Option<i8> {
    let a = v.abs();
    if a < alpha {
        Some(0)
    } else if a > alpha && a < m * alpha {
        if v > 0.0 { Some(1) } else { Some(-1) }
    } else if a > m * alpha {
        if v > 0.0 { Some(2) } else { Some(-2) }
    } else {
        None
    }
}

/// Checks the three properties of `f_α`. Items 1–2 are exact pointwise
/// arithmetic. Item 3 (`∇f_α = (∇f)·1_{α≤|f|≤Mα}` a.e.) is checked only on
/// nodes whose full difference stencil lies strictly inside one regime of
/// `Θ_α` — on a grid the almost-everywhere statement cannot hold at regime
/// crossings — where it is exact up to rounding (tolerance 1e−8).
pub fn taboo_check(f: &GridFunction, alpha: f64, m: f64) -> Result<TabooVerdict> {
    let f_alpha = threshold(f, alpha, m)?;

    let mut level_inclusion = true;
    let mut distance_bound = true;
    // |v − Θ(v)| = α exactly in the middle regime up to the single rounding
    // of |v| − α, which is bounded by Mα·ε/2.
    let distance_tol = alpha * (1.0 + m * f64::EPSILON);
    for (v, w) in f.values().iter().zip(f_alpha.values()) {
        if v.abs() > 5.0 * alpha && !(w.abs() > 4.0 * alpha) {
            level_inclusion = false;
        }
        if v.abs() <= m * alpha && (v - w).abs() > distance_tol {
            distance_bound = false;
        }
    }

    let grid = f.grid();
    let dim = grid.dim();
    let gens = grid.spec().generators();
    let mut grad_f: Vec<GridFunction> = Vec::with_capacity(gens);
    let mut grad_fa: Vec<GridFunction> = Vec::with_capacity(gens);
    for j in 0..gens {
        grad_f.push(apply_vector_field(j, f)?);
        grad_fa.push(apply_vector_field(j, &f_alpha)?);
    }

    let mut deviation = 0.0f64;
    let mut nodes = 0usize;
    let mut multi = vec![0usize; dim];
    'node: for idx in grid.indices() {
        if grid.in_boundary_layer(idx, 1) {
            continue;
        }
        let r0 = match regime(f.values()[idx], alpha, m) {
            Some(r) => r,
            None => continue,
        };
        grid.multi_index_into(idx, &mut multi);
        // full stencil: both neighbours along every axis
        for ax in 0..dim {
            let stride: usize = grid.points()[ax + 1..].iter().product();
            for nb in [idx - stride, idx + stride] {
                match regime(f.values()[nb], alpha, m) {
                    Some(r) if r == r0 => {}
                    _ => continue 'node,
                }
            }
        }
        nodes += 1;
        let indicator = if r0.abs() == 1 { 1.0 } else { 0.0 };
        for j in 0..gens {
            let want = grad_f[j].values()[idx] * indicator;
            let got = grad_fa[j].values()[idx];
            deviation = deviation.max((got - want).abs());
        }
    }
    let scale = grad_f
        .iter()
        .map(|g| g.max_abs())
        .fold(1.0f64, f64::max);

    Ok(TabooVerdict {
        level_inclusion,
        distance_bound,
        gradient_deviation: deviation,
        gradient_nodes: nodes,
        gradient_ok: deviation <= 1e-8 * scale,
    })
}

/// Diagnostic tabulation (no pass/fail: the constants are unspecified) of the
/// two level-set integrals from the strong-inequality argument at `s = 0`:
/// with `t_α = α^{−2(q−1)/q}` and `f_α = Θ_α(f)`,
/// `I₁ = ∫ ω({|f_α − H_{t_α} f_α| > α}) d(α^q)` against `q·log(M)·‖∇f‖_{L¹(ω)}`,
/// `I₂ = ∫ ω({|H_{t_α}(f_α − f)| > 2α}) d(α^q)` against `q/(q−1)·M^{1−q}·‖f‖_{L^q(ω)}^q`.
#[derive(Debug, Clone)]
pub struct ThresholdDiagnostics {
    /// Rows `(α, ω(B_α), ω(C_α))`.
    pub rows: Vec<(f64, f64, f64)>,
    pub i1: f64,
    pub i1_reference: f64,
    pub i2: f64,
    pub i2_reference: f64,
}

pub fn threshold_diagnostics(
    dec: &SpectralDecomposition,
    f: &GridFunction,
    weight: &Weight,
    q: f64,
    m: f64,
    levels: usize,
) -> Result<ThresholdDiagnostics> {
    if !(q > 1.0) || q.is_infinite() {
        return Err(Error::invalid("threshold diagnostics require q ∈ (1,∞)"));
    }
    if !(m > 10.0) {
        return Err(Error::invalid("thresholding requires M > 10"));
    }
    let top = f.max_abs();
    if top == 0.0 {
        return Err(Error::Degenerate("zero input function".into()));
    }
    let alphas = crate::norms::log_spaced(top / (8.0 * m), top, levels.max(8));
    let mut rows = Vec::with_capacity(alphas.len());
    for &alpha in &alphas {
        let fa = threshold(f, alpha, m)?;
        let t_alpha = alpha.powf(-2.0 * (q - 1.0) / q);
        let hfa = dec.heat(&fa, t_alpha)?;
        let b_measure = superlevel_measure(&fa.sub(&hfa), alpha, Some(weight));
        let diff = fa.sub(f);
        let hdiff = dec.heat(&diff, t_alpha)?;
        let c_measure = superlevel_measure(&hdiff, 2.0 * alpha, Some(weight));
        rows.push((alpha, b_measure, c_measure));
    }
    // ∫ … d(α^q) = ∫ … q α^{q−1} dα, trapezoid over the α grid
    let integrate_rows = |pick: &dyn Fn(&(f64, f64, f64)) -> f64| -> f64 {
        let mut acc = 0.0;
        for w in rows.windows(2) {
            let (a0, a1) = (w[0].0, w[1].0);
            let v0 = q * a0.powf(q - 1.0) * pick(&w[0]);
            let v1 = q * a1.powf(q - 1.0) * pick(&w[1]);
            acc += 0.5 * (v0 + v1) * (a1 - a0);
        }
        acc
    };
    let i1 = integrate_rows(&|r| r.1);
    let i2 = integrate_rows(&|r| r.2);
    let grad_norm = integrate(&gradient_length(f)?, Some(weight));
    let i1_reference = q * m.ln() * grad_norm;
    let lq = lebesgue_norm(f, q, Some(weight))?;
    let i2_reference = q / (q - 1.0) * m.powf(1.0 - q) * lq.powf(q);
    Ok(ThresholdDiagnostics { rows, i1, i1_reference, i2, i2_reference })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use crate::group::GroupSpec;
    use approx::assert_abs_diff_eq;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;
    use std::sync::Arc;

    fn grid2() -> Arc<Grid> {
        Grid::new(Arc::new(GroupSpec::euclidean(2)), &[1.0, 1.0], &[9, 9]).unwrap()
    }

    #[test]
    fn threshold_piecewise_values() {
        let grid = grid2();
        let alpha = 0.2;
        let m = 12.0;
        let mut f = GridFunction::zeros(grid);
        f.values_mut()[0] = 0.5 * alpha;
        f.values_mut()[1] = 2.0 * alpha;
        f.values_mut()[2] = 20.0 * alpha;
        let fa = threshold(&f, alpha, m).unwrap();
        assert_abs_diff_eq!(fa.values()[0], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(fa.values()[1], alpha, epsilon = 1e-15);
        assert_abs_diff_eq!(fa.values()[2], 11.0 * alpha, epsilon = 1e-15);
        // zero stays zero, odd symmetry, cap at (M−1)α
        let zero = GridFunction::zeros(fa.grid().clone());
        assert_eq!(threshold(&zero, alpha, m).unwrap().max_abs(), 0.0);
        let neg = threshold(&f.scale(-1.0), alpha, m).unwrap();
        assert!(neg.add(&fa).max_abs() < 1e-15);
        assert!(fa.max_abs() <= (m - 1.0) * alpha);
        // validation
        assert!(threshold(&f, 0.0, m).is_err());
        assert!(threshold(&f, alpha, 10.0).is_err());
    }

    #[test]
    fn taboo_items_one_two_exact_on_random_functions() {
        let grid = grid2();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..1000 {
            let mut f = GridFunction::zeros(grid.clone());
            for v in f.values_mut().iter_mut() {
                *v = rng.gen_range(-3.0..3.0);
            }
            let alpha = rng.gen_range(0.01..0.5);
            let m = rng.gen_range(10.5..40.0);
            let verdict = taboo_check(&f, alpha, m).unwrap();
            assert!(verdict.level_inclusion);
            assert!(verdict.distance_bound);
        }
    }

    #[test]
    fn taboo_item_three_on_a_ramp() {
        // monotone ramp: stencil-interior nodes sit strictly inside regimes
        let grid = Grid::new(Arc::new(GroupSpec::euclidean(2)), &[1.0, 1.0], &[17, 17]).unwrap();
        let f = GridFunction::from_fn(grid, |x| 3.0 * (x[0] + 1.1));
        let verdict = taboo_check(&f, 0.77, 11.0).unwrap();
        assert!(verdict.gradient_nodes > 20, "too few checked nodes: {}", verdict.gradient_nodes);
        assert!(verdict.gradient_ok, "deviation {}", verdict.gradient_deviation);
    }

    #[test]
    fn small_function_thresholds_to_zero() {
        let grid = grid2();
        let f = GridFunction::from_fn(grid, |x| 0.1 * (x[0] * x[1]));
        let alpha = 1.0;
        let fa = threshold(&f, alpha, 12.0).unwrap();
        assert_eq!(fa.max_abs(), 0.0);
        let verdict = taboo_check(&f, alpha, 12.0).unwrap();
        assert!(verdict.all_ok());
        assert_eq!(verdict.gradient_deviation, 0.0);
    }
}
