//! Weighted Lebesgue, weak-Lebesgue, Sobolev and thermic Besov norms.

use crate::calculus::{gradient_length, integrate};
use crate::error::{Error, Result};
use crate::grid::GridFunction;
use crate::spectral::SpectralDecomposition;
use crate::weights::Weight;

/// Log-spaced grid of `count ≥ 2` points in `[min, max]`.
pub fn log_spaced(min: f64, max: f64, count: usize) -> Vec<f64> {
    assert!(min > 0.0 && max > min && count >= 2);
    let lmin = min.ln();
    let step = (max.ln() - lmin) / (count as f64 - 1.0);
    (0..count).map(|i| (lmin + step * i as f64).exp()).collect()
}

/// Default thermic Besov `t`-grid: 6 decades, 121 points.
pub fn besov_default_tgrid() -> Vec<f64> {
    log_spaced(1e-4, 1e2, 121)
}

fn check_p(p: f64) -> Result<()> {
    if !(p >= 1.0) {
        return Err(Error::invalid("Lebesgue exponent requires p ≥ 1"));
    }
    Ok(())
}

/// Weighted measure of the super-level set `{ |f| > σ }`.
pub fn superlevel_measure(f: &GridFunction, sigma: f64, weight: Option<&Weight>) -> f64 {
    let cell = f.grid().cell_volume();
    let mut acc = 0.0;
    for (i, v) in f.values().iter().enumerate() {
        if v.abs() > sigma {
            acc += weight.map_or(1.0, |w| w.eval(i));
        }
    }
    acc * cell
}

/// `‖f‖_{L^p(ω)}` by weighted Riemann sum; `p = ∞` returns `max |f|`.
pub fn lebesgue_norm(f: &GridFunction, p: f64, weight: Option<&Weight>) -> Result<f64> {
    check_p(p)?;
    if p.is_infinite() {
        return Ok(f.max_abs());
    }
    let cell = f.grid().cell_volume();
    let mut acc = 0.0;
    for (i, v) in f.values().iter().enumerate() {
        if *v != 0.0 {
            acc += v.abs().powf(p) * weight.map_or(1.0, |w| w.eval(i));
        }
    }
    Ok((acc * cell).powf(1.0 / p))
}

/// The same norm through the distribution function,
/// `‖f‖^p = ∫₀^∞ p σ^{p−1} ω({|f| > σ}) dσ`, with `levels` log-spaced σ.
/// An independent quadrature route used to cross-check [`lebesgue_norm`].
pub fn lebesgue_norm_distributional(
    f: &GridFunction,
    p: f64,
    weight: Option<&Weight>,
    levels: usize,
) -> Result<f64> {
    check_p(p)?;
    if p.is_infinite() {
        return Err(Error::invalid("distributional route requires p < ∞"));
    }
    let top = f.max_abs();
    if top == 0.0 {
        return Ok(0.0);
    }
    let sigmas = log_spaced(top * 1e-6, top, levels);
    // head chunk [0, σ_0]: the distribution function is constant there
    let w0 = superlevel_measure(f, 0.0, weight);
    let mut acc = sigmas[0].powf(p) * w0;
    let mut prev_sigma = sigmas[0];
    let mut prev_val = p * prev_sigma.powf(p - 1.0) * superlevel_measure(f, prev_sigma, weight);
    for &s in &sigmas[1..] {
        let val = p * s.powf(p - 1.0) * superlevel_measure(f, s, weight);
        acc += 0.5 * (val + prev_val) * (s - prev_sigma);
        prev_sigma = s;
        prev_val = val;
    }
    Ok(acc.powf(1.0 / p))
}

/// Weak norm `‖f‖_{L^{p,∞}(ω)} = sup_σ σ ω({|f| > σ})^{1/p}` over 200
/// log-spaced levels; zero for the zero function by convention.
pub fn weak_norm(f: &GridFunction, p: f64, weight: Option<&Weight>) -> Result<f64> {
    check_p(p)?;
    let top = f.max_abs();
    if top == 0.0 {
        return Ok(0.0);
    }
    let sigmas = log_spaced(top * 1e-10, top * (1.0 - 1e-12), 200);
    let mut sup = 0.0f64;
    for &s in &sigmas {
        let v = s * superlevel_measure(f, s, weight).powf(1.0 / p);
        if v > sup {
            sup = v;
        }
    }
    Ok(sup)
}

/// Homogeneous Sobolev norm `‖f‖_{Ẇ^{s,p}(ω)} = ‖𝒥^{s/2} f‖_{L^p(ω)}`
/// (weak variant with the weak Lebesgue norm).
///
/// Supported routes: `s = 0` (plain Lebesgue/weak norm), the gradient case
/// `(s, p) = (1, 1)` strong, and `1 < p < ∞` through the fractional power.
pub fn sobolev_norm(
    dec: &SpectralDecomposition,
    f: &GridFunction,
    s: f64,
    p: f64,
    weight: Option<&Weight>,
    weak: bool,
) -> Result<f64> {
    check_p(p)?;
    if s == 0.0 {
        return if weak { weak_norm(f, p, weight) } else { lebesgue_norm(f, p, weight) };
    }
    if p == 1.0 {
        if s == 1.0 && !weak {
            let g = gradient_length(f)?;
            return Ok(match weight {
                Some(w) => integrate(&g, Some(w)),
                None => integrate(&g, None),
            });
        }
        return Err(Error::invalid(
            "Sobolev norm supports p = 1 only for (s, p) = (1, 1), strong",
        ));
    }
    if p.is_infinite() {
        return Err(Error::invalid("fractional Sobolev route requires 1 < p < ∞"));
    }
    let g = dec.fractional_power(f, s)?;
    if weak {
        weak_norm(&g, p, weight)
    } else {
        lebesgue_norm(&g, p, weight)
    }
}

/// A thermic Besov norm value with the scale that attained the sup.
#[derive(Debug, Clone, Copy)]
pub struct BesovNorm {
    pub value: f64,
    pub argmax_t: f64,
    /// The sup sat on the first or last grid point: truncation suspect.
    pub boundary_attained: bool,
}

/// Trace of `‖H_t f‖_∞` over a `t`-grid; one heat sweep serves every β.
#[derive(Debug, Clone)]
pub struct HeatSupTrace {
    ts: Vec<f64>,
    sups: Vec<f64>,
}

impl HeatSupTrace {
    pub fn compute(dec: &SpectralDecomposition, f: &GridFunction, ts: &[f64]) -> Result<HeatSupTrace> {
        if ts.len() < 2 || ts.windows(2).any(|w| w[0] >= w[1]) || ts[0] <= 0.0 {
            return Err(Error::invalid("t grid must be positive and increasing"));
        }
        let m = dec.symbol_sweep(f, ts, |l, t| (-t * l).exp())?;
        let sups = (0..ts.len())
            .map(|i| m.column(i).iter().fold(0.0f64, |a, &v| a.max(v.abs())))
            .collect();
        Ok(HeatSupTrace { ts: ts.to_vec(), sups })
    }

    pub fn ts(&self) -> &[f64] {
        &self.ts
    }

    pub fn sups(&self) -> &[f64] {
        &self.sups
    }

    /// `sup_t t^{β/2} ‖H_t f‖_∞` over the trace.
    pub fn besov(&self, beta: f64) -> Result<BesovNorm> {
        if !(beta > 0.0) {
            return Err(Error::invalid("thermic Besov norm requires β > 0"));
        }
        let mut best = (0usize, 0.0f64);
        for (i, (&t, &s)) in self.ts.iter().zip(&self.sups).enumerate() {
            let v = t.powf(beta / 2.0) * s;
            if v > best.1 {
                best = (i, v);
            }
        }
        Ok(BesovNorm {
            value: best.1,
            argmax_t: self.ts[best.0],
            boundary_attained: best.0 == 0 || best.0 + 1 == self.ts.len(),
        })
    }
}

/// `‖f‖_{Ḃ^{−β,∞}_∞} = sup_t t^{β/2} ‖H_t f‖_{L^∞}` over a log-spaced grid
/// spanning at least six decades. Reports the attaining `t` and flags sups
/// that sit on the grid boundary (truncation suspect).
pub fn besov_negative_norm(
    dec: &SpectralDecomposition,
    f: &GridFunction,
    beta: f64,
    ts: &[f64],
) -> Result<BesovNorm> {
    if !(beta > 0.0) {
        return Err(Error::invalid("thermic Besov norm requires β > 0"));
    }
    if ts.len() < 2 || (ts[ts.len() - 1] / ts[0]).log10() < 6.0 - 1e-9 {
        return Err(Error::invalid("Besov t grid must span ≥ 6 decades"));
    }
    HeatSupTrace::compute(dec, f, ts)?.besov(beta)
}

/// General thermic Besov norm
/// `‖f‖_{Ḃ^{s,q}_p(ω)} = [∫ t^{(m−s/2)q} ‖∂_t^m H_t f‖_{L^p(ω)}^q dt/t]^{1/q}`
/// with `∂_t^m H_t` realised spectrally as `(−λ)^m e^{−tλ}` and log-spaced
/// quadrature in `t`. Requires an integer order `m > s/2` and `q < ∞`.
pub fn besov_general_norm(
    dec: &SpectralDecomposition,
    f: &GridFunction,
    s: f64,
    p: f64,
    q: f64,
    m_order: u32,
    weight: Option<&Weight>,
    ts: &[f64],
) -> Result<f64> {
    if !(q >= 1.0) || q.is_infinite() {
        return Err(Error::invalid("general Besov route requires 1 ≤ q < ∞"));
    }
    if !((m_order as f64) > s / 2.0) {
        return Err(Error::invalid("Besov derivative order requires m > s/2"));
    }
    if ts.len() < 2 || ts.windows(2).any(|w| w[0] >= w[1]) || ts[0] <= 0.0 {
        return Err(Error::invalid("t grid must be positive and increasing"));
    }
    check_p(p)?;
    let mm = m_order as i32;
    let sweep = dec.symbol_sweep(f, ts, |l, t| l.powi(mm) * (-t * l).exp())?;
    let grid = f.grid().clone();
    let mut integrand = Vec::with_capacity(ts.len());
    for (i, &t) in ts.iter().enumerate() {
        let col = GridFunction::new(grid.clone(), sweep.column(i).to_owned())?;
        let norm = lebesgue_norm(&col, p, weight)?;
        integrand.push(t.powf((m_order as f64 - s / 2.0) * q) * norm.powf(q));
    }
    // trapezoid in u = ln t for ∫ … dt/t
    let mut acc = 0.0;
    for i in 1..ts.len() {
        let du = (ts[i] / ts[i - 1]).ln();
        acc += 0.5 * (integrand[i] + integrand[i - 1]) * du;
    }
    Ok(acc.powf(1.0 / q))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::sublaplacian;
    use crate::grid::Grid;
    use crate::group::GroupSpec;
    use crate::linalg::gamma;
    use crate::weights::power_weight;
    use approx::assert_abs_diff_eq;
    use std::sync::Arc;

    fn h1_setup() -> (Arc<Grid>, SpectralDecomposition) {
        let spec = Arc::new(GroupSpec::heisenberg(16.0));
        let grid = Grid::new(spec, &[1.2, 1.2, 1.2], &[9, 9, 9]).unwrap();
        let d = sublaplacian(&grid).unwrap();
        let dec = SpectralDecomposition::eigendecompose(&d).unwrap();
        (grid, dec)
    }

    fn bump(grid: &Arc<Grid>) -> GridFunction {
        let mut f = GridFunction::from_fn(grid.clone(), |x| {
            (-x.iter().map(|v| v * v).sum::<f64>() / 0.2).exp()
        });
        f.zero_boundary_layers(2);
        f
    }

    #[test]
    fn indicator_of_unit_volume_set_has_unit_norm() {
        let spec = Arc::new(GroupSpec::euclidean(1));
        let grid = Grid::new(spec, &[2.0], &[17]).unwrap();
        let h = grid.spacings()[0];
        // an indicator over k cells with k·h = 1
        let k = (1.0 / h).round() as usize;
        let mut f = GridFunction::zeros(grid.clone());
        for i in 3..3 + k {
            f.values_mut()[i] = 1.0;
        }
        for p in [1.0, 2.0, 5.0] {
            assert_abs_diff_eq!(lebesgue_norm(&f, p, None).unwrap(), 1.0, epsilon = 1e-12);
        }
        // weak norm of an indicator of measure 1 is 1 (attained as σ → 1⁻)
        let w = weak_norm(&f, 2.0, None).unwrap();
        assert!((w - 1.0).abs() < 1e-9, "weak norm {w}");
    }

    #[test]
    fn norms_are_absolutely_homogeneous() {
        let (grid, _) = h1_setup();
        let f = bump(&grid);
        let w = power_weight(&grid, -1.0, None).unwrap();
        for p in [1.0, 2.0, 4.0] {
            let a = lebesgue_norm(&f.scale(-3.5), p, Some(&w)).unwrap();
            let b = 3.5 * lebesgue_norm(&f, p, Some(&w)).unwrap();
            assert_abs_diff_eq!(a, b, epsilon = 1e-12 * b);
            let aw = weak_norm(&f.scale(-3.5), p, Some(&w)).unwrap();
            let bw = 3.5 * weak_norm(&f, p, Some(&w)).unwrap();
            assert_abs_diff_eq!(aw, bw, epsilon = 1e-12 * bw);
        }
        assert_eq!(lebesgue_norm(&f.scale(2.0), f64::INFINITY, None).unwrap(), 2.0 * f.max_abs());
    }

    #[test]
    fn weak_norm_is_dominated_by_strong_norm() {
        let (grid, _) = h1_setup();
        let w = power_weight(&grid, -2.0, None).unwrap();
        let f = GridFunction::from_fn(grid, |x| (3.0 * x[0]).sin() + 0.3 * x[2]);
        for p in [1.0, 2.0, 3.0] {
            let weak = weak_norm(&f, p, Some(&w)).unwrap();
            let strong = lebesgue_norm(&f, p, Some(&w)).unwrap();
            assert!(weak <= strong, "Chebyshev violated: {weak} > {strong}");
        }
    }

    #[test]
    fn distributional_route_agrees() {
        let (grid, _) = h1_setup();
        let f = bump(&grid);
        let w = power_weight(&grid, -1.0, None).unwrap();
        for p in [1.0, 2.0] {
            let direct = lebesgue_norm(&f, p, Some(&w)).unwrap();
            let distr = lebesgue_norm_distributional(&f, p, Some(&w), 200).unwrap();
            let rel = (direct - distr).abs() / direct;
            assert!(rel < 1e-2, "distribution-function route off by {rel:.3e}");
        }
        let z = GridFunction::zeros(f.grid().clone());
        assert_eq!(lebesgue_norm_distributional(&z, 2.0, None, 200).unwrap(), 0.0);
        assert_eq!(weak_norm(&z, 2.0, None).unwrap(), 0.0);
    }

    #[test]
    fn sobolev_norm_routes() {
        let (grid, dec) = h1_setup();
        let f = bump(&grid);
        // s = 0 → plain norm
        let a = sobolev_norm(&dec, &f, 0.0, 2.0, None, false).unwrap();
        assert_abs_diff_eq!(a, lebesgue_norm(&f, 2.0, None).unwrap(), epsilon = 1e-14);
        // (1,1) → gradient route
        let g = crate::calculus::gradient_length(&f).unwrap();
        let b = sobolev_norm(&dec, &f, 1.0, 1.0, None, false).unwrap();
        assert_abs_diff_eq!(b, integrate(&g, None), epsilon = 1e-12);
        // eigenvector: ‖𝒥^{s/2} q‖₂ = λ^{s/2} ‖q‖₂
        let k = dec.len() / 3;
        let lam = dec.eigenvalues()[k];
        let q = dec.eigenvector(k).scale(1.0 / grid.cell_volume().sqrt()); // L²-normalised
        for s in [0.5, 1.0, 1.5] {
            let n = sobolev_norm(&dec, &q, s, 2.0, None, false).unwrap();
            assert_abs_diff_eq!(n, lam.powf(s / 2.0), epsilon = 1e-8 * lam.powf(s / 2.0));
        }
        // unsupported combinations
        assert!(sobolev_norm(&dec, &f, 0.5, 1.0, None, false).is_err());
        assert!(sobolev_norm(&dec, &f, 1.0, f64::INFINITY, None, false).is_err());
    }

    #[test]
    fn besov_negative_norm_closed_form_on_eigenvector() {
        let (_, dec) = h1_setup();
        let k = dec.len() / 2;
        let lam = dec.eigenvalues()[k];
        let q = dec.eigenvector(k);
        let beta = 1.0;
        let ts = besov_default_tgrid();
        let got = besov_negative_norm(&dec, &q, beta, &ts).unwrap();
        // sup_t t^{β/2} e^{−tλ} ‖q‖_∞ = (β/(2eλ))^{β/2} ‖q‖_∞ at t* = β/(2λ)
        let expected = (beta / (2.0 * std::f64::consts::E * lam)).powf(beta / 2.0) * q.max_abs();
        let rel = (got.value - expected).abs() / expected;
        assert!(rel < 1e-2, "closed-form Besov defect {rel:.3e}");
        assert!(!got.boundary_attained);
        assert_abs_diff_eq!(got.argmax_t, beta / (2.0 * lam), epsilon = 0.3 * got.argmax_t);
        // zero function
        let z = GridFunction::zeros(dec.grid().clone());
        assert_eq!(besov_negative_norm(&dec, &z, 1.0, &ts).unwrap().value, 0.0);
        // grid-span validation
        assert!(besov_negative_norm(&dec, &q, 1.0, &log_spaced(0.1, 1.0, 10)).is_err());
    }

    #[test]
    fn besov_general_norm_gamma_closed_form() {
        let (grid, dec) = h1_setup();
        let k = dec.len() / 2;
        let lam = dec.eigenvalues()[k];
        let q = dec.eigenvector(k);
        let (s, p_, q_, m) = (0.5f64, 2.0f64, 2.0f64, 1u32);
        let ts = log_spaced(1e-6, 1e3, 400);
        let got = besov_general_norm(&dec, &q, s, p_, q_, m, None, &ts).unwrap();
        // ∫ t^{(m−s/2)q} λ^{mq} e^{−qtλ} dt/t = λ^{mq} Γ((m−s/2)q)/(qλ)^{(m−s/2)q}
        let a = (m as f64 - s / 2.0) * q_;
        let l2q = lebesgue_norm(&q, 2.0, None).unwrap();
        let exact = (lam.powf(m as f64 * q_) * gamma(a) / (q_ * lam).powf(a)).powf(1.0 / q_) * l2q;
        let rel = (got - exact).abs() / exact;
        assert!(rel < 1e-3, "Γ-integral closed form defect {rel:.3e}");
        let _ = grid;
        // zero function
        let z = GridFunction::zeros(dec.grid().clone());
        assert_eq!(besov_general_norm(&dec, &z, s, p_, q_, m, None, &ts).unwrap(), 0.0);
        // parameter validation
        assert!(besov_general_norm(&dec, &q, 2.5, 2.0, 2.0, 1, None, &ts).is_err());
    }

    #[test]
    fn besov_order_stability() {
        // raising the derivative order changes the norm only within a
        // bounded factor (norm equivalence, constants differ)
        let (grid, dec) = h1_setup();
        let f = bump(&grid);
        let ts = log_spaced(1e-6, 1e3, 300);
        let n1 = besov_general_norm(&dec, &f, 0.5, 2.0, 2.0, 1, None, &ts).unwrap();
        let n2 = besov_general_norm(&dec, &f, 0.5, 2.0, 2.0, 2, None, &ts).unwrap();
        let ratio = n2 / n1;
        assert!(ratio > 0.8 && ratio < 1.2, "order-bump ratio {ratio}");
    }

    #[test]
    fn besov_contraction_under_initial_heat() {
        // Evaluated on the shared grid shifted by t₀ (τ_i = t_i + t₀), the
        // Besov evaluand of H_{t₀}f at t_i equals that of f at τ_i with a
        // smaller weight, so the sups compare exactly.
        let (grid, dec) = h1_setup();
        let f = bump(&grid);
        let ts = besov_default_tgrid();
        let beta = 1.0;
        let t0 = 0.05;
        let shifted: Vec<f64> = ts.iter().map(|&t| t + t0).collect();
        let trace = HeatSupTrace::compute(&dec, &f, &shifted).unwrap();
        let lhs = ts
            .iter()
            .zip(trace.sups())
            .map(|(&t, &s)| t.powf(beta / 2.0) * s)
            .fold(0.0f64, f64::max);
        let rhs = shifted
            .iter()
            .zip(trace.sups())
            .map(|(&t, &s)| t.powf(beta / 2.0) * s)
            .fold(0.0f64, f64::max);
        assert!(
            lhs <= rhs * (1.0 + 1e-12),
            "heat should not increase the Besov norm: {lhs} > {rhs}"
        );
    }
}
