//! Scaling experiment for the semigroup-difference estimate
//! `‖𝒥^{s/2}f − H_t 𝒥^{s/2}f‖_{L¹(ω)} ≤ C t^{(1−s)/2} ‖∇f‖_{L¹(ω)}`,
//! `0 ≤ s < 1`, `ω` an A₁ weight.

use std::time::Instant;

use crate::error::{Error, Result};
use crate::experiments::report::{ExperimentReport, MemberRow};
use crate::experiments::slope::{scaling_fit, ScalingFit};
use crate::family::TestFunctionFamily;
use crate::grid::GridFunction;
use crate::spectral::SpectralDecomposition;
use crate::weights::{ap_expression_by_scale, ap_stability, BallFamily, Weight};
use crate::calculus::{gradient_length, integrate};

/// One member's ratio curve `R(t) = lhs(t)/‖∇f‖_{L¹(ω)}` with its scaling fit.
#[derive(Debug, Clone)]
pub struct PoincareCurve {
    pub ts: Vec<f64>,
    pub ratios: Vec<f64>,
    pub grad_norm: f64,
    pub fit: ScalingFit,
    /// `R` is non-decreasing in `t` up to the attaining scale, so `R(t) → 0`
    /// monotonically as `t → 0`.
    pub small_t_monotone: bool,
}

fn weighted_l1_of_column(col: ndarray::ArrayView1<f64>, weight: &Weight, cell: f64) -> f64 {
    col.iter()
        .enumerate()
        .map(|(i, v)| v.abs() * weight.eval(i))
        .sum::<f64>()
        * cell
}

pub fn poincare_curve(
    dec: &SpectralDecomposition,
    f: &GridFunction,
    weight: &Weight,
    s: f64,
    ts: &[f64],
) -> Result<PoincareCurve> {
    if !(0.0 <= s && s < 1.0) {
        return Err(Error::invalid("semigroup-difference exponent requires s ∈ [0, 1)"));
    }
    let grad = gradient_length(f)?;
    let grad_norm = integrate(&grad, Some(weight));
    if grad_norm <= 1e-12 {
        return Err(Error::Degenerate("zero gradient norm".into()));
    }
    let g = dec.fractional_power(f, s)?;
    // g − H_t g in one sweep: the symbol is 1 − e^{−tλ}
    let sweep = dec.symbol_sweep(&g, ts, |l, t| -(-t * l).exp_m1())?;
    let cell = f.grid().cell_volume();
    let ratios: Vec<f64> = (0..ts.len())
        .map(|i| weighted_l1_of_column(sweep.column(i), weight, cell) / grad_norm)
        .collect();
    let exponent = (1.0 - s) / 2.0;
    let fit = scaling_fit(ts, &ratios, exponent)?;
    let small_t_monotone = ts
        .iter()
        .zip(ratios.windows(2))
        .all(|(&t, w)| t > fit.t_star || w[1] >= w[0] * (1.0 - 1e-10));
    Ok(PoincareCurve { ts: ts.to_vec(), ratios, grad_norm, fit, small_t_monotone })
}

/// Family-level experiment: per-member scaling fits, with PASS checks on the
/// fitted exponent (±0.1 of `(1−s)/2`), the stability of the empirical
/// constant (< 2× spread), interior argmaxes and small-t monotonicity.
/// When a ball family is supplied the weight's A₁ stability is checked too.
#[allow(clippy::too_many_arguments)]
pub fn poincare_experiment(
    id: impl Into<String>,
    dec: &SpectralDecomposition,
    family: &TestFunctionFamily,
    weight: &Weight,
    s: f64,
    ts: &[f64],
    balls: Option<&BallFamily>,
) -> Result<ExperimentReport> {
    let start = Instant::now();
    let exponent = (1.0 - s) / 2.0;
    let mut rows = Vec::with_capacity(family.len());
    let mut warnings = Vec::new();
    let mut slopes = Vec::new();
    let mut all_interior = true;
    let mut all_monotone = true;

    for (id_m, f) in family.ids.iter().zip(&family.members) {
        let curve = poincare_curve(dec, f, weight, s, ts)?;
        let lhs = curve.fit.constant * curve.fit.t_star.powf(exponent) * curve.grad_norm;
        let rhs = curve.fit.t_star.powf(exponent) * curve.grad_norm;
        rows.push(MemberRow { id: id_m.clone(), lhs, rhs, ratio: curve.fit.constant });
        slopes.push((curve.fit.slope, curve.fit.slope_halfwidth));
        all_interior &= !curve.fit.boundary_attained;
        all_monotone &= curve.small_t_monotone;
        if curve.fit.boundary_attained {
            warnings.push(format!("{id_m}: scaling sup attained on the t-grid boundary"));
        }
    }

    let (constant, spread) = ExperimentReport::aggregate(&rows);
    let slope_ok = slopes.iter().all(|(sl, _)| (sl - exponent).abs() <= 0.1);
    let mean_slope = slopes.iter().map(|(sl, _)| sl).sum::<f64>() / slopes.len().max(1) as f64;
    let max_hw = slopes.iter().map(|(_, hw)| *hw).fold(0.0f64, f64::max);

    let mut checks = vec![
        ("slope-exponent".to_string(), slope_ok),
        ("constant-stability".to_string(), spread.is_finite() && spread < 2.0),
        ("interior-argmax".to_string(), all_interior),
        ("small-t-monotone".to_string(), all_monotone),
    ];
    if let Some(b) = balls {
        let stable = ap_stability(&ap_expression_by_scale(weight, 1.0, b)?)?.stable;
        checks.push(("weight-a1-stable".to_string(), stable));
    }

    Ok(ExperimentReport {
        id: id.into(),
        kind: "poincare".into(),
        params: vec![
            ("s".into(), format!("{s}")),
            ("target_exponent".into(), format!("{exponent}")),
        ],
        rows,
        constant,
        spread,
        slope: Some((mean_slope, max_hw)),
        checks,
        warnings,
        runtime_s: start.elapsed().as_secs_f64(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::sublaplacian;
    use crate::family::{generate_family, FamilyKind, FamilyParams};
    use crate::grid::Grid;
    use crate::group::GroupSpec;
    use crate::norms::log_spaced;
    use std::sync::Arc;

    #[test]
    fn ratio_curve_scales_and_vanishes_at_small_t() {
        let spec = Arc::new(GroupSpec::euclidean(2));
        let grid = Grid::new(spec, &[3.0, 3.0], &[25, 25]).unwrap();
        let d = sublaplacian(&grid).unwrap();
        let dec = SpectralDecomposition::eigendecompose(&d).unwrap();
        let fam = generate_family(FamilyKind::GaussianBump, &FamilyParams::default(), &grid, None, 5).unwrap();
        let w = Weight::unit(grid);
        let ts = log_spaced(1e-4, 1e3, 113);
        let curve = poincare_curve(&dec, &fam.members[2], &w, 0.0, &ts).unwrap();
        assert!(curve.small_t_monotone);
        assert!(!curve.fit.boundary_attained);
        assert!(curve.ratios[0] < 1e-2 * curve.ratios.last().unwrap());
        // the abelian case also obeys the 1/2 rate
        assert!((curve.fit.slope - 0.5).abs() <= 0.1, "slope {}", curve.fit.slope);
        // degenerate input is rejected
        let z = GridFunction::zeros(dec.grid().clone());
        assert!(matches!(
            poincare_curve(&dec, &z, &w, 0.0, &ts),
            Err(crate::error::Error::Degenerate(_))
        ));
        // exponent domain
        assert!(poincare_curve(&dec, &fam.members[0], &w, 1.0, &ts).is_err());
    }
}
