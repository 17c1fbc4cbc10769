//! Empirical-constant experiments for the improved Sobolev inequalities:
//! the critical-case strong and weak forms (gradient + thermic Besov data)
//! and the `p > 1` interpolation form.

use std::time::Instant;

use crate::calculus::{gradient_length, integrate};
use crate::error::{Error, Result};
use crate::experiments::report::{ExperimentReport, MemberRow};
use crate::family::TestFunctionFamily;
use crate::norms::{lebesgue_norm, weak_norm, HeatSupTrace};
use crate::spectral::SpectralDecomposition;
use crate::weights::Weight;

/// Maximum allowed relative drift of the ratio along one α=2 chain link.
const CHAIN_DRIFT_TOL: f64 = 0.10;

/// Proof-side level-splitting time `t_α = α^{−2/(β+s)}`: for a function with
/// unit `Ḃ^{−β−s,∞}_∞` norm, `‖H_{t_α} 𝒥^{s/2} f‖_∞ ≤ α`. Exposed for
/// exploratory runs; the experiments check conclusions, not proof steps.
pub fn besov_level_time(alpha: f64, beta: f64, s: f64) -> f64 {
    alpha.powf(-2.0 / (beta + s))
}

fn check_q(q: f64) -> Result<()> {
    if !(q > 1.0) || q.is_infinite() {
        return Err(Error::invalid("strong/weak improved inequalities require q ∈ (1,∞)"));
    }
    Ok(())
}

fn chain_drift_check(
    family: &TestFunctionFamily,
    rows: &[MemberRow],
    checks: &mut Vec<(String, bool)>,
) {
    if let Some(chain) = &family.chain {
        if chain.len() >= 2 {
            let ok = chain.windows(2).all(|w| {
                let a = rows[w[0]].ratio;
                let b = rows[w[1]].ratio;
                (b / a - 1.0).abs() <= CHAIN_DRIFT_TOL
            });
            checks.push(("dilation-drift".into(), ok));
        }
    }
}

/// Strong inequality experiment:
/// `‖f‖_{L^q(ω)} ≤ C ‖∇f‖_{L¹(ω)}^θ ‖f‖_{Ḃ^{−β,∞}_∞}^{1−θ}`,
/// `θ = 1/q`, `β = θ/(1−θ)`.
pub fn strong_sobolev_experiment(
    id: impl Into<String>,
    dec: &SpectralDecomposition,
    family: &TestFunctionFamily,
    weight: &Weight,
    q: f64,
    ts: &[f64],
) -> Result<ExperimentReport> {
    check_q(q)?;
    let start = Instant::now();
    let theta = 1.0 / q;
    let beta = theta / (1.0 - theta);
    let mut rows = Vec::with_capacity(family.len());
    let mut warnings = Vec::new();

    for (id_m, f) in family.ids.iter().zip(&family.members) {
        let grad_norm = integrate(&gradient_length(f)?, Some(weight));
        if grad_norm <= 1e-12 {
            return Err(Error::Degenerate(format!("{id_m}: zero gradient norm")));
        }
        let besov = HeatSupTrace::compute(dec, f, ts)?.besov(beta)?;
        if besov.boundary_attained {
            warnings.push(format!("{id_m}: Besov sup attained on the t-grid boundary"));
        }
        let lhs = lebesgue_norm(f, q, Some(weight))?;
        let rhs = grad_norm.powf(theta) * besov.value.powf(1.0 - theta);
        rows.push(MemberRow { id: id_m.clone(), lhs, rhs, ratio: lhs / rhs });
    }

    let (constant, spread) = ExperimentReport::aggregate(&rows);
    let mut checks = vec![
        ("ratios-finite".into(), rows.iter().all(|r| r.ratio.is_finite() && r.ratio > 0.0)),
        ("family-stability".into(), spread.is_finite() && spread < 2.0),
        ("besov-interior".into(), warnings.is_empty()),
    ];
    chain_drift_check(family, &rows, &mut checks);

    Ok(ExperimentReport {
        id: id.into(),
        kind: "strong-sobolev".into(),
        params: vec![
            ("q".into(), format!("{q}")),
            ("theta".into(), format!("{theta}")),
            ("beta".into(), format!("{beta}")),
        ],
        rows,
        constant,
        spread,
        slope: None,
        checks,
        warnings,
        runtime_s: start.elapsed().as_secs_f64(),
    })
}

/// Weak inequality experiment, evaluated in the isomorphism form with
/// `g = 𝒥^{s/2} f`:
/// `‖g‖_{L^{q,∞}(ω)} ≤ C ‖∇f‖_{L¹(ω)}^θ ‖g‖_{Ḃ^{−β−s,∞}_∞}^{1−θ}`,
/// `θ = 1/q`, `β = (1−sq)/(q−1)`, `0 < s < 1/q`.
pub fn weak_sobolev_experiment(
    id: impl Into<String>,
    dec: &SpectralDecomposition,
    family: &TestFunctionFamily,
    weight: &Weight,
    q: f64,
    s: f64,
    ts: &[f64],
) -> Result<ExperimentReport> {
    check_q(q)?;
    if !(0.0 < s && s < 1.0 / q) {
        return Err(Error::invalid("weak improved inequality requires s ∈ (0, 1/q)"));
    }
    let start = Instant::now();
    let theta = 1.0 / q;
    let beta = (1.0 - s * q) / (q - 1.0);
    let mut rows = Vec::with_capacity(family.len());
    let mut warnings = Vec::new();

    for (id_m, f) in family.ids.iter().zip(&family.members) {
        let grad_norm = integrate(&gradient_length(f)?, Some(weight));
        if grad_norm <= 1e-12 {
            return Err(Error::Degenerate(format!("{id_m}: zero gradient norm")));
        }
        let g = dec.fractional_power(f, s)?;
        let besov = HeatSupTrace::compute(dec, &g, ts)?.besov(beta + s)?;
        if besov.boundary_attained {
            warnings.push(format!("{id_m}: Besov sup attained on the t-grid boundary"));
        }
        let lhs = weak_norm(&g, q, Some(weight))?;
        let rhs = grad_norm.powf(theta) * besov.value.powf(1.0 - theta);
        rows.push(MemberRow { id: id_m.clone(), lhs, rhs, ratio: lhs / rhs });
    }

    let (constant, spread) = ExperimentReport::aggregate(&rows);
    let mut checks = vec![
        ("ratios-finite".into(), rows.iter().all(|r| r.ratio.is_finite() && r.ratio > 0.0)),
        ("family-stability".into(), spread.is_finite() && spread < 2.0),
        ("besov-interior".into(), warnings.is_empty()),
    ];
    chain_drift_check(family, &rows, &mut checks);

    Ok(ExperimentReport {
        id: id.into(),
        kind: "weak-sobolev".into(),
        params: vec![
            ("q".into(), format!("{q}")),
            ("s".into(), format!("{s}")),
            ("theta".into(), format!("{theta}")),
            ("beta".into(), format!("{beta}")),
        ],
        rows,
        constant,
        spread,
        slope: None,
        checks,
        warnings,
        runtime_s: start.elapsed().as_secs_f64(),
    })
}

/// Interpolation-form experiment for `p > 1`:
/// `‖f‖_{Ẇ^{s,q}(ω)} ≤ C ‖f‖_{Ẇ^{s₁,p}(ω)}^θ ‖f‖_{Ḃ^{−β,∞}_∞}^{1−θ}`,
/// `θ = p/q`, `s = θ s₁ − (1−θ) β`, `−β < s < s₁`.
#[allow(clippy::too_many_arguments)]
pub fn glr_experiment(
    id: impl Into<String>,
    dec: &SpectralDecomposition,
    family: &TestFunctionFamily,
    weight: &Weight,
    p: f64,
    q: f64,
    s1: f64,
    s: f64,
    ts: &[f64],
) -> Result<ExperimentReport> {
    if !(1.0 < p && p < q) || q.is_infinite() {
        return Err(Error::invalid("interpolation inequality requires 1 < p < q < +∞"));
    }
    let theta = p / q;
    // β solves s = θ s₁ − (1−θ) β
    let beta = (theta * s1 - s) / (1.0 - theta);
    if !(beta > 0.0) {
        return Err(Error::invalid(
            "parameters violate s = θs₁ − (1−θ)β with β > 0",
        ));
    }
    if !(-beta < s && s < s1) {
        return Err(Error::invalid("interpolation inequality requires −β < s < s₁"));
    }
    let start = Instant::now();
    let mut rows = Vec::with_capacity(family.len());
    let mut warnings = Vec::new();

    for (id_m, f) in family.ids.iter().zip(&family.members) {
        let lhs_fn = dec.fractional_power(f, s)?;
        let lhs = lebesgue_norm(&lhs_fn, q, Some(weight))?;
        let sob_fn = dec.fractional_power(f, s1)?;
        let sob = lebesgue_norm(&sob_fn, p, Some(weight))?;
        if sob <= 1e-14 {
            return Err(Error::Degenerate(format!("{id_m}: zero Sobolev norm")));
        }
        let besov = HeatSupTrace::compute(dec, f, ts)?.besov(beta)?;
        if besov.boundary_attained {
            warnings.push(format!("{id_m}: Besov sup attained on the t-grid boundary"));
        }
        let rhs = sob.powf(theta) * besov.value.powf(1.0 - theta);
        rows.push(MemberRow { id: id_m.clone(), lhs, rhs, ratio: lhs / rhs });
    }

    let (constant, spread) = ExperimentReport::aggregate(&rows);
    let mut checks = vec![
        ("ratios-finite".into(), rows.iter().all(|r| r.ratio.is_finite() && r.ratio > 0.0)),
        ("family-stability".into(), spread.is_finite() && spread < 2.0),
        ("besov-interior".into(), warnings.is_empty()),
    ];
    chain_drift_check(family, &rows, &mut checks);

    Ok(ExperimentReport {
        id: id.into(),
        kind: "glr".into(),
        params: vec![
            ("p".into(), format!("{p}")),
            ("q".into(), format!("{q}")),
            ("s1".into(), format!("{s1}")),
            ("s".into(), format!("{s}")),
            ("theta".into(), format!("{theta}")),
            ("beta".into(), format!("{beta}")),
        ],
        rows,
        constant,
        spread,
        slope: None,
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
    use crate::norms::besov_default_tgrid;
    use std::sync::Arc;

    fn setup() -> (Arc<Grid>, SpectralDecomposition, TestFunctionFamily, Weight) {
        let spec = Arc::new(GroupSpec::heisenberg(16.0));
        let grid = Grid::new(spec, &[1.6, 1.6, 1.8], &[11, 11, 13]).unwrap();
        let d = sublaplacian(&grid).unwrap();
        let dec = SpectralDecomposition::eigendecompose(&d).unwrap();
        let fam = generate_family(
            FamilyKind::GaussianBump,
            &FamilyParams { count: 3, ..Default::default() },
            &grid,
            None,
            9,
        )
        .unwrap();
        let w = Weight::unit(grid.clone());
        (grid, dec, fam, w)
    }

    #[test]
    fn parameter_relations_and_validation() {
        let (_, dec, fam, w) = setup();
        let ts = besov_default_tgrid();
        // q = 2 ⇒ θ = 1/2, β = 1
        let rep = strong_sobolev_experiment("t", &dec, &fam, &w, 2.0, &ts).unwrap();
        assert_eq!(rep.params[1], ("theta".to_string(), "0.5".to_string()));
        assert_eq!(rep.params[2], ("beta".to_string(), "1".to_string()));
        // invalid q names the relation
        let err = strong_sobolev_experiment("t", &dec, &fam, &w, 1.0, &ts).unwrap_err();
        assert!(err.to_string().contains("q ∈ (1,∞)"));
        // weak: q = 2, s = 1/4 ⇒ β = 1/2
        let rep = weak_sobolev_experiment("t", &dec, &fam, &w, 2.0, 0.25, &ts).unwrap();
        assert_eq!(rep.params[3], ("beta".to_string(), "0.5".to_string()));
        let err = weak_sobolev_experiment("t", &dec, &fam, &w, 2.0, 0.6, &ts).unwrap_err();
        assert!(err.to_string().contains("s ∈ (0, 1/q)"));
        // glr: p=2, q=4, s1=1, s=0 ⇒ θ=1/2, β=1
        let rep = glr_experiment("t", &dec, &fam, &w, 2.0, 4.0, 1.0, 0.0, &ts).unwrap();
        assert_eq!(rep.params[5], ("beta".to_string(), "1".to_string()));
        let err = glr_experiment("t", &dec, &fam, &w, 4.0, 2.0, 1.0, 0.0, &ts).unwrap_err();
        assert!(err.to_string().contains("1 < p < q"));
    }

    #[test]
    fn ratios_are_scale_invariant() {
        let (grid, dec, fam, w) = setup();
        let ts = besov_default_tgrid();
        let rep1 = strong_sobolev_experiment("t", &dec, &fam, &w, 2.0, &ts).unwrap();
        // scaling every member by 10 leaves each ratio unchanged (θ + (1−θ) = 1)
        let scaled = TestFunctionFamily {
            kind: fam.kind,
            ids: fam.ids.clone(),
            members: fam.members.iter().map(|f| f.scale(10.0)).collect(),
            chain: None,
        };
        let rep2 = strong_sobolev_experiment("t", &dec, &scaled, &w, 2.0, &ts).unwrap();
        for (a, b) in rep1.rows.iter().zip(&rep2.rows) {
            assert!((a.ratio / b.ratio - 1.0).abs() < 1e-10);
        }
        let _ = grid;
    }

    #[test]
    fn weak_ratio_below_strong_ratio_toward_s_zero() {
        // at s = 0 the weak lhs is dominated by the strong lhs under the same
        // quadrature; compare through the strong experiment and a hand-built
        // weak variant at s → 0 (the weak form itself requires s > 0)
        let (_, dec, fam, w) = setup();
        let ts = besov_default_tgrid();
        let strong = strong_sobolev_experiment("t", &dec, &fam, &w, 2.0, &ts).unwrap();
        for (row, f) in strong.rows.iter().zip(&fam.members) {
            let weak_lhs = weak_norm(f, 2.0, Some(&w)).unwrap();
            assert!(weak_lhs <= row.lhs * (1.0 + 1e-12));
        }
    }

    #[test]
    fn level_time_formula() {
        // t_α = α^{−2/(β+s)}
        let t = besov_level_time(2.0, 1.0, 0.0);
        assert!((t - 2f64.powf(-2.0)).abs() < 1e-15);
    }
}
