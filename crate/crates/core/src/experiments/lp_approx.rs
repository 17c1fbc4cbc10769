//! Littlewood–Paley approximation: band-limited `f_j` must reconstruct the
//! positive-spectrum part of `f` monotonically, while its `L^q(ω)` norms grow
//! no faster than `2^{j(N(1−1/q)−1)}`.

use crate::error::{Error, Result};
use crate::grid::GridFunction;
use crate::norms::lebesgue_norm;
use crate::spectral::SpectralDecomposition;
use crate::weights::Weight;

#[derive(Debug, Clone)]
pub struct LpApproxReport {
    /// `‖f_j − P₊f‖_{L²}` per block index.
    pub errors: Vec<f64>,
    /// `‖f_j‖_{L^q(ω)}` per block index.
    pub norms: Vec<f64>,
    pub monotone: bool,
    pub final_error: f64,
    /// The last block's pass band covers the whole positive spectrum.
    pub covers_spectrum: bool,
    /// Largest per-step growth `log₂(‖f_{j+1}‖/‖f_j‖)` while the band is
    /// still filling in (reconstruction error above `1e-3·‖P₊f‖₂`).
    pub growth_rate: f64,
    /// `N(1−1/q) − 1 + 0.2`.
    pub growth_cap: f64,
    pub growth_ok: bool,
}

pub fn lp_approximation_check(
    dec: &SpectralDecomposition,
    f: &GridFunction,
    weight: Option<&Weight>,
    q: f64,
    j_max: u32,
) -> Result<LpApproxReport> {
    if j_max < 3 {
        return Err(Error::invalid("Littlewood–Paley check requires j_max ≥ 3"));
    }
    if !(q >= 1.0) || q.is_infinite() {
        return Err(Error::invalid("Littlewood–Paley norms require 1 ≤ q < ∞"));
    }
    let target = dec.project_positive(f);
    let target_l2 = lebesgue_norm(&target, 2.0, None)?;
    if target_l2 == 0.0 {
        return Err(Error::Degenerate("input has no positive-spectrum component".into()));
    }

    let mut errors = Vec::with_capacity(j_max as usize + 1);
    let mut norms = Vec::with_capacity(j_max as usize + 1);
    for j in 0..=j_max {
        let fj = dec.lp_block(f, j)?;
        errors.push(lebesgue_norm(&fj.sub(&target), 2.0, None)?);
        norms.push(lebesgue_norm(&fj, q, weight)?);
    }

    let monotone = errors.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12) + 1e-300);
    let final_error = *errors.last().unwrap();
    let lam_max = dec.lambda_max();
    let lam_min = dec.lambda_min_positive().unwrap_or(lam_max);
    let covers_spectrum = {
        let j = j_max as f64;
        // pass band is 1 on [2^{−2j}, 2^{2j}/4]
        2f64.powf(-2.0 * j) <= lam_min && 2f64.powf(2.0 * j) / 4.0 >= lam_max
    };

    let n_hom = f.grid().spec().homogeneous_dim() as f64;
    let growth_cap = n_hom * (1.0 - 1.0 / q) - 1.0 + 0.2;
    let mut growth_rate = 0.0f64;
    for j in 0..j_max as usize {
        let band_filling = errors[j] > 1e-3 * target_l2;
        if band_filling && norms[j] > 0.0 && norms[j + 1] > 0.0 {
            growth_rate = growth_rate.max((norms[j + 1] / norms[j]).log2());
        }
    }
    let growth_ok = growth_rate <= growth_cap;

    Ok(LpApproxReport {
        errors,
        norms,
        monotone,
        final_error,
        covers_spectrum,
        growth_rate,
        growth_cap,
        growth_ok,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::sublaplacian;
    use crate::family::interior_window;
    use crate::grid::Grid;
    use crate::group::GroupSpec;
    use std::sync::Arc;

    fn setup() -> (Arc<Grid>, SpectralDecomposition) {
        let spec = Arc::new(GroupSpec::heisenberg(16.0));
        let grid = Grid::new(spec, &[1.6, 1.6, 1.8], &[9, 9, 11]).unwrap();
        let d = sublaplacian(&grid).unwrap();
        let dec = SpectralDecomposition::eigendecompose(&d).unwrap();
        (grid, dec)
    }

    #[test]
    fn eigenvector_reconstructs_once_band_covers_it() {
        let (_, dec) = setup();
        let k = dec.len() / 2;
        let q = dec.eigenvector(k);
        let lam = dec.eigenvalues()[k];
        let j_in = (lam.abs().log2() / 2.0).abs().ceil() as u32 + 2;
        let fj = dec.lp_block(&q, j_in).unwrap();
        assert!(fj.sub(&q).max_abs() < 1e-12);
        let rep = lp_approximation_check(&dec, &q, None, 2.0, j_in.max(3)).unwrap();
        assert!(rep.monotone);
        assert!(rep.final_error < 1e-10);
    }

    #[test]
    fn bump_reconstruction_is_monotone_and_converges() {
        let (grid, dec) = setup();
        let f = GridFunction::from_fn(grid.clone(), |x| {
            (-x.iter().map(|v| v * v).sum::<f64>() / 0.2).exp()
        })
        .mul_pointwise(&interior_window(&grid));
        let j_needed = ((dec.lambda_max().log2() + 2.0) / 2.0).ceil() as u32;
        let rep = lp_approximation_check(&dec, &f, None, 2.0, j_needed.max(4)).unwrap();
        assert!(rep.monotone, "errors not monotone: {:?}", rep.errors);
        assert!(rep.covers_spectrum);
        let l2 = lebesgue_norm(&f, 2.0, None).unwrap();
        assert!(rep.final_error <= 1e-8 * l2.max(1.0), "final error {}", rep.final_error);
        assert!(rep.growth_ok, "growth {} > cap {}", rep.growth_rate, rep.growth_cap);
        // H¹, q = 2: the cap is 4·(1/2) − 1 + 0.2 = 1.2
        assert!((rep.growth_cap - 1.2).abs() < 1e-12);
    }

    #[test]
    fn validation() {
        let (grid, dec) = setup();
        let f = GridFunction::from_fn(grid, |x| x[0]);
        assert!(lp_approximation_check(&dec, &f, None, 2.0, 2).is_err());
        assert!(lp_approximation_check(&dec, &f, None, f64::INFINITY, 4).is_err());
    }
}
