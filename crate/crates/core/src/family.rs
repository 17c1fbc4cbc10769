//! Deterministic families of interior-supported test functions: the inputs
//! every inequality experiment quantifies over.

use std::sync::Arc;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::calculus::gradient_length;
use crate::cutoffs::smooth_step;
use crate::error::{Error, Result};
use crate::grid::{Grid, GridFunction};
use crate::norms::lebesgue_norm;
use crate::spectral::{SpectralDecomposition, NULL_EIG_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FamilyKind {
    GaussianBump,
    BandLimitedRandom,
    DilatedChain,
    EigenvectorCombo,
}

impl FamilyKind {
    pub fn parse(s: &str) -> Result<FamilyKind> {
        match s {
            "gaussian-bump" => Ok(FamilyKind::GaussianBump),
            "band-limited-random" => Ok(FamilyKind::BandLimitedRandom),
            "dilated-chain" => Ok(FamilyKind::DilatedChain),
            "eigenvector-combo" => Ok(FamilyKind::EigenvectorCombo),
            other => Err(Error::invalid(format!("unknown family kind '{other}'"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            FamilyKind::GaussianBump => "gaussian-bump",
            FamilyKind::BandLimitedRandom => "band-limited-random",
            FamilyKind::DilatedChain => "dilated-chain",
            FamilyKind::EigenvectorCombo => "eigenvector-combo",
        }
    }
}

#[derive(Debug, Clone)]
pub struct FamilyParams {
    pub count: usize,
    /// Bump widths as fractions of the per-axis half-width (geometric ladder).
    pub width_range: (f64, f64),
    /// Base width fraction of a dilated chain (its widest member).
    pub chain_base_width: f64,
    /// α=2 resampling steps in a dilated chain (at most 3; trimmed earlier
    /// when a link would fall below grid resolution).
    pub links: usize,
    /// Eigenvalue cutoff for band-limited members.
    pub eig_cutoff: f64,
    /// Number of eigenvectors combined per eigenvector-combo member.
    pub combo_size: usize,
}

impl Default for FamilyParams {
    fn default() -> Self {
        FamilyParams {
            count: 4,
            width_range: (0.22, 0.45),
            chain_base_width: 0.42,
            links: 2,
            eig_cutoff: 25.0,
            combo_size: 3,
        }
    }
}

#[derive(Debug)]
pub struct TestFunctionFamily {
    pub kind: FamilyKind,
    pub ids: Vec<String>,
    pub members: Vec<GridFunction>,
    /// Indices of consecutive α=2 dilation links, when the family contains a chain.
    pub chain: Option<Vec<usize>>,
}

impl TestFunctionFamily {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Concatenates families (for mixed experiment populations); the chain
    /// indices of `other` are shifted accordingly.
    pub fn extend(&mut self, other: TestFunctionFamily) {
        let offset = self.members.len();
        if self.chain.is_none() {
            self.chain = other.chain.map(|c| c.iter().map(|i| i + offset).collect());
        }
        self.ids.extend(other.ids);
        self.members.extend(other.members);
    }
}

/// Smooth compactness window: ≡ 0 on the two outermost node layers of every
/// axis, ≡ 1 on the core, C^∞ in between.
pub fn interior_window(grid: &Arc<Grid>) -> GridFunction {
    let cuts: Vec<f64> = grid
        .half_widths()
        .iter()
        .zip(grid.spacings())
        .map(|(&l, &h)| l - 1.5 * h)
        .collect();
    let margins: Vec<f64> = cuts.iter().map(|&c| 0.3 * c).collect();
    let mut w = GridFunction::from_fn(grid.clone(), |x| {
        let mut v = 1.0;
        for i in 0..x.len() {
            v *= smooth_step((cuts[i] - x[i].abs()) / margins[i]);
        }
        v
    });
    w.zero_boundary_layers(2);
    w
}

fn gaussian_bump(grid: &Arc<Grid>, widths: &[f64], window: &GridFunction) -> GridFunction {
    let w2: Vec<f64> = widths.iter().map(|w| w * w).collect();
    let g = GridFunction::from_fn(grid.clone(), |x| {
        (-x.iter().zip(&w2).map(|(v, w2)| v * v / w2).sum::<f64>()).exp()
    });
    g.mul_pointwise(window)
}

fn check_nondegenerate(f: &GridFunction, id: &str) -> Result<()> {
    if f.max_abs() <= 1e-12 {
        return Err(Error::Degenerate(format!("family member {id} is numerically zero")));
    }
    let g = gradient_length(f)?;
    if lebesgue_norm(&g, 1.0, None)? <= 1e-12 {
        return Err(Error::Degenerate(format!("family member {id} has zero gradient norm")));
    }
    Ok(())
}

/// Deterministic family generation: the same `(kind, params, grid, seed)`
/// always produces identical members. Spectral kinds need a decomposition.
pub fn generate_family(
    kind: FamilyKind,
    params: &FamilyParams,
    grid: &Arc<Grid>,
    dec: Option<&SpectralDecomposition>,
    seed: u64,
) -> Result<TestFunctionFamily> {
    if params.count == 0 {
        return Ok(TestFunctionFamily { kind, ids: vec![], members: vec![], chain: None });
    }
    let window = interior_window(grid);
    let mut ids = Vec::new();
    let mut members = Vec::new();
    let mut chain = None;

    match kind {
        FamilyKind::GaussianBump => {
            let (lo, hi) = params.width_range;
            if !(lo > 0.0 && hi >= lo) {
                return Err(Error::invalid("width_range must satisfy 0 < lo ≤ hi"));
            }
            for c in 0..params.count {
                let gamma = if params.count == 1 {
                    lo
                } else {
                    lo * (hi / lo).powf(c as f64 / (params.count as f64 - 1.0))
                };
                let widths: Vec<f64> = grid.half_widths().iter().map(|l| gamma * l).collect();
                let f = gaussian_bump(grid, &widths, &window);
                ids.push(format!("bump-{c}"));
                members.push(f);
            }
        }
        FamilyKind::DilatedChain => {
            let base_widths: Vec<f64> = grid
                .half_widths()
                .iter()
                .map(|l| params.chain_base_width * l)
                .collect();
            let base = gaussian_bump(grid, &base_widths, &window);
            ids.push("chain-0".into());
            members.push(base);
            let exps = grid.spec().exponents().to_vec();
            let links = params.links.min(3);
            for k in 1..=links {
                // widths after k shrinking α=2 resamplings
                let resolvable = (0..grid.dim()).all(|i| {
                    let w = base_widths[i] / 2f64.powi(exps[i] as i32 * k as i32);
                    w >= 1.2 * grid.spacings()[i]
                });
                if !resolvable {
                    break;
                }
                let prev = members.last().unwrap();
                let next = prev.resample_dilated(2.0)?;
                ids.push(format!("chain-{k}"));
                members.push(next);
            }
            chain = Some((0..members.len()).collect());
        }
        FamilyKind::BandLimitedRandom => {
            let dec = dec.ok_or_else(|| {
                Error::invalid("band-limited family needs a spectral decomposition")
            })?;
            let n = dec.len();
            let kept: Vec<usize> = (0..n)
                .filter(|&k| {
                    let l = dec.eigenvalues()[k];
                    l > NULL_EIG_TOL && l <= params.eig_cutoff
                })
                .collect();
            if kept.is_empty() {
                return Err(Error::Degenerate(format!(
                    "no eigenvalues at or below the cutoff {}",
                    params.eig_cutoff
                )));
            }
            for c in 0..params.count {
                let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (0xb1 + c as u64));
                let mut coeffs = ndarray::Array1::<f64>::zeros(n);
                for &k in &kept {
                    coeffs[k] = rng.gen_range(-1.0..1.0);
                }
                let raw = dec.synthesize(&coeffs);
                let mut f = raw.mul_pointwise(&window);
                let norm = lebesgue_norm(&f, 2.0, None)?;
                if norm > 0.0 {
                    f = f.scale(1.0 / norm);
                }
                ids.push(format!("bl-{c}"));
                members.push(f);
            }
        }
        FamilyKind::EigenvectorCombo => {
            let dec = dec.ok_or_else(|| {
                Error::invalid("eigenvector-combo family needs a spectral decomposition")
            })?;
            let n = dec.len();
            // draw from the low half of the spectrum (stored non-increasing)
            let low_start = n / 2;
            for c in 0..params.count {
                let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (0xec0 + c as u64));
                let mut coeffs = ndarray::Array1::<f64>::zeros(n);
                for _ in 0..params.combo_size.max(1) {
                    let k = rng.gen_range(low_start..n);
                    if dec.eigenvalues()[k] > NULL_EIG_TOL {
                        coeffs[k] += if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
                    }
                }
                let raw = dec.synthesize(&coeffs);
                let mut f = raw.mul_pointwise(&window);
                let norm = lebesgue_norm(&f, 2.0, None)?;
                if norm > 0.0 {
                    f = f.scale(1.0 / norm);
                }
                ids.push(format!("combo-{c}"));
                members.push(f);
            }
        }
    }

    for (id, f) in ids.iter().zip(&members) {
        debug_assert!(f.is_interior_supported());
        check_nondegenerate(f, id)?;
    }
    Ok(TestFunctionFamily { kind, ids, members, chain })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::sublaplacian;
    use crate::group::GroupSpec;

    fn h1_grid() -> Arc<Grid> {
        let spec = Arc::new(GroupSpec::heisenberg(16.0));
        Grid::new(spec, &[2.0, 2.0, 2.5], &[17, 17, 25]).unwrap()
    }

    #[test]
    fn bumps_form_a_width_ladder() {
        let grid = h1_grid();
        let fam = generate_family(FamilyKind::GaussianBump, &FamilyParams::default(), &grid, None, 1).unwrap();
        assert_eq!(fam.len(), 4);
        for f in &fam.members {
            assert!(f.is_interior_supported());
        }
        // wider bumps have more mass
        let masses: Vec<f64> = fam
            .members
            .iter()
            .map(|f| crate::calculus::integrate(f, None))
            .collect();
        for w in masses.windows(2) {
            assert!(w[1] > w[0]);
        }
    }

    #[test]
    fn seed_determinism_and_variation() {
        let grid = h1_grid();
        let small = Grid::new(Arc::new(GroupSpec::heisenberg(16.0)), &[1.2, 1.2, 1.2], &[7, 7, 7]).unwrap();
        let d = sublaplacian(&small).unwrap();
        let dec = SpectralDecomposition::eigendecompose(&d).unwrap();
        let p = FamilyParams { count: 2, ..Default::default() };
        let a = generate_family(FamilyKind::BandLimitedRandom, &p, &small, Some(&dec), 7).unwrap();
        let b = generate_family(FamilyKind::BandLimitedRandom, &p, &small, Some(&dec), 7).unwrap();
        let c = generate_family(FamilyKind::BandLimitedRandom, &p, &small, Some(&dec), 8).unwrap();
        for (x, y) in a.members.iter().zip(&b.members) {
            assert_eq!(x.values(), y.values());
        }
        let diff = a.members[0].sub(&c.members[0]).max_abs();
        assert!(diff > 1e-8, "seed change must vary members");
        let _ = grid;
    }

    #[test]
    fn chain_members_are_alpha2_resamplings() {
        let grid = h1_grid();
        let fam = generate_family(FamilyKind::DilatedChain, &FamilyParams::default(), &grid, None, 3).unwrap();
        assert!(fam.len() >= 2, "expected at least one usable link");
        let resampled = fam.members[0].resample_dilated(2.0).unwrap();
        assert!(resampled.sub(&fam.members[1]).max_abs() < 1e-14);
        assert_eq!(fam.chain.as_deref(), Some(&(0..fam.len()).collect::<Vec<_>>()[..]));
    }

    #[test]
    fn spectral_kinds_require_decomposition() {
        let grid = h1_grid();
        assert!(generate_family(
            FamilyKind::BandLimitedRandom,
            &FamilyParams::default(),
            &grid,
            None,
            1
        )
        .is_err());
    }
}
