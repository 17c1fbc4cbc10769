//! Muckenhoupt weights, ball families and maximal functions.
//!
//! The continuum "sup over all balls" is replaced by a finite dyadic family:
//! radii `base·2^k` over at least three scales, centres on a coarsened node
//! lattice that always contains the origin. A_p verdicts are growth-vs-
//! stability statements of the per-scale expressions across the family.

use std::sync::Arc;

use ndarray::Array1;
use rayon::prelude::*;

use crate::calculus::group_convolve;
use crate::error::{Error, Result};
use crate::grid::{Grid, GridFunction};

/// Strictly positive grid function with an optional declared A_p class.
#[derive(Debug, Clone)]
pub struct Weight {
    values: GridFunction,
    declared_class: Option<(f64, bool)>,
    estimated_constant: Option<f64>,
}

impl Weight {
    pub fn new(values: GridFunction) -> Result<Weight> {
        if values.values().iter().any(|&v| !(v > 0.0)) {
            return Err(Error::invalid("weights must be strictly positive"));
        }
        Ok(Weight { values, declared_class: None, estimated_constant: None })
    }

    /// The trivial weight `ω ≡ 1` (an A_p weight for every p).
    pub fn unit(grid: Arc<Grid>) -> Weight {
        let values = GridFunction::from_fn(grid, |_| 1.0);
        Weight { values, declared_class: Some((1.0, true)), estimated_constant: None }
    }

    pub fn values(&self) -> &GridFunction {
        &self.values
    }

    pub fn grid(&self) -> &Arc<Grid> {
        self.values.grid()
    }

    /// Declared `(p, membership)` claim, if any.
    pub fn declared_class(&self) -> Option<(f64, bool)> {
        self.declared_class
    }

    pub fn estimated_constant(&self) -> Option<f64> {
        self.estimated_constant
    }

    pub fn set_estimated_constant(&mut self, c: f64) {
        self.estimated_constant = Some(c);
    }

    pub fn eval(&self, idx: usize) -> f64 {
        self.values.values()[idx]
    }
}

/// Power weight `ω(x) = max(ρ(x), ε)^α` with `ε = h_min/2`.
///
/// Requires `α > −N` (integrability at the gauge origin). When `declare_p`
/// is given, the weight carries the textbook membership claim: `ρ^α ∈ A_p`
/// iff `−N < α < N(p−1)` for `p > 1`, and iff `−N < α ≤ 0` for `p = 1`.
pub fn power_weight(grid: &Arc<Grid>, alpha: f64, declare_p: Option<f64>) -> Result<Weight> {
    let n_hom = grid.spec().homogeneous_dim() as f64;
    if !(alpha > -n_hom) {
        return Err(Error::invalid(format!(
            "power weight requires α > −N (got α = {alpha}, N = {n_hom})"
        )));
    }
    let eps = grid.min_spacing() / 2.0;
    let spec = grid.spec().clone();
    let values = GridFunction::from_fn(grid.clone(), |x| spec.gauge(x).max(eps).powf(alpha));
    let declared_class = declare_p.map(|p| {
        let member = if p == 1.0 { alpha <= 0.0 } else { alpha < n_hom * (p - 1.0) };
        (p, member)
    });
    Ok(Weight { values, declared_class, estimated_constant: None })
}

/// A finite family of gauge balls: dyadic radii, centres on a coarsened
/// lattice containing the origin, member node lists materialised up front.
#[derive(Debug)]
pub struct BallFamily {
    grid: Arc<Grid>,
    radii: Vec<f64>,
    /// (center node, scale index) per ball.
    balls: Vec<(u32, usize)>,
    members: Vec<Vec<u32>>,
}

impl BallFamily {
    /// Radii `base_radius · 2^k` for `k = 0..scales`; centres every `stride`
    /// nodes per axis arranged symmetrically about the origin.
    pub fn dyadic(grid: &Arc<Grid>, base_radius: f64, scales: usize, stride: usize) -> Result<BallFamily> {
        if !(base_radius > 0.0) {
            return Err(Error::invalid("ball radii must be positive"));
        }
        if scales < 3 {
            return Err(Error::invalid("ball family must cover ≥ 3 dyadic radius scales"));
        }
        if stride == 0 {
            return Err(Error::invalid("centre stride ≥ 1"));
        }
        let radii: Vec<f64> = (0..scales).map(|k| base_radius * 2f64.powi(k as i32)).collect();

        // Centre lattice: offsets 0, ±stride, ±2·stride … from the axis centre.
        let dim = grid.dim();
        let mut centre_axes: Vec<Vec<usize>> = Vec::with_capacity(dim);
        for ax in 0..dim {
            let m = grid.points()[ax];
            let mid = (m - 1) / 2;
            let mut idxs = vec![mid];
            let mut k = stride;
            while k <= mid {
                idxs.push(mid - k);
                idxs.push(mid + k);
                k += stride;
            }
            idxs.sort_unstable();
            centre_axes.push(idxs);
        }
        let mut centres: Vec<u32> = Vec::new();
        let mut multi = vec![0usize; dim];
        collect_lattice(&centre_axes, 0, &mut multi, &mut |mi| {
            centres.push(grid.flat_index(mi) as u32);
        });

        let mut balls = Vec::with_capacity(centres.len() * scales);
        for (si, _r) in radii.iter().enumerate() {
            for &c in &centres {
                balls.push((c, si));
            }
        }

        let members: Vec<Vec<u32>> = balls
            .par_iter()
            .map(|&(c, si)| ball_members(grid, c as usize, radii[si]))
            .collect();

        Ok(BallFamily { grid: grid.clone(), radii, balls, members })
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn len(&self) -> usize {
        self.balls.len()
    }

    pub fn is_empty(&self) -> bool {
        self.balls.is_empty()
    }

    /// Iterate `(center, radius, member nodes)`.
    pub fn iter(&self) -> impl Iterator<Item = (u32, f64, &[u32])> {
        self.balls
            .iter()
            .zip(&self.members)
            .map(move |(&(c, si), m)| (c, self.radii[si], m.as_slice()))
    }

    fn scale_balls(&self, scale: usize) -> impl Iterator<Item = (u32, &[u32])> {
        self.balls
            .iter()
            .zip(&self.members)
            .filter(move |(&(_, si), _)| si == scale)
            .map(|(&(c, _), m)| (c, m.as_slice()))
    }
}

fn collect_lattice<F: FnMut(&[usize])>(
    axes: &[Vec<usize>],
    ax: usize,
    multi: &mut Vec<usize>,
    emit: &mut F,
) {
    if ax == axes.len() {
        emit(multi);
        return;
    }
    for k in 0..axes[ax].len() {
        multi[ax] = axes[ax][k];
        collect_lattice(axes, ax + 1, multi, emit);
    }
}

/// Nodes inside the gauge ball `B(center, r)`, via a per-axis bounding box
/// derived from the gauge structure and the law terms.
fn ball_members(grid: &Arc<Grid>, center: usize, r: f64) -> Vec<u32> {
    let spec = grid.spec();
    let dim = grid.dim();
    let c = grid.node(center);

    // |z_i| bounds inside a gauge ball of radius r around the origin.
    let d = *spec.exponents().last().unwrap() as f64;
    let mut z_bound = vec![0.0; dim];
    for i in 0..dim {
        let a = spec.exponents()[i] as f64;
        z_bound[i] = if a == 1.0 {
            r
        } else {
            // from c_g |z_i|^{2d/a} ≤ r^{2d}
            (r.powf(2.0 * d) / spec.gauge_coeff()).powf(a / (2.0 * d))
        };
    }
    // |y_i − c_i| ≤ |z_i| + |P_i(c, z)| with y = c·z.
    let mut y_bound = z_bound.clone();
    for t in spec.law() {
        let mut b = t.coeff.abs();
        for &(i, p) in &t.x_powers {
            b *= c[i].abs().powi(p as i32);
        }
        for &(i, p) in &t.y_powers {
            b *= z_bound[i].powi(p as i32);
        }
        y_bound[t.target] += b;
    }

    let mut lo = vec![0usize; dim];
    let mut hi = vec![0usize; dim];
    let mut cm = vec![0usize; dim];
    grid.multi_index_into(center, &mut cm);
    for i in 0..dim {
        let h = grid.spacings()[i];
        let span = (y_bound[i] / h).ceil() as usize + 1;
        lo[i] = cm[i].saturating_sub(span);
        hi[i] = (cm[i] + span).min(grid.points()[i] - 1);
    }

    let mut out = Vec::new();
    let mut multi = lo.clone();
    let mut y = vec![0.0; dim];
    'outer: loop {
        let idx = grid.flat_index(&multi);
        for i in 0..dim {
            y[i] = grid.axis_coord(i, multi[i]);
        }
        if spec.gauge_distance(&c, &y) < r {
            out.push(idx as u32);
        }
        // advance odometer
        let mut ax = dim;
        loop {
            if ax == 0 {
                break 'outer;
            }
            ax -= 1;
            if multi[ax] < hi[ax] {
                multi[ax] += 1;
                for a2 in ax + 1..dim {
                    multi[a2] = lo[a2];
                }
                break;
            }
        }
    }
    out
}

/// Hardy–Littlewood maximal function over the family:
/// `𝓜_B f(x) = max over family balls containing x of avg_B |f|`.
///
/// Nodes covered by no family ball get 0.
pub fn hl_maximal(f: &GridFunction, family: &BallFamily) -> Result<GridFunction> {
    if family.is_empty() {
        return Err(Error::invalid("ball family is empty"));
    }
    if !Arc::ptr_eq(f.grid(), family.grid()) {
        return Err(Error::invalid("function and ball family must share a grid"));
    }
    let mut out = Array1::<f64>::zeros(f.len());
    for (_, _, members) in family.iter() {
        if members.is_empty() {
            continue;
        }
        let avg = members.iter().map(|&i| f.values()[i as usize].abs()).sum::<f64>()
            / members.len() as f64;
        for &i in members {
            let v = &mut out[i as usize];
            if avg > *v {
                *v = avg;
            }
        }
    }
    GridFunction::new(f.grid().clone(), out)
}

/// The A_p expression of `ω` over the whole family:
/// for `p > 1` the ball supremum of `(avg ω)(avg ω^{−1/(p−1)})^{p−1}`,
/// for `p = 1` the pointwise supremum of `𝓜_B ω / ω`.
pub fn muckenhoupt_constant(weight: &Weight, p: f64, family: &BallFamily) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(Error::invalid("Muckenhoupt class requires p ≥ 1"));
    }
    if p == 1.0 {
        let m = hl_maximal(weight.values(), family)?;
        let mut worst = 0.0f64;
        for i in 0..m.len() {
            let r = m.values()[i] / weight.eval(i);
            if r > worst {
                worst = r;
            }
        }
        return Ok(worst);
    }
    let mut worst = 0.0f64;
    for (_, _, members) in family.iter() {
        if members.is_empty() {
            continue;
        }
        let e = ap_ball_expression(weight, p, members);
        if e > worst {
            worst = e;
        }
    }
    Ok(worst)
}

fn ap_ball_expression(weight: &Weight, p: f64, members: &[u32]) -> f64 {
    let k = members.len() as f64;
    let avg: f64 = members.iter().map(|&i| weight.eval(i as usize)).sum::<f64>() / k;
    let dual: f64 = members
        .iter()
        .map(|&i| weight.eval(i as usize).powf(-1.0 / (p - 1.0)))
        .sum::<f64>()
        / k;
    avg * dual.powf(p - 1.0)
}

/// Per-dyadic-scale A_p expressions `(radius, value)`, the raw data behind
/// stability verdicts and the CSV report.
pub fn ap_expression_by_scale(weight: &Weight, p: f64, family: &BallFamily) -> Result<Vec<(f64, f64)>> {
    if !(p >= 1.0) {
        return Err(Error::invalid("Muckenhoupt class requires p ≥ 1"));
    }
    let mut out = Vec::with_capacity(family.radii().len());
    for (si, &r) in family.radii().iter().enumerate() {
        let mut worst = 0.0f64;
        if p == 1.0 {
            // maximal function restricted to this scale
            let mut m = Array1::<f64>::zeros(weight.values().len());
            for (_, members) in family.scale_balls(si) {
                if members.is_empty() {
                    continue;
                }
                let avg = members
                    .iter()
                    .map(|&i| weight.eval(i as usize))
                    .sum::<f64>()
                    / members.len() as f64;
                for &i in members {
                    if avg > m[i as usize] {
                        m[i as usize] = avg;
                    }
                }
            }
            for i in 0..m.len() {
                let ratio = m[i] / weight.eval(i);
                if ratio > worst {
                    worst = ratio;
                }
            }
        } else {
            for (_, members) in family.scale_balls(si) {
                if members.is_empty() {
                    continue;
                }
                let e = ap_ball_expression(weight, p, members);
                if e > worst {
                    worst = e;
                }
            }
        }
        out.push((r, worst));
    }
    Ok(out)
}

/// Growth-vs-stability verdict for per-scale A_p expressions.
#[derive(Debug, Clone)]
pub struct StabilityReport {
    pub per_scale: Vec<(f64, f64)>,
    /// Fitted multiplicative growth of the expression per radius doubling.
    pub growth_per_doubling: f64,
    /// Stable means the fitted growth stays below 2× per doubling.
    pub stable: bool,
}

/// Fits `log₂ E` against `log₂ r` and reports `2^slope` as the growth factor
/// per radius doubling. Stable ⟺ growth < 2.
pub fn ap_stability(per_scale: &[(f64, f64)]) -> Result<StabilityReport> {
    if per_scale.len() < 2 {
        return Err(Error::invalid("stability verdict needs ≥ 2 radius scales"));
    }
    if per_scale.iter().any(|&(r, e)| !(r > 0.0) || !(e > 0.0)) {
        return Err(Error::invalid("stability verdict needs positive radii and expressions"));
    }
    let xs: Vec<f64> = per_scale.iter().map(|&(r, _)| r.log2()).collect();
    let ys: Vec<f64> = per_scale.iter().map(|&(_, e)| e.log2()).collect();
    let xm = xs.iter().sum::<f64>() / xs.len() as f64;
    let ym = ys.iter().sum::<f64>() / ys.len() as f64;
    let sxx: f64 = xs.iter().map(|x| (x - xm) * (x - xm)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - xm) * (y - ym)).sum();
    let slope = sxy / sxx;
    let growth = 2f64.powf(slope);
    Ok(StabilityReport { per_scale: per_scale.to_vec(), growth_per_doubling: growth, stable: growth < 2.0 })
}

/// Smooth maximal function `𝓜_φ f(x) = sup_t |f ∗ φ_t(x)|` over a sampled
/// `t`-grid, with `φ_t(x) = t^{−N/2} φ(δ_{t^{−1/2}} x)`.
pub fn phi_maximal(f: &GridFunction, phi: &GridFunction, t_grid: &[f64]) -> Result<GridFunction> {
    if t_grid.is_empty() {
        return Err(Error::invalid("φ-maximal function needs a non-empty t grid"));
    }
    if t_grid.iter().any(|&t| !(t > 0.0)) {
        return Err(Error::invalid("φ-maximal t grid must be positive"));
    }
    let n_hom = f.grid().spec().homogeneous_dim() as f64;
    let mut out = Array1::<f64>::zeros(f.len());
    let mut warned = phi.boundary_warning || !phi.is_interior_supported();
    for &t in t_grid {
        let phi_t = phi.resample_dilated(t.powf(-0.5))?.scale(t.powf(-n_hom / 2.0));
        let conv = group_convolve(f, &phi_t)?;
        warned |= conv.boundary_warning;
        for (o, v) in out.iter_mut().zip(conv.values()) {
            let a = v.abs();
            if a > *o {
                *o = a;
            }
        }
    }
    let mut g = GridFunction::new(f.grid().clone(), out)?;
    g.boundary_warning = warned;
    Ok(g)
}
