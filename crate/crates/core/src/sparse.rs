//! Minimal CSR sparse matrices: just what operator assembly, conjugate
//! gradients and the Gram construction need.

use ndarray::Array2;

/// Compressed sparse row matrix with deterministic (sorted) column order.
#[derive(Debug, Clone)]
pub struct CsrMatrix {
    nrows: usize,
    ncols: usize,
    indptr: Vec<usize>,
    indices: Vec<u32>,
    data: Vec<f64>,
}

impl CsrMatrix {
    /// Builds from (row, col, value) triplets; duplicate entries are summed.
    pub fn from_triplets(nrows: usize, ncols: usize, mut trip: Vec<(u32, u32, f64)>) -> CsrMatrix {
        trip.sort_unstable_by_key(|&(r, c, _)| (r, c));
        let mut indptr = vec![0usize; nrows + 1];
        let mut indices = Vec::with_capacity(trip.len());
        let mut data: Vec<f64> = Vec::with_capacity(trip.len());
        let mut last: Option<(u32, u32)> = None;
        for (r, c, v) in trip {
            if last == Some((r, c)) {
                *data.last_mut().unwrap() += v;
            } else {
                indices.push(c);
                data.push(v);
                indptr[r as usize + 1] += 1;
                last = Some((r, c));
            }
        }
        for i in 0..nrows {
            indptr[i + 1] += indptr[i];
        }
        CsrMatrix { nrows, ncols, indptr, indices, data }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.data.len()
    }

    pub fn row(&self, r: usize) -> (&[u32], &[f64]) {
        let (a, b) = (self.indptr[r], self.indptr[r + 1]);
        (&self.indices[a..b], &self.data[a..b])
    }

    pub fn matvec_into(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.ncols);
        debug_assert_eq!(out.len(), self.nrows);
        for r in 0..self.nrows {
            let (cols, vals) = self.row(r);
            let mut acc = 0.0;
            for (c, v) in cols.iter().zip(vals) {
                acc += v * x[*c as usize];
            }
            out[r] = acc;
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.nrows];
        self.matvec_into(x, &mut out);
        out
    }

    /// `AᵀA` scaled by `weight`, as upper-triangle triplets (row ≤ col)
    /// appended to `acc`. Combine with [`CsrMatrix::from_symmetric_upper`]
    /// so mirrored entries share the exact same floating-point sum.
    pub fn gram_triplets(&self, weight: f64, acc: &mut Vec<(u32, u32, f64)>) {
        for r in 0..self.nrows {
            let (cols, vals) = self.row(r);
            for (i, (&ci, &vi)) in cols.iter().zip(vals).enumerate() {
                for (&cj, &vj) in cols[i..].iter().zip(&vals[i..]) {
                    let w = weight * vi * vj;
                    let (lo, hi) = if ci <= cj { (ci, cj) } else { (cj, ci) };
                    acc.push((lo, hi, w));
                }
            }
        }
    }

    /// Builds a bit-exactly symmetric matrix from upper-triangle triplets:
    /// duplicates are merged once and the merged values mirrored below the
    /// diagonal, so `‖A − Aᵀ‖_max` is identically zero.
    pub fn from_symmetric_upper(n: usize, upper: Vec<(u32, u32, f64)>) -> CsrMatrix {
        debug_assert!(upper.iter().all(|&(r, c, _)| r <= c));
        let merged = CsrMatrix::from_triplets(n, n, upper);
        let mut full = Vec::with_capacity(2 * merged.nnz());
        for r in 0..n {
            let (cols, vals) = merged.row(r);
            for (&c, &v) in cols.iter().zip(vals) {
                full.push((r as u32, c, v));
                if c as usize != r {
                    full.push((c, r as u32, v));
                }
            }
        }
        // single entry per position now: from_triplets only sorts
        CsrMatrix::from_triplets(n, n, full)
    }

    pub fn to_dense(&self) -> Array2<f64> {
        let mut out = Array2::zeros((self.nrows, self.ncols));
        for r in 0..self.nrows {
            let (cols, vals) = self.row(r);
            for (c, v) in cols.iter().zip(vals) {
                out[[r, *c as usize]] = *v;
            }
        }
        out
    }

    /// Max-norm asymmetry `‖A − Aᵀ‖_max`; zero for exactly symmetric matrices.
    pub fn asymmetry(&self) -> f64 {
        let mut worst = 0.0f64;
        for r in 0..self.nrows {
            let (cols, vals) = self.row(r);
            for (c, v) in cols.iter().zip(vals) {
                let vt = self.get(*c as usize, r);
                worst = worst.max((v - vt).abs());
            }
        }
        worst
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        let (cols, vals) = self.row(r);
        match cols.binary_search(&(c as u32)) {
            Ok(k) => vals[k],
            Err(_) => 0.0,
        }
    }
}

/// Conjugate gradients for symmetric positive definite systems.
///
/// Returns the solution and the final relative residual; fails when the
/// residual does not reach `tol` within `max_iter` steps.
pub fn conjugate_gradient(
    a: impl Fn(&[f64], &mut [f64]),
    b: &[f64],
    tol: f64,
    max_iter: usize,
) -> Result<(Vec<f64>, f64), f64> {
    let n = b.len();
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let mut p = r.clone();
    let mut ap = vec![0.0; n];
    let b_norm = norm2(b);
    if b_norm == 0.0 {
        return Ok((x, 0.0));
    }
    let mut rs = dot(&r, &r);
    for _ in 0..max_iter {
        a(&p, &mut ap);
        let alpha = rs / dot(&p, &ap);
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let rs_new = dot(&r, &r);
        if rs_new.sqrt() <= tol * b_norm {
            return Ok((x, rs_new.sqrt() / b_norm));
        }
        let beta = rs_new / rs;
        rs = rs_new;
        for i in 0..n {
            p[i] = r[i] + beta * p[i];
        }
    }
    Err(rs.sqrt() / b_norm)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn triplets_merge_and_matvec() {
        let a = CsrMatrix::from_triplets(
            2,
            3,
            vec![(0, 0, 1.0), (0, 0, 1.0), (0, 2, 3.0), (1, 1, -2.0)],
        );
        assert_eq!(a.nnz(), 3);
        let y = a.matvec(&[1.0, 1.0, 1.0]);
        assert_eq!(y, vec![5.0, -2.0]);
    }

    #[test]
    fn gram_matches_dense() {
        let a = CsrMatrix::from_triplets(3, 2, vec![(0, 0, 1.0), (0, 1, 2.0), (1, 0, -1.0), (2, 1, 4.0)]);
        let mut trip = Vec::new();
        a.gram_triplets(1.0, &mut trip);
        let g = CsrMatrix::from_symmetric_upper(2, trip);
        let ad = a.to_dense();
        let gd = ad.t().dot(&ad);
        for i in 0..2 {
            for j in 0..2 {
                assert_abs_diff_eq!(g.get(i, j), gd[[i, j]], epsilon = 1e-14);
            }
        }
        assert_eq!(g.asymmetry(), 0.0);
    }

    #[test]
    fn cg_solves_spd_system() {
        // 1-D Laplacian + identity.
        let n = 50;
        let mut trip = Vec::new();
        for i in 0..n as u32 {
            trip.push((i, i, 3.0));
            if i + 1 < n as u32 {
                trip.push((i, i + 1, -1.0));
                trip.push((i + 1, i, -1.0));
            }
        }
        let a = CsrMatrix::from_triplets(n, n, trip);
        let b = vec![1.0; n];
        let (x, res) = conjugate_gradient(|v, out| a.matvec_into(v, out), &b, 1e-12, 1000).unwrap();
        assert!(res <= 1e-12);
        let ax = a.matvec(&x);
        for i in 0..n {
            assert_abs_diff_eq!(ax[i], 1.0, epsilon = 1e-9);
        }
    }
}
