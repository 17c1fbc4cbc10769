//! Dense symmetric eigendecomposition through the system LAPACK
//! (`dsyevd`, divide and conquer), plus the one special function we need.

use ndarray::{Array1, Array2};
use std::os::raw::c_int;

use crate::error::{Error, Result};

extern "C" {
    fn dsyevd_(
        jobz: *const u8,
        uplo: *const u8,
        n: *const c_int,
        a: *mut f64,
        lda: *const c_int,
        w: *mut f64,
        work: *mut f64,
        lwork: *const c_int,
        iwork: *mut c_int,
        liwork: *const c_int,
        info: *mut c_int,
    );
    fn tgamma(x: f64) -> f64;
}

/// Euler gamma function from libm.
pub fn gamma(x: f64) -> f64 {
    unsafe { tgamma(x) }
}

/// Eigendecomposition of a symmetric matrix; eigenvalues ascending.
///
/// The input is consumed and overwritten with the eigenvectors: column `k` of
/// the result pairs with `values[k]`.
pub fn symmetric_eigen(mut a: Array2<f64>) -> Result<(Array1<f64>, Array2<f64>)> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::invalid("eigendecomposition requires a square matrix"));
    }
    if n == 0 {
        return Ok((Array1::zeros(0), a));
    }
    let a_slice = a.as_slice_mut().expect("standard layout");
    let mut w = vec![0.0f64; n];
    let nn = n as c_int;
    let (jobz, uplo) = (b'V', b'U'); // row-major symmetric: upper/lower are mirrors
    let mut info: c_int = 0;

    // Workspace query.
    let (mut wkopt, mut iwkopt) = (0.0f64, 0 as c_int);
    unsafe {
        dsyevd_(
            &jobz, &uplo, &nn, a_slice.as_mut_ptr(), &nn, w.as_mut_ptr(),
            &mut wkopt, &(-1), &mut iwkopt, &(-1), &mut info,
        );
    }
    if info != 0 {
        return Err(Error::Numeric(format!("dsyevd workspace query failed (info={info})")));
    }
    let lwork = wkopt as usize;
    let liwork = iwkopt as usize;
    let mut work = vec![0.0f64; lwork];
    let mut iwork = vec![0 as c_int; liwork];
    unsafe {
        dsyevd_(
            &jobz, &uplo, &nn, a_slice.as_mut_ptr(), &nn, w.as_mut_ptr(),
            work.as_mut_ptr(), &(lwork as c_int), iwork.as_mut_ptr(), &(liwork as c_int), &mut info,
        );
    }
    if info != 0 {
        return Err(Error::Numeric(format!("dsyevd failed to converge (info={info})")));
    }

    // LAPACK worked on the column-major interpretation of our row-major
    // buffer, i.e. on Aᵀ = A; its eigenvector columns are therefore the rows
    // of `a` in row-major terms. Transpose to get eigenvectors as columns.
    let vectors = a.t().to_owned();
    Ok((Array1::from(w), vectors))
}
