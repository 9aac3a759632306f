//! Dense symmetric eigensolver backed by LAPACK `dsyevd` (divide and
//! conquer), linked from the system BLAS/LAPACK provider.
//!
//! The input is symmetric, so the row-major/column-major mismatch is
//! immaterial on entry; on exit LAPACK leaves eigenvector `k` in Fortran
//! column `k`, which is row `k` of the row-major array.

use ndarray::Array2;

use crate::error::{Error, Result};

/// Eigenvalues (ascending) of a symmetric matrix, optionally with
/// eigenvectors. Eigenvector `k` is returned as **row** `k` of the second
/// element.
pub fn symmetric_eigen(a: &Array2<f64>, vectors: bool) -> Result<(Vec<f64>, Option<Array2<f64>>)> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(Error::Eigensolver(format!("matrix is {}x{}, not square", n, a.ncols())));
    }
    let mut buf = a.clone();
    let vals = symmetric_eigen_inplace(&mut buf, vectors)?;
    Ok((vals, if vectors { Some(buf) } else { None }))
}

/// In-place variant: `a` is overwritten (with eigenvector rows when
/// `vectors` is set), avoiding a second `n×n` allocation for big problems.
pub fn symmetric_eigen_inplace(a: &mut Array2<f64>, vectors: bool) -> Result<Vec<f64>> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(Error::Eigensolver(format!("matrix is {}x{}, not square", n, a.ncols())));
    }
    if n == 0 {
        return Ok(vec![]);
    }
    let slice = a
        .as_slice_mut()
        .ok_or_else(|| Error::Eigensolver("matrix is not contiguous".into()))?;

    let jobz = if vectors { b'V' } else { b'N' } as std::ffi::c_char;
    let uplo = b'L' as std::ffi::c_char;
    let n_i = n as i32;
    let mut w = vec![0.0f64; n];
    let mut info: i32 = 0;

    // dsyevd_2stage is markedly faster but only implements jobz = 'N'
    let driver: unsafe extern "C" fn(
        *const std::ffi::c_char,
        *const std::ffi::c_char,
        *const i32,
        *mut f64,
        *const i32,
        *mut f64,
        *mut f64,
        *const i32,
        *mut i32,
        *const i32,
        *mut i32,
    ) = if vectors { lapack_sys::dsyevd_ } else { lapack_sys::dsyevd_2stage_ };

    // workspace query
    let mut work_query = [0.0f64];
    let mut iwork_query = [0i32];
    let lwork_query: i32 = -1;
    unsafe {
        driver(
            &jobz,
            &uplo,
            &n_i,
            slice.as_mut_ptr(),
            &n_i,
            w.as_mut_ptr(),
            work_query.as_mut_ptr(),
            &lwork_query,
            iwork_query.as_mut_ptr(),
            &lwork_query,
            &mut info,
        );
    }
    if info != 0 {
        return Err(Error::Eigensolver(format!("dsyevd workspace query failed: info = {info}")));
    }
    let lwork = work_query[0] as i32;
    let liwork = iwork_query[0];
    let mut work = vec![0.0f64; lwork as usize];
    let mut iwork = vec![0i32; liwork as usize];
    unsafe {
        driver(
            &jobz,
            &uplo,
            &n_i,
            slice.as_mut_ptr(),
            &n_i,
            w.as_mut_ptr(),
            work.as_mut_ptr(),
            &lwork,
            iwork.as_mut_ptr(),
            &liwork,
            &mut info,
        );
    }
    if info != 0 {
        return Err(Error::Eigensolver(format!(
            "dsyevd failed on {n}x{n} matrix: info = {info} \
             (positive: off-diagonal element failed to converge)"
        )));
    }
    Ok(w)
}
