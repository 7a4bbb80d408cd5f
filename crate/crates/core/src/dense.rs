//! Dense linear algebra: LAPACK eigensolvers, the matrix exponential and
//! operator norms.

use ndarray::{Array1, Array2, ArrayView2, ShapeBuilder};
use ndarray_linalg::{Eig, Inverse, Lapack, SVD};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Copies into a column-major buffer.
fn fortran(a: &ArrayView2<f64>) -> Vec<f64> {
    let mut out = Vec::with_capacity(a.len());
    for col in a.columns() {
        out.extend(col.iter());
    }
    out
}

fn from_fortran(n: usize, m: usize, buf: Vec<f64>) -> Array2<f64> {
    Array2::from_shape_vec((n, m).f(), buf).expect("shape").as_standard_layout().to_owned()
}

fn lapack_int(n: usize) -> Result<i32> {
    i32::try_from(n).map_err(|_| Error::Linalg(format!("dimension {n} exceeds LAPACK integer range")))
}

/// Symmetric eigendecomposition `A = V diag(w) Vᵀ` (divide and conquer).
/// Eigenvalues ascending; only the lower triangle of `a` is read.
pub fn sym_eigh(a: &Array2<f64>) -> Result<(Array1<f64>, Array2<f64>)> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::DimensionMismatch { expected: n, found: a.ncols() });
    }
    if n == 0 {
        return Ok((Array1::zeros(0), Array2::zeros((0, 0))));
    }
    let ni = lapack_int(n)?;
    let mut buf = fortran(&a.view());
    let mut w = vec![0.0; n];
    let (jobz, uplo) = (b'V' as i8, b'L' as i8);
    let mut info = 0;
    let (mut wq, mut iwq) = (0.0f64, 0i32);
    unsafe {
        lapack_sys::dsyevd_(&jobz as *const i8 as _, &uplo as *const i8 as _, &ni, buf.as_mut_ptr(), &ni, w.as_mut_ptr(), &mut wq, &-1, &mut iwq, &-1, &mut info);
    }
    let lwork = wq as i32;
    let mut work = vec![0.0; lwork.max(1) as usize];
    let mut iwork = vec![0i32; iwq.max(1) as usize];
    unsafe {
        lapack_sys::dsyevd_(&jobz as *const i8 as _, &uplo as *const i8 as _, &ni, buf.as_mut_ptr(), &ni, w.as_mut_ptr(), work.as_mut_ptr(), &lwork, iwork.as_mut_ptr(), &iwq, &mut info);
    }
    if info != 0 {
        return Err(Error::Linalg(format!("dsyevd failed with info = {info}")));
    }
    Ok((Array1::from(w), from_fortran(n, n, buf)))
}

/// Generalized symmetric-definite eigenproblem `A v = μ B v` with `B`
/// positive definite. Eigenvalues ascending; `V` is `B`-orthonormal.
pub fn sym_gen_eigh(a: &Array2<f64>, b: &Array2<f64>) -> Result<(Array1<f64>, Array2<f64>)> {
    let n = a.nrows();
    if a.ncols() != n || b.dim() != (n, n) {
        return Err(Error::DimensionMismatch { expected: n, found: b.nrows() });
    }
    if n == 0 {
        return Ok((Array1::zeros(0), Array2::zeros((0, 0))));
    }
    let ni = lapack_int(n)?;
    let mut abuf = fortran(&a.view());
    let mut bbuf = fortran(&b.view());
    let mut w = vec![0.0; n];
    let (jobz, uplo) = (b'V' as i8, b'L' as i8);
    let itype = 1;
    let mut info = 0;
    let (mut wq, mut iwq) = (0.0f64, 0i32);
    unsafe {
        lapack_sys::dsygvd_(&itype, &jobz as *const i8 as _, &uplo as *const i8 as _, &ni, abuf.as_mut_ptr(), &ni, bbuf.as_mut_ptr(), &ni, w.as_mut_ptr(), &mut wq, &-1, &mut iwq, &-1, &mut info);
    }
    let lwork = wq as i32;
    let mut work = vec![0.0; lwork.max(1) as usize];
    let mut iwork = vec![0i32; iwq.max(1) as usize];
    unsafe {
        lapack_sys::dsygvd_(&itype, &jobz as *const i8 as _, &uplo as *const i8 as _, &ni, abuf.as_mut_ptr(), &ni, bbuf.as_mut_ptr(), &ni, w.as_mut_ptr(), work.as_mut_ptr(), &lwork, iwork.as_mut_ptr(), &iwq, &mut info);
    }
    if info > n as i32 {
        return Err(Error::Linalg(format!("mass matrix is not positive definite (dsygvd info = {info})")));
    }
    if info != 0 {
        return Err(Error::Linalg(format!("dsygvd failed with info = {info}")));
    }
    Ok((Array1::from(w), from_fortran(n, n, abuf)))
}

/// Eigenvalues and right eigenvectors of a general real matrix.
pub fn general_eig(a: &Array2<f64>) -> Result<(Vec<Complex64>, Array2<Complex64>)> {
    if a.nrows() == 0 {
        return Ok((Vec::new(), Array2::zeros((0, 0))));
    }
    let (w, v) = a.eig()?;
    Ok((w.to_vec(), v))
}

/// Solves `A X = B` by LU with partial pivoting.
pub fn solve(a: &Array2<f64>, b: &Array2<f64>) -> Result<Array2<f64>> {
    let n = a.nrows();
    if a.ncols() != n || b.nrows() != n {
        return Err(Error::DimensionMismatch { expected: n, found: b.nrows() });
    }
    let (ni, nrhs) = (lapack_int(n)?, lapack_int(b.ncols())?);
    let mut abuf = fortran(&a.view());
    let mut bbuf = fortran(&b.view());
    let mut ipiv = vec![0i32; n];
    let mut info = 0;
    unsafe {
        lapack_sys::dgesv_(&ni, &nrhs, abuf.as_mut_ptr(), &ni, ipiv.as_mut_ptr(), bbuf.as_mut_ptr(), &ni, &mut info);
    }
    if info != 0 {
        return Err(Error::Linalg(format!("dgesv failed with info = {info}")));
    }
    Ok(from_fortran(n, b.ncols(), bbuf))
}

pub fn inverse_complex(a: &Array2<Complex64>) -> Result<Array2<Complex64>> {
    Ok(a.inv()?)
}

const PADE3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const PADE5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const PADE7: [f64; 8] = [17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0];
const PADE9: [f64; 10] =
    [17643225600.0, 8821612800.0, 2075673600.0, 302702400.0, 30270240.0, 2162160.0, 110880.0, 3960.0, 90.0, 1.0];
const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];
const THETA: [(usize, f64); 4] =
    [(3, 1.495585217958292e-2), (5, 2.539398330063230e-1), (7, 9.504178996162932e-1), (9, 2.097847961257068)];
const THETA13: f64 = 5.371920351148152;

/// Matrix exponential by Padé scaling and squaring (Higham 2005).
pub fn expm(a: &Array2<f64>) -> Result<Array2<f64>> {
    let n = a.nrows();
    let ident = Array2::<f64>::eye(n);
    if n == 0 {
        return Ok(ident);
    }
    let norm = norm1(&a.view());
    let a2 = a.dot(a);
    for &(m, theta) in &THETA {
        if norm <= theta {
            let b: &[f64] = match m {
                3 => &PADE3,
                5 => &PADE5,
                7 => &PADE7,
                _ => &PADE9,
            };
            let mut pow = ident.clone();
            let mut u = &ident * b[1];
            let mut v = &ident * b[0];
            for k in 1..=m / 2 {
                pow = pow.dot(&a2);
                u = u + &pow * b[2 * k + 1];
                v = v + &pow * b[2 * k];
            }
            let u = a.dot(&u);
            return solve(&(&v - &u), &(&v + &u));
        }
    }
    let s = (norm / THETA13).log2().ceil().max(0.0) as i32;
    let scale = 2f64.powi(-s);
    let a1 = a * scale;
    let a2 = a2 * (scale * scale);
    let a4 = a2.dot(&a2);
    let a6 = a4.dot(&a2);
    let b = &PADE13;
    let inner_u = &a6 * b[13] + &a4 * b[11] + &a2 * b[9];
    let u = a1.dot(&(a6.dot(&inner_u) + &a6 * b[7] + &a4 * b[5] + &a2 * b[3] + &ident * b[1]));
    let inner_v = &a6 * b[12] + &a4 * b[10] + &a2 * b[8];
    let v = a6.dot(&inner_v) + &a6 * b[6] + &a4 * b[4] + &a2 * b[2] + &ident * b[0];
    let mut r = solve(&(&v - &u), &(&v + &u))?;
    for _ in 0..s {
        r = r.dot(&r);
    }
    Ok(r)
}

/// Maximum absolute column sum.
pub fn norm1(a: &ArrayView2<f64>) -> f64 {
    a.columns().into_iter().map(|c| c.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max)
}

/// Operator norm on the nodal sup norm: maximum absolute row sum.
pub fn sup_norm<A: ndarray_linalg::Scalar<Real = f64>>(a: &Array2<A>) -> f64 {
    a.rows().into_iter().map(|r| r.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max)
}

/// Largest singular value.
pub fn spectral_norm<A: ndarray_linalg::Scalar<Real = f64> + Lapack>(a: &Array2<A>) -> Result<f64> {
    if a.is_empty() {
        return Ok(0.0);
    }
    let (_, s, _) = a.svd(false, false)?;
    Ok(s[0])
}

/// Operator norm on `ℓ²` weighted by the diagonal mass `m`:
/// `‖D^{1/2} A D^{-1/2}‖₂` with `D = diag(m)`.
pub fn weighted_l2_norm<A: ndarray_linalg::Scalar<Real = f64> + Lapack>(a: &Array2<A>, m: &[f64]) -> Result<f64> {
    let mut w = a.clone();
    for ((i, j), v) in w.indexed_iter_mut() {
        *v = v.mul_real((m[i] / m[j]).sqrt());
    }
    spectral_norm(&w)
}

/// 2-norm condition number.
pub fn cond2<A: ndarray_linalg::Scalar<Real = f64> + Lapack>(a: &Array2<A>) -> Result<f64> {
    if a.is_empty() {
        return Ok(1.0);
    }
    let (_, s, _) = a.svd(false, false)?;
    Ok(s[0] / s[s.len() - 1])
}

/// Solves a small tridiagonal system through LAPACK and checks the answer.
/// Some OpenBLAS builds select kernels that return wrong results on newer
/// processors; callers can use this to detect that before trusting output.
pub fn blas_self_check() -> bool {
    let n = 24;
    let a = Array2::from_shape_fn((n, n), |(i, j)| match i.abs_diff(j) {
        0 => 2.0,
        1 => -1.0,
        _ => 0.0,
    });
    let Ok(x) = solve(&a, &Array2::eye(n)) else { return false };
    let err = (a.dot(&x) - Array2::<f64>::eye(n)).iter().fold(0.0f64, |m, v| m.max(v.abs()));
    err < 1e-10
}

/// `V diag(f) Vᵀ` through two symmetric rank-k updates, one for the
/// positive and one for the negative weights.
pub fn signed_gram(v: &Array2<f64>, f: &[f64]) -> Result<Array2<f64>> {
    let n = v.nrows();
    let ni = lapack_int(n)?;
    let mut c = vec![0.0; n * n];
    for sign in [1.0, -1.0] {
        let cols: Vec<usize> = (0..f.len()).filter(|&k| f[k] * sign > 0.0).collect();
        if cols.is_empty() {
            continue;
        }
        let k = cols.len();
        let mut p = Array2::<f64>::zeros((n, k));
        for (dst, &src) in cols.iter().enumerate() {
            let s = (f[src] * sign).sqrt();
            p.column_mut(dst).zip_mut_with(&v.column(src), |a, b| *a = b * s);
        }
        let ki = lapack_int(k)?;
        unsafe {
            cblas_sys::cblas_dsyrk(
                cblas_sys::CblasRowMajor,
                cblas_sys::CblasLower,
                cblas_sys::CblasNoTrans,
                ni,
                ki,
                sign,
                p.as_ptr(),
                ki,
                1.0,
                c.as_mut_ptr(),
                ni,
            );
        }
    }
    let mut out = Array2::from_shape_vec((n, n), c).expect("shape");
    for i in 0..n {
        for j in 0..i {
            out[[j, i]] = out[[i, j]];
        }
    }
    Ok(out)
}

pub fn to_complex(a: &Array2<f64>) -> Array2<Complex64> {
    a.mapv(|v| Complex64::new(v, 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn rel_diff(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
        let d = (a - b).iter().fold(0.0f64, |m, v| m.max(v.abs()));
        d / b.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    #[test]
    fn expm_of_rotation_generator() {
        let t = 2.5;
        let a = array![[0.0, -t], [t, 0.0]];
        let e = expm(&a).unwrap();
        let exact = array![[t.cos(), -t.sin()], [t.sin(), t.cos()]];
        assert!(rel_diff(&e, &exact) < 1e-13);
    }

    #[test]
    fn expm_small_and_large_norms() {
        for scale in [1e-3, 0.2, 0.9, 2.0, 5.0, 40.0] {
            let a = array![[-1.0, 0.5, 0.0], [0.25, -2.0, 0.3], [0.0, 0.1, -0.5]] * scale;
            let e = expm(&a).unwrap();
            // e^{A} = (e^{A/2})^2
            let h = expm(&(&a * 0.5)).unwrap();
            assert!(rel_diff(&e, &h.dot(&h)) < 1e-12, "scale {scale}");
        }
        let zero = Array2::<f64>::zeros((3, 3));
        assert_eq!(expm(&zero).unwrap(), Array2::<f64>::eye(3));
    }

    #[test]
    fn generalized_eigenproblem() {
        let a = array![[2.0, -1.0], [-1.0, 2.0]];
        let b = array![[2.0, 0.0], [0.0, 1.0]];
        let (w, v) = sym_gen_eigh(&a, &b).unwrap();
        for k in 0..2 {
            let x = v.column(k).to_owned();
            let r = a.dot(&x) - b.dot(&x) * w[k];
            assert!(r.iter().all(|e| e.abs() < 1e-12));
            assert!((x.dot(&b.dot(&x)) - 1.0).abs() < 1e-12);
        }
        let (w, _) = sym_eigh(&a).unwrap();
        assert!((w[0] - 1.0).abs() < 1e-14 && (w[1] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn signed_gram_matches_product() {
        let v = array![[1.0, 2.0, 0.5], [0.0, -1.0, 3.0], [2.0, 1.0, 1.0], [1.0, 0.0, -2.0]];
        let f = [2.0, -0.5, 0.0];
        let direct = v.dot(&Array2::from_diag(&Array1::from(f.to_vec()))).dot(&v.t());
        let g = signed_gram(&v, &f).unwrap();
        assert!((g - direct).iter().all(|x| x.abs() < 1e-14));
    }

    #[test]
    fn lapack_backend_is_sound() {
        assert!(blas_self_check(), "LAPACK returned wrong results; set OPENBLAS_CORETYPE (see README)");
    }

    #[test]
    fn norms() {
        let a = array![[1.0, -2.0], [3.0, 4.0]];
        assert_eq!(sup_norm(&a), 7.0);
        assert_eq!(norm1(&a.view()), 6.0);
        let d = array![[3.0, 0.0], [0.0, -4.0]];
        assert!((spectral_norm(&d).unwrap() - 4.0).abs() < 1e-14);
        assert!((weighted_l2_norm(&d, &[1.0, 9.0]).unwrap() - 4.0).abs() < 1e-14);
        assert!((cond2(&d).unwrap() - 4.0 / 3.0).abs() < 1e-14);
    }
}
