//! Dense complex linear algebra on top of BLAS/LAPACK: Hermitian
//! eigendecomposition, linear solves, and the matrix exponential.

use ndarray::prelude::*;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

pub use ndarray::linalg::kron;

/// Conjugate transpose.
pub fn adjoint(a: &Array2<C64>) -> Array2<C64> {
    a.t().mapv(|z| z.conj())
}

/// Matrix trace.
pub fn trace(a: &Array2<C64>) -> C64 {
    a.diag().sum()
}

/// Maximum column sum of absolute values (the induced 1-norm).
pub fn one_norm(a: &Array2<C64>) -> f64 {
    let mut best = 0.0f64;
    for col in a.columns() {
        let s: f64 = col.iter().map(|z| z.norm()).sum();
        best = best.max(s);
    }
    best
}

/// Largest elementwise absolute difference.
pub fn max_abs_diff(a: &Array2<C64>, b: &Array2<C64>) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

fn to_col_major(a: &Array2<C64>) -> Vec<C64> {
    let (n, m) = a.dim();
    let mut v = Vec::with_capacity(n * m);
    for j in 0..m {
        for i in 0..n {
            v.push(a[[i, j]]);
        }
    }
    v
}

/// Eigenvalues of a Hermitian matrix, ascending (LAPACK `zheevd`, values only).
pub fn eigvalsh(h: &Array2<C64>) -> Result<Vec<f64>> {
    zheevd(h, false).map(|(w, _)| w)
}

/// Full Hermitian eigendecomposition; column `j` of the returned matrix is the
/// eigenvector for the `j`-th eigenvalue.
pub fn eigh(h: &Array2<C64>) -> Result<(Vec<f64>, Array2<C64>)> {
    let (w, v) = zheevd(h, true)?;
    Ok((w, v.expect("jobz = V returns vectors")))
}

fn zheevd(h: &Array2<C64>, with_vectors: bool) -> Result<(Vec<f64>, Option<Array2<C64>>)> {
    let n = h.nrows();
    assert_eq!(n, h.ncols(), "eigendecomposition needs a square matrix");
    if n == 0 {
        return Ok((Vec::new(), with_vectors.then(|| Array2::zeros((0, 0)))));
    }
    // Passing the row-major buffer as column-major hands LAPACK the conjugate
    // of h; the spectrum is unchanged and eigenvectors conjugate back.
    let mut a: Vec<C64> = h.iter().cloned().collect();
    let mut w = vec![0.0f64; n];
    let jobz = if with_vectors { b'V' } else { b'N' } as i8;
    let uplo = b'U' as i8;
    let ni = n as i32;
    let mut info = 0i32;

    let mut work = vec![C64::new(0.0, 0.0); 1];
    let mut rwork = vec![0.0f64; 1];
    let mut iwork = vec![0i32; 1];
    for pass in 0..2 {
        let (lwork, lrwork, liwork) = if pass == 0 {
            (-1i32, -1i32, -1i32)
        } else {
            let lw = work[0].re as i32;
            let lrw = rwork[0] as i32;
            let liw = iwork[0];
            work = vec![C64::new(0.0, 0.0); lw.max(1) as usize];
            rwork = vec![0.0f64; lrw.max(1) as usize];
            iwork = vec![0i32; liw.max(1) as usize];
            (lw, lrw, liw)
        };
        unsafe {
            lapack_sys::zheevd_(
                &jobz,
                &uplo,
                &ni,
                a.as_mut_ptr() as *mut _,
                &ni,
                w.as_mut_ptr(),
                work.as_mut_ptr() as *mut _,
                &lwork,
                rwork.as_mut_ptr(),
                &lrwork,
                iwork.as_mut_ptr(),
                &liwork,
                &mut info,
            );
        }
        if info != 0 {
            return Err(Error::Linalg {
                routine: "zheevd",
                info,
            });
        }
    }
    let vectors = with_vectors.then(|| {
        // LAPACK wrote eigenvectors of conj(h) column-major into `a`;
        // conjugating restores eigenvectors of h.
        Array2::from_shape_fn((n, n), |(i, j)| a[j * n + i].conj())
    });
    Ok((w, vectors))
}

/// Solve `A X = B` for a general square complex `A` (LAPACK `zgesv`).
pub fn solve(a: &Array2<C64>, b: &Array2<C64>) -> Result<Array2<C64>> {
    let n = a.nrows();
    assert_eq!(n, a.ncols());
    assert_eq!(n, b.nrows());
    let nrhs = b.ncols();
    let mut af = to_col_major(a);
    let mut bf = to_col_major(b);
    let mut ipiv = vec![0i32; n];
    let (ni, nrhsi) = (n as i32, nrhs as i32);
    let mut info = 0i32;
    unsafe {
        lapack_sys::zgesv_(
            &ni,
            &nrhsi,
            af.as_mut_ptr() as *mut _,
            &ni,
            ipiv.as_mut_ptr(),
            bf.as_mut_ptr() as *mut _,
            &ni,
            &mut info,
        );
    }
    if info != 0 {
        return Err(Error::Linalg {
            routine: "zgesv",
            info,
        });
    }
    Ok(Array2::from_shape_fn((n, nrhs), |(i, j)| bf[j * n + i]))
}

/// Matrix exponential by scaling-and-squaring with a degree-13 Padé
/// approximant.
pub fn expm(a: &Array2<C64>) -> Result<Array2<C64>> {
    const THETA_13: f64 = 5.371920351148152;
    #[rustfmt::skip]
    const B: [f64; 14] = [
        64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
        1187353796428800.0, 129060195264000.0, 10559470521600.0,
        670442572800.0, 33522128640.0, 1323241920.0, 40840800.0,
        960960.0, 16380.0, 182.0, 1.0,
    ];

    let n = a.nrows();
    assert_eq!(n, a.ncols());
    let norm = one_norm(a);
    if norm == 0.0 {
        return Ok(Array2::eye(n));
    }
    let s = if norm > THETA_13 {
        (norm / THETA_13).log2().ceil() as u32
    } else {
        0
    };
    let scale = C64::new((0.5f64).powi(s as i32), 0.0);
    let m = a.mapv(|z| z * scale);

    let eye: Array2<C64> = Array2::eye(n);
    let m2 = m.dot(&m);
    let m4 = m2.dot(&m2);
    let m6 = m4.dot(&m2);

    let cb = |k: usize| C64::new(B[k], 0.0);
    let u_inner = m6.mapv(|z| z * cb(13)) + &m4.mapv(|z| z * cb(11)) + &m2.mapv(|z| z * cb(9));
    let u_poly = m6.dot(&u_inner)
        + &m6.mapv(|z| z * cb(7))
        + &m4.mapv(|z| z * cb(5))
        + &m2.mapv(|z| z * cb(3))
        + &eye.mapv(|z| z * cb(1));
    let u = m.dot(&u_poly);

    let v_inner = m6.mapv(|z| z * cb(12)) + &m4.mapv(|z| z * cb(10)) + &m2.mapv(|z| z * cb(8));
    let v = m6.dot(&v_inner)
        + &m6.mapv(|z| z * cb(6))
        + &m4.mapv(|z| z * cb(4))
        + &m2.mapv(|z| z * cb(2))
        + &eye.mapv(|z| z * cb(0));

    let num = &v + &u;
    let den = &v - &u;
    let mut r = solve(&den, &num)?;
    for _ in 0..s {
        r = r.dot(&r);
    }
    Ok(r)
}

/// Trace norm `‖H‖₁ = Σ |λ|` of a Hermitian matrix.
pub fn trace_norm_hermitian(h: &Array2<C64>) -> Result<f64> {
    Ok(eigvalsh(h)?.iter().map(|x| x.abs()).sum())
}
