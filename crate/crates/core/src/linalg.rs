//! Dense complex linear-algebra aliases and small kernels shared by the
//! estimators.

use nalgebra::{DMatrix, DVector};
pub use num_complex::Complex64 as C64;

pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;
pub type RMat = DMatrix<f64>;
pub type RVec = DVector<f64>;

/// `AᴴA`, computed on the upper triangle and mirrored so the result is
/// exactly Hermitian.
pub fn gram(a: &CMat) -> CMat {
    let n = a.ncols();
    let mut g = CMat::zeros(n, n);
    for j in 0..n {
        let cj = a.column(j);
        for i in 0..j {
            let v = a.column(i).dotc(&cj);
            g[(i, j)] = v;
            g[(j, i)] = v.conj();
        }
        g[(j, j)] = C64::new(cj.norm_squared(), 0.0);
    }
    g
}

/// Squared norms of the columns of `a` (the diagonal of `AᴴA`).
pub fn column_norms_squared(a: &CMat) -> RVec {
    RVec::from_iterator(a.ncols(), a.column_iter().map(|c| c.norm_squared()))
}

/// `[a_nᴴ b_n]_n`, the diagonal of `AᴴB` in O(MN).
pub fn diag_of_adjoint_product(a: &CMat, b: &CMat) -> CVec {
    debug_assert_eq!(a.shape(), b.shape());
    CVec::from_iterator(a.ncols(), (0..a.ncols()).map(|n| a.column(n).dotc(&b.column(n))))
}

/// Replaces `m` with `(m + mᴴ)/2`.
pub fn hermitian_part(m: &mut CMat) {
    let n = m.nrows();
    for j in 0..n {
        for i in 0..j {
            let v = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
            m[(i, j)] = v;
            m[(j, i)] = v.conj();
        }
        m[(j, j)] = C64::new(m[(j, j)].re, 0.0);
    }
}

/// Largest absolute row sum, a Gershgorin upper bound on the spectral radius.
pub fn max_abs_row_sum<T: nalgebra::ComplexField<RealField = f64>>(m: &DMatrix<T>) -> f64 {
    m.row_iter()
        .map(|r| r.iter().map(|v| v.clone().modulus()).sum::<f64>())
        .fold(0.0, f64::max)
}

pub fn all_finite_c(v: &CVec) -> bool {
    v.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

pub fn real_vec_finite(v: &RVec) -> bool {
    v.iter().all(|x| x.is_finite())
}
