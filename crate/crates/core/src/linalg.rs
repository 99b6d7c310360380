//! Small dense kernels not covered by nalgebra.

use crate::scalar::{Cplx, Real};

/// `ln |det M|` of a column-major `n x n` complex matrix, via LU with partial pivoting.
///
/// The matrix is overwritten. Returns `-inf` for an exactly singular matrix.
pub fn log_abs_det<T: Real>(m: &mut [Cplx<T>], n: usize) -> T {
    assert_eq!(m.len(), n * n);
    let mut log_det = T::zero();
    for k in 0..n {
        let col_k = k * n;
        let mut piv = k;
        let mut best = m[col_k + k].norm_sqr();
        for i in k + 1..n {
            let v = m[col_k + i].norm_sqr();
            if v > best {
                best = v;
                piv = i;
            }
        }
        if best == T::zero() {
            return T::lit(f64::NEG_INFINITY);
        }
        if piv != k {
            for j in 0..n {
                m.swap(j * n + k, j * n + piv);
            }
        }
        let p = m[col_k + k];
        log_det += best.sqrt().ln();
        let inv = Cplx::new(T::one(), T::zero()) / p;
        for i in k + 1..n {
            m[col_k + i] *= inv;
        }
        let (head, tail) = m.split_at_mut((k + 1) * n);
        let lcol = &head[col_k + k + 1..col_k + n];
        for j in 0..n - k - 1 {
            let col = &mut tail[j * n..(j + 1) * n];
            let f = col[k];
            if f.re == T::zero() && f.im == T::zero() {
                continue;
            }
            for (x, l) in col[k + 1..].iter_mut().zip(lcol) {
                *x -= *l * f;
            }
        }
    }
    log_det
}
