//! Small dense Cholesky kernels operating on the leading `size`-square block
//! of caller-owned buffers, so the incremental swap path can reuse scratch
//! space without reallocating.

use nalgebra::DMatrix;

/// Factors the leading `size` block of `g` in place into its lower Cholesky
/// factor. Returns false if the block is not numerically positive definite.
pub(crate) fn factor_lower(g: &mut DMatrix<f64>, size: usize) -> bool {
    for j in 0..size {
        let mut d = g[(j, j)];
        for k in 0..j {
            d -= g[(j, k)] * g[(j, k)];
        }
        if !(d > 0.0) {
            return false;
        }
        let dj = d.sqrt();
        g[(j, j)] = dj;
        for i in (j + 1)..size {
            let mut s = g[(i, j)];
            for k in 0..j {
                s -= g[(i, k)] * g[(j, k)];
            }
            g[(i, j)] = s / dj;
        }
        for i in 0..j {
            g[(i, j)] = 0.0;
        }
    }
    true
}

/// `b <- L^{-1} b` on the leading block.
pub(crate) fn forward_solve(l: &DMatrix<f64>, b: &mut [f64], size: usize) {
    for i in 0..size {
        let mut s = b[i];
        for k in 0..i {
            s -= l[(i, k)] * b[k];
        }
        b[i] = s / l[(i, i)];
    }
}

/// `b <- L^{-T} b` on the leading block.
pub(crate) fn back_solve_transposed(l: &DMatrix<f64>, b: &mut [f64], size: usize) {
    for i in (0..size).rev() {
        let mut s = b[i];
        for k in (i + 1)..size {
            s -= l[(k, i)] * b[k];
        }
        b[i] = s / l[(i, i)];
    }
}

/// Ratio of the largest to smallest diagonal entry of the leading block; a
/// cheap proxy for the condition number of the factored matrix's square root.
pub(crate) fn diag_ratio(l: &DMatrix<f64>, size: usize) -> f64 {
    let mut lo = f64::INFINITY;
    let mut hi = 0.0f64;
    for i in 0..size {
        let d = l[(i, i)].abs();
        lo = lo.min(d);
        hi = hi.max(d);
    }
    if lo == 0.0 {
        f64::INFINITY
    } else {
        hi / lo
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dmatrix;

    #[test]
    fn factor_and_solve_roundtrip() {
        let a = dmatrix![4.0, 2.0, 0.6; 2.0, 5.0, 1.0; 0.6, 1.0, 3.0];
        let mut l = a.clone();
        assert!(factor_lower(&mut l, 3));
        let rebuilt = &l * l.transpose();
        assert!((&rebuilt - &a).norm() < 1e-12);

        let mut b = [1.0, 2.0, 3.0];
        forward_solve(&l, &mut b, 3);
        back_solve_transposed(&l, &mut b, 3);
        let x = nalgebra::DVector::from_row_slice(&b);
        let res = &a * &x - nalgebra::dvector![1.0, 2.0, 3.0];
        assert!(res.norm() < 1e-12);
    }

    #[test]
    fn indefinite_block_is_rejected() {
        let mut g = dmatrix![1.0, 2.0; 2.0, 1.0];
        assert!(!factor_lower(&mut g, 2));
    }
}
