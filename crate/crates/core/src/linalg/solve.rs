//! Batch least-squares fits of a single candidate model.
//!
//! The production route is a column-pivoted QR: residual sums of squares come
//! from the tail of the reflected response, so they stay accurate even when
//! the fit is nearly interpolating. Rank-deficient coefficient recovery falls
//! back to the minimum-norm SVD solution; fitted values and rss are
//! route-invariant, which the tests pin down.

use super::dataset::ModelIndex;
use crate::error::{Error, Result};
use nalgebra::linalg::ColPivQR;
use nalgebra::{DMatrix, DVector};

/// Least-squares fit of `target` on the columns `model` of `z`.
#[derive(Debug, Clone)]
pub struct SubmodelFit {
    /// Coefficients in model order (minimum-norm when rank deficient).
    pub coef: DVector<f64>,
    /// Projection of `target` onto the model's column span.
    pub fitted: DVector<f64>,
    pub rss: f64,
    pub rank: usize,
}

/// Rank tolerance: `max(n, u) * eps * (largest column norm)`.
fn rank_tolerance(n: usize, u: usize, max_col_norm: f64) -> f64 {
    n.max(u) as f64 * f64::EPSILON * max_col_norm
}

pub(crate) fn gather_columns(z: &DMatrix<f64>, model: &ModelIndex) -> DMatrix<f64> {
    let n = z.nrows();
    let u = model.len();
    let mut m = DMatrix::zeros(n, u);
    for (slot, col) in model.iter().enumerate() {
        m.column_mut(slot).copy_from(&z.column(col));
    }
    m
}

fn validate(z: &DMatrix<f64>, model: &ModelIndex, target: &DVector<f64>) -> Result<()> {
    if z.nrows() != target.len() {
        return Err(Error::Dimension(format!(
            "target has {} rows but z has {}",
            target.len(),
            z.nrows()
        )));
    }
    model.validate_for(z.ncols())
}

pub fn fit_submodel(
    z: &DMatrix<f64>,
    model: &ModelIndex,
    target: &DVector<f64>,
) -> Result<SubmodelFit> {
    validate(z, model, target)?;
    let n = z.nrows();
    let u = model.len();
    if u == 0 {
        return Ok(SubmodelFit {
            coef: DVector::zeros(0),
            fitted: DVector::zeros(n),
            rss: target.norm_squared(),
            rank: 0,
        });
    }
    let m = gather_columns(z, model);
    let max_col_norm = (0..u).map(|j| m.column(j).norm()).fold(0.0, f64::max);
    let tol = rank_tolerance(n, u, max_col_norm);
    if max_col_norm == 0.0 {
        return Ok(SubmodelFit {
            coef: DVector::zeros(u),
            fitted: DVector::zeros(n),
            rss: target.norm_squared(),
            rank: 0,
        });
    }

    let qr = ColPivQR::new(m.clone());
    let r = qr.r();
    let rdim = r.nrows().min(r.ncols());
    let rank = (0..rdim).take_while(|&i| r[(i, i)].abs() > tol).count();

    let mut c = target.clone();
    qr.q_tr_mul(&mut c);
    // Residual coordinates live past the first `rank` reflected components.
    let rss: f64 = c.iter().skip(rank).map(|v| v * v).sum();

    let q = qr.q();
    let fitted = q.columns(0, rank) * c.rows(0, rank);

    let coef = if rank == u {
        let mut w = DVector::from(c.rows(0, u).clone_owned());
        r.view((0, 0), (u, u))
            .solve_upper_triangular_mut(&mut w)
            .then_some(())
            .ok_or_else(|| Error::Numerical("triangular solve failed despite full rank".into()))?;
        qr.p().inv_permute_rows(&mut w);
        w
    } else {
        // Minimum-norm solution on the numerically rank-deficient span.
        let svd = m.svd(true, true);
        svd.solve(target, tol)
            .map_err(|e| Error::Numerical(format!("svd solve failed: {e}")))?
    };

    Ok(SubmodelFit {
        coef,
        fitted,
        rss,
        rank,
    })
}

/// Reference route: pseudo-inverse via SVD. Same contract as [`fit_submodel`];
/// kept separate so the two paths can be cross-checked.
pub fn fit_submodel_pinv(
    z: &DMatrix<f64>,
    model: &ModelIndex,
    target: &DVector<f64>,
) -> Result<SubmodelFit> {
    validate(z, model, target)?;
    let n = z.nrows();
    let u = model.len();
    if u == 0 {
        return fit_submodel(z, model, target);
    }
    let m = gather_columns(z, model);
    let max_col_norm = (0..u).map(|j| m.column(j).norm()).fold(0.0, f64::max);
    let tol = rank_tolerance(n, u, max_col_norm);
    let svd = m.clone().svd(true, true);
    let rank = svd.rank(tol);
    let coef = svd
        .solve(target, tol)
        .map_err(|e| Error::Numerical(format!("svd solve failed: {e}")))?;
    let fitted = &m * &coef;
    let rss = (target - &fitted).norm_squared();
    Ok(SubmodelFit {
        coef,
        fitted,
        rss,
        rank,
    })
}

/// Residual sum of squares only; skips coefficient and fitted-value recovery.
pub fn rss_only(z: &DMatrix<f64>, model: &ModelIndex, target: &DVector<f64>) -> Result<f64> {
    validate(z, model, target)?;
    let n = z.nrows();
    let u = model.len();
    if u == 0 {
        return Ok(target.norm_squared());
    }
    let m = gather_columns(z, model);
    let max_col_norm = (0..u).map(|j| m.column(j).norm()).fold(0.0, f64::max);
    if max_col_norm == 0.0 {
        return Ok(target.norm_squared());
    }
    let tol = rank_tolerance(n, u, max_col_norm);
    let qr = ColPivQR::new(m);
    let r = qr.r();
    let rdim = r.nrows().min(r.ncols());
    let rank = (0..rdim).take_while(|&i| r[(i, i)].abs() > tol).count();
    let mut c = target.clone();
    qr.q_tr_mul(&mut c);
    Ok(c.iter().skip(rank).map(|v| v * v).sum())
}
