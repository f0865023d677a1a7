//! Incremental least squares under one-column model swaps.
//!
//! The state keeps the Gram matrix and Cholesky factor of the current model's
//! columns. Swapping one column costs O(n u) for the new column's dot
//! products plus O(u^2) factor updates (Givens removal, bordered insertion),
//! against O(n u^2) for a fresh factorization. Gram and cross-product entries
//! are exact dot products computed once, so only the factor can drift; a
//! condition guard and periodic refresh bound that drift, and every candidate
//! that fails the guard is priced by a fresh rank-aware solve instead.

use super::chol::{back_solve_transposed, diag_ratio, factor_lower, forward_solve};
use super::dataset::ModelIndex;
use super::solve::{fit_submodel, rss_only};
use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};

/// Diagonal-ratio guard on the factor; past this the incremental path is
/// abandoned in favor of fresh solves until conditioning recovers.
pub const CONDITION_GUARD: f64 = 1e8;

#[derive(Debug, Clone)]
struct Pending {
    drop_slot: usize,
    add_col: usize,
    identity: bool,
    fast: bool,
    rss: f64,
    /// Dots of the incoming column with the kept columns (kept order), last
    /// entry the incoming column's squared norm.
    gram_col: Vec<f64>,
    cross_new: f64,
}

/// Incremental fit of a fixed-size model, supporting one-column swaps.
#[derive(Debug, Clone)]
pub struct SwapState {
    model: ModelIndex,
    /// Internal slot -> column of z. Swaps append at the end, so this order
    /// differs from the canonical sorted model.
    order: Vec<usize>,
    gram: DMatrix<f64>,
    cross: Vec<f64>,
    target_sq: f64,
    chol: DMatrix<f64>,
    /// Whether `chol` currently factors `gram` within the condition guard.
    fast: bool,
    rss: f64,
    swaps: u64,
    fallbacks: u64,
    pending: Option<Pending>,
    cand_chol: DMatrix<f64>,
    solve_buf: Vec<f64>,
}

impl SwapState {
    pub fn new(z: &DMatrix<f64>, target: &DVector<f64>, model: ModelIndex) -> Result<Self> {
        model.validate_for(z.ncols())?;
        if model.is_empty() {
            return Err(Error::InvalidModel("swap state needs a non-empty model".into()));
        }
        if z.nrows() != target.len() {
            return Err(Error::Dimension(format!(
                "target has {} rows but z has {}",
                target.len(),
                z.nrows()
            )));
        }
        let u = model.len();
        let order: Vec<usize> = model.as_slice().to_vec();
        let mut gram = DMatrix::zeros(u, u);
        for i in 0..u {
            for j in 0..=i {
                let d = z.column(order[i]).dot(&z.column(order[j]));
                gram[(i, j)] = d;
                gram[(j, i)] = d;
            }
        }
        let cross: Vec<f64> = order.iter().map(|&c| z.column(c).dot(target)).collect();
        let mut state = Self {
            model,
            order,
            gram,
            cross,
            target_sq: target.norm_squared(),
            chol: DMatrix::zeros(u, u),
            fast: false,
            rss: 0.0,
            swaps: 0,
            fallbacks: 0,
            pending: None,
            cand_chol: DMatrix::zeros(u, u),
            solve_buf: vec![0.0; u],
        };
        state.refresh(z, target)?;
        Ok(state)
    }

    pub fn model(&self) -> &ModelIndex {
        &self.model
    }

    pub fn rss(&self) -> f64 {
        self.rss
    }

    /// True while the incremental Cholesky factor is trusted.
    pub fn is_fast(&self) -> bool {
        self.fast
    }

    /// Number of committed swaps.
    pub fn swaps(&self) -> u64 {
        self.swaps
    }

    /// Number of times the incremental factor had to be abandoned.
    pub fn fallbacks(&self) -> u64 {
        self.fallbacks
    }

    pub(crate) fn order(&self) -> &[usize] {
        &self.order
    }

    fn model_size(&self) -> usize {
        self.order.len()
    }

    fn rss_from_factor(&mut self) -> f64 {
        let u = self.model_size();
        self.solve_buf.copy_from_slice(&self.cross);
        forward_solve(&self.chol, &mut self.solve_buf, u);
        let explained: f64 = self.solve_buf[..u].iter().map(|w| w * w).sum();
        (self.target_sq - explained).max(0.0)
    }

    /// Rebuilds the factor from the (exact) Gram entries and recomputes rss.
    pub fn refresh(&mut self, z: &DMatrix<f64>, target: &DVector<f64>) -> Result<()> {
        let u = self.model_size();
        self.chol.copy_from(&self.gram);
        if factor_lower(&mut self.chol, u) && diag_ratio(&self.chol, u) <= CONDITION_GUARD {
            self.fast = true;
            self.rss = self.rss_from_factor();
        } else {
            self.fast = false;
            self.fallbacks += 1;
            self.rss = rss_only(z, &self.model, target)?;
        }
        Ok(())
    }

    /// Compares the running rss against a fresh rank-aware solve and returns
    /// the relative deviation.
    pub fn audit(&self, z: &DMatrix<f64>, target: &DVector<f64>) -> Result<f64> {
        let fresh = rss_only(z, &self.model, target)?;
        let denom = fresh.max(self.target_sq * 1e-12).max(f64::MIN_POSITIVE);
        Ok((self.rss - fresh).abs() / denom)
    }

    /// Evaluates the swap `drop_slot -> add_col` without committing it,
    /// returning the candidate rss. `drop_slot` indexes the internal order.
    pub(crate) fn propose_slot(
        &mut self,
        z: &DMatrix<f64>,
        target: &DVector<f64>,
        drop_slot: usize,
        add_col: usize,
    ) -> Result<f64> {
        let u = self.model_size();
        if drop_slot >= u {
            return Err(Error::InvalidModel(format!(
                "drop slot {drop_slot} out of range for model size {u}"
            )));
        }
        if add_col >= z.ncols() {
            return Err(Error::InvalidModel(format!(
                "column index {add_col} out of range for {} columns",
                z.ncols()
            )));
        }
        let drop_col = self.order[drop_slot];
        if add_col == drop_col {
            self.pending = Some(Pending {
                drop_slot,
                add_col,
                identity: true,
                fast: self.fast,
                rss: self.rss,
                gram_col: Vec::new(),
                cross_new: 0.0,
            });
            return Ok(self.rss);
        }
        if self.model.contains(add_col) {
            return Err(Error::InvalidModel(format!(
                "cannot add column {add_col}: already in model"
            )));
        }

        let zadd = z.column(add_col);
        let mut gram_col = vec![0.0; u];
        let mut ki = 0;
        for (slot, &col) in self.order.iter().enumerate() {
            if slot == drop_slot {
                continue;
            }
            gram_col[ki] = z.column(col).dot(&zadd);
            ki += 1;
        }
        let gaa = zadd.norm_squared();
        gram_col[u - 1] = gaa;
        let cross_new = zadd.dot(target);

        let mut fast = false;
        let mut cand_rss = 0.0;
        if self.fast {
            // Remove the dropped row from the factor, re-triangularize with
            // Givens rotations, then border with the incoming column.
            for col in 0..u {
                for row in 0..drop_slot {
                    self.cand_chol[(row, col)] = self.chol[(row, col)];
                }
                for row in (drop_slot + 1)..u {
                    self.cand_chol[(row - 1, col)] = self.chol[(row, col)];
                }
            }
            let active = u - 1;
            for k in drop_slot..active {
                let x = self.cand_chol[(k, k)];
                let y = self.cand_chol[(k, k + 1)];
                if y != 0.0 {
                    let r = x.hypot(y);
                    let (c, s) = (x / r, y / r);
                    for i in (k + 1)..active {
                        let a = self.cand_chol[(i, k)];
                        let b = self.cand_chol[(i, k + 1)];
                        self.cand_chol[(i, k)] = c * a + s * b;
                        self.cand_chol[(i, k + 1)] = -s * a + c * b;
                    }
                    self.cand_chol[(k, k)] = r;
                    self.cand_chol[(k, k + 1)] = 0.0;
                }
            }
            self.solve_buf[..active].copy_from_slice(&gram_col[..active]);
            forward_solve(&self.cand_chol, &mut self.solve_buf, active);
            let w_sq: f64 = self.solve_buf[..active].iter().map(|w| w * w).sum();
            let d_sq = gaa - w_sq;
            if d_sq > 0.0 {
                for j in 0..active {
                    self.cand_chol[(active, j)] = self.solve_buf[j];
                    self.cand_chol[(j, active)] = 0.0;
                }
                self.cand_chol[(active, active)] = d_sq.sqrt();
                if diag_ratio(&self.cand_chol, u) <= CONDITION_GUARD {
                    fast = true;
                    let mut ki = 0;
                    for (slot, &c) in self.cross.iter().enumerate() {
                        if slot == drop_slot {
                            continue;
                        }
                        self.solve_buf[ki] = c;
                        ki += 1;
                    }
                    self.solve_buf[u - 1] = cross_new;
                    forward_solve(&self.cand_chol, &mut self.solve_buf, u);
                    let explained: f64 = self.solve_buf[..u].iter().map(|w| w * w).sum();
                    cand_rss = (self.target_sq - explained).max(0.0);
                }
            }
        }
        if !fast {
            let cand_model = self.model.swap_one(drop_col, add_col)?;
            cand_rss = rss_only(z, &cand_model, target)?;
        }

        self.pending = Some(Pending {
            drop_slot,
            add_col,
            identity: false,
            fast,
            rss: cand_rss,
            gram_col,
            cross_new,
        });
        Ok(cand_rss)
    }

    /// Commits the swap evaluated by the last [`Self::propose_slot`].
    pub(crate) fn commit(&mut self, z: &DMatrix<f64>, target: &DVector<f64>) -> Result<()> {
        let pending = self
            .pending
            .take()
            .ok_or_else(|| Error::InvalidModel("commit without a proposed swap".into()))?;
        if pending.identity {
            return Ok(());
        }
        let u = self.model_size();
        let (slot, add) = (pending.drop_slot, pending.add_col);
        let drop_col = self.order[slot];

        self.model = self.model.swap_one(drop_col, add)?;
        self.order.remove(slot);
        self.order.push(add);

        // Shift the dropped row/column out of the Gram block, then border it
        // with the incoming column's dots.
        for col in (slot + 1)..u {
            for row in 0..u {
                self.gram[(row, col - 1)] = self.gram[(row, col)];
            }
        }
        for row in (slot + 1)..u {
            for col in 0..u {
                self.gram[(row - 1, col)] = self.gram[(row, col)];
            }
        }
        for i in 0..(u - 1) {
            self.gram[(i, u - 1)] = pending.gram_col[i];
            self.gram[(u - 1, i)] = pending.gram_col[i];
        }
        self.gram[(u - 1, u - 1)] = pending.gram_col[u - 1];
        self.cross.remove(slot);
        self.cross.push(pending.cross_new);

        self.swaps += 1;
        if pending.fast {
            std::mem::swap(&mut self.chol, &mut self.cand_chol);
            self.fast = true;
            self.rss = pending.rss;
        } else {
            // Try to recover a trustworthy factor from the exact Gram block.
            self.fallbacks += 1;
            self.chol.copy_from(&self.gram);
            if factor_lower(&mut self.chol, u) && diag_ratio(&self.chol, u) <= CONDITION_GUARD {
                self.fast = true;
                self.rss = self.rss_from_factor();
            } else {
                self.fast = false;
                self.rss = pending.rss;
            }
        }
        Ok(())
    }

    /// Pure swap: returns the updated state and its rss, leaving `self`
    /// untouched. `drop_col` must be in the model; `drop_col == add_col` is a
    /// no-op returning a copy.
    pub fn swap(
        &self,
        z: &DMatrix<f64>,
        target: &DVector<f64>,
        drop_col: usize,
        add_col: usize,
    ) -> Result<(SwapState, f64)> {
        let slot = self
            .order
            .iter()
            .position(|&c| c == drop_col)
            .ok_or_else(|| Error::InvalidModel(format!("cannot drop column {drop_col}: not in model")))?;
        let mut next = self.clone();
        let rss = next.propose_slot(z, target, slot, add_col)?;
        next.commit(z, target)?;
        Ok((next, rss))
    }

    /// Coefficients in canonical model order.
    pub fn coefficients(&self, z: &DMatrix<f64>, target: &DVector<f64>) -> Result<DVector<f64>> {
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        self.coef_cols_vals(z, target, &mut cols, &mut vals)?;
        let mut pairs: Vec<(usize, f64)> = cols.into_iter().zip(vals).collect();
        pairs.sort_unstable_by_key(|&(c, _)| c);
        Ok(DVector::from_iterator(pairs.len(), pairs.into_iter().map(|(_, v)| v)))
    }

    /// Coefficients as (column, value) pairs; order unspecified.
    pub(crate) fn coef_cols_vals(
        &self,
        z: &DMatrix<f64>,
        target: &DVector<f64>,
        cols: &mut Vec<usize>,
        vals: &mut Vec<f64>,
    ) -> Result<()> {
        cols.clear();
        vals.clear();
        let u = self.model_size();
        if self.fast {
            let mut buf = self.cross.clone();
            forward_solve(&self.chol, &mut buf, u);
            back_solve_transposed(&self.chol, &mut buf, u);
            cols.extend_from_slice(&self.order);
            vals.extend_from_slice(&buf[..u]);
        } else {
            let fit = fit_submodel(z, &self.model, target)?;
            cols.extend(self.model.iter());
            vals.extend(fit.coef.iter().copied());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::rng_from;
    use rand::Rng;
    use rand_distr::StandardNormal;

    fn random_design(seed: u64, n: usize, p: usize) -> (DMatrix<f64>, DVector<f64>) {
        let mut rng = rng_from(seed, &[0x50a9]);
        let z = DMatrix::from_fn(n, p, |_, _| rng.sample::<f64, _>(StandardNormal));
        let t = DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
        (z, t)
    }

    #[test]
    fn long_random_swap_chain_tracks_fresh_solves() {
        let (z, t) = random_design(11, 50, 40);
        let mut rng = rng_from(11, &[0x51]);
        let mut state =
            SwapState::new(&z, &t, ModelIndex::new(vec![0, 1, 2, 3, 4]).unwrap()).unwrap();
        for step in 0..1000 {
            let slot = rng.gen_range(0..5);
            let add = loop {
                let c = rng.gen_range(0..40);
                if !state.model().contains(c) {
                    break c;
                }
            };
            let rss = state.propose_slot(&z, &t, slot, add).unwrap();
            state.commit(&z, &t).unwrap();
            let fresh = rss_only(&z, state.model(), &t).unwrap();
            assert!(
                (rss - fresh).abs() <= 1e-8 * fresh.max(1.0),
                "step {step}: incremental {rss} vs fresh {fresh}"
            );
        }
        assert_eq!(state.swaps(), 1000);
    }

    #[test]
    fn identity_swap_changes_nothing() {
        let (z, t) = random_design(12, 30, 10);
        let state = SwapState::new(&z, &t, ModelIndex::new(vec![1, 5, 7]).unwrap()).unwrap();
        let before = state.rss();
        let (next, rss) = state.swap(&z, &t, 5, 5).unwrap();
        assert_eq!(rss, before);
        assert_eq!(next.model(), state.model());
        assert_eq!(next.swaps(), 0);
    }

    #[test]
    fn invalid_swaps_are_rejected() {
        let (z, t) = random_design(13, 30, 10);
        let state = SwapState::new(&z, &t, ModelIndex::new(vec![1, 5, 7]).unwrap()).unwrap();
        assert!(state.swap(&z, &t, 2, 3).is_err(), "drop not in model");
        assert!(state.swap(&z, &t, 1, 7).is_err(), "add already in model");
        assert!(state.swap(&z, &t, 1, 10).is_err(), "add out of range");
    }

    #[test]
    fn coefficients_match_batch_fit_after_swaps() {
        let (z, t) = random_design(14, 40, 20);
        let mut state = SwapState::new(&z, &t, ModelIndex::new(vec![0, 1, 2, 3]).unwrap()).unwrap();
        let mut rng = rng_from(14, &[0x52]);
        for _ in 0..200 {
            let slot = rng.gen_range(0..4);
            let add = loop {
                let c = rng.gen_range(0..20);
                if !state.model().contains(c) {
                    break c;
                }
            };
            state.propose_slot(&z, &t, slot, add).unwrap();
            state.commit(&z, &t).unwrap();
        }
        let coef = state.coefficients(&z, &t).unwrap();
        let batch = fit_submodel(&z, state.model(), &t).unwrap();
        assert!((&coef - &batch.coef).norm() <= 1e-8 * batch.coef.norm().max(1.0));
    }

    #[test]
    fn collinear_add_falls_back_and_recovers() {
        let (mut z, t) = random_design(15, 30, 8);
        // Column 7 duplicates column 0: adding it alongside 0 is singular.
        let dup = z.column(0).clone_owned();
        z.column_mut(7).copy_from(&dup);
        let mut state = SwapState::new(&z, &t, ModelIndex::new(vec![0, 1, 2]).unwrap()).unwrap();
        assert!(state.is_fast());

        let rss = state.propose_slot(&z, &t, 1, 7).unwrap();
        state.commit(&z, &t).unwrap();
        assert!(!state.is_fast(), "duplicate column must defeat the factor");
        assert!(state.fallbacks() > 0);
        let fresh = rss_only(&z, state.model(), &t).unwrap();
        assert!((rss - fresh).abs() <= 1e-8 * fresh.max(1.0));
        // Coefficients still well defined (minimum-norm through the fallback).
        let coef = state.coefficients(&z, &t).unwrap();
        assert_eq!(coef.len(), 3);

        // Swapping the duplicate away restores the fast path.
        let slot = state.order().iter().position(|&c| c == 7).unwrap();
        state.propose_slot(&z, &t, slot, 5).unwrap();
        state.commit(&z, &t).unwrap();
        assert!(state.is_fast());
        let fresh = rss_only(&z, state.model(), &t).unwrap();
        assert!((state.rss() - fresh).abs() <= 1e-8 * fresh.max(1.0));
    }

    #[test]
    fn audit_reports_small_deviation_on_healthy_chains() {
        let (z, t) = random_design(16, 60, 30);
        let mut state =
            SwapState::new(&z, &t, ModelIndex::new((0..6).collect()).unwrap()).unwrap();
        let mut rng = rng_from(16, &[0x53]);
        for _ in 0..500 {
            let slot = rng.gen_range(0..6);
            let add = loop {
                let c = rng.gen_range(0..30);
                if !state.model().contains(c) {
                    break c;
                }
            };
            state.propose_slot(&z, &t, slot, add).unwrap();
            state.commit(&z, &t).unwrap();
        }
        assert!(state.audit(&z, &t).unwrap() <= 1e-8);
    }
}
