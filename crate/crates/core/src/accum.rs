//! Compensated accumulators.
//!
//! Long chains average hundreds of thousands of terms; Neumaier summation
//! keeps those averages reproducible to ~1e-15 regardless of how the terms
//! are grouped, which the determinism contracts rely on.

/// Neumaier (improved Kahan) scalar accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct Accumulator {
    sum: f64,
    comp: f64,
}

impl Accumulator {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Dense vector of compensated accumulators.
#[derive(Debug, Clone)]
pub struct VecAccumulator {
    cells: Vec<Accumulator>,
}

impl VecAccumulator {
    pub fn zeros(len: usize) -> Self {
        Self {
            cells: vec![Accumulator::default(); len],
        }
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    #[inline]
    pub fn add_at(&mut self, idx: usize, x: f64) {
        self.cells[idx].add(x);
    }

    pub fn values(&self) -> Vec<f64> {
        self.cells.iter().map(Accumulator::value).collect()
    }
}
