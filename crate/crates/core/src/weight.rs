//! Exact accumulation of edge weights.
//!
//! Weight bounds in this crate are checked as exact inequalities over the
//! real numbers represented by the `f64` edge weights. [`ExactSum`] keeps a
//! list of non-overlapping partial sums (Shewchuk's scheme), so the sign of
//! any signed combination of weights is computed without rounding error and
//! totals are correctly rounded and independent of summation order.

use std::cmp::Ordering;

#[derive(Debug, Clone, Default)]
pub struct ExactSum {
    partials: Vec<f64>,
}

impl ExactSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, value: f64) {
        let mut x = value;
        let mut kept = 0;
        for j in 0..self.partials.len() {
            let mut y = self.partials[j];
            if x.abs() < y.abs() {
                std::mem::swap(&mut x, &mut y);
            }
            let hi = x + y;
            let lo = y - (hi - x);
            if lo != 0.0 {
                self.partials[kept] = lo;
                kept += 1;
            }
            x = hi;
        }
        self.partials.truncate(kept);
        self.partials.push(x);
    }

    pub fn sub(&mut self, value: f64) {
        self.add(-value);
    }

    pub fn add_all(&mut self, values: impl IntoIterator<Item = f64>) {
        for v in values {
            self.add(v);
        }
    }

    pub fn sub_all(&mut self, values: impl IntoIterator<Item = f64>) {
        for v in values {
            self.sub(v);
        }
    }

    /// Correctly rounded value of the exact sum.
    pub fn value(&self) -> f64 {
        let p = &self.partials;
        let Some(&last) = p.last() else {
            return 0.0;
        };
        let mut idx = p.len() - 1;
        let mut hi = last;
        let mut lo = 0.0;
        while idx > 0 {
            let x = hi;
            idx -= 1;
            let y = p[idx];
            hi = x + y;
            let yr = hi - x;
            lo = y - yr;
            if lo != 0.0 {
                break;
            }
        }
        // Half-way case: round toward the side the remaining partials lie on.
        if idx > 0 && ((lo < 0.0 && p[idx - 1] < 0.0) || (lo > 0.0 && p[idx - 1] > 0.0)) {
            let y = lo * 2.0;
            let x = hi + y;
            let yr = x - hi;
            if y == yr {
                hi = x;
            }
        }
        hi
    }

    /// Sign of the exact sum.
    pub fn sign(&self) -> Ordering {
        self.value().partial_cmp(&0.0).unwrap_or(Ordering::Equal)
    }
}

/// Correctly rounded sum of `values`.
pub fn exact_total(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut acc = ExactSum::new();
    acc.add_all(values);
    acc.value()
}

/// Compares `Σ lhs` with `Σ rhs` exactly.
pub fn cmp_sums(
    lhs: impl IntoIterator<Item = f64>,
    rhs: impl IntoIterator<Item = f64>,
) -> Ordering {
    let mut acc = ExactSum::new();
    acc.add_all(lhs);
    acc.sub_all(rhs);
    acc.sign()
}

/// `Σ lhs <= Σ rhs`, exactly.
pub fn sum_le(lhs: impl IntoIterator<Item = f64>, rhs: impl IntoIterator<Item = f64>) -> bool {
    cmp_sums(lhs, rhs) != Ordering::Greater
}
