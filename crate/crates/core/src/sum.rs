//! Compensated (Kahan–Neumaier) accumulation.

use std::ops::AddAssign;

/// Running sum with a Neumaier error term.
#[derive(Debug, Clone, Copy, Default)]
pub struct NeumaierSum {
    s: f64,
    c: f64,
}

impl NeumaierSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn sum(&self) -> f64 {
        self.s + self.c
    }
}

impl AddAssign<f64> for NeumaierSum {
    fn add_assign(&mut self, rhs: f64) {
        let t = self.s + rhs;
        if self.s.abs() >= rhs.abs() {
            self.c += (self.s - t) + rhs;
        } else {
            self.c += (rhs - t) + self.s;
        }
        self.s = t;
    }
}

impl FromIterator<f64> for NeumaierSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = NeumaierSum::new();
        for v in iter {
            acc += v;
        }
        acc
    }
}

/// Compensated sum of an iterator.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    iter.into_iter().collect::<NeumaierSum>().sum()
}
