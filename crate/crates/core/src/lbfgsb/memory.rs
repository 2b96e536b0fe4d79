//! Compact limited-memory BFGS matrix `B = θI − W M Wᵀ` with `W = [Y, θS]`.

use std::collections::VecDeque;

use nalgebra::{DMatrix, DVector};

#[derive(Debug, Clone)]
pub(crate) struct LimitedMemory {
    capacity: usize,
    s: VecDeque<DVector<f64>>,
    y: VecDeque<DVector<f64>>,
    theta: f64,
    w: DMatrix<f64>,
    mid: DMatrix<f64>,
}

impl LimitedMemory {
    pub(crate) fn new(capacity: usize, n: usize) -> Self {
        Self {
            capacity,
            s: VecDeque::with_capacity(capacity),
            y: VecDeque::with_capacity(capacity),
            theta: 1.0,
            w: DMatrix::zeros(n, 0),
            mid: DMatrix::zeros(0, 0),
        }
    }

    #[cfg(test)]
    pub(crate) fn len(&self) -> usize {
        self.s.len()
    }

    pub(crate) fn is_empty(&self) -> bool {
        self.s.is_empty()
    }

    pub(crate) fn theta(&self) -> f64 {
        self.theta
    }

    /// `n × 2k`
    pub(crate) fn w(&self) -> &DMatrix<f64> {
        &self.w
    }

    /// `2k × 2k`
    pub(crate) fn mid(&self) -> &DMatrix<f64> {
        &self.mid
    }

    pub(crate) fn clear(&mut self) {
        self.s.clear();
        self.y.clear();
        self.theta = 1.0;
        self.w = DMatrix::zeros(self.w.nrows(), 0);
        self.mid = DMatrix::zeros(0, 0);
    }

    /// Stores the pair when the curvature `sᵀy` is safely positive.
    pub(crate) fn push(&mut self, s: DVector<f64>, y: DVector<f64>) -> bool {
        let sy = s.dot(&y);
        let yy = y.dot(&y);
        if !(sy > f64::EPSILON * yy) || !sy.is_finite() {
            return false;
        }
        if self.s.len() == self.capacity {
            self.s.pop_front();
            self.y.pop_front();
        }
        self.theta = yy / sy;
        self.s.push_back(s);
        self.y.push_back(y);
        if !self.rebuild() {
            // keep the newest pair only if the middle matrix went singular
            let (s, y) = (self.s.pop_back().unwrap(), self.y.pop_back().unwrap());
            self.s.clear();
            self.y.clear();
            self.s.push_back(s);
            self.y.push_back(y);
            self.rebuild();
        }
        true
    }

    fn rebuild(&mut self) -> bool {
        let k = self.s.len();
        let n = self.w.nrows();
        let theta = self.theta;
        let mut w = DMatrix::zeros(n, 2 * k);
        for j in 0..k {
            w.column_mut(j).copy_from(&self.y[j]);
            w.column_mut(k + j).copy_from(&(&self.s[j] * theta));
        }
        let mut inv = DMatrix::zeros(2 * k, 2 * k);
        for i in 0..k {
            for j in 0..k {
                let sy = self.s[i].dot(&self.y[j]);
                if i == j {
                    inv[(i, i)] = -sy;
                } else if i > j {
                    // L (strictly lower part of SᵀY) and its transpose
                    inv[(k + i, j)] = sy;
                    inv[(j, k + i)] = sy;
                }
                inv[(k + i, k + j)] = theta * self.s[i].dot(&self.s[j]);
            }
        }
        match inv.lu().try_inverse() {
            Some(mid) if mid.iter().all(|v| v.is_finite()) => {
                self.w = w;
                self.mid = mid;
                true
            }
            _ => false,
        }
    }

    /// `B v`
    #[cfg(test)]
    pub(crate) fn apply(&self, v: &DVector<f64>) -> DVector<f64> {
        let mut out = v * self.theta;
        if !self.is_empty() {
            out -= &self.w * (&self.mid * (self.w.transpose() * v));
        }
        out
    }
}
