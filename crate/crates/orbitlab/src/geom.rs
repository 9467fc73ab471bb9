//! Planar points, 2x2 matrices, closed intervals, and a small dense solver.

use serde::Serialize;

use crate::error::{Error, Result};

/// A point in one of the normal-coordinate charts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PlanarPoint {
    pub x: f64,
    pub y: f64,
}

impl PlanarPoint {
    pub fn new(x: f64, y: f64) -> Self {
        PlanarPoint { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn dist(&self, other: &PlanarPoint) -> f64 {
        ((self.x - other.x).powi(2) + (self.y - other.y).powi(2)).sqrt()
    }
}

/// Row-major 2x2 real matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Mat2 {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl Mat2 {
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Self {
        Mat2 { a, b, c, d }
    }

    pub fn identity() -> Self {
        Mat2::new(1.0, 0.0, 0.0, 1.0)
    }

    pub fn diag(a: f64, d: f64) -> Self {
        Mat2::new(a, 0.0, 0.0, d)
    }

    pub fn mul(&self, o: &Mat2) -> Mat2 {
        Mat2::new(
            self.a * o.a + self.b * o.c,
            self.a * o.b + self.b * o.d,
            self.c * o.a + self.d * o.c,
            self.c * o.b + self.d * o.d,
        )
    }

    pub fn apply(&self, p: PlanarPoint) -> PlanarPoint {
        PlanarPoint::new(self.a * p.x + self.b * p.y, self.c * p.x + self.d * p.y)
    }

    pub fn det(&self) -> f64 {
        self.a * self.d - self.b * self.c
    }

    pub fn trace(&self) -> f64 {
        self.a + self.d
    }

    /// Eigenvalues as complex pairs (re, im).
    pub fn eigenvalues(&self) -> [(f64, f64); 2] {
        let t = self.trace();
        let disc = t * t - 4.0 * self.det();
        if disc >= 0.0 {
            let s = disc.sqrt();
            [((t + s) / 2.0, 0.0), ((t - s) / 2.0, 0.0)]
        } else {
            let s = (-disc).sqrt() / 2.0;
            [(t / 2.0, s), (t / 2.0, -s)]
        }
    }

    /// Eigenvalue moduli, descending.
    pub fn eigenvalue_moduli(&self) -> [f64; 2] {
        let [l1, l2] = self.eigenvalues();
        let m1 = (l1.0 * l1.0 + l1.1 * l1.1).sqrt();
        let m2 = (l2.0 * l2.0 + l2.1 * l2.1).sqrt();
        if m1 >= m2 {
            [m1, m2]
        } else {
            [m2, m1]
        }
    }

    /// Solve self * v = rhs.
    pub fn solve(&self, rhs: PlanarPoint) -> Result<PlanarPoint> {
        let det = self.det();
        if det.abs() < 1e-300 {
            return Err(Error::invalid("singular 2x2 system"));
        }
        Ok(PlanarPoint::new(
            (rhs.x * self.d - rhs.y * self.b) / det,
            (self.a * rhs.y - self.c * rhs.x) / det,
        ))
    }

    /// A real eigenvector for a real eigenvalue, unnormalized.
    pub fn eigenvector(&self, lambda: f64) -> (f64, f64) {
        // (a - l) v0 + b v1 = 0
        let r1 = (self.a - lambda, self.b);
        let r2 = (self.c, self.d - lambda);
        let (p, q) = if r1.0.abs() + r1.1.abs() >= r2.0.abs() + r2.1.abs() {
            r1
        } else {
            r2
        };
        if p.abs() > q.abs() {
            (-q / p, 1.0)
        } else if q.abs() > 0.0 {
            (1.0, -p / q)
        } else {
            (1.0, 0.0)
        }
    }
}

/// Closed interval [lo, hi] used by the horseshoe crossing test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        assert!(lo <= hi, "interval bounds out of order");
        Interval { lo, hi }
    }

    pub fn point(v: f64) -> Self {
        Interval { lo: v, hi: v }
    }

    pub fn centered(center: f64, half_width: f64) -> Self {
        Interval::new(center - half_width, center + half_width)
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, v: f64) -> bool {
        self.lo <= v && v <= self.hi
    }

    pub fn add(&self, o: &Interval) -> Interval {
        Interval::new(self.lo + o.lo, self.hi + o.hi)
    }

    pub fn scale(&self, s: f64) -> Interval {
        if s >= 0.0 {
            Interval::new(self.lo * s, self.hi * s)
        } else {
            Interval::new(self.hi * s, self.lo * s)
        }
    }

    pub fn mul(&self, o: &Interval) -> Interval {
        let cands = [
            self.lo * o.lo,
            self.lo * o.hi,
            self.hi * o.lo,
            self.hi * o.hi,
        ];
        Interval::new(
            cands.iter().cloned().fold(f64::INFINITY, f64::min),
            cands.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        )
    }

    /// Integer power by repeated interval multiplication.
    pub fn powi(&self, n: usize) -> Interval {
        let mut acc = Interval::point(1.0);
        for _ in 0..n {
            acc = acc.mul(self);
        }
        acc
    }
}

/// In-place Gaussian elimination with partial pivoting for small systems.
pub fn solve_dense(a: &mut [Vec<f64>], b: &mut [f64]) -> Result<()> {
    let n = b.len();
    assert!(a.len() == n && a.iter().all(|row| row.len() == n));
    for col in 0..n {
        let mut pivot = col;
        for row in col + 1..n {
            if a[row][col].abs() > a[pivot][col].abs() {
                pivot = row;
            }
        }
        if a[pivot][col].abs() < 1e-300 {
            return Err(Error::invalid("singular linear system"));
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        let diag = a[col][col];
        for row in 0..n {
            if row == col {
                continue;
            }
            let factor = a[row][col] / diag;
            if factor == 0.0 {
                continue;
            }
            for k in col..n {
                let v = a[col][k];
                a[row][k] -= factor * v;
            }
            b[row] -= factor * b[col];
        }
    }
    for i in 0..n {
        b[i] /= a[i][i];
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigen_diag() {
        let m = Mat2::diag(0.5, 2.0);
        let [l1, l2] = m.eigenvalues();
        assert_eq!(l1, (2.0, 0.0));
        assert_eq!(l2, (0.5, 0.0));
    }

    #[test]
    fn solve_small() {
        let mut a = vec![vec![2.0, 1.0], vec![1.0, 3.0]];
        let mut b = vec![5.0, 10.0];
        solve_dense(&mut a, &mut b).unwrap();
        assert!((b[0] - 1.0).abs() < 1e-14);
        assert!((b[1] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn interval_mul_signs() {
        let a = Interval::new(-2.0, 3.0);
        let b = Interval::new(-1.0, 2.0);
        let c = a.mul(&b);
        assert_eq!(c.lo, -4.0);
        assert_eq!(c.hi, 6.0);
    }
}
