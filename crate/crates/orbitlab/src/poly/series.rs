//! Truncated Taylor series in one variable (f64 coefficients).
//!
//! Fixed truncation order; arithmetic drops everything above it. Used for
//! center-manifold jets and the formal exponential behind the zeta
//! partial sums.

#[derive(Debug, Clone, PartialEq)]
pub struct Taylor {
    /// coeffs[i] multiplies u^i; length is order + 1.
    pub coeffs: Vec<f64>,
}

impl Taylor {
    pub fn zero(order: usize) -> Self {
        Taylor {
            coeffs: vec![0.0; order + 1],
        }
    }

    pub fn constant(c: f64, order: usize) -> Self {
        let mut t = Taylor::zero(order);
        t.coeffs[0] = c;
        t
    }

    pub fn identity(order: usize) -> Self {
        let mut t = Taylor::zero(order);
        if order >= 1 {
            t.coeffs[1] = 1.0;
        }
        t
    }

    pub fn from_coeffs(coeffs: Vec<f64>, order: usize) -> Self {
        let mut c = coeffs;
        c.resize(order + 1, 0.0);
        Taylor { coeffs: c }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn add(&self, other: &Taylor) -> Taylor {
        let mut out = self.clone();
        for (a, b) in out.coeffs.iter_mut().zip(&other.coeffs) {
            *a += b;
        }
        out
    }

    pub fn sub(&self, other: &Taylor) -> Taylor {
        let mut out = self.clone();
        for (a, b) in out.coeffs.iter_mut().zip(&other.coeffs) {
            *a -= b;
        }
        out
    }

    pub fn scale(&self, s: f64) -> Taylor {
        Taylor {
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    pub fn mul(&self, other: &Taylor) -> Taylor {
        let order = self.order();
        let mut out = Taylor::zero(order);
        for i in 0..=order {
            if self.coeffs[i] == 0.0 {
                continue;
            }
            for j in 0..=order - i {
                out.coeffs[i + j] += self.coeffs[i] * other.coeffs[j];
            }
        }
        out
    }

    /// self(inner(u)) truncated; requires inner to have zero constant term
    /// (composition at a fixed point).
    pub fn compose(&self, inner: &Taylor) -> Taylor {
        assert!(
            inner.coeffs[0] == 0.0,
            "Taylor composition requires vanishing constant term"
        );
        let order = self.order();
        let mut acc = Taylor::zero(order);
        for &c in self.coeffs.iter().rev() {
            acc = acc.mul(inner);
            acc.coeffs[0] += c;
        }
        acc
    }

    pub fn pow(&self, n: usize) -> Taylor {
        let mut acc = Taylor::constant(1.0, self.order());
        for _ in 0..n {
            acc = acc.mul(self);
        }
        acc
    }
}

/// Coefficients of exp(a) for a formal power series `a` with zero
/// constant term, through the same truncation order.
///
/// Uses the standard recurrence b_n = (1/n) sum_{j=1..n} j a_j b_{n-j}.
pub fn exp_series(a: &[f64]) -> Vec<f64> {
    assert!(a.is_empty() || a[0] == 0.0, "exp of series needs a_0 = 0");
    let n = a.len();
    let mut b = vec![0.0; n];
    if n == 0 {
        return b;
    }
    b[0] = 1.0;
    for m in 1..n {
        let mut acc = 0.0;
        for j in 1..=m {
            acc += j as f64 * a[j] * b[m - j];
        }
        b[m] = acc / m as f64;
    }
    b
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exp_of_z_matches_factorials() {
        let a = vec![0.0, 1.0, 0.0, 0.0];
        let b = exp_series(&a);
        assert!((b[0] - 1.0).abs() < 1e-15);
        assert!((b[1] - 1.0).abs() < 1e-15);
        assert!((b[2] - 0.5).abs() < 1e-15);
        assert!((b[3] - 1.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn exp_of_geometric_log() {
        // sum (2z)^n / n = -log(1 - 2z), so exp gives 1/(1-2z).
        let t = 10;
        let mut a = vec![0.0; t + 1];
        for n in 1..=t {
            a[n] = 2.0f64.powi(n as i32) / n as f64;
        }
        let b = exp_series(&a);
        for n in 0..=t {
            let expect = 2.0f64.powi(n as i32);
            assert!((b[n] - expect).abs() / expect < 1e-12, "n = {n}");
        }
    }

    #[test]
    fn taylor_compose() {
        // f(u) = 1 + u^2, g(u) = u + u^2 => f(g) = 1 + u^2 + 2u^3 + u^4
        let f = Taylor::from_coeffs(vec![1.0, 0.0, 1.0], 4);
        let g = Taylor::from_coeffs(vec![0.0, 1.0, 1.0], 4);
        let h = f.compose(&g);
        assert_eq!(h.coeffs, vec![1.0, 0.0, 1.0, 2.0, 1.0]);
    }
}
