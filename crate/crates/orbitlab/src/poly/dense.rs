//! Dense univariate polynomials over f64, ascending coefficient order.

/// Univariate polynomial; `coeffs[i]` multiplies `x^i`. No trailing zeros
/// except the zero polynomial, stored as an empty vec.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly {
    pub coeffs: Vec<f64>,
}

impl Poly {
    pub fn new(mut coeffs: Vec<f64>) -> Self {
        while coeffs.last().is_some_and(|&c| c == 0.0) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn zero() -> Self {
        Poly { coeffs: Vec::new() }
    }

    pub fn constant(c: f64) -> Self {
        Poly::new(vec![c])
    }

    /// The monomial x.
    pub fn x() -> Self {
        Poly {
            coeffs: vec![0.0, 1.0],
        }
    }

    pub fn monic_from_roots(roots: &[f64]) -> Self {
        let mut p = Poly::constant(1.0);
        for &r in roots {
            p = p.mul(&Poly::new(vec![-r, 1.0]));
        }
        p
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn coeff(&self, i: usize) -> f64 {
        self.coeffs.get(i).copied().unwrap_or(0.0)
    }

    pub fn eval(&self, x: f64) -> f64 {
        let mut acc = 0.0;
        for &c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn derivative(&self) -> Poly {
        if self.coeffs.len() <= 1 {
            return Poly::zero();
        }
        Poly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * i as f64)
                .collect(),
        )
    }

    /// k-th derivative.
    pub fn derivative_n(&self, k: usize) -> Poly {
        let mut p = self.clone();
        for _ in 0..k {
            p = p.derivative();
        }
        p
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut out = vec![0.0; n];
        for (i, &c) in self.coeffs.iter().enumerate() {
            out[i] += c;
        }
        for (i, &c) in other.coeffs.iter().enumerate() {
            out[i] += c;
        }
        Poly::new(out)
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        self.add(&other.scale(-1.0))
    }

    pub fn scale(&self, s: f64) -> Poly {
        Poly::new(self.coeffs.iter().map(|c| c * s).collect())
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![0.0; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly::new(out)
    }

    /// self(inner(x)) by Horner.
    pub fn compose(&self, inner: &Poly) -> Poly {
        let mut acc = Poly::zero();
        for &c in self.coeffs.iter().rev() {
            acc = acc.mul(inner);
            if acc.coeffs.is_empty() {
                acc.coeffs.push(c);
            } else {
                acc.coeffs[0] += c;
            }
        }
        Poly::new(acc.coeffs)
    }

    pub fn pow(&self, n: usize) -> Poly {
        let mut acc = Poly::constant(1.0);
        for _ in 0..n {
            acc = acc.mul(self);
        }
        acc
    }

    /// Radius beyond which every orbit of `x -> self(x)` escapes, so all
    /// periodic points lie inside. Requires degree >= 2.
    pub fn escape_radius(&self) -> f64 {
        let d = self.degree();
        assert!(d >= 2);
        let lead = self.coeffs[d].abs();
        let rest: f64 = self.coeffs[..d].iter().map(|c| c.abs()).sum();
        // |q(x)| >= |lead| R^d - rest R^(d-1) > R for R at this bound.
        let r = ((rest + 1.0) / lead + 1.0).max(2.0);
        r
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eval_and_derivative() {
        let p = Poly::new(vec![2.0, 0.0, -1.0]); // 2 - x^2
        assert_eq!(p.eval(3.0), -7.0);
        assert_eq!(p.derivative().coeffs, vec![0.0, -2.0]);
    }

    #[test]
    fn compose_iterate() {
        let q = Poly::new(vec![-2.0, 0.0, 1.0]);
        let qq = q.compose(&q);
        assert_eq!(qq.coeffs, vec![2.0, 0.0, -4.0, 0.0, 1.0]);
    }

    #[test]
    fn from_roots() {
        let p = Poly::monic_from_roots(&[1.0, -2.0]);
        assert_eq!(p.coeffs, vec![-2.0, 1.0, 1.0]);
    }
}
