//! Dense bivariate polynomials over f64.
//!
//! Coefficient `c[i][j]` multiplies `x^i y^j`. Used for the remainder
//! polynomials of the global map and for jet composition.

use crate::poly::Poly;

#[derive(Debug, Clone, PartialEq)]
pub struct BiPoly {
    /// coeffs[i][j] is the coefficient of x^i y^j; rows may be ragged.
    pub coeffs: Vec<Vec<f64>>,
}

impl BiPoly {
    pub fn zero() -> Self {
        BiPoly { coeffs: Vec::new() }
    }

    pub fn from_terms(terms: &[(usize, usize, f64)]) -> Self {
        let mut p = BiPoly::zero();
        for &(i, j, v) in terms {
            p.set(i, j, v);
        }
        p
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs
            .iter()
            .all(|row| row.iter().all(|&c| c == 0.0))
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.coeffs
            .get(i)
            .and_then(|row| row.get(j))
            .copied()
            .unwrap_or(0.0)
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        while self.coeffs.len() <= i {
            self.coeffs.push(Vec::new());
        }
        let row = &mut self.coeffs[i];
        while row.len() <= j {
            row.push(0.0);
        }
        row[j] = v;
    }

    /// Iterate over nonzero terms as (i, j, coefficient).
    pub fn terms(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.coeffs.iter().enumerate().flat_map(|(i, row)| {
            row.iter()
                .enumerate()
                .filter(|(_, &c)| c != 0.0)
                .map(move |(j, &c)| (i, j, c))
        })
    }

    pub fn total_degree(&self) -> usize {
        self.terms().map(|(i, j, _)| i + j).max().unwrap_or(0)
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        // Horner in x with inner Horner in y.
        let mut acc = 0.0;
        for row in self.coeffs.iter().rev() {
            let mut inner = 0.0;
            for &c in row.iter().rev() {
                inner = inner * y + c;
            }
            acc = acc * x + inner;
        }
        acc
    }

    pub fn dx(&self) -> BiPoly {
        let mut out = BiPoly::zero();
        for (i, j, c) in self.terms() {
            if i >= 1 {
                out.set(i - 1, j, out.get(i - 1, j) + c * i as f64);
            }
        }
        out
    }

    pub fn dy(&self) -> BiPoly {
        let mut out = BiPoly::zero();
        for (i, j, c) in self.terms() {
            if j >= 1 {
                out.set(i, j - 1, out.get(i, j - 1) + c * j as f64);
            }
        }
        out
    }

    /// Substitute univariate polynomials for both variables:
    /// returns t -> self(fx(t), fy(t)).
    pub fn compose_univariate(&self, fx: &Poly, fy: &Poly) -> Poly {
        // Precompute powers lazily.
        let mut acc = Poly::zero();
        let mut xpow = Poly::constant(1.0);
        for row in &self.coeffs {
            let mut inner = Poly::zero();
            let mut ypow = Poly::constant(1.0);
            for &c in row {
                if c != 0.0 {
                    inner = inner.add(&ypow.scale(c));
                }
                ypow = ypow.mul(fy);
            }
            acc = acc.add(&inner.mul(&xpow));
            xpow = xpow.mul(fx);
        }
        acc
    }
}
