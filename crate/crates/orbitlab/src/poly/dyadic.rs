//! Exact dyadic arithmetic: numbers of the form `mant * 2^exp`.
//!
//! Every finite f64 is dyadic, and dyadics are closed under ring
//! operations, so iterated polynomial evaluation stays exact without the
//! gcd churn of general rationals.

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dyadic {
    pub mant: BigInt,
    pub exp: i64,
}

impl Dyadic {
    pub fn zero() -> Self {
        Dyadic {
            mant: BigInt::zero(),
            exp: 0,
        }
    }

    pub fn from_int(v: i64) -> Self {
        Dyadic {
            mant: BigInt::from(v),
            exp: 0,
        }
    }

    /// Exact conversion; panics on non-finite input.
    pub fn from_f64(v: f64) -> Self {
        assert!(v.is_finite(), "dyadic conversion of non-finite value");
        if v == 0.0 {
            return Dyadic::zero();
        }
        let bits = v.to_bits();
        let sign = if bits >> 63 == 1 { -1i64 } else { 1 };
        let biased = ((bits >> 52) & 0x7ff) as i64;
        let frac = bits & ((1u64 << 52) - 1);
        let (mant, exp) = if biased == 0 {
            (frac as i128, -1074i64)
        } else {
            ((frac | (1u64 << 52)) as i128, biased - 1075)
        };
        Dyadic {
            mant: BigInt::from(sign as i128 * mant),
            exp,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.mant.is_zero()
    }

    pub fn sign(&self) -> i8 {
        if self.mant.is_zero() {
            0
        } else if self.mant.is_positive() {
            1
        } else {
            -1
        }
    }

    fn align(a: &Dyadic, b: &Dyadic) -> (BigInt, BigInt, i64) {
        let exp = a.exp.min(b.exp);
        let am = &a.mant << (a.exp - exp) as usize;
        let bm = &b.mant << (b.exp - exp) as usize;
        (am, bm, exp)
    }

    pub fn add(&self, other: &Dyadic) -> Dyadic {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        let (am, bm, exp) = Dyadic::align(self, other);
        Dyadic { mant: am + bm, exp }
    }

    pub fn sub(&self, other: &Dyadic) -> Dyadic {
        if other.is_zero() {
            return self.clone();
        }
        let (am, bm, exp) = Dyadic::align(self, other);
        Dyadic { mant: am - bm, exp }
    }

    pub fn mul(&self, other: &Dyadic) -> Dyadic {
        Dyadic {
            mant: &self.mant * &other.mant,
            exp: self.exp + other.exp,
        }
    }

    /// Round toward zero to at most `bits` mantissa bits. Used only to
    /// pick interval endpoints, never inside exact sign computation.
    pub fn truncate(&self, bits: u64) -> Dyadic {
        let have = self.mant.bits();
        if have <= bits {
            return self.clone();
        }
        let drop = (have - bits) as i64;
        Dyadic {
            mant: &self.mant >> drop as usize,
            exp: self.exp + drop,
        }
    }

    pub fn to_f64(&self) -> f64 {
        use num_traits::ToPrimitive;
        // Good enough for reporting: exactness is only needed for signs.
        let bits = self.mant.bits();
        let (m, e) = if bits <= 53 {
            (self.mant.to_f64().unwrap_or(f64::NAN), self.exp)
        } else {
            let shift = (bits - 53) as i64;
            (
                (&self.mant >> shift as usize).to_f64().unwrap_or(f64::NAN),
                self.exp + shift,
            )
        };
        // Split the scaling so no intermediate factor is subnormal.
        let half = (e / 2) as i32;
        m * 2.0f64.powi(half) * 2.0f64.powi((e - half as i64) as i32)
    }
}

/// Horner evaluation of a polynomial with dyadic coefficients.
pub fn eval_poly(coeffs: &[Dyadic], x: &Dyadic) -> Dyadic {
    let mut acc = Dyadic::zero();
    for c in coeffs.iter().rev() {
        acc = acc.mul(x).add(c);
    }
    acc
}

/// Evaluate the n-fold composition q(q(...q(x)...)) exactly.
pub fn eval_iterated(coeffs: &[Dyadic], x: &Dyadic, n: usize) -> Dyadic {
    let mut acc = x.clone();
    for _ in 0..n {
        acc = eval_poly(coeffs, &acc);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_f64() {
        for v in [0.0, 1.0, -2.5, 0.1, 1e-300, -3.7e200] {
            let d = Dyadic::from_f64(v);
            assert_eq!(d.to_f64(), v);
        }
    }

    #[test]
    fn iterated_eval_matches_direct() {
        // q = y^2 - 2 at y = 3/2, twice: q(1.5) = 0.25, q(0.25) = -1.9375
        let q = [Dyadic::from_int(-2), Dyadic::zero(), Dyadic::from_int(1)];
        let got = eval_iterated(&q, &Dyadic::from_f64(1.5), 2);
        assert_eq!(got.to_f64(), -1.9375);
    }

    #[test]
    fn signs() {
        let a = Dyadic::from_f64(0.1);
        let b = Dyadic::from_f64(0.2);
        assert_eq!(a.add(&b).sub(&Dyadic::from_f64(0.2)).sub(&a).sign(), 0);
    }
}
