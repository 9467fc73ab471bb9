//! Exact univariate polynomials over the integers and rationals.
//!
//! The integer polynomials carry the Sturm machinery: a primitive
//! polynomial remainder sequence with explicit sign bookkeeping, so sign
//! variations count distinct real roots exactly. Rational polynomials
//! handle iterate composition; denominators are cleared before any sign
//! work.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Univariate polynomial with `BigInt` coefficients, ascending order.
/// Invariant: no trailing zero coefficient (zero polynomial = empty vec).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntPoly {
    pub coeffs: Vec<BigInt>,
}

impl IntPoly {
    pub fn new(mut coeffs: Vec<BigInt>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        IntPoly { coeffs }
    }

    pub fn zero() -> Self {
        IntPoly { coeffs: Vec::new() }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; zero polynomial reports 0.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn leading(&self) -> Option<&BigInt> {
        self.coeffs.last()
    }

    pub fn derivative(&self) -> IntPoly {
        if self.coeffs.len() <= 1 {
            return IntPoly::zero();
        }
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, c)| c * BigInt::from(i))
            .collect();
        IntPoly::new(coeffs)
    }

    pub fn neg(&self) -> IntPoly {
        IntPoly {
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }

    /// Content: gcd of coefficients, always non-negative.
    pub fn content(&self) -> BigInt {
        let mut g = BigInt::zero();
        for c in &self.coeffs {
            g = gcd_bigint(&g, c);
            if g.is_one() {
                break;
            }
        }
        g
    }

    /// Divide every coefficient by `d` (must divide exactly).
    fn div_exact(&self, d: &BigInt) -> IntPoly {
        IntPoly {
            coeffs: self.coeffs.iter().map(|c| c / d).collect(),
        }
    }

    /// Pseudo-remainder of `self` by `other`, normalized so the implied
    /// scaling of `self` is by a positive constant.
    pub fn pseudo_rem_signed(&self, other: &IntPoly) -> IntPoly {
        assert!(!other.is_zero(), "pseudo-division by zero polynomial");
        let d_deg = other.degree();
        let lc = other.leading().unwrap().clone();
        let mut rem = self.coeffs.clone();
        let mut steps = 0usize;
        while rem.len() > d_deg && !rem.is_empty() {
            let r_deg = rem.len() - 1;
            let r_lead = rem.last().unwrap().clone();
            if r_lead.is_zero() {
                rem.pop();
                continue;
            }
            // rem <- lc * rem - r_lead * x^(r_deg - d_deg) * other
            for c in rem.iter_mut() {
                *c *= &lc;
            }
            let shift = r_deg - d_deg;
            for (i, oc) in other.coeffs.iter().enumerate() {
                rem[shift + i] -= &r_lead * oc;
            }
            while rem.last().is_some_and(|c| c.is_zero()) {
                rem.pop();
            }
            steps += 1;
        }
        let mut out = IntPoly::new(rem);
        // An odd number of multiplications by a negative leading
        // coefficient flips the implied scaling; undo it.
        if lc.is_negative() && steps % 2 == 1 {
            out = out.neg();
        }
        out
    }

    /// Primitive part with the sign of the leading coefficient kept.
    pub fn primitive(&self) -> IntPoly {
        if self.is_zero() {
            return IntPoly::zero();
        }
        let c = self.content();
        if c.is_one() {
            self.clone()
        } else {
            self.div_exact(&c)
        }
    }

    /// Sign of the value at a rational point `a/b` with `b > 0`.
    /// Computed as the sign of `sum c_i a^i b^(deg-i)`.
    pub fn sign_at_rational(&self, a: &BigInt, b: &BigInt) -> i8 {
        if self.is_zero() {
            return 0;
        }
        let deg = self.degree();
        let mut apow = BigInt::one();
        let mut terms: Vec<BigInt> = Vec::with_capacity(deg + 1);
        for c in &self.coeffs {
            terms.push(c * &apow);
            apow *= a;
        }
        let mut bpow = BigInt::one();
        let mut total = BigInt::zero();
        for t in terms.iter().rev() {
            total += t * &bpow;
            bpow *= b;
        }
        sign_of(&total)
    }

    /// Sign as x -> +inf.
    pub fn sign_at_pos_inf(&self) -> i8 {
        self.leading().map_or(0, sign_of)
    }

    /// Sign as x -> -inf.
    pub fn sign_at_neg_inf(&self) -> i8 {
        let s = self.sign_at_pos_inf();
        if self.degree() % 2 == 1 {
            -s
        } else {
            s
        }
    }
}

fn sign_of(v: &BigInt) -> i8 {
    if v.is_zero() {
        0
    } else if v.is_positive() {
        1
    } else {
        -1
    }
}

fn gcd_bigint(a: &BigInt, b: &BigInt) -> BigInt {
    let mut a = a.abs();
    let mut b = b.abs();
    while !b.is_zero() {
        let r = &a % &b;
        a = b;
        b = r;
    }
    a
}

/// A Sturm chain for a square-free-or-not integer polynomial, built with
/// the primitive PRS. Members may be scaled by positive constants, which
/// leaves sign variations untouched.
#[derive(Debug)]
pub struct SturmChain {
    pub members: Vec<IntPoly>,
    /// Degree of gcd(p, p'); zero certifies a square-free input.
    pub gcd_degree: usize,
}

impl SturmChain {
    /// Build the chain for `p`. `max_coeff_bits` aborts runaway
    /// coefficient growth with a budget error.
    pub fn build(p: &IntPoly, max_coeff_bits: u64) -> Result<SturmChain> {
        if p.is_zero() {
            return Err(Error::Nonisolated(
                "zero polynomial has a continuum of roots".into(),
            ));
        }
        let mut members = vec![p.primitive(), p.derivative().primitive()];
        if members[1].is_zero() {
            // Constant polynomial: no roots, chain is just [p].
            members.pop();
            return Ok(SturmChain {
                members,
                gcd_degree: 0,
            });
        }
        loop {
            let n = members.len();
            let rem = members[n - 2].pseudo_rem_signed(&members[n - 1]);
            if rem.is_zero() {
                let gcd_degree = members[n - 1].degree();
                return Ok(SturmChain {
                    members,
                    gcd_degree,
                });
            }
            let next = rem.neg().primitive();
            if let Some(lead) = next.leading() {
                let bits = lead.bits();
                if bits > max_coeff_bits {
                    return Err(Error::Budget(format!(
                        "Sturm chain coefficients reached {bits} bits (cap {max_coeff_bits})"
                    )));
                }
            }
            members.push(next);
        }
    }

    fn variations(signs: impl Iterator<Item = i8>) -> usize {
        let mut last = 0i8;
        let mut count = 0usize;
        for s in signs {
            if s != 0 {
                if last != 0 && s != last {
                    count += 1;
                }
                last = s;
            }
        }
        count
    }

    pub fn variations_at_neg_inf(&self) -> usize {
        Self::variations(self.members.iter().map(|m| m.sign_at_neg_inf()))
    }

    pub fn variations_at_pos_inf(&self) -> usize {
        Self::variations(self.members.iter().map(|m| m.sign_at_pos_inf()))
    }

    pub fn variations_at(&self, a: &BigInt, b: &BigInt) -> usize {
        Self::variations(self.members.iter().map(|m| m.sign_at_rational(a, b)))
    }

    /// Number of distinct real roots of the chain's base polynomial.
    pub fn count_all_real_roots(&self) -> usize {
        self.variations_at_neg_inf() - self.variations_at_pos_inf()
    }

    /// Number of distinct real roots in the half-open interval `(a, b]`,
    /// endpoints given as rationals `a = an/ad`, `b = bn/bd` with positive
    /// denominators.
    pub fn count_roots_in(&self, an: &BigInt, ad: &BigInt, bn: &BigInt, bd: &BigInt) -> usize {
        let va = self.variations_at(an, ad);
        let vb = self.variations_at(bn, bd);
        va.saturating_sub(vb)
    }
}

/// Univariate polynomial with `BigRational` coefficients, ascending order.
#[derive(Debug, Clone, PartialEq)]
pub struct RatPoly {
    pub coeffs: Vec<BigRational>,
}

impl RatPoly {
    pub fn new(mut coeffs: Vec<BigRational>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        RatPoly { coeffs }
    }

    pub fn zero() -> Self {
        RatPoly { coeffs: Vec::new() }
    }

    /// Exact conversion from f64 coefficients. Every finite f64 is a
    /// dyadic rational, so this is lossless.
    pub fn from_f64_coeffs(coeffs: &[f64]) -> Result<RatPoly> {
        let mut out = Vec::with_capacity(coeffs.len());
        for &c in coeffs {
            let r = BigRational::from_float(c)
                .ok_or_else(|| Error::invalid(format!("non-finite coefficient {c}")))?;
            out.push(r);
        }
        Ok(RatPoly::new(out))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn eval(&self, x: &BigRational) -> BigRational {
        let mut acc = BigRational::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn derivative(&self) -> RatPoly {
        if self.coeffs.len() <= 1 {
            return RatPoly::zero();
        }
        RatPoly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * BigRational::from_integer(BigInt::from(i)))
                .collect(),
        )
    }

    pub fn add(&self, other: &RatPoly) -> RatPoly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut out = vec![BigRational::zero(); n];
        for (i, c) in self.coeffs.iter().enumerate() {
            out[i] += c;
        }
        for (i, c) in other.coeffs.iter().enumerate() {
            out[i] += c;
        }
        RatPoly::new(out)
    }

    pub fn sub(&self, other: &RatPoly) -> RatPoly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut out = vec![BigRational::zero(); n];
        for (i, c) in self.coeffs.iter().enumerate() {
            out[i] += c;
        }
        for (i, c) in other.coeffs.iter().enumerate() {
            out[i] -= c;
        }
        RatPoly::new(out)
    }

    pub fn mul(&self, other: &RatPoly) -> RatPoly {
        if self.is_zero() || other.is_zero() {
            return RatPoly::zero();
        }
        let mut out = vec![BigRational::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        RatPoly::new(out)
    }

    /// `self` composed with `inner`: returns self(inner(x)), by Horner.
    pub fn compose(&self, inner: &RatPoly) -> RatPoly {
        let mut acc = RatPoly::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(inner);
            if acc.coeffs.is_empty() {
                acc.coeffs.push(c.clone());
            } else {
                acc.coeffs[0] += c;
            }
            acc = RatPoly::new(acc.coeffs);
        }
        acc
    }

    /// n-fold self-composition q o q o ... o q (n >= 1 applications).
    pub fn iterate(&self, n: usize) -> RatPoly {
        assert!(n >= 1);
        let mut acc = self.clone();
        for _ in 1..n {
            acc = self.compose(&acc);
        }
        acc
    }

    /// Clear denominators: returns an integer polynomial that is a
    /// positive multiple of `self`.
    pub fn clear_denominators(&self) -> IntPoly {
        if self.is_zero() {
            return IntPoly::zero();
        }
        let mut lcm = BigInt::one();
        for c in &self.coeffs {
            let d = c.denom();
            let g = gcd_bigint(&lcm, d);
            lcm = &lcm / &g * d;
        }
        IntPoly::new(
            self.coeffs
                .iter()
                .map(|c| c.numer() * (&lcm / c.denom()))
                .collect(),
        )
    }

    pub fn to_f64_coeffs(&self) -> Vec<f64> {
        use num_traits::ToPrimitive;
        self.coeffs
            .iter()
            .map(|c| c.to_f64().unwrap_or(f64::NAN))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ipoly(v: &[i64]) -> IntPoly {
        IntPoly::new(v.iter().map(|&c| BigInt::from(c)).collect())
    }

    fn rpoly(v: &[i64]) -> RatPoly {
        RatPoly::new(
            v.iter()
                .map(|&c| BigRational::from_integer(BigInt::from(c)))
                .collect(),
        )
    }

    #[test]
    fn sturm_counts_quadratic() {
        // x^2 - x - 2 has roots 2 and -1.
        let p = ipoly(&[-2, -1, 1]);
        let chain = SturmChain::build(&p, 1 << 20).unwrap();
        assert_eq!(chain.gcd_degree, 0);
        assert_eq!(chain.count_all_real_roots(), 2);
        // Roots in (0, 3]: only 2.
        assert_eq!(
            chain.count_roots_in(
                &BigInt::from(0),
                &BigInt::from(1),
                &BigInt::from(3),
                &BigInt::from(1)
            ),
            1
        );
    }

    #[test]
    fn sturm_detects_square_factor() {
        // (x-1)^2 (x+2)
        let p = rpoly(&[1, -1])
            .mul(&rpoly(&[-1, 1]))
            .mul(&rpoly(&[2, 1]))
            .mul(&rpoly(&[-1]));
        let chain = SturmChain::build(&p.clear_denominators(), 1 << 20).unwrap();
        assert!(chain.gcd_degree >= 1);
    }

    #[test]
    fn sturm_handles_negative_leading_coefficient() {
        // -(x^2 - 4): two real roots, leading coefficient negative.
        let p = ipoly(&[4, 0, -1]);
        let chain = SturmChain::build(&p, 1 << 20).unwrap();
        assert_eq!(chain.count_all_real_roots(), 2);
    }

    #[test]
    fn compose_squares() {
        // q = y^2 - 2, q o q = y^4 - 4y^2 + 2
        let q = rpoly(&[-2, 0, 1]);
        let qq = q.iterate(2);
        assert_eq!(qq, rpoly(&[2, 0, -4, 0, 1]));
    }

    #[test]
    fn quartic_fixed_point_count() {
        // q o q (y) - y for q = y^2-2 has 4 real roots.
        let q = rpoly(&[-2, 0, 1]);
        let p = q.iterate(2).sub(&rpoly(&[0, 1]));
        let chain = SturmChain::build(&p.clear_denominators(), 1 << 20).unwrap();
        assert_eq!(chain.gcd_degree, 0);
        assert_eq!(chain.count_all_real_roots(), 4);
    }
}
