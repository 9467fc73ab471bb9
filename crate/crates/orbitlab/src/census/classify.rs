//! Multiplier classification and center-manifold reduction.
//!
//! A periodic point is hyperbolic when no multiplier sits on the unit
//! circle. When exactly one multiplier equals 1 (and the other is off the
//! circle), the restriction to the center manifold has the normal form
//! `x -> x + l_{k+1} x^{k+1} + ...`; the graph transform below solves for
//! the manifold jet order by order and reads off the first nonzero
//! coefficient.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geom::{Mat2, PlanarPoint};
use crate::poly::{BiPoly, Poly, Taylor};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Classification {
    Hyperbolic,
    /// One multiplier equals 1; the center restriction is
    /// `x -> x + l x^{k+1} + o(x^{k+1})` with `l != 0`.
    KDegenerate { k: usize, l_coeff: f64 },
    /// Degenerate beyond every checked order.
    FlatToOrder { k_max: usize },
    /// Some other unit-circle configuration (both multipliers on the
    /// circle, or a single one away from +1).
    NonhyperbolicOther,
}

/// Truncated Taylor expansion of a planar map around a fixed point:
/// displacement-in, displacement-out.
#[derive(Debug, Clone)]
pub struct PlanarJet {
    pub fx: BiPoly,
    pub fy: BiPoly,
    pub order: usize,
}

impl PlanarJet {
    /// Jet of the polynomial map `(px, py)` around `at` (which need not be
    /// exactly fixed; the constant displacement is dropped, consistent
    /// with a fixed point known to solver tolerance).
    pub fn of_polynomial_map(px: &BiPoly, py: &BiPoly, at: PlanarPoint, order: usize) -> Self {
        let mut fx = shift_bipoly(px, at.x, at.y, order);
        let mut fy = shift_bipoly(py, at.x, at.y, order);
        fx.set(0, 0, 0.0);
        fy.set(0, 0, 0.0);
        PlanarJet { fx, fy, order }
    }

    /// Jet of the skew map `(x, y) -> (q(x), eta * y)` around `(x0, 0)`.
    pub fn of_skew_map(q: &Poly, eta: f64, x0: f64, order: usize) -> Self {
        let mut px = BiPoly::zero();
        for (i, &c) in q.coeffs.iter().enumerate() {
            px.set(i, 0, c);
        }
        let py = BiPoly::from_terms(&[(0, 1, eta)]);
        Self::of_polynomial_map(&px, &py, PlanarPoint::new(x0, 0.0), order)
    }

    pub fn linear_part(&self) -> Mat2 {
        Mat2::new(
            self.fx.get(1, 0),
            self.fx.get(0, 1),
            self.fy.get(1, 0),
            self.fy.get(0, 1),
        )
    }
}

/// Recenter a bivariate polynomial: returns `p(x0 + u, y0 + v)` truncated
/// to total degree `order`.
fn shift_bipoly(p: &BiPoly, x0: f64, y0: f64, order: usize) -> BiPoly {
    let mut out = BiPoly::zero();
    // (x0 + u)^i (y0 + v)^j expanded by binomials.
    for (i, j, c) in p.terms() {
        let bx = binomial_row(i, x0);
        let by = binomial_row(j, y0);
        for (a, cx) in bx.iter().enumerate() {
            for (b, cy) in by.iter().enumerate() {
                if a + b > order {
                    continue;
                }
                out.set(a, b, out.get(a, b) + c * cx * cy);
            }
        }
    }
    out
}

/// Coefficients of (t + u)^m in powers of u: entry a is C(m, a) t^(m-a).
fn binomial_row(m: usize, t: f64) -> Vec<f64> {
    let mut row = vec![0.0; m + 1];
    let mut binom = 1.0f64;
    for a in 0..=m {
        if a > 0 {
            binom *= (m - a + 1) as f64 / a as f64;
        }
        row[a] = binom * t.powi((m - a) as i32);
    }
    row
}

/// Substitute `u = m00 a + m01 b`, `v = m10 a + m11 b` into a truncated
/// bivariate polynomial.
fn substitute_linear(p: &BiPoly, m: &Mat2, order: usize) -> BiPoly {
    // Powers of the two linear forms, then multiply out term by term.
    let lin_u = BiPoly::from_terms(&[(1, 0, m.a), (0, 1, m.b)]);
    let lin_v = BiPoly::from_terms(&[(1, 0, m.c), (0, 1, m.d)]);
    let max_pow = order;
    let mut pow_u = vec![BiPoly::from_terms(&[(0, 0, 1.0)])];
    let mut pow_v = vec![BiPoly::from_terms(&[(0, 0, 1.0)])];
    for i in 1..=max_pow {
        pow_u.push(mul_trunc(&pow_u[i - 1], &lin_u, order));
        pow_v.push(mul_trunc(&pow_v[i - 1], &lin_v, order));
    }
    let mut out = BiPoly::zero();
    for (i, j, c) in p.terms() {
        if i + j > order {
            continue;
        }
        let term = mul_trunc(&pow_u[i], &pow_v[j], order);
        for (a, b, t) in term.terms() {
            out.set(a, b, out.get(a, b) + c * t);
        }
    }
    out
}

fn mul_trunc(p: &BiPoly, q: &BiPoly, order: usize) -> BiPoly {
    let mut out = BiPoly::zero();
    for (i1, j1, c1) in p.terms() {
        for (i2, j2, c2) in q.terms() {
            if i1 + i2 + j1 + j2 > order {
                continue;
            }
            out.set(i1 + i2, j1 + j2, out.get(i1 + i2, j1 + j2) + c1 * c2);
        }
    }
    out
}

/// Center-manifold restriction coefficients for a jet with multipliers
/// `nu ~ 1` and `eta` off the unit circle. Returns the Taylor
/// coefficients of the restriction `a -> nu a + l_2 a^2 + ...`.
pub fn center_restriction(jet: &PlanarJet, k_max: usize) -> Result<Vec<f64>> {
    let order = k_max + 1;
    if jet.order < order {
        return Err(Error::invalid(format!(
            "jet order {} below required {}",
            jet.order, order
        )));
    }
    let lin = jet.linear_part();
    let [l1, l2] = lin.eigenvalues();
    if l1.1 != 0.0 {
        return Err(Error::invalid("complex multipliers have no center line"));
    }
    // nu is the eigenvalue closest to 1.
    let (nu, eta) = if (l1.0 - 1.0).abs() <= (l2.0 - 1.0).abs() {
        (l1.0, l2.0)
    } else {
        (l2.0, l1.0)
    };
    let ev_nu = lin.eigenvector(nu);
    let ev_eta = lin.eigenvector(eta);
    let basis = Mat2::new(ev_nu.0, ev_eta.0, ev_nu.1, ev_eta.1);
    let det = basis.det();
    if det.abs() < 1e-12 {
        return Err(Error::invalid("eigenvectors nearly collinear"));
    }
    let inv = Mat2::new(
        basis.d / det,
        -basis.b / det,
        -basis.c / det,
        basis.a / det,
    );

    // Map in eigencoordinates: (a, b) -> inv * F(basis * (a, b)).
    let fx_e = substitute_linear(&jet.fx, &basis, order);
    let fy_e = substitute_linear(&jet.fy, &basis, order);
    let comp_a = add_scaled(&fx_e, inv.a, &fy_e, inv.b);
    let comp_b = add_scaled(&fx_e, inv.c, &fy_e, inv.d);

    // Solve b = h(a) order by order: residual of the invariance equation
    // comp_b(a, h(a)) - h(comp_a(a, h(a))) gains (eta - nu^j) h_j at
    // order j.
    let mut h = Taylor::zero(order);
    for j in 2..=order {
        let ha = h.clone();
        let restricted_b = compose_on_graph(&comp_b, &ha, order);
        let restricted_a = compose_on_graph(&comp_a, &ha, order);
        let mut h_after = Taylor::zero(order);
        // h(comp_a) with comp_a having zero constant term.
        let mut inner = restricted_a.clone();
        inner.coeffs[0] = 0.0;
        for (p, &c) in ha.coeffs.iter().enumerate() {
            if c != 0.0 {
                let t = inner.pow(p);
                for (idx, v) in t.coeffs.iter().enumerate() {
                    h_after.coeffs[idx] += c * v;
                }
            }
        }
        let residual_j = restricted_b.coeffs[j] - h_after.coeffs[j];
        let denom = nu.powi(j as i32) - eta;
        if denom.abs() < 1e-9 {
            return Err(Error::invalid(format!(
                "resonance nu^{j} = eta blocks the graph transform"
            )));
        }
        h.coeffs[j] += residual_j / denom;
    }

    // Restriction g(a) = comp_a(a, h(a)).
    let g = compose_on_graph(&comp_a, &h, order);
    Ok(g.coeffs)
}

/// Evaluate a truncated bivariate polynomial on the graph (a, h(a)).
fn compose_on_graph(p: &BiPoly, h: &Taylor, order: usize) -> Taylor {
    let mut out = Taylor::zero(order);
    let ident = Taylor::identity(order);
    for (i, j, c) in p.terms() {
        if i + j > order {
            continue;
        }
        let t = ident.pow(i).mul(&h.pow(j));
        for (idx, v) in t.coeffs.iter().enumerate() {
            out.coeffs[idx] += c * v;
        }
    }
    out
}

fn add_scaled(p: &BiPoly, cp: f64, q: &BiPoly, cq: f64) -> BiPoly {
    let mut out = BiPoly::zero();
    for (i, j, c) in p.terms() {
        out.set(i, j, out.get(i, j) + cp * c);
    }
    for (i, j, c) in q.terms() {
        out.set(i, j, out.get(i, j) + cq * c);
    }
    out
}

/// Classify from planar multipliers, with a jet available for the
/// single-unit-multiplier case.
pub fn classify_planar(
    multipliers: [(f64, f64); 2],
    jet: Option<&PlanarJet>,
    unit_tol: f64,
    k_max: usize,
) -> Classification {
    let modulus = |m: (f64, f64)| m.0.hypot(m.1);
    let on_circle = |m: (f64, f64)| (modulus(m) - 1.0).abs() <= unit_tol;
    let [m1, m2] = multipliers;
    match (on_circle(m1), on_circle(m2)) {
        (false, false) => Classification::Hyperbolic,
        (true, true) => Classification::NonhyperbolicOther,
        (one_on, _) => {
            let (unit, _other) = if one_on { (m1, m2) } else { (m2, m1) };
            let is_plus_one = unit.1.abs() <= unit_tol && (unit.0 - 1.0).abs() <= unit_tol;
            if !is_plus_one {
                return Classification::NonhyperbolicOther;
            }
            match jet {
                None => Classification::NonhyperbolicOther,
                Some(j) => match center_restriction(j, k_max) {
                    Err(_) => Classification::NonhyperbolicOther,
                    Ok(coeffs) => first_degenerate_order(&coeffs, unit_tol, k_max),
                },
            }
        }
    }
}

/// Classify a one-dimensional restriction from its Taylor jet
/// `(c_0 ~ 0, c_1 ~ 1, c_2, ...)` at the fixed point.
pub fn classify_line_jet(jet: &[f64], unit_tol: f64, k_max: usize) -> Classification {
    if jet.len() < 2 || (jet[1].abs() - 1.0).abs() > unit_tol {
        return Classification::NonhyperbolicOther;
    }
    if (jet[1] - 1.0).abs() > unit_tol {
        // Multiplier -1 (or elsewhere on the circle).
        return Classification::NonhyperbolicOther;
    }
    first_degenerate_order(jet, unit_tol, k_max)
}

fn first_degenerate_order(coeffs: &[f64], tol: f64, k_max: usize) -> Classification {
    for j in 2..=k_max + 1 {
        let c = coeffs.get(j).copied().unwrap_or(0.0);
        if c.abs() > tol {
            return Classification::KDegenerate {
                k: j - 1,
                l_coeff: c,
            };
        }
    }
    Classification::FlatToOrder { k_max }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hyperbolic_from_multipliers() {
        let c = classify_planar([(0.0, 0.0), (4.0, 0.0)], None, 1e-8, 5);
        assert_eq!(c, Classification::Hyperbolic);
    }

    #[test]
    fn double_unit_is_other() {
        let c = classify_planar([(1.0, 0.0), (1.0, 0.0)], None, 1e-8, 5);
        assert_eq!(c, Classification::NonhyperbolicOther);
    }

    #[test]
    fn line_jet_cubic_degeneracy() {
        // x -> x + x^3: 2-degenerate with l_3 = 1.
        let c = classify_line_jet(&[0.0, 1.0, 0.0, 1.0, 0.0], 1e-8, 5);
        assert_eq!(
            c,
            Classification::KDegenerate {
                k: 2,
                l_coeff: 1.0
            }
        );
    }

    #[test]
    fn skew_map_center_manifold() {
        // (x, y) -> (x + x^6 + ..., y/2): flat center manifold, the
        // restriction is the x-polynomial itself.
        let q = Poly::new(vec![0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0]);
        let jet = PlanarJet::of_skew_map(&q, 0.5, 0.0, 7);
        let g = center_restriction(&jet, 6).unwrap();
        assert!((g[1] - 1.0).abs() < 1e-12);
        for c in &g[2..6] {
            assert!(c.abs() < 1e-12);
        }
        assert!((g[6] - 1.0).abs() < 1e-10);
        let cls = classify_planar([(1.0, 0.0), (0.5, 0.0)], Some(&jet), 1e-8, 6);
        assert_eq!(
            cls,
            Classification::KDegenerate {
                k: 5,
                l_coeff: 1.0
            }
        );
    }

    #[test]
    fn tilted_center_manifold() {
        // Couple the directions: F(x, y) = (x + (x + y)^2, y/3 + x^2).
        // The center manifold is curved; the restriction should still
        // report the quadratic term.
        let fx = BiPoly::from_terms(&[(1, 0, 1.0), (2, 0, 1.0), (1, 1, 2.0), (0, 2, 1.0)]);
        let fy = BiPoly::from_terms(&[(0, 1, 1.0 / 3.0), (2, 0, 1.0)]);
        let jet = PlanarJet {
            fx,
            fy,
            order: 4,
        };
        let g = center_restriction(&jet, 3).unwrap();
        assert!((g[1] - 1.0).abs() < 1e-12);
        assert!((g[2] - 1.0).abs() < 1e-10, "quadratic term, got {}", g[2]);
    }

    #[test]
    fn flat_beyond_checked_order() {
        let q = Poly::new(vec![0.0, 1.0]); // exactly the identity line
        let jet = PlanarJet::of_skew_map(&q, 0.5, 0.0, 6);
        let cls = classify_planar([(1.0, 0.0), (0.5, 0.0)], Some(&jet), 1e-8, 5);
        assert_eq!(cls, Classification::FlatToOrder { k_max: 5 });
    }
}
