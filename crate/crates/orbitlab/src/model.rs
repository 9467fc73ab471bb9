//! The model diffeomorphism.
//!
//! A linear saddle `(x, y) -> (lambda x, mu y)` in normal coordinates,
//! composed with a polynomial global map that carries a finite-order
//! tangency term `gamma y^k`, its unfolding coefficients, a shear
//! `sigma x`, and remainder polynomials constrained to vanish to the
//! orders that keep the rescaling limit clean.
//!
//! Charts: the saddle chart `(x, y)`; the outgoing chart around `(1, 0)`
//! with coordinates `(xb, yb) = (x - 1, y)`; the incoming chart around
//! `(0, 1)` with coordinates `(xt, yt) = (x, y - 1)`. The global map
//! sends the incoming chart to the outgoing chart.

use std::collections::BTreeMap;

use crate::error::{Error, Result, Stage};
use crate::geom::{Mat2, PlanarPoint};
use crate::poly::{BiPoly, Poly};

/// Linear saddle parameters with the finite-order nonresonance contract.
#[derive(Debug, Clone, PartialEq)]
pub struct SaddleParams {
    pub lambda: f64,
    pub mu: f64,
    /// Check `lambda^n mu^m != 1` for all `1 <= n, m <= resonance_order`.
    pub resonance_order: u32,
    pub resonance_tol: f64,
}

/// What `validate` found. Shape and dissipativity violations are hard
/// errors; a resonance within the checked order is reported here and only
/// rejected by [`SaddleParams::validate_strict`].
#[derive(Debug, Clone, PartialEq)]
pub struct SaddleReport {
    pub dissipative: bool,
    pub nonresonant: bool,
    /// `(n, m)` with `|lambda^n mu^m - 1| <= tol`, when one exists.
    pub resonance_witness: Option<(u32, u32)>,
    pub saddle_exponent: f64,
}

impl SaddleParams {
    pub fn new(lambda: f64, mu: f64) -> Self {
        SaddleParams {
            lambda,
            mu,
            resonance_order: 10,
            resonance_tol: 1e-9,
        }
    }

    /// `rho = -log lambda / log mu`; the saddle is r-shrinking when
    /// `rho > r`.
    pub fn saddle_exponent(&self) -> f64 {
        -self.lambda.ln() / self.mu.ln()
    }

    pub fn is_at_least_r_shrinking(&self, r: f64) -> bool {
        self.saddle_exponent() > r
    }

    /// Rejects shape violations (`lambda` outside (0,1), `mu <= 1`) and
    /// non-dissipative pairs (`lambda * mu >= 1`). Resonance up to the
    /// configured order is reported, not rejected.
    pub fn validate(&self) -> Result<SaddleReport> {
        if !(self.lambda > 0.0 && self.lambda < 1.0) {
            return Err(Error::InvalidSaddle(format!(
                "lambda = {} must lie in (0, 1)",
                self.lambda
            )));
        }
        if !(self.mu > 1.0) {
            return Err(Error::InvalidSaddle(format!(
                "mu = {} must exceed 1",
                self.mu
            )));
        }
        if self.lambda * self.mu >= 1.0 {
            return Err(Error::InvalidSaddle(format!(
                "not dissipative: lambda * mu = {} >= 1",
                self.lambda * self.mu
            )));
        }
        let witness = self.resonance_witness();
        Ok(SaddleReport {
            dissipative: true,
            nonresonant: witness.is_none(),
            resonance_witness: witness,
            saddle_exponent: self.saddle_exponent(),
        })
    }

    /// As `validate`, but a detected resonance is also an error. Used
    /// where the linearizing normal form is load-bearing.
    pub fn validate_strict(&self) -> Result<SaddleReport> {
        let report = self.validate()?;
        if let Some((n, m)) = report.resonance_witness {
            return Err(Error::InvalidSaddle(format!(
                "resonance detected: lambda^{n} mu^{m} = {} within tol {}",
                self.lambda.powi(n as i32) * self.mu.powi(m as i32),
                self.resonance_tol
            )));
        }
        Ok(report)
    }

    fn resonance_witness(&self) -> Option<(u32, u32)> {
        for n in 1..=self.resonance_order {
            for m in 1..=self.resonance_order {
                let v = self.lambda.powi(n as i32) * self.mu.powi(m as i32);
                if (v - 1.0).abs() <= self.resonance_tol {
                    return Some((n, m));
                }
            }
        }
        None
    }

    /// `n` saddle steps: `(lambda^n x, mu^n y)`, with an overflow guard on
    /// the expanding direction.
    pub fn local_iterate(&self, p: PlanarPoint, n: u32) -> Result<PlanarPoint> {
        let out = PlanarPoint::new(
            self.lambda.powi(n as i32) * p.x,
            self.mu.powi(n as i32) * p.y,
        );
        if !out.is_finite() {
            return Err(Error::Overflow(format!(
                "mu^{n} * {} is not representable",
                p.y
            )));
        }
        Ok(out)
    }

    pub fn local_jacobian(&self, n: u32) -> Mat2 {
        Mat2::diag(self.lambda.powi(n as i32), self.mu.powi(n as i32))
    }
}

/// Bivariate remainder polynomial with enforced vanishing orders at the
/// origin: the constant term, pure-x terms up to `ord_x`, and pure-y
/// terms up to `ord_y` must be zero.
#[derive(Debug, Clone)]
pub struct RemainderPoly {
    poly: BiPoly,
    pub ord_x: usize,
    pub ord_y: usize,
}

impl PartialEq for RemainderPoly {
    fn eq(&self, other: &Self) -> bool {
        // Vanishing orders are a construction-time contract; equality is
        // about the polynomial itself.
        self.poly == other.poly
    }
}

/// Default total-degree bound for remainder polynomials.
pub const REMAINDER_DEGREE_BOUND: usize = 4;

impl RemainderPoly {
    pub fn new(poly: BiPoly, ord_x: usize, ord_y: usize) -> Result<Self> {
        Self::with_degree_bound(poly, ord_x, ord_y, REMAINDER_DEGREE_BOUND)
    }

    pub fn with_degree_bound(
        poly: BiPoly,
        ord_x: usize,
        ord_y: usize,
        degree_bound: usize,
    ) -> Result<Self> {
        if poly.total_degree() > degree_bound {
            return Err(Error::invalid(format!(
                "remainder polynomial degree {} exceeds bound {degree_bound}",
                poly.total_degree()
            )));
        }
        if poly.get(0, 0) != 0.0 {
            return Err(Error::invalid("remainder polynomial has a constant term"));
        }
        for a in 1..=ord_x {
            if poly.get(a, 0) != 0.0 {
                return Err(Error::invalid(format!(
                    "remainder polynomial has a forbidden x^{a} term"
                )));
            }
        }
        for b in 1..=ord_y {
            if poly.get(0, b) != 0.0 {
                return Err(Error::invalid(format!(
                    "remainder polynomial has a forbidden y^{b} term"
                )));
            }
        }
        Ok(RemainderPoly { poly, ord_x, ord_y })
    }

    /// The first-component remainder: vanishes with both first partials.
    pub fn first_kind(poly: BiPoly) -> Result<Self> {
        Self::new(poly, 1, 1)
    }

    /// The second-component remainder for tangency order `k`: vanishes
    /// with its x-partial and its pure y-derivatives through order `k`.
    pub fn second_kind(poly: BiPoly, k: usize) -> Result<Self> {
        Self::new(poly, 1, k)
    }

    pub fn zero() -> Self {
        RemainderPoly {
            poly: BiPoly::zero(),
            ord_x: usize::MAX,
            ord_y: usize::MAX,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.poly.is_zero()
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        self.poly.eval(x, y)
    }

    pub fn dx(&self, x: f64, y: f64) -> f64 {
        self.poly.dx().eval(x, y)
    }

    pub fn dy(&self, x: f64, y: f64) -> f64 {
        self.poly.dy().eval(x, y)
    }

    pub fn poly(&self) -> &BiPoly {
        &self.poly
    }
}

/// The polynomial global map from the incoming chart to the outgoing
/// chart, with unfolding coefficients `mu_vec = (mu_0, ..., mu_{k-1})`.
#[derive(Debug, Clone, PartialEq)]
pub struct GlobalMapParams {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub sigma: f64,
    /// Tangency order: the map carries `gamma * y^k`.
    pub k: usize,
    pub mu_vec: Vec<f64>,
    pub h1: RemainderPoly,
    pub h2: RemainderPoly,
    /// Number of diffeomorphism iterates the global map stands for.
    pub n_global: u32,
    /// Half-width of the admissible box around the incoming chart origin.
    pub chart_halfwidth: f64,
}

impl GlobalMapParams {
    pub fn new(
        alpha: f64,
        beta: f64,
        gamma: f64,
        sigma: f64,
        k: usize,
        mu_vec: Vec<f64>,
    ) -> Result<Self> {
        let g = GlobalMapParams {
            alpha,
            beta,
            gamma,
            sigma,
            k,
            mu_vec,
            h1: RemainderPoly::zero(),
            h2: RemainderPoly::zero(),
            n_global: 1,
            chart_halfwidth: 1.0,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn with_remainders(mut self, h1: RemainderPoly, h2: RemainderPoly) -> Result<Self> {
        self.h1 = h1;
        self.h2 = h2;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.alpha == 0.0 {
            return Err(Error::invalid("alpha must be nonzero"));
        }
        if self.gamma == 0.0 {
            return Err(Error::invalid("gamma must be nonzero"));
        }
        if self.k < 1 {
            return Err(Error::invalid("tangency order k must be at least 1"));
        }
        if self.mu_vec.len() != self.k {
            return Err(Error::invalid(format!(
                "expected {} unfolding coefficients, got {}",
                self.k,
                self.mu_vec.len()
            )));
        }
        if self.h1.ord_x < 1 || self.h1.ord_y < 1 {
            return Err(Error::invalid("h1 must vanish with both first partials"));
        }
        if self.h2.ord_x < 1 || self.h2.ord_y < self.k {
            return Err(Error::invalid(format!(
                "h2 must vanish with y-derivatives through order {}",
                self.k
            )));
        }
        if !(self.chart_halfwidth > 0.0) {
            return Err(Error::invalid("chart half-width must be positive"));
        }
        Ok(())
    }

    fn check_domain(&self, p: PlanarPoint) -> Result<()> {
        if p.x.abs() > self.chart_halfwidth || p.y.abs() > self.chart_halfwidth {
            return Err(Error::DomainEscape {
                stage: Stage::Global,
                x: p.x,
                y: p.y,
            });
        }
        Ok(())
    }

    /// Evaluate at a point of the incoming chart. Errors when the point
    /// leaves the configured box; the normal form is local, so no
    /// extrapolation.
    pub fn apply(&self, p: PlanarPoint) -> Result<PlanarPoint> {
        self.check_domain(p)?;
        Ok(self.apply_unchecked(p))
    }

    pub fn apply_unchecked(&self, p: PlanarPoint) -> PlanarPoint {
        let (xt, yt) = (p.x, p.y);
        let xb = self.alpha * yt + self.beta * xt + self.h1.eval(xt, yt);
        // Horner for the unfolding polynomial sum mu_i y^i.
        let mut unfold = 0.0;
        for &m in self.mu_vec.iter().rev() {
            unfold = unfold * yt + m;
        }
        let yb =
            self.gamma * yt.powi(self.k as i32) + unfold + self.sigma * xt + self.h2.eval(xt, yt);
        PlanarPoint::new(xb, yb)
    }

    pub fn jacobian(&self, p: PlanarPoint) -> Result<Mat2> {
        self.check_domain(p)?;
        Ok(self.jacobian_unchecked(p))
    }

    pub fn jacobian_unchecked(&self, p: PlanarPoint) -> Mat2 {
        let (xt, yt) = (p.x, p.y);
        let dxb_dx = self.beta + self.h1.dx(xt, yt);
        let dxb_dy = self.alpha + self.h1.dy(xt, yt);
        let mut unfold_dy = 0.0;
        for (i, &m) in self.mu_vec.iter().enumerate().skip(1).rev() {
            unfold_dy = unfold_dy * yt + m * i as f64;
        }
        let dyb_dx = self.sigma + self.h2.dx(xt, yt);
        let dyb_dy =
            self.gamma * self.k as f64 * yt.powi(self.k as i32 - 1) + unfold_dy + self.h2.dy(xt, yt);
        Mat2::new(dxb_dx, dxb_dy, dyb_dx, dyb_dy)
    }
}

/// The full model: saddle, global map, and the shape of the unstable
/// manifold near the outgoing chart (`y = c x^2 + g(x)` with `g = o(x^2)`).
#[derive(Debug, Clone, PartialEq)]
pub struct ModelDiffeo {
    pub saddle: SaddleParams,
    pub global: GlobalMapParams,
    /// Leading parabola coefficient, positive.
    pub c: f64,
    /// Higher-order shape correction; no constant, linear, or quadratic
    /// coefficients.
    pub g: Poly,
}

impl ModelDiffeo {
    pub fn new(saddle: SaddleParams, global: GlobalMapParams, c: f64, g: Poly) -> Result<Self> {
        if !(c > 0.0) {
            return Err(Error::invalid("parabola coefficient c must be positive"));
        }
        if g.coeff(0) != 0.0 || g.coeff(1) != 0.0 || g.coeff(2) != 0.0 {
            return Err(Error::invalid(
                "shape correction g must vanish to second order",
            ));
        }
        saddle.validate()?;
        global.validate()?;
        Ok(ModelDiffeo {
            saddle,
            global,
            c,
            g,
        })
    }

    /// Same model with the given unfolding coefficients swapped in.
    pub fn with_unfolding(&self, mu_vec: Vec<f64>) -> Result<ModelDiffeo> {
        let mut m = self.clone();
        m.global.mu_vec = mu_vec;
        m.global.validate()?;
        Ok(m)
    }

    /// The return map in the outgoing chart: `n` saddle steps followed by
    /// the global map.
    pub fn return_map(&self, n: u32) -> ReturnMap<'_> {
        ReturnMap { model: self, n }
    }
}

/// Maps of the plane with analytic Jacobians.
pub trait PlanarMap {
    fn apply(&self, p: PlanarPoint) -> Result<PlanarPoint>;
    fn jacobian(&self, p: PlanarPoint) -> Result<Mat2>;

    fn apply_n(&self, p: PlanarPoint, n: u32) -> Result<PlanarPoint> {
        let mut q = p;
        for _ in 0..n {
            q = self.apply(q)?;
        }
        Ok(q)
    }

    /// Chain-rule Jacobian of the n-th iterate; returns the end point too.
    fn jacobian_n(&self, p: PlanarPoint, n: u32) -> Result<(PlanarPoint, Mat2)> {
        let mut q = p;
        let mut jac = Mat2::identity();
        for _ in 0..n {
            jac = self.jacobian(q)?.mul(&jac);
            q = self.apply(q)?;
        }
        Ok((q, jac))
    }
}

/// Return map `outgoing chart -> outgoing chart`: the point `(xb, yb)`
/// rides `n` saddle steps into the incoming chart and then the global map.
#[derive(Debug, Clone)]
pub struct ReturnMap<'a> {
    pub model: &'a ModelDiffeo,
    pub n: u32,
}

impl ReturnMap<'_> {
    /// Incoming-chart coordinates after the saddle passage.
    pub fn saddle_passage(&self, p: PlanarPoint) -> Result<PlanarPoint> {
        let s = &self.model.saddle;
        let xt = s.lambda.powi(self.n as i32) * (1.0 + p.x);
        let yt = s.mu.powi(self.n as i32) * p.y - 1.0;
        let out = PlanarPoint::new(xt, yt);
        if !out.is_finite() {
            return Err(Error::Overflow(format!(
                "saddle passage overflow at n = {}",
                self.n
            )));
        }
        Ok(out)
    }
}

impl PlanarMap for ReturnMap<'_> {
    fn apply(&self, p: PlanarPoint) -> Result<PlanarPoint> {
        let q = self.saddle_passage(p)?;
        self.model.global.apply(q)
    }

    fn jacobian(&self, p: PlanarPoint) -> Result<Mat2> {
        let s = &self.model.saddle;
        let q = self.saddle_passage(p)?;
        let jg = self.model.global.jacobian(q)?;
        let jl = Mat2::diag(s.lambda.powi(self.n as i32), s.mu.powi(self.n as i32));
        Ok(jg.mul(&jl))
    }
}

/// The saddle itself as a planar map (single step).
pub struct SaddleMap<'a>(pub &'a SaddleParams);

impl PlanarMap for SaddleMap<'_> {
    fn apply(&self, p: PlanarPoint) -> Result<PlanarPoint> {
        self.0.local_iterate(p, 1)
    }

    fn jacobian(&self, _p: PlanarPoint) -> Result<Mat2> {
        Ok(self.0.local_jacobian(1))
    }
}

fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}

impl ModelDiffeo {
    /// Flat key-value serialization. Values use the shortest decimal that
    /// round-trips, so read-back is exact.
    pub fn to_kv(&self) -> Vec<(String, String)> {
        let mut kv: Vec<(String, String)> = vec![
            ("lambda".into(), fmt_f64(self.saddle.lambda)),
            ("mu".into(), fmt_f64(self.saddle.mu)),
            (
                "resonance_order".into(),
                self.saddle.resonance_order.to_string(),
            ),
            ("resonance_tol".into(), fmt_f64(self.saddle.resonance_tol)),
            ("alpha".into(), fmt_f64(self.global.alpha)),
            ("beta".into(), fmt_f64(self.global.beta)),
            ("gamma".into(), fmt_f64(self.global.gamma)),
            ("sigma".into(), fmt_f64(self.global.sigma)),
            ("k".into(), self.global.k.to_string()),
        ];
        for (i, m) in self.global.mu_vec.iter().enumerate() {
            kv.push((format!("mu{i}"), fmt_f64(*m)));
        }
        kv.push(("n_global".into(), self.global.n_global.to_string()));
        kv.push((
            "chart_halfwidth".into(),
            fmt_f64(self.global.chart_halfwidth),
        ));
        kv.push(("c".into(), fmt_f64(self.c)));
        for (i, &gc) in self.g.coeffs.iter().enumerate() {
            if gc != 0.0 {
                kv.push((format!("g{i}"), fmt_f64(gc)));
            }
        }
        for (i, j, v) in self.global.h1.poly().terms() {
            kv.push((format!("h1_{i}_{j}"), fmt_f64(v)));
        }
        for (i, j, v) in self.global.h2.poly().terms() {
            kv.push((format!("h2_{i}_{j}"), fmt_f64(v)));
        }
        kv
    }

    pub fn from_kv(kv: &BTreeMap<String, String>) -> Result<ModelDiffeo> {
        let get = |key: &str| -> Result<&String> {
            kv.get(key)
                .ok_or_else(|| Error::Schema(format!("missing required key `{key}`")))
        };
        let parse_f64 = |key: &str| -> Result<f64> {
            get(key)?
                .parse::<f64>()
                .map_err(|e| Error::Parse(format!("key `{key}`: {e}")))
        };
        let parse_usize = |key: &str| -> Result<usize> {
            get(key)?
                .parse::<usize>()
                .map_err(|e| Error::Parse(format!("key `{key}`: {e}")))
        };

        let mut saddle = SaddleParams::new(parse_f64("lambda")?, parse_f64("mu")?);
        if kv.contains_key("resonance_order") {
            saddle.resonance_order = parse_usize("resonance_order")? as u32;
        }
        if kv.contains_key("resonance_tol") {
            saddle.resonance_tol = parse_f64("resonance_tol")?;
        }

        let k = parse_usize("k")?;
        let mut mu_vec = Vec::with_capacity(k);
        for i in 0..k {
            mu_vec.push(parse_f64(&format!("mu{i}"))?);
        }

        let mut h1 = BiPoly::zero();
        let mut h2 = BiPoly::zero();
        let mut g = Poly::zero();
        for (key, value) in kv {
            if let Some(rest) = key.strip_prefix("h1_").or_else(|| key.strip_prefix("h2_")) {
                let mut parts = rest.split('_');
                let (i, j) = match (parts.next(), parts.next(), parts.next()) {
                    (Some(i), Some(j), None) => (
                        i.parse::<usize>()
                            .map_err(|e| Error::Parse(format!("key `{key}`: {e}")))?,
                        j.parse::<usize>()
                            .map_err(|e| Error::Parse(format!("key `{key}`: {e}")))?,
                    ),
                    _ => return Err(Error::Schema(format!("malformed remainder key `{key}`"))),
                };
                let v = value
                    .parse::<f64>()
                    .map_err(|e| Error::Parse(format!("key `{key}`: {e}")))?;
                if key.starts_with("h1_") {
                    h1.set(i, j, v);
                } else {
                    h2.set(i, j, v);
                }
            } else if let Some(idx) = key.strip_prefix('g') {
                if let Ok(i) = idx.parse::<usize>() {
                    let v = value
                        .parse::<f64>()
                        .map_err(|e| Error::Parse(format!("key `{key}`: {e}")))?;
                    while g.coeffs.len() <= i {
                        g.coeffs.push(0.0);
                    }
                    g.coeffs[i] = v;
                }
            }
        }

        let mut global = GlobalMapParams::new(
            parse_f64("alpha")?,
            parse_f64("beta")?,
            parse_f64("gamma")?,
            parse_f64("sigma")?,
            k,
            mu_vec,
        )?
        .with_remainders(
            RemainderPoly::first_kind(h1)?,
            RemainderPoly::second_kind(h2, k)?,
        )?;
        if kv.contains_key("n_global") {
            global.n_global = parse_usize("n_global")? as u32;
        }
        if kv.contains_key("chart_halfwidth") {
            global.chart_halfwidth = parse_f64("chart_halfwidth")?;
        }

        ModelDiffeo::new(saddle, global, parse_f64("c")?, Poly::new(g.coeffs))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_dissipative_boundary() {
        let s = SaddleParams::new(0.5, 2.0);
        let err = s.validate().unwrap_err();
        assert!(matches!(err, Error::InvalidSaddle(_)));
    }

    #[test]
    fn accepts_with_resonance_reported() {
        // lambda mu^3 = 1 exactly: resonant but dissipative.
        let s = SaddleParams::new(0.125, 2.0);
        let report = s.validate().unwrap();
        assert!(report.dissipative);
        assert!(!report.nonresonant);
        assert_eq!(report.resonance_witness, Some((1, 3)));
        assert!((report.saddle_exponent - 3.0).abs() < 1e-12);
        assert!(s.validate_strict().is_err());
    }

    #[test]
    fn desk_saddle_exponent() {
        let s = SaddleParams::new(0.01, 2.0);
        let report = s.validate_strict().unwrap();
        // rho = log 100 / log 2
        assert!((report.saddle_exponent - 6.643856189774724).abs() < 1e-12);
        assert!(s.is_at_least_r_shrinking(6.0));
        assert!(!s.is_at_least_r_shrinking(7.0));
    }

    #[test]
    fn exponent_examples() {
        assert!((SaddleParams::new(0.05, 2.0).saddle_exponent() - 4.321928094887362).abs() < 1e-12);
        let s = SaddleParams::new(0.25, 4.0);
        assert!((s.saddle_exponent() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn local_iterate_examples() {
        let s = SaddleParams::new(0.25, 4.0);
        let p = s.local_iterate(PlanarPoint::new(0.5, 0.25), 1).unwrap();
        assert_eq!((p.x, p.y), (0.125, 1.0));

        let s = SaddleParams::new(0.5, 2.0);
        let q = s.local_iterate(PlanarPoint::new(1.0, 1.0), 3).unwrap();
        assert_eq!((q.x, q.y), (0.125, 8.0));
        let id = s.local_iterate(PlanarPoint::new(0.3, -0.7), 0).unwrap();
        assert_eq!((id.x, id.y), (0.3, -0.7));
    }

    #[test]
    fn local_iterate_overflow_guard() {
        let s = SaddleParams::new(0.5, 2.0);
        let err = s
            .local_iterate(PlanarPoint::new(0.0, 1e308), 2)
            .unwrap_err();
        assert!(matches!(err, Error::Overflow(_)));
    }

    #[test]
    fn semigroup_property() {
        let s = SaddleParams::new(0.37, 1.9);
        let p = PlanarPoint::new(0.21, -0.43);
        let a = s.local_iterate(p, 7).unwrap();
        let b = s.local_iterate(s.local_iterate(p, 3).unwrap(), 4).unwrap();
        assert!((a.x - b.x).abs() <= 4.0 * f64::EPSILON * a.x.abs());
        assert!((a.y - b.y).abs() <= 4.0 * f64::EPSILON * a.y.abs());
    }

    #[test]
    fn global_apply_examples() {
        // All terms vanish at the origin.
        let g = GlobalMapParams::new(1.0, 0.5, 1.0, 0.7, 2, vec![0.0, 0.0]).unwrap();
        let o = g.apply(PlanarPoint::new(0.0, 0.0)).unwrap();
        assert_eq!((o.x, o.y), (0.0, 0.0));

        let g = GlobalMapParams::new(1.0, 0.0, 1.0, 0.0, 2, vec![0.0, 0.0]).unwrap();
        let o = g.apply(PlanarPoint::new(0.3, 0.5)).unwrap();
        assert_eq!((o.x, o.y), (0.5, 0.25));

        let g = GlobalMapParams::new(1.0, 0.0, 1.0, 1.0, 2, vec![-2.0, 0.0]).unwrap();
        let o = g.apply(PlanarPoint::new(0.0, 1.0)).unwrap();
        assert_eq!((o.x, o.y), (1.0, -1.0));
    }

    #[test]
    fn global_domain_violation() {
        let g = GlobalMapParams::new(1.0, 0.0, 1.0, 0.0, 2, vec![0.0, 0.0]).unwrap();
        let err = g.apply(PlanarPoint::new(1.5, 0.0)).unwrap_err();
        assert!(matches!(
            err,
            Error::DomainEscape {
                stage: Stage::Global,
                ..
            }
        ));
    }

    #[test]
    fn jacobian_power_rule() {
        let g = GlobalMapParams::new(1.0, 0.0, 1.0, 0.0, 3, vec![0.0, 0.0, 0.0]).unwrap();
        let j = g.jacobian(PlanarPoint::new(0.0, 1.0)).unwrap();
        assert_eq!(j.d, 3.0);
    }

    #[test]
    fn remainder_vanishing_enforced() {
        let bad = BiPoly::from_terms(&[(0, 1, 0.5)]);
        assert!(RemainderPoly::first_kind(bad).is_err());
        let bad2 = BiPoly::from_terms(&[(0, 2, 0.5)]);
        assert!(RemainderPoly::second_kind(bad2, 2).is_err());
        // x y is fine for both kinds.
        let ok = BiPoly::from_terms(&[(1, 1, 0.5)]);
        assert!(RemainderPoly::first_kind(ok.clone()).is_ok());
        assert!(RemainderPoly::second_kind(ok, 3).is_ok());
        // y^3 is fine for h2 with k = 2.
        let cubic = BiPoly::from_terms(&[(0, 3, 0.25)]);
        let h2 = RemainderPoly::second_kind(cubic, 2).unwrap();
        assert_eq!(h2.eval(0.0, 0.0), 0.0);
        assert_eq!(h2.dy(0.0, 0.0), 0.0);
    }

    #[test]
    fn kv_roundtrip_exact() {
        let h1 =
            RemainderPoly::first_kind(BiPoly::from_terms(&[(1, 1, 0.3), (0, 2, 0.1)])).unwrap();
        let h2 = RemainderPoly::second_kind(BiPoly::from_terms(&[(1, 1, -0.25), (0, 3, 0.7)]), 2)
            .unwrap();
        let global = GlobalMapParams::new(1.25, -0.375, 0.9, 1.0, 2, vec![0.1, -0.2])
            .unwrap()
            .with_remainders(h1, h2)
            .unwrap();
        let model = ModelDiffeo::new(
            SaddleParams::new(0.01, 2.0),
            global,
            1.0,
            Poly::new(vec![0.0, 0.0, 0.0, 0.125]),
        )
        .unwrap();
        let kv: BTreeMap<String, String> = model.to_kv().into_iter().collect();
        let back = ModelDiffeo::from_kv(&kv).unwrap();
        assert_eq!(back, model);
    }
}
