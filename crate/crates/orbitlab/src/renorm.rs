//! Rescaled return maps and their one-dimensional polynomial limits.
//!
//! For tangency order `k >= 2` the return map over `n` saddle steps,
//! with the unfolding coefficients on the schedule below, converges on
//! the normalized square `[-2, 2]^2` to the family
//! `(x, y) -> (y, y^k + sum M_i y^i)`. This module builds the rescaled
//! composition honestly (no symbolic cancellation), so the measured
//! distances are the real thing.

use serde::Serialize;

use crate::error::{Error, Result, Stage};
use crate::geom::{Mat2, PlanarPoint};
use crate::model::{ModelDiffeo, PlanarMap};

/// Coordinate rescaling for step `n`: `(xb, yb) -> (tau^n xb,
/// tau^n (mu^n yb - 1))` with `tau = mu^(1/(k-1))`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct RescalePlan {
    pub n: u32,
    pub k: usize,
    pub tau: f64,
    pub mu: f64,
}

impl RescalePlan {
    pub fn new(k: usize, mu: f64, n: u32) -> Result<Self> {
        if k < 2 {
            return Err(Error::invalid("rescaling requires tangency order k >= 2"));
        }
        if n < 1 {
            return Err(Error::invalid("rescaling step n must be at least 1"));
        }
        let tau = if k == 2 {
            mu
        } else {
            mu.powf(1.0 / (k as f64 - 1.0))
        };
        if !(tau > 1.0) {
            return Err(Error::invalid("stretch factor tau must exceed 1"));
        }
        Ok(RescalePlan { n, k, tau, mu })
    }

    /// Outgoing chart -> normalized coordinates.
    pub fn forward(&self, p: PlanarPoint) -> PlanarPoint {
        let tn = self.tau.powi(self.n as i32);
        let mn = self.mu.powi(self.n as i32);
        PlanarPoint::new(tn * p.x, tn * (mn * p.y - 1.0))
    }

    /// Normalized coordinates -> outgoing chart.
    pub fn inverse(&self, p: PlanarPoint) -> PlanarPoint {
        let tn_inv = self.tau.powi(-(self.n as i32));
        let mn_inv = self.mu.powi(-(self.n as i32));
        PlanarPoint::new(tn_inv * p.x, mn_inv * (tn_inv * p.y + 1.0))
    }
}

/// Unfolding-coefficient schedule that produces the limit family with
/// coefficients `m`:
///
/// `mu_0(n) = mu^(-k n / (k-1)) M_0 - sigma lambda^n + mu^(-n)`,
/// `mu_i(n) = mu^(-(k-i) n / (k-1)) M_i` for `i = 1..k-1`.
///
/// The decay corrections sit in `mu_0` only.
pub fn parameter_schedule(
    k: usize,
    m: &[f64],
    lambda: f64,
    mu: f64,
    sigma: f64,
    n: u32,
) -> Result<Vec<f64>> {
    if k < 2 {
        return Err(Error::invalid("schedule requires k >= 2"));
    }
    if m.len() != k {
        return Err(Error::invalid(format!(
            "expected {k} limit coefficients, got {}",
            m.len()
        )));
    }
    let km1 = (k - 1) as f64;
    let nf = n as f64;
    let mut mu_vec = Vec::with_capacity(k);
    let mu0 = mu.powf(-(k as f64) * nf / km1) * m[0] - sigma * lambda.powi(n as i32)
        + mu.powi(-(n as i32));
    mu_vec.push(mu0);
    for (i, &mi) in m.iter().enumerate().skip(1) {
        mu_vec.push(mu.powf(-((k - i) as f64) * nf / km1) * mi);
    }
    Ok(mu_vec)
}

/// The limit family `(x, y) -> (y, y^k + sum_i M_i y^i)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimitMap {
    pub k: usize,
    pub m: Vec<f64>,
}

impl LimitMap {
    pub fn new(k: usize, m: Vec<f64>) -> Result<Self> {
        if k < 2 {
            return Err(Error::invalid("limit map requires k >= 2"));
        }
        if m.len() != k {
            return Err(Error::invalid(format!(
                "expected {k} coefficients, got {}",
                m.len()
            )));
        }
        if m.iter().any(|c| !c.is_finite()) {
            return Err(Error::invalid("limit coefficients must be finite"));
        }
        Ok(LimitMap { k, m })
    }

    /// The scalar part `y -> y^k + sum M_i y^i`.
    pub fn scalar(&self, y: f64) -> f64 {
        let mut unfold = 0.0;
        for &c in self.m.iter().rev() {
            unfold = unfold * y + c;
        }
        y.powi(self.k as i32) + unfold
    }

    pub fn scalar_derivative(&self, y: f64) -> f64 {
        let mut d = 0.0;
        for (i, &c) in self.m.iter().enumerate().skip(1).rev() {
            d = d * y + c * i as f64;
        }
        self.k as f64 * y.powi(self.k as i32 - 1) + d
    }

    /// Coefficient vector of the scalar part, ascending.
    pub fn scalar_coeffs(&self) -> Vec<f64> {
        let mut coeffs = self.m.clone();
        coeffs.resize(self.k + 1, 0.0);
        coeffs[self.k] += 1.0;
        coeffs
    }
}

impl PlanarMap for LimitMap {
    fn apply(&self, p: PlanarPoint) -> Result<PlanarPoint> {
        Ok(PlanarPoint::new(p.y, self.scalar(p.y)))
    }

    fn jacobian(&self, p: PlanarPoint) -> Result<Mat2> {
        Ok(Mat2::new(0.0, 1.0, 0.0, self.scalar_derivative(p.y)))
    }
}

/// The rescaled return map `L o R_n o (global o local^n) o R_n^{-1} o
/// L^{-1}` where `L` is the diagonal conjugacy normalizing `alpha` and
/// `gamma` to 1.
#[derive(Debug, Clone)]
pub struct RescaledReturnMap {
    model: ModelDiffeo,
    pub plan: RescalePlan,
    /// Diagonal conjugacy (x, y) -> (px, qy).
    pub conj_p: f64,
    pub conj_q: f64,
    /// Half-width of the admitted normalized square.
    pub entry_halfwidth: f64,
}

impl RescaledReturnMap {
    /// Build the step-`n` rescaled map targeting the limit family
    /// `limit`. The schedule is applied to a copy of the model; the
    /// conjugacy undoes `alpha` and `gamma`, and the schedule targets the
    /// pre-conjugacy coefficients so the normalized limit is exactly
    /// `limit`.
    pub fn new(model: &ModelDiffeo, limit: &LimitMap, n: u32) -> Result<Self> {
        if model.global.k != limit.k {
            return Err(Error::invalid(format!(
                "model tangency order {} does not match limit order {}",
                model.global.k, limit.k
            )));
        }
        let k = limit.k;
        let plan = RescalePlan::new(k, model.saddle.mu, n)?;
        let alpha = model.global.alpha;
        let gamma = model.global.gamma;
        let km1 = (k - 1) as f64;
        let q = if gamma > 0.0 {
            gamma.powf(1.0 / km1)
        } else if (k - 1) % 2 == 1 {
            -((-gamma).powf(1.0 / km1))
        } else {
            return Err(Error::invalid(
                "no real normalizing conjugacy: gamma < 0 with even k - 1",
            ));
        };
        let p = q / alpha;
        // Pre-distort the target coefficients so the post-conjugacy limit
        // lands on `limit.m`.
        let m_raw: Vec<f64> = limit
            .m
            .iter()
            .enumerate()
            .map(|(i, &mi)| mi * q.powi(i as i32 - 1))
            .collect();
        let schedule = parameter_schedule(
            k,
            &m_raw,
            model.saddle.lambda,
            model.saddle.mu,
            model.global.sigma,
            n,
        )?;
        let model = model.with_unfolding(schedule)?;
        Ok(RescaledReturnMap {
            model,
            plan,
            conj_p: p,
            conj_q: q,
            entry_halfwidth: 2.0,
        })
    }

    pub fn unfolding(&self) -> &[f64] {
        &self.model.global.mu_vec
    }
}

impl PlanarMap for RescaledReturnMap {
    fn apply(&self, p: PlanarPoint) -> Result<PlanarPoint> {
        let hw = self.entry_halfwidth * 1.0000001;
        if p.x.abs() > hw || p.y.abs() > hw {
            return Err(Error::DomainEscape {
                stage: Stage::RescaleIn,
                x: p.x,
                y: p.y,
            });
        }
        let chart = self
            .plan
            .inverse(PlanarPoint::new(p.x / self.conj_p, p.y / self.conj_q));
        let ret = self.model.return_map(self.plan.n);
        let passed = ret.saddle_passage(chart).map_err(|_| Error::DomainEscape {
            stage: Stage::Local,
            x: chart.x,
            y: chart.y,
        })?;
        let image = self.model.global.apply(passed)?;
        let out = self.plan.forward(image);
        let out = PlanarPoint::new(self.conj_p * out.x, self.conj_q * out.y);
        if !out.is_finite() {
            return Err(Error::DomainEscape {
                stage: Stage::RescaleOut,
                x: out.x,
                y: out.y,
            });
        }
        Ok(out)
    }

    fn jacobian(&self, p: PlanarPoint) -> Result<Mat2> {
        let chart = self
            .plan
            .inverse(PlanarPoint::new(p.x / self.conj_p, p.y / self.conj_q));
        let ret = self.model.return_map(self.plan.n);
        let jr = ret.jacobian(chart)?;
        let tn = self.plan.tau.powi(self.plan.n as i32);
        let mn = self.plan.mu.powi(self.plan.n as i32);
        // d(forward) = diag(tau^n, tau^n mu^n), d(inverse) its inverse.
        let fwd = Mat2::diag(tn * self.conj_p, tn * mn * self.conj_q);
        let inv = Mat2::diag(
            1.0 / (tn * self.conj_p),
            1.0 / (tn * mn * self.conj_q),
        );
        Ok(fwd.mul(&jr).mul(&inv))
    }
}

/// One row of a convergence table: grid seminorm distances between the
/// rescaled return map and the limit family, per difference order.
#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceRow {
    pub n: u32,
    pub d0: f64,
    pub d1: Option<f64>,
    pub d2: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceReport {
    pub rows: Vec<ConvergenceRow>,
    /// Whether the d0 column decreases strictly across the rows.
    pub d0_strictly_decreasing: bool,
    pub grid_step: f64,
    pub order: u8,
}

/// Grid specification on the normalized square.
#[derive(Debug, Clone, Copy)]
pub struct GridSpec {
    pub halfwidth: f64,
    pub step: f64,
}

impl GridSpec {
    pub fn standard(step: f64) -> Result<Self> {
        if !(step > 0.0 && step <= 1.0) {
            return Err(Error::invalid("grid step must lie in (0, 1]"));
        }
        Ok(GridSpec {
            halfwidth: 2.0,
            step,
        })
    }

    fn nodes(&self) -> Vec<f64> {
        let count = (2.0 * self.halfwidth / self.step).round() as usize;
        (0..=count)
            .map(|i| -self.halfwidth + i as f64 * self.step)
            .collect()
    }
}

/// Seminorm distances between two planar maps on the grid, with centered
/// differences up to `order <= 2`.
pub fn cr_distance(
    map: &dyn PlanarMap,
    reference: &dyn PlanarMap,
    grid: GridSpec,
    order: u8,
) -> Result<(f64, Option<f64>, Option<f64>)> {
    if order > 2 {
        return Err(Error::invalid(
            "difference order must be at most 2 (higher orders drown in rounding)",
        ));
    }
    let nodes = grid.nodes();
    let nx = nodes.len();
    // diff[i][j] = F(grid) - ref(grid), component pair.
    let mut diff = vec![vec![(0.0f64, 0.0f64); nx]; nx];
    for (i, &x) in nodes.iter().enumerate() {
        for (j, &y) in nodes.iter().enumerate() {
            let p = PlanarPoint::new(x, y);
            let a = map.apply(p)?;
            let b = reference.apply(p)?;
            diff[i][j] = (a.x - b.x, a.y - b.y);
        }
    }
    let mut d0: f64 = 0.0;
    for row in &diff {
        for &(dx, dy) in row {
            d0 = d0.max(dx.abs()).max(dy.abs());
        }
    }
    let h = grid.step;
    let mut d1: Option<f64> = None;
    let mut d2: Option<f64> = None;
    if order >= 1 {
        let mut worst: f64 = 0.0;
        for i in 1..nx - 1 {
            for j in 1..nx - 1 {
                let ddx = (
                    (diff[i + 1][j].0 - diff[i - 1][j].0) / (2.0 * h),
                    (diff[i + 1][j].1 - diff[i - 1][j].1) / (2.0 * h),
                );
                let ddy = (
                    (diff[i][j + 1].0 - diff[i][j - 1].0) / (2.0 * h),
                    (diff[i][j + 1].1 - diff[i][j - 1].1) / (2.0 * h),
                );
                for v in [ddx.0, ddx.1, ddy.0, ddy.1] {
                    worst = worst.max(v.abs());
                }
            }
        }
        d1 = Some(worst);
    }
    if order >= 2 {
        let mut worst: f64 = 0.0;
        let h2 = h * h;
        for i in 1..nx - 1 {
            for j in 1..nx - 1 {
                let dxx = (
                    (diff[i + 1][j].0 - 2.0 * diff[i][j].0 + diff[i - 1][j].0) / h2,
                    (diff[i + 1][j].1 - 2.0 * diff[i][j].1 + diff[i - 1][j].1) / h2,
                );
                let dyy = (
                    (diff[i][j + 1].0 - 2.0 * diff[i][j].0 + diff[i][j - 1].0) / h2,
                    (diff[i][j + 1].1 - 2.0 * diff[i][j].1 + diff[i][j - 1].1) / h2,
                );
                for v in [dxx.0, dxx.1, dyy.0, dyy.1] {
                    worst = worst.max(v.abs());
                }
            }
        }
        d2 = Some(worst);
    }
    Ok((d0, d1, d2))
}

/// Run `cr_distance` against the limit family over a range of steps.
pub fn convergence_sweep(
    model: &ModelDiffeo,
    limit: &LimitMap,
    n_range: std::ops::RangeInclusive<u32>,
    grid: GridSpec,
    order: u8,
) -> Result<ConvergenceReport> {
    if n_range.is_empty() {
        return Err(Error::invalid("empty n range"));
    }
    let mut rows = Vec::new();
    for n in n_range {
        let rescaled = RescaledReturnMap::new(model, limit, n)?;
        let (d0, d1, d2) = cr_distance(&rescaled, limit, grid, order)?;
        rows.push(ConvergenceRow { n, d0, d1, d2 });
    }
    let d0_strictly_decreasing = rows.windows(2).all(|w| w[1].d0 < w[0].d0);
    Ok(ConvergenceReport {
        rows,
        d0_strictly_decreasing,
        grid_step: grid.step,
        order,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{GlobalMapParams, RemainderPoly, SaddleParams};
    use crate::poly::{BiPoly, Poly};

    fn desk_model(sigma: f64, beta: f64, with_remainders: bool) -> ModelDiffeo {
        let mut global = GlobalMapParams::new(1.0, beta, 1.0, sigma, 2, vec![0.0, 0.0]).unwrap();
        if with_remainders {
            let h1 = RemainderPoly::first_kind(BiPoly::from_terms(&[
                (1, 1, 0.3),
                (0, 2, 0.3),
            ]))
            .unwrap();
            let h2 = RemainderPoly::second_kind(
                BiPoly::from_terms(&[(1, 1, 0.3), (0, 3, 0.3)]),
                2,
            )
            .unwrap();
            global = global.with_remainders(h1, h2).unwrap();
        }
        ModelDiffeo::new(SaddleParams::new(0.01, 2.0), global, 1.0, Poly::zero()).unwrap()
    }

    #[test]
    fn schedule_example() {
        let mu_vec = parameter_schedule(2, &[-2.0, 0.0], 0.1, 3.0, 1.0, 5).unwrap();
        // 3^-10 * (-2) - 0.1^5 + 3^-5
        let expect = 1.0 / 243.0 - 2.0 / 59049.0 - 1e-5;
        assert!((mu_vec[0] - expect).abs() < 1e-15);
        assert_eq!(mu_vec[1], 0.0);
    }

    #[test]
    fn schedule_survives_only_mu_n_term() {
        let mu_vec = parameter_schedule(2, &[0.0, 0.0], 0.1, 3.0, 0.0, 4).unwrap();
        assert_eq!(mu_vec[0], 3.0f64.powi(-4));
        assert_eq!(mu_vec[1], 0.0);
    }

    #[test]
    fn schedule_decays() {
        let m = [1.5, -0.7];
        let mut prev = f64::INFINITY;
        for n in 10..25 {
            let mu_vec = parameter_schedule(2, &m, 0.01, 2.0, 1.0, n).unwrap();
            let norm = mu_vec.iter().map(|v| v.abs()).fold(0.0, f64::max);
            assert!(norm < prev);
            prev = norm;
        }
    }

    #[test]
    fn schedule_rejects_k1() {
        assert!(parameter_schedule(1, &[0.0], 0.1, 2.0, 0.0, 3).is_err());
    }

    #[test]
    fn limit_map_fixed_points() {
        let l = LimitMap::new(2, vec![-2.0, 0.0]).unwrap();
        let p = l.apply(PlanarPoint::new(2.0, 2.0)).unwrap();
        assert_eq!((p.x, p.y), (2.0, 2.0));
        let q = l.apply(PlanarPoint::new(-1.0, -1.0)).unwrap();
        assert_eq!((q.x, q.y), (-1.0, -1.0));
        let z = LimitMap::new(2, vec![0.0, 0.0]).unwrap();
        let o = z.apply(PlanarPoint::new(0.7, 0.0)).unwrap();
        assert_eq!((o.x, o.y), (0.0, 0.0));
    }

    #[test]
    fn limit_map_jacobian() {
        let l = LimitMap::new(2, vec![-2.0, 0.0]).unwrap();
        let j = l.jacobian(PlanarPoint::new(2.0, 2.0)).unwrap();
        assert_eq!((j.a, j.b, j.c, j.d), (0.0, 1.0, 0.0, 4.0));
    }

    #[test]
    fn rescale_roundtrip_identity() {
        let plan = RescalePlan::new(2, 2.0, 7).unwrap();
        for &(x, y) in &[(0.0, 0.0), (2.0, -2.0), (-1.3, 0.7), (1.9, 1.9)] {
            let p = PlanarPoint::new(x, y);
            let back = plan.forward(plan.inverse(p));
            assert!((back.x - x).abs() < 1e-12);
            assert!((back.y - y).abs() < 1e-12);
        }
    }

    #[test]
    fn exact_limit_configuration_is_flat() {
        // No remainders, beta = sigma = 0: only rounding remains.
        let model = desk_model(0.0, 0.0, false);
        let limit = LimitMap::new(2, vec![-2.0, 0.0]).unwrap();
        for n in [1u32, 5, 10] {
            let rescaled = RescaledReturnMap::new(&model, &limit, n).unwrap();
            let grid = GridSpec::standard(0.5).unwrap();
            let (d0, _, _) = cr_distance(&rescaled, &limit, grid, 0).unwrap();
            assert!(d0 < 1e-12, "n = {n}: d0 = {d0:e}");
        }
    }

    #[test]
    fn image_of_origin_approaches_limit_value() {
        let model = desk_model(1.0, 0.0, false);
        let limit = LimitMap::new(2, vec![-2.0, 0.0]).unwrap();
        let rescaled = RescaledReturnMap::new(&model, &limit, 8).unwrap();
        let img = rescaled.apply(PlanarPoint::new(0.0, 0.0)).unwrap();
        // Limit sends the origin to (0, -2).
        assert!(img.x.abs() < 1e-6);
        assert!((img.y + 2.0).abs() < 1e-6);
    }

    #[test]
    fn desk_configuration_converges() {
        let model = desk_model(1.0, 0.3, true);
        let limit = LimitMap::new(2, vec![-2.0, 0.0]).unwrap();
        let grid = GridSpec::standard(0.1).unwrap();
        let report = convergence_sweep(&model, &limit, 2..=10, grid, 1).unwrap();
        assert!(report.d0_strictly_decreasing);
        assert!(report.rows.last().unwrap().d0 < 0.05);
    }

    #[test]
    fn conjugacy_normalizes_alpha_gamma() {
        // alpha = 2, gamma = 4: conjugacy must still land on phi_M.
        let global = GlobalMapParams::new(2.0, 0.0, 4.0, 0.0, 2, vec![0.0, 0.0]).unwrap();
        let model =
            ModelDiffeo::new(SaddleParams::new(0.01, 2.0), global, 1.0, Poly::zero()).unwrap();
        let limit = LimitMap::new(2, vec![-2.0, 0.0]).unwrap();
        let rescaled = RescaledReturnMap::new(&model, &limit, 10).unwrap();
        let grid = GridSpec::standard(0.5).unwrap();
        let (d0, _, _) = cr_distance(&rescaled, &limit, grid, 0).unwrap();
        assert!(d0 < 1e-9, "d0 = {d0:e}");
    }

    #[test]
    fn stage_tagged_domain_error() {
        // Shrink the global chart so the passage escapes.
        let mut model = desk_model(0.0, 0.0, false);
        model.global.chart_halfwidth = 1e-3;
        let limit = LimitMap::new(2, vec![-2.0, 0.0]).unwrap();
        let rescaled = RescaledReturnMap::new(&model, &limit, 2).unwrap();
        let err = rescaled.apply(PlanarPoint::new(0.0, 2.0)).unwrap_err();
        match err {
            Error::DomainEscape { stage, .. } => assert_eq!(stage, Stage::Global),
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn sweep_rejects_empty_range_and_high_order() {
        let model = desk_model(0.0, 0.0, false);
        let limit = LimitMap::new(2, vec![-2.0, 0.0]).unwrap();
        let grid = GridSpec::standard(0.5).unwrap();
        #[allow(clippy::reversed_empty_ranges)]
        let empty = 5..=4;
        assert!(convergence_sweep(&model, &limit, empty, grid, 0).is_err());
        let rescaled = RescaledReturnMap::new(&model, &limit, 3).unwrap();
        assert!(cr_distance(&rescaled, &limit, grid, 3).is_err());
    }

    #[test]
    fn sweep_row_count() {
        let model = desk_model(0.0, 0.0, false);
        let limit = LimitMap::new(2, vec![-2.0, 0.0]).unwrap();
        let grid = GridSpec::standard(0.5).unwrap();
        let report = convergence_sweep(&model, &limit, 5..=7, grid, 2).unwrap();
        assert_eq!(report.rows.len(), 3);
        assert!(report.rows.iter().all(|r| r.d1.is_some() && r.d2.is_some()));
    }
}
