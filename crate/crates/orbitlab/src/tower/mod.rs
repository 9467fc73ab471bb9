//! Horseshoe rectangle geometry, tower index selection, and localized
//! bump perturbations.
//!
//! The step-n rectangle sits at height `delta_n = mu^-n` over the stable
//! manifold; its return image is a parabolic fold whose bottom clears the
//! stable manifold by the scale `delta_n^rho = lambda^n`. A tower picks
//! indices `n_1 < n_2 < ...` so each fold still crosses the next, smaller
//! rectangle; the leftover vertical gaps shrink like `delta^(rho - r)`,
//! which is what makes arbitrarily flat tangencies reachable by small
//! pushes.

pub mod tangency;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geom::{Interval, Mat2, PlanarPoint};
use crate::model::{ModelDiffeo, PlanarMap};

pub use tangency::{
    derivative_scaling_check, tangency_order_solver, DerivativeScalingReport, ScalingEntry,
    TangencyOpts, TangencySolveState,
};

/// The source rectangle at step n in the outgoing chart: centered at
/// height `delta_n` over the tangency point.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct RectangleTn {
    pub n: u32,
    pub delta: f64,
    /// Vertical side `2 delta^(3/2)`.
    pub height: f64,
    /// Horizontal side `3 c delta^(1/2)`.
    pub width: f64,
}

/// The image of the source rectangle after the saddle passage, in the
/// incoming chart: a thin vertical strip near the incoming tangency point.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ImageRectangle {
    pub n: u32,
    /// Horizontal center `delta_n^rho = lambda^n`.
    pub center_x: f64,
    /// Horizontal side `3 c delta^(1/2) lambda^n`.
    pub width: f64,
    /// Vertical side `2 delta^(1/2)`.
    pub height: f64,
    /// Distance scale of the returned fold from the stable manifold,
    /// `delta_n^rho`, computed as `lambda^n` (the two are algebraically
    /// identical).
    pub stable_distance_scale: f64,
}

/// Both rectangles of the step-n horseshoe.
pub fn rectangle_geometry(model: &ModelDiffeo, n: u32) -> Result<(RectangleTn, ImageRectangle)> {
    if n < 1 {
        return Err(Error::invalid("rectangle index n must be at least 1"));
    }
    model.saddle.validate()?;
    let s = &model.saddle;
    let delta = s.mu.powi(-(n as i32));
    let sqrt_delta = delta.sqrt();
    let source = RectangleTn {
        n,
        delta,
        height: 2.0 * delta * sqrt_delta,
        width: 3.0 * model.c * sqrt_delta,
    };
    let lam_n = s.lambda.powi(n as i32);
    let image = ImageRectangle {
        n,
        center_x: lam_n,
        width: 3.0 * model.c * sqrt_delta * lam_n,
        height: 2.0 * sqrt_delta,
        stable_distance_scale: lam_n,
    };
    Ok((source, image))
}

/// The parabolic fold: global image of the step-n strip's core curve,
/// parametrized by the incoming-chart height.
#[derive(Debug, Clone)]
pub struct FoldCurve {
    pub n: u32,
    center_x: f64,
    samples: Vec<(f64, PlanarPoint)>,
    /// Fold minimum (vertex), refined by derivative bisection.
    pub vertex: PlanarPoint,
    pub max_y: f64,
}

impl FoldCurve {
    pub fn compute(model: &ModelDiffeo, n: u32, sample_count: usize) -> Result<FoldCurve> {
        let (_, image) = rectangle_geometry(model, n)?;
        let half = image.height / 2.0;
        let cx = image.center_x;
        let count = sample_count.max(256);
        let mut samples = Vec::with_capacity(count + 1);
        for i in 0..=count {
            let yt = -half + image.height * i as f64 / count as f64;
            let p = model.global.apply(PlanarPoint::new(cx, yt))?;
            samples.push((yt, p));
        }
        // Slope of the fold height along the strip, for extremum
        // refinement.
        let slope = |yt: f64| -> Result<f64> {
            Ok(model.global.jacobian(PlanarPoint::new(cx, yt))?.d)
        };
        let mut min_y = f64::INFINITY;
        let mut min_arg = 0.0;
        let mut max_y = f64::NEG_INFINITY;
        for &(yt, p) in &samples {
            if p.y < min_y {
                min_y = p.y;
                min_arg = yt;
            }
            max_y = max_y.max(p.y);
        }
        // Refine the vertex by bisecting the slope sign change around the
        // sampled minimum; keep the sampled value if the minimum sits at
        // the strip boundary.
        let step = image.height / count as f64;
        let lo = (min_arg - step).max(-half);
        let hi = (min_arg + step).min(half);
        let vertex_arg = if slope(lo)? < 0.0 && slope(hi)? > 0.0 {
            bisect_slope(&slope, lo, hi)?
        } else {
            min_arg
        };
        let vertex = model.global.apply(PlanarPoint::new(cx, vertex_arg))?;
        let vertex = if vertex.y <= min_y {
            vertex
        } else {
            model.global.apply(PlanarPoint::new(cx, min_arg))?
        };
        Ok(FoldCurve {
            n,
            center_x: cx,
            samples,
            vertex,
            max_y,
        })
    }

    /// Interpolated-and-bisected crossings of the horizontal level: the
    /// outgoing-chart points where the fold height equals `level`.
    fn level_crossings(&self, model: &ModelDiffeo, level: f64) -> Result<Vec<PlanarPoint>> {
        let value = |yt: f64| -> Result<f64> {
            Ok(model
                .global
                .apply(PlanarPoint::new(self.center_x, yt))?
                .y
                - level)
        };
        let mut out = Vec::new();
        for w in self.samples.windows(2) {
            let (y0, p0) = w[0];
            let (y1, _) = w[1];
            let v0 = p0.y - level;
            let v1 = w[1].1.y - level;
            if v0 == 0.0 {
                out.push(p0);
            } else if v0 * v1 < 0.0 {
                let mut lo = y0;
                let mut hi = y1;
                let mut flo = v0;
                for _ in 0..80 {
                    let mid = 0.5 * (lo + hi);
                    let vm = value(mid)?;
                    if vm == 0.0 {
                        lo = mid;
                        break;
                    }
                    if vm * flo < 0.0 {
                        hi = mid;
                    } else {
                        lo = mid;
                        flo = vm;
                    }
                }
                let yt = 0.5 * (lo + hi);
                out.push(model.global.apply(PlanarPoint::new(self.center_x, yt))?);
            }
        }
        Ok(out)
    }
}

fn bisect_slope(slope: &dyn Fn(f64) -> Result<f64>, mut lo: f64, mut hi: f64) -> Result<f64> {
    let mut slo = slope(lo)?;
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        let sm = slope(mid)?;
        if sm == 0.0 {
            return Ok(mid);
        }
        if sm * slo < 0.0 {
            hi = mid;
        } else {
            lo = mid;
            slo = sm;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Outcome of the crossing test between a fold and a target rectangle.
#[derive(Debug, Clone, Serialize)]
pub enum Crossing {
    /// The fold pokes through the rectangle's bottom edge from below
    /// within its width: the two bound an open region.
    True(CrossingWitness),
    False { reason: String },
    /// Margins inside the tolerance band; grazing configuration.
    Indeterminate { margin: f64 },
}

impl Crossing {
    pub fn is_true(&self) -> bool {
        matches!(self, Crossing::True(_))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CrossingWitness {
    /// Gap between the rectangle's bottom edge and the fold's vertex.
    pub bottom_clearance: f64,
    /// How far the fold rises past the bottom edge.
    pub rise_past_bottom: f64,
    /// x-interval spanned by the bottom-edge crossings.
    pub crossing: Interval,
    /// Slack between the crossing positions and the rectangle's width.
    pub width_slack: f64,
}

/// Does the step-n fold cross the step-m rectangle horseshoe-like?
///
/// The fold must dip below the rectangle's bottom edge, rise back past
/// it, and make the crossing inside the rectangle's horizontal extent;
/// then the fold and the rectangle boundary bound an open set. Margins
/// within tolerance are reported indeterminate rather than guessed.
pub fn horseshoe_test(model: &ModelDiffeo, n: u32, m: u32, rel_tol: f64) -> Result<Crossing> {
    let fold = FoldCurve::compute(model, n, 4096)?;
    horseshoe_test_with_fold(model, &fold, m, rel_tol)
}

fn horseshoe_test_with_fold(
    model: &ModelDiffeo,
    fold: &FoldCurve,
    m: u32,
    rel_tol: f64,
) -> Result<Crossing> {
    let (target, _) = rectangle_geometry(model, m)?;
    let band_lo = target.delta - target.height / 2.0;
    let half_w = target.width / 2.0;

    let vertex_y = fold.vertex.y;
    let vertex_noise = 64.0 * f64::EPSILON * (vertex_y.abs() + band_lo.abs()) + f64::MIN_POSITIVE;
    let bottom_clearance = band_lo - vertex_y;
    if bottom_clearance.abs() <= rel_tol * band_lo + vertex_noise {
        return Ok(Crossing::Indeterminate {
            margin: bottom_clearance,
        });
    }
    if bottom_clearance < 0.0 {
        return Ok(Crossing::False {
            reason: format!(
                "fold vertex {vertex_y:.6e} does not clear the rectangle bottom {band_lo:.6e}"
            ),
        });
    }
    let rise_past_bottom = fold.max_y - band_lo;
    if rise_past_bottom.abs() <= rel_tol * (band_lo + fold.max_y.abs()) {
        return Ok(Crossing::Indeterminate {
            margin: rise_past_bottom,
        });
    }
    if rise_past_bottom < 0.0 {
        return Ok(Crossing::False {
            reason: format!(
                "fold top {:.6e} stays below the rectangle bottom {band_lo:.6e}",
                fold.max_y
            ),
        });
    }
    let crossings = fold.level_crossings(model, band_lo)?;
    if crossings.len() < 2 {
        return Ok(Crossing::Indeterminate { margin: 0.0 });
    }
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for p in &crossings {
        lo = lo.min(p.x);
        hi = hi.max(p.x);
    }
    let reach = lo.abs().max(hi.abs());
    let width_slack = half_w - reach;
    if width_slack.abs() <= rel_tol * half_w {
        return Ok(Crossing::Indeterminate {
            margin: width_slack,
        });
    }
    if width_slack < 0.0 {
        return Ok(Crossing::False {
            reason: format!(
                "bottom-edge crossings [{lo:.6e}, {hi:.6e}] leave the rectangle half-width {half_w:.6e}"
            ),
        });
    }
    Ok(Crossing::True(CrossingWitness {
        bottom_clearance,
        rise_past_bottom,
        crossing: Interval::new(lo, hi),
        width_slack,
    }))
}

/// One floor saddle of a tower: the horseshoe fixed point of the step-n
/// return map.
#[derive(Debug, Clone, Serialize)]
pub struct FloorSaddle {
    pub index: u32,
    /// Period as iterates of the underlying diffeomorphism.
    pub period: u32,
    pub point: PlanarPoint,
    pub multipliers: [f64; 2],
    /// Saddle exponent of the floor saddle itself.
    pub floor_exponent: f64,
}

/// Tower of rectangle indices with the per-floor gap data.
#[derive(Debug, Clone, Serialize)]
pub struct TowerSpec {
    pub indices: Vec<u32>,
    pub floors: Vec<FloorSaddle>,
    /// Center-to-center vertical drops `delta_{n_i} - delta_{n_{i+1}}`.
    pub t_gaps: Vec<f64>,
    /// Stable-to-unstable vertical spans `delta_{n_i} - fold_vertex(n_{i+1})`.
    pub s_gaps: Vec<f64>,
    /// `s_i - t_i` computed without cancellation:
    /// `delta_{n_{i+1}} - fold_vertex(n_{i+1})`.
    pub gap_excess: Vec<f64>,
}

/// Greedy upward scan: each next index is the largest m whose rectangle
/// the current fold still crosses.
pub fn select_tower_indices(
    model: &ModelDiffeo,
    floors: usize,
    n_1: u32,
    min_shrinking: f64,
) -> Result<TowerSpec> {
    if floors < 1 {
        return Err(Error::invalid("a tower needs at least one floor"));
    }
    let report = model.saddle.validate()?;
    if report.saddle_exponent <= min_shrinking {
        return Err(Error::invalid(format!(
            "saddle exponent {:.3} is not above the required shrinking order {min_shrinking}",
            report.saddle_exponent
        )));
    }
    let first_fold = FoldCurve::compute(model, n_1, 4096)?;
    if !horseshoe_test_with_fold(model, &first_fold, n_1, 1e-9)?.is_true() {
        return Err(Error::invalid(format!(
            "n_1 = {n_1} too small: the step-{n_1} fold does not cross its own rectangle"
        )));
    }
    let rho = report.saddle_exponent;
    let mut indices = vec![n_1];
    let mut fold = first_fold;
    let mut folds = vec![];
    for _ in 1..floors {
        let current = *indices.last().unwrap();
        let scan_cap = ((rho * current as f64).ceil() as u32) + 8;
        let mut last_true: Option<u32> = None;
        let mut m = current + 1;
        while m <= scan_cap {
            match horseshoe_test_with_fold(model, &fold, m, 1e-9)? {
                Crossing::True(_) => last_true = Some(m),
                Crossing::Indeterminate { .. } => {}
                Crossing::False { .. } => break,
            }
            m += 1;
        }
        let next = last_true.ok_or_else(|| {
            Error::invalid(format!(
                "no admissible next index above {current} within scan bound {scan_cap}"
            ))
        })?;
        indices.push(next);
        folds.push(fold);
        fold = FoldCurve::compute(model, next, 4096)?;
    }
    folds.push(fold);

    let mut t_gaps = Vec::new();
    let mut s_gaps = Vec::new();
    let mut gap_excess = Vec::new();
    let mu = model.saddle.mu;
    for (i, w) in indices.windows(2).enumerate() {
        let (ni, nj) = (w[0], w[1]);
        let delta_i = mu.powi(-(ni as i32));
        let delta_j = mu.powi(-(nj as i32));
        let t = delta_i - delta_j;
        // delta_j and the fold vertex are far below one ulp of delta_i;
        // the excess s - t must be formed from them directly.
        let excess = delta_j - folds[i + 1].vertex.y;
        t_gaps.push(t);
        s_gaps.push(t + excess);
        gap_excess.push(excess);
    }
    let mut floors_out = Vec::new();
    for &ni in &indices {
        floors_out.push(floor_saddle(model, ni)?);
    }
    Ok(TowerSpec {
        indices,
        floors: floors_out,
        t_gaps,
        s_gaps,
        gap_excess,
    })
}

/// Locate the step-n horseshoe saddle by Newton on the return map.
///
/// Deep floors have fixed-point heights `mu^-n (1 + z)` with `z` far
/// below one ulp of 1, so the iteration runs in `(xb, z)` coordinates
/// (`z` the incoming-chart height), where everything stays representable.
pub fn floor_saddle(model: &ModelDiffeo, n: u32) -> Result<FloorSaddle> {
    let g = &model.global;
    let mu = model.saddle.mu;
    let lam_n = model.saddle.lambda.powi(n as i32);
    let delta = mu.powi(-(n as i32));
    // Fixed-point system in (xb, z):
    //   global_x(lam^n (1+xb), z) = xb
    //   global_y(lam^n (1+xb), z) = mu^-n (1 + z)
    let residual = |xb: f64, z: f64| -> Result<(f64, f64)> {
        let q = g.apply(PlanarPoint::new(lam_n * (1.0 + xb), z))?;
        Ok((q.x - xb, q.y - delta * (1.0 + z)))
    };
    // Seed on the expanding branch: gamma z^k ~ mu^-n.
    let z0 = (delta / g.gamma.abs()).powf(1.0 / g.k as f64);
    let mut xb = g.alpha * z0;
    let mut z = z0;
    let mut converged = false;
    let mut best = f64::INFINITY;
    for _ in 0..100 {
        let (r1, r2) = residual(xb, z)?;
        let s1 = xb.abs().max(z.abs()).max(1e-200);
        let s2 = delta.max(1e-200);
        let weighted = r1.abs() / s1 + r2.abs() / s2;
        best = best.min(weighted);
        if weighted < 1e-9 {
            converged = true;
            break;
        }
        let jg = g.jacobian(PlanarPoint::new(lam_n * (1.0 + xb), z))?;
        let a = Mat2::new(
            jg.a * lam_n - 1.0,
            jg.b,
            jg.c * lam_n,
            jg.d - delta,
        );
        let d = a.solve(PlanarPoint::new(-r1, -r2))?;
        xb += d.x;
        z += d.y;
        if !xb.is_finite() || !z.is_finite() {
            return Err(Error::NewtonDivergence {
                best_residual: f64::INFINITY,
            });
        }
    }
    if !converged {
        return Err(Error::NewtonDivergence {
            best_residual: best,
        });
    }
    let p = PlanarPoint::new(xb, delta * (1.0 + z));
    let jg = g.jacobian(PlanarPoint::new(lam_n * (1.0 + xb), z))?;
    let jac = jg.mul(&Mat2::diag(lam_n, mu.powi(n as i32)));
    let expanding = jac.eigenvalue_moduli()[0];
    // The contracting multiplier sits far below the discriminant's
    // rounding floor; recover it from the determinant.
    let contracting = if expanding > 0.0 {
        jac.det().abs() / expanding
    } else {
        0.0
    };
    let floor_exponent = if expanding > 1.0 && contracting < 1.0 && contracting > 0.0 {
        -contracting.ln() / expanding.ln()
    } else {
        f64::NAN
    };
    Ok(FloorSaddle {
        index: n,
        period: n + model.global.n_global,
        point: p,
        multipliers: [contracting, expanding],
        floor_exponent,
    })
}

/// Per-floor gap ratios `(s_i - t_i) / t_i^r` with the reported decay
/// envelope and the direct gap bound.
#[derive(Debug, Clone, Serialize)]
pub struct GapReport {
    pub r: f64,
    pub ratios: Vec<f64>,
    /// `C delta_{n_i}^(rho - r)` with `C = 1.25 max(|sigma|, 1/mu) mu`.
    pub envelopes: Vec<f64>,
    /// `(delta_{n_{i+1}} + height_{n_i}) / t_i^r`, the raw gap bound.
    pub direct_bounds: Vec<f64>,
    /// False when `r >= rho`, in which case the ratios need not shrink.
    pub exponent_valid: bool,
}

pub fn gap_ratio(model: &ModelDiffeo, spec: &TowerSpec, r: f64) -> Result<GapReport> {
    if spec.indices.len() < 2 {
        return Err(Error::invalid("gap ratios need at least two floors"));
    }
    let rho = model.saddle.saddle_exponent();
    let mu = model.saddle.mu;
    let sigma_scale = model.global.sigma.abs().max(1.0 / mu);
    let mut ratios = Vec::new();
    let mut envelopes = Vec::new();
    let mut direct_bounds = Vec::new();
    for (i, w) in spec.indices.windows(2).enumerate() {
        let (ni, nj) = (w[0], w[1]);
        let t = spec.t_gaps[i];
        let ratio = spec.gap_excess[i] / t.powf(r);
        let delta_i = mu.powi(-(ni as i32));
        let delta_j = mu.powi(-(nj as i32));
        let height_i = 2.0 * delta_i.powf(1.5);
        ratios.push(ratio);
        envelopes.push(1.25 * sigma_scale * mu * delta_i.powf(rho - r));
        direct_bounds.push((delta_j + height_i) / t.powf(r));
    }
    Ok(GapReport {
        r,
        ratios,
        envelopes,
        direct_bounds,
        exponent_valid: r < rho,
    })
}

/// Compactly supported smooth bump `(1 - |u|^2)^(smoothness + 1)` on the
/// unit ball, scaled to `radius` around `center`; polynomial inside the
/// ball so derivatives stay exact.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Bump {
    pub center: PlanarPoint,
    pub radius: f64,
    pub lift: f64,
    pub smoothness: usize,
}

impl Bump {
    pub fn new(center: PlanarPoint, radius: f64, lift: f64, smoothness: usize) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::invalid("bump radius must be positive"));
        }
        Ok(Bump {
            center,
            radius,
            lift,
            smoothness,
        })
    }

    fn profile(&self, u2: f64) -> f64 {
        if u2 >= 1.0 {
            0.0
        } else {
            (1.0 - u2).powi(self.smoothness as i32 + 1)
        }
    }

    pub fn eval(&self, p: PlanarPoint) -> f64 {
        let dx = (p.x - self.center.x) / self.radius;
        let dy = (p.y - self.center.y) / self.radius;
        self.lift * self.profile(dx * dx + dy * dy)
    }

    pub fn grad(&self, p: PlanarPoint) -> (f64, f64) {
        let dx = (p.x - self.center.x) / self.radius;
        let dy = (p.y - self.center.y) / self.radius;
        let u2 = dx * dx + dy * dy;
        if u2 >= 1.0 {
            return (0.0, 0.0);
        }
        let m = self.smoothness as f64 + 1.0;
        let common = -self.lift * m * (1.0 - u2).powi(self.smoothness as i32) * 2.0 / self.radius;
        (common * dx, common * dy)
    }

    /// Crude size surrogate in the C^r scale: `lift / radius^r`.
    pub fn cr_size(&self, r: usize) -> f64 {
        self.lift.abs() / self.radius.powi(r as i32)
    }
}

/// Add a compactly supported lift to the second component of the global
/// map: the localized perturbation used to close tower gaps.
pub fn bump_perturbation(
    model: &ModelDiffeo,
    center: PlanarPoint,
    radius: f64,
    lift: f64,
    smoothness: usize,
) -> Result<BumpedModel> {
    if center.x.abs() + radius > model.global.chart_halfwidth
        || center.y.abs() + radius > model.global.chart_halfwidth
    {
        return Err(Error::invalid(
            "bump support must stay inside the global chart",
        ));
    }
    Ok(BumpedModel::new(
        model,
        Bump::new(center, radius, lift, smoothness)?,
    ))
}

/// Model with a bump added to the second component of the global map.
#[derive(Debug, Clone)]
pub struct BumpedModel {
    pub base: ModelDiffeo,
    pub bump: Bump,
}

impl BumpedModel {
    pub fn new(base: &ModelDiffeo, bump: Bump) -> Self {
        BumpedModel {
            base: base.clone(),
            bump,
        }
    }

    /// Global map with the bump, acting on the incoming chart.
    pub fn global_apply(&self, p: PlanarPoint) -> Result<PlanarPoint> {
        let q = self.base.global.apply(p)?;
        Ok(PlanarPoint::new(q.x, q.y + self.bump.eval(p)))
    }

    pub fn global_jacobian(&self, p: PlanarPoint) -> Result<Mat2> {
        let j = self.base.global.jacobian(p)?;
        let (gx, gy) = self.bump.grad(p);
        Ok(Mat2::new(j.a, j.b, j.c + gx, j.d + gy))
    }
}

/// Return map of the bumped model.
pub struct BumpedReturnMap<'a> {
    pub model: &'a BumpedModel,
    pub n: u32,
}

impl PlanarMap for BumpedReturnMap<'_> {
    fn apply(&self, p: PlanarPoint) -> Result<PlanarPoint> {
        let ret = self.model.base.return_map(self.n);
        let q = ret.saddle_passage(p)?;
        self.model.global_apply(q)
    }

    fn jacobian(&self, p: PlanarPoint) -> Result<Mat2> {
        let s = &self.model.base.saddle;
        let ret = self.model.base.return_map(self.n);
        let q = ret.saddle_passage(p)?;
        let jg = self.model.global_jacobian(q)?;
        let jl = Mat2::diag(s.lambda.powi(self.n as i32), s.mu.powi(self.n as i32));
        Ok(jg.mul(&jl))
    }
}

/// Minimum of (fold height - line height) along the step-n strip,
/// optionally with a bump on the global map.
pub fn fold_line_clearance(
    model: &ModelDiffeo,
    bump: Option<&Bump>,
    n: u32,
    line_height: f64,
    samples: usize,
) -> Result<f64> {
    let (_, image) = rectangle_geometry(model, n)?;
    let half = image.height / 2.0;
    let mut best = f64::INFINITY;
    let count = samples.max(64);
    for i in 0..=count {
        let yt = -half + 2.0 * half * i as f64 / count as f64;
        let p_in = PlanarPoint::new(image.center_x, yt);
        let mut q = model.global.apply(p_in)?;
        if let Some(b) = bump {
            q = PlanarPoint::new(q.x, q.y + b.eval(p_in));
        }
        best = best.min(q.y - line_height);
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{GlobalMapParams, SaddleParams};
    use crate::poly::Poly;

    fn model(lambda: f64, mu: f64, sigma: f64) -> ModelDiffeo {
        let global = GlobalMapParams::new(1.0, 0.0, 1.0, sigma, 2, vec![0.0, 0.0]).unwrap();
        ModelDiffeo::new(SaddleParams::new(lambda, mu), global, 1.0, Poly::zero()).unwrap()
    }

    #[test]
    fn rectangle_example_values() {
        let m = model(0.25, 2.0, 1.0);
        let (t, im) = rectangle_geometry(&m, 4).unwrap();
        assert!((t.delta - 0.0625).abs() < 1e-15);
        assert!((t.height - 0.03125).abs() < 1e-15);
        assert!((t.width - 0.75).abs() < 1e-15);
        assert!((im.width - 0.75 * 0.25f64.powi(4)).abs() < 1e-15);
        assert!((im.height - 0.5).abs() < 1e-15);
        // delta halves when mu = 2.
        let (t5, _) = rectangle_geometry(&m, 5).unwrap();
        assert_eq!(t5.delta, t.delta / 2.0);
    }

    #[test]
    fn stable_distance_identity() {
        // delta_n^rho = lambda^n exactly, via the algebraic identity.
        let m = model(0.01, 2.0, 1.0);
        for n in 1..=50 {
            let (_, im) = rectangle_geometry(&m, n).unwrap();
            assert_eq!(im.stable_distance_scale, m.saddle.lambda.powi(n as i32));
        }
    }

    #[test]
    fn self_crossing_at_desk_parameters() {
        let m = model(0.01, 2.0, 1.0);
        let crossing = horseshoe_test(&m, 8, 8, 1e-9).unwrap();
        assert!(crossing.is_true(), "{crossing:?}");
    }

    #[test]
    fn far_rectangle_is_disjoint() {
        let m = model(0.01, 2.0, 1.0);
        // m = 2: rectangle far above the fold's reach from n = 8.
        let crossing = horseshoe_test(&m, 8, 2, 1e-9).unwrap();
        assert!(matches!(crossing, Crossing::False { .. }), "{crossing:?}");
        // m far beyond the transition: fold floats above the rectangle.
        let crossing = horseshoe_test(&m, 8, 60, 1e-9).unwrap();
        assert!(matches!(crossing, Crossing::False { .. }), "{crossing:?}");
    }

    #[test]
    fn grazing_is_indeterminate() {
        // Slide the fold vertex exactly onto the rectangle bottom by
        // choosing sigma.
        let base = model(0.05, 2.0, 1.0);
        let n = 10u32;
        let m_idx = 43u32;
        let (t, _) = rectangle_geometry(&base, m_idx).unwrap();
        let band_lo = t.delta - t.height / 2.0;
        let sigma = band_lo / base.saddle.lambda.powi(n as i32);
        let m = model(0.05, 2.0, sigma);
        let crossing = horseshoe_test(&m, n, m_idx, 1e-9).unwrap();
        assert!(
            matches!(crossing, Crossing::Indeterminate { .. }),
            "{crossing:?}"
        );
    }

    #[test]
    fn tower_scan_matches_exponent_window() {
        // rho = log2(20) ~ 4.32: from n_1 = 10 the next index lands near
        // rho * n_1.
        let m = model(0.05, 2.0, 1.0);
        let spec = select_tower_indices(&m, 2, 10, 2.0).unwrap();
        assert_eq!(spec.indices[0], 10);
        assert!(
            (41..=45).contains(&spec.indices[1]),
            "n_2 = {}",
            spec.indices[1]
        );
        assert!(
            (spec.t_gaps[0] - (2.0f64.powi(-10) - 2.0f64.powi(-(spec.indices[1] as i32)))).abs()
                < 1e-18
        );
    }

    #[test]
    fn single_floor_tower_is_trivial() {
        let m = model(0.05, 2.0, 1.0);
        let spec = select_tower_indices(&m, 1, 10, 2.0).unwrap();
        assert_eq!(spec.indices, vec![10]);
        assert!(spec.t_gaps.is_empty());
    }

    #[test]
    fn too_small_n1_rejected() {
        // A strong shear lifts the fold vertex above the shallow
        // first rectangle; only larger n clears it.
        let m = model(0.05, 2.0, 5.0);
        assert!(select_tower_indices(&m, 2, 1, 2.0).is_err());
        assert!(select_tower_indices(&m, 2, 10, 2.0).is_ok());
    }

    #[test]
    fn floor_saddles_are_strongly_hyperbolic() {
        let m = model(0.05, 2.0, 1.0);
        let spec = select_tower_indices(&m, 2, 10, 2.0).unwrap();
        for f in &spec.floors {
            assert!(f.multipliers[1] > 1.0);
            assert!(f.multipliers[0] < 1.0);
            assert!(f.floor_exponent > 2.0, "floor rho = {}", f.floor_exponent);
        }
        // Fixed-point height sits near delta_n.
        let f0 = &spec.floors[0];
        let delta = 2.0f64.powi(-10);
        assert!((f0.point.y - delta).abs() < 0.2 * delta);
    }

    #[test]
    fn gap_ratio_desk_bounds() {
        let m = model(0.01, 2.0, 1.0);
        let spec = select_tower_indices(&m, 2, 10, 2.0).unwrap();
        let report = gap_ratio(&m, &spec, 2.0).unwrap();
        assert!(report.exponent_valid);
        assert!(report.ratios[0] > 0.0);
        assert!(report.ratios[0] < 1e-3);
        assert!(report.ratios[0] <= report.envelopes[0]);
        assert!(report.ratios[0] <= report.direct_bounds[0]);
    }

    #[test]
    fn gap_ratio_decreases_with_n1() {
        let m = model(0.01, 2.0, 1.0);
        let mut prev = f64::INFINITY;
        for n1 in 10..=16 {
            let spec = select_tower_indices(&m, 2, n1, 2.0).unwrap();
            let report = gap_ratio(&m, &spec, 2.0).unwrap();
            assert!(
                report.ratios[0] < prev,
                "ratio at n1 = {n1} did not decrease: {} vs {prev}",
                report.ratios[0]
            );
            prev = report.ratios[0];
        }
    }

    #[test]
    fn gap_ratio_flags_large_r() {
        let m = model(0.05, 2.0, 1.0);
        let spec = select_tower_indices(&m, 2, 10, 2.0).unwrap();
        let report = gap_ratio(&m, &spec, 6.0).unwrap();
        assert!(!report.exponent_valid);
    }

    #[test]
    fn gap_bound_inequality_every_floor() {
        let m = model(0.05, 2.0, 1.0);
        let spec = select_tower_indices(&m, 3, 10, 2.0).unwrap();
        let mu = 2.0f64;
        for (i, w) in spec.indices.windows(2).enumerate() {
            let delta_i = mu.powi(-(w[0] as i32));
            let delta_j = mu.powi(-(w[1] as i32));
            let gap = spec.gap_excess[i];
            assert!(gap > 0.0);
            assert!(gap <= delta_j + 2.0 * delta_i.powf(1.5));
        }
    }

    #[test]
    fn bump_support_and_center_shift() {
        let m = model(0.01, 2.0, 1.0);
        let bump = Bump::new(PlanarPoint::new(0.0, 0.0), 0.25, 1e-6, 2).unwrap();
        let bumped = BumpedModel::new(&m, bump.clone());
        // Outside the ball: exact agreement.
        let p = PlanarPoint::new(0.3, 0.3);
        let a = m.global.apply(p).unwrap();
        let b = bumped.global_apply(p).unwrap();
        assert_eq!(a.y, b.y);
        // Zero lift: unchanged everywhere.
        let zero = BumpedModel::new(
            &m,
            Bump::new(PlanarPoint::new(0.0, 0.0), 0.25, 0.0, 2).unwrap(),
        );
        let q = PlanarPoint::new(0.05, 0.02);
        assert_eq!(m.global.apply(q).unwrap(), zero.global_apply(q).unwrap());
        // With the bump centered on the strip's core, the fold-to-line
        // clearance at its minimum shifts by exactly the lift.
        let n = 8;
        let (_, im) = rectangle_geometry(&m, n).unwrap();
        let line = -1e-3;
        let before = fold_line_clearance(&m, None, n, line, 4096).unwrap();
        let centered = Bump::new(PlanarPoint::new(im.center_x, 0.0), 0.25, 1e-6, 2).unwrap();
        let after = fold_line_clearance(&m, Some(&centered), n, line, 4096).unwrap();
        assert!(((after - before) - 1e-6).abs() < 1e-15, "shift {}", after - before);
        assert!((bump.cr_size(2) - 1e-6 / 0.0625).abs() < 1e-18);
    }
}
