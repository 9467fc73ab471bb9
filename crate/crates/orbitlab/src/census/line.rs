//! Exact periodic-point counting for polynomial interval maps.
//!
//! For `y -> q(y)` the period-n points are the real roots of
//! `q^n(y) - y`. The iterate is composed in exact rational arithmetic,
//! counted by a Sturm chain (which also certifies square-freeness), and
//! located by scan/bisection on the *iterated* map so the huge expanded
//! coefficients never touch floating point. Each located root gets an
//! exact dyadic sign-change certificate.

use serde::Serialize;

use crate::census::classify::{classify_line_jet, Classification};
use crate::census::{MultiplierData, OrbitRecord};
use crate::error::{Error, Result};
use crate::geom::PlanarPoint;
use crate::poly::dyadic::{eval_iterated, Dyadic};
use crate::poly::exact::{RatPoly, SturmChain};
use crate::poly::{Poly, Taylor};

#[derive(Debug, Clone)]
pub struct LineOpts {
    /// Refuse iterates of degree beyond this.
    pub max_degree: usize,
    /// Abort the Sturm chain if coefficients outgrow this many bits.
    pub sturm_bit_cap: u64,
    /// Bisection/Newton tolerance for root localization.
    pub root_tol: f64,
    /// Multiplier distance from the unit circle below which a point is
    /// not called hyperbolic.
    pub unit_margin_tol: f64,
    /// Center-manifold jet order for degenerate classification.
    pub classify_kmax: usize,
}

impl Default for LineOpts {
    fn default() -> Self {
        LineOpts {
            max_degree: 1 << 12,
            sturm_bit_cap: 1 << 26,
            root_tol: 1e-12,
            unit_margin_tol: 1e-8,
            classify_kmax: 5,
        }
    }
}

/// Exact isolating interval for one root, with exact signs at the ends.
#[derive(Debug, Clone, Serialize)]
pub struct RootCertificate {
    pub lo: f64,
    pub hi: f64,
    pub sign_lo: i8,
    pub sign_hi: i8,
}

/// Result of one period-n root hunt.
#[derive(Debug, Clone)]
pub struct FixedPointRun {
    pub period: u32,
    pub degree: usize,
    /// Exact count of distinct real fixed points of the n-th iterate.
    pub count: usize,
    /// Located roots, sorted ascending; length equals `count`.
    pub points: Vec<f64>,
    /// Chain-rule multipliers `(q^n)'` at each point.
    pub multipliers: Vec<f64>,
    /// Least period of each point within divisors of n.
    pub least_periods: Vec<u32>,
    /// Exact sign-change intervals, one per point.
    pub certificates: Vec<RootCertificate>,
    /// Square-freeness came out of the Sturm chain.
    pub square_free: bool,
    map: Poly,
}

impl FixedPointRun {
    /// All points are real by construction; true when the count equals the
    /// iterate degree (every complex root is real and simple).
    pub fn all_roots_real(&self) -> bool {
        self.count == self.degree
    }

    /// Build census records. Points with a multiplier near 1 get a jet
    /// classification along the orbit.
    pub fn records(&self, opts: &LineOpts) -> Vec<OrbitRecord> {
        let mut out = Vec::with_capacity(self.points.len());
        for (i, &y) in self.points.iter().enumerate() {
            let m = self.multipliers[i];
            let classification = if (m.abs() - 1.0).abs() > opts.unit_margin_tol {
                Classification::Hyperbolic
            } else if (m - 1.0).abs() <= opts.unit_margin_tol {
                let jet = self.orbit_jet(y, opts.classify_kmax + 1);
                classify_line_jet(&jet, opts.unit_margin_tol, opts.classify_kmax)
            } else {
                // On the circle but not at 1 (e.g. -1): outside the
                // single-unit-multiplier normal form.
                Classification::NonhyperbolicOther
            };
            let fy = eval_iterate_f64(&self.map, y, self.period);
            out.push(OrbitRecord {
                point: PlanarPoint::new(y, y),
                period: self.least_periods[i],
                multipliers: MultiplierData::Single(m),
                classification,
                residual: (fy - y).abs(),
            });
        }
        out
    }

    /// Taylor coefficients of `u -> q^n(y + u) - y` through `order`.
    fn orbit_jet(&self, y: f64, order: usize) -> Vec<f64> {
        let mut acc = Taylor::identity(order);
        acc.coeffs[0] = y;
        for _ in 0..self.period {
            acc = taylor_of_poly_at(&self.map, &acc, order);
        }
        acc.coeffs[0] -= y;
        acc.coeffs
    }
}

/// Taylor of `q(inner(u))` where `inner` carries its expansion point in
/// the constant coefficient.
fn taylor_of_poly_at(q: &Poly, inner: &Taylor, order: usize) -> Taylor {
    let y0 = inner.coeffs[0];
    let mut shifted = inner.clone();
    shifted.coeffs[0] = 0.0;
    // Expand q around y0: coefficients q^(j)(y0)/j!.
    let mut local = Vec::with_capacity(order + 1);
    let mut dq = q.clone();
    let mut fact = 1.0;
    for j in 0..=order {
        if j > 0 {
            dq = dq.derivative();
            fact *= j as f64;
        }
        local.push(dq.eval(y0) / fact);
    }
    Taylor::from_coeffs(local, order).compose(&shifted)
}

fn eval_iterate_f64(q: &Poly, y: f64, n: u32) -> f64 {
    let mut acc = y;
    for _ in 0..n {
        acc = q.eval(acc);
    }
    acc
}

fn iterate_derivative_f64(q: &Poly, y: f64, n: u32) -> f64 {
    let dq = q.derivative();
    let mut acc = y;
    let mut deriv = 1.0;
    for _ in 0..n {
        deriv *= dq.eval(acc);
        acc = q.eval(acc);
    }
    deriv
}

/// Value and first two derivatives of the n-th iterate, by the chain rule.
fn iterate_jet2_f64(q: &Poly, dq: &Poly, ddq: &Poly, y: f64, n: u32) -> (f64, f64, f64) {
    let mut v = y;
    let mut d1 = 1.0;
    let mut d2 = 0.0;
    for _ in 0..n {
        let q1 = dq.eval(v);
        let q2 = ddq.eval(v);
        d2 = q2 * d1 * d1 + q1 * d2;
        d1 *= q1;
        v = q.eval(v);
    }
    (v, d1, d2)
}

/// All real fixed points of the n-th iterate of `y -> q(y)`, with exact
/// count and per-root certificates.
pub fn fixed_points_1d(q: &Poly, n: u32, opts: &LineOpts) -> Result<FixedPointRun> {
    if n < 1 {
        return Err(Error::invalid("period must be at least 1"));
    }
    // Identity line: every point is fixed, nothing is isolated.
    if q.coeffs == [0.0, 1.0] {
        return Err(Error::Nonisolated(
            "the identity map fixes a continuum".into(),
        ));
    }
    if q.degree() < 2 {
        return Err(Error::invalid("line map must have degree at least 2"));
    }
    let deg_iterate = q
        .degree()
        .checked_pow(n)
        .filter(|&d| d <= opts.max_degree)
        .ok_or_else(|| {
            Error::Budget(format!(
                "iterate degree {}^{} exceeds cap {}",
                q.degree(),
                n,
                opts.max_degree
            ))
        })?;

    // Exact iterate and Sturm count.
    let q_exact = RatPoly::from_f64_coeffs(&q.coeffs)?;
    let iterate = q_exact.iterate(n as usize);
    let fixed_poly = iterate.sub(&RatPoly::from_f64_coeffs(&[0.0, 1.0])?);
    if fixed_poly.is_zero() {
        return Err(Error::Nonisolated(
            "iterate equals the identity; fixed points form a continuum".into(),
        ));
    }
    let int_poly = fixed_poly.clear_denominators();
    let chain = SturmChain::build(&int_poly, opts.sturm_bit_cap)?;
    if chain.gcd_degree > 0 {
        return Err(Error::NonSquareFree {
            gcd_degree: chain.gcd_degree,
        });
    }
    let count = chain.count_all_real_roots();

    // Locate the roots on the iterated map and certify each bracket.
    let radius = q.escape_radius();
    let points = locate_roots(q, n, radius, count, opts)?;
    let q_dyadic: Vec<Dyadic> = q.coeffs.iter().map(|&c| Dyadic::from_f64(c)).collect();
    let mut certificates = Vec::with_capacity(points.len());
    for (i, &root) in points.iter().enumerate() {
        let left_bound = if i == 0 {
            -radius
        } else {
            (points[i - 1] + root) / 2.0
        };
        let right_bound = if i + 1 == points.len() {
            radius
        } else {
            (points[i + 1] + root) / 2.0
        };
        certificates.push(certify_root(
            &q_dyadic, n, root, left_bound, right_bound, opts,
        )?);
    }

    let multipliers: Vec<f64> = points
        .iter()
        .map(|&y| iterate_derivative_f64(q, y, n))
        .collect();
    let least_periods: Vec<u32> = points
        .iter()
        .map(|&y| {
            (1..=n)
                .filter(|d| n % d == 0)
                .find(|&d| (eval_iterate_f64(q, y, d) - y).abs() < 1e-8 * (1.0 + y.abs()))
                .unwrap_or(n)
        })
        .collect();

    Ok(FixedPointRun {
        period: n,
        degree: deg_iterate,
        count,
        points,
        multipliers,
        least_periods,
        certificates,
        square_free: true,
        map: q.clone(),
    })
}

/// Scan-and-bisect on the iterated map until the located roots match the
/// certified count. Near-tangent root pairs hide from any uniform scan
/// (no sign change across the pair); they straddle a critical point of F,
/// so a scan of F' (and of F'' for critical pairs) recovers them.
fn locate_roots(q: &Poly, n: u32, radius: f64, count: usize, opts: &LineOpts) -> Result<Vec<f64>> {
    let dq = q.derivative();
    let ddq = dq.derivative();
    let f = |y: f64| eval_iterate_f64(q, y, n) - y;
    let f1 = |y: f64| iterate_jet2_f64(q, &dq, &ddq, y, n).1 - 1.0;
    let f2 = |y: f64| iterate_jet2_f64(q, &dq, &ddq, y, n).2;
    let mut cells = (count.max(64) * 8).next_power_of_two();
    for _attempt in 0..8 {
        let mut roots = scan_sign_changes(&f, radius, cells, opts.root_tol);
        if roots.len() < count {
            // First-derivative rescue: split pairs hidden at critical
            // points of F.
            let criticals = scan_sign_changes(&f1, radius, cells, opts.root_tol);
            split_at_criticals(&f, &criticals, 2.0 * radius / cells as f64, opts.root_tol, &mut roots);
        }
        if roots.len() < count {
            // Second order: critical points of F' found through F''.
            let inflections = scan_sign_changes(&f2, radius, cells, opts.root_tol);
            let mut extra_criticals = Vec::new();
            split_at_criticals(
                &f1,
                &inflections,
                2.0 * radius / cells as f64,
                opts.root_tol,
                &mut extra_criticals,
            );
            split_at_criticals(&f, &extra_criticals, 2.0 * radius / cells as f64, opts.root_tol, &mut roots);
        }
        // Newton polish with small steps only; bisection already carries
        // full precision, and near-tangent roots have small slopes.
        for r in roots.iter_mut() {
            for _ in 0..3 {
                let d = iterate_derivative_f64(q, *r, n) - 1.0;
                if d.abs() < 1e-30 {
                    break;
                }
                let step = f(*r) / d;
                if !step.is_finite() || step.abs() > 1e-6 {
                    break;
                }
                *r -= step;
            }
        }
        roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
        roots.dedup_by(|a, b| (*a - *b).abs() < opts.root_tol * 10.0);
        if roots.len() == count {
            return Ok(roots);
        }
        if cells >= 1 << 23 {
            break;
        }
        cells *= 8;
    }
    Err(Error::CertificateFailure(format!(
        "located roots do not match the Sturm count {count} at period {n}"
    )))
}

/// Sign-change brackets of `f` on a uniform grid, bisected to roots.
fn scan_sign_changes(f: &dyn Fn(f64) -> f64, radius: f64, cells: usize, tol: f64) -> Vec<f64> {
    let mut roots = Vec::new();
    let step = 2.0 * radius / cells as f64;
    let mut prev_y = -radius;
    let mut prev_v = f(prev_y);
    for i in 1..=cells {
        let y = -radius + i as f64 * step;
        let v = f(y);
        if prev_v == 0.0 {
            roots.push(prev_y);
        } else if v.is_finite() && prev_v.is_finite() && v * prev_v < 0.0 {
            roots.push(bisect(f, prev_y, y, prev_v, tol));
        }
        prev_y = y;
        prev_v = v;
    }
    if prev_v == 0.0 {
        roots.push(prev_y);
    }
    roots
}

/// For each critical point `c`, check whether `f(c)` flips sign against
/// the neighborhood; if so the two roots of the hidden pair bracket `c`.
fn split_at_criticals(
    f: &dyn Fn(f64) -> f64,
    criticals: &[f64],
    halo: f64,
    tol: f64,
    roots: &mut Vec<f64>,
) {
    for &c in criticals {
        let vc = f(c);
        if vc == 0.0 {
            roots.push(c);
            continue;
        }
        for side in [-1.0, 1.0] {
            let outer = c + side * halo;
            let vo = f(outer);
            if vo.is_finite() && vo * vc < 0.0 {
                let (lo, hi, flo) = if side < 0.0 {
                    (outer, c, vo)
                } else {
                    (c, outer, vc)
                };
                roots.push(bisect(f, lo, hi, flo, tol));
            }
        }
    }
}

fn bisect(f: &dyn Fn(f64) -> f64, mut lo: f64, mut hi: f64, mut flo: f64, tol: f64) -> f64 {
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if hi - lo < tol * (1.0 + mid.abs()) {
            return mid;
        }
        let v = f(mid);
        if v == 0.0 {
            return mid;
        }
        if v * flo < 0.0 {
            hi = mid;
        } else {
            lo = mid;
            flo = v;
        }
    }
    0.5 * (lo + hi)
}

/// Exact dyadic sign-change certificate for a located root, searched
/// inside (left_bound, right_bound) to keep neighbors outside.
fn certify_root(
    q_dyadic: &[Dyadic],
    n: u32,
    root: f64,
    left_bound: f64,
    right_bound: f64,
    _opts: &LineOpts,
) -> Result<RootCertificate> {
    let exact_sign = |y: &Dyadic| -> i8 {
        let v = eval_iterated(q_dyadic, y, n as usize).sub(y);
        v.sign()
    };
    let mut offset = (right_bound - root)
        .min(root - left_bound)
        .max(1e-13)
        * 0.5;
    for _ in 0..40 {
        let lo = Dyadic::from_f64(root - offset).truncate(48);
        let hi = Dyadic::from_f64(root + offset).truncate(48);
        let sign_lo = exact_sign(&lo);
        let sign_hi = exact_sign(&hi);
        if sign_lo != 0 && sign_hi != 0 && sign_lo != sign_hi {
            return Ok(RootCertificate {
                lo: lo.to_f64(),
                hi: hi.to_f64(),
                sign_lo,
                sign_hi,
            });
        }
        // Same sign: the root estimate sits slightly off-center; widen.
        offset *= 2.0;
        if root - offset < left_bound || root + offset > right_bound {
            break;
        }
    }
    Err(Error::CertificateFailure(format!(
        "no exact sign change across root near {root}"
    )))
}

/// A split of the degenerate restriction `x -> x + l x^(k+1)` into
/// hyperbolic fixed points at prescribed (scaled) positions.
#[derive(Debug, Clone, Serialize)]
pub struct SplitOutcome {
    /// True once epsilon > 0 actually split the point.
    pub split: bool,
    /// Root positions `s * xi_i` with `s = epsilon^(1/k)`.
    pub fixed_points: Vec<f64>,
    pub multipliers: Vec<f64>,
    /// `||m| - 1|` per fixed point.
    pub margins: Vec<f64>,
    pub min_margin: f64,
    /// Largest admissible epsilon before a multiplier can reach the
    /// far side of the unit circle.
    pub epsilon_threshold: f64,
    pub scale: f64,
    /// The perturbed restriction as a polynomial in x.
    #[serde(skip)]
    pub map: Poly,
    /// The subtracted perturbation `epsilon * q(x)`.
    #[serde(skip)]
    pub perturbation: Poly,
}

/// Split `x -> x + l x^(k+1)` by subtracting a perturbation whose
/// fixed-point polynomial has simple roots at `epsilon^(1/k) * xi_i`,
/// padded by complex pairs when fewer than `k + 1` roots are prescribed.
pub fn split_degenerate(
    k: usize,
    l_coeff: f64,
    epsilon: f64,
    prescribed: &[f64],
) -> Result<SplitOutcome> {
    if k < 1 {
        return Err(Error::invalid("degeneracy order k must be at least 1"));
    }
    if l_coeff == 0.0 {
        return Err(Error::invalid("leading degeneracy coefficient must be nonzero"));
    }
    let m = prescribed.len();
    if m > k + 1 {
        return Err(Error::invalid(format!(
            "cannot place {m} real fixed points: a degree-{} fixed-point polynomial holds at most {} (raise k)",
            k + 1,
            k + 1
        )));
    }
    if epsilon < 0.0 {
        return Err(Error::invalid("epsilon must be nonnegative"));
    }
    let mut xi = prescribed.to_vec();
    xi.sort_by(|a, b| a.partial_cmp(b).unwrap());
    for w in xi.windows(2) {
        if w[0] == w[1] {
            return Err(Error::invalid("prescribed roots must be distinct"));
        }
    }

    let unperturbed = {
        let mut p = Poly::zero();
        p.coeffs = vec![0.0; k + 2];
        p.coeffs[1] = 1.0;
        p.coeffs[k + 1] = l_coeff;
        Poly::new(p.coeffs)
    };

    if epsilon == 0.0 {
        return Ok(SplitOutcome {
            split: false,
            fixed_points: vec![0.0],
            multipliers: vec![1.0],
            margins: vec![0.0],
            min_margin: 0.0,
            epsilon_threshold: 0.0,
            scale: 0.0,
            map: unperturbed,
            perturbation: Poly::zero(),
        });
    }
    if (k + 1 - m) % 2 == 1 {
        return Err(Error::invalid(format!(
            "{m} real roots cannot complete a degree-{} real polynomial: the {} leftover roots must pair into complex conjugatesed; prescribe a count with the parity of k + 1",
            k + 1,
            k + 1 - m
        )));
    }

    let s = epsilon.powf(1.0 / k as f64);
    // Fixed-point polynomial h = l * prod (x - s xi_i) * prod (x^2 + (s p)^2).
    let mut h = Poly::constant(l_coeff);
    for &x in &xi {
        h = h.mul(&Poly::new(vec![-s * x, 1.0]));
    }
    for p in 1..=(k + 1 - m) / 2 {
        let im = s * p as f64;
        h = h.mul(&Poly::new(vec![im * im, 0.0, 1.0]));
    }
    let dh = h.derivative();

    let fixed_points: Vec<f64> = xi.iter().map(|&x| s * x).collect();
    let multipliers: Vec<f64> = fixed_points.iter().map(|&x| 1.0 + dh.eval(x)).collect();
    let margins: Vec<f64> = multipliers.iter().map(|&m| (m.abs() - 1.0).abs()).collect();
    let max_slope = fixed_points
        .iter()
        .map(|&x| dh.eval(x).abs())
        .fold(0.0f64, f64::max);
    if max_slope >= 1.0 {
        return Err(Error::invalid(format!(
            "epsilon = {epsilon} too large: a multiplier moved {max_slope} from 1, margins are no longer one-sided"
        )));
    }
    // Slopes scale linearly in epsilon, so this is the admissible cap.
    let epsilon_threshold = epsilon / max_slope;
    let min_margin = margins.iter().cloned().fold(f64::INFINITY, f64::min);

    // Map x -> x + l x^(k+1) - eps q(x) with eps q = l x^(k+1) - h.
    let mut lead = Poly::zero();
    lead.coeffs = vec![0.0; k + 2];
    lead.coeffs[k + 1] = l_coeff;
    let perturbation = Poly::new(lead.coeffs).sub(&h);
    let map = unperturbed.sub(&perturbation);

    Ok(SplitOutcome {
        split: true,
        fixed_points,
        multipliers,
        margins,
        min_margin,
        epsilon_threshold,
        scale: s,
        map,
        perturbation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doubling() -> Poly {
        Poly::new(vec![-2.0, 0.0, 1.0])
    }

    #[test]
    fn period_one_roots() {
        let run = fixed_points_1d(&doubling(), 1, &LineOpts::default()).unwrap();
        assert_eq!(run.count, 2);
        assert!((run.points[0] + 1.0).abs() < 1e-10);
        assert!((run.points[1] - 2.0).abs() < 1e-10);
        // Multipliers 2y: -2 and 4.
        assert!((run.multipliers[0] + 2.0).abs() < 1e-8);
        assert!((run.multipliers[1] - 4.0).abs() < 1e-8);
        assert!(run.all_roots_real());
    }

    #[test]
    fn period_two_roots() {
        let run = fixed_points_1d(&doubling(), 2, &LineOpts::default()).unwrap();
        assert_eq!(run.count, 4);
        // Fixed points 2, -1 plus the golden pair (-1 +- sqrt 5)/2.
        let golden = [(-1.0 - 5.0f64.sqrt()) / 2.0, (-1.0 + 5.0f64.sqrt()) / 2.0];
        assert!((run.points[0] - golden[0]).abs() < 1e-9);
        assert!((run.points[2] - golden[1]).abs() < 1e-9);
        assert_eq!(run.least_periods, vec![2, 1, 2, 1]);
    }

    #[test]
    fn identity_rejected() {
        let err = fixed_points_1d(&Poly::new(vec![0.0, 1.0]), 3, &LineOpts::default()).unwrap_err();
        assert!(matches!(err, Error::Nonisolated(_)));
    }

    #[test]
    fn counts_double_through_n8() {
        let opts = LineOpts::default();
        for n in 1..=8u32 {
            let run = fixed_points_1d(&doubling(), n, &opts).unwrap();
            assert_eq!(run.count, 1usize << n, "period {n}");
            assert!(run.all_roots_real());
            assert!(run.square_free);
            for c in &run.certificates {
                assert!(c.sign_lo != c.sign_hi);
            }
        }
    }

    #[test]
    fn multiplier_chain_rule_matches_iterate_polynomial() {
        // Compare chain-rule multipliers against the derivative of the
        // exactly expanded iterate at modest degree.
        let q = doubling();
        let run = fixed_points_1d(&q, 3, &LineOpts::default()).unwrap();
        let exact = RatPoly::from_f64_coeffs(&q.coeffs).unwrap().iterate(3);
        let deriv = Poly::new(exact.derivative().to_f64_coeffs());
        for (y, m) in run.points.iter().zip(&run.multipliers) {
            assert!((deriv.eval(*y) - m).abs() < 1e-8 * (1.0 + m.abs()));
        }
    }

    #[test]
    fn split_example_quadratic_degeneracy() {
        let out = split_degenerate(2, 1.0, 0.01, &[-1.0, 0.0, 1.0]).unwrap();
        assert!(out.split);
        assert_eq!(out.fixed_points.len(), 3);
        assert!((out.fixed_points[0] + 0.1).abs() < 1e-12);
        assert!((out.fixed_points[1]).abs() < 1e-12);
        assert!((out.fixed_points[2] - 0.1).abs() < 1e-12);
        assert!((out.multipliers[0] - 1.02).abs() < 1e-12);
        assert!((out.multipliers[1] - 0.99).abs() < 1e-12);
        assert!((out.multipliers[2] - 1.02).abs() < 1e-12);
        // Perturbation is eps * x up to the rounding in s = sqrt(eps).
        assert_eq!(out.perturbation.degree(), 1);
        assert!((out.perturbation.coeffs[1] - 0.01).abs() < 1e-15);
    }

    #[test]
    fn split_epsilon_zero_is_degenerate() {
        let out = split_degenerate(2, 1.0, 0.0, &[-1.0, 0.0, 1.0]).unwrap();
        assert!(!out.split);
        assert_eq!(out.fixed_points, vec![0.0]);
        assert_eq!(out.min_margin, 0.0);
    }

    #[test]
    fn split_rejects_overfull_and_bad_parity() {
        assert!(split_degenerate(2, 1.0, 0.01, &[-2.0, -1.0, 0.0, 1.0]).is_err());
        assert!(split_degenerate(2, 1.0, 0.01, &[0.0, 1.0]).is_err());
    }

    #[test]
    fn split_with_complex_padding() {
        // k = 3, one real root, one complex pair of padding.
        let out = split_degenerate(3, 1.0, 1e-3, &[0.0, 1.0]).unwrap();
        assert_eq!(out.fixed_points.len(), 2);
        assert!(out.min_margin > 0.0);
        // The map really fixes those points.
        for &x in &out.fixed_points {
            assert!((out.map.eval(x) - x).abs() < 1e-14);
        }
    }

    #[test]
    fn split_rejects_excessive_epsilon() {
        let err = split_degenerate(2, 1.0, 10.0, &[-1.0, 0.0, 1.0]).unwrap_err();
        assert!(matches!(err, Error::InvalidParameter(_)));
    }
}
