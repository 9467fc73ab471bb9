//! Seeded Newton search for periodic points of planar maps.
//!
//! Seeds on a uniform grid, Newton on `F(p) = map^n(p) - p` with the
//! chain-rule Jacobian, deterministic dedup (sort before emitting), and
//! multiplier classification per record. Non-convergent seeds are dropped
//! silently; isolation here is heuristic (basin separation at the dedup
//! radius), unlike the certified one-dimensional route.

use crate::census::classify::{classify_planar, Classification};
use crate::census::{MultiplierData, OrbitRecord};
use crate::error::Result;
use crate::geom::{Interval, PlanarPoint};
use crate::model::PlanarMap;

#[derive(Debug, Clone)]
pub struct SearchSpec {
    pub box_x: Interval,
    pub box_y: Interval,
    /// Seeds per axis.
    pub seed_grid: usize,
    pub newton_tol: f64,
    pub max_newton: usize,
    /// Converged points closer than this are one point.
    pub dedup_radius: f64,
    pub unit_margin_tol: f64,
}

impl SearchSpec {
    pub fn in_box(halfwidth: f64, seed_grid: usize) -> Self {
        SearchSpec {
            box_x: Interval::centered(0.0, halfwidth),
            box_y: Interval::centered(0.0, halfwidth),
            seed_grid,
            newton_tol: 1e-12,
            max_newton: 60,
            dedup_radius: 1e-11,
            unit_margin_tol: 1e-8,
        }
    }

    pub fn rect(box_x: Interval, box_y: Interval, seed_grid: usize) -> Self {
        SearchSpec {
            box_x,
            box_y,
            seed_grid,
            newton_tol: 1e-12,
            max_newton: 60,
            dedup_radius: 1e-11,
            unit_margin_tol: 1e-8,
        }
    }

    fn seeds(&self) -> Vec<PlanarPoint> {
        let g = self.seed_grid.max(2);
        let mut out = Vec::with_capacity(g * g);
        for i in 0..g {
            for j in 0..g {
                let fx = (i as f64 + 0.5) / g as f64;
                let fy = (j as f64 + 0.5) / g as f64;
                out.push(PlanarPoint::new(
                    self.box_x.lo + fx * self.box_x.width(),
                    self.box_y.lo + fy * self.box_y.width(),
                ));
            }
        }
        out
    }

    fn escape_bound(&self) -> f64 {
        5.0 * (self.box_x.width() + self.box_y.width())
            + self.box_x.hi.abs()
            + self.box_y.hi.abs()
    }
}

/// All fixed points of the n-th iterate found from the seed grid,
/// deduplicated and sorted by coordinates.
pub fn periodic_points_2d(
    map: &dyn PlanarMap,
    n: u32,
    spec: &SearchSpec,
) -> Result<Vec<OrbitRecord>> {
    let mut converged: Vec<PlanarPoint> = Vec::new();
    let escape = spec.escape_bound();
    for seed in spec.seeds() {
        if let Some(p) = newton_from(map, n, seed, spec, escape) {
            converged.push(p);
        }
    }
    converged.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    let mut unique: Vec<PlanarPoint> = Vec::new();
    'outer: for p in converged {
        for q in &unique {
            if p.dist(q) < spec.dedup_radius.max(10.0 * spec.newton_tol) {
                continue 'outer;
            }
        }
        // Keep points inside (a hair beyond) the search box.
        let pad_x = 1e-9 * (1.0 + spec.box_x.width());
        let pad_y = 1e-9 * (1.0 + spec.box_y.width());
        if p.x < spec.box_x.lo - pad_x
            || p.x > spec.box_x.hi + pad_x
            || p.y < spec.box_y.lo - pad_y
            || p.y > spec.box_y.hi + pad_y
        {
            continue;
        }
        unique.push(p);
    }

    let mut records = Vec::with_capacity(unique.len());
    for p in unique {
        let Ok((image, jac)) = map.jacobian_n(p, n) else {
            continue;
        };
        let residual = image.dist(&p);
        let least = (1..=n)
            .filter(|d| n % d == 0)
            .find(|&d| match map.apply_n(p, d) {
                Ok(q) => q.dist(&p) < 1e-7 * (1.0 + p.x.abs() + p.y.abs()),
                Err(_) => false,
            })
            .unwrap_or(n);
        let eigen = jac.eigenvalues();
        // A nearly singular (J - I) means the fixed-point equation is
        // degenerate there; flag for manual inspection.
        let near_singular =
            (jac.a - 1.0) * (jac.d - 1.0) - jac.b * jac.c;
        let classification = if near_singular.abs() < 1e-10 * (1.0 + jac.trace().abs()) {
            Classification::NonhyperbolicOther
        } else {
            classify_planar(eigen, None, spec.unit_margin_tol, 5)
        };
        records.push(OrbitRecord {
            point: p,
            period: least,
            multipliers: MultiplierData::Pair(eigen),
            classification,
            residual,
        });
    }
    Ok(records)
}

fn newton_from(
    map: &dyn PlanarMap,
    n: u32,
    seed: PlanarPoint,
    spec: &SearchSpec,
    escape: f64,
) -> Option<PlanarPoint> {
    let mut p = seed;
    for _ in 0..spec.max_newton {
        let (image, jac) = map.jacobian_n(p, n).ok()?;
        let fx = image.x - p.x;
        let fy = image.y - p.y;
        if fx.hypot(fy) < spec.newton_tol {
            return Some(p);
        }
        let a = crate::geom::Mat2::new(jac.a - 1.0, jac.b, jac.c, jac.d - 1.0);
        let delta = a.solve(PlanarPoint::new(-fx, -fy)).ok()?;
        p = PlanarPoint::new(p.x + delta.x, p.y + delta.y);
        if !p.is_finite() || p.x.abs() + p.y.abs() > escape {
            return None;
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::renorm::LimitMap;

    #[test]
    fn limit_map_fixed_points() {
        let map = LimitMap::new(2, vec![-2.0, 0.0]).unwrap();
        let spec = SearchSpec::in_box(3.0, 12);
        let recs = periodic_points_2d(&map, 1, &spec).unwrap();
        assert_eq!(recs.len(), 2);
        assert!(recs[0].point.dist(&PlanarPoint::new(-1.0, -1.0)) < 1e-9);
        assert!(recs[1].point.dist(&PlanarPoint::new(2.0, 2.0)) < 1e-9);
        assert!(recs
            .iter()
            .all(|r| r.classification == Classification::Hyperbolic));
        // Multiplier moduli at (2,2): {0, 4}.
        let m = recs[1].multipliers.moduli();
        assert!((m[0] - 4.0).abs() < 1e-8 || (m[1] - 4.0).abs() < 1e-8);
    }

    #[test]
    fn zero_unfolding_fixed_points() {
        let map = LimitMap::new(2, vec![0.0, 0.0]).unwrap();
        let spec = SearchSpec::in_box(3.0, 12);
        let recs = periodic_points_2d(&map, 1, &spec).unwrap();
        let ys: Vec<f64> = recs.iter().map(|r| r.point.y).collect();
        assert_eq!(ys.len(), 2);
        assert!(ys[0].abs() < 1e-9);
        assert!((ys[1] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn period_two_of_doubling_limit() {
        let map = LimitMap::new(2, vec![-2.0, 0.0]).unwrap();
        let spec = SearchSpec::in_box(3.0, 24);
        let recs = periodic_points_2d(&map, 2, &spec).unwrap();
        assert_eq!(recs.len(), 4);
        let fresh: Vec<_> = recs.iter().filter(|r| r.period == 2).collect();
        assert_eq!(fresh.len(), 2);
    }
}
